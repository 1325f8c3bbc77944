//! Protocol automata.
//!
//! A protocol pattern compiles to a finite automaton over event shapes
//! (`?name` / `!name`). Construction is Thompson-style followed by
//! epsilon elimination; every reachable state is accepting, so the language
//! is the prefix closure of the pattern's language — a protocol constrains
//! how far an interaction may have progressed, and any well-formed beginning
//! of it is itself valid.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::ast::ProtocolPattern;
use crate::lts::{Dir, EventShape};

/// Prefix-closed nondeterministic automaton over protocol symbols. All
/// states are accepting and reachable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolNfa {
    /// Per-state symbol transitions.
    pub states: Vec<BTreeMap<EventShape, BTreeSet<u32>>>,
    pub start: u32,
}

impl ProtocolNfa {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    /// Symbols occurring anywhere in the automaton.
    pub fn symbols(&self) -> BTreeSet<EventShape> {
        let mut out = BTreeSet::new();
        for st in &self.states {
            for sym in st.keys() {
                out.insert(sym.clone());
            }
        }
        out
    }

    /// Nondeterministic simulation; since all states accept, a word is in
    /// the language exactly when a run survives.
    pub fn accepts(&self, word: &[EventShape]) -> bool {
        let mut current: BTreeSet<u32> = BTreeSet::from([self.start]);
        for sym in word {
            let mut next = BTreeSet::new();
            for q in &current {
                if let Some(ts) = self.states[*q as usize].get(sym) {
                    next.extend(ts.iter().copied());
                }
            }
            if next.is_empty() {
                return false;
            }
            current = next;
        }
        true
    }

    /// Successor state set on one symbol.
    pub fn step(&self, from: &BTreeSet<u32>, sym: &EventShape) -> BTreeSet<u32> {
        let mut next = BTreeSet::new();
        for q in from {
            if let Some(ts) = self.states[*q as usize].get(sym) {
                next.extend(ts.iter().copied());
            }
        }
        next
    }
}

struct EpsNode {
    eps: Vec<u32>,
    sym: Vec<(EventShape, u32)>,
}

struct Thompson {
    nodes: Vec<EpsNode>,
}

impl Thompson {
    fn node(&mut self) -> u32 {
        self.nodes.push(EpsNode { eps: Vec::new(), sym: Vec::new() });
        (self.nodes.len() - 1) as u32
    }

    fn fragment(&mut self, p: &ProtocolPattern) -> (u32, u32) {
        match p {
            ProtocolPattern::Symbol { request, service } => {
                let a = self.node();
                let b = self.node();
                let shape = EventShape {
                    dir: if *request { Dir::Request } else { Dir::Response },
                    service: service.clone(),
                };
                self.nodes[a as usize].sym.push((shape, b));
                (a, b)
            }
            ProtocolPattern::Seq(items) => {
                if items.is_empty() {
                    let a = self.node();
                    return (a, a);
                }
                let (first_in, mut out) = self.fragment(&items[0]);
                for item in &items[1..] {
                    let (i, o) = self.fragment(item);
                    self.nodes[out as usize].eps.push(i);
                    out = o;
                }
                (first_in, out)
            }
            ProtocolPattern::Alt(items) => {
                let a = self.node();
                let b = self.node();
                for item in items {
                    let (i, o) = self.fragment(item);
                    self.nodes[a as usize].eps.push(i);
                    self.nodes[o as usize].eps.push(b);
                }
                (a, b)
            }
            ProtocolPattern::Opt(inner) => {
                let a = self.node();
                let b = self.node();
                let (i, o) = self.fragment(inner);
                self.nodes[a as usize].eps.push(i);
                self.nodes[o as usize].eps.push(b);
                self.nodes[a as usize].eps.push(b);
                (a, b)
            }
            ProtocolPattern::Star(inner) => {
                let hub = self.node();
                let (i, o) = self.fragment(inner);
                self.nodes[hub as usize].eps.push(i);
                self.nodes[o as usize].eps.push(hub);
                (hub, hub)
            }
        }
    }

    fn eps_closure(&self, seed: u32) -> BTreeSet<u32> {
        let mut out = BTreeSet::from([seed]);
        let mut queue = alloc::vec![seed];
        while let Some(q) = queue.pop() {
            for &t in &self.nodes[q as usize].eps {
                if out.insert(t) {
                    queue.push(t);
                }
            }
        }
        out
    }
}

/// Compile a typechecked pattern into its prefix-closed automaton.
pub fn compile_protocol(pattern: &ProtocolPattern) -> ProtocolNfa {
    let mut t = Thompson { nodes: Vec::new() };
    let (start, _accept) = t.fragment(pattern);

    // Epsilon elimination: delta'(q, a) joins, over the closure of q, all
    // symbol edges, closing each target.
    let n = t.nodes.len();
    let mut eliminated: Vec<BTreeMap<EventShape, BTreeSet<u32>>> = Vec::with_capacity(n);
    for q in 0..n as u32 {
        let mut map: BTreeMap<EventShape, BTreeSet<u32>> = BTreeMap::new();
        for p in t.eps_closure(q) {
            for (shape, target) in &t.nodes[p as usize].sym {
                map.entry(shape.clone()).or_default().extend(t.eps_closure(*target));
            }
        }
        eliminated.push(map);
    }

    // Prune to states reachable from the start and renumber.
    let mut reachable: Vec<u32> = Vec::new();
    let mut seen: BTreeSet<u32> = BTreeSet::from([start]);
    let mut queue = alloc::vec![start];
    while let Some(q) = queue.pop() {
        reachable.push(q);
        for targets in eliminated[q as usize].values() {
            for &t2 in targets {
                if seen.insert(t2) {
                    queue.push(t2);
                }
            }
        }
    }
    reachable.sort();
    let renumber: BTreeMap<u32, u32> =
        reachable.iter().enumerate().map(|(i, q)| (*q, i as u32)).collect();

    let states: Vec<BTreeMap<EventShape, BTreeSet<u32>>> = reachable
        .iter()
        .map(|q| {
            eliminated[*q as usize]
                .iter()
                .map(|(shape, targets)| {
                    (shape.clone(), targets.iter().map(|t2| renumber[t2]).collect())
                })
                .collect()
        })
        .collect();

    ProtocolNfa { states, start: renumber[&start] }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::boxed::Box;
    use alloc::sync::Arc;
    use alloc::vec;

    fn sym(request: bool, name: &str) -> ProtocolPattern {
        ProtocolPattern::Symbol { request, service: Arc::from(name) }
    }

    fn shape(request: bool, name: &str) -> EventShape {
        EventShape {
            dir: if request { Dir::Request } else { Dir::Response },
            service: Arc::from(name),
        }
    }

    fn word(specs: &[(bool, &str)]) -> Vec<EventShape> {
        specs.iter().map(|(r, n)| shape(*r, n)).collect()
    }

    #[test]
    fn optional_pair_accepts_its_three_prefixes() {
        // (?a !a)?
        let p = ProtocolPattern::Opt(Box::new(ProtocolPattern::Seq(vec![
            sym(true, "a"),
            sym(false, "a"),
        ])));
        let nfa = compile_protocol(&p);
        assert!(nfa.accepts(&word(&[])));
        assert!(nfa.accepts(&word(&[(true, "a")])));
        assert!(nfa.accepts(&word(&[(true, "a"), (false, "a")])));
        assert!(!nfa.accepts(&word(&[(false, "a")])));
        assert!(!nfa.accepts(&word(&[(true, "a"), (false, "a"), (true, "a")])));
    }

    #[test]
    fn starred_pair_accepts_all_prefixes_of_repetitions() {
        // (?a !a)*
        let p = ProtocolPattern::Star(Box::new(ProtocolPattern::Seq(vec![
            sym(true, "a"),
            sym(false, "a"),
        ])));
        let nfa = compile_protocol(&p);
        for n in 0..4 {
            let mut w = Vec::new();
            for _ in 0..n {
                w.push(shape(true, "a"));
                w.push(shape(false, "a"));
            }
            assert!(nfa.accepts(&w));
            w.push(shape(true, "a"));
            assert!(nfa.accepts(&w), "odd prefix of length {}", w.len());
            w.push(shape(true, "a"));
            assert!(!nfa.accepts(&w));
        }
    }

    #[test]
    fn session_protocol_orders_exchanges() {
        // (?signUp !signUp)? ?logIn !logIn ?checkBalance !checkBalance
        // (?deposit !deposit)* (?logOut !logOut)?
        let pair = |name: &str| ProtocolPattern::Seq(vec![sym(true, name), sym(false, name)]);
        let p = ProtocolPattern::Seq(vec![
            ProtocolPattern::Opt(Box::new(pair("signUp"))),
            sym(true, "logIn"),
            sym(false, "logIn"),
            sym(true, "checkBalance"),
            sym(false, "checkBalance"),
            ProtocolPattern::Star(Box::new(pair("deposit"))),
            ProtocolPattern::Opt(Box::new(pair("logOut"))),
        ]);
        let nfa = compile_protocol(&p);
        let full = word(&[
            (true, "signUp"),
            (false, "signUp"),
            (true, "logIn"),
            (false, "logIn"),
            (true, "checkBalance"),
            (false, "checkBalance"),
            (true, "deposit"),
            (false, "deposit"),
            (true, "logOut"),
            (false, "logOut"),
        ]);
        assert!(nfa.accepts(&full));
        assert!(!nfa.accepts(&word(&[(true, "deposit")])));
        // prefix closure: every prefix of the full session is accepted
        for k in 0..=full.len() {
            assert!(nfa.accepts(&full[..k]), "prefix of length {k}");
        }
        // skipping signUp is fine, skipping checkBalance is not
        assert!(nfa.accepts(&word(&[(true, "logIn"), (false, "logIn")])));
        assert!(!nfa.accepts(&word(&[
            (true, "logIn"),
            (false, "logIn"),
            (true, "deposit"),
        ])));
    }

    #[test]
    fn alternation_branches_both_live() {
        // ?a !a | ?b !b
        let p = ProtocolPattern::Alt(vec![
            ProtocolPattern::Seq(vec![sym(true, "a"), sym(false, "a")]),
            ProtocolPattern::Seq(vec![sym(true, "b"), sym(false, "b")]),
        ]);
        let nfa = compile_protocol(&p);
        assert!(nfa.accepts(&word(&[(true, "a"), (false, "a")])));
        assert!(nfa.accepts(&word(&[(true, "b")])));
        assert!(!nfa.accepts(&word(&[(true, "a"), (false, "b")])));
    }

    #[test]
    fn empty_pattern_accepts_only_the_empty_word() {
        let p = ProtocolPattern::Seq(vec![]);
        let nfa = compile_protocol(&p);
        assert!(nfa.accepts(&[]));
        assert!(!nfa.accepts(&word(&[(true, "a")])));
        assert_eq!(nfa.state_count(), 1);
    }

    #[test]
    fn all_states_reachable() {
        let p = ProtocolPattern::Star(Box::new(ProtocolPattern::Alt(vec![
            ProtocolPattern::Seq(vec![sym(true, "a"), sym(false, "a")]),
            ProtocolPattern::Opt(Box::new(sym(true, "b"))),
        ])));
        let nfa = compile_protocol(&p);
        let mut seen = BTreeSet::from([nfa.start]);
        let mut queue = vec![nfa.start];
        while let Some(q) = queue.pop() {
            for targets in nfa.states[q as usize].values() {
                for &t in targets {
                    if seen.insert(t) {
                        queue.push(t);
                    }
                }
            }
        }
        assert_eq!(seen.len(), nfa.state_count());
    }
}
