//! Normalization: determinize an LTS for product-based checking.
//!
//! Each normalized node is the tau-closed set of raw states reachable by one
//! visible trace, carrying:
//!
//! - deterministic transitions on concrete visible events,
//! - a `divergent` flag (some member can run internal steps forever),
//! - the subset-minimal acceptance sets over its stable members, as event
//!   shapes. An empty acceptance set means the node can refuse everything.
//!
//! Transitions record the underlying visible language exactly, including
//! below divergent nodes. Consumers that work in the divergence-closed
//! semantics (the refinement product, the failures/divergences enumerations)
//! treat divergent nodes as absorbing — after divergence every extension is
//! possible — rather than this module materializing self-loops, so the same
//! normal form also serves trace- and failures-style checks.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::lts::{divergent_states, Event, EventShape, Label, Lts, LtsError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormNode {
    /// Sorted member states of the underlying LTS.
    pub members: Vec<u32>,
    pub divergent: bool,
    /// Subset-minimal acceptance sets of the stable members.
    pub acceptances: Vec<BTreeSet<EventShape>>,
    pub transitions: BTreeMap<Event, u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedLts {
    pub nodes: Vec<NormNode>,
    pub start: u32,
    pub alphabet: BTreeSet<EventShape>,
    /// Concrete event universe inherited from the source LTS; the closure of
    /// divergent nodes ranges over it.
    pub universe: BTreeSet<Event>,
}

impl NormalizedLts {
    pub fn node(&self, idx: u32) -> &NormNode {
        &self.nodes[idx as usize]
    }

    pub fn transition_count(&self) -> usize {
        self.nodes.iter().map(|n| n.transitions.len()).sum()
    }
}

/// Keep only subset-minimal sets.
fn minimal_sets(sets: BTreeSet<BTreeSet<EventShape>>) -> Vec<BTreeSet<EventShape>> {
    let all: Vec<BTreeSet<EventShape>> = sets.into_iter().collect();
    let mut out = Vec::new();
    'outer: for (i, a) in all.iter().enumerate() {
        for (j, b) in all.iter().enumerate() {
            if i != j && b.is_subset(a) && b != a {
                continue 'outer;
            }
        }
        out.push(a.clone());
    }
    out
}

/// Default cap on the number of normalized nodes.
pub const DEFAULT_NODE_CAP: usize = 1_000_000;

pub fn normalize(lts: &Lts) -> Result<NormalizedLts, LtsError> {
    normalize_with(lts, DEFAULT_NODE_CAP)
}

pub fn normalize_with(lts: &Lts, node_cap: usize) -> Result<NormalizedLts, LtsError> {
    let divergent = divergent_states(lts);

    let close = |seed: BTreeSet<u32>| lts.tau_closure(&seed);

    let start_set: Vec<u32> = close(BTreeSet::from([lts.start])).into_iter().collect();

    let mut index: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
    let mut nodes: Vec<NormNode> = Vec::new();
    let mut queue: alloc::collections::VecDeque<u32> = alloc::collections::VecDeque::new();

    let mut intern = |members: Vec<u32>,
                      nodes: &mut Vec<NormNode>,
                      queue: &mut alloc::collections::VecDeque<u32>|
     -> Result<u32, LtsError> {
        if let Some(i) = index.get(&members) {
            return Ok(*i);
        }
        if nodes.len() >= node_cap {
            return Err(LtsError::StateCapExceeded { cap: node_cap });
        }
        let idx = nodes.len() as u32;
        let is_divergent = members.iter().any(|m| divergent.contains(m));
        let mut acceptance_sets: BTreeSet<BTreeSet<EventShape>> = BTreeSet::new();
        for &m in &members {
            let st = lts.state(m);
            if st.is_stable() {
                acceptance_sets.insert(st.initial_shapes());
            }
        }
        nodes.push(NormNode {
            members: members.clone(),
            divergent: is_divergent,
            acceptances: minimal_sets(acceptance_sets),
            transitions: BTreeMap::new(),
        });
        index.insert(members, idx);
        queue.push_back(idx);
        Ok(idx)
    };

    let start = intern(start_set, &mut nodes, &mut queue)?;

    while let Some(idx) = queue.pop_front() {
        let members = nodes[idx as usize].members.clone();
        let mut on_event: BTreeMap<Event, BTreeSet<u32>> = BTreeMap::new();
        for &m in &members {
            for (label, target) in &lts.state(m).transitions {
                if let Label::Visible(e) = label {
                    on_event.entry(e.clone()).or_default().insert(*target);
                }
            }
        }
        let mut transitions = BTreeMap::new();
        for (event, targets) in on_event {
            let closed: Vec<u32> = close(targets).into_iter().collect();
            let t = intern(closed, &mut nodes, &mut queue)?;
            transitions.insert(event, t);
        }
        nodes[idx as usize].transitions = transitions;
    }

    Ok(NormalizedLts {
        nodes,
        start,
        alphabet: lts.alphabet.clone(),
        universe: lts.universe.clone(),
    })
}

/// All visible traces of the raw LTS up to `max_len`, without divergence
/// closure. Test helper shared by the trace-preservation checks.
pub fn raw_traces(lts: &Lts, max_len: usize) -> BTreeSet<Vec<Event>> {
    let mut out = BTreeSet::new();
    let start: Vec<u32> = lts.tau_closure(&BTreeSet::from([lts.start])).into_iter().collect();
    let mut frontier: Vec<(Vec<Event>, Vec<u32>)> = alloc::vec![(Vec::new(), start)];
    out.insert(Vec::new());
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (trace, subset) in &frontier {
            let mut on_event: BTreeMap<Event, BTreeSet<u32>> = BTreeMap::new();
            for &m in subset {
                for (label, target) in &lts.state(m).transitions {
                    if let Label::Visible(e) = label {
                        on_event.entry(e.clone()).or_default().insert(*target);
                    }
                }
            }
            for (event, targets) in on_event {
                let mut t = trace.clone();
                t.push(event);
                let closed: Vec<u32> = lts.tau_closure(&targets).into_iter().collect();
                out.insert(t.clone());
                next.push((t, closed));
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    out
}

/// All visible traces of a normalized LTS up to `max_len`.
pub fn normalized_traces(norm: &NormalizedLts, max_len: usize) -> BTreeSet<Vec<Event>> {
    let mut out = BTreeSet::new();
    let mut frontier: Vec<(Vec<Event>, u32)> = alloc::vec![(Vec::new(), norm.start)];
    out.insert(Vec::new());
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (trace, node) in &frontier {
            for (event, target) in &norm.node(*node).transitions {
                let mut t = trace.clone();
                t.push(event.clone());
                out.insert(t.clone());
                next.push((t, *target));
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    out
}
