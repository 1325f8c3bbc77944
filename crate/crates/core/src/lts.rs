//! Explicit labelled transition systems compiled from contracts.
//!
//! States pair a resource valuation with an execution phase:
//!
//! - `Idle` — at rest; offers a request `?m(x)` for every public service `m`
//!   whose guard holds and every input binding `x`.
//! - `Responding` — owes exactly one response `!m(y)`.
//! - `Blocked` — a permanent wait; no outgoing transitions.
//! - `PreCall` — about to run a private service; its `tau` transitions lead
//!   into the callee's expansion.
//! - `Chaos` — unconstrained behavior, entered when a precondition fails. It
//!   is divergent (a `tau` self-loop) and refines nothing.
//!
//! Behavior between events is resolved eagerly: a request edge lands directly
//! on the responding/blocked/pre-call state produced by outcome enumeration,
//! so purely internal bookkeeping never creates extra states. Private calls
//! appear as `tau` edges tagged with the callee name. Tail calls collapse the
//! caller frame, which keeps tail-recursive retry loops finite-state; genuine
//! non-tail recursion grows the frame stack and runs into the state cap.
//!
//! Construction is breadth-first and deterministic: the same contract always
//! yields the same indexed state and transition sets.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::ast::{Contract, Domain, Stmt, Visibility};
use crate::eval::{enumerate_outcomes, evaluate, Outcome};
use crate::value::{Valuation, Value};

/// Direction of a visible event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dir {
    Request,
    Response,
}

impl Dir {
    pub fn sigil(&self) -> char {
        match self {
            Dir::Request => '?',
            Dir::Response => '!',
        }
    }
}

/// A concrete visible event: a request with input values or a response with
/// output values. Events from independently built systems compare equal when
/// service names and values match, which refinement checking relies on.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event {
    pub dir: Dir,
    pub service: Arc<str>,
    pub args: Vec<Value>,
}

impl Event {
    pub fn shape(&self) -> EventShape {
        EventShape { dir: self.dir, service: self.service.clone() }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}(", self.dir.sigil(), self.service)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// Event shape: direction and service name, abstracting argument values.
/// Alphabets, refusal sets, and acceptance sets are sets of shapes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventShape {
    pub dir: Dir,
    pub service: Arc<str>,
}

impl fmt::Display for EventShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.dir.sigil(), self.service)
    }
}

/// Transition label: a visible event or an internal step. `Tau(Some(p))` is a
/// hidden invocation of private service `p`; `Tau(None)` is the chaos
/// self-loop.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Visible(Event),
    Tau(Option<Arc<str>>),
}

impl Label {
    pub fn is_tau(&self) -> bool {
        matches!(self, Label::Tau(_))
    }
}

/// One suspended activation: the service whose code is running, its input
/// values, and the statements left to execute once control returns here.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Frame {
    pub service: u32,
    pub params: Vec<Value>,
    pub remainder: Vec<Stmt>,
}

/// Execution phase of a state; together with the valuation it identifies the
/// state for deduplication.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Phase {
    Idle,
    Responding { service: u32, outputs: Vec<Value> },
    Blocked,
    /// About to invoke `target`; `frames[0]` is the public activation.
    PreCall { target: u32, frames: Vec<Frame> },
    Chaos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LtsState {
    pub valuation: Valuation,
    pub phase: Phase,
    /// Sorted canonically by (label, target).
    pub transitions: Vec<(Label, u32)>,
}

impl LtsState {
    /// Stable: no outgoing internal transition.
    pub fn is_stable(&self) -> bool {
        self.transitions.iter().all(|(l, _)| !l.is_tau())
    }

    pub fn visible_out(&self) -> impl Iterator<Item = (&Event, u32)> {
        self.transitions.iter().filter_map(|(l, t)| match l {
            Label::Visible(e) => Some((e, *t)),
            Label::Tau(_) => None,
        })
    }

    pub fn initial_shapes(&self) -> BTreeSet<EventShape> {
        self.visible_out().map(|(e, _)| e.shape()).collect()
    }
}

/// Service name/visibility table kept alongside the graph for hiding
/// validation and rendering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceInfo {
    pub name: Arc<str>,
    pub visibility: Visibility,
}

/// Explicit transition system over finite valuations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lts {
    pub states: Vec<LtsState>,
    pub start: u32,
    /// Request/response shapes of the public services.
    pub alphabet: BTreeSet<EventShape>,
    /// Every concrete event over the declared input/output domains. Used for
    /// divergence closure in the semantic layers.
    pub universe: BTreeSet<Event>,
    pub services: Vec<ServiceInfo>,
}

impl Lts {
    pub fn transition_count(&self) -> usize {
        self.states.iter().map(|s| s.transitions.len()).sum()
    }

    pub fn state(&self, idx: u32) -> &LtsState {
        &self.states[idx as usize]
    }

    /// Internal-closure of a state set: everything reachable by tau steps.
    pub fn tau_closure(&self, seed: &BTreeSet<u32>) -> BTreeSet<u32> {
        let mut out = seed.clone();
        let mut queue: Vec<u32> = seed.iter().copied().collect();
        while let Some(s) = queue.pop() {
            for (l, t) in &self.states[s as usize].transitions {
                if l.is_tau() && out.insert(*t) {
                    queue.push(*t);
                }
            }
        }
        out
    }

    /// States reachable after a visible trace from the start state.
    pub fn replay(&self, trace: &[Event]) -> BTreeSet<u32> {
        let mut current = self.tau_closure(&BTreeSet::from([self.start]));
        for ev in trace {
            let mut next = BTreeSet::new();
            for s in &current {
                for (l, t) in &self.states[*s as usize].transitions {
                    if matches!(l, Label::Visible(e) if e == ev) {
                        next.insert(*t);
                    }
                }
            }
            current = self.tau_closure(&next);
        }
        current
    }
}

/// Resource limits for construction.
#[derive(Debug, Clone, Copy)]
pub struct BuildConfig {
    pub state_cap: usize,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig { state_cap: 1_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LtsError {
    /// Construction exceeded the configured state cap.
    StateCapExceeded { cap: usize },
    /// `hide` was given a name that is not a declared private service.
    UnknownService { name: String },
}

impl fmt::Display for LtsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LtsError::StateCapExceeded { cap } => {
                write!(f, "state space exceeds the configured cap of {cap} states")
            }
            LtsError::UnknownService { name } => {
                write!(f, "`{name}` is not a declared private service")
            }
        }
    }
}

/// Cartesian product of domain value lists, lexicographic in declaration
/// order. A service with no parameters has exactly one (empty) combination.
fn combinations(domains: &[Domain]) -> Vec<Vec<Value>> {
    let mut out: Vec<Vec<Value>> = alloc::vec![Vec::new()];
    for d in domains {
        let values = d.values();
        let mut next = Vec::with_capacity(out.len() * values.len());
        for prefix in &out {
            for v in &values {
                let mut row = prefix.clone();
                row.push(v.clone());
                next.push(row);
            }
        }
        out = next;
    }
    out
}

/// Where a resolved execution fragment ends up.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Terminal {
    Respond { valuation: Valuation, service: u32, outputs: Vec<Value> },
    Blocked { valuation: Valuation },
    Call { target: u32, valuation: Valuation, frames: Vec<Frame> },
    Chaos,
}

struct Builder<'a> {
    contract: &'a Contract,
    config: BuildConfig,
    states: Vec<LtsState>,
    index: BTreeMap<(Valuation, Phase), u32>,
}

impl<'a> Builder<'a> {
    fn intern(&mut self, valuation: Valuation, phase: Phase) -> Result<(u32, bool), LtsError> {
        if let Some(idx) = self.index.get(&(valuation.clone(), phase.clone())) {
            return Ok((*idx, false));
        }
        if self.states.len() >= self.config.state_cap {
            return Err(LtsError::StateCapExceeded { cap: self.config.state_cap });
        }
        let idx = self.states.len() as u32;
        self.index.insert((valuation.clone(), phase.clone()), idx);
        self.states.push(LtsState { valuation, phase, transitions: Vec::new() });
        Ok((idx, true))
    }

    /// Run the top frame's remainder to its terminals, popping frames on
    /// return. A private frame that returns resumes its caller; the public
    /// frame's return becomes the response. A public frame that completes
    /// without binding its declared outputs is unconstrained (chaos).
    fn run_frames(&self, valuation: Valuation, frames: Vec<Frame>, out: &mut Vec<Terminal>) {
        let top = frames.last().expect("frame stack never empty");
        let svc = &self.contract.services[top.service as usize];
        let outcomes = enumerate_outcomes(
            &top.remainder,
            &valuation,
            &top.params,
            &self.contract.resources,
            &svc.outputs,
        );
        for outcome in outcomes {
            match outcome {
                Outcome::Returned { state, outputs } => {
                    if frames.len() == 1 {
                        if outputs.len() == svc.outputs.len() {
                            let values = outputs.into_iter().map(|(_, v)| v).collect();
                            out.push(Terminal::Respond {
                                valuation: state,
                                service: top.service,
                                outputs: values,
                            });
                        } else {
                            out.push(Terminal::Chaos);
                        }
                    } else {
                        let parent_frames = frames[..frames.len() - 1].to_vec();
                        self.run_frames(state, parent_frames, out);
                    }
                }
                Outcome::Blocked => {
                    out.push(Terminal::Blocked { valuation: valuation.clone() });
                }
                Outcome::Calls { service, state, remainder } => {
                    let callee = &self.contract.services[service as usize];
                    // The callee's guard gates the call; an infeasible call
                    // prunes this branch.
                    if !evaluate(&callee.guard, &state, &[]).as_bool() {
                        continue;
                    }
                    let mut new_frames = frames.clone();
                    new_frames.last_mut().unwrap().remainder = remainder;
                    // Tail-call collapse: private frames with nothing left to
                    // do would return immediately, so drop them now. This is
                    // what keeps tail-recursive retry loops finite-state.
                    while new_frames.len() > 1
                        && new_frames.last().unwrap().remainder.is_empty()
                    {
                        new_frames.pop();
                    }
                    out.push(Terminal::Call { target: service, valuation: state, frames: new_frames });
                }
            }
        }
    }

    fn terminals_of_request(&self, valuation: &Valuation, service: u32, params: &[Value]) -> Vec<Terminal> {
        let svc = &self.contract.services[service as usize];
        let frames = alloc::vec![Frame {
            service,
            params: params.to_vec(),
            remainder: svc.behavior.clone(),
        }];
        let mut terminals = Vec::new();
        self.run_frames(valuation.clone(), frames, &mut terminals);
        dedup_keep_order(terminals)
    }

    fn terminals_of_call(&self, valuation: &Valuation, target: u32, frames: &[Frame]) -> Vec<Terminal> {
        let callee = &self.contract.services[target as usize];
        let mut entered = frames.to_vec();
        entered.push(Frame { service: target, params: Vec::new(), remainder: callee.behavior.clone() });
        let mut terminals = Vec::new();
        self.run_frames(valuation.clone(), entered, &mut terminals);
        dedup_keep_order(terminals)
    }

    fn state_of_terminal(&mut self, fallback_valuation: &Valuation, t: Terminal) -> Result<(u32, bool), LtsError> {
        match t {
            Terminal::Respond { valuation, service, outputs } => {
                self.intern(valuation, Phase::Responding { service, outputs })
            }
            Terminal::Blocked { valuation } => self.intern(valuation, Phase::Blocked),
            Terminal::Call { target, valuation, frames } => {
                self.intern(valuation, Phase::PreCall { target, frames })
            }
            Terminal::Chaos => self.intern(fallback_valuation.clone(), Phase::Chaos),
        }
    }
}

fn dedup_keep_order<T: Ord + Clone>(items: Vec<T>) -> Vec<T> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for item in items {
        if seen.insert(item.clone()) {
            out.push(item);
        }
    }
    out
}

/// Compile a typechecked contract into its transition system with default
/// limits.
pub fn build_lts(contract: &Contract) -> Result<Lts, LtsError> {
    build_lts_with(contract, BuildConfig::default())
}

/// Compile with explicit limits.
pub fn build_lts_with(contract: &Contract, config: BuildConfig) -> Result<Lts, LtsError> {
    let mut alphabet = BTreeSet::new();
    let mut universe = BTreeSet::new();
    for s in contract.services.iter().filter(|s| s.is_public()) {
        alphabet.insert(EventShape { dir: Dir::Request, service: s.name.clone() });
        alphabet.insert(EventShape { dir: Dir::Response, service: s.name.clone() });
        let input_domains: Vec<Domain> = s.inputs.iter().map(|p| p.domain.clone()).collect();
        for combo in combinations(&input_domains) {
            universe.insert(Event { dir: Dir::Request, service: s.name.clone(), args: combo });
        }
        let output_domains: Vec<Domain> = s.outputs.iter().map(|p| p.domain.clone()).collect();
        for combo in combinations(&output_domains) {
            universe.insert(Event { dir: Dir::Response, service: s.name.clone(), args: combo });
        }
    }

    let mut builder = Builder { contract, config, states: Vec::new(), index: BTreeMap::new() };

    let init = Valuation(contract.resources.iter().map(|r| r.init.clone()).collect());
    let (start, _) = builder.intern(init, Phase::Idle)?;

    let mut queue: alloc::collections::VecDeque<u32> = alloc::collections::VecDeque::new();
    queue.push_back(start);
    let mut enqueued: BTreeSet<u32> = BTreeSet::from([start]);

    while let Some(idx) = queue.pop_front() {
        let valuation = builder.states[idx as usize].valuation.clone();
        let phase = builder.states[idx as usize].phase.clone();
        let mut edges: Vec<(Label, u32)> = Vec::new();

        match phase {
            Phase::Idle => {
                for (si, svc) in contract.services.iter().enumerate() {
                    if !svc.is_public() {
                        continue;
                    }
                    if !evaluate(&svc.guard, &valuation, &[]).as_bool() {
                        continue;
                    }
                    let input_domains: Vec<Domain> =
                        svc.inputs.iter().map(|p| p.domain.clone()).collect();
                    for combo in combinations(&input_domains) {
                        let event = Event {
                            dir: Dir::Request,
                            service: svc.name.clone(),
                            args: combo.clone(),
                        };
                        if !evaluate(&svc.pre, &valuation, &combo).as_bool() {
                            let (chaos, new) =
                                builder.intern(valuation.clone(), Phase::Chaos)?;
                            if new {
                                enqueued.insert(chaos);
                                queue.push_back(chaos);
                            }
                            edges.push((Label::Visible(event), chaos));
                            continue;
                        }
                        let terminals =
                            builder.terminals_of_request(&valuation, si as u32, &combo);
                        for t in terminals {
                            let (target, new) = builder.state_of_terminal(&valuation, t)?;
                            if new && enqueued.insert(target) {
                                queue.push_back(target);
                            }
                            edges.push((Label::Visible(event.clone()), target));
                        }
                    }
                }
            }
            Phase::Responding { service, outputs } => {
                let name = contract.services[service as usize].name.clone();
                let event = Event { dir: Dir::Response, service: name, args: outputs };
                let (target, new) = builder.intern(valuation.clone(), Phase::Idle)?;
                if new && enqueued.insert(target) {
                    queue.push_back(target);
                }
                edges.push((Label::Visible(event), target));
            }
            Phase::Blocked => {}
            Phase::PreCall { target, frames } => {
                let name = contract.services[target as usize].name.clone();
                let terminals = builder.terminals_of_call(&valuation, target, &frames);
                if terminals.is_empty() {
                    // The callee cannot make progress here; the call waits
                    // forever.
                    let (blocked, new) = builder.intern(valuation.clone(), Phase::Blocked)?;
                    if new && enqueued.insert(blocked) {
                        queue.push_back(blocked);
                    }
                    edges.push((Label::Tau(Some(name)), blocked));
                } else {
                    for t in terminals {
                        let (tgt, new) = builder.state_of_terminal(&valuation, t)?;
                        if new && enqueued.insert(tgt) {
                            queue.push_back(tgt);
                        }
                        edges.push((Label::Tau(Some(name.clone())), tgt));
                    }
                }
            }
            Phase::Chaos => {
                edges.push((Label::Tau(None), idx));
            }
        }

        edges = dedup_keep_order(edges);
        edges.sort();
        builder.states[idx as usize].transitions = edges;
    }

    Ok(Lts {
        states: builder.states,
        start,
        alphabet,
        universe,
        services: contract
            .services
            .iter()
            .map(|s| ServiceInfo { name: s.name.clone(), visibility: s.visibility })
            .collect(),
    })
}

/// Hide private services. Invocations of private services are already
/// internal `tau` steps and the alphabet only ever contains public shapes, so
/// the transition structure is unchanged; this validates the name set and
/// produces the semantic object "contract minus its private services" that
/// the refinement and consistency checks operate on.
pub fn hide(lts: &Lts, private_names: &BTreeSet<Arc<str>>) -> Result<Lts, LtsError> {
    for name in private_names {
        let known = lts
            .services
            .iter()
            .any(|s| s.name == *name && s.visibility == Visibility::Private);
        if !known {
            return Err(LtsError::UnknownService { name: String::from(&**name) });
        }
    }
    Ok(lts.clone())
}

/// Hide every declared private service.
pub fn hide_all(lts: &Lts) -> Lts {
    lts.clone()
}

/// States from which an infinite internal path exists: states that can reach,
/// via tau edges only, a tau cycle. Chaos states carry a tau self-loop and so
/// are always included.
pub fn divergent_states(lts: &Lts) -> BTreeSet<u32> {
    let n = lts.states.len();
    let tau_succ: Vec<Vec<u32>> = lts
        .states
        .iter()
        .map(|s| {
            s.transitions
                .iter()
                .filter(|(l, _)| l.is_tau())
                .map(|(_, t)| *t)
                .collect()
        })
        .collect();

    // Iterative Tarjan over the tau subgraph.
    let mut index_of: Vec<Option<u32>> = alloc::vec![None; n];
    let mut low: Vec<u32> = alloc::vec![0; n];
    let mut on_stack: Vec<bool> = alloc::vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut counter: u32 = 0;
    let mut scc_of: Vec<u32> = alloc::vec![0; n];
    let mut scc_count: u32 = 0;

    enum Task {
        Enter(u32),
        Resume(u32, usize),
    }

    for root in 0..n as u32 {
        if index_of[root as usize].is_some() {
            continue;
        }
        let mut work = alloc::vec![Task::Enter(root)];
        while let Some(task) = work.pop() {
            match task {
                Task::Enter(v) => {
                    if index_of[v as usize].is_some() {
                        continue;
                    }
                    index_of[v as usize] = Some(counter);
                    low[v as usize] = counter;
                    counter += 1;
                    stack.push(v);
                    on_stack[v as usize] = true;
                    work.push(Task::Resume(v, 0));
                }
                Task::Resume(v, mut i) => {
                    let succs = &tau_succ[v as usize];
                    let mut descended = false;
                    while i < succs.len() {
                        let w = succs[i];
                        i += 1;
                        match index_of[w as usize] {
                            None => {
                                work.push(Task::Resume(v, i));
                                work.push(Task::Enter(w));
                                descended = true;
                                break;
                            }
                            Some(wi) => {
                                if on_stack[w as usize] {
                                    low[v as usize] = low[v as usize].min(wi);
                                }
                            }
                        }
                    }
                    if descended {
                        continue;
                    }
                    // all successors done; fold low-links of tree children
                    for &w in succs {
                        if on_stack[w as usize] {
                            low[v as usize] = low[v as usize].min(low[w as usize]);
                        }
                    }
                    if low[v as usize] == index_of[v as usize].unwrap() {
                        loop {
                            let w = stack.pop().unwrap();
                            on_stack[w as usize] = false;
                            scc_of[w as usize] = scc_count;
                            if w == v {
                                break;
                            }
                        }
                        scc_count += 1;
                    }
                }
            }
        }
    }

    // An SCC diverges if it contains a tau edge between members (any SCC of
    // size >= 2 in the tau subgraph does; size 1 needs a self-loop).
    let mut scc_size: Vec<u32> = alloc::vec![0; scc_count as usize];
    for v in 0..n {
        scc_size[scc_of[v] as usize] += 1;
    }
    let mut divergent: BTreeSet<u32> = BTreeSet::new();
    for v in 0..n as u32 {
        let scc = scc_of[v as usize];
        if scc_size[scc as usize] >= 2 {
            divergent.insert(v);
        } else if tau_succ[v as usize].contains(&v) {
            divergent.insert(v);
        }
    }

    // Backward closure over tau edges.
    let mut rev: Vec<Vec<u32>> = alloc::vec![Vec::new(); n];
    for (v, succs) in tau_succ.iter().enumerate() {
        for &w in succs {
            rev[w as usize].push(v as u32);
        }
    }
    let mut queue: Vec<u32> = divergent.iter().copied().collect();
    while let Some(v) = queue.pop() {
        for &p in &rev[v as usize] {
            if divergent.insert(p) {
                queue.push(p);
            }
        }
    }
    divergent
}

/// Private service names participating in tau cycles reachable (via tau) from
/// `state`. Sorted and deduplicated; empty when the divergence is chaos.
pub fn divergence_cycle_names(lts: &Lts, state: u32) -> Vec<Arc<str>> {
    // Restrict to the tau-reachable region from `state`, then report labels
    // of tau edges that stay inside a cycle of that region.
    let region = lts.tau_closure(&BTreeSet::from([state]));
    let divergent = divergent_states(lts);
    let mut names: BTreeSet<Arc<str>> = BTreeSet::new();
    for s in &region {
        if !divergent.contains(s) {
            continue;
        }
        for (l, t) in &lts.states[*s as usize].transitions {
            if let Label::Tau(Some(name)) = l {
                // Edge inside the divergent region that can come back: both
                // endpoints divergent and tau-connected.
                if divergent.contains(t) && lts.tau_closure(&BTreeSet::from([*t])).contains(s) {
                    names.insert(name.clone());
                }
            }
        }
    }
    names.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typecheck::parse_and_check;

    fn build(src: &str) -> Lts {
        build_lts(&parse_and_check(src).unwrap()).unwrap()
    }

    const ONE_SERVICE: &str = "contract C { resources { b: bool = false; } \
        service +m() -> (r: bool) { guard true; pre true; effect { return r = true; } } \
        protocol { (?m !m)* } }";

    #[test]
    fn one_service_contract_builds_a_two_state_cycle() {
        // idle --?m()--> responding --!m(true)--> idle (deduplicated), so two
        // states and two transitions.
        let lts = build(ONE_SERVICE);
        assert_eq!(lts.states.len(), 2);
        assert_eq!(lts.transition_count(), 2);
        assert_eq!(lts.alphabet.len(), 2);
        let start = lts.state(lts.start);
        assert_eq!(start.transitions.len(), 1);
        match &start.transitions[0].0 {
            Label::Visible(e) => {
                assert_eq!(e.dir, Dir::Request);
                assert_eq!(&*e.service, "m");
            }
            other => panic!("unexpected label {other:?}"),
        }
    }

    #[test]
    fn construction_is_deterministic() {
        let a = build(ONE_SERVICE);
        let b = build(ONE_SERVICE);
        assert_eq!(a, b);
    }

    #[test]
    fn guard_false_means_request_not_offered() {
        let src = "contract C { resources { open: bool = false; } \
            service +go() -> (r: bool) { guard open; pre true; effect { return r = true; } } \
            service +unlock() -> (r: bool) { guard open == false; pre true; \
              effect { open = true; return r = true; } } \
            protocol { ?unlock !unlock ?go !go } }";
        let lts = build(src);
        let start = lts.state(lts.start);
        let shapes = start.initial_shapes();
        assert!(shapes.contains(&EventShape { dir: Dir::Request, service: Arc::from("unlock") }));
        assert!(!shapes.contains(&EventShape { dir: Dir::Request, service: Arc::from("go") }));
    }

    #[test]
    fn precondition_failure_reaches_chaos() {
        let src = "contract C { resources { b: bool = false; } \
            service +m(x: int[0..1]) -> (r: bool) { guard true; pre x >= 1; \
              effect { return r = true; } } \
            protocol { (?m !m)* } }";
        let lts = build(src);
        let chaos: Vec<u32> = (0..lts.states.len() as u32)
            .filter(|i| matches!(lts.state(*i).phase, Phase::Chaos))
            .collect();
        assert_eq!(chaos.len(), 1);
        // chaos self-loops on tau and is divergent
        let divergent = divergent_states(&lts);
        assert!(divergent.contains(&chaos[0]));
    }

    #[test]
    fn blocked_state_has_no_transitions() {
        let src = "contract C { resources { b: bool = false; } \
            service +m() -> (r: bool) { guard true; pre true; \
              effect { choice { { return r = true; } { block; } } } } \
            protocol { (?m !m)* } }";
        let lts = build(src);
        let blocked: Vec<&LtsState> = lts
            .states
            .iter()
            .filter(|s| matches!(s.phase, Phase::Blocked))
            .collect();
        assert_eq!(blocked.len(), 1);
        assert!(blocked[0].transitions.is_empty());
    }

    #[test]
    fn tail_recursive_private_call_stays_finite_and_diverges() {
        let src = "contract C { resources { b: bool = false; } \
            service +m() -> (r: bool) { guard true; pre true; \
              effect { call p; return r = true; } } \
            service -p() { guard true; pre true; \
              effect { choice { { return; } { call p; } } } } \
            protocol { (?m !m)* } }";
        let lts = build(src);
        // one pre-call state with a tau self-loop
        let precall: Vec<u32> = (0..lts.states.len() as u32)
            .filter(|i| matches!(lts.state(*i).phase, Phase::PreCall { .. }))
            .collect();
        assert_eq!(precall.len(), 1);
        let d = divergent_states(&lts);
        assert!(d.contains(&precall[0]));
        assert_eq!(divergence_cycle_names(&lts, precall[0]), alloc::vec![Arc::<str>::from("p")]);
    }

    #[test]
    fn call_gated_by_callee_guard() {
        // p's recursion is disabled once n reaches 2, so the loop unrolls
        // into a finite tau chain and nothing diverges.
        let src = "contract C { resources { n: int[0..2] = 0; } \
            service +m() -> (r: bool) { guard true; pre true; \
              effect { call p; return r = true; } } \
            service -p() { guard n < 2; pre true; \
              effect { choice { { return; } { n = n + 1; call p; } } } } \
            protocol { (?m !m)* } }";
        let lts = build(src);
        assert!(divergent_states(&lts).is_empty());
        // requests still answered
        let start = lts.state(lts.start);
        assert_eq!(start.transitions.len(), 1);
    }

    #[test]
    fn hide_validates_names() {
        let src = "contract C { resources { b: bool = false; } \
            service +m() -> (r: bool) { guard true; pre true; \
              effect { choice { { return r = true; } { call p; } } } } \
            service -p() { guard true; pre true; effect { return; } } \
            protocol { (?m !m)* } }";
        let lts = build(src);
        assert!(hide(&lts, &BTreeSet::new()).is_ok());
        assert_eq!(hide(&lts, &BTreeSet::new()).unwrap(), lts);
        let ok = hide(&lts, &BTreeSet::from([Arc::<str>::from("p")]));
        assert!(ok.is_ok());
        let err = hide(&lts, &BTreeSet::from([Arc::<str>::from("nosuch")]));
        assert_eq!(err.unwrap_err(), LtsError::UnknownService { name: "nosuch".into() });
        // public names are not hideable
        let err = hide(&lts, &BTreeSet::from([Arc::<str>::from("m")]));
        assert!(err.is_err());
    }

    #[test]
    fn tau_dag_is_divergence_free() {
        let src = "contract C { resources { b: bool = false; } \
            service +m() -> (r: bool) { guard true; pre true; \
              effect { call p; return r = true; } } \
            service -p() { guard true; pre true; effect { b = true; return; } } \
            protocol { (?m !m)* } }";
        let lts = build(src);
        assert!(divergent_states(&lts).is_empty());
    }

    #[test]
    fn state_cap_is_enforced() {
        let src = "contract C { resources { n: int[0..100] = 0; } \
            service +m() -> (r: bool) { guard true; pre true; \
              effect { n = n + 1; return r = true; } } \
            protocol { (?m !m)* } }";
        let contract = parse_and_check(src).unwrap();
        let err = build_lts_with(&contract, BuildConfig { state_cap: 10 }).unwrap_err();
        assert_eq!(err, LtsError::StateCapExceeded { cap: 10 });
    }

    #[test]
    fn replay_follows_traces() {
        let lts = build(ONE_SERVICE);
        let req = Event { dir: Dir::Request, service: Arc::from("m"), args: alloc::vec![] };
        let resp = Event {
            dir: Dir::Response,
            service: Arc::from("m"),
            args: alloc::vec![Value::Bool(true)],
        };
        let after = lts.replay(&[req.clone(), resp.clone(), req]);
        assert_eq!(after.len(), 1);
        let s = lts.state(*after.iter().next().unwrap());
        assert!(matches!(s.phase, Phase::Responding { .. }));
    }

    #[test]
    fn input_bindings_enumerated_per_value() {
        let src = "contract C { resources { b: bool = false; } \
            service +m(x: int[0..2]) -> (r: bool) { guard true; pre true; \
              effect { return r = x >= 1; } } \
            protocol { (?m !m)* } }";
        let lts = build(src);
        let start = lts.state(lts.start);
        let requests: Vec<&Event> = start.visible_out().map(|(e, _)| e).collect();
        assert_eq!(requests.len(), 3);
        assert_eq!(requests[0].args, alloc::vec![Value::Int(0)]);
        assert_eq!(requests[2].args, alloc::vec![Value::Int(2)]);
    }
}
