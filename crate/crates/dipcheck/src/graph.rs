//! Well-formedness analysis over the automaton's underlying labeled graph:
//! SCC decomposition, cycle membership flags, and the four violation finders
//! (leaking cycle, leaking pair, disclosing cycle, privacy-violating path),
//! each returning an explicit structural witness.

use std::collections::VecDeque;

use crate::automaton::{DipAutomaton, Guard, OutputLabel, RealVar, StateKind};
use crate::rational::Rational;

/// Canonical reference to a transition: determinism makes (source, guard)
/// a unique key; the target is recoverable from the automaton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct EdgeRef {
    pub source: usize,
    pub guard: Guard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputKind {
    Finite,
    Sample,
    SampleAux,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub guard: Guard,
    pub assign: bool,
    pub output: OutputKind,
    pub from_input: bool,
}

impl Edge {
    pub fn edge_ref(&self) -> EdgeRef {
        EdgeRef {
            source: self.source,
            guard: self.guard,
        }
    }

    /// Present in the assignment-respecting subgraph for the given guard:
    /// an edge survives iff assigning implies its guard matches.
    fn in_restricted(&self, guard: Guard) -> bool {
        !self.assign || self.guard == guard
    }
}

/// Edge-labeled directed graph underlying an automaton, with init
/// reachability precomputed.
#[derive(Debug, Clone)]
pub struct UnderlyingGraph {
    pub num_vertices: usize,
    pub init: usize,
    /// Sorted by (source, guard).
    pub edges: Vec<Edge>,
    /// Outgoing edge indices per vertex, in edge order.
    pub out: Vec<Vec<usize>>,
    pub reachable: Vec<bool>,
}

pub fn build_graph(a: &DipAutomaton) -> UnderlyingGraph {
    let n = a.num_states();
    let mut edges = Vec::new();
    let mut out = vec![Vec::new(); n];
    for t in a.transitions() {
        let edge = Edge {
            source: t.source,
            target: t.target,
            guard: t.guard,
            assign: t.assign,
            output: match &t.output {
                OutputLabel::FiniteSym(_) => OutputKind::Finite,
                OutputLabel::RealVar(RealVar::Sample) => OutputKind::Sample,
                OutputLabel::RealVar(RealVar::SampleAux) => OutputKind::SampleAux,
            },
            from_input: matches!(a.state(t.source).kind, StateKind::Input),
        };
        out[t.source].push(edges.len());
        edges.push(edge);
    }
    let mut reachable = vec![false; n];
    let mut queue = VecDeque::from([a.init_index()]);
    reachable[a.init_index()] = true;
    while let Some(v) = queue.pop_front() {
        for &e in &out[v] {
            let w = edges[e].target;
            if !reachable[w] {
                reachable[w] = true;
                queue.push_back(w);
            }
        }
    }
    UnderlyingGraph {
        num_vertices: n,
        init: a.init_index(),
        edges,
        out,
        reachable,
    }
}

/// Strongly connected components with the condensation order.
#[derive(Debug, Clone)]
pub struct SccDecomposition {
    pub comp_of: Vec<usize>,
    /// Components in reverse topological order (every edge leaves a
    /// later-emitted component toward an earlier one).
    pub comps: Vec<Vec<usize>>,
    /// Edge indices whose endpoints lie in different components.
    pub cross_edges: Vec<usize>,
}

impl SccDecomposition {
    pub fn num_comps(&self) -> usize {
        self.comps.len()
    }

    /// Component ids in topological order, sources first.
    pub fn topo_order(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.comps.len()).rev()
    }
}

/// Iterative Tarjan; vertices are visited in index order so the component
/// numbering is deterministic.
pub fn scc(g: &UnderlyingGraph) -> SccDecomposition {
    let n = g.num_vertices;
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut comp_of = vec![usize::MAX; n];
    let mut next = 0usize;

    // Explicit DFS frames: (vertex, position in its out list).
    let mut frames: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        frames.push((root, 0));
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = frames.last_mut() {
            if *pos < g.out[v].len() {
                let w = g.edges[g.out[v][*pos]].target;
                *pos += 1;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp_of[w] = comps.len();
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
                frames.pop();
                if let Some(&mut (p, _)) = frames.last_mut() {
                    low[p] = low[p].min(low[v]);
                }
            }
        }
    }

    let cross_edges = g
        .edges
        .iter()
        .enumerate()
        .filter(|(_, e)| comp_of[e.source] != comp_of[e.target])
        .map(|(i, _)| i)
        .collect();
    SccDecomposition {
        comp_of,
        comps,
        cross_edges,
    }
}

/// Per-state and per-edge cycle membership.
#[derive(Debug, Clone)]
pub struct CycleFlags {
    pub in_l_cycle: Vec<bool>,
    pub in_g_cycle: Vec<bool>,
    /// Per edge: both endpoints share a component.
    pub on_cycle: Vec<bool>,
}

pub fn cycle_flags(g: &UnderlyingGraph, scc: &SccDecomposition) -> CycleFlags {
    let mut comp_has_lt = vec![false; scc.num_comps()];
    let mut comp_has_ge = vec![false; scc.num_comps()];
    let mut on_cycle = vec![false; g.edges.len()];
    for (i, e) in g.edges.iter().enumerate() {
        if scc.comp_of[e.source] == scc.comp_of[e.target] {
            on_cycle[i] = true;
            match e.guard {
                Guard::Lt => comp_has_lt[scc.comp_of[e.source]] = true,
                Guard::Ge => comp_has_ge[scc.comp_of[e.source]] = true,
                Guard::True => {}
            }
        }
    }
    let in_l_cycle = (0..g.num_vertices)
        .map(|v| comp_has_lt[scc.comp_of[v]])
        .collect();
    let in_g_cycle = (0..g.num_vertices)
        .map(|v| comp_has_ge[scc.comp_of[v]])
        .collect();
    CycleFlags {
        in_l_cycle,
        in_g_cycle,
        on_cycle,
    }
}

// ---------------------------------------------------------------------------
// Witnesses
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    LeakingCycle,
    LeakingPair,
    DisclosingCycle,
    PrivacyViolatingPath,
}

impl WitnessKind {
    pub fn as_str(self) -> &'static str {
        match self {
            WitnessKind::LeakingCycle => "leaking_cycle",
            WitnessKind::LeakingPair => "leaking_pair",
            WitnessKind::DisclosingCycle => "disclosing_cycle",
            WitnessKind::PrivacyViolatingPath => "privacy_violating_path",
        }
    }
}

/// Clause of the privacy-violating-path definition a witness satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clause {
    /// Assignment transition outputting the sample, then an
    /// assignment-respecting path into a guarded cycle.
    A,
    /// Non-assignment guarded transition outputting the sample, then an
    /// assignment-respecting path into the opposite-guard cycle.
    B,
    /// Guarded cycle, then an assignment-respecting path ending in an
    /// opposite-guard transition outputting the sample.
    C,
}

impl Clause {
    pub fn as_str(self) -> &'static str {
        match self {
            Clause::A => "a",
            Clause::B => "b",
            Clause::C => "c",
        }
    }
}

/// Structural evidence for one violation; every payload replays as a legal
/// transition sequence, with the prefix starting at init.
#[derive(Debug, Clone, PartialEq)]
pub enum ViolationWitness {
    LeakingCycle {
        prefix: Vec<EdgeRef>,
        cycle: Vec<EdgeRef>,
        /// Index in `cycle` of an assignment transition...
        assign_pos: usize,
        /// ...followed at this index by a non-true guard.
        guard_pos: usize,
    },
    LeakingPair {
        prefix: Vec<EdgeRef>,
        cycle_a: Vec<EdgeRef>,
        connector: Vec<EdgeRef>,
        cycle_b: Vec<EdgeRef>,
    },
    DisclosingCycle {
        prefix: Vec<EdgeRef>,
        cycle: Vec<EdgeRef>,
        /// Index in `cycle` of the input transition outputting a real.
        disclosing_pos: usize,
    },
    PrivacyViolatingPath {
        clause: Clause,
        /// True for the AG-path flavor, false for the AL-path flavor.
        ag: bool,
        prefix: Vec<EdgeRef>,
        path: Vec<EdgeRef>,
        cycle: Vec<EdgeRef>,
    },
}

impl ViolationWitness {
    pub fn kind(&self) -> WitnessKind {
        match self {
            ViolationWitness::LeakingCycle { .. } => WitnessKind::LeakingCycle,
            ViolationWitness::LeakingPair { .. } => WitnessKind::LeakingPair,
            ViolationWitness::DisclosingCycle { .. } => WitnessKind::DisclosingCycle,
            ViolationWitness::PrivacyViolatingPath { .. } => WitnessKind::PrivacyViolatingPath,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    WellFormed { weight: Rational },
    NotWellFormed { witness: ViolationWitness },
}

// ---------------------------------------------------------------------------
// Deterministic walks
// ---------------------------------------------------------------------------

/// BFS path from `from` to `to`, using only edges passing `allow`. Neighbor
/// expansion prefers the lexicographically smallest next state (vertices are
/// in state-id order), then the smaller guard, for reproducible witnesses.
fn bfs_path(
    g: &UnderlyingGraph,
    from: usize,
    to_pred: impl Fn(usize) -> bool,
    allow: impl Fn(&Edge) -> bool,
) -> Option<(usize, Vec<EdgeRef>)> {
    bfs_path_multi(g, &[from], to_pred, allow).map(|(_, hit, path)| (hit, path))
}

/// Multi-source variant; returns (source reached from, hit vertex, path).
fn bfs_path_multi(
    g: &UnderlyingGraph,
    sources: &[usize],
    to_pred: impl Fn(usize) -> bool,
    allow: impl Fn(&Edge) -> bool,
) -> Option<(usize, usize, Vec<EdgeRef>)> {
    let n = g.num_vertices;
    let mut parent: Vec<Option<usize>> = vec![None; n]; // incoming edge index
    let mut origin: Vec<usize> = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for &s in sources {
        if !seen[s] {
            seen[s] = true;
            origin[s] = s;
            if to_pred(s) {
                return Some((s, s, Vec::new()));
            }
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        let mut next: Vec<usize> = g.out[v]
            .iter()
            .copied()
            .filter(|&e| allow(&g.edges[e]))
            .collect();
        next.sort_by_key(|&e| (g.edges[e].target, g.edges[e].guard));
        for e in next {
            let w = g.edges[e].target;
            if seen[w] {
                continue;
            }
            seen[w] = true;
            parent[w] = Some(e);
            origin[w] = origin[v];
            if to_pred(w) {
                let mut path = Vec::new();
                let mut cur = w;
                while let Some(pe) = parent[cur] {
                    path.push(g.edges[pe].edge_ref());
                    cur = g.edges[pe].source;
                }
                path.reverse();
                return Some((origin[w], w, path));
            }
            queue.push_back(w);
        }
    }
    None
}

/// Set of vertices reachable from `sources` using only `allow` edges.
fn reach_forward(
    g: &UnderlyingGraph,
    sources: impl Iterator<Item = usize>,
    allow: impl Fn(&Edge) -> bool,
) -> Vec<bool> {
    let mut seen = vec![false; g.num_vertices];
    let mut queue = VecDeque::new();
    for s in sources {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &e in &g.out[v] {
            if !allow(&g.edges[e]) {
                continue;
            }
            let w = g.edges[e].target;
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Set of vertices that can reach some target using only `allow` edges.
fn reach_backward(
    g: &UnderlyingGraph,
    targets: impl Iterator<Item = usize>,
    allow: impl Fn(&Edge) -> bool,
) -> Vec<bool> {
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); g.num_vertices];
    for (i, e) in g.edges.iter().enumerate() {
        if allow(e) {
            incoming[e.target].push(i);
        }
    }
    let mut seen = vec![false; g.num_vertices];
    let mut queue = VecDeque::new();
    for t in targets {
        if !seen[t] {
            seen[t] = true;
            queue.push_back(t);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &e in &incoming[v] {
            let w = g.edges[e].source;
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Walk inside one SCC from `from` to `to` (possibly empty when equal).
fn scc_walk(g: &UnderlyingGraph, scc: &SccDecomposition, from: usize, to: usize) -> Vec<EdgeRef> {
    if from == to {
        return Vec::new();
    }
    let comp = scc.comp_of[from];
    bfs_path(g, from, |v| v == to, |e| {
        scc.comp_of[e.source] == comp && scc.comp_of[e.target] == comp
    })
    .expect("strongly connected walk")
    .1
}

fn prefix_from_init(g: &UnderlyingGraph, to: usize) -> Vec<EdgeRef> {
    bfs_path(g, g.init, |v| v == to, |_| true)
        .expect("target is reachable")
        .1
}

/// Reconstructs a cycle through `state` that traverses an internal edge with
/// the given guard, starting and ending at `state`.
fn cycle_through_with_guard(
    g: &UnderlyingGraph,
    scc: &SccDecomposition,
    state: usize,
    guard: Guard,
) -> Vec<EdgeRef> {
    let comp = scc.comp_of[state];
    let edge = g
        .edges
        .iter()
        .find(|e| {
            e.guard == guard
                && scc.comp_of[e.source] == comp
                && scc.comp_of[e.target] == comp
        })
        .expect("component contains an edge with the guard");
    let mut cycle = scc_walk(g, scc, state, edge.source);
    cycle.push(edge.edge_ref());
    cycle.extend(scc_walk(g, scc, edge.target, state));
    cycle
}

// ---------------------------------------------------------------------------
// The four finders
// ---------------------------------------------------------------------------

/// A reachable SCC holding both an assignment edge and a non-true-guard edge
/// witnesses a leaking cycle.
pub fn find_leaking_cycle(g: &UnderlyingGraph, scc: &SccDecomposition) -> Option<ViolationWitness> {
    // First internal assignment/guard edge per component, one pass.
    let mut assign_edge: Vec<Option<usize>> = vec![None; scc.num_comps()];
    let mut guard_edge: Vec<Option<usize>> = vec![None; scc.num_comps()];
    for (i, e) in g.edges.iter().enumerate() {
        let comp = scc.comp_of[e.source];
        if scc.comp_of[e.target] != comp {
            continue;
        }
        if e.assign && assign_edge[comp].is_none() {
            assign_edge[comp] = Some(i);
        }
        if e.guard != Guard::True && guard_edge[comp].is_none() {
            guard_edge[comp] = Some(i);
        }
    }
    let mut seen_comp = vec![false; scc.num_comps()];
    for v in 0..g.num_vertices {
        let comp = scc.comp_of[v];
        if seen_comp[comp] || !g.reachable[v] {
            continue;
        }
        seen_comp[comp] = true;
        let (ea, eg) = match (assign_edge[comp], guard_edge[comp]) {
            (Some(a), Some(b)) => (&g.edges[a], &g.edges[b]),
            _ => continue,
        };
        let mut cycle = vec![ea.edge_ref()];
        let (assign_pos, guard_pos);
        if ea.edge_ref() == eg.edge_ref() {
            // One edge plays both roles; traverse it twice.
            let back = scc_walk(g, scc, ea.target, ea.source);
            cycle.extend(back.iter().copied());
            assign_pos = 0;
            guard_pos = cycle.len();
            cycle.push(ea.edge_ref());
            cycle.extend(scc_walk(g, scc, ea.target, ea.source));
        } else {
            let mid = scc_walk(g, scc, ea.target, eg.source);
            cycle.extend(mid.iter().copied());
            assign_pos = 0;
            guard_pos = cycle.len();
            cycle.push(eg.edge_ref());
            cycle.extend(scc_walk(g, scc, eg.target, ea.source));
        }
        return Some(ViolationWitness::LeakingCycle {
            prefix: prefix_from_init(g, ea.source),
            cycle,
            assign_pos,
            guard_pos,
        });
    }
    None
}

/// Looks for an L-cycle state reaching a G-cycle state through the
/// Ge-assignment-respecting subgraph, then the symmetric direction.
pub fn find_leaking_pair(
    g: &UnderlyingGraph,
    scc: &SccDecomposition,
    flags: &CycleFlags,
) -> Option<ViolationWitness> {
    let searches = [
        (Guard::Lt, Guard::Ge, &flags.in_l_cycle, &flags.in_g_cycle),
        (Guard::Ge, Guard::Lt, &flags.in_g_cycle, &flags.in_l_cycle),
    ];
    for (from_guard, to_guard, from_set, to_set) in searches {
        let sources: Vec<usize> = (0..g.num_vertices)
            .filter(|&v| from_set[v] && g.reachable[v])
            .collect();
        if sources.is_empty() {
            continue;
        }
        if let Some((source, hit, connector)) = bfs_path_multi(
            g,
            &sources,
            |v| to_set[v],
            |e| e.in_restricted(to_guard),
        ) {
            return Some(ViolationWitness::LeakingPair {
                prefix: prefix_from_init(g, source),
                cycle_a: cycle_through_with_guard(g, scc, source, from_guard),
                connector,
                cycle_b: cycle_through_with_guard(g, scc, hit, to_guard),
            });
        }
    }
    None
}

/// A reachable cycle containing an input transition that outputs a sampled
/// real discloses that sample on every traversal.
pub fn find_disclosing_cycle(
    g: &UnderlyingGraph,
    scc: &SccDecomposition,
) -> Option<ViolationWitness> {
    let flags = cycle_flags(g, scc);
    for (i, e) in g.edges.iter().enumerate() {
        if flags.on_cycle[i]
            && e.from_input
            && matches!(e.output, OutputKind::Sample | OutputKind::SampleAux)
            && g.reachable[e.source]
        {
            let mut cycle = vec![e.edge_ref()];
            cycle.extend(scc_walk(g, scc, e.target, e.source));
            return Some(ViolationWitness::DisclosingCycle {
                prefix: prefix_from_init(g, e.source),
                cycle,
                disclosing_pos: 0,
            });
        }
    }
    None
}

/// Checks the three clauses of the privacy-violating-path definition, each
/// in its AG flavor then its AL flavor, over transitions in sorted order.
pub fn find_privacy_violating_path(
    g: &UnderlyingGraph,
    scc: &SccDecomposition,
    flags: &CycleFlags,
) -> Option<ViolationWitness> {
    // Per flavor: which vertices can reach a matching guarded cycle inside
    // the restricted subgraph, and which are reachable from the opposite one.
    let setup = |cycle_guard: Guard| {
        let cycle_set: &Vec<bool> = match cycle_guard {
            Guard::Ge => &flags.in_g_cycle,
            Guard::Lt => &flags.in_l_cycle,
            Guard::True => unreachable!(),
        };
        reach_backward(
            g,
            (0..g.num_vertices).filter(|&v| cycle_set[v]),
            |e| e.in_restricted(cycle_guard),
        )
    };
    let to_g_in_ag = setup(Guard::Ge);
    let to_l_in_al = setup(Guard::Lt);

    let build_path_to_cycle = |start: usize, cycle_guard: Guard| {
        let cycle_set: &Vec<bool> = match cycle_guard {
            Guard::Ge => &flags.in_g_cycle,
            _ => &flags.in_l_cycle,
        };
        let (hit, path) = bfs_path(g, start, |v| cycle_set[v], |e| e.in_restricted(cycle_guard))
            .expect("reachability precomputed");
        (hit, path)
    };

    // Clauses (a) and (b): an s-outputting transition continues into a cycle.
    for clause in [Clause::A, Clause::B] {
        for (ag, cycle_guard, first_guard) in
            [(true, Guard::Ge, Guard::Lt), (false, Guard::Lt, Guard::Ge)]
        {
            let reach = if ag { &to_g_in_ag } else { &to_l_in_al };
            for e in &g.edges {
                if e.output != OutputKind::Sample || !g.reachable[e.source] {
                    continue;
                }
                let shape_matches = match clause {
                    Clause::A => e.assign,
                    Clause::B => !e.assign && e.guard == first_guard,
                    Clause::C => unreachable!(),
                };
                if !shape_matches || !reach[e.target] {
                    continue;
                }
                let (hit, tail) = build_path_to_cycle(e.target, cycle_guard);
                let mut path = vec![e.edge_ref()];
                path.extend(tail);
                return Some(ViolationWitness::PrivacyViolatingPath {
                    clause,
                    ag,
                    prefix: prefix_from_init(g, e.source),
                    path,
                    cycle: cycle_through_with_guard(g, scc, hit, cycle_guard),
                });
            }
        }
    }

    // Clause (c): a cycle continues into an s-outputting guarded transition.
    for (ag, start_cycle_guard, last_guard) in
        [(true, Guard::Lt, Guard::Ge), (false, Guard::Ge, Guard::Lt)]
    {
        let start_set: &Vec<bool> = match start_cycle_guard {
            Guard::Lt => &flags.in_l_cycle,
            _ => &flags.in_g_cycle,
        };
        let restrict_guard = if ag { Guard::Ge } else { Guard::Lt };
        let from_cycle = reach_forward(
            g,
            (0..g.num_vertices).filter(|&v| start_set[v] && g.reachable[v]),
            |e| e.in_restricted(restrict_guard),
        );
        for e in &g.edges {
            if e.guard != last_guard || e.output != OutputKind::Sample || !from_cycle[e.source] {
                continue;
            }
            let sources: Vec<usize> = (0..g.num_vertices)
                .filter(|&v| start_set[v] && g.reachable[v])
                .collect();
            let (origin, _, connector) = bfs_path_multi(
                g,
                &sources,
                |v| v == e.source,
                |edge| edge.in_restricted(restrict_guard),
            )
            .expect("reachability precomputed");
            let mut path = connector;
            path.push(e.edge_ref());
            return Some(ViolationWitness::PrivacyViolatingPath {
                clause: Clause::C,
                ag,
                prefix: prefix_from_init(g, origin),
                path,
                cycle: cycle_through_with_guard(g, scc, origin, start_cycle_guard),
            });
        }
    }
    None
}

/// Runs the four finders in fixed priority order; a well-formed automaton
/// gets its exact weight. Everything except witness-path materialization is
/// linear in the automaton size.
pub fn check_well_formed(a: &DipAutomaton) -> Verdict {
    let g = build_graph(a);
    let decomposition = scc(&g);
    let flags = cycle_flags(&g, &decomposition);
    if let Some(w) = find_leaking_cycle(&g, &decomposition) {
        return Verdict::NotWellFormed { witness: w };
    }
    if let Some(w) = find_leaking_pair(&g, &decomposition, &flags) {
        return Verdict::NotWellFormed { witness: w };
    }
    if let Some(w) = find_disclosing_cycle(&g, &decomposition) {
        return Verdict::NotWellFormed { witness: w };
    }
    if let Some(w) = find_privacy_violating_path(&g, &decomposition, &flags) {
        return Verdict::NotWellFormed { witness: w };
    }
    Verdict::WellFormed {
        weight: crate::weight::weight(a),
    }
}

/// Replays an edge sequence from `start`, returning the visited states
/// (length = steps + 1). Used to validate witness payloads.
pub fn replay(a: &DipAutomaton, start: usize, steps: &[EdgeRef]) -> Result<Vec<usize>, String> {
    let mut states = vec![start];
    let mut cur = start;
    for (i, step) in steps.iter().enumerate() {
        if step.source != cur {
            return Err(format!(
                "step {i}: expected source {:?}, at {:?}",
                a.state(step.source).id,
                a.state(cur).id
            ));
        }
        let t = a
            .transition(step.source, step.guard)
            .ok_or_else(|| format!("step {i}: no transition ({:?}, {})", a.state(step.source).id, step.guard))?;
        cur = t.target;
        states.push(cur);
    }
    Ok(states)
}
