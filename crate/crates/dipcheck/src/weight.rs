//! Transition costs and the automaton weight: the certified privacy-budget
//! multiplier, computed exactly over rationals as a longest path on the SCC
//! condensation DAG.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::automaton::{DipAutomaton, OutputLabel, RealVar, StateKind, Transition};
use crate::graph::{build_graph, scc, EdgeRef, SccDecomposition, UnderlyingGraph};
use crate::rational::Rational;

/// Transitions not lying on any cycle: exactly those whose endpoints fall in
/// different components (an edge inside a component always closes a cycle,
/// self-loops included; a singleton component without a self-loop has no
/// internal edges).
pub fn critical_transitions(a: &DipAutomaton, scc: &SccDecomposition) -> Vec<EdgeRef> {
    a.transitions()
        .filter(|t| scc.comp_of[t.source] != scc.comp_of[t.target])
        .map(|t| EdgeRef {
            source: t.source,
            guard: t.guard,
        })
        .collect()
}

fn is_critical(t: &Transition, scc: &SccDecomposition) -> bool {
    scc.comp_of[t.source] != scc.comp_of[t.target]
}

/// Cost of one transition: zero on cycles; otherwise the source state pays
/// `d` when non-input, `2d` when input, plus `d_aux` when the auxiliary
/// sample is released.
pub fn cost(a: &DipAutomaton, t: &Transition, scc: &SccDecomposition) -> Rational {
    if !is_critical(t, scc) {
        return Rational::zero();
    }
    let params = &a.state(t.source).params;
    match a.state(t.source).kind {
        StateKind::NonInput => params.d.clone(),
        StateKind::Input => {
            let base = &params.d + &params.d;
            if t.output == OutputLabel::RealVar(RealVar::SampleAux) {
                base + &params.d_aux
            } else {
                base
            }
        }
    }
}

/// Per-transition cost table in (source, guard) order.
pub fn cost_table(a: &DipAutomaton) -> Vec<(EdgeRef, bool, Rational)> {
    let g = build_graph(a);
    let decomposition = scc(&g);
    a.transitions()
        .map(|t| {
            (
                EdgeRef {
                    source: t.source,
                    guard: t.guard,
                },
                is_critical(t, &decomposition),
                cost(a, t, &decomposition),
            )
        })
        .collect()
}

/// Supremum of summed transition costs over paths starting at init.
pub fn weight(a: &DipAutomaton) -> Rational {
    weight_with(a, false)
}

/// Weight over paths from anywhere, including components unreachable from
/// init; `weight` restricts to init-reachable paths.
pub fn weight_unrestricted(a: &DipAutomaton) -> Rational {
    weight_with(a, true)
}

fn weight_with(a: &DipAutomaton, unrestricted: bool) -> Rational {
    let g = build_graph(a);
    let decomposition = scc(&g);
    longest_cost_path(a, &g, &decomposition, unrestricted)
}

/// Longest weighted path over the condensation DAG. Components come out of
/// Tarjan in reverse topological order, so a single pass accumulates the
/// best continuation for each component.
fn longest_cost_path(
    a: &DipAutomaton,
    g: &UnderlyingGraph,
    decomposition: &SccDecomposition,
    unrestricted: bool,
) -> Rational {
    let ncomp = decomposition.num_comps();
    let mut best: Vec<Rational> = vec![Rational::zero(); ncomp];
    // Cross-component edges grouped by source component.
    let mut outgoing: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &ei in &decomposition.cross_edges {
        outgoing
            .entry(decomposition.comp_of[g.edges[ei].source])
            .or_default()
            .push(ei);
    }
    for c in 0..ncomp {
        if let Some(edge_ids) = outgoing.get(&c) {
            for &ei in edge_ids {
                let e = &g.edges[ei];
                let t = a.transition(e.source, e.guard).expect("edge from transition");
                let candidate =
                    cost(a, t, decomposition) + &best[decomposition.comp_of[e.target]];
                if candidate > best[c] {
                    best[c] = candidate;
                }
            }
        }
    }
    if unrestricted {
        best.into_iter().max().unwrap_or_else(Rational::zero)
    } else {
        best[decomposition.comp_of[g.init]].clone()
    }
}
