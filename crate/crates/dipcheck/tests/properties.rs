//! Property tests over randomly generated valid automata and random
//! piecewise functions: serialization round-trips, verdict invariances, the
//! weight oracle, and consistency between the two probability routes.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dipcheck::automaton::{
    parse_document, serialize_document, validate, DipAutomaton, Guard, OutputLabel, RawAutomaton,
    RealVar, StateDecl, StateKind, StateParams, TransitionDecl,
};
use dipcheck::graph::{build_graph, check_well_formed, scc, Verdict};
use dipcheck::laplace::{prob_le, LaplaceDist};
use dipcheck::pep::PiecewiseExpPoly;
use dipcheck::rational::{rational_from_parts, Rational};
use dipcheck::report::verdict_json;
use dipcheck::weight::{cost_table, weight};

// ---------------------------------------------------------------------------
// Random valid automata
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct StateShape {
    kind: StateKind,
    d: (i64, i64),
    mu: (i64, i64),
    /// Outgoing transition plan: guard, target index, output pick, assign.
    outgoing: Vec<(Guard, usize, u8, bool)>,
}

fn output_for(pick: u8, fallback_finite: &str) -> OutputLabel {
    match pick % 4 {
        0 => OutputLabel::FiniteSym("a".to_string()),
        1 => OutputLabel::FiniteSym(fallback_finite.to_string()),
        2 => OutputLabel::RealVar(RealVar::Sample),
        _ => OutputLabel::RealVar(RealVar::SampleAux),
    }
}

fn raw_from_shapes(shapes: &[StateShape]) -> RawAutomaton {
    let n = shapes.len();
    let id = |i: usize| format!("q{i}");
    let mut states = Vec::new();
    let mut transitions = Vec::new();
    for (i, shape) in shapes.iter().enumerate() {
        states.push(StateDecl {
            id: id(i),
            kind: shape.kind,
            params: StateParams {
                d: rational_from_parts(shape.d.0, shape.d.1),
                mu: rational_from_parts(shape.mu.0, shape.mu.1),
                d_aux: rational_from_parts(1, 9),
                mu_aux: rational_from_parts(shape.mu.1, 7),
            },
        });
        if i == 0 {
            // Initialization: single pure-assignment transition.
            transitions.push(TransitionDecl {
                source: id(0),
                guard: Guard::True,
                target: id(shape.outgoing[0].1 % n),
                output: OutputLabel::FiniteSym("a".to_string()),
                assign: true,
            });
            continue;
        }
        match shape.kind {
            StateKind::NonInput => {
                if let Some(&(_, target, pick, assign)) = shape.outgoing.first() {
                    transitions.push(TransitionDecl {
                        source: id(i),
                        guard: Guard::True,
                        target: id(target % n),
                        output: output_for(pick, "b"),
                        assign,
                    });
                }
            }
            StateKind::Input => {
                let mut guards_used = Vec::new();
                for &(guard, target, pick, assign) in &shape.outgoing {
                    if guards_used.contains(&guard) {
                        continue;
                    }
                    // A true guard excludes everything else.
                    if guard == Guard::True && !guards_used.is_empty() {
                        continue;
                    }
                    if guards_used.contains(&Guard::True) {
                        continue;
                    }
                    guards_used.push(guard);
                    let output = match guard {
                        // Output distinction: the lt branch stays finite and
                        // distinct from the ge branch's finite choice.
                        Guard::Lt => OutputLabel::FiniteSym("c".to_string()),
                        _ => output_for(pick, "b"),
                    };
                    transitions.push(TransitionDecl {
                        source: id(i),
                        guard,
                        target: id(target % n),
                        output,
                        assign,
                    });
                }
            }
        }
    }
    RawAutomaton {
        name: "random".to_string(),
        init: id(0),
        states,
        transitions,
        alphabet: None,
    }
}

fn arb_automaton() -> impl Strategy<Value = DipAutomaton> {
    let state = (
        prop_oneof![Just(StateKind::Input), Just(StateKind::NonInput)],
        prop_oneof![
            Just((1i64, 2i64)),
            Just((1, 4)),
            Just((2, 9)),
            Just((4, 9)),
            Just((1, 1)),
            Just((3, 5))
        ],
        (-6i64..6, 1i64..5),
        proptest::collection::vec(
            (
                prop_oneof![Just(Guard::True), Just(Guard::Ge), Just(Guard::Lt)],
                0usize..8,
                any::<u8>(),
                any::<bool>(),
            ),
            0..3,
        ),
    )
        .prop_map(|(kind, d, mu, outgoing)| StateShape {
            kind,
            d,
            mu,
            outgoing,
        });
    proptest::collection::vec(state, 2..7).prop_map(|mut shapes| {
        if shapes[0].outgoing.is_empty() {
            shapes[0].outgoing.push((Guard::True, 1, 0, true));
        }
        let raw = raw_from_shapes(&shapes);
        validate(&raw).expect("constructed automata are valid")
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn document_round_trip_is_identity(a in arb_automaton()) {
        let doc = serialize_document(&a);
        let back = validate(&parse_document(&doc).unwrap()).unwrap();
        prop_assert_eq!(&a, &back);
        prop_assert_eq!(doc, serialize_document(&back));
    }

    #[test]
    fn verdict_survives_transition_shuffle(a in arb_automaton(), rot in 0usize..5) {
        let base = serde_json::to_string(&verdict_json(&a, &check_well_formed(&a))).unwrap();
        let mut raw = a.to_raw();
        raw.transitions.reverse();
        let len = raw.transitions.len().max(1);
        raw.transitions.rotate_left(rot % len);
        let shuffled = validate(&raw).unwrap();
        let got = serde_json::to_string(&verdict_json(&shuffled, &check_well_formed(&shuffled))).unwrap();
        prop_assert_eq!(base, got);
    }

    #[test]
    fn verdict_survives_renaming_and_mean_changes(a in arb_automaton(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut raw = a.to_raw();
        // Renaming that reverses the sort order.
        let n = raw.states.len();
        let rename = |s: &str| {
            let idx: usize = s[1..].parse().unwrap();
            format!("z{:02}", n - 1 - idx)
        };
        for s in &mut raw.states {
            s.id = rename(&s.id);
            s.params.mu = rational_from_parts(rng.gen_range(-9i64..9), rng.gen_range(1i64..5));
            s.params.mu_aux = rational_from_parts(rng.gen_range(-9i64..9), rng.gen_range(1i64..5));
        }
        for t in &mut raw.transitions {
            t.source = rename(&t.source);
            t.target = rename(&t.target);
        }
        raw.init = rename(&raw.init);
        let renamed = validate(&raw).unwrap();

        let status = |v: &Verdict| match v {
            Verdict::WellFormed { weight } => ("well_formed", Some(weight.clone()), None),
            Verdict::NotWellFormed { witness } => ("violation", None, Some(witness.kind())),
        };
        prop_assert_eq!(
            status(&check_well_formed(&a)),
            status(&check_well_formed(&renamed))
        );
    }

    #[test]
    fn weight_matches_brute_force_longest_path(a in arb_automaton()) {
        let g = build_graph(&a);
        let decomposition = scc(&g);
        prop_assume!(decomposition.num_comps() <= 12);
        // Cross-component adjacency with costs, then exhaustive DFS (the
        // condensation is acyclic, so all paths are simple).
        let costs = cost_table(&a);
        let mut adj: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); decomposition.num_comps()];
        for (e, critical, cost) in costs {
            let t = a.transition(e.source, e.guard).unwrap();
            if critical {
                adj[decomposition.comp_of[t.source]]
                    .push((decomposition.comp_of[t.target], cost));
            }
        }
        fn longest(adj: &[Vec<(usize, Rational)>], c: usize) -> Rational {
            let zero = Rational::from_integer(0.into());
            adj[c]
                .iter()
                .map(|(next, cost)| cost + longest(adj, *next))
                .max()
                .unwrap_or(zero)
        }
        let brute = longest(&adj, decomposition.comp_of[a.init_index()]);
        prop_assert_eq!(weight(&a), brute);
    }
}

// ---------------------------------------------------------------------------
// Piecewise function algebra
// ---------------------------------------------------------------------------

fn arb_pep() -> impl Strategy<Value = PiecewiseExpPoly> {
    // Sums/products of Laplace densities and constants cover the shapes the
    // evaluator produces.
    let atom = prop_oneof![
        (0.2f64..3.0, -2.0f64..2.0).prop_map(|(k, nu)| PiecewiseExpPoly::laplace_pdf(k, nu)),
        (0.1f64..2.0).prop_map(PiecewiseExpPoly::constant),
    ];
    proptest::collection::vec(atom, 1..4).prop_map(|atoms| {
        let mut acc = PiecewiseExpPoly::constant(1.0);
        for (i, f) in atoms.into_iter().enumerate() {
            acc = if i % 2 == 0 { acc.mul(&f) } else { acc.add(&f) };
        }
        acc
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pep_add_mul_are_pointwise(f in arb_pep(), g in arb_pep(), x in -6.0f64..6.0) {
        let sum = f.add(&g);
        let prod = f.mul(&g);
        let tol = 1e-11 * (1.0 + f.eval(x).abs() + g.eval(x).abs());
        prop_assert!((sum.eval(x) - (f.eval(x) + g.eval(x))).abs() < tol);
        prop_assert!((prod.eval(x) - f.eval(x) * g.eval(x)).abs() < tol);
    }

    #[test]
    fn pep_integral_is_additive(f in arb_pep(), a in -4.0f64..0.0, len1 in 0.0f64..3.0, len2 in 0.0f64..3.0) {
        let b = a + len1;
        let c = b + len2;
        let whole = f.integrate(a, c).unwrap();
        let parts = f.integrate(a, b).unwrap() + f.integrate(b, c).unwrap();
        prop_assert!((whole - parts).abs() < 1e-10 * (1.0 + whole.abs()));
    }
}

// ---------------------------------------------------------------------------
// Two routes to the ordering probability
// ---------------------------------------------------------------------------

#[test]
fn prob_le_agrees_with_pep_route_on_random_parameters() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..20 {
        let k1 = rng.gen_range(0.2..3.0);
        let k2 = if case % 3 == 0 { k1 } else { rng.gen_range(0.2..3.0) };
        let mu1 = rng.gen_range(-3.0..3.0);
        let mu2 = rng.gen_range(-3.0..3.0);
        let formula = prob_le(
            LaplaceDist::new(k1, mu1).unwrap(),
            LaplaceDist::new(k2, mu2).unwrap(),
        );
        // Pep route: integral of pdf1 times the survival of pdf2.
        let pdf1 = PiecewiseExpPoly::laplace_pdf(k1, mu1);
        let survival2 = PiecewiseExpPoly::laplace_pdf(k2, mu2)
            .integrate_upper()
            .unwrap();
        let via_pep = pdf1
            .mul(&survival2)
            .integrate(f64::NEG_INFINITY, f64::INFINITY)
            .unwrap();
        assert!(
            (formula - via_pep).abs() < 1e-9,
            "case {case}: {formula} vs {via_pep}"
        );
    }
}
