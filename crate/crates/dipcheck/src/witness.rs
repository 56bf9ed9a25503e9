//! Turns structural violation witnesses into concrete adjacent-input path
//! pairs, parameterized by a repetition count, and measures the resulting
//! probability-ratio divergence. The input constructions follow the
//! necessity arguments: drive every guard with margin one relative to the
//! last stored sample, then perturb the marked repetitions so one path's
//! guards become unlikely while staying adjacent.

use thiserror::Error;

use crate::automaton::{DipAutomaton, Guard, OutputLabel, RealVar, StateKind, Transition};
use crate::graph::{check_well_formed, EdgeRef, Verdict, ViolationWitness, WitnessKind, Clause};
use crate::path::{
    adjacent, check_path, equivalent, pathprob_exact, pathprob_mc, McProb, Observed, Path,
    RawStep,
};
use crate::rational::{rational_to_f64, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WitnessError {
    #[error("witness kind mismatch: expected {expected}, got {got}")]
    WrongWitnessKind {
        expected: &'static str,
        got: &'static str,
    },
    #[error("repetition count must be at least 1")]
    InvalidEll,
    #[error("automaton is well-formed; no refutation exists")]
    AutomatonIsWellFormed,
    #[error(transparent)]
    Eval(#[from] crate::path::EvalError),
}

/// Probability comparison of the two paths at one epsilon.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioCell {
    pub eps: f64,
    pub prob1: f64,
    pub prob2: f64,
    pub ratio: f64,
    /// Closed-form prediction of the exact ratio, when the construction
    /// yields one.
    pub predicted: Option<f64>,
}

/// Two equivalent paths with adjacent inputs and their ratio report.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessPair {
    pub kind: WitnessKind,
    pub ell: u32,
    pub rho1: Path,
    pub rho2: Path,
    pub report: Vec<RatioCell>,
}

/// One position of the paths being assembled.
struct Slot {
    guard: Guard,
    assign: bool,
    output: OutputLabel,
    is_input: bool,
    mu: f64,
    mu_aux: f64,
    /// Inputs for the two paths (None on non-input states).
    a: Option<f64>,
    b: Option<f64>,
    /// Interval attached to a real output.
    interval: (f64, f64),
}

struct Builder<'a> {
    a: &'a DipAutomaton,
    slots: Vec<Slot>,
}

impl<'a> Builder<'a> {
    fn new(a: &'a DipAutomaton) -> Self {
        Builder { a, slots: Vec::new() }
    }

    fn push(&mut self, e: EdgeRef) -> usize {
        let t: &Transition = self
            .a
            .transition(e.source, e.guard)
            .expect("witness edges exist");
        let st = self.a.state(e.source);
        let is_input = matches!(st.kind, StateKind::Input);
        self.slots.push(Slot {
            guard: e.guard,
            assign: t.assign,
            output: t.output.clone(),
            is_input,
            mu: rational_to_f64(&st.params.mu),
            mu_aux: rational_to_f64(&st.params.mu_aux),
            a: is_input.then_some(0.0),
            b: is_input.then_some(0.0),
            interval: (f64::NEG_INFINITY, f64::INFINITY),
        });
        self.slots.len() - 1
    }

    fn push_all(&mut self, seq: &[EdgeRef]) -> std::ops::Range<usize> {
        let start = self.slots.len();
        for &e in seq {
            self.push(e);
        }
        start..self.slots.len()
    }

    fn set_both(&mut self, idx: usize, v: f64) {
        if self.slots[idx].is_input {
            self.slots[idx].a = Some(v);
            self.slots[idx].b = Some(v);
        }
    }

    fn finish(self, kind: WitnessKind, ell: u32, eps_grid: &[f64]) -> Result<WitnessPair, WitnessError> {
        let to_raw = |use_b: bool| -> Vec<RawStep> {
            self.slots
                .iter()
                .map(|s| RawStep {
                    input: if use_b { s.b } else { s.a },
                    observed: match &s.output {
                        OutputLabel::FiniteSym(sym) => Observed::Sym(sym.clone()),
                        OutputLabel::RealVar(v) => Observed::Real {
                            var: *v,
                            lo: s.interval.0,
                            hi: s.interval.1,
                        },
                    },
                })
                .collect()
        };
        let rho1 = check_path(self.a, &to_raw(false)).expect("constructed path replays");
        let rho2 = check_path(self.a, &to_raw(true)).expect("constructed path replays");
        assert!(
            adjacent(&rho1.inseq(), &rho2.inseq()),
            "constructed inputs must be adjacent"
        );
        assert!(equivalent(&rho1, &rho2), "constructed paths must be equivalent");

        let mut report = Vec::with_capacity(eps_grid.len());
        for &eps in eps_grid {
            let prob1 = pathprob_exact(self.a, eps, 0.0, &rho1)?;
            let prob2 = pathprob_exact(self.a, eps, 0.0, &rho2)?;
            report.push(RatioCell {
                eps,
                prob1,
                prob2,
                ratio: prob1 / prob2,
                predicted: None,
            });
        }
        Ok(WitnessPair {
            kind,
            ell,
            rho1,
            rho2,
            report,
        })
    }
}

fn expect_kind(
    witness: &ViolationWitness,
    expected: WitnessKind,
) -> Result<(), WitnessError> {
    if witness.kind() != expected {
        return Err(WitnessError::WrongWitnessKind {
            expected: expected.as_str(),
            got: witness.kind().as_str(),
        });
    }
    Ok(())
}

fn check_ell(ell: u32) -> Result<(), WitnessError> {
    if ell == 0 {
        return Err(WitnessError::InvalidEll);
    }
    Ok(())
}

/// Margin direction that satisfies a guard: the sample mean sits above the
/// stored mean for `>=`, below it for `<`.
fn margin(guard: Guard) -> f64 {
    match guard {
        Guard::Ge => 1.0,
        _ => -1.0,
    }
}

/// Path pair for a leaking cycle: inputs drive every guard true with margin
/// one relative to the last assignment; the second path swaps the means at
/// `ell` marked (assignment, guard) position pairs inside the repetitions.
pub fn gen_leaking_cycle_pair(
    a: &DipAutomaton,
    witness: &ViolationWitness,
    ell: u32,
    eps_grid: &[f64],
) -> Result<WitnessPair, WitnessError> {
    expect_kind(witness, WitnessKind::LeakingCycle)?;
    check_ell(ell)?;
    let (prefix, cycle) = match witness {
        ViolationWitness::LeakingCycle { prefix, cycle, .. } => (prefix, cycle),
        _ => unreachable!(),
    };
    let m = prefix.len();
    let n = cycle.len();

    // Locate the tight (assignment, guard) pair on the unrolled path: the
    // first non-true guard at or after the cycle start that has a cycle
    // assignment before it, paired with the last assignment before it.
    let guard_at = |k: usize| -> Guard {
        if k < m {
            prefix[k].guard
        } else {
            cycle[(k - m) % n].guard
        }
    };
    let assign_at = |k: usize| -> bool {
        let e = if k < m { prefix[k] } else { cycle[(k - m) % n] };
        a.transition(e.source, e.guard).expect("edge exists").assign
    };
    let mut pair = None;
    for j in m..m + 2 * n {
        if guard_at(j) == Guard::True {
            continue;
        }
        if let Some(i) = (m..j).rev().find(|&k| assign_at(k)) {
            pair = Some((i, j));
            break;
        }
    }
    let (i, j) = pair.expect("leaking cycle has an assignment before a guard");
    // Stride between marked pairs: the smallest multiple of the cycle
    // length that keeps consecutive pairs disjoint.
    let stride = n * ((j - i) / n + 1);
    let total_reps = (j + (ell as usize - 1) * stride + 1 - m).div_ceil(n);

    let mut builder = Builder::new(a);
    builder.push_all(prefix);
    for _ in 0..total_reps {
        builder.push_all(cycle);
    }

    // Margin-one inputs relative to the most recent assignment.
    let len = builder.slots.len();
    let mut last_assign = 0usize;
    let mut means = vec![0.0f64; len]; // mu + <a> per position
    {
        let s0 = &mut builder.slots[0];
        if s0.is_input {
            s0.a = Some(0.0);
        }
        means[0] = builder.slots[0].mu + builder.slots[0].a.unwrap_or(0.0);
    }
    for k in 1..len {
        let target = means[last_assign] + margin(builder.slots[k].guard);
        let input = target - builder.slots[k].mu;
        if builder.slots[k].is_input {
            builder.slots[k].a = Some(input);
            builder.slots[k].b = Some(input);
            means[k] = target;
        } else {
            means[k] = builder.slots[k].mu;
        }
        if builder.slots[k].assign {
            last_assign = k;
        }
    }
    // Swap the means at the marked pairs.
    for s in 0..ell as usize {
        let (is, js) = (i + s * stride, j + s * stride);
        let mu_i = builder.slots[is].mu;
        let mu_j = builder.slots[js].mu;
        if builder.slots[is].is_input {
            builder.slots[is].b = Some(builder.slots[js].a.unwrap_or(0.0) + mu_j - mu_i);
            builder.slots[js].b = Some(builder.slots[is].a.unwrap_or(0.0) + mu_i - mu_j);
        } else {
            // The storing state reads no input; weaken the guard side only.
            let flipped = builder.slots[js].a.unwrap_or(0.0) - margin(builder.slots[js].guard);
            builder.slots[js].b = Some(flipped);
        }
    }
    builder.finish(WitnessKind::LeakingCycle, ell, eps_grid)
}

/// Path pair for a leaking pair of cycles: both cycles are repeated `ell`
/// times; inside them the inputs push half a unit toward the guard on one
/// path and against it on the other, and everything else reads zero.
pub fn gen_leaking_pair_pair(
    a: &DipAutomaton,
    witness: &ViolationWitness,
    ell: u32,
    eps_grid: &[f64],
) -> Result<WitnessPair, WitnessError> {
    expect_kind(witness, WitnessKind::LeakingPair)?;
    check_ell(ell)?;
    let (prefix, cycle_a, connector, cycle_b) = match witness {
        ViolationWitness::LeakingPair {
            prefix,
            cycle_a,
            connector,
            cycle_b,
        } => (prefix, cycle_a, connector, cycle_b),
        _ => unreachable!(),
    };

    let mut builder = Builder::new(a);
    builder.push_all(prefix);
    let mut cycle_ranges = Vec::new();
    for _ in 0..ell {
        cycle_ranges.push(builder.push_all(cycle_a));
    }
    builder.push_all(connector);
    for _ in 0..ell {
        cycle_ranges.push(builder.push_all(cycle_b));
    }

    for range in cycle_ranges {
        for k in range {
            let slot = &mut builder.slots[k];
            if !slot.is_input || slot.guard == Guard::True {
                continue;
            }
            let push = 0.5 * margin(slot.guard);
            slot.a = Some(push - slot.mu);
            slot.b = Some(-push - slot.mu);
        }
    }

    // Close with the opposite-guard exit when the second cycle's state has
    // one, mirroring the worked example's terminal step.
    let guards_in_b: Vec<Guard> = {
        let mut gs: Vec<Guard> = cycle_b
            .iter()
            .map(|e| e.guard)
            .filter(|&g| g != Guard::True)
            .collect();
        gs.sort();
        gs.dedup();
        gs
    };
    if let [only] = guards_in_b[..] {
        let exit_guard = if only == Guard::Ge { Guard::Lt } else { Guard::Ge };
        let end_state = cycle_b.first().map(|e| e.source).unwrap_or_default();
        if let Some(t) = a.transition(end_state, exit_guard) {
            if !t.assign && t.output.is_finite() {
                builder.push(EdgeRef {
                    source: end_state,
                    guard: exit_guard,
                });
            }
        }
    }
    builder.finish(WitnessKind::LeakingPair, ell, eps_grid)
}

/// Path pair for a disclosing cycle: the cycle is repeated `ell` times with
/// the released sample confined to the positive half-line; the second path
/// shifts the disclosing step's input by one, which scales that mass by an
/// exact exponential factor per repetition.
pub fn gen_disclosing_cycle_pair(
    a: &DipAutomaton,
    witness: &ViolationWitness,
    ell: u32,
    eps_grid: &[f64],
) -> Result<WitnessPair, WitnessError> {
    expect_kind(witness, WitnessKind::DisclosingCycle)?;
    check_ell(ell)?;
    let (prefix, cycle, disclosing_pos) = match witness {
        ViolationWitness::DisclosingCycle {
            prefix,
            cycle,
            disclosing_pos,
        } => (prefix, cycle, *disclosing_pos),
        _ => unreachable!(),
    };
    let m = prefix.len();
    let n = cycle.len();

    let mut builder = Builder::new(a);
    builder.push_all(prefix);
    for _ in 0..ell {
        builder.push_all(cycle);
    }
    // Center every guarded comparison at the state's own mean.
    for k in 0..builder.slots.len() {
        let mu = builder.slots[k].mu;
        builder.set_both(k, -mu);
    }

    let disclosed = a
        .transition(cycle[disclosing_pos].source, cycle[disclosing_pos].guard)
        .expect("edge exists");
    let (var, scale) = match &disclosed.output {
        OutputLabel::RealVar(v) => {
            let p = &a.state(disclosed.source).params;
            (
                *v,
                match v {
                    RealVar::Sample => rational_to_f64(&p.d),
                    RealVar::SampleAux => rational_to_f64(&p.d_aux),
                },
            )
        }
        OutputLabel::FiniteSym(_) => panic!("disclosing edge outputs a real"),
    };
    // Positive half-line and a downward shift give an exact per-repetition
    // factor, except that a guarded step also drags the guard mean along;
    // for a `<`-guarded auxiliary release the negative half-line with an
    // upward shift keeps the guard from favoring the shifted path.
    let (interval, shift) = match (var, disclosed.guard) {
        (RealVar::SampleAux, Guard::Lt) => ((f64::NEG_INFINITY, 0.0), 1.0),
        _ => ((0.0, f64::INFINITY), -1.0),
    };
    let exact = matches!(var, RealVar::Sample) || disclosed.guard == Guard::True;

    for rep in 0..ell as usize {
        let k = m + rep * n + disclosing_pos;
        let slot = &mut builder.slots[k];
        let center = match var {
            RealVar::Sample => -slot.mu,
            RealVar::SampleAux => -slot.mu_aux,
        };
        slot.a = Some(center);
        slot.b = Some(center + shift);
        slot.interval = interval;
    }
    let mut pair = builder.finish(WitnessKind::DisclosingCycle, ell, eps_grid)?;
    if exact {
        for cell in &mut pair.report {
            cell.predicted = Some((ell as f64 * scale * cell.eps).exp());
        }
    }
    Ok(pair)
}

/// Path pair for a privacy-violating path: the adjoining cycle is repeated
/// `ell` times and the real output's interval pins the register's sign, so
/// shifting the marked guard transitions by one yields an exact exponential
/// gap; the direct-exit shape instead uses the half-unit pushes printed in
/// the worked example.
pub fn gen_violating_path_pair(
    a: &DipAutomaton,
    witness: &ViolationWitness,
    ell: u32,
    eps_grid: &[f64],
) -> Result<WitnessPair, WitnessError> {
    expect_kind(witness, WitnessKind::PrivacyViolatingPath)?;
    check_ell(ell)?;
    let (clause, ag, prefix, path, cycle) = match witness {
        ViolationWitness::PrivacyViolatingPath {
            clause,
            ag,
            prefix,
            path,
            cycle,
        } => (*clause, *ag, prefix, path, cycle),
        _ => unreachable!(),
    };
    // Guard marked inside the cycle and the half-line pinning the register.
    let (marked_guard, pin_interval, shift) = if ag {
        match clause {
            Clause::C => (Guard::Lt, (f64::NEG_INFINITY, 0.0), 1.0),
            _ => (Guard::Ge, (0.0, f64::INFINITY), -1.0),
        }
    } else {
        match clause {
            Clause::C => (Guard::Ge, (0.0, f64::INFINITY), -1.0),
            _ => (Guard::Lt, (f64::NEG_INFINITY, 0.0), 1.0),
        }
    };
    let marked_pos = cycle
        .iter()
        .position(|e| e.guard == marked_guard)
        .expect("cycle carries the marked guard");
    let scale = rational_to_f64(&a.state(cycle[marked_pos].source).params.d);

    let mut builder = Builder::new(a);
    builder.push_all(prefix);
    let cycle_start;
    let pin_idx;
    match clause {
        Clause::C => {
            cycle_start = builder.slots.len();
            for _ in 0..ell {
                builder.push_all(cycle);
            }
            builder.push_all(path);
            pin_idx = builder.slots.len() - 1;
        }
        _ => {
            builder.push_all(path);
            pin_idx = builder.slots.len() - path.len();
            cycle_start = builder.slots.len();
            for _ in 0..ell {
                builder.push_all(cycle);
            }
        }
    }

    // Direct-exit shape from the worked example: the sample is released
    // straight off the cycle, observed on the opposite half-line, with
    // half-unit pushes inside the cycle.
    let main_text_shape = clause == Clause::C && path.len() == 1;

    for k in 0..builder.slots.len() {
        let mu = builder.slots[k].mu;
        builder.set_both(k, -mu);
    }
    if main_text_shape {
        let n = cycle.len();
        for rep in 0..ell as usize {
            for (p, e) in cycle.iter().enumerate() {
                if e.guard != marked_guard {
                    continue;
                }
                let k = cycle_start + rep * n + p;
                let slot = &mut builder.slots[k];
                let push = 0.5 * margin(marked_guard);
                slot.a = Some(push - slot.mu);
                slot.b = Some(-push - slot.mu);
            }
        }
        let (lo, hi) = (0.0, f64::INFINITY);
        let flip = if ag { (lo, hi) } else { (f64::NEG_INFINITY, 0.0) };
        builder.slots[pin_idx].interval = flip;
    } else {
        let n = cycle.len();
        for rep in 0..ell as usize {
            let k = cycle_start + rep * n + marked_pos;
            let slot = &mut builder.slots[k];
            let center = -slot.mu;
            slot.a = Some(center);
            slot.b = Some(center + shift);
        }
        builder.slots[pin_idx].interval = pin_interval;
    }

    let mut pair = builder.finish(WitnessKind::PrivacyViolatingPath, ell, eps_grid)?;
    if !main_text_shape {
        for cell in &mut pair.report {
            cell.predicted = Some((ell as f64 * scale * cell.eps).exp());
        }
    }
    Ok(pair)
}

/// Dispatch on the witness kind.
pub fn gen_pair(
    a: &DipAutomaton,
    witness: &ViolationWitness,
    ell: u32,
    eps_grid: &[f64],
) -> Result<WitnessPair, WitnessError> {
    match witness.kind() {
        WitnessKind::LeakingCycle => gen_leaking_cycle_pair(a, witness, ell, eps_grid),
        WitnessKind::LeakingPair => gen_leaking_pair_pair(a, witness, ell, eps_grid),
        WitnessKind::DisclosingCycle => gen_disclosing_cycle_pair(a, witness, ell, eps_grid),
        WitnessKind::PrivacyViolatingPath => gen_violating_path_pair(a, witness, ell, eps_grid),
    }
}

/// One refutation cell: the pair beat the budget threshold at this epsilon
/// and repetition count, and simulation confirmed the direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Refutation {
    pub pair: WitnessPair,
    pub ell: u32,
    pub eps: f64,
    pub exact_ratio: f64,
    pub threshold: f64,
    pub mc1: McProb,
    pub mc2: McProb,
    /// Exact probabilities under 10/n make the simulation unreliable.
    pub mc_reliable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RefuteOutcome {
    Refuted(Refutation),
    /// Best ratio seen and where, when no cell beat the threshold.
    Inconclusive {
        best_ratio: f64,
        at_ell: u32,
        at_eps: f64,
    },
}

pub const REFUTE_MC_SAMPLES: u64 = 1_000_000;

/// Searches repetition counts 1, 2, 4, ... up to `ell_max` and the epsilon
/// grid for a pair whose exact ratio exceeds `e^{d eps}` with Monte Carlo
/// confirmation; cells are visited in ascending (ell, eps) order and the
/// first confirmed hit wins.
pub fn refute(
    a: &DipAutomaton,
    d: &Rational,
    eps_grid: &[f64],
    ell_max: u32,
    mc_samples: u64,
    seed: u64,
) -> Result<RefuteOutcome, WitnessError> {
    let mut schedule = Vec::new();
    let mut ell = 1u32;
    while ell <= ell_max {
        schedule.push(ell);
        ell = ell.saturating_mul(2);
    }
    refute_schedule(a, d, eps_grid, &schedule, mc_samples, seed)
}

/// `refute` over an explicit list of repetition counts.
pub fn refute_schedule(
    a: &DipAutomaton,
    d: &Rational,
    eps_grid: &[f64],
    ells: &[u32],
    mc_samples: u64,
    seed: u64,
) -> Result<RefuteOutcome, WitnessError> {
    let witness = match check_well_formed(a) {
        Verdict::WellFormed { .. } => return Err(WitnessError::AutomatonIsWellFormed),
        Verdict::NotWellFormed { witness } => witness,
    };
    let d = rational_to_f64(d);
    let mut best: Option<(f64, u32, f64)> = None;
    for &ell in ells {
        check_ell(ell)?;
        let pair = gen_pair(a, &witness, ell, eps_grid)?;
        for cell in &pair.report {
            let threshold = (d * cell.eps).exp();
            if cell.prob2 > 0.0 {
                if best.is_none_or(|(r, _, _)| cell.ratio > r) {
                    best = Some((cell.ratio, ell, cell.eps));
                }
                if cell.ratio > threshold {
                    let mc1 = pathprob_mc(a, cell.eps, 0.0, &pair.rho1, mc_samples, seed)?;
                    let mc2 =
                        pathprob_mc(a, cell.eps, 0.0, &pair.rho2, mc_samples, seed.wrapping_add(1))?;
                    let gap = mc1.estimate - threshold * mc2.estimate;
                    let sigma = (mc1.std_error.powi(2)
                        + (threshold * mc2.std_error).powi(2))
                    .sqrt();
                    if gap > 4.0 * sigma {
                        let mc_reliable = cell.prob1 >= 10.0 / mc_samples as f64
                            && cell.prob2 >= 10.0 / mc_samples as f64;
                        return Ok(RefuteOutcome::Refuted(Refutation {
                            ell,
                            eps: cell.eps,
                            exact_ratio: cell.ratio,
                            threshold,
                            mc1,
                            mc2,
                            mc_reliable,
                            pair,
                        }));
                    }
                }
            }
        }
    }
    let (best_ratio, at_ell, at_eps) = best.unwrap_or((0.0, 0, 0.0));
    Ok(RefuteOutcome::Inconclusive {
        best_ratio,
        at_ell,
        at_eps,
    })
}
