//! Concrete paths and their probabilities: replay checking against the
//! transition function, adjacency and equivalence of inputs/outputs, exact
//! probability evaluation through the piecewise exponential-polynomial
//! calculus, and Monte Carlo simulation of the mechanism.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automaton::{DipAutomaton, Guard, ObservedKind, OutputLabel, RealVar, StateKind};
use crate::laplace::LaplaceDist;
use crate::pep::PiecewiseExpPoly;
use crate::rational::rational_to_f64;

/// Observation attached to one step: a finite symbol, or a real-valued
/// output together with the open interval it fell in.
#[derive(Debug, Clone, PartialEq)]
pub enum Observed {
    Sym(String),
    Real { var: RealVar, lo: f64, hi: f64 },
}

impl Observed {
    pub fn real_unbounded(var: RealVar) -> Self {
        Observed::Real {
            var,
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    fn kind(&self) -> ObservedKind {
        match self {
            Observed::Sym(s) => ObservedKind::Sym(s.clone()),
            Observed::Real { var, .. } => ObservedKind::Var(*var),
        }
    }
}

/// Unresolved step as given in a path document.
#[derive(Debug, Clone, PartialEq)]
pub struct RawStep {
    pub input: Option<f64>,
    pub observed: Observed,
}

/// One resolved step: the source state, the consumed input (absent exactly
/// on non-input states), the observation, and the transition it selects.
#[derive(Debug, Clone, PartialEq)]
pub struct PathStep {
    pub state: usize,
    pub input: Option<f64>,
    pub observed: Observed,
    pub guard: Guard,
    pub assign: bool,
    pub target: usize,
}

/// A checked path: consecutive states chained by the transition function,
/// with the observation sequence determining the transition sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    start: usize,
    steps: Vec<PathStep>,
}

/// Element of an output sequence; real outputs keep only their interval.
#[derive(Debug, Clone, PartialEq)]
pub enum OutSym {
    Sym(String),
    Interval(f64, f64),
}

impl Path {
    pub fn start(&self) -> usize {
        self.start
    }

    pub fn steps(&self) -> &[PathStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn inseq(&self) -> Vec<Option<f64>> {
        self.steps.iter().map(|s| s.input).collect()
    }

    pub fn outseq(&self) -> Vec<OutSym> {
        self.steps
            .iter()
            .map(|s| match &s.observed {
                Observed::Sym(sym) => OutSym::Sym(sym.clone()),
                Observed::Real { lo, hi, .. } => OutSym::Interval(*lo, *hi),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PathError {
    #[error("step {0}: no transition from the current state with this output")]
    NoSuchTransition(usize),
    #[error("step {0}: input presence does not match the state kind")]
    InputKindMismatch(usize),
    #[error("step {0}: output interval is empty or malformed")]
    BadInterval(usize),
    #[error("unknown state {0:?}")]
    UnknownState(String),
}

/// Resolves raw steps against the automaton starting from `start`,
/// verifying chaining, input-kind match, and interval sanity.
pub fn check_path_from(
    a: &DipAutomaton,
    start: usize,
    raw: &[RawStep],
) -> Result<Path, PathError> {
    let mut steps = Vec::with_capacity(raw.len());
    let mut cur = start;
    for (i, step) in raw.iter().enumerate() {
        match a.state(cur).kind {
            StateKind::Input => {
                match step.input {
                    Some(v) if v.is_finite() => {}
                    _ => return Err(PathError::InputKindMismatch(i)),
                }
            }
            StateKind::NonInput => {
                if step.input.is_some() {
                    return Err(PathError::InputKindMismatch(i));
                }
            }
        }
        if let Observed::Real { lo, hi, .. } = step.observed {
            if lo >= hi || lo.is_nan() || hi.is_nan() {
                return Err(PathError::BadInterval(i));
            }
        }
        let t = a
            .transition_by_output(cur, &step.observed.kind())
            .ok_or(PathError::NoSuchTransition(i))?;
        steps.push(PathStep {
            state: cur,
            input: step.input,
            observed: step.observed.clone(),
            guard: t.guard,
            assign: t.assign,
            target: t.target,
        });
        cur = t.target;
    }
    Ok(Path { start, steps })
}

/// Path rooted at the initial state.
pub fn check_path(a: &DipAutomaton, raw: &[RawStep]) -> Result<Path, PathError> {
    check_path_from(a, a.init_index(), raw)
}

/// Adjacency of input sequences: equal length, absent inputs aligned, and
/// present inputs pointwise within 1.
pub fn adjacent(s1: &[Option<f64>], s2: &[Option<f64>]) -> bool {
    s1.len() == s2.len()
        && s1.iter().zip(s2).all(|(a, b)| match (a, b) {
            (None, None) => true,
            (Some(x), Some(y)) => (x - y).abs() <= 1.0,
            _ => false,
        })
}

/// Equivalence: same start and same output sequence (which pins the
/// transition sequence, by output distinction).
pub fn equivalent(p1: &Path, p2: &Path) -> bool {
    p1.start == p2.start && p1.outseq() == p2.outseq()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("epsilon must be positive")]
    NonPositiveEpsilon,
    #[error("state {0:?} has a zero scale where the sample matters")]
    DegenerateScale(String),
}

/// Monte Carlo estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McProb {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

struct StepParams {
    rate: f64,
    nu: f64,
    aux_rate: f64,
    aux_nu: f64,
}

fn step_params(a: &DipAutomaton, step: &PathStep, eps: f64) -> StepParams {
    let p = &a.state(step.state).params;
    let shift = step.input.unwrap_or(0.0);
    StepParams {
        rate: rational_to_f64(&p.d) * eps,
        nu: rational_to_f64(&p.mu) + shift,
        aux_rate: rational_to_f64(&p.d_aux) * eps,
        aux_nu: rational_to_f64(&p.mu_aux) + shift,
    }
}

fn interval_of(observed: &Observed) -> (f64, f64) {
    match observed {
        Observed::Sym(_) => (f64::NEG_INFINITY, f64::INFINITY),
        Observed::Real { lo, hi, .. } => (*lo, *hi),
    }
}

/// Exact path probability as a function of the register's starting value,
/// built back-to-front: the suffix probability is carried as a piecewise
/// exponential polynomial in the stored value, multiplied by guard and
/// interval factors on non-assignment steps and integrated against the
/// shifted sample density on assignment steps.
pub fn pathprob_fn(
    a: &DipAutomaton,
    eps: f64,
    path: &Path,
) -> Result<PiecewiseExpPoly, EvalError> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(EvalError::NonPositiveEpsilon);
    }
    let mut g = PiecewiseExpPoly::constant(1.0);
    for step in path.steps.iter().rev() {
        let params = step_params(a, step, eps);
        let state_id = || a.state(step.state).id.clone();
        let needs_sample = step.guard != Guard::True
            || step.assign
            || matches!(
                step.observed,
                Observed::Real {
                    var: RealVar::Sample,
                    ..
                }
            );
        if needs_sample && params.rate <= 0.0 {
            return Err(EvalError::DegenerateScale(state_id()));
        }
        // Factor for an auxiliary-sample output: independent of the guard
        // sample, so it contributes a plain scalar.
        let aux_factor = match &step.observed {
            Observed::Real {
                var: RealVar::SampleAux,
                lo,
                hi,
            } => {
                if params.aux_rate <= 0.0 {
                    return Err(EvalError::DegenerateScale(state_id()));
                }
                let dist = LaplaceDist::new(params.aux_rate, params.aux_nu).unwrap();
                Some(dist.cdf(*hi) - dist.cdf(*lo))
            }
            _ => None,
        };
        let (lo, hi) = match aux_factor {
            // The guard sample is unconstrained when the aux sample is output.
            Some(_) => (f64::NEG_INFINITY, f64::INFINITY),
            None => interval_of(&step.observed),
        };

        g = if step.assign {
            let density = PiecewiseExpPoly::laplace_pdf(params.rate, params.nu);
            let product = density.mul(&g);
            let clamped = if lo.is_finite() || hi.is_finite() {
                product.clamp(lo, hi)
            } else {
                product
            };
            match step.guard {
                Guard::True => {
                    let total = clamped
                        .integrate(f64::NEG_INFINITY, f64::INFINITY)
                        .expect("sample density decays");
                    PiecewiseExpPoly::constant(total)
                }
                Guard::Ge => clamped.integrate_upper().expect("sample density decays"),
                Guard::Lt => clamped.integrate_lower().expect("sample density decays"),
            }
        } else {
            match step.guard {
                Guard::True => {
                    if let Observed::Real {
                        var: RealVar::Sample,
                        ..
                    } = &step.observed
                    {
                        let dist = LaplaceDist::new(params.rate, params.nu).unwrap();
                        g.scale(dist.cdf(hi) - dist.cdf(lo))
                    } else {
                        g
                    }
                }
                guard => {
                    let density = PiecewiseExpPoly::laplace_pdf(params.rate, params.nu);
                    let clamped = if lo.is_finite() || hi.is_finite() {
                        density.clamp(lo, hi)
                    } else {
                        density
                    };
                    let factor = match guard {
                        Guard::Ge => clamped.integrate_upper(),
                        _ => clamped.integrate_lower(),
                    }
                    .expect("sample density decays");
                    factor.mul(&g)
                }
            }
        };
        if let Some(k_aux) = aux_factor {
            g = g.scale(k_aux);
        }
    }
    Ok(g)
}

/// Exact probability of the path for a given starting register value.
pub fn pathprob_exact(a: &DipAutomaton, eps: f64, x0: f64, path: &Path) -> Result<f64, EvalError> {
    Ok(pathprob_fn(a, eps, path)?.eval(x0).clamp(0.0, 1.0))
}

const MC_CHUNK: u64 = 1 << 16;

/// Direct simulation of the mechanism along the path's inputs; the hit
/// fraction estimates the path probability. The sample count is split into
/// fixed-size chunks with per-chunk derived seeds, so the merged estimate is
/// independent of worker count.
pub fn pathprob_mc(
    a: &DipAutomaton,
    eps: f64,
    x0: f64,
    path: &Path,
    n: u64,
    seed: u64,
) -> Result<McProb, EvalError> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(EvalError::NonPositiveEpsilon);
    }
    assert!(n >= 1, "sample count must be at least 1");
    // Reject degenerate scales up front, mirroring the exact evaluator.
    for step in &path.steps {
        let params = step_params(a, step, eps);
        let needs_sample = step.guard != Guard::True
            || step.assign
            || matches!(step.observed, Observed::Real { var: RealVar::Sample, .. });
        if needs_sample && params.rate <= 0.0 {
            return Err(EvalError::DegenerateScale(a.state(step.state).id.clone()));
        }
        if matches!(step.observed, Observed::Real { var: RealVar::SampleAux, .. })
            && params.aux_rate <= 0.0
        {
            return Err(EvalError::DegenerateScale(a.state(step.state).id.clone()));
        }
    }

    let chunks: Vec<(u64, u64)> = (0..n.div_ceil(MC_CHUNK))
        .map(|c| (c, MC_CHUNK.min(n - c * MC_CHUNK)))
        .collect();
    let hits: u64 = chunks
        .par_iter()
        .map(|&(chunk_index, count)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(chunk_index));
            let mut hits = 0u64;
            for _ in 0..count {
                if simulate_once(a, eps, x0, path, &mut rng) {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let estimate = hits as f64 / n as f64;
    Ok(McProb {
        estimate,
        std_error: (estimate * (1.0 - estimate) / n as f64).sqrt(),
        samples: n,
        seed,
    })
}

fn simulate_once(
    a: &DipAutomaton,
    eps: f64,
    x0: f64,
    path: &Path,
    rng: &mut ChaCha8Rng,
) -> bool {
    let mut stored = x0;
    for step in &path.steps {
        let params = step_params(a, step, eps);
        let needs_sample = step.guard != Guard::True
            || step.assign
            || matches!(step.observed, Observed::Real { var: RealVar::Sample, .. });
        let sample = if needs_sample {
            Some(
                LaplaceDist::new(params.rate, params.nu)
                    .expect("checked above")
                    .sample(rng),
            )
        } else {
            None
        };
        // The realized branch must be the path's transition.
        let realized = if a.transition(step.state, Guard::True).is_some() {
            Guard::True
        } else if sample.expect("guarded step samples") >= stored {
            Guard::Ge
        } else {
            Guard::Lt
        };
        if realized != step.guard || a.transition(step.state, realized).is_none() {
            return false;
        }
        match &step.observed {
            Observed::Sym(_) => {}
            Observed::Real {
                var: RealVar::Sample,
                lo,
                hi,
            } => {
                let s = sample.expect("sample output draws");
                if !(s > *lo && s < *hi) {
                    return false;
                }
            }
            Observed::Real {
                var: RealVar::SampleAux,
                lo,
                hi,
            } => {
                let aux = LaplaceDist::new(params.aux_rate, params.aux_nu)
                    .expect("checked above")
                    .sample(rng);
                if !(aux > *lo && aux < *hi) {
                    return false;
                }
            }
        }
        if step.assign {
            stored = sample.expect("assignment draws");
        }
    }
    true
}

/// Sum of the two branch probabilities at a state with both guarded
/// transitions; the contract is that full-interval branches partition the
/// sample space, so the sum is 1.
pub fn branch_partition_check(
    a: &DipAutomaton,
    eps: f64,
    x: f64,
    state: usize,
) -> Result<f64, EvalError> {
    let mut total = 0.0;
    for guard in [Guard::Ge, Guard::Lt] {
        let t = a
            .transition(state, guard)
            .unwrap_or_else(|| panic!("state {:?} lacks a {guard} branch", a.state(state).id));
        let observed = match &t.output {
            OutputLabel::FiniteSym(s) => Observed::Sym(s.clone()),
            OutputLabel::RealVar(v) => Observed::real_unbounded(*v),
        };
        let input = match a.state(state).kind {
            StateKind::Input => Some(0.0),
            StateKind::NonInput => None,
        };
        let path = check_path_from(a, state, &[RawStep { input, observed }])
            .expect("single declared transition replays");
        total += pathprob_exact(a, eps, x, &path)?;
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Path documents
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct PathDocument {
    pub automaton: String,
    pub x0: f64,
    pub steps: Vec<RawStep>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathDocDto {
    automaton: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    x0: Option<f64>,
    steps: Vec<StepDto>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepDto {
    input: Option<f64>,
    observed: ObservedDto,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ObservedDto {
    Sym {
        sym: String,
    },
    Var {
        var: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        lo: Option<BoundDto>,
        #[serde(skip_serializing_if = "Option::is_none")]
        hi: Option<BoundDto>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BoundDto {
    Num(f64),
    Named(String),
}

fn bound_from(dto: &BoundDto, low_side: bool) -> Result<f64, crate::automaton::ParseError> {
    match dto {
        BoundDto::Num(v) => Ok(*v),
        BoundDto::Named(s) => match (s.as_str(), low_side) {
            ("-inf", _) => Ok(f64::NEG_INFINITY),
            ("inf", _) | ("+inf", _) => Ok(f64::INFINITY),
            _ => Err(crate::automaton::ParseError::Schema(format!(
                "bad interval bound {s:?}; expected a number, \"-inf\", or \"inf\""
            ))),
        },
    }
}

pub fn parse_path_document(doc: &str) -> Result<PathDocument, crate::automaton::ParseError> {
    use crate::automaton::ParseError;
    let value: serde_json::Value = serde_json::from_str(doc).map_err(|e| ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let dto: PathDocDto =
        serde_json::from_value(value).map_err(|e| ParseError::Schema(e.to_string()))?;
    let mut steps = Vec::with_capacity(dto.steps.len());
    for s in dto.steps {
        let observed = match s.observed {
            ObservedDto::Sym { sym } => Observed::Sym(sym),
            ObservedDto::Var { var, lo, hi } => {
                let var = match var.as_str() {
                    "sample" => RealVar::Sample,
                    "sample_aux" => RealVar::SampleAux,
                    other => {
                        return Err(ParseError::Schema(format!(
                            "bad output var {other:?}; expected \"sample\" or \"sample_aux\""
                        )))
                    }
                };
                let lo = lo
                    .map(|b| bound_from(&b, true))
                    .transpose()?
                    .unwrap_or(f64::NEG_INFINITY);
                let hi = hi
                    .map(|b| bound_from(&b, false))
                    .transpose()?
                    .unwrap_or(f64::INFINITY);
                Observed::Real { var, lo, hi }
            }
        };
        steps.push(RawStep {
            input: s.input,
            observed,
        });
    }
    Ok(PathDocument {
        automaton: dto.automaton,
        x0: dto.x0.unwrap_or(0.0),
        steps,
    })
}

pub fn serialize_path_document(automaton: &str, x0: f64, path: &Path) -> String {
    let dto = PathDocDto {
        automaton: automaton.to_string(),
        x0: Some(x0),
        steps: path
            .steps
            .iter()
            .map(|st| StepDto {
                input: st.input,
                observed: match &st.observed {
                    Observed::Sym(s) => ObservedDto::Sym { sym: s.clone() },
                    Observed::Real { var, lo, hi } => ObservedDto::Var {
                        var: var.as_str().to_string(),
                        lo: Some(if lo.is_finite() {
                            BoundDto::Num(*lo)
                        } else {
                            BoundDto::Named("-inf".to_string())
                        }),
                        hi: Some(if hi.is_finite() {
                            BoundDto::Num(*hi)
                        } else {
                            BoundDto::Named("inf".to_string())
                        }),
                    },
                },
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&dto).expect("path document serialization");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::builtin;

    fn sym_step(input: Option<f64>, s: &str) -> RawStep {
        RawStep {
            input,
            observed: Observed::Sym(s.to_string()),
        }
    }

    /// The example SVT paths: inputs (a1, a2), outputs bot bot top.
    fn svt_path(a: &DipAutomaton, a1: f64, a2: f64) -> Path {
        check_path(
            a,
            &[
                sym_step(None, "bot"),
                sym_step(Some(a1), "bot"),
                sym_step(Some(a2), "top"),
            ],
        )
        .unwrap()
    }

    fn paper_rho1(eps: f64) -> f64 {
        (24.0 * (0.75 * eps).exp() - 1.0 + 8.0 * (0.25 * eps).exp() - 21.0 * (0.5 * eps).exp())
            / (48.0 * (0.75 * eps).exp())
    }

    fn paper_rho2(eps: f64) -> f64 {
        (-22.0 + 32.0 * (0.25 * eps).exp() - 3.0 * eps) / (48.0 * (0.5 * eps).exp())
    }

    #[test]
    fn svt_example_path_checks_out() {
        let a = builtin("svt").unwrap();
        let p = svt_path(&a, 0.0, 1.0);
        assert_eq!(p.len(), 3);
        assert_eq!(p.inseq(), vec![None, Some(0.0), Some(1.0)]);
    }

    #[test]
    fn input_on_non_input_state_is_rejected() {
        let a = builtin("svt").unwrap();
        let err = check_path(&a, &[sym_step(Some(0.0), "bot")]).unwrap_err();
        assert_eq!(err, PathError::InputKindMismatch(0));
        let err = check_path(&a, &[sym_step(None, "bot"), sym_step(None, "bot")]).unwrap_err();
        assert_eq!(err, PathError::InputKindMismatch(1));
    }

    #[test]
    fn empty_interval_is_rejected() {
        let a = builtin("numeric_sparse").unwrap();
        let err = check_path(
            &a,
            &[
                sym_step(None, "bot"),
                RawStep {
                    input: Some(0.0),
                    observed: Observed::Real {
                        var: RealVar::SampleAux,
                        lo: 3.0,
                        hi: 3.0,
                    },
                },
            ],
        )
        .unwrap_err();
        assert_eq!(err, PathError::BadInterval(1));
    }

    #[test]
    fn wrong_output_is_no_such_transition() {
        let a = builtin("svt").unwrap();
        let err = check_path(&a, &[sym_step(None, "top")]).unwrap_err();
        assert_eq!(err, PathError::NoSuchTransition(0));
    }

    #[test]
    fn adjacency_examples() {
        assert!(adjacent(&[Some(0.0), Some(1.0)], &[Some(1.0), Some(1.0)]));
        assert!(!adjacent(&[Some(0.0)], &[Some(2.0)]));
        assert!(adjacent(&[None, Some(0.5)], &[None, Some(-0.5)]));
        assert!(!adjacent(&[None], &[Some(0.0)]));
        assert!(!adjacent(&[Some(0.0)], &[Some(0.0), Some(0.0)]));
    }

    #[test]
    fn equivalence_of_svt_examples() {
        let a = builtin("svt").unwrap();
        let p1 = svt_path(&a, 0.0, 1.0);
        let p2 = svt_path(&a, 1.0, 1.0);
        assert!(equivalent(&p1, &p2));
        assert!(adjacent(&p1.inseq(), &p2.inseq()));
        let shorter = check_path(&a, &[sym_step(None, "bot")]).unwrap();
        assert!(!equivalent(&p1, &shorter));
    }

    #[test]
    fn empty_path_has_probability_one() {
        let a = builtin("svt").unwrap();
        let p = check_path(&a, &[]).unwrap();
        for (eps, x0) in [(0.5, -3.0), (1.0, 0.0), (4.0, 10.0)] {
            assert_eq!(pathprob_exact(&a, eps, x0, &p).unwrap(), 1.0);
        }
    }

    #[test]
    fn svt_paths_match_printed_closed_forms() {
        let a = builtin("svt").unwrap();
        let p1 = svt_path(&a, 0.0, 1.0);
        let p2 = svt_path(&a, 1.0, 1.0);
        for eps in [0.5, 1.0, 2.0, 4.0] {
            let v1 = pathprob_exact(&a, eps, 0.0, &p1).unwrap();
            let v2 = pathprob_exact(&a, eps, 0.0, &p2).unwrap();
            let e1 = paper_rho1(eps);
            let e2 = paper_rho2(eps);
            assert!((v1 - e1).abs() / e1 < 1e-9, "eps={eps}: {v1} vs {e1}");
            assert!((v2 - e2).abs() / e2 < 1e-9, "eps={eps}: {v2} vs {e2}");
        }
    }

    #[test]
    fn init_rooted_probability_ignores_x0() {
        let a = builtin("numeric_sparse").unwrap();
        let p = check_path(
            &a,
            &[
                sym_step(None, "bot"),
                sym_step(Some(0.3), "bot"),
                RawStep {
                    input: Some(1.2),
                    observed: Observed::Real {
                        var: RealVar::SampleAux,
                        lo: 0.0,
                        hi: 2.5,
                    },
                },
            ],
        )
        .unwrap();
        let vals: Vec<f64> = [-5.0, 0.0, 7.0]
            .iter()
            .map(|&x0| pathprob_exact(&a, 1.0, x0, &p).unwrap())
            .collect();
        assert!(vals[0] > 0.0);
        assert_eq!(vals[0], vals[1]);
        assert_eq!(vals[1], vals[2]);
    }

    #[test]
    fn widening_an_interval_never_decreases_probability() {
        let a = builtin("numeric_sparse").unwrap();
        let mk = |lo: f64, hi: f64| {
            check_path(
                &a,
                &[
                    sym_step(None, "bot"),
                    RawStep {
                        input: Some(0.5),
                        observed: Observed::Real {
                            var: RealVar::SampleAux,
                            lo,
                            hi,
                        },
                    },
                ],
            )
            .unwrap()
        };
        let narrow = pathprob_exact(&a, 1.0, 0.0, &mk(0.0, 1.0)).unwrap();
        let wider = pathprob_exact(&a, 1.0, 0.0, &mk(-0.5, 2.0)).unwrap();
        let full = pathprob_exact(&a, 1.0, 0.0, &mk(f64::NEG_INFINITY, f64::INFINITY)).unwrap();
        assert!(narrow > 0.0);
        assert!(narrow <= wider && wider <= full);
    }

    #[test]
    fn true_guard_finite_step_multiplies_by_one() {
        // Custom automaton with a non-assignment pass-through step.
        use crate::automaton::*;
        let mut raw = builtin("svt").unwrap().to_raw();
        for t in &mut raw.transitions {
            if t.source == "q0" {
                t.target = "mid".to_string();
            }
        }
        raw.states.push(StateDecl {
            id: "mid".to_string(),
            kind: StateKind::NonInput,
            params: raw.states[0].params.clone(),
        });
        raw.transitions.push(TransitionDecl {
            source: "mid".to_string(),
            guard: Guard::True,
            target: "q1".to_string(),
            output: OutputLabel::FiniteSym("bot".to_string()),
            assign: false,
        });
        let a = validate(&raw).unwrap();
        let with_mid = check_path(
            &a,
            &[
                sym_step(None, "bot"),
                sym_step(None, "bot"),
                sym_step(Some(0.0), "bot"),
                sym_step(Some(1.0), "top"),
            ],
        )
        .unwrap();
        let v = pathprob_exact(&a, 1.0, 0.0, &with_mid).unwrap();
        let expect = paper_rho1(1.0);
        assert!((v - expect).abs() < 1e-12, "{v} vs {expect}");
    }

    #[test]
    fn mc_is_deterministic_and_matches_exact() {
        let a = builtin("svt").unwrap();
        let p = svt_path(&a, 0.0, 1.0);
        let m1 = pathprob_mc(&a, 1.0, 0.0, &p, 200_000, 11).unwrap();
        let m2 = pathprob_mc(&a, 1.0, 0.0, &p, 200_000, 11).unwrap();
        assert_eq!(m1, m2);
        let exact = pathprob_exact(&a, 1.0, 0.0, &p).unwrap();
        assert!(
            (m1.estimate - exact).abs() <= 4.0 * m1.std_error,
            "{} vs {exact} (se {})",
            m1.estimate,
            m1.std_error
        );
    }

    #[test]
    fn certain_and_impossible_steps() {
        let a = builtin("svt").unwrap();
        let certain = check_path(&a, &[sym_step(None, "bot")]).unwrap();
        let m = pathprob_mc(&a, 1.0, 0.0, &certain, 10_000, 3).unwrap();
        assert_eq!(m.estimate, 1.0);

        // From q1 with stored value 5, a ge-guarded sample cannot land in
        // an interval entirely below 5.
        let b = builtin("numeric_sparse_mod").unwrap();
        let q1 = b.state_index("q1").unwrap();
        let impossible = check_path_from(
            &b,
            q1,
            &[RawStep {
                input: Some(0.0),
                observed: Observed::Real {
                    var: RealVar::Sample,
                    lo: -10.0,
                    hi: -5.0,
                },
            }],
        )
        .unwrap();
        let exact = pathprob_exact(&b, 1.0, 5.0, &impossible).unwrap();
        assert_eq!(exact, 0.0);
        let m = pathprob_mc(&b, 1.0, 5.0, &impossible, 10_000, 3).unwrap();
        assert_eq!(m.estimate, 0.0);
    }

    #[test]
    fn branch_partition_sums_to_one() {
        let a = builtin("svt").unwrap();
        let q1 = a.state_index("q1").unwrap();
        for x in [-2.0, 0.0, 1.5] {
            for eps in [0.5, 1.0, 4.0] {
                let s = branch_partition_check(&a, eps, x, q1).unwrap();
                assert!((s - 1.0).abs() < 1e-12, "x={x} eps={eps}: {s}");
            }
        }
        let b = builtin("numeric_sparse").unwrap();
        let q1 = b.state_index("q1").unwrap();
        let s = branch_partition_check(&b, 1.0, 0.7, q1).unwrap();
        assert!((s - 1.0).abs() < 1e-12, "{s}");
    }

    #[test]
    fn partial_aux_interval_scales_by_its_mass() {
        let a = builtin("numeric_sparse").unwrap();
        let mk = |lo: f64, hi: f64| {
            check_path(
                &a,
                &[
                    sym_step(None, "bot"),
                    RawStep {
                        input: Some(0.0),
                        observed: Observed::Real {
                            var: RealVar::SampleAux,
                            lo,
                            hi,
                        },
                    },
                ],
            )
            .unwrap()
        };
        let eps = 1.0;
        let full = pathprob_exact(&a, eps, 0.0, &mk(f64::NEG_INFINITY, f64::INFINITY)).unwrap();
        let part = pathprob_exact(&a, eps, 0.0, &mk(0.0, 1.0)).unwrap();
        // The aux sample has rate eps/9 around the read input 0.
        let aux = LaplaceDist::new(eps / 9.0, 0.0).unwrap();
        let mass = aux.cdf(1.0) - aux.cdf(0.0);
        assert!((part - full * mass).abs() < 1e-12, "{part} vs {}", full * mass);
    }

    #[test]
    fn nonpositive_epsilon_is_rejected() {
        let a = builtin("svt").unwrap();
        let p = check_path(&a, &[sym_step(None, "bot")]).unwrap();
        assert_eq!(
            pathprob_exact(&a, 0.0, 0.0, &p).unwrap_err(),
            EvalError::NonPositiveEpsilon
        );
        assert_eq!(
            pathprob_mc(&a, -1.0, 0.0, &p, 10, 1).unwrap_err(),
            EvalError::NonPositiveEpsilon
        );
    }

    #[test]
    fn mc_chunking_is_invariant_in_worker_count() {
        let a = builtin("svt").unwrap();
        let p = svt_path(&a, 0.0, 1.0);
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let r1 = pool1.install(|| pathprob_mc(&a, 1.0, 0.0, &p, 150_000, 9).unwrap());
        let r4 = pool4.install(|| pathprob_mc(&a, 1.0, 0.0, &p, 150_000, 9).unwrap());
        assert_eq!(r1, r4);
    }

    #[test]
    fn path_document_round_trip() {
        let a = builtin("numeric_sparse").unwrap();
        let p = check_path(
            &a,
            &[
                sym_step(None, "bot"),
                RawStep {
                    input: Some(0.25),
                    observed: Observed::Real {
                        var: RealVar::SampleAux,
                        lo: f64::NEG_INFINITY,
                        hi: 1.5,
                    },
                },
            ],
        )
        .unwrap();
        let doc = serialize_path_document("numeric_sparse", 0.0, &p);
        let parsed = parse_path_document(&doc).unwrap();
        assert_eq!(parsed.automaton, "numeric_sparse");
        let p2 = check_path(&a, &parsed.steps).unwrap();
        assert_eq!(p, p2);
        // Bare var outputs default to the full interval.
        let bare = r#"{"automaton":"numeric_sparse","steps":[
            {"input":null,"observed":{"sym":"bot"}},
            {"input":0.0,"observed":{"var":"sample_aux"}}]}"#;
        let parsed = parse_path_document(bare).unwrap();
        match &parsed.steps[1].observed {
            Observed::Real { lo, hi, .. } => {
                assert_eq!(*lo, f64::NEG_INFINITY);
                assert_eq!(*hi, f64::INFINITY);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(parsed.x0, 0.0);
    }
}
