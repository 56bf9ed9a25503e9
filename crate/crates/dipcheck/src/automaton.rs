//! DiPA data model: states with sampling parameters, guarded transitions over
//! a single stored register, validation of the syntactic side conditions, the
//! canonical document format, and the built-in example automata.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{format_rational, parse_rational, rational_from_parts, Rational};

/// Guard of a transition: compare the fresh sample against the stored value.
///
/// Ordered `True < Ge < Lt` for deterministic serialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Guard {
    True,
    /// sample >= stored
    Ge,
    /// sample < stored
    Lt,
}

impl Guard {
    pub fn as_str(self) -> &'static str {
        match self {
            Guard::True => "true",
            Guard::Ge => "ge",
            Guard::Lt => "lt",
        }
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which freshly sampled variable a transition outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RealVar {
    /// The guard sample; stored on assignment transitions.
    Sample,
    /// The auxiliary sample, independent of the guard.
    SampleAux,
}

impl RealVar {
    pub fn as_str(self) -> &'static str {
        match self {
            RealVar::Sample => "sample",
            RealVar::SampleAux => "sample_aux",
        }
    }
}

/// Output of a transition: a symbol from the finite alphabet or a sampled real.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OutputLabel {
    FiniteSym(String),
    RealVar(RealVar),
}

impl OutputLabel {
    pub fn is_finite(&self) -> bool {
        matches!(self, OutputLabel::FiniteSym(_))
    }
}

impl fmt::Display for OutputLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutputLabel::FiniteSym(s) => write!(f, "{s}"),
            OutputLabel::RealVar(v) => write!(f, "{}", v.as_str()),
        }
    }
}

/// Laplace parameters of a state. The sample is drawn with rate `d * eps`
/// around `mu`, the auxiliary sample with rate `d_aux * eps` around `mu_aux`;
/// read inputs are added to both means.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateParams {
    pub d: Rational,
    pub mu: Rational,
    pub d_aux: Rational,
    pub mu_aux: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Input,
    NonInput,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateDecl {
    pub id: String,
    pub kind: StateKind,
    pub params: StateParams,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionDecl {
    pub source: String,
    pub guard: Guard,
    pub target: String,
    pub output: OutputLabel,
    pub assign: bool,
}

/// Unvalidated automaton description, as read from a document.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RawAutomaton {
    pub name: String,
    pub init: String,
    pub states: Vec<StateDecl>,
    pub transitions: Vec<TransitionDecl>,
    /// Optional declared superset of the output alphabet.
    pub alphabet: Option<BTreeSet<String>>,
}

/// One resolved transition inside a validated automaton; endpoints are state
/// indices into the sorted state table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub source: usize,
    pub guard: Guard,
    pub target: usize,
    pub output: OutputLabel,
    pub assign: bool,
}

/// Validated, immutable automaton. Construction goes through [`validate`],
/// which establishes determinism, output distinction, the initialization
/// shape, and the non-input restriction; the value is safe to share across
/// concurrent analyses afterwards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DipAutomaton {
    name: String,
    states: Vec<StateDecl>,
    init: usize,
    transitions: BTreeMap<(usize, Guard), Transition>,
    alphabet: BTreeSet<String>,
}

impl DipAutomaton {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    /// States sorted by id; indices returned elsewhere refer to this order.
    pub fn states(&self) -> &[StateDecl] {
        &self.states
    }

    pub fn state(&self, idx: usize) -> &StateDecl {
        &self.states[idx]
    }

    pub fn state_index(&self, id: &str) -> Option<usize> {
        self.states.binary_search_by(|s| s.id.as_str().cmp(id)).ok()
    }

    pub fn init_index(&self) -> usize {
        self.init
    }

    pub fn init_id(&self) -> &str {
        &self.states[self.init].id
    }

    pub fn is_input(&self, idx: usize) -> bool {
        matches!(self.states[idx].kind, StateKind::Input)
    }

    pub fn transition(&self, state: usize, guard: Guard) -> Option<&Transition> {
        self.transitions.get(&(state, guard))
    }

    /// All transitions in (source, guard) order.
    pub fn transitions(&self) -> impl Iterator<Item = &Transition> {
        self.transitions.values()
    }

    pub fn transitions_from(&self, state: usize) -> impl Iterator<Item = &Transition> {
        [Guard::True, Guard::Ge, Guard::Lt]
            .into_iter()
            .filter_map(move |g| self.transitions.get(&(state, g)))
    }

    /// Derived finite output alphabet.
    pub fn alphabet(&self) -> &BTreeSet<String> {
        &self.alphabet
    }

    /// The unique transition out of `state` with the given output, if any.
    /// Output distinction makes the match unambiguous.
    pub fn transition_by_output(&self, state: usize, output: &ObservedKind) -> Option<&Transition> {
        self.transitions_from(state).find(|t| match (&t.output, output) {
            (OutputLabel::FiniteSym(a), ObservedKind::Sym(b)) => a == b,
            (OutputLabel::RealVar(a), ObservedKind::Var(b)) => a == b,
            _ => false,
        })
    }

    pub fn to_raw(&self) -> RawAutomaton {
        RawAutomaton {
            name: self.name.clone(),
            init: self.init_id().to_string(),
            states: self.states.clone(),
            transitions: self
                .transitions
                .values()
                .map(|t| TransitionDecl {
                    source: self.states[t.source].id.clone(),
                    guard: t.guard,
                    target: self.states[t.target].id.clone(),
                    output: t.output.clone(),
                    assign: t.assign,
                })
                .collect(),
            alphabet: None,
        }
    }
}

/// Output shape used to select transitions when replaying observed steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObservedKind {
    Sym(String),
    Var(RealVar),
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// A single validation finding. `validate` reports every finding, not just
/// the first, so the tool can be used as a linter.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationIssue {
    #[error("duplicate state id {id:?}")]
    DuplicateStateId { id: String },
    #[error("transition ({from:?}, {guard}) references undeclared state {missing:?}")]
    DanglingReference {
        from: String,
        guard: Guard,
        missing: String,
    },
    #[error("init state {init:?} is not declared")]
    DanglingInit { init: String },
    #[error("determinism violation at state {state:?}: {detail}")]
    DeterminismViolation { state: String, detail: String },
    #[error("output distinction violation at state {state:?}: {detail}")]
    OutputDistinctionViolation { state: String, detail: String },
    #[error("initialization violation: {detail}")]
    InitializationViolation { detail: String },
    #[error("non-input state {state:?} has a guarded ({guard}) transition")]
    NonInputViolation { state: String, guard: Guard },
    #[error("negative scale {which} = {value} at state {state:?}")]
    NegativeScale {
        state: String,
        which: &'static str,
        value: String,
    },
    #[error("degenerate scale at state {state:?}: {detail}")]
    DegenerateScale { state: String, detail: String },
    #[error("output symbol {symbol:?} is not in the declared alphabet")]
    AlphabetMismatch { symbol: String },
}

/// Validates a raw description and freezes it into a [`DipAutomaton`].
///
/// All violations found are returned together, each naming the offending
/// state or transition.
pub fn validate(raw: &RawAutomaton) -> Result<DipAutomaton, Vec<ValidationIssue>> {
    let mut issues = Vec::new();

    let mut states = raw.states.clone();
    states.sort_by(|a, b| a.id.cmp(&b.id));
    let mut seen = BTreeSet::new();
    for s in &states {
        if !seen.insert(s.id.clone()) {
            issues.push(ValidationIssue::DuplicateStateId { id: s.id.clone() });
        }
    }
    states.dedup_by(|a, b| a.id == b.id);

    let index: BTreeMap<&str, usize> = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.id.as_str(), i))
        .collect();

    let init = index.get(raw.init.as_str()).copied();
    if init.is_none() {
        issues.push(ValidationIssue::DanglingInit {
            init: raw.init.clone(),
        });
    }

    let mut transitions: BTreeMap<(usize, Guard), Transition> = BTreeMap::new();
    for t in &raw.transitions {
        let src = match index.get(t.source.as_str()) {
            Some(&i) => i,
            None => {
                issues.push(ValidationIssue::DanglingReference {
                    from: t.source.clone(),
                    guard: t.guard,
                    missing: t.source.clone(),
                });
                continue;
            }
        };
        let tgt = match index.get(t.target.as_str()) {
            Some(&i) => i,
            None => {
                issues.push(ValidationIssue::DanglingReference {
                    from: t.source.clone(),
                    guard: t.guard,
                    missing: t.target.clone(),
                });
                continue;
            }
        };
        let prev = transitions.insert(
            (src, t.guard),
            Transition {
                source: src,
                guard: t.guard,
                target: tgt,
                output: t.output.clone(),
                assign: t.assign,
            },
        );
        if prev.is_some() {
            issues.push(ValidationIssue::DeterminismViolation {
                state: t.source.clone(),
                detail: format!("two transitions share the guard {}", t.guard),
            });
        }
    }

    for (i, s) in states.iter().enumerate() {
        let has_true = transitions.contains_key(&(i, Guard::True));
        let ge = transitions.get(&(i, Guard::Ge));
        let lt = transitions.get(&(i, Guard::Lt));

        if has_true && (ge.is_some() || lt.is_some()) {
            issues.push(ValidationIssue::DeterminismViolation {
                state: s.id.clone(),
                detail: "a true-guarded transition coexists with a ge/lt one".to_string(),
            });
        }
        if let (Some(g), Some(l)) = (ge, lt) {
            if g.output == l.output {
                issues.push(ValidationIssue::OutputDistinctionViolation {
                    state: s.id.clone(),
                    detail: format!("both guarded transitions output {}", g.output),
                });
            } else if !g.output.is_finite() && !l.output.is_finite() {
                issues.push(ValidationIssue::OutputDistinctionViolation {
                    state: s.id.clone(),
                    detail: "both guarded transitions output real values".to_string(),
                });
            }
        }
        if matches!(s.kind, StateKind::NonInput) {
            for guard in [Guard::Ge, Guard::Lt] {
                if transitions.contains_key(&(i, guard)) {
                    issues.push(ValidationIssue::NonInputViolation {
                        state: s.id.clone(),
                        guard,
                    });
                }
            }
        }
    }

    // Initialization: exactly one outgoing transition, true-guarded, assigning.
    if let Some(init) = init {
        let init_outgoing: Vec<_> = [Guard::True, Guard::Ge, Guard::Lt]
            .into_iter()
            .filter_map(|g| transitions.get(&(init, g)))
            .collect();
        match transitions.get(&(init, Guard::True)) {
            Some(t) if init_outgoing.len() == 1 => {
                if !t.assign {
                    issues.push(ValidationIssue::InitializationViolation {
                        detail: format!("initial transition from {:?} must assign", raw.init),
                    });
                }
            }
            Some(_) => issues.push(ValidationIssue::InitializationViolation {
                detail: format!(
                    "initial state {:?} has more than one outgoing transition",
                    raw.init
                ),
            }),
            None => issues.push(ValidationIssue::InitializationViolation {
                detail: format!(
                    "initial state {:?} needs exactly one true-guarded outgoing transition",
                    raw.init
                ),
            }),
        }
    }

    let zero = Rational::from_integer(0.into());
    for (i, s) in states.iter().enumerate() {
        for (which, value) in [("d", &s.params.d), ("d_aux", &s.params.d_aux)] {
            if *value < zero {
                issues.push(ValidationIssue::NegativeScale {
                    state: s.id.clone(),
                    which,
                    value: format_rational(value),
                });
            }
        }
        let needs_d = transitions.iter().any(|(&(src, g), t)| {
            src == i
                && (g != Guard::True || t.output == OutputLabel::RealVar(RealVar::Sample) || t.assign)
        });
        if needs_d && s.params.d == zero {
            issues.push(ValidationIssue::DegenerateScale {
                state: s.id.clone(),
                detail: "d = 0 but the sample feeds a guard, an output, or the register"
                    .to_string(),
            });
        }
        let needs_d_aux = transitions.iter().any(|(&(src, _), t)| {
            src == i && t.output == OutputLabel::RealVar(RealVar::SampleAux)
        });
        if needs_d_aux && s.params.d_aux == zero {
            issues.push(ValidationIssue::DegenerateScale {
                state: s.id.clone(),
                detail: "d_aux = 0 but a transition outputs the auxiliary sample".to_string(),
            });
        }
    }

    let mut alphabet = BTreeSet::new();
    for t in transitions.values() {
        if let OutputLabel::FiniteSym(sym) = &t.output {
            alphabet.insert(sym.clone());
        }
    }
    if let Some(declared) = &raw.alphabet {
        for sym in &alphabet {
            if !declared.contains(sym) {
                issues.push(ValidationIssue::AlphabetMismatch {
                    symbol: sym.clone(),
                });
            }
        }
    }

    if issues.is_empty() {
        Ok(DipAutomaton {
            name: raw.name.clone(),
            states,
            init: init.expect("no dangling-init issue"),
            transitions,
            alphabet,
        })
    } else {
        Err(issues)
    }
}

// ---------------------------------------------------------------------------
// Built-in automata
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown builtin {0:?}; expected one of svt, numeric_sparse, sort, svt_two_phase, numeric_sparse_mod")]
pub struct UnknownBuiltin(pub String);

pub const BUILTIN_NAMES: [&str; 5] = [
    "svt",
    "numeric_sparse",
    "sort",
    "svt_two_phase",
    "numeric_sparse_mod",
];

fn state(id: &str, kind: StateKind, d: (i64, i64), d_aux: (i64, i64)) -> StateDecl {
    StateDecl {
        id: id.to_string(),
        kind,
        params: StateParams {
            d: rational_from_parts(d.0, d.1),
            mu: rational_from_parts(0, 1),
            d_aux: rational_from_parts(d_aux.0, d_aux.1),
            mu_aux: rational_from_parts(0, 1),
        },
    }
}

fn trans(from: &str, guard: Guard, to: &str, output: OutputLabel, assign: bool) -> TransitionDecl {
    TransitionDecl {
        source: from.to_string(),
        guard,
        target: to.to_string(),
        output,
        assign,
    }
}

fn sym(s: &str) -> OutputLabel {
    OutputLabel::FiniteSym(s.to_string())
}

/// Returns one of the five built-in example automata.
///
/// `svt` answers threshold queries with a noisy stored threshold;
/// `numeric_sparse` additionally releases a noisy value on the hit;
/// `sort` re-stores every sample while checking descending order;
/// `svt_two_phase` keeps answering after the first hit; and
/// `numeric_sparse_mod` releases the guard sample itself on the hit.
pub fn builtin(name: &str) -> Result<DipAutomaton, UnknownBuiltin> {
    let raw = match name {
        "svt" => RawAutomaton {
            name: "svt".to_string(),
            init: "q0".to_string(),
            states: vec![
                state("q0", StateKind::NonInput, (1, 2), (0, 1)),
                state("q1", StateKind::Input, (1, 4), (0, 1)),
                state("q2", StateKind::Input, (1, 4), (0, 1)),
            ],
            transitions: vec![
                trans("q0", Guard::True, "q1", sym("bot"), true),
                trans("q1", Guard::Lt, "q1", sym("bot"), false),
                trans("q1", Guard::Ge, "q2", sym("top"), false),
            ],
            alphabet: None,
        },
        "numeric_sparse" => RawAutomaton {
            name: "numeric_sparse".to_string(),
            init: "q0".to_string(),
            states: vec![
                state("q0", StateKind::NonInput, (4, 9), (1, 9)),
                state("q1", StateKind::Input, (2, 9), (1, 9)),
                state("q2", StateKind::Input, (2, 9), (1, 9)),
            ],
            transitions: vec![
                trans("q0", Guard::True, "q1", sym("bot"), true),
                trans("q1", Guard::Lt, "q1", sym("bot"), false),
                trans(
                    "q1",
                    Guard::Ge,
                    "q2",
                    OutputLabel::RealVar(RealVar::SampleAux),
                    false,
                ),
            ],
            alphabet: None,
        },
        "sort" => RawAutomaton {
            name: "sort".to_string(),
            init: "q0".to_string(),
            states: vec![
                state("q0", StateKind::Input, (1, 2), (0, 1)),
                state("q1", StateKind::Input, (1, 4), (0, 1)),
                state("q2", StateKind::Input, (1, 4), (0, 1)),
            ],
            transitions: vec![
                trans("q0", Guard::True, "q1", sym("bot"), true),
                trans("q1", Guard::Lt, "q1", sym("bot"), true),
                trans("q1", Guard::Ge, "q2", sym("top"), false),
            ],
            alphabet: None,
        },
        "svt_two_phase" => RawAutomaton {
            name: "svt_two_phase".to_string(),
            init: "q0".to_string(),
            states: vec![
                state("q0", StateKind::NonInput, (1, 2), (0, 1)),
                state("q1", StateKind::Input, (1, 4), (0, 1)),
                state("q2", StateKind::Input, (1, 4), (0, 1)),
                state("q3", StateKind::Input, (1, 4), (0, 1)),
            ],
            transitions: vec![
                trans("q0", Guard::True, "q1", sym("bot"), true),
                trans("q1", Guard::Lt, "q1", sym("bot"), false),
                trans("q1", Guard::Ge, "q2", sym("top"), false),
                trans("q2", Guard::Ge, "q2", sym("top"), false),
                trans("q2", Guard::Lt, "q3", sym("bot"), false),
            ],
            alphabet: None,
        },
        "numeric_sparse_mod" => RawAutomaton {
            name: "numeric_sparse_mod".to_string(),
            init: "q0".to_string(),
            states: vec![
                state("q0", StateKind::NonInput, (4, 9), (1, 9)),
                state("q1", StateKind::Input, (2, 9), (1, 9)),
                state("q2", StateKind::Input, (2, 9), (1, 9)),
            ],
            transitions: vec![
                trans("q0", Guard::True, "q1", sym("bot"), true),
                trans("q1", Guard::Lt, "q1", sym("bot"), false),
                trans(
                    "q1",
                    Guard::Ge,
                    "q2",
                    OutputLabel::RealVar(RealVar::Sample),
                    false,
                ),
            ],
            alphabet: None,
        },
        other => return Err(UnknownBuiltin(other.to_string())),
    };
    Ok(validate(&raw).expect("builtin automata validate"))
}

// ---------------------------------------------------------------------------
// Document format
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error: {0}")]
    Schema(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocumentDto {
    name: String,
    init: String,
    states: Vec<StateDto>,
    transitions: Vec<TransitionDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alphabet: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateDto {
    id: String,
    kind: KindDto,
    d: String,
    mu: String,
    d_aux: String,
    mu_aux: String,
}

#[derive(Serialize, Deserialize)]
enum KindDto {
    #[serde(rename = "input")]
    Input,
    #[serde(rename = "noninput")]
    NonInput,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionDto {
    from: String,
    guard: GuardDto,
    to: String,
    output: OutputDto,
    assign: bool,
}

#[derive(Serialize, Deserialize)]
enum GuardDto {
    #[serde(rename = "true")]
    True,
    #[serde(rename = "ge")]
    Ge,
    #[serde(rename = "lt")]
    Lt,
}

#[derive(Serialize, Deserialize)]
enum OutputDto {
    #[serde(rename = "sym")]
    Sym(String),
    #[serde(rename = "var")]
    Var(VarDto),
}

#[derive(Serialize, Deserialize)]
enum VarDto {
    #[serde(rename = "sample")]
    Sample,
    #[serde(rename = "sample_aux")]
    SampleAux,
}

/// Parses an automaton document into an unvalidated description.
pub fn parse_document(doc: &str) -> Result<RawAutomaton, ParseError> {
    let value: serde_json::Value = serde_json::from_str(doc).map_err(|e| ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let dto: DocumentDto =
        serde_json::from_value(value).map_err(|e| ParseError::Schema(e.to_string()))?;

    let mut states = Vec::with_capacity(dto.states.len());
    for s in dto.states {
        let field = |name: &str, v: &str| {
            parse_rational(v).map_err(|e| {
                ParseError::Schema(format!("state {:?}, field {name}: {e}", s.id))
            })
        };
        states.push(StateDecl {
            kind: match s.kind {
                KindDto::Input => StateKind::Input,
                KindDto::NonInput => StateKind::NonInput,
            },
            params: StateParams {
                d: field("d", &s.d)?,
                mu: field("mu", &s.mu)?,
                d_aux: field("d_aux", &s.d_aux)?,
                mu_aux: field("mu_aux", &s.mu_aux)?,
            },
            id: s.id,
        });
    }
    let mut transitions = Vec::with_capacity(dto.transitions.len());
    for t in dto.transitions {
        let output = match t.output {
            OutputDto::Sym(s) => {
                if s.is_empty() {
                    return Err(ParseError::Schema(format!(
                        "transition from {:?}: output symbol must be non-empty",
                        t.from
                    )));
                }
                OutputLabel::FiniteSym(s)
            }
            OutputDto::Var(VarDto::Sample) => OutputLabel::RealVar(RealVar::Sample),
            OutputDto::Var(VarDto::SampleAux) => OutputLabel::RealVar(RealVar::SampleAux),
        };
        transitions.push(TransitionDecl {
            source: t.from,
            guard: match t.guard {
                GuardDto::True => Guard::True,
                GuardDto::Ge => Guard::Ge,
                GuardDto::Lt => Guard::Lt,
            },
            target: t.to,
            output,
            assign: t.assign,
        });
    }
    Ok(RawAutomaton {
        name: dto.name,
        init: dto.init,
        states,
        transitions,
        alphabet: dto.alphabet.map(|a| a.into_iter().collect()),
    })
}

/// Canonical byte-deterministic document: states sorted by id, transitions
/// sorted by (source, guard), fixed field order.
pub fn serialize_document(a: &DipAutomaton) -> String {
    let dto = DocumentDto {
        name: a.name.clone(),
        init: a.init_id().to_string(),
        states: a
            .states()
            .iter()
            .map(|s| StateDto {
                id: s.id.clone(),
                kind: match s.kind {
                    StateKind::Input => KindDto::Input,
                    StateKind::NonInput => KindDto::NonInput,
                },
                d: format_rational(&s.params.d),
                mu: format_rational(&s.params.mu),
                d_aux: format_rational(&s.params.d_aux),
                mu_aux: format_rational(&s.params.mu_aux),
            })
            .collect(),
        transitions: a
            .transitions()
            .map(|t| TransitionDto {
                from: a.state(t.source).id.clone(),
                guard: match t.guard {
                    Guard::True => GuardDto::True,
                    Guard::Ge => GuardDto::Ge,
                    Guard::Lt => GuardDto::Lt,
                },
                to: a.state(t.target).id.clone(),
                output: match &t.output {
                    OutputLabel::FiniteSym(s) => OutputDto::Sym(s.clone()),
                    OutputLabel::RealVar(RealVar::Sample) => OutputDto::Var(VarDto::Sample),
                    OutputLabel::RealVar(RealVar::SampleAux) => OutputDto::Var(VarDto::SampleAux),
                },
                assign: t.assign,
            })
            .collect(),
        alphabet: None,
    };
    let mut out = serde_json::to_string_pretty(&dto).expect("document serialization");
    out.push('\n');
    out
}
