//! Command-line surface: validate and check automata, compute weights,
//! search for counterexample witness pairs, and evaluate or simulate path
//! probabilities, with human or machine-readable reports.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use dipcheck::automaton::{
    builtin, parse_document, serialize_document, validate, DipAutomaton, BUILTIN_NAMES,
};
use dipcheck::graph::{check_well_formed, Verdict};
use dipcheck::path::{check_path, parse_path_document, pathprob_exact, pathprob_mc};
use dipcheck::rational::{format_rational, parse_rational};
use dipcheck::report::{
    envelope, to_pretty, verdict_json, witness_pair_json, SCHEMA_VERSION,
};
use dipcheck::weight::{cost_table, weight, weight_unrestricted};
use dipcheck::witness::{refute_schedule, RefuteOutcome, WitnessError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Structured,
}

#[derive(Parser)]
#[command(
    name = "dipcheck",
    version,
    about = "Differential-privacy checker for DiPA models"
)]
struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate an automaton document.
    Validate { automaton: String },
    /// Decide well-formedness; prints the weight or a violation witness.
    Check { automaton: String },
    /// Exact weight and the per-transition cost table.
    Weight {
        automaton: String,
        /// Also maximize over components unreachable from init.
        #[arg(long)]
        unrestricted: bool,
    },
    /// Search for a counterexample pair beating the budget `e^{d eps}`.
    Witness {
        automaton: String,
        /// Privacy budget multiplier d, as a rational like "2" or "1/2".
        #[arg(long, default_value = "1")]
        d: String,
        /// Fix the repetition count instead of searching powers of two.
        #[arg(long)]
        ell: Option<u32>,
        #[arg(long, default_value_t = 64)]
        ell_max: u32,
        /// Epsilon grid (repeatable); defaults to 1 2 4 8.
        #[arg(long = "eps")]
        eps: Vec<f64>,
        /// Monte Carlo confirmation sample count.
        #[arg(long, default_value_t = 1_000_000)]
        n: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Exact probability of a path document.
    Prob {
        automaton: String,
        path: PathBuf,
        /// Epsilon values (repeatable); defaults to 1.
        #[arg(long = "eps")]
        eps: Vec<f64>,
        /// Starting register value; overrides the document.
        #[arg(long)]
        x0: Option<f64>,
    },
    /// Monte Carlo estimate of a path document's probability.
    Simulate {
        automaton: String,
        path: PathBuf,
        #[arg(long = "eps")]
        eps: Vec<f64>,
        #[arg(long)]
        x0: Option<f64>,
        #[arg(long, default_value_t = 1_000_000)]
        n: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Verdicts and weights of the built-in automata.
    Demo { name: Option<String> },
}

struct Failure {
    code: &'static str,
    message: String,
    details: Value,
}

impl Failure {
    fn new(code: &'static str, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
            details: Value::Null,
        }
    }
}

fn load_automaton(spec: &str) -> Result<DipAutomaton, Failure> {
    if BUILTIN_NAMES.contains(&spec) {
        return Ok(builtin(spec).expect("builtin name checked"));
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| Failure::new("E_IO", format!("cannot read {spec:?}: {e}")))?;
    let raw = parse_document(&text).map_err(|e| {
        let code = match e {
            dipcheck::automaton::ParseError::Syntax { .. } => "E_PARSE",
            dipcheck::automaton::ParseError::Schema(_) => "E_SCHEMA",
        };
        Failure::new(code, e.to_string())
    })?;
    validate(&raw).map_err(|issues| Failure {
        code: "E_VALIDATION",
        message: format!("{} validation issue(s)", issues.len()),
        details: Value::Array(
            issues
                .iter()
                .map(|i| json!({"error": i.to_string()}))
                .collect(),
        ),
    })
}

fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("DIPCHECK_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or(0)
}

fn default_eps(eps: Vec<f64>, fallback: &[f64]) -> Vec<f64> {
    if eps.is_empty() {
        fallback.to_vec()
    } else {
        eps
    }
}

fn emit(format: Format, command: &str, a: Option<&DipAutomaton>, seed: Option<u64>, payload: Value, human: String) {
    match format {
        Format::Structured => print!("{}", to_pretty(&envelope(command, a, seed, payload))),
        Format::Human => println!("{human}"),
    }
}

fn emit_failure(format: Format, command: &str, f: &Failure) {
    match format {
        Format::Structured => {
            let payload = json!({
                "error": {"code": f.code, "message": f.message, "details": f.details},
            });
            print!("{}", to_pretty(&envelope(command, None, None, payload)));
        }
        Format::Human => {
            eprintln!("error[{}]: {}", f.code, f.message);
            if let Value::Array(items) = &f.details {
                for item in items {
                    if let Some(msg) = item.get("error").and_then(Value::as_str) {
                        eprintln!("  - {msg}");
                    }
                }
            }
        }
    }
}

fn edge_line(a: &DipAutomaton, e: &dipcheck::graph::EdgeRef) -> String {
    let t = a.transition(e.source, e.guard).expect("edge exists");
    format!(
        "{} --{}--> {}",
        a.state(e.source).id,
        e.guard.as_str(),
        a.state(t.target).id
    )
}

fn edge_seq(a: &DipAutomaton, seq: &[dipcheck::graph::EdgeRef]) -> String {
    if seq.is_empty() {
        return "(empty)".to_string();
    }
    let mut out = a.state(seq[0].source).id.clone();
    for e in seq {
        let t = a.transition(e.source, e.guard).expect("edge exists");
        out.push_str(&format!(" --{}--> {}", e.guard.as_str(), a.state(t.target).id));
    }
    out
}

fn human_verdict(a: &DipAutomaton, v: &Verdict) -> String {
    use dipcheck::graph::ViolationWitness;
    match v {
        Verdict::WellFormed { weight } => format!(
            "{}: well-formed; weight = {} (the mechanism is {}*eps differentially private for all eps > 0)",
            a.name(),
            format_rational(weight),
            format_rational(weight),
        ),
        Verdict::NotWellFormed { witness } => {
            let mut lines = vec![format!(
                "{}: violation found: {}",
                a.name(),
                witness.kind().as_str()
            )];
            match witness {
                ViolationWitness::LeakingCycle {
                    prefix,
                    cycle,
                    assign_pos,
                    guard_pos,
                } => {
                    lines.push(format!("  prefix: {}", edge_seq(a, prefix)));
                    lines.push(format!(
                        "  cycle:  {} (assignment at step {}, guard at step {})",
                        edge_seq(a, cycle),
                        assign_pos,
                        guard_pos
                    ));
                }
                ViolationWitness::LeakingPair {
                    prefix,
                    cycle_a,
                    connector,
                    cycle_b,
                } => {
                    lines.push(format!("  prefix:    {}", edge_seq(a, prefix)));
                    lines.push(format!("  cycle:     {}", edge_seq(a, cycle_a)));
                    lines.push(format!("  connector: {}", edge_seq(a, connector)));
                    lines.push(format!("  cycle:     {}", edge_seq(a, cycle_b)));
                }
                ViolationWitness::DisclosingCycle {
                    prefix,
                    cycle,
                    disclosing_pos,
                } => {
                    lines.push(format!("  prefix: {}", edge_seq(a, prefix)));
                    lines.push(format!(
                        "  cycle:  {} (real output released at step {})",
                        edge_seq(a, cycle),
                        disclosing_pos
                    ));
                }
                ViolationWitness::PrivacyViolatingPath {
                    clause,
                    ag,
                    prefix,
                    path,
                    cycle,
                } => {
                    lines.push(format!(
                        "  clause {} ({} flavor)",
                        clause.as_str(),
                        if *ag { "ag" } else { "al" }
                    ));
                    lines.push(format!("  prefix: {}", edge_seq(a, prefix)));
                    lines.push(format!("  cycle:  {}", edge_seq(a, cycle)));
                    lines.push(format!("  path:   {}", edge_seq(a, path)));
                }
            }
            lines.join("\n")
        }
    }
}

fn run(cli: Cli) -> Result<u8, (String, Failure)> {
    let format = cli.format;
    match cli.command {
        Command::Validate { automaton } => {
            let cmd = "validate";
            match load_automaton(&automaton) {
                Ok(a) => {
                    let payload = json!({
                        "valid": true,
                        "states": a.num_states(),
                        "transitions": a.transitions().count(),
                    });
                    let human = format!(
                        "{}: valid ({} states, {} transitions)",
                        a.name(),
                        a.num_states(),
                        a.transitions().count()
                    );
                    emit(format, cmd, Some(&a), None, payload, human);
                    Ok(0)
                }
                Err(f) if f.code == "E_VALIDATION" => {
                    emit_failure(format, cmd, &f);
                    Ok(1)
                }
                Err(f) => Err((cmd.to_string(), f)),
            }
        }
        Command::Check { automaton } => {
            let cmd = "check";
            let a = load_automaton(&automaton).map_err(|f| (cmd.to_string(), f))?;
            let verdict = check_well_formed(&a);
            let code = match verdict {
                Verdict::WellFormed { .. } => 0,
                Verdict::NotWellFormed { .. } => 1,
            };
            let payload = verdict_json(&a, &verdict);
            let human = human_verdict(&a, &verdict);
            emit(format, cmd, Some(&a), None, payload, human);
            Ok(code)
        }
        Command::Weight {
            automaton,
            unrestricted,
        } => {
            let cmd = "weight";
            let a = load_automaton(&automaton).map_err(|f| (cmd.to_string(), f))?;
            let w = weight(&a);
            let table = cost_table(&a);
            let mut costs = Vec::new();
            let mut human = vec![format!("{}: weight = {}", a.name(), format_rational(&w))];
            for (e, critical, c) in &table {
                let t = a.transition(e.source, e.guard).expect("edge exists");
                costs.push(json!({
                    "from": a.state(e.source).id,
                    "guard": e.guard.as_str(),
                    "to": a.state(t.target).id,
                    "critical": critical,
                    "cost": format_rational(c),
                }));
                human.push(format!(
                    "  {}  {}  cost {}",
                    edge_line(&a, e),
                    if *critical { "critical" } else { "on-cycle" },
                    format_rational(c)
                ));
            }
            let mut payload = json!({
                "weight": format_rational(&w),
                "costs": costs,
            });
            if unrestricted {
                let wu = weight_unrestricted(&a);
                payload["weight_unrestricted"] = json!(format_rational(&wu));
                human.push(format!("  unrestricted = {}", format_rational(&wu)));
            }
            emit(format, cmd, Some(&a), None, payload, human.join("\n"));
            Ok(0)
        }
        Command::Witness {
            automaton,
            d,
            ell,
            ell_max,
            eps,
            n,
            seed,
        } => {
            let cmd = "witness";
            let a = load_automaton(&automaton).map_err(|f| (cmd.to_string(), f))?;
            let d = parse_rational(&d)
                .map_err(|e| (cmd.to_string(), Failure::new("E_SCHEMA", format!("--d: {e}"))))?;
            let eps = default_eps(eps, &[1.0, 2.0, 4.0, 8.0]);
            let seed = resolve_seed(seed);
            let schedule: Vec<u32> = match ell {
                Some(l) => vec![l],
                None => {
                    let mut e = Vec::new();
                    let mut l = 1u32;
                    while l <= ell_max {
                        e.push(l);
                        l = l.saturating_mul(2);
                    }
                    e
                }
            };
            let d_f = dipcheck::rational::rational_to_f64(&d);
            match refute_schedule(&a, &d, &eps, &schedule, n, seed) {
                Ok(RefuteOutcome::Refuted(r)) => {
                    let payload = json!({
                        "status": "refuted",
                        "d": format_rational(&d),
                        "ell": r.ell,
                        "eps": r.eps,
                        "exact_ratio": r.exact_ratio,
                        "threshold": r.threshold,
                        "mc1": r.mc1,
                        "mc2": r.mc2,
                        "mc_reliable": r.mc_reliable,
                        "pair": witness_pair_json(&a, &r.pair, d_f),
                    });
                    let human = format!(
                        "{}: refuted d={} at ell={}, eps={}: exact ratio {:.6e} > threshold {:.6e}\n  mc: {:.3e} (se {:.1e}) vs {:.3e} (se {:.1e}), seed {}",
                        a.name(),
                        format_rational(&d),
                        r.ell,
                        r.eps,
                        r.exact_ratio,
                        r.threshold,
                        r.mc1.estimate,
                        r.mc1.std_error,
                        r.mc2.estimate,
                        r.mc2.std_error,
                        seed,
                    );
                    emit(format, cmd, Some(&a), Some(seed), payload, human);
                    Ok(1)
                }
                Ok(RefuteOutcome::Inconclusive {
                    best_ratio,
                    at_ell,
                    at_eps,
                }) => {
                    let payload = json!({
                        "status": "inconclusive",
                        "d": format_rational(&d),
                        "best_ratio": best_ratio,
                        "at_ell": at_ell,
                        "at_eps": at_eps,
                    });
                    let human = format!(
                        "{}: inconclusive for d={}; best ratio {:.6e} at ell={}, eps={}",
                        a.name(),
                        format_rational(&d),
                        best_ratio,
                        at_ell,
                        at_eps
                    );
                    emit(format, cmd, Some(&a), Some(seed), payload, human);
                    Ok(0)
                }
                Err(WitnessError::AutomatonIsWellFormed) => {
                    let payload = json!({
                        "status": "well_formed",
                        "d": format_rational(&d),
                    });
                    let human = format!(
                        "{}: well-formed; no counterexample witness exists",
                        a.name()
                    );
                    emit(format, cmd, Some(&a), Some(seed), payload, human);
                    Ok(0)
                }
                Err(e) => Err((cmd.to_string(), Failure::new("E_EVAL", e.to_string()))),
            }
        }
        Command::Prob {
            automaton,
            path,
            eps,
            x0,
        } => {
            let cmd = "prob";
            let (a, doc) =
                load_path(&automaton, &path).map_err(|f| (cmd.to_string(), f))?;
            let p = check_path(&a, &doc.steps)
                .map_err(|e| (cmd.to_string(), Failure::new("E_PATH", e.to_string())))?;
            let x0 = x0.unwrap_or(doc.x0);
            let eps = default_eps(eps, &[1.0]);
            let mut rows = Vec::new();
            let mut human = vec![format!("{}: path of length {}, x0 = {}", a.name(), p.len(), x0)];
            for &e in &eps {
                let v = pathprob_exact(&a, e, x0, &p)
                    .map_err(|err| (cmd.to_string(), Failure::new("E_EVAL", err.to_string())))?;
                rows.push(json!({"eps": e, "value": v}));
                human.push(format!("  eps={e}: p = {v:.12}"));
            }
            emit(
                format,
                cmd,
                Some(&a),
                None,
                json!({"x0": x0, "length": p.len(), "results": rows}),
                human.join("\n"),
            );
            Ok(0)
        }
        Command::Simulate {
            automaton,
            path,
            eps,
            x0,
            n,
            seed,
        } => {
            let cmd = "simulate";
            let (a, doc) =
                load_path(&automaton, &path).map_err(|f| (cmd.to_string(), f))?;
            let p = check_path(&a, &doc.steps)
                .map_err(|e| (cmd.to_string(), Failure::new("E_PATH", e.to_string())))?;
            let x0 = x0.unwrap_or(doc.x0);
            let eps = default_eps(eps, &[1.0]);
            let seed = resolve_seed(seed);
            let mut rows = Vec::new();
            let mut human = vec![format!(
                "{}: path of length {}, x0 = {}, n = {}, seed = {}",
                a.name(),
                p.len(),
                x0,
                n,
                seed
            )];
            for &e in &eps {
                let m = pathprob_mc(&a, e, x0, &p, n, seed)
                    .map_err(|err| (cmd.to_string(), Failure::new("E_EVAL", err.to_string())))?;
                rows.push(json!({
                    "eps": e,
                    "estimate": m.estimate,
                    "std_error": m.std_error,
                    "samples": m.samples,
                }));
                human.push(format!(
                    "  eps={e}: p ~= {:.6} (se {:.2e})",
                    m.estimate, m.std_error
                ));
            }
            emit(
                format,
                cmd,
                Some(&a),
                Some(seed),
                json!({"x0": x0, "length": p.len(), "results": rows}),
                human.join("\n"),
            );
            Ok(0)
        }
        Command::Demo { name } => {
            let cmd = "demo";
            let names: Vec<&str> = match &name {
                Some(n) => {
                    if !BUILTIN_NAMES.contains(&n.as_str()) {
                        return Err((
                            cmd.to_string(),
                            Failure::new("E_SCHEMA", format!("unknown builtin {n:?}")),
                        ));
                    }
                    vec![n.as_str()]
                }
                None => BUILTIN_NAMES.to_vec(),
            };
            let mut entries = Vec::new();
            let mut human = Vec::new();
            for n in &names {
                let a = builtin(n).expect("builtin");
                let verdict = check_well_formed(&a);
                let mut entry = json!({
                    "name": n,
                    "verdict": verdict_json(&a, &verdict),
                });
                if name.is_some() {
                    entry["document"] = serde_json::from_str(&serialize_document(&a))
                        .expect("canonical document is json");
                }
                entries.push(entry);
                human.push(human_verdict(&a, &verdict));
            }
            let payload = json!({"schema_version": SCHEMA_VERSION, "automata": entries});
            emit(format, cmd, None, None, payload, human.join("\n"));
            Ok(0)
        }
    }
}

fn load_path(
    automaton: &str,
    path: &PathBuf,
) -> Result<(DipAutomaton, dipcheck::path::PathDocument), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new("E_IO", format!("cannot read {path:?}: {e}")))?;
    let doc = parse_path_document(&text).map_err(|e| {
        let code = match e {
            dipcheck::automaton::ParseError::Syntax { .. } => "E_PARSE",
            dipcheck::automaton::ParseError::Schema(_) => "E_SCHEMA",
        };
        Failure::new(code, e.to_string())
    })?;
    // The path document may name the automaton; an explicit argument wins.
    let spec = if automaton.is_empty() {
        doc.automaton.clone()
    } else {
        automaton.to_string()
    };
    let a = load_automaton(&spec)?;
    Ok((a, doc))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err((cmd, failure)) => {
            emit_failure(format, &cmd, &failure);
            ExitCode::from(2)
        }
    }
}
