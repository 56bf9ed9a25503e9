//! Machine-readable report envelope and verdict serialization shared by the
//! command-line surface and the integration tests.

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::automaton::{serialize_document, DipAutomaton};
use crate::graph::{EdgeRef, Verdict, ViolationWitness};
use crate::path::Path;
use crate::rational::format_rational;
use crate::witness::WitnessPair;

pub const SCHEMA_VERSION: &str = "1";

/// Hex SHA-256 of the canonical automaton document.
pub fn automaton_hash(a: &DipAutomaton) -> String {
    let doc = serialize_document(a);
    let mut hasher = Sha256::new();
    hasher.update(doc.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Deterministic report envelope; `seed` is recorded whenever the command
/// was stochastic.
pub fn envelope(command: &str, a: Option<&DipAutomaton>, seed: Option<u64>, payload: Value) -> Value {
    let mut obj = serde_json::Map::new();
    obj.insert("schema_version".to_string(), json!(SCHEMA_VERSION));
    obj.insert(
        "tool".to_string(),
        json!({"name": "dipcheck", "version": env!("CARGO_PKG_VERSION")}),
    );
    obj.insert("command".to_string(), json!(command));
    if let Some(a) = a {
        obj.insert(
            "automaton".to_string(),
            json!({"name": a.name(), "sha256": automaton_hash(a)}),
        );
    }
    if let Some(seed) = seed {
        obj.insert("seed".to_string(), json!(seed));
    }
    obj.insert("result".to_string(), payload);
    Value::Object(obj)
}

pub fn edge_json(a: &DipAutomaton, e: &EdgeRef) -> Value {
    let t = a.transition(e.source, e.guard).expect("edge exists");
    json!([
        a.state(e.source).id,
        e.guard.as_str(),
        a.state(t.target).id
    ])
}

fn edges_json(a: &DipAutomaton, seq: &[EdgeRef]) -> Value {
    Value::Array(seq.iter().map(|e| edge_json(a, e)).collect())
}

pub fn witness_json(a: &DipAutomaton, w: &ViolationWitness) -> Value {
    match w {
        ViolationWitness::LeakingCycle {
            prefix,
            cycle,
            assign_pos,
            guard_pos,
        } => json!({
            "kind": w.kind().as_str(),
            "prefix": edges_json(a, prefix),
            "cycle": edges_json(a, cycle),
            "assign_pos": assign_pos,
            "guard_pos": guard_pos,
        }),
        ViolationWitness::LeakingPair {
            prefix,
            cycle_a,
            connector,
            cycle_b,
        } => json!({
            "kind": w.kind().as_str(),
            "prefix": edges_json(a, prefix),
            "cycles": [edges_json(a, cycle_a), edges_json(a, cycle_b)],
            "path": edges_json(a, connector),
        }),
        ViolationWitness::DisclosingCycle {
            prefix,
            cycle,
            disclosing_pos,
        } => json!({
            "kind": w.kind().as_str(),
            "prefix": edges_json(a, prefix),
            "cycle": edges_json(a, cycle),
            "disclosing_pos": disclosing_pos,
        }),
        ViolationWitness::PrivacyViolatingPath {
            clause,
            ag,
            prefix,
            path,
            cycle,
        } => json!({
            "kind": w.kind().as_str(),
            "clause": clause.as_str(),
            "flavor": if *ag { "ag" } else { "al" },
            "prefix": edges_json(a, prefix),
            "path": edges_json(a, path),
            "cycle": edges_json(a, cycle),
        }),
    }
}

pub fn verdict_json(a: &DipAutomaton, v: &Verdict) -> Value {
    match v {
        Verdict::WellFormed { weight } => json!({
            "status": "well_formed",
            "weight": format_rational(weight),
        }),
        Verdict::NotWellFormed { witness } => json!({
            "status": "violation",
            "witness": witness_json(a, witness),
        }),
    }
}

fn path_json(a: &DipAutomaton, path: &Path, x0: f64) -> Value {
    let doc = crate::path::serialize_path_document(a.name(), x0, path);
    serde_json::from_str(&doc).expect("path document is json")
}

pub fn witness_pair_json(a: &DipAutomaton, pair: &WitnessPair, threshold_rate: f64) -> Value {
    json!({
        "kind": pair.kind.as_str(),
        "ell": pair.ell,
        "rho1": path_json(a, &pair.rho1, 0.0),
        "rho2": path_json(a, &pair.rho2, 0.0),
        "ratio_table": pair
            .report
            .iter()
            .map(|cell| {
                json!({
                    "eps": cell.eps,
                    "ell": pair.ell,
                    "prob1": cell.prob1,
                    "prob2": cell.prob2,
                    "exact_ratio": cell.ratio,
                    "threshold": (threshold_rate * cell.eps).exp(),
                    "predicted": cell.predicted,
                })
            })
            .collect::<Vec<_>>(),
    })
}

pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serialization");
    s.push('\n');
    s
}
