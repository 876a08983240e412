use serde_json::{json, Value};
use tori_core::resonance::{audit, FractionMode};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::Output;

/// A dyadic rational (`370723/2^18`) whose stored double passes the audit at
/// `K = 512` and therefore behaves like an irrational aspect on that box.
const RATIONAL_LOOKALIKE: f64 = 370723.0 / 262144.0;

pub fn run(config: &ExperimentConfig, out: &Output) -> Result<Value, CliError> {
    let k = config.audit.k_max;
    let primary = audit(config.audit_omega_sq(), k, config.audit.mode)?;
    let alt = audit(RATIONAL_LOOKALIKE, k, FractionMode::Binary)?;
    let report = json!({
        "omega_sq": primary.omega_sq,
        "mode": primary.mode,
        "a": primary.a.to_string(),
        "b": primary.b.to_string(),
        "k": k,
        "k_sq": primary.k_sq.to_string(),
        "max_ab": primary.max_ab.to_string(),
        "passes": primary.passes,
        "alternate": {
            "omega_sq": alt.omega_sq,
            "a": alt.a.to_string(),
            "b": alt.b.to_string(),
            "passes": alt.passes,
            "note": if alt.passes { "rational but audit-passing" } else { "rational, fails the audit" },
        },
    });
    println!("{}", serde_json::to_string_pretty(&report).expect("json"));
    println!(
        "{}: a = {}, b = {}, K² = {} {} max(a, b) = {}",
        if primary.passes { "PASS" } else { "FAIL" },
        primary.a,
        primary.b,
        primary.k_sq,
        if primary.passes { "<" } else { ">=" },
        primary.max_ab
    );
    out.report("audit.json", &report)?;
    Ok(report)
}
