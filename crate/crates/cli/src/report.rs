use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use serde_json::{json, Value};

use crate::campaign::{CampaignConfig, CampaignResult, InstanceOutcome};

pub const SCHEMA_VERSION: u32 = 1;

/// Wall-clock information; only emitted on request so reports stay reproducible.
#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub started_unix_seconds: u64,
    pub elapsed_seconds: f64,
}

fn tool() -> Value {
    json!({ "name": "gibbs-ineq", "version": env!("CARGO_PKG_VERSION") })
}

/// Campaign report as a JSON value; object keys come out sorted.
pub fn campaign_json(
    command: &str,
    cfg: &CampaignConfig,
    result: &CampaignResult,
    brief: bool,
    timing: Option<&Timing>,
) -> anyhow::Result<Value> {
    let models: Vec<Value> = cfg
        .models
        .iter()
        .map(|m| json!({ "spec": m, "dim": m.dim(), "convention": m.convention() }))
        .collect();
    let failing: Vec<&InstanceOutcome> = result.instances.iter().filter(|i| !i.pass).collect();
    let mut root = json!({
        "schema_version": SCHEMA_VERSION,
        "tool": tool(),
        "command": command,
        "config": cfg,
        "models": models,
        "families": serde_json::to_value(&result.families)?,
        "instance_count": result.instances.len(),
        "failing": failing,
        "pass": result.all_pass(),
    });
    let map = root.as_object_mut().expect("report root is an object");
    if !brief {
        map.insert("instances".into(), serde_json::to_value(&result.instances)?);
    }
    if let Some(t) = timing {
        map.insert("timing".into(), serde_json::to_value(t)?);
    }
    Ok(root)
}

/// Catalogue listing for the `models` subcommand.
pub fn models_json(specs: &[gibbs_ineq::models::ModelSpec]) -> Value {
    let models: Vec<Value> = specs
        .iter()
        .map(|m| json!({ "spec": m, "dim": m.dim(), "convention": m.convention() }))
        .collect();
    json!({ "schema_version": SCHEMA_VERSION, "tool": tool(), "models": models })
}

/// Pretty JSON with a trailing newline to `path`, or stdout when absent.
pub fn write_json(value: &Value, path: Option<&Path>) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    index: usize,
    model: &'a str,
    model_index: usize,
    seed: u64,
    trial: u64,
    beta: f64,
    dim: usize,
    checks: usize,
    passed: usize,
    worst_check: Option<&'a str>,
    worst_slack: Option<f64>,
    chi: Option<f64>,
    bound_lower: Option<f64>,
    bound_upper: Option<f64>,
    residual_order: Option<f64>,
    pass: bool,
    error: Option<String>,
}

/// One row per instance after a header row.
pub fn write_csv(result: &CampaignResult, path: &Path) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = csv::Writer::from_writer(file);
    for inst in &result.instances {
        let worst = inst.worst();
        w.serialize(CsvRow {
            index: inst.tag.index,
            model: &inst.tag.model,
            model_index: inst.model_index,
            seed: inst.tag.seed,
            trial: inst.tag.trial,
            beta: inst.tag.beta,
            dim: inst.dim,
            checks: inst.checks.len(),
            passed: inst.checks.iter().filter(|c| c.pass).count(),
            worst_check: worst.map(|c| c.family),
            worst_slack: worst.map(|c| c.slack),
            chi: inst.fidelity.as_ref().map(|f| f.chi()),
            bound_lower: inst.fidelity.as_ref().and_then(|f| f.bound_lower),
            bound_upper: inst.fidelity.as_ref().and_then(|f| f.bound_upper),
            residual_order: inst.expansion.as_ref().and_then(|e| e.residual_order),
            pass: inst.pass,
            error: (!inst.errors.is_empty()).then(|| inst.errors.join("; ")),
        })?;
    }
    if result.instances.is_empty() {
        w.write_record([
            "index",
            "model",
            "model_index",
            "seed",
            "trial",
            "beta",
            "dim",
            "checks",
            "passed",
            "worst_check",
            "worst_slack",
            "chi",
            "bound_lower",
            "bound_upper",
            "residual_order",
            "pass",
            "error",
        ])?;
    }
    w.flush()
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
