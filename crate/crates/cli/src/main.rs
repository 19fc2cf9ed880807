#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod campaign;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::Context;
use clap::Parser;
use gibbs_ineq::models::{catalogue, ModelSpec};

use args::{Cli, Command, ModelArgs, ModelName, RunArgs};
use campaign::{run_campaign, CampaignConfig, UsageError, EXPANSION, FIDELITY};
use report::{campaign_json, models_json, write_csv, write_json, Timing};

fn model_spec(m: &ModelArgs) -> ModelSpec {
    match m.model {
        ModelName::SingleSpin => ModelSpec::SingleSpin { delta: m.delta },
        ModelName::IsingChain => ModelSpec::IsingChain {
            n_sites: m.n_sites,
            coupling: m.coupling,
            field: m.field,
        },
        ModelName::Dicke => ModelSpec::Dicke {
            n_max: m.n_max,
            n_spins: m.n_spins,
            omega: m.omega,
            omega0: m.omega0,
            lambda: m.lambda,
        },
        ModelName::Random => ModelSpec::Random { dim: m.dim },
    }
}

fn config_from_flags(m: &ModelArgs, r: &RunArgs) -> CampaignConfig {
    let mut cfg = CampaignConfig::new(vec![model_spec(m)], r.beta.clone());
    cfg.trials = r.trials;
    cfg.seed = r.seed;
    cfg.tol = r.tol;
    cfg
}

fn read_config(path: &PathBuf) -> anyhow::Result<CampaignConfig> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text)
        .map_err(|e| UsageError(format!("config {}: {e}", path.display())).into())
}

fn campaign(command: &str, mut cfg: CampaignConfig, run: &RunArgs) -> anyhow::Result<bool> {
    let plan = cfg.plan()?;
    let out = run
        .out
        .clone()
        .or_else(|| cfg.output_path.clone().map(PathBuf::from));
    let jobs = run.jobs.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .context("starting worker pool")?;

    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let clock = Instant::now();
    let result = pool.install(|| run_campaign(&cfg, &plan))?;
    let timing = run.timing.then(|| Timing {
        started_unix_seconds: started,
        elapsed_seconds: clock.elapsed().as_secs_f64(),
    });

    let json = campaign_json(command, &cfg, &result, run.brief, timing.as_ref())?;
    write_json(&json, out.as_deref())?;
    if let Some(path) = &run.csv {
        write_csv(&result, path)?;
    }

    let pass = result.all_pass();
    let failing: Vec<_> = result.instances.iter().filter(|i| !i.pass).collect();
    eprintln!(
        "{command}: {} instances, {} failing, {}",
        result.instances.len(),
        failing.len(),
        if pass { "PASS" } else { "FAIL" }
    );
    for inst in failing.iter().take(5) {
        eprintln!("failing instance: {}", serde_json::to_string(inst)?);
    }
    Ok(pass)
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Suite(a) => {
            let cfg = match &a.config {
                Some(path) => read_config(path)?,
                None => {
                    let mut cfg = config_from_flags(&a.model, &a.run);
                    if let Some(f) = &a.families {
                        cfg.families = f.clone();
                    }
                    if let Some(o) = &a.orders {
                        cfg.orders = o.clone();
                    }
                    if let Some(k) = &a.holder_k {
                        cfg.ks = k.clone();
                    }
                    if let Some(p) = &a.holder_p {
                        cfg.ps = p.clone();
                    }
                    cfg
                }
            };
            campaign("suite", cfg, &a.run)
        }
        Command::Fidelity(a) => {
            let mut cfg = config_from_flags(&a.model, &a.run);
            cfg.families = vec![FIDELITY.into()];
            cfg.x = a.x;
            campaign("fidelity", cfg, &a.run)
        }
        Command::Expansion(a) => {
            let mut cfg = config_from_flags(&a.model, &a.run);
            cfg.families = vec![EXPANSION.into()];
            cfg.x = a.x;
            cfg.y = a.y;
            campaign("expansion", cfg, &a.run)
        }
        Command::Models(a) => {
            write_json(&models_json(&catalogue()), a.out.as_deref())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
