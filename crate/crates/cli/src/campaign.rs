use std::collections::BTreeMap;
use std::fmt;

use gibbs_ineq::fidelity::{
    chi_f_spectral, default_expansion_step, expansion_check, fidelity_report, ExpansionCheck,
};
use gibbs_ineq::inequalities::{
    run_suite, FamilyAggregate, InequalityKind, InstanceTag, ParamGrid, SuiteInstance, DEFAULT_TOL,
};
use gibbs_ineq::models::ModelSpec;
use gibbs_ineq::{FidelityReportF64, InequalityReportF64, ModelPairF64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const FIDELITY: &str = "fidelity";
pub const EXPANSION: &str = "expansion";

/// Relative agreement required between the two spectral forms of χ_F.
pub const FORM_RTOL: f64 = 1e-9;
/// Relative agreement required between finite-difference and spectral χ_F.
pub const FD_RTOL: f64 = 1e-4;
/// Absolute bound on `Tr X` and on the solved-vs-closed-form defect of `X`.
pub const TRACE_X_TOL: f64 = 1e-12;
/// Relative agreement required between `Tr Y` and `−2y²χ_F`.
pub const TRACE_Y_RTOL: f64 = 1e-9;
/// Smallest accepted convergence order of the expansion residual.
pub const MIN_RESIDUAL_ORDER: f64 = 2.8;

/// Bad flags or config values; reported with exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn default_trials() -> u64 {
    1
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_families() -> Vec<String> {
    InequalityKind::ALL
        .iter()
        .map(|k| k.name().to_string())
        .collect()
}

fn default_orders() -> Vec<usize> {
    ParamGrid::default().orders
}

fn default_ks() -> Vec<usize> {
    ParamGrid::default().ks
}

fn default_ps() -> Vec<f64> {
    ParamGrid::default().ps
}

/// Everything a campaign run depends on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub models: Vec<ModelSpec>,
    pub betas: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_families")]
    pub families: Vec<String>,
    #[serde(default = "default_orders")]
    pub orders: Vec<usize>,
    #[serde(default = "default_ks")]
    pub ks: Vec<usize>,
    #[serde(default = "default_ps")]
    pub ps: Vec<f64>,
    /// Perturbation strength for the fidelity and expansion checks.
    #[serde(default)]
    pub x: f64,
    /// Expansion half-separation; default scales with `1/(β‖S‖)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    /// Not echoed, so reports written to different paths stay identical.
    #[serde(default, skip_serializing)]
    pub output_path: Option<String>,
}

impl CampaignConfig {
    pub fn new(models: Vec<ModelSpec>, betas: Vec<f64>) -> Self {
        Self {
            models,
            betas,
            trials: default_trials(),
            seed: 0,
            tol: default_tol(),
            families: default_families(),
            orders: default_orders(),
            ks: default_ks(),
            ps: default_ps(),
            x: 0.0,
            y: None,
            output_path: None,
        }
    }

    /// Checks every field and canonicalizes family names.
    pub fn plan(&mut self) -> anyhow::Result<Plan> {
        if self.models.is_empty() {
            return Err(usage("at least one model is required"));
        }
        if self.betas.is_empty() {
            return Err(usage("at least one beta is required"));
        }
        if let Some(b) = self.betas.iter().find(|b| !(**b > 0.0) || !b.is_finite()) {
            return Err(usage(format!("beta must be positive and finite, got {b}")));
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(usage(format!("tol must be positive, got {}", self.tol)));
        }
        if self.trials == 0 {
            return Err(usage("trials must be at least 1"));
        }
        if !self.x.is_finite() {
            return Err(usage(format!("x must be finite, got {}", self.x)));
        }
        if let Some(y) = self.y {
            if !(y > 0.0) || !y.is_finite() {
                return Err(usage(format!("y must be positive, got {y}")));
            }
        }
        if self.families.is_empty() {
            return Err(usage("at least one family is required"));
        }
        let mut kinds = Vec::new();
        let (mut fidelity, mut expansion) = (false, false);
        for name in &mut self.families {
            let lower = name.to_ascii_lowercase();
            if lower == FIDELITY {
                fidelity = true;
            } else if lower == EXPANSION {
                expansion = true;
            } else if let Some(k) = InequalityKind::parse(&lower) {
                if !kinds.contains(&k) {
                    kinds.push(k);
                }
                *name = k.name().to_string();
                continue;
            } else {
                return Err(usage(format!("unknown family `{name}`")));
            }
            *name = lower;
        }
        let grid = ParamGrid {
            families: kinds,
            orders: self.orders.clone(),
            ks: self.ks.clone(),
            ps: self.ps.clone(),
        };
        grid.validate().map_err(|e| usage(e.to_string()))?;
        for spec in &self.models {
            spec.build::<f64>(self.seed, 0)
                .map_err(|e| usage(format!("model {}: {e}", spec.kind())))?;
        }
        Ok(Plan {
            grid,
            fidelity,
            expansion,
        })
    }
}

/// Validated view of a config.
#[derive(Clone, Debug)]
pub struct Plan {
    pub grid: ParamGrid,
    pub fidelity: bool,
    pub expansion: bool,
}

struct Instance {
    tag: InstanceTag,
    model_index: usize,
    pair: ModelPairF64,
}

/// One named pass/fail check with its slack (negative means violated).
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub family: &'static str,
    pub slack: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceOutcome {
    #[serde(flatten)]
    pub tag: InstanceTag,
    pub model_index: usize,
    pub dim: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub inequalities: Vec<InequalityReportF64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<FidelityReportF64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expansion: Option<ExpansionCheck<f64>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
    pub pass: bool,
    #[serde(skip)]
    pub checks: Vec<Check>,
}

impl InstanceOutcome {
    /// The check with the smallest slack.
    pub fn worst(&self) -> Option<&Check> {
        self.checks
            .iter()
            .min_by(|a, b| a.slack.total_cmp(&b.slack))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignResult {
    pub families: BTreeMap<String, FamilyAggregate>,
    pub instances: Vec<InstanceOutcome>,
}

impl CampaignResult {
    pub fn all_pass(&self) -> bool {
        self.instances.iter().all(|i| i.pass)
            && self.families.values().all(FamilyAggregate::all_pass)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

fn tolerance_check(family: &'static str, discrepancy: f64, tol: f64) -> Check {
    Check {
        family,
        slack: tol - discrepancy,
        pass: discrepancy <= tol,
    }
}

fn fidelity_checks(r: &FidelityReportF64, tol: f64) -> Vec<Check> {
    let chi = r.chi();
    let mut out = vec![tolerance_check(
        "fidelity_forms",
        r.route_discrepancy(),
        FORM_RTOL,
    )];
    let fd = [r.chi_fd_one_sided, r.chi_fd_two_sided]
        .into_iter()
        .flatten()
        .map(|v| rel(v, chi))
        .fold(0.0, f64::max);
    out.push(tolerance_check("fidelity_fd", fd, FD_RTOL));
    if let (Some(lo), Some(hi)) = (r.bound_lower, r.bound_upper) {
        let scale = 1f64.max(lo.abs()).max(hi.abs()).max(chi.abs());
        let slack = (chi - lo).min(hi - chi) / scale;
        out.push(Check {
            family: "fidelity_bounds",
            slack,
            pass: slack >= -tol,
        });
    }
    out
}

fn expansion_checks(e: &ExpansionCheck<f64>, chi: f64) -> Vec<Check> {
    let order = match e.residual_order {
        Some(p) => Check {
            family: "expansion_order",
            slack: p - MIN_RESIDUAL_ORDER,
            pass: p >= MIN_RESIDUAL_ORDER,
        },
        // both residuals at the rounding floor: the order cannot be measured
        None => Check {
            family: "expansion_order",
            slack: f64::NEG_INFINITY,
            pass: false,
        },
    };
    vec![
        tolerance_check(
            "expansion_trace_x",
            e.trace_x.abs().max(e.x_closed_form_defect),
            TRACE_X_TOL,
        ),
        tolerance_check(
            "expansion_trace_y",
            rel(e.trace_y, -2.0 * e.y * e.y * chi),
            TRACE_Y_RTOL,
        ),
        order,
    ]
}

fn evaluate_fidelity(
    inst: &Instance,
    cfg: &CampaignConfig,
) -> gibbs_ineq::Result<(FidelityReportF64, Vec<Check>)> {
    let r = fidelity_report(&inst.pair.t, &inst.pair.s, inst.tag.beta, cfg.x)?;
    let checks = fidelity_checks(&r, cfg.tol);
    Ok((r, checks))
}

fn evaluate_expansion(
    inst: &Instance,
    cfg: &CampaignConfig,
) -> gibbs_ineq::Result<(ExpansionCheck<f64>, Vec<Check>)> {
    let (t, s, beta) = (&inst.pair.t, &inst.pair.s, inst.tag.beta);
    let y = match cfg.y {
        Some(y) => y,
        None => default_expansion_step(s, beta)?,
    };
    let e = expansion_check(t, s, beta, cfg.x, y)?;
    let chi = chi_f_spectral(t, s, beta, cfg.x)?.chi();
    let checks = expansion_checks(&e, chi);
    Ok((e, checks))
}

fn build_instances(cfg: &CampaignConfig) -> anyhow::Result<Vec<Instance>> {
    let mut out = Vec::new();
    for (model_index, spec) in cfg.models.iter().enumerate() {
        let trials = if spec.is_random() { cfg.trials } else { 1 };
        for &beta in &cfg.betas {
            for trial in 0..trials {
                let pair = spec.build::<f64>(cfg.seed, trial)?;
                out.push(Instance {
                    tag: InstanceTag {
                        index: out.len(),
                        model: spec.kind().to_string(),
                        seed: cfg.seed,
                        trial,
                        beta,
                    },
                    model_index,
                    pair,
                });
            }
        }
    }
    Ok(out)
}

fn record(families: &mut BTreeMap<String, FamilyAggregate>, check: &Check, tag: &InstanceTag) {
    families
        .entry(check.family.to_string())
        .or_default()
        .record(check.slack, check.pass, tag);
}

/// Runs every planned check on every instance; results are in instance order
/// whatever the thread count.
pub fn run_campaign(cfg: &CampaignConfig, plan: &Plan) -> anyhow::Result<CampaignResult> {
    let instances = build_instances(cfg)?;
    let mut outcomes: Vec<InstanceOutcome> = instances
        .iter()
        .map(|inst| InstanceOutcome {
            tag: inst.tag.clone(),
            model_index: inst.model_index,
            dim: inst.pair.t.dim(),
            inequalities: Vec::new(),
            fidelity: None,
            expansion: None,
            errors: Vec::new(),
            pass: true,
            checks: Vec::new(),
        })
        .collect();

    let mut families = BTreeMap::new();
    if !plan.grid.families.is_empty() {
        let suite: Vec<SuiteInstance<f64>> = instances
            .iter()
            .map(|inst| SuiteInstance {
                tag: inst.tag.clone(),
                hamiltonian: inst.pair.t.clone(),
                observable: inst.pair.s.matrix().clone(),
                beta: inst.tag.beta,
            })
            .collect();
        let report = run_suite(&suite, &plan.grid, cfg.tol)?;
        families = report.families;
        for (out, rec) in outcomes.iter_mut().zip(report.instances) {
            out.checks.extend(rec.reports.iter().map(|r| Check {
                family: r.name.name(),
                slack: r.relative_slack(),
                pass: r.pass,
            }));
            out.inequalities = rec.reports;
            out.errors.extend(rec.error);
        }
    }

    if plan.fidelity {
        let results: Vec<_> = instances
            .par_iter()
            .map(|inst| evaluate_fidelity(inst, cfg))
            .collect();
        for (out, res) in outcomes.iter_mut().zip(results) {
            match res {
                Ok((r, checks)) => {
                    checks
                        .iter()
                        .for_each(|c| record(&mut families, c, &out.tag));
                    out.checks.extend(checks);
                    out.fidelity = Some(r);
                }
                Err(e) => out.errors.push(format!("{FIDELITY}: {e}")),
            }
        }
    }

    if plan.expansion {
        let results: Vec<_> = instances
            .par_iter()
            .map(|inst| evaluate_expansion(inst, cfg))
            .collect();
        for (out, res) in outcomes.iter_mut().zip(results) {
            match res {
                Ok((e, checks)) => {
                    checks
                        .iter()
                        .for_each(|c| record(&mut families, c, &out.tag));
                    out.checks.extend(checks);
                    out.expansion = Some(e);
                }
                Err(e) => out.errors.push(format!("{EXPANSION}: {e}")),
            }
        }
    }

    for out in &mut outcomes {
        out.pass = out.errors.is_empty() && out.checks.iter().all(|c| c.pass);
    }
    Ok(CampaignResult {
        families,
        instances: outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spin() -> CampaignConfig {
        CampaignConfig::new(vec![ModelSpec::SingleSpin { delta: 2.0 }], vec![1.0])
    }

    #[test]
    fn plan_canonicalizes_family_names() {
        let mut cfg = spin();
        cfg.families = vec!["Gen-Harris".into(), "fidelity".into(), "harris".into()];
        let plan = cfg.plan().unwrap();
        assert_eq!(cfg.families, ["gen_harris", "fidelity", "harris"]);
        assert_eq!(
            plan.grid.families,
            [InequalityKind::GenHarris, InequalityKind::Harris]
        );
        assert!(plan.fidelity && !plan.expansion);
    }

    #[test]
    fn plan_rejects_bad_values() {
        type Mutation = Box<dyn Fn(&mut CampaignConfig)>;
        let cases: Vec<Mutation> = vec![
            Box::new(|c| c.models.clear()),
            Box::new(|c| c.betas.clear()),
            Box::new(|c| c.betas = vec![0.0]),
            Box::new(|c| c.tol = -1.0),
            Box::new(|c| c.trials = 0),
            Box::new(|c| c.families = vec!["nope".into()]),
            Box::new(|c| c.ps = vec![1.0]),
            Box::new(|c| c.y = Some(0.0)),
            Box::new(|c| c.models = vec![ModelSpec::Random { dim: 1 }]),
        ];
        for mutate in cases {
            let mut cfg = spin();
            mutate(&mut cfg);
            let err = cfg.plan().unwrap_err();
            assert!(err.is::<UsageError>(), "{err}");
        }
    }

    #[test]
    fn only_random_models_repeat_trials() {
        let mut cfg = CampaignConfig::new(
            vec![
                ModelSpec::SingleSpin { delta: 1.0 },
                ModelSpec::Random { dim: 3 },
            ],
            vec![0.5, 2.0],
        );
        cfg.trials = 3;
        let inst = build_instances(&cfg).unwrap();
        assert_eq!(inst.len(), 2 + 2 * 3);
        assert!(inst.iter().enumerate().all(|(i, x)| x.tag.index == i));
    }

    #[test]
    fn single_spin_campaign_passes_everything() {
        let mut cfg = spin();
        cfg.families
            .extend([FIDELITY.to_string(), EXPANSION.to_string()]);
        let plan = cfg.plan().unwrap();
        let res = run_campaign(&cfg, &plan).unwrap();
        assert!(res.all_pass(), "{res:?}");
        let harris = &res.instances[0].inequalities[0];
        assert_eq!(harris.name, InequalityKind::Harris);
        assert!((harris.lhs - 0.761594).abs() < 1e-6);
        for f in [
            "fidelity_forms",
            "fidelity_fd",
            "fidelity_bounds",
            "expansion_order",
        ] {
            assert_eq!(res.families[f].count, 1, "{f}");
        }
    }
}
