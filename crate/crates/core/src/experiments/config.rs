//! JSON experiment configuration and the batch runner.

use std::path::Path;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::functions::{validate_regularity, Family, IntegrabilityReport, Regularity, TestFunction};
use super::rates::{run_commutator_rate, run_residual_rates, RateOptions, RateReport};
use crate::error::{Error, Result};
use crate::function::BallFunction;
use crate::moments::WeightParam;
use crate::orthospace::{BasisOptions, PrecisionPolicy};
use crate::quadrature::DEFAULT_MARGIN;

/// Default `N` grids, capped by basis conditioning.
pub fn default_grid(d: usize) -> Vec<usize> {
    match d {
        1 => vec![8, 12, 16, 24, 32, 40],
        2 => vec![6, 9, 12, 16, 20, 24],
        _ => vec![4, 6, 8, 10, 12, 14],
    }
}

/// Grid for entire functions, whose errors reach the rounding floor early.
pub fn smooth_grid() -> Vec<usize> {
    vec![2, 4, 6, 8, 10, 12]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Orders {
    /// Regularity assumed for entire functions.
    #[serde(default = "default_l")]
    pub l: usize,
    /// Highest Sobolev residual order.
    #[serde(default = "default_r")]
    pub r: usize,
}

fn default_l() -> usize {
    6
}

fn default_r() -> usize {
    2
}

impl Default for Orders {
    fn default() -> Self {
        Self {
            l: default_l(),
            r: default_r(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FunctionSpec {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default)]
    pub n_grid: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dimension: usize,
    pub alpha_list: Vec<f64>,
    #[serde(default)]
    pub n_grid: Option<Vec<usize>>,
    /// Orthonormality certificate target for every basis.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub precision_policy: PrecisionPolicy,
    pub functions: Vec<FunctionSpec>,
    #[serde(default)]
    pub orders: Orders,
}

fn default_tolerance() -> f64 {
    BasisOptions::default().tolerance
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dimension) {
            return Err(Error::UnsupportedDimension(self.dimension));
        }
        for &a in &self.alpha_list {
            WeightParam::new(self.dimension, a)?;
        }
        if self.functions.is_empty() {
            return Err(Error::InvalidArgument("config lists no functions".into()));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        Ok(())
    }

    pub fn rate_options(&self) -> RateOptions {
        RateOptions {
            basis: BasisOptions {
                tolerance: self.tolerance,
                policy: self.precision_policy,
            },
            margin: DEFAULT_MARGIN,
            smooth_order: self.orders.l,
            ..RateOptions::default()
        }
    }

    fn grid_for(&self, spec: &FunctionSpec) -> Vec<usize> {
        if let Some(g) = &spec.n_grid {
            return g.clone();
        }
        match spec.family {
            Family::Boundary { .. } => self.n_grid.clone().unwrap_or_else(|| default_grid(self.dimension)),
            _ => smooth_grid(),
        }
    }
}

/// Numerical confirmation of a regularity tag.
#[derive(Clone, Debug, Serialize)]
pub struct RegularityCheck {
    pub function: String,
    pub weight: WeightParam,
    pub regularity: Regularity,
    pub at_l: IntegrabilityReport,
    pub above_l: IntegrabilityReport,
    pub confirmed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub reports: Vec<RateReport>,
    pub regularity_checks: Vec<RegularityCheck>,
    pub failures: Vec<String>,
    pub all_compliant: bool,
}

struct RunOutput {
    reports: Vec<RateReport>,
    check: Option<RegularityCheck>,
    failures: Vec<String>,
}

fn run_one(cfg: &ExperimentConfig, alpha: f64, spec: &FunctionSpec) -> RunOutput {
    let mut out = RunOutput {
        reports: Vec::new(),
        check: None,
        failures: Vec::new(),
    };
    let w = match WeightParam::new(cfg.dimension, alpha) {
        Ok(w) => w,
        Err(e) => {
            out.failures.push(e.to_string());
            return out;
        }
    };
    let opts = cfg.rate_options();
    let r_max = cfg.orders.r;
    let result = (|| -> Result<()> {
        // the integrability oracle needs one order above l
        let probe = TestFunction::new(spec.family.clone(), cfg.dimension, 0)?;
        let reg = probe.regularity(alpha)?;
        let order = r_max.max(1).max(reg.finite_order().map_or(0, |l| l + 1));
        let f = TestFunction::new(spec.family.clone(), cfg.dimension, order)?;
        if reg.finite_order().is_some() {
            let (at_l, above_l, confirmed) = validate_regularity(&f, w)?;
            if !confirmed {
                warn!("{} on {w}: regularity tag not confirmed numerically", f.name());
            }
            out.check = Some(RegularityCheck {
                function: f.name(),
                weight: w,
                regularity: reg.clone(),
                at_l,
                above_l,
                confirmed,
            });
        }
        let grid = cfg.grid_for(spec);
        let top = *grid
            .last()
            .ok_or_else(|| Error::InvalidArgument("empty N grid".into()))?;
        let rule = opts.rule(w, top + 1)?;
        info!("{} on {w}: {} nodes", f.name(), rule.len());
        let l_cap = reg.finite_order().unwrap_or(opts.smooth_order);
        let mut residual = run_residual_rates(&f, &reg, w, &grid, r_max.min(l_cap), &rule, &opts)?;
        let sobolev = residual.split_off(1);
        out.reports.extend(residual);
        out.reports.push(run_commutator_rate(&f, &reg, w, &grid, &rule, &opts)?);
        out.reports.extend(sobolev);
        if r_max > l_cap {
            info!("{} on {w}: orders above l = {l_cap} skipped", f.name());
        }
        Ok(())
    })();
    if let Err(e) = result {
        out.failures.push(format!("alpha={alpha} {:?}: {e}", spec.family));
    }
    out
}

/// Every `(α, function)` pair, in parallel, reported in config order.
pub fn run_config(cfg: &ExperimentConfig) -> RunSummary {
    let jobs: Vec<(f64, &FunctionSpec)> = cfg
        .alpha_list
        .iter()
        .flat_map(|&a| cfg.functions.iter().map(move |s| (a, s)))
        .collect();
    let outputs: Vec<RunOutput> = jobs.par_iter().map(|(a, s)| run_one(cfg, *a, s)).collect();
    let mut summary = RunSummary {
        reports: Vec::new(),
        regularity_checks: Vec::new(),
        failures: Vec::new(),
        all_compliant: true,
    };
    for o in outputs {
        summary.reports.extend(o.reports);
        summary.regularity_checks.extend(o.check);
        summary.failures.extend(o.failures);
    }
    summary.all_compliant = summary.failures.is_empty()
        && summary.reports.iter().all(|r| r.compliance)
        && summary.regularity_checks.iter().all(|c| c.confirmed);
    summary
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let cfg = ExperimentConfig::from_json(
            r#"{
                "dimension": 2,
                "alpha_list": [0, 1],
                "n_grid": [4, 6],
                "tolerance": 1e-14,
                "precision_policy": {"min_bits": 96},
                "functions": [
                    {"family": "boundary", "s": 2.5},
                    {"family": "exp", "a": [1, 0.5], "n_grid": [2, 3]},
                    {"family": "cos"}
                ],
                "orders": {"l": 5, "r": 1}
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.precision_policy.min_bits, 96);
        assert_eq!(cfg.precision_policy.max_bits, 4096);
        assert_eq!(cfg.grid_for(&cfg.functions[0]), vec![4, 6]);
        assert_eq!(cfg.grid_for(&cfg.functions[1]), vec![2, 3]);
        assert_eq!(cfg.grid_for(&cfg.functions[2]), smooth_grid());
        assert_eq!(cfg.rate_options().smooth_order, 5);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::from_json(
            r#"{"dimension": 4, "alpha_list": [0], "functions": [{"family": "exp"}]}"#
        )
        .is_err());
        assert!(ExperimentConfig::from_json(
            r#"{"dimension": 1, "alpha_list": [-1], "functions": [{"family": "exp"}]}"#
        )
        .is_err());
        assert!(ExperimentConfig::from_json(r#"{"dimension": 1, "alpha_list": [0], "functions": []}"#).is_err());
        assert!(
            ExperimentConfig::from_json(r#"{"dimension": 1, "alpha_list": [0], "functions": [], "extra": 1}"#).is_err()
        );
    }

    #[test]
    fn small_run_is_ordered_and_complete() {
        let cfg = ExperimentConfig::from_json(
            r#"{"dimension": 1, "alpha_list": [0, 1], "n_grid": [4, 6, 8, 10],
                "functions": [{"family": "boundary", "s": 2.5}, {"family": "sin", "n_grid": [2, 4, 6, 8]}],
                "orders": {"r": 1}}"#,
        )
        .unwrap();
        let s = run_config(&cfg);
        assert!(s.failures.is_empty(), "{:?}", s.failures);
        // per pair: l2, commutator, one Sobolev order
        assert_eq!(s.reports.len(), 2 * 2 * 3);
        assert_eq!(s.reports[0].weight.alpha(), 0.0);
        assert!(s.reports[0].function.starts_with("boundary"));
        assert!(s.reports[3].function.starts_with("sin"));
        assert_eq!(s.regularity_checks.len(), 2);
    }
}
