//! Empirical convergence rates of the truncated series: L² decay, the
//! differentiation/projection commutator and Sobolev residuals.

use rug::Float;
use serde::Serialize;

use super::functions::Regularity;
use crate::error::{Error, Result};
use crate::function::{check_order, BallFunction};
use crate::moments::{WeightParam, WeightedInner};
use crate::orthospace::{build_basis, BasisOptions, BasisPair, OrthoBasis};
use crate::polyalg::{monomials_up_to, MultiIndex, Polynomial};
use crate::quadrature::{project_values, BallRule, DEFAULT_MARGIN};
use crate::sobolev::{hnorm_function, residual_table};

/// Top-half ratios may exceed the first top-half ratio by this factor.
pub const BOUNDED_SLACK: f64 = 1.05;
/// Relative slack for the non-increasing test.
pub const MONOTONE_SLACK: f64 = 1e-6;
/// Errors below this multiple of the function's norm are rounding noise.
pub const NOISE_FLOOR: f64 = 1e-13;
/// Fits use at least this many of the largest `N`.
pub const MIN_FIT_POINTS: usize = 4;

const SHARPNESS_NOTE: &str = "upper-bound check only; sharpness of the exponent is not asserted";

/// `e(l, r)`: the decay exponent of the `H^r_α` residual of an `H^l_α` function.
pub fn exponent_table(l: f64, r: f64) -> Result<f64> {
    if !(0.0..=l).contains(&r) {
        return Err(Error::InvalidArgument(format!("need 0 <= r <= l, got l={l} r={r}")));
    }
    Ok(if r <= 1.0 { 1.5 * r - l } else { 2.0 * r - 0.5 - l })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    L2,
    Sobolev,
    Commutator,
}

/// Radial oversampling of rate rules. The `H^l` error integrals of the
/// boundary family at `r = l` are only algebraically resolved by Gauss
/// nodes; doubling the radial count keeps them stable to well under 0.1%.
pub const DEFAULT_RADIAL_REFINEMENT: usize = 2;

/// Shared knobs for rate runs.
#[derive(Clone, Debug)]
pub struct RateOptions {
    pub basis: BasisOptions,
    pub margin: usize,
    /// Regularity assumed for entire functions.
    pub smooth_order: usize,
    /// Radial node multiplier of the rate rule.
    pub radial_refinement: usize,
}

impl Default for RateOptions {
    fn default() -> Self {
        Self {
            basis: BasisOptions::default(),
            margin: DEFAULT_MARGIN,
            smooth_order: 6,
            radial_refinement: DEFAULT_RADIAL_REFINEMENT,
        }
    }
}

impl RateOptions {
    /// Exactness of the rule used for a grid topping out at `n_max`.
    ///
    /// Twice the projection requirement, so the error integrals of
    /// non-polynomial residuals are resolved as well.
    pub fn rule_exactness(&self, n_max: usize) -> usize {
        2 * (2 * n_max + self.margin)
    }

    pub fn rule(&self, w: WeightParam, n_max: usize) -> Result<BallRule> {
        BallRule::build_refined(w, self.rule_exactness(n_max), self.radial_refinement)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RatePoint {
    pub n: usize,
    pub error: f64,
    /// `error · m(N)^{−bound_exponent}`, `m(N)` being `N + 1` or `N`.
    pub ratio: f64,
    /// Extra columns, labelled by `RateReport::column_labels`.
    pub columns: Vec<f64>,
    pub above_floor: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RateReport {
    pub experiment: ExperimentKind,
    pub function: String,
    pub weight: WeightParam,
    pub r: usize,
    pub l: Option<usize>,
    pub bound_exponent: f64,
    pub scale: f64,
    pub column_labels: Vec<String>,
    pub points: Vec<RatePoint>,
    pub fitted_slope: Option<f64>,
    pub fit_residual: Option<f64>,
    pub fit_points: usize,
    pub compliance: bool,
    pub notes: Vec<String>,
}

impl RateReport {
    pub fn id(&self) -> String {
        let kind = match self.experiment {
            ExperimentKind::L2 => "l2".to_string(),
            ExperimentKind::Sobolev => format!("sobolev_r{}", self.r),
            ExperimentKind::Commutator => "commutator".to_string(),
        };
        format!(
            "{kind}_{}_d{}_a{}",
            sanitize(&self.function),
            self.weight.dim(),
            self.weight.alpha()
        )
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["N".to_string(), "error".into(), "bound_exponent".into(), "ratio".into()];
        header.extend(self.column_labels.iter().cloned());
        w.write_record(&header)?;
        for p in &self.points {
            let mut row = vec![
                p.n.to_string(),
                format!("{:e}", p.error),
                self.bound_exponent.to_string(),
                format!("{:e}", p.ratio),
            ];
            row.extend(p.columns.iter().map(|v| format!("{v:e}")));
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn check_grid(n_list: &[usize], min: usize) -> Result<()> {
    if n_list.is_empty() {
        return Err(Error::InvalidArgument("empty N grid".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("N grid must be strictly increasing".into()));
    }
    if n_list[0] < min {
        return Err(Error::InvalidArgument(format!("N grid must start at {min} or above")));
    }
    Ok(())
}

/// `(l used for the bound, l reported)`.
fn effective_order(reg: &Regularity, opts: &RateOptions) -> (f64, Option<usize>) {
    match reg {
        Regularity::Finite { l, .. } => (*l as f64, Some(*l)),
        Regularity::Smooth { .. } => (opts.smooth_order as f64, None),
    }
}

struct Assessment {
    slope: Option<f64>,
    residual: Option<f64>,
    fit_points: usize,
    compliance: bool,
    notes: Vec<String>,
}

/// Least-squares slope of `log y` against `log x`, with RMS residual.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    if x.len() < 2 {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = lx.iter().zip(&ly).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
    Some((slope, (rss / n).sqrt()))
}

fn assess(points: &[RatePoint], m: impl Fn(usize) -> f64, bound: f64, smooth: bool, monotone: bool) -> Assessment {
    let mut notes = Vec::new();
    let live: Vec<&RatePoint> = points.iter().filter(|p| p.above_floor).collect();
    let take = MIN_FIT_POINTS.max(points.len() / 2).min(live.len());
    let fit_set = &live[live.len() - take..];
    let fit = loglog_fit(
        &fit_set.iter().map(|p| m(p.n)).collect::<Vec<_>>(),
        &fit_set.iter().map(|p| p.error).collect::<Vec<_>>(),
    );
    let dropped = points.len() - live.len();
    if dropped > 0 {
        notes.push(format!(
            "{dropped} point(s) at the rounding floor excluded from the fit and ratio test"
        ));
    }

    let compliance = if smooth {
        match fit {
            Some((slope, _)) => {
                let ok = slope < bound;
                notes.push(format!(
                    "entire function: fitted slope {slope:.3} must be below {bound}"
                ));
                ok
            }
            // everything converged to the floor already
            None => live.len() <= 1,
        }
    } else {
        let top: Vec<&RatePoint> = points[points.len() / 2..].iter().filter(|p| p.above_floor).collect();
        match top.first() {
            None => true,
            Some(first) => {
                let cap = first.ratio * BOUNDED_SLACK;
                let bounded = top.iter().all(|p| p.ratio.is_finite() && p.ratio <= cap);
                let nonincreasing = !monotone
                    || top
                        .windows(2)
                        .all(|w| w[1].ratio <= w[0].ratio * (1.0 + MONOTONE_SLACK));
                if !bounded {
                    notes.push("ratio grows over the top half of the grid".into());
                }
                if !nonincreasing {
                    notes.push("ratio not non-increasing over the top half of the grid".into());
                }
                bounded && nonincreasing
            }
        }
    };
    Assessment {
        slope: fit.map(|f| f.0),
        residual: fit.map(|f| f.1),
        fit_points: if fit.is_some() { take } else { 0 },
        compliance,
        notes,
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    experiment: ExperimentKind,
    f: &dyn BallFunction,
    w: WeightParam,
    r: usize,
    l: Option<usize>,
    bound: f64,
    scale: f64,
    column_labels: Vec<String>,
    raw: Vec<(usize, f64, Vec<f64>)>,
    m: impl Fn(usize) -> f64,
    monotone: bool,
) -> RateReport {
    let floor = NOISE_FLOOR * scale;
    let points: Vec<RatePoint> = raw
        .into_iter()
        .map(|(n, error, columns)| RatePoint {
            n,
            error,
            ratio: error * m(n).powf(-bound),
            columns,
            above_floor: error > floor,
        })
        .collect();
    let a = assess(&points, &m, bound, l.is_none(), monotone);
    let mut notes = vec![SHARPNESS_NOTE.to_string()];
    notes.extend(a.notes);
    RateReport {
        experiment,
        function: f.name(),
        weight: w,
        r,
        l,
        bound_exponent: bound,
        scale,
        column_labels,
        points,
        fitted_slope: a.slope,
        fit_residual: a.residual,
        fit_points: a.fit_points,
        compliance: a.compliance,
        notes,
    }
}

fn check_rule(w: WeightParam, rule: &BallRule) -> Result<()> {
    if rule.weight() != w {
        return Err(Error::WeightMismatch(format!(
            "rule is for {}, run is for {w}",
            rule.weight()
        )));
    }
    Ok(())
}

/// `‖f − S^α_N f‖_α` over the grid; bound `(N + 1)^{−l}`.
pub fn run_l2_rate(
    f: &dyn BallFunction,
    reg: &Regularity,
    w: WeightParam,
    n_list: &[usize],
    rule: &BallRule,
    opts: &RateOptions,
) -> Result<RateReport> {
    Ok(residual_rates(f, reg, w, n_list, 0, 0, rule, opts)?.remove(0))
}

/// `‖f − S^α_N f‖_{H^r_α}` over the grid; bound `N^{e(l, r)}`.
pub fn run_sobolev_rate(
    f: &dyn BallFunction,
    reg: &Regularity,
    w: WeightParam,
    n_list: &[usize],
    r: usize,
    rule: &BallRule,
    opts: &RateOptions,
) -> Result<RateReport> {
    if r == 0 {
        return Err(Error::InvalidArgument(
            "Sobolev rate needs r >= 1; use the L2 run for r = 0".into(),
        ));
    }
    Ok(residual_rates(f, reg, w, n_list, r, r, rule, opts)?.remove(0))
}

/// The L² run and the Sobolev runs for `r = 1..=r_max` from one residual
/// table. Sobolev reports drop `N = 0`.
pub fn run_residual_rates(
    f: &dyn BallFunction,
    reg: &Regularity,
    w: WeightParam,
    n_list: &[usize],
    r_max: usize,
    rule: &BallRule,
    opts: &RateOptions,
) -> Result<Vec<RateReport>> {
    residual_rates(f, reg, w, n_list, 0, r_max, rule, opts)
}

#[allow(clippy::too_many_arguments)]
fn residual_rates(
    f: &dyn BallFunction,
    reg: &Regularity,
    w: WeightParam,
    n_list: &[usize],
    r_min: usize,
    r_max: usize,
    rule: &BallRule,
    opts: &RateOptions,
) -> Result<Vec<RateReport>> {
    check_rule(w, rule)?;
    check_order(f, r_max)?;
    check_grid(n_list, if r_min == 0 { 0 } else { 1 })?;
    let (l, l_tag) = effective_order(reg, opts);
    let bounds = (r_min..=r_max)
        .map(|r| exponent_table(l, r as f64))
        .collect::<Result<Vec<f64>>>()?;
    let top = *n_list.last().expect("non-empty grid");
    let basis = build_basis(w, top, &opts.basis)?;
    let table = residual_table(&basis, f, rule, n_list, r_max, opts.margin)?;
    let norms = hnorm_function(w, f, r_max, rule)?;

    let mut reports = Vec::new();
    for (r, bound) in (r_min..=r_max).zip(bounds) {
        let raw = n_list
            .iter()
            .enumerate()
            .filter(|&(_, &n)| r == 0 || n >= 1)
            .map(|(i, &n)| {
                let cols: Vec<f64> = (0..=r).map(|k| table.norm(i, k)).collect();
                (n, cols[r], cols)
            })
            .collect();
        let labels = (0..=r).map(|k| format!("H{k}_norm")).collect();
        let scale = norms.norm_up_to(r);
        let mut report = if r == 0 {
            finish(
                ExperimentKind::L2,
                f,
                w,
                r,
                l_tag,
                bound,
                scale,
                labels,
                raw,
                |n| (n + 1) as f64,
                true,
            )
        } else {
            finish(
                ExperimentKind::Sobolev,
                f,
                w,
                r,
                l_tag,
                bound,
                scale,
                labels,
                raw,
                |n| n as f64,
                false,
            )
        };
        if l_tag == Some(r) {
            report
                .notes
                .push("r = l: the bound exponent is positive and the residual need not converge in this norm".into());
        }
        reports.push(report);
    }
    Ok(reports)
}

/// `(Σ_j ‖∂_j S^α_N f − S^α_N ∂_j f‖²_α)^{1/2}` over the grid, through the
/// cross-weight formula; bound `(N + 1)^{3/2 − l}`.
pub fn run_commutator_rate(
    f: &dyn BallFunction,
    reg: &Regularity,
    w: WeightParam,
    n_list: &[usize],
    rule: &BallRule,
    opts: &RateOptions,
) -> Result<RateReport> {
    check_rule(w, rule)?;
    check_order(f, 1)?;
    check_grid(n_list, 0)?;
    let (l, l_tag) = effective_order(reg, opts);
    let bound = 1.5 - l;
    let top = *n_list.last().expect("non-empty grid");
    let lower = build_basis(w, top + 1, &opts.basis)?;
    let upper = build_basis(w.shifted(), top + 1, &opts.basis)?;
    let pair = BasisPair::new(&lower, &upper)?;
    let d = w.dim();

    let rows: Vec<Vec<f64>> = rule
        .nodes()
        .collect::<Vec<_>>()
        .iter()
        .map(|x| f.derivatives(x, 1))
        .collect::<Result<_>>()?;
    // the first-order monomials in derivative order map to axes
    let first_order: Vec<MultiIndex> = monomials_up_to(d, 1).into_iter().skip(1).collect();
    let mut per_axis = vec![Vec::new(); d];
    let mut scale_sq = 0.0;
    for (col, m) in first_order.iter().enumerate() {
        let axis = (0..d).find(|&a| m.get(a) == 1).expect("unit index");
        let vals: Vec<f64> = rows.iter().map(|row| row[col + 1]).collect();
        scale_sq += rule.integrate_values(&vals.iter().map(|v| v * v).collect::<Vec<_>>());
        let expansion = project_values(&lower, &vals, rule, opts.margin)?;
        let g_blocks = expansion_blocks(&lower, expansion.blocks());
        per_axis[axis] = n_list
            .iter()
            .map(|&n| commutator_norm(&pair, &g_blocks, n))
            .collect::<Result<Vec<f64>>>()?;
    }
    let raw = n_list
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let cols: Vec<f64> = per_axis.iter().map(|v| v[i]).collect();
            (n, cols.iter().map(|c| c * c).sum::<f64>().sqrt(), cols)
        })
        .collect();
    let labels = (1..=d).map(|j| format!("axis{j}")).collect();
    Ok(finish(
        ExperimentKind::Commutator,
        f,
        w,
        1,
        l_tag,
        bound,
        scale_sq.sqrt(),
        labels,
        raw,
        |n| (n + 1) as f64,
        false,
    ))
}

/// Block polynomials `proj^α_k g` of a projected function.
fn expansion_blocks(b: &OrthoBasis, blocks: &[Vec<Float>]) -> Vec<Polynomial> {
    (0..blocks.len())
        .map(|k| {
            let mut coeffs: Vec<Vec<Float>> = (0..k)
                .map(|j| vec![Float::new(b.precision()); b.block_len(j)])
                .collect();
            coeffs.push(blocks[k].clone());
            b.synthesize(&coeffs).expect("blocks match the basis")
        })
        .collect()
}

/// `‖proj^{α+1}_{n−1} proj^α_{n+1} g − proj^{α+1}_n proj^α_n g‖_α` with
/// `g = ∂_j f` given through its block polynomials.
fn commutator_norm(pair: &BasisPair<'_>, g_blocks: &[Polynomial], n: usize) -> Result<f64> {
    let upper = pair.upper();
    let first = upper.project_component(&g_blocks[n + 1], n as i64 - 1)?;
    let second = upper.project_component(&g_blocks[n], n as i64)?;
    Ok(pair.lower().space().norm(&(&first - &second))?.to_f64())
}
