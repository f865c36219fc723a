//! The identity suite over a `(d, α, k)` grid.

use std::collections::HashMap;

use log::{info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::Float;
use serde::Serialize;

use super::{CheckKind, VerifyReport, SCALING_FACTOR};
use crate::error::Result;
use crate::moments::{MomentTable, WeightParam, WeightedInner};
use crate::orthospace::{build_basis, BasisOptions, BasisPair, OrthoBasis};
use crate::polyalg::{monomials_up_to, Polynomial};

#[derive(Clone, Debug, Serialize)]
pub struct SuiteConfig {
    pub dims: Vec<usize>,
    pub alphas: Vec<f64>,
    /// Highest checked degree, indexed by `d − 1`.
    pub k_max: [usize; 3],
    /// Random inputs per `(grid point, k)` for identities with a free argument.
    pub equality_samples: usize,
    /// Random inputs per `(grid point, k)` for the inequalities.
    pub inequality_samples: usize,
    pub seed: u64,
    pub basis: BasisOptions,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            dims: vec![1, 2, 3],
            alphas: vec![-0.5, 0.0, 1.0, 2.5],
            k_max: [10, 10, 8],
            equality_samples: 2,
            inequality_samples: 100,
            seed: 0x5eed,
            basis: BasisOptions::default(),
        }
    }
}

impl SuiteConfig {
    pub fn k_max_for(&self, d: usize) -> usize {
        self.k_max[d - 1]
    }

    /// Basis degree: the identities reach two degrees past `k` and the
    /// free polynomial inputs one further.
    pub fn basis_degree(&self, d: usize) -> usize {
        self.k_max_for(d) + 3
    }

    fn grid(&self) -> Vec<(usize, f64)> {
        self.dims
            .iter()
            .flat_map(|&d| self.alphas.iter().map(move |&a| (d, a)))
            .collect()
    }
}

/// Reports in grid order plus the precision each grid point ran at.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteOutcome {
    pub reports: Vec<VerifyReport>,
    /// `(d, α, lower bits, upper bits)` per grid point.
    pub precisions: Vec<(usize, f64, u32, u32)>,
}

impl SuiteOutcome {
    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

/// Reports of one grid point and the bits its two bases used.
type GridResult = (Vec<VerifyReport>, Option<(u32, u32)>);

pub fn run_identity_suite(cfg: &SuiteConfig) -> SuiteOutcome {
    let results: Vec<GridResult> = cfg
        .grid()
        .par_iter()
        .map(|&(d, a)| grid_point(cfg, d, a, None))
        .collect();
    collect(cfg, results)
}

fn collect(cfg: &SuiteConfig, results: Vec<GridResult>) -> SuiteOutcome {
    let mut out = SuiteOutcome {
        reports: Vec::new(),
        precisions: Vec::new(),
    };
    for ((d, a), (reports, bits)) in cfg.grid().into_iter().zip(results) {
        out.reports.extend(reports);
        if let Some((lo, up)) = bits {
            out.precisions.push((d, a, lo, up));
        }
    }
    out
}

fn grid_point(cfg: &SuiteConfig, d: usize, alpha: f64, bits: Option<(u32, u32)>) -> GridResult {
    let n = cfg.basis_degree(d);
    let built = (|| -> Result<(OrthoBasis, OrthoBasis)> {
        let w = WeightParam::new(d, alpha)?;
        Ok(match bits {
            None => (build_basis(w, n, &cfg.basis)?, build_basis(w.shifted(), n, &cfg.basis)?),
            Some((lo, up)) => (
                OrthoBasis::build_at(w, n, lo)?,
                OrthoBasis::build_at(w.shifted(), n, up)?,
            ),
        })
    })();
    let (lo, up) = match built {
        Ok(b) => b,
        Err(e) => {
            warn!("d={d} alpha={alpha}: basis construction failed: {e}");
            return (
                vec![VerifyReport::failure("basis_build", d, alpha, n as i64, e.to_string())],
                None,
            );
        }
    };
    info!(
        "d={d} alpha={alpha}: bases at {} and {} bits",
        lo.precision(),
        up.precision()
    );
    let point = GridPoint::new(cfg, &lo, &up);
    let reports: Vec<VerifyReport> = (0..=cfg.k_max_for(d))
        .into_par_iter()
        .map(|k| point.degree_checks(k))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    (reports, Some((lo.precision(), up.precision())))
}

fn rel(diff: &Float, scale: &Float) -> f64 {
    if scale.is_zero() {
        diff.to_f64()
    } else {
        Float::with_val(diff.prec(), diff / scale).to_f64()
    }
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

/// Largest coefficient on monomials failing `keep`, relative to the largest coefficient.
fn off_support(p: &Polynomial, keep: impl Fn(u32) -> bool) -> f64 {
    let scale = p.max_abs_coeff();
    if scale == 0.0 {
        return 0.0;
    }
    max_of(
        p.terms()
            .filter(|(m, _)| !keep(m.order()))
            .map(|(_, c)| c.to_f64().abs()),
    ) / scale
}

fn sample_points(rng: &mut ChaCha8Rng, d: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| loop {
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if x.iter().map(|v| v * v).sum::<f64>() < 1.0 {
                break x;
            }
        })
        .collect()
}

/// Independent Gram data: `G c_i` over monomials of degree `≤ k_max`, assembled
/// directly from the moment table rather than the space's stored blocks.
struct IndependentGram {
    /// `gc[i][m] = ⟨e_i, x^m⟩_α`.
    gc: Vec<Vec<Float>>,
    coeffs: Vec<Vec<Float>>,
    monomial_norms: Vec<Float>,
}

impl IndependentGram {
    fn new(b: &OrthoBasis, k_max: usize) -> Result<Self> {
        let prec = b.precision();
        let table = MomentTable::new(b.weight(), prec);
        let mons = monomials_up_to(b.dim(), k_max as u32);
        let len = mons.len();
        let mut g = vec![Float::new(prec); len * len];
        for (r, a) in mons.iter().enumerate() {
            for (c, m) in mons.iter().enumerate().skip(r) {
                let v = table.moment(&a.add(m))?;
                g[c * len + r].clone_from(&v);
                g[r * len + c] = v;
            }
        }
        let coeffs: Vec<Vec<Float>> = (0..len)
            .map(|i| {
                let e = b.element(i);
                mons.iter()
                    .map(|m| e.coeff(m).cloned().unwrap_or_else(|| Float::new(prec)))
                    .collect()
            })
            .collect();
        let gc = coeffs
            .par_iter()
            .map(|c| {
                (0..len)
                    .map(|r| {
                        let mut acc = Float::new(prec);
                        for (x, gv) in c.iter().zip(&g[r * len..(r + 1) * len]) {
                            if !x.is_zero() {
                                acc += Float::with_val(prec, x * gv);
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        let monomial_norms = (0..len).map(|m| g[m * len + m].clone().sqrt()).collect();
        Ok(Self {
            gc,
            coeffs,
            monomial_norms,
        })
    }

    fn inner(&self, i: usize, j: usize) -> Float {
        let prec = self.coeffs[i][0].prec();
        let mut acc = Float::new(prec);
        for (x, y) in self.coeffs[j].iter().zip(&self.gc[i]) {
            if !x.is_zero() {
                acc += Float::with_val(prec, x * y);
            }
        }
        acc
    }
}

/// `OPS` checks of one basis against independently computed moments:
/// orthogonality to lower-degree monomials and orthonormality, per degree.
pub fn ops_checks(b: &OrthoBasis, k_max: usize) -> Result<Vec<VerifyReport>> {
    let gram = IndependentGram::new(b, k_max)?;
    let (d, alpha, bits) = (b.dim(), b.weight().alpha(), b.precision());
    let mut out = Vec::new();
    for k in 0..=k_max {
        let rows = b.block_range(k);
        let below = b.block_range(k).start;
        let ops = max_of(rows.clone().flat_map(|i| {
            let gram = &gram;
            (0..below).map(move |m| rel(&Float::with_val(bits, gram.gc[i][m].abs_ref()), &gram.monomial_norms[m]))
        }));
        out.push(VerifyReport::new(
            "ops_orthogonality",
            CheckKind::Equality,
            d,
            alpha,
            k as i64,
            ops,
            bits,
        ));
        let ortho = max_of(rows.flat_map(|i| {
            let gram = &gram;
            (0..=i).map(move |j| {
                let mut v = gram.inner(i, j);
                if i == j {
                    v -= 1u32;
                }
                v.to_f64().abs()
            })
        }));
        out.push(VerifyReport::new(
            "orthonormality",
            CheckKind::Equality,
            d,
            alpha,
            k as i64,
            ortho,
            bits,
        ));
    }
    Ok(out)
}

/// A copy of `b` with one degree-`k` element perturbed by `eps` times a
/// lower monomial, breaking orthogonality (negative-control fixture).
pub fn negative_control_basis(b: &OrthoBasis, k: usize, eps: f64) -> Result<OrthoBasis> {
    assert!(k >= 2, "need a lower monomial of the same parity");
    let polys: Vec<Polynomial> = (0..b.len()).map(|i| b.element(i)).collect();
    let target = b.block_range(k).start;
    let lower = b.leading_monomial(b.block_range(k - 2).start);
    let mut polys = polys;
    polys[target].add_term(lower, &Float::with_val(b.precision(), eps));
    OrthoBasis::from_polynomials(b.weight(), b.max_degree(), b.precision(), &polys)
}

struct GridPoint<'a> {
    cfg: &'a SuiteConfig,
    lo: &'a OrthoBasis,
    up: &'a OrthoBasis,
    pair: BasisPair<'a>,
    ops: HashMap<i64, Vec<VerifyReport>>,
    d: usize,
    alpha: f64,
    bits: u32,
}

impl<'a> GridPoint<'a> {
    fn new(cfg: &'a SuiteConfig, lo: &'a OrthoBasis, up: &'a OrthoBasis) -> Self {
        let d = lo.dim();
        let alpha = lo.weight().alpha();
        let mut ops: HashMap<i64, Vec<VerifyReport>> = HashMap::new();
        match ops_checks(lo, cfg.k_max_for(d)) {
            Ok(reports) => {
                for r in reports {
                    ops.entry(r.degree).or_default().push(r);
                }
            }
            Err(e) => {
                ops.entry(0)
                    .or_default()
                    .push(VerifyReport::failure("ops_orthogonality", d, alpha, 0, e.to_string()));
            }
        }
        Self {
            cfg,
            lo,
            up,
            pair: BasisPair::new(lo, up).expect("bases built as a pair"),
            ops,
            d,
            alpha,
            bits: lo.precision(),
        }
    }

    fn rng(&self, k: usize, stream: u64) -> ChaCha8Rng {
        let mut seed = self.cfg.seed ^ self.alpha.to_bits().rotate_left(17);
        seed = seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(((self.d as u64) << 40) | ((k as u64) << 20) | stream);
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// `Σ c_i e_i` over blocks `≤ deg` with `c_i` uniform on `[−1, 1]`.
    fn random_poly(&self, b: &OrthoBasis, deg: usize, rng: &mut ChaCha8Rng) -> Polynomial {
        let blocks: Vec<Vec<Float>> = (0..=deg)
            .map(|j| {
                (0..b.block_len(j))
                    .map(|_| Float::with_val(b.precision(), rng.gen_range(-1.0..1.0)))
                    .collect()
            })
            .collect();
        b.synthesize(&blocks).expect("degree within the basis")
    }

    fn mp(&self, v: f64) -> Float {
        Float::with_val(self.bits, v)
    }

    fn report(&self, check: &str, kind: CheckKind, k: usize, residual: f64) -> VerifyReport {
        VerifyReport::new(check, kind, self.d, self.alpha, k as i64, residual, self.bits)
    }

    fn nlo(&self, p: &Polynomial) -> Float {
        self.lo.space().norm(p).expect("dimension matches")
    }

    fn nup(&self, p: &Polynomial) -> Float {
        self.up.space().norm(p).expect("dimension matches")
    }

    fn pl(&self, p: &Polynomial, k: i64) -> Polynomial {
        self.lo.project_component(p, k).expect("degree within the basis")
    }

    fn pu(&self, p: &Polynomial, k: i64) -> Polynomial {
        self.up.project_component(p, k).expect("degree within the basis")
    }

    fn degree_checks(&self, k: usize) -> Vec<VerifyReport> {
        let mut out = self.ops.get(&(k as i64)).cloned().unwrap_or_default();
        match self.checks(k) {
            Ok(r) => out.extend(r),
            Err(e) => out.push(VerifyReport::failure(
                "identity_suite",
                self.d,
                self.alpha,
                k as i64,
                e.to_string(),
            )),
        }
        out
    }

    fn checks(&self, k: usize) -> Result<Vec<VerifyReport>> {
        use CheckKind::*;
        let (d, alpha) = (self.d, self.alpha);
        let ki = k as i64;
        let n = self.lo.max_degree();
        let lower_block = self.lo.block(k);
        let upper_block = self.up.block(k);
        let mut out = Vec::new();

        // parity
        let parity = max_of(lower_block.iter().map(|e| off_support(e, |o| o % 2 == (k % 2) as u32)));
        out.push(self.report("parity_support", Structural, k, parity));
        let pts = sample_points(&mut self.rng(k, 1), d, 3);
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut pointwise = 0.0f64;
        for e in &lower_block {
            for x in &pts {
                let neg: Vec<f64> = x.iter().map(|v| -v).collect();
                let a = e.eval(x)?;
                let b = e.eval(&neg)?;
                let diff = Float::with_val(self.bits, &b - &(a.clone() * sign)).abs();
                let scale = Float::with_val(self.bits, a.abs_ref()) + b.abs();
                pointwise = pointwise.max(rel(&diff, &scale));
            }
        }
        out.push(self.report("parity_pointwise", Equality, k, pointwise));

        // eigen-relation, polynomial and weak forms
        let lam = self.mp(k as f64) * (self.mp((k + d) as f64) + self.mp(alpha) * 2u32);
        let lambda = lam.to_f64();
        let mut strong = 0.0f64;
        for e in &lower_block {
            let diff = &e.sturm_liouville(alpha)? - &e.scale(&lam);
            strong = strong.max(rel(&self.nlo(&diff), &Float::with_val(self.bits, lambda.max(1.0))));
        }
        out.push(self.report("eigen_relation", Equality, k, strong));
        let mut weak = 0.0f64;
        let mut rng = self.rng(k, 2);
        let tests: Vec<Polynomial> = (0..self.cfg.equality_samples)
            .map(|_| self.random_poly(self.lo, (k + 1).min(n), &mut rng))
            .collect();
        for e in &lower_block {
            for q in &tests {
                let mut a = Float::new(self.bits);
                for j in 0..d {
                    a += self.up.space().inner(&e.partial_axis(j), &q.partial_axis(j))?;
                }
                for i in 0..d {
                    for j in i + 1..d {
                        a += self
                            .lo
                            .space()
                            .inner(&e.angular_derivative(i, j)?, &q.angular_derivative(i, j)?)?;
                    }
                }
                let rhs = Float::with_val(self.bits, &lam * &self.lo.space().inner(e, q)?);
                let scale = Float::with_val(self.bits, a.abs_ref())
                    .max(&rhs.clone().abs())
                    .max(&self.nlo(q));
                weak = weak.max(rel(&Float::with_val(self.bits, &a - &rhs).abs(), &scale));
            }
        }
        out.push(self.report("eigen_relation_weak", Equality, k, weak));

        // multiplication by 1 − |x|² and the two weights
        let omega = max_of(upper_block.iter().map(|q| {
            let r = q.multiply_omega();
            let rest = &(&r - &self.pl(&r, ki)) - &self.pl(&r, ki + 2);
            rel(&self.nlo(&rest), &self.nlo(&r))
        }));
        out.push(self.report("omega_multiplication_span", Equality, k, omega));
        let split = max_of(lower_block.iter().map(|e| {
            let rest = &(e - &self.pu(e, ki - 2)) - &self.pu(e, ki);
            rel(&self.nup(&rest), &self.nup(e))
        }));
        out.push(self.report("lower_element_upper_split", Equality, k, split));

        let mut rng = self.rng(k, 3);
        let inputs: Vec<Polynomial> = (0..self.cfg.equality_samples)
            .map(|_| self.random_poly(self.lo, n, &mut rng))
            .collect();
        let two = max_of(inputs.iter().map(|u| {
            let lhs = self.pu(u, ki);
            let rhs = self.pu(&(&self.pl(u, ki) + &self.pl(u, ki + 2)), ki);
            rel(&self.nup(&(&lhs - &rhs)), &self.nup(u))
        }));
        out.push(self.report("projection_through_two_components", Equality, k, two));
        let mut shift = 0.0f64;
        for u in &inputs {
            shift = shift.max(rel(&self.pair.id_shift_check(u, ki)?, &self.nlo(u)));
        }
        out.push(self.report("upper_projection_shift", Equality, k, shift));

        // raising operator and derivatives
        let mut degree_excess = 0.0f64;
        let mut to_block = 0.0f64;
        for q in &upper_block {
            for j in 0..d {
                let r = q.raise(alpha, j)?;
                degree_excess = degree_excess.max(off_support(&r, |o| o as usize <= k + 1));
                let rest = &r - &self.pl(&r, ki + 1);
                to_block = to_block.max(rel(&self.nlo(&rest), &self.nlo(&r).max(&self.nup(q))));
            }
        }
        out.push(self.report("raising_degree_bound", Structural, k, degree_excess));
        let mut rng = self.rng(k, 4);
        let mut adjoint = 0.0f64;
        for _ in 0..self.cfg.equality_samples {
            let p = self.random_poly(self.lo, (k + 1).min(n), &mut rng);
            for q in &upper_block {
                for j in 0..d {
                    let dp = p.partial_axis(j);
                    let rq = q.raise(alpha, j)?;
                    let lhs = self.up.space().inner(&dp, q)?;
                    let rhs = self.lo.space().inner(&p, &rq)?;
                    let scale = Float::with_val(self.bits, self.nup(&dp) * self.nup(q)) + self.nlo(&p) * self.nlo(&rq);
                    adjoint = adjoint.max(rel(&Float::with_val(self.bits, &lhs - &rhs).abs(), &scale));
                }
            }
        }
        out.push(self.report("raising_adjoint", Equality, k, adjoint));
        out.push(self.report("raising_maps_upper_to_lower_block", Equality, k, to_block));
        let mut down = 0.0f64;
        for e in &lower_block {
            for j in 0..d {
                let g = e.partial_axis(j);
                let rest = &g - &self.pu(&g, ki - 1);
                // ∂_j e vanishes identically for elements that are ridge functions of other axes
                down = down.max(rel(&self.nup(&rest), &self.nup(&g).max(&self.nlo(e))));
            }
        }
        out.push(self.report("derivative_maps_lower_to_upper_block", Equality, k, down));

        let mut commute = 0.0f64;
        let mut diff_id = 0.0f64;
        let mut telescoping = 0.0f64;
        for u in &inputs {
            for j in 0..d {
                let du = u.partial_axis(j);
                let lhs = self.pl(u, ki).partial_axis(j);
                let rhs = self.pu(&du, ki - 1);
                commute = commute.max(rel(&self.nup(&(&lhs - &rhs)), &self.nup(&du)));

                let lhs = &self.pl(u, ki + 1).partial_axis(j) - &self.pl(&du, ki);
                let rhs = &self.pu(&self.pl(&du, ki + 2), ki) - &self.pu(&self.pl(&du, ki), ki - 2);
                diff_id = diff_id.max(rel(&self.nlo(&(&lhs - &rhs)), &self.nlo(&du)));

                let direct = self.pair.commutator_direct(u, ki, j)?;
                let formula = self.pair.commutator_formula(u, ki, j)?;
                telescoping = telescoping.max(rel(&self.nlo(&(&direct - &formula)), &self.nlo(&du)));
            }
        }
        out.push(self.report("derivative_projection_commute", Equality, k, commute));

        // the two norms on the upper block
        let half_d = self.mp(d as f64) / 2u32;
        let factor = (self.mp(k as f64) + &half_d) / (self.mp(alpha) + 1u32) + 1u32;
        let dense: Vec<Vec<Float>> = upper_block
            .iter()
            .map(|q| self.lo.space().to_dense(q))
            .collect::<Result<_>>()?;
        let mut ratio = 0.0f64;
        for (a, qa) in dense.iter().enumerate() {
            for qb in &dense[..=a] {
                let v = self.lo.space().inner_dense(qa, qb);
                let target = if std::ptr::eq(qa, qb) {
                    factor.clone()
                } else {
                    Float::new(self.bits)
                };
                ratio = ratio.max(rel(&Float::with_val(self.bits, &v - &target).abs(), &factor));
            }
        }
        out.push(self.report("cross_weight_norm_ratio", Equality, k, ratio));
        out.push(self.report("derivative_projection_difference", Equality, k, diff_id));
        out.push(self.report("commutator_telescoping", Equality, k, telescoping));

        // bounds on the composed projections, for random members of the α blocks
        let mut rng = self.rng(k, 5);
        let c1 = (self.mp(k as f64) + &half_d + self.mp(alpha)) / (self.mp(alpha) + 1u32);
        let c2 = (self.mp(k as f64 + 1.0) + &half_d + self.mp(alpha)) / (self.mp(alpha) + 1u32);
        let mut excess1 = 0.0f64;
        let mut excess2 = 0.0f64;
        for _ in 0..self.cfg.inequality_samples {
            let v_next = self.random_block(self.lo, k + 1, &mut rng);
            let v_here = self.random_block(self.lo, k, &mut rng);
            let lhs1 = self.nlo(&self.pu(&v_next, ki - 1)).square();
            let rhs1 = Float::with_val(self.bits, &c1 * &self.nlo(&v_next).square());
            excess1 = excess1.max(Float::with_val(self.bits, &lhs1 - &rhs1).to_f64());
            let lhs2 = self.nlo(&self.pu(&v_here, ki)).square();
            let rhs2 = Float::with_val(self.bits, &c2 * &self.nlo(&v_here).square());
            excess2 = excess2.max(Float::with_val(self.bits, &lhs2 - &rhs2).to_f64());
        }
        out.push(self.report("projection_composition_bound_lower", Inequality, k, excess1));
        out.push(self.report("projection_composition_bound_upper", Inequality, k, excess2));

        let mut parseval = 0.0f64;
        for u in &inputs {
            let s = self.lo.truncate(u, ki)?;
            let lhs = self.nlo(&(u - &s)).square();
            let rhs = Float::with_val(self.bits, self.nlo(u).square() - self.nlo(&s).square());
            parseval = parseval.max(rel(
                &Float::with_val(self.bits, &lhs - &rhs).abs(),
                &self.nlo(u).square(),
            ));
        }
        out.push(self.report("truncation_parseval", Equality, k, parseval));
        Ok(out)
    }

    /// A random member of `V^α_k` (uniform coefficients in the block).
    fn random_block(&self, b: &OrthoBasis, k: usize, rng: &mut ChaCha8Rng) -> Polynomial {
        let blocks: Vec<Vec<Float>> = (0..=k)
            .map(|j| {
                (0..b.block_len(j))
                    .map(|_| {
                        if j == k {
                            Float::with_val(b.precision(), rng.gen_range(-1.0..1.0))
                        } else {
                            Float::new(b.precision())
                        }
                    })
                    .collect()
            })
            .collect();
        b.synthesize(&blocks).expect("degree within the basis")
    }
}

/// One equality residual at base and doubled precision.
#[derive(Clone, Debug, Serialize)]
pub struct ScalingReport {
    pub check: String,
    pub d: usize,
    pub alpha: f64,
    pub degree: i64,
    pub base_residual: f64,
    pub doubled_residual: f64,
    pub base_bits: u32,
    pub doubled_bits: u32,
    pub pass: bool,
}

/// Reruns the suite with both bases of every grid point rebuilt at twice
/// the bits used in `base`, and compares equality residuals.
///
/// A residual passes when it shrinks by [`SCALING_FACTOR`]; a residual that
/// was already exactly zero passes when the rerun stays below
/// `2^{−bits} / SCALING_FACTOR`.
pub fn precision_scaling(cfg: &SuiteConfig, base: &SuiteOutcome) -> Vec<ScalingReport> {
    let results: Vec<GridResult> = cfg
        .grid()
        .par_iter()
        .map(|&(d, a)| match base.precisions.iter().find(|p| p.0 == d && p.1 == a) {
            Some(&(_, _, lo, up)) => grid_point(cfg, d, a, Some((2 * lo, 2 * up))),
            None => (Vec::new(), None),
        })
        .collect();
    let doubled = collect(cfg, results);
    let key = |r: &VerifyReport| (r.check.clone(), r.d, r.alpha.to_bits(), r.degree);
    let index: HashMap<_, &VerifyReport> = doubled.reports.iter().map(|r| (key(r), r)).collect();
    let mut out = Vec::new();
    for b in base.reports.iter().filter(|r| r.kind == CheckKind::Equality) {
        let Some(dbl) = index.get(&key(b)) else {
            continue;
        };
        let pass = if b.residual == 0.0 {
            dbl.residual <= (-(b.precision_bits as f64)).exp2() / SCALING_FACTOR
        } else {
            dbl.residual <= b.residual / SCALING_FACTOR
        };
        out.push(ScalingReport {
            check: b.check.clone(),
            d: b.d,
            alpha: b.alpha,
            degree: b.degree,
            base_residual: b.residual,
            doubled_residual: dbl.residual,
            base_bits: b.precision_bits,
            doubled_bits: dbl.precision_bits,
            pass,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SuiteConfig {
        SuiteConfig {
            dims: vec![1, 2],
            alphas: vec![0.0, -0.5],
            k_max: [4, 3, 2],
            equality_samples: 1,
            inequality_samples: 10,
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn small_grid_passes_and_is_deterministic() {
        let cfg = small();
        let a = run_identity_suite(&cfg);
        let failed: Vec<_> = a.reports.iter().filter(|r| !r.pass).collect();
        assert!(failed.is_empty(), "{failed:#?}");
        let b = run_identity_suite(&cfg);
        let la: Vec<String> = a.reports.iter().map(|r| r.to_json_line()).collect();
        let lb: Vec<String> = b.reports.iter().map(|r| r.to_json_line()).collect();
        assert_eq!(la, lb);
        // every check appears at every degree
        let per_degree = a
            .reports
            .iter()
            .filter(|r| r.d == 1 && r.alpha == 0.0 && r.degree == 0)
            .count();
        assert_eq!(per_degree, 21);
    }

    #[test]
    fn degree_zero_is_trivial() {
        // constants: no lower monomials, no derivatives, eigenvalue zero
        let trivial = [
            "ops_orthogonality",
            "parity_support",
            "parity_pointwise",
            "eigen_relation",
            "eigen_relation_weak",
            "raising_degree_bound",
            "derivative_maps_lower_to_upper_block",
            "projection_composition_bound_lower",
        ];
        let out = run_identity_suite(&small());
        for r in out
            .reports
            .iter()
            .filter(|r| r.degree == 0 && trivial.contains(&r.check.as_str()))
        {
            assert_eq!(r.residual, 0.0, "{r:?}");
        }
    }

    #[test]
    fn corrupted_basis_fails_ops() {
        let w = WeightParam::new(2, 0.0).unwrap();
        let b = build_basis(w, 5, &BasisOptions::default()).unwrap();
        assert!(ops_checks(&b, 5).unwrap().iter().all(|r| r.pass));
        let bad = negative_control_basis(&b, 4, 1e-3).unwrap();
        let reports = ops_checks(&bad, 5).unwrap();
        let failing: Vec<_> = reports.iter().filter(|r| !r.pass).collect();
        assert!(
            failing.iter().any(|r| r.check == "ops_orthogonality" && r.degree == 4),
            "{reports:#?}"
        );
    }

    #[test]
    fn doubling_precision_shrinks_residuals() {
        let cfg = SuiteConfig {
            dims: vec![2],
            alphas: vec![1.0],
            k_max: [0, 3, 0],
            equality_samples: 1,
            inequality_samples: 5,
            ..SuiteConfig::default()
        };
        let base = run_identity_suite(&cfg);
        let scaling = precision_scaling(&cfg, &base);
        assert!(!scaling.is_empty());
        let bad: Vec<_> = scaling.iter().filter(|s| !s.pass).collect();
        assert!(bad.is_empty(), "{bad:#?}");
    }
}
