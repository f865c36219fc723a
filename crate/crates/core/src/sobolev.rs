//! Weighted Sobolev norms `‖u‖²_{H^l_α} = Σ_{k ≤ l} |u|²_{H^k_α}` with
//! `|u|²_{H^k_α} = Σ_{|γ| = k} (k over γ) ‖∂^γ u‖²_α`.

use rayon::prelude::*;
use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::{check_order, BallFunction};
use crate::moments::{WeightParam, WeightedInner};
use crate::orthospace::OrthoBasis;
use crate::polyalg::{count_up_to, monomials_of_degree, monomials_up_to, Polynomial};
use crate::quadrature::{project_values, BallRule, DEFAULT_MARGIN};

#[derive(Clone, Debug, Serialize)]
pub struct SobolevNormReport {
    pub weight: WeightParam,
    pub order: usize,
    /// `|u|_{H^k_α}` for `k = 0..=order`.
    pub seminorms: Vec<f64>,
    pub norm: f64,
}

impl SobolevNormReport {
    fn from_squares(weight: WeightParam, squares: Vec<f64>) -> Self {
        let norm = squares.iter().sum::<f64>().sqrt();
        Self {
            weight,
            order: squares.len() - 1,
            seminorms: squares.into_iter().map(|s| s.max(0.0).sqrt()).collect(),
            norm,
        }
    }

    /// `‖u‖_{H^k_α}` for `k ≤ order`.
    pub fn norm_up_to(&self, k: usize) -> f64 {
        self.seminorms[..=k].iter().map(|s| s * s).sum::<f64>().sqrt()
    }
}

/// `|u|²_{H^k_α}` exactly, at the inner product's precision.
pub fn seminorm_squared_poly<I: WeightedInner + ?Sized>(ip: &I, u: &Polynomial, k: usize) -> Result<Float> {
    let mut acc = Float::new(u.precision());
    for g in monomials_of_degree(u.dim(), k as u32) {
        let du = u.partial(&g)?;
        if du.is_zero() {
            continue;
        }
        acc += ip.norm_squared(&du)? * g.multinomial();
    }
    Ok(acc)
}

pub fn seminorm_poly<I: WeightedInner + ?Sized>(ip: &I, u: &Polynomial, k: usize) -> Result<Float> {
    Ok(seminorm_squared_poly(ip, u, k)?.sqrt())
}

/// `‖u‖_{H^l_α}` with every seminorm, exact path.
pub fn hnorm_poly<I: WeightedInner + ?Sized>(ip: &I, u: &Polynomial, l: usize) -> Result<SobolevNormReport> {
    let squares = (0..=l)
        .map(|k| seminorm_squared_poly(ip, u, k).map(|v| v.to_f64()))
        .collect::<Result<Vec<_>>>()?;
    Ok(SobolevNormReport::from_squares(ip.weight(), squares))
}

/// Node values of every `∂^γ f`, `|γ| ≤ r`, row per node.
fn derivative_table(f: &dyn BallFunction, rule: &BallRule, r: usize) -> Result<Vec<Vec<f64>>> {
    check_order(f, r)?;
    if f.dim() != rule.dim() {
        return Err(Error::DimensionMismatch {
            expected: rule.dim(),
            found: f.dim(),
        });
    }
    let pts: Vec<&[f64]> = rule.nodes().collect();
    pts.par_iter().map(|x| f.derivatives(x, r)).collect()
}

/// Σ over `|γ| = k` of `(k over γ) Σ_i w_i g_γ(x_i)²`, for each `k ≤ r`.
fn seminorm_squares(rule: &BallRule, rows: &[Vec<f64>], r: usize) -> Vec<f64> {
    let d = rule.dim();
    let mut out = vec![0.0; r + 1];
    for (col, g) in monomials_up_to(d, r as u32).iter().enumerate() {
        let values: Vec<f64> = rows.iter().map(|row| row[col] * row[col]).collect();
        out[g.order() as usize] += g.multinomial() * rule.integrate_values(&values);
    }
    out
}

/// Quadrature evaluation of `‖f‖_{H^l_α}` from the derivative oracle.
pub fn hnorm_function(w: WeightParam, f: &dyn BallFunction, l: usize, rule: &BallRule) -> Result<SobolevNormReport> {
    if rule.weight() != w {
        return Err(Error::WeightMismatch(format!(
            "norm weight {w} vs rule {}",
            rule.weight()
        )));
    }
    let rows = derivative_table(f, rule, l)?;
    Ok(SobolevNormReport::from_squares(w, seminorm_squares(rule, &rows, l)))
}

/// Residual seminorms `|f − S^α_N f|_{H^k_α}` for several `N` at once.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualTable {
    pub weight: WeightParam,
    pub order: usize,
    pub n_values: Vec<usize>,
    /// `seminorms[i][k]` is `|f − S^α_{n_values[i]} f|_{H^k_α}`.
    pub seminorms: Vec<Vec<f64>>,
}

impl ResidualTable {
    /// `‖f − S^α_N f‖_{H^k_α}` at row `i`.
    pub fn norm(&self, i: usize, k: usize) -> f64 {
        self.seminorms[i][..=k].iter().map(|s| s * s).sum::<f64>().sqrt()
    }
}

/// Per-node MP powers `x_a^e`, shared by every polynomial evaluated there.
struct PowerTable {
    powers: Vec<Vec<Float>>,
}

impl PowerTable {
    fn new(x: &[f64], deg: usize, prec: u32) -> Self {
        let powers = x
            .iter()
            .map(|&xi| {
                let mut row = Vec::with_capacity(deg + 1);
                row.push(Float::with_val(prec, 1));
                for e in 1..=deg {
                    let next = Float::with_val(prec, &row[e - 1] * xi);
                    row.push(next);
                }
                row
            })
            .collect();
        Self { powers }
    }

    fn eval(&self, p: &Polynomial) -> f64 {
        let mut acc = Float::new(p.precision());
        let mut t = Float::new(p.precision());
        for (m, c) in p.terms() {
            t.clone_from(c);
            for (axis, e) in m.exponents().enumerate() {
                if e > 0 {
                    t *= &self.powers[axis][e as usize];
                }
            }
            acc += &t;
        }
        acc.to_f64()
    }
}

/// `|f − S^α_N f|_{H^k_α}`, `k ≤ r`, for every `N` in `n_values`.
///
/// `f` is projected once at the basis degree; each degree block is
/// differentiated exactly and evaluated at the nodes in multiprecision, and
/// the partial sums over blocks are taken in f64. The residual derivatives
/// combine the analytic oracle with those exact polynomial derivatives.
pub fn residual_table(
    b: &OrthoBasis,
    f: &dyn BallFunction,
    rule: &BallRule,
    n_values: &[usize],
    r: usize,
    margin: usize,
) -> Result<ResidualTable> {
    let top = n_values.iter().copied().max().unwrap_or(0);
    if top > b.max_degree() {
        return Err(Error::DegreeExceedsBasis {
            degree: top as i64,
            max: b.max_degree(),
        });
    }
    let rows = derivative_table(f, rule, r)?;
    let values: Vec<f64> = rows.iter().map(|row| row[0]).collect();
    let expansion = project_values(b, &values, rule, margin)?;
    let d = b.dim();
    let gammas = monomials_up_to(d, r as u32);
    let ncols = count_up_to(d, r as u32);

    // block_partials[k][γ] = ∂^γ of the degree-k block of the projection
    let block_partials: Vec<Vec<Polynomial>> = (0..=top)
        .map(|k| {
            let mut coeffs: Vec<Vec<Float>> = (0..k)
                .map(|j| vec![Float::new(b.precision()); b.block_len(j)])
                .collect();
            coeffs.push(expansion.block(k).to_vec());
            let qk = b.synthesize(&coeffs)?;
            gammas.iter().map(|g| qk.partial(g)).collect()
        })
        .collect::<Result<_>>()?;

    let prec = b.precision();
    let pts: Vec<&[f64]> = rule.nodes().collect();
    // node_blocks[i][k * ncols + γ]
    let node_blocks: Vec<Vec<f64>> = pts
        .par_iter()
        .map(|x| {
            let table = PowerTable::new(x, top, prec);
            block_partials
                .iter()
                .flat_map(|parts| parts.iter().map(|p| table.eval(p)).collect::<Vec<_>>())
                .collect()
        })
        .collect();

    let mut seminorms = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let residual_rows: Vec<Vec<f64>> = rows
            .iter()
            .zip(&node_blocks)
            .map(|(row, blocks)| {
                (0..ncols)
                    .map(|c| {
                        let approx: f64 = (0..=n).map(|k| blocks[k * ncols + c]).sum();
                        row[c] - approx
                    })
                    .collect()
            })
            .collect();
        seminorms.push(
            seminorm_squares(rule, &residual_rows, r)
                .into_iter()
                .map(|s| s.max(0.0).sqrt())
                .collect(),
        );
    }
    Ok(ResidualTable {
        weight: b.weight(),
        order: r,
        n_values: n_values.to_vec(),
        seminorms,
    })
}

/// `‖f − S^α_N f‖_{H^k_α}` for `k = 0..=r`.
pub fn residual_norms(b: &OrthoBasis, f: &dyn BallFunction, rule: &BallRule, n: usize, r: usize) -> Result<Vec<f64>> {
    let table = residual_table(b, f, rule, &[n], r, DEFAULT_MARGIN)?;
    Ok((0..=r).map(|k| table.norm(0, k)).collect())
}

/// Finite-difference stand-in for a missing derivative oracle.
///
/// Only for quick sanity runs: the truncation and cancellation error of the
/// difference quotients is far above what rate fits need, so results must be
/// compared with [`sanity::TOLERANCE`], never the exact-path tolerances.
pub mod sanity {
    use super::*;

    pub const TOLERANCE: f64 = 1e-5;
    const STEP: f64 = 1e-4;

    /// Central differences up to order 2.
    pub struct FiniteDifference<'a> {
        inner: &'a dyn BallFunction,
    }

    impl<'a> FiniteDifference<'a> {
        pub fn new(inner: &'a dyn BallFunction) -> Self {
            Self { inner }
        }
    }

    impl BallFunction for FiniteDifference<'_> {
        fn dim(&self) -> usize {
            self.inner.dim()
        }

        fn value(&self, x: &[f64]) -> f64 {
            self.inner.value(x)
        }

        fn derivative_order(&self) -> usize {
            2
        }

        fn derivatives(&self, x: &[f64], order: usize) -> Result<Vec<f64>> {
            check_order(self, order)?;
            let d = self.dim();
            let shifted = |steps: &[(usize, f64)]| {
                let mut y = x.to_vec();
                for &(a, s) in steps {
                    y[a] += s * STEP;
                }
                self.inner.value(&y)
            };
            let f0 = self.inner.value(x);
            let mut out = Vec::new();
            for g in monomials_up_to(d, order as u32) {
                let axes: Vec<usize> = (0..d).flat_map(|a| std::iter::repeat_n(a, g.get(a) as usize)).collect();
                let v = match axes.as_slice() {
                    [] => f0,
                    [a] => (shifted(&[(*a, 1.0)]) - shifted(&[(*a, -1.0)])) / (2.0 * STEP),
                    [a, b] if a == b => (shifted(&[(*a, 1.0)]) - 2.0 * f0 + shifted(&[(*a, -1.0)])) / (STEP * STEP),
                    [a, b] => {
                        (shifted(&[(*a, 1.0), (*b, 1.0)])
                            - shifted(&[(*a, 1.0), (*b, -1.0)])
                            - shifted(&[(*a, -1.0), (*b, 1.0)])
                            + shifted(&[(*a, -1.0), (*b, -1.0)]))
                            / (4.0 * STEP * STEP)
                    }
                    _ => unreachable!("order capped at 2"),
                };
                out.push(v);
            }
            Ok(out)
        }

        fn name(&self) -> String {
            format!("fd({})", self.inner.name())
        }
    }

    /// `‖f‖_{H^l_α}` for a value-only function, `l ≤ 2`.
    pub fn hnorm_fd(w: WeightParam, f: &dyn BallFunction, l: usize, rule: &BallRule) -> Result<SobolevNormReport> {
        hnorm_function(w, &FiniteDifference::new(f), l, rule)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::{FnFunction, PolyFunction};
    use crate::moments::MomentTable;
    use crate::orthospace::{build_basis, BasisOptions};
    use crate::polyalg::MultiIndex;

    fn poly(d: usize, terms: &[(&[u32], f64)]) -> Polynomial {
        Polynomial::from_f64_terms(d, 128, terms.iter().map(|(e, c)| (MultiIndex::new(e).unwrap(), *c))).unwrap()
    }

    #[test]
    fn seminorm_examples() {
        let w = WeightParam::new(2, 0.5).unwrap();
        let m = MomentTable::new(w, 128);
        let u = poly(2, &[(&[1, 1], 1.0)]);
        let one = Polynomial::constant(2, 128, 1.0);
        let lhs = seminorm_squared_poly(&m, &u, 2).unwrap().to_f64();
        let rhs = 2.0 * m.norm_squared(&one).unwrap().to_f64();
        assert!((lhs - rhs).abs() < 1e-15 * rhs);
        assert!((seminorm_poly(&m, &u, 0).unwrap() - m.norm(&u).unwrap()).to_f64().abs() < 1e-30);
        let c = Polynomial::constant(2, 128, 3.0);
        for k in 1..4 {
            assert_eq!(seminorm_poly(&m, &c, k).unwrap().to_f64(), 0.0);
        }
    }

    #[test]
    fn function_norm_examples() {
        let w = WeightParam::new(1, 0.0).unwrap();
        let rule = BallRule::build(w, 20).unwrap();
        let x = PolyFunction::new(poly(1, &[(&[1], 1.0)]), 2);
        let rep = hnorm_function(w, &x, 1, &rule).unwrap();
        assert!((rep.norm * rep.norm - 8.0 / 3.0).abs() < 1e-14);
        let zero = PolyFunction::new(Polynomial::zero(1, 64), 3);
        let rep = hnorm_function(w, &zero, 3, &rule).unwrap();
        assert!(rep.seminorms.iter().all(|&s| s == 0.0));
        let value_only = FnFunction::new(1, "x", |x: &[f64]| x[0]);
        assert!(hnorm_function(w, &value_only, 1, &rule).is_err());
        let fd = sanity::hnorm_fd(w, &value_only, 1, &rule).unwrap();
        assert!((fd.norm * fd.norm - 8.0 / 3.0).abs() < sanity::TOLERANCE);
    }

    #[test]
    fn residual_examples() {
        let w = WeightParam::new(1, 0.0).unwrap();
        let b = build_basis(w, 4, &BasisOptions::default()).unwrap();
        let rule = BallRule::build(w, 40).unwrap();
        let x2 = PolyFunction::new(poly(1, &[(&[2], 1.0)]), 3);
        let r = residual_norms(&b, &x2, &rule, 1, 0).unwrap();
        assert!((r[0] - (8.0f64 / 45.0).sqrt()).abs() < 1e-14);
        let r = residual_norms(&b, &x2, &rule, 2, 3).unwrap();
        assert!(r.iter().all(|&v| v < 1e-10));
        let e2 = PolyFunction::new(b.element(2), 2);
        let r = residual_norms(&b, &e2, &rule, 1, 0).unwrap();
        assert!((r[0] - 1.0).abs() < 1e-12);
    }
}
