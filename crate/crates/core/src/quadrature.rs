//! Product quadrature on `B^d` (`d ≤ 3`) against `W_α`.
//!
//! With `t = ‖x‖²`,
//! `∫_B f W_α = ½ ∫_0^1 (1 − t)^α t^{d/2 − 1} ∫_{S^{d−1}} f(√t θ) dσ(θ) dt`.
//! The radial factor uses a Gauss–Jacobi rule; the sphere uses a reflection
//! pair (`d = 1`), an equispaced circle rule (`d = 2`) or Gauss–Legendre in
//! `z` times an equispaced rule in the azimuth (`d = 3`).

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};
use crate::function::BallFunction;
use crate::moments::{monomial_moment, WeightParam};
use crate::orthospace::{Expansion, OrthoBasis, WeightedSpace};
use crate::polyalg::MultiIndex;

/// Default exactness headroom for [`project_function`].
pub const DEFAULT_MARGIN: usize = 20;

const EXACTNESS_SAMPLES: usize = 24;
const EXACTNESS_TOL: f64 = 1e-12;
const CHUNK: usize = 128;

/// Nodes and positive weights with `Σ w_i p(x_i) = ∫ p W_α` for `deg p ≤ exactness`.
#[derive(Clone, Debug)]
pub struct BallRule {
    weight: WeightParam,
    exactness: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Gauss rule for `(1 − y)^a (1 + y)^b` on `(−1, 1)`.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0 && a > -1.0 && b > -1.0);
    let (diag, off) = jacobi_recurrence(n, a, b);
    let mut t = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        t[(i, i)] = diag[i];
        if i + 1 < n {
            t[(i, i + 1)] = off[i];
            t[(i + 1, i)] = off[i];
        }
    }
    let mut nodes: Vec<f64> = SymmetricEigen::new(t).eigenvalues.iter().copied().collect();
    nodes.sort_by(f64::total_cmp);
    let mu0 = jacobi_mass(a, b);
    let mut weights = Vec::with_capacity(n);
    for y in nodes.iter_mut() {
        // two Newton steps on the degree-n orthonormal polynomial
        for _ in 0..2 {
            let (p, dp, _) = orthonormal_values(*y, n, &diag, &off, mu0);
            if dp != 0.0 {
                let step = p / dp;
                if step.is_finite() && step.abs() < 1e-6 {
                    *y -= step;
                }
            }
        }
        let (_, _, christoffel) = orthonormal_values(*y, n, &diag, &off, mu0);
        weights.push(1.0 / christoffel);
    }
    (nodes, weights)
}

/// Monic Jacobi recurrence: diagonal `a_0..a_{n−1}`, off-diagonal `√b_1..√b_{n−1}`.
fn jacobi_recurrence(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let ab = a + b;
    let diag = (0..n)
        .map(|k| {
            if k == 0 {
                (b - a) / (ab + 2.0)
            } else {
                let s = 2.0 * k as f64 + ab;
                (b * b - a * a) / (s * (s + 2.0))
            }
        })
        .collect();
    let off = (1..n)
        .map(|k| {
            let kf = k as f64;
            let s = 2.0 * kf + ab;
            let beta = if k == 1 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                4.0 * kf * (kf + a) * (kf + b) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))
            };
            beta.sqrt()
        })
        .collect();
    (diag, off)
}

/// `∫ (1 − y)^a (1 + y)^b dy`.
fn jacobi_mass(a: f64, b: f64) -> f64 {
    let g = |x: f64| Float::with_val(96, x).gamma();
    let v = Float::with_val(96, 2.0f64).pow(a + b + 1.0) * g(a + 1.0) * g(b + 1.0) / g(a + b + 2.0);
    v.to_f64()
}

/// `(p_n(y), p_n'(y), Σ_{k<n} p_k(y)²)` for the orthonormal family.
fn orthonormal_values(y: f64, n: usize, diag: &[f64], off: &[f64], mu0: f64) -> (f64, f64, f64) {
    let mut p_prev = 0.0;
    let mut dp_prev = 0.0;
    let mut p = 1.0 / mu0.sqrt();
    let mut dp = 0.0;
    let mut sum = 0.0;
    for k in 0..n {
        sum += p * p;
        // √b_n is not stored; any positive scale leaves the root unchanged
        let b_next = off.get(k).copied().unwrap_or(1.0);
        let b_k = if k == 0 { 0.0 } else { off[k - 1] };
        let p_next = ((y - diag[k]) * p - b_k * p_prev) / b_next;
        let dp_next = (p + (y - diag[k]) * dp - b_k * dp_prev) / b_next;
        p_prev = p;
        dp_prev = dp;
        p = p_next;
        dp = dp_next;
    }
    (p, dp, sum)
}

impl BallRule {
    /// Rule exact for `Π^d_D`. Exactness is spot-checked on random monomials.
    pub fn build(weight: WeightParam, exactness: usize) -> Result<Self> {
        Self::build_refined(weight, exactness, 1)
    }

    /// As [`BallRule::build`] with `radial_factor` times as many radial
    /// nodes. Exactness is unchanged; integrands with a `(1 − |x|²)^s`
    /// boundary factor converge only algebraically in the radial node count.
    pub fn build_refined(weight: WeightParam, exactness: usize, radial_factor: usize) -> Result<Self> {
        if radial_factor == 0 {
            return Err(Error::InvalidArgument(
                "radial refinement factor must be positive".into(),
            ));
        }
        let d = weight.dim();
        if !(1..=3).contains(&d) {
            return Err(Error::UnsupportedDimension(d));
        }
        let a = weight.alpha();
        let b = d as f64 / 2.0 - 1.0;
        let n_r = (exactness + 2).div_ceil(2) * radial_factor;
        let (ys, ws) = gauss_jacobi(n_r, a, b);
        let scale = 0.5 * 2f64.powf(-(a + b + 1.0));
        let radial: Vec<(f64, f64)> = ys.iter().zip(&ws).map(|(y, w)| ((1.0 + y) / 2.0, w * scale)).collect();
        let sphere = sphere_rule(d, exactness);
        let mut nodes = Vec::with_capacity(radial.len() * sphere.len() * d);
        let mut weights = Vec::with_capacity(radial.len() * sphere.len());
        for &(t, wt) in &radial {
            let r = t.sqrt();
            for (theta, ws) in &sphere {
                nodes.extend(theta.iter().map(|c| r * c));
                weights.push(wt * ws);
            }
        }
        let rule = Self {
            weight,
            exactness,
            nodes,
            weights,
        };
        rule.self_check()?;
        Ok(rule)
    }

    fn self_check(&self) -> Result<()> {
        let d = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + self.exactness as u64);
        let mut samples = vec![MultiIndex::zero(d)];
        let top: Vec<u32> = (0..d).map(|i| if i == 0 { self.exactness as u32 } else { 0 }).collect();
        samples.push(MultiIndex::new(&top)?);
        for _ in 0..EXACTNESS_SAMPLES {
            let deg = rng.gen_range(0..=self.exactness as u32);
            let mut exps = vec![0u32; d];
            for _ in 0..deg {
                exps[rng.gen_range(0..d)] += 1;
            }
            samples.push(MultiIndex::new(&exps)?);
        }
        for g in &samples {
            let (err, scale) = self.monomial_error(g)?;
            if err > EXACTNESS_TOL * scale {
                return Err(Error::InvalidArgument(format!(
                    "quadrature self-check failed for x^({g}): error {err:e}, scale {scale:e}"
                )));
            }
        }
        Ok(())
    }

    /// `(|Q(x^γ) − ∫ x^γ W_α|, Q(|x^γ|))`.
    pub fn monomial_error(&self, g: &MultiIndex) -> Result<(f64, f64)> {
        let exact = monomial_moment(self.weight, g, 64)?.to_f64();
        let mono = |x: &[f64]| {
            x.iter()
                .zip(g.exponents())
                .map(|(xi, e)| xi.powi(e as i32))
                .product::<f64>()
        };
        let q = self.integrate(mono);
        let scale = self.integrate(|x| mono(x).abs());
        Ok(((q - exact).abs(), scale))
    }

    pub fn weight(&self) -> WeightParam {
        self.weight
    }

    pub fn dim(&self) -> usize {
        self.weight.dim()
    }

    pub fn exactness(&self) -> usize {
        self.exactness
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.nodes[i * d..(i + 1) * d]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.nodes.chunks_exact(self.dim())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ w_i f(x_i)`, evaluated in parallel and summed pairwise in node order.
    pub fn integrate<F: Fn(&[f64]) -> f64 + Sync>(&self, f: F) -> f64 {
        let d = self.dim();
        let terms: Vec<f64> = self
            .nodes
            .par_chunks_exact(d)
            .zip(self.weights.par_iter())
            .map(|(x, w)| w * f(x))
            .collect();
        pairwise_sum(&terms)
    }

    /// `Σ w_i v_i` for precomputed node values.
    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        let terms: Vec<f64> = values.iter().zip(&self.weights).map(|(v, w)| v * w).collect();
        pairwise_sum(&terms)
    }

    pub fn integrate_function(&self, f: &dyn BallFunction) -> f64 {
        self.integrate(|x| f.value(x))
    }

    /// Node values of `f`, computed in parallel.
    pub fn values(&self, f: &(dyn BallFunction + '_)) -> Vec<f64> {
        self.nodes.par_chunks_exact(self.dim()).map(|x| f.value(x)).collect()
    }

    /// Audit dump: header, then `x₁ … x_d w` per node.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# ballproj quadrature rule");
        let _ = writeln!(out, "# d {}", self.dim());
        let _ = writeln!(out, "# alpha {}", self.weight.alpha());
        let _ = writeln!(out, "# exactness {}", self.exactness);
        let _ = writeln!(out, "# nodes {}", self.len());
        for (x, w) in self.nodes().zip(&self.weights) {
            for c in x {
                let _ = write!(out, "{c:.17e} ");
            }
            let _ = writeln!(out, "{w:.17e}");
        }
        out
    }
}

/// Points on `S^{d−1}` with weights summing to its surface measure.
fn sphere_rule(d: usize, exactness: usize) -> Vec<(Vec<f64>, f64)> {
    match d {
        1 => vec![(vec![-1.0], 1.0), (vec![1.0], 1.0)],
        2 => {
            let m = exactness + 1;
            (0..m)
                .map(|i| {
                    let phi = 2.0 * PI * (i as f64 + 0.5) / m as f64;
                    (vec![phi.cos(), phi.sin()], 2.0 * PI / m as f64)
                })
                .collect()
        }
        _ => {
            let m = exactness + 1;
            let (zs, wz) = gauss_jacobi((exactness + 2).div_ceil(2), 0.0, 0.0);
            let mut out = Vec::with_capacity(zs.len() * m);
            for (z, w) in zs.iter().zip(&wz) {
                let s = (1.0 - z * z).max(0.0).sqrt();
                for i in 0..m {
                    let phi = 2.0 * PI * (i as f64 + 0.5) / m as f64;
                    out.push((vec![s * phi.cos(), s * phi.sin(), *z], w * 2.0 * PI / m as f64));
                }
            }
            out
        }
    }
}

/// Deterministic pairwise summation.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Quadrature moments `Σ_i w_i v_i x_i^γ` for every monomial of `space`,
/// accumulated at the space's precision. Node chunks are reduced in a fixed
/// order, so the result does not depend on the thread count.
pub fn quadrature_moments(space: &WeightedSpace, rule: &BallRule, values: &[f64]) -> Vec<Float> {
    let prec = space.precision();
    let monomials = space.monomials();
    let parents: Vec<(usize, usize)> = monomials
        .iter()
        .map(|m| {
            let axis = (0..m.dim()).find(|&a| m.get(a) > 0).unwrap_or(0);
            match m.with_decrement(axis) {
                Some(p) => (space.index_of(&p).expect("graded closure"), axis),
                None => (usize::MAX, 0),
            }
        })
        .collect();
    let d = rule.dim();
    let chunks: Vec<Vec<Float>> = (0..rule.len())
        .collect::<Vec<_>>()
        .par_chunks(CHUNK)
        .map(|idx| {
            let mut acc = vec![Float::new(prec); monomials.len()];
            let mut vals = vec![Float::new(prec); monomials.len()];
            for &i in idx {
                let x = &rule.nodes[i * d..(i + 1) * d];
                let base = rule.weights[i] * values[i];
                for (m, &(parent, axis)) in parents.iter().enumerate() {
                    let v = if parent == usize::MAX {
                        Float::with_val(prec, base)
                    } else {
                        Float::with_val(prec, &vals[parent] * x[axis])
                    };
                    acc[m] += &v;
                    vals[m] = v;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![Float::new(prec); monomials.len()];
    for chunk in chunks {
        for (t, c) in total.iter_mut().zip(chunk) {
            *t += c;
        }
    }
    total
}

fn check_rule(b: &OrthoBasis, rule: &BallRule, margin: usize) -> Result<()> {
    if b.weight() != rule.weight() {
        return Err(Error::WeightMismatch(format!(
            "basis {} vs rule {}",
            b.weight(),
            rule.weight()
        )));
    }
    let required = 2 * b.max_degree() + margin;
    if rule.exactness() < required {
        return Err(Error::InsufficientExactness {
            available: rule.exactness(),
            required,
        });
    }
    Ok(())
}

/// `⟨f, e⟩_α` by quadrature for every basis element.
pub fn project_function(b: &OrthoBasis, f: &dyn BallFunction, rule: &BallRule, margin: usize) -> Result<Expansion> {
    if f.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: b.dim(),
            found: f.dim(),
        });
    }
    project_values(b, &rule.values(f), rule, margin)
}

/// As [`project_function`] from precomputed node values.
pub fn project_values(b: &OrthoBasis, values: &[f64], rule: &BallRule, margin: usize) -> Result<Expansion> {
    check_rule(b, rule, margin)?;
    if values.len() != rule.len() {
        return Err(Error::DimensionMismatch {
            expected: rule.len(),
            found: values.len(),
        });
    }
    let mu = quadrature_moments(b.space(), rule, values);
    Ok(b.expand_moments(&mu))
}
