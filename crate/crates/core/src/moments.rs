//! Weighted monomial moments over the unit ball and the inner products
//! they induce.
//!
//! For `γ = 2β` (every exponent even)
//!
//! ```text
//! ∫_{B^d} x^γ (1 − ‖x‖²)^α dx = Γ(α+1) Π_i Γ(β_i + 1/2) / Γ(|β| + d/2 + α + 1)
//! ```
//!
//! and the moment vanishes when any exponent is odd. The table evaluates
//! this as the total mass `Γ(α+1) π^{d/2} / Γ(d/2 + α + 1)` times the
//! Pochhammer ratio `Π_i (1/2)_{β_i} / (d/2 + α + 1)_{|β|}`, so only two
//! gamma values are ever needed and nothing overflows.

use std::collections::HashMap;
use std::sync::RwLock;

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::polyalg::{check_alpha, MultiIndex, Polynomial, MAX_DIM};

/// Guard bits used when evaluating gamma functions.
const GUARD_BITS: u32 = 32;

/// Dimension and exponent of the Gegenbauer-type weight `(1 − ‖x‖²)^α`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeightParam {
    d: usize,
    alpha: f64,
}

impl WeightParam {
    pub fn new(d: usize, alpha: f64) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&d) {
            return Err(Error::UnsupportedDimension(d));
        }
        check_alpha(alpha)?;
        Ok(Self { d, alpha })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The same dimension with `α + 1`.
    pub fn shifted(&self) -> Self {
        Self {
            d: self.d,
            alpha: self.alpha + 1.0,
        }
    }
}

impl std::fmt::Display for WeightParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "d={} alpha={}", self.d, self.alpha)
    }
}

/// Anything that can evaluate the weighted `L²_α` inner product of polynomials.
pub trait WeightedInner {
    fn weight(&self) -> WeightParam;

    fn inner(&self, p: &Polynomial, q: &Polynomial) -> Result<Float>;

    fn norm_squared(&self, p: &Polynomial) -> Result<Float> {
        let v = self.inner(p, p)?;
        Ok(if v.is_sign_negative() { Float::new(v.prec()) } else { v })
    }

    fn norm(&self, p: &Polynomial) -> Result<Float> {
        Ok(self.norm_squared(p)?.sqrt())
    }
}

/// `∫_{B^d} W_α`, the measure of the ball under the weight.
pub fn total_mass(w: WeightParam, prec: u32) -> Float {
    let g = prec + GUARD_BITS;
    let half_d = w.d as f64 / 2.0;
    let num = Float::with_val(g, w.alpha + 1.0).gamma();
    let den = Float::with_val(g, half_d + w.alpha + 1.0).gamma();
    let pi = Float::with_val(g, Constant::Pi);
    let pi_pow = if w.d.is_multiple_of(2) {
        Float::with_val(g, pi.pow(w.d as u32 / 2))
    } else {
        Float::with_val(g, pi.pow(w.d as u32)).sqrt()
    };
    Float::with_val(prec, num * pi_pow / den)
}

fn moment_ratio(w: WeightParam, index: &MultiIndex, prec: u32) -> Float {
    let g = prec + GUARD_BITS;
    let mut num = Float::with_val(g, 1);
    let mut half_order = 0u32;
    for e in index.exponents() {
        let beta = e / 2;
        half_order += beta;
        for t in 0..beta {
            num *= t as f64 + 0.5;
        }
    }
    let shift = Float::with_val(g, w.d as f64 / 2.0 + w.alpha + 1.0);
    let mut den = Float::with_val(g, 1);
    for t in 0..half_order {
        den *= Float::with_val(g, &shift + t);
    }
    Float::with_val(prec, num / den)
}

fn check_dim(w: WeightParam, index: &MultiIndex) -> Result<()> {
    if index.dim() != w.d {
        return Err(Error::DimensionMismatch {
            expected: w.d,
            found: index.dim(),
        });
    }
    Ok(())
}

/// `∫_{B^d} x^γ W_α dx`, uncached.
pub fn monomial_moment(w: WeightParam, index: &MultiIndex, prec: u32) -> Result<Float> {
    check_dim(w, index)?;
    if !index.is_all_even() {
        return Ok(Float::new(prec));
    }
    Ok(total_mass(w, prec) * moment_ratio(w, index, prec))
}

/// Memoized moments for one `(d, α)` at a fixed precision.
///
/// Reads share a lock; inserts take it exclusively.
#[derive(Debug)]
pub struct MomentTable {
    weight: WeightParam,
    prec: u32,
    mass: Float,
    cache: RwLock<HashMap<MultiIndex, Float>>,
}

impl MomentTable {
    pub fn new(weight: WeightParam, prec: u32) -> Self {
        Self {
            weight,
            prec,
            mass: total_mass(weight, prec),
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn total_mass(&self) -> &Float {
        &self.mass
    }

    pub fn moment(&self, index: &MultiIndex) -> Result<Float> {
        check_dim(self.weight, index)?;
        if !index.is_all_even() {
            return Ok(Float::new(self.prec));
        }
        if let Some(v) = self.cache.read().expect("moment cache poisoned").get(index) {
            return Ok(v.clone());
        }
        let v = Float::with_val(self.prec, &self.mass * moment_ratio(self.weight, index, self.prec));
        self.cache
            .write()
            .expect("moment cache poisoned")
            .insert(*index, v.clone());
        Ok(v)
    }

    /// Gram matrix `[⟨x^{γ_a}, x^{γ_b}⟩_α]` of the listed monomials.
    pub fn gram_block(&self, monomials: &[MultiIndex]) -> Result<Vec<Vec<Float>>> {
        let n = monomials.len();
        let mut g = vec![vec![Float::new(self.prec); n]; n];
        for a in 0..n {
            for b in a..n {
                let v = self.moment(&monomials[a].add(&monomials[b]))?;
                g[b][a].clone_from(&v);
                g[a][b] = v;
            }
        }
        Ok(g)
    }
}

impl WeightedInner for MomentTable {
    fn weight(&self) -> WeightParam {
        self.weight
    }

    /// `Σ c_γ(p) c_δ(q) m(γ + δ)`, skipping pairs whose parity classes differ.
    fn inner(&self, p: &Polynomial, q: &Polynomial) -> Result<Float> {
        for poly in [p, q] {
            if poly.dim() != self.weight.d {
                return Err(Error::DimensionMismatch {
                    expected: self.weight.d,
                    found: poly.dim(),
                });
            }
        }
        let mut q_by_class: Vec<Vec<(&MultiIndex, &Float)>> = vec![Vec::new(); 1 << self.weight.d];
        for (m, c) in q.terms() {
            q_by_class[m.parity_class()].push((m, c));
        }
        let mut acc = Float::new(self.prec);
        let mut t = Float::new(self.prec);
        for (a, ca) in p.terms() {
            for (b, cb) in &q_by_class[a.parity_class()] {
                let m = self.moment(&a.add(b))?;
                t.clone_from(ca);
                t *= *cb;
                t *= &m;
                acc += &t;
            }
        }
        Ok(acc)
    }
}

/// `⟨p, q⟩_α` at the larger of the two operand precisions.
pub fn inner(w: WeightParam, p: &Polynomial, q: &Polynomial) -> Result<Float> {
    MomentTable::new(w, p.precision().max(q.precision())).inner(p, q)
}

/// Gram matrix of the listed monomials under `⟨·,·⟩_α`.
pub fn gram_block(w: WeightParam, monomials: &[MultiIndex], prec: u32) -> Result<Vec<Vec<Float>>> {
    MomentTable::new(w, prec).gram_block(monomials)
}
