//! Truncated multivariate Taylor polynomials, used as exact derivative
//! oracles for the test functions.

use std::collections::HashMap;
use std::sync::Arc;

use crate::polyalg::{monomials_up_to, MultiIndex};

/// Monomial layout and product table for jets of order `r` in `d` variables.
#[derive(Debug)]
pub struct JetSpace {
    dim: usize,
    order: usize,
    monomials: Vec<MultiIndex>,
    /// `(i, j, k)` with `m_i + m_j = m_k`, `|m_k| ≤ r`.
    products: Vec<(usize, usize, usize)>,
}

impl JetSpace {
    pub fn new(dim: usize, order: usize) -> Arc<Self> {
        let monomials = monomials_up_to(dim, order as u32);
        let index: HashMap<MultiIndex, usize> = monomials.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        let mut products = Vec::new();
        for (i, a) in monomials.iter().enumerate() {
            for (j, b) in monomials.iter().enumerate() {
                if let Some(&k) = index.get(&a.add(b)) {
                    products.push((i, j, k));
                }
            }
        }
        Arc::new(Self {
            dim,
            order,
            monomials,
            products,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }
}

/// `Σ_γ c_γ δ^γ` truncated at order `r`, expanded about some base point.
#[derive(Clone, Debug)]
pub struct Jet {
    space: Arc<JetSpace>,
    coeffs: Vec<f64>,
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, c: f64) -> Self {
        let mut coeffs = vec![0.0; space.len()];
        coeffs[0] = c;
        Self {
            space: Arc::clone(space),
            coeffs,
        }
    }

    /// Jet of `x ↦ a·x + c` at `x0`.
    pub fn affine(space: &Arc<JetSpace>, a: &[f64], c: f64, x0: &[f64]) -> Self {
        let mut jet = Self::constant(space, c + a.iter().zip(x0).map(|(ai, xi)| ai * xi).sum::<f64>());
        for (axis, ai) in a.iter().enumerate() {
            if let Some(i) = jet.linear_slot(axis) {
                jet.coeffs[i] = *ai;
            }
        }
        jet
    }

    /// Jet of `x ↦ 1 − ‖x‖²` at `x0`.
    pub fn omega(space: &Arc<JetSpace>, x0: &[f64]) -> Self {
        let a: Vec<f64> = x0.iter().map(|x| -2.0 * x).collect();
        let mut jet = Self::affine(space, &a, 0.0, x0);
        jet.coeffs[0] = 1.0 - x0.iter().map(|x| x * x).sum::<f64>();
        if space.order >= 2 {
            for (i, m) in space.monomials.iter().enumerate() {
                if m.order() == 2 && m.exponents().any(|e| e == 2) {
                    jet.coeffs[i] = -1.0;
                }
            }
        }
        jet
    }

    fn linear_slot(&self, axis: usize) -> Option<usize> {
        if self.space.order == 0 {
            return None;
        }
        self.space
            .monomials
            .iter()
            .position(|m| m.order() == 1 && m.get(axis) == 1)
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut coeffs = vec![0.0; self.space.len()];
        for &(i, j, k) in &self.space.products {
            coeffs[k] += self.coeffs[i] * other.coeffs[j];
        }
        Self {
            space: Arc::clone(&self.space),
            coeffs,
        }
    }

    /// `g ∘ self` from `g^{(m)}(self.value())`, `m = 0..=r`.
    pub fn compose(&self, g_derivs: &[f64]) -> Self {
        let r = self.space.order;
        assert!(g_derivs.len() > r, "need derivatives up to order {r}");
        let mut delta = self.clone();
        delta.coeffs[0] = 0.0;
        let mut factorial = (1..=r).map(|m| m as f64).product::<f64>();
        let mut out = Self::constant(&self.space, g_derivs[r] / factorial);
        for m in (0..r).rev() {
            factorial /= (m + 1) as f64;
            out = out.mul(&delta);
            out.coeffs[0] += g_derivs[m] / factorial;
        }
        out
    }

    /// `∂^γ` at the base point for every `|γ| ≤ r`, in graded-lex order.
    pub fn derivatives(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .zip(&self.space.monomials)
            .map(|(c, m)| c * m.factorial())
            .collect()
    }

    /// The first `count` derivatives (orders `≤ r'` for a smaller `r'`).
    pub fn derivatives_prefix(&self, count: usize) -> Vec<f64> {
        let mut all = self.derivatives();
        all.truncate(count);
        all
    }
}
