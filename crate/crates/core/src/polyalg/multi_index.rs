use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Largest supported number of variables.
pub const MAX_DIM: usize = 8;

/// Exponent vector of a monomial `x^γ`.
///
/// Ordered graded-lexicographically: first by total order, then
/// lexicographically on the exponents with the first axis most significant.
/// In two variables the degree-2 monomials therefore sort as
/// `x₂² < x₁x₂ < x₁²`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    dim: u8,
    exps: [u16; MAX_DIM],
}

impl MultiIndex {
    pub fn new(exponents: &[u32]) -> Result<Self> {
        let d = exponents.len();
        if d == 0 || d > MAX_DIM {
            return Err(Error::UnsupportedDimension(d));
        }
        let mut exps = [0u16; MAX_DIM];
        for (slot, &e) in exps.iter_mut().zip(exponents) {
            *slot = u16::try_from(e).map_err(|_| Error::InvalidArgument(format!("exponent {e} too large")))?;
        }
        Ok(Self { dim: d as u8, exps })
    }

    /// The multi-index of the constant monomial.
    pub fn zero(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        Self {
            dim: dim as u8,
            exps: [0; MAX_DIM],
        }
    }

    /// `e_axis`, the exponent of `x_axis`.
    pub fn unit(dim: usize, axis: usize) -> Self {
        assert!(axis < dim, "axis {axis} out of range for dimension {dim}");
        let mut m = Self::zero(dim);
        m.exps[axis] = 1;
        m
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn get(&self, axis: usize) -> u32 {
        debug_assert!(axis < self.dim());
        self.exps[axis] as u32
    }

    pub fn exponents(&self) -> impl Iterator<Item = u32> + '_ {
        self.exps[..self.dim()].iter().map(|&e| e as u32)
    }

    /// `|γ|`.
    pub fn order(&self) -> u32 {
        self.exponents().sum()
    }

    pub fn with_increment(&self, axis: usize) -> Self {
        let mut m = *self;
        m.exps[axis] += 1;
        m
    }

    /// `γ − e_axis`, or `None` when that exponent is already zero.
    pub fn with_decrement(&self, axis: usize) -> Option<Self> {
        if self.exps[axis] == 0 {
            return None;
        }
        let mut m = *self;
        m.exps[axis] -= 1;
        Some(m)
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let mut m = *self;
        for i in 0..self.dim() {
            m.exps[i] += other.exps[i];
        }
        m
    }

    /// `γ − δ` when `δ ≤ γ` componentwise.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        debug_assert_eq!(self.dim, other.dim);
        let mut m = *self;
        for i in 0..self.dim() {
            m.exps[i] = self.exps[i].checked_sub(other.exps[i])?;
        }
        Some(m)
    }

    /// Bitmask of the exponents taken mod 2.
    ///
    /// Monomial moments against a reflection-invariant weight vanish unless
    /// `γ + δ` is even in every axis, i.e. unless the two classes agree.
    pub fn parity_class(&self) -> usize {
        self.exponents()
            .enumerate()
            .fold(0, |acc, (i, e)| acc | (((e & 1) as usize) << i))
    }

    pub fn is_all_even(&self) -> bool {
        self.exponents().all(|e| e % 2 == 0)
    }

    /// `|γ|! / (γ₁! ⋯ γ_d!)`.
    pub fn multinomial(&self) -> f64 {
        let mut result = 1.0;
        let mut running = 0u32;
        for e in self.exponents() {
            for t in 1..=e {
                running += 1;
                result *= running as f64 / t as f64;
            }
        }
        result
    }

    /// `γ₁! ⋯ γ_d!`.
    pub fn factorial(&self) -> f64 {
        self.exponents()
            .map(|e| (1..=e).map(|t| t as f64).product::<f64>())
            .product()
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dim
            .cmp(&other.dim)
            .then_with(|| self.order().cmp(&other.order()))
            .then_with(|| self.exps[..self.dim()].cmp(&other.exps[..other.dim()]))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &self.exps[..self.dim()])
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for e in self.exponents() {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{e}")?;
            first = false;
        }
        Ok(())
    }
}

/// Monomials of exact degree `k` in `dim` variables, ascending graded-lex.
pub fn monomials_of_degree(dim: usize, k: u32) -> Vec<MultiIndex> {
    fn fill(prefix: &mut Vec<u32>, remaining_axes: usize, left: u32, out: &mut Vec<MultiIndex>) {
        if remaining_axes == 1 {
            prefix.push(left);
            out.push(MultiIndex::new(prefix).expect("dimension checked by caller"));
            prefix.pop();
            return;
        }
        for e in 0..=left {
            prefix.push(e);
            fill(prefix, remaining_axes - 1, left - e, out);
            prefix.pop();
        }
    }
    assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
    let mut out = Vec::new();
    fill(&mut Vec::with_capacity(dim), dim, k, &mut out);
    out
}

/// Monomials of degree `≤ n`, ascending graded-lex (the natural basis of `Π^d_n`).
pub fn monomials_up_to(dim: usize, n: u32) -> Vec<MultiIndex> {
    (0..=n).flat_map(|k| monomials_of_degree(dim, k)).collect()
}

/// `C(k + d − 1, d − 1)`, the number of monomials of exact degree `k`.
pub fn count_of_degree(dim: usize, k: u32) -> usize {
    binomial(k as usize + dim - 1, dim - 1)
}

/// `C(n + d, d)`, the dimension of `Π^d_n`.
pub fn count_up_to(dim: usize, n: u32) -> usize {
    binomial(n as usize + dim, dim)
}

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}
