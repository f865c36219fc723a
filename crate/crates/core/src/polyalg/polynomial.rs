use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use rug::Float;

use super::multi_index::{MultiIndex, MAX_DIM};
use crate::error::{Error, Result};

/// Real `d`-variate polynomial with multiprecision coefficients.
///
/// Coefficients are kept in a graded-lex ordered map with no stored zeros,
/// so the degree is the order of the last key. All coefficients share the
/// polynomial's working precision; binary operations use the larger of the
/// two operand precisions.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    dim: usize,
    prec: u32,
    terms: BTreeMap<MultiIndex, Float>,
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > -1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

impl Polynomial {
    pub fn zero(dim: usize, prec: u32) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        Self {
            dim,
            prec,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, prec: u32, c: f64) -> Self {
        Self::monomial(MultiIndex::zero(dim), prec, c)
    }

    pub fn monomial(index: MultiIndex, prec: u32, c: f64) -> Self {
        let mut p = Self::zero(index.dim(), prec);
        p.add_term(index, &Float::with_val(prec, c));
        p
    }

    /// The coordinate function `x_axis`.
    pub fn variable(dim: usize, axis: usize, prec: u32) -> Self {
        Self::monomial(MultiIndex::unit(dim, axis), prec, 1.0)
    }

    pub fn from_terms<I>(dim: usize, prec: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Float)>,
    {
        let mut p = Self::zero(dim, prec);
        for (index, c) in terms {
            if index.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: index.dim(),
                });
            }
            p.add_term(index, &c);
        }
        Ok(p)
    }

    pub fn from_f64_terms<I>(dim: usize, prec: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, f64)>,
    {
        Self::from_terms(dim, prec, terms.into_iter().map(|(m, c)| (m, Float::with_val(prec, c))))
    }

    /// Adds `c·x^index`, dropping the entry if it cancels to zero.
    pub fn add_term(&mut self, index: MultiIndex, c: &Float) {
        debug_assert_eq!(index.dim(), self.dim);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(index) {
            Entry::Vacant(slot) => {
                slot.insert(Float::with_val(self.prec, c));
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// Total degree; `-1` for the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.terms.keys().next_back().map_or(-1, |m| m.order() as i64)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&MultiIndex, &Float)> + '_ {
        self.terms.iter()
    }

    pub fn coeff(&self, index: &MultiIndex) -> Option<&Float> {
        self.terms.get(index)
    }

    pub fn coeff_f64(&self, index: &MultiIndex) -> f64 {
        self.coeff(index).map_or(0.0, Float::to_f64)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }

    pub fn with_precision(&self, prec: u32) -> Self {
        Self {
            dim: self.dim,
            prec,
            terms: self.terms.iter().map(|(m, c)| (*m, Float::with_val(prec, c))).collect(),
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// `Σ_γ c_γ x^γ` evaluated at the working precision.
    pub fn eval(&self, x: &[f64]) -> Result<Float> {
        self.check_point(x)?;
        let deg = self.degree().max(0) as usize;
        let powers: Vec<Vec<Float>> = x
            .iter()
            .map(|&xi| {
                let xi = Float::with_val(self.prec, xi);
                let mut row = Vec::with_capacity(deg + 1);
                row.push(Float::with_val(self.prec, 1));
                for e in 1..=deg {
                    let next = Float::with_val(self.prec, &row[e - 1] * &xi);
                    row.push(next);
                }
                row
            })
            .collect();
        let mut acc = Float::new(self.prec);
        let mut term = Float::new(self.prec);
        for (m, c) in &self.terms {
            term.clone_from(c);
            for (axis, e) in m.exponents().enumerate() {
                if e > 0 {
                    term *= &powers[axis][e as usize];
                }
            }
            acc += &term;
        }
        Ok(acc)
    }

    pub fn eval_f64(&self, x: &[f64]) -> Result<f64> {
        self.eval(x).map(|v| v.to_f64())
    }

    pub fn scale(&self, s: &Float) -> Self {
        let mut out = Self::zero(self.dim, self.prec.max(s.prec()));
        if s.is_zero() {
            return out;
        }
        for (m, c) in &self.terms {
            let v = Float::with_val(out.prec, c * s);
            out.terms.insert(*m, v);
        }
        out
    }

    pub fn scale_f64(&self, s: f64) -> Self {
        self.scale(&Float::with_val(self.prec, s))
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, other: &Self, s: &Float) -> Self {
        assert_eq!(self.dim, other.dim, "polynomial dimensions differ");
        let mut out = self.with_precision(self.prec.max(other.prec));
        let mut t = Float::new(out.prec);
        for (m, c) in &other.terms {
            t.assign_mul(c, s);
            out.add_term(*m, &t);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "polynomial dimensions differ");
        let prec = self.prec.max(other.prec);
        let mut out = Self::zero(self.dim, prec);
        let mut t = Float::new(prec);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                t.assign_mul(ca, cb);
                out.add_term(a.add(b), &t);
            }
        }
        out
    }

    /// `x_axis · p`.
    pub fn mul_axis(&self, axis: usize) -> Self {
        assert!(axis < self.dim, "axis out of range");
        Self {
            dim: self.dim,
            prec: self.prec,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.with_increment(axis), c.clone()))
                .collect(),
        }
    }

    /// `∂p/∂x_axis`.
    pub fn partial_axis(&self, axis: usize) -> Self {
        assert!(axis < self.dim, "axis out of range");
        let mut out = Self::zero(self.dim, self.prec);
        for (m, c) in &self.terms {
            if let Some(lower) = m.with_decrement(axis) {
                let v = Float::with_val(self.prec, c * m.get(axis));
                out.terms.insert(lower, v);
            }
        }
        out
    }

    /// Mixed partial derivative `∂_γ p`.
    pub fn partial(&self, index: &MultiIndex) -> Result<Self> {
        if index.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: index.dim(),
            });
        }
        let mut out = Self::zero(self.dim, self.prec);
        for (m, c) in &self.terms {
            let Some(lower) = m.checked_sub(index) else {
                continue;
            };
            // falling factorial Π_i γ_i!/(γ_i − δ_i)!
            let mut factor = Float::with_val(self.prec, 1);
            for axis in 0..self.dim {
                let top = m.get(axis);
                for t in 0..index.get(axis) {
                    factor *= top - t;
                }
            }
            factor *= c;
            out.terms.insert(lower, factor);
        }
        Ok(out)
    }

    /// `(1 − ‖x‖²) · p`.
    pub fn multiply_omega(&self) -> Self {
        let mut out = self.clone();
        let minus_one = Float::with_val(self.prec, -1);
        for axis in 0..self.dim {
            out = out.add_scaled(&self.mul_axis(axis).mul_axis(axis), &minus_one);
        }
        out
    }

    /// `x · ∇p`.
    pub fn euler(&self) -> Self {
        let mut out = Self::zero(self.dim, self.prec);
        for (m, c) in &self.terms {
            let order = m.order();
            if order > 0 {
                out.terms.insert(*m, Float::with_val(self.prec, c * order));
            }
        }
        out
    }

    pub fn laplacian(&self) -> Self {
        (0..self.dim).fold(Self::zero(self.dim, self.prec), |acc, axis| {
            &acc + &self.partial_axis(axis).partial_axis(axis)
        })
    }

    /// Angular derivative `D_{i,j} p = x_i ∂_j p − x_j ∂_i p` (axes are 0-based, `i < j`).
    pub fn angular_derivative(&self, i: usize, j: usize) -> Result<Self> {
        if self.dim < 2 {
            return Err(Error::AngularUndefined);
        }
        if i >= j || j >= self.dim {
            return Err(Error::InvalidAxes { i, j, d: self.dim });
        }
        Ok(&self.partial_axis(j).mul_axis(i) - &self.partial_axis(i).mul_axis(j))
    }

    /// Degree-raising operator `d^α_j q = −(1 − ‖x‖²) ∂_j q + 2(α + 1) x_j q`.
    pub fn raise(&self, alpha: f64, axis: usize) -> Result<Self> {
        check_alpha(alpha)?;
        if axis >= self.dim {
            return Err(Error::InvalidAxes {
                i: axis,
                j: axis,
                d: self.dim,
            });
        }
        let two_alpha_plus = Float::with_val(self.prec, 2.0 * (alpha + 1.0));
        let lhs = self.partial_axis(axis).multiply_omega();
        Ok((&self.mul_axis(axis).scale(&two_alpha_plus)) - &lhs)
    }

    /// `−[(1 − ‖x‖²)Δp − 2(α + 1) x·∇p] − Σ_{i<j} D_{i,j}² p`.
    ///
    /// Members of the degree-`k` orthogonal space are eigenfunctions with
    /// eigenvalue `k(k + d + 2α)`.
    pub fn sturm_liouville(&self, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let radial = self
            .laplacian()
            .multiply_omega()
            .add_scaled(&self.euler(), &Float::with_val(self.prec, -2.0 * (alpha + 1.0)));
        let mut out = -&radial;
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                let twice = self.angular_derivative(i, j)?.angular_derivative(i, j)?;
                out = &out - &twice;
            }
        }
        Ok(out)
    }

    /// `Some(0)` if every monomial has even order, `Some(1)` if every one is
    /// odd, `None` for mixed or zero polynomials.
    pub fn parity(&self) -> Option<u32> {
        let mut parities = self.terms.keys().map(|m| m.order() % 2);
        let first = parities.next()?;
        parities.all(|p| p == first).then_some(first)
    }
}

trait AssignMul {
    fn assign_mul(&mut self, a: &Float, b: &Float);
}

impl AssignMul for Float {
    fn assign_mul(&mut self, a: &Float, b: &Float) {
        use rug::Assign;
        self.assign(a * b);
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.dim, rhs.dim, "polynomial dimensions differ");
        let mut out = self.with_precision(self.prec.max(rhs.prec));
        for (m, c) in &rhs.terms {
            out.add_term(*m, c);
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        Polynomial {
            dim: self.dim,
            prec: self.prec,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (*m, Float::with_val(self.prec, -c)))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 128;

    fn mi(e: &[u32]) -> MultiIndex {
        MultiIndex::new(e).unwrap()
    }

    fn poly(dim: usize, terms: &[(&[u32], f64)]) -> Polynomial {
        Polynomial::from_f64_terms(dim, P, terms.iter().map(|(e, c)| (mi(e), *c))).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(
            Polynomial::constant(3, P, 1.0).eval_f64(&[0.3, -0.2, 0.9]).unwrap(),
            1.0
        );
        assert_eq!(poly(2, &[(&[2, 0], 1.0)]).eval_f64(&[0.5, 0.0]).unwrap(), 0.25);
        // 3·1² − 1 = 2
        assert_eq!(poly(1, &[(&[2], 3.0), (&[0], -1.0)]).eval_f64(&[1.0]).unwrap(), 2.0);
        assert!(matches!(
            poly(2, &[(&[1, 0], 1.0)]).eval(&[0.1]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn zero_polynomial_degree_is_minus_one() {
        assert_eq!(Polynomial::zero(2, P).degree(), -1);
        let p = poly(1, &[(&[1], 1.0)]);
        assert_eq!((&p - &p).degree(), -1);
        assert!((&p - &p).is_zero());
    }

    #[test]
    fn partial_examples() {
        let p = poly(2, &[(&[2, 1], 1.0)]);
        assert_eq!(p.partial(&mi(&[1, 1])).unwrap(), poly(2, &[(&[1, 0], 2.0)]));
        let c = Polynomial::constant(2, P, 4.0);
        assert!(c.partial(&mi(&[0, 1])).unwrap().is_zero());
        // x³ differentiated twice by repeated single derivatives is 6x.
        let cube = poly(1, &[(&[3], 1.0)]);
        let repeated = cube.partial_axis(0).partial_axis(0);
        assert_eq!(repeated, poly(1, &[(&[1], 6.0)]));
        assert_eq!(cube.partial(&mi(&[2])).unwrap(), repeated);
    }

    #[test]
    fn multiply_omega_examples() {
        let one = Polynomial::constant(2, P, 1.0);
        assert_eq!(
            one.multiply_omega(),
            poly(2, &[(&[0, 0], 1.0), (&[2, 0], -1.0), (&[0, 2], -1.0)])
        );
        assert!(Polynomial::zero(2, P).multiply_omega().is_zero());
        let x = poly(1, &[(&[1], 1.0)]);
        let expected = x.mul(&poly(1, &[(&[0], 1.0), (&[2], -1.0)]));
        assert_eq!(x.multiply_omega(), expected);
        assert_eq!(expected, poly(1, &[(&[1], 1.0), (&[3], -1.0)]));
    }

    #[test]
    fn angular_derivative_examples() {
        let x1 = Polynomial::variable(2, 0, P);
        let x2 = Polynomial::variable(2, 1, P);
        assert_eq!(x1.angular_derivative(0, 1).unwrap(), -&x2);
        let radial = poly(2, &[(&[2, 0], 1.0), (&[0, 2], 1.0)]);
        assert!(radial.angular_derivative(0, 1).unwrap().is_zero());
        let twice = x1.angular_derivative(0, 1).unwrap().angular_derivative(0, 1).unwrap();
        // composition through raw partials: D(−x₂) = x₁∂₂(−x₂) − x₂∂₁(−x₂) = −x₁
        let via_partials = &(-&x2).partial_axis(1).mul_axis(0) - &(-&x2).partial_axis(0).mul_axis(1);
        assert_eq!(twice, via_partials);
        assert_eq!(twice, -&x1);
    }

    #[test]
    fn angular_derivative_errors() {
        let x = Polynomial::variable(1, 0, P);
        assert!(matches!(x.angular_derivative(0, 1), Err(Error::AngularUndefined)));
        let y = Polynomial::variable(3, 0, P);
        assert!(matches!(y.angular_derivative(1, 1), Err(Error::InvalidAxes { .. })));
        assert!(matches!(y.angular_derivative(2, 1), Err(Error::InvalidAxes { .. })));
        assert!(matches!(y.angular_derivative(0, 3), Err(Error::InvalidAxes { .. })));
    }

    #[test]
    fn raise_examples() {
        let one = Polynomial::constant(3, P, 1.0);
        let raised = one.raise(1.5, 2).unwrap();
        assert_eq!(raised, poly(3, &[(&[0, 0, 1], 5.0)]));
        let x = Polynomial::variable(1, 0, P);
        assert_eq!(x.raise(0.0, 0).unwrap(), poly(1, &[(&[2], 3.0), (&[0], -1.0)]));
        assert!(Polynomial::zero(2, P).raise(0.0, 1).unwrap().is_zero());
        assert!(matches!(one.raise(-1.0, 0), Err(Error::InvalidAlpha(_))));
    }

    #[test]
    fn sturm_liouville_examples() {
        assert!(Polynomial::constant(2, P, 3.0).sturm_liouville(0.7).unwrap().is_zero());
        let x1 = Polynomial::variable(3, 0, P);
        assert_eq!(x1.sturm_liouville(1.0).unwrap(), x1.scale_f64(6.0));
        let legendre2 = poly(1, &[(&[2], 1.5), (&[0], -0.5)]);
        assert_eq!(legendre2.sturm_liouville(0.0).unwrap(), legendre2.scale_f64(6.0));
        assert!(matches!(x1.sturm_liouville(-2.0), Err(Error::InvalidAlpha(_))));
    }
}
