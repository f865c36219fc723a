//! Functions on the ball supplied as evaluation callbacks, optionally with
//! an analytic derivative oracle.

use crate::error::{Error, Result};
use crate::polyalg::{monomials_up_to, Polynomial};

/// A real function on `B^d`.
///
/// `derivatives(x, r)` returns `∂^γ f(x)` for every `|γ| ≤ r`, ordered like
/// [`monomials_up_to`]`(d, r)`. Index 0 is the value itself.
pub trait BallFunction: Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// Highest order the derivative oracle supports.
    fn derivative_order(&self) -> usize {
        0
    }

    fn derivatives(&self, x: &[f64], order: usize) -> Result<Vec<f64>> {
        if order == 0 {
            return Ok(vec![self.value(x)]);
        }
        Err(Error::MissingDerivative {
            requested: order,
            available: self.derivative_order(),
        })
    }

    fn name(&self) -> String {
        "f".into()
    }
}

pub(crate) fn check_order(f: &(impl BallFunction + ?Sized), order: usize) -> Result<()> {
    if order > f.derivative_order() {
        return Err(Error::MissingDerivative {
            requested: order,
            available: f.derivative_order(),
        });
    }
    Ok(())
}

/// Value-only function from a closure.
pub struct FnFunction<F> {
    dim: usize,
    name: String,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnFunction<F> {
    pub fn new(dim: usize, name: impl Into<String>, f: F) -> Self {
        Self {
            dim,
            name: name.into(),
            f,
        }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> BallFunction for FnFunction<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn name(&self) -> String {
        self.name.clone()
    }
}

/// A polynomial with exact derivatives up to a fixed order.
#[derive(Clone, Debug)]
pub struct PolyFunction {
    poly: Polynomial,
    order: usize,
    partials: Vec<Polynomial>,
}

impl PolyFunction {
    pub fn new(poly: Polynomial, order: usize) -> Self {
        let partials = monomials_up_to(poly.dim(), order as u32)
            .iter()
            .map(|g| poly.partial(g).expect("same dimension"))
            .collect();
        Self { poly, order, partials }
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.poly
    }
}

impl BallFunction for PolyFunction {
    fn dim(&self) -> usize {
        self.poly.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.poly.eval_f64(x).expect("point dimension")
    }

    fn derivative_order(&self) -> usize {
        self.order
    }

    fn derivatives(&self, x: &[f64], order: usize) -> Result<Vec<f64>> {
        check_order(self, order)?;
        let n = crate::polyalg::count_up_to(self.dim(), order as u32);
        self.partials[..n].iter().map(|p| p.eval_f64(x)).collect()
    }

    fn name(&self) -> String {
        format!("polynomial(deg {})", self.poly.degree())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::MultiIndex;

    #[test]
    fn polynomial_derivatives_in_graded_order() {
        // x₁² x₂
        let p = Polynomial::monomial(MultiIndex::new(&[2, 1]).unwrap(), 64, 1.0);
        let f = PolyFunction::new(p, 2);
        let v = f.derivatives(&[0.5, -0.5], 2).unwrap();
        // 1, x₂, x₁, x₂², x₁x₂, x₁²
        assert_eq!(v, vec![-0.125, 0.25, -0.5, 0.0, 1.0, -1.0]);
        assert!(matches!(
            f.derivatives(&[0.0, 0.0], 3),
            Err(Error::MissingDerivative {
                requested: 3,
                available: 2
            })
        ));
    }

    #[test]
    fn closures_have_no_derivatives() {
        let f = FnFunction::new(1, "cube", |x: &[f64]| x[0].powi(3));
        assert_eq!(f.value(&[2.0]), 8.0);
        assert_eq!(f.derivatives(&[2.0], 0).unwrap(), vec![8.0]);
        assert!(f.derivatives(&[2.0], 1).is_err());
    }
}
