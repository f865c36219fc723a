use rug::Float;

use super::OrthoBasis;
use crate::error::{Error, Result};
use crate::moments::WeightedInner;
use crate::polyalg::Polynomial;

/// Bases for `α` and `α + 1` on the same ball.
#[derive(Clone, Copy, Debug)]
pub struct BasisPair<'a> {
    lower: &'a OrthoBasis,
    upper: &'a OrthoBasis,
}

impl<'a> BasisPair<'a> {
    pub fn new(lower: &'a OrthoBasis, upper: &'a OrthoBasis) -> Result<Self> {
        let (wl, wu) = (lower.weight(), upper.weight());
        if wl.dim() != wu.dim() || wu.alpha() != wl.alpha() + 1.0 {
            return Err(Error::WeightMismatch(format!(
                "upper basis must be {} , found {wu}",
                wl.shifted()
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> &'a OrthoBasis {
        self.lower
    }

    pub fn upper(&self) -> &'a OrthoBasis {
        self.upper
    }

    fn check_axis(&self, j: usize) -> Result<()> {
        let d = self.lower.dim();
        if j >= d {
            return Err(Error::InvalidAxes { i: j, j, d });
        }
        Ok(())
    }

    /// `u` must fit the `α` basis and `∂_j u` the `α + 1` basis.
    fn check_commutator_input(&self, u: &Polynomial, j: usize) -> Result<()> {
        self.check_axis(j)?;
        self.lower.space().check_degree(u)?;
        let need = u.degree() - 1;
        if need > self.upper.max_degree() as i64 {
            return Err(Error::DegreeExceedsBasis {
                degree: need,
                max: self.upper.max_degree(),
            });
        }
        Ok(())
    }

    /// `∂_j S^α_n u − S^α_n ∂_j u`, computed literally.
    pub fn commutator_direct(&self, u: &Polynomial, n: i64, j: usize) -> Result<Polynomial> {
        self.check_commutator_input(u, j)?;
        let su = self.lower.truncate(u, n)?;
        let sdu = self.lower.truncate(&u.partial_axis(j), n)?;
        Ok(&su.partial_axis(j) - &sdu)
    }

    /// `proj^{α+1}_{n−1} proj^α_{n+1} ∂_j u − proj^{α+1}_n proj^α_n ∂_j u`.
    pub fn commutator_formula(&self, u: &Polynomial, n: i64, j: usize) -> Result<Polynomial> {
        self.check_commutator_input(u, j)?;
        let du = u.partial_axis(j);
        let a = self.lower.project_component(&du, n + 1)?;
        let b = self.lower.project_component(&du, n)?;
        let first = self.upper.project_component(&a, n - 1)?;
        let second = self.upper.project_component(&b, n)?;
        Ok(&first - &second)
    }

    /// `‖LHS − RHS‖_α` for
    /// `proj^{α+1}_k u = proj^α_k u + proj^{α+1}_k proj^α_{k+2} u − proj^{α+1}_{k−2} proj^α_k u`.
    pub fn id_shift_check(&self, u: &Polynomial, k: i64) -> Result<Float> {
        self.lower.space().check_degree(u)?;
        self.upper.space().check_degree(u)?;
        let lhs = self.upper.project_component(u, k)?;
        let pk = self.lower.project_component(u, k)?;
        let pk2 = self.lower.project_component(u, k + 2)?;
        let rhs = &(&pk + &self.upper.project_component(&pk2, k)?) - &self.upper.project_component(&pk, k - 2)?;
        self.lower.space().norm(&(&lhs - &rhs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{MomentTable, WeightParam};
    use crate::orthospace::{build_basis, BasisOptions};
    use crate::polyalg::MultiIndex;

    fn legendre_pair(n: usize) -> (OrthoBasis, OrthoBasis) {
        let w = WeightParam::new(1, 0.0).unwrap();
        let o = BasisOptions::default();
        (build_basis(w, n, &o).unwrap(), build_basis(w.shifted(), n, &o).unwrap())
    }

    /// Moment-only projector onto `V^α_k` in d = 1: orthogonalize `x^k`
    /// against lower powers by solving the Gram system directly.
    fn oracle_project(alpha: f64, u: &Polynomial, k: i64) -> Polynomial {
        let prec = 256;
        if k < 0 {
            return Polynomial::zero(1, prec);
        }
        let m = MomentTable::new(WeightParam::new(1, alpha).unwrap(), prec);
        let x = |e: u32| Polynomial::monomial(MultiIndex::new(&[e]).unwrap(), prec, 1.0);
        // q = x^k − Σ_{i<k} c_i x^i, with ⟨q, x^j⟩ = 0 for j < k
        let k = k as usize;
        let mut g = nalgebra::DMatrix::<f64>::zeros(k, k);
        let mut rhs = nalgebra::DVector::<f64>::zeros(k);
        for r in 0..k {
            for c in 0..k {
                g[(r, c)] = m.inner(&x(r as u32), &x(c as u32)).unwrap().to_f64();
            }
            rhs[r] = m.inner(&x(k as u32), &x(r as u32)).unwrap().to_f64();
        }
        let c = g.lu().solve(&rhs).unwrap_or_else(|| nalgebra::DVector::zeros(k));
        let mut q = x(k as u32);
        for (i, ci) in c.iter().enumerate() {
            q = &q - &x(i as u32).scale_f64(*ci);
        }
        let s = m.inner(u, &q).unwrap() / m.norm_squared(&q).unwrap();
        q.scale(&s)
    }

    #[test]
    fn commutator_matches_moment_oracle() {
        let (lo, up) = legendre_pair(4);
        let pair = BasisPair::new(&lo, &up).unwrap();
        let u = Polynomial::monomial(MultiIndex::new(&[3]).unwrap(), lo.precision(), 1.0);
        let du = u.partial_axis(0);
        let expect = &oracle_project(1.0, &oracle_project(0.0, &du, 3), 1)
            - &oracle_project(1.0, &oracle_project(0.0, &du, 2), 2);
        let direct = pair.commutator_direct(&u, 2, 0).unwrap();
        let formula = pair.commutator_formula(&u, 2, 0).unwrap();
        assert!((&direct - &expect).max_abs_coeff() < 1e-12);
        assert!((&direct - &formula).max_abs_coeff() < 1e-20);
        assert!(!direct.is_zero());
    }

    #[test]
    fn commutator_trivial_cases() {
        let w = WeightParam::new(2, 0.5).unwrap();
        let o = BasisOptions::default();
        let (lo, up) = (build_basis(w, 5, &o).unwrap(), build_basis(w.shifted(), 5, &o).unwrap());
        let pair = BasisPair::new(&lo, &up).unwrap();
        let u = Polynomial::from_f64_terms(
            2,
            lo.precision(),
            [
                (MultiIndex::new(&[2, 1]).unwrap(), 1.0),
                (MultiIndex::new(&[0, 2]).unwrap(), -2.0),
            ],
        )
        .unwrap();
        for j in 0..2 {
            assert!(pair.commutator_direct(&u, 3, j).unwrap().max_abs_coeff() < 1e-20);
            assert!(pair.commutator_formula(&u, 3, j).unwrap().max_abs_coeff() < 1e-20);
        }
        // even in x₂, ∂₂u = −4x₂ is orthogonal to constants
        let v = Polynomial::from_f64_terms(2, lo.precision(), [(MultiIndex::new(&[0, 2]).unwrap(), -2.0)]).unwrap();
        assert!(pair.commutator_direct(&v, 0, 1).unwrap().max_abs_coeff() < 1e-20);
        assert!(pair.commutator_formula(&v, 0, 1).unwrap().max_abs_coeff() < 1e-20);
        let big = Polynomial::monomial(MultiIndex::new(&[6, 0]).unwrap(), lo.precision(), 1.0);
        assert!(pair.commutator_direct(&big, 1, 0).is_err());
        assert!(pair.commutator_direct(&u, 1, 2).is_err());
    }

    #[test]
    fn id_shift_examples() {
        let (lo, up) = legendre_pair(6);
        let pair = BasisPair::new(&lo, &up).unwrap();
        let one = Polynomial::constant(1, lo.precision(), 1.0);
        for k in 1..5 {
            assert!(pair.id_shift_check(&one, k).unwrap().to_f64() < 1e-20);
        }
        let x4 = Polynomial::monomial(MultiIndex::new(&[4]).unwrap(), lo.precision(), 1.0);
        assert!(pair.id_shift_check(&x4, 2).unwrap().to_f64() < 1e-20);
        for k in 0..=6 {
            for e in lo.block(k) {
                assert!(pair.id_shift_check(&e, k as i64).unwrap().to_f64() < 1e-20);
            }
        }
        let w = WeightParam::new(1, 0.0).unwrap();
        assert!(BasisPair::new(&lo, &lo).is_err());
        assert_eq!(lo.weight(), w);
    }
}
