//! The test-function library: boundary-singular powers of `1 − ‖x‖²`,
//! an exponential ridge and an even/odd trigonometric ridge pair.

use std::sync::Arc;

use log::info;
use serde::{Deserialize, Serialize};

use super::jet::{Jet, JetSpace};
use crate::error::{Error, Result};
use crate::function::{check_order, BallFunction};
use crate::moments::WeightParam;
use crate::polyalg::count_up_to;
use crate::quadrature::BallRule;
use crate::sobolev::hnorm_function;

/// Analytic families, as written in experiment configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `(1 − ‖x‖²)^s`.
    Boundary { s: f64 },
    /// `exp(a·x)`; `a` defaults to all ones.
    Exp {
        #[serde(default)]
        a: Option<Vec<f64>>,
    },
    /// `cos(a·x)`, even.
    Cos {
        #[serde(default)]
        a: Option<Vec<f64>>,
    },
    /// `sin(a·x)`, odd.
    Sin {
        #[serde(default)]
        a: Option<Vec<f64>>,
    },
}

/// Largest `l` with `f ∈ H^l_α`, or membership for every `l`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regularity {
    Finite { l: usize, justification: String },
    Smooth { justification: String },
}

impl Regularity {
    pub fn finite_order(&self) -> Option<usize> {
        match self {
            Regularity::Finite { l, .. } => Some(*l),
            Regularity::Smooth { .. } => None,
        }
    }
}

/// A family member on `B^d` with a jet-based derivative oracle.
#[derive(Clone, Debug)]
pub struct TestFunction {
    family: Family,
    dim: usize,
    direction: Vec<f64>,
    space: Arc<JetSpace>,
}

impl TestFunction {
    /// `order` caps the derivative oracle.
    pub fn new(family: Family, dim: usize, order: usize) -> Result<Self> {
        let direction = match &family {
            Family::Boundary { s } => {
                if !s.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "boundary exponent must be finite, got {s}"
                    )));
                }
                Vec::new()
            }
            Family::Exp { a } | Family::Cos { a } | Family::Sin { a } => {
                let a = a.clone().unwrap_or_else(|| vec![1.0; dim]);
                if a.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: a.len(),
                    });
                }
                a
            }
        };
        Ok(Self {
            family,
            dim,
            direction,
            space: JetSpace::new(dim, order),
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Membership order in `H^l_α`.
    ///
    /// `∂^l (1 − ‖x‖²)^s` behaves like `(1 − ‖x‖²)^{s − l}` at the boundary,
    /// so `|f|²_{H^l_α}` is finite iff `2(s − l) + α > −1`, i.e.
    /// `l < s + (α + 1)/2`. An integer threshold is excluded.
    pub fn regularity(&self, alpha: f64) -> Result<Regularity> {
        match self.family {
            Family::Boundary { s } => {
                let t = s + (alpha + 1.0) / 2.0;
                if t <= 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "(1-|x|^2)^{s} is not in L^2 for alpha = {alpha}"
                    )));
                }
                let nearest = t.round();
                let (l, justification) = if (t - nearest).abs() < 1e-9 {
                    let l = nearest as usize - 1;
                    info!("threshold s + (alpha+1)/2 = {t} is an integer; taking the smaller order l = {l}");
                    (
                        l,
                        format!("l < s + (alpha+1)/2 = {t} (integer threshold, resolved conservatively)"),
                    )
                } else {
                    (t.floor() as usize, format!("l < s + (alpha+1)/2 = {t}"))
                };
                Ok(Regularity::Finite { l, justification })
            }
            _ => Ok(Regularity::Smooth {
                justification: "entire function".into(),
            }),
        }
    }

    fn jet(&self, x: &[f64]) -> Jet {
        let r = self.space.order();
        match self.family {
            Family::Boundary { s } => {
                let om = Jet::omega(&self.space, x);
                let rho = om.value();
                let mut g = Vec::with_capacity(r + 1);
                let mut falling = 1.0;
                for m in 0..=r {
                    g.push(falling * rho.powf(s - m as f64));
                    falling *= s - m as f64;
                }
                om.compose(&g)
            }
            Family::Exp { .. } => {
                let lin = Jet::affine(&self.space, &self.direction, 0.0, x);
                let v = lin.value().exp();
                lin.compose(&vec![v; r + 1])
            }
            Family::Cos { .. } | Family::Sin { .. } => {
                let lin = Jet::affine(&self.space, &self.direction, 0.0, x);
                let t = lin.value();
                let shift = if matches!(self.family, Family::Sin { .. }) {
                    -1
                } else {
                    0
                };
                // cos^{(m)}(t) = cos(t + mπ/2); sin = cos(· − π/2)
                let g: Vec<f64> = (0..=r as i32)
                    .map(|m| match (m + shift).rem_euclid(4) {
                        0 => t.cos(),
                        1 => -t.sin(),
                        2 => -t.cos(),
                        _ => t.sin(),
                    })
                    .collect();
                lin.compose(&g)
            }
        }
    }
}

impl BallFunction for TestFunction {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        let t: f64 = self.direction.iter().zip(x).map(|(a, xi)| a * xi).sum();
        match self.family {
            Family::Boundary { s } => (1.0 - x.iter().map(|v| v * v).sum::<f64>()).powf(s),
            Family::Exp { .. } => t.exp(),
            Family::Cos { .. } => t.cos(),
            Family::Sin { .. } => t.sin(),
        }
    }

    fn derivative_order(&self) -> usize {
        self.space.order()
    }

    fn derivatives(&self, x: &[f64], order: usize) -> Result<Vec<f64>> {
        check_order(self, order)?;
        Ok(self.jet(x).derivatives_prefix(count_up_to(self.dim, order as u32)))
    }

    fn name(&self) -> String {
        let dir = |a: &[f64]| a.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(",");
        match &self.family {
            Family::Boundary { s } => format!("boundary_s{s}"),
            Family::Exp { .. } => format!("exp[{}]", dir(&self.direction)),
            Family::Cos { .. } => format!("cos[{}]", dir(&self.direction)),
            Family::Sin { .. } => format!("sin[{}]", dir(&self.direction)),
        }
    }
}

/// Seminorm values under successively doubled quadrature exactness.
#[derive(Clone, Debug, Serialize)]
pub struct IntegrabilityReport {
    pub order: usize,
    pub exactness: Vec<usize>,
    pub seminorm_squared: Vec<f64>,
    pub converges: bool,
}

const REFINEMENTS: usize = 5;
const BASE_EXACTNESS: usize = 8;
const SETTLING_RATIO: f64 = 0.75;

/// Numerical integrability oracle for `|f|²_{H^k_α}`.
///
/// A finite seminorm settles under refinement: successive increments shrink
/// geometrically or fall below `1e-10` relative. A divergent one keeps
/// growing by comparable (logarithmic blow-up) or increasing amounts.
pub fn integrability(f: &dyn BallFunction, w: WeightParam, k: usize) -> Result<IntegrabilityReport> {
    check_order(f, k)?;
    let max_exp = if w.dim() >= 3 {
        BASE_EXACTNESS << (REFINEMENTS - 2)
    } else {
        BASE_EXACTNESS << (REFINEMENTS - 1)
    };
    let mut exactness = Vec::new();
    let mut values = Vec::new();
    let mut e = BASE_EXACTNESS;
    while e <= max_exp {
        let rule = BallRule::build(w, e)?;
        let rep = hnorm_function(w, f, k, &rule)?;
        exactness.push(e);
        values.push(rep.seminorms[k] * rep.seminorms[k]);
        e *= 2;
    }
    let n = values.len();
    let inc = |i: usize| (values[i] - values[i - 1]).abs();
    let last = inc(n - 1);
    let prev = inc(n - 2);
    let converges = last <= 1e-10 * values[n - 1].abs().max(f64::MIN_POSITIVE) || last <= SETTLING_RATIO * prev;
    Ok(IntegrabilityReport {
        order: k,
        exactness,
        seminorm_squared: values,
        converges,
    })
}

/// Confirms `|f|_{H^l_α}` finite and `|f|_{H^{l+1}_α}` divergent.
pub fn validate_regularity(
    f: &TestFunction,
    w: WeightParam,
) -> Result<(IntegrabilityReport, IntegrabilityReport, bool)> {
    let l = match f.regularity(w.alpha())? {
        Regularity::Finite { l, .. } => l,
        Regularity::Smooth { .. } => {
            return Err(Error::InvalidArgument(
                "smooth functions have no finite regularity to validate".into(),
            ))
        }
    };
    let at = integrability(f, w, l)?;
    let above = integrability(f, w, l + 1)?;
    let ok = at.converges && !above.converges;
    Ok((at, above, ok))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regularity_orders() {
        let f = TestFunction::new(Family::Boundary { s: 2.5 }, 1, 2).unwrap();
        assert_eq!(f.regularity(0.0).unwrap().finite_order(), Some(2));
        assert_eq!(f.regularity(1.0).unwrap().finite_order(), Some(3));
        assert_eq!(f.regularity(-0.5).unwrap().finite_order(), Some(2));
        let g = TestFunction::new(Family::Exp { a: None }, 2, 2).unwrap();
        assert_eq!(g.regularity(0.0).unwrap().finite_order(), None);
    }

    #[test]
    fn parity_pair_derivatives() {
        let c = TestFunction::new(
            Family::Cos {
                a: Some(vec![1.0, 2.0]),
            },
            2,
            2,
        )
        .unwrap();
        let s = TestFunction::new(
            Family::Sin {
                a: Some(vec![1.0, 2.0]),
            },
            2,
            2,
        )
        .unwrap();
        let x = [0.3, -0.2];
        let t: f64 = 0.3 - 0.4;
        let dc = c.derivatives(&x, 2).unwrap();
        let ds = s.derivatives(&x, 2).unwrap();
        // order: 1, x₂, x₁, x₂², x₁x₂, x₁²
        let want_c = [
            t.cos(),
            -2.0 * t.sin(),
            -t.sin(),
            -4.0 * t.cos(),
            -2.0 * t.cos(),
            -t.cos(),
        ];
        let want_s = [
            t.sin(),
            2.0 * t.cos(),
            t.cos(),
            -4.0 * t.sin(),
            -2.0 * t.sin(),
            -t.sin(),
        ];
        for i in 0..6 {
            assert!((dc[i] - want_c[i]).abs() < 1e-14);
            assert!((ds[i] - want_s[i]).abs() < 1e-14);
        }
        assert_eq!(c.value(&[-0.3, 0.2]), c.value(&x));
        assert_eq!(s.value(&[-0.3, 0.2]), -s.value(&x));
    }

    #[test]
    fn boundary_membership_is_confirmed_numerically() {
        for (d, alpha) in [(1, 0.0), (1, 1.0), (2, 0.0)] {
            let w = WeightParam::new(d, alpha).unwrap();
            let f = TestFunction::new(Family::Boundary { s: 2.5 }, d, 4).unwrap();
            let (at, above, ok) = validate_regularity(&f, w).unwrap();
            assert!(ok, "d={d} alpha={alpha}: {at:?} {above:?}");
        }
    }
}
