mod common;

use ballproj::polyalg::{MultiIndex, Polynomial};
use common::*;
use proptest::prelude::*;
use rug::Float;

fn combo(a: f64, p: &Polynomial, b: f64, q: &Polynomial) -> Polynomial {
    &p.scale_f64(a) + &q.scale_f64(b)
}

fn assert_same(lhs: &Polynomial, rhs: &Polynomial) -> Result<(), TestCaseError> {
    let diff = lhs - rhs;
    prop_assert!(diff.is_zero(), "difference has max coefficient {}", max_abs(&diff));
    Ok(())
}

/// `(x₁² + … + x_d²)^k`.
fn radial_power(dim: usize, k: u32) -> Polynomial {
    let r2 = (0..dim).fold(Polynomial::zero(dim, PREC), |acc, a| {
        &acc + &Polynomial::variable(dim, a, PREC).mul_axis(a)
    });
    (0..k).fold(Polynomial::constant(dim, PREC, 1.0), |acc, _| acc.mul(&r2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn operators_are_linear(
        (dim, p, q) in (1usize..=3).prop_flat_map(|d| (Just(d), poly(d, 5), poly(d, 5))),
        a in dyadic(),
        b in dyadic(),
        alpha in prop::sample::select(vec![-0.5, 0.0, 1.0, 2.5]),
    ) {
        let pq = combo(a, &p, b, &q);
        for axis in 0..dim {
            assert_same(&pq.partial_axis(axis), &combo(a, &p.partial_axis(axis), b, &q.partial_axis(axis)))?;
            assert_same(&pq.raise(alpha, axis).unwrap(), &combo(a, &p.raise(alpha, axis).unwrap(), b, &q.raise(alpha, axis).unwrap()))?;
        }
        assert_same(&pq.multiply_omega(), &combo(a, &p.multiply_omega(), b, &q.multiply_omega()))?;
        assert_same(&pq.laplacian(), &combo(a, &p.laplacian(), b, &q.laplacian()))?;
        assert_same(
            &pq.sturm_liouville(alpha).unwrap(),
            &combo(a, &p.sturm_liouville(alpha).unwrap(), b, &q.sturm_liouville(alpha).unwrap()),
        )?;
        if dim >= 2 {
            let d01 = |u: &Polynomial| u.angular_derivative(0, 1).unwrap();
            assert_same(&d01(&pq), &combo(a, &d01(&p), b, &d01(&q)))?;
        }
    }

    #[test]
    fn parity_of_evaluation(
        (parity, p, x) in (1usize..=3, 0u32..=1).prop_flat_map(|(d, par)| (Just(par), parity_poly(d, 6, par), point(d))),
    ) {
        let minus: Vec<f64> = x.iter().map(|v| -v).collect();
        let (at, mirrored) = (p.eval(&x).unwrap(), p.eval(&minus).unwrap());
        let expected = if parity == 0 { at.clone() } else { Float::with_val(PREC, -&at) };
        let diff = Float::with_val(PREC, &mirrored - &expected).abs().to_f64();
        prop_assert!(diff <= 1e-60 * (1.0 + at.to_f64().abs()), "{diff}");
    }

    #[test]
    fn degree_raising_operators(
        (dim, p) in (1usize..=3).prop_flat_map(|d| (Just(d), nonzero_poly(d, 6))),
        alpha in prop::sample::select(vec![-0.5, 0.0, 1.0, 2.5]),
        axis in 0usize..3,
    ) {
        prop_assert_eq!(p.multiply_omega().degree(), p.degree() + 2);
        let axis = axis % dim;
        prop_assert_eq!(p.raise(alpha, axis).unwrap().degree(), p.degree() + 1);
    }

    #[test]
    fn angular_derivatives_kill_radial_polynomials(dim in 2usize..=3, coeffs in prop::collection::vec(dyadic(), 1..5)) {
        let g = coeffs.iter().enumerate().fold(Polynomial::zero(dim, PREC), |acc, (k, c)| {
            &acc + &radial_power(dim, k as u32).scale_f64(*c)
        });
        for i in 0..dim {
            for j in i + 1..dim {
                prop_assert!(g.angular_derivative(i, j).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn mixed_partials_commute(p in poly(3, 7), i in 0usize..3, j in 0usize..3) {
        assert_same(&p.partial_axis(i).partial_axis(j), &p.partial_axis(j).partial_axis(i))?;
        let mut e = [0u32; 3];
        e[i] += 1;
        e[j] += 1;
        assert_same(&p.partial(&MultiIndex::new(&e).unwrap()).unwrap(), &p.partial_axis(i).partial_axis(j))?;
    }
}
