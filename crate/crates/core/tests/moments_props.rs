mod common;

use ballproj::moments::{MomentTable, WeightParam, WeightedInner};
use ballproj::polyalg::Polynomial;
use common::*;
use proptest::prelude::*;
use rug::Float;

const TOL: f64 = 1e-60;

fn table(d: usize, alpha: f64) -> MomentTable {
    MomentTable::new(WeightParam::new(d, alpha).unwrap(), PREC)
}

fn alphas() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![-0.5, 0.0, 1.0, 2.5])
}

fn close(a: &Float, b: &Float, scale: f64) -> bool {
    Float::with_val(PREC, a - b).abs().to_f64() <= TOL * scale.max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn inner_is_symmetric_bilinear_and_positive(
        (d, p, q, u) in (1usize..=3).prop_flat_map(|d| (Just(d), poly(d, 6), poly(d, 6), poly(d, 6))),
        alpha in alphas(),
        a in dyadic(),
        b in dyadic(),
    ) {
        let t = table(d, alpha);
        let pq = t.inner(&p, &q).unwrap();
        prop_assert!(close(&pq, &t.inner(&q, &p).unwrap(), pq.to_f64().abs()));
        let lhs = t.inner(&(&p.scale_f64(a) + &q.scale_f64(b)), &u).unwrap();
        let rhs = Float::with_val(PREC, t.inner(&p, &u).unwrap() * a) + Float::with_val(PREC, t.inner(&q, &u).unwrap() * b);
        prop_assert!(close(&lhs, &rhs, rhs.to_f64().abs()));
        let pp = t.inner(&p, &p).unwrap();
        prop_assert!(pp >= 0);
        prop_assert_eq!(pp.is_zero(), p.is_zero());
    }

    #[test]
    fn larger_alpha_gives_smaller_norm((d, p) in (1usize..=3).prop_flat_map(|d| (Just(d), poly(d, 6))), alpha in alphas()) {
        let lo = table(d, alpha).norm_squared(&p).unwrap();
        let hi = table(d, alpha + 1.0).norm_squared(&p).unwrap();
        prop_assert!(hi <= lo, "{} > {}", hi.to_f64(), lo.to_f64());
    }

    #[test]
    fn raising_operator_is_the_adjoint_of_differentiation(
        (d, p, q) in (1usize..=3).prop_flat_map(|d| (Just(d), poly(d, 6), poly(d, 6))),
        alpha in alphas(),
        axis in 0usize..3,
    ) {
        let j = axis % d;
        let lhs = table(d, alpha + 1.0).inner(&p.partial_axis(j), &q).unwrap();
        let rhs = table(d, alpha).inner(&p, &q.raise(alpha, j).unwrap()).unwrap();
        let scale = table(d, alpha).norm(&p).unwrap().to_f64() * table(d, alpha).norm(&q.raise(alpha, j).unwrap()).unwrap().to_f64();
        prop_assert!(close(&lhs, &rhs, scale), "{} vs {}", lhs.to_f64(), rhs.to_f64());
    }

    #[test]
    fn even_and_odd_parts_are_orthogonal(
        (d, p, q) in (1usize..=3).prop_flat_map(|d| (Just(d), parity_poly(d, 7, 0), parity_poly(d, 7, 1))),
        alpha in alphas(),
    ) {
        prop_assert!(table(d, alpha).inner(&p, &q).unwrap().is_zero());
    }
}

#[test]
fn shifted_weight_factor_on_the_interval() {
    // x lies in the degree-1 space for both weights; ‖x‖²₀ = 2/3, ‖x‖²₁ = 4/15
    let x = Polynomial::variable(1, 0, PREC);
    let n0 = table(1, 0.0).norm_squared(&x).unwrap();
    let n1 = table(1, 1.0).norm_squared(&x).unwrap();
    assert!((n0.to_f64() - 2.0 / 3.0).abs() < 1e-15);
    assert!((n1.to_f64() - 4.0 / 15.0).abs() < 1e-15);
    // factor (k + d/2)/(α + 1) + 1 at k = 1, d = 1, α = 0
    let ratio = Float::with_val(PREC, &n0 / &n1);
    assert!((ratio.to_f64() - 2.5).abs() < 1e-15);
}
