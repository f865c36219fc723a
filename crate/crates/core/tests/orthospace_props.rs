mod common;

use std::sync::OnceLock;

use ballproj::moments::{WeightParam, WeightedInner};
use ballproj::orthospace::{build_basis, BasisOptions, OrthoBasis};
use ballproj::polyalg::Polynomial;
use common::*;
use proptest::prelude::*;
use rug::Float;

const DEGREE: usize = 7;
const TOL: f64 = 1e-20;

fn basis(d: usize, alpha_index: usize) -> &'static OrthoBasis {
    static CACHE: OnceLock<Vec<OrthoBasis>> = OnceLock::new();
    let all = CACHE.get_or_init(|| {
        let mut v = Vec::new();
        for d in 1..=3 {
            for a in [-0.5, 0.0, 1.0, 2.5] {
                v.push(build_basis(WeightParam::new(d, a).unwrap(), DEGREE, &BasisOptions::default()).unwrap());
            }
        }
        v
    });
    &all[(d - 1) * 4 + alpha_index]
}

fn setup() -> impl Strategy<Value = (usize, usize, Polynomial, Polynomial)> {
    (1usize..=3, 0usize..4).prop_flat_map(|(d, a)| (Just(d), Just(a), poly(d, DEGREE as u32), poly(d, DEGREE as u32)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn truncation_is_parseval_and_best((d, a, u, v) in setup(), n in 0usize..=DEGREE) {
        let b = basis(d, a);
        let ip = b.space();
        let s = b.truncate(&u, n as i64).unwrap();
        let rest = &u - &s;
        let total = ip.norm_squared(&u).unwrap();
        let lhs = ip.norm_squared(&rest).unwrap();
        let rhs = Float::with_val(b.precision(), &total - &ip.norm_squared(&s).unwrap());
        prop_assert!(Float::with_val(b.precision(), &lhs - &rhs).abs().to_f64() <= TOL * total.to_f64().max(1.0));
        // best approximation: any other degree-≤n candidate is no closer
        let other = &s + &b.truncate(&v, n as i64).unwrap().scale_f64(1e-3);
        prop_assert!(ip.norm_squared(&(&u - &other)).unwrap().to_f64() >= lhs.to_f64() * (1.0 - TOL));
    }

    #[test]
    fn projection_is_linear_and_reproduces((d, a, u, v) in setup(), n in 0usize..=DEGREE, x in dyadic(), y in dyadic()) {
        let b = basis(d, a);
        let combo = &u.scale_f64(x) + &v.scale_f64(y);
        let lhs = b.truncate(&combo, n as i64).unwrap();
        let rhs = &b.truncate(&u, n as i64).unwrap().scale_f64(x) + &b.truncate(&v, n as i64).unwrap().scale_f64(y);
        prop_assert!(max_abs(&(&lhs - &rhs)) <= TOL * max_abs(&combo).max(1.0));
        let full = b.truncate(&u, DEGREE as i64).unwrap();
        prop_assert!(max_abs(&(&full - &u)) <= TOL * max_abs(&u).max(1.0));
    }

    #[test]
    fn components_sum_to_truncation((d, a, u, _v) in setup(), n in 0usize..=DEGREE) {
        let b = basis(d, a);
        let sum = (0..=n).fold(Polynomial::zero(d, b.precision()), |acc, k| &acc + &b.project_component(&u, k as i64).unwrap());
        let s = b.truncate(&u, n as i64).unwrap();
        prop_assert!(max_abs(&(&sum - &s)) <= TOL * max_abs(&u).max(1.0));
        prop_assert!(b.project_component(&u, DEGREE as i64 + 1).unwrap().is_zero());
    }
}
