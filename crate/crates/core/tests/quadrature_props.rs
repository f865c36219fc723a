mod common;

use ballproj::experiments::{Family, TestFunction};
use ballproj::function::BallFunction;
use ballproj::moments::WeightParam;
use ballproj::orthospace::{build_basis, BasisOptions};
use ballproj::polyalg::MultiIndex;
use ballproj::quadrature::{project_function, BallRule, DEFAULT_MARGIN};
use proptest::prelude::*;

fn smooth_set(d: usize) -> Vec<TestFunction> {
    let a: Vec<f64> = (0..d).map(|i| 0.9 - 0.3 * i as f64).collect();
    [
        Family::Exp { a: None },
        Family::Exp { a: Some(a.clone()) },
        Family::Cos { a: Some(a.clone()) },
        Family::Sin { a: Some(a) },
    ]
    .into_iter()
    .map(|f| TestFunction::new(f, d, 0).unwrap())
    .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rule_reproduces_closed_form_moments(
        d in 1usize..=3,
        alpha in prop::sample::select(vec![-0.5, 0.0, 1.0, 2.5]),
        exps in prop::collection::vec(0u32..=6, 3),
    ) {
        let g = MultiIndex::new(&exps[..d]).unwrap();
        let rule = BallRule::build(WeightParam::new(d, alpha).unwrap(), g.order() as usize).unwrap();
        let (err, scale) = rule.monomial_error(&g).unwrap();
        prop_assert!(err <= 1e-12 * scale, "x^{g}: {err:e} vs {scale:e}");
    }
}

#[test]
fn doubling_nodes_leaves_smooth_integrals_unchanged() {
    for d in 1..=3 {
        for alpha in [-0.5, 0.0, 1.0, 2.5] {
            let w = WeightParam::new(d, alpha).unwrap();
            let coarse = BallRule::build(w, 24).unwrap();
            let fine = BallRule::build(w, 48).unwrap();
            assert!(fine.len() > coarse.len());
            for f in smooth_set(d) {
                let (a, b) = (coarse.integrate_function(&f), fine.integrate_function(&f));
                let scale = fine.integrate(|x| f.value(x).abs());
                assert!((a - b).abs() <= 1e-10 * scale, "{} on {w}: {a} vs {b}", f.name());
            }
        }
    }
}

#[test]
fn bessel_inequality_for_projected_functions() {
    for d in 1..=3 {
        for alpha in [-0.5, 0.0, 1.0, 2.5] {
            let w = WeightParam::new(d, alpha).unwrap();
            let n = 6;
            let b = build_basis(w, n, &BasisOptions::default()).unwrap();
            let rule = BallRule::build(w, 2 * n + DEFAULT_MARGIN).unwrap();
            let mut fs = smooth_set(d);
            fs.push(TestFunction::new(Family::Boundary { s: 0.75 }, d, 0).unwrap());
            for f in fs {
                let e = project_function(&b, &f, &rule, DEFAULT_MARGIN).unwrap();
                let total = rule.integrate(|x| f.value(x).powi(2));
                let captured = e.norm_squared().to_f64();
                assert!(
                    captured <= total * (1.0 + 1e-12),
                    "{} on {w}: {captured} > {total}",
                    f.name()
                );
            }
        }
    }
}
