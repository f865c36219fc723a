use ballproj::experiments::{
    run_commutator_rate, run_l2_rate, run_residual_rates, Family, RateOptions, RateReport, TestFunction,
};
use ballproj::moments::WeightParam;
use ballproj::orthospace::BasisOptions;
use ballproj::quadrature::BallRule;
use ballproj::verify::markov_sweep;

fn reports(f: &TestFunction, w: WeightParam, grid: &[usize], rule: &BallRule, opts: &RateOptions) -> Vec<RateReport> {
    let reg = f.regularity(w.alpha()).unwrap();
    let mut out = run_residual_rates(f, &reg, w, grid, 2, rule, opts).unwrap();
    out.push(run_commutator_rate(f, &reg, w, grid, rule, opts).unwrap());
    out
}

#[test]
fn doubling_rule_exactness_moves_errors_by_under_a_thousandth() {
    let opts = RateOptions::default();
    let cases = [
        (1, 0.0, Family::Boundary { s: 2.5 }, vec![8, 12, 16, 24]),
        (1, 1.0, Family::Exp { a: None }, vec![2, 4, 6, 8]),
        (2, 0.0, Family::Boundary { s: 2.5 }, vec![4, 6, 9, 12]),
        (
            2,
            -0.5,
            Family::Cos {
                a: Some(vec![1.0, 0.5]),
            },
            vec![2, 4, 6, 8],
        ),
    ];
    for (d, alpha, family, grid) in cases {
        let w = WeightParam::new(d, alpha).unwrap();
        let f = TestFunction::new(family, d, 2).unwrap();
        let top = *grid.last().unwrap();
        let base = opts.rule(w, top + 1).unwrap();
        let doubled = BallRule::build_refined(w, 2 * opts.rule_exactness(top + 1), opts.radial_refinement).unwrap();
        let a = reports(&f, w, &grid, &base, &opts);
        let b = reports(&f, w, &grid, &doubled, &opts);
        for (ra, rb) in a.iter().zip(&b) {
            for (pa, pb) in ra.points.iter().zip(&rb.points) {
                if !pa.above_floor {
                    continue;
                }
                let rel = (pa.error - pb.error).abs() / pb.error;
                assert!(
                    rel < 1e-3,
                    "{} N={}: {} vs {} ({rel:e})",
                    ra.id(),
                    pa.n,
                    pa.error,
                    pb.error
                );
            }
        }
    }
}

#[test]
fn zeroth_column_is_the_l2_run() {
    let opts = RateOptions::default();
    let w = WeightParam::new(2, 1.0).unwrap();
    let f = TestFunction::new(Family::Boundary { s: 1.5 }, 2, 2).unwrap();
    let reg = f.regularity(1.0).unwrap();
    let grid = [3, 5, 7, 9];
    let rule = opts.rule(w, 10).unwrap();
    let l2 = run_l2_rate(&f, &reg, w, &grid, &rule, &opts).unwrap();
    let all = run_residual_rates(&f, &reg, w, &grid, 2, &rule, &opts).unwrap();
    let errors = |r: &RateReport| r.points.iter().map(|p| p.error.to_bits()).collect::<Vec<_>>();
    assert_eq!(errors(&l2), errors(&all[0]));
    for r in &all[1..] {
        // H^k columns past the first reproduce the L² error in column 0
        for (p, q) in r.points.iter().zip(l2.points.iter().filter(|p| p.n >= 1)) {
            assert_eq!(p.columns[0].to_bits(), q.error.to_bits());
        }
    }
}

#[test]
fn iterated_markov_growth_is_at_most_n_to_the_2r() {
    for (d, n_max) in [(1, 20), (2, 14)] {
        for alpha in [0.0, 1.0] {
            let w = WeightParam::new(d, alpha).unwrap();
            for r in 1..=2 {
                let s = markov_sweep(w, n_max, r, 4, &BasisOptions::default()).unwrap();
                let cap = 2.0 * r as f64 + 0.2;
                assert!(s.slope <= cap, "{w} r={r}: slope {} above {cap}", s.slope);
                assert!(s.slope > 0.0);
            }
        }
    }
}
