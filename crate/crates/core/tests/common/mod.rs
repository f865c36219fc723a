#![allow(dead_code)]

use ballproj::polyalg::{monomials_up_to, MultiIndex, Polynomial};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const PREC: u32 = 256;

/// Dyadic coefficients keep sums and products exact at [`PREC`].
pub fn dyadic() -> impl Strategy<Value = f64> {
    (-32i32..=32).prop_map(|k| k as f64 / 8.0)
}

fn build(dim: usize, terms: Vec<(usize, f64)>, keep: impl Fn(&MultiIndex) -> bool, max_degree: u32) -> Polynomial {
    let pool: Vec<MultiIndex> = monomials_up_to(dim, max_degree)
        .into_iter()
        .filter(|m| keep(m))
        .collect();
    let picked = terms.into_iter().map(|(i, c)| (pool[i % pool.len()], c));
    Polynomial::from_f64_terms(dim, PREC, picked.collect::<Vec<_>>()).unwrap()
}

pub fn poly(dim: usize, max_degree: u32) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((0usize..10_000, dyadic()), 1..8).prop_map(move |t| build(dim, t, |_| true, max_degree))
}

pub fn nonzero_poly(dim: usize, max_degree: u32) -> impl Strategy<Value = Polynomial> {
    poly(dim, max_degree).prop_filter("nonzero", |p| !p.is_zero())
}

/// Polynomial whose monomials all have total degree of parity `parity`.
pub fn parity_poly(dim: usize, max_degree: u32, parity: u32) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((0usize..10_000, dyadic()), 1..8)
        .prop_map(move |t| build(dim, t, |m| m.order() % 2 == parity, max_degree))
}

pub fn point(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.57f64..0.57, dim)
}

/// Seeded random polynomial with coefficients in `[−1, 1]` and exact degree `deg`.
pub fn random_poly(rng: &mut ChaCha8Rng, dim: usize, deg: u32, prec: u32) -> Polynomial {
    let mut terms: Vec<(MultiIndex, f64)> = Vec::new();
    for m in monomials_up_to(dim, deg) {
        if rng.gen_bool(0.6) {
            terms.push((m, rng.gen_range(-1.0..1.0)));
        }
    }
    let top = ballproj::polyalg::monomials_of_degree(dim, deg);
    terms.push((top[rng.gen_range(0..top.len())], 1.0 + rng.gen::<f64>()));
    Polynomial::from_f64_terms(dim, prec, terms).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn max_abs(p: &Polynomial) -> f64 {
    p.max_abs_coeff()
}
