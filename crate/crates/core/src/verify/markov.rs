//! Markov-type constants: the largest ratio `|p|_{H^r_α} / ‖p‖_α` over
//! polynomials of degree `≤ n`, from a generalized eigenproblem made
//! standard by the orthonormal basis.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::rates::loglog_fit;
use crate::moments::WeightParam;
use crate::orthospace::{build_basis, BasisOptions, OrthoBasis};
use crate::polyalg::{monomials_of_degree, MultiIndex};

/// `Π_i γ_i!/(γ_i − β_i)!`, or `None` when `∂^β x^γ = 0`.
fn falling(g: &MultiIndex, b: &MultiIndex) -> Option<f64> {
    let mut out = 1.0;
    for (gi, bi) in g.exponents().zip(b.exponents()) {
        if bi > gi {
            return None;
        }
        for t in 0..bi {
            out *= (gi - t) as f64;
        }
    }
    Some(out)
}

/// `max_{p ∈ Π^d_n} |p|_{H^r_α} / ‖p‖_α`.
///
/// Per parity class, `K_{γδ} = Σ_{|β|=r} mult(β) ⟨∂^β x^γ, ∂^β x^δ⟩_α` is
/// assembled from moments and transformed to the orthonormal basis as
/// `E K Eᵀ`; the answer is the square root of the largest eigenvalue over
/// all classes.
pub fn seminorm_constant(b: &OrthoBasis, n: usize, r: usize) -> Result<f64> {
    if n > b.max_degree() {
        return Err(Error::DegreeExceedsBasis {
            degree: n as i64,
            max: b.max_degree(),
        });
    }
    if n < r {
        return Ok(0.0);
    }
    let prec = b.precision();
    let space = b.space();
    let moments = space.moments();
    let monomials = space.monomials();
    let betas = monomials_of_degree(b.dim(), r as u32);
    let mut top = 0.0f64;
    for members in space.classes() {
        let idx: Vec<usize> = members
            .iter()
            .copied()
            .filter(|&i| monomials[i].order() as usize <= n)
            .collect();
        let m = idx.len();
        if m == 0 {
            continue;
        }
        let mut k = vec![Float::new(prec); m * m];
        for a in 0..m {
            for c in a..m {
                let (ga, gc) = (&monomials[idx[a]], &monomials[idx[c]]);
                let mut acc = Float::new(prec);
                for beta in &betas {
                    let (Some(fa), Some(fc)) = (falling(ga, beta), falling(gc, beta)) else {
                        continue;
                    };
                    let shifted = ga.add(gc).checked_sub(beta).and_then(|s| s.checked_sub(beta));
                    let mu = moments.moment(&shifted.expect("β fits both indices"))?;
                    acc += Float::with_val(prec, mu * (beta.multinomial() * fa * fc));
                }
                k[c * m + a].clone_from(&acc);
                k[a * m + c] = acc;
            }
        }
        // rows of E: class-local coefficients of the elements led by idx
        let e: Vec<Vec<Float>> = idx
            .iter()
            .map(|&i| {
                let p = b.element(i);
                idx.iter()
                    .map(|&j| p.coeff(&monomials[j]).cloned().unwrap_or_else(|| Float::new(prec)))
                    .collect()
            })
            .collect();
        // ek = E K, then A = (E K) Eᵀ
        let mut ek = vec![Float::new(prec); m * m];
        for a in 0..m {
            for c in 0..m {
                let mut acc = Float::new(prec);
                for t in 0..m {
                    if !e[a][t].is_zero() {
                        acc += Float::with_val(prec, &e[a][t] * &k[t * m + c]);
                    }
                }
                ek[a * m + c] = acc;
            }
        }
        let mut a_mat = DMatrix::<f64>::zeros(m, m);
        for a in 0..m {
            for c in a..m {
                let mut acc = Float::new(prec);
                for t in 0..m {
                    if !e[c][t].is_zero() {
                        acc += Float::with_val(prec, &ek[a * m + t] * &e[c][t]);
                    }
                }
                let v = acc.to_f64();
                a_mat[(a, c)] = v;
                a_mat[(c, a)] = v;
            }
        }
        let eig = SymmetricEigen::new(a_mat);
        top = top.max(eig.eigenvalues.max());
    }
    Ok(top.max(0.0).sqrt())
}

/// `max_{p ∈ Π^d_n} ‖∇p‖_α / ‖p‖_α`.
pub fn markov_constant(b: &OrthoBasis, n: usize) -> Result<f64> {
    seminorm_constant(b, n, 1)
}

/// `∫₀¹ r^{2k+d−1}(1 − r²)^α dr` for `k = 0..=k_max`, up to the factor
/// `Γ(α + 1)/2`, which cancels in every ratio.
fn radial_moments(w: WeightParam, k_max: usize, prec: u32) -> Vec<Float> {
    let half_d = w.dim() as f64 / 2.0;
    let a = Float::with_val(prec, half_d);
    let b = Float::with_val(prec, half_d + w.alpha() + 1.0);
    let mut out = vec![a.gamma() / b.gamma()];
    for k in 0..k_max {
        let ratio =
            Float::with_val(prec, k as f64 + half_d) / Float::with_val(prec, k as f64 + half_d + w.alpha() + 1.0);
        let next = Float::with_val(prec, &out[k] * &ratio);
        out.push(next);
    }
    out
}

/// Cholesky factor of a symmetric positive definite matrix, row-major.
fn cholesky(m: &[Float], n: usize, prec: u32) -> Result<Vec<Float>> {
    let mut l = vec![Float::new(prec); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut acc = m[i * n + j].clone();
            for t in 0..j {
                acc -= &l[i * n + t] * &l[j * n + t];
            }
            if i == j {
                if acc <= 0 {
                    return Err(Error::InvalidArgument(format!(
                        "radial mass matrix not positive definite at {prec} bits"
                    )));
                }
                l[i * n + i] = acc.sqrt();
            } else {
                l[i * n + j] = acc / &l[j * n + j];
            }
        }
    }
    Ok(l)
}

/// Solves `L X = B` for lower-triangular `L`, all `n × n` row-major.
fn forward_solve(l: &[Float], b: &[Float], n: usize, prec: u32) -> Vec<Float> {
    let mut x = vec![Float::new(prec); n * n];
    for c in 0..n {
        for i in 0..n {
            let mut acc = b[i * n + c].clone();
            for t in 0..i {
                acc -= &l[i * n + t] * &x[t * n + c];
            }
            x[i * n + c] = acc / &l[i * n + i];
        }
    }
    x
}

/// Working precision of the radial route up to degree `n`: the radial mass
/// matrices are Hilbert-like in `r²`.
pub fn radial_bits(n: usize) -> u32 {
    4 * n as u32 + 128
}

/// `L⁻¹ S L⁻ᵀ` for angular degree `m` and radial sizes up to `size`.
///
/// `L` is lower triangular, so the leading `s × s` block of the result is
/// the same matrix built for size `s`; one factorization serves every `n`.
fn radial_operator(w: WeightParam, m: usize, size: usize, moments: &[Float], prec: u32) -> Result<DMatrix<f64>> {
    let (d, mi) = (w.dim() as i64, m as i64);
    let mut mass = vec![Float::new(prec); size * size];
    let mut stiff = vec![Float::new(prec); size * size];
    for i in 0..size {
        for j in 0..size {
            let k = m + i + j;
            mass[i * size + j].clone_from(&moments[k]);
            // k = 0 forces m = i = j = 0, where the coefficient vanishes
            let coef = (mi + 2 * i as i64) * (mi + 2 * j as i64) + mi * (mi + d - 2);
            if coef != 0 {
                stiff[i * size + j] = Float::with_val(prec, &moments[k - 1] * coef);
            }
        }
    }
    let l = cholesky(&mass, size, prec)?;
    // S is symmetric, so L⁻¹ S L⁻ᵀ = L⁻¹ (L⁻¹ S)ᵀ
    let x = forward_solve(&l, &stiff, size, prec);
    let mut xt = vec![Float::new(prec); size * size];
    for i in 0..size {
        for j in 0..size {
            xt[j * size + i].clone_from(&x[i * size + j]);
        }
    }
    let a = forward_solve(&l, &xt, size, prec);
    Ok(DMatrix::from_fn(size, size, |i, j| {
        Float::with_val(prec, &a[i * size + j] + &a[j * size + i]).to_f64() / 2.0
    }))
}

/// [`markov_constant`] for every `n ≤ n_max`, without a basis.
///
/// `W_α` is rotation invariant, so with `p = Σ f_m(r) Y_m(ξ)` over spherical
/// harmonics both `‖p‖²_α` and `‖∇p‖²_α` split into radial forms, the latter
/// with integrand `|f′|² + m(m + d − 2)|f|²/r²`. Each `m ≤ n` gives a
/// generalized eigenproblem on `f = r^m q(r²)`, `deg q ≤ (n − m)/2`, whose
/// entries are Beta integrals.
pub fn radial_markov_constants(w: WeightParam, n_max: usize, prec: u32) -> Result<Vec<f64>> {
    let moments = radial_moments(w, n_max, prec);
    let operators = (0..=n_max)
        .into_par_iter()
        .map(|m| radial_operator(w, m, (n_max - m) / 2 + 1, &moments, prec))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..=n_max)
        .into_par_iter()
        .map(|n| {
            let top = operators
                .iter()
                .enumerate()
                .take(n + 1)
                .map(|(m, a)| {
                    let s = (n - m) / 2 + 1;
                    SymmetricEigen::new(a.view((0, 0), (s, s)).into_owned())
                        .eigenvalues
                        .max()
                })
                .fold(0.0f64, f64::max);
            top.max(0.0).sqrt()
        })
        .collect())
}

/// Single-`n` form of [`radial_markov_constants`].
pub fn radial_markov_constant(w: WeightParam, n: usize, prec: u32) -> Result<f64> {
    Ok(radial_markov_constants(w, n, prec)?[n])
}

#[derive(Clone, Debug, Serialize)]
pub struct MarkovSweep {
    pub weight: WeightParam,
    pub order: usize,
    pub n_values: Vec<usize>,
    pub constants: Vec<f64>,
    /// Least-squares slope of `log C(n)` against `log n` over `n ≥ n_fit_start`.
    pub slope: f64,
    pub fit_residual: f64,
    pub n_fit_start: usize,
}

fn check_fit_range(n_max: usize, n_fit_start: usize) -> Result<()> {
    if n_fit_start < 1 || n_fit_start >= n_max {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= fit start < n_max, got {n_fit_start} and {n_max}"
        )));
    }
    Ok(())
}

/// Constants for `n = 0..=n_max` and the log-log slope over `n_fit_start..=n_max`.
pub fn markov_sweep(
    w: WeightParam,
    n_max: usize,
    r: usize,
    n_fit_start: usize,
    opts: &BasisOptions,
) -> Result<MarkovSweep> {
    check_fit_range(n_max, n_fit_start)?;
    let b = build_basis(w, n_max, opts)?;
    let n_values: Vec<usize> = (0..=n_max).collect();
    let constants = n_values
        .iter()
        .map(|&n| seminorm_constant(&b, n, r))
        .collect::<Result<Vec<f64>>>()?;
    fit_sweep(w, r, n_values, constants, n_fit_start)
}

/// First-order sweep through [`radial_markov_constant`]; reaches far larger
/// `n_max` than the basis route.
pub fn radial_markov_sweep(w: WeightParam, n_max: usize, n_fit_start: usize) -> Result<MarkovSweep> {
    check_fit_range(n_max, n_fit_start)?;
    let constants = radial_markov_constants(w, n_max, radial_bits(n_max))?;
    fit_sweep(w, 1, (0..=n_max).collect(), constants, n_fit_start)
}

fn fit_sweep(
    w: WeightParam,
    r: usize,
    n_values: Vec<usize>,
    constants: Vec<f64>,
    n_fit_start: usize,
) -> Result<MarkovSweep> {
    let n_max = *n_values.last().expect("non-empty sweep");
    let xs: Vec<f64> = (n_fit_start..=n_max).map(|n| n as f64).collect();
    let ys = constants[n_fit_start..].to_vec();
    let (slope, fit_residual) =
        loglog_fit(&xs, &ys).ok_or_else(|| Error::InvalidArgument("degenerate Markov fit".into()))?;
    Ok(MarkovSweep {
        weight: w,
        order: r,
        n_values,
        constants,
        slope,
        fit_residual,
        n_fit_start,
    })
}
