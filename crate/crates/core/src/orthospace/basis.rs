use std::ops::Range;

use log::debug;
use rug::Float;
use serde::{Deserialize, Serialize};

use super::space::WeightedSpace;
use crate::error::{Error, Result};
use crate::moments::WeightParam;
use crate::polyalg::{count_of_degree, count_up_to, MultiIndex, Polynomial};

/// Working precision schedule for [`build_basis`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PrecisionPolicy {
    pub min_bits: u32,
    pub bits_per_degree: u32,
    pub base_bits: u32,
    pub max_bits: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        Self {
            min_bits: 64,
            bits_per_degree: 6,
            base_bits: 60,
            max_bits: 4096,
        }
    }
}

impl PrecisionPolicy {
    pub fn initial_bits(&self, max_degree: usize) -> u32 {
        let want = (self.bits_per_degree * max_degree as u32 + self.base_bits).max(self.min_bits);
        want.min(self.max_bits)
    }

    /// Same schedule started at twice the bits.
    pub fn doubled(&self) -> Self {
        Self {
            min_bits: self.min_bits * 2,
            bits_per_degree: self.bits_per_degree * 2,
            base_bits: self.base_bits * 2,
            max_bits: self.max_bits.max(self.min_bits * 2),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BasisOptions {
    /// Bound on the orthonormality certificate.
    pub tolerance: f64,
    pub policy: PrecisionPolicy,
}

impl Default for BasisOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-16,
            policy: PrecisionPolicy::default(),
        }
    }
}

#[derive(Clone, Debug)]
struct Element {
    /// Coefficients on the first `pos + 1` monomials of its parity class.
    coeffs: Vec<Float>,
    /// `G e` over the whole class, i.e. `⟨e, m⟩_α` for each class monomial `m`.
    gram_image: Vec<Float>,
}

/// Orthonormal bases of `V^α_0, …, V^α_N`.
///
/// Element `i` has leading monomial `monomials()[i]`, so block `k` is the
/// contiguous index range of the degree-`k` monomials.
#[derive(Debug)]
pub struct OrthoBasis {
    space: WeightedSpace,
    elements: Vec<Element>,
    certificate: f64,
}

/// Builds the basis, doubling precision until the certificate meets the tolerance.
pub fn build_basis(w: WeightParam, max_degree: usize, opts: &BasisOptions) -> Result<OrthoBasis> {
    let mut bits = opts.policy.initial_bits(max_degree);
    loop {
        let basis = OrthoBasis::gram_schmidt(w, max_degree, bits)?;
        debug!(
            "basis {w} N={max_degree} at {bits} bits: certificate {:e}",
            basis.certificate
        );
        if basis.certificate <= opts.tolerance {
            return Ok(basis);
        }
        if bits >= opts.policy.max_bits {
            return Err(Error::PrecisionExhausted {
                certificate: basis.certificate,
                tolerance: opts.tolerance,
                bits,
            });
        }
        bits = (bits * 2).min(opts.policy.max_bits);
    }
}

impl OrthoBasis {
    pub fn build(w: WeightParam, max_degree: usize, opts: &BasisOptions) -> Result<Self> {
        build_basis(w, max_degree, opts)
    }

    /// One construction at exactly `bits` of precision, whatever the certificate.
    pub fn build_at(w: WeightParam, max_degree: usize, bits: u32) -> Result<Self> {
        Self::gram_schmidt(w, max_degree, bits)
    }

    /// Classical Gram–Schmidt with a full second pass, class by class.
    fn gram_schmidt(w: WeightParam, max_degree: usize, prec: u32) -> Result<Self> {
        let space = WeightedSpace::new(w, max_degree, prec)?;
        let mut slots: Vec<Option<Element>> = vec![None; space.len()];
        let mut t = Float::new(prec);
        for (class, members) in space.classes().iter().enumerate() {
            let n = members.len();
            let g = space.gram_block(class);
            let mut accepted: Vec<Element> = Vec::with_capacity(n);
            for s in 0..n {
                let mut v = vec![Float::new(prec); s + 1];
                v[s] += 1u32;
                for e in &accepted {
                    let c = Float::with_val(prec, &e.gram_image[s]);
                    axpy_neg(&mut v, &c, &e.coeffs, &mut t);
                }
                for e in &accepted {
                    let c = dot(&v, &e.gram_image, prec);
                    axpy_neg(&mut v, &c, &e.coeffs, &mut t);
                }
                let mut gv = vec![Float::new(prec); n];
                for (r, out) in gv.iter_mut().enumerate() {
                    *out = dot(&v, &g[r * n..r * n + s + 1], prec);
                }
                let norm = dot(&v, &gv, prec).sqrt();
                if !norm.is_normal() {
                    return Err(Error::PrecisionExhausted {
                        certificate: f64::INFINITY,
                        tolerance: 0.0,
                        bits: prec,
                    });
                }
                for x in v.iter_mut().chain(gv.iter_mut()) {
                    *x /= &norm;
                }
                accepted.push(Element {
                    coeffs: v,
                    gram_image: gv,
                });
            }
            for (e, &i) in accepted.into_iter().zip(members) {
                slots[i] = Some(e);
            }
        }
        let elements = slots
            .into_iter()
            .map(|e| e.expect("every monomial leads one element"))
            .collect();
        let mut basis = Self {
            space,
            elements,
            certificate: 0.0,
        };
        basis.certificate = basis.compute_certificate();
        Ok(basis)
    }

    /// Wraps given polynomials as a basis without enforcing any tolerance;
    /// the certificate is recomputed from scratch.
    ///
    /// `polys[i]` must have leading monomial `monomials_up_to(d, N)[i]` and
    /// stay inside that monomial's parity class.
    pub fn from_polynomials(w: WeightParam, max_degree: usize, prec: u32, polys: &[Polynomial]) -> Result<Self> {
        let space = WeightedSpace::new(w, max_degree, prec)?;
        if polys.len() != space.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} basis polynomials, found {}",
                space.len(),
                polys.len()
            )));
        }
        let mut elements = Vec::with_capacity(polys.len());
        for (i, p) in polys.iter().enumerate() {
            space.check_degree(p)?;
            let lead = space.monomials()[i];
            let class = space.class_of(i);
            let pos = space.pos_in_class(i);
            let mut coeffs = vec![Float::new(prec); pos + 1];
            for (m, c) in p.terms() {
                let j = space.index_of(m).expect("degree checked");
                if space.class_of(j) != class || space.pos_in_class(j) > pos {
                    return Err(Error::InvalidArgument(format!(
                        "element {i} (leading {lead}) has stray monomial {m}"
                    )));
                }
                coeffs[space.pos_in_class(j)] = Float::with_val(prec, c);
            }
            if coeffs[pos].is_zero() {
                return Err(Error::InvalidArgument(format!(
                    "element {i} lacks its leading monomial {lead}"
                )));
            }
            let members = &space.classes()[class];
            let n = members.len();
            let g = space.gram_block(class);
            let gram_image = (0..n).map(|r| dot(&coeffs, &g[r * n..r * n + pos + 1], prec)).collect();
            elements.push(Element { coeffs, gram_image });
        }
        let mut basis = Self {
            space,
            elements,
            certificate: 0.0,
        };
        basis.certificate = basis.compute_certificate();
        Ok(basis)
    }

    fn compute_certificate(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for members in self.space.classes() {
            for (a, &i) in members.iter().enumerate() {
                let ei = &self.elements[i];
                for &j in &members[a..] {
                    let mut r = dot(&ei.coeffs, &self.elements[j].gram_image, self.precision());
                    if i == j {
                        r -= 1u32;
                    }
                    worst = worst.max(r.to_f64().abs());
                }
            }
        }
        worst
    }

    pub fn weight(&self) -> WeightParam {
        self.space.weight()
    }

    pub fn dim(&self) -> usize {
        self.space.weight().dim()
    }

    pub fn max_degree(&self) -> usize {
        self.space.max_degree()
    }

    pub fn precision(&self) -> u32 {
        self.space.precision()
    }

    pub fn certificate(&self) -> f64 {
        self.certificate
    }

    pub fn space(&self) -> &WeightedSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Element indices of block `k`.
    pub fn block_range(&self, k: usize) -> Range<usize> {
        assert!(k <= self.max_degree(), "block {k} beyond N = {}", self.max_degree());
        let d = self.dim();
        let start = if k == 0 { 0 } else { count_up_to(d, k as u32 - 1) };
        start..start + count_of_degree(d, k as u32)
    }

    pub fn block_len(&self, k: usize) -> usize {
        self.block_range(k).len()
    }

    pub fn leading_monomial(&self, i: usize) -> MultiIndex {
        self.space.monomials()[i]
    }

    pub fn element(&self, i: usize) -> Polynomial {
        self.space.from_dense(&self.element_dense(i))
    }

    pub fn block(&self, k: usize) -> Vec<Polynomial> {
        self.block_range(k).map(|i| self.element(i)).collect()
    }

    pub(crate) fn element_dense(&self, i: usize) -> Vec<Float> {
        let mut out = self.space.zeros();
        let members = &self.space.classes()[self.space.class_of(i)];
        for (c, &j) in self.elements[i].coeffs.iter().zip(members) {
            out[j].clone_from(c);
        }
        out
    }

    /// `⟨u, e_i⟩_α` for `u` in monomial coordinates.
    pub(crate) fn coefficient_dense(&self, u: &[Float], i: usize) -> Float {
        let members = &self.space.classes()[self.space.class_of(i)];
        let prec = self.precision();
        let mut acc = Float::new(prec);
        let mut t = Float::new(prec);
        for (g, &j) in self.elements[i].gram_image.iter().zip(members) {
            if u[j].is_zero() {
                continue;
            }
            t.clone_from(g);
            t *= &u[j];
            acc += &t;
        }
        acc
    }

    /// Adds `c · e_i` into `out` (monomial coordinates).
    pub(crate) fn accumulate(&self, out: &mut [Float], c: &Float, i: usize) {
        let members = &self.space.classes()[self.space.class_of(i)];
        let mut t = Float::new(self.precision());
        for (e, &j) in self.elements[i].coeffs.iter().zip(members) {
            t.clone_from(e);
            t *= c;
            out[j] += &t;
        }
    }

    /// `proj^α_k` in monomial coordinates; `k` outside `0..=N` gives zero.
    pub(crate) fn project_dense(&self, u: &[Float], k: i64) -> Vec<Float> {
        let mut out = self.space.zeros();
        if k < 0 || k as usize > self.max_degree() {
            return out;
        }
        for i in self.block_range(k as usize) {
            let c = self.coefficient_dense(u, i);
            if !c.is_zero() {
                self.accumulate(&mut out, &c, i);
            }
        }
        out
    }

    pub(crate) fn truncate_dense(&self, u: &[Float], n: i64) -> Vec<Float> {
        let mut out = self.space.zeros();
        if n < 0 {
            return out;
        }
        let top = (n as usize).min(self.max_degree());
        for i in 0..self.block_range(top).end {
            let c = self.coefficient_dense(u, i);
            if !c.is_zero() {
                self.accumulate(&mut out, &c, i);
            }
        }
        out
    }

    /// `proj^α_k u`. Zero for `k < 0`, and for `k > N` because `deg u ≤ N`.
    pub fn project_component(&self, u: &Polynomial, k: i64) -> Result<Polynomial> {
        let dense = self.space.to_dense(u)?;
        Ok(self.space.from_dense(&self.project_dense(&dense, k)))
    }

    /// `S^α_n u = Σ_{k ≤ n} proj^α_k u`.
    pub fn truncate(&self, u: &Polynomial, n: i64) -> Result<Polynomial> {
        let dense = self.space.to_dense(u)?;
        Ok(self.space.from_dense(&self.truncate_dense(&dense, n)))
    }

    /// Coefficients `⟨u, e⟩_α` of every basis element, grouped by block.
    pub fn expand(&self, u: &Polynomial) -> Result<super::Expansion> {
        let dense = self.space.to_dense(u)?;
        let blocks = (0..=self.max_degree())
            .map(|k| self.block_range(k).map(|i| self.coefficient_dense(&dense, i)).collect())
            .collect();
        Ok(super::Expansion::new(self.weight(), blocks))
    }

    /// Expansion from the moments `μ_m = ℓ(x^m)` of a linear functional `ℓ`;
    /// the coefficient of `e` is `ℓ(e)`.
    pub fn expand_moments(&self, mu: &[Float]) -> super::Expansion {
        assert_eq!(mu.len(), self.len(), "one moment per monomial");
        let prec = self.precision();
        let blocks = (0..=self.max_degree())
            .map(|k| {
                self.block_range(k)
                    .map(|i| {
                        let members = &self.space.classes()[self.space.class_of(i)];
                        let mut acc = Float::new(prec);
                        let mut t = Float::new(prec);
                        for (c, &j) in self.elements[i].coeffs.iter().zip(members) {
                            t.clone_from(c);
                            t *= &mu[j];
                            acc += &t;
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        super::Expansion::new(self.weight(), blocks)
    }

    /// `Σ c_i e_i` for coefficients grouped by block (blocks past `N` are rejected).
    pub fn synthesize(&self, blocks: &[Vec<Float>]) -> Result<Polynomial> {
        if blocks.len() > self.max_degree() + 1 {
            return Err(Error::DegreeExceedsBasis {
                degree: blocks.len() as i64 - 1,
                max: self.max_degree(),
            });
        }
        let mut out = self.space.zeros();
        for (k, coeffs) in blocks.iter().enumerate() {
            let range = self.block_range(k);
            if coeffs.len() != range.len() {
                return Err(Error::DimensionMismatch {
                    expected: range.len(),
                    found: coeffs.len(),
                });
            }
            for (c, i) in coeffs.iter().zip(range) {
                self.accumulate(&mut out, c, i);
            }
        }
        Ok(self.space.from_dense(&out))
    }
}

fn dot(a: &[Float], b: &[Float], prec: u32) -> Float {
    let mut acc = Float::new(prec);
    let mut t = Float::new(prec);
    for (x, y) in a.iter().zip(b) {
        t.clone_from(x);
        t *= y;
        acc += &t;
    }
    acc
}

/// `v[..x.len()] -= c · x`.
fn axpy_neg(v: &mut [Float], c: &Float, x: &[Float], t: &mut Float) {
    for (vi, xi) in v.iter_mut().zip(x) {
        t.clone_from(xi);
        *t *= c;
        *vi -= &*t;
    }
}
