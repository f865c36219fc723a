use std::collections::HashMap;

use rug::Float;

use crate::error::{Error, Result};
use crate::moments::{MomentTable, WeightParam, WeightedInner};
use crate::polyalg::{monomials_up_to, MultiIndex, Polynomial};

/// `Π^d_N` with its monomial Gram matrix under `⟨·,·⟩_α`.
///
/// Monomials are numbered in graded-lex order. Moments vanish unless both
/// exponents agree mod 2 in every axis, so the Gram matrix is block diagonal
/// over the `2^d` parity classes and only those blocks are stored.
#[derive(Debug)]
pub struct WeightedSpace {
    weight: WeightParam,
    max_degree: usize,
    monomials: Vec<MultiIndex>,
    index: HashMap<MultiIndex, usize>,
    classes: Vec<Vec<usize>>,
    class_of: Vec<usize>,
    pos_in_class: Vec<usize>,
    gram: Vec<Vec<Float>>,
    moments: MomentTable,
}

impl WeightedSpace {
    pub fn new(weight: WeightParam, max_degree: usize, prec: u32) -> Result<Self> {
        let d = weight.dim();
        let monomials = monomials_up_to(d, max_degree as u32);
        let index = monomials.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        let mut classes = vec![Vec::new(); 1 << d];
        let mut class_of = Vec::with_capacity(monomials.len());
        let mut pos_in_class = Vec::with_capacity(monomials.len());
        for (i, m) in monomials.iter().enumerate() {
            let c = m.parity_class();
            class_of.push(c);
            pos_in_class.push(classes[c].len());
            classes[c].push(i);
        }
        let moments = MomentTable::new(weight, prec);
        let mut gram = Vec::with_capacity(classes.len());
        for members in &classes {
            let n = members.len();
            let mut block = vec![Float::new(prec); n * n];
            for a in 0..n {
                for b in a..n {
                    let v = moments.moment(&monomials[members[a]].add(&monomials[members[b]]))?;
                    block[b * n + a].clone_from(&v);
                    block[a * n + b] = v;
                }
            }
            gram.push(block);
        }
        Ok(Self {
            weight,
            max_degree,
            monomials,
            index,
            classes,
            class_of,
            pos_in_class,
            gram,
            moments,
        })
    }

    pub fn weight(&self) -> WeightParam {
        self.weight
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn precision(&self) -> u32 {
        self.moments.precision()
    }

    /// `dim Π^d_N`.
    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[MultiIndex] {
        &self.monomials
    }

    pub fn moments(&self) -> &MomentTable {
        &self.moments
    }

    pub fn index_of(&self, m: &MultiIndex) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub(crate) fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub(crate) fn class_of(&self, i: usize) -> usize {
        self.class_of[i]
    }

    pub(crate) fn pos_in_class(&self, i: usize) -> usize {
        self.pos_in_class[i]
    }

    /// Row-major Gram block of one parity class.
    pub(crate) fn gram_block(&self, class: usize) -> &[Float] {
        &self.gram[class]
    }

    pub(crate) fn check_degree(&self, p: &Polynomial) -> Result<()> {
        if p.dim() != self.weight.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.weight.dim(),
                found: p.dim(),
            });
        }
        if p.degree() > self.max_degree as i64 {
            return Err(Error::DegreeExceedsBasis {
                degree: p.degree(),
                max: self.max_degree,
            });
        }
        Ok(())
    }

    /// Coefficients of `p` in the monomial numbering.
    pub fn to_dense(&self, p: &Polynomial) -> Result<Vec<Float>> {
        self.check_degree(p)?;
        let prec = self.precision();
        let mut out = vec![Float::new(prec); self.len()];
        for (m, c) in p.terms() {
            out[self.index[m]] = Float::with_val(prec, c);
        }
        Ok(out)
    }

    pub fn from_dense(&self, coeffs: &[Float]) -> Polynomial {
        debug_assert_eq!(coeffs.len(), self.len());
        let mut p = Polynomial::zero(self.weight.dim(), self.precision());
        for (m, c) in self.monomials.iter().zip(coeffs) {
            p.add_term(*m, c);
        }
        p
    }

    pub fn zeros(&self) -> Vec<Float> {
        vec![Float::new(self.precision()); self.len()]
    }

    /// `aᵀ G b` over the stored class blocks.
    pub fn inner_dense(&self, a: &[Float], b: &[Float]) -> Float {
        let prec = self.precision();
        let mut acc = Float::new(prec);
        let mut row = Float::new(prec);
        let mut t = Float::new(prec);
        for (members, block) in self.classes.iter().zip(&self.gram) {
            let n = members.len();
            for (s, &i) in members.iter().enumerate() {
                if a[i].is_zero() {
                    continue;
                }
                row.assign_zero();
                for (u, &j) in members.iter().enumerate() {
                    if b[j].is_zero() {
                        continue;
                    }
                    t.clone_from(&block[s * n + u]);
                    t *= &b[j];
                    row += &t;
                }
                row *= &a[i];
                acc += &row;
            }
        }
        acc
    }
}

trait AssignZero {
    fn assign_zero(&mut self);
}

impl AssignZero for Float {
    fn assign_zero(&mut self) {
        use rug::Assign;
        self.assign(0);
    }
}

impl WeightedInner for WeightedSpace {
    fn weight(&self) -> WeightParam {
        self.weight
    }

    /// Uses the stored Gram blocks when both degrees fit, raw moments otherwise.
    fn inner(&self, p: &Polynomial, q: &Polynomial) -> Result<Float> {
        let fits = |x: &Polynomial| x.degree() <= self.max_degree as i64;
        if fits(p) && fits(q) {
            Ok(self.inner_dense(&self.to_dense(p)?, &self.to_dense(q)?))
        } else {
            self.moments.inner(p, q)
        }
    }
}
