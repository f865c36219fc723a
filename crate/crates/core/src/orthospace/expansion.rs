use rug::Float;
use serde::Serialize;

use crate::moments::WeightParam;

/// Coefficients `⟨u, e⟩_α`, one vector per degree block.
#[derive(Clone, Debug)]
pub struct Expansion {
    weight: WeightParam,
    blocks: Vec<Vec<Float>>,
}

/// f64 view of an [`Expansion`] for JSON output.
#[derive(Clone, Debug, Serialize)]
pub struct ExpansionSummary {
    pub d: usize,
    pub alpha: f64,
    pub blocks: Vec<Vec<f64>>,
    pub block_norms: Vec<f64>,
}

impl Expansion {
    pub fn new(weight: WeightParam, blocks: Vec<Vec<Float>>) -> Self {
        Self { weight, blocks }
    }

    pub fn weight(&self) -> WeightParam {
        self.weight
    }

    /// Highest block stored, −1 when empty.
    pub fn max_degree(&self) -> i64 {
        self.blocks.len() as i64 - 1
    }

    pub fn blocks(&self) -> &[Vec<Float>] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &[Float] {
        &self.blocks[k]
    }

    pub fn coefficient(&self, k: usize, i: usize) -> &Float {
        &self.blocks[k][i]
    }

    /// `‖proj^α_k u‖²_α`.
    pub fn block_norm_squared(&self, k: usize) -> Float {
        let mut acc = Float::new(self.precision());
        for c in &self.blocks[k] {
            acc += c.clone().square();
        }
        acc
    }

    /// `‖S^α_N u‖²_α` by Parseval.
    pub fn norm_squared(&self) -> Float {
        let mut acc = Float::new(self.precision());
        for k in 0..self.blocks.len() {
            acc += self.block_norm_squared(k);
        }
        acc
    }

    /// Σ of the block norms² above `n`.
    pub fn tail_norm_squared(&self, n: usize) -> Float {
        let mut acc = Float::new(self.precision());
        for k in n + 1..self.blocks.len() {
            acc += self.block_norm_squared(k);
        }
        acc
    }

    /// Keeps blocks `0..=n`.
    pub fn truncated(&self, n: usize) -> Self {
        Self {
            weight: self.weight,
            blocks: self.blocks.iter().take(n + 1).cloned().collect(),
        }
    }

    fn precision(&self) -> u32 {
        self.blocks
            .iter()
            .flat_map(|b| b.first())
            .map(Float::prec)
            .next()
            .unwrap_or(64)
    }

    pub fn summary(&self) -> ExpansionSummary {
        ExpansionSummary {
            d: self.weight.dim(),
            alpha: self.weight.alpha(),
            blocks: self
                .blocks
                .iter()
                .map(|b| b.iter().map(Float::to_f64).collect())
                .collect(),
            block_norms: (0..self.blocks.len())
                .map(|k| self.block_norm_squared(k).sqrt().to_f64())
                .collect(),
        }
    }
}
