//! Orthonormal bases of `V^α_k`, the projectors `proj^α_k`, the truncations
//! `S^α_N` and the derivative commutator.

mod basis;
mod expansion;
mod export;
mod pair;
mod space;

pub use basis::{build_basis, BasisOptions, OrthoBasis, PrecisionPolicy};
pub use expansion::{Expansion, ExpansionSummary};
pub use pair::BasisPair;
pub use space::WeightedSpace;
