//! Weighted orthogonal polynomial projections on the unit ball `B^d`.
//!
//! The weight is `W_α(x) = (1 − ‖x‖²)^α`, `α > −1`. The crate builds
//! orthonormal bases of the degree-`k` orthogonal spaces `V^α_k` in
//! multiprecision arithmetic, evaluates the component projectors and their
//! truncations `S^α_N`, checks the shift and differentiation identities that
//! relate the `α` and `α + 1` spaces, and measures projection errors in
//! weighted Sobolev norms.
//!
//! Modules, bottom up:
//!
//! * [`polyalg`]: polynomials, multi-indices and the differential operators.
//! * [`moments`]: closed-form weighted monomial moments and inner products.
//! * [`orthospace`]: orthonormal bases, projectors, commutators.
//! * [`quadrature`]: product rules on the ball for non-polynomial integrands.
//! * [`sobolev`]: weighted Sobolev norms and projection residuals.
//! * [`verify`]: the identity suite, Jacobi cross-checks and Markov constants.
//! * [`experiments`]: convergence-rate studies and the test-function library.

pub mod error;
pub mod experiments;
pub mod function;
pub mod moments;
pub mod orthospace;
pub mod polyalg;
pub mod quadrature;
pub mod sobolev;
pub mod verify;

pub use error::{Error, Result};
pub use moments::{MomentTable, WeightParam, WeightedInner};
pub use orthospace::{BasisOptions, BasisPair, Expansion, OrthoBasis, PrecisionPolicy};
pub use polyalg::{MultiIndex, Polynomial};
pub use quadrature::BallRule;
