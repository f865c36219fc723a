//! Exact multivariate polynomial arithmetic and the differential and
//! multiplication operators acting on polynomials on the unit ball.

mod multi_index;
mod polynomial;
pub(crate) mod text;

pub use multi_index::{count_of_degree, count_up_to, monomials_of_degree, monomials_up_to, MultiIndex, MAX_DIM};
pub use polynomial::Polynomial;

pub(crate) use polynomial::check_alpha;
