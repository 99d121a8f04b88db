//! Worst-case expectations of polynomials under finitely exchangeable
//! distributions, computed three ways: by enumerating urn distributions, by a
//! cone-membership linear program, and as a ground-state energy on the
//! symmetric subspace of a tensor-product space.

pub mod bernstein_lp;
pub mod boson;
pub mod error;
pub mod exchangeable;
pub mod multiindex;
pub mod polynomial;
pub mod solvers;
pub mod verify;

pub use bernstein_lp::{lower_bound_lp, lower_bound_lp_with, ConeMembershipLP};
pub use boson::{quantum_bound, quantum_bound_with, v_infinity, DiagonalObservable, HermitianMatrix, SimplexMinimum};
pub use error::{Error, Result};
pub use exchangeable::{oracle_bound, BoundResult, Certificate, ExchangeableDistribution, Method};
pub use multiindex::{CountVector, Sequence};
pub use polynomial::SimplexPolynomial;
pub use solvers::Tolerances;
