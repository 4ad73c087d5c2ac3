//! Shared numerical kernels: projection onto the core-score constraint set,
//! SPD factorizations, Laplace sampling, seeded streams and a
//! finite-difference gradient used to check analytic gradients.

mod finite_diff;
mod laplace;
mod linalg;
mod projection;
mod rng;

pub use finite_diff::{finite_diff_grad, max_relative_error};
pub use laplace::sample_laplace;
pub use linalg::{
    abs_row_sums, asymmetry, check_symmetric, chol_logdet_inverse, is_positive_definite,
    min_eigenvalue, symmetrize, SpdFactor, SYMMETRY_TOL,
};
pub use projection::{
    project_simplex_box, shifted_mass_gap, SimplexBoxSet, DEFAULT_PROJECTION_TOL,
};
pub use rng::RngStream;
