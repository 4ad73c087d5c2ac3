//! Dense SPD helpers built on nalgebra's Cholesky factorization.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Relative tolerance used by [`check_symmetric`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Largest absolute asymmetry `max |A_ij − A_ji|`.
pub fn asymmetry(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

/// Checks that `a` is square and symmetric to `rel_tol` relative to its largest entry.
pub fn check_symmetric(a: &DMatrix<f64>, rel_tol: f64) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let scale = a.amax().max(f64::MIN_POSITIVE);
    let dev = asymmetry(a);
    if dev > rel_tol * scale {
        return Err(Error::NotSymmetric(dev));
    }
    Ok(())
}

/// Cholesky factor of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    chol: Cholesky<f64, Dyn>,
}

impl SpdFactor {
    /// Factorizes `k`; `NotPD` when a non-positive pivot is met.
    pub fn new(k: &DMatrix<f64>) -> Result<Self> {
        if k.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("matrix passed to Cholesky".into()));
        }
        Cholesky::new(k.clone())
            .map(|chol| Self { chol })
            .ok_or(Error::NotPD)
    }

    pub fn log_det(&self) -> f64 {
        2.0 * self.chol.l_dirty().diagonal().iter().map(|x| x.ln()).sum::<f64>()
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        let mut inv = self.chol.inverse();
        symmetrize(&mut inv);
        inv
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(b)
    }

    /// Lower-triangular factor `L` with `K = L·Lᵀ`.
    pub fn l(&self) -> DMatrix<f64> {
        self.chol.l()
    }
}

/// `(log det K, K⁻¹)` for a symmetric matrix, or `NotPD`.
pub fn chol_logdet_inverse(k: &DMatrix<f64>) -> Result<(f64, DMatrix<f64>)> {
    check_symmetric(k, SYMMETRY_TOL)?;
    let f = SpdFactor::new(k)?;
    Ok((f.log_det(), f.inverse()))
}

/// Whether `k` admits a Cholesky factorization.
pub fn is_positive_definite(k: &DMatrix<f64>) -> bool {
    SpdFactor::new(k).is_ok()
}

/// Replaces `a` by `(a + aᵀ)/2`.
pub fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = m;
            a[(j, i)] = m;
        }
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    a.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Row sums of `|A|`, optionally skipping the diagonal.
pub fn abs_row_sums(a: &DMatrix<f64>, include_diagonal: bool) -> Vec<f64> {
    (0..a.nrows())
        .map(|i| {
            (0..a.ncols())
                .filter(|&j| include_diagonal || i != j)
                .map(|j| a[(i, j)].abs())
                .sum()
        })
        .collect()
}
