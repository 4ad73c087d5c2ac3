//! Evaluation scores for recovered core scores and graphs.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// `aᵀb / (‖a‖‖b‖)`.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!(
            "cosine of vectors of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(na > 0.0) || !(nb > 0.0) {
        return Err(Error::ZeroVector);
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// The ideal core-periphery matrix: an all-ones `a×a` block in the top-left corner.
pub fn ideal_cp(n: usize, a: usize) -> DMatrix<f64> {
    let a = a.min(n);
    DMatrix::from_fn(n, n, |i, j| if i < a && j < a { 1.0 } else { 0.0 })
}

/// Node indices sorted by decreasing score, ties by ascending index.
pub fn core_order(c: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..c.len()).collect();
    idx.sort_by(|&i, &j| c[j].total_cmp(&c[i]).then(i.cmp(&j)));
    idx
}

/// `|Θ|` with rows and columns permuted by `order`.
pub fn permuted_abs(theta: &DMatrix<f64>, order: &[usize]) -> DMatrix<f64> {
    let n = order.len();
    DMatrix::from_fn(n, n, |i, j| theta[(order[i], order[j])].abs())
}

/// Frobenius distance between the ideal core-periphery matrix with `⌊N/4⌋`
/// core nodes and `|Θ|` reordered by decreasing `c`, scaled to `[0, 1]`.
///
/// For an all-zero graph the reordered matrix is taken as zero and a warning
/// is logged.
pub fn cp_frobenius(theta_true: &DMatrix<f64>, c: &[f64]) -> Result<f64> {
    let n = theta_true.nrows();
    if theta_true.ncols() != n || c.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "graph {}x{} scored with {} core scores",
            theta_true.nrows(),
            theta_true.ncols(),
            c.len()
        )));
    }
    let ideal = ideal_cp(n, n / 4);
    let mut t = permuted_abs(theta_true, &core_order(c));
    let max = t.amax();
    if max > 0.0 {
        t /= max;
    } else {
        log::warn!("cp_frobenius on an all-zero graph; normalization undefined");
    }
    Ok((ideal - t).norm())
}

/// Cosine similarity of the absolute off-diagonal entries of two graphs.
pub fn edge_cosine(theta_a: &DMatrix<f64>, theta_b: &DMatrix<f64>) -> Result<f64> {
    if theta_a.shape() != theta_b.shape() || theta_a.nrows() != theta_a.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "edge cosine of {:?} and {:?} graphs",
            theta_a.shape(),
            theta_b.shape()
        )));
    }
    let n = theta_a.nrows();
    let mut va = Vec::with_capacity(n * n);
    let mut vb = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            if i != j {
                va.push(theta_a[(i, j)].abs());
                vb.push(theta_b[(i, j)].abs());
            }
        }
    }
    cosine_similarity(&va, &vb)
}
