//! Model hyperparameters and the two deterministic maps shared by the
//! generators and the solvers: the Laplace inverse-diversity weights
//! `w_ij = 1 − c_i − c_j + e·log(d_ij + ε)` and the precision matrix `K(c)`
//! of the nonlinear attribute model.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default distance offset ε.
pub const DEFAULT_EPS: f64 = 1e-5;

/// Hyperparameters shared by the generators and the solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    /// Laplace strength λ of the graph prior; also the ℓ1 weight of the
    /// attributes-only graph step.
    pub lambda: f64,
    /// Distance coupling `e`; must be 0 when no distances are supplied.
    pub e: f64,
    /// Distance offset ε inside `log(d_ij + ε)`.
    pub eps: f64,
    /// Ridge weight α on the affine parameters.
    pub alpha: f64,
    /// Attribute noise variance σ² of the real affine model.
    pub sigma2: f64,
    /// Sum constraint `M` on the core scores; `None` means `0.25·N`.
    pub mass: Option<f64>,
    /// Diagonal offset of `K(c)`; `None` selects [`default_kappa`].
    pub kappa: Option<f64>,
    /// Outer convergence tolerance on successive objective values.
    pub tol: f64,
    /// Maximum number of outer iterations.
    pub max_outer: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            e: 0.0,
            eps: DEFAULT_EPS,
            alpha: 0.1,
            sigma2: 1.0,
            mass: None,
            kappa: None,
            tol: 1e-4,
            max_outer: 200,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidParameter(format!("{what} = {v}")));
        if !(self.lambda > 0.0) {
            return bad("lambda", self.lambda);
        }
        if !(self.eps > 0.0) {
            return bad("eps", self.eps);
        }
        if !(self.sigma2 > 0.0) {
            return bad("sigma2", self.sigma2);
        }
        if !(self.alpha >= 0.0) {
            return bad("alpha", self.alpha);
        }
        if !(self.e >= 0.0) {
            return bad("e", self.e);
        }
        if !(self.tol > 0.0) {
            return bad("tol", self.tol);
        }
        if let Some(m) = self.mass {
            if !(m > 0.0) {
                return bad("mass", m);
            }
        }
        if self.max_outer == 0 {
            return Err(Error::InvalidParameter("max_outer = 0".into()));
        }
        Ok(())
    }

    /// The sum constraint for a graph with `n` nodes.
    pub fn mass_for(&self, n: usize) -> f64 {
        self.mass.unwrap_or(0.25 * n as f64)
    }
}

/// Latent coreness of each node, every entry in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoreScores(pub Vec<f64>);

impl CoreScores {
    pub fn new(c: Vec<f64>) -> Result<Self> {
        if let Some(i) = c.iter().position(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::InvalidParameter(format!(
                "core score {i} = {} outside [0, 1]",
                c[i]
            )));
        }
        Ok(Self(c))
    }

    pub fn uniform(n: usize, mass: f64) -> Self {
        Self(vec![mass / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for CoreScores {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Symmetric nonnegative spatial distances between nodes.
///
/// Off-diagonal entries come from the matrix; the diagonal is ignored and
/// `self_distance` is reported for `d_ii` instead.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    d: DMatrix<f64>,
    self_distance: f64,
}

impl DistanceMatrix {
    /// Default `d_ii`; `log(1 + ε) ≈ 0`, so the diagonal weight reduces to `1 − 2c_i`.
    pub const DEFAULT_SELF_DISTANCE: f64 = 1.0;

    pub fn new(d: DMatrix<f64>) -> Result<Self> {
        Self::with_self_distance(d, Self::DEFAULT_SELF_DISTANCE)
    }

    pub fn with_self_distance(d: DMatrix<f64>, self_distance: f64) -> Result<Self> {
        if d.nrows() != d.ncols() {
            return Err(Error::ShapeMismatch(format!(
                "distance matrix is {}x{}",
                d.nrows(),
                d.ncols()
            )));
        }
        if !(self_distance >= 0.0) {
            return Err(Error::InvalidParameter(format!("self distance {self_distance}")));
        }
        let n = d.nrows();
        for i in 0..n {
            for j in 0..n {
                let x = d[(i, j)];
                if !(x >= 0.0) || !x.is_finite() {
                    return Err(Error::InvalidParameter(format!("distance ({i}, {j}) = {x}")));
                }
                if (x - d[(j, i)]).abs() > 1e-12 * x.abs().max(1.0) {
                    return Err(Error::NotSymmetric((x - d[(j, i)]).abs()));
                }
            }
        }
        Ok(Self { d, self_distance })
    }

    pub fn n(&self) -> usize {
        self.d.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.self_distance
        } else {
            self.d[(i, j)]
        }
    }

    pub fn self_distance(&self) -> f64 {
        self.self_distance
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.d
    }
}

/// Per-feature slope/intercept pairs: row `k` is `(a_k, b_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineParams(pub DMatrix<f64>);

impl AffineParams {
    pub fn zeros(d: usize) -> Self {
        Self(DMatrix::zeros(d, 2))
    }

    pub fn new(f: DMatrix<f64>) -> Result<Self> {
        if f.ncols() != 2 {
            return Err(Error::ShapeMismatch(format!(
                "affine parameters need 2 columns, got {}",
                f.ncols()
            )));
        }
        if f.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("affine parameters".into()));
        }
        Ok(Self(f))
    }

    pub fn n_features(&self) -> usize {
        self.0.nrows()
    }

    pub fn slope(&self, k: usize) -> f64 {
        self.0[(k, 0)]
    }

    pub fn intercept(&self, k: usize) -> f64 {
        self.0[(k, 1)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

fn check_distance_args(n: usize, d: Option<&DistanceMatrix>, e: f64) -> Result<()> {
    match d {
        None if e != 0.0 => Err(Error::InvalidParameter(format!(
            "distance coupling e = {e} requires a distance matrix"
        ))),
        Some(d) if d.n() != n => Err(Error::ShapeMismatch(format!(
            "{} core scores but a {}x{} distance matrix",
            n,
            d.n(),
            d.n()
        ))),
        _ => Ok(()),
    }
}

#[inline]
fn distance_term(d: Option<&DistanceMatrix>, e: f64, eps: f64, i: usize, j: usize) -> f64 {
    match d {
        Some(d) if e != 0.0 => e * (d.get(i, j) + eps).ln(),
        _ => 0.0,
    }
}

/// `W_ij = 1 − c_i − c_j + e·log(d_ij + ε)`, including the diagonal.
///
/// Positivity is not checked here.
pub fn compute_weights(
    c: &CoreScores,
    d: Option<&DistanceMatrix>,
    e: f64,
    eps: f64,
) -> Result<DMatrix<f64>> {
    let n = c.len();
    check_distance_args(n, d, e)?;
    Ok(DMatrix::from_fn(n, n, |i, j| {
        1.0 - c[i] - c[j] + distance_term(d, e, eps, i, j)
    }))
}

/// Precision matrix of the nonlinear attribute model.
///
/// Off-diagonal `K_ij = −c_i − c_j + e·log(d_ij + ε)`, diagonal `K_ii = κ − 2c_i`,
/// so `∂K/∂c_i` is −1 on row/column `i`, −2 at `(i, i)`, 0 elsewhere.
pub fn build_precision(
    c: &[f64],
    d: Option<&DistanceMatrix>,
    e: f64,
    eps: f64,
    kappa: f64,
) -> Result<DMatrix<f64>> {
    let n = c.len();
    check_distance_args(n, d, e)?;
    Ok(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            kappa - 2.0 * c[i]
        } else {
            -c[i] - c[j] + distance_term(d, e, eps, i, j)
        }
    }))
}

/// `2 + 2·max_{i≠j} |K_ij|` evaluated at the uniform scores `c = M/N·1`.
pub fn default_kappa(n: usize, mass: f64, d: Option<&DistanceMatrix>, e: f64, eps: f64) -> Result<f64> {
    check_distance_args(n, d, e)?;
    let u = mass / n as f64;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((-2.0 * u + distance_term(d, e, eps, i, j)).abs());
        }
    }
    Ok(2.0 + 2.0 * worst)
}
