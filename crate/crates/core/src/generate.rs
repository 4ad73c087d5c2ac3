//! Synthetic data for the four generative models.
//!
//! Core scores and distances follow the benchmark protocol: the first
//! `⌊frac_core·n⌋` nodes are core nodes with scores in `[0.9, 1]`, the rest
//! periphery nodes with scores in `[0, 0.01]`; log-distances between core
//! nodes lie in `[1, 1.05]`, every other pair in `[1.2, 1.205]`. Graphs are
//! drawn edge by edge from the Laplace prior, and attributes from the affine,
//! nonlinear or graphical model on top of them.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_precision, compute_weights, default_kappa, AffineParams, CoreScores, DistanceMatrix, Hyperparams};
use crate::numerics::{min_eigenvalue, sample_laplace, symmetrize, RngStream, SpdFactor};

/// Minimum eigenvalue enforced when repairing a sampled graph into a precision matrix.
pub const PD_REPAIR_DELTA: f64 = 1e-3;

/// Parameters of the synthetic core-periphery protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub n: usize,
    pub frac_core: f64,
    pub core_range: [f64; 2],
    pub periph_range: [f64; 2],
    pub logdist_core: [f64; 2],
    pub logdist_periph: [f64; 2],
    pub e: f64,
    pub d_attr: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n: 60,
            frac_core: 0.5,
            core_range: [0.9, 1.0],
            periph_range: [0.0, 0.01],
            logdist_core: [1.0, 1.05],
            logdist_periph: [1.2, 1.205],
            e: 1.0,
            d_attr: 30,
        }
    }
}

impl SyntheticSpec {
    pub fn with_core_fraction(frac_core: f64) -> Self {
        Self { frac_core, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("n = 0".into()));
        }
        if !(0.0..=1.0).contains(&self.frac_core) {
            return Err(Error::InvalidParameter(format!(
                "frac_core = {} outside [0, 1]",
                self.frac_core
            )));
        }
        for (name, r) in [
            ("core_range", self.core_range),
            ("periph_range", self.periph_range),
            ("logdist_core", self.logdist_core),
            ("logdist_periph", self.logdist_periph),
        ] {
            if !(r[0] <= r[1]) || !r[0].is_finite() || !r[1].is_finite() {
                return Err(Error::InvalidParameter(format!("{name} = {r:?} is not an interval")));
            }
        }
        for (name, r) in [("core_range", self.core_range), ("periph_range", self.periph_range)] {
            if r[0] < 0.0 || r[1] > 1.0 {
                return Err(Error::InvalidParameter(format!("{name} = {r:?} leaves [0, 1]")));
            }
        }
        if !(self.e >= 0.0) {
            return Err(Error::InvalidParameter(format!("e = {}", self.e)));
        }
        Ok(())
    }

    /// Number of core nodes, `⌊frac_core·n⌋`.
    pub fn n_core(&self) -> usize {
        ((self.frac_core * self.n as f64) + 1e-9).floor() as usize
    }
}

/// Draws ground-truth core scores and the pairwise distance matrix.
///
/// Core–periphery pairs use the periphery log-distance range.
pub fn gen_core_scores(spec: &SyntheticSpec, rng: &mut RngStream) -> Result<(CoreScores, DistanceMatrix)> {
    spec.validate()?;
    let n = spec.n;
    let n_core = spec.n_core();
    let c: Vec<f64> = (0..n)
        .map(|i| {
            let r = if i < n_core { spec.core_range } else { spec.periph_range };
            rng.uniform_range(r[0], r[1])
        })
        .collect();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let r = if i < n_core && j < n_core {
                spec.logdist_core
            } else {
                spec.logdist_periph
            };
            let v = rng.uniform_range(r[0], r[1]).exp();
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    Ok((CoreScores(c), DistanceMatrix::new(d)?))
}

/// Draws a signed weighted graph from the Laplace prior with rate `λ·w_ij`.
///
/// The diagonal is zero and each upper-triangle entry is mirrored.
pub fn gen_graph(
    c: &CoreScores,
    d: Option<&DistanceMatrix>,
    hyper: &Hyperparams,
    rng: &mut RngStream,
) -> Result<DMatrix<f64>> {
    if !(hyper.lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda = {}", hyper.lambda)));
    }
    let w = compute_weights(c, d, hyper.e, hyper.eps)?;
    let n = c.len();
    for i in 0..n {
        for j in (i + 1)..n {
            if !(w[(i, j)] > 0.0) {
                return Err(Error::InvalidWeights { i, j, value: w[(i, j)] });
            }
        }
    }
    let mut theta = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let x = sample_laplace(hyper.lambda * w[(i, j)], rng)?;
            theta[(i, j)] = x;
            theta[(j, i)] = x;
        }
    }
    Ok(theta)
}

/// Affine parameters with i.i.d. standard normal entries.
pub fn gen_affine_params(d_attr: usize, rng: &mut RngStream) -> AffineParams {
    let mut f = DMatrix::zeros(d_attr, 2);
    for k in 0..d_attr {
        f[(k, 0)] = rng.standard_normal();
        f[(k, 1)] = rng.standard_normal();
    }
    AffineParams(f)
}

#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Binary attributes `x_ik ~ Bernoulli(σ(a_k c_i + b_k))`.
pub fn gen_attr_bool(c: &CoreScores, f: &AffineParams, rng: &mut RngStream) -> DMatrix<f64> {
    let (n, d) = (c.len(), f.n_features());
    let mut x = DMatrix::zeros(n, d);
    for i in 0..n {
        for k in 0..d {
            let p = sigmoid(f.slope(k) * c[i] + f.intercept(k));
            x[(i, k)] = if rng.bernoulli(p) { 1.0 } else { 0.0 };
        }
    }
    x
}

/// Real attributes `x_ik ~ N(a_k c_i + b_k, σ²)`.
pub fn gen_attr_real(c: &CoreScores, f: &AffineParams, sigma2: f64, rng: &mut RngStream) -> Result<DMatrix<f64>> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::InvalidVariance(sigma2));
    }
    let sd = sigma2.sqrt();
    let (n, d) = (c.len(), f.n_features());
    let mut x = DMatrix::zeros(n, d);
    for i in 0..n {
        for k in 0..d {
            x[(i, k)] = f.slope(k) * c[i] + f.intercept(k) + sd * rng.standard_normal();
        }
    }
    Ok(x)
}

/// `d_attr` i.i.d. columns from `N(0, P⁻¹)` given a Cholesky factor of `P`.
fn sample_from_precision(factor: &SpdFactor, n: usize, d_attr: usize, rng: &mut RngStream) -> DMatrix<f64> {
    // P = L Lᵀ, so x = L⁻ᵀ z has covariance P⁻¹.
    let lt = factor.l().transpose();
    let mut x = DMatrix::zeros(n, d_attr);
    for k in 0..d_attr {
        let z = DVector::from_fn(n, |_, _| rng.standard_normal());
        let col = lt
            .solve_upper_triangular(&z)
            .expect("Cholesky factor has a positive diagonal");
        x.set_column(k, &col);
    }
    x
}

/// Attributes of the nonlinear model: columns i.i.d. `N(0, K(c)⁻¹)`.
///
/// Uses `hyper.kappa`, or [`default_kappa`] at the mass of `c` when unset.
pub fn gen_attr_nonlinear(
    c: &CoreScores,
    d: Option<&DistanceMatrix>,
    hyper: &Hyperparams,
    d_attr: usize,
    rng: &mut RngStream,
) -> Result<DMatrix<f64>> {
    let n = c.len();
    let kappa = match hyper.kappa {
        Some(k) => k,
        None => default_kappa(n, c.sum(), d, hyper.e, hyper.eps)?,
    };
    let k = build_precision(c.as_slice(), d, hyper.e, hyper.eps, kappa)?;
    let factor = SpdFactor::new(&k)?;
    Ok(sample_from_precision(&factor, n, d_attr, rng))
}

/// Smallest `κ` of the form `default_kappa·2^k` (`k ≤ 8`) for which `K(c)` is
/// positive definite.
pub fn feasible_kappa(c: &CoreScores, d: Option<&DistanceMatrix>, e: f64, eps: f64) -> Result<f64> {
    let mut kappa = default_kappa(c.len(), c.sum(), d, e, eps)?;
    for _ in 0..=8 {
        let k = build_precision(c.as_slice(), d, e, eps, kappa)?;
        if SpdFactor::new(&k).is_ok() {
            return Ok(kappa);
        }
        kappa *= 2.0;
    }
    Err(Error::InfeasibleStart(kappa / 2.0))
}

/// Shifts the diagonal of a symmetrized `theta` so that its smallest
/// eigenvalue is at least `delta`.
pub fn repair_precision(theta: &DMatrix<f64>, delta: f64) -> DMatrix<f64> {
    let mut t = theta.clone();
    symmetrize(&mut t);
    let lmin = min_eigenvalue(&t);
    if lmin < delta {
        let shift = delta - lmin;
        for i in 0..t.nrows() {
            t[(i, i)] += shift;
        }
    }
    t
}

/// Attributes of the attributes-only model.
///
/// Returns `(X, Θ_pd)` where `Θ_pd` is the repaired precision actually used to
/// draw the columns of `X` from `N(0, Θ_pd⁻¹)`.
pub fn gen_attr_ao(theta: &DMatrix<f64>, d_attr: usize, rng: &mut RngStream) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    gen_attr_ao_with_margin(theta, d_attr, PD_REPAIR_DELTA, rng)
}

/// [`gen_attr_ao`] with an explicit minimum eigenvalue `delta` for the repaired graph.
pub fn gen_attr_ao_with_margin(
    theta: &DMatrix<f64>,
    d_attr: usize,
    delta: f64,
    rng: &mut RngStream,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if theta.nrows() != theta.ncols() {
        return Err(Error::ShapeMismatch("graph must be square".into()));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("repair margin = {delta}")));
    }
    let mut theta_pd = repair_precision(theta, delta);
    let factor = loop {
        // The eigen shift can land a hair below zero in floating point.
        match SpdFactor::new(&theta_pd) {
            Ok(f) => break f,
            Err(Error::NotPD) => {
                for i in 0..theta_pd.nrows() {
                    theta_pd[(i, i)] += delta;
                }
            }
            Err(e) => return Err(e),
        }
    };
    let x = sample_from_precision(&factor, theta.nrows(), d_attr, rng);
    Ok((x, theta_pd))
}
