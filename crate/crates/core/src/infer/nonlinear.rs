//! GA-Nonlinear: attributes are Gaussian with precision `K(c)`.
//!
//! ```text
//! L₃(c) = 2gᵀc + log det K(c) − tr(S K(c)),     ∇L₃ = 2g − 2K⁻¹1 + 2S1
//! ```
//!
//! `L₃` is concave on the PD region, so projected gradient ascent with
//! backtracking on both the Armijo test and the Cholesky factorization reaches
//! the maximizer over `{Σc = M, 0 ≤ c ≤ 1}`.

use nalgebra::{DMatrix, DVector};

use super::{check_finite, check_graph, degree_start, projected_ascent_step};
use crate::error::{Error, Result};
use crate::model::{build_precision, default_kappa, CoreScores, DistanceMatrix, Hyperparams};
use crate::numerics::{abs_row_sums, symmetrize, SimplexBoxSet, SpdFactor};

/// Gradient-step budget of [`fit_nonlinear`].
pub const MAX_GRADIENT_STEPS: usize = 500;

/// Number of times the default `κ` is doubled before giving up.
pub const KAPPA_DOUBLINGS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearFitResult {
    pub c: CoreScores,
    /// Objective at the start and after every accepted gradient step.
    pub objective_trace: Vec<f64>,
    pub iters: usize,
    pub converged: bool,
    /// The `κ` actually used.
    pub kappa: f64,
}

/// `S = X Xᵀ / d` for an `N×d` attribute matrix, optionally after removing row means.
pub fn sample_covariance(x: &DMatrix<f64>, center: bool) -> Result<DMatrix<f64>> {
    let d = x.ncols();
    if d == 0 || x.nrows() == 0 {
        return Err(Error::EmptyData);
    }
    check_finite(x, "attribute")?;
    let mut s = if center {
        let mut xc = x.clone();
        for mut row in xc.row_iter_mut() {
            let m = row.mean();
            row.add_scalar_mut(-m);
        }
        &xc * xc.transpose()
    } else {
        x * x.transpose()
    };
    s /= d as f64;
    symmetrize(&mut s);
    Ok(s)
}

/// Problem data of the nonlinear model with a fixed `κ`.
pub struct NonlinearObjective<'a> {
    g: Vec<f64>,
    s: &'a DMatrix<f64>,
    s_row_sums: Vec<f64>,
    d: Option<&'a DistanceMatrix>,
    e: f64,
    eps: f64,
    kappa: f64,
}

impl<'a> NonlinearObjective<'a> {
    pub fn new(
        theta: &DMatrix<f64>,
        s: &'a DMatrix<f64>,
        d: Option<&'a DistanceMatrix>,
        e: f64,
        eps: f64,
        kappa: f64,
    ) -> Self {
        let s_row_sums = s.row_iter().map(|r| r.sum()).collect();
        Self { g: abs_row_sums(theta, true), s, s_row_sums, d, e, eps, kappa }
    }

    fn precision(&self, c: &[f64]) -> Result<DMatrix<f64>> {
        build_precision(c, self.d, self.e, self.eps, self.kappa)
    }

    /// `L₃(c)`, or `NotPD` outside the domain.
    pub fn value(&self, c: &[f64]) -> Result<f64> {
        let k = self.precision(c)?;
        let f = SpdFactor::new(&k)?;
        let graph = 2.0 * self.g.iter().zip(c).map(|(a, b)| a * b).sum::<f64>();
        Ok(graph + f.log_det() - self.s.component_mul(&k).sum())
    }

    /// `2g − 2K⁻¹1 + 2S1`.
    pub fn gradient(&self, c: &[f64]) -> Result<Vec<f64>> {
        let k = self.precision(c)?;
        let f = SpdFactor::new(&k)?;
        let kinv1 = f.solve(&DVector::from_element(c.len(), 1.0));
        Ok((0..c.len())
            .map(|i| 2.0 * self.g[i] - 2.0 * kinv1[i] + 2.0 * self.s_row_sums[i])
            .collect())
    }
}

/// `2|Θ|1 − 2K⁻¹(c)1 + 2S1`.
pub fn grad_c_nonlinear(
    theta: &DMatrix<f64>,
    s: &DMatrix<f64>,
    c: &[f64],
    d: Option<&DistanceMatrix>,
    e: f64,
    eps: f64,
    kappa: f64,
) -> Result<Vec<f64>> {
    NonlinearObjective::new(theta, s, d, e, eps, kappa).gradient(c)
}

pub fn objective_nonlinear(
    theta: &DMatrix<f64>,
    s: &DMatrix<f64>,
    c: &[f64],
    d: Option<&DistanceMatrix>,
    e: f64,
    eps: f64,
    kappa: f64,
) -> Result<f64> {
    NonlinearObjective::new(theta, s, d, e, eps, kappa).value(c)
}

/// Fits GA-Nonlinear from a graph and raw (uncentered) attributes.
pub fn fit_nonlinear(
    theta: &DMatrix<f64>,
    x: &DMatrix<f64>,
    d: Option<&DistanceMatrix>,
    hyper: &Hyperparams,
) -> Result<NonlinearFitResult> {
    let s = sample_covariance(x, false)?;
    fit_nonlinear_cov(theta, &s, d, hyper)
}

/// Fits GA-Nonlinear from a graph and a sample covariance.
pub fn fit_nonlinear_cov(
    theta: &DMatrix<f64>,
    s: &DMatrix<f64>,
    d: Option<&DistanceMatrix>,
    hyper: &Hyperparams,
) -> Result<NonlinearFitResult> {
    hyper.validate()?;
    let n = s.nrows();
    if n == 0 {
        return Err(Error::EmptyData);
    }
    check_graph(theta, n)?;
    check_graph(s, n)?;
    let mass = hyper.mass_for(n);
    let set = SimplexBoxSet::new(n, mass)?;
    let c0 = degree_start(&abs_row_sums(theta, true), &set)?;

    let mut kappa = match hyper.kappa {
        Some(k) => k,
        None => default_kappa(n, mass, d, hyper.e, hyper.eps)?,
    };
    let mut start = None;
    for _ in 0..=KAPPA_DOUBLINGS {
        let obj = NonlinearObjective::new(theta, s, d, hyper.e, hyper.eps, kappa);
        match obj.value(&c0) {
            Ok(v) => {
                start = Some(v);
                break;
            }
            Err(Error::NotPD) => kappa *= 2.0,
            Err(e) => return Err(e),
        }
    }
    let Some(mut val) = start else {
        return Err(Error::InfeasibleStart(kappa / 2.0));
    };
    if hyper.kappa.is_some_and(|k| k != kappa) {
        log::warn!("kappa raised from {:?} to {kappa} to make the start feasible", hyper.kappa);
    }
    if !val.is_finite() {
        return Err(Error::NonFinite("initial objective".into()));
    }

    let obj = NonlinearObjective::new(theta, s, d, hyper.e, hyper.eps, kappa);
    let mut c = c0;
    let mut trace = vec![val];
    let mut converged = false;
    let mut iters = 0;
    while iters < MAX_GRADIENT_STEPS {
        let f = |cc: &[f64]| obj.value(cc).ok();
        let (next, vnext, steps) = single_step(f, |cc| obj.gradient(cc), &c, val, &set)?;
        if steps == 0 {
            converged = true;
            break;
        }
        iters += 1;
        let prev = val;
        c = next;
        val = vnext;
        trace.push(val);
        if (val - prev).abs() < hyper.tol {
            converged = true;
            break;
        }
    }
    Ok(NonlinearFitResult { c: CoreScores(c), objective_trace: trace, iters, converged, kappa })
}

fn single_step<F, G>(f: F, grad: G, c: &[f64], fc: f64, set: &SimplexBoxSet) -> Result<(Vec<f64>, f64, usize)>
where
    F: Fn(&[f64]) -> Option<f64>,
    G: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let g = grad(c)?;
    match projected_ascent_step(f, c, fc, &g, set)? {
        Some((next, v)) => Ok((next, v, 1)),
        None => Ok((c.to_vec(), fc, 0)),
    }
}
