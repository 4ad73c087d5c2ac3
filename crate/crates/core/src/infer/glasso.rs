//! Weighted graphical lasso.
//!
//! Maximizes `log det Θ − tr(SΘ) − Σ_ij Λ_ij |Θ_ij|` with `Λ = λ·W` over
//! symmetric positive definite `Θ`. Each iteration builds the second-order
//! model of the smooth part around the current iterate, minimizes it plus the
//! ℓ1 term by coordinate descent over the free set, and takes an Armijo step
//! that keeps `Θ` positive definite. The solver stops once the subgradient
//! optimality residual drops below the tolerance.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{check_symmetric, min_eigenvalue, SpdFactor, SYMMETRY_TOL};

const ARMIJO_SIGMA: f64 = 1e-3;
const MAX_SWEEPS: usize = 200;
const ROUNDING: f64 = 1e-13;
/// Inner sweeps stop once the largest update is this fraction of the first sweep's.
const SWEEP_REDUCTION: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GlassoOptions {
    /// Bound on the KKT residual certifying optimality.
    pub tol: f64,
    pub max_iter: usize,
    /// Whether `W_ii` enters the penalty; off-diagonal weights always do.
    pub penalize_diagonal: bool,
}

impl Default for GlassoOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_iter: 500, penalize_diagonal: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlassoResult {
    pub theta: DMatrix<f64>,
    pub iters: usize,
    pub kkt_residual: f64,
}

/// The penalty matrix `Λ = λ·W`, with a zero diagonal unless it is penalized.
pub fn penalty_matrix(w: &DMatrix<f64>, lam: f64, penalize_diagonal: bool) -> DMatrix<f64> {
    let n = w.nrows();
    DMatrix::from_fn(n, n, |i, j| if i == j && !penalize_diagonal { 0.0 } else { lam * w[(i, j)] })
}

/// `log det Θ − tr(SΘ) − Σ Λ_ij |Θ_ij|`, or `NotPD`.
pub fn glasso_objective(theta: &DMatrix<f64>, s: &DMatrix<f64>, penalty: &DMatrix<f64>) -> Result<f64> {
    let f = SpdFactor::new(theta)?;
    Ok(f.log_det() - s.component_mul(theta).sum() - l1(theta, penalty))
}

fn l1(theta: &DMatrix<f64>, penalty: &DMatrix<f64>) -> f64 {
    theta.zip_fold(penalty, 0.0, |acc, t, p| acc + p * t.abs())
}

/// Largest violation of the optimality conditions
/// `[Θ⁻¹ − S]_ij = Λ_ij sign(Θ_ij)` where `Θ_ij ≠ 0` and `|[Θ⁻¹ − S]_ij| ≤ Λ_ij` elsewhere.
pub fn glasso_kkt_residual(theta: &DMatrix<f64>, theta_inv: &DMatrix<f64>, s: &DMatrix<f64>, penalty: &DMatrix<f64>) -> f64 {
    let n = theta.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            let g = theta_inv[(i, j)] - s[(i, j)];
            let t = theta[(i, j)];
            let p = penalty[(i, j)];
            let r = if t != 0.0 { (g - p * t.signum()).abs() } else { (g.abs() - p).max(0.0) };
            worst = worst.max(r);
        }
    }
    worst
}

#[inline]
fn soft(z: f64, r: f64) -> f64 {
    if z > r {
        z - r
    } else if z < -r {
        z + r
    } else {
        0.0
    }
}

fn check_inputs(s: &DMatrix<f64>, w: &DMatrix<f64>, lam: f64, opts: &GlassoOptions) -> Result<()> {
    check_symmetric(s, SYMMETRY_TOL)?;
    if w.shape() != s.shape() {
        return Err(Error::ShapeMismatch(format!("weights {:?} for a covariance {:?}", w.shape(), s.shape())));
    }
    if s.iter().chain(w.iter()).any(|x| !x.is_finite()) || !lam.is_finite() {
        return Err(Error::NonFinite("graphical lasso input".into()));
    }
    if !(lam >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda = {lam}")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol = {}", opts.tol)));
    }
    let n = s.nrows();
    for i in 0..n {
        for j in 0..n {
            if (i != j || opts.penalize_diagonal) && !(w[(i, j)] > 0.0) {
                return Err(Error::InvalidWeights { i, j, value: w[(i, j)] });
            }
        }
    }
    let lmin = min_eigenvalue(s);
    if lmin < -1e-10 * s.amax().max(1.0) {
        return Err(Error::NotPSD(lmin));
    }
    Ok(())
}

/// Solves the weighted graphical lasso.
///
/// `start` must be symmetric positive definite when given; otherwise the
/// iteration starts from `diag(1 / (S_ii + Λ_ii))`.
pub fn weighted_glasso(
    s: &DMatrix<f64>,
    w: &DMatrix<f64>,
    lam: f64,
    opts: &GlassoOptions,
    start: Option<&DMatrix<f64>>,
) -> Result<GlassoResult> {
    check_inputs(s, w, lam, opts)?;
    let n = s.nrows();
    if lam == 0.0 {
        let f = SpdFactor::new(s).map_err(|_| Error::SingularAtZeroPenalty)?;
        return Ok(GlassoResult { theta: f.inverse(), iters: 0, kkt_residual: 0.0 });
    }
    let penalty = penalty_matrix(w, lam, opts.penalize_diagonal);
    for i in 0..n {
        if !(s[(i, i)] + penalty[(i, i)] > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "node {i} has zero variance and an unpenalized diagonal"
            )));
        }
    }

    let mut theta = match start {
        Some(t) => {
            check_symmetric(t, SYMMETRY_TOL)?;
            t.clone()
        }
        None => DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 / (s[(i, i)] + penalty[(i, i)]) } else { 0.0 }),
    };
    // Minimize f = −log det Θ + tr(SΘ) + ‖Θ‖_Λ.
    let mut factor = SpdFactor::new(&theta)?;
    let mut fval = -factor.log_det() + s.component_mul(&theta).sum() + l1(&theta, &penalty);

    let mut d = DMatrix::zeros(n, n);
    let mut u = DMatrix::zeros(n, n);
    for iter in 0..opts.max_iter {
        let wm = factor.inverse();
        let kkt = glasso_kkt_residual(&theta, &wm, s, &penalty);
        if kkt <= opts.tol {
            return Ok(GlassoResult { theta, iters: iter, kkt_residual: kkt });
        }
        let grad = s - &wm;

        let mut free = Vec::new();
        for j in 0..n {
            for i in 0..=j {
                if theta[(i, j)] != 0.0 || grad[(i, j)].abs() > penalty[(i, j)] {
                    free.push((i, j));
                }
            }
        }

        d.fill(0.0);
        u.fill(0.0);
        let mut first = None;
        for _ in 0..MAX_SWEEPS {
            let mut biggest = 0.0f64;
            for &(i, j) in &free {
                // (W D W)_ij = Σ_k W_ik U_kj with U = D W.
                let wdw: f64 = wm.column(i).dot(&u.column(j));
                let (a, b) = if i == j {
                    (wm[(i, i)] * wm[(i, i)], grad[(i, i)] + wdw)
                } else {
                    (wm[(i, j)] * wm[(i, j)] + wm[(i, i)] * wm[(j, j)], grad[(i, j)] + wdw)
                };
                let cur = theta[(i, j)] + d[(i, j)];
                let mu = -cur + soft(cur - b / a, penalty[(i, j)] / a);
                if mu == 0.0 {
                    continue;
                }
                biggest = biggest.max(mu.abs());
                d[(i, j)] += mu;
                if i != j {
                    d[(j, i)] += mu;
                }
                for k in 0..n {
                    u[(i, k)] += mu * wm[(j, k)];
                }
                if i != j {
                    for k in 0..n {
                        u[(j, k)] += mu * wm[(i, k)];
                    }
                }
            }
            let first = *first.get_or_insert(biggest);
            if biggest <= SWEEP_REDUCTION * first || biggest <= 1e-14 * (1.0 + theta.amax()) {
                break;
            }
        }

        if d.iter().all(|&x| x == 0.0) {
            return finish(theta, iter, kkt, opts);
        }
        let delta = grad.component_mul(&d).sum()
            + d.iter()
                .zip(theta.iter().zip(penalty.iter()))
                .filter(|(dx, _)| **dx != 0.0)
                .map(|(dx, (t, p))| p * ((t + dx).abs() - t.abs()))
                .sum::<f64>();
        // Below this predicted decrease the objective cannot resolve the Armijo test.
        let flat = delta > -ROUNDING * (1.0 + fval.abs());
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial = &theta + &d * alpha;
            if let Ok(ft) = SpdFactor::new(&trial) {
                let val = -ft.log_det() + s.component_mul(&trial).sum() + l1(&trial, &penalty);
                if flat || val <= fval + ARMIJO_SIGMA * alpha * delta {
                    theta = trial;
                    factor = ft;
                    fval = val;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            let kkt = glasso_kkt_residual(&theta, &factor.inverse(), s, &penalty);
            return finish(theta, iter, kkt, opts);
        }
    }
    let kkt = glasso_kkt_residual(&theta, &factor.inverse(), s, &penalty);
    finish(theta, opts.max_iter, kkt, opts)
}

fn finish(theta: DMatrix<f64>, iters: usize, kkt: f64, opts: &GlassoOptions) -> Result<GlassoResult> {
    if kkt <= opts.tol {
        Ok(GlassoResult { theta, iters, kkt_residual: kkt })
    } else {
        Err(Error::NoConvergence(format!(
            "graphical lasso stopped after {iters} iterations with KKT residual {kkt:e}"
        )))
    }
}
