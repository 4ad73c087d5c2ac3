//! GA-Affine-Bool and GA-Affine-Real.
//!
//! Both objectives share the graph term `2gᵀc` with `g = |Θ|1` and differ in
//! the attribute likelihood:
//!
//! ```text
//! L₁(c, F) = 2gᵀc + Σ_ik [x_ik z_ik − log(1 + e^{z_ik})] − α‖F‖²,   z = c aᵀ + 1 bᵀ
//! L₂(c, F) = 2gᵀc − ‖X − C Fᵀ‖² − α‖F‖²,                          C = [c, 1]
//! ```
//!
//! The fit alternates projected gradient ascent on `c` over
//! `{Σc = M, 0 ≤ c ≤ 1}` with gradient ascent on `F`.

use nalgebra::{DMatrix, Matrix2};

use super::{ascend_scores, check_finite, check_graph, degree_start, ARMIJO_SHRINK, ARMIJO_SLOPE, INITIAL_STEP, INNER_MAX_STEPS, INNER_TOL};
use crate::error::{Error, Result};
use crate::generate::sigmoid;
use crate::model::{AffineParams, CoreScores, Hyperparams};
use crate::numerics::{abs_row_sums, SimplexBoxSet};

#[derive(Debug, Clone, PartialEq)]
pub struct AffineFitResult {
    pub c: CoreScores,
    pub f: AffineParams,
    /// Objective at the start and after every outer iteration.
    pub objective_trace: Vec<f64>,
    pub outer_iters: usize,
    pub converged: bool,
}

/// `P_ik = σ(a_k c_i + b_k)`.
pub fn logistic_probs(c: &[f64], f: &AffineParams) -> DMatrix<f64> {
    DMatrix::from_fn(c.len(), f.n_features(), |i, k| sigmoid(f.slope(k) * c[i] + f.intercept(k)))
}

#[inline]
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn graph_term(g: &[f64], c: &[f64]) -> f64 {
    2.0 * g.iter().zip(c).map(|(a, b)| a * b).sum::<f64>()
}

fn ridge(f: &AffineParams, alpha: f64) -> f64 {
    alpha * f.matrix().norm_squared()
}

/// `2gᵀc + Σ[x z − softplus(z)] − α‖F‖²` with `g` the row sums of `|Θ|`.
pub fn objective_bool_with_gains(g: &[f64], x: &DMatrix<f64>, c: &[f64], f: &AffineParams, alpha: f64) -> f64 {
    let mut ll = 0.0;
    for k in 0..x.ncols() {
        let (a, b) = (f.slope(k), f.intercept(k));
        for i in 0..x.nrows() {
            let z = a * c[i] + b;
            ll += x[(i, k)] * z - softplus(z);
        }
    }
    graph_term(g, c) + ll - ridge(f, alpha)
}

pub fn objective_bool(theta: &DMatrix<f64>, x: &DMatrix<f64>, c: &[f64], f: &AffineParams, alpha: f64) -> f64 {
    objective_bool_with_gains(&abs_row_sums(theta, true), x, c, f, alpha)
}

/// `2|Θ|1 + (X − P)a`.
pub fn grad_c_bool(theta: &DMatrix<f64>, x: &DMatrix<f64>, p: &DMatrix<f64>, f: &AffineParams) -> Vec<f64> {
    grad_c_bool_with_gains(&abs_row_sums(theta, true), x, p, f)
}

fn grad_c_bool_with_gains(g: &[f64], x: &DMatrix<f64>, p: &DMatrix<f64>, f: &AffineParams) -> Vec<f64> {
    let a = f.matrix().column(0);
    let data = (x - p) * a;
    g.iter().zip(data.iter()).map(|(gi, di)| 2.0 * gi + di).collect()
}

fn design(c: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(c.len(), 2, |i, j| if j == 0 { c[i] } else { 1.0 })
}

/// `(X − P)ᵀC − 2αF` with `C = [c, 1]`.
pub fn grad_f_bool(x: &DMatrix<f64>, p: &DMatrix<f64>, c: &[f64], f: &AffineParams, alpha: f64) -> DMatrix<f64> {
    (x - p).transpose() * design(c) - f.matrix() * (2.0 * alpha)
}

fn residual(x: &DMatrix<f64>, c: &[f64], f: &AffineParams) -> DMatrix<f64> {
    x - design(c) * f.matrix().transpose()
}

pub fn objective_real_with_gains(g: &[f64], x: &DMatrix<f64>, c: &[f64], f: &AffineParams, alpha: f64) -> f64 {
    graph_term(g, c) - residual(x, c, f).norm_squared() - ridge(f, alpha)
}

/// `2gᵀc − ‖X − CFᵀ‖² − α‖F‖²`.
pub fn objective_real(theta: &DMatrix<f64>, x: &DMatrix<f64>, c: &[f64], f: &AffineParams, alpha: f64) -> f64 {
    objective_real_with_gains(&abs_row_sums(theta, true), x, c, f, alpha)
}

/// `2|Θ|1 + 2(X − CFᵀ)a`.
pub fn grad_c_real(theta: &DMatrix<f64>, x: &DMatrix<f64>, c: &[f64], f: &AffineParams) -> Vec<f64> {
    grad_c_real_with_gains(&abs_row_sums(theta, true), x, c, f)
}

fn grad_c_real_with_gains(g: &[f64], x: &DMatrix<f64>, c: &[f64], f: &AffineParams) -> Vec<f64> {
    let data = residual(x, c, f) * f.matrix().column(0);
    g.iter().zip(data.iter()).map(|(gi, di)| 2.0 * gi + 2.0 * di).collect()
}

/// `2(X − CFᵀ)ᵀC − 2αF`.
pub fn grad_f_real(x: &DMatrix<f64>, c: &[f64], f: &AffineParams, alpha: f64) -> DMatrix<f64> {
    (residual(x, c, f).transpose() * design(c)) * 2.0 - f.matrix() * (2.0 * alpha)
}

/// Exact maximizer of `−‖X − CFᵀ‖² − α‖F‖²` over `F` for fixed `c`.
fn ridge_regression(x: &DMatrix<f64>, c: &[f64], alpha: f64) -> AffineParams {
    let cm = design(c);
    let gram = cm.transpose() * &cm;
    let mut reg: Matrix2<f64> = Matrix2::new(gram[(0, 0)], gram[(0, 1)], gram[(1, 0)], gram[(1, 1)]);
    let jitter = alpha.max(1e-12 * (1.0 + reg.trace()));
    reg[(0, 0)] += jitter;
    reg[(1, 1)] += jitter;
    let inv = reg.try_inverse().unwrap_or_else(Matrix2::zeros);
    let inv = DMatrix::from_fn(2, 2, |i, j| inv[(i, j)]);
    AffineParams(x.transpose() * cm * inv)
}

#[derive(Clone, Copy)]
enum Likelihood {
    Bool,
    Real,
}

struct Problem<'a> {
    g: Vec<f64>,
    x: &'a DMatrix<f64>,
    alpha: f64,
    kind: Likelihood,
}

impl Problem<'_> {
    fn objective(&self, c: &[f64], f: &AffineParams) -> f64 {
        match self.kind {
            Likelihood::Bool => objective_bool_with_gains(&self.g, self.x, c, f, self.alpha),
            Likelihood::Real => objective_real_with_gains(&self.g, self.x, c, f, self.alpha),
        }
    }

    fn grad_c(&self, c: &[f64], f: &AffineParams) -> Vec<f64> {
        match self.kind {
            Likelihood::Bool => grad_c_bool_with_gains(&self.g, self.x, &logistic_probs(c, f), f),
            Likelihood::Real => grad_c_real_with_gains(&self.g, self.x, c, f),
        }
    }

    fn grad_f(&self, c: &[f64], f: &AffineParams) -> DMatrix<f64> {
        match self.kind {
            Likelihood::Bool => grad_f_bool(self.x, &logistic_probs(c, f), c, f, self.alpha),
            Likelihood::Real => grad_f_real(self.x, c, f, self.alpha),
        }
    }

    /// Gradient ascent on `F` with Armijo backtracking.
    fn ascend_params(&self, c: &[f64], mut f: AffineParams, mut val: f64) -> (AffineParams, f64) {
        for _ in 0..INNER_MAX_STEPS {
            let g = self.grad_f(c, &f);
            let gsq = g.norm_squared();
            if gsq == 0.0 {
                break;
            }
            let mut rho = INITIAL_STEP;
            let mut accepted = None;
            for _ in 0..60 {
                let trial = AffineParams(f.matrix() + &g * rho);
                let vt = self.objective(c, &trial);
                if vt.is_finite() && vt >= val + ARMIJO_SLOPE * rho * gsq {
                    accepted = Some((trial, vt));
                    break;
                }
                rho *= ARMIJO_SHRINK;
            }
            match accepted {
                Some((trial, vt)) => {
                    let done = vt - val < INNER_TOL;
                    f = trial;
                    val = vt;
                    if done {
                        break;
                    }
                }
                None => break,
            }
        }
        (f, val)
    }

    fn fit(&self, theta_n: usize, hyper: &Hyperparams) -> Result<AffineFitResult> {
        let set = SimplexBoxSet::new(theta_n, hyper.mass_for(theta_n))?;
        let mut c = degree_start(&self.g, &set)?;
        let mut f = match self.kind {
            Likelihood::Bool => AffineParams::zeros(self.x.ncols()),
            Likelihood::Real => ridge_regression(self.x, &c, hyper.alpha),
        };
        let mut val = self.objective(&c, &f);
        if !val.is_finite() {
            return Err(Error::NonFinite("initial objective".into()));
        }
        let mut trace = vec![val];
        let mut converged = false;
        let mut outer = 0;
        while outer < hyper.max_outer {
            outer += 1;
            let fref = &f;
            let (c_new, v1, _) = ascend_scores(
                |cc| Some(self.objective(cc, fref)),
                |cc| Ok(self.grad_c(cc, fref)),
                c,
                val,
                &set,
            )?;
            c = c_new;
            let (f_new, v2) = self.ascend_params(&c, f, v1);
            f = f_new;
            let prev = val;
            val = v2;
            trace.push(val);
            log::debug!("affine outer {outer}: objective {val}");
            if (val - prev).abs() < hyper.tol {
                converged = true;
                break;
            }
        }
        Ok(AffineFitResult { c: CoreScores(c), f, objective_trace: trace, outer_iters: outer, converged })
    }
}

fn check_inputs(theta: &DMatrix<f64>, x: &DMatrix<f64>, hyper: &Hyperparams) -> Result<()> {
    hyper.validate()?;
    if x.nrows() == 0 {
        return Err(Error::EmptyData);
    }
    check_graph(theta, x.nrows())?;
    check_finite(x, "attribute")
}

/// Fits GA-Affine-Bool to a graph and binary attributes.
pub fn fit_bool(theta: &DMatrix<f64>, x: &DMatrix<f64>, hyper: &Hyperparams) -> Result<AffineFitResult> {
    check_inputs(theta, x, hyper)?;
    for k in 0..x.ncols() {
        for i in 0..x.nrows() {
            let v = x[(i, k)];
            if v != 0.0 && v != 1.0 {
                return Err(Error::NonBinaryAttributes(i, k, v));
            }
        }
    }
    let p = Problem { g: abs_row_sums(theta, true), x, alpha: hyper.alpha, kind: Likelihood::Bool };
    p.fit(x.nrows(), hyper)
}

/// Fits GA-Affine-Real to a graph and real attributes.
pub fn fit_real(theta: &DMatrix<f64>, x: &DMatrix<f64>, hyper: &Hyperparams) -> Result<AffineFitResult> {
    check_inputs(theta, x, hyper)?;
    let p = Problem { g: abs_row_sums(theta, true), x, alpha: hyper.alpha, kind: Likelihood::Real };
    p.fit(x.nrows(), hyper)
}
