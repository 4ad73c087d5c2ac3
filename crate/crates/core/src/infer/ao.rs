//! Attributes-only model: joint estimation of the graph and the core scores.
//!
//! ```text
//! maximize  log det Θ − tr(SΘ) − λ Σ_ij w_ij(c)|Θ_ij|   over Θ ≻ 0, c ∈ C, w(c) > 0
//! ```
//!
//! For fixed `c` this is a weighted graphical lasso; for fixed `Θ` it is a
//! linear program in `c`. Both steps are solved exactly (the first to its KKT
//! tolerance, warm-started) so the objective never decreases.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::glasso::{glasso_objective, penalty_matrix, weighted_glasso, GlassoOptions};
use super::lp::{ScoreLp, LP_MARGIN};
use super::nonlinear::sample_covariance;
use crate::error::{Error, Result};
use crate::model::{compute_weights, CoreScores, DistanceMatrix, Hyperparams};
use crate::numerics::{SimplexBoxSet, SpdFactor};

/// Ridge added to `S` for the initial graph `(S + ρI)⁻¹`.
pub const INIT_RIDGE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AoOptions {
    pub glasso: GlassoOptions,
    /// Slack keeping every weight `w_ij ≥ margin` after a c-step.
    pub margin: f64,
    /// Keeps `W ≡ 1`; the alternation then reduces to the plain graphical lasso.
    pub freeze_weights: bool,
    /// Remove row means of `X` before forming `S`.
    pub center: bool,
}

impl Default for AoOptions {
    fn default() -> Self {
        Self {
            glasso: GlassoOptions { penalize_diagonal: false, ..GlassoOptions::default() },
            margin: LP_MARGIN,
            freeze_weights: false,
            center: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AoFitResult {
    pub theta: DMatrix<f64>,
    pub c: CoreScores,
    /// Objective at the start and after every alternation.
    pub objective_trace: Vec<f64>,
    pub outer_iters: usize,
    pub converged: bool,
}

/// `(S + ρI)⁻¹`.
pub fn ridge_start(s: &DMatrix<f64>, ridge: f64) -> Result<DMatrix<f64>> {
    let n = s.nrows();
    Ok(SpdFactor::new(&(s + DMatrix::identity(n, n) * ridge))?.inverse())
}

struct AoProblem<'a> {
    s: &'a DMatrix<f64>,
    d: Option<&'a DistanceMatrix>,
    hyper: &'a Hyperparams,
    opts: &'a AoOptions,
    mass: f64,
}

impl AoProblem<'_> {
    fn weights(&self, c: &CoreScores) -> Result<DMatrix<f64>> {
        let n = c.len();
        if self.opts.freeze_weights {
            return Ok(DMatrix::from_element(n, n, 1.0));
        }
        compute_weights(c, self.d, self.hyper.e, self.hyper.eps)
    }

    fn objective(&self, theta: &DMatrix<f64>, c: &CoreScores) -> Result<f64> {
        let penalty = penalty_matrix(&self.weights(c)?, self.hyper.lambda, self.opts.glasso.penalize_diagonal);
        glasso_objective(theta, self.s, &penalty)
    }

    fn c_step(&self, theta: &DMatrix<f64>) -> Result<CoreScores> {
        let lp = ScoreLp::from_graph(
            theta,
            self.d,
            self.hyper.e,
            self.hyper.eps,
            self.mass,
            self.opts.margin,
            self.opts.glasso.penalize_diagonal,
        )?;
        Ok(CoreScores(lp.solve()?))
    }

    fn theta_step(&self, c: &CoreScores, warm: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let w = self.weights(c)?;
        Ok(weighted_glasso(self.s, &w, self.hyper.lambda, &self.opts.glasso, Some(warm))?.theta)
    }

    /// Whether every penalized weight at `c` is at least the margin.
    fn weights_admissible(&self, c: &CoreScores) -> Result<bool> {
        if self.opts.freeze_weights {
            return Ok(true);
        }
        let w = self.weights(c)?;
        let n = c.len();
        Ok((0..n).all(|i| {
            (0..n).all(|j| (i == j && !self.opts.glasso.penalize_diagonal) || w[(i, j)] >= self.opts.margin)
        }))
    }
}

/// Fits the attributes-only model to an `N×D` attribute matrix.
pub fn fit_ao(x: &DMatrix<f64>, d: Option<&DistanceMatrix>, hyper: &Hyperparams, opts: &AoOptions) -> Result<AoFitResult> {
    let s = sample_covariance(x, opts.center)?;
    fit_ao_cov(&s, d, hyper, opts)
}

/// Fits the attributes-only model to a sample covariance.
pub fn fit_ao_cov(s: &DMatrix<f64>, d: Option<&DistanceMatrix>, hyper: &Hyperparams, opts: &AoOptions) -> Result<AoFitResult> {
    hyper.validate()?;
    let n = s.nrows();
    if n < 2 {
        return Err(Error::InvalidParameter(format!("the attributes-only model needs at least 2 nodes, got {n}")));
    }
    if !(opts.margin > 0.0) {
        return Err(Error::InvalidParameter(format!("margin = {}", opts.margin)));
    }
    let mass = hyper.mass_for(n);
    SimplexBoxSet::new(n, mass)?;
    let problem = AoProblem { s, d, hyper, opts, mass };

    let mut theta = ridge_start(s, INIT_RIDGE)?;
    let mut c = CoreScores::uniform(n, mass);
    if !problem.weights_admissible(&c)? {
        c = problem.c_step(&theta)?;
    }
    let mut val = problem.objective(&theta, &c)?;
    let mut trace = vec![val];
    let mut converged = false;
    let mut outer = 0;
    while outer < hyper.max_outer {
        outer += 1;
        theta = problem.theta_step(&c, &theta)?;
        if !opts.freeze_weights {
            c = problem.c_step(&theta)?;
        }
        let prev = val;
        val = problem.objective(&theta, &c)?;
        trace.push(val);
        log::debug!("ao outer {outer}: objective {val}");
        if (val - prev).abs() < hyper.tol {
            converged = true;
            break;
        }
    }
    Ok(AoFitResult { theta, c, objective_trace: trace, outer_iters: outer, converged })
}

/// The plain graphical lasso (`W ≡ 1`) from the same start as [`fit_ao`].
pub fn uniform_glasso(s: &DMatrix<f64>, lam: f64, opts: &GlassoOptions) -> Result<DMatrix<f64>> {
    let n = s.nrows();
    let w = DMatrix::from_element(n, n, 1.0);
    Ok(weighted_glasso(s, &w, lam, opts, Some(&ridge_start(s, INIT_RIDGE)?))?.theta)
}
