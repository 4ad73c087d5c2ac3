//! Inference for the four core-periphery models.
//!
//! All solvers ascend their objective monotonically: every accepted step
//! passes an Armijo test, so the recorded objective traces never decrease.

pub mod affine;
pub mod ao;
pub mod glasso;
pub mod lp;
pub mod nonlinear;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numerics::{check_symmetric, project_simplex_box, SimplexBoxSet, DEFAULT_PROJECTION_TOL, SYMMETRY_TOL};

pub use affine::{fit_bool, fit_real, AffineFitResult};
pub use ao::{fit_ao, AoFitResult, AoOptions};
pub use glasso::{glasso_kkt_residual, weighted_glasso, GlassoOptions};
pub use lp::{solve_c_lp, LP_MARGIN};
pub use nonlinear::{fit_nonlinear, sample_covariance, NonlinearFitResult};

/// Backtracking parameters shared by every ascent step.
pub const ARMIJO_SLOPE: f64 = 1e-4;
pub const ARMIJO_SHRINK: f64 = 0.5;
pub const INITIAL_STEP: f64 = 1.0;
const MAX_HALVINGS: usize = 60;

/// Budget and tolerance of the inner c- and F-loops.
pub const INNER_MAX_STEPS: usize = 100;
pub const INNER_TOL: f64 = 1e-6;

/// One projected-gradient ascent step on `c` over `set`.
///
/// `f` returns `None` where the objective is undefined; such trials are
/// treated like a failed Armijo test. Returns `None` when no step along the
/// projection arc improves the objective.
pub(crate) fn projected_ascent_step<F>(
    f: F,
    c: &[f64],
    fc: f64,
    grad: &[f64],
    set: &SimplexBoxSet,
) -> Result<Option<(Vec<f64>, f64)>>
where
    F: Fn(&[f64]) -> Option<f64>,
{
    let mut rho = INITIAL_STEP;
    let mut trial = vec![0.0; c.len()];
    for _ in 0..MAX_HALVINGS {
        for i in 0..c.len() {
            trial[i] = c[i] + rho * grad[i];
        }
        let next = project_simplex_box(&trial, set, DEFAULT_PROJECTION_TOL)?;
        let mut gain = 0.0;
        let mut moved = 0.0f64;
        for i in 0..c.len() {
            let d = next[i] - c[i];
            gain += grad[i] * d;
            moved = moved.max(d.abs());
        }
        if moved == 0.0 {
            return Ok(None);
        }
        if let Some(ft) = f(&next) {
            if ft.is_finite() && ft >= fc + ARMIJO_SLOPE * gain && ft >= fc {
                return Ok(Some((next, ft)));
            }
        }
        rho *= ARMIJO_SHRINK;
    }
    Ok(None)
}

/// Inner projected-gradient loop on `c`; returns the final `(c, f(c))`.
pub(crate) fn ascend_scores<F, G>(f: F, grad: G, mut c: Vec<f64>, mut fc: f64, set: &SimplexBoxSet) -> Result<(Vec<f64>, f64, usize)>
where
    F: Fn(&[f64]) -> Option<f64>,
    G: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut steps = 0;
    for _ in 0..INNER_MAX_STEPS {
        let g = grad(&c)?;
        match projected_ascent_step(&f, &c, fc, &g, set)? {
            Some((next, fnext)) => {
                steps += 1;
                let done = fnext - fc < INNER_TOL;
                c = next;
                fc = fnext;
                if done {
                    break;
                }
            }
            None => break,
        }
    }
    Ok((c, fc, steps))
}

/// Validates a graph argument: square, `n` nodes, finite and symmetric.
pub(crate) fn check_graph(theta: &DMatrix<f64>, n: usize) -> Result<()> {
    if theta.nrows() != n || theta.ncols() != n {
        return Err(Error::ShapeMismatch(format!(
            "graph is {}x{} but the data has {n} nodes",
            theta.nrows(),
            theta.ncols()
        )));
    }
    if theta.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("graph entries".into()));
    }
    check_symmetric(theta, SYMMETRY_TOL)
}

pub(crate) fn check_finite(x: &DMatrix<f64>, what: &str) -> Result<()> {
    if let Some(p) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("{what} entry {p}")));
    }
    Ok(())
}

/// Initial scores: the projection of `|Θ|1 / max(|Θ|1)` onto the constraint set.
pub(crate) fn degree_start(g: &[f64], set: &SimplexBoxSet) -> Result<Vec<f64>> {
    let max = g.iter().copied().fold(0.0, f64::max);
    let v: Vec<f64> = if max > 0.0 { g.iter().map(|x| x / max).collect() } else { vec![0.0; g.len()] };
    project_simplex_box(&v, set, DEFAULT_PROJECTION_TOL)
}
