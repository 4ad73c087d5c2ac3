//! Euclidean projection onto `C = {c : Σ c_i = M, 0 ≤ c_i ≤ 1}`.
//!
//! The projection is `clip(v − λ*·1, 0, 1)` where `λ*` is the root of
//! `φ(λ) = Σ clip(v_i − λ, 0, 1) − M`. `φ` is continuous, piecewise linear and
//! non-increasing, so the root is bracketed by `[min(v) − 1, max(v)]` and found
//! by bisection. Once the bracket is tight the root is polished by solving the
//! linear piece exactly.

use crate::error::{Error, Result};

/// Default tolerance on `|φ(λ)|`.
pub const DEFAULT_PROJECTION_TOL: f64 = 1e-10;

const MAX_BISECTIONS: usize = 200;

/// The hyperplane-box intersection `{c ∈ [0,1]^n : Σ c_i = mass}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexBoxSet {
    n: usize,
    mass: f64,
}

impl SimplexBoxSet {
    pub fn new(n: usize, mass: f64) -> Result<Self> {
        if n == 0 || !(mass > 0.0) || mass > n as f64 {
            return Err(Error::EmptySet { mass, n });
        }
        Ok(Self { n, mass })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Whether `c` lies in the set up to `tol` on the sum.
    pub fn contains(&self, c: &[f64], tol: f64) -> bool {
        c.len() == self.n
            && c.iter().all(|&x| (0.0..=1.0).contains(&x))
            && (c.iter().sum::<f64>() - self.mass).abs() <= tol
    }

    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        project_simplex_box(v, self, DEFAULT_PROJECTION_TOL)
    }
}

#[inline]
fn clip01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// `φ(λ) = Σ clip(v_i − λ, 0, 1) − M`.
pub fn shifted_mass_gap(v: &[f64], lambda: f64, mass: f64) -> f64 {
    v.iter().map(|&x| clip01(x - lambda)).sum::<f64>() - mass
}

/// Projects `v` onto `set`.
///
/// The returned vector satisfies `|Σ c_i − M| ≤ tol` and `c ∈ [0,1]^n`.
pub fn project_simplex_box(v: &[f64], set: &SimplexBoxSet, tol: f64) -> Result<Vec<f64>> {
    if v.len() != set.n {
        return Err(Error::ShapeMismatch(format!(
            "vector of length {} projected onto a set of dimension {}",
            v.len(),
            set.n
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("projection tolerance {tol}")));
    }
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("projection input entry {i} = {}", v[i])));
    }
    let mass = set.mass;

    let vmin = v.iter().copied().fold(f64::INFINITY, f64::min);
    let vmax = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mut lo, mut hi) = (vmin - 1.0, vmax);
    let (phi_lo, phi_hi) = (shifted_mass_gap(v, lo, mass), shifted_mass_gap(v, hi, mass));
    if phi_lo < 0.0 || phi_hi > 0.0 {
        return Err(Error::NoConvergence(format!(
            "projection bracket [{lo}, {hi}] does not straddle the root ({phi_lo}, {phi_hi})"
        )));
    }

    let mut lambda = 0.5 * (lo + hi);
    let mut converged = false;
    for _ in 0..MAX_BISECTIONS {
        lambda = 0.5 * (lo + hi);
        let phi = shifted_mass_gap(v, lambda, mass);
        if phi.abs() <= tol {
            converged = true;
            break;
        }
        if phi > 0.0 {
            lo = lambda;
        } else {
            hi = lambda;
        }
        if hi - lo <= f64::EPSILON * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
    }

    // Polish: on the current linear piece, λ = (Σ_free v_i + #upper − M) / #free.
    let (mut free_sum, mut free_count, mut upper) = (0.0, 0usize, 0usize);
    for &x in v {
        let y = x - lambda;
        if y >= 1.0 {
            upper += 1;
        } else if y > 0.0 {
            free_sum += x;
            free_count += 1;
        }
    }
    if free_count > 0 {
        let exact = (free_sum + upper as f64 - mass) / free_count as f64;
        let gap_exact = shifted_mass_gap(v, exact, mass).abs();
        if gap_exact <= shifted_mass_gap(v, lambda, mass).abs() {
            lambda = exact;
        }
    }

    let gap = shifted_mass_gap(v, lambda, mass);
    if !converged && gap.abs() > tol {
        return Err(Error::NoConvergence(format!(
            "projection bisection stalled with |φ| = {:e}",
            gap.abs()
        )));
    }
    Ok(v.iter().map(|&x| clip01(x - lambda)).collect())
}
