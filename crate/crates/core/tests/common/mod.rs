//! Oracles and random instances shared by the integration tests and the CLI acceptance run.
#![allow(dead_code)]

use cpscore::baselines::{minres_gradient, minres_objective};
use cpscore::infer::affine::{
    grad_c_bool, grad_c_real, grad_f_bool, grad_f_real, logistic_probs, objective_bool, objective_real,
};
use cpscore::infer::lp::{PairCap, ScoreLp};
use cpscore::infer::nonlinear::{grad_c_nonlinear, objective_nonlinear};
use cpscore::model::build_precision;
use cpscore::numerics::{finite_diff_grad, is_positive_definite, max_relative_error, RngStream};
use cpscore::{AffineParams, DistanceMatrix};
use nalgebra::{DMatrix, DVector};

// ---- gradients

pub const FD_STEP: f64 = 1e-5;
pub const GRADIENT_INSTANCES: u64 = 100;
fn signed_graph(n: usize, rng: &mut RngStream) -> DMatrix<f64> {
    let mut t = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.uniform_range(-2.0, 2.0);
            t[(i, j)] = v;
            t[(j, i)] = v;
        }
    }
    t
}

fn params(d: usize, rng: &mut RngStream) -> AffineParams {
    AffineParams(DMatrix::from_fn(d, 2, |_, _| rng.standard_normal()))
}

fn flatten(f: &DMatrix<f64>) -> Vec<f64> {
    f.iter().copied().collect()
}

fn unflatten(v: &[f64], d: usize) -> AffineParams {
    AffineParams(DMatrix::from_column_slice(d, 2, v))
}

fn sizes(rng: &mut RngStream) -> (usize, usize) {
    (2 + (rng.uniform() * 19.0) as usize, 1 + (rng.uniform() * 10.0) as usize)
}

/// Largest relative deviation of the analytic gradient from central differences.
pub fn bool_c_gradient_error(seed: u64) -> f64 {
    let mut rng = RngStream::new(seed);
    let (n, d) = sizes(&mut rng);
    let theta = signed_graph(n, &mut rng);
    let f = params(d, &mut rng);
    let x = DMatrix::from_fn(n, d, |_, _| if rng.bernoulli(0.5) { 1.0 } else { 0.0 });
    let c: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
    let p = logistic_probs(&c, &f);
    let analytic = grad_c_bool(&theta, &x, &p, &f);
    let fd = finite_diff_grad(|cc| objective_bool(&theta, &x, cc, &f, 0.3), &c, FD_STEP).unwrap();
    max_relative_error(&analytic, &fd)
}

/// Largest relative deviation of the analytic gradient from central differences.
pub fn bool_f_gradient_error(seed: u64) -> f64 {
    let mut rng = RngStream::new(1000 + seed);
    let (n, d) = sizes(&mut rng);
    let theta = signed_graph(n, &mut rng);
    let f = params(d, &mut rng);
    let x = DMatrix::from_fn(n, d, |_, _| if rng.bernoulli(0.3) { 1.0 } else { 0.0 });
    let c: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
    let alpha = rng.uniform();
    let p = logistic_probs(&c, &f);
    let analytic = flatten(&grad_f_bool(&x, &p, &c, &f, alpha));
    let fd = finite_diff_grad(|v| objective_bool(&theta, &x, &c, &unflatten(v, d), alpha), &flatten(&f.0), FD_STEP)
        .unwrap();
    max_relative_error(&analytic, &fd)
}

/// Largest relative deviation of the analytic gradient from central differences.
pub fn real_c_gradient_error(seed: u64) -> f64 {
    let mut rng = RngStream::new(2000 + seed);
    let (n, d) = sizes(&mut rng);
    let theta = signed_graph(n, &mut rng);
    let f = params(d, &mut rng);
    let x = DMatrix::from_fn(n, d, |_, _| 2.0 * rng.standard_normal());
    let c: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
    let analytic = grad_c_real(&theta, &x, &c, &f);
    let fd = finite_diff_grad(|cc| objective_real(&theta, &x, cc, &f, 0.1), &c, FD_STEP).unwrap();
    max_relative_error(&analytic, &fd)
}

/// Largest relative deviation of the analytic gradient from central differences.
pub fn real_f_gradient_error(seed: u64) -> f64 {
    let mut rng = RngStream::new(3000 + seed);
    let (n, d) = sizes(&mut rng);
    let theta = signed_graph(n, &mut rng);
    let f = params(d, &mut rng);
    let x = DMatrix::from_fn(n, d, |_, _| rng.standard_normal());
    let c: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
    let alpha = 2.0 * rng.uniform();
    let analytic = flatten(&grad_f_real(&x, &c, &f, alpha));
    let fd = finite_diff_grad(|v| objective_real(&theta, &x, &c, &unflatten(v, d), alpha), &flatten(&f.0), FD_STEP)
        .unwrap();
    max_relative_error(&analytic, &fd)
}

/// Largest relative deviation of the analytic gradient from central differences.
pub fn nonlinear_gradient_error(seed: u64) -> f64 {
    let mut rng = RngStream::new(4000 + seed);
    let (n, d_attr) = sizes(&mut rng);
    let theta = signed_graph(n, &mut rng);
    let x = DMatrix::from_fn(n, d_attr, |_, _| rng.standard_normal());
    let s = &x * x.transpose() / d_attr as f64;
    let dist = DistanceMatrix::new(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            let (a, b) = (i.min(j) as f64, i.max(j) as f64);
            1.0 + ((a * 7.0 + b * 3.0) % 5.0) / 5.0
        }
    }))
    .unwrap();
    let e = if seed.is_multiple_of(2) { 0.0 } else { rng.uniform() };
    let d = (e != 0.0).then_some(&dist);
    let c: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
    let off = build_precision(&c, d, e, 1e-5, 0.0).unwrap();
    let kappa = 2.5 + off.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    assert!(is_positive_definite(&build_precision(&c, d, e, 1e-5, kappa).unwrap()));

    let analytic = grad_c_nonlinear(&theta, &s, &c, d, e, 1e-5, kappa).unwrap();
    let fd = finite_diff_grad(|cc| objective_nonlinear(&theta, &s, cc, d, e, 1e-5, kappa).unwrap(), &c, FD_STEP).unwrap();
    max_relative_error(&analytic, &fd)
}

/// Largest relative deviation of the analytic gradient from central differences.
pub fn minres_gradient_error(seed: u64) -> f64 {
    let mut rng = RngStream::new(5000 + seed);
    let (n, _) = sizes(&mut rng);
    let theta = signed_graph(n, &mut rng);
    let c: Vec<f64> = (0..n).map(|_| 1.5 * rng.uniform()).collect();
    let analytic = minres_gradient(&theta, &c);
    let fd = finite_diff_grad(|cc| minres_objective(&theta, cc), &c, FD_STEP).unwrap();
    max_relative_error(&analytic, &fd)
}

// ---- graphical lasso

fn neg_loglik(theta: &DMatrix<f64>, s: &DMatrix<f64>) -> Option<f64> {
    let chol = theta.clone().cholesky()?;
    let logdet = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    Some(-logdet + (s * theta).trace())
}

fn soft(x: f64, t: f64) -> f64 {
    x.signum() * (x.abs() - t).max(0.0)
}

/// ISTA with backtracking on `−log det Θ + tr(SΘ) + Σ Λ_ij|Θ_ij|`.
pub fn reference(s: &DMatrix<f64>, penalty: &DMatrix<f64>) -> DMatrix<f64> {
    let n = s.nrows();
    let mut theta = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 / (s[(i, i)] + penalty[(i, i)]) } else { 0.0 });
    let mut step = 1.0;
    for _ in 0..200_000 {
        let f0 = neg_loglik(&theta, s).unwrap();
        let inv = theta.clone().cholesky().unwrap().inverse();
        let grad = s - &inv;
        let mut t = step * 2.0;
        let next = loop {
            let cand = DMatrix::from_fn(n, n, |i, j| soft(theta[(i, j)] - t * grad[(i, j)], t * penalty[(i, j)]));
            if let Some(f1) = neg_loglik(&cand, s) {
                let diff = &cand - &theta;
                let model = f0 + grad.component_mul(&diff).sum() + diff.norm_squared() / (2.0 * t);
                if f1 <= model + 1e-15 * f0.abs() {
                    break cand;
                }
            }
            t *= 0.5;
        };
        step = t;
        let moved = (&next - &theta).amax() / t;
        theta = next;
        if moved < 1e-11 {
            break;
        }
    }
    theta
}

pub struct GlassoInstance {
    pub s: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub lam: f64,
    pub penalize_diagonal: bool,
}

pub fn glasso_instance(seed: u64) -> GlassoInstance {
    let mut rng = RngStream::new(seed);
    let n = 2 + (rng.uniform() * 14.0) as usize;
    let d = n + 2 + (rng.uniform() * 2.0 * n as f64) as usize;
    let mix = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.4 * rng.standard_normal() });
    let z = DMatrix::from_fn(n, d, |_, _| rng.standard_normal());
    let x = &mix * z;
    let s = &x * x.transpose() / d as f64;
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.uniform_range(0.5, 2.0);
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    GlassoInstance { s, w, lam: rng.uniform_range(0.02, 0.4), penalize_diagonal: rng.bernoulli(0.5) }
}

// ---- LP

/// A row `aᵀc ≤ b` (or `= b` for the mass row).
struct Row {
    a: Vec<f64>,
    b: f64,
}

fn inequalities(lp: &ScoreLp) -> Vec<Row> {
    let n = lp.n();
    let unit = |i: usize, s: f64| {
        let mut a = vec![0.0; n];
        a[i] = s;
        a
    };
    let mut rows = Vec::new();
    for i in 0..n {
        rows.push(Row { a: unit(i, -1.0), b: 0.0 });
        rows.push(Row { a: unit(i, 1.0), b: lp.upper[i] });
    }
    for cap in &lp.caps {
        let mut a = vec![0.0; n];
        a[cap.i] = 1.0;
        a[cap.j] = 1.0;
        rows.push(Row { a, b: cap.bound });
    }
    rows
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, k, &mut Vec::new(), &mut out);
    out
}

/// Best objective over all basic feasible points, or `None` if no vertex is feasible.
pub fn enumerate(lp: &ScoreLp) -> Option<f64> {
    let n = lp.n();
    let rows = inequalities(lp);
    let feasible = |c: &[f64]| {
        (c.iter().sum::<f64>() - lp.mass).abs() <= 1e-9
            && rows.iter().all(|r| r.a.iter().zip(c).map(|(a, x)| a * x).sum::<f64>() <= r.b + 1e-9)
    };
    let mut best: Option<f64> = None;
    for pick in combinations(rows.len(), n - 1) {
        let mut a = DMatrix::zeros(n, n);
        let mut b = DVector::zeros(n);
        for j in 0..n {
            a[(0, j)] = 1.0;
        }
        b[0] = lp.mass;
        for (r, &k) in pick.iter().enumerate() {
            for j in 0..n {
                a[(r + 1, j)] = rows[k].a[j];
            }
            b[r + 1] = rows[k].b;
        }
        if a.determinant().abs() < 1e-12 {
            continue;
        }
        let Some(c) = a.lu().solve(&b) else { continue };
        let c: Vec<f64> = c.iter().copied().collect();
        if feasible(&c) {
            let v = lp.objective(&c);
            best = Some(best.map_or(v, |b: f64| b.max(v)));
        }
    }
    best
}

pub fn random_lp(rng: &mut RngStream) -> ScoreLp {
    let n = 1 + (rng.uniform() * 5.0) as usize;
    let gains = (0..n).map(|_| rng.uniform_range(0.0, 5.0)).collect();
    let upper: Vec<f64> = (0..n).map(|_| if rng.bernoulli(0.5) { 1.0 } else { rng.uniform_range(0.2, 1.0) }).collect();
    let mut caps = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.bernoulli(0.7) {
                caps.push(PairCap { i, j, bound: rng.uniform_range(0.3, 1.9) });
            }
        }
    }
    let mass = rng.uniform_range(0.05, 0.9) * n as f64;
    ScoreLp { gains, mass, upper, caps }
}

// ---- projection

fn clip(v: &[f64], lam: f64) -> Vec<f64> {
    v.iter().map(|x| (x - lam).clamp(0.0, 1.0)).collect()
}

/// Scans `λ` on a fine grid for the sign change of the mass gap, then bisects
/// the bracketing cell to machine precision.
pub fn projection_oracle(v: &[f64], mass: f64) -> Vec<f64> {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0;
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let gap = |lam: f64| clip(v, lam).iter().sum::<f64>() - mass;
    const STEPS: usize = 20_000;
    let mut a = lo;
    let mut b = hi;
    for k in 1..=STEPS {
        let lam = lo + (hi - lo) * k as f64 / STEPS as f64;
        if gap(lam) <= 0.0 {
            a = lo + (hi - lo) * (k - 1) as f64 / STEPS as f64;
            b = lam;
            break;
        }
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if gap(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    clip(v, 0.5 * (a + b))
}
