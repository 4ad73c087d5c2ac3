//! Weighted graphical lasso against a slow proximal-gradient reference.

use cpscore::infer::ao::{fit_ao_cov, uniform_glasso, AoOptions};
use cpscore::infer::glasso::{glasso_kkt_residual, penalty_matrix, weighted_glasso, GlassoOptions};
use cpscore::numerics::{is_positive_definite, SpdFactor};
use cpscore::{Error, Hyperparams};
use nalgebra::DMatrix;

mod common;

use common::{glasso_instance, reference};

#[test]
fn agrees_with_proximal_gradient_reference() {
    for seed in 0..25 {
        let inst = glasso_instance(seed);
        // A KKT residual of 1e-6 leaves up to ~1e-4 entrywise error on poorly conditioned instances.
        let opts = GlassoOptions { penalize_diagonal: inst.penalize_diagonal, tol: 1e-8, ..GlassoOptions::default() };
        let got = weighted_glasso(&inst.s, &inst.w, inst.lam, &opts, None).unwrap();
        assert!(got.kkt_residual <= 1e-8, "seed {seed}: KKT {:e}", got.kkt_residual);
        let penalty = penalty_matrix(&inst.w, inst.lam, inst.penalize_diagonal);
        let want = reference(&inst.s, &penalty);
        let err = (&got.theta - &want).amax();
        assert!(err <= 1e-5, "seed {seed} (N = {}): max deviation {err:e}", inst.s.nrows());
    }
}

#[test]
fn certificate_holds_on_every_solve() {
    for seed in 100..140 {
        let inst = glasso_instance(seed);
        let opts = GlassoOptions { penalize_diagonal: inst.penalize_diagonal, ..GlassoOptions::default() };
        let r = weighted_glasso(&inst.s, &inst.w, inst.lam, &opts, None).unwrap();
        let inv = SpdFactor::new(&r.theta).unwrap().inverse();
        let penalty = penalty_matrix(&inst.w, inst.lam, inst.penalize_diagonal);
        assert!(glasso_kkt_residual(&r.theta, &inv, &inst.s, &penalty) <= 1e-6);
        assert_eq!(r.theta, r.theta.transpose());
        assert!(is_positive_definite(&r.theta));
    }
}

#[test]
fn zero_penalty_inverts() {
    for seed in 200..210 {
        let inst = glasso_instance(seed);
        let r = weighted_glasso(&inst.s, &inst.w, 0.0, &GlassoOptions::default(), None).unwrap();
        let inv = inst.s.clone().try_inverse().unwrap();
        assert!((&r.theta - &inv).amax() <= 1e-6);
    }
    let singular = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
    let w = DMatrix::from_element(2, 2, 1.0);
    assert_eq!(
        weighted_glasso(&singular, &w, 0.0, &GlassoOptions::default(), None),
        Err(Error::SingularAtZeroPenalty)
    );
}

#[test]
fn diagonal_covariance_gives_diagonal_graph() {
    let s = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 0.5, 3.0, 1.5]));
    let w = DMatrix::from_element(5, 5, 1.0);
    let lam = 0.3;
    let r = weighted_glasso(&s, &w, lam, &GlassoOptions::default(), None).unwrap();
    for i in 0..5 {
        for j in 0..5 {
            let want = if i == j { 1.0 / (s[(i, i)] + lam) } else { 0.0 };
            assert!((r.theta[(i, j)] - want).abs() <= 1e-9);
        }
    }
    let want = reference(&s, &penalty_matrix(&w, lam, true));
    assert!((&r.theta - &want).amax() <= 1e-8);
}

#[test]
fn indefinite_covariance_is_rejected() {
    let s = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
    let w = DMatrix::from_element(2, 2, 1.0);
    assert!(matches!(weighted_glasso(&s, &w, 0.1, &GlassoOptions::default(), None), Err(Error::NotPSD(_))));
}

#[test]
fn frozen_weights_reduce_to_plain_glasso() {
    for seed in 300..310 {
        let inst = glasso_instance(seed);
        let n = inst.s.nrows();
        let hyper = Hyperparams { lambda: inst.lam, mass: Some(0.5 * n as f64), ..Hyperparams::default() };
        let opts = AoOptions { freeze_weights: true, ..AoOptions::default() };
        let joint = fit_ao_cov(&inst.s, None, &hyper, &opts).unwrap();
        let direct = uniform_glasso(&inst.s, inst.lam, &opts.glasso).unwrap();
        assert!((&joint.theta - &direct).amax() <= 1e-8, "seed {seed}");
    }
}

fn off_diagonal_zeros(t: &DMatrix<f64>, tiny: f64) -> usize {
    let n = t.nrows();
    (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| i != j && t[(i, j)].abs() <= tiny).count()
}

#[test]
fn graph_is_empty_exactly_above_the_covariance_threshold() {
    for seed in 400..410 {
        let inst = glasso_instance(seed);
        let n = inst.s.nrows();
        let opts = GlassoOptions { penalize_diagonal: false, ..GlassoOptions::default() };
        let threshold = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| inst.s[(i, j)].abs() / inst.w[(i, j)])
            .fold(0.0, f64::max);
        let above = weighted_glasso(&inst.s, &inst.w, threshold * 1.01, &opts, None).unwrap();
        assert_eq!(off_diagonal_zeros(&above.theta, 0.0), n * (n - 1), "seed {seed}");
        let below = weighted_glasso(&inst.s, &inst.w, threshold * 0.9, &opts, None).unwrap();
        assert!(off_diagonal_zeros(&below.theta, 0.0) < n * (n - 1), "seed {seed}");
    }
}

/// The zero count along a penalty path can drop: an edge may leave the support
/// while two others enter. The reference solver shows the same dip.
#[test]
fn sparsity_path_can_dip() {
    let inst = glasso_instance(400);
    let opts = GlassoOptions { penalize_diagonal: false, ..GlassoOptions::default() };
    let (lo, hi) = (0.01 * 1.5f64.powi(5), 0.01 * 1.5f64.powi(6));
    let zeros = |lam: f64| {
        let ours = weighted_glasso(&inst.s, &inst.w, lam, &opts, None).unwrap().theta;
        let theirs = reference(&inst.s, &penalty_matrix(&inst.w, lam, false));
        (off_diagonal_zeros(&ours, 0.0), off_diagonal_zeros(&theirs, 1e-9))
    };
    let (a, b) = (zeros(lo), zeros(hi));
    assert_eq!(a.0, a.1);
    assert_eq!(b.0, b.1);
    assert!(b.0 < a.0);
}
