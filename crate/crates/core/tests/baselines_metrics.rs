//! Graph-only baselines and evaluation metrics.

use cpscore::baselines::{binarize, k_core, median_threshold, minres_objective, minres_scores, BinaryGraph};
use cpscore::metrics::{core_order, cosine_similarity, cp_frobenius, edge_cosine, ideal_cp, permuted_abs};
use cpscore::numerics::RngStream;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn random_graph(n: usize, p: f64, rng: &mut RngStream) -> BinaryGraph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.bernoulli(p) {
                edges.push((i, j));
            }
        }
    }
    BinaryGraph::from_edges(n, &edges).unwrap()
}

fn relabel(g: &BinaryGraph, perm: &[usize]) -> BinaryGraph {
    let mut edges = Vec::new();
    for v in 0..g.n() {
        for &u in g.neighbors(v) {
            if v < u {
                edges.push((perm[v], perm[u]));
            }
        }
    }
    BinaryGraph::from_edges(g.n(), &edges).unwrap()
}

fn shuffle(n: usize, rng: &mut RngStream) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = (rng.uniform() * (i + 1) as f64) as usize;
        p.swap(i, j.min(i));
    }
    p
}

/// Brute force: the largest `k` whose iterated min-degree pruning keeps `v`.
fn core_number_by_pruning(g: &BinaryGraph, v: usize) -> usize {
    let n = g.n();
    let mut best = 0;
    for k in 1..n {
        let mut alive = vec![true; n];
        loop {
            let drop: Vec<usize> = (0..n)
                .filter(|&u| alive[u] && g.neighbors(u).iter().filter(|&&w| alive[w]).count() < k)
                .collect();
            if drop.is_empty() {
                break;
            }
            for u in drop {
                alive[u] = false;
            }
        }
        if alive[v] {
            best = k;
        } else {
            break;
        }
    }
    best
}

#[test]
fn core_numbers_satisfy_the_definition() {
    let mut rng = RngStream::new(31);
    for _ in 0..20 {
        let g = random_graph(20, rng.uniform_range(0.1, 0.5), &mut rng);
        let core = k_core(&g);
        for v in 0..g.n() {
            let k = core[v];
            let strong = g.neighbors(v).iter().filter(|&&u| core[u] >= k).count();
            assert!(strong >= k, "node {v}: core {k} but {strong} neighbours at that level");
            assert_eq!(k, core_number_by_pruning(&g, v));
        }
    }
}

#[test]
fn core_numbers_are_permutation_equivariant() {
    let mut rng = RngStream::new(32);
    for _ in 0..20 {
        let g = random_graph(25, 0.2, &mut rng);
        let perm = shuffle(25, &mut rng);
        let a = k_core(&g);
        let b = k_core(&relabel(&g, &perm));
        for v in 0..25 {
            assert_eq!(a[v], b[perm[v]]);
        }
    }
}

#[test]
fn repeeling_a_core_is_stable() {
    let mut rng = RngStream::new(33);
    let g = random_graph(30, 0.25, &mut rng);
    let core = k_core(&g);
    let kmax = *core.iter().max().unwrap();
    let mut edges = Vec::new();
    for v in 0..30 {
        for &u in g.neighbors(v) {
            if v < u && core[v] == kmax && core[u] == kmax {
                edges.push((v, u));
            }
        }
    }
    let sub = k_core(&BinaryGraph::from_edges(30, &edges).unwrap());
    for v in 0..30 {
        if core[v] == kmax {
            assert_eq!(sub[v], kmax);
        }
    }
}

#[test]
fn median_binarization_counts() {
    let mut rng = RngStream::new(34);
    let n = 12;
    let theta = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { ((i * 31 + j * 17) % 23) as f64 });
    let theta = (&theta + theta.transpose()) * 0.5 + DMatrix::from_element(n, n, rng.uniform() * 1e-3);
    let tau = median_threshold(&theta);
    let above = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).filter(|&(i, j)| theta[(i, j)].abs() > tau).count();
    assert_eq!(binarize(&theta, tau).unwrap().n_edges(), above);
    assert_eq!(binarize(&theta, 0.0).unwrap().n_edges(), n * (n - 1) / 2);
    assert_eq!(binarize(&theta, theta.amax() + 1.0).unwrap().n_edges(), 0);
}

#[test]
fn minres_never_worse_than_its_start() {
    let mut rng = RngStream::new(35);
    for _ in 0..20 {
        let n = 15;
        let theta = DMatrix::from_fn(n, n, |_, _| rng.uniform_range(-1.0, 1.0));
        let theta = (&theta + theta.transpose()) * 0.5;
        let r = minres_scores(&theta).unwrap();
        assert!(r.objective <= r.objective_start + 1e-12);
        assert!((minres_objective(&theta, &r.raw) - r.objective).abs() <= 1e-9 * (1.0 + r.objective));
        assert!(r.scores.iter().all(|x| (0.0..=1.0).contains(x)));
    }
    let planted = [1.0, 0.8, 0.1];
    let theta = DMatrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { planted[i] * planted[j] });
    let r = minres_scores(&theta).unwrap();
    assert!(cosine_similarity(&r.scores, &planted).unwrap() >= 0.999);
}

#[test]
fn reversed_ideal_by_hand() {
    // ideal_cp(8, 2) ordered backwards puts the core block in the bottom-right corner.
    let theta = ideal_cp(8, 2);
    let c: Vec<f64> = (0..8).map(|i| i as f64).collect();
    let reordered = permuted_abs(&theta, &core_order(&c));
    let mut by_hand = DMatrix::zeros(8, 8);
    for i in 6..8 {
        for j in 6..8 {
            by_hand[(i, j)] = 1.0;
        }
    }
    assert_eq!(reordered, by_hand);
    assert!((cp_frobenius(&theta, &c).unwrap() - 8f64.sqrt()).abs() < 1e-12);
}

#[test]
fn edge_cosine_by_flattening() {
    let a = DMatrix::from_fn(5, 5, |i, j| if i == j { 9.0 } else { (i as f64 - j as f64).powi(2) - 2.0 });
    let b = DMatrix::from_fn(5, 5, |i, j| if i == j { -4.0 } else { (i + j) as f64 * 0.5 });
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for i in 0..5 {
        for j in 0..5 {
            if i != j {
                let (x, y) = (a[(i, j)].abs(), b[(i, j)].abs());
                dot += x * y;
                na += x * x;
                nb += y * y;
            }
        }
    }
    let want = dot / (na.sqrt() * nb.sqrt());
    assert!((edge_cosine(&a, &b).unwrap() - want).abs() < 1e-12);
}

fn symmetric(n: usize, v: &[f64]) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |i, j| v[(i * n + j) % v.len()]);
    (&m + m.transpose()) * 0.5
}

proptest! {
    #[test]
    fn cp_score_ignores_scale_and_monotone_maps(
        v in prop::collection::vec(-3.0f64..3.0, 64),
        c in prop::collection::vec(-5.0f64..5.0, 8),
        s in 0.01f64..100.0,
    ) {
        let theta = symmetric(8, &v);
        prop_assume!(theta.amax() > 0.0);
        let base = cp_frobenius(&theta, &c).unwrap();
        let scaled = cp_frobenius(&(&theta * s), &c).unwrap();
        let mapped: Vec<f64> = c.iter().map(|x| x.exp() * 3.0 + 1.0).collect();
        prop_assert!((base - scaled).abs() <= 1e-9);
        prop_assert!((base - cp_frobenius(&theta, &mapped).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn edge_cosine_symmetric_and_relabel_invariant(
        va in prop::collection::vec(-3.0f64..3.0, 36),
        vb in prop::collection::vec(-3.0f64..3.0, 36),
        seed in 0u64..1000,
    ) {
        let a = symmetric(6, &va);
        let b = symmetric(6, &vb);
        let ab = edge_cosine(&a, &b);
        prop_assume!(ab.is_ok());
        let ab = ab.unwrap();
        prop_assert!((ab - edge_cosine(&b, &a).unwrap()).abs() <= 1e-12);
        let perm = shuffle(6, &mut RngStream::new(seed));
        let pa = DMatrix::from_fn(6, 6, |i, j| a[(perm[i], perm[j])]);
        let pb = DMatrix::from_fn(6, 6, |i, j| b[(perm[i], perm[j])]);
        prop_assert!((ab - edge_cosine(&pa, &pb).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn cosine_is_bounded(a in prop::collection::vec(-3.0f64..3.0, 1..20)) {
        let b: Vec<f64> = a.iter().rev().map(|x| x * 2.0 - 1.0).collect();
        if let Ok(s) = cosine_similarity(&a, &b) {
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&s));
        }
    }
}
