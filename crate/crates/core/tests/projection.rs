//! Projection onto `{Σc = M, 0 ≤ c ≤ 1}` against a grid-and-bisection oracle.

use cpscore::numerics::{shifted_mass_gap, RngStream, SimplexBoxSet};
use proptest::prelude::*;

mod common;

use common::projection_oracle;

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[test]
fn matches_oracle_on_random_vectors() {
    let mut rng = RngStream::new(17);
    for case in 0..1000 {
        let n = 1 + (rng.uniform() * 30.0) as usize;
        let mass = n as f64 * rng.uniform_range(0.01, 1.0);
        let v: Vec<f64> = (0..n).map(|_| rng.uniform_range(-2.0, 3.0)).collect();
        let set = SimplexBoxSet::new(n, mass).unwrap();
        let p = set.project(&v).unwrap();
        assert!((p.iter().sum::<f64>() - mass).abs() <= 1e-8, "case {case}: sum");
        assert!(p.iter().all(|x| (0.0..=1.0).contains(x)), "case {case}: box");
        let o = projection_oracle(&v, mass);
        let err = p.iter().zip(&o).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-8, "case {case}: deviation {err:e} from oracle");
    }
}

#[test]
fn nearer_than_random_feasible_points() {
    let mut rng = RngStream::new(23);
    for _ in 0..1000 {
        let n = 2 + (rng.uniform() * 10.0) as usize;
        let mass = n as f64 * rng.uniform_range(0.05, 0.95);
        let set = SimplexBoxSet::new(n, mass).unwrap();
        let v: Vec<f64> = (0..n).map(|_| rng.uniform_range(-1.0, 2.0)).collect();
        let y = set.project(&(0..n).map(|_| rng.uniform_range(-3.0, 3.0)).collect::<Vec<_>>()).unwrap();
        let p = set.project(&v).unwrap();
        assert!(dist2(&p, &v) <= dist2(&y, &v) + 1e-12);
    }
}

#[test]
fn listed_cases() {
    let set = SimplexBoxSet::new(2, 1.0).unwrap();
    let p = set.project(&[0.2, 0.8]).unwrap();
    assert!((p[0] - 0.2).abs() < 1e-12 && (p[1] - 0.8).abs() < 1e-12);

    let set = SimplexBoxSet::new(4, 2.0).unwrap();
    assert!(set.project(&[0.0; 4]).unwrap().iter().all(|x| (x - 0.5).abs() < 1e-12));

    let v = [1.4, -0.2, 0.6];
    let p = SimplexBoxSet::new(3, 1.5).unwrap().project(&v).unwrap();
    let o = projection_oracle(&v, 1.5);
    assert!(p.iter().zip(&o).all(|(a, b)| (a - b).abs() <= 1e-8));
}

#[test]
fn empty_sets_are_rejected() {
    assert!(SimplexBoxSet::new(3, 0.0).is_err());
    assert!(SimplexBoxSet::new(3, 3.5).is_err());
    assert!(SimplexBoxSet::new(3, 3.0).is_ok());
}

proptest! {
    #[test]
    fn idempotent(v in prop::collection::vec(-3.0f64..3.0, 1..25), frac in 0.01f64..1.0) {
        let mass = v.len() as f64 * frac;
        let set = SimplexBoxSet::new(v.len(), mass).unwrap();
        let p = set.project(&v).unwrap();
        let q = set.project(&p).unwrap();
        prop_assert!(p.iter().zip(&q).all(|(a, b)| (a - b).abs() <= 1e-10));
    }

    #[test]
    fn mass_gap_is_non_increasing(v in prop::collection::vec(-3.0f64..3.0, 1..25), mass in 0.1f64..5.0) {
        let mut prev = f64::INFINITY;
        for k in 0..200 {
            let lam = -5.0 + 0.05 * k as f64;
            let g = shifted_mass_gap(&v, lam, mass);
            prop_assert!(g <= prev + 1e-12);
            prev = g;
        }
    }

    #[test]
    fn shift_equivariant(v in prop::collection::vec(-3.0f64..3.0, 1..25), frac in 0.01f64..1.0, t in -2.0f64..2.0) {
        let set = SimplexBoxSet::new(v.len(), v.len() as f64 * frac).unwrap();
        let shifted: Vec<f64> = v.iter().map(|x| x + t).collect();
        let p = set.project(&v).unwrap();
        let q = set.project(&shifted).unwrap();
        prop_assert!(p.iter().zip(&q).all(|(a, b)| (a - b).abs() <= 1e-9));
    }
}
