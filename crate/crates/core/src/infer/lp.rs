//! The c-step of the attributes-only model as a linear program:
//!
//! ```text
//! maximize  gᵀc   subject to  Σc = M,  0 ≤ c_i ≤ u_i,  c_i + c_j ≤ u_ij  (i < j)
//! ```
//!
//! Solved by a dense tableau simplex with Bland's rule. Pair caps that can
//! never bind (`u_ij ≥ u_i + u_j`) are dropped and the others are added lazily
//! while the current optimum violates them. Among optimal vertices, the one
//! maximizing a secondary objective that prefers lower node indices is
//! returned.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{CoreScores, DistanceMatrix};

/// Default slack that turns the strict cap `w_ij > 0` into `w_ij ≥ margin`.
pub const LP_MARGIN: f64 = 1e-6;

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-11;
const FEAS_TOL: f64 = 1e-9;

/// `c_i + c_j ≤ bound`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCap {
    pub i: usize,
    pub j: usize,
    pub bound: f64,
}

/// A score LP in the form above.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreLp {
    pub gains: Vec<f64>,
    pub mass: f64,
    pub upper: Vec<f64>,
    pub caps: Vec<PairCap>,
}

impl ScoreLp {
    /// The c-step for a graph: gains are the row sums of `|Θ|` (diagonal only
    /// when penalized) and caps keep every penalty weight
    /// `1 − c_i − c_j + e·log(d_ij + ε)` at least `margin`.
    pub fn from_graph(
        theta: &DMatrix<f64>,
        d: Option<&DistanceMatrix>,
        e: f64,
        eps: f64,
        mass: f64,
        margin: f64,
        penalize_diagonal: bool,
    ) -> Result<Self> {
        let n = theta.nrows();
        if theta.ncols() != n {
            return Err(Error::ShapeMismatch("graph must be square".into()));
        }
        if e != 0.0 && d.is_none() {
            return Err(Error::InvalidParameter(format!("distance coupling e = {e} requires a distance matrix")));
        }
        if let Some(d) = d {
            if d.n() != n {
                return Err(Error::ShapeMismatch(format!("{n} nodes but a {}x{} distance matrix", d.n(), d.n())));
            }
        }
        let dist = |i: usize, j: usize| match d {
            Some(d) if e != 0.0 => e * (d.get(i, j) + eps).ln(),
            _ => 0.0,
        };
        let gains = (0..n)
            .map(|i| (0..n).filter(|&j| penalize_diagonal || i != j).map(|j| theta[(i, j)].abs()).sum())
            .collect();
        let upper = (0..n)
            .map(|i| {
                if penalize_diagonal {
                    ((1.0 + dist(i, i) - margin) / 2.0).min(1.0)
                } else {
                    1.0
                }
            })
            .collect();
        let mut caps = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                caps.push(PairCap { i, j, bound: 1.0 + dist(i, j) - margin });
            }
        }
        Ok(Self { gains, mass, upper, caps })
    }

    pub fn n(&self) -> usize {
        self.gains.len()
    }

    pub fn objective(&self, c: &[f64]) -> f64 {
        self.gains.iter().zip(c).map(|(g, x)| g * x).sum()
    }

    /// Exact maximizer, or `Infeasible`.
    pub fn solve(&self) -> Result<Vec<f64>> {
        let n = self.n();
        if n == 0 {
            return Err(Error::EmptyData);
        }
        if self.upper.len() != n {
            return Err(Error::ShapeMismatch("one upper bound per node".into()));
        }
        if self.gains.iter().chain(&self.upper).any(|x| !x.is_finite()) || !self.mass.is_finite() {
            return Err(Error::NonFinite("LP data".into()));
        }
        if !(self.mass >= 0.0) {
            return Err(Error::Infeasible(format!("negative mass {}", self.mass)));
        }
        if let Some(i) = self.upper.iter().position(|&u| u < 0.0) {
            return Err(Error::Infeasible(format!("upper bound of node {i} is {}", self.upper[i])));
        }
        let total: f64 = self.upper.iter().sum();
        if self.mass > total + FEAS_TOL {
            return Err(Error::Infeasible(format!("mass {} exceeds the box capacity {total}", self.mass)));
        }
        if let Some(cap) = self.caps.iter().find(|c| c.bound < 0.0) {
            return Err(Error::Infeasible(format!("cap on ({}, {}) is {}", cap.i, cap.j, cap.bound)));
        }
        let binding: Vec<PairCap> = self
            .caps
            .iter()
            .filter(|c| c.bound < self.upper[c.i] + self.upper[c.j])
            .copied()
            .collect();

        let scale = self.gains.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        let gains: Vec<f64> = if scale > 0.0 { self.gains.iter().map(|g| g / scale).collect() } else { vec![0.0; n] };

        let mut active: Vec<PairCap> = Vec::new();
        let mut in_active = vec![false; binding.len()];
        loop {
            let c = solve_tableau(&gains, self.mass, &self.upper, &active)?;
            let mut added = false;
            for (k, cap) in binding.iter().enumerate() {
                if !in_active[k] && c[cap.i] + c[cap.j] > cap.bound + 1e-12 {
                    in_active[k] = true;
                    active.push(*cap);
                    added = true;
                }
            }
            if !added {
                return Ok(c);
            }
        }
    }
}

/// Maximizer of `Σ_ij |Θ_ij|(c_i + c_j)` over the score set with the weight caps.
pub fn solve_c_lp(
    theta: &DMatrix<f64>,
    d: Option<&DistanceMatrix>,
    e: f64,
    eps: f64,
    mass: f64,
    margin: f64,
    penalize_diagonal: bool,
) -> Result<CoreScores> {
    let lp = ScoreLp::from_graph(theta, d, e, eps, mass, margin, penalize_diagonal)?;
    Ok(CoreScores(lp.solve()?))
}

/// Dense tableau; the last column is the right-hand side.
struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    /// Reduced-cost rows (last entry: minus the objective value).
    objectives: Vec<Vec<f64>>,
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (k, row) in self.rows.iter_mut().enumerate() {
            if k != r {
                eliminate(row, &pivot_row, col);
            }
        }
        for obj in self.objectives.iter_mut() {
            eliminate(obj, &pivot_row, col);
        }
        self.basis[r] = col;
    }

    /// Bland's-rule simplex on objective `k` over columns allowed by `allowed`.
    fn optimize(&mut self, k: usize, allowed: &dyn Fn(&Self, usize) -> bool) -> Result<()> {
        let rhs = self.width - 1;
        for _ in 0..100_000 {
            let Some(col) = (0..rhs).find(|&j| self.objectives[k][j] > COST_TOL && allowed(self, j)) else {
                return Ok(());
            };
            let mut best: Option<(f64, usize, usize)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                let a = row[col];
                if a > PIVOT_TOL {
                    let ratio = row[rhs] / a;
                    let better = match best {
                        None => true,
                        Some((br, _, bb)) => ratio < br - 1e-15 || (ratio <= br + 1e-15 && self.basis[r] < bb),
                    };
                    if better {
                        best = Some((ratio, r, self.basis[r]));
                    }
                }
            }
            match best {
                Some((_, r, _)) => self.pivot(r, col),
                None => return Err(Error::NoConvergence("unbounded score LP".into())),
            }
        }
        Err(Error::NoConvergence("simplex iteration limit".into()))
    }
}

fn eliminate(row: &mut [f64], pivot_row: &[f64], col: usize) {
    let f = row[col];
    if f != 0.0 {
        for (v, p) in row.iter_mut().zip(pivot_row) {
            *v -= f * p;
        }
        row[col] = 0.0;
    }
}

/// Solves the LP with the given active caps.
///
/// Columns: scores `0..n`, box slacks `n..2n`, cap slacks, then the artificial
/// variable of the sum row.
fn solve_tableau(gains: &[f64], mass: f64, upper: &[f64], caps: &[PairCap]) -> Result<Vec<f64>> {
    let n = gains.len();
    let m = caps.len();
    let art = 2 * n + m;
    let width = art + 2;
    let rhs = width - 1;

    let mut rows = Vec::with_capacity(1 + n + m);
    let mut basis = Vec::with_capacity(1 + n + m);
    let mut sum_row = vec![0.0; width];
    sum_row[..n].iter_mut().for_each(|v| *v = 1.0);
    sum_row[art] = 1.0;
    sum_row[rhs] = mass;
    rows.push(sum_row);
    basis.push(art);
    for i in 0..n {
        let mut row = vec![0.0; width];
        row[i] = 1.0;
        row[n + i] = 1.0;
        row[rhs] = upper[i];
        rows.push(row);
        basis.push(n + i);
    }
    for (k, cap) in caps.iter().enumerate() {
        let mut row = vec![0.0; width];
        row[cap.i] = 1.0;
        row[cap.j] = 1.0;
        row[2 * n + k] = 1.0;
        row[rhs] = cap.bound;
        rows.push(row);
        basis.push(2 * n + k);
    }

    // Phase I maximizes −art; its reduced costs start as the sum row.
    let mut phase1 = rows[0].clone();
    phase1[art] = 0.0;
    let mut primary = vec![0.0; width];
    primary[..n].copy_from_slice(gains);
    let mut secondary = vec![0.0; width];
    for (i, v) in secondary[..n].iter_mut().enumerate() {
        *v = (n - i) as f64 / n as f64;
    }
    let mut t = Tableau { rows, basis, objectives: vec![phase1, primary, secondary], width };

    t.optimize(0, &|_, _| true)?;
    let infeasibility = t.rows.iter().zip(&t.basis).filter(|(_, &b)| b == art).map(|(r, _)| r[rhs]).sum::<f64>();
    if infeasibility > FEAS_TOL * (1.0 + mass) {
        return Err(Error::Infeasible(format!(
            "no scores with mass {mass} satisfy the caps (residual {infeasibility:e})"
        )));
    }
    if let Some(r) = t.basis.iter().position(|&b| b == art) {
        if let Some(col) = (0..art).find(|&j| t.rows[r][j].abs() > PIVOT_TOL) {
            t.pivot(r, col);
        }
    }

    let not_art = |_: &Tableau, j: usize| j != art;
    t.optimize(1, &not_art)?;
    // Only columns with zero primary reduced cost may enter: the primary
    // optimum is kept while the secondary objective is improved.
    t.optimize(2, &|t: &Tableau, j: usize| j != art && t.objectives[1][j].abs() <= COST_TOL)?;

    let mut c = vec![0.0; n];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < n {
            c[b] = t.rows[r][rhs].max(0.0);
        }
    }
    for (x, &u) in c.iter_mut().zip(upper) {
        *x = x.min(u);
    }
    Ok(c)
}
