//! Graph-only baselines: k-core decomposition and MINRES core scores.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Unweighted undirected graph without self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryGraph {
    neighbors: Vec<Vec<usize>>,
}

impl BinaryGraph {
    /// Builds a graph from an edge list; duplicates and self-loops are dropped.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut neighbors = vec![Vec::new(); n];
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::ShapeMismatch(format!("edge ({i}, {j}) in a graph of {n} nodes")));
            }
            if i != j {
                neighbors[i].push(j);
                neighbors[j].push(i);
            }
        }
        for adj in &mut neighbors {
            adj.sort_unstable();
            adj.dedup();
        }
        Ok(Self { neighbors })
    }

    pub fn n(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn n_edges(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }

    pub fn adjacency(&self) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| if self.has_edge(i, j) { 1.0 } else { 0.0 })
    }
}

/// Keeps an edge `{i, j}` iff `|Θ_ij| > tau`.
pub fn binarize(theta: &DMatrix<f64>, tau: f64) -> Result<BinaryGraph> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidParameter(format!("binarization threshold {tau}")));
    }
    let n = theta.nrows();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if theta[(i, j)].abs() > tau {
                edges.push((i, j));
            }
        }
    }
    BinaryGraph::from_edges(n, &edges)
}

/// Median of the nonzero `|Θ_ij|`, `i < j`; zero for an empty graph.
pub fn median_threshold(theta: &DMatrix<f64>) -> f64 {
    let n = theta.nrows();
    let mut v: Vec<f64> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| theta[(i, j)].abs())
        .filter(|&x| x > 0.0)
        .collect();
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Core numbers by bucket peeling in `O(n + m)`.
pub fn k_core(g: &BinaryGraph) -> Vec<usize> {
    let n = g.n();
    if n == 0 {
        return Vec::new();
    }
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let max_deg = deg.iter().copied().max().unwrap_or(0);

    // Vertices sorted by degree, with `pos` the inverse permutation and
    // `start[d]` the first slot holding degree d.
    let mut start = vec![0usize; max_deg + 2];
    for &d in &deg {
        start[d + 1] += 1;
    }
    for d in 1..start.len() {
        start[d] += start[d - 1];
    }
    let mut order = vec![0usize; n];
    let mut pos = vec![0usize; n];
    let mut fill = start.clone();
    for v in 0..n {
        pos[v] = fill[deg[v]];
        order[pos[v]] = v;
        fill[deg[v]] += 1;
    }

    for k in 0..n {
        let v = order[k];
        for &u in g.neighbors(v) {
            if deg[u] > deg[v] {
                // Move u to the front of its bucket, then shrink its degree.
                let du = deg[u];
                let pu = pos[u];
                let pw = start[du];
                let w = order[pw];
                if u != w {
                    order[pu] = w;
                    pos[w] = pu;
                    order[pw] = u;
                    pos[u] = pw;
                }
                start[du] += 1;
                deg[u] -= 1;
            }
        }
    }
    deg
}

/// `Σ_{i≠j} (|Θ_ij| − c_i c_j)²`.
pub fn minres_objective(theta: &DMatrix<f64>, c: &[f64]) -> f64 {
    let n = c.len();
    let mut f = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let r = theta[(i, j)].abs() - c[i] * c[j];
                f += r * r;
            }
        }
    }
    f
}

/// Gradient of [`minres_objective`]: `−4 Σ_{j≠k} (|Θ_kj| − c_k c_j) c_j`.
pub fn minres_gradient(theta: &DMatrix<f64>, c: &[f64]) -> Vec<f64> {
    let n = c.len();
    (0..n)
        .map(|k| {
            -4.0 * (0..n)
                .filter(|&j| j != k)
                .map(|j| (theta[(k, j)].abs() - c[k] * c[j]) * c[j])
                .sum::<f64>()
        })
        .collect()
}

/// Result of [`minres_scores`].
#[derive(Debug, Clone, PartialEq)]
pub struct MinresResult {
    /// Scores rescaled so that the largest equals one.
    pub scores: Vec<f64>,
    /// Unscaled minimizer.
    pub raw: Vec<f64>,
    pub objective_start: f64,
    pub objective: f64,
    pub iters: usize,
}

/// MINRES core scores: nonnegative `c` minimizing `Σ_{i≠j}(|Θ_ij| − c_i c_j)²`.
///
/// Starts from `√λ_max·|v|` for the leading eigenpair of the off-diagonal
/// `|Θ|` and runs projected gradient descent with backtracking.
pub fn minres_scores(theta: &DMatrix<f64>) -> Result<MinresResult> {
    let n = theta.nrows();
    if theta.ncols() != n {
        return Err(Error::ShapeMismatch("graph must be square".into()));
    }
    if theta.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("graph passed to MINRES".into()));
    }
    let a = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { theta[(i, j)].abs() });
    let mut c = vec![0.0; n];
    if n > 0 && a.amax() > 0.0 {
        let eig = a.clone().symmetric_eigen();
        let k = eig.eigenvalues.imax();
        let lmax = eig.eigenvalues[k].max(0.0);
        c = eig.eigenvectors.column(k).iter().map(|v| lmax.sqrt() * v.abs()).collect();
    }

    let f0 = minres_objective(&a, &c);
    let mut f = f0;
    let mut step = 1.0;
    let mut iters = 0;
    for _ in 0..5000 {
        iters += 1;
        let g = minres_gradient(&a, &c);
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = c.iter().zip(&g).map(|(x, d)| (x - step * d).max(0.0)).collect();
            let delta: Vec<f64> = trial.iter().zip(&c).map(|(t, x)| t - x).collect();
            let lin: f64 = g.iter().zip(&delta).map(|(gi, di)| gi * di).sum();
            let sq: f64 = delta.iter().map(|d| d * d).sum();
            let ft = minres_objective(&a, &trial);
            if ft <= f + lin + sq / (2.0 * step) {
                let moved = sq.sqrt();
                c = trial;
                let prev = f;
                f = ft;
                accepted = true;
                step *= 2.0;
                if moved <= 1e-12 * (1.0 + c.iter().map(|x| x * x).sum::<f64>().sqrt())
                    || prev - f <= 1e-14 * (1.0 + prev.abs())
                {
                    return Ok(finish(c, f0, f, iters));
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok(finish(c, f0, f, iters))
}

fn finish(raw: Vec<f64>, objective_start: f64, objective: f64, iters: usize) -> MinresResult {
    let max = raw.iter().copied().fold(0.0, f64::max);
    let scores = if max > 0.0 { raw.iter().map(|x| x / max).collect() } else { vec![0.0; raw.len()] };
    MinresResult { scores, raw, objective_start, objective, iters }
}
