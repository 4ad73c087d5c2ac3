//! Synthetic benchmark tables.
//!
//! `t2`: cosine between estimated and true core scores for the four models and
//! two graph-only baselines. `t5`: cosine between the vectorized `|Θ|` learned by
//! AO and by the uniformly weighted graphical lasso against the true graph.
//!
//! Every (method, core fraction, seed) job is independent: the instance comes
//! from stream `8·seed` of the base seed and each method draws its attributes
//! from its own stream.

use cpscore::baselines::{binarize, k_core, median_threshold, minres_scores};
use cpscore::generate::{
    feasible_kappa, gen_affine_params, gen_attr_ao_with_margin, gen_attr_bool, gen_attr_nonlinear, gen_attr_real,
    gen_core_scores, gen_graph, SyntheticSpec,
};
use cpscore::infer::ao::uniform_glasso;
use cpscore::infer::{fit_ao, fit_bool, fit_nonlinear, fit_real, sample_covariance, AoOptions};
use cpscore::metrics::{cosine_similarity, edge_cosine};
use cpscore::numerics::RngStream;
use cpscore::{CoreScores, DistanceMatrix, Hyperparams};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Table {
    T2,
    T5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    GaAffineBool,
    GaAffineReal,
    GaNonlinear,
    Ao,
    KCore,
    Minres,
    UniformGlasso,
}

impl Method {
    /// Stream offset of the method's attribute draw. AO and the uniform
    /// graphical lasso see the same attributes.
    fn stream(self) -> u64 {
        match self {
            Method::GaAffineBool => 1,
            Method::GaAffineReal => 2,
            Method::GaNonlinear => 3,
            Method::Ao | Method::UniformGlasso => 4,
            Method::KCore | Method::Minres => 0,
        }
    }
}

impl Table {
    pub fn methods(self) -> &'static [Method] {
        match self {
            Table::T2 => &[
                Method::GaAffineBool,
                Method::GaAffineReal,
                Method::GaNonlinear,
                Method::Ao,
                Method::KCore,
                Method::Minres,
            ],
            Table::T5 => &[Method::Ao, Method::UniformGlasso],
        }
    }

    pub fn metric(self) -> &'static str {
        match self {
            Table::T2 => "core_cosine",
            Table::T5 => "edge_cosine",
        }
    }
}

/// Synthetic protocol shared by every cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Protocol {
    pub n: usize,
    pub d_attr: usize,
    pub core_fractions: Vec<f64>,
    /// Laplace strength used to draw the graph.
    pub lambda_gen: f64,
    pub e: f64,
    pub sigma2: f64,
    /// l1 weight of the AO fit and of the uniform graphical lasso.
    pub lambda_ao: f64,
    /// Smallest eigenvalue of the repaired AO precision.
    pub repair_margin: f64,
}

impl Default for Protocol {
    fn default() -> Self {
        Self {
            n: 60,
            d_attr: 30,
            core_fractions: vec![0.1, 0.5, 0.9],
            lambda_gen: 1.0,
            e: 1.0,
            sigma2: 1.0,
            lambda_ao: 0.01,
            repair_margin: 10.0,
        }
    }
}

struct Instance {
    spec: SyntheticSpec,
    c: CoreScores,
    d: DistanceMatrix,
    theta: DMatrix<f64>,
}

impl Protocol {
    fn instance(&self, frac_core: f64, base_seed: u64, seed: u64) -> cpscore::Result<Instance> {
        let spec = SyntheticSpec { n: self.n, frac_core, d_attr: self.d_attr, e: self.e, ..SyntheticSpec::default() };
        let mut rng = RngStream::with_stream(base_seed, 8 * seed);
        let (c, d) = gen_core_scores(&spec, &mut rng)?;
        let theta = gen_graph(&c, Some(&d), &self.gen_hyper(), &mut rng)?;
        Ok(Instance { spec, c, d, theta })
    }

    fn gen_hyper(&self) -> Hyperparams {
        Hyperparams { lambda: self.lambda_gen, e: self.e, sigma2: self.sigma2, ..Hyperparams::default() }
    }

    fn fit_hyper(&self, spec: &SyntheticSpec) -> Hyperparams {
        Hyperparams { e: self.e, mass: Some(spec.n_core().max(1) as f64), ..self.gen_hyper() }
    }

    /// Runs one job: `metric` value, iteration count, convergence and trace monotonicity.
    pub fn run_job(&self, table: Table, method: Method, frac_core: f64, base_seed: u64, seed: u64) -> cpscore::Result<Outcome> {
        let inst = self.instance(frac_core, base_seed, seed)?;
        let mut rng = RngStream::with_stream(base_seed, 8 * seed + method.stream());
        let truth = inst.c.as_slice();
        let hyper = self.fit_hyper(&inst.spec);
        let scored = |c: &[f64], trace: &[f64], iters: usize, converged: bool| -> cpscore::Result<Outcome> {
            Ok(Outcome { value: cosine_similarity(c, truth)?, iters, converged, monotone: non_decreasing(trace) })
        };
        match method {
            Method::GaAffineBool | Method::GaAffineReal => {
                let f = gen_affine_params(self.d_attr, &mut rng);
                let r = if method == Method::GaAffineBool {
                    fit_bool(&inst.theta, &gen_attr_bool(&inst.c, &f, &mut rng), &hyper)?
                } else {
                    fit_real(&inst.theta, &gen_attr_real(&inst.c, &f, self.sigma2, &mut rng)?, &hyper)?
                };
                scored(r.c.as_slice(), &r.objective_trace, r.outer_iters, r.converged)
            }
            Method::GaNonlinear => {
                let kappa = Some(feasible_kappa(&inst.c, Some(&inst.d), self.e, hyper.eps)?);
                let gen = Hyperparams { kappa, ..self.gen_hyper() };
                let x = gen_attr_nonlinear(&inst.c, Some(&inst.d), &gen, self.d_attr, &mut rng)?;
                let r = fit_nonlinear(&inst.theta, &x, Some(&inst.d), &Hyperparams { kappa, ..hyper })?;
                scored(r.c.as_slice(), &r.objective_trace, r.iters, r.converged)
            }
            Method::Ao | Method::UniformGlasso => {
                let (x, theta_pd) = gen_attr_ao_with_margin(&inst.theta, self.d_attr, self.repair_margin, &mut rng)?;
                let hyper = Hyperparams { lambda: self.lambda_ao, ..hyper };
                let opts = AoOptions::default();
                if method == Method::UniformGlasso {
                    let s = sample_covariance(&x, opts.center)?;
                    let t = uniform_glasso(&s, self.lambda_ao, &opts.glasso)?;
                    return Ok(Outcome { value: edge_cosine(&t, &theta_pd)?, iters: 1, converged: true, monotone: true });
                }
                let r = fit_ao(&x, Some(&inst.d), &hyper, &opts)?;
                let mut out = scored(r.c.as_slice(), &r.objective_trace, r.outer_iters, r.converged)?;
                if table == Table::T5 {
                    out.value = edge_cosine(&r.theta, &theta_pd)?;
                }
                Ok(out)
            }
            Method::KCore => {
                let g = binarize(&inst.theta, median_threshold(&inst.theta))?;
                let k: Vec<f64> = k_core(&g).into_iter().map(|v| v as f64).collect();
                scored(&k, &[], 0, true)
            }
            Method::Minres => {
                let r = minres_scores(&inst.theta)?;
                scored(&r.scores, &[-r.objective_start, -r.objective], r.iters, true)
            }
        }
    }
}

/// Objective traces are maximized; allows a 1e-9 wiggle.
pub fn non_decreasing(trace: &[f64]) -> bool {
    trace.windows(2).all(|w| w[1] >= w[0] - 1e-9)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub value: f64,
    pub iters: usize,
    pub converged: bool,
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub seed: u64,
    pub error: String,
}

/// Summary of one (method, core fraction) cell over all seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub method: Method,
    pub core_fraction: f64,
    pub mean: f64,
    /// Population standard deviation; zero for a single seed.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub values: Vec<f64>,
    pub max_iters: usize,
    pub all_converged: bool,
    pub traces_monotone: bool,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub table: Table,
    pub metric: &'static str,
    pub seeds: u64,
    pub base_seed: u64,
    pub rng: &'static str,
    pub protocol: Protocol,
    pub cells: Vec<Cell>,
}

impl BenchReport {
    pub fn cell(&self, method: Method, core_fraction: f64) -> Option<&Cell> {
        self.cells.iter().find(|c| c.method == method && c.core_fraction == core_fraction)
    }

    /// Plain-text table, one line per cell.
    pub fn render(&self) -> String {
        let mut s = format!("{} ({}, {} seeds)\n", self.metric, self.table_name(), self.seeds);
        for c in &self.cells {
            let name = serde_json::to_value(c.method).expect("enum serializes");
            s.push_str(&format!(
                "{:<16} a={:<4} {:.4} ± {:.4}  min {:.4}{}\n",
                name.as_str().unwrap_or_default(),
                c.core_fraction,
                c.mean,
                c.std,
                c.min,
                if c.failures.is_empty() { String::new() } else { format!("  ({} failed)", c.failures.len()) }
            ));
        }
        s
    }

    fn table_name(&self) -> &'static str {
        match self.table {
            Table::T2 => "t2",
            Table::T5 => "t5",
        }
    }
}

fn summarize(method: Method, core_fraction: f64, results: Vec<(u64, cpscore::Result<Outcome>)>) -> Cell {
    let mut values = Vec::new();
    let mut failures = Vec::new();
    let (mut max_iters, mut all_converged, mut traces_monotone) = (0, true, true);
    for (seed, r) in results {
        match r {
            Ok(o) => {
                values.push(o.value);
                max_iters = max_iters.max(o.iters);
                all_converged &= o.converged;
                traces_monotone &= o.monotone;
            }
            Err(e) => failures.push(Failure { seed, error: e.to_string() }),
        }
    }
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k).sqrt();
    Cell {
        method,
        core_fraction,
        mean,
        std,
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        values,
        max_iters,
        all_converged: all_converged && failures.is_empty(),
        traces_monotone,
        failures,
    }
}

/// Runs one cell; seeds execute in parallel and are collected in order.
pub fn run_cell(table: Table, method: Method, core_fraction: f64, proto: &Protocol, seeds: u64, base_seed: u64) -> Cell {
    let results = (0..seeds)
        .into_par_iter()
        .map(|seed| (seed, proto.run_job(table, method, core_fraction, base_seed, seed)))
        .collect();
    let cell = summarize(method, core_fraction, results);
    for f in &cell.failures {
        log::warn!("{method:?} a={core_fraction} seed {}: {}", f.seed, f.error);
    }
    cell
}

pub fn run(table: Table, proto: &Protocol, seeds: u64, base_seed: u64) -> BenchReport {
    let cells = table
        .methods()
        .iter()
        .flat_map(|&m| proto.core_fractions.iter().map(move |&a| (m, a)))
        .map(|(m, a)| run_cell(table, m, a, proto, seeds, base_seed))
        .collect();
    BenchReport {
        table,
        metric: table.metric(),
        seeds,
        base_seed,
        rng: RngStream::ALGORITHM,
        protocol: proto.clone(),
        cells,
    }
}
