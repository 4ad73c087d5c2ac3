//! `generate` and `infer`.

use std::fs;
use std::path::{Path, PathBuf};

use cpscore::generate::{
    feasible_kappa, gen_affine_params, gen_attr_ao_with_margin, gen_attr_bool, gen_attr_nonlinear, gen_attr_real,
    gen_core_scores, gen_graph, SyntheticSpec,
};
use cpscore::infer::{fit_ao, fit_bool, fit_nonlinear, fit_real};
use cpscore::metrics::{core_order, permuted_abs};
use cpscore::numerics::RngStream;
use cpscore::{DistanceMatrix, Hyperparams};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::bench::Protocol;
use crate::config::{GenerateConfig, Model, ResolvedRun};
use crate::error::{CliError, CliResult};
use crate::formats::{read_edges, read_matrix, write_column, write_json, write_matrix};

pub const SCORES_FILE: &str = "scores.txt";
pub const DISTANCES_FILE: &str = "distances.csv";
pub const GRAPH_FILE: &str = "graph.csv";
pub const GRAPH_PD_FILE: &str = "graph_pd.csv";
pub const ATTRIBUTES_FILE: &str = "attributes.csv";
pub const AFFINE_FILE: &str = "affine_params.csv";
pub const TRACE_FILE: &str = "trace.txt";
pub const SUMMARY_FILE: &str = "summary.json";
pub const RESULT_FILE: &str = "result.json";
pub const ORDERED_FILE: &str = "ordered_adjacency.csv";
pub const ORDERING_FILE: &str = "ordering.txt";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerateSummary {
    pub model: Model,
    pub n: usize,
    pub n_core: usize,
    pub frac_core: f64,
    pub d_attr: usize,
    pub lambda: f64,
    pub e: f64,
    pub seed: u64,
    pub kappa: Option<f64>,
    pub repair_margin: Option<f64>,
    pub files: Vec<String>,
}

fn create_dir(out: &Path) -> CliResult<()> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))
}

/// Draws one synthetic instance and writes it to `cfg.out`.
pub fn generate(cfg: GenerateConfig) -> CliResult<GenerateSummary> {
    let proto = Protocol::default();
    let model = cfg.model.ok_or_else(|| CliError::Usage("--model is required".into()))?;
    let out = cfg.out.ok_or_else(|| CliError::Usage("--out is required".into()))?;
    let spec = SyntheticSpec {
        n: cfg.n.unwrap_or(proto.n),
        frac_core: cfg.frac_core.unwrap_or(0.5),
        d_attr: cfg.d_attr.unwrap_or(proto.d_attr),
        e: cfg.e.unwrap_or(proto.e),
        ..SyntheticSpec::default()
    };
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let hyper = Hyperparams {
        lambda: cfg.lambda.unwrap_or(proto.lambda_gen),
        e: spec.e,
        sigma2: cfg.sigma2.unwrap_or(proto.sigma2),
        ..Hyperparams::default()
    };
    hyper.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let margin = cfg.repair_margin.unwrap_or(proto.repair_margin);
    if !(margin > 0.0 && margin.is_finite()) {
        return Err(CliError::Usage(format!("repair margin {margin} must be positive")));
    }
    let seed = cfg.seed.unwrap_or(0);

    let mut rng = RngStream::new(seed);
    let (c, d) = gen_core_scores(&spec, &mut rng)?;
    let theta = gen_graph(&c, Some(&d), &hyper, &mut rng)?;

    create_dir(&out)?;
    let mut files = vec![SCORES_FILE, DISTANCES_FILE, GRAPH_FILE, ATTRIBUTES_FILE];
    let (mut kappa, mut repair_margin) = (None, None);
    let x = match model {
        Model::GaAffineBool | Model::GaAffineReal => {
            let f = gen_affine_params(spec.d_attr, &mut rng);
            let x = if model == Model::GaAffineBool {
                gen_attr_bool(&c, &f, &mut rng)
            } else {
                gen_attr_real(&c, &f, hyper.sigma2, &mut rng)?
            };
            write_matrix(&out.join(AFFINE_FILE), &f.0)?;
            files.push(AFFINE_FILE);
            x
        }
        Model::GaNonlinear => {
            let k = feasible_kappa(&c, Some(&d), hyper.e, hyper.eps)?;
            kappa = Some(k);
            gen_attr_nonlinear(&c, Some(&d), &Hyperparams { kappa, ..hyper.clone() }, spec.d_attr, &mut rng)?
        }
        Model::Ao => {
            let (x, theta_pd) = gen_attr_ao_with_margin(&theta, spec.d_attr, margin, &mut rng)?;
            repair_margin = Some(margin);
            write_matrix(&out.join(GRAPH_PD_FILE), &theta_pd)?;
            files.push(GRAPH_PD_FILE);
            x
        }
    };
    write_column(&out.join(SCORES_FILE), c.as_slice())?;
    write_matrix(&out.join(DISTANCES_FILE), d.matrix())?;
    write_matrix(&out.join(GRAPH_FILE), &theta)?;
    write_matrix(&out.join(ATTRIBUTES_FILE), &x)?;
    files.push(SUMMARY_FILE);

    let summary = GenerateSummary {
        model,
        n: spec.n,
        n_core: spec.n_core(),
        frac_core: spec.frac_core,
        d_attr: spec.d_attr,
        lambda: hyper.lambda,
        e: hyper.e,
        seed,
        kappa,
        repair_margin,
        files: files.into_iter().map(String::from).collect(),
    };
    write_json(&out.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InferSummary {
    pub model: Model,
    pub n: usize,
    pub d_attr: usize,
    pub converged: bool,
    pub outer_iters: usize,
    pub objective_start: f64,
    pub objective_final: f64,
    pub mass: f64,
    pub kappa: Option<f64>,
    pub hyperparams: Hyperparams,
    pub seed: Option<u64>,
    pub files: Vec<String>,
}

/// Graph from a CSV matrix (`.csv`) or an edge list (anything else).
pub fn read_graph(path: &Path, n: Option<usize>) -> CliResult<DMatrix<f64>> {
    let theta = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        read_matrix(path)?
    } else {
        read_edges(path, n)?
    };
    if theta.nrows() != theta.ncols() {
        return Err(CliError::Data(format!(
            "{}: graph is {}x{}, not square",
            path.display(),
            theta.nrows(),
            theta.ncols()
        )));
    }
    Ok(theta)
}

fn check_rows(what: &str, path: &Path, rows: usize, n: usize) -> CliResult<()> {
    if rows != n {
        return Err(CliError::Data(format!("{}: {what} has {rows} rows, expected {n}", path.display())));
    }
    Ok(())
}

struct Fitted {
    c: Vec<f64>,
    trace: Vec<f64>,
    iters: usize,
    converged: bool,
    kappa: Option<f64>,
    graph: DMatrix<f64>,
    learned: bool,
    affine: Option<DMatrix<f64>>,
}

/// Runs the configured solver and writes its outputs.
///
/// A fit that stops at `max_outer` still writes everything and returns
/// `converged = false`; the caller maps that to its exit code.
pub fn infer(run: &ResolvedRun) -> CliResult<InferSummary> {
    let x = match &run.attributes {
        Some(p) => Some((read_matrix(p)?, p.clone())),
        None => None,
    };
    let theta = match &run.graph {
        Some(p) => Some((read_graph(p, x.as_ref().map(|(x, _)| x.nrows()))?, p.clone())),
        None => None,
    };
    let n = theta
        .as_ref()
        .map(|(t, _)| t.nrows())
        .or(x.as_ref().map(|(x, _)| x.nrows()))
        .ok_or_else(|| CliError::Usage("no input data".into()))?;
    let x = match x {
        Some((x, p)) => {
            check_rows("attribute matrix", &p, x.nrows(), n)?;
            x
        }
        None => DMatrix::zeros(n, 0),
    };
    let d = match &run.distances {
        Some(p) => {
            let m = read_matrix(p)?;
            check_rows("distance matrix", p, m.nrows(), n)?;
            Some(DistanceMatrix::new(m).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?)
        }
        None => None,
    };
    let d_used = (run.hyper.e != 0.0).then_some(d.as_ref()).flatten();

    let fitted = match run.model {
        Model::GaAffineBool | Model::GaAffineReal => {
            let theta = theta.expect("checked by resolve").0;
            let r = if run.model == Model::GaAffineBool {
                fit_bool(&theta, &x, &run.hyper)?
            } else {
                fit_real(&theta, &x, &run.hyper)?
            };
            Fitted {
                c: r.c.into_inner(),
                trace: r.objective_trace,
                iters: r.outer_iters,
                converged: r.converged,
                kappa: None,
                graph: theta,
                learned: false,
                affine: Some(r.f.0),
            }
        }
        Model::GaNonlinear => {
            let theta = theta.expect("checked by resolve").0;
            let r = fit_nonlinear(&theta, &x, d_used, &run.hyper)?;
            Fitted {
                c: r.c.into_inner(),
                trace: r.objective_trace,
                iters: r.iters,
                converged: r.converged,
                kappa: Some(r.kappa),
                graph: theta,
                learned: false,
                affine: None,
            }
        }
        Model::Ao => {
            let r = fit_ao(&x, d_used, &run.hyper, &run.ao)?;
            Fitted {
                c: r.c.into_inner(),
                trace: r.objective_trace,
                iters: r.outer_iters,
                converged: r.converged,
                kappa: None,
                graph: r.theta,
                learned: true,
                affine: None,
            }
        }
    };

    let out: &PathBuf = &run.out;
    create_dir(out)?;
    let mut files = vec![SCORES_FILE, TRACE_FILE];
    write_column(&out.join(SCORES_FILE), &fitted.c)?;
    write_column(&out.join(TRACE_FILE), &fitted.trace)?;
    if fitted.learned {
        write_matrix(&out.join(GRAPH_FILE), &fitted.graph)?;
        files.push(GRAPH_FILE);
    }
    if let Some(f) = &fitted.affine {
        write_matrix(&out.join(AFFINE_FILE), f)?;
        files.push(AFFINE_FILE);
    }
    if run.order_output {
        let order = core_order(&fitted.c);
        write_matrix(&out.join(ORDERED_FILE), &permuted_abs(&fitted.graph, &order))?;
        write_column(&out.join(ORDERING_FILE), &order)?;
        files.extend([ORDERED_FILE, ORDERING_FILE]);
    }
    files.push(RESULT_FILE);

    let summary = InferSummary {
        model: run.model,
        n,
        d_attr: x.ncols(),
        converged: fitted.converged,
        outer_iters: fitted.iters,
        objective_start: fitted.trace.first().copied().unwrap_or(f64::NAN),
        objective_final: fitted.trace.last().copied().unwrap_or(f64::NAN),
        mass: run.hyper.mass_for(n),
        kappa: fitted.kappa,
        hyperparams: run.hyper.clone(),
        seed: run.seed,
        files: files.into_iter().map(String::from).collect(),
    };
    write_json(&out.join(RESULT_FILE), &summary)?;
    Ok(summary)
}
