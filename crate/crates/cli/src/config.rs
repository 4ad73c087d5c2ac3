//! Run configuration. JSON config files and command-line flags deserialize to
//! the same partial records; flags are merged over the file.

use std::path::{Path, PathBuf};

use cpscore::infer::AoOptions;
use cpscore::Hyperparams;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::formats::read_json;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    GaAffineBool,
    GaAffineReal,
    GaNonlinear,
    Ao,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::GaAffineBool => "ga-affine-bool",
            Model::GaAffineReal => "ga-affine-real",
            Model::GaNonlinear => "ga-nonlinear",
            Model::Ao => "ao",
        }
    }

    pub fn needs_graph(self) -> bool {
        self != Model::Ao
    }
}

/// Per-field overrides of [`Hyperparams`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(default, deny_unknown_fields)]
pub struct HyperOverrides {
    /// Laplace strength / l1 weight
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Distance coupling e (needs --distances when > 0)
    #[arg(long)]
    pub e: Option<f64>,
    /// Distance offset inside log(d + eps)
    #[arg(long)]
    pub eps: Option<f64>,
    /// Ridge weight on the affine parameters
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Attribute noise variance of the real affine model
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Sum constraint on the core scores [default: N/4]
    #[arg(long)]
    pub mass: Option<f64>,
    /// Diagonal offset of K(c) for ga-nonlinear
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Outer convergence tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    /// Maximum number of outer iterations
    #[arg(long)]
    pub max_outer: Option<usize>,
}

impl HyperOverrides {
    fn merge(self, over: Self) -> Self {
        Self {
            lambda: over.lambda.or(self.lambda),
            e: over.e.or(self.e),
            eps: over.eps.or(self.eps),
            alpha: over.alpha.or(self.alpha),
            sigma2: over.sigma2.or(self.sigma2),
            mass: over.mass.or(self.mass),
            kappa: over.kappa.or(self.kappa),
            tol: over.tol.or(self.tol),
            max_outer: over.max_outer.or(self.max_outer),
        }
    }

    pub fn apply(&self, base: Hyperparams) -> Hyperparams {
        Hyperparams {
            lambda: self.lambda.unwrap_or(base.lambda),
            e: self.e.unwrap_or(base.e),
            eps: self.eps.unwrap_or(base.eps),
            alpha: self.alpha.unwrap_or(base.alpha),
            sigma2: self.sigma2.unwrap_or(base.sigma2),
            mass: self.mass.or(base.mass),
            kappa: self.kappa.or(base.kappa),
            tol: self.tol.unwrap_or(base.tol),
            max_outer: self.max_outer.unwrap_or(base.max_outer),
        }
    }
}

/// Everything `infer` needs, possibly only partially specified.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<Model>,
    pub hyperparams: HyperOverrides,
    pub graph: Option<PathBuf>,
    pub attributes: Option<PathBuf>,
    pub distances: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub order_output: Option<bool>,
    /// Remove row means of X before forming the sample covariance (ao).
    pub center: Option<bool>,
    /// Penalize the diagonal of the graph (ao).
    pub penalize_diagonal: Option<bool>,
}

/// A validated [`RunConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedRun {
    pub model: Model,
    pub hyper: Hyperparams,
    pub ao: AoOptions,
    pub graph: Option<PathBuf>,
    pub attributes: Option<PathBuf>,
    pub distances: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub order_output: bool,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        read_json(path)
    }

    /// Fields set in `over` win.
    pub fn merge(self, over: Self) -> Self {
        Self {
            model: over.model.or(self.model),
            hyperparams: self.hyperparams.merge(over.hyperparams),
            graph: over.graph.or(self.graph),
            attributes: over.attributes.or(self.attributes),
            distances: over.distances.or(self.distances),
            out: over.out.or(self.out),
            seed: over.seed.or(self.seed),
            order_output: over.order_output.or(self.order_output),
            center: over.center.or(self.center),
            penalize_diagonal: over.penalize_diagonal.or(self.penalize_diagonal),
        }
    }

    pub fn resolve(self) -> CliResult<ResolvedRun> {
        let model = self.model.ok_or_else(|| CliError::Usage("--model is required".into()))?;
        let out = self.out.ok_or_else(|| CliError::Usage("--out is required".into()))?;
        if model.needs_graph() && self.graph.is_none() {
            return Err(CliError::Usage(format!("model {} needs a graph (--graph)", model.name())));
        }
        if !model.needs_graph() && self.graph.is_some() {
            return Err(CliError::Usage("model ao learns the graph; --graph is not accepted".into()));
        }
        if matches!(model, Model::GaNonlinear | Model::Ao) && self.attributes.is_none() {
            return Err(CliError::Usage(format!("model {} needs attributes (--attributes)", model.name())));
        }
        let hyper = self.hyperparams.apply(Hyperparams::default());
        hyper.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        if hyper.e != 0.0 && self.distances.is_none() {
            return Err(CliError::Usage("a nonzero --e needs --distances".into()));
        }
        let mut ao = AoOptions::default();
        if let Some(c) = self.center {
            ao.center = c;
        }
        if let Some(p) = self.penalize_diagonal {
            ao.glasso.penalize_diagonal = p;
        }
        Ok(ResolvedRun {
            model,
            hyper,
            ao,
            graph: self.graph,
            attributes: self.attributes,
            distances: self.distances,
            out,
            seed: self.seed,
            order_output: self.order_output.unwrap_or(false),
        })
    }
}

/// Generation settings; unset fields take the benchmark protocol values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateConfig {
    pub model: Option<Model>,
    pub n: Option<usize>,
    pub frac_core: Option<f64>,
    pub d_attr: Option<usize>,
    pub lambda: Option<f64>,
    pub e: Option<f64>,
    pub sigma2: Option<f64>,
    pub repair_margin: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl GenerateConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        read_json(path)
    }

    pub fn merge(self, over: Self) -> Self {
        Self {
            model: over.model.or(self.model),
            n: over.n.or(self.n),
            frac_core: over.frac_core.or(self.frac_core),
            d_attr: over.d_attr.or(self.d_attr),
            lambda: over.lambda.or(self.lambda),
            e: over.e.or(self.e),
            sigma2: over.sigma2.or(self.sigma2),
            repair_margin: over.repair_margin.or(self.repair_margin),
            seed: over.seed.or(self.seed),
            out: over.out.or(self.out),
        }
    }
}
