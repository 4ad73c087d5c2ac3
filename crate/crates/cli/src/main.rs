use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cpscore_cli::bench::{self, Protocol, Table};
use cpscore_cli::commands::{generate, infer};
use cpscore_cli::config::{GenerateConfig, HyperOverrides, Model, RunConfig};
use cpscore_cli::formats::to_json;
use cpscore_cli::{CliError, CliResult, EXIT_NOT_CONVERGED};

#[derive(Parser)]
#[command(name = "cpscore", version, about = "Core-periphery scores from graphs and node attributes")]
struct Cli {
    /// Print the summary record as JSON on standard output
    #[arg(long, global = true)]
    json: bool,

    /// More log output on standard error (repeat for more)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a synthetic core-periphery instance
    Generate {
        #[arg(long, value_enum)]
        model: Option<Model>,
        /// Number of nodes [default: 60]
        #[arg(long)]
        n: Option<usize>,
        /// Fraction of core nodes in [0, 1] [default: 0.5]
        #[arg(long)]
        frac_core: Option<f64>,
        /// Attribute dimension [default: 30]
        #[arg(long)]
        d_attr: Option<usize>,
        /// Laplace strength of the graph prior [default: 1]
        #[arg(long)]
        lambda: Option<f64>,
        /// Distance coupling [default: 1]
        #[arg(long)]
        e: Option<f64>,
        /// Attribute noise variance for ga-affine-real [default: 1]
        #[arg(long)]
        sigma2: Option<f64>,
        /// Smallest eigenvalue of the repaired precision for ao [default: 10]
        #[arg(long)]
        repair_margin: Option<f64>,
        /// [default: 0]
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON config; flags override its fields
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Fit core scores (and, for ao, the graph)
    Infer {
        #[arg(long, value_enum)]
        model: Option<Model>,
        /// Graph as a CSV matrix (.csv) or an `i j weight` edge list
        #[arg(long)]
        graph: Option<PathBuf>,
        /// N x D attribute matrix (CSV)
        #[arg(long)]
        attributes: Option<PathBuf>,
        /// N x N distance matrix (CSV)
        #[arg(long)]
        distances: Option<PathBuf>,
        #[command(flatten)]
        hyper: HyperOverrides,
        /// Remove row means of the attributes before forming the covariance (ao)
        #[arg(long)]
        center: bool,
        /// Also penalize the diagonal of the learned graph (ao)
        #[arg(long)]
        penalize_diagonal: bool,
        /// Also write |graph| permuted by decreasing core score
        #[arg(long)]
        order_output: bool,
        /// Recorded in the result; the solvers are deterministic
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON config; flags override its fields
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run a synthetic benchmark table
    Bench {
        #[arg(value_enum)]
        table: Table,
        /// Number of seeds per cell
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        /// Base seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the JSON report here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads [default: all cores]
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn some_if(flag: bool) -> Option<bool> {
    flag.then_some(true)
}

fn run(cli: Cli) -> CliResult<i32> {
    let emit = |human: String, json: String| {
        if cli.json {
            print!("{json}");
        } else {
            print!("{human}");
        }
    };
    match cli.command {
        Command::Generate { model, n, frac_core, d_attr, lambda, e, sigma2, repair_margin, seed, out, config } => {
            let file = match config {
                Some(p) => GenerateConfig::load(&p)?,
                None => GenerateConfig::default(),
            };
            let flags = GenerateConfig { model, n, frac_core, d_attr, lambda, e, sigma2, repair_margin, seed, out };
            let s = generate(file.merge(flags))?;
            emit(format!("generated {} instance: n = {}, n_core = {}, seed = {}\n", s.model.name(), s.n, s.n_core, s.seed), to_json(&s));
            Ok(0)
        }
        Command::Infer {
            model,
            graph,
            attributes,
            distances,
            hyper,
            center,
            penalize_diagonal,
            order_output,
            seed,
            out,
            config,
        } => {
            let file = match config {
                Some(p) => RunConfig::load(&p)?,
                None => RunConfig::default(),
            };
            let flags = RunConfig {
                model,
                hyperparams: hyper,
                graph,
                attributes,
                distances,
                out,
                seed,
                order_output: some_if(order_output),
                center: some_if(center),
                penalize_diagonal: some_if(penalize_diagonal),
            };
            let run = file.merge(flags).resolve()?;
            let s = infer(&run)?;
            emit(
                format!(
                    "{}: {} after {} iterations, objective {}\n",
                    s.model.name(),
                    if s.converged { "converged" } else { "not converged" },
                    s.outer_iters,
                    s.objective_final
                ),
                to_json(&s),
            );
            Ok(if s.converged { 0 } else { EXIT_NOT_CONVERGED })
        }
        Command::Bench { table, seeds, seed, out, threads } => {
            if seeds == 0 {
                return Err(CliError::Usage("--seeds must be at least 1".into()));
            }
            let proto = Protocol::default();
            let report = match threads {
                Some(t) => rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build()
                    .map_err(|e| CliError::Usage(e.to_string()))?
                    .install(|| bench::run(table, &proto, seeds, seed)),
                None => bench::run(table, &proto, seeds, seed),
            };
            let json = to_json(&report);
            match out {
                Some(p) => {
                    std::fs::write(&p, &json).map_err(|e| CliError::io(&p, e))?;
                    emit(report.render(), json);
                }
                None => print!("{json}"),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
