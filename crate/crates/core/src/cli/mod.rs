//! Command-line front end: one subcommand per pipeline stage plus the full
//! pipeline. Every command prints a JSON report to stdout.

mod pipeline;
mod report;
mod solvers;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use pipeline::{
    run_pipeline, EquilibriumSection, NetworkSection, NetworkSource, OracleSection, Perturbation, PipelineConfig,
    PipelineReport,
};
pub use report::{config_hash, RunInfo};
pub use solvers::{run_solver, SolverChoice, SolverKind, SolverStats, SubSolverKind, ENDPOINT_ENV};

use crate::equilibrium::{
    cascade_iteration, exhaustive_equilibrium, failure_spec_from_state, linear_equilibrium, ObjectiveKind,
};
use crate::error::{Error, Result};
use crate::hubo::{build_hubo, BinaryPolynomial, BitSpec};
use crate::network::{generate_random_network, load_network, perturb_prices, save_network, validate};
use crate::numfmt;
use crate::reduction::{
    boolean_to_spin, estimate_resources, quadratize, GadgetStrategy, QuadratizeConfig, ScaleMode, DEFAULT_SCALE,
};
use crate::solver::{read_qubo_file, write_qubo_file, AncillaHandling};
use report::write_text;

#[derive(Debug, Parser)]
#[command(name = "crashnet", version, about = "Crash prediction for cross-holding financial networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Omit timestamps and wall times from reports.
    #[arg(long, global = true)]
    pub normalize: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a random network and write it as JSON.
    Generate(GenerateArgs),
    /// Linear equilibrium and, with a failure spec, the grid oracle.
    Equilibrium(EquilibriumArgs),
    /// Expand the equilibrium objective into a binary polynomial.
    Hubo(HuboArgs),
    /// Quadratize a polynomial dump into a `.qubo` file.
    Reduce(ReduceArgs),
    /// Minimize a `.qubo` file.
    Solve(SolveArgs),
    /// Upper bounds on terms, ancillas and memory.
    Estimate(EstimateArgs),
    /// Run every stage end to end.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 10.0)]
    pub price_min: f64,
    #[arg(long, default_value_t = 40.0)]
    pub price_max: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also attach a failure spec derived from the linear equilibrium.
    #[arg(long)]
    pub critical_fraction: Option<f64>,
    #[arg(long, requires = "critical_fraction")]
    pub failure_fraction: Option<f64>,
    #[arg(long, default_value = "network.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EquilibriumArgs {
    #[arg(long)]
    pub network: PathBuf,
    /// Zero these asset prices first (comma separated, 0-based).
    #[arg(long, value_delimiter = ',')]
    pub zero_assets: Vec<usize>,
    /// Grid width for the exhaustive oracle.
    #[arg(long)]
    pub bits: Option<u32>,
    /// Use the smoothed objective of this degree in the oracle.
    #[arg(long)]
    pub r: Option<usize>,
}

#[derive(Debug, Args)]
pub struct HuboArgs {
    #[arg(long)]
    pub network: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub bits: u32,
    #[arg(long, default_value_t = 3)]
    pub r: usize,
    /// Ignore any failure spec and build the linear objective.
    #[arg(long)]
    pub linear: bool,
    #[arg(long, value_delimiter = ',')]
    pub zero_assets: Vec<usize>,
    #[arg(long, default_value = "hubo.txt")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct QuadratizeArgs {
    /// Gadget scale: J^a = factor·|J_k|, q_0 = factor/2·|J_k|.
    #[arg(long, default_value_t = DEFAULT_SCALE)]
    pub scale_factor: f64,
    /// Size every gadget from the largest |J_k| instead of its own.
    #[arg(long)]
    pub global_scale: bool,
    /// Use the one-ancilla gadget for three-body terms.
    #[arg(long)]
    pub single_ancilla: bool,
}

impl QuadratizeArgs {
    fn config(&self) -> QuadratizeConfig {
        QuadratizeConfig {
            scale: if self.global_scale {
                ScaleMode::Global { factor: self.scale_factor }
            } else {
                ScaleMode::PerTerm { factor: self.scale_factor }
            },
            strategy: if self.single_ancilla {
                GadgetStrategy::SingleAncillaThreeBody
            } else {
                GadgetStrategy::KAncilla
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[arg(long)]
    pub hubo: PathBuf,
    #[command(flatten)]
    pub quadratize: QuadratizeArgs,
    #[arg(long, default_value = "problem.qubo")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = SolverKind::Decompose)]
    pub solver: SolverKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub reads: Option<usize>,
    #[arg(long)]
    pub sweeps: Option<usize>,
    #[arg(long)]
    pub tenure: Option<usize>,
    #[arg(long)]
    pub max_no_improve: Option<usize>,
    #[arg(long)]
    pub subproblem_size: Option<usize>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long, value_enum)]
    pub subsolver: Option<SubSolverKind>,
    #[arg(long, value_enum)]
    pub ancillas: Option<AncillaHandling>,
    /// Remote sampler base URL.
    #[arg(long, env = ENDPOINT_ENV)]
    pub endpoint: Option<String>,
}

impl SolverArgs {
    fn choice(&self) -> SolverChoice {
        let d = SolverChoice::default();
        SolverChoice {
            solver: self.solver,
            reads: self.reads.unwrap_or(d.reads),
            sweeps: self.sweeps.unwrap_or(d.sweeps),
            tenure: self.tenure,
            max_no_improve: self.max_no_improve,
            subproblem_size: self.subproblem_size.unwrap_or(d.subproblem_size),
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
            subsolver: self.subsolver.unwrap_or(d.subsolver),
            ancillas: self.ancillas.unwrap_or(d.ancillas),
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub qubo: PathBuf,
    /// Variables `0..logical` are logical, the rest ancillas.
    #[arg(long)]
    pub logical: Option<usize>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Write the full sample set here.
    #[arg(long)]
    pub samples: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub bits: u64,
    #[arg(long)]
    pub r: u64,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// JSON configuration; flags below are ignored when given.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, conflicts_with_all = ["n", "m"])]
    pub network: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 7)]
    pub m: usize,
    #[arg(long, default_value_t = 1.0)]
    pub price_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub price_max: f64,
    #[arg(long, default_value_t = 0)]
    pub network_seed: u64,
    #[arg(long, default_value_t = 0.8)]
    pub critical_fraction: f64,
    #[arg(long, default_value_t = 0.3)]
    pub failure_fraction: f64,
    #[arg(long, default_value_t = 5)]
    pub bits: u32,
    #[arg(long, default_value_t = 3)]
    pub r: usize,
    /// Linear model without failure terms.
    #[arg(long)]
    pub linear: bool,
    #[arg(long, value_delimiter = ',', conflicts_with = "random_zero")]
    pub zero_assets: Option<Vec<usize>>,
    /// Number of randomly chosen assets to zero.
    #[arg(long, default_value_t = 2)]
    pub random_zero: usize,
    #[arg(long, default_value_t = 0)]
    pub perturb_seed: u64,
    #[command(flatten)]
    pub quadratize: QuadratizeArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = 1 << 20)]
    pub oracle_cap: u64,
    #[arg(long, default_value = "crashnet-out")]
    pub out: PathBuf,
}

impl PipelineArgs {
    fn config(&self) -> Result<PipelineConfig> {
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::from(e).with_context(format!("reading {}", path.display())))?;
            return serde_json::from_str(&text).map_err(|e| Error::Parse {
                line: e.line(),
                message: e.to_string(),
            });
        }
        Ok(PipelineConfig {
            network: match &self.network {
                Some(path) => NetworkSource::File { path: path.clone() },
                None => NetworkSource::Generate {
                    n: self.n,
                    m: self.m,
                    price_min: self.price_min,
                    price_max: self.price_max,
                    seed: self.network_seed,
                },
            },
            critical_fraction: self.critical_fraction,
            failure_fraction: self.failure_fraction,
            bits: self.bits,
            r: (!self.linear).then_some(self.r),
            perturbation: match &self.zero_assets {
                Some(z) => Perturbation::Assets { zeroed: z.clone() },
                None => Perturbation::Random {
                    count: self.random_zero,
                    seed: self.perturb_seed,
                },
            },
            solver: self.solver.choice(),
            quadratize: self.quadratize.config(),
            seed: self.solver.seed,
            oracle_cap: self.oracle_cap,
        })
    }
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    run: RunInfo,
    #[serde(flatten)]
    body: &'a T,
}

fn emit<T: Serialize>(command: &str, seed: Option<u64>, config: &impl Serialize, body: &T, normalize: bool, start: Instant) {
    let report = Report {
        run: RunInfo::new(command, seed, config, normalize, start),
        body,
    };
    print!("{}", numfmt::to_json_string(&report));
}

fn perturbed(path: &Path, zero: &[usize]) -> Result<(crate::network::FinancialNetwork, Option<crate::network::FailureSpec>)> {
    let (net, fail) = load_network(path)?;
    let net = if zero.is_empty() {
        net
    } else {
        perturb_prices(&net, &zero.iter().copied().collect::<BTreeSet<_>>())?
    };
    Ok((net, fail))
}

/// Reads a HUBO dump, honoring an optional `# vars N` header.
fn read_hubo(path: &Path) -> Result<BinaryPolynomial> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::from(e).with_context(format!("reading {}", path.display())))?;
    let mut vars = None;
    let mut body = String::new();
    for line in text.lines() {
        match line.trim().strip_prefix('#') {
            Some(c) => {
                if let Some(v) = c.trim().strip_prefix("vars") {
                    vars = Some(v.trim().parse::<usize>().map_err(|_| Error::Parse {
                        line: 1,
                        message: format!("bad variable count `{}`", v.trim()),
                    })?);
                }
                // keep line numbering aligned with the file
                body.push('\n');
            }
            None => {
                body.push_str(line);
                body.push('\n');
            }
        }
    }
    let inferred = body
        .split_whitespace()
        .filter_map(|t| t.parse::<u32>().ok())
        .max()
        .map_or(0, |m| m as usize + 1);
    BinaryPolynomial::parse_dump(&body, vars.unwrap_or(inferred))
}

pub fn run(cli: &Cli) -> Result<()> {
    let start = Instant::now();
    let norm = cli.normalize;
    match &cli.command {
        Command::Generate(a) => {
            let net = generate_random_network(a.n, a.m, a.price_min, a.price_max, a.seed)?;
            let fail = match a.critical_fraction {
                Some(c) => Some(failure_spec_from_state(&linear_equilibrium(&net)?, c, a.failure_fraction.unwrap_or(0.3))?),
                None => None,
            };
            save_network(&net, fail.as_ref(), &a.out)?;
            #[derive(Serialize)]
            struct Out<'a> {
                network: &'a Path,
                n: usize,
                m: usize,
                violations: usize,
            }
            let body = Out {
                network: &a.out,
                n: a.n,
                m: a.m,
                violations: validate(&net).len(),
            };
            let cfg = (a.n, a.m, a.price_min, a.price_max, a.seed, a.critical_fraction, a.failure_fraction);
            emit("generate", Some(a.seed), &cfg, &body, norm, start);
        }
        Command::Equilibrium(a) => {
            let (net, fail) = perturbed(&a.network, &a.zero_assets)?;
            let lin = linear_equilibrium(&net)?;
            #[derive(Serialize)]
            struct Out {
                linear: crate::equilibrium::MarketState,
                #[serde(skip_serializing_if = "Option::is_none")]
                cascade: Option<crate::equilibrium::CascadeOutcome>,
                #[serde(skip_serializing_if = "Option::is_none")]
                oracle: Option<crate::equilibrium::ExhaustiveResult>,
            }
            let mut body = Out {
                linear: lin.clone(),
                cascade: None,
                oracle: None,
            };
            if let Some(fail) = &fail {
                body.cascade = Some(cascade_iteration(&net, fail, &lin.market_values, 1000)?);
                if let Some(bits) = a.bits {
                    let kind = a.r.map_or(ObjectiveKind::Exact, ObjectiveKind::Smoothed);
                    body.oracle = Some(exhaustive_equilibrium(&net, fail, bits, kind)?);
                }
            } else if a.bits.is_some() {
                return Err(Error::Parameter("the oracle needs a network file with a failure_spec".into()));
            }
            let cfg = (&a.network, &a.zero_assets, a.bits, a.r);
            emit("equilibrium", None, &cfg, &body, norm, start);
        }
        Command::Hubo(a) => {
            let (net, fail) = perturbed(&a.network, &a.zero_assets)?;
            let spec = BitSpec::integer(a.bits)?;
            let (fail, r) = match (&fail, a.linear) {
                (Some(f), false) => (Some(f), Some(a.r)),
                _ => (None, None),
            };
            let (bp, stats) = build_hubo(&net, fail, &spec, r)?;
            write_text(&a.out, &pipeline::hubo_text(&bp.dump(), bp.num_vars()))?;
            let cfg = (&a.network, a.bits, a.r, a.linear, &a.zero_assets);
            emit("hubo", None, &cfg, &stats, norm, start);
        }
        Command::Reduce(a) => {
            let bp = read_hubo(&a.hubo)?;
            let cfg = a.quadratize.config();
            let (q, stats) = quadratize(&boolean_to_spin(&bp), &cfg)?;
            write_qubo_file(&q, &a.out)?;
            emit("reduce", None, &(&a.hubo, cfg), &stats, norm, start);
        }
        Command::Solve(a) => {
            let mut q = read_qubo_file(&a.qubo)?;
            if let Some(l) = a.logical {
                if l > q.size {
                    return Err(Error::Parameter(format!("--logical {l} exceeds problem size {}", q.size)));
                }
                q.logical_count = l;
            }
            let choice = a.solver.choice();
            let problems = choice.problems();
            if !problems.is_empty() {
                return Err(Error::Parameter(problems.join("; ")));
            }
            let (set, stats) = run_solver(&q, &choice, a.solver.seed, a.solver.endpoint.as_deref())?;
            if let Some(path) = &a.samples {
                write_text(path, &numfmt::to_json_string(&set))?;
            }
            #[derive(Serialize)]
            struct Out<'a> {
                solver_stats: SolverStats,
                best_assignment: Vec<u8>,
                /// Recomputed from the problem.
                best_energy: f64,
                samples: Option<&'a Path>,
            }
            let body = Out {
                best_energy: q.energy(&set.best_sample().assignment),
                best_assignment: set.best_sample().assignment.iter().map(|&b| b as u8).collect(),
                solver_stats: stats,
                samples: a.samples.as_deref(),
            };
            emit("solve", Some(a.solver.seed), &(&a.qubo, a.logical, &choice), &body, norm, start);
        }
        Command::Estimate(a) => {
            let est = estimate_resources(a.n, a.bits, a.r)?;
            emit("estimate", None, &(a.n, a.bits, a.r), &est, norm, start);
        }
        Command::Pipeline(a) => {
            let config = a.config()?;
            let report = run_pipeline(&config, &a.out, a.solver.endpoint.as_deref(), norm)?;
            print!("{}", numfmt::to_json_string(&report));
        }
    }
    Ok(())
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
