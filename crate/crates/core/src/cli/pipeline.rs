use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::report::{write_text, RunInfo};
use super::solvers::{run_solver, SolverChoice, SolverStats};
use crate::equilibrium::{
    crash_report, exhaustive_equilibrium_capped, failure_spec_from_state, linear_equilibrium, objective,
    smoothed_objective, tie_tolerance, CrashReport, ObjectiveKind, DEFAULT_GRID_CAP,
};
use crate::error::{Error, Result};
use crate::hubo::{build_hubo, decode_values, BitSpec, HuboStats, ThetaPolynomial};
use crate::network::{
    generate_random_network, load_network, network_to_string, perturb_prices, FailureSpec, FinancialNetwork,
};
use crate::numfmt;
use crate::reduction::{boolean_to_spin, quadratize, QuadratizeConfig, ReductionStats};
use crate::solver::{majority_vote, render_qubo};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum NetworkSource {
    File { path: PathBuf },
    Generate { n: usize, m: usize, price_min: f64, price_max: f64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Perturbation {
    /// Zero these asset prices (0-based).
    Assets { zeroed: Vec<usize> },
    /// Zero `count` distinct assets drawn with `seed`.
    Random { count: usize, seed: u64 },
}

/// Everything a pipeline run depends on. The output directory is not part of
/// the hashed configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub network: NetworkSource,
    pub critical_fraction: f64,
    pub failure_fraction: f64,
    pub bits: u32,
    /// Smoothing degree; `None` selects the linear model.
    pub r: Option<usize>,
    pub perturbation: Perturbation,
    pub solver: SolverChoice,
    pub quadratize: QuadratizeConfig,
    pub seed: u64,
    /// Largest grid scanned for the oracle comparison.
    pub oracle_cap: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            network: NetworkSource::Generate {
                n: 3,
                m: 7,
                price_min: 1.0,
                price_max: 10.0,
                seed: 0,
            },
            critical_fraction: 0.8,
            failure_fraction: 0.3,
            bits: 5,
            r: Some(3),
            perturbation: Perturbation::Random { count: 2, seed: 0 },
            solver: SolverChoice::default(),
            quadratize: QuadratizeConfig::default(),
            seed: 0,
            oracle_cap: 1 << 20,
        }
    }
}

impl PipelineConfig {
    /// All problems with the configuration, not just the first.
    pub fn problems(&self) -> Vec<String> {
        let mut p = Vec::new();
        for (name, f) in [("critical_fraction", self.critical_fraction), ("failure_fraction", self.failure_fraction)] {
            if !(0.0..=1.0).contains(&f) {
                p.push(format!("{name} must lie in [0, 1], got {f}"));
            }
        }
        if self.bits == 0 || self.bits > 31 {
            p.push(format!("bits must be in 1..=31, got {}", self.bits));
        }
        if let Some(r) = self.r {
            if r == 0 || r % 2 == 0 {
                p.push(format!("r must be odd and positive, got {r}"));
            }
        }
        if let NetworkSource::Generate { n, m, price_min, price_max, .. } = &self.network {
            if *n == 0 || *m == 0 {
                p.push("generated networks need n ≥ 1 and m ≥ 1".into());
            }
            if !(0.0 <= *price_min && price_min <= price_max) {
                p.push(format!("need 0 ≤ price_min ≤ price_max, got [{price_min}, {price_max}]"));
            }
        }
        p.extend(self.solver.problems());
        p
    }

    pub fn check(&self) -> Result<()> {
        match self.problems() {
            v if v.is_empty() => Ok(()),
            v => Err(Error::Parameter(v.join("; "))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NetworkSection {
    pub n: usize,
    pub m: usize,
    pub zeroed_assets: BTreeSet<usize>,
    pub prices_before: Vec<f64>,
    pub prices_after: Vec<f64>,
    pub values_before: Vec<f64>,
    /// Linear equilibrium under the shocked prices, ignoring failures.
    pub values_price_only: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumSection {
    /// From the lowest-energy sample.
    pub values: Vec<f64>,
    pub objective: f64,
    /// Per-bit majority across reads, reported for comparison.
    pub majority_values: Vec<f64>,
    pub majority_objective: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleSection {
    pub evaluations: u64,
    pub best_objective: f64,
    pub minimizers: Vec<Vec<f64>>,
    /// Solver objective minus oracle objective.
    pub gap: f64,
    pub relative_gap: f64,
    pub solver_optimal: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub run: RunInfo,
    pub config: PipelineConfig,
    pub network: NetworkSection,
    pub failure_spec: FailureSpec,
    pub hubo_stats: HuboStats,
    pub reduction_stats: ReductionStats,
    pub solver_stats: SolverStats,
    pub equilibrium: EquilibriumSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
    pub crash_report: CrashReport,
}

fn stage<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.with_context(format!("stage {name}")))
}

fn zeroed_assets(p: &Perturbation, m: usize) -> Result<BTreeSet<usize>> {
    match p {
        Perturbation::Assets { zeroed } => Ok(zeroed.iter().copied().collect()),
        Perturbation::Random { count, seed } => {
            if *count > m {
                return Err(Error::Parameter(format!("cannot zero {count} of {m} assets")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            Ok(sample(&mut rng, m, *count).into_iter().collect())
        }
    }
}

/// Runs every stage, writing artifacts into `out_dir` as they are produced
/// so a failing stage leaves its predecessors' outputs behind.
pub fn run_pipeline(
    config: &PipelineConfig,
    out_dir: &Path,
    endpoint: Option<&str>,
    normalize: bool,
) -> Result<PipelineReport> {
    let start = Instant::now();
    config.check()?;
    std::fs::create_dir_all(out_dir)?;

    let net = stage("network", load_or_generate(&config.network))?;
    let n = net.n_institutions();
    let pre = stage("linear equilibrium", linear_equilibrium(&net))?;
    let fail = stage(
        "failure spec",
        failure_spec_from_state(&pre, config.critical_fraction, config.failure_fraction),
    )?;
    write_text(&out_dir.join("network.json"), &network_to_string(&net, Some(&fail)))?;

    let zeroed = stage("perturbation", zeroed_assets(&config.perturbation, net.n_assets()))?;
    let post = stage("perturbation", perturb_prices(&net, &zeroed))?;
    write_text(&out_dir.join("network_perturbed.json"), &network_to_string(&post, Some(&fail)))?;
    let price_only = stage("linear equilibrium", linear_equilibrium(&post))?;

    let spec = stage("hubo", BitSpec::integer(config.bits))?;
    let hubo_fail = config.r.map(|_| &fail);
    let (bp, hubo_stats) = stage("hubo", build_hubo(&post, hubo_fail, &spec, config.r))?;
    write_text(&out_dir.join("hubo.txt"), &hubo_text(&bp.dump(), bp.num_vars()))?;

    let (q, reduction_stats) = stage("reduce", quadratize(&boolean_to_spin(&bp), &config.quadratize))?;
    write_text(&out_dir.join("problem.qubo"), &stage("reduce", render_qubo(&q))?)?;

    let (set, solver_stats) = stage("solve", run_solver(&q, &config.solver, config.seed, endpoint))?;
    write_text(&out_dir.join("samples.json"), &numfmt::to_json_string(&set))?;

    let eval = |v: &[f64]| -> Result<f64> {
        match config.r {
            Some(r) => smoothed_objective(&post, &fail, &ThetaPolynomial::new(r)?, spec.v_max(), v),
            None => objective(&post, &FailureSpec::inert(n), v),
        }
    };
    let decode = |x: &[bool]| decode_values(&spec, n, x);
    let values = stage("decode", decode(&set.best_sample().assignment))?;
    let logical: Vec<usize> = (0..q.logical_count).collect();
    let majority_values = stage("decode", majority_vote(&set, &logical).and_then(|x| decode(&x)))?;
    let equilibrium = EquilibriumSection {
        objective: stage("decode", eval(&values))?,
        majority_objective: stage("decode", eval(&majority_values))?,
        values,
        majority_values,
    };

    let grid = (n as u64).checked_mul(config.bits as u64).filter(|&b| b < 64).map(|b| 1u64 << b);
    let oracle = match grid {
        Some(g) if g <= config.oracle_cap.min(DEFAULT_GRID_CAP) => {
            let (oracle_fail, kind) = match config.r {
                Some(r) => (fail.clone(), ObjectiveKind::Smoothed(r)),
                None => (FailureSpec::inert(n), ObjectiveKind::Exact),
            };
            let res = stage("oracle", exhaustive_equilibrium_capped(&post, &oracle_fail, config.bits, kind, g))?;
            let best = res.best_objective();
            let gap = equilibrium.objective - best;
            Some(OracleSection {
                evaluations: res.evaluations,
                best_objective: best,
                minimizers: res.minimizers.iter().map(|m| m.values.clone()).collect(),
                gap,
                relative_gap: gap / best.abs().max(f64::MIN_POSITIVE),
                solver_optimal: gap <= tie_tolerance(best),
            })
        }
        _ => None,
    };

    let crash = stage(
        "crash report",
        crash_report(&pre.market_values, &equilibrium.values, Some(&price_only.market_values), &fail),
    )?;
    let network = NetworkSection {
        n,
        m: net.n_assets(),
        zeroed_assets: zeroed,
        prices_before: net.prices.iter().copied().collect(),
        prices_after: post.prices.iter().copied().collect(),
        values_before: pre.market_values.clone(),
        values_price_only: price_only.market_values.clone(),
    };
    write_text(&out_dir.join("values.csv"), &values_csv(&network, &equilibrium, &fail, &crash))?;

    let report = PipelineReport {
        run: RunInfo::new("pipeline", Some(config.seed), config, normalize, start),
        config: config.clone(),
        network,
        failure_spec: fail,
        hubo_stats,
        reduction_stats,
        solver_stats,
        equilibrium,
        oracle,
        crash_report: crash,
    };
    write_text(&out_dir.join("report.json"), &numfmt::to_json_string(&report))?;
    Ok(report)
}

fn load_or_generate(src: &NetworkSource) -> Result<FinancialNetwork> {
    match src {
        NetworkSource::File { path } => Ok(load_network(path)?.0),
        NetworkSource::Generate { n, m, price_min, price_max, seed } => {
            generate_random_network(*n, *m, *price_min, *price_max, *seed)
        }
    }
}

/// HUBO dump with a variable-count header line.
pub(crate) fn hubo_text(dump: &str, vars: usize) -> String {
    format!("# vars {vars}\n{dump}")
}

/// Per-institution table for plotting.
fn values_csv(net: &NetworkSection, eq: &EquilibriumSection, fail: &FailureSpec, crash: &CrashReport) -> String {
    let mut s = String::from("institution,value_before,value_price_only,value_after,value_majority,critical_value,drop,relative_drop,failed\n");
    for i in 0..net.n {
        let _ = writeln!(
            s,
            "{i},{},{},{},{},{},{},{},{}",
            numfmt::g17(net.values_before[i]),
            numfmt::g17(net.values_price_only[i]),
            numfmt::g17(eq.values[i]),
            numfmt::g17(eq.majority_values[i]),
            numfmt::g17(fail.critical_values[i]),
            numfmt::g17(crash.drops[i]),
            numfmt::g17(crash.relative_drops[i]),
            crash.failed.contains(&i) as u8
        );
    }
    s
}
