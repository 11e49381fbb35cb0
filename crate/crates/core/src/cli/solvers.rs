use std::time::Duration;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::Qubo;
use crate::solver::{
    decompose_solve, exhaustive_solve, remote_sample, simulated_annealing, tabu_solve, AncillaHandling, AnnealSchedule,
    DecomposeParams, RemoteSampler, SampleSet, SubSolver, TabuParams, DEFAULT_READS, DEFAULT_SUBPROBLEM_SIZE,
    DEFAULT_SWEEPS,
};

pub const ENDPOINT_ENV: &str = "CRASHNET_SAMPLER_URL";
const REMOTE_TIMEOUT: Duration = Duration::from_secs(60);
const REMOTE_RETRIES: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Decompose,
    Tabu,
    Anneal,
    Exhaustive,
    Remote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SubSolverKind {
    Tabu,
    Anneal,
    Exhaustive,
    Remote,
}

/// Solver selection with every tunable, as stored in configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverChoice {
    pub solver: SolverKind,
    pub reads: usize,
    pub sweeps: usize,
    pub tenure: Option<usize>,
    pub max_no_improve: Option<usize>,
    pub subproblem_size: usize,
    pub max_iterations: usize,
    pub subsolver: SubSolverKind,
    pub ancillas: AncillaHandling,
}

impl Default for SolverChoice {
    fn default() -> Self {
        Self {
            solver: SolverKind::Decompose,
            reads: DEFAULT_READS,
            sweeps: DEFAULT_SWEEPS,
            tenure: None,
            max_no_improve: None,
            subproblem_size: DEFAULT_SUBPROBLEM_SIZE,
            max_iterations: 1000,
            subsolver: SubSolverKind::Tabu,
            ancillas: AncillaHandling::Auto,
        }
    }
}

impl SolverChoice {
    pub fn problems(&self) -> Vec<String> {
        let mut p = Vec::new();
        if self.reads == 0 {
            p.push("reads must be at least 1".into());
        }
        if self.sweeps == 0 {
            p.push("sweeps must be at least 1".into());
        }
        if self.tenure == Some(0) {
            p.push("tenure must be at least 1".into());
        }
        if self.subproblem_size < 2 {
            p.push(format!("subproblem size must be at least 2, got {}", self.subproblem_size));
        }
        if self.max_iterations == 0 {
            p.push("max_iterations must be at least 1".into());
        }
        p
    }

    fn tabu(&self, n: usize) -> TabuParams {
        let base = TabuParams::for_size(n);
        TabuParams {
            tenure: self.tenure.unwrap_or(base.tenure),
            max_no_improve: self.max_no_improve.unwrap_or(base.max_no_improve),
            reads: self.reads,
        }
    }
}

/// What the report records about the solve.
#[derive(Debug, Clone, Serialize)]
pub struct SolverStats {
    pub solver: String,
    pub seed: Option<u64>,
    pub reads: u64,
    pub distinct_samples: usize,
    pub best_energy: f64,
    pub iterations: Vec<u64>,
}

impl SolverStats {
    pub fn of(set: &SampleSet) -> Self {
        Self {
            solver: set.metadata.solver.clone(),
            seed: set.metadata.seed,
            reads: set.total_reads(),
            distinct_samples: set.samples.len(),
            best_energy: set.best_energy(),
            iterations: set.metadata.iterations.clone(),
        }
    }
}

fn sampler(endpoint: Option<&str>) -> Result<RemoteSampler> {
    let url = endpoint.ok_or_else(|| {
        Error::Parameter(format!("remote solving needs an endpoint (--endpoint or {ENDPOINT_ENV})"))
    })?;
    Ok(RemoteSampler::new(url, REMOTE_TIMEOUT, REMOTE_RETRIES))
}

/// Dispatches to the selected solver and checks the stored energies.
pub fn run_solver(q: &Qubo, c: &SolverChoice, seed: u64, endpoint: Option<&str>) -> Result<(SampleSet, SolverStats)> {
    let set = match c.solver {
        SolverKind::Exhaustive => exhaustive_solve(q)?,
        SolverKind::Anneal => simulated_annealing(q, &AnnealSchedule::for_qubo(q, c.sweeps, c.reads), seed)?,
        SolverKind::Tabu => tabu_solve(q, &c.tabu(q.size), seed)?,
        SolverKind::Remote => remote_sample(&sampler(endpoint)?, q, c.reads)?,
        SolverKind::Decompose => {
            let subsolver = match c.subsolver {
                SubSolverKind::Tabu if c.tenure.is_none() && c.max_no_improve.is_none() => SubSolver::Tabu(None),
                SubSolverKind::Tabu => SubSolver::Tabu(Some(TabuParams {
                    reads: 1,
                    ..c.tabu(c.subproblem_size)
                })),
                SubSolverKind::Anneal => SubSolver::Annealing { sweeps: c.sweeps },
                SubSolverKind::Exhaustive => SubSolver::Exhaustive,
                SubSolverKind::Remote => SubSolver::Remote {
                    sampler: sampler(endpoint)?,
                    reads: 1,
                },
            };
            let params = DecomposeParams {
                subproblem_size: c.subproblem_size,
                subsolver,
                max_iterations: c.max_iterations,
                reads: c.reads,
                ancillas: c.ancillas,
            };
            decompose_solve(q, &params, seed)?
        }
    };
    set.verify(q)?;
    let stats = SolverStats::of(&set);
    Ok((set, stats))
}
