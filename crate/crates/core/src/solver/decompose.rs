use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::anneal::{anneal_state, AnnealSchedule};
use super::remote::{remote_sample, RemoteSampler};
use super::state::{
    gray_scan, greedy_descent, improvement_tol, Couplings, Eliminated, EliminatedState, FlipState, QuboState,
    Restricted,
};
use super::tabu::{tabu_search, TabuParams};
use super::{read_rng, SampleSet, SampleSource, SolverMetadata};
use crate::error::{param, Error, Result};
use crate::qubo::Qubo;

pub const DEFAULT_READS: usize = 20;
pub const DEFAULT_SUBPROBLEM_SIZE: usize = 50;
const DEFAULT_MAX_ITERATIONS: usize = 1000;
/// Fraction of the impact ranking perturbed by random swaps.
const SWAP_FRACTION: f64 = 0.1;
/// Largest subproblem the exhaustive subsolver accepts.
const MAX_EXHAUSTIVE_SUB: usize = 20;
/// Random restarts of the tabu subsolver when its warm start stalls.
const TABU_RESTARTS: usize = 3;

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SubSolver {
    /// Tabu search warm-started from the incumbent; `None` sizes the
    /// parameters from each subproblem.
    Tabu(Option<TabuParams>),
    Annealing { sweeps: usize },
    Exhaustive,
    Remote {
        #[serde(skip)]
        sampler: RemoteSampler,
        reads: usize,
    },
}

/// How ancillas recorded in the QUBO's registry are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum AncillaHandling {
    /// Ancillas are ordinary variables.
    Explicit,
    /// Subproblems range over logical variables only and every ancilla sits
    /// at its conditional optimum. Needs ancillas that share no coupler.
    Eliminate,
    /// `Eliminate` when the QUBO has eligible ancillas and the subsolver is
    /// local, `Explicit` otherwise.
    #[default]
    Auto,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecomposeParams {
    pub subproblem_size: usize,
    pub subsolver: SubSolver,
    pub max_iterations: usize,
    pub reads: usize,
    pub ancillas: AncillaHandling,
}

impl Default for DecomposeParams {
    fn default() -> Self {
        Self {
            subproblem_size: DEFAULT_SUBPROBLEM_SIZE,
            subsolver: SubSolver::Tabu(None),
            max_iterations: DEFAULT_MAX_ITERATIONS,
            reads: DEFAULT_READS,
            ancillas: AncillaHandling::Auto,
        }
    }
}

impl DecomposeParams {
    fn check(&self) -> Result<()> {
        if self.subproblem_size < 2 {
            return Err(param("subproblem size must be at least 2"));
        }
        if self.reads == 0 || self.max_iterations == 0 {
            return Err(param("reads and max_iterations must be at least 1"));
        }
        match &self.subsolver {
            SubSolver::Tabu(Some(p)) => p.check(),
            SubSolver::Annealing { sweeps: 0 } => Err(param("annealing subsolver needs at least one sweep")),
            SubSolver::Exhaustive if self.subproblem_size > MAX_EXHAUSTIVE_SUB => Err(param(format!(
                "exhaustive subsolver is limited to subproblems of {MAX_EXHAUSTIVE_SUB}"
            ))),
            SubSolver::Remote { reads: 0, .. } => Err(param("remote subsolver needs at least one read")),
            _ => Ok(()),
        }
    }
}

/// Splits the problem into impact-ranked subproblems, solves each with the
/// subsolver while the rest stays clamped, and keeps strict improvements.
pub fn decompose_solve(q: &Qubo, params: &DecomposeParams, seed: u64) -> Result<SampleSet> {
    let start = Instant::now();
    params.check()?;
    q.check()?;
    let tol = improvement_tol(q);
    let remote = matches!(params.subsolver, SubSolver::Remote { .. });
    let eligible = q.ancilla_count() > 0 && !remote;
    let elim = match params.ancillas {
        AncillaHandling::Explicit => None,
        AncillaHandling::Auto if !eligible => None,
        AncillaHandling::Eliminate if remote => {
            return Err(param("ancilla elimination needs a local subsolver"));
        }
        _ => Some(Eliminated::new(q).ok_or_else(|| param("ancilla elimination needs ancillas that share no coupler"))?),
    };
    let couplings = Couplings::new(q);

    let runs: Vec<(Vec<bool>, u64)> = (0..params.reads)
        .into_par_iter()
        .map(|k| {
            let mut rng = read_rng(seed, k);
            match &elim {
                Some(e) => {
                    let x0 = (0..q.logical_count).map(|_| rng.gen()).collect();
                    let mut s = EliminatedState::new(e, x0);
                    let it = run_read(&mut s, params, tol, &mut rng, |s, vars, rng| {
                        solve_in_place(&mut Restricted { inner: s, vars }, &params.subsolver, tol, rng)
                    })?;
                    Ok((s.full_assignment(), it))
                }
                None => {
                    let x0 = (0..q.size).map(|_| rng.gen()).collect();
                    let mut s = QuboState::new(&couplings, x0);
                    let it = run_read(&mut s, params, tol, &mut rng, |s, vars, rng| {
                        let sub = q.clamp(vars, s.assignment());
                        let y = solve_sub_qubo(&sub, s, vars, &params.subsolver, tol, rng)?;
                        for (p, &v) in vars.iter().enumerate() {
                            if s.value(v) != y[p] {
                                s.flip(v);
                            }
                        }
                        Ok(())
                    })?;
                    Ok((s.assignment().to_vec(), it))
                }
            }
        })
        .collect::<Result<_>>()?;

    let metadata = SolverMetadata {
        solver: "decompose".into(),
        seed: Some(seed),
        iterations: runs.iter().map(|r| r.1).collect(),
        wall_time: start.elapsed(),
        energy_summary: None,
    };
    SampleSet::from_reads(q, runs.into_iter().map(|r| (r.0, 1)), SampleSource::Decomposition, metadata)
}

/// One read: greedy start, then passes over impact-ranked windows until a
/// pass brings no improvement or the iteration budget is spent.
fn run_read<S: FlipState>(
    s: &mut S,
    params: &DecomposeParams,
    tol: f64,
    rng: &mut ChaCha8Rng,
    mut solve: impl FnMut(&mut S, &[usize], &mut ChaCha8Rng) -> Result<()>,
) -> Result<u64> {
    greedy_descent(s, tol);
    let mut iterations = 0u64;
    loop {
        let order = ranked_variables(s, rng);
        let mut improved = false;
        for window in order.chunks(params.subproblem_size) {
            if iterations >= params.max_iterations as u64 {
                return Ok(iterations);
            }
            iterations += 1;
            let before = s.energy();
            let saved: Vec<bool> = window.iter().map(|&v| s.value(v)).collect();
            let mut vars = window.to_vec();
            vars.sort_unstable();
            solve(s, &vars, rng).map_err(|e| {
                e.with_context(format!("subproblem {iterations} ({} variables)", vars.len()))
            })?;
            if s.energy() < before - tol {
                improved = true;
                greedy_descent(s, tol);
            } else {
                for (&v, &b) in window.iter().zip(&saved) {
                    if s.value(v) != b {
                        s.flip(v);
                    }
                }
            }
            assert!(s.energy() <= before + tol, "incumbent energy increased");
        }
        if !improved {
            return Ok(iterations);
        }
    }
}

/// Variables by decreasing flip-energy magnitude, ties by index, with a
/// tenth of the positions randomly swapped.
fn ranked_variables<S: FlipState>(s: &S, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = s.len();
    let impact: Vec<f64> = (0..n).map(|i| s.delta(i).abs()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| impact[b].total_cmp(&impact[a]).then(a.cmp(&b)));
    if n > 1 {
        let swaps = (SWAP_FRACTION * n as f64).round() as usize;
        for _ in 0..swaps {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            order.swap(i, j);
        }
    }
    order
}

/// Runs a local subsolver directly on the restricted state; the state ends
/// at the subsolver's best configuration.
fn solve_in_place<S: FlipState>(s: &mut S, sub: &SubSolver, tol: f64, rng: &mut ChaCha8Rng) -> Result<()> {
    match sub {
        SubSolver::Tabu(p) => {
            let p = p.unwrap_or_else(|| TabuParams::for_size(s.len()));
            let start_e = s.energy();
            tabu_search(s, &p, tol);
            if s.energy() < start_e - tol {
                return Ok(());
            }
            // A warm start inside a deep basin can cycle; random restarts
            // within the window let the subsolver leave it.
            let mut best = (s.energy(), s.snapshot());
            for _ in 0..TABU_RESTARTS {
                for i in 0..s.len() {
                    if rng.gen::<bool>() {
                        s.flip(i);
                    }
                }
                tabu_search(s, &p, tol);
                if s.energy() < best.0 - tol {
                    best = (s.energy(), s.snapshot());
                }
            }
            s.restore(&best.1);
        }
        SubSolver::Annealing { sweeps } => {
            let start = s.snapshot();
            let start_e = s.energy();
            let t0 = (0..s.len()).map(|i| s.delta(i).abs()).fold(0.0, f64::max).max(tol);
            let sched = AnnealSchedule::new(t0, 1e-3 * t0, *sweeps, 1)?;
            for i in 0..s.len() {
                if rng.gen::<bool>() {
                    s.flip(i);
                }
            }
            anneal_state(s, &sched, tol, rng);
            if s.energy() > start_e {
                s.restore(&start);
            }
        }
        SubSolver::Exhaustive => {
            if s.len() > MAX_EXHAUSTIVE_SUB {
                return Err(Error::Resource(format!("exhaustive subproblem of {} variables", s.len())));
            }
            let mut best = (s.energy(), 0u64);
            gray_scan(s, |st, code| {
                if st.energy() < best.0 {
                    best = (st.energy(), code);
                }
            });
            // the scan ends at code 2^(n-1); move to the best code
            let n = s.len();
            let end = if n == 0 { 0 } else { 1u64 << (n - 1) };
            let diff = end ^ best.1;
            for i in 0..n {
                if diff >> i & 1 == 1 {
                    s.flip(i);
                }
            }
        }
        SubSolver::Remote { .. } => return Err(param("remote subsolver needs an explicit sub-QUBO")),
    }
    Ok(())
}

/// Solves the clamped sub-QUBO and returns its best assignment.
fn solve_sub_qubo(
    sub: &Qubo,
    full: &QuboState,
    vars: &[usize],
    solver: &SubSolver,
    tol: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<bool>> {
    if let SubSolver::Remote { sampler, reads } = solver {
        let set = remote_sample(sampler, sub, *reads)?;
        return Ok(set.best_sample().assignment.clone());
    }
    let c = Couplings::new(sub);
    let x0 = vars.iter().map(|&v| full.value(v)).collect();
    let mut s = QuboState::new(&c, x0);
    solve_in_place(&mut s, solver, tol, rng)?;
    Ok(s.assignment().to_vec())
}
