use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::state::{improvement_tol, Couplings, FlipState, QuboState};
use super::{read_rng, SampleSet, SampleSource, SolverMetadata};
use crate::error::{param, Result};
use crate::qubo::Qubo;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TabuParams {
    /// Iterations a flipped variable stays tabu.
    pub tenure: usize,
    /// Non-improving moves allowed before stopping.
    pub max_no_improve: usize,
    pub reads: usize,
}

impl TabuParams {
    pub fn for_size(n: usize) -> Self {
        Self {
            tenure: (n / 4).clamp(1, 20),
            max_no_improve: (20 * n).clamp(100, 20_000),
            reads: 1,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.tenure == 0 || self.reads == 0 {
            return Err(param("tabu tenure and reads must be at least 1"));
        }
        Ok(())
    }
}

/// Steepest-descent tabu search with aspiration. Leaves `s` at the best
/// configuration found and returns the number of moves made.
pub(crate) fn tabu_search<S: FlipState>(s: &mut S, p: &TabuParams, tol: f64) -> u64 {
    let n = s.len();
    if n == 0 {
        return 0;
    }
    let tenure = p.tenure.min(n - 1).max(1);
    let mut tabu_until = vec![0u64; n];
    let mut best_e = s.energy();
    let mut best_x = s.snapshot();
    let mut stall = 0usize;
    let mut it = 0u64;
    loop {
        it += 1;
        let e = s.energy();
        let mut pick: Option<(usize, f64)> = None;
        for i in 0..n {
            let d = s.delta(i);
            let allowed = tabu_until[i] < it || e + d < best_e - tol;
            if allowed && pick.is_none_or(|(_, bd)| d < bd) {
                pick = Some((i, d));
            }
        }
        let Some((i, d)) = pick else { break };
        let improves = e + d < best_e - tol;
        if !improves {
            if stall >= p.max_no_improve {
                break;
            }
            stall += 1;
        }
        s.flip(i);
        tabu_until[i] = it + tenure as u64;
        if improves {
            best_e = s.energy();
            best_x = s.snapshot();
            stall = 0;
        }
    }
    s.restore(&best_x);
    it - 1
}

pub fn tabu_solve(q: &Qubo, params: &TabuParams, seed: u64) -> Result<SampleSet> {
    let start = Instant::now();
    params.check()?;
    q.check()?;
    let c = Couplings::new(q);
    let tol = improvement_tol(q);
    let runs: Vec<(Vec<bool>, u64)> = (0..params.reads)
        .into_par_iter()
        .map(|k| {
            let mut rng = read_rng(seed, k);
            let x0 = (0..q.size).map(|_| rng.gen()).collect();
            let mut s = QuboState::new(&c, x0);
            let moves = tabu_search(&mut s, params, tol);
            (s.assignment().to_vec(), moves)
        })
        .collect();
    let metadata = SolverMetadata {
        solver: "tabu".into(),
        seed: Some(seed),
        iterations: runs.iter().map(|r| r.1).collect(),
        wall_time: start.elapsed(),
        energy_summary: None,
    };
    SampleSet::from_reads(q, runs.into_iter().map(|r| (r.0, 1)), SampleSource::Tabu, metadata)
}
