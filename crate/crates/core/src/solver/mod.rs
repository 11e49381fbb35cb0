//! QUBO minimization and multi-read sample handling.

mod anneal;
mod decompose;
mod exhaustive;
mod qubo_file;
mod remote;
pub(crate) mod state;
mod tabu;

use std::collections::BTreeMap;
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use crate::qubo::Qubo;
use crate::error::{param, Error, Result};
pub use anneal::{simulated_annealing, AnnealSchedule, DEFAULT_SWEEPS};
pub use decompose::{
    decompose_solve, AncillaHandling, DecomposeParams, SubSolver, DEFAULT_READS, DEFAULT_SUBPROBLEM_SIZE,
};
pub use exhaustive::{exhaustive_solve, EnergySummary, MAX_EXHAUSTIVE_SIZE};
pub use qubo_file::{parse_qubo, read_qubo_file, render_qubo, write_qubo_file};
pub use remote::{
    handle_sample_request, remote_sample, RemoteSampler, SampleRequest, SampleResponse, ENERGY_CHECK_TOL,
    SAMPLE_PATH,
};
pub use tabu::{tabu_solve, TabuParams};

/// Tolerance for the stored-energy integrity check.
pub const ENERGY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSource {
    Exhaustive,
    Annealing,
    Tabu,
    Decomposition,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    #[serde(serialize_with = "bits")]
    pub assignment: Vec<bool>,
    pub energy: f64,
    pub occurrences: u64,
    pub source: SampleSource,
}

fn bits<S: serde::Serializer>(x: &[bool], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(x.iter().map(|&b| b as u8))
}

/// Solver bookkeeping. Wall time is ignored by equality.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SolverMetadata {
    pub solver: String,
    pub seed: Option<u64>,
    /// Work done per read (sweeps, tabu moves or subproblem solves).
    pub iterations: Vec<u64>,
    #[serde(skip)]
    pub wall_time: Duration,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_summary: Option<EnergySummary>,
}

impl PartialEq for SolverMetadata {
    fn eq(&self, o: &Self) -> bool {
        self.solver == o.solver
            && self.seed == o.seed
            && self.iterations == o.iterations
            && self.energy_summary == o.energy_summary
    }
}

/// Distinct assignments sorted by energy, then lexicographically.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSet {
    pub samples: Vec<Sample>,
    pub best: usize,
    pub metadata: SolverMetadata,
}

impl SampleSet {
    /// Merges repeated assignments and computes every energy from `q`.
    pub fn from_reads(
        q: &Qubo,
        reads: impl IntoIterator<Item = (Vec<bool>, u64)>,
        source: SampleSource,
        metadata: SolverMetadata,
    ) -> Result<Self> {
        let mut counts: BTreeMap<Vec<bool>, u64> = BTreeMap::new();
        for (x, n) in reads {
            if x.len() != q.size {
                return Err(param(format!("assignment of length {} for a QUBO of size {}", x.len(), q.size)));
            }
            *counts.entry(x).or_insert(0) += n;
        }
        if counts.is_empty() {
            return Err(param("a sample set needs at least one read"));
        }
        let mut samples: Vec<Sample> = counts
            .into_iter()
            .map(|(assignment, occurrences)| Sample {
                energy: q.energy(&assignment),
                assignment,
                occurrences,
                source,
            })
            .collect();
        samples.sort_by(|a, b| a.energy.total_cmp(&b.energy).then_with(|| a.assignment.cmp(&b.assignment)));
        Ok(Self {
            samples,
            best: 0,
            metadata,
        })
    }

    pub fn best_sample(&self) -> &Sample {
        &self.samples[self.best]
    }

    pub fn best_energy(&self) -> f64 {
        self.samples[self.best].energy
    }

    pub fn total_reads(&self) -> u64 {
        self.samples.iter().map(|s| s.occurrences).sum()
    }

    /// Checks stored energies against `q` and the position of `best`.
    pub fn verify(&self, q: &Qubo) -> Result<()> {
        for (k, s) in self.samples.iter().enumerate() {
            let e = q.energy(&s.assignment);
            if (e - s.energy).abs() > ENERGY_TOL * e.abs().max(1.0) {
                return Err(Error::Numeric(format!("sample {k}: stored energy {} but recomputed {e}", s.energy)));
            }
        }
        let b = &self.samples[self.best];
        let better = self
            .samples
            .iter()
            .any(|s| (s.energy, &s.assignment) < (b.energy, &b.assignment));
        if better {
            return Err(param("best does not point at the lowest-energy sample"));
        }
        Ok(())
    }
}

/// Per-variable majority over `vars`, weighted by read counts. Exact ties go
/// to the value in the best sample.
pub fn majority_vote(set: &SampleSet, vars: &[usize]) -> Result<Vec<bool>> {
    if set.samples.is_empty() {
        return Err(param("majority vote over an empty sample set"));
    }
    let best = &set.best_sample().assignment;
    vars.iter()
        .map(|&v| {
            if v >= best.len() {
                return Err(param(format!("variable {v} out of range")));
            }
            let ones: u64 = set.samples.iter().filter(|s| s.assignment[v]).map(|s| s.occurrences).sum();
            let zeros = set.total_reads() - ones;
            Ok(match ones.cmp(&zeros) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Less => false,
                std::cmp::Ordering::Equal => best[v],
            })
        })
        .collect()
}

/// Independent stream for read `k` under `seed`.
pub(crate) fn read_rng(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(reads: &[(&[u8], u64)]) -> SampleSet {
        let q = Qubo::new(reads[0].0.len());
        let reads = reads.iter().map(|(x, n)| (x.iter().map(|&b| b == 1).collect(), *n));
        SampleSet::from_reads(&q, reads, SampleSource::Tabu, SolverMetadata::default()).unwrap()
    }

    #[test]
    fn majority_two_to_one() {
        let s = set(&[(&[0, 1], 1), (&[0, 1], 1), (&[1, 0], 1)]);
        assert_eq!(majority_vote(&s, &[0, 1]).unwrap(), vec![false, true]);
    }

    #[test]
    fn majority_single_sample() {
        let s = set(&[(&[1, 0, 1], 3)]);
        assert_eq!(majority_vote(&s, &[0, 1, 2]).unwrap(), vec![true, false, true]);
    }

    #[test]
    fn majority_tie_follows_best() {
        let mut q = Qubo::new(2);
        q.linear = vec![-1.0, 0.0];
        let reads = vec![(vec![true, false], 1), (vec![false, false], 1)];
        let s = SampleSet::from_reads(&q, reads, SampleSource::Tabu, SolverMetadata::default()).unwrap();
        assert_eq!(s.best_sample().assignment, vec![true, false]);
        assert_eq!(majority_vote(&s, &[0]).unwrap(), vec![true]);
    }

    #[test]
    fn duplicates_merge_and_sort() {
        let mut q = Qubo::new(2);
        q.linear = vec![1.0, -1.0];
        let reads = vec![(vec![true, false], 1), (vec![false, true], 2), (vec![true, false], 4)];
        let s = SampleSet::from_reads(&q, reads, SampleSource::Annealing, SolverMetadata::default()).unwrap();
        assert_eq!(s.samples.len(), 2);
        assert_eq!(s.samples[0].assignment, vec![false, true]);
        assert_eq!(s.samples[1].occurrences, 5);
        s.verify(&q).unwrap();
    }
}
