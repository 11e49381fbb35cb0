use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::state::{greedy_descent, improvement_tol, Couplings, FlipState, QuboState};
use super::{read_rng, SampleSet, SampleSource, SolverMetadata};
use crate::error::{param, Result};
use crate::qubo::Qubo;

pub const DEFAULT_SWEEPS: usize = 1000;

/// Geometric temperature schedule for single-flip Metropolis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnealSchedule {
    pub initial_temperature: f64,
    pub final_temperature: f64,
    pub sweeps: usize,
    pub reads: usize,
}

impl AnnealSchedule {
    pub fn new(initial_temperature: f64, final_temperature: f64, sweeps: usize, reads: usize) -> Result<Self> {
        let s = Self {
            initial_temperature,
            final_temperature,
            sweeps,
            reads,
        };
        s.check()?;
        Ok(s)
    }

    /// From the largest coefficient magnitude down to a thousandth of it.
    pub fn for_qubo(q: &Qubo, sweeps: usize, reads: usize) -> Self {
        let t0 = match q.max_abs_coefficient() {
            m if m > 0.0 => m,
            _ => 1.0,
        };
        Self {
            initial_temperature: t0,
            final_temperature: 1e-3 * t0,
            sweeps,
            reads,
        }
    }

    pub fn check(&self) -> Result<()> {
        let ok = self.final_temperature > 0.0
            && self.initial_temperature >= self.final_temperature
            && self.initial_temperature.is_finite()
            && self.sweeps >= 1
            && self.reads >= 1;
        if ok {
            Ok(())
        } else {
            Err(param(format!(
                "invalid schedule: need initial ≥ final > 0, sweeps ≥ 1, reads ≥ 1 (got {self:?})"
            )))
        }
    }

    pub fn temperature(&self, sweep: usize) -> f64 {
        if self.sweeps == 1 {
            return self.final_temperature;
        }
        let t = sweep as f64 / (self.sweeps - 1) as f64;
        self.initial_temperature * (self.final_temperature / self.initial_temperature).powf(t)
    }
}

/// Metropolis sweeps followed by a greedy quench.
pub(crate) fn anneal_state<S: FlipState, R: Rng>(s: &mut S, sched: &AnnealSchedule, tol: f64, rng: &mut R) {
    for sweep in 0..sched.sweeps {
        let t = sched.temperature(sweep);
        for i in 0..s.len() {
            let d = s.delta(i);
            if d <= 0.0 || rng.gen::<f64>() < (-d / t).exp() {
                s.flip(i);
            }
        }
    }
    greedy_descent(s, tol);
}

pub fn simulated_annealing(q: &Qubo, schedule: &AnnealSchedule, seed: u64) -> Result<SampleSet> {
    let start = Instant::now();
    schedule.check()?;
    q.check()?;
    let c = Couplings::new(q);
    let tol = improvement_tol(q);
    let reads: Vec<Vec<bool>> = (0..schedule.reads)
        .into_par_iter()
        .map(|k| {
            let mut rng = read_rng(seed, k);
            let x0 = (0..q.size).map(|_| rng.gen()).collect();
            let mut s = QuboState::new(&c, x0);
            anneal_state(&mut s, schedule, tol, &mut rng);
            s.assignment().to_vec()
        })
        .collect();
    let metadata = SolverMetadata {
        solver: "simulated_annealing".into(),
        seed: Some(seed),
        iterations: vec![schedule.sweeps as u64; schedule.reads],
        wall_time: start.elapsed(),
        energy_summary: None,
    };
    SampleSet::from_reads(q, reads.into_iter().map(|x| (x, 1)), SampleSource::Annealing, metadata)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_variable_instance() {
        let mut q = Qubo::new(2);
        q.linear = vec![1.0, 1.0];
        q.add(0, 1, -2.0);
        let s = simulated_annealing(&q, &AnnealSchedule::for_qubo(&q, 100, 10), 3).unwrap();
        assert_eq!(s.best_energy(), 0.0);
        assert_eq!(s.total_reads(), 10);
    }

    #[test]
    fn schedule_endpoints() {
        let s = AnnealSchedule::new(10.0, 0.01, 5, 1).unwrap();
        assert!((s.temperature(0) - 10.0).abs() < 1e-12);
        assert!((s.temperature(4) - 0.01).abs() < 1e-12);
        assert!(AnnealSchedule::new(1.0, 2.0, 5, 1).is_err());
        assert!(AnnealSchedule::new(1.0, 0.5, 0, 1).is_err());
    }

    #[test]
    fn zero_temperature_limit_is_greedy() {
        let mut q = Qubo::new(6);
        q.linear = vec![1.0, -1.0, 0.5, -0.5, 2.0, -2.0];
        q.add(0, 1, 1.5);
        q.add(2, 3, -1.0);
        q.add(4, 5, 3.0);
        let sched = AnnealSchedule::new(1e-300, 1e-300, 1, 16).unwrap();
        let s = simulated_annealing(&q, &sched, 11).unwrap();
        for smp in &s.samples {
            for i in 0..6 {
                let mut y = smp.assignment.clone();
                y[i] = !y[i];
                assert!(q.energy(&y) >= smp.energy - 1e-12, "not a local minimum");
            }
        }
    }
}
