use std::time::Instant;

use serde::Serialize;

use super::state::{gray_scan, Couplings, FlipState, QuboState};
use super::{SampleSet, SampleSource, SolverMetadata};
use crate::error::{Error, Result};
use crate::qubo::Qubo;

pub const MAX_EXHAUSTIVE_SIZE: usize = 25;

/// Cap on minimizers kept when many assignments tie.
const MAX_KEPT: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergySummary {
    pub evaluated: u64,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Number of assignments within tolerance of the minimum.
    pub minimizers: u64,
    /// Counts over ten equal-width energy bins from `min` to `max`.
    pub histogram: Vec<u64>,
}

fn tie_tol(e: f64) -> f64 {
    1e-9 * e.abs().max(1.0)
}

/// Evaluates every assignment and returns all global minimizers.
pub fn exhaustive_solve(q: &Qubo) -> Result<SampleSet> {
    let start = Instant::now();
    if q.size > MAX_EXHAUSTIVE_SIZE {
        return Err(Error::Resource(format!(
            "exhaustive search over {} variables exceeds the limit of {MAX_EXHAUSTIVE_SIZE}",
            q.size
        )));
    }
    q.check()?;
    let c = Couplings::new(q);
    let decode = |code: u64| -> Vec<bool> { (0..q.size).map(|b| code >> b & 1 == 1).collect() };

    // first pass: range and mean
    let (mut lo, mut hi, mut sum, mut count) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0u64);
    gray_scan(&mut QuboState::new(&c, vec![false; q.size]), |st, _| {
        let e = st.energy();
        lo = lo.min(e);
        hi = hi.max(e);
        sum += e;
        count += 1;
    });

    // second pass: histogram and near-minimal candidates, re-evaluated exactly
    // since the scan accumulates rounding
    let slack = 1e-7 * q.max_abs_coefficient().max(1.0) * (q.size.max(1) as f64);
    let mut histogram = vec![0u64; 10];
    let width = (hi - lo) / 10.0;
    let mut candidates: Vec<(Vec<bool>, f64)> = Vec::new();
    let mut near = 0u64;
    gray_scan(&mut QuboState::new(&c, vec![false; q.size]), |st, code| {
        let e = st.energy();
        let b = if width > 0.0 { (((e - lo) / width) as usize).min(9) } else { 0 };
        histogram[b] += 1;
        if e <= lo + slack {
            near += 1;
            if candidates.len() < MAX_KEPT {
                let x = decode(code);
                let v = q.energy(&x);
                candidates.push((x, v));
            }
        }
    });
    let min = candidates.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let mut minimizers: Vec<Vec<bool>> = candidates
        .iter()
        .filter(|c| c.1 <= min + tie_tol(min))
        .map(|c| c.0.clone())
        .collect();
    // beyond the cap the count comes from the scan energies
    let total_minimizers = if near as usize > candidates.len() { near } else { minimizers.len() as u64 };
    minimizers.sort();
    let (max, mean) = (hi.max(min), sum / count as f64);
    let summary = EnergySummary {
        evaluated: count,
        min,
        max,
        mean,
        minimizers: total_minimizers,
        histogram,
    };
    let metadata = SolverMetadata {
        solver: "exhaustive".into(),
        seed: None,
        iterations: vec![summary.evaluated],
        wall_time: start.elapsed(),
        energy_summary: Some(summary),
    };
    SampleSet::from_reads(q, minimizers.into_iter().map(|x| (x, 1)), SampleSource::Exhaustive, metadata)
}
