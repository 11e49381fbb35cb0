use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{SampleSet, SampleSource, SolverMetadata};
use crate::error::{Error, Result};
use crate::qubo::Qubo;

pub const SAMPLE_PATH: &str = "/v1/sample";
/// Largest accepted gap between a returned and a recomputed energy.
pub const ENERGY_CHECK_TOL: f64 = 1e-6;

/// Problem sent to a sampler. The offset stays local.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRequest {
    pub size: usize,
    pub linear: Vec<f64>,
    pub quadratic: Vec<(u32, u32, f64)>,
    pub reads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleResponse {
    pub samples: Vec<Vec<u8>>,
    /// Energies without the offset.
    pub energies: Vec<f64>,
    pub occurrences: Vec<u64>,
}

impl SampleRequest {
    pub fn from_qubo(q: &Qubo, reads: usize) -> Self {
        Self {
            size: q.size,
            linear: q.linear.clone(),
            quadratic: q.quadratic.iter().map(|(&(i, j), &v)| (i, j, v)).collect(),
            reads,
        }
    }

    /// The problem as a QUBO with zero offset.
    pub fn to_qubo(&self) -> Result<Qubo> {
        let mut q = Qubo::new(self.size);
        if self.linear.len() != self.size {
            return Err(Error::Parameter(format!("linear has {} entries for size {}", self.linear.len(), self.size)));
        }
        q.linear = self.linear.clone();
        for &(i, j, v) in &self.quadratic {
            if i >= j || j as usize >= self.size {
                return Err(Error::Parameter(format!("invalid coupler ({i}, {j})")));
            }
            q.add(i, j, v);
        }
        q.check()?;
        Ok(q)
    }
}

/// Server side: builds the problem, runs `solve`, and packages its samples.
pub fn handle_sample_request(
    req: &SampleRequest,
    solve: impl FnOnce(&Qubo, usize) -> Result<SampleSet>,
) -> Result<SampleResponse> {
    let q = req.to_qubo()?;
    let set = solve(&q, req.reads)?;
    Ok(SampleResponse {
        samples: set.samples.iter().map(|s| s.assignment.iter().map(|&b| b as u8).collect()).collect(),
        energies: set.samples.iter().map(|s| s.energy).collect(),
        occurrences: set.samples.iter().map(|s| s.occurrences).collect(),
    })
}

/// HTTP client for a sampler at `endpoint`. Safe to share across threads.
#[derive(Debug, Clone)]
pub struct RemoteSampler {
    pub endpoint: String,
    pub retries: u32,
    agent: ureq::Agent,
}

impl RemoteSampler {
    pub fn new(endpoint: impl Into<String>, timeout: Duration, retries: u32) -> Self {
        Self {
            endpoint: endpoint.into().trim_end_matches('/').to_string(),
            retries,
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
        }
    }

    fn post(&self, req: &SampleRequest) -> Result<SampleResponse> {
        let url = format!("{}{SAMPLE_PATH}", self.endpoint);
        let mut last = String::new();
        for _ in 0..=self.retries {
            match self.agent.post(&url).send_json(req) {
                Ok(resp) => {
                    return resp
                        .into_json::<SampleResponse>()
                        .map_err(|e| Error::Remote(format!("malformed response from {url}: {e}")))
                }
                Err(ureq::Error::Status(code, r)) => {
                    let body = r.into_string().unwrap_or_default();
                    return Err(Error::Remote(format!("{url} answered {code}: {}", body.trim())));
                }
                Err(e) => last = e.to_string(),
            }
        }
        Err(Error::Remote(format!("transport failure for {url}: {last}")))
    }
}

/// Samples `q` remotely and checks every returned energy against a local
/// recomputation.
pub fn remote_sample(sampler: &RemoteSampler, q: &Qubo, reads: usize) -> Result<SampleSet> {
    let start = Instant::now();
    q.check()?;
    let resp = sampler.post(&SampleRequest::from_qubo(q, reads))?;
    let n = resp.samples.len();
    if n == 0 || resp.energies.len() != n || resp.occurrences.len() != n {
        return Err(Error::Remote(format!(
            "malformed response: {n} samples, {} energies, {} occurrence counts",
            resp.energies.len(),
            resp.occurrences.len()
        )));
    }
    let mut out = Vec::with_capacity(n);
    for (k, bits) in resp.samples.iter().enumerate() {
        if bits.len() != q.size || bits.iter().any(|&b| b > 1) {
            return Err(Error::Remote(format!("sample {k} is not a bit vector of length {}", q.size)));
        }
        let x: Vec<bool> = bits.iter().map(|&b| b == 1).collect();
        let local = q.energy(&x);
        let claimed = resp.energies[k] + q.offset;
        if !((local - claimed).abs() <= ENERGY_CHECK_TOL * local.abs().max(1.0)) {
            return Err(Error::Remote(format!(
                "sample {k}: returned energy {claimed} but recomputed {local} (data corruption)"
            )));
        }
        out.push((x, resp.occurrences[k]));
    }
    let metadata = SolverMetadata {
        solver: "remote".into(),
        seed: None,
        iterations: vec![reads as u64],
        wall_time: start.elapsed(),
        energy_summary: None,
    };
    SampleSet::from_reads(q, out, SampleSource::Remote, metadata)
}
