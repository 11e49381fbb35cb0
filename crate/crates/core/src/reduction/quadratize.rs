use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gadget::{reduce_3body_single_ancilla, reduce_kbody_term, Gadget, GadgetParams, DEFAULT_SCALE};
use super::spin::spin_to_boolean;
use crate::error::{param, Error, Result};
use crate::hubo::{SpinPolynomial, VarLabel};
use crate::qubo::{AncillaRecord, GadgetKind, Qubo};

/// How `J^a` and `q_0` are sized for each reduced term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleMode {
    /// From each term's own `|J_k|`.
    PerTerm { factor: f64 },
    /// From the largest `|J_k|` among terms of order ≥ 3.
    Global { factor: f64 },
}

impl Default for ScaleMode {
    fn default() -> Self {
        ScaleMode::PerTerm { factor: DEFAULT_SCALE }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GadgetStrategy {
    #[default]
    KAncilla,
    /// One-ancilla gadget for three-body terms, k-ancilla otherwise.
    SingleAncillaThreeBody,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QuadratizeConfig {
    pub scale: ScaleMode,
    pub strategy: GadgetStrategy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionStats {
    pub logical: usize,
    pub ancillas: usize,
    pub couplers: usize,
    pub reduced_terms: usize,
    /// Counts of reduced terms by order.
    pub reduced_by_order: Vec<usize>,
    pub single_ancilla_gadgets: usize,
    pub fallbacks: usize,
}

struct Plan {
    vars: Vec<u32>,
    jk: f64,
    first_ancilla: u32,
    kind: GadgetKind,
    fallback: bool,
}

/// Rewrites every term of order ≥ 3 with a certified gadget and returns the
/// boolean QUBO (`x = 1` ↔ `σ = +1`).
///
/// Gadget constants are moved into the offset, so minimizing the QUBO over
/// the ancillas reproduces the input polynomial's value at every logical
/// assignment. Ancillas are appended after the logical variables in
/// lexicographic order of their source terms.
pub fn quadratize(sp: &SpinPolynomial, config: &QuadratizeConfig) -> Result<(Qubo, ReductionStats)> {
    let logical = sp.num_vars();
    let high: Vec<(Vec<u32>, f64)> = sp
        .terms()
        .filter(|(k, _)| k.len() >= 3)
        .map(|(k, c)| (k.clone(), c))
        .collect();
    let global_mag = high.iter().map(|t| t.1.abs()).fold(0.0, f64::max);
    let params_for = |jk: f64| -> Result<GadgetParams> {
        match config.scale {
            ScaleMode::PerTerm { factor } if factor > 2.0 => Ok(GadgetParams::scaled(jk, factor)),
            ScaleMode::Global { factor } if factor > 2.0 => Ok(GadgetParams::from_magnitude(global_mag, factor)),
            _ => Err(param("gadget scale factor must exceed 2")),
        }
    };

    // serial index allocation keeps the output independent of scheduling
    let mut plans = Vec::with_capacity(high.len());
    let mut next = logical as u32;
    for (vars, jk) in &high {
        let (kind, fallback) = if config.strategy == GadgetStrategy::SingleAncillaThreeBody && vars.len() == 3 {
            match reduce_3body_single_ancilla(*jk) {
                Ok(_) => (GadgetKind::SingleAncilla, false),
                Err(Error::Gadget(_)) => (GadgetKind::KAncilla, true),
                Err(e) => return Err(e),
            }
        } else {
            (GadgetKind::KAncilla, false)
        };
        let count = match kind {
            GadgetKind::SingleAncilla => 1,
            GadgetKind::KAncilla => vars.len(),
        };
        plans.push(Plan {
            vars: vars.clone(),
            jk: *jk,
            first_ancilla: next,
            kind,
            fallback,
        });
        next += count as u32;
    }
    let size = next as usize;

    let gadgets: Vec<Gadget> = plans
        .par_iter()
        .map(|p| match p.kind {
            GadgetKind::SingleAncilla => reduce_3body_single_ancilla(p.jk),
            GadgetKind::KAncilla => reduce_kbody_term(p.vars.len(), p.jk, &params_for(p.jk)?),
        })
        .collect::<Result<_>>()?;

    let mut labels: Vec<VarLabel> = sp.labels().to_vec();
    labels.extend((logical as u32..size as u32).map(VarLabel::Ancilla));
    let mut two_body = SpinPolynomial::zero(labels);
    for (k, c) in sp.terms().filter(|(k, _)| k.len() < 3) {
        two_body.add_term(k.clone(), c);
    }
    let mut registry = std::collections::BTreeMap::new();
    let mut reduced_by_order = Vec::new();
    let mut singles = 0;
    for (plan, g) in plans.iter().zip(&gadgets) {
        let map = |local: u32| -> u32 {
            if (local as usize) < g.logical {
                plan.vars[local as usize]
            } else {
                plan.first_ancilla + (local - g.logical as u32)
            }
        };
        for (ids, c) in &g.terms {
            let mut global: Vec<u32> = ids.iter().map(|&v| map(v)).collect();
            global.sort_unstable();
            two_body.add_term(global, *c);
        }
        two_body.add_term(Vec::new(), -g.constant);
        for a in 0..g.ancillas as u32 {
            registry.insert(
                plan.first_ancilla + a,
                AncillaRecord {
                    source_term: plan.vars.clone(),
                    kind: g.kind,
                    fallback: plan.fallback,
                },
            );
        }
        let k = plan.vars.len();
        if reduced_by_order.len() <= k {
            reduced_by_order.resize(k + 1, 0);
        }
        reduced_by_order[k] += 1;
        if g.kind == GadgetKind::SingleAncilla {
            singles += 1;
        }
    }

    let bp = spin_to_boolean(&two_body);
    let mut q = Qubo::from_polynomial(&bp)?;
    q.logical_count = logical;
    q.ancilla_registry = registry;
    let stats = ReductionStats {
        logical,
        ancillas: size - logical,
        couplers: q.num_couplers(),
        reduced_terms: plans.len(),
        reduced_by_order,
        single_ancilla_gadgets: singles,
        fallbacks: plans.iter().filter(|p| p.fallback).count(),
    };
    Ok((q, stats))
}

/// Minimum QUBO energy over the ancillas for a fixed logical assignment.
///
/// Ancillas that share no coupler are set independently (exact); coupled
/// ancillas are enumerated, up to 20 of them.
pub fn min_over_ancillas(q: &Qubo, logical: &[bool]) -> Result<f64> {
    let l = q.logical_count;
    if logical.len() != l {
        return Err(param(format!("expected {l} logical bits, got {}", logical.len())));
    }
    let anc = q.size - l;
    let coupled = q.quadratic.keys().any(|&(i, j)| i as usize >= l && j as usize >= l);
    let mut x = logical.to_vec();
    x.resize(q.size, false);
    if !coupled {
        let mut field: Vec<f64> = q.linear[l..].to_vec();
        let mut e = q.offset;
        for (i, &a) in q.linear[..l].iter().enumerate() {
            if logical[i] {
                e += a;
            }
        }
        for (&(i, j), &b) in &q.quadratic {
            let (i, j) = (i as usize, j as usize);
            if j < l {
                if logical[i] && logical[j] {
                    e += b;
                }
            } else if logical[i] {
                field[j - l] += b;
            }
        }
        return Ok(e + field.iter().map(|f| f.min(0.0)).sum::<f64>());
    }
    if anc > 20 {
        return Err(Error::Resource(format!("{anc} coupled ancillas are too many to enumerate")));
    }
    let mut best = f64::INFINITY;
    for m in 0u64..(1 << anc) {
        for a in 0..anc {
            x[l + a] = m >> a & 1 == 1;
        }
        best = best.min(q.energy(&x));
    }
    Ok(best)
}
