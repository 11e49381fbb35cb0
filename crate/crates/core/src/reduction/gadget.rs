//! Two-body gadgets for k-body spin products.
//!
//! A gadget is emitted in a local index space: logical spins are `0 .. k`,
//! ancillas follow from `k`. Every gadget is certified by minimizing over
//! the ancillas for each logical configuration before it is used.

use std::fmt;

use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::qubo::GadgetKind;

/// Default ratio `J^a / |J_k|`; `q_0` defaults to half of it.
pub const DEFAULT_SCALE: f64 = 20.0;

/// Largest `logical + ancilla` count accepted by brute-force certification.
pub const MAX_CERTIFY_VARS: usize = 24;

/// Certification tolerance on the spread of `E_min(σ) - J_k Πσ`.
pub const CERTIFY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GadgetParams {
    pub ja: f64,
    pub q0: f64,
    pub scale_factor: f64,
}

impl GadgetParams {
    /// `J^a = s |J_k|`, `q_0 = (s/2) |J_k|`.
    pub fn scaled(jk: f64, scale_factor: f64) -> Self {
        Self::from_magnitude(jk.abs(), scale_factor)
    }

    /// Same ratios applied to an explicit magnitude (global scaling).
    pub fn from_magnitude(magnitude: f64, scale_factor: f64) -> Self {
        Self {
            ja: scale_factor * magnitude,
            q0: scale_factor / 2.0 * magnitude,
            scale_factor,
        }
    }

    /// Ground-state conditions `|J_k| < q_0 < J^a` and `|J_k| < J^a - q_0`.
    pub fn check(&self, jk: f64) -> Result<()> {
        let a = jk.abs();
        if !(a < self.q0 && self.q0 < self.ja && a < self.ja - self.q0) {
            return Err(param(format!(
                "gadget parameters J^a={}, q0={} violate |J_k| < q0 < J^a and |J_k| < J^a - q0 for J_k={jk}",
                self.ja, self.q0
            )));
        }
        Ok(())
    }
}

/// A two-body Hamiltonian in local indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gadget {
    pub kind: GadgetKind,
    pub logical: usize,
    pub ancillas: usize,
    /// `(local ids, coefficient)`, each with one or two ids.
    pub terms: Vec<(Vec<u32>, f64)>,
    /// Certified `min_ancilla E(σ) - J_k Πσ`.
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certified {
    pub constant: f64,
    /// `max - min` of `E_min(σ) - J_k Πσ` over logical configurations.
    pub spread: f64,
}

/// Certification witness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificationFailure {
    pub kind: Option<GadgetKind>,
    pub jk: f64,
    /// Logical configuration (`true` = spin up) whose residual deviates most.
    pub witness: Vec<bool>,
    pub expected_constant: f64,
    pub witness_constant: f64,
    /// `(logical configuration, ancilla-minimized energy)` for every configuration.
    pub energy_table: Vec<(Vec<bool>, f64)>,
}

impl fmt::Display for CertificationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} gadget for J_k={} deviates at logical configuration {:?}: residual {} vs {}",
            self.kind, self.jk, self.witness, self.witness_constant, self.expected_constant
        )
    }
}

/// Emits the k-ancilla construction for `J_k σ_1 ⋯ σ_k`:
///
/// `J Σ_{i<j} σ_i σ_j + h Σ σ_i + J^a Σ_{i,j} σ_i σ_{j,a} + Σ_i h^a_i σ_{i,a}`
///
/// with `J = J^a`, `h = q_0 - J^a`, `h^a_i = -J^a (2i - k) + q_i` and
/// `q_i = (-1)^{k-i+1} J_k + q_0` for `i = 1..k`. The result is certified.
pub fn reduce_kbody_term(k: usize, jk: f64, params: &GadgetParams) -> Result<Gadget> {
    if k < 3 {
        return Err(param(format!("k-body reduction needs k >= 3, got {k}")));
    }
    if 2 * k > MAX_CERTIFY_VARS {
        return Err(Error::Resource(format!("a {k}-body gadget has {} spins, certification bound is {MAX_CERTIFY_VARS}", 2 * k)));
    }
    params.check(jk)?;
    let GadgetParams { ja, q0, .. } = *params;
    let h = q0 - ja;
    let mut terms = Vec::with_capacity(k * (k - 1) / 2 + k * k + 2 * k);
    for i in 0..k as u32 {
        for j in 0..i {
            terms.push((vec![j, i], ja));
        }
    }
    for i in 0..k as u32 {
        terms.push((vec![i], h));
    }
    for i in 0..k as u32 {
        for a in 0..k as u32 {
            terms.push((vec![i, k as u32 + a], ja));
        }
    }
    for i in 1..=k {
        let sign = if (k - i + 1) % 2 == 0 { 1.0 } else { -1.0 };
        let qi = sign * jk + q0;
        let hai = -ja * (2.0 * i as f64 - k as f64) + qi;
        terms.push((vec![(k + i - 1) as u32], hai));
    }
    let mut g = Gadget {
        kind: GadgetKind::KAncilla,
        logical: k,
        ancillas: k,
        terms,
        constant: 0.0,
    };
    certify(&mut g, jk)?;
    Ok(g)
}

/// Emits the one-ancilla construction for `J_3 σ_1 σ_2 σ_3`:
///
/// `J Σ_{i<j} σ_i σ_j + h Σ σ_i + J^a Σ_i σ_i σ_a + h^a σ_a`
///
/// with `h = J_3`, `h^a = 2 J_3`, `J = |J_3|` and `J^a = 2 J`. A zero
/// coefficient yields an empty gadget.
pub fn reduce_3body_single_ancilla(j3: f64) -> Result<Gadget> {
    if j3 == 0.0 {
        return Ok(Gadget {
            kind: GadgetKind::SingleAncilla,
            logical: 3,
            ancillas: 0,
            terms: Vec::new(),
            constant: 0.0,
        });
    }
    let j = j3.abs();
    let ja = 2.0 * j;
    let mut terms = Vec::with_capacity(10);
    for i in 0..3u32 {
        for k in 0..i {
            terms.push((vec![k, i], j));
        }
    }
    for i in 0..3u32 {
        terms.push((vec![i], j3));
    }
    for i in 0..3u32 {
        terms.push((vec![i, 3], ja));
    }
    terms.push((vec![3], 2.0 * j3));
    let mut g = Gadget {
        kind: GadgetKind::SingleAncilla,
        logical: 3,
        ancillas: 1,
        terms,
        constant: 0.0,
    };
    certify(&mut g, j3)?;
    Ok(g)
}

fn certify(g: &mut Gadget, jk: f64) -> Result<()> {
    match verify_gadget(g.logical, g.ancillas, &g.terms, jk)? {
        Ok(c) => {
            g.constant = c.constant;
            Ok(())
        }
        Err(mut fail) => {
            fail.kind = Some(g.kind);
            Err(Error::Gadget(Box::new(fail)))
        }
    }
}

/// For each of the `2^k` logical configurations, minimizes the emitted
/// Hamiltonian over all ancilla assignments and checks that
/// `E_min(σ) - J_k Πσ` is the same everywhere.
///
/// Ancillas that share no coupler are minimized independently, which is
/// exact; otherwise all `2^ancillas` assignments are enumerated.
pub fn verify_gadget(
    k: usize,
    ancillas: usize,
    emitted: &[(Vec<u32>, f64)],
    jk: f64,
) -> Result<std::result::Result<Certified, CertificationFailure>> {
    let total = k + ancillas;
    if total > MAX_CERTIFY_VARS {
        return Err(Error::Resource(format!(
            "gadget certification over {total} spins exceeds the bound {MAX_CERTIFY_VARS}"
        )));
    }
    for (ids, _) in emitted {
        if ids.is_empty() || ids.len() > 2 || ids.iter().any(|&v| v as usize >= total) {
            return Err(param(format!("emitted term {ids:?} is not a one- or two-body term over {total} spins")));
        }
    }
    let is_anc = |v: u32| v as usize >= k;
    let independent = !emitted
        .iter()
        .any(|(ids, _)| ids.len() == 2 && is_anc(ids[0]) && is_anc(ids[1]));

    let spin = |bit: bool| if bit { 1.0 } else { -1.0 };
    let mut table = Vec::with_capacity(1 << k);
    let mut residuals = Vec::with_capacity(1 << k);
    for mask in 0u32..(1 << k) {
        let logical: Vec<bool> = (0..k).map(|b| mask >> b & 1 == 1).collect();
        let min_e = if independent {
            // logical-only part plus Σ_a min(±field_a)
            let mut e = 0.0;
            let mut field = vec![0.0; ancillas];
            for (ids, c) in emitted {
                match ids.as_slice() {
                    [i] if !is_anc(*i) => e += c * spin(logical[*i as usize]),
                    [a] => field[*a as usize - k] += c,
                    [i, j] if !is_anc(*i) && !is_anc(*j) => {
                        e += c * spin(logical[*i as usize]) * spin(logical[*j as usize])
                    }
                    [i, j] => {
                        let (l, a) = if is_anc(*i) { (*j, *i) } else { (*i, *j) };
                        field[a as usize - k] += c * spin(logical[l as usize]);
                    }
                    _ => unreachable!(),
                }
            }
            e - field.iter().map(|f| f.abs()).sum::<f64>()
        } else {
            let mut best = f64::INFINITY;
            let mut full = logical.clone();
            full.resize(total, false);
            for amask in 0u32..(1 << ancillas) {
                for a in 0..ancillas {
                    full[k + a] = amask >> a & 1 == 1;
                }
                let e: f64 = emitted
                    .iter()
                    .map(|(ids, c)| ids.iter().fold(*c, |acc, &v| acc * spin(full[v as usize])))
                    .sum();
                best = best.min(e);
            }
            best
        };
        let parity: f64 = logical.iter().map(|&b| spin(b)).product();
        residuals.push(min_e - jk * parity);
        table.push((logical, min_e));
    }
    let lo = residuals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = residuals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = hi - lo;
    let tol = CERTIFY_TOL * jk.abs().max(1.0);
    if spread <= tol {
        Ok(Ok(Certified {
            constant: residuals[0],
            spread,
        }))
    } else {
        let reference = residuals[0];
        let (w, _) = residuals
            .iter()
            .enumerate()
            .max_by(|a, b| (a.1 - reference).abs().total_cmp(&(b.1 - reference).abs()))
            .expect("non-empty table");
        Ok(Err(CertificationFailure {
            kind: None,
            jk,
            witness: table[w].0.clone(),
            expected_constant: reference,
            witness_constant: residuals[w],
            energy_table: table,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_body_default_scales() {
        let g = reduce_kbody_term(3, 1.0, &GadgetParams::scaled(1.0, DEFAULT_SCALE)).unwrap();
        assert_eq!(g.ancillas, 3);
        let pairs = g.terms.iter().filter(|t| t.0.len() == 2).count();
        assert_eq!(pairs, 3 + 9);
    }

    #[test]
    fn four_body_negative() {
        let g = reduce_kbody_term(4, -1.5, &GadgetParams::scaled(-1.5, DEFAULT_SCALE)).unwrap();
        assert_eq!(g.ancillas, 4);
        // 2^4 logical × 2^4 ancilla brute force agrees with the separable path
        let mut coupled = g.terms.clone();
        coupled.push((vec![4, 5], 0.0));
        let brute = verify_gadget(4, 4, &coupled, -1.5).unwrap().unwrap();
        assert!((brute.constant - g.constant).abs() < 1e-9);
    }

    #[test]
    fn small_offset_rejected() {
        let p = GadgetParams {
            ja: 20.0,
            q0: 0.5,
            scale_factor: 20.0,
        };
        assert!(matches!(reduce_kbody_term(3, 1.0, &p), Err(Error::Parameter(_))));
        assert!(reduce_kbody_term(2, 1.0, &GadgetParams::scaled(1.0, 20.0)).is_err());
    }

    #[test]
    fn zeroed_coupler_fails_with_witness() {
        let g = reduce_kbody_term(3, 1.0, &GadgetParams::scaled(1.0, DEFAULT_SCALE)).unwrap();
        let mut broken = g.terms.clone();
        let idx = broken.iter().position(|t| t.0 == vec![0, 3]).unwrap();
        broken[idx].1 = 0.0;
        let fail = verify_gadget(3, 3, &broken, 1.0).unwrap().unwrap_err();
        assert_eq!(fail.witness.len(), 3);
        assert_eq!(fail.energy_table.len(), 8);
        assert!((fail.witness_constant - fail.expected_constant).abs() > 1e-6);
    }

    #[test]
    fn two_body_passes_trivially() {
        let c = verify_gadget(2, 0, &[(vec![0, 1], 0.7)], 0.7).unwrap().unwrap();
        assert_eq!(c.constant, 0.0);
    }

    #[test]
    fn single_ancilla_both_signs() {
        for j3 in [1.0, -1.0, 0.37, -2.5] {
            let g = reduce_3body_single_ancilla(j3).unwrap();
            assert_eq!(g.ancillas, 1);
            assert!((g.constant + 3.0 * j3.abs()).abs() < 1e-12);
        }
        assert!(reduce_3body_single_ancilla(0.0).unwrap().terms.is_empty());
    }

    #[test]
    fn certification_bound() {
        assert!(matches!(verify_gadget(13, 12, &[], 1.0), Err(Error::Resource(_))));
    }
}
