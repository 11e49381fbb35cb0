//! Quadratic unconstrained binary problems: minimize
//! `Σ_i a_i x_i + Σ_{i<j} b_ij x_i x_j + offset` over `x ∈ {0,1}ⁿ`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::hubo::BinaryPolynomial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GadgetKind {
    /// k logical + k ancilla construction.
    KAncilla,
    /// Three-body term with a single ancilla.
    SingleAncilla,
}

/// Where an ancilla came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AncillaRecord {
    pub source_term: Vec<u32>,
    pub kind: GadgetKind,
    /// The single-ancilla gadget was requested but failed certification.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Qubo {
    pub size: usize,
    pub linear: Vec<f64>,
    /// Couplers keyed by `(i, j)` with `i < j`.
    pub quadratic: BTreeMap<(u32, u32), f64>,
    pub offset: f64,
    /// Variables `0 .. logical_count` carry meaning; the rest are ancillas.
    pub logical_count: usize,
    pub ancilla_registry: BTreeMap<u32, AncillaRecord>,
}

impl Qubo {
    pub fn new(size: usize) -> Self {
        Self {
            size,
            linear: vec![0.0; size],
            quadratic: BTreeMap::new(),
            offset: 0.0,
            logical_count: size,
            ancilla_registry: BTreeMap::new(),
        }
    }

    /// Adds to a coupler or, when `i == j`, to a diagonal entry.
    pub fn add(&mut self, i: u32, j: u32, v: f64) {
        if v == 0.0 {
            return;
        }
        if i == j {
            self.linear[i as usize] += v;
        } else {
            let key = (i.min(j), i.max(j));
            let e = self.quadratic.entry(key).or_insert(0.0);
            *e += v;
            if *e == 0.0 {
                self.quadratic.remove(&key);
            }
        }
    }

    pub fn num_couplers(&self) -> usize {
        self.quadratic.len()
    }

    pub fn ancilla_count(&self) -> usize {
        self.size - self.logical_count
    }

    pub fn energy(&self, x: &[bool]) -> f64 {
        debug_assert_eq!(x.len(), self.size);
        let mut e = self.offset;
        for (i, &a) in self.linear.iter().enumerate() {
            if x[i] {
                e += a;
            }
        }
        for (&(i, j), &b) in &self.quadratic {
            if x[i as usize] && x[j as usize] {
                e += b;
            }
        }
        e
    }

    /// Largest coefficient magnitude (linear or coupler).
    pub fn max_abs_coefficient(&self) -> f64 {
        self.linear
            .iter()
            .chain(self.quadratic.values())
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn check(&self) -> Result<()> {
        if self.linear.len() != self.size {
            return Err(param(format!("linear has {} entries for size {}", self.linear.len(), self.size)));
        }
        for &(i, j) in self.quadratic.keys() {
            if i >= j || j as usize >= self.size {
                return Err(param(format!("invalid coupler ({i}, {j}) for size {}", self.size)));
            }
        }
        for (&a, rec) in &self.ancilla_registry {
            if (a as usize) < self.logical_count || a as usize >= self.size || rec.source_term.is_empty() {
                return Err(param(format!("bad ancilla registry entry {a}")));
            }
        }
        let coeffs_finite = self.linear.iter().chain(self.quadratic.values()).all(|v| v.is_finite());
        if !coeffs_finite || !self.offset.is_finite() {
            return Err(param("non-finite QUBO coefficient"));
        }
        Ok(())
    }

    /// Reads a polynomial of degree at most two.
    pub fn from_polynomial(p: &BinaryPolynomial) -> Result<Self> {
        let mut q = Qubo::new(p.num_vars());
        for (k, c) in p.terms() {
            match k.as_slice() {
                [] => q.offset += c,
                [i] => q.add(*i, *i, c),
                [i, j] => q.add(*i, *j, c),
                _ => {
                    return Err(Error::Parameter(format!(
                        "term of order {} cannot be written as a QUBO",
                        k.len()
                    )))
                }
            }
        }
        Ok(q)
    }

    /// Adjacency lists `(neighbor, coupler)` per variable.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.size];
        for (&(i, j), &b) in &self.quadratic {
            adj[i as usize].push((j as usize, b));
            adj[j as usize].push((i as usize, b));
        }
        adj
    }

    /// Copy with variables restricted to `keep`; every other variable is
    /// clamped to its value in `state` and folded into the linear terms and
    /// offset. The result is indexed by position in `keep`.
    pub fn clamp(&self, keep: &[usize], state: &[bool]) -> Qubo {
        let mut pos = vec![usize::MAX; self.size];
        for (p, &v) in keep.iter().enumerate() {
            pos[v] = p;
        }
        let mut sub = Qubo::new(keep.len());
        sub.offset = self.offset;
        for (i, &a) in self.linear.iter().enumerate() {
            if pos[i] != usize::MAX {
                sub.linear[pos[i]] += a;
            } else if state[i] {
                sub.offset += a;
            }
        }
        for (&(i, j), &b) in &self.quadratic {
            let (i, j) = (i as usize, j as usize);
            match (pos[i] != usize::MAX, pos[j] != usize::MAX) {
                (true, true) => sub.add(pos[i] as u32, pos[j] as u32, b),
                (true, false) if state[j] => sub.linear[pos[i]] += b,
                (false, true) if state[i] => sub.linear[pos[j]] += b,
                (false, false) if state[i] && state[j] => sub.offset += b,
                _ => {}
            }
        }
        sub
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamping_preserves_energy() {
        let mut q = Qubo::new(4);
        q.linear = vec![1.0, -2.0, 0.5, 3.0];
        q.add(0, 1, -1.5);
        q.add(1, 3, 2.0);
        q.add(2, 3, -4.0);
        q.offset = 0.25;
        let state = [true, false, true, true];
        let sub = q.clamp(&[1, 2], &state);
        for m in 0..4 {
            let sx = [m & 1 == 1, m & 2 == 2];
            let mut full = state;
            full[1] = sx[0];
            full[2] = sx[1];
            assert!((sub.energy(&sx) - q.energy(&full)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_structure() {
        let mut q = Qubo::new(2);
        q.quadratic.insert((1, 0), 1.0);
        assert!(q.check().is_err());
    }
}
