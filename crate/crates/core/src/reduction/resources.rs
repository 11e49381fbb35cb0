use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{param, Result};

/// Upper bounds on the size of the quadratized problem, assuming every
/// monomial up to order `2r` over `n · bits` logical variables is present.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResourceEstimate {
    pub logical: u64,
    /// `Σ_{a=0}^{2r} C(n·bits, a)`
    #[serde(serialize_with = "as_decimal")]
    pub max_terms: BigUint,
    /// `Σ_{a=3}^{2r} a · C(n·bits, a)`: one ancilla per variable of each
    /// reduced term.
    #[serde(serialize_with = "as_decimal")]
    pub max_ancillas: BigUint,
    #[serde(serialize_with = "as_decimal")]
    pub qubo_side: BigUint,
    /// `8 · side²` bytes for a dense double-precision matrix.
    #[serde(serialize_with = "as_decimal")]
    pub memory_bytes: BigUint,
    pub structured: StructuredEstimate,
}

/// Counts for the equilibrium objective's actual term pattern: every
/// monomial lies within the bits of at most two institutions, with up to
/// `max(2, 2r)` bits of one institution or up to `r` bits of each of two.
/// Assumes generic coefficients, so every such monomial is present.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructuredEstimate {
    #[serde(serialize_with = "as_decimal")]
    pub terms: BigUint,
    /// Term counts indexed by order.
    #[serde(serialize_with = "decimal_list")]
    pub terms_by_order: Vec<BigUint>,
    /// One ancilla per variable of each term of order ≥ 3.
    #[serde(serialize_with = "as_decimal")]
    pub ancillas: BigUint,
    /// Logical pairs plus `k²` logical-ancilla couplers per reduced term.
    #[serde(serialize_with = "as_decimal")]
    pub couplers: BigUint,
    #[serde(serialize_with = "as_decimal")]
    pub qubo_side: BigUint,
    #[serde(serialize_with = "as_decimal")]
    pub memory_bytes: BigUint,
}

fn as_decimal<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn decimal_list<S: serde::Serializer>(v: &[BigUint], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Dense storage for a square matrix of `side` doubles.
pub fn dense_memory_bytes(side: &BigUint) -> BigUint {
    BigUint::from(8u32) * side * side
}

pub fn estimate_resources(n: u64, bits: u64, r: u64) -> Result<ResourceEstimate> {
    if n == 0 || bits == 0 {
        return Err(param("institution and bit counts must be positive"));
    }
    let logical = n
        .checked_mul(bits)
        .ok_or_else(|| param("n · bits overflows"))?;
    let mut max_terms = BigUint::from(0u32);
    let mut max_ancillas = BigUint::from(0u32);
    for a in 0..=2 * r {
        let c = binomial(logical, a);
        if a >= 3 {
            max_ancillas += &c * BigUint::from(a);
        }
        max_terms += c;
    }
    let qubo_side = BigUint::from(logical) + &max_ancillas;
    let memory_bytes = dense_memory_bytes(&qubo_side);
    Ok(ResourceEstimate {
        logical,
        max_terms,
        max_ancillas,
        qubo_side,
        memory_bytes,
        structured: structured_estimate(n, bits, r),
    })
}

fn structured_estimate(n: u64, bits: u64, r: u64) -> StructuredEstimate {
    let single_max = (2 * r).max(2).min(bits);
    let cross_max = r.min(bits);
    let top = single_max.max(2 * cross_max) as usize;
    let mut by_order = vec![BigUint::from(0u32); top + 1];
    by_order[0] = BigUint::from(1u32);
    for a in 1..=single_max {
        by_order[a as usize] += BigUint::from(n) * binomial(bits, a);
    }
    let pairs = binomial(n, 2);
    for x in 1..=cross_max {
        for y in 1..=cross_max {
            by_order[(x + y) as usize] += &pairs * binomial(bits, x) * binomial(bits, y);
        }
    }
    let mut ancillas = BigUint::from(0u32);
    let mut couplers = by_order.get(2).cloned().unwrap_or_default();
    for (a, c) in by_order.iter().enumerate().skip(3) {
        ancillas += c * BigUint::from(a);
        couplers += c * BigUint::from(a * a);
    }
    let terms = by_order.iter().sum();
    let qubo_side = BigUint::from(n * bits) + &ancillas;
    StructuredEstimate {
        terms,
        terms_by_order: by_order,
        ancillas,
        couplers,
        memory_bytes: dense_memory_bytes(&qubo_side),
        qubo_side,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_institutions_five_bits() {
        let e = estimate_resources(3, 5, 3).unwrap();
        assert_eq!(e.max_terms, BigUint::from(9949u32));
        assert_eq!(e.logical, 15);
    }

    #[test]
    fn structured_counts() {
        let s = estimate_resources(3, 5, 3).unwrap().structured;
        assert_eq!(s.terms, BigUint::from(1969u32));
        assert_eq!(s.ancillas, BigUint::from(8265u32));
        assert_eq!(s.couplers, BigUint::from(38790u32));
        let s = estimate_resources(10, 7, 3).unwrap().structured;
        assert_eq!(s.ancillas, BigUint::from(872_690u32));
        assert_eq!(s.couplers, BigUint::from(4_446_575u32));
        assert_eq!(s.qubo_side, BigUint::from(872_760u32));
    }

    #[test]
    fn structured_linear_model_has_only_block_pairs() {
        let s = estimate_resources(10, 7, 0).unwrap().structured;
        assert_eq!(s.terms_by_order.len(), 3);
        assert_eq!(s.terms_by_order[2], BigUint::from(210u32));
        assert_eq!(s.ancillas, BigUint::from(0u32));
    }

    #[test]
    fn degree_zero_is_constant_only() {
        let e = estimate_resources(4, 4, 0).unwrap();
        assert_eq!(e.max_terms, BigUint::from(1u32));
        assert_eq!(e.max_ancillas, BigUint::from(0u32));
    }

    #[test]
    fn memory_for_large_side() {
        let bytes = dense_memory_bytes(&BigUint::from(872_760u32));
        assert_eq!(bytes, BigUint::from(6_093_680_140_800u64));
    }

    #[test]
    fn monotone() {
        let base = estimate_resources(2, 3, 1).unwrap();
        for e in [estimate_resources(3, 3, 1), estimate_resources(2, 4, 1), estimate_resources(2, 3, 2)] {
            let e = e.unwrap();
            assert!(e.max_terms >= base.max_terms && e.max_ancillas >= base.max_ancillas);
        }
    }
}
