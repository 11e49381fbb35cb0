//! Binary formulation of the equilibrium objective.
//!
//! Market values are written in fixed point, `v_i = Σ_α 2^α x_{i,α}`, the
//! failure step is replaced by a truncated Legendre series, and the squared
//! residual is expanded into a multilinear [`BinaryPolynomial`].

mod build;
mod legendre;
mod poly;

pub use build::{build_hubo, build_hubo_with_cap, HuboStats};
pub use legendre::{legendre, legendre_power_basis, legendre_unchecked, smoothed_theta, ThetaPolynomial};
pub use poly::{
    Algebra, BinaryPolynomial, Boolean, Monomial, Polynomial, Spin, SpinPolynomial, VarLabel, DEFAULT_TERM_CAP,
    PRUNE_TOL,
};

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Range of powers of two used to encode each value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitSpec {
    pub alpha_min: i32,
    pub alpha_max: i32,
}

impl BitSpec {
    pub fn new(alpha_min: i32, alpha_max: i32) -> Result<Self> {
        if alpha_min > alpha_max {
            return Err(param(format!("alpha_min {alpha_min} > alpha_max {alpha_max}")));
        }
        if alpha_min < -1000 || alpha_max > 1000 {
            return Err(param("bit exponents must stay within ±1000"));
        }
        Ok(Self { alpha_min, alpha_max })
    }

    /// Non-negative integers `0 ..= 2^bits - 1`.
    pub fn integer(bits: u32) -> Result<Self> {
        if bits == 0 {
            return Err(param("need at least one bit"));
        }
        Self::new(0, bits as i32 - 1)
    }

    pub fn bit_count(&self) -> usize {
        (self.alpha_max - self.alpha_min + 1) as usize
    }

    /// `Σ_α 2^α`, exact in binary floating point.
    pub fn v_max(&self) -> f64 {
        self.weights().sum()
    }

    /// `2^α` for α = alpha_min ..= alpha_max.
    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        (self.alpha_min..=self.alpha_max).map(|a| 2f64.powi(a))
    }

    /// Variable id of bit α of institution `i`.
    pub fn var_id(&self, institution: usize, alpha: i32) -> u32 {
        (institution * self.bit_count() + (alpha - self.alpha_min) as usize) as u32
    }

    pub fn labels(&self, n: usize) -> Vec<VarLabel> {
        (0..n)
            .flat_map(|i| (self.alpha_min..=self.alpha_max).map(move |a| VarLabel::Bit { institution: i, exponent: a }))
            .collect()
    }
}

/// Greedy most-significant-first encoding, bits ordered α = alpha_min
/// upwards. Values between grid points round down.
pub fn encode_value(spec: &BitSpec, v: f64) -> Result<Vec<bool>> {
    if !(v >= 0.0 && v <= spec.v_max()) {
        return Err(param(format!("value {v} outside [0, {}]", spec.v_max())));
    }
    let mut rest = v;
    let mut bits = vec![false; spec.bit_count()];
    for k in (0..bits.len()).rev() {
        let w = 2f64.powi(spec.alpha_min + k as i32);
        if rest >= w {
            bits[k] = true;
            rest -= w;
        }
    }
    Ok(bits)
}

pub fn decode_bits(spec: &BitSpec, bits: &[bool]) -> Result<f64> {
    if bits.len() != spec.bit_count() {
        return Err(param(format!("expected {} bits, got {}", spec.bit_count(), bits.len())));
    }
    Ok(spec.weights().zip(bits).filter(|(_, &b)| b).map(|(w, _)| w).sum())
}

/// Decodes the first `n · bit_count` entries of an assignment into one value
/// per institution.
pub fn decode_values(spec: &BitSpec, n: usize, assignment: &[bool]) -> Result<Vec<f64>> {
    let b = spec.bit_count();
    if assignment.len() < n * b {
        return Err(param(format!("assignment has {} bits, need {}", assignment.len(), n * b)));
    }
    (0..n).map(|i| decode_bits(spec, &assignment[i * b..(i + 1) * b])).collect()
}

/// Inverse of [`decode_values`] for grid-representable values.
pub fn encode_values(spec: &BitSpec, values: &[f64]) -> Result<Vec<bool>> {
    let mut out = Vec::with_capacity(values.len() * spec.bit_count());
    for &v in values {
        out.extend(encode_value(spec, v)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_encoding() {
        let s = BitSpec::integer(5).unwrap();
        assert_eq!(s.v_max(), 31.0);
        assert_eq!(encode_value(&s, 5.0).unwrap(), vec![true, false, true, false, false]);
        assert_eq!(encode_value(&s, 31.0).unwrap(), vec![true; 5]);
        assert!(encode_value(&s, 32.0).is_err());
        assert!(encode_value(&s, -1.0).is_err());
    }

    #[test]
    fn fractional_encoding() {
        let s = BitSpec::new(-1, 1).unwrap();
        assert_eq!(s.v_max(), 3.5);
        let bits = encode_value(&s, 2.5).unwrap();
        assert_eq!(bits, vec![true, false, true]);
        assert_eq!(decode_bits(&s, &bits).unwrap(), 2.5);
        // not representable: rounds down
        assert_eq!(decode_bits(&s, &encode_value(&s, 2.7).unwrap()).unwrap(), 2.5);
    }

    #[test]
    fn encode_decode_round_trip_on_grid() {
        let s = BitSpec::new(-2, 3).unwrap();
        for k in 0..64 {
            let v = k as f64 * 0.25;
            assert_eq!(decode_bits(&s, &encode_value(&s, v).unwrap()).unwrap(), v);
        }
    }

    #[test]
    fn bad_spec() {
        assert!(BitSpec::new(3, 2).is_err());
        assert!(BitSpec::integer(0).is_err());
    }
}
