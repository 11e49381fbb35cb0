//! Legendre polynomials and the truncated Legendre series of the unit step.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{param, Result};

/// `P_l(x)` by Bonnet's recurrence `(l+1) P_{l+1} = (2l+1) x P_l - l P_{l-1}`.
pub fn legendre(l: usize, x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(param(format!("Legendre argument {x} outside [-1, 1]")));
    }
    Ok(legendre_unchecked(l, x))
}

/// Same recurrence without the domain check (polynomial continuation).
pub fn legendre_unchecked(l: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if l == 0 {
        return prev;
    }
    for k in 1..l {
        let next = ((2 * k + 1) as f64 * x * cur - k as f64 * prev) / (k + 1) as f64;
        prev = cur;
        cur = next;
    }
    cur
}

/// Power-basis coefficients of `P_0 … P_max` (index = power of x).
pub fn legendre_power_basis(max: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![vec![1.0]];
    if max >= 1 {
        out.push(vec![0.0, 1.0]);
    }
    for k in 1..max {
        let mut next = vec![0.0; k + 2];
        for (p, c) in out[k].iter().enumerate() {
            next[p + 1] += (2 * k + 1) as f64 * c;
        }
        for (p, c) in out[k - 1].iter().enumerate() {
            next[p] -= k as f64 * c;
        }
        for c in next.iter_mut() {
            *c /= (k + 1) as f64;
        }
        out.push(next);
    }
    out
}

/// Truncated series `Θ(x) ≈ 1/2 + Σ_{l=1}^{r} (P_{l-1}(0) + P_{l+1}(0)) P_l(x)`.
///
/// Only odd `l` contribute, so the truncation is odd about `x = 0` up to the
/// constant and `T(x) + T(-x) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaPolynomial {
    pub degree: usize,
    pub coefficients: BTreeMap<usize, f64>,
}

impl ThetaPolynomial {
    /// Requires an odd degree; even degrees would add a vanishing term.
    pub fn new(r: usize) -> Result<Self> {
        if r == 0 || r % 2 == 0 {
            return Err(param(format!("smoothing degree must be odd and positive, got {r}")));
        }
        let coefficients = (1..=r)
            .map(|l| (l, legendre_unchecked(l - 1, 0.0) + legendre_unchecked(l + 1, 0.0)))
            .collect();
        Ok(Self { degree: r, coefficients })
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&x) {
            return Err(param(format!("smoothed step argument {x} outside [-1, 1]")));
        }
        Ok(self.eval_extended(x))
    }

    /// Evaluates the polynomial anywhere, including outside `[-1, 1]`.
    pub fn eval_extended(&self, x: f64) -> f64 {
        let (mut prev, mut cur) = (1.0, x);
        let mut total = 0.5;
        for l in 1..=self.degree {
            total += self.coefficients[&l] * cur;
            let next = ((2 * l + 1) as f64 * x * cur - l as f64 * prev) / (l + 1) as f64;
            prev = cur;
            cur = next;
        }
        total
    }

    /// Power-basis coefficients `a_k` with `T(x) = Σ a_k x^k`.
    pub fn power_coefficients(&self) -> Vec<f64> {
        let basis = legendre_power_basis(self.degree);
        let mut a = vec![0.0; self.degree + 1];
        a[0] = 0.5;
        for (&l, &c) in &self.coefficients {
            for (p, b) in basis[l].iter().enumerate() {
                a[p] += c * b;
            }
        }
        a
    }
}

/// Convenience wrapper: `smoothed_theta(tp, x)` with the `[-1, 1]` domain check.
pub fn smoothed_theta(tp: &ThetaPolynomial, x: f64) -> Result<f64> {
    tp.eval(x)
}
