use serde::Serialize;

use super::legendre::ThetaPolynomial;
use super::poly::{BinaryPolynomial, DEFAULT_TERM_CAP, PRUNE_TOL};
use super::BitSpec;
use crate::equilibrium::ValueMap;
use crate::error::{param, Result};
use crate::network::{FailureSpec, FinancialNetwork};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HuboStats {
    pub variables: usize,
    pub terms: usize,
    pub degree: usize,
    /// Term counts indexed by order.
    pub terms_by_order: Vec<usize>,
    pub pruned_terms: usize,
}

impl HuboStats {
    pub fn of(poly: &BinaryPolynomial, pruned_terms: usize) -> Self {
        Self {
            variables: poly.num_vars(),
            terms: poly.num_terms(),
            degree: poly.degree(),
            terms_by_order: poly.order_histogram(),
            pruned_terms,
        }
    }
}

/// Expands `Σ_i (v_i - u_i + Σ_j M_ij b̃_j(v_j))²` over the bits of `spec`.
///
/// `M = C̃ (I - C)⁻¹`, `u = M D p`, and `b̃_j = β_j (1 - T_r((v_j - v_c,j) / v_max))`
/// with the degree-`r` Legendre step `T_r`. Without a failure spec the
/// result is the linear residual `Σ_i (v_i - u_i)²`. Arguments of `T_r` may
/// fall outside `[-1, 1]` when `v_c > 0`; the polynomial is simply continued
/// there.
pub fn build_hubo(
    net: &FinancialNetwork,
    fail: Option<&FailureSpec>,
    spec: &BitSpec,
    r: Option<usize>,
) -> Result<(BinaryPolynomial, HuboStats)> {
    build_hubo_with_cap(net, fail, spec, r, DEFAULT_TERM_CAP)
}

pub fn build_hubo_with_cap(
    net: &FinancialNetwork,
    fail: Option<&FailureSpec>,
    spec: &BitSpec,
    r: Option<usize>,
    cap: usize,
) -> Result<(BinaryPolynomial, HuboStats)> {
    let n = net.n_institutions();
    let map = ValueMap::new(net)?;
    let labels = spec.labels(n);

    let value_poly = |i: usize| -> BinaryPolynomial {
        let mut p = BinaryPolynomial::zero(labels.clone());
        for (a, w) in (spec.alpha_min..=spec.alpha_max).zip(spec.weights()) {
            p.add_term(vec![spec.var_id(i, a)], w);
        }
        p
    };

    // b̃_j as a polynomial over institution j's own bits
    let failure_polys: Option<Vec<BinaryPolynomial>> = match fail {
        None => None,
        Some(f) => {
            f.check(n)?;
            let r = r.ok_or_else(|| param("a failure spec needs a smoothing degree r"))?;
            let theta = ThetaPolynomial::new(r)?;
            let v_max = spec.v_max();
            let mut polys = Vec::with_capacity(n);
            for j in 0..n {
                let beta = f.failure_magnitudes[j];
                if beta == 0.0 {
                    polys.push(BinaryPolynomial::zero(labels.clone()));
                    continue;
                }
                // x = (v_j - v_c,j) / v_max
                let mut x = value_poly(j);
                x.add_term(Vec::new(), -f.critical_values[j]);
                x.scale(1.0 / v_max);
                let step = theta_of(&theta, &x, cap)?;
                let mut b = BinaryPolynomial::constant(labels.clone(), beta);
                b.add_scaled(&step, -beta);
                polys.push(b);
            }
            Some(polys)
        }
    };

    let mut total = BinaryPolynomial::zero(labels.clone());
    for i in 0..n {
        let mut e = value_poly(i);
        e.add_term(Vec::new(), -map.linear_values[i]);
        if let Some(polys) = &failure_polys {
            for (j, b) in polys.iter().enumerate() {
                e.add_scaled(b, map.response[(i, j)]);
            }
        }
        let sq = e.mul(&e, cap)?;
        total.add_assign(&sq);
        if total.num_terms() > cap {
            return Err(crate::error::Error::Resource(format!(
                "objective expansion exceeded {cap} terms"
            )));
        }
    }
    let pruned = total.prune(PRUNE_TOL);
    let stats = HuboStats::of(&total, pruned);
    Ok((total, stats))
}

/// `T_r(x)` for a polynomial argument, via the Legendre recurrence on
/// polynomials.
fn theta_of(theta: &ThetaPolynomial, x: &BinaryPolynomial, cap: usize) -> Result<BinaryPolynomial> {
    let labels = x.labels().to_vec();
    let mut prev = BinaryPolynomial::constant(labels.clone(), 1.0);
    let mut cur = x.clone();
    let mut out = BinaryPolynomial::constant(labels, 0.5);
    for l in 1..=theta.degree {
        out.add_scaled(&cur, theta.coefficients[&l]);
        if l == theta.degree {
            break;
        }
        let mut next = x.mul(&cur, cap)?;
        next.scale((2 * l + 1) as f64);
        next.add_scaled(&prev, -(l as f64));
        next.scale(1.0 / (l + 1) as f64);
        prev = cur;
        cur = next;
    }
    Ok(out)
}
