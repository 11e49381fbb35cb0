//! Classical reference computations on a network: the linear equilibrium,
//! the squared-residual objective with the exact Heaviside failure term, a
//! grid-search oracle, fixed-point cascade iteration and crash reports.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::hubo::ThetaPolynomial;
use crate::network::{reciprocal_condition, FailureSpec, FinancialNetwork, MIN_RCOND};

/// Default cap on grid evaluations in [`exhaustive_equilibrium`].
pub const DEFAULT_GRID_CAP: u64 = 1 << 25;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarketState {
    pub market_values: Vec<f64>,
    pub equity_values: Vec<f64>,
}

/// The affine map `v ↦ M (D p - b)` with `M = C̃ (I - C)⁻¹`, precomputed
/// once per network.
#[derive(Debug, Clone)]
pub struct ValueMap {
    /// `C̃ (I - C)⁻¹`
    pub response: DMatrix<f64>,
    /// `(I - C)⁻¹`
    pub leontief_inverse: DMatrix<f64>,
    /// `M D p`, the linear market values.
    pub linear_values: DVector<f64>,
    pub asset_values: DVector<f64>,
}

impl ValueMap {
    pub fn new(net: &FinancialNetwork) -> Result<Self> {
        let a = net.leontief();
        let rcond = reciprocal_condition(&a);
        if !(rcond > MIN_RCOND) {
            return Err(Error::Numeric(format!(
                "I - C is singular (reciprocal condition estimate {rcond:e})"
            )));
        }
        let inv = a
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Numeric("I - C is singular".into()))?;
        let response = DMatrix::from_diagonal(&net.self_ownership) * &inv;
        let asset_values = net.asset_values();
        let linear_values = &response * &asset_values;
        Ok(Self {
            response,
            leontief_inverse: inv,
            linear_values,
            asset_values,
        })
    }

    pub fn n(&self) -> usize {
        self.linear_values.len()
    }

    /// `M (D p - b)`.
    pub fn apply(&self, failure: &[f64]) -> DVector<f64> {
        let b = DVector::from_column_slice(failure);
        &self.linear_values - &self.response * b
    }

    /// `‖v - M (D p - b)‖²`.
    pub fn residual_norm2(&self, v: &[f64], failure: &[f64]) -> f64 {
        let target = self.apply(failure);
        v.iter().zip(target.iter()).map(|(a, b)| (a - b) * (a - b)).sum()
    }
}

/// `V = (I - C)⁻¹ D p`, `v = C̃ V`.
pub fn linear_equilibrium(net: &FinancialNetwork) -> Result<MarketState> {
    let a = net.leontief();
    let rcond = reciprocal_condition(&a);
    if !(rcond > MIN_RCOND) {
        return Err(Error::Numeric(format!(
            "I - C is singular (reciprocal condition estimate {rcond:e})"
        )));
    }
    let dp = net.asset_values();
    let equity = a
        .clone()
        .lu()
        .solve(&dp)
        .ok_or_else(|| Error::Numeric("LU solve of I - C failed".into()))?;
    let residual = (&a * &equity - &dp).amax();
    if residual > 1e-8 * dp.amax().max(f64::MIN_POSITIVE) {
        return Err(Error::Numeric(format!(
            "linear solve residual {residual:e} exceeds tolerance (reciprocal condition {rcond:e})"
        )));
    }
    let market = net.self_ownership.component_mul(&equity);
    Ok(MarketState {
        market_values: market.iter().copied().collect(),
        equity_values: equity.iter().copied().collect(),
    })
}

/// `b_i = β_i (1 - Θ(v_i - v_c,i))` with `Θ(0) = 1`: an institution sitting
/// exactly at its critical value has not failed.
pub fn failure_vector(fail: &FailureSpec, v: &[f64]) -> Vec<f64> {
    v.iter()
        .zip(&fail.critical_values)
        .zip(&fail.failure_magnitudes)
        .map(|((&vi, &vc), &beta)| if vi < vc { beta } else { 0.0 })
        .collect()
}

/// Failure vector with the Heaviside step replaced by a degree-`r` Legendre
/// smoothing evaluated at `(v_i - v_c,i) / v_max`.
pub fn smoothed_failure_vector(fail: &FailureSpec, theta: &ThetaPolynomial, v_max: f64, v: &[f64]) -> Vec<f64> {
    v.iter()
        .zip(&fail.critical_values)
        .zip(&fail.failure_magnitudes)
        .map(|((&vi, &vc), &beta)| beta * (1.0 - theta.eval_extended((vi - vc) / v_max)))
        .collect()
}

fn check_lengths(net: &FinancialNetwork, fail: &FailureSpec, v: &[f64]) -> Result<()> {
    let n = net.n_institutions();
    fail.check(n)?;
    if v.len() != n {
        return Err(param(format!("value vector has {} entries, expected {n}", v.len())));
    }
    Ok(())
}

/// `‖v - C̃ (I - C)⁻¹ (D p - b(v))‖²` with the exact step. Zero exactly at the
/// nonlinear equilibria.
pub fn objective(net: &FinancialNetwork, fail: &FailureSpec, v: &[f64]) -> Result<f64> {
    check_lengths(net, fail, v)?;
    let map = ValueMap::new(net)?;
    Ok(map.residual_norm2(v, &failure_vector(fail, v)))
}

/// Objective variant used by the binary formulation.
pub fn smoothed_objective(
    net: &FinancialNetwork,
    fail: &FailureSpec,
    theta: &ThetaPolynomial,
    v_max: f64,
    v: &[f64],
) -> Result<f64> {
    check_lengths(net, fail, v)?;
    let map = ValueMap::new(net)?;
    Ok(map.residual_norm2(v, &smoothed_failure_vector(fail, theta, v_max, v)))
}

/// Which objective the grid oracle minimizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObjectiveKind {
    Exact,
    /// Legendre-smoothed step of the given odd degree.
    Smoothed(usize),
}

#[derive(Debug, Clone, Serialize)]
pub struct GridMinimum {
    pub values: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExhaustiveResult {
    /// All global minimizers, ascending by objective then lexicographically.
    pub minimizers: Vec<GridMinimum>,
    pub evaluations: u64,
    pub bits_per_institution: u32,
}

impl ExhaustiveResult {
    pub fn best_objective(&self) -> f64 {
        self.minimizers[0].objective
    }

    /// The minimizer with the lowest total market value.
    pub fn headline(&self) -> &GridMinimum {
        self.minimizers
            .iter()
            .min_by(|a, b| {
                let sa: f64 = a.values.iter().sum();
                let sb: f64 = b.values.iter().sum();
                sa.total_cmp(&sb)
            })
            .expect("at least one minimizer")
    }
}

/// Objectives within this distance of the best count as ties.
pub fn tie_tolerance(best: f64) -> f64 {
    1e-9 * best.abs().max(1.0)
}

/// Scans every integer grid point `v ∈ {0, …, 2^bits - 1}ⁿ`.
pub fn exhaustive_equilibrium(
    net: &FinancialNetwork,
    fail: &FailureSpec,
    bits_per_institution: u32,
    kind: ObjectiveKind,
) -> Result<ExhaustiveResult> {
    exhaustive_equilibrium_capped(net, fail, bits_per_institution, kind, DEFAULT_GRID_CAP)
}

pub fn exhaustive_equilibrium_capped(
    net: &FinancialNetwork,
    fail: &FailureSpec,
    bits_per_institution: u32,
    kind: ObjectiveKind,
    cap: u64,
) -> Result<ExhaustiveResult> {
    let n = net.n_institutions();
    fail.check(n)?;
    if bits_per_institution == 0 || bits_per_institution > 32 {
        return Err(param(format!("bits_per_institution must be in 1..=32, got {bits_per_institution}")));
    }
    let side = 1u64 << bits_per_institution;
    let total = (n as u32)
        .checked_mul(bits_per_institution)
        .filter(|&b| b < 64)
        .map(|b| 1u64 << b);
    let total = match total {
        Some(t) if t <= cap => t,
        _ => {
            return Err(Error::Resource(format!(
                "grid search needs 2^{} evaluations, cap is {cap}",
                n as u64 * bits_per_institution as u64
            )))
        }
    };
    let map = ValueMap::new(net)?;
    let v_max = (side - 1) as f64;
    let theta = match kind {
        ObjectiveKind::Exact => None,
        ObjectiveKind::Smoothed(r) => Some(ThetaPolynomial::new(r)?),
    };
    let eval = |idx: u64| -> (f64, u64) {
        let mut v = vec![0.0; n];
        let mut rest = idx;
        for x in v.iter_mut() {
            *x = (rest % side) as f64;
            rest /= side;
        }
        let b = match &theta {
            None => failure_vector(fail, &v),
            Some(t) => smoothed_failure_vector(fail, t, v_max, &v),
        };
        (map.residual_norm2(&v, &b), idx)
    };

    const CHUNK: u64 = 1 << 12;
    let chunks = total.div_ceil(CHUNK);
    // every chunk keeps its own tie set; merged in chunk order afterwards
    let partial: Vec<(f64, Vec<(f64, u64)>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut best = f64::INFINITY;
            let mut ties: Vec<(f64, u64)> = Vec::new();
            for idx in c * CHUNK..((c + 1) * CHUNK).min(total) {
                let (obj, idx) = eval(idx);
                if obj < best - tie_tolerance(best.min(obj)) {
                    best = obj;
                    ties.retain(|t| t.0 <= best + tie_tolerance(best));
                    ties.push((obj, idx));
                } else if obj <= best + tie_tolerance(best) {
                    best = best.min(obj);
                    ties.push((obj, idx));
                }
            }
            (best, ties)
        })
        .collect();
    let best = partial.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let mut found: Vec<(f64, u64)> = partial
        .into_iter()
        .flat_map(|p| p.1)
        .filter(|t| t.0 <= best + tie_tolerance(best))
        .collect();
    let decode = |idx: u64| -> Vec<f64> {
        let mut rest = idx;
        (0..n)
            .map(|_| {
                let x = (rest % side) as f64;
                rest /= side;
                x
            })
            .collect()
    };
    let mut minimizers: Vec<GridMinimum> = found
        .drain(..)
        .map(|(objective, idx)| GridMinimum {
            values: decode(idx),
            objective,
        })
        .collect();
    minimizers.sort_by(|a, b| {
        a.objective
            .total_cmp(&b.objective)
            .then_with(|| a.values.partial_cmp(&b.values).expect("finite grid values"))
    });
    Ok(ExhaustiveResult {
        minimizers,
        evaluations: total,
        bits_per_institution,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CascadeOutcome {
    pub values: Vec<f64>,
    pub converged: bool,
    pub steps: usize,
}

/// Iterates `v ← C̃ (I - C)⁻¹ (D p - b(v))` from `v0`.
///
/// The iterate is a fixed point as soon as its failure pattern equals the
/// one that produced it, so convergence is detected without an extra
/// application; `steps` counts map applications.
pub fn cascade_iteration(
    net: &FinancialNetwork,
    fail: &FailureSpec,
    v0: &[f64],
    max_iter: usize,
) -> Result<CascadeOutcome> {
    check_lengths(net, fail, v0)?;
    if max_iter == 0 {
        return Err(param("max_iter must be at least 1"));
    }
    let map = ValueMap::new(net)?;
    let mut b = failure_vector(fail, v0);
    let mut v = v0.to_vec();
    for step in 1..=max_iter {
        v = map.apply(&b).iter().copied().collect();
        let next = failure_vector(fail, &v);
        if next == b {
            return Ok(CascadeOutcome {
                values: v,
                converged: true,
                steps: step,
            });
        }
        b = next;
    }
    Ok(CascadeOutcome {
        values: v,
        converged: false,
        steps: max_iter,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrashReport {
    /// Institutions with `v_after < v_c` (0-based).
    pub failed: BTreeSet<usize>,
    pub drops: Vec<f64>,
    pub relative_drops: Vec<f64>,
    /// Some institution failed although its price-only linear value was at
    /// or above its threshold, i.e. the failure came through the network.
    pub cascade: bool,
}

/// Compares market values before and after a shock. `price_only` is the
/// linear equilibrium under the shocked prices; without it `cascade` is
/// always false.
pub fn crash_report(
    v_before: &[f64],
    v_after: &[f64],
    price_only: Option<&[f64]>,
    fail: &FailureSpec,
) -> Result<CrashReport> {
    let n = v_before.len();
    fail.check(n)?;
    if v_after.len() != n || price_only.is_some_and(|p| p.len() != n) {
        return Err(param("crash report vectors must have equal lengths"));
    }
    let failed: BTreeSet<usize> = (0..n).filter(|&i| v_after[i] < fail.critical_values[i]).collect();
    let drops: Vec<f64> = v_after.iter().zip(v_before).map(|(a, b)| a - b).collect();
    let relative_drops = drops
        .iter()
        .zip(v_before)
        .map(|(d, b)| if *b != 0.0 { d / b } else { 0.0 })
        .collect();
    let cascade = price_only.is_some_and(|p| failed.iter().any(|&i| p[i] >= fail.critical_values[i]));
    Ok(CrashReport {
        failed,
        drops,
        relative_drops,
        cascade,
    })
}

/// Thresholds and failure sizes as fractions of a pre-shock linear state:
/// `v_c = critical_fraction · v`, `β = failure_fraction · V`.
pub fn failure_spec_from_state(state: &MarketState, critical_fraction: f64, failure_fraction: f64) -> Result<FailureSpec> {
    for (name, f) in [("critical_fraction", critical_fraction), ("failure_fraction", failure_fraction)] {
        if !(0.0..=1.0).contains(&f) {
            return Err(param(format!("{name} must lie in [0, 1], got {f}")));
        }
    }
    FailureSpec::new(
        state.market_values.iter().map(|v| critical_fraction * v).collect(),
        state.equity_values.iter().map(|v| failure_fraction * v).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::generate_random_network;

    /// n = 1, C̃ = 1, C = 0, D p = 10, v_c = 8, β = 5.
    fn scalar() -> (FinancialNetwork, FailureSpec) {
        let net = FinancialNetwork::new(
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::zeros(1, 1),
            DVector::from_element(1, 1.0),
            DVector::from_element(1, 10.0),
        )
        .unwrap();
        (net, FailureSpec::new(vec![8.0], vec![5.0]).unwrap())
    }

    fn two_node() -> FinancialNetwork {
        FinancialNetwork::new(
            DMatrix::from_row_slice(2, 1, &[0.5, 0.5]),
            DMatrix::from_row_slice(2, 2, &[0.0, 0.3, 0.2, 0.0]),
            DVector::from_vec(vec![0.8, 0.7]),
            DVector::from_vec(vec![10.0]),
        )
        .unwrap()
    }

    #[test]
    fn identity_case_is_direct_holdings() {
        let mut net = generate_random_network(4, 6, 1.0, 5.0, 3).unwrap();
        net.cross_holdings.fill(0.0);
        net.self_ownership.fill(1.0);
        let s = linear_equilibrium(&net).unwrap();
        let dp = net.asset_values();
        for i in 0..4 {
            assert!((s.market_values[i] - dp[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn two_by_two_against_hand_inverse() {
        // (I - C)⁻¹ = 1/(1 - 0.06) [[1, 0.3], [0.2, 1]], D p = (5, 5)
        let det = 1.0 - 0.3 * 0.2;
        let v_eq = [(5.0 + 0.3 * 5.0) / det, (0.2 * 5.0 + 5.0) / det];
        let expected = [0.8 * v_eq[0], 0.7 * v_eq[1]];
        let s = linear_equilibrium(&two_node()).unwrap();
        for i in 0..2 {
            assert!((s.equity_values[i] - v_eq[i]).abs() < 1e-12);
            assert!((s.market_values[i] - expected[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn heaviside_boundary() {
        let f = FailureSpec::new(vec![5.0, 7.0], vec![2.0, 3.0]).unwrap();
        assert_eq!(failure_vector(&f, &[6.0, 8.0]), vec![0.0, 0.0]);
        assert_eq!(failure_vector(&f, &[4.0, 6.0]), vec![2.0, 3.0]);
        assert_eq!(failure_vector(&f, &[5.0, 7.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn scalar_objective_has_two_equilibria() {
        let (net, f) = scalar();
        assert_eq!(objective(&net, &f, &[10.0]).unwrap(), 0.0);
        assert_eq!(objective(&net, &f, &[5.0]).unwrap(), 0.0);
        assert_eq!(objective(&net, &f, &[7.0]).unwrap(), 4.0);
    }

    #[test]
    fn objective_vanishes_at_linear_equilibrium_without_failure() {
        let net = generate_random_network(5, 8, 10.0, 40.0, 11).unwrap();
        let s = linear_equilibrium(&net).unwrap();
        let obj = objective(&net, &FailureSpec::inert(5), &s.market_values).unwrap();
        let dp2 = net.asset_values().norm_squared();
        assert!(obj <= 1e-12 * (1.0 + dp2), "{obj}");
    }

    #[test]
    fn scalar_grid_finds_both_fixed_points() {
        let (net, f) = scalar();
        let r = exhaustive_equilibrium(&net, &f, 5, ObjectiveKind::Exact).unwrap();
        let vs: Vec<f64> = r.minimizers.iter().map(|m| m.values[0]).collect();
        assert_eq!(vs, vec![5.0, 10.0]);
        assert_eq!(r.best_objective(), 0.0);
        assert_eq!(r.evaluations, 32);
        assert_eq!(r.headline().values, vec![5.0]);
    }

    #[test]
    fn grid_oracle_matches_independent_rescan() {
        let net = generate_random_network(3, 7, 5.0, 20.0, 5).unwrap();
        let s = linear_equilibrium(&net).unwrap();
        let f = failure_spec_from_state(&s, 0.8, 0.3).unwrap();
        let r = exhaustive_equilibrium(&net, &f, 5, ObjectiveKind::Exact).unwrap();
        let mut best = f64::INFINITY;
        for a in 0..32 {
            for b in 0..32 {
                for c in 0..32 {
                    let v = [a as f64, b as f64, c as f64];
                    best = best.min(objective(&net, &f, &v).unwrap());
                }
            }
        }
        assert_eq!(r.best_objective(), best);
        for m in &r.minimizers {
            assert!((objective(&net, &f, &m.values).unwrap() - best).abs() <= tie_tolerance(best));
        }
    }

    #[test]
    fn grid_cap_is_enforced() {
        let net = generate_random_network(3, 4, 1.0, 2.0, 0).unwrap();
        let err = exhaustive_equilibrium_capped(&net, &FailureSpec::inert(3), 5, ObjectiveKind::Exact, 1000).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
    }

    #[test]
    fn grid_without_failure_rounds_linear_solution() {
        // pick a network whose linear solution is integral: C = 0, C̃ = 1
        let net = FinancialNetwork::new(
            DMatrix::from_row_slice(2, 2, &[0.25, 0.5, 0.75, 0.5]),
            DMatrix::zeros(2, 2),
            DVector::from_element(2, 1.0),
            DVector::from_vec(vec![8.0, 6.0]),
        )
        .unwrap();
        let r = exhaustive_equilibrium(&net, &FailureSpec::inert(2), 4, ObjectiveKind::Exact).unwrap();
        assert_eq!(r.minimizers.len(), 1);
        assert_eq!(r.minimizers[0].values, vec![5.0, 9.0]);
    }

    #[test]
    fn cascade_converges() {
        let (net, f) = scalar();
        let hi = cascade_iteration(&net, &f, &[10.0], 10).unwrap();
        assert_eq!((hi.values.clone(), hi.converged), (vec![10.0], true));
        let lo = cascade_iteration(&net, &f, &[0.0], 10).unwrap();
        assert_eq!((lo.values.clone(), lo.converged), (vec![5.0], true));

        let net = generate_random_network(4, 5, 1.0, 9.0, 8).unwrap();
        let out = cascade_iteration(&net, &FailureSpec::inert(4), &[0.0; 4], 5).unwrap();
        assert!(out.converged);
        assert_eq!(out.steps, 1);
        let lin = linear_equilibrium(&net).unwrap();
        for (a, b) in out.values.iter().zip(&lin.market_values) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn crash_reports() {
        let before = [21.18, 23.33, 30.83];
        let f = FailureSpec::new(before.iter().map(|v| 0.8 * v).collect(), vec![1.0; 3]).unwrap();
        let same = crash_report(&before, &before, None, &f).unwrap();
        assert!(same.failed.is_empty());
        assert!(same.drops.iter().all(|&d| d == 0.0));

        let after = [21.0, 15.0, 30.0];
        let r = crash_report(&before, &after, Some(&[21.0, 19.0, 30.0]), &f).unwrap();
        assert_eq!(r.failed, BTreeSet::from([1]));
        assert!(r.cascade);

        let zero = crash_report(&before, &[0.0; 3], None, &f).unwrap();
        assert_eq!(zero.failed, BTreeSet::from([0, 1, 2]));
        assert!((zero.relative_drops[0] + 1.0).abs() < 1e-15);
    }
}
