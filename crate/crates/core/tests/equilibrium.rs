use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use crashnet::equilibrium::{
    cascade_iteration, crash_report, exhaustive_equilibrium, failure_spec_from_state, linear_equilibrium, objective,
    ObjectiveKind,
};
use crashnet::network::{generate_random_network, perturb_prices, FailureSpec, FinancialNetwork};

fn shocked(n: usize, seed: u64) -> (FinancialNetwork, FinancialNetwork, FailureSpec) {
    let net = generate_random_network(n, 5, 1.0, 10.0, seed).unwrap();
    let fail = failure_spec_from_state(&linear_equilibrium(&net).unwrap(), 0.8, 0.3).unwrap();
    let post = perturb_prices(&net, &BTreeSet::from([(seed % 5) as usize, ((seed + 2) % 5) as usize])).unwrap();
    (net, post, fail)
}

/// Grid minimizers of the exact objective by direct enumeration.
fn brute_force(net: &FinancialNetwork, fail: &FailureSpec, bits: u32) -> (f64, BTreeSet<Vec<u64>>) {
    let n = net.n_institutions();
    let m = DMatrix::from_diagonal(&net.self_ownership)
        * (DMatrix::identity(n, n) - &net.cross_holdings).try_inverse().unwrap();
    let dp = &net.ownership * &net.prices;
    let side = 1u64 << bits;
    let mut all = Vec::new();
    for code in 0..side.pow(n as u32) {
        let v: Vec<u64> = (0..n).map(|i| code / side.pow(i as u32) % side).collect();
        let b = DVector::from_iterator(
            n,
            (0..n).map(|i| if (v[i] as f64) < fail.critical_values[i] { fail.failure_magnitudes[i] } else { 0.0 }),
        );
        let image = &m * (&dp - b);
        let obj: f64 = (0..n).map(|i| (v[i] as f64 - image[i]).powi(2)).sum();
        all.push((obj, v));
    }
    let best = all.iter().map(|a| a.0).fold(f64::INFINITY, f64::min);
    let tol = 1e-9 * best.abs().max(1.0);
    (best, all.into_iter().filter(|a| a.0 <= best + tol).map(|a| a.1).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oracle_matches_brute_force(n in 1usize..4, bits in 2u32..5, seed: u64) {
        let (_, post, fail) = shocked(n, seed);
        let oracle = exhaustive_equilibrium(&post, &fail, bits, ObjectiveKind::Exact).unwrap();
        let (best, set) = brute_force(&post, &fail, bits);
        prop_assert!((oracle.best_objective() - best).abs() <= 1e-9 * best.max(1.0));
        let got: BTreeSet<Vec<u64>> = oracle
            .minimizers
            .iter()
            .map(|g| g.values.iter().map(|&v| v as u64).collect())
            .collect();
        prop_assert_eq!(got, set);
        prop_assert_eq!(oracle.evaluations, 1u64 << (n as u32 * bits));
    }

    #[test]
    fn cascade_reaches_an_equilibrium(n in 1usize..4, seed: u64) {
        let (net, post, fail) = shocked(n, seed);
        let pre: Vec<f64> = linear_equilibrium(&net).unwrap().market_values.to_vec();
        let out = cascade_iteration(&post, &fail, &pre, 100).unwrap();
        prop_assert!(out.converged);
        prop_assert!(out.steps <= n + 1);
        let exact = objective(&post, &fail, &out.values).unwrap();
        prop_assert!(exact <= 1e-18 * pre.iter().map(|v| v * v).sum::<f64>().max(1.0));
        // Values only fall, so the cascade needs at most 5 bits here.
        if out.values.iter().all(|&v| (0.0..=31.0).contains(&v)) {
            let oracle = exhaustive_equilibrium(&post, &fail, 5, ObjectiveKind::Exact).unwrap();
            let rounded: Vec<f64> = out.values.iter().map(|v| v.round()).collect();
            prop_assert!(oracle.best_objective() <= objective(&post, &fail, &rounded).unwrap() + 1e-9);
        }
    }
}

#[test]
fn crash_report_flags_failures_and_cascades() {
    let fail = FailureSpec::new(vec![5.0, 5.0, 5.0], vec![1.0, 1.0, 1.0]).unwrap();
    let before = [10.0, 10.0, 10.0];
    let after = [4.0, 6.0, 3.0];
    let price_only = [4.5, 7.0, 6.0];
    let report = crash_report(&before, &after, Some(&price_only), &fail).unwrap();
    assert_eq!(report.failed, BTreeSet::from([0, 2]));
    assert_eq!(report.drops, vec![-6.0, -4.0, -7.0]);
    assert_eq!(report.relative_drops, vec![-0.6, -0.4, -0.7]);
    assert!(report.cascade);
    assert!(!crash_report(&before, &after, None, &fail).unwrap().cascade);
    assert!(crash_report(&before, &after[..2], None, &fail).is_err());
}

#[test]
fn unshocked_network_is_its_own_equilibrium() {
    let net = generate_random_network(3, 4, 1.0, 10.0, 9).unwrap();
    let state = linear_equilibrium(&net).unwrap();
    let fail = failure_spec_from_state(&state, 0.8, 0.3).unwrap();
    let v: Vec<f64> = state.market_values.to_vec();
    let out = cascade_iteration(&net, &fail, &v, 10).unwrap();
    assert!(out.converged);
    assert_eq!(out.steps, 1);
    assert!(crash_report(&v, &out.values, None, &fail).unwrap().failed.is_empty());
}
