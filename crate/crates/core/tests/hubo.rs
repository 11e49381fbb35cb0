use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use crashnet::equilibrium::{failure_spec_from_state, linear_equilibrium};
use crashnet::hubo::{build_hubo, decode_values, encode_values, BitSpec, ThetaPolynomial};
use crashnet::network::{generate_random_network, perturb_prices, FailureSpec, FinancialNetwork};

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `P_l(x)` from the explicit sum `2^{-l} Σ_k (-1)^k C(l,k) C(2l-2k, l) x^{l-2k}`.
fn legendre_explicit(l: u64, x: f64) -> f64 {
    let s: f64 = (0..=l / 2)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(l, k) * binomial(2 * l - 2 * k, l) * x.powi((l - 2 * k) as i32)
        })
        .sum();
    s / 2f64.powi(l as i32)
}

fn step_series(r: u64, x: f64) -> f64 {
    0.5 + (1..=r)
        .map(|l| (legendre_explicit(l - 1, 0.0) + legendre_explicit(l + 1, 0.0)) * legendre_explicit(l, x))
        .sum::<f64>()
}

/// `Σ_i (v_i - u_i + (M b̃)_i)²` straight from the matrices.
fn direct_objective(net: &FinancialNetwork, fail: Option<&FailureSpec>, r: u64, v_max: f64, v: &[f64]) -> f64 {
    let n = net.n_institutions();
    let leontief = DMatrix::identity(n, n) - &net.cross_holdings;
    let m = DMatrix::from_diagonal(&net.self_ownership) * leontief.try_inverse().unwrap();
    let u = &m * (&net.ownership * &net.prices);
    let b = DVector::from_iterator(
        n,
        (0..n).map(|j| match fail {
            Some(f) => f.failure_magnitudes[j] * (1.0 - step_series(r, (v[j] - f.critical_values[j]) / v_max)),
            None => 0.0,
        }),
    );
    let mb = &m * b;
    (0..n).map(|i| (v[i] - u[i] + mb[i]).powi(2)).sum()
}

fn instance(n: usize, seed: u64) -> (FinancialNetwork, FailureSpec) {
    let net = generate_random_network(n, 4, 1.0, 10.0, seed).unwrap();
    let fail = failure_spec_from_state(&linear_equilibrium(&net).unwrap(), 0.8, 0.3).unwrap();
    let post = perturb_prices(&net, &BTreeSet::from([(seed % 4) as usize])).unwrap();
    (post, fail)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn polynomial_matches_direct_objective(
        n in 1usize..3,
        bits in 2u32..4,
        r in prop::sample::select(vec![1usize, 3]),
        seed: u64,
        raw in prop::collection::vec(any::<bool>(), 6),
    ) {
        let (net, fail) = instance(n, seed);
        let spec = BitSpec::integer(bits).unwrap();
        let (poly, stats) = build_hubo(&net, Some(&fail), &spec, Some(r)).unwrap();
        prop_assert_eq!(stats.variables, n * bits as usize);
        prop_assert!(stats.degree <= 2 * r);
        let x = &raw[..n * bits as usize];
        let v = decode_values(&spec, n, x).unwrap();
        let direct = direct_objective(&net, Some(&fail), r as u64, spec.v_max(), &v);
        let got = poly.evaluate(x).unwrap();
        prop_assert!((got - direct).abs() <= 1e-7 * direct.abs().max(1.0), "{} vs {}", got, direct);
    }

    #[test]
    fn linear_polynomial_matches_direct_objective(n in 1usize..4, seed: u64, raw in prop::collection::vec(any::<bool>(), 12)) {
        let net = generate_random_network(n, 3, 1.0, 10.0, seed).unwrap();
        let spec = BitSpec::integer(4).unwrap();
        let (poly, stats) = build_hubo(&net, None, &spec, None).unwrap();
        prop_assert_eq!(stats.degree, 2);
        prop_assert_eq!(stats.terms_by_order.get(2).copied().unwrap_or(0), n * 6);
        let x = &raw[..n * 4];
        let direct = direct_objective(&net, None, 1, spec.v_max(), &decode_values(&spec, n, x).unwrap());
        prop_assert!((poly.evaluate(x).unwrap() - direct).abs() <= 1e-8 * direct.max(1.0));
    }

    #[test]
    fn encode_decode_round_trip(alpha_min in -3i32..1, width in 0i32..6, raw in prop::collection::vec(any::<bool>(), 18)) {
        let spec = BitSpec::new(alpha_min, alpha_min + width).unwrap();
        let k = spec.bit_count();
        let x = &raw[..3 * k];
        let values = decode_values(&spec, 3, x).unwrap();
        prop_assert_eq!(encode_values(&spec, &values).unwrap(), x.to_vec());
    }
}

#[test]
fn step_series_agrees_with_recurrence() {
    for r in (1..=15).step_by(2) {
        let t = ThetaPolynomial::new(r).unwrap();
        for k in 0..=40 {
            let x = -1.0 + 0.05 * k as f64;
            assert!((t.eval(x).unwrap() - step_series(r as u64, x)).abs() < 1e-12);
        }
    }
    assert!(ThetaPolynomial::new(4).is_err());
}

#[test]
fn decoding_uses_power_of_two_weights() {
    let spec = BitSpec::integer(5).unwrap();
    let v = decode_values(&spec, 2, &[true, false, true, false, false, false, false, false, false, true]).unwrap();
    assert_eq!(v, vec![5.0, 16.0]);
    assert!(encode_values(&spec, &[32.0]).is_err());
    assert_eq!(encode_values(&spec, &[2.5]).unwrap(), encode_values(&spec, &[2.0]).unwrap());
}
