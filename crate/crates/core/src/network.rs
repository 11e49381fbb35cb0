//! Cross-holding financial networks: institutions own fractions of assets
//! (`ownership`, n×m) and fractions of each other (`cross_holdings`, n×n, zero
//! diagonal), keep a self-owned fraction of themselves (`self_ownership`), and
//! the assets carry `prices`.
//!
//! Networks are plain values. [`generate_random_network`] draws one from a
//! seeded ChaCha8 stream, so a seed reproduces the same network on every
//! platform.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::numfmt;

/// Tolerance for the stochastic column constraints.
pub const COLUMN_SUM_TOL: f64 = 1e-9;

/// Reciprocal condition number below which `I - C` is treated as singular.
pub const MIN_RCOND: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct FinancialNetwork {
    pub ownership: DMatrix<f64>,
    pub cross_holdings: DMatrix<f64>,
    pub self_ownership: DVector<f64>,
    pub prices: DVector<f64>,
}

/// Panic nonlinearity: institution `i` fails when its market value drops
/// below `critical_values[i]`, losing `failure_magnitudes[i]` of equity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureSpec {
    pub critical_values: Vec<f64>,
    pub failure_magnitudes: Vec<f64>,
}

impl FailureSpec {
    pub fn new(critical_values: Vec<f64>, failure_magnitudes: Vec<f64>) -> Result<Self> {
        let spec = Self {
            critical_values,
            failure_magnitudes,
        };
        spec.check(spec.critical_values.len())?;
        Ok(spec)
    }

    /// A spec that never changes anything (all β = 0).
    pub fn inert(n: usize) -> Self {
        Self {
            critical_values: vec![0.0; n],
            failure_magnitudes: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.critical_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.critical_values.is_empty()
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if self.critical_values.len() != n || self.failure_magnitudes.len() != n {
            return Err(param(format!(
                "failure spec lengths ({}, {}) do not match {n} institutions",
                self.critical_values.len(),
                self.failure_magnitudes.len()
            )));
        }
        for (name, v) in [
            ("critical_values", &self.critical_values),
            ("failure_magnitudes", &self.failure_magnitudes),
        ] {
            if let Some(i) = v.iter().position(|x| !x.is_finite() || *x < 0.0) {
                return Err(param(format!("{name}[{i}] = {} must be finite and >= 0", v[i])));
            }
        }
        Ok(())
    }
}

/// One broken network invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub invariant: Invariant,
    /// Offending row, column or entry, when the invariant is indexed.
    pub index: Option<(usize, Option<usize>)>,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Invariant {
    Shape,
    NonNegativeFinite,
    OwnershipColumnSum,
    CrossHoldingDiagonal,
    SelfOwnershipBound,
    CrossHoldingColumnSum,
    Invertible,
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Invariant::Shape => "shape",
            Invariant::NonNegativeFinite => "non-negative finite entries",
            Invariant::OwnershipColumnSum => "ownership column normalization",
            Invariant::CrossHoldingDiagonal => "zero cross-holding diagonal",
            Invariant::SelfOwnershipBound => "self-ownership bound (> 0.5)",
            Invariant::CrossHoldingColumnSum => "cross-holding plus self-ownership column sum",
            Invariant::Invertible => "invertibility of I - C",
        };
        f.write_str(s)
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.invariant)?;
        match self.index {
            Some((i, Some(j))) => write!(f, " at ({i}, {j})")?,
            Some((i, None)) => write!(f, " at {i}")?,
            None => {}
        }
        write!(f, ": {}", self.detail)
    }
}

impl FinancialNetwork {
    /// Builds a network and rejects it unless [`validate`] is clean.
    pub fn new(
        ownership: DMatrix<f64>,
        cross_holdings: DMatrix<f64>,
        self_ownership: DVector<f64>,
        prices: DVector<f64>,
    ) -> Result<Self> {
        let net = Self {
            ownership,
            cross_holdings,
            self_ownership,
            prices,
        };
        let violations = validate(&net);
        if violations.is_empty() {
            Ok(net)
        } else {
            Err(Error::Invalid(violations))
        }
    }

    pub fn n_institutions(&self) -> usize {
        self.ownership.nrows()
    }

    pub fn n_assets(&self) -> usize {
        self.ownership.ncols()
    }

    /// `D p`, the direct asset holdings of each institution.
    pub fn asset_values(&self) -> DVector<f64> {
        &self.ownership * &self.prices
    }

    /// `I - C`.
    pub fn leontief(&self) -> DMatrix<f64> {
        let n = self.n_institutions();
        DMatrix::identity(n, n) - &self.cross_holdings
    }

    pub fn with_prices(&self, prices: DVector<f64>) -> Self {
        Self {
            prices,
            ..self.clone()
        }
    }
}

/// Checks every structural invariant; an empty result means the network is
/// well formed.
pub fn validate(net: &FinancialNetwork) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = net.ownership.nrows();
    let m = net.ownership.ncols();
    let shape = |detail: String| Violation {
        invariant: Invariant::Shape,
        index: None,
        detail,
    };
    if n == 0 || m == 0 {
        out.push(shape(format!("ownership is {n}x{m}; need at least 1x1")));
    }
    if net.cross_holdings.shape() != (n, n) {
        out.push(shape(format!(
            "cross_holdings is {:?}, expected ({n}, {n})",
            net.cross_holdings.shape()
        )));
    }
    if net.self_ownership.len() != n {
        out.push(shape(format!("self_ownership has {} entries, expected {n}", net.self_ownership.len())));
    }
    if net.prices.len() != m {
        out.push(shape(format!("prices has {} entries, expected {m}", net.prices.len())));
    }
    if !out.is_empty() {
        return out;
    }

    let bad = |x: f64| !x.is_finite() || x < 0.0;
    for (name, mat) in [("ownership", &net.ownership), ("cross_holdings", &net.cross_holdings)] {
        for i in 0..mat.nrows() {
            for j in 0..mat.ncols() {
                if bad(mat[(i, j)]) {
                    out.push(Violation {
                        invariant: Invariant::NonNegativeFinite,
                        index: Some((i, Some(j))),
                        detail: format!("{name} entry is {}", mat[(i, j)]),
                    });
                }
            }
        }
    }
    for (name, v) in [("self_ownership", &net.self_ownership), ("prices", &net.prices)] {
        for (i, &x) in v.iter().enumerate() {
            if bad(x) {
                out.push(Violation {
                    invariant: Invariant::NonNegativeFinite,
                    index: Some((i, None)),
                    detail: format!("{name} entry is {x}"),
                });
            }
        }
    }

    for k in 0..m {
        let s = net.ownership.column(k).sum();
        if (s - 1.0).abs() > COLUMN_SUM_TOL {
            out.push(Violation {
                invariant: Invariant::OwnershipColumnSum,
                index: Some((k, None)),
                detail: format!("ownership column {k} sums to {s}"),
            });
        }
    }
    for j in 0..n {
        if net.cross_holdings[(j, j)] != 0.0 {
            out.push(Violation {
                invariant: Invariant::CrossHoldingDiagonal,
                index: Some((j, Some(j))),
                detail: format!("diagonal entry is {}", net.cross_holdings[(j, j)]),
            });
        }
        let own = net.self_ownership[j];
        if !(own > 0.5) {
            out.push(Violation {
                invariant: Invariant::SelfOwnershipBound,
                index: Some((j, None)),
                detail: format!("self_ownership[{j}] = {own}"),
            });
        }
        let s = net.cross_holdings.column(j).sum() + own;
        if (s - 1.0).abs() > COLUMN_SUM_TOL {
            out.push(Violation {
                invariant: Invariant::CrossHoldingColumnSum,
                index: Some((j, None)),
                detail: format!("cross_holdings column {j} plus self_ownership sums to {s}"),
            });
        }
    }

    if out.iter().all(|v| v.invariant != Invariant::NonNegativeFinite) {
        let rcond = reciprocal_condition(&net.leontief());
        if !(rcond > MIN_RCOND) {
            out.push(Violation {
                invariant: Invariant::Invertible,
                index: None,
                detail: format!("reciprocal condition estimate of I - C is {rcond:e}"),
            });
        }
    }
    out
}

/// 1-norm reciprocal condition number `1 / (‖A‖₁ ‖A⁻¹‖₁)`; zero when `A` is
/// singular.
pub fn reciprocal_condition(a: &DMatrix<f64>) -> f64 {
    let norm1 = |m: &DMatrix<f64>| {
        m.column_iter()
            .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    match a.clone().lu().try_inverse() {
        Some(inv) => {
            let denom = norm1(a) * norm1(&inv);
            if denom.is_finite() && denom > 0.0 {
                1.0 / denom
            } else {
                0.0
            }
        }
        None => 0.0,
    }
}

/// Draws a random network.
///
/// Ownership columns are symmetric Dirichlet(1) draws (normalized unit-rate
/// exponentials). Each self-ownership is uniform on (0.5, 1) and the rest of
/// that column, `1 - self_ownership[j]`, is spread over the off-diagonal
/// cross-holdings by a rescaled Dirichlet draw. A single institution owns
/// itself entirely. Prices are uniform on `[price_low, price_high]`.
pub fn generate_random_network(
    n: usize,
    m: usize,
    price_low: f64,
    price_high: f64,
    seed: u64,
) -> Result<FinancialNetwork> {
    if n == 0 || m == 0 {
        return Err(param(format!("need n >= 1 and m >= 1, got n={n}, m={m}")));
    }
    if !(price_low.is_finite() && price_high.is_finite() && 0.0 <= price_low && price_low <= price_high) {
        return Err(param(format!(
            "need 0 <= price_low <= price_high, got [{price_low}, {price_high}]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut ownership = DMatrix::zeros(n, m);
    for k in 0..m {
        let draw = dirichlet(&mut rng, n);
        ownership.column_mut(k).copy_from_slice(&draw);
    }

    let mut cross = DMatrix::zeros(n, n);
    let mut own = DVector::zeros(n);
    for j in 0..n {
        if n == 1 {
            own[j] = 1.0;
            continue;
        }
        let s = loop {
            // open interval: reject the lower endpoint
            let s: f64 = rng.gen_range(0.5..1.0);
            if s > 0.5 {
                break s;
            }
        };
        own[j] = s;
        let draw = dirichlet(&mut rng, n - 1);
        let rest = 1.0 - s;
        let mut off = draw.into_iter();
        for i in (0..n).filter(|&i| i != j) {
            cross[(i, j)] = rest * off.next().expect("n-1 draws");
        }
    }

    let prices = DVector::from_iterator(
        m,
        (0..m).map(|_| price_low + (price_high - price_low) * rng.gen::<f64>()),
    );

    // column sums of C are below 0.5, so the spectral radius is too
    let max_col = (0..n).map(|j| cross.column(j).sum()).fold(0.0, f64::max);
    assert!(max_col < 0.5 + COLUMN_SUM_TOL, "cross-holding column mass {max_col} >= 0.5");

    let net = FinancialNetwork {
        ownership,
        cross_holdings: cross,
        self_ownership: own,
        prices,
    };
    debug_assert!(validate(&net).is_empty(), "{:?}", validate(&net));
    Ok(net)
}

fn dirichlet(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    if k == 0 {
        return Vec::new();
    }
    let draws: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    if total > 0.0 {
        let mut v: Vec<f64> = draws.iter().map(|x| x / total).collect();
        // absorb rounding so the column sums to 1 as closely as possible
        let err = 1.0 - v.iter().sum::<f64>();
        let big = (0..k).max_by(|&a, &b| v[a].total_cmp(&v[b])).expect("k > 0");
        v[big] += err;
        v
    } else {
        vec![1.0 / k as f64; k]
    }
}

/// Copy of `net` with the listed (0-based) asset prices set to zero.
pub fn perturb_prices(net: &FinancialNetwork, zeroed_assets: &BTreeSet<usize>) -> Result<FinancialNetwork> {
    let m = net.n_assets();
    if let Some(&bad) = zeroed_assets.iter().find(|&&k| k >= m) {
        return Err(param(format!("asset index {bad} out of range for {m} assets")));
    }
    let mut prices = net.prices.clone();
    for &k in zeroed_assets {
        prices[k] = 0.0;
    }
    Ok(net.with_prices(prices))
}

/// On-disk network document. Matrices are row-major nested arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub n: usize,
    pub m: usize,
    pub ownership: Vec<Vec<f64>>,
    pub cross_holdings: Vec<Vec<f64>>,
    pub self_ownership: Vec<f64>,
    pub prices: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_spec: Option<FailureSpec>,
}

impl NetworkFile {
    pub fn from_network(net: &FinancialNetwork, failure: Option<&FailureSpec>) -> Self {
        let rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
            m.row_iter().map(|r| r.iter().copied().collect()).collect()
        };
        Self {
            n: net.n_institutions(),
            m: net.n_assets(),
            ownership: rows(&net.ownership),
            cross_holdings: rows(&net.cross_holdings),
            self_ownership: net.self_ownership.iter().copied().collect(),
            prices: net.prices.iter().copied().collect(),
            failure_spec: failure.cloned(),
        }
    }

    /// Shape-checks the document and builds a validated network.
    pub fn into_network(self) -> Result<(FinancialNetwork, Option<FailureSpec>)> {
        let (n, m) = (self.n, self.m);
        let matrix = |name: &str, rows: &[Vec<f64>], nr: usize, nc: usize| -> Result<DMatrix<f64>> {
            if rows.len() != nr {
                let missing = rows.len().min(nr);
                return Err(Error::Parse {
                    line: 0,
                    message: format!("{name}: expected {nr} rows, found {} (row {missing} missing or extra)", rows.len()),
                });
            }
            for (i, r) in rows.iter().enumerate() {
                if r.len() != nc {
                    return Err(Error::Parse {
                        line: 0,
                        message: format!("{name}: row {i} has {} entries, expected {nc}", r.len()),
                    });
                }
            }
            Ok(DMatrix::from_fn(nr, nc, |i, j| rows[i][j]))
        };
        let vector = |name: &str, v: &[f64], len: usize| -> Result<DVector<f64>> {
            if v.len() != len {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("{name}: expected {len} entries, found {}", v.len()),
                });
            }
            Ok(DVector::from_column_slice(v))
        };
        let net = FinancialNetwork::new(
            matrix("ownership", &self.ownership, n, m)?,
            matrix("cross_holdings", &self.cross_holdings, n, n)?,
            vector("self_ownership", &self.self_ownership, n)?,
            vector("prices", &self.prices, m)?,
        )?;
        if let Some(f) = &self.failure_spec {
            f.check(n).map_err(|e| e.with_context("failure_spec"))?;
        }
        Ok((net, self.failure_spec))
    }
}

pub fn network_to_string(net: &FinancialNetwork, failure: Option<&FailureSpec>) -> String {
    numfmt::to_json_string(&NetworkFile::from_network(net, failure))
}

pub fn network_from_str(text: &str) -> Result<(FinancialNetwork, Option<FailureSpec>)> {
    let file: NetworkFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    file.into_network()
}

pub fn save_network(net: &FinancialNetwork, failure: Option<&FailureSpec>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, network_to_string(net, failure))?;
    Ok(())
}

pub fn load_network(path: impl AsRef<Path>) -> Result<(FinancialNetwork, Option<FailureSpec>)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    network_from_str(&text).map_err(|e| e.with_context(path.display().to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

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
    fn single_institution_is_deterministic() {
        for seed in 0..5 {
            let net = generate_random_network(1, 1, 3.0, 9.0, seed).unwrap();
            assert_eq!(net.ownership, DMatrix::from_element(1, 1, 1.0));
            assert_eq!(net.cross_holdings, DMatrix::from_element(1, 1, 0.0));
            assert_eq!(net.self_ownership[0], 1.0);
        }
    }

    #[test]
    fn generated_network_satisfies_invariants() {
        let net = generate_random_network(10, 15, 10.0, 40.0, 2024).unwrap();
        assert!(validate(&net).is_empty());
        for k in 0..15 {
            assert!((net.ownership.column(k).sum() - 1.0).abs() <= 1e-9);
        }
        for j in 0..10 {
            assert!(net.self_ownership[j] > 0.5 && net.self_ownership[j] < 1.0);
        }
        assert!(net.prices.iter().all(|&p| (10.0..=40.0).contains(&p)));
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let a = generate_random_network(3, 7, 5.0, 20.0, 99).unwrap();
        let b = generate_random_network(3, 7, 5.0, 20.0, 99).unwrap();
        assert_eq!(a, b);
        let c = generate_random_network(3, 7, 5.0, 20.0, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn bad_bounds_rejected() {
        assert!(matches!(generate_random_network(0, 3, 1.0, 2.0, 0), Err(Error::Parameter(_))));
        assert!(matches!(generate_random_network(2, 3, 5.0, 2.0, 0), Err(Error::Parameter(_))));
        assert!(matches!(generate_random_network(2, 3, -1.0, 2.0, 0), Err(Error::Parameter(_))));
    }

    #[test]
    fn low_self_ownership_is_one_violation() {
        let mut net = two_node();
        // keep the column constraint intact so only the bound is broken
        net.self_ownership[0] = 0.4;
        net.cross_holdings[(1, 0)] = 0.6;
        let v = validate(&net);
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].invariant, Invariant::SelfOwnershipBound);
        assert_eq!(v[0].index, Some((0, None)));
    }

    #[test]
    fn ownership_column_sum_violation() {
        let mut net = two_node();
        net.ownership[(1, 0)] = 0.4;
        let v = validate(&net);
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].invariant, Invariant::OwnershipColumnSum);
        assert_eq!(v[0].index, Some((0, None)));
    }

    #[test]
    fn perturbation_zeroes_listed_assets() {
        let mut net = generate_random_network(3, 7, 5.0, 20.0, 1).unwrap();
        net.prices = DVector::from_vec(vec![8.43, 14.47, 6.75, 8.09, 19.11, 11.32, 7.19]);
        let p = perturb_prices(&net, &BTreeSet::from([2, 4])).unwrap();
        assert_eq!(p.prices.as_slice(), &[8.43, 14.47, 0.0, 8.09, 0.0, 11.32, 7.19]);
        assert_eq!(p.ownership, net.ownership);
        assert_eq!(perturb_prices(&net, &BTreeSet::new()).unwrap(), net);
        let all = perturb_prices(&net, &(0..7).collect()).unwrap();
        assert!(all.prices.iter().all(|&x| x == 0.0));
        assert_eq!(all.cross_holdings, net.cross_holdings);
        assert!(perturb_prices(&net, &BTreeSet::from([7])).is_err());
    }

    #[test]
    fn negative_price_fails_to_load() {
        let net = two_node();
        let text = network_to_string(&net, None).replace("\"prices\": [\n    10", "\"prices\": [\n    -10");
        let err = network_from_str(&text).unwrap_err();
        assert!(matches!(err, Error::Invalid(ref v) if v[0].invariant == Invariant::NonNegativeFinite), "{err}");
    }

    #[test]
    fn missing_row_names_the_row() {
        let net = two_node();
        let mut file = NetworkFile::from_network(&net, None);
        file.cross_holdings.pop();
        let err = file.into_network().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("cross_holdings") && msg.contains("row 1"), "{msg}");
    }

    #[test]
    fn malformed_json_reports_line() {
        let err = network_from_str("{\n  \"n\": 2,\n  \"m\": oops\n}").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn singular_leontief_detected() {
        let mut net = two_node();
        // I - C singular needs C12*C21 = 1, impossible under the column
        // constraints, so only validate sees this configuration
        net.cross_holdings = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(validate(&net).iter().any(|v| v.invariant == Invariant::Invertible));
    }
}
