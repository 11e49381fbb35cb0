//! Expands the smoothed equilibrium objective into a binary polynomial and
//! spot-checks it against the direct formula.

use std::collections::BTreeSet;

use crashnet::equilibrium::{failure_spec_from_state, linear_equilibrium, smoothed_objective};
use crashnet::hubo::{build_hubo, encode_values, BitSpec, ThetaPolynomial};
use crashnet::network::{generate_random_network, perturb_prices};

fn main() -> crashnet::Result<()> {
    let net = generate_random_network(3, 7, 1.0, 10.0, 0)?;
    let fail = failure_spec_from_state(&linear_equilibrium(&net)?, 0.8, 0.3)?;
    let post = perturb_prices(&net, &BTreeSet::from([0, 3]))?;
    let spec = BitSpec::integer(5)?;

    for r in [1, 3] {
        let (poly, stats) = build_hubo(&post, Some(&fail), &spec, Some(r))?;
        println!("r = {r}: {} terms, degree {}, by order {:?}", stats.terms, stats.degree, stats.terms_by_order);
        let theta = ThetaPolynomial::new(r)?;
        for v in [[0.0, 0.0, 0.0], [7.0, 12.0, 20.0], [31.0, 31.0, 31.0]] {
            let hubo = poly.evaluate(&encode_values(&spec, &v)?)?;
            let direct = smoothed_objective(&post, &fail, &theta, spec.v_max(), &v)?;
            println!("  v = {v:?}: polynomial {hubo:.6}, direct {direct:.6}");
        }
    }
    Ok(())
}
