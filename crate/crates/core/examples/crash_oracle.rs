//! Shocks a three-institution network, follows the failure cascade and
//! compares it with the exhaustive grid oracle.

use std::collections::BTreeSet;

use crashnet::equilibrium::{
    cascade_iteration, crash_report, exhaustive_equilibrium, failure_spec_from_state, linear_equilibrium,
    ObjectiveKind,
};
use crashnet::network::{generate_random_network, perturb_prices};

fn main() -> crashnet::Result<()> {
    let net = generate_random_network(3, 7, 1.0, 10.0, 3)?;
    let pre = linear_equilibrium(&net)?;
    let fail = failure_spec_from_state(&pre, 0.8, 0.3)?;
    let post = perturb_prices(&net, &BTreeSet::from([2, 4]))?;
    let price_only = linear_equilibrium(&post)?;

    let cascade = cascade_iteration(&post, &fail, &pre.market_values, 100)?;
    println!("before   {:.2?}", pre.market_values);
    println!("thresh   {:.2?}", fail.critical_values);
    println!("prices   {:.2?}", price_only.market_values);
    println!("cascade  {:.2?} after {} steps", cascade.values, cascade.steps);

    let oracle = exhaustive_equilibrium(&post, &fail, 5, ObjectiveKind::Exact)?;
    println!("grid minimizers ({} evaluations):", oracle.evaluations);
    for m in &oracle.minimizers {
        println!("  {:?} objective {:.4}", m.values, m.objective);
    }

    let report = crash_report(&pre.market_values, &cascade.values, Some(&price_only.market_values), &fail)?;
    println!("failed {:?}, cascade through the network: {}", report.failed, report.cascade);
    Ok(())
}
