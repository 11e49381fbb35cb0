//! Solves the linear model twice: directly, and as a 70-variable QUBO whose
//! blocks are minimized one institution at a time.

use crashnet::equilibrium::linear_equilibrium;
use crashnet::hubo::{build_hubo, decode_values, BitSpec};
use crashnet::network::generate_random_network;
use crashnet::solver::{exhaustive_solve, Qubo};

fn main() -> crashnet::Result<()> {
    let net = generate_random_network(10, 10, 1.0, 10.0, 42)?;
    let state = linear_equilibrium(&net)?;

    let spec = BitSpec::integer(7)?;
    let (poly, stats) = build_hubo(&net, None, &spec, None)?;
    println!("{} variables, terms by order {:?}", stats.variables, stats.terms_by_order);

    // Without failures the objective separates by institution.
    let q = Qubo::from_polynomial(&poly)?;
    let mut x = vec![false; q.size];
    for i in 0..10 {
        let block: Vec<usize> = (i * 7..(i + 1) * 7).collect();
        let best = exhaustive_solve(&q.clamp(&block, &x))?;
        for (&v, &b) in block.iter().zip(&best.best_sample().assignment) {
            x[v] = b;
        }
    }
    let decoded = decode_values(&spec, 10, &x)?;
    println!("institution  linear   qubo");
    for (i, (v, d)) in state.market_values.iter().zip(&decoded).enumerate() {
        println!("{i:>11}  {v:>6.2}  {d:>5}");
    }
    Ok(())
}
