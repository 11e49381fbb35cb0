//! Runs every local solver on one random QUBO and compares with exhaustive
//! search.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crashnet::solver::{
    decompose_solve, exhaustive_solve, simulated_annealing, tabu_solve, AnnealSchedule, DecomposeParams, Qubo,
    TabuParams,
};

fn main() -> crashnet::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut q = Qubo::new(18);
    for a in q.linear.iter_mut() {
        *a = rng.gen_range(-1.0..1.0);
    }
    for i in 0..18 {
        for j in i + 1..18 {
            q.add(i, j, rng.gen_range(-1.0..1.0));
        }
    }

    let exact = exhaustive_solve(&q)?;
    println!("exhaustive   {:.6}", exact.best_energy());
    let sa = simulated_annealing(&q, &AnnealSchedule::for_qubo(&q, 1000, 50), 7)?;
    println!("annealing    {:.6} ({} distinct of {} reads)", sa.best_energy(), sa.samples.len(), sa.total_reads());
    let tabu = tabu_solve(&q, &TabuParams { reads: 10, ..TabuParams::for_size(18) }, 7)?;
    println!("tabu         {:.6}", tabu.best_energy());
    let params = DecomposeParams { subproblem_size: 6, ..Default::default() };
    let dec = decompose_solve(&q, &params, 7)?;
    println!("decompose    {:.6} (iterations per read {:?})", dec.best_energy(), dec.metadata.iterations);
    if let Some(summary) = &exact.metadata.energy_summary {
        println!("energy range [{:.3}, {:.3}], histogram {:?}", summary.min, summary.max, summary.histogram);
    }
    Ok(())
}
