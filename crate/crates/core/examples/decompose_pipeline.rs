//! The full chain on a three-institution network: HUBO, quadratization,
//! decomposition with 20 reads, decoding and the crash report.

use crashnet::cli::{run_pipeline, Perturbation, PipelineConfig};

fn main() -> crashnet::Result<()> {
    let config = PipelineConfig {
        perturbation: Perturbation::Assets { zeroed: vec![1, 4] },
        ..Default::default()
    };
    let out = std::env::temp_dir().join("crashnet_example_pipeline");
    let report = run_pipeline(&config, &out, None, true)?;

    println!("hubo: {} terms by order {:?}", report.hubo_stats.terms, report.hubo_stats.terms_by_order);
    println!(
        "qubo: {} logical, {} ancillas, {} couplers",
        report.reduction_stats.logical, report.reduction_stats.ancillas, report.reduction_stats.couplers
    );
    println!("before     {:.2?}", report.network.values_before);
    println!("after      {:?} (objective {:.4})", report.equilibrium.values, report.equilibrium.objective);
    println!("majority   {:?}", report.equilibrium.majority_values);
    if let Some(o) = &report.oracle {
        println!("oracle     {:?} (objective {:.4}, gap {:.2e})", o.minimizers[0], o.best_objective, o.gap);
    }
    println!("failed {:?}; artifacts in {}", report.crash_report.failed, out.display());
    Ok(())
}
