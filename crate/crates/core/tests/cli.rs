use std::path::Path;

use crashnet::cli::{main_with_args, run_pipeline, NetworkSource, Perturbation, PipelineConfig};
use crashnet::equilibrium::tie_tolerance;
use crashnet::network::{load_network, validate};

fn run(args: &[&str]) -> i32 {
    main_with_args(std::iter::once("crashnet").chain(args.iter().copied()))
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

#[test]
fn generated_network_file_is_valid() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "net.json");
    let code = run(&["generate", "--n", "10", "--m", "15", "--price-min", "10", "--price-max", "40", "--seed", "7", "--out", &out]);
    assert_eq!(code, 0);
    let (net, fail) = load_network(&out).unwrap();
    assert!(validate(&net).is_empty());
    assert_eq!((net.n_institutions(), net.n_assets()), (10, 15));
    assert!(fail.is_none());
}

#[test]
fn staged_commands_chain_together() {
    let dir = tempfile::tempdir().unwrap();
    let (net, hubo, qubo, samples) = (
        path(dir.path(), "net.json"),
        path(dir.path(), "hubo.txt"),
        path(dir.path(), "problem.qubo"),
        path(dir.path(), "samples.json"),
    );
    assert_eq!(run(&["generate", "--n", "2", "--m", "4", "--seed", "3", "--critical-fraction", "0.8", "--failure-fraction", "0.3", "--out", &net]), 0);
    assert_eq!(run(&["equilibrium", "--network", &net, "--zero-assets", "1", "--bits", "4", "--r", "3"]), 0);
    assert_eq!(run(&["hubo", "--network", &net, "--bits", "4", "--r", "3", "--zero-assets", "1", "--out", &hubo]), 0);
    assert_eq!(run(&["reduce", "--hubo", &hubo, "--out", &qubo]), 0);
    assert_eq!(run(&["solve", "--qubo", &qubo, "--logical", "8", "--reads", "4", "--samples", &samples]), 0);
    assert!(std::fs::read_to_string(&samples).unwrap().contains("\"energy\""));
    assert_eq!(run(&["estimate", "--n", "3", "--bits", "5", "--r", "3"]), 0);
}

#[test]
fn exit_codes_follow_error_classes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = path(dir.path(), "missing.json");
    assert_eq!(run(&["equilibrium", "--network", &missing]), 2);
    assert_eq!(run(&["estimate", "--n", "0", "--bits", "5", "--r", "3"]), 2);
    assert_eq!(run(&["pipeline", "--failure-fraction=-1", "--bits", "0", "--out", &path(dir.path(), "p")]), 2);

    let bad = path(dir.path(), "bad.qubo");
    std::fs::write(&bad, "p qubo 0 2 2 1\n0 0 1\n").unwrap();
    assert_eq!(run(&["solve", "--qubo", &bad]), 2);

    let good = path(dir.path(), "good.qubo");
    std::fs::write(&good, "p qubo 0 2 2 1\n0 0 1\n1 1 1\n0 1 -2\n").unwrap();
    assert_eq!(run(&["solve", "--qubo", &good, "--solver", "exhaustive"]), 0);
    assert_eq!(run(&["solve", "--qubo", &good, "--solver", "remote", "--endpoint", "http://127.0.0.1:9"]), 5);
}

fn fast_config() -> PipelineConfig {
    let mut c = PipelineConfig::default();
    c.solver.reads = 8;
    c
}

#[test]
fn normalized_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = fast_config();
    run_pipeline(&config, &dir.path().join("a"), None, true).unwrap();
    run_pipeline(&config, &dir.path().join("b"), None, true).unwrap();
    for name in ["network.json", "network_perturbed.json", "hubo.txt", "problem.qubo", "samples.json", "values.csv", "report.json"] {
        let a = std::fs::read(dir.path().join("a").join(name)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(name)).unwrap();
        assert!(a == b, "{name} differs between runs");
    }
}

#[test]
fn zero_failure_size_gives_rounded_linear_equilibrium() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..4 {
        let mut config = fast_config();
        config.failure_fraction = 0.0;
        config.seed = seed;
        config.perturbation = Perturbation::Random { count: 2, seed };
        let report = run_pipeline(&config, dir.path(), None, true).unwrap();
        let expected: Vec<f64> = report.network.values_price_only.iter().map(|v| v.clamp(0.0, 31.0).round()).collect();
        assert_eq!(report.equilibrium.values, expected, "seed {seed}");
    }
}

#[test]
fn no_shock_means_no_failures_in_the_linear_model() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..5 {
        let mut config = fast_config();
        config.network = NetworkSource::Generate { n: 3, m: 7, price_min: 1.0, price_max: 10.0, seed };
        config.r = None;
        config.perturbation = Perturbation::Assets { zeroed: vec![] };
        let report = run_pipeline(&config, dir.path(), None, true).unwrap();
        assert!(report.crash_report.failed.is_empty(), "seed {seed}");
        assert!(!report.crash_report.cascade);
    }
}

/// The smoothed step charges about half of each failure size near the
/// thresholds, so an unshocked network may still show failures. Those come
/// from the model: the solver sits at the grid optimum.
#[test]
fn unshocked_smoothed_model_is_solved_to_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = fast_config();
    config.perturbation = Perturbation::Assets { zeroed: vec![] };
    let report = run_pipeline(&config, dir.path(), None, true).unwrap();
    assert!(report.oracle.unwrap().solver_optimal);
    assert_eq!(report.network.prices_after, report.network.prices_before);
}

#[test]
fn solver_never_beats_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..5 {
        let mut config = fast_config();
        config.seed = seed;
        config.perturbation = Perturbation::Random { count: 2, seed };
        let report = run_pipeline(&config, dir.path(), None, true).unwrap();
        let oracle = report.oracle.expect("grid fits under the cap");
        assert!(oracle.gap >= -tie_tolerance(oracle.best_objective), "seed {seed}: gap {}", oracle.gap);
        assert_eq!(oracle.evaluations, 1 << 15);
    }
}
