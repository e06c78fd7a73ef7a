//! End-to-end experiment: CUFL against the baselines on a two-cluster graph.
//!
//! `cargo run --release --example run_cufl [out_dir]`

use subfed::fedsim::{run_experiment, run_to_dir, ExperimentConfig, Method, RunOptions, Summary};

fn main() -> subfed::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.fed.rounds = 30;

    for method in Method::ALL {
        cfg.method = method;
        let result = run_experiment(&cfg, &RunOptions::default(), None)?;
        let s = Summary::from_result(&cfg, &result);
        let test = s.test_acc.map_or(f64::NAN, |m| m.mean);
        let gap = s.generalization_gap.map_or(f64::NAN, |m| m.mean);
        println!("{method:>8}: test {test:.4}  train-test gap {gap:+.4}");
    }

    if let Some(dir) = std::env::args().nth(1) {
        cfg.method = Method::Cufl;
        run_to_dir(&cfg, &RunOptions::default(), dir.as_ref(), None)?;
        println!("CUFL artifacts written to {dir}");
    }
    Ok(())
}
