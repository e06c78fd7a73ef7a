//! Cluster-aware metrics from a run: same-cluster similarity mass per round
//! and bin-match ratios of reference reconstructions.
//!
//! `cargo run --release --example analyze_run`

use subfed::fedsim::{
    bin_match_ratio, read_reconstruction, reference_recon_file, run_to_dir, ExperimentConfig,
    PartitionSpec, RunOptions,
};

fn main() -> subfed::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.fed.rounds = 20;
    cfg.partition = PartitionSpec::Overlap {
        base_parts: 2,
        copies: 2,
        frac: 0.5,
    };
    let dir = std::env::temp_dir().join("subfed-example-run");
    let result = run_to_dir(&cfg, &RunOptions::default(), &dir, None)?;

    println!("clusters {:?}", result.clusters);
    println!("round  same-cluster proportion");
    for r in result.records.iter().step_by(4) {
        println!(
            "{:>5}  {:.4}",
            r.round,
            r.same_cluster_proportion.unwrap_or(f64::NAN)
        );
    }

    let first = read_reconstruction(&dir.join(reference_recon_file(1, 0)))?;
    let last = read_reconstruction(&dir.join(reference_recon_file(20, 0)))?;
    let ratios = bin_match_ratio(&first, &last, 5)?;
    println!("bin-match ratios, client 0, round 1 vs 20: {ratios:.3?}");
    Ok(())
}
