//! Incremental edge selection: a mask that admits easy edges first.
//!
//! `cargo run --example edge_curriculum`

use subfed::gcn::GcnParams;
use subfed::graph::generate_sbm;
use subfed::ies::{
    mask_step, masked_forward, reconstruct, warmup_mask, EmbeddingSource, PacingSchedule,
    WarmupMaskOptions,
};

fn main() -> subfed::Result<()> {
    let rounds = 40;
    let g = generate_sbm(2, 40, 0.2, 0.02, 8, 2, 2)?;
    let params = GcnParams::glorot(g.feature_dim(), 16, 2, 2);
    let pacing = PacingSchedule::new(1.5, rounds)?;
    let opts = WarmupMaskOptions {
        gamma: 0.001,
        lr: 0.0005,
        steps: 10,
        init_value: 0.5,
        source: EmbeddingSource::Hidden,
    };
    let mut mask = warmup_mask(&g, &params, &pacing, opts)?;

    println!("round  lambda  mean weight  weights > 0.5");
    for t in 1..=rounds {
        let lambda = pacing.lambda(t);
        let emb = masked_forward(&g, &params, &mask)?;
        let recon = reconstruct(emb.hidden.view(), g.edges());
        // a larger step than the default so the drift shows within 40 rounds
        mask = mask_step(&mask, &recon, lambda, 0.001, &mask, 0.005, 10)?;
        if t % 5 == 0 {
            let w = mask.weights();
            let mean = w.iter().sum::<f64>() / w.len() as f64;
            let admitted = w.iter().filter(|&&x| x > 0.5).count();
            println!(
                "{t:>5}  {lambda:>6.3}  {mean:>11.4}  {admitted:>6}/{}",
                w.len()
            );
        }
    }
    Ok(())
}
