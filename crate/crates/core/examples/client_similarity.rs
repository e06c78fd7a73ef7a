//! Server side: indicators on a shared reference graph, CKA similarity,
//! softmax aggregation and the adaptive scaling factor.
//!
//! `cargo run --example client_similarity`

use subfed::gcn::GcnParams;
use subfed::ies::{EmbeddingSource, PacingSchedule};
use subfed::server::{
    aggregate, build_indicator, similarity_matrix, tau_step, AdaptiveTau, IndicatorOptions,
    ReferenceGraph, ReferenceSpec, TauState,
};

fn main() -> subfed::Result<()> {
    let d_x = 8;
    let graph = ReferenceSpec::default().generate(d_x, 1)?;
    let mut reference = ReferenceGraph::new(graph, 4, 0.5, PacingSchedule::new(1.5, 100)?)?;

    // two pairs of near-identical models
    let mut models = Vec::new();
    for base in [10, 20] {
        let p = GcnParams::glorot(d_x, 16, 2, base);
        let mut twin = p.clone();
        twin.add_scaled(0.05, &GcnParams::glorot(d_x, 16, 2, base + 1));
        models.push(p);
        models.push(twin);
    }

    let opts = IndicatorOptions {
        gamma: 0.001,
        lr: 0.00001,
        steps: 10,
        prune_frac: 0.3,
        source: EmbeddingSource::Hidden,
    };
    let mut indicators = Vec::new();
    for (k, m) in models.iter().enumerate() {
        indicators.push(build_indicator(&mut reference, m, k, 1, opts)?);
    }
    let sim = similarity_matrix(&indicators, 1)?;
    println!("similarity:\n{sim:.4}");

    let refs: Vec<&GcnParams> = models.iter().collect();
    for tau in [0.0, 5.0, 10.0] {
        let (_, alpha) = aggregate(&sim.row(0).to_vec(), tau, &refs)?;
        let shown: Vec<String> = alpha.iter().map(|a| format!("{a:.3}")).collect();
        println!("tau {tau:>4}: client 0 weights [{}]", shown.join(", "));
    }

    let mut state = TauState::new(&AdaptiveTau::default());
    let perf = [
        0.50, 0.55, 0.60, 0.62, 0.63, 0.64, 0.60, 0.58, 0.57, 0.55, 0.54, 0.53,
    ];
    for p in perf {
        state = tau_step(&state, p);
        print!("{:.3} ", state.tau);
    }
    println!("<- adaptive tau trace");
    Ok(())
}
