//! Full-batch training of the two-layer GCN with Adam and a proximal term.
//!
//! `cargo run --example train_gcn`

use subfed::gcn::{
    accuracy, adam_step, forward, loss_and_grads, normalize_masked_adjacency, AdamState, GcnParams,
};
use subfed::graph::{generate_sbm, make_splits, SplitRatios, SplitTag};

fn main() -> subfed::Result<()> {
    let g = generate_sbm(3, 40, 0.25, 0.02, 8, 3, 11)?;
    let split = make_splits(&g, SplitRatios::default(), 11)?;
    let train = split.mask(SplitTag::Train);
    let test = split.mask(SplitTag::Test);
    let adj = normalize_masked_adjacency(g.edges(), &vec![1.0; g.num_edges()], g.num_nodes())?;

    let mut params = GcnParams::glorot(g.feature_dim(), 32, g.num_classes(), 5);
    let anchor = params.clone();
    let mut adam = AdamState::new(&params);
    for epoch in 0..=100 {
        let (loss, grads) = loss_and_grads(
            &params,
            &adj,
            g.features().view(),
            g.labels(),
            &train,
            &anchor,
            0.001,
        )?;
        if epoch % 20 == 0 {
            let logits = forward(&params, &adj, g.features().view())?.logits;
            println!(
                "epoch {epoch:>3} loss {loss:.4} train {:.3} test {:.3}",
                accuracy(logits.view(), g.labels(), &train)?,
                accuracy(logits.view(), g.labels(), &test)?
            );
        }
        adam_step(&mut params, &grads, &mut adam, 0.01)?;
    }
    println!(
        "distance from start: {:.4}",
        params.sq_distance(&anchor).sqrt()
    );
    Ok(())
}
