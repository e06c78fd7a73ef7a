//! Splitting one graph into client subgraphs.
//!
//! `cargo run --example partition_graph`

use subfed::graph::{
    generate_sbm, make_splits, partition_bisection, partition_louvain_merge,
    sample_overlap_clients, SplitRatios, SplitTag,
};

fn main() -> subfed::Result<()> {
    let g = generate_sbm(4, 50, 0.2, 0.01, 8, 4, 3)?;
    println!(
        "global graph: {} nodes, {} edges",
        g.num_nodes(),
        g.num_edges()
    );

    let bis = partition_bisection(&g, 4, 1)?;
    println!(
        "bisection   sizes {:?} edge cut {}",
        bis.part_sizes(),
        bis.edge_cut(&g)
    );

    let louv = partition_louvain_merge(&g, 4, 1)?;
    println!(
        "louvain     sizes {:?} edge cut {}",
        louv.part_sizes(),
        louv.edge_cut(&g)
    );

    let over = sample_overlap_clients(&g, 2, 3, 0.5, 1)?;
    println!(
        "overlapping sizes {:?} base parts {:?}",
        over.part_sizes(),
        over.client_group.as_deref().unwrap_or_default()
    );

    for (k, sub) in bis.client_subgraphs(&g)?.iter().enumerate() {
        let split = make_splits(sub, SplitRatios::default(), k as u64)?;
        println!(
            "client {k}: {} nodes {} edges, train/val/test = {}/{}/{}",
            sub.num_nodes(),
            sub.num_edges(),
            split.count(SplitTag::Train),
            split.count(SplitTag::Val),
            split.count(SplitTag::Test)
        );
    }
    Ok(())
}
