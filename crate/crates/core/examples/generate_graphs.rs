//! Random graph generators and the CSV graph directory format.
//!
//! `cargo run --example generate_graphs`

use subfed::graph::{generate_ba, generate_er, generate_sbm, load_graph_dir, save_graph_dir};

fn main() -> subfed::Result<()> {
    let sbm = generate_sbm(5, 100, 0.1, 0.0, 16, 5, 7)?;
    let er = generate_er(100, 0.05, 16, 2, 7)?;
    let ba = generate_ba(100, 2, 16, 2, 7)?;

    for (name, g) in [("sbm", &sbm), ("er", &er), ("ba", &ba)] {
        let degrees = g.degrees();
        let max = degrees.iter().max().copied().unwrap_or(0);
        println!(
            "{name:>3}: {} nodes, {} edges, max degree {max}",
            g.num_nodes(),
            g.num_edges()
        );
    }

    // no SBM edge may cross blocks when p_cross = 0
    let crossing = sbm
        .edges()
        .iter()
        .filter(|&&(u, v)| u / 100 != v / 100)
        .count();
    println!("sbm cross-block edges: {crossing}");

    let dir = std::env::temp_dir().join("subfed-example-graph");
    save_graph_dir(&sbm, &dir)?;
    let back = load_graph_dir(&dir)?;
    println!(
        "saved to {} and reloaded identical: {}",
        dir.display(),
        back == sbm
    );
    Ok(())
}
