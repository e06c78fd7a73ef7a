use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;

use super::Graph;
use crate::error::{Error, Result};
use crate::rng::{seeded, SimRng};

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("{name} = {p} outside [0, 1]")));
    }
    Ok(())
}

fn normal_features(rng: &mut SimRng, n: usize, d_x: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, d_x), || rng.sample(StandardNormal))
}

/// Stochastic block model with equal-sized blocks.
///
/// Node `i` belongs to block `i / block_size` and gets label
/// `block % num_classes`. Features are i.i.d. standard normal.
pub fn generate_sbm(
    num_blocks: usize,
    block_size: usize,
    p_in: f64,
    p_cross: f64,
    d_x: usize,
    num_classes: usize,
    seed: u64,
) -> Result<Graph> {
    let n = num_blocks * block_size;
    if n == 0 {
        return Err(Error::invalid("stochastic block model with zero nodes"));
    }
    if num_classes == 0 {
        return Err(Error::invalid("num_classes must be >= 1"));
    }
    check_prob("p_in", p_in)?;
    check_prob("p_cross", p_cross)?;
    let mut rng = seeded(seed);
    let features = normal_features(&mut rng, n, d_x);
    let labels = (0..n).map(|i| (i / block_size) % num_classes).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if u / block_size == v / block_size {
                p_in
            } else {
                p_cross
            };
            if p > 0.0 && rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::new(features, labels, edges, num_classes)
}

/// Erdős–Rényi G(n, p) with uniformly random labels.
pub fn generate_er(
    num_nodes: usize,
    p: f64,
    d_x: usize,
    num_classes: usize,
    seed: u64,
) -> Result<Graph> {
    check_prob("p", p)?;
    if num_classes == 0 {
        return Err(Error::invalid("num_classes must be >= 1"));
    }
    let mut rng = seeded(seed);
    let features = normal_features(&mut rng, num_nodes, d_x);
    let labels = (0..num_nodes)
        .map(|_| rng.random_range(0..num_classes))
        .collect();
    let mut edges = Vec::new();
    for u in 0..num_nodes {
        for v in (u + 1)..num_nodes {
            if p > 0.0 && rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::new(features, labels, edges, num_classes)
}

/// Barabási–Albert preferential attachment.
///
/// Starts from a complete graph on `m + 1` nodes; every later node attaches
/// to `m` distinct existing nodes chosen with probability proportional to
/// degree.
pub fn generate_ba(
    num_nodes: usize,
    m: usize,
    d_x: usize,
    num_classes: usize,
    seed: u64,
) -> Result<Graph> {
    if m == 0 {
        return Err(Error::invalid("m must be >= 1"));
    }
    if num_nodes <= m {
        return Err(Error::invalid(format!(
            "num_nodes ({num_nodes}) must exceed m ({m})"
        )));
    }
    if num_classes == 0 {
        return Err(Error::invalid("num_classes must be >= 1"));
    }
    let mut rng = seeded(seed);
    let features = normal_features(&mut rng, num_nodes, d_x);
    let labels = (0..num_nodes)
        .map(|_| rng.random_range(0..num_classes))
        .collect();

    let mut edges = Vec::new();
    // every endpoint occurrence, so a uniform pick is degree-proportional
    let mut endpoints = Vec::new();
    for u in 0..=m {
        for v in (u + 1)..=m {
            edges.push((u, v));
            endpoints.push(u);
            endpoints.push(v);
        }
    }
    let mut targets = Vec::with_capacity(m);
    for v in (m + 1)..num_nodes {
        targets.clear();
        while targets.len() < m {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((t, v));
            endpoints.push(t);
            endpoints.push(v);
        }
    }
    Graph::new(features, labels, edges, num_classes)
}
