//! Greedy modularity optimization (Louvain) on unit-weight graphs.

use rand::seq::SliceRandom;

use super::Graph;
use crate::rng::SimRng;

/// Weighted adjacency; self-loop weight counts internal edges twice.
struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    self_loop: Vec<f64>,
}

impl Level {
    fn degree(&self, v: usize) -> f64 {
        self.self_loop[v] + self.adj[v].iter().map(|&(_, w)| w).sum::<f64>()
    }
}

/// Community id per node, numbered densely from 0.
pub(super) fn louvain_communities(g: &Graph, rng: &mut SimRng) -> Vec<usize> {
    let n = g.num_nodes();
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in g.edges() {
        adj[u].push((v, 1.0));
        adj[v].push((u, 1.0));
    }
    let mut level = Level {
        adj,
        self_loop: vec![0.0; n],
    };
    // node -> current top-level community
    let mut membership: Vec<usize> = (0..n).collect();
    loop {
        let (comm, moved) = one_level(&level, rng);
        if !moved {
            break;
        }
        let (renumbered, count) = renumber(&comm);
        for m in membership.iter_mut() {
            *m = renumbered[*m];
        }
        level = aggregate(&level, &renumbered, count);
    }
    renumber(&membership).0
}

fn one_level(level: &Level, rng: &mut SimRng) -> (Vec<usize>, bool) {
    let n = level.adj.len();
    let degree: Vec<f64> = (0..n).map(|v| level.degree(v)).collect();
    let two_m: f64 = degree.iter().sum();
    let mut comm: Vec<usize> = (0..n).collect();
    if two_m == 0.0 {
        return (comm, false);
    }
    let mut total = degree.clone();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut weight_to = vec![0.0; n];
    let mut touched = Vec::new();
    let mut any_move = false;
    loop {
        let mut moved = false;
        for &v in &order {
            let own = comm[v];
            for &(w, wt) in &level.adj[v] {
                let c = comm[w];
                if weight_to[c] == 0.0 {
                    touched.push(c);
                }
                weight_to[c] += wt;
            }
            total[own] -= degree[v];
            let gain = |c: usize, k_in: f64| k_in - total[c] * degree[v] / two_m;
            let mut best = own;
            let mut best_gain = gain(own, weight_to[own]);
            for &c in &touched {
                let g = gain(c, weight_to[c]);
                if g > best_gain + 1e-12 {
                    best = c;
                    best_gain = g;
                }
            }
            total[best] += degree[v];
            if best != own {
                comm[v] = best;
                moved = true;
                any_move = true;
            }
            for &c in &touched {
                weight_to[c] = 0.0;
            }
            touched.clear();
        }
        if !moved {
            break;
        }
    }
    (comm, any_move)
}

fn renumber(comm: &[usize]) -> (Vec<usize>, usize) {
    let mut map = vec![usize::MAX; comm.len()];
    let mut next = 0;
    let out = comm
        .iter()
        .map(|&c| {
            if map[c] == usize::MAX {
                map[c] = next;
                next += 1;
            }
            map[c]
        })
        .collect();
    (out, next)
}

fn aggregate(level: &Level, comm: &[usize], count: usize) -> Level {
    let mut self_loop = vec![0.0; count];
    let mut weights: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); count];
    for (v, edges) in level.adj.iter().enumerate() {
        let cv = comm[v];
        self_loop[cv] += level.self_loop[v];
        for &(w, wt) in edges {
            let cw = comm[w];
            if cv == cw {
                self_loop[cv] += wt;
            } else {
                *weights[cv].entry(cw).or_insert(0.0) += wt;
            }
        }
    }
    Level {
        adj: weights
            .into_iter()
            .map(|m| m.into_iter().collect())
            .collect(),
        self_loop,
    }
}
