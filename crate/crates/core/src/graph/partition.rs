use std::collections::VecDeque;

use rand::seq::{index, SliceRandom};
use rand::Rng;

use super::louvain::louvain_communities;
use super::{Graph, Partition};
use crate::error::{Error, Result};
use crate::rng::{seeded, SimRng};

const REFINE_PASSES: usize = 8;
const SWAP_CANDIDATES: usize = 24;

/// Recursive edge-cut bisection into `k` balanced parts.
///
/// Each split grows one side by BFS from a pseudo-peripheral node to its
/// target size, then improves the cut with greedy Kernighan–Lin pair swaps,
/// which keep side sizes fixed. Part sizes differ from `n / k` by at most
/// the depth of the recursion.
pub fn partition_bisection(g: &Graph, k: usize, seed: u64) -> Result<Partition> {
    let n = g.num_nodes();
    if k == 0 {
        return Err(Error::invalid("number of parts must be >= 1"));
    }
    if k > n {
        return Err(Error::invalid(format!("{k} parts requested for {n} nodes")));
    }
    let adj = g.adjacency_lists();
    let mut rng = seeded(seed);
    let mut assignment = vec![None; n];
    let nodes: Vec<usize> = (0..n).collect();
    let mut next_part = 0;
    recurse(&adj, &nodes, k, &mut rng, &mut assignment, &mut next_part);
    Partition::from_assignment(assignment, k)
}

fn recurse(
    adj: &[Vec<usize>],
    nodes: &[usize],
    k: usize,
    rng: &mut SimRng,
    assignment: &mut [Option<usize>],
    next_part: &mut usize,
) {
    if k == 1 {
        for &v in nodes {
            assignment[v] = Some(*next_part);
        }
        *next_part += 1;
        return;
    }
    let k_left = k / 2;
    let target = ((nodes.len() * k_left) as f64 / k as f64).round() as usize;
    let target = target.clamp(k_left, nodes.len() - (k - k_left));
    let (left, right) = bisect(adj, nodes, target, rng);
    recurse(adj, &left, k_left, rng, assignment, next_part);
    recurse(adj, &right, k - k_left, rng, assignment, next_part);
}

/// Splits `nodes` into a side of exactly `target` nodes and the rest.
pub(crate) fn bisect(
    adj: &[Vec<usize>],
    nodes: &[usize],
    target: usize,
    rng: &mut SimRng,
) -> (Vec<usize>, Vec<usize>) {
    let m = nodes.len();
    // local index of each member, usize::MAX for non-members
    let mut local = vec![usize::MAX; adj.len()];
    for (i, &v) in nodes.iter().enumerate() {
        local[v] = i;
    }
    let local_adj: Vec<Vec<usize>> = nodes
        .iter()
        .map(|&v| {
            adj[v]
                .iter()
                .filter_map(|&w| (local[w] != usize::MAX).then_some(local[w]))
                .collect()
        })
        .collect();

    let start = rng.random_range(0..m);
    let start = farthest(&local_adj, start);
    let mut in_left = vec![false; m];
    let mut taken = 0;
    let mut visited = vec![false; m];
    let mut queue = VecDeque::new();
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    let mut restart = order.into_iter();
    queue.push_back(start);
    visited[start] = true;
    while taken < target {
        let v = match queue.pop_front() {
            Some(v) => v,
            None => {
                // component exhausted: continue from an unvisited node
                let Some(v) = restart.by_ref().find(|&v| !visited[v]) else {
                    break;
                };
                visited[v] = true;
                v
            }
        };
        in_left[v] = true;
        taken += 1;
        for &w in &local_adj[v] {
            if !visited[w] {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }

    refine(&local_adj, &mut in_left);

    let mut left = Vec::with_capacity(target);
    let mut right = Vec::with_capacity(m - target);
    for (i, &v) in nodes.iter().enumerate() {
        if in_left[i] {
            left.push(v);
        } else {
            right.push(v);
        }
    }
    (left, right)
}

/// Last node reached by a BFS from `start` (a pseudo-peripheral node).
fn farthest(adj: &[Vec<usize>], start: usize) -> usize {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    let mut last = start;
    while let Some(v) = queue.pop_front() {
        last = v;
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    last
}

/// Greedy Kernighan–Lin refinement with size-preserving swaps.
fn refine(adj: &[Vec<usize>], side: &mut [bool]) {
    let m = side.len();
    let gain_of = |side: &[bool], v: usize| -> i64 {
        adj[v]
            .iter()
            .map(|&w| if side[w] != side[v] { 1 } else { -1 })
            .sum()
    };
    for _ in 0..REFINE_PASSES {
        let mut gain: Vec<i64> = (0..m).map(|v| gain_of(side, v)).collect();
        let mut locked = vec![false; m];
        let mut improved = false;
        loop {
            let top = |want: bool, gain: &[i64], locked: &[bool]| -> Vec<usize> {
                let mut c: Vec<usize> = (0..m).filter(|&v| side[v] == want && !locked[v]).collect();
                c.sort_by(|&a, &b| gain[b].cmp(&gain[a]).then(a.cmp(&b)));
                c.truncate(SWAP_CANDIDATES);
                c
            };
            let left = top(true, &gain, &locked);
            let right = top(false, &gain, &locked);
            let mut best: Option<(i64, usize, usize)> = None;
            for &a in &left {
                for &b in &right {
                    let shared = if adj[a].binary_search(&b).is_ok() {
                        2
                    } else {
                        0
                    };
                    let g = gain[a] + gain[b] - shared;
                    if best.is_none_or(|(bg, _, _)| g > bg) {
                        best = Some((g, a, b));
                    }
                }
            }
            let Some((g, a, b)) = best else { break };
            if g <= 0 {
                break;
            }
            side[a] = !side[a];
            side[b] = !side[b];
            locked[a] = true;
            locked[b] = true;
            improved = true;
            for &v in adj[a].iter().chain(&adj[b]).chain([&a, &b]) {
                gain[v] = gain_of(side, v);
            }
        }
        if !improved {
            break;
        }
    }
}

/// Louvain communities randomly merged (or split) down to exactly `k` parts.
///
/// Merging always joins the two smallest parts, with ties broken by a seeded
/// shuffle; when Louvain yields fewer than `k` communities the largest part
/// is bisected until `k` remain.
pub fn partition_louvain_merge(g: &Graph, k: usize, seed: u64) -> Result<Partition> {
    let n = g.num_nodes();
    if k == 0 {
        return Err(Error::invalid("number of parts must be >= 1"));
    }
    if k > n {
        return Err(Error::invalid(format!("{k} parts requested for {n} nodes")));
    }
    let mut rng = seeded(seed);
    let community = louvain_communities(g, &mut rng);
    let num_comm = community.iter().max().map_or(0, |&c| c + 1);
    let mut parts: Vec<Vec<usize>> = vec![Vec::new(); num_comm];
    for (v, &c) in community.iter().enumerate() {
        parts[c].push(v);
    }
    parts.retain(|p| !p.is_empty());

    while parts.len() > k {
        parts.shuffle(&mut rng);
        parts.sort_by_key(Vec::len);
        let smallest = parts.remove(0);
        parts[0].extend(smallest);
    }
    if parts.len() < k {
        log::warn!(
            "louvain found {} communities for {k} parts; bisecting the largest",
            parts.len()
        );
        let adj = g.adjacency_lists();
        while parts.len() < k {
            let (idx, _) = parts
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(&a.0)))
                .expect("at least one part");
            let big = parts.swap_remove(idx);
            let (left, right) = bisect(&adj, &big, big.len() / 2, &mut rng);
            parts.push(left);
            parts.push(right);
        }
    }
    for p in &mut parts {
        p.sort_unstable();
    }
    // order parts by their smallest node for a canonical numbering
    parts.sort_by_key(|p| p[0]);
    let mut assignment = vec![None; n];
    for (c, p) in parts.iter().enumerate() {
        for &v in p {
            assignment[v] = Some(c);
        }
    }
    Partition::from_assignment(assignment, k)
}

/// Overlapping clients sampled from a bisection partition.
///
/// Client `p * copies_per_part + c` holds `ceil(frac * |part p|)` nodes drawn
/// without replacement from base part `p`.
pub fn sample_overlap_clients(
    g: &Graph,
    base_parts: usize,
    copies_per_part: usize,
    frac: f64,
    seed: u64,
) -> Result<Partition> {
    if !(frac > 0.0 && frac <= 1.0) {
        return Err(Error::invalid(format!("frac = {frac} outside (0, 1]")));
    }
    if copies_per_part == 0 {
        return Err(Error::invalid("copies_per_part must be >= 1"));
    }
    let base = partition_bisection(g, base_parts, seed)?;
    let mut rng = seeded(crate::rng::mix64(seed));
    let mut lists = Vec::with_capacity(base_parts * copies_per_part);
    let mut groups = Vec::with_capacity(base_parts * copies_per_part);
    for (p, part) in base.client_nodes.iter().enumerate() {
        let size = ((frac * part.len() as f64).ceil() as usize).min(part.len());
        for _ in 0..copies_per_part {
            let mut picked: Vec<usize> = index::sample(&mut rng, part.len(), size)
                .into_iter()
                .map(|i| part[i])
                .collect();
            picked.sort_unstable();
            lists.push(picked);
            groups.push(p);
        }
    }
    let mut partition = Partition::from_client_lists(g.num_nodes(), lists, true)?;
    partition.client_group = Some(groups);
    Ok(partition)
}
