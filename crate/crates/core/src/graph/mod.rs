//! Graph data model plus the generators, partitioners, splitters and CSV
//! directory format built around it.

mod generators;
mod io;
mod louvain;
mod partition;
mod splits;

use ndarray::Array2;

use crate::error::{Error, Result};

pub use generators::{generate_ba, generate_er, generate_sbm};
pub use io::{
    load_graph_dir, load_partition, load_splits, save_graph_dir, save_partition, save_splits,
};
pub use partition::{partition_bisection, partition_louvain_merge, sample_overlap_clients};
pub use splits::{make_splits, NodeSplit, SplitRatios, SplitTag};

/// Simple undirected graph with dense node features and class labels.
///
/// Edges are stored once as `(u, v)` with `u < v`, sorted and deduplicated.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    features: Array2<f64>,
    labels: Vec<usize>,
    edges: Vec<(usize, usize)>,
    num_classes: usize,
}

impl Graph {
    /// Builds a graph, symmetrizing and deduplicating `edges` and dropping
    /// self-loops.
    pub fn new(
        features: Array2<f64>,
        labels: Vec<usize>,
        edges: impl IntoIterator<Item = (usize, usize)>,
        num_classes: usize,
    ) -> Result<Self> {
        let n = features.nrows();
        if labels.len() != n {
            return Err(Error::invalid(format!(
                "{} labels for {} feature rows",
                labels.len(),
                n
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::invalid(format!(
                "label {bad} outside [0, {num_classes})"
            )));
        }
        let mut canon = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) out of range for {n} nodes"
                )));
            }
            if u != v {
                canon.push((u.min(v), u.max(v)));
            }
        }
        canon.sort_unstable();
        canon.dedup();
        Ok(Self {
            features,
            labels,
            edges: canon,
            num_classes,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.features.nrows()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Neighbor lists, each sorted ascending.
    pub fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_nodes()];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_nodes()];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Subgraph induced by `nodes`; local node `i` is `nodes[i]`.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Result<Graph> {
        let mut local = vec![usize::MAX; self.num_nodes()];
        for (i, &v) in nodes.iter().enumerate() {
            if v >= self.num_nodes() {
                return Err(Error::invalid(format!("node {v} out of range")));
            }
            if local[v] != usize::MAX {
                return Err(Error::invalid(format!("node {v} listed twice")));
            }
            local[v] = i;
        }
        let features = self.features.select(ndarray::Axis(0), nodes);
        let labels = nodes.iter().map(|&v| self.labels[v]).collect();
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v)| local[u] != usize::MAX && local[v] != usize::MAX)
            .map(|&(u, v)| (local[u], local[v]));
        Graph::new(features, labels, edges, self.num_classes)
    }
}

/// Assignment of global nodes to clients.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// Client of each global node. For overlapping partitions this is the
    /// lowest client holding the node; `None` means the node is dropped.
    pub assignment: Vec<Option<usize>>,
    pub num_parts: usize,
    pub overlapping: bool,
    /// Sorted global node ids held by each client.
    pub client_nodes: Vec<Vec<usize>>,
    /// Base part each client was sampled from (overlapping sampling only).
    pub client_group: Option<Vec<usize>>,
}

impl Partition {
    /// Non-overlapping partition from a per-node assignment.
    pub fn from_assignment(assignment: Vec<Option<usize>>, num_parts: usize) -> Result<Self> {
        let mut client_nodes = vec![Vec::new(); num_parts];
        for (node, part) in assignment.iter().enumerate() {
            if let Some(p) = *part {
                if p >= num_parts {
                    return Err(Error::invalid(format!(
                        "node {node} assigned to part {p} >= {num_parts}"
                    )));
                }
                client_nodes[p].push(node);
            }
        }
        Ok(Self {
            assignment,
            num_parts,
            overlapping: false,
            client_nodes,
            client_group: None,
        })
    }

    /// Builds a partition from explicit client node lists.
    pub fn from_client_lists(
        num_nodes: usize,
        mut client_nodes: Vec<Vec<usize>>,
        overlapping: bool,
    ) -> Result<Self> {
        let mut assignment = vec![None; num_nodes];
        for (client, nodes) in client_nodes.iter_mut().enumerate() {
            nodes.sort_unstable();
            nodes.dedup();
            for &v in nodes.iter() {
                if v >= num_nodes {
                    return Err(Error::invalid(format!("node {v} out of range")));
                }
                match assignment[v] {
                    None => assignment[v] = Some(client),
                    Some(_) if overlapping => {}
                    Some(other) => {
                        return Err(Error::invalid(format!(
                        "node {v} in clients {other} and {client} of a non-overlapping partition"
                    )))
                    }
                }
            }
        }
        Ok(Self {
            assignment,
            num_parts: client_nodes.len(),
            overlapping,
            client_nodes,
            client_group: None,
        })
    }

    pub fn part_sizes(&self) -> Vec<usize> {
        self.client_nodes.iter().map(Vec::len).collect()
    }

    /// Number of global edges whose endpoints sit in different parts.
    pub fn edge_cut(&self, g: &Graph) -> usize {
        g.edges()
            .iter()
            .filter(|&&(u, v)| self.assignment[u] != self.assignment[v])
            .count()
    }

    /// Induced subgraph of every client.
    pub fn client_subgraphs(&self, g: &Graph) -> Result<Vec<Graph>> {
        self.client_nodes
            .iter()
            .map(|nodes| g.induced_subgraph(nodes))
            .collect()
    }
}
