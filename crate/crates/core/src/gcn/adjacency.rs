use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Square sparse matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseAdj {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseAdj {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            cols: (0..n).collect(),
            vals: vec![1.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `(col, value)` entries of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    /// `self · m`.
    pub fn matmul(&self, m: ArrayView2<'_, f64>) -> Array2<f64> {
        assert_eq!(m.nrows(), self.n, "sparse matmul shape mismatch");
        let mut out = Array2::zeros((self.n, m.ncols()));
        for (i, mut out_row) in out.rows_mut().into_iter().enumerate() {
            for (j, a) in self.row(i) {
                out_row.scaled_add(a, &m.row(j));
            }
        }
        out
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut d = Array2::zeros((self.n, self.n));
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[[i, j]] = v;
            }
        }
        d
    }
}

/// `D̃^{-1/2} (S ⊙ A + I) D̃^{-1/2}` with `D̃` the degree of `S ⊙ A + I`.
///
/// `weights[e]` applies to both directions of `edges[e]`. Zero-weight edges
/// produce no stored entries.
pub fn normalize_masked_adjacency(
    edges: &[(usize, usize)],
    weights: &[f64],
    num_nodes: usize,
) -> Result<SparseAdj> {
    if edges.len() != weights.len() {
        return Err(Error::invalid(format!(
            "{} mask weights for {} edges",
            weights.len(),
            edges.len()
        )));
    }
    let mut degree = vec![1.0; num_nodes];
    for (&(u, v), &w) in edges.iter().zip(weights) {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::invalid(format!(
                "mask weight {w} on edge ({u}, {v})"
            )));
        }
        if u >= num_nodes || v >= num_nodes {
            return Err(Error::invalid(format!("edge ({u}, {v}) out of range")));
        }
        degree[u] += w;
        degree[v] += w;
    }
    let inv_sqrt: Vec<f64> = degree.iter().map(|d| 1.0 / d.sqrt()).collect();

    let mut rows: Vec<Vec<(usize, f64)>> =
        (0..num_nodes).map(|i| vec![(i, 1.0 / degree[i])]).collect();
    for (&(u, v), &w) in edges.iter().zip(weights) {
        if w > 0.0 {
            let a = w * inv_sqrt[u] * inv_sqrt[v];
            rows[u].push((v, a));
            rows[v].push((u, a));
        }
    }
    let mut row_ptr = Vec::with_capacity(num_nodes + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    for mut r in rows {
        r.sort_by_key(|&(c, _)| c);
        for (c, v) in r {
            cols.push(c);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }
    Ok(SparseAdj {
        n: num_nodes,
        row_ptr,
        cols,
        vals,
    })
}
