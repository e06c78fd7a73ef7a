//! Incremental edge selection.
//!
//! Each edge carries a learnable weight in `[0, 1]`. An edge is "easy" when
//! the cosine similarity of its endpoint embeddings is close to 1, i.e. its
//! reconstruction residual `r = |1 − cos(h_u, h_v)|` is small. Mask weights
//! follow gradient descent on
//!
//! ```text
//! Σ_e S[e] · (r_e − λ) + γ/2 · Σ_e (S[e] − anchor[e])²
//! ```
//!
//! so edges with `r_e < λ` grow and harder ones shrink. The threshold λ is
//! raised over the rounds by [`PacingSchedule`].

use std::path::Path;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gcn::{forward, normalize_masked_adjacency, Embeddings, GcnParams};
use crate::graph::Graph;

/// Per-edge weights aligned with a graph's edge list.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMask {
    weights: Vec<f64>,
}

impl EdgeMask {
    pub fn uniform(num_edges: usize, value: f64) -> Result<Self> {
        Self::from_weights(vec![value; num_edges])
    }

    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if let Some(bad) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::invalid(format!("mask weight {bad} outside [0, 1]")));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// `λ(t) = min(ζ·t / R, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacingSchedule {
    zeta: f64,
    rounds: usize,
}

impl PacingSchedule {
    pub fn new(zeta: f64, rounds: usize) -> Result<Self> {
        if !zeta.is_finite() || zeta <= 0.0 {
            return Err(Error::invalid(format!("pacing factor {zeta} must be > 0")));
        }
        if rounds == 0 {
            return Err(Error::invalid("pacing needs at least one round"));
        }
        Ok(Self { zeta, rounds })
    }

    pub fn lambda(&self, t: usize) -> f64 {
        g_lambda(self, t)
    }
}

pub fn g_lambda(sched: &PacingSchedule, t: usize) -> f64 {
    (sched.zeta * t as f64 / sched.rounds as f64).min(1.0)
}

/// Which layer's output feeds the edge reconstruction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingSource {
    #[default]
    Hidden,
    Logits,
}

impl EmbeddingSource {
    pub fn select<'a>(&self, emb: &'a Embeddings) -> ArrayView2<'a, f64> {
        match self {
            EmbeddingSource::Hidden => emb.hidden.view(),
            EmbeddingSource::Logits => emb.logits.view(),
        }
    }
}

/// Cosine similarity of endpoint embeddings for every edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub weights: Vec<f64>,
}

impl Reconstruction {
    /// `|1 − ŵ|` per edge.
    pub fn residuals(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights.iter().map(|w| (1.0 - w).abs())
    }
}

/// Cosine similarity per edge; a zero embedding has similarity 0 with
/// everything.
pub fn reconstruct(embeddings: ArrayView2<'_, f64>, edges: &[(usize, usize)]) -> Reconstruction {
    let sq_norms: Vec<f64> = embeddings.rows().into_iter().map(|r| r.dot(&r)).collect();
    let weights = edges
        .iter()
        .map(|&(u, v)| {
            let denom = (sq_norms[u] * sq_norms[v]).sqrt();
            if denom == 0.0 {
                0.0
            } else {
                (embeddings.row(u).dot(&embeddings.row(v)) / denom).clamp(-1.0, 1.0)
            }
        })
        .collect();
    Reconstruction { weights }
}

fn check_aligned(mask: &EdgeMask, recon: &Reconstruction, anchor: &EdgeMask) -> Result<()> {
    if mask.len() != recon.weights.len() || mask.len() != anchor.len() {
        return Err(Error::invalid(format!(
            "misaligned edge lists: mask {}, reconstruction {}, anchor {}",
            mask.len(),
            recon.weights.len(),
            anchor.len()
        )));
    }
    Ok(())
}

pub fn mask_objective(
    mask: &EdgeMask,
    recon: &Reconstruction,
    lambda: f64,
    gamma: f64,
    anchor: &EdgeMask,
) -> Result<f64> {
    check_aligned(mask, recon, anchor)?;
    let mut linear = 0.0;
    let mut prox = 0.0;
    for ((&s, r), &a) in mask
        .weights
        .iter()
        .zip(recon.residuals())
        .zip(&anchor.weights)
    {
        linear += s * (r - lambda);
        prox += (s - a) * (s - a);
    }
    Ok(linear + 0.5 * gamma * prox)
}

/// `n_steps` projected gradient steps on the mask objective.
pub fn mask_step(
    mask: &EdgeMask,
    recon: &Reconstruction,
    lambda: f64,
    gamma: f64,
    anchor: &EdgeMask,
    lr: f64,
    n_steps: usize,
) -> Result<EdgeMask> {
    check_aligned(mask, recon, anchor)?;
    let mut weights = mask.weights.clone();
    let residuals: Vec<f64> = recon.residuals().collect();
    for _ in 0..n_steps {
        for ((s, &r), &a) in weights.iter_mut().zip(&residuals).zip(&anchor.weights) {
            let grad = (r - lambda) + gamma * (*s - a);
            *s = (*s - lr * grad).clamp(0.0, 1.0);
        }
    }
    Ok(EdgeMask { weights })
}

/// Per-edge adjacency weights of `g` under `mask`.
pub fn apply_mask(g: &Graph, mask: &EdgeMask) -> Result<Vec<f64>> {
    if mask.len() != g.num_edges() {
        return Err(Error::invalid(format!(
            "mask has {} weights for {} edges",
            mask.len(),
            g.num_edges()
        )));
    }
    Ok(mask.weights.clone())
}

/// Embeddings of `g` under `params` with edges weighted by `mask`.
pub fn masked_forward(g: &Graph, params: &GcnParams, mask: &EdgeMask) -> Result<Embeddings> {
    let adj = normalize_masked_adjacency(g.edges(), &apply_mask(g, mask)?, g.num_nodes())?;
    forward(params, &adj, g.features().view())
}

/// Options shared by the mask warm-up.
#[derive(Debug, Clone, Copy)]
pub struct WarmupMaskOptions {
    pub gamma: f64,
    pub lr: f64,
    pub steps: usize,
    pub init_value: f64,
    pub source: EmbeddingSource,
}

/// Initial mask from a pretrained model at `λ = g_λ(1)`.
pub fn warmup_mask(
    g: &Graph,
    pretrained: &GcnParams,
    sched: &PacingSchedule,
    opts: WarmupMaskOptions,
) -> Result<EdgeMask> {
    let init = EdgeMask::uniform(g.num_edges(), opts.init_value)?;
    if opts.steps == 0 {
        return Ok(init);
    }
    let emb = masked_forward(g, pretrained, &init)?;
    let recon = reconstruct(opts.source.select(&emb), g.edges());
    mask_step(
        &init,
        &recon,
        sched.lambda(1),
        opts.gamma,
        &init,
        opts.lr,
        opts.steps,
    )
}

/// Writes `u,v,weight` rows for an edge list.
pub fn write_edge_weights_csv(
    edges: &[(usize, usize)],
    weights: &[f64],
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file);
    w.write_record(["u", "v", "weight"])?;
    for (&(u, v), x) in edges.iter().zip(weights) {
        w.write_record([u.to_string(), v.to_string(), format!("{x:?}")])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads the `weight` column of a `u,v,weight` file.
pub fn read_edge_weights_csv(path: impl AsRef<Path>) -> Result<Vec<((usize, usize), f64)>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let parse = |i: usize| -> Result<&str> {
            rec.get(i).ok_or_else(|| Error::Parse {
                file: path.to_path_buf(),
                line,
                msg: "missing field".into(),
            })
        };
        let bad = |msg: String| Error::Parse {
            file: path.to_path_buf(),
            line,
            msg,
        };
        let u = parse(0)?.parse().map_err(|_| bad("bad u".into()))?;
        let v = parse(1)?.parse().map_err(|_| bad("bad v".into()))?;
        let w = parse(2)?.parse().map_err(|_| bad("bad weight".into()))?;
        out.push(((u, v), w));
    }
    Ok(out)
}
