//! Server-side similarity estimation and personalized aggregation.
//!
//! Every client model is run on the same random reference graph. The server
//! keeps one edge mask per client on that graph and optimizes it with the
//! same objective the clients use locally, so the mask records which
//! reference edges that model reconstructs well. The pruned masks
//! ("indicators") are compared with linear CKA and turned into per-client
//! softmax aggregation weights.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gcn::GcnParams;
use crate::graph::{generate_ba, generate_er, generate_sbm, Graph};
use crate::ies::{
    mask_step, masked_forward, reconstruct, EdgeMask, EmbeddingSource, PacingSchedule,
    Reconstruction,
};

/// Random graph family used as the shared reference input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ReferenceSpec {
    Sbm {
        blocks: usize,
        block_size: usize,
        p_in: f64,
        p_cross: f64,
    },
    Er {
        nodes: usize,
        p: f64,
    },
    Ba {
        nodes: usize,
        m: usize,
    },
}

impl Default for ReferenceSpec {
    fn default() -> Self {
        ReferenceSpec::Sbm {
            blocks: 5,
            block_size: 100,
            p_in: 0.1,
            p_cross: 0.0,
        }
    }
}

impl ReferenceSpec {
    /// Generates the reference graph with `d_x`-dimensional N(0, 1) features.
    pub fn generate(&self, d_x: usize, seed: u64) -> Result<Graph> {
        match *self {
            ReferenceSpec::Sbm {
                blocks,
                block_size,
                p_in,
                p_cross,
            } => generate_sbm(blocks, block_size, p_in, p_cross, d_x, 1, seed),
            ReferenceSpec::Er { nodes, p } => generate_er(nodes, p, d_x, 1, seed),
            ReferenceSpec::Ba { nodes, m } => generate_ba(nodes, m, d_x, 1, seed),
        }
    }
}

/// The shared random graph plus one persistent mask per client.
#[derive(Debug, Clone)]
pub struct ReferenceGraph {
    pub graph: Graph,
    pub masks: Vec<EdgeMask>,
    pub pacing: PacingSchedule,
}

impl ReferenceGraph {
    pub fn new(
        graph: Graph,
        num_clients: usize,
        init_value: f64,
        pacing: PacingSchedule,
    ) -> Result<Self> {
        let mask = EdgeMask::uniform(graph.num_edges(), init_value)?;
        Ok(Self {
            masks: vec![mask; num_clients],
            graph,
            pacing,
        })
    }

    /// Reconstruction of the reference graph by one client's model under
    /// that client's current mask.
    pub fn reconstruction(
        &self,
        params: &GcnParams,
        client: usize,
        source: EmbeddingSource,
    ) -> Result<Reconstruction> {
        let mask = self
            .masks
            .get(client)
            .ok_or_else(|| Error::invalid(format!("no reference mask for client {client}")))?;
        let emb = masked_forward(&self.graph, params, mask)?;
        Ok(reconstruct(source.select(&emb), self.graph.edges()))
    }
}

/// Pruned, flattened reference mask of one client.
#[derive(Debug, Clone, PartialEq)]
pub struct Indicator {
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct IndicatorOptions {
    pub gamma: f64,
    pub lr: f64,
    pub steps: usize,
    pub prune_frac: f64,
    pub source: EmbeddingSource,
}

/// Advances client `client`'s reference mask for `round` and returns its
/// indicator.
pub fn build_indicator(
    reference: &mut ReferenceGraph,
    params: &GcnParams,
    client: usize,
    round: usize,
    opts: IndicatorOptions,
) -> Result<Indicator> {
    let lambda = reference.pacing.lambda(round);
    let ReferenceGraph { graph, masks, .. } = reference;
    let mask = masks
        .get_mut(client)
        .ok_or_else(|| Error::invalid(format!("no reference mask for client {client}")))?;
    advance_reference_mask(graph, mask, params, lambda, opts).map(|(ind, _)| ind)
}

/// One client's share of [`build_indicator`], usable across clients in
/// parallel. Also returns the reconstruction the mask step consumed.
pub fn advance_reference_mask(
    graph: &Graph,
    mask: &mut EdgeMask,
    params: &GcnParams,
    lambda: f64,
    opts: IndicatorOptions,
) -> Result<(Indicator, Reconstruction)> {
    if params.input_dim() != graph.feature_dim() {
        return Err(Error::invalid(format!(
            "model expects {} input features, reference graph has {}",
            params.input_dim(),
            graph.feature_dim()
        )));
    }
    let emb = masked_forward(graph, params, mask)?;
    let recon = reconstruct(opts.source.select(&emb), graph.edges());
    *mask = mask_step(mask, &recon, lambda, opts.gamma, mask, opts.lr, opts.steps)?;
    Ok((ext_vectorize(mask, opts.prune_frac)?, recon))
}

/// Number of entries `ext` zeroes out of `len`.
pub fn pruned_count(len: usize, prune_frac: f64) -> usize {
    // the small offset keeps e.g. 0.57 * 100 from flooring to 56
    ((prune_frac * len as f64 + 1e-9).floor() as usize).min(len)
}

/// Flattens a mask and zeroes its `⌊prune_frac · |E|⌋` smallest weights;
/// among equal weights the lower edge index is pruned first.
pub fn ext_vectorize(mask: &EdgeMask, prune_frac: f64) -> Result<Indicator> {
    if !(0.0..1.0).contains(&prune_frac) {
        return Err(Error::invalid(format!(
            "prune fraction {prune_frac} outside [0, 1)"
        )));
    }
    let mut values = mask.weights().to_vec();
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    for &e in order.iter().take(pruned_count(values.len(), prune_frac)) {
        values[e] = 0.0;
    }
    Ok(Indicator { values })
}

/// Linear CKA of two vectors, `(u·v)² / (‖u‖² ‖v‖²)`.
pub fn linear_cka(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::invalid(format!(
            "indicator lengths differ: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    let uv: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let uu: f64 = u.iter().map(|a| a * a).sum();
    let vv: f64 = v.iter().map(|b| b * b).sum();
    if uu == 0.0 || vv == 0.0 {
        return Err(Error::invalid("linear CKA of a zero vector"));
    }
    Ok((uv * uv / (uu * vv)).clamp(0.0, 1.0))
}

/// Pairwise CKA; errors name the first all-zero indicator.
pub fn similarity_matrix(indicators: &[Indicator], round: usize) -> Result<Array2<f64>> {
    let k = indicators.len();
    if k == 0 {
        return Err(Error::invalid("similarity of zero clients"));
    }
    if let Some(client) = indicators
        .iter()
        .position(|ind| ind.values.iter().all(|&x| x == 0.0))
    {
        return Err(Error::ZeroIndicator { client, round });
    }
    let mut sim = Array2::zeros((k, k));
    for i in 0..k {
        sim[[i, i]] = 1.0;
        for j in (i + 1)..k {
            let s = linear_cka(&indicators[i].values, &indicators[j].values)?;
            sim[[i, j]] = s;
            sim[[j, i]] = s;
        }
    }
    Ok(sim)
}

/// `softmax(τ · sims)`, shifted by the maximum.
pub fn softmax_weights(sims: &[f64], tau: f64) -> Result<Vec<f64>> {
    if !tau.is_finite() {
        return Err(Error::invalid(format!(
            "scaling factor {tau} is not finite"
        )));
    }
    if sims.is_empty() {
        return Err(Error::invalid("softmax over zero clients"));
    }
    let scaled: Vec<f64> = sims.iter().map(|s| tau * s).collect();
    let max = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scaled.iter().map(|x| (x - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / total).collect())
}

/// Personalized mixture `Σ_n α_n · params[n]` with `α = softmax(τ · sim_row)`.
pub fn aggregate(
    sim_row: &[f64],
    tau: f64,
    all_params: &[&GcnParams],
) -> Result<(GcnParams, Vec<f64>)> {
    if sim_row.len() != all_params.len() {
        return Err(Error::invalid(format!(
            "{} similarities for {} clients",
            sim_row.len(),
            all_params.len()
        )));
    }
    for (client, p) in all_params.iter().enumerate() {
        if let Some(name) = p.first_non_finite() {
            return Err(Error::NonFinite(format!(
                "tensor {name} of client {client}"
            )));
        }
    }
    let alpha = softmax_weights(sim_row, tau)?;
    let mixed = GcnParams::weighted_sum(all_params, &alpha)?;
    Ok((mixed, alpha))
}

/// Adaptive-τ settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveTau {
    pub init: f64,
    pub patience: usize,
    pub rho: f64,
    pub min: f64,
    pub max: f64,
    /// Rounds between scheduler updates.
    pub interval: usize,
}

impl Default for AdaptiveTau {
    fn default() -> Self {
        Self {
            init: 5.0,
            patience: 5,
            rho: 1.25,
            min: 3.0,
            max: 10.0,
            interval: 1,
        }
    }
}

/// Greedy per-client τ scheduler state.
#[derive(Debug, Clone, PartialEq)]
pub struct TauState {
    pub tau: f64,
    /// Update direction, ±1.
    pub direction: i32,
    pub r_good: usize,
    pub r_bad: usize,
    pub patience: usize,
    pub rho: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    /// `None` until the first observation, which counts as an improvement.
    pub last_perf: Option<f64>,
}

impl TauState {
    pub fn new(cfg: &AdaptiveTau) -> Self {
        Self {
            tau: cfg.init.clamp(cfg.min, cfg.max),
            direction: 1,
            r_good: 0,
            r_bad: 0,
            patience: cfg.patience,
            rho: cfg.rho,
            tau_min: cfg.min,
            tau_max: cfg.max,
            last_perf: None,
        }
    }
}

/// One scheduler update with the latest performance `perf`.
pub fn tau_step(state: &TauState, perf: f64) -> TauState {
    let mut s = state.clone();
    if s.last_perf.is_none_or(|prev| perf >= prev) {
        s.r_good += 1;
        s.r_bad = 0;
    } else {
        s.r_bad += 1;
        s.r_good = 0;
    }
    let factor = |dir: i32| if dir > 0 { s.rho } else { 1.0 / s.rho };
    let proposed = if s.r_good > s.patience {
        s.r_good = 0;
        factor(s.direction) * s.tau
    } else if s.r_bad > s.patience {
        s.direction = -s.direction;
        s.r_bad = 0;
        factor(s.direction) * s.tau
    } else {
        s.tau
    };
    s.tau = if proposed <= s.tau_min {
        s.tau_min
    } else if proposed > s.tau_max {
        s.tau_max
    } else {
        proposed
    };
    s.last_perf = Some(perf);
    s
}
