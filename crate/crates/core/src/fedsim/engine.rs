//! Round orchestration: setup, warm-up, local and server stages.

use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;

use super::config::{DatasetSpec, ExperimentConfig, Method, PartitionSpec, TauPolicy};
use super::metrics::same_cluster_weight_proportion;
use super::output::RunWriter;
use crate::error::{Error, Result};
use crate::gcn::{
    accuracy, adam_step, forward, loss_and_grads, normalize_masked_adjacency, AdamState, GcnParams,
    SparseAdj,
};
use crate::graph::{
    generate_ba, generate_er, generate_sbm, load_graph_dir, load_partition, make_splits,
    partition_bisection, partition_louvain_merge, sample_overlap_clients, Graph, NodeSplit,
    Partition, SplitTag,
};
use crate::ies::{
    mask_step, reconstruct, warmup_mask, EdgeMask, EmbeddingSource, PacingSchedule, Reconstruction,
    WarmupMaskOptions,
};
use crate::rng::{derive_seed, stream};
use crate::server::{
    advance_reference_mask, aggregate, similarity_matrix, tau_step, Indicator, IndicatorOptions,
    ReferenceGraph, TauState,
};

/// Everything one client owns.
#[derive(Debug, Clone)]
pub struct ClientState {
    pub id: usize,
    pub graph: Graph,
    pub split: NodeSplit,
    /// Aggregated parameters `W_k` the next local stage starts from.
    pub params: GcnParams,
    /// Parameters after the last local stage.
    pub trained: GcnParams,
    pub mask: EdgeMask,
    pub adam: AdamState,
    pub pacing: PacingSchedule,
    /// Current curriculum threshold.
    pub lambda: f64,
    pub tau_state: Option<TauState>,
    pub rng_seed: u64,
    /// Loss of the last local epoch.
    pub train_loss: f64,
    train_mask: Vec<bool>,
}

impl ClientState {
    pub fn new(
        id: usize,
        graph: Graph,
        split: NodeSplit,
        params: GcnParams,
        pacing: PacingSchedule,
        init_value: f64,
        rng_seed: u64,
    ) -> Result<Self> {
        if split.tags.len() != graph.num_nodes() {
            return Err(Error::invalid(format!(
                "client {id}: split covers {} of {} nodes",
                split.tags.len(),
                graph.num_nodes()
            )));
        }
        let train_mask = split.mask(SplitTag::Train);
        if !train_mask.contains(&true) {
            return Err(Error::invalid(format!("client {id} has no Train nodes")));
        }
        Ok(Self {
            id,
            mask: EdgeMask::uniform(graph.num_edges(), init_value)?,
            adam: AdamState::new(&params),
            trained: params.clone(),
            params,
            lambda: pacing.lambda(1),
            pacing,
            tau_state: None,
            rng_seed,
            train_loss: f64::NAN,
            train_mask,
            graph,
            split,
        })
    }

    /// Normalized adjacency, masked or with unit edge weights.
    pub fn adjacency(&self, masked: bool) -> Result<SparseAdj> {
        let g = &self.graph;
        if masked {
            normalize_masked_adjacency(g.edges(), self.mask.weights(), g.num_nodes())
        } else {
            normalize_masked_adjacency(g.edges(), &vec![1.0; g.num_edges()], g.num_nodes())
        }
    }

    /// Accuracy of `params` on each split.
    pub fn evaluate(&self, params: &GcnParams, masked: bool) -> Result<ClientEval> {
        let adj = self.adjacency(masked)?;
        let emb = forward(params, &adj, self.graph.features().view())?;
        let acc = |tag| {
            let m = self.split.mask(tag);
            if m.contains(&true) {
                accuracy(emb.logits.view(), self.graph.labels(), &m).map(Some)
            } else {
                Ok(None)
            }
        };
        Ok(ClientEval {
            train_acc: acc(SplitTag::Train)?,
            val_acc: acc(SplitTag::Val)?,
            test_acc: acc(SplitTag::Test)?,
        })
    }
}

/// Split accuracies; `None` for an empty split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClientEval {
    pub train_acc: Option<f64>,
    pub val_acc: Option<f64>,
    pub test_acc: Option<f64>,
}

/// Per-client row of a round.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientRound {
    pub client: usize,
    pub train_loss: f64,
    pub eval: ClientEval,
    /// Scaling factor used in this round's aggregation.
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    pub clients: Vec<ClientRound>,
    pub similarity: Option<Array2<f64>>,
    pub alpha: Option<Array2<f64>>,
    pub same_cluster_proportion: Option<f64>,
}

/// Knobs of one local stage.
#[derive(Debug, Clone, Copy)]
pub struct LocalSettings {
    pub epochs: usize,
    pub lr: f64,
    pub beta: f64,
    pub masked: bool,
    pub lr_ies: f64,
    pub gamma: f64,
    pub inner_steps: usize,
    pub source: EmbeddingSource,
}

impl LocalSettings {
    pub fn for_method(cfg: &ExperimentConfig, method: Method) -> Self {
        Self {
            epochs: cfg.fed.epochs,
            lr: cfg.model.lr,
            beta: if method.uses_proximal() {
                cfg.fed.beta
            } else {
                0.0
            },
            masked: method.uses_mask(),
            lr_ies: cfg.ies.lr_train,
            gamma: cfg.ies.gamma,
            inner_steps: cfg.ies.inner_steps,
            source: cfg.ies.source,
        }
    }
}

/// Local training for round `t`: `E` epochs of one Adam step followed by a
/// mask update, then `λ ← g_λ(t + 1)`.
pub fn local_training_stage(state: &mut ClientState, t: usize, s: &LocalSettings) -> Result<()> {
    let anchor = state.params.clone();
    let mut w = state.params.clone();
    let features = state.graph.features().view();
    for _ in 0..s.epochs {
        let adj = state.adjacency(s.masked)?;
        let (loss, grads) = loss_and_grads(
            &w,
            &adj,
            features,
            state.graph.labels(),
            &state.train_mask,
            &anchor,
            s.beta,
        )?;
        adam_step(&mut w, &grads, &mut state.adam, s.lr)
            .map_err(|e| Error::NonFinite(format!("client {} round {t}: {e}", state.id)))?;
        state.train_loss = loss;
        if s.masked {
            let emb = forward(&w, &adj, features)?;
            let recon = reconstruct(s.source.select(&emb), state.graph.edges());
            state.mask = mask_step(
                &state.mask,
                &recon,
                state.lambda,
                s.gamma,
                &state.mask,
                s.lr_ies,
                s.inner_steps,
            )?;
        }
    }
    state.trained = w;
    state.lambda = state.pacing.lambda(t + 1);
    Ok(())
}

/// Result of one server stage.
#[derive(Debug, Clone, Default)]
pub struct ServerOutcome {
    pub similarity: Option<Array2<f64>>,
    pub alpha: Option<Array2<f64>>,
    pub tau: Option<Vec<f64>>,
    /// Reference-graph reconstructions behind this round's indicators.
    pub reconstructions: Option<Vec<Reconstruction>>,
}

/// Node-count-weighted mean of the trained parameters.
pub fn fedavg_params(clients: &[ClientState]) -> Result<GcnParams> {
    let total: usize = clients.iter().map(|c| c.graph.num_nodes()).sum();
    let weights: Vec<f64> = clients
        .iter()
        .map(|c| c.graph.num_nodes() as f64 / total as f64)
        .collect();
    let refs: Vec<&GcnParams> = clients.iter().map(|c| &c.trained).collect();
    for (k, p) in refs.iter().enumerate() {
        if let Some(name) = p.first_non_finite() {
            return Err(Error::NonFinite(format!("tensor {name} of client {k}")));
        }
    }
    GcnParams::weighted_sum(&refs, &weights)
}

/// Server stage of round `t`; writes the next round's `params` of every
/// client.
pub fn server_aggregation_stage(
    clients: &mut [ClientState],
    reference: Option<&mut ReferenceGraph>,
    t: usize,
    cfg: &ExperimentConfig,
) -> Result<ServerOutcome> {
    match cfg.method {
        Method::Local => {
            for c in clients.iter_mut() {
                c.params = c.trained.clone();
            }
            Ok(ServerOutcome::default())
        }
        Method::FedAvg | Method::FedProx | Method::FedAvgCL => {
            let global = fedavg_params(clients)?;
            for c in clients.iter_mut() {
                c.params = global.clone();
            }
            Ok(ServerOutcome::default())
        }
        Method::Cufl => {
            let reference =
                reference.ok_or_else(|| Error::invalid("CUFL needs a reference graph"))?;
            let opts = IndicatorOptions {
                gamma: cfg.ies.gamma,
                lr: cfg.ies.lr_aggr,
                steps: cfg.ies.server_steps(),
                prune_frac: cfg.ies.prune_frac,
                source: cfg.ies.source,
            };
            let lambda = reference.pacing.lambda(t);
            let graph = &reference.graph;
            let results: Vec<(Indicator, Reconstruction)> = reference
                .masks
                .par_iter_mut()
                .zip(clients.par_iter())
                .map(|(mask, c)| advance_reference_mask(graph, mask, &c.trained, lambda, opts))
                .collect::<Result<_>>()?;
            let (indicators, recons): (Vec<_>, Vec<_>) = results.into_iter().unzip();
            let sim = similarity_matrix(&indicators, t)?;
            let taus: Vec<f64> = clients
                .iter()
                .map(|c| match (&c.tau_state, cfg.fed.tau) {
                    (Some(s), _) => s.tau,
                    (None, TauPolicy::Fixed(tau)) => tau,
                    (None, TauPolicy::Keyword(_)) => cfg.fed.adaptive_tau.init,
                })
                .collect();
            let (params, alpha) = aggregate_all(clients, &sim, &taus)?;
            for (c, p) in clients.iter_mut().zip(params) {
                c.params = p;
            }
            Ok(ServerOutcome {
                similarity: Some(sim),
                alpha: Some(alpha),
                tau: Some(taus),
                reconstructions: Some(recons),
            })
        }
    }
}

/// Personalized mixture for every client from a similarity matrix.
pub fn aggregate_all(
    clients: &[ClientState],
    sim: &Array2<f64>,
    taus: &[f64],
) -> Result<(Vec<GcnParams>, Array2<f64>)> {
    let k = clients.len();
    let refs: Vec<&GcnParams> = clients.iter().map(|c| &c.trained).collect();
    let rows: Vec<(GcnParams, Vec<f64>)> = (0..k)
        .into_par_iter()
        .map(|i| aggregate(&sim.row(i).to_vec(), taus[i], &refs))
        .collect::<Result<_>>()?;
    let mut alpha = Array2::zeros((k, k));
    let mut params = Vec::with_capacity(k);
    for (i, (p, a)) in rows.into_iter().enumerate() {
        alpha.row_mut(i).assign(&ndarray::Array1::from(a));
        params.push(p);
    }
    Ok((params, alpha))
}

/// FedProx pre-training followed by mask initialization.
///
/// Returns the warmed global model. GCN weights and optimizer state are
/// restored afterwards when `reset_params` is set.
pub fn warmup(clients: &mut [ClientState], cfg: &ExperimentConfig) -> Result<GcnParams> {
    let Some(first) = clients.first() else {
        return Err(Error::invalid("warm-up with zero clients"));
    };
    let init = first.params.clone();
    let mut global = init.clone();
    let settings = LocalSettings::for_method(cfg, Method::FedProx);
    for r in 1..=cfg.warmup.rounds {
        clients.par_iter_mut().try_for_each(|c| {
            c.params = global.clone();
            local_training_stage(c, r, &settings)
        })?;
        let refs: Vec<&GcnParams> = clients.iter().map(|c| &c.trained).collect();
        let uniform = vec![1.0 / refs.len() as f64; refs.len()];
        global = GcnParams::weighted_sum(&refs, &uniform)?;
    }
    let opts = WarmupMaskOptions {
        gamma: cfg.ies.gamma,
        lr: cfg.ies.lr_train,
        steps: if cfg.warmup.rounds == 0 {
            0
        } else {
            cfg.ies.inner_steps
        },
        init_value: cfg.ies.init_value,
        source: cfg.ies.source,
    };
    clients.par_iter_mut().try_for_each(|c| -> Result<()> {
        c.mask = warmup_mask(&c.graph, &global, &c.pacing, opts)?;
        c.params = if cfg.warmup.reset_params {
            init.clone()
        } else {
            global.clone()
        };
        c.trained = c.params.clone();
        c.adam = AdamState::new(&c.params);
        c.lambda = c.pacing.lambda(1);
        c.train_loss = f64::NAN;
        Ok(())
    })?;
    Ok(global)
}

/// Materialized inputs of a run.
#[derive(Debug, Clone)]
pub struct Setup {
    pub graph: Graph,
    pub partition: Partition,
    pub clients: Vec<ClientState>,
    pub reference: Option<ReferenceGraph>,
    /// Ground-truth cluster of each client, when known.
    pub clusters: Option<Vec<usize>>,
}

pub fn load_dataset(cfg: &ExperimentConfig) -> Result<Graph> {
    let seed = derive_seed(cfg.seed, stream::DATASET, 0);
    match &cfg.dataset {
        DatasetSpec::Sbm {
            blocks,
            block_size,
            p_in,
            p_cross,
            d_x,
            num_classes,
        } => generate_sbm(
            *blocks,
            *block_size,
            *p_in,
            *p_cross,
            *d_x,
            *num_classes,
            seed,
        ),
        DatasetSpec::Er {
            nodes,
            p,
            d_x,
            num_classes,
        } => generate_er(*nodes, *p, *d_x, *num_classes, seed),
        DatasetSpec::Ba {
            nodes,
            m,
            d_x,
            num_classes,
        } => generate_ba(*nodes, *m, *d_x, *num_classes, seed),
        DatasetSpec::Dir { path } => load_graph_dir(path),
    }
}

pub fn make_partition(cfg: &ExperimentConfig, g: &Graph) -> Result<Partition> {
    let seed = derive_seed(cfg.seed, stream::PARTITION, 0);
    match &cfg.partition {
        PartitionSpec::Bisection { clients } => partition_bisection(g, *clients, seed),
        PartitionSpec::Louvain { clients } => partition_louvain_merge(g, *clients, seed),
        PartitionSpec::Overlap {
            base_parts,
            copies,
            frac,
        } => sample_overlap_clients(g, *base_parts, *copies, *frac, seed),
        PartitionSpec::File { path } => load_partition(path, g.num_nodes()),
    }
}

/// Ground-truth client clusters: the majority SBM block of each client, or
/// the base part of an overlapping partition. Ids are renumbered in order of
/// first appearance.
pub fn client_clusters(cfg: &ExperimentConfig, partition: &Partition) -> Option<Vec<usize>> {
    let raw: Vec<usize> = match cfg.dataset {
        DatasetSpec::Sbm {
            blocks, block_size, ..
        } => partition
            .client_nodes
            .iter()
            .map(|nodes| {
                let mut counts = vec![0usize; blocks];
                for &v in nodes {
                    counts[v / block_size] += 1;
                }
                // first maximum wins ties
                let best = counts.iter().copied().max().unwrap_or(0);
                counts.iter().position(|&c| c == best).unwrap_or(0)
            })
            .collect(),
        _ => partition.client_group.clone()?,
    };
    let mut seen: Vec<usize> = Vec::new();
    Some(
        raw.into_iter()
            .map(|c| match seen.iter().position(|&s| s == c) {
                Some(i) => i,
                None => {
                    seen.push(c);
                    seen.len() - 1
                }
            })
            .collect(),
    )
}

/// Builds the global graph, clients and (for CUFL) the reference graph.
pub fn prepare(cfg: &ExperimentConfig) -> Result<Setup> {
    cfg.validate()?;
    let graph = load_dataset(cfg)?;
    let partition = make_partition(cfg, &graph)?;
    let pacing = PacingSchedule::new(cfg.ies.zeta, cfg.fed.rounds.max(1))?;
    let init = GcnParams::glorot(
        graph.feature_dim(),
        cfg.model.hidden,
        graph.num_classes(),
        derive_seed(cfg.seed, stream::INIT, 0),
    );
    let subgraphs = partition.client_subgraphs(&graph)?;
    let mut clients = Vec::with_capacity(subgraphs.len());
    for (k, sub) in subgraphs.into_iter().enumerate() {
        if sub.num_nodes() == 0 {
            return Err(Error::invalid(format!("client {k} has no nodes")));
        }
        let split = make_splits(
            &sub,
            cfg.splits,
            derive_seed(cfg.seed, stream::SPLIT, k as u64),
        )?;
        let mut c = ClientState::new(
            k,
            sub,
            split,
            init.clone(),
            pacing,
            cfg.ies.init_value,
            derive_seed(cfg.seed, stream::CLIENT, k as u64),
        )?;
        if cfg.method == Method::Cufl && cfg.fed.tau.is_adaptive() {
            c.tau_state = Some(TauState::new(&cfg.fed.adaptive_tau));
        }
        clients.push(c);
    }
    let reference = if cfg.method == Method::Cufl {
        let g = cfg.reference.generate(
            graph.feature_dim(),
            derive_seed(cfg.seed, stream::REFERENCE, 0),
        )?;
        Some(ReferenceGraph::new(
            g,
            clients.len(),
            cfg.ies.init_value,
            pacing,
        )?)
    } else {
        None
    };
    let clusters = client_clusters(cfg, &partition);
    Ok(Setup {
        graph,
        partition,
        clients,
        reference,
        clusters,
    })
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
}

/// Output of [`run_experiment`].
#[derive(Debug, Clone)]
pub struct RunResult {
    /// Accuracies of the starting models (after warm-up).
    pub initial: Vec<ClientEval>,
    pub records: Vec<RoundRecord>,
    pub clusters: Option<Vec<usize>>,
    pub num_clients: usize,
}

impl RunResult {
    /// Per-client accuracies at the last round, or the initial ones when no
    /// round ran.
    pub fn final_evals(&self) -> Vec<ClientEval> {
        match self.records.last() {
            Some(r) => r.clients.iter().map(|c| c.eval).collect(),
            None => self.initial.clone(),
        }
    }
}

/// Runs a whole experiment; artifacts go to `writer` when given.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
    writer: Option<&RunWriter>,
) -> Result<RunResult> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    pool.install(|| run_in_pool(cfg, writer))
}

fn run_in_pool(cfg: &ExperimentConfig, writer: Option<&RunWriter>) -> Result<RunResult> {
    let Setup {
        partition,
        mut clients,
        mut reference,
        clusters,
        ..
    } = prepare(cfg)?;
    let method = cfg.method;
    if method.uses_mask() {
        warmup(&mut clients, cfg)?;
    }
    if let Some(w) = writer {
        w.write_setup(&partition, clusters.as_deref())?;
    }
    let masked = method.uses_mask() && cfg.ies.eval_on_mask;
    let initial: Vec<ClientEval> = clients
        .par_iter()
        .map(|c| c.evaluate(&c.params, masked))
        .collect::<Result<_>>()?;

    let settings = LocalSettings::for_method(cfg, method);
    let rounds = cfg.fed.rounds;
    let dump_rounds: Vec<usize> = if cfg.output.dump_rounds.is_empty() {
        vec![1, rounds]
    } else {
        cfg.output.dump_rounds.clone()
    };
    let mut records = Vec::with_capacity(rounds);
    for t in 1..=rounds {
        clients
            .par_iter_mut()
            .try_for_each(|c| local_training_stage(c, t, &settings))?;
        let outcome = server_aggregation_stage(&mut clients, reference.as_mut(), t, cfg)?;
        let evals: Vec<ClientEval> = clients
            .par_iter()
            .map(|c| c.evaluate(&c.params, masked))
            .collect::<Result<_>>()?;

        if let TauPolicy::Keyword(_) = cfg.fed.tau {
            if t % cfg.fed.adaptive_tau.interval == 0 {
                for (c, e) in clients.iter_mut().zip(&evals) {
                    if let (Some(state), Some(perf)) = (c.tau_state.as_mut(), e.val_acc) {
                        *state = tau_step(state, perf);
                    }
                }
            }
        }

        let same_cluster_proportion = match (&outcome.similarity, &clusters) {
            (Some(sim), Some(cl)) => Some(same_cluster_weight_proportion(sim.view(), cl)?),
            _ => None,
        };
        let record = RoundRecord {
            round: t,
            clients: clients
                .iter()
                .zip(&evals)
                .enumerate()
                .map(|(k, (c, e))| ClientRound {
                    client: k,
                    train_loss: c.train_loss,
                    eval: *e,
                    tau: outcome.tau.as_ref().map(|taus| taus[k]),
                })
                .collect(),
            similarity: outcome.similarity,
            alpha: outcome.alpha,
            same_cluster_proportion,
        };
        if let Some(w) = writer {
            w.write_round(&record)?;
            if dump_rounds.contains(&t) {
                w.write_masks(t, &clients, method.uses_mask())?;
                if let (Some(recons), Some(r)) = (&outcome.reconstructions, &reference) {
                    w.write_reference_reconstructions(t, r.graph.edges(), recons)?;
                }
            }
        }
        log::debug!("round {t}/{rounds} done");
        records.push(record);
    }
    let result = RunResult {
        initial,
        records,
        clusters,
        num_clients: clients.len(),
    };
    if let Some(w) = writer {
        w.write_metrics(&result)?;
    }
    Ok(result)
}

/// Convenience wrapper writing every artifact into `dir`.
pub fn run_to_dir(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
    dir: &Path,
    config_path: Option<&Path>,
) -> Result<RunResult> {
    let writer = RunWriter::create(dir)?;
    let result = run_experiment(cfg, opts, Some(&writer))?;
    writer.write_summary(cfg, &result, config_path)?;
    Ok(result)
}
