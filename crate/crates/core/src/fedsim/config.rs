//! Experiment configuration (JSON).

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SplitRatios;
use crate::ies::EmbeddingSource;
use crate::server::{AdaptiveTau, ReferenceSpec};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[default]
    #[serde(rename = "CUFL")]
    Cufl,
    Local,
    FedAvg,
    FedProx,
    FedAvgCL,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Cufl,
        Method::Local,
        Method::FedAvg,
        Method::FedProx,
        Method::FedAvgCL,
    ];

    /// Whether local training runs on an IES-masked subgraph.
    pub fn uses_mask(self) -> bool {
        matches!(self, Method::Cufl | Method::FedAvgCL)
    }

    /// Whether local training carries the proximal term.
    pub fn uses_proximal(self) -> bool {
        matches!(self, Method::Cufl | Method::FedProx)
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Cufl => "CUFL",
            Method::Local => "Local",
            Method::FedAvg => "FedAvg",
            Method::FedProx => "FedProx",
            Method::FedAvgCL => "FedAvgCL",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where the global graph comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DatasetSpec {
    Sbm {
        blocks: usize,
        block_size: usize,
        p_in: f64,
        p_cross: f64,
        d_x: usize,
        num_classes: usize,
    },
    Er {
        nodes: usize,
        p: f64,
        d_x: usize,
        num_classes: usize,
    },
    Ba {
        nodes: usize,
        m: usize,
        d_x: usize,
        num_classes: usize,
    },
    /// A graph directory (`nodes.csv`, `edges.csv`).
    Dir { path: PathBuf },
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec::Sbm {
            blocks: 2,
            block_size: 200,
            p_in: 0.08,
            p_cross: 0.005,
            d_x: 16,
            num_classes: 2,
        }
    }
}

/// How the global graph is split into clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PartitionSpec {
    Bisection {
        clients: usize,
    },
    Louvain {
        clients: usize,
    },
    /// `base_parts · copies` overlapping clients.
    Overlap {
        base_parts: usize,
        copies: usize,
        frac: f64,
    },
    /// `partition.csv` with `node,client` rows.
    File {
        path: PathBuf,
    },
}

impl Default for PartitionSpec {
    fn default() -> Self {
        PartitionSpec::Bisection { clients: 4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub hidden: usize,
    /// Adam learning rate of the GCN.
    pub lr: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            hidden: 128,
            lr: 0.01,
        }
    }
}

/// Fixed scaling factor or the adaptive scheduler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TauPolicy {
    Fixed(f64),
    Keyword(TauKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TauKeyword {
    Adaptive,
}

impl Default for TauPolicy {
    fn default() -> Self {
        TauPolicy::Fixed(5.0)
    }
}

impl TauPolicy {
    pub fn is_adaptive(&self) -> bool {
        matches!(self, TauPolicy::Keyword(TauKeyword::Adaptive))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FedConfig {
    pub rounds: usize,
    /// Local epochs per round; one full-batch Adam step each.
    pub epochs: usize,
    /// Proximal coefficient.
    pub beta: f64,
    pub tau: TauPolicy,
    pub adaptive_tau: AdaptiveTau,
}

impl Default for FedConfig {
    fn default() -> Self {
        Self {
            rounds: 100,
            epochs: 1,
            beta: 0.001,
            tau: TauPolicy::default(),
            adaptive_tau: AdaptiveTau::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IesConfig {
    pub lr_train: f64,
    pub lr_aggr: f64,
    pub gamma: f64,
    pub zeta: f64,
    pub prune_frac: f64,
    pub init_value: f64,
    /// Mask steps per local epoch.
    pub inner_steps: usize,
    /// Mask steps per round on the reference graph; defaults to `inner_steps`.
    pub aggr_steps: Option<usize>,
    pub source: EmbeddingSource,
    /// Evaluate masked methods on the masked subgraph instead of the full one.
    pub eval_on_mask: bool,
}

impl Default for IesConfig {
    fn default() -> Self {
        Self {
            lr_train: 0.0005,
            lr_aggr: 0.00001,
            gamma: 0.001,
            zeta: 1.5,
            prune_frac: 0.3,
            init_value: 0.5,
            inner_steps: 10,
            aggr_steps: None,
            source: EmbeddingSource::Hidden,
            eval_on_mask: false,
        }
    }
}

impl IesConfig {
    pub fn server_steps(&self) -> usize {
        self.aggr_steps.unwrap_or(self.inner_steps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WarmupConfig {
    /// FedProx rounds before the masks are initialized.
    pub rounds: usize,
    /// Restore the common initial GCN weights after warm-up.
    pub reset_params: bool,
}

impl Default for WarmupConfig {
    fn default() -> Self {
        Self {
            rounds: 10,
            reset_params: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Rounds whose masks and reference reconstructions are dumped; empty
    /// means the first and last round.
    pub dump_rounds: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub method: Method,
    pub seed: u64,
    pub dataset: DatasetSpec,
    pub partition: PartitionSpec,
    pub splits: SplitRatios,
    pub model: ModelConfig,
    pub fed: FedConfig,
    pub ies: IesConfig,
    pub reference: ReferenceSpec,
    pub warmup: WarmupConfig,
    pub output: OutputConfig,
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be > 0, got {x}")))
    }
}

fn non_negative(name: &str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be >= 0, got {x}")))
    }
}

fn probability(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must lie in [0, 1], got {x}")))
    }
}

impl ExperimentConfig {
    /// Parses JSON text, reporting the path of the offending field.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config(format!("at `{path}`: {}", e.into_inner()))
        })
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self> {
        serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            Error::Config(format!("at `{path}`: {}", e.into_inner()))
        })
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Number of clients the partition produces.
    pub fn num_clients(&self) -> Option<usize> {
        match self.partition {
            PartitionSpec::Bisection { clients } | PartitionSpec::Louvain { clients } => {
                Some(clients)
            }
            PartitionSpec::Overlap {
                base_parts, copies, ..
            } => Some(base_parts * copies),
            PartitionSpec::File { .. } => None,
        }
    }

    /// Checks ranges and referenced paths without doing any compute.
    pub fn validate(&self) -> Result<()> {
        if let Some(k) = self.num_clients() {
            if k == 0 {
                return Err(Error::Config("number of clients must be >= 1".into()));
            }
        }
        if let PartitionSpec::Overlap { frac, .. } = self.partition {
            if !(frac > 0.0 && frac <= 1.0) {
                return Err(Error::Config(format!(
                    "partition.frac must lie in (0, 1], got {frac}"
                )));
            }
        }
        match &self.dataset {
            DatasetSpec::Sbm {
                blocks,
                block_size,
                p_in,
                p_cross,
                d_x,
                num_classes,
            } => {
                if blocks * block_size == 0 || *d_x == 0 || *num_classes == 0 {
                    return Err(Error::Config(
                        "dataset sizes, d_x and num_classes must be >= 1".into(),
                    ));
                }
                probability("dataset.p_in", *p_in)?;
                probability("dataset.p_cross", *p_cross)?;
            }
            DatasetSpec::Er {
                nodes,
                p,
                d_x,
                num_classes,
            } => {
                if *nodes == 0 || *d_x == 0 || *num_classes == 0 {
                    return Err(Error::Config(
                        "dataset sizes, d_x and num_classes must be >= 1".into(),
                    ));
                }
                probability("dataset.p", *p)?;
            }
            DatasetSpec::Ba {
                nodes,
                m,
                d_x,
                num_classes,
            } => {
                if *nodes == 0 || *m == 0 || *d_x == 0 || *num_classes == 0 {
                    return Err(Error::Config(
                        "dataset sizes, m, d_x and num_classes must be >= 1".into(),
                    ));
                }
            }
            DatasetSpec::Dir { path } => {
                for file in ["nodes.csv", "edges.csv"] {
                    let p = path.join(file);
                    if !p.is_file() {
                        return Err(Error::Config(format!(
                            "dataset file {} does not exist",
                            p.display()
                        )));
                    }
                }
            }
        }
        if let PartitionSpec::File { path } = &self.partition {
            if !path.is_file() {
                return Err(Error::Config(format!(
                    "partition file {} does not exist",
                    path.display()
                )));
            }
        }
        if self.model.hidden == 0 {
            return Err(Error::Config("model.hidden must be >= 1".into()));
        }
        positive("model.lr", self.model.lr)?;
        positive("ies.lr_train", self.ies.lr_train)?;
        positive("ies.lr_aggr", self.ies.lr_aggr)?;
        positive("ies.zeta", self.ies.zeta)?;
        non_negative("fed.beta", self.fed.beta)?;
        non_negative("ies.gamma", self.ies.gamma)?;
        probability("ies.init_value", self.ies.init_value)?;
        if !(0.0..1.0).contains(&self.ies.prune_frac) {
            return Err(Error::Config(format!(
                "ies.prune_frac must lie in [0, 1), got {}",
                self.ies.prune_frac
            )));
        }
        if self.fed.epochs == 0 {
            return Err(Error::Config("fed.epochs must be >= 1".into()));
        }
        match self.fed.tau {
            TauPolicy::Fixed(t) => non_negative("fed.tau", t)?,
            TauPolicy::Keyword(TauKeyword::Adaptive) => {
                let a = &self.fed.adaptive_tau;
                positive("fed.adaptive_tau.rho", a.rho)?;
                positive("fed.adaptive_tau.min", a.min)?;
                if a.max < a.min {
                    return Err(Error::Config(format!(
                        "fed.adaptive_tau.max {} < min {}",
                        a.max, a.min
                    )));
                }
                if a.interval == 0 {
                    return Err(Error::Config(
                        "fed.adaptive_tau.interval must be >= 1".into(),
                    ));
                }
            }
        }
        match self.reference {
            ReferenceSpec::Sbm {
                blocks,
                block_size,
                p_in,
                p_cross,
            } => {
                if blocks * block_size == 0 {
                    return Err(Error::Config("reference graph must have nodes".into()));
                }
                probability("reference.p_in", p_in)?;
                probability("reference.p_cross", p_cross)?;
            }
            ReferenceSpec::Er { nodes, p } => {
                if nodes == 0 {
                    return Err(Error::Config("reference graph must have nodes".into()));
                }
                probability("reference.p", p)?;
            }
            ReferenceSpec::Ba { nodes, m } => {
                if nodes == 0 || m == 0 {
                    return Err(Error::Config("reference graph must have nodes".into()));
                }
            }
        }
        Ok(())
    }
}
