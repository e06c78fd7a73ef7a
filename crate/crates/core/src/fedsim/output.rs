//! Run-directory artifacts.
//!
//! Layout:
//! - `metrics.csv`: `round,client,train_loss,train_acc,val_acc,test_acc,tau`
//! - `similarity_round_{t}.csv`, `alpha_round_{t}.csv`: headerless K×K
//! - `tau_round_{t}.csv`: `client,tau`
//! - `mask_round_{t}_client_{k}.csv`, `reference_recon_round_{t}_client_{k}.csv`: `u,v,weight`
//! - `partition.csv`, `clusters.csv` (`client,cluster`), `summary.json`

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::engine::{ClientState, RoundRecord, RunResult};
use super::metrics::mean_std;
use crate::error::{Error, Result};
use crate::graph::{save_partition, Partition};
use crate::ies::{read_edge_weights_csv, write_edge_weights_csv, Reconstruction};

pub const METRICS_FILE: &str = "metrics.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const CLUSTERS_FILE: &str = "clusters.csv";
pub const PARTITION_FILE: &str = "partition.csv";

pub fn similarity_file(t: usize) -> String {
    format!("similarity_round_{t}.csv")
}

pub fn alpha_file(t: usize) -> String {
    format!("alpha_round_{t}.csv")
}

pub fn tau_file(t: usize) -> String {
    format!("tau_round_{t}.csv")
}

pub fn mask_file(t: usize, client: usize) -> String {
    format!("mask_round_{t}_client_{client}.csv")
}

pub fn reference_recon_file(t: usize, client: usize) -> String {
    format!("reference_recon_round_{t}_client_{client}.csv")
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

pub fn write_matrix_csv(m: &Array2<f64>, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    for row in m.rows() {
        w.write_record(row.iter().map(|x| x.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_matrix_csv(path: &Path) -> Result<Array2<f64>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| missing_or(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| {
                f.trim().parse::<f64>().map_err(|e| Error::Parse {
                    file: path.to_path_buf(),
                    line: i as u64 + 1,
                    msg: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let k = rows.len();
    if rows.iter().any(|r| r.len() != k) {
        return Err(Error::Parse {
            file: path.to_path_buf(),
            line: 1,
            msg: "matrix is not square".into(),
        });
    }
    Ok(Array2::from_shape_fn((k, k), |(i, j)| rows[i][j]))
}

fn missing_or(path: &Path, e: csv::Error) -> Error {
    match e.kind() {
        csv::ErrorKind::Io(io) => Error::io(path, std::io::Error::new(io.kind(), io.to_string())),
        _ => Error::Csv(e),
    }
}

/// Reads a `u,v,weight` reconstruction dump.
pub fn read_reconstruction(path: &Path) -> Result<Reconstruction> {
    if !path.is_file() {
        return Err(Error::invalid(format!(
            "missing artifact {}",
            path.display()
        )));
    }
    Ok(Reconstruction {
        weights: read_edge_weights_csv(path)?
            .into_iter()
            .map(|(_, w)| w)
            .collect(),
    })
}

/// One parsed `metrics.csv` row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub round: usize,
    pub client: usize,
    pub train_loss: f64,
    pub train_acc: Option<f64>,
    pub val_acc: Option<f64>,
    pub test_acc: Option<f64>,
    pub tau: Option<f64>,
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<MetricsRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| missing_or(path, e))?;
    let mut rows = Vec::new();
    for (i, rec) in r.deserialize().enumerate() {
        rows.push(rec.map_err(|e: csv::Error| Error::Parse {
            file: path.to_path_buf(),
            line: i as u64 + 2,
            msg: e.to_string(),
        })?);
    }
    Ok(rows)
}

pub fn read_clusters_csv(path: &Path) -> Result<Vec<usize>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| missing_or(path, e))?;
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for (i, rec) in r.deserialize().enumerate() {
        pairs.push(rec.map_err(|e: csv::Error| Error::Parse {
            file: path.to_path_buf(),
            line: i as u64 + 2,
            msg: e.to_string(),
        })?);
    }
    pairs.sort_unstable();
    if pairs.iter().enumerate().any(|(i, &(c, _))| c != i) {
        return Err(Error::Parse {
            file: path.to_path_buf(),
            line: 1,
            msg: "client ids must be 0..K".into(),
        });
    }
    Ok(pairs.into_iter().map(|(_, g)| g).collect())
}

/// Reproducibility header of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_path: Option<PathBuf>,
    pub config: ExperimentConfig,
    pub output_dir: PathBuf,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub tool_version: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation.
    pub std: f64,
    pub n: usize,
}

impl MeanStd {
    pub fn of(xs: &[f64]) -> Option<Self> {
        mean_std(xs).map(|(mean, std)| Self {
            mean,
            std,
            n: xs.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientFinal {
    pub client: usize,
    pub train_acc: Option<f64>,
    pub val_acc: Option<f64>,
    pub test_acc: Option<f64>,
}

/// Final-round results, averaged over clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub method: String,
    pub seed: u64,
    pub rounds: usize,
    pub num_clients: usize,
    pub train_acc: Option<MeanStd>,
    pub val_acc: Option<MeanStd>,
    pub test_acc: Option<MeanStd>,
    /// Train minus test accuracy.
    pub generalization_gap: Option<MeanStd>,
    pub same_cluster_proportion_first: Option<f64>,
    pub same_cluster_proportion_last: Option<f64>,
    pub clients: Vec<ClientFinal>,
}

impl Summary {
    pub fn from_result(cfg: &ExperimentConfig, result: &RunResult) -> Self {
        let evals = result.final_evals();
        let collect = |f: &dyn Fn(&super::engine::ClientEval) -> Option<f64>| -> Vec<f64> {
            evals.iter().filter_map(f).collect()
        };
        let gaps = collect(&|e| Some(e.train_acc? - e.test_acc?));
        let proportion = |r: Option<&RoundRecord>| r.and_then(|r| r.same_cluster_proportion);
        Self {
            method: cfg.method.name().to_string(),
            seed: cfg.seed,
            rounds: result.records.len(),
            num_clients: result.num_clients,
            train_acc: MeanStd::of(&collect(&|e| e.train_acc)),
            val_acc: MeanStd::of(&collect(&|e| e.val_acc)),
            test_acc: MeanStd::of(&collect(&|e| e.test_acc)),
            generalization_gap: MeanStd::of(&gaps),
            same_cluster_proportion_first: proportion(result.records.first()),
            same_cluster_proportion_last: proportion(result.records.last()),
            clients: evals
                .iter()
                .enumerate()
                .map(|(k, e)| ClientFinal {
                    client: k,
                    train_acc: e.train_acc,
                    val_acc: e.val_acc,
                    test_acc: e.test_acc,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryFile {
    pub manifest: RunManifest,
    pub summary: Summary,
}

pub fn read_summary(path: &Path) -> Result<SummaryFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes artifacts into one run directory.
#[derive(Debug, Clone)]
pub struct RunWriter {
    dir: PathBuf,
}

impl RunWriter {
    pub fn create(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write_setup(&self, partition: &Partition, clusters: Option<&[usize]>) -> Result<()> {
        save_partition(partition, self.dir.join(PARTITION_FILE))?;
        if let Some(cl) = clusters {
            let path = self.dir.join(CLUSTERS_FILE);
            let mut w = csv_writer(&path)?;
            w.write_record(["client", "cluster"])?;
            for (k, c) in cl.iter().enumerate() {
                w.write_record([k.to_string(), c.to_string()])?;
            }
            w.flush().map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }

    pub fn write_round(&self, record: &RoundRecord) -> Result<()> {
        let t = record.round;
        if let Some(sim) = &record.similarity {
            write_matrix_csv(sim, &self.dir.join(similarity_file(t)))?;
        }
        if let Some(alpha) = &record.alpha {
            write_matrix_csv(alpha, &self.dir.join(alpha_file(t)))?;
        }
        if record.clients.iter().any(|c| c.tau.is_some()) {
            let path = self.dir.join(tau_file(t));
            let mut w = csv_writer(&path)?;
            w.write_record(["client", "tau"])?;
            for c in &record.clients {
                w.write_record([c.client.to_string(), opt(c.tau)])?;
            }
            w.flush().map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }

    pub fn write_masks(&self, t: usize, clients: &[ClientState], masked: bool) -> Result<()> {
        if !masked {
            return Ok(());
        }
        for c in clients {
            write_edge_weights_csv(
                c.graph.edges(),
                c.mask.weights(),
                self.dir.join(mask_file(t, c.id)),
            )?;
        }
        Ok(())
    }

    pub fn write_reference_reconstructions(
        &self,
        t: usize,
        edges: &[(usize, usize)],
        recons: &[Reconstruction],
    ) -> Result<()> {
        for (k, r) in recons.iter().enumerate() {
            write_edge_weights_csv(edges, &r.weights, self.dir.join(reference_recon_file(t, k)))?;
        }
        Ok(())
    }

    pub fn write_metrics(&self, result: &RunResult) -> Result<()> {
        let path = self.dir.join(METRICS_FILE);
        let mut w = csv_writer(&path)?;
        w.write_record([
            "round",
            "client",
            "train_loss",
            "train_acc",
            "val_acc",
            "test_acc",
            "tau",
        ])?;
        for r in &result.records {
            for c in &r.clients {
                w.write_record([
                    r.round.to_string(),
                    c.client.to_string(),
                    c.train_loss.to_string(),
                    opt(c.eval.train_acc),
                    opt(c.eval.val_acc),
                    opt(c.eval.test_acc),
                    opt(c.tau),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io(&path, e))
    }

    pub fn write_summary(
        &self,
        cfg: &ExperimentConfig,
        result: &RunResult,
        config_path: Option<&Path>,
    ) -> Result<()> {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let file = SummaryFile {
            manifest: RunManifest {
                config_path: config_path.map(Path::to_path_buf),
                config: cfg.clone(),
                output_dir: self.dir.clone(),
                timestamp,
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
            },
            summary: Summary::from_result(cfg, result),
        };
        let path = self.dir.join(SUMMARY_FILE);
        let mut text = serde_json::to_string_pretty(&file)?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }
}
