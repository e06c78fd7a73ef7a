//! Command-line layer: `generate`, `run` and `analyze`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::fedsim::{
    alpha_file, bin_match_ratio, read_clusters_csv, read_matrix_csv, read_metrics_csv,
    read_reconstruction, reference_recon_file, run_to_dir, same_cluster_weight_proportion,
    similarity_file, ExperimentConfig, MetricsRow, RunOptions, CLUSTERS_FILE, METRICS_FILE,
};
use crate::graph::{generate_ba, generate_er, generate_sbm, save_graph_dir, Graph};

pub use crate::fedsim::RunManifest;

#[derive(Debug, Parser)]
#[command(
    name = "subfed-sim",
    version,
    about = "Personalized subgraph federated learning simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic graph directory.
    Generate(GenerateArgs),
    /// Run one experiment from a JSON config.
    Run(RunArgs),
    /// Derive plot-ready CSV from a run directory.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(subcommand)]
    pub model: GraphModel,
}

#[derive(Debug, Args)]
pub struct CommonGraphArgs {
    /// Feature dimension.
    #[arg(long, default_value_t = 16)]
    pub dx: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Overwrite a non-empty output directory.
    #[arg(long)]
    pub force: bool,
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum GraphModel {
    /// Stochastic block model; labels are the block id modulo the class count.
    Sbm {
        #[arg(long)]
        blocks: usize,
        #[arg(long)]
        block_size: usize,
        #[arg(long)]
        p_in: f64,
        #[arg(long)]
        p_cross: f64,
        /// Defaults to the number of blocks.
        #[arg(long)]
        classes: Option<usize>,
        #[command(flatten)]
        common: CommonGraphArgs,
    },
    /// Erdős–Rényi graph with uniform random labels.
    Er {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 2)]
        classes: usize,
        #[command(flatten)]
        common: CommonGraphArgs,
    },
    /// Barabási–Albert graph with uniform random labels.
    Ba {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        classes: usize,
        #[command(flatten)]
        common: CommonGraphArgs,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON config; omitted keys take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dotted override such as `fed.tau=10` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores); results do not depend on it.
    #[arg(long, env = "SUBFED_SIM_THREADS", default_value_t = 0)]
    pub threads: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Reuse a non-empty output directory, deleting earlier run artifacts.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Analysis {
    WeightProportion,
    BinMatch,
    LearningCurve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MatrixKind {
    Similarity,
    Alpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    TrainLoss,
    TrainAcc,
    ValAcc,
    TestAcc,
    Tau,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(value_enum)]
    pub analysis: Analysis,
    /// Run directory written by `run`.
    pub run_dir: PathBuf,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// weight-proportion: which per-round matrix to score.
    #[arg(long, value_enum, default_value = "similarity")]
    pub matrix: MatrixKind,
    /// learning-curve: which metrics.csv column to plot.
    #[arg(long, value_enum, default_value = "test-acc")]
    pub metric: Metric,
    /// bin-match: client whose reference reconstructions are compared.
    #[arg(long, default_value_t = 0)]
    pub client: usize,
    /// bin-match: baseline round (default 1).
    #[arg(long)]
    pub from: Option<usize>,
    /// bin-match: compared round (default: last dumped round).
    #[arg(long)]
    pub to: Option<usize>,
    #[arg(long, default_value_t = 5)]
    pub bins: usize,
}

/// Executes one parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(args) => cmd_generate(args.model),
        Command::Run(args) => cmd_run(&args),
        Command::Analyze(args) => {
            let csv = cmd_analyze(&args)?;
            match &args.out {
                Some(path) => fs::write(path, csv).map_err(|e| Error::io(path, e)),
                None => {
                    print!("{csv}");
                    Ok(())
                }
            }
        }
    }
}

/// Refuses a non-empty directory unless `force` is set.
pub fn ensure_output_dir(dir: &Path, force: bool) -> Result<()> {
    let non_empty = match fs::read_dir(dir) {
        Ok(mut entries) => entries.next().is_some(),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => false,
        Err(e) => return Err(Error::io(dir, e)),
    };
    if non_empty && !force {
        return Err(Error::invalid(format!(
            "output directory {} is not empty (use --force)",
            dir.display()
        )));
    }
    Ok(())
}

pub fn cmd_generate(model: GraphModel) -> Result<()> {
    let (g, common): (Graph, CommonGraphArgs) = match model {
        GraphModel::Sbm {
            blocks,
            block_size,
            p_in,
            p_cross,
            classes,
            common,
        } => (
            generate_sbm(
                blocks,
                block_size,
                p_in,
                p_cross,
                common.dx,
                classes.unwrap_or(blocks),
                common.seed,
            )?,
            common,
        ),
        GraphModel::Er {
            n,
            p,
            classes,
            common,
        } => (generate_er(n, p, common.dx, classes, common.seed)?, common),
        GraphModel::Ba {
            n,
            m,
            classes,
            common,
        } => (generate_ba(n, m, common.dx, classes, common.seed)?, common),
    };
    ensure_output_dir(&common.out, common.force)?;
    save_graph_dir(&g, &common.out)?;
    println!("nodes={} edges={}", g.num_nodes(), g.num_edges());
    Ok(())
}

/// Sets `root[a][b]... = value` for a dotted key, creating objects on the way.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not KEY=VALUE")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("malformed key `{key}`")));
    }
    let mut node = root;
    for part in &parts[..parts.len() - 1] {
        if !node.is_object() {
            return Err(Error::Config(format!("`{key}`: `{part}` is not a section")));
        }
        node = node
            .as_object_mut()
            .expect("checked above")
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    match node.as_object_mut() {
        Some(obj) => {
            obj.insert(parts[parts.len() - 1].to_string(), value);
            Ok(())
        }
        None => Err(Error::Config(format!("`{key}`: parent is not a section"))),
    }
}

/// Reads a config file (or defaults), then applies overrides.
pub fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<ExperimentConfig> {
    let base = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            ExperimentConfig::from_json_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
        }
        None => ExperimentConfig::default(),
    };
    if overrides.is_empty() {
        return Ok(base);
    }
    let mut value = serde_json::to_value(&base)?;
    for o in overrides {
        apply_override(&mut value, o)?;
    }
    ExperimentConfig::from_value(value)
}

pub fn cmd_run(args: &RunArgs) -> Result<()> {
    let mut cfg = load_config(args.config.as_deref(), &args.set)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    ensure_output_dir(&args.out, args.force)?;
    if args.force {
        clear_run_artifacts(&args.out)?;
    }
    let result = run_to_dir(
        &cfg,
        &RunOptions {
            threads: args.threads,
        },
        &args.out,
        args.config.as_deref(),
    )?;
    let evals = result.final_evals();
    let test: Vec<f64> = evals.iter().filter_map(|e| e.test_acc).collect();
    if let Some((mean, std)) = crate::fedsim::mean_std(&test) {
        println!(
            "{} seed={} rounds={} clients={} test_acc={mean:.4}±{std:.4}",
            cfg.method,
            cfg.seed,
            result.records.len(),
            result.num_clients
        );
    }
    Ok(())
}

/// Removes files a previous run may have left behind.
fn clear_run_artifacts(dir: &Path) -> Result<()> {
    let Ok(entries) = fs::read_dir(dir) else {
        return Ok(());
    };
    const PREFIXES: [&str; 5] = [
        "similarity_round_",
        "alpha_round_",
        "tau_round_",
        "mask_round_",
        "reference_recon_round_",
    ];
    const NAMES: [&str; 4] = [
        "metrics.csv",
        "summary.json",
        "clusters.csv",
        "partition.csv",
    ];
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if NAMES.contains(&name.as_str()) || PREFIXES.iter().any(|p| name.starts_with(p)) {
            fs::remove_file(entry.path()).map_err(|e| Error::io(entry.path(), e))?;
        }
    }
    Ok(())
}

fn require(path: PathBuf) -> Result<PathBuf> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(Error::invalid(format!(
            "missing artifact {}",
            path.display()
        )))
    }
}

/// Rounds that have a file named by `name(t)` in `dir`, ascending.
fn rounds_with(dir: &Path, prefix: &str) -> Result<Vec<usize>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut rounds = Vec::new();
    for entry in entries {
        let name = entry.map_err(|e| Error::io(dir, e))?.file_name();
        let name = name.to_string_lossy();
        if let Some(rest) = name.strip_prefix(prefix) {
            let digits: String = rest.chars().take_while(char::is_ascii_digit).collect();
            if let Ok(t) = digits.parse() {
                rounds.push(t);
            }
        }
    }
    rounds.sort_unstable();
    rounds.dedup();
    Ok(rounds)
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Produces the CSV text of one analysis.
pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<String> {
    let dir = &args.run_dir;
    if !dir.is_dir() {
        return Err(Error::invalid(format!(
            "run directory {} not found",
            dir.display()
        )));
    }
    let mut out = String::new();
    match args.analysis {
        Analysis::WeightProportion => {
            let clusters = read_clusters_csv(&require(dir.join(CLUSTERS_FILE))?)?;
            let (prefix, file): (&str, fn(usize) -> String) = match args.matrix {
                MatrixKind::Similarity => ("similarity_round_", similarity_file),
                MatrixKind::Alpha => ("alpha_round_", alpha_file),
            };
            let rounds = rounds_with(dir, prefix)?;
            if rounds.is_empty() {
                return Err(Error::invalid(format!(
                    "missing artifact {}",
                    dir.join(file(1)).display()
                )));
            }
            out.push_str("x,y\n");
            for t in rounds {
                let m = read_matrix_csv(&dir.join(file(t)))?;
                let p = same_cluster_weight_proportion(m.view(), &clusters)?;
                writeln!(out, "{t},{p}").expect("writing to a String");
            }
        }
        Analysis::LearningCurve => {
            let rows = read_metrics_csv(&require(dir.join(METRICS_FILE))?)?;
            out.push_str("x,y,series\n");
            let pick = |r: &MetricsRow| match args.metric {
                Metric::TrainLoss => Some(r.train_loss),
                Metric::TrainAcc => r.train_acc,
                Metric::ValAcc => r.val_acc,
                Metric::TestAcc => r.test_acc,
                Metric::Tau => r.tau,
            };
            let mut sorted: Vec<&MetricsRow> = rows.iter().collect();
            sorted.sort_by_key(|r| (r.client, r.round));
            for r in sorted {
                writeln!(out, "{},{},client_{}", r.round, fmt_opt(pick(r)), r.client)
                    .expect("writing to a String");
            }
        }
        Analysis::BinMatch => {
            let dumped = rounds_with(dir, "reference_recon_round_")?;
            let from = args.from.unwrap_or(1);
            let to = match args.to.or_else(|| dumped.last().copied()) {
                Some(t) => t,
                None => {
                    return Err(Error::invalid(format!(
                        "missing artifact {}",
                        dir.join(reference_recon_file(1, args.client)).display()
                    )))
                }
            };
            let load =
                |t: usize| read_reconstruction(&dir.join(reference_recon_file(t, args.client)));
            let ratios = bin_match_ratio(&load(from)?, &load(to)?, args.bins)?;
            out.push_str("x,y\n");
            for (b, r) in ratios.iter().enumerate() {
                writeln!(out, "{b},{}", fmt_opt(*r)).expect("writing to a String");
            }
        }
    }
    Ok(out)
}
