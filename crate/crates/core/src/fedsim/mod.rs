//! Federated simulation: configuration, round engine, metrics and outputs.

mod config;
mod engine;
mod metrics;
mod output;

pub use config::{
    DatasetSpec, ExperimentConfig, FedConfig, IesConfig, Method, ModelConfig, OutputConfig,
    PartitionSpec, TauKeyword, TauPolicy, WarmupConfig,
};
pub use engine::{
    aggregate_all, client_clusters, fedavg_params, load_dataset, local_training_stage,
    make_partition, prepare, run_experiment, run_to_dir, server_aggregation_stage, warmup,
    ClientEval, ClientRound, ClientState, LocalSettings, RoundRecord, RunOptions, RunResult,
    ServerOutcome, Setup,
};
pub use metrics::{bin_match_ratio, mean_std, same_cluster_weight_proportion};
pub use output::{
    alpha_file, mask_file, read_clusters_csv, read_matrix_csv, read_metrics_csv,
    read_reconstruction, read_summary, reference_recon_file, similarity_file, tau_file,
    write_matrix_csv, MeanStd, MetricsRow, RunManifest, RunWriter, Summary, SummaryFile,
    CLUSTERS_FILE, METRICS_FILE, PARTITION_FILE, SUMMARY_FILE,
};
