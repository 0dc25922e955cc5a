//! Experiment orchestration: dataset building, training, offline and online
//! evaluation, stream simulation and reports.

mod dataset;
mod eval;
mod report;
mod spec;
mod stream;
mod synthetic;

use std::path::Path;

pub use dataset::{
    build_dataset, build_dataset_from, label_query, label_workload, load_catalog, load_workload, train_ids, Dataset,
    DatasetMeta, DatasetStats, LabeledQuery, QuerySummary, Split,
};
pub use eval::{eval_offline, eval_online, mixed_reference, surrogate_values, train_baseline};
pub use report::{EvaluationReport, ReportKind, ReportProvenance, ScenarioResult, Summary, WindowResult};
pub use spec::{BaselineConfig, ExperimentSpec, ModelShape, WorkloadSource};
pub use stream::{simulate_stream, StreamOutcome, StreamStep};
pub use synthetic::{synthetic_separable, SyntheticConfig, SyntheticDataset};

use crate::collector::CardinalityCache;
use crate::error::Result;
use crate::model::{save_checkpoint, train, Checkpoint, DecisionTree, TrainHistory};
use crate::planspace::write_workload;
use crate::workloadgen::DomainStore;

pub const DATASET_DIR: &str = "dataset";
pub const CHECKPOINT_FILE: &str = "model.ckpt";
pub const HISTORY_FILE: &str = "train_history.json";
pub const BASELINE_FILE: &str = "baseline_dt.json";
pub const CACHE_FILE: &str = "cache.jsonl";
pub const WORKLOAD_FILE: &str = "workload.jsonl";
pub const DOMAINS_FILE: &str = "domains.json";

pub fn provenance(spec: &ExperimentSpec) -> ReportProvenance {
    ReportProvenance {
        seed: spec.seed,
        config_hash: spec.config_hash(),
        default_estimator: serde_json::to_string(&spec.default_estimator).expect("estimator serializes"),
        surrogate: serde_json::to_string(&spec.surrogate).expect("estimator serializes"),
    }
}

/// Trains the transformer on the dataset's training split.
pub fn train_model(spec: &ExperimentSpec, dataset: &Dataset) -> Result<(Checkpoint, TrainHistory)> {
    let cfg = spec
        .model
        .config(dataset.meta.vocab.size(), dataset.meta.max_len, spec.seed_for("init"));
    let (params, history) = train(&dataset.train, &cfg, &spec.train_config())?;
    Ok((
        Checkpoint {
            params,
            vocab: dataset.meta.vocab.clone(),
            l1_weights: dataset.meta.l1_weights,
        },
        history,
    ))
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(std::fs::write(path, serde_json::to_string_pretty(value)?)?)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub dataset: Dataset,
    pub checkpoint: Checkpoint,
    pub history: TrainHistory,
    pub tree: DecisionTree,
    pub offline: EvaluationReport,
    pub online: EvaluationReport,
    pub stream: StreamOutcome,
}

/// Runs every stage and writes all artifacts into the output directory.
pub fn run_all(spec: &ExperimentSpec) -> Result<PipelineOutput> {
    let out = spec.output_dir();
    std::fs::create_dir_all(&out)?;
    let catalog = load_catalog(spec)?;
    let mut store = DomainStore::new();
    let (queries, _) = load_workload(spec, &catalog, &mut store)?;
    std::fs::write(out.join(WORKLOAD_FILE), write_workload(&queries))?;
    store.save(&out.join(DOMAINS_FILE))?;

    let labeled = label_workload(spec, &catalog, &queries)?;
    let dataset = build_dataset_from(spec, catalog.table_count(), &labeled)?;
    dataset.write(&out.join(DATASET_DIR))?;

    let (checkpoint, history) = train_model(spec, &dataset)?;
    save_checkpoint(&out.join(CHECKPOINT_FILE), &checkpoint)?;
    write_json(&out.join(HISTORY_FILE), &history)?;
    let tree = train_baseline(spec, &dataset)?;
    write_json(&out.join(BASELINE_FILE), &tree)?;

    let offline = eval_offline(spec, &checkpoint, Some(&tree), &dataset)?;
    offline.write(&out)?;
    let online = eval_online(spec, &checkpoint, &catalog, &labeled)?;
    online.write(&out)?;
    let stream = simulate_stream(spec, &checkpoint, &catalog, &labeled, CardinalityCache::new(spec.recency))?;
    stream.report.write(&out)?;
    stream.cache.save(&out.join(CACHE_FILE))?;

    Ok(PipelineOutput {
        dataset,
        checkpoint,
        history,
        tree,
        offline,
        online,
        stream,
    })
}
