use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::{ExperimentSpec, WorkloadSource};
use crate::catalog::{generate_catalog, Catalog, SchemaSpec};
use crate::collector::{EstimationContext, Estimator};
use crate::error::{Error, Result};
use crate::featurize::{build_vocab, required_len, Vocabulary};
use crate::l1error::{l1_report, query_position_vectors, L1Weights};
use crate::model::{augment_permute, read_examples, write_examples, LabeledExample};
use crate::planspace::{
    enumerate_subplans, infer_join_closure, label_from_p_error, p_error, parse_workload, CardinalityAssignment,
    JoinGraph, PlanLabel, Provenance, Query, SubOptConfig, SubplanSpace,
};
use crate::seed::StableHasher;
use crate::workloadgen::{scale_workload, DomainStore, ScaledWorkload};

pub fn load_catalog(spec: &ExperimentSpec) -> Result<Catalog> {
    let path = spec.resolve(&spec.catalog);
    let schema = SchemaSpec::from_json(&std::fs::read_to_string(&path)?)?;
    generate_catalog(&schema)
}

/// The experiment's workload: read from file, or scaled from templates.
pub fn load_workload(
    spec: &ExperimentSpec,
    catalog: &Catalog,
    store: &mut DomainStore,
) -> Result<(Vec<Query>, Option<ScaledWorkload>)> {
    match &spec.workload {
        WorkloadSource::File { path } => {
            let queries = parse_workload(&std::fs::read_to_string(spec.resolve(path))?)?;
            Ok((queries, None))
        }
        WorkloadSource::Scaled {
            templates,
            count,
            policy,
        } => {
            let templates = parse_workload(&std::fs::read_to_string(spec.resolve(templates))?)?;
            let scaled = scale_workload(&templates, catalog, *count, spec.seed_for("workload"), policy, store)?;
            Ok((scaled.queries.clone(), Some(scaled)))
        }
    }
}

/// A query with its true and default-estimator cardinalities and label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledQuery {
    pub query: Query,
    pub graph: JoinGraph,
    pub space: SubplanSpace,
    /// Every connected subset, single tables included.
    pub truth: CardinalityAssignment,
    pub est: CardinalityAssignment,
    pub p_error: f64,
    pub label: PlanLabel,
}

pub fn label_query(
    catalog: &Catalog,
    query: &Query,
    default_estimator: &Estimator,
    cfg: &SubOptConfig,
) -> Result<LabeledQuery> {
    let graph = infer_join_closure(query, catalog.spec())?;
    let space = enumerate_subplans(&graph);
    let sets = graph.connected_subsets();
    let truth = catalog.true_assignment(&graph, sets.iter().copied())?;
    let ctx = EstimationContext::with_truth(&query.id, &truth);
    let est = default_estimator.estimate_all(&graph, sets.iter().copied(), &ctx, Provenance::Estimated)?;
    let pe = p_error(&graph, &est, &truth)?;
    Ok(LabeledQuery {
        query: query.clone(),
        graph,
        space,
        truth,
        est,
        p_error: pe,
        label: label_from_p_error(pe, cfg),
    })
}

/// Labels every query in parallel; output keeps the workload order.
pub fn label_workload(spec: &ExperimentSpec, catalog: &Catalog, queries: &[Query]) -> Result<Vec<LabeledQuery>> {
    let ids: BTreeSet<&str> = queries.iter().map(|q| q.id.as_str()).collect();
    if ids.len() != queries.len() {
        return Err(Error::Input("workload contains duplicate query ids".into()));
    }
    let estimator = Estimator::new(spec.default_estimator, catalog);
    let cfg = SubOptConfig::new(spec.c)?;
    queries
        .par_iter()
        .map(|q| label_query(catalog, q, &estimator, &cfg))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuerySummary {
    pub query_id: String,
    pub split: Split,
    pub label: PlanLabel,
    pub p_error: f64,
    pub subplans: usize,
    pub l1_aggregate: f64,
    pub l1_normalized: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub queries: usize,
    pub train_queries: usize,
    pub test_queries: usize,
    pub train_examples: usize,
    pub test_examples: usize,
    pub optimal: usize,
    pub suboptimal: usize,
    pub suboptimal_fraction: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub vocab: Vocabulary,
    pub max_len: usize,
    pub l1_weights: L1Weights,
    pub stats: DatasetStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub meta: DatasetMeta,
    pub train: Vec<LabeledExample>,
    pub test: Vec<LabeledExample>,
    pub queries: Vec<QuerySummary>,
}

const TRAIN_FILE: &str = "train.jsonl";
const TEST_FILE: &str = "test.jsonl";
const QUERIES_FILE: &str = "queries.jsonl";
const META_FILE: &str = "meta.json";

impl Dataset {
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(TRAIN_FILE), write_examples(&self.train))?;
        std::fs::write(dir.join(TEST_FILE), write_examples(&self.test))?;
        let mut lines = String::new();
        for q in &self.queries {
            lines.push_str(&serde_json::to_string(q)?);
            lines.push('\n');
        }
        std::fs::write(dir.join(QUERIES_FILE), lines)?;
        std::fs::write(dir.join(META_FILE), serde_json::to_string_pretty(&self.meta)?)?;
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let queries = std::fs::read_to_string(dir.join(QUERIES_FILE))?
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<std::result::Result<_, _>>()?;
        Ok(Self {
            meta: serde_json::from_str(&std::fs::read_to_string(dir.join(META_FILE))?)?,
            train: read_examples(&std::fs::read_to_string(dir.join(TRAIN_FILE))?)?,
            test: read_examples(&std::fs::read_to_string(dir.join(TEST_FILE))?)?,
            queries,
        })
    }
}

/// Query ids in the training split: a seeded shuffle, first
/// `round(fraction * n)` ids.
pub fn train_ids(ids: &[&str], fraction: f64, seed: u64) -> BTreeSet<String> {
    let mut ids: Vec<&str> = ids.to_vec();
    ids.sort_unstable();
    ids.shuffle(&mut StableHasher::new(seed).str("split").rng());
    let n = (fraction * ids.len() as f64).round() as usize;
    ids[..n.min(ids.len())].iter().map(|s| s.to_string()).collect()
}

/// Featurizes labeled queries. Training queries get `spec.train.replicas`
/// permuted copies; test queries only their original example.
pub fn build_dataset_from(spec: &ExperimentSpec, table_count: usize, labeled: &[LabeledQuery]) -> Result<Dataset> {
    if labeled.is_empty() {
        return Err(Error::Input("empty workload".into()));
    }
    let vocab = build_vocab(table_count, labeled.iter().flat_map(|q| q.space.iter()))?;
    let max_len = labeled.iter().map(|q| required_len(q.space.total())).max().unwrap_or(3);
    let ids: Vec<&str> = labeled.iter().map(|q| q.query.id.as_str()).collect();
    let train_set = train_ids(&ids, spec.split_fraction, spec.seed_for("split"));
    let weights = spec.l1_weights;
    let aug_seed = spec.seed_for("augment");

    let rows: Vec<(Vec<LabeledExample>, QuerySummary)> = labeled
        .par_iter()
        .map(|q| {
            let pairs = query_position_vectors(&q.space, &q.truth, &q.est)?;
            let ex = LabeledExample::from_pairs(&q.query.id, &pairs, &vocab, max_len, &weights, q.label)?;
            let report = l1_report(&pairs, &weights);
            let split = if train_set.contains(&q.query.id) {
                Split::Train
            } else {
                Split::Test
            };
            let examples = match split {
                Split::Train => augment_permute(&ex, &pairs, &vocab, &weights, spec.train.replicas, aug_seed)?,
                Split::Test => vec![ex],
            };
            let summary = QuerySummary {
                query_id: q.query.id.clone(),
                split,
                label: q.label,
                p_error: q.p_error,
                subplans: q.space.total(),
                l1_aggregate: report.aggregate,
                l1_normalized: report.normalized(),
            };
            Ok((examples, summary))
        })
        .collect::<Result<_>>()?;

    let mut train = Vec::new();
    let mut test = Vec::new();
    let mut queries = Vec::with_capacity(rows.len());
    for (examples, summary) in rows {
        match summary.split {
            Split::Train => train.extend(examples),
            Split::Test => test.extend(examples),
        }
        queries.push(summary);
    }
    let suboptimal = queries.iter().filter(|q| q.label == PlanLabel::SubOptimal).count();
    let mut stats = DatasetStats {
        queries: queries.len(),
        train_queries: train_set.len(),
        test_queries: queries.len() - train_set.len(),
        train_examples: train.len(),
        test_examples: test.len(),
        optimal: queries.len() - suboptimal,
        suboptimal,
        suboptimal_fraction: suboptimal as f64 / queries.len() as f64,
        warnings: Vec::new(),
    };
    if suboptimal == 0 || suboptimal == queries.len() {
        let msg = format!(
            "all {} queries are labeled {}",
            queries.len(),
            if suboptimal == 0 { "optimal" } else { "sub-optimal" }
        );
        log::warn!("{msg}");
        stats.warnings.push(msg);
    }
    Ok(Dataset {
        meta: DatasetMeta {
            vocab,
            max_len,
            l1_weights: weights,
            stats,
        },
        train,
        test,
        queries,
    })
}

/// Loads catalog and workload, labels every query and featurizes it.
pub fn build_dataset(spec: &ExperimentSpec) -> Result<Dataset> {
    let catalog = load_catalog(spec)?;
    let (queries, _) = load_workload(spec, &catalog, &mut DomainStore::new())?;
    let labeled = label_workload(spec, &catalog, &queries)?;
    build_dataset_from(spec, catalog.table_count(), &labeled)
}
