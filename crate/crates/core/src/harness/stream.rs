use super::dataset::LabeledQuery;
use super::provenance;
use super::report::{EvaluationReport, ReportKind, ScenarioResult, Summary, WindowResult};
use super::spec::ExperimentSpec;
use crate::catalog::Catalog;
use crate::collector::{lookup, CardinalityCache, EstimationContext, Estimator, LookupSource};
use crate::error::Result;
use crate::model::{predict, Checkpoint};
use crate::planspace::{optimize, PlanLabel, PlanShape, TableSet};

#[derive(Debug, Clone, PartialEq)]
pub struct StreamStep {
    pub query_id: String,
    pub predicted: PlanLabel,
    pub actual: PlanLabel,
    /// Where each subplan's reference value came from, in lookup order.
    pub lookups: Vec<(TableSet, LookupSource)>,
    /// Join nodes of the plan that was executed afterwards.
    pub executed: Vec<TableSet>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamOutcome {
    pub report: EvaluationReport,
    pub cache: CardinalityCache,
    pub steps: Vec<StreamStep>,
}

/// Processes `labeled` in order. Each query is first classified with
/// reference values from `cache` (surrogate on a miss); then the plan chosen
/// from the default estimates is executed and its log ingested.
pub fn simulate_stream(
    spec: &ExperimentSpec,
    ckpt: &Checkpoint,
    catalog: &Catalog,
    labeled: &[LabeledQuery],
    mut cache: CardinalityCache,
) -> Result<StreamOutcome> {
    let surrogate = Estimator::new(spec.surrogate, catalog);
    let mut steps = Vec::with_capacity(labeled.len());
    let mut l1 = Vec::with_capacity(labeled.len());
    for q in labeled {
        let ctx = EstimationContext::with_truth(&q.query.id, &q.truth);
        let mut lookups = Vec::new();
        let p = predict(
            &ckpt.params,
            &ckpt.vocab,
            &ckpt.l1_weights,
            &q.graph,
            &q.est,
            |sp| {
                let hit = lookup(&cache, sp, &surrogate, &ctx)?;
                lookups.push((sp.tables, hit.source));
                Ok(hit.value)
            },
            spec.threshold,
        )?;
        l1.push(p.l1.normalized());
        let plan = optimize(&q.graph, &q.est, PlanShape::Bushy)?;
        let log = catalog.execute_query(&q.graph, &plan)?;
        cache.ingest_log(&log);
        steps.push(StreamStep {
            query_id: q.query.id.clone(),
            predicted: p.label,
            actual: q.label,
            lookups,
            executed: plan.join_sets(),
        });
    }

    let windows = steps
        .chunks(spec.stream_window)
        .enumerate()
        .map(|(index, w)| {
            let correct = w.iter().filter(|s| s.predicted == s.actual).count();
            let total: usize = w.iter().map(|s| s.lookups.len()).sum();
            let hits: usize = w
                .iter()
                .map(|s| s.lookups.iter().filter(|(_, src)| src.is_hit()).count())
                .sum();
            WindowResult {
                index,
                queries: w.len(),
                accuracy: correct as f64 / w.len() as f64,
                hit_rate: if total == 0 { 0.0 } else { hits as f64 / total as f64 },
            }
        })
        .collect();
    let predicted: Vec<PlanLabel> = steps.iter().map(|s| s.predicted).collect();
    let actual: Vec<PlanLabel> = steps.iter().map(|s| s.actual).collect();
    let report = EvaluationReport {
        kind: ReportKind::Stream,
        scenarios: vec![ScenarioResult::new("stream", None, &predicted, &actual)?],
        baselines: Vec::new(),
        l1_summary: Summary::of(&l1),
        windows,
        provenance: provenance(spec),
    };
    Ok(StreamOutcome { report, cache, steps })
}
