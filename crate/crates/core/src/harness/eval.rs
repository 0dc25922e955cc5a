use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::dataset::{Dataset, LabeledQuery};
use super::report::{EvaluationReport, ReportKind, ScenarioResult, Summary};
use super::spec::ExperimentSpec;
use super::provenance;
use crate::catalog::Catalog;
use crate::collector::{EstimationContext, Estimator};
use crate::error::{Error, Result};
use crate::model::{evaluate, predict, train_baseline_dt, Checkpoint, DecisionTree, LabeledExample};
use crate::planspace::{CardinalityAssignment, PlanLabel, Provenance, TableSet};
use crate::seed::StableHasher;

fn originals(examples: &[LabeledExample]) -> Vec<LabeledExample> {
    examples.iter().filter(|e| e.replica_id == 0).cloned().collect()
}

/// Decision tree over the normalized L1 of the original training examples.
pub fn train_baseline(spec: &ExperimentSpec, dataset: &Dataset) -> Result<DecisionTree> {
    let train = originals(&dataset.train);
    let l1: Vec<f64> = train.iter().map(LabeledExample::l1_input).collect();
    let labels: Vec<PlanLabel> = train.iter().map(|e| e.label).collect();
    train_baseline_dt(
        &l1,
        &labels,
        &spec.baseline.max_depth_grid,
        spec.baseline.folds,
        spec.seed_for("baseline"),
    )
}

/// Scores the model, and the decision tree when given, on the test split.
pub fn eval_offline(
    spec: &ExperimentSpec,
    ckpt: &Checkpoint,
    tree: Option<&DecisionTree>,
    dataset: &Dataset,
) -> Result<EvaluationReport> {
    let test = originals(&dataset.test);
    let actual: Vec<PlanLabel> = test.iter().map(|e| e.label).collect();
    let predicted = evaluate(&ckpt.params, &test, spec.threshold)?;
    let mut baselines = Vec::new();
    if let Some(tree) = tree {
        let dt: Vec<PlanLabel> = test.iter().map(|e| tree.predict(e.l1_input())).collect();
        baselines.push(ScenarioResult::new("baseline_dt", None, &dt, &actual)?);
    }
    let l1: Vec<f64> = test.iter().map(LabeledExample::l1_input).collect();
    Ok(EvaluationReport {
        kind: ReportKind::Offline,
        scenarios: vec![ScenarioResult::new("model", None, &predicted, &actual)?],
        baselines,
        l1_summary: Summary::of(&l1),
        windows: Vec::new(),
        provenance: provenance(spec),
    })
}

/// Surrogate values for every subplan (join size ≥ 2) of `q`.
pub fn surrogate_values(q: &LabeledQuery, surrogate: &Estimator) -> Result<CardinalityAssignment> {
    let ctx = EstimationContext::with_truth(&q.query.id, &q.truth);
    surrogate.estimate_all(&q.graph, q.space.iter(), &ctx, Provenance::Surrogate)
}

/// Reference values for one query: a seeded `⌈fraction·N⌉` of its subplans
/// take the true value and the rest the surrogate. For a fixed seed the
/// true subsets are nested as `fraction` grows.
pub fn mixed_reference(
    q: &LabeledQuery,
    surrogate: &CardinalityAssignment,
    fraction: f64,
    seed: u64,
) -> Result<CardinalityAssignment> {
    let mut sets: Vec<TableSet> = q.space.iter().collect();
    sets.shuffle(&mut StableHasher::new(seed).str("mix").str(&q.query.id).rng());
    let n_true = ((fraction * sets.len() as f64) - 1e-9).ceil().max(0.0) as usize;
    let mut out = CardinalityAssignment::new();
    for (i, &set) in sets.iter().enumerate() {
        let (value, prov) = if i < n_true {
            (q.truth.require(set)?, Provenance::True)
        } else {
            (surrogate.require(set)?, Provenance::Surrogate)
        };
        out.insert(set, value, prov);
    }
    Ok(out)
}

/// One scenario per mix fraction over all of `labeled`. The L1 summary
/// describes the scenario with the largest fraction.
pub fn eval_online(
    spec: &ExperimentSpec,
    ckpt: &Checkpoint,
    catalog: &Catalog,
    labeled: &[LabeledQuery],
) -> Result<EvaluationReport> {
    let surrogate = Estimator::new(spec.surrogate, catalog);
    let surrogates: Vec<CardinalityAssignment> = labeled
        .par_iter()
        .map(|q| surrogate_values(q, &surrogate))
        .collect::<Result<_>>()?;
    let actual: Vec<PlanLabel> = labeled.iter().map(|q| q.label).collect();
    let seed = spec.seed_for("online");
    let mut scenarios = Vec::with_capacity(spec.mix_fractions.len());
    let mut l1 = Vec::new();
    for &f in &spec.mix_fractions {
        let preds: Vec<(PlanLabel, f64)> = labeled
            .par_iter()
            .zip(&surrogates)
            .map(|(q, s)| {
                let reference = mixed_reference(q, s, f, seed)?;
                let p = predict(
                    &ckpt.params,
                    &ckpt.vocab,
                    &ckpt.l1_weights,
                    &q.graph,
                    &q.est,
                    |sp| reference.require(sp.tables),
                    spec.threshold,
                )?;
                Ok((p.label, p.l1.normalized()))
            })
            .collect::<Result<_>>()?;
        let labels: Vec<PlanLabel> = preds.iter().map(|p| p.0).collect();
        l1 = preds.iter().map(|p| p.1).collect();
        scenarios.push(ScenarioResult::new(&format!("f={f}"), Some(f), &labels, &actual)?);
    }
    if scenarios.is_empty() {
        return Err(Error::Config("no mix fractions".into()));
    }
    Ok(EvaluationReport {
        kind: ReportKind::Online,
        scenarios,
        baselines: Vec::new(),
        l1_summary: Summary::of(&l1),
        windows: Vec::new(),
        provenance: provenance(spec),
    })
}
