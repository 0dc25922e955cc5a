//! Surrogate cardinality estimators.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::catalog::Catalog;
use crate::error::{Error, Result};
use crate::planspace::{
    BoundSelection, CardinalityAssignment, CmpOp, ColumnId, JoinGraph, Provenance, Subplan, TableSet,
};
use crate::seed::StableHasher;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimatorSpec {
    /// Textbook estimate from per-column statistics assuming independent
    /// predicates, optionally perturbed by log-normal noise.
    Independence {
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        noise_sigma: f64,
    },
    /// Uniform integer in `[1, largest table]` per subplan.
    RandEst {
        #[serde(default)]
        seed: u64,
    },
    /// True values of the query's same-size subplans, handed out in reverse order.
    ReversedTc,
    /// True value times the same log-normal noise; exact when `noise_sigma` is 0.
    PerturbedTruth {
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        noise_sigma: f64,
    },
}

impl EstimatorSpec {
    pub fn independence() -> Self {
        EstimatorSpec::Independence {
            seed: 0,
            noise_sigma: 0.0,
        }
    }

    pub fn noisy_independence(seed: u64, noise_sigma: f64) -> Self {
        EstimatorSpec::Independence { seed, noise_sigma }
    }

    pub fn rand_est(seed: u64) -> Self {
        EstimatorSpec::RandEst { seed }
    }

    pub fn perturbed_truth(seed: u64, noise_sigma: f64) -> Self {
        EstimatorSpec::PerturbedTruth { seed, noise_sigma }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EstimatorSpec::Independence { .. } => "independence",
            EstimatorSpec::RandEst { .. } => "rand_est",
            EstimatorSpec::ReversedTc => "reversed_tc",
            EstimatorSpec::PerturbedTruth { .. } => "perturbed_truth",
        }
    }
}

/// What an estimator may know about the query being estimated.
#[derive(Debug, Clone, Copy)]
pub struct EstimationContext<'a> {
    pub query_id: &'a str,
    /// True values of the query's subplans; read by `reversed_tc` and `perturbed_truth`.
    pub truth: Option<&'a CardinalityAssignment>,
}

impl<'a> EstimationContext<'a> {
    pub fn new(query_id: &'a str) -> Self {
        Self { query_id, truth: None }
    }

    pub fn with_truth(query_id: &'a str, truth: &'a CardinalityAssignment) -> Self {
        Self {
            query_id,
            truth: Some(truth),
        }
    }
}

#[derive(Debug)]
struct ColumnStats {
    sorted: Vec<i64>,
    distinct: usize,
}

impl ColumnStats {
    fn new(values: &[i64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_unstable();
        let distinct = if sorted.is_empty() {
            0
        } else {
            1 + sorted.windows(2).filter(|w| w[0] != w[1]).count()
        };
        Self { sorted, distinct }
    }

    /// Exact fraction of rows satisfying `value op v`.
    fn selectivity(&self, op: CmpOp, v: i64) -> f64 {
        let n = self.sorted.len();
        if n == 0 {
            return 0.0;
        }
        let below = self.sorted.partition_point(|&x| x < v);
        let upto = self.sorted.partition_point(|&x| x <= v);
        let count = match op {
            CmpOp::Eq => upto - below,
            CmpOp::Lt => below,
            CmpOp::Le => upto,
            CmpOp::Gt => n - upto,
            CmpOp::Ge => n - below,
        };
        count as f64 / n as f64
    }
}

#[derive(Debug)]
struct CatalogStats {
    rows: Vec<usize>,
    columns: Vec<Vec<ColumnStats>>,
    max_rows: usize,
}

/// An estimator bound to the statistics of one catalog. Cloning is cheap.
#[derive(Debug, Clone)]
pub struct Estimator {
    spec: EstimatorSpec,
    stats: Arc<CatalogStats>,
}

impl Estimator {
    pub fn new(spec: EstimatorSpec, catalog: &Catalog) -> Self {
        let rows: Vec<usize> = (0..catalog.table_count()).map(|t| catalog.row_count(t)).collect();
        let columns = (0..catalog.table_count())
            .map(|t| catalog.table(t).columns.iter().map(|c| ColumnStats::new(c)).collect())
            .collect();
        Self {
            spec,
            stats: Arc::new(CatalogStats {
                max_rows: rows.iter().copied().max().unwrap_or(1),
                rows,
                columns,
            }),
        }
    }

    /// Same statistics, different estimator.
    pub fn with_spec(&self, spec: EstimatorSpec) -> Self {
        Self {
            spec,
            stats: Arc::clone(&self.stats),
        }
    }

    pub fn spec(&self) -> &EstimatorSpec {
        &self.spec
    }

    fn column(&self, c: ColumnId) -> Result<&ColumnStats> {
        self.stats
            .columns
            .get(c.table)
            .and_then(|t| t.get(c.column))
            .ok_or_else(|| Error::Reference(format!("column {}:{} not in catalog", c.table, c.column)))
    }

    pub fn estimate(&self, subplan: &Subplan, ctx: &EstimationContext) -> Result<f64> {
        match self.spec {
            EstimatorSpec::Independence { seed, noise_sigma } => {
                Ok(self.independence(subplan)? * noise(seed, noise_sigma, subplan.tables, ctx))
            }
            EstimatorSpec::RandEst { seed } => {
                let mut rng = StableHasher::new(seed)
                    .str(ctx.query_id)
                    .u64(subplan.tables.bits().into())
                    .rng();
                Ok(rng.random_range(1..=self.stats.max_rows as u64) as f64)
            }
            EstimatorSpec::ReversedTc => reversed(subplan.tables, ctx),
            EstimatorSpec::PerturbedTruth { seed, noise_sigma } => {
                let value = true_value(subplan.tables, ctx, "perturbed_truth")?;
                Ok(value * noise(seed, noise_sigma, subplan.tables, ctx))
            }
        }
    }

    fn independence(&self, subplan: &Subplan) -> Result<f64> {
        let mut card = 1.0;
        for t in subplan.tables.iter() {
            card *= *self
                .stats
                .rows
                .get(t)
                .ok_or_else(|| Error::Reference(format!("table id {t} not in catalog")))? as f64;
        }
        for &BoundSelection { column, op, value } in &subplan.selections {
            card *= self.column(column)?.selectivity(op, value);
        }
        // a class with m members contributes m - 1 equality edges
        for class in &subplan.classes {
            for pair in class.windows(2) {
                let v = self.column(pair[0])?.distinct.max(self.column(pair[1])?.distinct);
                card /= v.max(1) as f64;
            }
        }
        Ok(card)
    }

    /// Estimates for `sets` of one query, tagged with `provenance`.
    pub fn estimate_all(
        &self,
        graph: &JoinGraph,
        sets: impl IntoIterator<Item = TableSet>,
        ctx: &EstimationContext,
        provenance: Provenance,
    ) -> Result<CardinalityAssignment> {
        let mut out = CardinalityAssignment::new();
        for set in sets {
            out.insert(set, self.estimate(&graph.subplan(set)?, ctx)?, provenance);
        }
        Ok(out)
    }
}

/// `exp(sigma * z)` with `z` standard normal, keyed by query and table set.
fn noise(seed: u64, sigma: f64, set: TableSet, ctx: &EstimationContext) -> f64 {
    if sigma <= 0.0 {
        return 1.0;
    }
    let mut rng = StableHasher::new(seed).str(ctx.query_id).u64(set.bits().into()).rng();
    let z: f64 = StandardNormal.sample(&mut rng);
    (sigma * z).exp()
}

fn true_value(set: TableSet, ctx: &EstimationContext, estimator: &'static str) -> Result<f64> {
    ctx.truth
        .and_then(|t| t.get(set))
        .ok_or_else(|| Error::MissingContext {
            estimator,
            reason: format!("no true cardinality for {set:?} in query {}", ctx.query_id),
        })
}

fn reversed(set: TableSet, ctx: &EstimationContext) -> Result<f64> {
    let missing = |reason: String| Error::MissingContext {
        estimator: "reversed_tc",
        reason,
    };
    let truth = ctx
        .truth
        .ok_or_else(|| missing(format!("no true cardinalities for query {}", ctx.query_id)))?;
    let mut same_k: Vec<(TableSet, f64)> = truth
        .iter()
        .filter(|(s, _)| s.len() == set.len())
        .map(|(s, e)| (s, e.value))
        .collect();
    same_k.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    let pos = same_k
        .iter()
        .position(|(s, _)| *s == set)
        .ok_or_else(|| missing(format!("no true cardinality for {set:?} in query {}", ctx.query_id)))?;
    Ok(same_k[same_k.len() - 1 - pos].1)
}
