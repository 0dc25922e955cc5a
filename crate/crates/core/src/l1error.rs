//! Per-join-size position vectors and the L1 distance between the true and
//! estimated subplan orderings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planspace::{CardinalityAssignment, SubplanSpace, TableSet};

/// Same-size subplans with their 1-based ranks under two assignments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionVectorPair {
    pub k: usize,
    /// Canonical order.
    pub subplans: Vec<TableSet>,
    /// `rho[i]` is the rank of `subplans[i]` under the true (or surrogate) values.
    pub rho: Vec<usize>,
    pub rho_hat: Vec<usize>,
}

/// 1-based rank of each subplan after a stable ascending sort by value.
/// Equal values fall back to canonical table-set order.
pub fn positions(subplans: &[TableSet], cards: &CardinalityAssignment) -> Result<Vec<usize>> {
    let values = subplans
        .iter()
        .map(|&s| cards.require(s))
        .collect::<Result<Vec<f64>>>()?;
    let mut order: Vec<usize> = (0..subplans.len()).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .total_cmp(&values[b])
            .then_with(|| subplans[a].cmp(&subplans[b]))
    });
    let mut rank = vec![0; subplans.len()];
    for (pos, &i) in order.iter().enumerate() {
        rank[i] = pos + 1;
    }
    Ok(rank)
}

pub fn position_vectors(
    subplans: &[TableSet],
    truth_like: &CardinalityAssignment,
    est: &CardinalityAssignment,
) -> Result<PositionVectorPair> {
    let k = subplans.first().map_or(0, |s| s.len());
    if let Some(bad) = subplans.iter().find(|s| s.len() != k) {
        return Err(Error::Input(format!("subplan {bad:?} does not have join size {k}")));
    }
    let mut canonical = subplans.to_vec();
    canonical.sort();
    Ok(PositionVectorPair {
        k,
        rho: positions(&canonical, truth_like)?,
        rho_hat: positions(&canonical, est)?,
        subplans: canonical,
    })
}

/// Position vectors for every join size of a query.
pub fn query_position_vectors(
    space: &SubplanSpace,
    truth_like: &CardinalityAssignment,
    est: &CardinalityAssignment,
) -> Result<Vec<PositionVectorPair>> {
    space
        .by_k
        .values()
        .map(|sets| position_vectors(sets, truth_like, est))
        .collect()
}

impl PositionVectorPair {
    pub fn len(&self) -> usize {
        self.subplans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subplans.is_empty()
    }

    /// Subplans listed by ascending rank under `ranks`.
    fn ordered(&self, ranks: &[usize]) -> Vec<TableSet> {
        let mut out = vec![TableSet::EMPTY; self.len()];
        for (i, &r) in ranks.iter().enumerate() {
            out[r - 1] = self.subplans[i];
        }
        out
    }

    pub fn true_order(&self) -> Vec<TableSet> {
        self.ordered(&self.rho)
    }

    pub fn est_order(&self) -> Vec<TableSet> {
        self.ordered(&self.rho_hat)
    }
}

pub fn l1_error_k(pair: &PositionVectorPair) -> u64 {
    pair.rho
        .iter()
        .zip(&pair.rho_hat)
        .map(|(&a, &b)| a.abs_diff(b) as u64)
        .sum()
}

/// Largest L1 distance between two permutations of `n` items.
pub fn max_l1(n: usize) -> u64 {
    (n * n / 2) as u64
}

/// Per-level weights `base^(k-2)`; the default halves the weight per level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L1Weights {
    pub base: f64,
}

impl Default for L1Weights {
    fn default() -> Self {
        Self { base: 0.5 }
    }
}

impl L1Weights {
    pub fn weight(&self, k: usize) -> f64 {
        self.base.powi(k as i32 - 2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1Report {
    pub per_k: BTreeMap<usize, u64>,
    pub weights: BTreeMap<usize, f64>,
    /// `N_k`, when known.
    #[serde(default)]
    pub sizes: BTreeMap<usize, usize>,
    pub aggregate: f64,
}

impl L1Report {
    /// Total number of subplans `N`.
    pub fn subplan_count(&self) -> usize {
        self.sizes.values().sum()
    }

    /// Largest aggregate attainable with these sizes and weights.
    pub fn max_aggregate(&self) -> f64 {
        self.sizes
            .iter()
            .map(|(k, &n)| self.weights.get(k).copied().unwrap_or(0.0) * max_l1(n) as f64)
            .sum()
    }

    /// Aggregate scaled into `[0, 1]` by [`max_aggregate`](Self::max_aggregate).
    pub fn normalized(&self) -> f64 {
        let max = self.max_aggregate();
        if max > 0.0 {
            self.aggregate / max
        } else {
            0.0
        }
    }
}

/// Weighted sum of per-level errors. Join sizes start at 2.
pub fn aggregate_l1(per_k: &BTreeMap<usize, u64>, weights: &L1Weights) -> L1Report {
    let w: BTreeMap<usize, f64> = per_k.keys().map(|&k| (k, weights.weight(k))).collect();
    let aggregate = per_k.iter().map(|(k, &l1)| w[k] * l1 as f64).sum();
    L1Report {
        per_k: per_k.clone(),
        weights: w,
        sizes: BTreeMap::new(),
        aggregate,
    }
}

/// Full report for one query from its position-vector pairs.
pub fn l1_report(pairs: &[PositionVectorPair], weights: &L1Weights) -> L1Report {
    let per_k = pairs.iter().map(|p| (p.k, l1_error_k(p))).collect();
    let mut report = aggregate_l1(&per_k, weights);
    report.sizes = pairs.iter().map(|p| (p.k, p.len())).collect();
    report
}
