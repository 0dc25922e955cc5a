//! Seeded dataset whose label is a threshold on the normalized L1 aggregate,
//! for checking that the classifiers can learn an L1-separable problem.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featurize::{build_vocab, required_len, Vocabulary};
use crate::l1error::{l1_report, L1Weights, PositionVectorPair};
use crate::model::LabeledExample;
use crate::planspace::{PlanLabel, TableSet};
use crate::seed::StableHasher;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub train_queries: usize,
    pub test_queries: usize,
    /// Every subset of at least two of these tables is a subplan.
    pub tables: usize,
    /// Normalized L1 above which a query is sub-optimal.
    pub threshold: f64,
    /// Draws closer than this to the threshold are discarded.
    pub margin: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            train_queries: 800,
            test_queries: 200,
            tables: 4,
            threshold: 0.3,
            margin: 0.03,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub train: Vec<LabeledExample>,
    pub test: Vec<LabeledExample>,
    pub vocab: Vocabulary,
    pub max_len: usize,
    pub weights: L1Weights,
}

fn space(tables: usize) -> Vec<Vec<TableSet>> {
    let mut by_k = vec![Vec::new(); tables + 1];
    for bits in 1u32..(1 << tables) {
        let s = TableSet::from_bits(bits);
        by_k[s.len()].push(s);
    }
    by_k.into_iter()
        .skip(2)
        .map(|mut v| {
            v.sort();
            v
        })
        .collect()
}

pub fn synthetic_separable(cfg: &SyntheticConfig) -> Result<SyntheticDataset> {
    if !(2..=8).contains(&cfg.tables) {
        return Err(Error::Config(format!("synthetic table count {} outside 2..=8", cfg.tables)));
    }
    if !(cfg.margin >= 0.0 && cfg.threshold - cfg.margin > 0.0 && cfg.threshold + cfg.margin < 0.6) {
        return Err(Error::Config("synthetic threshold/margin leave no room on one side".into()));
    }
    let levels = space(cfg.tables);
    let vocab = build_vocab(cfg.tables, levels.iter().flatten().copied())?;
    let max_len = required_len(levels.iter().map(Vec::len).sum());
    let weights = L1Weights::default();
    let mut rng = StableHasher::new(cfg.seed).str("synthetic").rng();
    let total = cfg.train_queries + cfg.test_queries;
    let mut examples = Vec::with_capacity(total);
    while examples.len() < total {
        let disorder: f64 = rng.random();
        let pairs: Vec<PositionVectorPair> = levels
            .iter()
            .map(|sets| {
                let n = sets.len();
                let mut rho_hat: Vec<usize> = (1..=n).collect();
                rho_hat.shuffle(&mut rng);
                let mut rho = rho_hat.clone();
                for _ in 0..(disorder * n as f64).round() as usize {
                    let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
                    rho.swap(a, b);
                }
                PositionVectorPair {
                    k: sets[0].len(),
                    subplans: sets.clone(),
                    rho,
                    rho_hat,
                }
            })
            .collect();
        let norm = l1_report(&pairs, &weights).normalized();
        if (norm - cfg.threshold).abs() < cfg.margin {
            continue;
        }
        let label = if norm > cfg.threshold {
            PlanLabel::SubOptimal
        } else {
            PlanLabel::Optimal
        };
        let id = format!("syn_{}", examples.len());
        examples.push(LabeledExample::from_pairs(&id, &pairs, &vocab, max_len, &weights, label)?);
    }
    let test = examples.split_off(cfg.train_queries);
    Ok(SyntheticDataset {
        train: examples,
        test,
        vocab,
        max_len,
        weights,
    })
}
