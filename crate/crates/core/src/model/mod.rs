//! The plan classifier: a small causal transformer over subplan token
//! sequences with an MLP head that also sees the query's L1-error, plus its
//! training loop, data augmentation and an L1-only decision-tree baseline.

mod augment;
mod baseline;
mod checkpoint;
mod config;
mod metrics;
mod network;
mod params;
mod predict;
mod train;

use serde::{Deserialize, Serialize};

pub use augment::{augment_permute, fixed_prefix};
pub use baseline::{train_baseline_dt, DecisionTree, TreeNode};
pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, Checkpoint};
pub use config::ModelConfig;
pub use metrics::{confusion, ConfusionMatrix};
pub use network::{example_gradient, forward, loss_and_gradients, ModelInput};
pub use params::{init_model, layout, Init, ModelParams, Scalar, TensorSpec, INIT_STD};
pub use predict::{predict, Prediction};
pub use train::{evaluate, split_by_query, train, train_with_heldout, EpochRecord, TrainConfig, TrainHistory};

use crate::error::Result;
use crate::featurize::{encode_sequence, TokenSequence, Vocabulary};
use crate::l1error::{l1_report, L1Weights, PositionVectorPair};
use crate::planspace::PlanLabel;

/// One training or evaluation row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub query_id: String,
    /// 0 for the original, 1.. for permuted copies.
    pub replica_id: usize,
    pub sequence: TokenSequence,
    pub l1_aggregate: f64,
    /// Largest aggregate the query could reach; used to scale the L1 input.
    pub l1_max: f64,
    pub label: PlanLabel,
}

impl LabeledExample {
    pub fn new(
        query_id: &str,
        replica_id: usize,
        sequence: TokenSequence,
        l1_aggregate: f64,
        l1_max: f64,
        label: PlanLabel,
    ) -> Self {
        Self {
            query_id: query_id.into(),
            replica_id,
            sequence,
            l1_aggregate,
            l1_max,
            label,
        }
    }

    /// Encodes a query's position vectors.
    pub fn from_pairs(
        query_id: &str,
        pairs: &[PositionVectorPair],
        vocab: &Vocabulary,
        max_len: usize,
        weights: &L1Weights,
        label: PlanLabel,
    ) -> Result<Self> {
        let report = l1_report(pairs, weights);
        Ok(Self::new(
            query_id,
            0,
            encode_sequence(pairs, vocab, max_len)?,
            report.aggregate,
            report.max_aggregate(),
            label,
        ))
    }

    /// The L1 feature fed to the head, in `[0, 1]`.
    pub fn l1_input(&self) -> f64 {
        if self.l1_max > 0.0 {
            self.l1_aggregate / self.l1_max
        } else {
            0.0
        }
    }
}

pub fn write_examples(examples: &[LabeledExample]) -> String {
    let mut out = String::new();
    for e in examples {
        out.push_str(&serde_json::to_string(e).expect("example serializes"));
        out.push('\n');
    }
    out
}

pub fn read_examples(text: &str) -> Result<Vec<LabeledExample>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| crate::error::Error::format(format!("dataset line {}", i + 1), e.to_string()))
        })
        .collect()
}
