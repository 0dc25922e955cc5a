use serde::{Deserialize, Serialize};

use super::network::{forward, ModelInput};
use super::params::ModelParams;
use crate::error::Result;
use crate::featurize::{encode_sequence, Vocabulary};
use crate::l1error::{l1_report, query_position_vectors, L1Report, L1Weights};
use crate::planspace::{enumerate_subplans, CardinalityAssignment, JoinGraph, PlanLabel, Provenance, Subplan};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: PlanLabel,
    pub p_suboptimal: f64,
    pub l1: L1Report,
}

/// Classifies the plan the optimizer would pick from `est`. `lookup`
/// supplies the reference value (true or surrogate) for each subplan; the
/// plan is flagged when the sub-optimal probability exceeds `threshold`.
pub fn predict(
    params: &ModelParams<f32>,
    vocab: &Vocabulary,
    weights: &L1Weights,
    graph: &JoinGraph,
    est: &CardinalityAssignment,
    mut lookup: impl FnMut(&Subplan) -> Result<f64>,
    threshold: f64,
) -> Result<Prediction> {
    let space = enumerate_subplans(graph);
    let mut reference = CardinalityAssignment::new();
    for set in space.iter() {
        reference.insert(set, lookup(&graph.subplan(set)?)?, Provenance::Surrogate);
    }
    let pairs = query_position_vectors(&space, &reference, est)?;
    let l1 = l1_report(&pairs, weights);
    let sequence = encode_sequence(&pairs, vocab, params.config.max_len)?;
    let l1_input = if l1.max_aggregate() > 0.0 {
        l1.aggregate / l1.max_aggregate()
    } else {
        0.0
    };
    let probs = forward(
        params,
        ModelInput {
            sequence: &sequence,
            l1: l1_input,
        },
    )?;
    let p_suboptimal = f64::from(probs[1]);
    Ok(Prediction {
        label: if p_suboptimal > threshold {
            PlanLabel::SubOptimal
        } else {
            PlanLabel::Optimal
        },
        p_suboptimal,
        l1,
    })
}
