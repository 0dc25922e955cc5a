use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use super::network::{batch_gradients, forward, ModelInput};
use super::params::{init_model, layout, ModelParams};
use super::LabeledExample;
use crate::error::{Error, Result};
use crate::planspace::PlanLabel;
use crate::seed::StableHasher;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Peak of the one-cycle schedule.
    pub learning_rate: f64,
    pub weight_decay: f64,
    /// Share of all steps spent warming up.
    pub warmup_fraction: f64,
    /// The schedule starts at `learning_rate / div_factor`...
    pub div_factor: f64,
    /// ...and ends at `learning_rate / (div_factor * final_div_factor)`.
    pub final_div_factor: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Share of queries used for training; the rest is held out.
    pub train_fraction: f64,
    /// Permuted copies added per training example.
    pub replicas: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 30,
            batch_size: 32,
            learning_rate: 3e-3,
            weight_decay: 0.01,
            warmup_fraction: 0.3,
            div_factor: 25.0,
            final_div_factor: 1e4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            train_fraction: 0.7,
            replicas: 0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return fail(format!("train_fraction {} outside (0, 1)", self.train_fraction));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return fail("epochs and batch_size must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.warmup_fraction) {
            return fail(format!("warmup_fraction {} outside [0, 1]", self.warmup_fraction));
        }
        Ok(())
    }

    /// Learning rate at `step` of `total`: linear warmup, then cosine decay.
    pub fn lr_at(&self, step: usize, total: usize) -> f64 {
        let start = self.learning_rate / self.div_factor;
        let end = start / self.final_div_factor;
        let warm = ((self.warmup_fraction * total as f64).round() as usize).max(1);
        if step < warm {
            start + (self.learning_rate - start) * step as f64 / warm as f64
        } else {
            let span = total.saturating_sub(warm).max(1);
            let t = ((step - warm) as f64 / span as f64).min(1.0);
            end + (self.learning_rate - end) * 0.5 * (1.0 + (std::f64::consts::PI * t).cos())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub heldout_accuracy: f64,
    pub learning_rate: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were returned.
    pub best_epoch: usize,
    pub best_heldout_accuracy: f64,
    pub train_examples: usize,
    pub heldout_examples: usize,
    pub warnings: Vec<String>,
}

/// Splits examples by query id so all replicas of a query land on one side.
pub fn split_by_query(
    examples: &[LabeledExample],
    train_fraction: f64,
    seed: u64,
) -> (Vec<LabeledExample>, Vec<LabeledExample>) {
    let mut ids: Vec<&str> = examples
        .iter()
        .map(|e| e.query_id.as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    ids.shuffle(&mut StableHasher::new(seed).str("split").rng());
    let n_train = ((train_fraction * ids.len() as f64).round() as usize).clamp(1.min(ids.len()), ids.len());
    let train_ids: BTreeSet<&str> = ids[..n_train].iter().copied().collect();
    examples
        .iter()
        .cloned()
        .partition(|e| train_ids.contains(e.query_id.as_str()))
}

/// Predicted labels, in input order.
pub fn evaluate(params: &ModelParams<f32>, examples: &[LabeledExample], threshold: f64) -> Result<Vec<PlanLabel>> {
    examples
        .par_iter()
        .map(|e| {
            let p = forward(params, ModelInput::from(e))?;
            Ok(if f64::from(p[1]) > threshold {
                PlanLabel::SubOptimal
            } else {
                PlanLabel::Optimal
            })
        })
        .collect()
}

fn accuracy(pred: &[PlanLabel], examples: &[LabeledExample]) -> f64 {
    if examples.is_empty() {
        return 0.0;
    }
    let hits = pred.iter().zip(examples).filter(|(p, e)| **p == e.label).count();
    hits as f64 / examples.len() as f64
}

/// Splits `dataset` by query and trains on the larger part.
pub fn train(
    dataset: &[LabeledExample],
    model_cfg: &ModelConfig,
    cfg: &TrainConfig,
) -> Result<(ModelParams<f32>, TrainHistory)> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(Error::Training("empty dataset".into()));
    }
    let (train_set, heldout) = split_by_query(dataset, cfg.train_fraction, cfg.seed);
    train_with_heldout(&train_set, &heldout, model_cfg, cfg)
}

/// AdamW with a one-cycle schedule. After every epoch the model is scored on
/// `heldout` (or on the training set when nothing is held out) and the best
/// epoch's parameters are returned.
pub fn train_with_heldout(
    train_set: &[LabeledExample],
    heldout: &[LabeledExample],
    model_cfg: &ModelConfig,
    cfg: &TrainConfig,
) -> Result<(ModelParams<f32>, TrainHistory)> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(Error::Training("empty dataset".into()));
    }
    let mut params = init_model::<f32>(model_cfg)?;
    let mut history = TrainHistory {
        train_examples: train_set.len(),
        heldout_examples: heldout.len(),
        ..TrainHistory::default()
    };
    let classes: BTreeSet<PlanLabel> = train_set.iter().map(|e| e.label).collect();
    if classes.len() < 2 {
        let msg = format!("training data contains only {:?} examples", classes.first().expect("nonempty"));
        log::warn!("{msg}");
        history.warnings.push(msg);
    }
    let decay: Vec<bool> = layout(model_cfg).iter().map(|t| t.shape.len() == 2).collect();
    let mut m = params.zeros_like();
    let mut v = params.zeros_like();
    let steps_per_epoch = train_set.len().div_ceil(cfg.batch_size);
    let total = steps_per_epoch * cfg.epochs;
    let scored = if heldout.is_empty() { train_set } else { heldout };

    let mut best: Option<(f64, ModelParams<f32>)> = None;
    let mut step = 0usize;
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut StableHasher::new(cfg.seed).str("epoch").u64(epoch as u64).rng());
        let mut loss_sum = 0.0;
        let mut lr = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&LabeledExample> = chunk.iter().map(|&i| &train_set[i]).collect();
            let (loss, grads) = batch_gradients(&params, &batch, |e| {
                (model_cfg.dropout_rate > 0.0).then(|| {
                    StableHasher::new(cfg.seed)
                        .str("dropout")
                        .u64(epoch as u64)
                        .str(&e.query_id)
                        .u64(e.replica_id as u64)
                        .rng()
                })
            })?;
            if !loss.is_finite() {
                return Err(Error::Training(format!("non-finite loss at epoch {epoch}")));
            }
            loss_sum += f64::from(loss) * batch.len() as f64;
            step += 1;
            lr = cfg.lr_at(step - 1, total);
            adamw(&mut params, &grads, &mut m, &mut v, &decay, step, lr, cfg);
        }
        let acc = accuracy(&evaluate(&params, scored, 0.5)?, scored);
        history.epochs.push(EpochRecord {
            epoch,
            train_loss: loss_sum / train_set.len() as f64,
            heldout_accuracy: acc,
            learning_rate: lr,
        });
        log::debug!("epoch {epoch}: loss {:.4}, held-out accuracy {acc:.4}", loss_sum / train_set.len() as f64);
        if best.as_ref().is_none_or(|(b, _)| acc > *b) {
            history.best_epoch = epoch;
            history.best_heldout_accuracy = acc;
            best = Some((acc, params.clone()));
        }
    }
    Ok((best.expect("at least one epoch").1, history))
}

#[allow(clippy::too_many_arguments)]
fn adamw(
    params: &mut ModelParams<f32>,
    grads: &[Vec<f32>],
    m: &mut [Vec<f32>],
    v: &mut [Vec<f32>],
    decay: &[bool],
    step: usize,
    lr: f64,
    cfg: &TrainConfig,
) {
    let (b1, b2) = (cfg.beta1, cfg.beta2);
    let c1 = 1.0 - b1.powi(step as i32);
    let c2 = 1.0 - b2.powi(step as i32);
    for (ti, tensor) in params.tensors.iter_mut().enumerate() {
        let shrink = if decay[ti] { 1.0 - lr * cfg.weight_decay } else { 1.0 };
        for (i, p) in tensor.iter_mut().enumerate() {
            let g = f64::from(grads[ti][i]);
            let mi = b1 * f64::from(m[ti][i]) + (1.0 - b1) * g;
            let vi = b2 * f64::from(v[ti][i]) + (1.0 - b2) * g * g;
            m[ti][i] = mi as f32;
            v[ti][i] = vi as f32;
            let update = (mi / c1) / ((vi / c2).sqrt() + cfg.eps);
            *p = (f64::from(*p) * shrink - lr * update) as f32;
        }
    }
}
