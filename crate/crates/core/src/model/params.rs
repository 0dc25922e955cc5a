use std::fmt::Debug;

use num_traits::Float;
use rand_distr::{Distribution, Normal};

use super::config::ModelConfig;
use crate::error::Result;
use crate::seed::StableHasher;

/// Floating-point type the network is evaluated in.
pub trait Scalar: Float + Send + Sync + Debug + 'static {}

impl<T: Float + Send + Sync + Debug + 'static> Scalar for T {}

pub(crate) fn k<F: Scalar>(x: f64) -> F {
    F::from(x).expect("representable constant")
}

pub const INIT_STD: f64 = 0.02;

/// Tensors per transformer block.
pub(crate) const PER_LAYER: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    Normal,
    Zeros,
    Ones,
}

/// Name, shape and initializer of one parameter tensor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorSpec {
    pub name: String,
    pub shape: Vec<usize>,
    pub init: Init,
}

impl TensorSpec {
    pub fn numel(&self) -> usize {
        self.shape.iter().product()
    }
}

/// Tensor order shared by parameters, gradients and checkpoints.
pub fn layout(cfg: &ModelConfig) -> Vec<TensorSpec> {
    let d = cfg.embed_dim;
    let mut out = Vec::new();
    let mut push = |name: String, shape: Vec<usize>, init| out.push(TensorSpec { name, shape, init });
    push("tok_emb".into(), vec![cfg.vocab_size, d], Init::Normal);
    push("pos_emb".into(), vec![cfg.max_len, d], Init::Normal);
    for l in 0..cfg.layers {
        let n = |s: &str| format!("layer{l}.{s}");
        push(n("ln1_g"), vec![d], Init::Ones);
        push(n("ln1_b"), vec![d], Init::Zeros);
        push(n("qkv_w"), vec![d, 3 * d], Init::Normal);
        push(n("qkv_b"), vec![3 * d], Init::Zeros);
        push(n("out_w"), vec![d, d], Init::Normal);
        push(n("out_b"), vec![d], Init::Zeros);
        push(n("ln2_g"), vec![d], Init::Ones);
        push(n("ln2_b"), vec![d], Init::Zeros);
        push(n("fc_w"), vec![d, 4 * d], Init::Normal);
        push(n("fc_b"), vec![4 * d], Init::Zeros);
        push(n("proj_w"), vec![4 * d, d], Init::Normal);
        push(n("proj_b"), vec![d], Init::Zeros);
    }
    push("lnf_g".into(), vec![d], Init::Ones);
    push("lnf_b".into(), vec![d], Init::Zeros);
    push("head_w1".into(), vec![d + 1, cfg.mlp_hidden], Init::Normal);
    push("head_b1".into(), vec![cfg.mlp_hidden], Init::Zeros);
    push("head_w2".into(), vec![cfg.mlp_hidden, 2], Init::Normal);
    push("head_b2".into(), vec![2], Init::Zeros);
    out
}

/// Indices into the tensor list.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Slots {
    pub layers: usize,
}

impl Slots {
    pub const TOK: usize = 0;
    pub const POS: usize = 1;

    pub fn layer(&self, l: usize, offset: usize) -> usize {
        2 + PER_LAYER * l + offset
    }

    fn tail(&self) -> usize {
        2 + PER_LAYER * self.layers
    }

    pub fn lnf_g(&self) -> usize {
        self.tail()
    }

    pub fn lnf_b(&self) -> usize {
        self.tail() + 1
    }

    pub fn head(&self, i: usize) -> usize {
        self.tail() + 2 + i
    }
}

pub(crate) mod off {
    pub const LN1_G: usize = 0;
    pub const LN1_B: usize = 1;
    pub const QKV_W: usize = 2;
    pub const QKV_B: usize = 3;
    pub const OUT_W: usize = 4;
    pub const OUT_B: usize = 5;
    pub const LN2_G: usize = 6;
    pub const LN2_B: usize = 7;
    pub const FC_W: usize = 8;
    pub const FC_B: usize = 9;
    pub const PROJ_W: usize = 10;
    pub const PROJ_B: usize = 11;
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<F> {
    pub config: ModelConfig,
    /// One flat row-major buffer per [`layout`] entry.
    pub tensors: Vec<Vec<F>>,
}

pub fn init_model<F: Scalar>(config: &ModelConfig) -> Result<ModelParams<F>> {
    config.validate()?;
    let normal = Normal::new(0.0, INIT_STD).expect("valid std");
    let tensors = layout(config)
        .iter()
        .map(|spec| match spec.init {
            Init::Zeros => vec![F::zero(); spec.numel()],
            Init::Ones => vec![F::one(); spec.numel()],
            Init::Normal => {
                let mut rng = StableHasher::new(config.seed).str(&spec.name).rng();
                (0..spec.numel()).map(|_| k(normal.sample(&mut rng))).collect()
            }
        })
        .collect();
    Ok(ModelParams {
        config: config.clone(),
        tensors,
    })
}

impl<F: Scalar> ModelParams<F> {
    pub(crate) fn slots(&self) -> Slots {
        Slots {
            layers: self.config.layers,
        }
    }

    pub fn zeros_like(&self) -> Vec<Vec<F>> {
        self.tensors.iter().map(|t| vec![F::zero(); t.len()]).collect()
    }

    pub fn num_parameters(&self) -> usize {
        self.tensors.iter().map(Vec::len).sum()
    }

    pub fn cast<G: Scalar>(&self) -> ModelParams<G> {
        ModelParams {
            config: self.config.clone(),
            tensors: self
                .tensors
                .iter()
                .map(|t| t.iter().map(|&x| G::from(x).expect("finite parameter")).collect())
                .collect(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.tensors.iter().flatten().all(|x| x.is_finite())
    }
}
