use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub layers: usize,
    pub heads: usize,
    pub embed_dim: usize,
    pub max_len: usize,
    pub vocab_size: usize,
    pub mlp_hidden: usize,
    #[serde(default)]
    pub dropout_rate: f64,
    #[serde(default)]
    pub seed: u64,
}

impl ModelConfig {
    /// Short sequences over a six-table schema.
    pub fn job_preset(vocab_size: usize) -> Self {
        Self {
            layers: 4,
            heads: 8,
            embed_dim: 64,
            max_len: 23,
            vocab_size,
            mlp_hidden: 64,
            dropout_rate: 0.1,
            seed: 0,
        }
    }

    pub fn stats_preset(vocab_size: usize) -> Self {
        Self {
            layers: 6,
            heads: 8,
            embed_dim: 128,
            max_len: 27,
            vocab_size,
            mlp_hidden: 128,
            dropout_rate: 0.1,
            seed: 0,
        }
    }

    /// A small model that trains in seconds on CPU.
    pub fn small(vocab_size: usize, max_len: usize) -> Self {
        Self {
            layers: 2,
            heads: 2,
            embed_dim: 16,
            max_len,
            vocab_size,
            mlp_hidden: 16,
            dropout_rate: 0.0,
            seed: 0,
        }
    }

    pub fn head_dim(&self) -> usize {
        self.embed_dim / self.heads
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.heads == 0 || self.embed_dim == 0 || self.embed_dim % self.heads != 0 {
            return fail(format!(
                "embed_dim {} is not divisible by {} heads",
                self.embed_dim, self.heads
            ));
        }
        if self.max_len < 3 {
            return fail(format!("max_len {} < 3", self.max_len));
        }
        if self.vocab_size < 5 {
            return fail(format!("vocab_size {} leaves no subset tokens", self.vocab_size));
        }
        if self.mlp_hidden == 0 {
            return fail("mlp_hidden must be positive".into());
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return fail(format!("dropout_rate {} outside [0, 1)", self.dropout_rate));
        }
        Ok(())
    }
}
