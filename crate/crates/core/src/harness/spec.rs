use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::collector::{EstimatorSpec, RecencyPolicy};
use crate::error::{Error, Result};
use crate::l1error::L1Weights;
use crate::model::{ModelConfig, TrainConfig};
use crate::seed::derive;
use crate::workloadgen::MutationPolicy;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum WorkloadSource {
    /// A JSONL workload file.
    File { path: PathBuf },
    /// Variants scaled from the templates in a JSONL file.
    Scaled {
        templates: PathBuf,
        count: usize,
        #[serde(default)]
        policy: MutationPolicy,
    },
}

/// Transformer shape; vocabulary size and sequence length come from the data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelShape {
    pub layers: usize,
    pub heads: usize,
    pub embed_dim: usize,
    pub mlp_hidden: usize,
    pub dropout_rate: f64,
}

impl Default for ModelShape {
    fn default() -> Self {
        Self {
            layers: 2,
            heads: 4,
            embed_dim: 32,
            mlp_hidden: 64,
            dropout_rate: 0.1,
        }
    }
}

impl ModelShape {
    pub fn config(&self, vocab_size: usize, max_len: usize, seed: u64) -> ModelConfig {
        ModelConfig {
            layers: self.layers,
            heads: self.heads,
            embed_dim: self.embed_dim,
            max_len,
            vocab_size,
            mlp_hidden: self.mlp_hidden,
            dropout_rate: self.dropout_rate,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineConfig {
    pub max_depth_grid: Vec<usize>,
    pub folds: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            max_depth_grid: (1..=8).collect(),
            folds: 5,
        }
    }
}

/// One experiment. Relative paths are resolved against the directory of the
/// config file. All randomness is derived from `seed`; `train.seed` is
/// overwritten with a derived value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Schema file (JSON).
    pub catalog: PathBuf,
    pub workload: WorkloadSource,
    /// Estimator the optimizer plans with.
    pub default_estimator: EstimatorSpec,
    /// Third-party estimator standing in for unknown true cardinalities.
    pub surrogate: EstimatorSpec,
    pub mix_fractions: Vec<f64>,
    pub model: ModelShape,
    pub train: TrainConfig,
    /// Share of queries in the training split of the dataset.
    pub split_fraction: f64,
    pub c: f64,
    /// Probability above which a plan is flagged sub-optimal.
    pub threshold: f64,
    pub l1_weights: L1Weights,
    pub recency: RecencyPolicy,
    pub stream_window: usize,
    pub baseline: BaselineConfig,
    pub seed: u64,
    pub output: PathBuf,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            catalog: PathBuf::new(),
            workload: WorkloadSource::File {
                path: PathBuf::from("workload.jsonl"),
            },
            default_estimator: EstimatorSpec::perturbed_truth(101, 0.5),
            surrogate: EstimatorSpec::independence(),
            mix_fractions: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            model: ModelShape::default(),
            train: TrainConfig::default(),
            split_fraction: 0.7,
            c: 1.0,
            threshold: 0.5,
            l1_weights: L1Weights::default(),
            recency: RecencyPolicy::Unweighted,
            stream_window: 20,
            baseline: BaselineConfig::default(),
            seed: 0,
            output: PathBuf::from("out"),
            base_dir: PathBuf::new(),
        }
    }
}

impl ExperimentSpec {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let mut spec: Self = serde_json::from_str(text)?;
        spec.base_dir = base_dir.to_path_buf();
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let base = path.parent().unwrap_or(Path::new(""));
        Self::from_json(&std::fs::read_to_string(path)?, base)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.catalog.as_os_str().is_empty() {
            return fail("`catalog` path is required".into());
        }
        if self.mix_fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return fail(format!("mix fractions {:?} must lie in [0, 1]", self.mix_fractions));
        }
        if self.mix_fractions.windows(2).any(|w| w[0] >= w[1]) {
            return fail(format!("mix fractions {:?} must be strictly ascending", self.mix_fractions));
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return fail(format!("split_fraction {} outside (0, 1)", self.split_fraction));
        }
        if !(self.c >= 1.0) {
            return fail(format!("c = {} must be at least 1", self.c));
        }
        if !(0.0..1.0).contains(&self.threshold) {
            return fail(format!("threshold {} outside [0, 1)", self.threshold));
        }
        if self.stream_window == 0 {
            return fail("stream_window must be positive".into());
        }
        if let WorkloadSource::Scaled { count: 0, .. } = self.workload {
            return fail("scaled workload count must be positive".into());
        }
        if let (Some(a), Some(b)) = (noise_seed(&self.default_estimator), noise_seed(&self.surrogate)) {
            if a == b {
                return fail("default and surrogate estimators must not share a noise seed".into());
            }
        }
        self.train.validate()
    }

    /// SHA-256 of the serialized spec, hex encoded. The output location is
    /// left out so that reruns into another directory hash the same.
    pub fn config_hash(&self) -> String {
        let unplaced = Self {
            output: PathBuf::new(),
            ..self.clone()
        };
        Sha256::digest(unplaced.to_json().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn seed_for(&self, label: &str) -> u64 {
        derive(self.seed, label)
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seed_for("train"),
            ..self.train.clone()
        }
    }
}

fn noise_seed(spec: &EstimatorSpec) -> Option<u64> {
    match *spec {
        EstimatorSpec::Independence { seed, noise_sigma } | EstimatorSpec::PerturbedTruth { seed, noise_sigma }
            if noise_sigma > 0.0 =>
        {
            Some(seed)
        }
        _ => None,
    }
}
