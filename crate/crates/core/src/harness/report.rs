use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{confusion, ConfusionMatrix};
use crate::planspace::PlanLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    Offline,
    Online,
    Stream,
}

impl ReportKind {
    pub fn stem(self) -> &'static str {
        match self {
            ReportKind::Offline => "report_offline",
            ReportKind::Online => "report_online",
            ReportKind::Stream => "report_stream",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub name: String,
    /// Share of subplans given true cardinalities, for mixed scenarios.
    pub fraction: Option<f64>,
    pub matrix: ConfusionMatrix,
    pub accuracy: f64,
    pub suboptimal_accuracy: f64,
    pub optimal_accuracy: f64,
}

impl ScenarioResult {
    pub fn new(name: &str, fraction: Option<f64>, predicted: &[PlanLabel], actual: &[PlanLabel]) -> Result<Self> {
        Ok(Self::from_matrix(name, fraction, confusion(predicted, actual)?))
    }

    pub fn from_matrix(name: &str, fraction: Option<f64>, matrix: ConfusionMatrix) -> Self {
        Self {
            name: name.to_string(),
            fraction,
            accuracy: matrix.accuracy(),
            suboptimal_accuracy: matrix.suboptimal_accuracy(),
            optimal_accuracy: matrix.optimal_accuracy(),
            matrix,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub median: f64,
    pub p90: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let at = |q: f64| v[((q * (v.len() - 1) as f64).round() as usize).min(v.len() - 1)];
        Self {
            count: v.len(),
            min: v[0],
            max: v[v.len() - 1],
            mean: v.iter().sum::<f64>() / v.len() as f64,
            median: at(0.5),
            p90: at(0.9),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowResult {
    pub index: usize,
    pub queries: usize,
    pub accuracy: f64,
    /// Share of subplan lookups answered from the cache.
    pub hit_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportProvenance {
    pub seed: u64,
    pub config_hash: String,
    pub default_estimator: String,
    pub surrogate: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub kind: ReportKind,
    pub scenarios: Vec<ScenarioResult>,
    /// Baselines evaluated on the same queries.
    pub baselines: Vec<ScenarioResult>,
    /// Normalized L1 of the evaluated examples.
    pub l1_summary: Summary,
    pub windows: Vec<WindowResult>,
    pub provenance: ReportProvenance,
}

fn pct(x: f64) -> String {
    format!("{:.2}%", 100.0 * x)
}

fn render_matrix(out: &mut String, r: &ScenarioResult) {
    let m = &r.matrix;
    let n = m.total().max(1) as f64;
    let cell = |c: usize| format!("{c} ({})", pct(c as f64 / n));
    let _ = writeln!(
        out,
        "[{}] n={} accuracy {} sub-optimal {} optimal {}",
        r.name,
        m.total(),
        pct(r.accuracy),
        pct(r.suboptimal_accuracy),
        pct(r.optimal_accuracy)
    );
    let _ = writeln!(out, "  {:<18}{:<22}{}", "", "actual optimal", "actual sub-optimal");
    let _ = writeln!(out, "  {:<18}{:<22}{}", "pred optimal", cell(m.tp), cell(m.fp));
    let _ = writeln!(out, "  {:<18}{:<22}{}", "pred sub-optimal", cell(m.fn_), cell(m.tn));
}

impl EvaluationReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let p = &self.provenance;
        let _ = writeln!(out, "{:?} evaluation", self.kind);
        let _ = writeln!(
            out,
            "seed {} config {} estimator {} surrogate {}",
            p.seed, p.config_hash, p.default_estimator, p.surrogate
        );
        let _ = writeln!(
            out,
            "\n{:<16}{:>8}{:>7}{:>7}{:>7}{:>7}{:>10}{:>12}{:>10}",
            "scenario", "n", "TP", "TN", "FP", "FN", "acc", "subopt acc", "opt acc"
        );
        for r in self.scenarios.iter().chain(&self.baselines) {
            let m = &r.matrix;
            let _ = writeln!(
                out,
                "{:<16}{:>8}{:>7}{:>7}{:>7}{:>7}{:>10}{:>12}{:>10}",
                r.name,
                m.total(),
                m.tp,
                m.tn,
                m.fp,
                m.fn_,
                pct(r.accuracy),
                pct(r.suboptimal_accuracy),
                pct(r.optimal_accuracy)
            );
        }
        out.push('\n');
        for r in self.scenarios.iter().chain(&self.baselines) {
            render_matrix(&mut out, r);
        }
        let s = &self.l1_summary;
        let _ = writeln!(
            out,
            "\nnormalized L1: n={} min {:.4} median {:.4} mean {:.4} p90 {:.4} max {:.4}",
            s.count, s.min, s.median, s.mean, s.p90, s.max
        );
        if !self.windows.is_empty() {
            let _ = writeln!(out, "\n{:<8}{:>8}{:>10}{:>10}", "window", "queries", "acc", "hit rate");
            for w in &self.windows {
                let _ = writeln!(
                    out,
                    "{:<8}{:>8}{:>10}{:>10}",
                    w.index,
                    w.queries,
                    pct(w.accuracy),
                    pct(w.hit_rate)
                );
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Writes `<stem>.json` and `<stem>.txt` into `dir`; returns both paths.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let json = dir.join(format!("{}.json", self.kind.stem()));
        let text = dir.join(format!("{}.txt", self.kind.stem()));
        std::fs::write(&json, self.to_json())?;
        std::fs::write(&text, self.render_text())?;
        Ok((json, text))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
