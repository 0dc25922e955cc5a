//! The cardinality collector: a cache of observed subplan cardinalities keyed
//! by patterns of decreasing specificity, backed by surrogate estimators for
//! anything the cache has not seen.
//!
//! Lookups take `&self` and ingestion takes `&mut self`, so a shared cache
//! (for example behind an `RwLock`) never exposes a half-applied ingest.

mod estimators;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::catalog::ExecutionLog;
use crate::error::{Error, Result};
use crate::planspace::{BoundSelection, Subplan, TableSet};

pub use estimators::{EstimationContext, Estimator, EstimatorSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    Exact,
    SelectionAware,
    JoinOnly,
}

impl PatternKind {
    /// Most specific first; this is the lookup order.
    pub const ALL: [PatternKind; 3] = [PatternKind::Exact, PatternKind::SelectionAware, PatternKind::JoinOnly];
}

/// Cache key for a subplan at one level of generality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pattern {
    /// Tables plus every selection, sorted.
    Exact {
        tables: TableSet,
        selections: Vec<BoundSelection>,
    },
    /// Tables plus the subset of them carrying at least one selection.
    SelectionAware { tables: TableSet, marked: TableSet },
    /// Tables only.
    JoinOnly { tables: TableSet },
}

impl Pattern {
    pub fn kind(&self) -> PatternKind {
        match self {
            Pattern::Exact { .. } => PatternKind::Exact,
            Pattern::SelectionAware { .. } => PatternKind::SelectionAware,
            Pattern::JoinOnly { .. } => PatternKind::JoinOnly,
        }
    }

    pub fn tables(&self) -> TableSet {
        match self {
            Pattern::Exact { tables, .. } | Pattern::SelectionAware { tables, .. } | Pattern::JoinOnly { tables } => {
                *tables
            }
        }
    }
}

pub fn make_pattern(subplan: &Subplan, kind: PatternKind) -> Pattern {
    let tables = subplan.tables;
    match kind {
        PatternKind::Exact => {
            let mut selections = subplan.selections.clone();
            selections.sort();
            selections.dedup();
            Pattern::Exact { tables, selections }
        }
        PatternKind::SelectionAware => Pattern::SelectionAware {
            tables,
            marked: TableSet::from_ids(subplan.selections.iter().map(|s| s.column.table)),
        },
        PatternKind::JoinOnly => Pattern::JoinOnly { tables },
    }
}

/// How repeated observations of one pattern are combined.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum RecencyPolicy {
    /// Plain arithmetic mean.
    #[default]
    Unweighted,
    /// `mean <- alpha * new + (1 - alpha) * mean`.
    Exponential { alpha: f64 },
}

impl RecencyPolicy {
    pub fn exponential() -> Self {
        RecencyPolicy::Exponential { alpha: 0.25 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CacheEntry {
    pub pattern: Pattern,
    pub mean: f64,
    /// Sum of all observations; under the unweighted policy `mean == sum / count`.
    pub sum: f64,
    pub count: u64,
    pub last_updated: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LookupSource {
    ExactHit,
    SelectionAwareHit,
    JoinOnlyHit,
    Surrogate,
}

impl LookupSource {
    fn from_kind(kind: PatternKind) -> Self {
        match kind {
            PatternKind::Exact => LookupSource::ExactHit,
            PatternKind::SelectionAware => LookupSource::SelectionAwareHit,
            PatternKind::JoinOnly => LookupSource::JoinOnlyHit,
        }
    }

    pub fn is_hit(self) -> bool {
        self != LookupSource::Surrogate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CardLookup {
    pub value: f64,
    pub source: LookupSource,
}

/// Pattern-keyed store of true cardinalities from execution logs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CardinalityCache {
    policy: RecencyPolicy,
    entries: BTreeMap<Pattern, CacheEntry>,
    clock: u64,
}

/// One line of the persistence file.
#[derive(Serialize, Deserialize)]
struct EntryRecord {
    kind: PatternKind,
    table_set: Vec<usize>,
    selection_signature: Value,
    mean: f64,
    sum: f64,
    count: u64,
    last_updated: u64,
}

impl CardinalityCache {
    pub fn new(policy: RecencyPolicy) -> Self {
        Self {
            policy,
            ..Self::default()
        }
    }

    pub fn policy(&self) -> RecencyPolicy {
        self.policy
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, pattern: &Pattern) -> Option<&CacheEntry> {
        self.entries.get(pattern)
    }

    pub fn entries(&self) -> impl Iterator<Item = &CacheEntry> {
        self.entries.values()
    }

    /// Records one true cardinality under all three pattern kinds.
    pub fn observe(&mut self, subplan: &Subplan, value: u64) {
        self.clock += 1;
        let y = value as f64;
        for kind in PatternKind::ALL {
            let pattern = make_pattern(subplan, kind);
            let entry = self.entries.entry(pattern.clone()).or_insert(CacheEntry {
                pattern,
                mean: 0.0,
                sum: 0.0,
                count: 0,
                last_updated: 0,
            });
            entry.sum += y;
            entry.count += 1;
            entry.mean = match self.policy {
                _ if entry.count == 1 => y,
                RecencyPolicy::Unweighted => entry.sum / entry.count as f64,
                RecencyPolicy::Exponential { alpha } => alpha * y + (1.0 - alpha) * entry.mean,
            };
            entry.last_updated = self.clock;
        }
    }

    pub fn ingest_log(&mut self, log: &ExecutionLog) {
        for e in &log.entries {
            self.observe(&e.subplan, e.true_cardinality);
        }
    }

    /// Most specific cached value for `subplan`, if any.
    pub fn probe(&self, subplan: &Subplan) -> Option<CardLookup> {
        PatternKind::ALL.into_iter().find_map(|kind| {
            self.entries.get(&make_pattern(subplan, kind)).map(|e| CardLookup {
                value: e.mean,
                source: LookupSource::from_kind(kind),
            })
        })
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in self.entries.values() {
            let (table_set, selection_signature) = match &e.pattern {
                Pattern::Exact { tables, selections } => (tables, serde_json::to_value(selections)),
                Pattern::SelectionAware { tables, marked } => {
                    (tables, serde_json::to_value(marked.iter().collect::<Vec<_>>()))
                }
                Pattern::JoinOnly { tables } => (tables, Ok(Value::Array(vec![]))),
            };
            let record = EntryRecord {
                kind: e.pattern.kind(),
                table_set: table_set.iter().collect(),
                selection_signature: selection_signature.expect("signature serializes"),
                mean: e.mean,
                sum: e.sum,
                count: e.count,
                last_updated: e.last_updated,
            };
            out.push_str(&serde_json::to_string(&record).expect("entry serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str, policy: RecencyPolicy) -> Result<Self> {
        let mut cache = Self::new(policy);
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let bad = |reason: String| Error::format(format!("cache line {}", i + 1), reason);
            let r: EntryRecord = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
            let tables = TableSet::from_ids(r.table_set.iter().copied());
            let pattern = match r.kind {
                PatternKind::Exact => Pattern::Exact {
                    tables,
                    selections: serde_json::from_value(r.selection_signature).map_err(|e| bad(e.to_string()))?,
                },
                PatternKind::SelectionAware => {
                    let ids: Vec<usize> =
                        serde_json::from_value(r.selection_signature).map_err(|e| bad(e.to_string()))?;
                    Pattern::SelectionAware {
                        tables,
                        marked: TableSet::from_ids(ids),
                    }
                }
                PatternKind::JoinOnly => Pattern::JoinOnly { tables },
            };
            cache.clock = cache.clock.max(r.last_updated);
            cache.entries.insert(
                pattern.clone(),
                CacheEntry {
                    pattern,
                    mean: r.mean,
                    sum: r.sum,
                    count: r.count,
                    last_updated: r.last_updated,
                },
            );
        }
        Ok(cache)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_jsonl())?)
    }

    pub fn load(path: &Path, policy: RecencyPolicy) -> Result<Self> {
        Self::from_jsonl(&std::fs::read_to_string(path)?, policy)
    }
}

/// Cached value if present, otherwise a surrogate from `estimator`.
/// Surrogates are never written back to the cache.
pub fn lookup(
    cache: &CardinalityCache,
    subplan: &Subplan,
    estimator: &Estimator,
    ctx: &EstimationContext,
) -> Result<CardLookup> {
    if let Some(hit) = cache.probe(subplan) {
        return Ok(hit);
    }
    Ok(CardLookup {
        value: estimator.estimate(subplan, ctx)?,
        source: LookupSource::Surrogate,
    })
}
