//! Template-driven workload scaling: split templates into structure and
//! predicate slots, learn column domains, mutate predicates and keep the
//! variants whose result is non-empty.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::Catalog;
use crate::error::{Error, Result};
use crate::planspace::{infer_join_closure, CmpOp, JoinPredicate, Query, Selection};
use crate::seed::StableHasher;

pub const DOMAIN_SAMPLE_MAX: usize = 64;
/// Candidate attempts allowed per requested query.
pub const RETRY_FACTOR: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateComponents {
    pub template_id: String,
    pub tables: Vec<String>,
    pub joins: Vec<JoinPredicate>,
    pub slots: Vec<Selection>,
}

impl TemplateComponents {
    /// Rebuilds a query; `None` drops the slot at that position.
    pub fn recombine(&self, id: &str, slots: &[Option<Selection>]) -> Query {
        Query {
            id: id.to_string(),
            tables: self.tables.clone(),
            joins: self.joins.clone(),
            selections: slots.iter().flatten().cloned().collect(),
        }
    }

    pub fn to_query(&self) -> Query {
        let slots: Vec<_> = self.slots.iter().cloned().map(Some).collect();
        self.recombine(&self.template_id, &slots)
    }
}

pub fn extract_components(template: &Query) -> TemplateComponents {
    TemplateComponents {
        template_id: template.id.clone(),
        tables: template.tables.clone(),
        joins: template.joins.clone(),
        slots: template.selections.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainInfo {
    pub column: String,
    pub min: i64,
    pub max: i64,
    /// Up to [`DOMAIN_SAMPLE_MAX`] distinct values, ascending.
    pub sample: Vec<i64>,
    pub row_count: usize,
}

/// Learned domains keyed by `table.column`. `scans` counts catalog scans
/// made through this store and is not persisted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainStore {
    pub entries: BTreeMap<String, DomainInfo>,
    #[serde(skip)]
    scans: usize,
}

impl DomainStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, table: &str, column: &str) -> Option<&DomainInfo> {
        self.entries.get(&column_key(table, column))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scans(&self) -> usize {
        self.scans
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("domain store serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_json())?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn column_key(table: &str, column: &str) -> String {
    format!("{table}.{column}")
}

/// Returns the stored domain of `table.column`, scanning the catalog only on
/// a miss.
pub fn learn_domain(catalog: &Catalog, table: &str, column: &str, store: &mut DomainStore) -> Result<DomainInfo> {
    let key = column_key(table, column);
    if let Some(info) = store.entries.get(&key) {
        return Ok(info.clone());
    }
    let col = catalog.spec().column_id(table, column)?;
    let values = catalog.column(col);
    store.scans += 1;
    let distinct: Vec<i64> = values.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let (min, max) = match (distinct.first(), distinct.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => return Err(Error::Input(format!("column `{key}` has no rows"))),
    };
    let sample = if distinct.len() <= DOMAIN_SAMPLE_MAX {
        distinct.clone()
    } else {
        (0..DOMAIN_SAMPLE_MAX)
            .map(|i| distinct[i * (distinct.len() - 1) / (DOMAIN_SAMPLE_MAX - 1)])
            .collect()
    };
    let info = DomainInfo {
        column: key.clone(),
        min,
        max,
        sample,
        row_count: values.len(),
    };
    store.entries.insert(key, info.clone());
    Ok(info)
}

/// Per-slot mutation weights. With `out_of_domain` every slot is rewritten
/// to an equality on a value above the learned maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MutationPolicy {
    pub keep: f64,
    pub revalue: f64,
    pub drop: f64,
    pub out_of_domain: bool,
}

impl Default for MutationPolicy {
    fn default() -> Self {
        Self {
            keep: 0.4,
            revalue: 0.4,
            drop: 0.2,
            out_of_domain: false,
        }
    }
}

impl MutationPolicy {
    pub fn out_of_domain() -> Self {
        Self {
            out_of_domain: true,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let w = [self.keep, self.revalue, self.drop];
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) || w.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Config(format!(
                "mutation weights must be non-negative with a positive sum, got {w:?}"
            )));
        }
        Ok(())
    }
}

fn mutate(
    parts: &TemplateComponents,
    store: &DomainStore,
    policy: &MutationPolicy,
    rng: &mut ChaCha8Rng,
    id: &str,
) -> Result<Query> {
    let total = policy.keep + policy.revalue + policy.drop;
    let mut slots = Vec::with_capacity(parts.slots.len());
    for slot in &parts.slots {
        let domain = store.get(&slot.table, &slot.column).ok_or_else(|| {
            Error::Config(format!(
                "domain of `{}` not learned",
                column_key(&slot.table, &slot.column)
            ))
        })?;
        if policy.out_of_domain {
            slots.push(Some(Selection::new(&slot.table, &slot.column, CmpOp::Eq, domain.max.saturating_add(1))));
            continue;
        }
        let u = rng.random::<f64>() * total;
        if u < policy.keep {
            slots.push(Some(slot.clone()));
        } else if u < policy.keep + policy.revalue {
            let op = *CmpOp::ALL.choose(rng).expect("nonempty");
            let value = *domain.sample.choose(rng).expect("domains are nonempty");
            slots.push(Some(Selection::new(&slot.table, &slot.column, op, value)));
        } else {
            slots.push(None);
        }
    }
    Ok(parts.recombine(id, &slots))
}

fn template_rng(seed: u64, template_id: &str) -> ChaCha8Rng {
    StableHasher::new(seed).str("workload").str(template_id).rng()
}

/// `n` predicate variants of `template` named `{template}_{i}`; the tables
/// and joins are copied unchanged.
pub fn generate(
    template: &Query,
    store: &DomainStore,
    n: usize,
    seed: u64,
    policy: &MutationPolicy,
) -> Result<Vec<Query>> {
    if n == 0 {
        return Err(Error::Config("requested zero variants".into()));
    }
    policy.validate()?;
    let parts = extract_components(template);
    let mut rng = template_rng(seed, &template.id);
    (0..n)
        .map(|i| mutate(&parts, store, policy, &mut rng, &format!("{}_{i}", template.id)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", content = "detail", rename_all = "snake_case")]
pub enum Rejection {
    Reference(String),
    EmptyResult,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Validation {
    Accepted { cardinality: u64 },
    Rejected { rejection: Rejection },
}

impl Validation {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Validation::Accepted { .. })
    }
}

/// Accepts `query` iff it resolves against the catalog and its full join
/// returns at least one row.
pub fn validate(catalog: &Catalog, query: &Query) -> Validation {
    let rejected = |rejection| Validation::Rejected { rejection };
    let graph = match infer_join_closure(query, catalog.spec()) {
        Ok(g) => g,
        Err(e) => return rejected(Rejection::Reference(e.to_string())),
    };
    let count = graph
        .subplan(graph.tables)
        .and_then(|sp| catalog.true_cardinality(&sp));
    match count {
        Ok(0) => rejected(Rejection::EmptyResult),
        Ok(cardinality) => Validation::Accepted { cardinality },
        Err(e) => rejected(Rejection::Reference(e.to_string())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledWorkload {
    pub queries: Vec<Query>,
    pub target: usize,
    pub attempts: usize,
    pub rejected: usize,
    /// Accepted count per template id.
    pub per_template: BTreeMap<String, usize>,
    pub exhausted: bool,
    pub warnings: Vec<String>,
}

/// Cycles through `templates`, generating and validating one candidate at a
/// time until `target` distinct queries are accepted or
/// `RETRY_FACTOR * target` candidates have been tried. Exhausting the budget
/// returns the partial workload with a warning.
pub fn scale_workload(
    templates: &[Query],
    catalog: &Catalog,
    target: usize,
    seed: u64,
    policy: &MutationPolicy,
    store: &mut DomainStore,
) -> Result<ScaledWorkload> {
    if templates.is_empty() {
        return Err(Error::Config("no templates".into()));
    }
    if target == 0 {
        return Err(Error::Config("requested zero queries".into()));
    }
    policy.validate()?;
    let mut ids = BTreeSet::new();
    let mut parts = Vec::with_capacity(templates.len());
    for t in templates {
        if !ids.insert(t.id.as_str()) {
            return Err(Error::Input(format!("duplicate template id `{}`", t.id)));
        }
        infer_join_closure(t, catalog.spec())?;
        for s in &t.selections {
            learn_domain(catalog, &s.table, &s.column, store)?;
        }
        parts.push((extract_components(t), template_rng(seed, &t.id), 0usize));
    }

    let budget = RETRY_FACTOR.saturating_mul(target);
    let mut out = ScaledWorkload {
        queries: Vec::with_capacity(target),
        target,
        attempts: 0,
        rejected: 0,
        per_template: templates.iter().map(|t| (t.id.clone(), 0)).collect(),
        exhausted: false,
        warnings: Vec::new(),
    };
    let mut seen = BTreeSet::new();
    while out.queries.len() < target && out.attempts < budget {
        let (comp, rng, counter) = &mut parts[out.attempts % templates.len()];
        out.attempts += 1;
        let id = format!("{}_{}", comp.template_id, *counter);
        *counter += 1;
        let q = mutate(comp, store, policy, rng, &id)?;
        let signature = (comp.template_id.clone(), serde_json::to_string(&q.selections)?);
        if seen.contains(&signature) || !validate(catalog, &q).is_accepted() {
            out.rejected += 1;
            continue;
        }
        seen.insert(signature);
        *out.per_template.get_mut(&comp.template_id).expect("known template") += 1;
        out.queries.push(q);
    }
    if out.queries.len() < target {
        out.exhausted = true;
        let msg = Error::BudgetExhausted {
            attempts: out.attempts,
            accepted: out.queries.len(),
            target,
        }
        .to_string();
        log::warn!("{msg}");
        out.warnings.push(msg);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::generate_catalog;
    use crate::fixtures::{qry_68_9, s3_query, s3_schema, star_schema, star_templates};

    #[test]
    fn components_round_trip() {
        let (_, q) = qry_68_9();
        let parts = extract_components(&q);
        assert_eq!((parts.tables.len(), parts.joins.len(), parts.slots.len()), (5, 4, 3));
        assert_eq!(parts.to_query(), q);
        let bare = s3_query("bare", vec![]);
        assert!(extract_components(&bare).slots.is_empty());
        assert_eq!(extract_components(&bare).to_query(), bare);
    }

    #[test]
    fn domain_learning_is_cached_and_bounded() {
        let cat = generate_catalog(&s3_schema()).unwrap();
        let mut store = DomainStore::new();
        let a = learn_domain(&cat, "A", "x", &mut store).unwrap();
        let b = learn_domain(&cat, "A", "x", &mut store).unwrap();
        assert_eq!(a, b);
        assert_eq!(store.scans(), 1);
        let col = cat.spec().column_id("A", "x").unwrap();
        let vals = cat.column(col);
        assert_eq!(a.min, *vals.iter().min().unwrap());
        assert_eq!(a.max, *vals.iter().max().unwrap());
        assert!(1 <= a.min && a.max <= 50);
        assert!(a.sample.len() <= DOMAIN_SAMPLE_MAX);
        assert!(a.sample.iter().all(|v| (a.min..=a.max).contains(v) && vals.contains(v)));
        learn_domain(&cat, "B", "y", &mut store).unwrap();
        assert_eq!(store.len(), 2);
        assert!(learn_domain(&cat, "B", "nope", &mut store).is_err());

        let back = DomainStore::from_json(&store.to_json()).unwrap();
        assert_eq!(back.entries, store.entries);
    }

    #[test]
    fn large_domains_are_sampled() {
        let cat = generate_catalog(&s3_schema()).unwrap();
        let mut store = DomainStore::new();
        let d = learn_domain(&cat, "B", "id", &mut store).unwrap();
        assert_eq!(d.sample.len(), DOMAIN_SAMPLE_MAX);
        assert_eq!((d.sample[0], *d.sample.last().unwrap()), (d.min, d.max));
        assert!(d.sample.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn generate_preserves_structure() {
        let (schema, q) = qry_68_9();
        let cat = generate_catalog(&schema).unwrap();
        let mut store = DomainStore::new();
        for s in &q.selections {
            learn_domain(&cat, &s.table, &s.column, &mut store).unwrap();
        }
        let variants = generate(&q, &store, 40, 3, &MutationPolicy::default()).unwrap();
        assert_eq!(variants.len(), 40);
        let base = infer_join_closure(&q, &schema).unwrap();
        for v in &variants {
            assert_eq!((&v.tables, &v.joins), (&q.tables, &q.joins));
            let g = infer_join_closure(v, &schema).unwrap();
            assert_eq!((g.tables, &g.classes), (base.tables, &base.classes));
        }
        let year = |v: &Query| v.selections.iter().find(|s| s.table == "t").cloned();
        assert!(variants.iter().any(|v| year(v).is_none()));
        assert!(variants
            .iter()
            .any(|v| year(v).is_some_and(|s| s.value != 2000 || s.op != CmpOp::Gt)));
        assert_eq!(variants, generate(&q, &store, 40, 3, &MutationPolicy::default()).unwrap());
        assert!(generate(&q, &store, 0, 3, &MutationPolicy::default()).is_err());
        assert!(generate(&q, &DomainStore::new(), 1, 3, &MutationPolicy::default()).is_err());
    }

    #[test]
    fn validation_outcomes() {
        let cat = generate_catalog(&s3_schema()).unwrap();
        assert!(validate(&cat, &s3_query("q", vec![])).is_accepted());
        let empty = s3_query("q", vec![Selection::new("A", "x", CmpOp::Gt, 1000)]);
        assert_eq!(
            validate(&cat, &empty),
            Validation::Rejected {
                rejection: Rejection::EmptyResult
            }
        );
        let mut dangling = s3_query("q", vec![Selection::new("C", "z", CmpOp::Lt, 5)]);
        dangling.tables.retain(|t| t != "C");
        dangling.joins.retain(|j| j.left_table != "C" && j.right_table != "C");
        assert!(matches!(
            validate(&cat, &dangling),
            Validation::Rejected {
                rejection: Rejection::Reference(_)
            }
        ));
    }

    #[test]
    fn scaling_meets_the_target() {
        let cat = generate_catalog(&star_schema(1)).unwrap();
        let templates = star_templates();
        let mut store = DomainStore::new();
        let w = scale_workload(&templates, &cat, 30, 5, &MutationPolicy::default(), &mut store).unwrap();
        assert_eq!(w.queries.len(), 30);
        assert!(!w.exhausted);
        assert!(w.per_template.values().all(|&c| c >= 1));
        let ids: BTreeSet<_> = w.queries.iter().map(|q| &q.id).collect();
        assert_eq!(ids.len(), 30);
        assert!(w.queries.iter().all(|q| validate(&cat, q).is_accepted()));

        let one = scale_workload(&templates, &cat, 1, 5, &MutationPolicy::default(), &mut store).unwrap();
        assert_eq!(one.queries.len(), 1);
    }

    #[test]
    fn forced_rejection_exhausts_the_budget() {
        let cat = generate_catalog(&star_schema(1)).unwrap();
        let mut store = DomainStore::new();
        let w = scale_workload(&star_templates(), &cat, 4, 0, &MutationPolicy::out_of_domain(), &mut store).unwrap();
        assert!(w.exhausted && w.queries.is_empty());
        assert_eq!(w.attempts, 4 * RETRY_FACTOR);
        assert_eq!(w.warnings.len(), 1);
        assert!(scale_workload(&[], &cat, 4, 0, &MutationPolicy::default(), &mut store).is_err());
    }
}
