//! Synthetic schemas, seeded data generation and the exact-count oracle.
//!
//! The catalog stands in for a real database: every true cardinality used by
//! the rest of the pipeline is computed here by actually evaluating joins over
//! generated rows.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rand::Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planspace::{
    CardinalityAssignment, ColumnId, JoinGraph, PlanTree, Provenance, Subplan, TableId, TableSet,
    MAX_TABLES,
};
use crate::seed::StableHasher;

fn default_zipf() -> f64 {
    1.1
}

/// A synthetic schema plus the seed its rows are generated from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaSpec {
    pub tables: Vec<TableSpec>,
    pub seed: u64,
    /// Zipf exponent for foreign-key skew.
    #[serde(default = "default_zipf")]
    pub zipf_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSpec {
    pub name: String,
    pub rows: usize,
    pub columns: Vec<ColumnSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: ColumnKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnKind {
    /// Distinct values `1..=rows`.
    Key,
    /// References a key column, written `"table.column"`.
    ForeignKey { target: String },
    /// Uniform integer attribute over `lo..=hi`.
    Int { lo: i64, hi: i64 },
}

impl ColumnSpec {
    pub fn key(name: &str) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Key,
        }
    }

    pub fn foreign_key(name: &str, target: &str) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::ForeignKey {
                target: target.into(),
            },
        }
    }

    pub fn int(name: &str, lo: i64, hi: i64) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Int { lo, hi },
        }
    }
}

impl SchemaSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SchemaSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    pub fn table_count(&self) -> usize {
        self.tables.len()
    }

    pub fn table_id(&self, name: &str) -> Result<TableId> {
        self.tables
            .iter()
            .position(|t| t.name == name)
            .ok_or_else(|| Error::Reference(format!("table `{name}`")))
    }

    pub fn column_id(&self, table: &str, column: &str) -> Result<ColumnId> {
        let t = self.table_id(table)?;
        let c = self.tables[t]
            .columns
            .iter()
            .position(|c| c.name == column)
            .ok_or_else(|| Error::Reference(format!("column `{table}.{column}`")))?;
        Ok(ColumnId::new(t, c))
    }

    pub fn table_name(&self, id: TableId) -> &str {
        &self.tables[id].name
    }

    pub fn column_name(&self, col: ColumnId) -> String {
        let t = &self.tables[col.table];
        format!("{}.{}", t.name, t.columns[col.column].name)
    }

    /// Human-readable join expression such as `A⋈B⋈C`.
    pub fn set_name(&self, set: TableSet) -> String {
        set.iter()
            .map(|t| self.table_name(t))
            .collect::<Vec<_>>()
            .join("⋈")
    }

    fn parse_target(&self, target: &str) -> Option<(usize, usize)> {
        let (t, c) = target.split_once('.')?;
        let ti = self.tables.iter().position(|x| x.name == t)?;
        let ci = self.tables[ti].columns.iter().position(|x| x.name == c)?;
        Some((ti, ci))
    }

    pub fn validate(&self) -> Result<()> {
        if self.tables.is_empty() {
            return Err(Error::InvalidSchema("schema has no tables".into()));
        }
        if self.tables.len() > MAX_TABLES {
            return Err(Error::Unsupported(format!(
                "{} tables (at most {MAX_TABLES})",
                self.tables.len()
            )));
        }
        if !(self.zipf_s.is_finite() && self.zipf_s >= 0.0) {
            return Err(Error::InvalidSchema(format!(
                "zipf_s must be a finite non-negative number, got {}",
                self.zipf_s
            )));
        }
        let mut names = HashSet::new();
        for t in &self.tables {
            if !names.insert(t.name.as_str()) {
                return Err(Error::InvalidSchema(format!("duplicate table `{}`", t.name)));
            }
            if t.rows == 0 {
                return Err(Error::InvalidSchema(format!("table `{}` has zero rows", t.name)));
            }
            let mut cols = HashSet::new();
            for c in &t.columns {
                if !cols.insert(c.name.as_str()) {
                    return Err(Error::InvalidSchema(format!(
                        "duplicate column `{}.{}`",
                        t.name, c.name
                    )));
                }
                match &c.kind {
                    ColumnKind::Key => {}
                    ColumnKind::Int { lo, hi } => {
                        if lo > hi {
                            return Err(Error::InvalidSchema(format!(
                                "column `{}.{}` has empty domain {lo}..{hi}",
                                t.name, c.name
                            )));
                        }
                    }
                    ColumnKind::ForeignKey { target } => {
                        let Some((ti, ci)) = self.parse_target(target) else {
                            return Err(Error::InvalidSchema(format!(
                                "foreign key `{}.{}` references undefined `{target}`",
                                t.name, c.name
                            )));
                        };
                        if self.tables[ti].columns[ci].kind != ColumnKind::Key {
                            return Err(Error::InvalidSchema(format!(
                                "foreign key `{}.{}` targets `{target}`, which is not a key column",
                                t.name, c.name
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Materialized rows for one table, stored column-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableData {
    pub rows: usize,
    pub columns: Vec<Vec<i64>>,
}

/// A generated database. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    spec: SchemaSpec,
    tables: Vec<TableData>,
}

/// Builds the catalog described by `spec`. Identical specs produce identical rows.
pub fn generate_catalog(spec: &SchemaSpec) -> Result<Catalog> {
    spec.validate()?;
    let mut tables = Vec::with_capacity(spec.tables.len());
    for t in &spec.tables {
        let mut columns = Vec::with_capacity(t.columns.len());
        for c in &t.columns {
            let mut rng = StableHasher::new(spec.seed)
                .str(&t.name)
                .str(&c.name)
                .rng();
            let values: Vec<i64> = match &c.kind {
                ColumnKind::Key => (1..=t.rows as i64).collect(),
                ColumnKind::Int { lo, hi } => (0..t.rows).map(|_| rng.random_range(*lo..=*hi)).collect(),
                ColumnKind::ForeignKey { target } => {
                    let (ti, _) = spec.parse_target(target).expect("validated");
                    let domain = spec.tables[ti].rows;
                    let zipf = Zipf::new(domain as f64, spec.zipf_s)
                        .map_err(|e| Error::InvalidSchema(format!("zipf: {e}")))?;
                    (0..t.rows)
                        .map(|_| (zipf.sample(&mut rng) as i64).clamp(1, domain as i64))
                        .collect()
                }
            };
            columns.push(values);
        }
        tables.push(TableData {
            rows: t.rows,
            columns,
        });
    }
    Ok(Catalog {
        spec: spec.clone(),
        tables,
    })
}

/// True cardinalities observed while executing one plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionLog {
    pub query_id: String,
    pub entries: Vec<LogEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub subplan: Subplan,
    pub true_cardinality: u64,
}

/// Partial join result: counts of tuples grouped by the values of the
/// equivalence-class variables still needed downstream.
struct Relation {
    vars: Vec<usize>,
    groups: HashMap<Vec<i64>, u128>,
}

const NESTED_LOOP_LIMIT: usize = 64;

impl Catalog {
    pub fn spec(&self) -> &SchemaSpec {
        &self.spec
    }

    pub fn table_count(&self) -> usize {
        self.tables.len()
    }

    pub fn row_count(&self, table: TableId) -> usize {
        self.tables[table].rows
    }

    pub fn table(&self, table: TableId) -> &TableData {
        &self.tables[table]
    }

    pub fn column(&self, col: ColumnId) -> &[i64] {
        &self.tables[col.table].columns[col.column]
    }

    pub fn max_row_count(&self) -> usize {
        self.tables.iter().map(|t| t.rows).max().unwrap_or(0)
    }

    fn check_column(&self, col: ColumnId) -> Result<()> {
        match self.tables.get(col.table) {
            Some(t) if col.column < t.columns.len() => Ok(()),
            _ => Err(Error::Reference(format!(
                "column {}:{} not in catalog",
                col.table, col.column
            ))),
        }
    }

    fn check_refs(&self, sp: &Subplan) -> Result<()> {
        if let Some(t) = sp.tables.iter().find(|&t| t >= self.tables.len()) {
            return Err(Error::Reference(format!("table id {t} not in catalog")));
        }
        for s in &sp.selections {
            self.check_column(s.column)?;
            if !sp.tables.contains(s.column.table) {
                return Err(Error::Reference(format!(
                    "selection on table {} outside subplan",
                    s.column.table
                )));
            }
        }
        for c in sp.classes.iter().flatten() {
            self.check_column(*c)?;
        }
        Ok(())
    }

    /// Exact number of result tuples of `subplan`: the selections applied to
    /// each table, joined on every equivalence class restricted to the subplan.
    pub fn true_cardinality(&self, subplan: &Subplan) -> Result<u64> {
        self.check_refs(subplan)?;
        let overflow = || Error::Overflow(format!("{:?}", subplan.tables));

        let mut rels: BTreeMap<TableId, Relation> = subplan
            .tables
            .iter()
            .map(|t| (t, self.scan(t, subplan)))
            .collect();

        let first = *rels.keys().next().ok_or_else(|| {
            Error::InvalidQuery {
                query: "<subplan>".into(),
                reason: "empty table set".into(),
            }
        })?;
        let mut state = rels.remove(&first).expect("present");
        while !rels.is_empty() {
            let next = rels
                .iter()
                .find(|(_, r)| r.vars.iter().any(|v| state.vars.contains(v)))
                .map(|(&t, _)| t)
                .unwrap_or_else(|| *rels.keys().next().expect("nonempty"));
            let rel = rels.remove(&next).expect("present");
            let keep: BTreeSet<usize> = rels.values().flat_map(|r| r.vars.iter().copied()).collect();
            state = join(&state, &rel, &keep).ok_or_else(overflow)?;
        }
        let total = state
            .groups
            .values()
            .try_fold(0u128, |acc, &c| acc.checked_add(c))
            .ok_or_else(overflow)?;
        u64::try_from(total).map_err(|_| overflow())
    }

    /// Filters one table by its selections and groups the survivors by their
    /// join-variable values.
    fn scan(&self, table: TableId, sp: &Subplan) -> Relation {
        let data = &self.tables[table];
        let mut by_var: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (ci, class) in sp.classes.iter().enumerate() {
            for col in class.iter().filter(|c| c.table == table) {
                by_var.entry(ci).or_default().push(col.column);
            }
        }
        let sels: Vec<_> = sp
            .selections
            .iter()
            .filter(|s| s.column.table == table)
            .collect();
        let vars: Vec<usize> = by_var.keys().copied().collect();
        let mut groups: HashMap<Vec<i64>, u128> = HashMap::new();
        'rows: for r in 0..data.rows {
            for s in &sels {
                if !s.op.eval(data.columns[s.column.column][r], s.value) {
                    continue 'rows;
                }
            }
            let mut key = Vec::with_capacity(vars.len());
            for cols in by_var.values() {
                let v = data.columns[cols[0]][r];
                if cols[1..].iter().any(|&c| data.columns[c][r] != v) {
                    continue 'rows;
                }
                key.push(v);
            }
            *groups.entry(key).or_insert(0) += 1;
        }
        Relation { vars, groups }
    }

    /// True cardinalities of the given subsets of `graph`'s query.
    pub fn true_assignment(
        &self,
        graph: &JoinGraph,
        sets: impl IntoIterator<Item = TableSet>,
    ) -> Result<CardinalityAssignment> {
        let mut out = CardinalityAssignment::new();
        for set in sets {
            let value = self.true_cardinality(&graph.subplan(set)?)?;
            out.insert(set, value as f64, Provenance::True);
        }
        Ok(out)
    }

    /// Executes `plan` for the query behind `graph`, reporting the true
    /// cardinality of every node (leaves included) in post-order.
    pub fn execute_query(&self, graph: &JoinGraph, plan: &PlanTree) -> Result<ExecutionLog> {
        let mut entries = Vec::new();
        for set in plan.node_sets() {
            let subplan = graph.subplan(set)?;
            let true_cardinality = self.true_cardinality(&subplan)?;
            entries.push(LogEntry {
                subplan,
                true_cardinality,
            });
        }
        Ok(ExecutionLog {
            query_id: graph.query_id.clone(),
            entries,
        })
    }
}

fn join(a: &Relation, b: &Relation, keep: &BTreeSet<usize>) -> Option<Relation> {
    let shared: Vec<usize> = a.vars.iter().copied().filter(|v| b.vars.contains(v)).collect();
    let mut out_vars: Vec<usize> = a
        .vars
        .iter()
        .chain(b.vars.iter())
        .copied()
        .filter(|v| keep.contains(v))
        .collect();
    out_vars.sort_unstable();
    out_vars.dedup();

    let pos = |vars: &[usize], v: usize| vars.iter().position(|&x| x == v);
    let a_shared: Vec<usize> = shared.iter().map(|&v| pos(&a.vars, v).unwrap()).collect();
    let b_shared: Vec<usize> = shared.iter().map(|&v| pos(&b.vars, v).unwrap()).collect();
    // (from_a, index) for each output variable
    let out_src: Vec<(bool, usize)> = out_vars
        .iter()
        .map(|&v| match pos(&a.vars, v) {
            Some(i) => (true, i),
            None => (false, pos(&b.vars, v).unwrap()),
        })
        .collect();

    let mut groups: HashMap<Vec<i64>, u128> = HashMap::new();
    let mut emit = |ka: &[i64], ca: u128, kb: &[i64], cb: u128| -> Option<()> {
        let key: Vec<i64> = out_src
            .iter()
            .map(|&(from_a, i)| if from_a { ka[i] } else { kb[i] })
            .collect();
        let slot = groups.entry(key).or_insert(0);
        *slot = slot.checked_add(ca.checked_mul(cb)?)?;
        Some(())
    };
    let project = |key: &[i64], idx: &[usize]| -> Vec<i64> { idx.iter().map(|&i| key[i]).collect() };

    if a.groups.len() < NESTED_LOOP_LIMIT && b.groups.len() < NESTED_LOOP_LIMIT {
        for (ka, &ca) in &a.groups {
            for (kb, &cb) in &b.groups {
                if a_shared.iter().zip(&b_shared).all(|(&i, &j)| ka[i] == kb[j]) {
                    emit(ka, ca, kb, cb)?;
                }
            }
        }
    } else if a.groups.len() <= b.groups.len() {
        let mut index: HashMap<Vec<i64>, Vec<(&Vec<i64>, u128)>> = HashMap::new();
        for (ka, &ca) in &a.groups {
            index.entry(project(ka, &a_shared)).or_default().push((ka, ca));
        }
        for (kb, &cb) in &b.groups {
            if let Some(matches) = index.get(&project(kb, &b_shared)) {
                for &(ka, ca) in matches {
                    emit(ka, ca, kb, cb)?;
                }
            }
        }
    } else {
        let mut index: HashMap<Vec<i64>, Vec<(&Vec<i64>, u128)>> = HashMap::new();
        for (kb, &cb) in &b.groups {
            index.entry(project(kb, &b_shared)).or_default().push((kb, cb));
        }
        for (ka, &ca) in &a.groups {
            if let Some(matches) = index.get(&project(ka, &a_shared)) {
                for &(kb, cb) in matches {
                    emit(ka, ca, kb, cb)?;
                }
            }
        }
    }
    Some(Relation {
        vars: out_vars,
        groups,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::planspace::{infer_join_closure, BoundSelection, CmpOp, Query};

    /// Independent evaluator: enumerates every tuple combination with nested
    /// loops and checks all predicates directly.
    fn nested_loop_count(catalog: &Catalog, sp: &Subplan) -> u64 {
        let tables: Vec<TableId> = sp.tables.iter().collect();
        fn rec(
            catalog: &Catalog,
            sp: &Subplan,
            tables: &[TableId],
            bound: &mut Vec<(TableId, usize)>,
        ) -> u64 {
            if bound.len() == tables.len() {
                return 1;
            }
            let t = tables[bound.len()];
            let mut total = 0;
            for r in 0..catalog.row_count(t) {
                let sel_ok = sp
                    .selections
                    .iter()
                    .filter(|s| s.column.table == t)
                    .all(|s| s.op.eval(catalog.column(s.column)[r], s.value));
                if !sel_ok {
                    continue;
                }
                bound.push((t, r));
                let lookup = |c: &ColumnId| {
                    bound
                        .iter()
                        .find(|(bt, _)| *bt == c.table)
                        .map(|&(_, br)| catalog.column(*c)[br])
                };
                let joins_ok = sp.classes.iter().all(|class| {
                    let vals: Vec<i64> = class.iter().filter_map(lookup).collect();
                    vals.windows(2).all(|w| w[0] == w[1])
                });
                if joins_ok {
                    total += rec(catalog, sp, tables, bound);
                }
                bound.pop();
            }
            total
        }
        rec(catalog, sp, &tables, &mut Vec::new())
    }

    fn s3() -> Catalog {
        generate_catalog(&fixtures::s3_schema()).unwrap()
    }

    #[test]
    fn s3_row_counts_follow_the_spec() {
        let c = s3();
        assert_eq!(c.row_count(0), 100);
        assert_eq!(c.row_count(1), 300);
        assert_eq!(c.row_count(2), 200);
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(s3(), s3());
        let mut other = fixtures::s3_schema();
        other.seed = 43;
        assert_ne!(generate_catalog(&other).unwrap(), s3());
    }

    #[test]
    fn keys_are_dense_and_fks_stay_in_domain() {
        let c = s3();
        let a_id = c.spec().column_id("A", "id").unwrap();
        assert_eq!(c.column(a_id), (1..=100).collect::<Vec<_>>().as_slice());
        let b_aid = c.spec().column_id("B", "aid").unwrap();
        assert!(c.column(b_aid).iter().all(|v| (1..=100).contains(v)));
        // skewed: key 1 is the most frequent reference
        let ones = c.column(b_aid).iter().filter(|&&v| v == 1).count();
        let fifties = c.column(b_aid).iter().filter(|&&v| v == 50).count();
        assert!(ones > fifties);
    }

    #[test]
    fn dangling_foreign_key_is_rejected() {
        let mut spec = fixtures::s3_schema();
        spec.tables[1].columns[1] = ColumnSpec::foreign_key("aid", "X.id");
        let err = generate_catalog(&spec).unwrap_err();
        assert!(err.to_string().contains("X.id"), "{err}");
    }

    #[test]
    fn zero_rows_and_non_key_targets_are_rejected() {
        let mut spec = fixtures::s3_schema();
        spec.tables[0].rows = 0;
        assert!(matches!(spec.validate(), Err(Error::InvalidSchema(_))));
        let mut spec = fixtures::s3_schema();
        spec.tables[1].columns[1] = ColumnSpec::foreign_key("aid", "A.x");
        assert!(spec.validate().unwrap_err().to_string().contains("not a key"));
    }

    #[test]
    fn schema_json_round_trips() {
        let spec = fixtures::s3_schema();
        assert_eq!(SchemaSpec::from_json(&spec.to_json()).unwrap(), spec);
    }

    fn s3_graph(selections: &str) -> JoinGraph {
        let text = format!(
            r#"{{"id":"q","tables":["A","B","C"],"joins":[["A","id","B","aid"],["A","id","C","aid"]],"selections":{selections}}}"#
        );
        let q: Query = serde_json::from_str(&text).unwrap();
        infer_join_closure(&q, &fixtures::s3_schema()).unwrap()
    }

    #[test]
    fn empty_selection_counts_zero() {
        let c = s3();
        let g = s3_graph(r#"[{"table":"A","col":"x","op":">","value":1000}]"#);
        let sp = g.subplan(TableSet::singleton(0)).unwrap();
        assert_eq!(c.true_cardinality(&sp).unwrap(), 0);
    }

    #[test]
    fn fk_join_equals_fact_size() {
        let c = s3();
        let g = s3_graph("[]");
        let ab = g.subplan(TableSet::from_ids([0, 1])).unwrap();
        assert_eq!(c.true_cardinality(&ab).unwrap(), 300);
        let ac = g.subplan(TableSet::from_ids([0, 2])).unwrap();
        assert_eq!(c.true_cardinality(&ac).unwrap(), 200);
    }

    #[test]
    fn three_way_join_matches_nested_loop_oracle() {
        let c = s3();
        let g = s3_graph(r#"[{"table":"A","col":"x","op":"<=","value":20}]"#);
        for set in [
            TableSet::from_ids([0, 1, 2]),
            TableSet::from_ids([1, 2]),
            TableSet::from_ids([0, 1]),
        ] {
            let sp = g.subplan(set).unwrap();
            assert_eq!(c.true_cardinality(&sp).unwrap(), nested_loop_count(&c, &sp), "{set:?}");
        }
    }

    #[test]
    fn chain_and_same_table_classes_match_oracle() {
        let c = s3();
        // B.y = C.z forms a second class next to the A.id class
        let q: Query = serde_json::from_str(
            r#"{"id":"q","tables":["A","B","C"],"joins":[["A","id","B","aid"],["B","y","C","z"]],"selections":[]}"#,
        )
        .unwrap();
        let g = infer_join_closure(&q, &fixtures::s3_schema()).unwrap();
        let sp = g.subplan(TableSet::from_ids([0, 1, 2])).unwrap();
        assert_eq!(c.true_cardinality(&sp).unwrap(), nested_loop_count(&c, &sp));
    }

    #[test]
    fn unknown_references_are_errors() {
        let c = s3();
        let sp = Subplan {
            tables: TableSet::from_ids([0, 7]),
            selections: vec![],
            classes: vec![],
        };
        assert!(matches!(c.true_cardinality(&sp), Err(Error::Reference(_))));
        let sp = Subplan {
            tables: TableSet::singleton(0),
            selections: vec![BoundSelection {
                column: ColumnId::new(0, 9),
                op: CmpOp::Eq,
                value: 1,
            }],
            classes: vec![],
        };
        assert!(matches!(c.true_cardinality(&sp), Err(Error::Reference(_))));
    }

    #[test]
    fn execution_log_covers_every_plan_node() {
        let c = s3();
        let g = s3_graph(r#"[{"table":"A","col":"x","op":"<","value":30}]"#);
        let plan = PlanTree::join(
            PlanTree::join(PlanTree::Leaf(0), PlanTree::Leaf(1)),
            PlanTree::Leaf(2),
        );
        let log = c.execute_query(&g, &plan).unwrap();
        let sets: Vec<TableSet> = log.entries.iter().map(|e| e.subplan.tables).collect();
        assert_eq!(
            sets,
            vec![
                TableSet::singleton(0),
                TableSet::singleton(1),
                TableSet::from_ids([0, 1]),
                TableSet::singleton(2),
                TableSet::from_ids([0, 1, 2]),
            ]
        );
        for e in &log.entries {
            assert_eq!(e.true_cardinality, c.true_cardinality(&e.subplan).unwrap());
        }
        let single = c.execute_query(&g, &PlanTree::Leaf(0)).unwrap();
        assert_eq!(single.entries.len(), 1);
    }

    #[test]
    fn adding_a_table_is_bounded_by_its_row_count() {
        let c = s3();
        let g = s3_graph(r#"[{"table":"B","col":"y","op":">=","value":5}]"#);
        let ab = c.true_cardinality(&g.subplan(TableSet::from_ids([0, 1])).unwrap()).unwrap();
        let abc = c.true_cardinality(&g.subplan(TableSet::from_ids([0, 1, 2])).unwrap()).unwrap();
        assert!(abc <= ab * c.row_count(2) as u64);
    }
}
