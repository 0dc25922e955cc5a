//! Queries, the optimizer's subplan space, plan costing and join ordering.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::catalog::SchemaSpec;
use crate::error::{Error, Result};

/// Index of a table in its schema.
pub type TableId = usize;

/// Largest schema a [`TableSet`] can address.
pub const MAX_TABLES: usize = 30;

/// Set of schema tables, stored as a bitmask (bit `i` = table `i`).
///
/// Ordering is lexicographic over the ascending id lists, so `{0,2} < {1}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TableSet(u32);

impl TableSet {
    pub const EMPTY: TableSet = TableSet(0);

    pub fn from_bits(bits: u32) -> Self {
        Self(bits)
    }

    pub fn singleton(id: TableId) -> Self {
        debug_assert!(id < MAX_TABLES);
        Self(1 << id)
    }

    pub fn from_ids(ids: impl IntoIterator<Item = TableId>) -> Self {
        ids.into_iter().fold(Self::EMPTY, |s, id| s.with(id))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, id: TableId) -> bool {
        id < 32 && self.0 & (1 << id) != 0
    }

    pub fn with(self, id: TableId) -> Self {
        Self(self.0 | (1 << id))
    }

    pub fn union(self, other: Self) -> Self {
        Self(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        Self(self.0 & other.0)
    }

    pub fn minus(self, other: Self) -> Self {
        Self(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn first(self) -> Option<TableId> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// Ascending table ids.
    pub fn iter(self) -> impl Iterator<Item = TableId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros();
            bits &= bits - 1;
            Some(i as usize)
        })
    }

    /// Every nonempty proper subset, in increasing bitmask order.
    pub fn proper_subsets(self) -> impl Iterator<Item = TableSet> {
        let full = self.0;
        let mut sub = 0u32;
        std::iter::from_fn(move || {
            // standard submask walk: (sub - full) & full enumerates upwards
            sub = sub.wrapping_sub(full) & full;
            (sub != 0 && sub != full).then_some(TableSet(sub))
        })
    }
}

impl Ord for TableSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for TableSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for TableSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ColumnId {
    pub table: TableId,
    pub column: usize,
}

impl ColumnId {
    pub fn new(table: TableId, column: usize) -> Self {
        Self { table, column }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CmpOp {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
}

impl CmpOp {
    pub const ALL: [CmpOp; 5] = [CmpOp::Eq, CmpOp::Lt, CmpOp::Gt, CmpOp::Le, CmpOp::Ge];

    pub fn eval(self, lhs: i64, rhs: i64) -> bool {
        match self {
            CmpOp::Eq => lhs == rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Ge => lhs >= rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
        }
    }
}

/// Equality join `left_table.left_column = right_table.right_column`,
/// serialized as a four-element array.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[String; 4]", into = "[String; 4]")]
pub struct JoinPredicate {
    pub left_table: String,
    pub left_column: String,
    pub right_table: String,
    pub right_column: String,
}

impl JoinPredicate {
    pub fn new(lt: &str, lc: &str, rt: &str, rc: &str) -> Self {
        Self {
            left_table: lt.into(),
            left_column: lc.into(),
            right_table: rt.into(),
            right_column: rc.into(),
        }
    }
}

impl From<[String; 4]> for JoinPredicate {
    fn from([left_table, left_column, right_table, right_column]: [String; 4]) -> Self {
        Self {
            left_table,
            left_column,
            right_table,
            right_column,
        }
    }
}

impl From<JoinPredicate> for [String; 4] {
    fn from(j: JoinPredicate) -> Self {
        [j.left_table, j.left_column, j.right_table, j.right_column]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Selection {
    pub table: String,
    #[serde(rename = "col")]
    pub column: String,
    pub op: CmpOp,
    pub value: i64,
}

impl Selection {
    pub fn new(table: &str, column: &str, op: CmpOp, value: i64) -> Self {
        Self {
            table: table.into(),
            column: column.into(),
            op,
            value,
        }
    }
}

/// A select-project-join count query, as written in workload files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub id: String,
    pub tables: Vec<String>,
    #[serde(default)]
    pub joins: Vec<JoinPredicate>,
    #[serde(default)]
    pub selections: Vec<Selection>,
}

impl Query {
    pub fn from_json(line: &str) -> Result<Self> {
        Ok(serde_json::from_str(line)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("query serializes")
    }
}

/// Reads a workload file: one JSON query per non-empty line.
pub fn parse_workload(text: &str) -> Result<Vec<Query>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            Query::from_json(l).map_err(|e| Error::format(format!("workload line {}", i + 1), e.to_string()))
        })
        .collect()
}

pub fn write_workload(queries: &[Query]) -> String {
    let mut out = String::new();
    for q in queries {
        out.push_str(&q.to_json());
        out.push('\n');
    }
    out
}

/// A selection resolved against a schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BoundSelection {
    pub column: ColumnId,
    pub op: CmpOp,
    pub value: i64,
}

/// A connected set of tables from one query, with the selections and join
/// equivalence classes that apply inside it. Join order is irrelevant, so a
/// subplan is identified by its table set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subplan {
    pub tables: TableSet,
    pub selections: Vec<BoundSelection>,
    /// Column equivalence classes restricted to `tables`; only classes with
    /// at least two members are kept.
    pub classes: Vec<Vec<ColumnId>>,
}

impl Subplan {
    /// Join size.
    pub fn k(&self) -> usize {
        self.tables.len()
    }
}

/// The join graph of a query after transitive closure of its equality
/// predicates, bound to schema table ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinGraph {
    pub query_id: String,
    pub tables: TableSet,
    /// Column equivalence classes, each sorted, ordered by first member.
    pub classes: Vec<Vec<ColumnId>>,
    pub selections: Vec<BoundSelection>,
    adjacency: Vec<TableSet>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Resolves `query` against `schema` and closes its join predicates under
/// transitivity: two tables become adjacent when they hold columns of the
/// same equivalence class.
pub fn infer_join_closure(query: &Query, schema: &SchemaSpec) -> Result<JoinGraph> {
    let invalid = |reason: String| Error::InvalidQuery {
        query: query.id.clone(),
        reason,
    };
    if query.tables.is_empty() {
        return Err(invalid("no tables".into()));
    }
    let mut tables = TableSet::EMPTY;
    for name in &query.tables {
        let id = schema.table_id(name)?;
        if tables.contains(id) {
            return Err(invalid(format!("table `{name}` listed twice")));
        }
        tables = tables.with(id);
    }
    let in_query = |name: &str| -> Result<()> {
        if query.tables.iter().any(|t| t == name) {
            Ok(())
        } else {
            Err(invalid(format!("`{name}` is referenced but not listed in tables")))
        }
    };

    let mut columns: Vec<ColumnId> = Vec::new();
    let mut index: HashMap<ColumnId, usize> = HashMap::new();
    let mut intern = |c: ColumnId, columns: &mut Vec<ColumnId>| -> usize {
        *index.entry(c).or_insert_with(|| {
            columns.push(c);
            columns.len() - 1
        })
    };
    let mut pairs = Vec::new();
    for j in &query.joins {
        in_query(&j.left_table)?;
        in_query(&j.right_table)?;
        let l = schema.column_id(&j.left_table, &j.left_column)?;
        let r = schema.column_id(&j.right_table, &j.right_column)?;
        pairs.push((intern(l, &mut columns), intern(r, &mut columns)));
    }
    let mut parent: Vec<usize> = (0..columns.len()).collect();
    for (a, b) in pairs {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut groups: BTreeMap<usize, Vec<ColumnId>> = BTreeMap::new();
    for i in 0..columns.len() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(columns[i]);
    }
    let mut classes: Vec<Vec<ColumnId>> = groups
        .into_values()
        .map(|mut g| {
            g.sort();
            g
        })
        .filter(|g| g.len() >= 2)
        .collect();
    classes.sort();

    let mut adjacency = vec![TableSet::EMPTY; schema.table_count()];
    for class in &classes {
        let members = TableSet::from_ids(class.iter().map(|c| c.table));
        for t in members.iter() {
            adjacency[t] = adjacency[t].union(members.minus(TableSet::singleton(t)));
        }
    }

    let mut selections = Vec::with_capacity(query.selections.len());
    for s in &query.selections {
        in_query(&s.table)?;
        selections.push(BoundSelection {
            column: schema.column_id(&s.table, &s.column)?,
            op: s.op,
            value: s.value,
        });
    }

    let graph = JoinGraph {
        query_id: query.id.clone(),
        tables,
        classes,
        selections,
        adjacency,
    };
    if !graph.is_connected(tables) {
        return Err(Error::Disconnected(query.id.clone()));
    }
    Ok(graph)
}

impl JoinGraph {
    pub fn neighbors(&self, t: TableId) -> TableSet {
        self.adjacency.get(t).copied().unwrap_or_default()
    }

    /// Unordered adjacent table pairs `(a, b)` with `a < b`.
    pub fn edges(&self) -> Vec<(TableId, TableId)> {
        self.tables
            .iter()
            .flat_map(|a| {
                self.neighbors(a)
                    .intersection(self.tables)
                    .iter()
                    .filter(move |&b| b > a)
                    .map(move |b| (a, b))
            })
            .collect()
    }

    pub fn is_connected(&self, set: TableSet) -> bool {
        let Some(start) = set.first() else {
            return false;
        };
        let mut seen = TableSet::singleton(start);
        let mut frontier = seen;
        while !frontier.is_empty() {
            let mut next = TableSet::EMPTY;
            for t in frontier.iter() {
                next = next.union(self.neighbors(t));
            }
            next = next.intersection(set).minus(seen);
            seen = seen.union(next);
            frontier = next;
        }
        seen == set
    }

    /// The subplan over `set`, which must be a connected subset of the query.
    pub fn subplan(&self, set: TableSet) -> Result<Subplan> {
        if set.is_empty() || !set.is_subset(self.tables) {
            return Err(Error::InvalidQuery {
                query: self.query_id.clone(),
                reason: format!("{set:?} is not a subset of the query tables"),
            });
        }
        if !self.is_connected(set) {
            return Err(Error::Disconnected(format!("{} subplan {set:?}", self.query_id)));
        }
        let selections = self
            .selections
            .iter()
            .filter(|s| set.contains(s.column.table))
            .copied()
            .collect();
        let classes = self
            .classes
            .iter()
            .map(|c| c.iter().filter(|col| set.contains(col.table)).copied().collect::<Vec<_>>())
            .filter(|c| c.len() >= 2)
            .collect();
        Ok(Subplan {
            tables: set,
            selections,
            classes,
        })
    }

    /// Every connected subset of the query's tables (singletons included),
    /// in canonical order.
    pub fn connected_subsets(&self) -> Vec<TableSet> {
        let mut out: Vec<TableSet> = self
            .tables
            .proper_subsets()
            .chain(std::iter::once(self.tables))
            .filter(|&s| self.is_connected(s))
            .collect();
        out.sort();
        out
    }
}

/// Subplans of a query grouped by join size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubplanSpace {
    pub by_k: BTreeMap<usize, Vec<TableSet>>,
}

impl SubplanSpace {
    /// Total number of subplans across all join sizes.
    pub fn total(&self) -> usize {
        self.by_k.values().map(Vec::len).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = TableSet> + '_ {
        self.by_k.values().flatten().copied()
    }
}

/// All connected table subsets of size two and up, each once, grouped by
/// size and sorted lexicographically inside each group.
pub fn enumerate_subplans(graph: &JoinGraph) -> SubplanSpace {
    let mut by_k: BTreeMap<usize, Vec<TableSet>> = BTreeMap::new();
    for set in graph.connected_subsets() {
        if set.len() >= 2 {
            by_k.entry(set.len()).or_default().push(set);
        }
    }
    SubplanSpace { by_k }
}

/// Binary join tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PlanTree {
    Leaf(TableId),
    Join(Box<PlanTree>, Box<PlanTree>),
}

impl PlanTree {
    pub fn join(left: PlanTree, right: PlanTree) -> Self {
        PlanTree::Join(Box::new(left), Box::new(right))
    }

    pub fn tables(&self) -> TableSet {
        match self {
            PlanTree::Leaf(t) => TableSet::singleton(*t),
            PlanTree::Join(l, r) => l.tables().union(r.tables()),
        }
    }

    /// Table sets of every node, children before parents, left before right.
    pub fn node_sets(&self) -> Vec<TableSet> {
        let mut out = Vec::new();
        self.collect(&mut out, true);
        out
    }

    /// Table sets of the join (internal) nodes only.
    pub fn join_sets(&self) -> Vec<TableSet> {
        let mut out = Vec::new();
        self.collect(&mut out, false);
        out
    }

    fn collect(&self, out: &mut Vec<TableSet>, leaves: bool) {
        match self {
            PlanTree::Leaf(t) => {
                if leaves {
                    out.push(TableSet::singleton(*t));
                }
            }
            PlanTree::Join(l, r) => {
                l.collect(out, leaves);
                r.collect(out, leaves);
                out.push(self.tables());
            }
        }
    }

    /// Renders the tree as nested parentheses using schema names.
    pub fn render(&self, schema: &SchemaSpec) -> String {
        match self {
            PlanTree::Leaf(t) => schema.table_name(*t).to_string(),
            PlanTree::Join(l, r) => format!("({} ⋈ {})", l.render(schema), r.render(schema)),
        }
    }
}

/// Where a cardinality value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    True,
    Surrogate,
    Estimated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CardEntry {
    pub value: f64,
    pub provenance: Provenance,
}

/// Cardinalities for the subplans of one query, keyed by table set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CardinalityAssignment {
    entries: BTreeMap<TableSet, CardEntry>,
}

impl CardinalityAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_values(provenance: Provenance, values: impl IntoIterator<Item = (TableSet, f64)>) -> Self {
        let mut a = Self::new();
        for (set, value) in values {
            a.insert(set, value, provenance);
        }
        a
    }

    pub fn insert(&mut self, set: TableSet, value: f64, provenance: Provenance) {
        debug_assert!(value >= 0.0, "cardinalities are nonnegative");
        self.entries.insert(set, CardEntry { value, provenance });
    }

    pub fn get(&self, set: TableSet) -> Option<f64> {
        self.entries.get(&set).map(|e| e.value)
    }

    pub fn entry(&self, set: TableSet) -> Option<&CardEntry> {
        self.entries.get(&set)
    }

    pub fn require(&self, set: TableSet) -> Result<f64> {
        self.get(set)
            .ok_or_else(|| Error::IncompleteAssignment(format!("{set:?}")))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (TableSet, &CardEntry)> {
        self.entries.iter().map(|(s, e)| (*s, e))
    }

    /// Copy with every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for e in out.entries.values_mut() {
            e.value *= factor;
        }
        out
    }
}

/// C_out: the sum of the cardinalities of all join nodes. Leaves cost nothing.
pub fn cost_plan(plan: &PlanTree, cards: &CardinalityAssignment) -> Result<f64> {
    plan.join_sets()
        .into_iter()
        .map(|s| cards.require(s))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanShape {
    #[default]
    Bushy,
    /// Every join has a base table on its right side.
    LeftDeep,
}

/// Minimum-C_out join tree over the connected subsets of `graph`, found by
/// dynamic programming. Among equal-cost splits the one whose left table set
/// sorts first wins.
pub fn optimize(graph: &JoinGraph, cards: &CardinalityAssignment, shape: PlanShape) -> Result<PlanTree> {
    let subsets = graph.connected_subsets();
    // memo: best (cost, left, right) per connected subset of size >= 2
    let mut best: HashMap<TableSet, (f64, TableSet, TableSet)> = HashMap::new();
    let mut by_size = subsets.clone();
    by_size.sort_by_key(|s| s.len());
    for set in by_size.into_iter().filter(|s| s.len() >= 2) {
        let own = cards.require(set)?;
        let mut lefts: Vec<TableSet> = set
            .proper_subsets()
            .filter(|&l| graph.is_connected(l) && graph.is_connected(set.minus(l)))
            .collect();
        lefts.sort();
        let mut choice: Option<(f64, TableSet, TableSet)> = None;
        for left in lefts {
            let right = set.minus(left);
            if shape == PlanShape::LeftDeep && right.len() != 1 {
                continue;
            }
            let sub = |s: TableSet| if s.len() == 1 { 0.0 } else { best[&s].0 };
            let cost = own + sub(left) + sub(right);
            if choice.is_none_or(|(c, _, _)| cost < c) {
                choice = Some((cost, left, right));
            }
        }
        let choice = choice.ok_or_else(|| Error::Disconnected(format!("{} subplan {set:?}", graph.query_id)))?;
        best.insert(set, choice);
    }
    fn build(set: TableSet, best: &HashMap<TableSet, (f64, TableSet, TableSet)>) -> PlanTree {
        if set.len() == 1 {
            return PlanTree::Leaf(set.first().expect("nonempty"));
        }
        let (_, l, r) = best[&set];
        PlanTree::join(build(l, best), build(r, best))
    }
    Ok(build(graph.tables, &best))
}

/// Threshold for calling a plan sub-optimal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubOptConfig {
    /// Cost ratio at or above which a plan is sub-optimal.
    pub c: f64,
    /// Relative tolerance on the ratio comparison.
    pub epsilon: f64,
}

impl Default for SubOptConfig {
    fn default() -> Self {
        Self { c: 1.0, epsilon: 1e-9 }
    }
}

impl SubOptConfig {
    pub fn new(c: f64) -> Result<Self> {
        if !(c >= 1.0) {
            return Err(Error::Config(format!("c must be >= 1, got {c}")));
        }
        Ok(Self { c, ..Self::default() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanLabel {
    Optimal,
    SubOptimal,
}

impl PlanLabel {
    pub fn index(self) -> usize {
        match self {
            PlanLabel::Optimal => 0,
            PlanLabel::SubOptimal => 1,
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i == 0 {
            PlanLabel::Optimal
        } else {
            PlanLabel::SubOptimal
        }
    }
}

/// Outcome of comparing the plan chosen under estimates with the plan chosen
/// under true cardinalities, both costed with the truth.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanComparison {
    pub chosen: PlanTree,
    pub optimal: PlanTree,
    pub chosen_cost: f64,
    pub optimal_cost: f64,
    pub p_error: f64,
}

pub fn compare_plans(
    graph: &JoinGraph,
    est: &CardinalityAssignment,
    truth: &CardinalityAssignment,
    shape: PlanShape,
) -> Result<PlanComparison> {
    let chosen = optimize(graph, est, shape)?;
    let optimal = optimize(graph, truth, shape)?;
    let chosen_cost = cost_plan(&chosen, truth)?;
    let optimal_cost = cost_plan(&optimal, truth)?;
    let p_error = if optimal_cost == 0.0 {
        if chosen_cost == 0.0 {
            1.0
        } else {
            return Err(Error::ZeroOptimalCost(chosen_cost));
        }
    } else {
        chosen_cost / optimal_cost
    };
    Ok(PlanComparison {
        chosen,
        optimal,
        chosen_cost,
        optimal_cost,
        p_error,
    })
}

/// True cost of the estimate-driven plan over the true cost of the optimal plan.
pub fn p_error(graph: &JoinGraph, est: &CardinalityAssignment, truth: &CardinalityAssignment) -> Result<f64> {
    Ok(compare_plans(graph, est, truth, PlanShape::Bushy)?.p_error)
}

pub fn label_from_p_error(p_error: f64, cfg: &SubOptConfig) -> PlanLabel {
    if p_error > cfg.c * (1.0 + cfg.epsilon) {
        PlanLabel::SubOptimal
    } else {
        PlanLabel::Optimal
    }
}

pub fn label(
    graph: &JoinGraph,
    est: &CardinalityAssignment,
    truth: &CardinalityAssignment,
    cfg: &SubOptConfig,
) -> Result<PlanLabel> {
    Ok(label_from_p_error(p_error(graph, est, truth)?, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn s3_graph() -> JoinGraph {
        infer_join_closure(&fixtures::s3_query("q", vec![]), &fixtures::s3_schema()).unwrap()
    }

    fn ids(sets: &[TableSet]) -> Vec<Vec<usize>> {
        sets.iter().map(|s| s.iter().collect()).collect()
    }

    #[test]
    fn table_set_order_is_lexicographic() {
        let a = TableSet::from_ids([0, 2]);
        let b = TableSet::from_ids([1]);
        let c = TableSet::from_ids([0, 1, 2]);
        assert!(a < b);
        assert!(c < a);
        assert_eq!(TableSet::from_ids([3, 1]).iter().collect::<Vec<_>>(), vec![1, 3]);
        let subs: Vec<_> = TableSet::from_ids([0, 1, 2]).proper_subsets().collect();
        assert_eq!(subs.len(), 6);
    }

    #[test]
    fn star_closure_makes_every_pair_adjacent() {
        let (schema, q) = fixtures::qry_68_9();
        let g = infer_join_closure(&q, &schema).unwrap();
        assert_eq!(g.edges().len(), 10);
        assert_eq!(g.classes.len(), 1);
    }

    #[test]
    fn s3_closure_infers_b_c() {
        let g = s3_graph();
        assert_eq!(g.edges(), vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn chain_closure_keeps_classes_apart() {
        let q = Query {
            id: "chain".into(),
            tables: vec!["A".into(), "B".into(), "C".into()],
            joins: vec![JoinPredicate::new("A", "id", "B", "aid"), JoinPredicate::new("B", "y", "C", "z")],
            selections: vec![],
        };
        let g = infer_join_closure(&q, &fixtures::s3_schema()).unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (1, 2)]);
        let space = enumerate_subplans(&g);
        assert_eq!(ids(&space.by_k[&2]), vec![vec![0, 1], vec![1, 2]]);
        assert_eq!(space.by_k[&3].len(), 1);
    }

    #[test]
    fn disconnected_queries_are_rejected() {
        let q = Query {
            id: "x".into(),
            tables: vec!["A".into(), "B".into(), "C".into()],
            joins: vec![JoinPredicate::new("A", "id", "B", "aid")],
            selections: vec![],
        };
        assert!(matches!(
            infer_join_closure(&q, &fixtures::s3_schema()),
            Err(Error::Disconnected(_))
        ));
    }

    #[test]
    fn references_outside_the_table_list_are_rejected() {
        let q = Query {
            id: "x".into(),
            tables: vec!["A".into(), "B".into()],
            joins: vec![JoinPredicate::new("A", "id", "B", "aid")],
            selections: vec![Selection::new("C", "z", CmpOp::Eq, 1)],
        };
        assert!(matches!(
            infer_join_closure(&q, &fixtures::s3_schema()),
            Err(Error::InvalidQuery { .. })
        ));
    }

    #[test]
    fn s3_enumeration() {
        let space = enumerate_subplans(&s3_graph());
        assert_eq!(ids(&space.by_k[&2]), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(ids(&space.by_k[&3]), vec![vec![0, 1, 2]]);
        assert_eq!(space.total(), 4);
    }

    /// Brute-force connected-subset counter over all bitmasks.
    fn brute_connected_counts(g: &JoinGraph) -> BTreeMap<usize, usize> {
        let tables: Vec<usize> = g.tables.iter().collect();
        let mut counts = BTreeMap::new();
        for mask in 1u32..(1 << tables.len()) {
            let members: Vec<usize> = (0..tables.len()).filter(|i| mask & (1 << i) != 0).map(|i| tables[i]).collect();
            if members.len() < 2 {
                continue;
            }
            // flood fill using explicit edge list
            let edges = g.edges();
            let mut reached = vec![members[0]];
            let mut changed = true;
            while changed {
                changed = false;
                for &(a, b) in &edges {
                    for (x, y) in [(a, b), (b, a)] {
                        if reached.contains(&x) && members.contains(&y) && !reached.contains(&y) {
                            reached.push(y);
                            changed = true;
                        }
                    }
                }
            }
            if reached.len() == members.len() {
                *counts.entry(members.len()).or_insert(0) += 1;
            }
        }
        counts
    }

    #[test]
    fn five_table_star_enumeration_matches_brute_force() {
        let (schema, q) = fixtures::qry_68_9();
        let g = infer_join_closure(&q, &schema).unwrap();
        let space = enumerate_subplans(&g);
        let sizes: BTreeMap<usize, usize> = space.by_k.iter().map(|(k, v)| (*k, v.len())).collect();
        assert_eq!(sizes, brute_connected_counts(&g));
        assert_eq!(sizes[&2], 10);
        assert_eq!(sizes[&3], 10);
        assert_eq!(sizes[&4], 5);
        let mut all: Vec<TableSet> = space.iter().collect();
        let n = all.len();
        all.dedup();
        assert_eq!(all.len(), n);
    }

    #[test]
    fn cost_examples() {
        let ab = TableSet::from_ids([0, 1]);
        let abc = TableSet::from_ids([0, 1, 2]);
        let cards = CardinalityAssignment::from_values(Provenance::True, [(ab, 10.0), (abc, 4.0)]);
        let plan = PlanTree::join(PlanTree::join(PlanTree::Leaf(0), PlanTree::Leaf(1)), PlanTree::Leaf(2));
        assert_eq!(cost_plan(&plan, &cards).unwrap(), 14.0);
        assert_eq!(cost_plan(&PlanTree::Leaf(0), &cards).unwrap(), 0.0);

        let cd = TableSet::from_ids([2, 3]);
        let abcd = TableSet::from_ids([0, 1, 2, 3]);
        let cards = CardinalityAssignment::from_values(Provenance::True, [(ab, 10.0), (cd, 7.0), (abcd, 3.0)]);
        let bushy = PlanTree::join(
            PlanTree::join(PlanTree::Leaf(0), PlanTree::Leaf(1)),
            PlanTree::join(PlanTree::Leaf(2), PlanTree::Leaf(3)),
        );
        assert_eq!(cost_plan(&bushy, &cards).unwrap(), 20.0);
        let missing = CardinalityAssignment::new();
        assert!(matches!(cost_plan(&bushy, &missing), Err(Error::IncompleteAssignment(_))));
    }

    fn s3_truth() -> CardinalityAssignment {
        CardinalityAssignment::from_values(
            Provenance::True,
            [
                (TableSet::from_ids([0, 1]), 300.0),
                (TableSet::from_ids([0, 2]), 200.0),
                (TableSet::from_ids([1, 2]), 60000.0),
                (TableSet::from_ids([0, 1, 2]), 600.0),
            ],
        )
    }

    #[test]
    fn s3_optimizer_joins_the_cheapest_pair_first() {
        let g = s3_graph();
        let truth = s3_truth();
        let plan = optimize(&g, &truth, PlanShape::Bushy).unwrap();
        // the three possible trees cost 300+600, 200+600 and 60000+600
        assert_eq!(plan.join_sets()[0], TableSet::from_ids([0, 2]));
        assert_eq!(cost_plan(&plan, &truth).unwrap(), 800.0);
    }

    #[test]
    fn two_table_query_has_a_single_join() {
        let q = Query {
            id: "ab".into(),
            tables: vec!["A".into(), "B".into()],
            joins: vec![JoinPredicate::new("A", "id", "B", "aid")],
            selections: vec![],
        };
        let g = infer_join_closure(&q, &fixtures::s3_schema()).unwrap();
        let cards = CardinalityAssignment::from_values(Provenance::True, [(TableSet::from_ids([0, 1]), 42.0)]);
        let plan = optimize(&g, &cards, PlanShape::Bushy).unwrap();
        assert_eq!(cost_plan(&plan, &cards).unwrap(), 42.0);
    }

    #[test]
    fn p_error_and_labels() {
        let g = s3_graph();
        let truth = s3_truth();
        assert_eq!(p_error(&g, &truth, &truth).unwrap(), 1.0);
        assert_eq!(label(&g, &truth, &truth, &SubOptConfig::default()).unwrap(), PlanLabel::Optimal);

        // swap the cheapest and the most expensive pair
        let mut est = truth.clone();
        est.insert(TableSet::from_ids([0, 2]), 60000.0, Provenance::Estimated);
        est.insert(TableSet::from_ids([1, 2]), 200.0, Provenance::Estimated);
        let cmp = compare_plans(&g, &est, &truth, PlanShape::Bushy).unwrap();
        assert_ne!(cmp.chosen, cmp.optimal);
        assert_eq!(cmp.p_error, (60000.0 + 600.0) / 800.0);
        assert_eq!(label(&g, &est, &truth, &SubOptConfig::default()).unwrap(), PlanLabel::SubOptimal);

        assert_eq!(p_error(&g, &est.scaled(10.0), &truth).unwrap(), cmp.p_error);
    }

    #[test]
    fn label_threshold_contract() {
        let cfg = SubOptConfig::default();
        assert_eq!(label_from_p_error(1.0, &cfg), PlanLabel::Optimal);
        assert_eq!(label_from_p_error(1.37, &cfg), PlanLabel::SubOptimal);
        assert_eq!(label_from_p_error(1.0 + 1e-12, &cfg), PlanLabel::Optimal);
        assert!(SubOptConfig::new(0.5).is_err());
    }

    #[test]
    fn zero_cost_optimum() {
        let g = s3_graph();
        let zeros = CardinalityAssignment::from_values(
            Provenance::True,
            g.connected_subsets().into_iter().map(|s| (s, 0.0)),
        );
        assert_eq!(p_error(&g, &zeros, &zeros).unwrap(), 1.0);
        let mut truth = zeros.clone();
        truth.insert(TableSet::from_ids([1, 2]), 5.0, Provenance::True);
        let mut est = zeros.clone();
        est.insert(TableSet::from_ids([0, 1]), 9.0, Provenance::Estimated);
        est.insert(TableSet::from_ids([0, 2]), 9.0, Provenance::Estimated);
        assert!(matches!(p_error(&g, &est, &truth), Err(Error::ZeroOptimalCost(_))));
    }

    #[test]
    fn left_deep_restriction() {
        let (schema, q) = fixtures::qry_68_9();
        let g = infer_join_closure(&q, &schema).unwrap();
        let cards = CardinalityAssignment::from_values(
            Provenance::True,
            g.connected_subsets().into_iter().map(|s| (s, (s.bits() % 97 + 1) as f64)),
        );
        let plan = optimize(&g, &cards, PlanShape::LeftDeep).unwrap();
        fn left_deep(p: &PlanTree) -> bool {
            match p {
                PlanTree::Leaf(_) => true,
                PlanTree::Join(l, r) => matches!(**r, PlanTree::Leaf(_)) && left_deep(l),
            }
        }
        assert!(left_deep(&plan));
        let bushy = optimize(&g, &cards, PlanShape::Bushy).unwrap();
        assert!(cost_plan(&bushy, &cards).unwrap() <= cost_plan(&plan, &cards).unwrap());
    }

    #[test]
    fn workload_lines_round_trip() {
        let q = fixtures::s3_query("q1", vec![Selection::new("A", "x", CmpOp::Le, 7)]);
        let text = write_workload(&[q.clone(), q.clone()]);
        assert!(text.contains(r#""op":"<=""#));
        assert_eq!(parse_workload(&text).unwrap(), vec![q.clone(), q]);
        assert!(parse_workload("{not json").is_err());
    }
}
