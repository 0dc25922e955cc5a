//! Small schemas, queries and cardinality sets shared by tests, benches and
//! the CLI demo commands.

use crate::catalog::{ColumnSpec, SchemaSpec, TableSpec};
use crate::planspace::{
    CardinalityAssignment, CmpOp, JoinPredicate, Provenance, Query, Selection, TableSet,
};

fn table(name: &str, rows: usize, columns: Vec<ColumnSpec>) -> TableSpec {
    TableSpec {
        name: name.into(),
        rows,
        columns,
    }
}

/// Three tables, two foreign keys into `A`.
pub fn s3_schema() -> SchemaSpec {
    SchemaSpec {
        tables: vec![
            table("A", 100, vec![ColumnSpec::key("id"), ColumnSpec::int("x", 1, 50)]),
            table(
                "B",
                300,
                vec![
                    ColumnSpec::key("id"),
                    ColumnSpec::foreign_key("aid", "A.id"),
                    ColumnSpec::int("y", 1, 20),
                ],
            ),
            table(
                "C",
                200,
                vec![
                    ColumnSpec::key("id"),
                    ColumnSpec::foreign_key("aid", "A.id"),
                    ColumnSpec::int("z", 1, 30),
                ],
            ),
        ],
        seed: 42,
        zipf_s: 1.1,
    }
}

/// `A ⋈ B ⋈ C` on `A.id` with the given selections.
pub fn s3_query(id: &str, selections: Vec<Selection>) -> Query {
    Query {
        id: id.into(),
        tables: vec!["A".into(), "B".into(), "C".into()],
        joins: vec![
            JoinPredicate::new("A", "id", "B", "aid"),
            JoinPredicate::new("A", "id", "C", "aid"),
        ],
        selections,
    }
}

/// A hub table `A` with four satellites referencing it. Used for workloads
/// that need more than a handful of subplans per query.
pub fn star_schema(seed: u64) -> SchemaSpec {
    let sat = |name: &str, rows: usize, attr: &str, hi: i64| {
        table(
            name,
            rows,
            vec![
                ColumnSpec::key("id"),
                ColumnSpec::foreign_key("aid", "A.id"),
                ColumnSpec::int(attr, 1, hi),
            ],
        )
    };
    SchemaSpec {
        tables: vec![
            table("A", 120, vec![ColumnSpec::key("id"), ColumnSpec::int("x", 1, 50)]),
            sat("B", 400, "y", 20),
            sat("C", 300, "z", 30),
            sat("D", 250, "w", 10),
            sat("E", 350, "v", 40),
        ],
        seed,
        zipf_s: 1.1,
    }
}

/// Templates over [`star_schema`]: a 3-, a 4- and a 5-table star.
pub fn star_templates() -> Vec<Query> {
    let q = |id: &str, sats: &[&str], selections: Vec<Selection>| Query {
        id: id.into(),
        tables: std::iter::once("A")
            .chain(sats.iter().copied())
            .map(String::from)
            .collect(),
        joins: sats
            .iter()
            .map(|s| JoinPredicate::new("A", "id", s, "aid"))
            .collect(),
        selections,
    };
    vec![
        q(
            "t3",
            &["B", "C"],
            vec![
                Selection::new("A", "x", CmpOp::Le, 30),
                Selection::new("B", "y", CmpOp::Gt, 5),
            ],
        ),
        q(
            "t4",
            &["B", "C", "D"],
            vec![
                Selection::new("C", "z", CmpOp::Lt, 20),
                Selection::new("D", "w", CmpOp::Ge, 3),
            ],
        ),
        q(
            "t5",
            &["B", "C", "D", "E"],
            vec![
                Selection::new("A", "x", CmpOp::Gt, 10),
                Selection::new("E", "v", CmpOp::Le, 25),
                Selection::new("B", "y", CmpOp::Ge, 4),
            ],
        ),
    ]
}

/// S3-shaped templates over [`star_schema`]: the hub with two satellites,
/// plus one hub with three.
pub fn s3_family_templates() -> Vec<Query> {
    let q = |id: &str, sats: &[&str], selections: Vec<Selection>| Query {
        id: id.into(),
        tables: std::iter::once("A")
            .chain(sats.iter().copied())
            .map(String::from)
            .collect(),
        joins: sats
            .iter()
            .map(|s| JoinPredicate::new("A", "id", s, "aid"))
            .collect(),
        selections,
    };
    vec![
        q(
            "abc",
            &["B", "C"],
            vec![
                Selection::new("A", "x", CmpOp::Le, 30),
                Selection::new("B", "y", CmpOp::Gt, 5),
                Selection::new("C", "z", CmpOp::Lt, 20),
            ],
        ),
        q(
            "abd",
            &["B", "D"],
            vec![
                Selection::new("B", "y", CmpOp::Le, 12),
                Selection::new("D", "w", CmpOp::Ge, 3),
            ],
        ),
        q(
            "ace",
            &["C", "E"],
            vec![
                Selection::new("A", "x", CmpOp::Gt, 10),
                Selection::new("C", "z", CmpOp::Ge, 8),
                Selection::new("E", "v", CmpOp::Le, 25),
            ],
        ),
        q(
            "ade",
            &["D", "E"],
            vec![
                Selection::new("D", "w", CmpOp::Lt, 7),
                Selection::new("E", "v", CmpOp::Gt, 10),
            ],
        ),
        q(
            "abce",
            &["B", "C", "E"],
            vec![
                Selection::new("A", "x", CmpOp::Le, 40),
                Selection::new("B", "y", CmpOp::Ge, 4),
                Selection::new("E", "v", CmpOp::Lt, 30),
            ],
        ),
    ]
}

/// A six-table movie schema. Index order puts `mk` at 1 and `t` at 2.
pub fn job_schema() -> SchemaSpec {
    let fact = |name: &str, rows: usize, attr: &str, hi: i64| {
        table(
            name,
            rows,
            vec![
                ColumnSpec::key("id"),
                ColumnSpec::foreign_key("movie_id", "t.id"),
                ColumnSpec::int(attr, 1, hi),
            ],
        )
    };
    SchemaSpec {
        tables: vec![
            fact("ci", 900, "role_id", 11),
            fact("mk", 700, "keyword_id", 200),
            table(
                "t",
                250,
                vec![
                    ColumnSpec::key("id"),
                    ColumnSpec::int("production_year", 1950, 2020),
                    ColumnSpec::int("kind_id", 1, 7),
                ],
            ),
            fact("mc", 500, "company_type_id", 4),
            fact("mi", 800, "info_type_id", 110),
            fact("mi_idx", 400, "info_type_id", 5),
        ],
        seed: 7,
        zipf_s: 1.1,
    }
}

/// A five-way star on movie ids with three selections, shaped like the
/// running example: `t`, `mi`, `mc`, `ci`, `mk` joined on `t.id`.
pub fn qry_68_9() -> (SchemaSpec, Query) {
    let facts = ["mi", "mc", "ci", "mk"];
    let query = Query {
        id: "qry_68_9".into(),
        tables: std::iter::once("t")
            .chain(facts)
            .map(String::from)
            .collect(),
        joins: facts
            .iter()
            .map(|f| JoinPredicate::new("t", "id", f, "movie_id"))
            .collect(),
        selections: vec![
            Selection::new("t", "production_year", CmpOp::Gt, 2000),
            Selection::new("mi", "info_type_id", CmpOp::Le, 60),
            Selection::new("mc", "company_type_id", CmpOp::Eq, 2),
        ],
    };
    (job_schema(), query)
}

/// Subplan orderings for [`qry_68_9`] per join size: each list lies in true
/// ascending order, paired with the 1-based estimated rank of each entry.
/// Displacements sum to 14, 10 and 2 for k = 2, 3, 4.
pub fn qry_68_9_orderings() -> Vec<(usize, Vec<(&'static [&'static str], usize)>)> {
    vec![
        (
            2,
            vec![
                (&["mk", "t"][..], 2),
                (&["ci", "t"], 3),
                (&["mc", "t"], 4),
                (&["mk", "mc"], 5),
                (&["mi", "t"], 1),
                (&["mk", "ci"], 8),
                (&["mc", "ci"], 6),
                (&["mi", "mk"], 7),
                (&["mi", "mc"], 10),
                (&["mi", "ci"], 9),
            ],
        ),
        (
            3,
            vec![
                (&["mk", "ci", "t"][..], 3),
                (&["mk", "mc", "t"], 1),
                (&["ci", "mc", "t"], 2),
                (&["mi", "mk", "t"], 5),
                (&["mi", "ci", "t"], 4),
                (&["mk", "ci", "mc"], 6),
                (&["mi", "mc", "t"], 8),
                (&["mi", "mk", "ci"], 7),
                (&["mi", "mk", "mc"], 10),
                (&["mi", "ci", "mc"], 9),
            ],
        ),
        (
            4,
            vec![
                (&["mk", "ci", "mc", "t"][..], 1),
                (&["mi", "mk", "ci", "t"], 3),
                (&["mi", "mk", "mc", "t"], 2),
                (&["mi", "ci", "mc", "t"], 4),
                (&["mi", "mk", "ci", "mc"], 5),
            ],
        ),
        (5, vec![(&["mi", "mk", "ci", "mc", "t"][..], 1)]),
    ]
}

/// True and estimated assignments realizing [`qry_68_9_orderings`], keyed by
/// [`job_schema`] table ids. Values are distinct within each join size.
pub fn qry_68_9_cardinalities() -> (CardinalityAssignment, CardinalityAssignment) {
    let schema = job_schema();
    let mut truth = CardinalityAssignment::new();
    let mut est = CardinalityAssignment::new();
    for (k, list) in qry_68_9_orderings() {
        let scale = 10f64.powi(k as i32);
        for (pos, (names, est_rank)) in list.into_iter().enumerate() {
            let set = TableSet::from_ids(names.iter().map(|n| schema.table_id(n).expect("fixture table")));
            truth.insert(set, scale * (pos + 1) as f64 + 3.0, Provenance::True);
            est.insert(set, 0.5 * scale * (est_rank * est_rank) as f64, Provenance::Estimated);
        }
    }
    (truth, est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::generate_catalog;
    use crate::planspace::{enumerate_subplans, infer_join_closure};

    #[test]
    fn fixtures_are_valid() {
        for spec in [s3_schema(), star_schema(1), job_schema()] {
            generate_catalog(&spec).unwrap();
        }
        let schema = star_schema(1);
        for t in star_templates() {
            infer_join_closure(&t, &schema).unwrap();
        }
    }

    #[test]
    fn orderings_cover_the_query_subplans() {
        let (schema, q) = qry_68_9();
        let g = infer_join_closure(&q, &schema).unwrap();
        let space = enumerate_subplans(&g);
        let (truth, est) = qry_68_9_cardinalities();
        assert_eq!(truth.len(), space.total());
        for set in space.iter() {
            assert!(truth.get(set).is_some() && est.get(set).is_some());
        }
        for (_, list) in qry_68_9_orderings() {
            let mut ranks: Vec<usize> = list.iter().map(|(_, r)| *r).collect();
            ranks.sort();
            assert_eq!(ranks, (1..=list.len()).collect::<Vec<_>>());
        }
    }
}
