//! Detects sub-optimal join plans before execution by comparing how estimated
//! and true (or surrogate) cardinalities order a query's subplans.
//!
//! The pipeline runs end to end on synthetic data: [`catalog`] generates
//! tables and counts exact join sizes, [`planspace`] enumerates subplans and
//! picks plans, [`l1error`] measures ordering disagreement, [`collector`]
//! caches observed cardinalities, [`featurize`] and [`model`] turn orderings
//! into a classifier, [`workloadgen`] scales template workloads and
//! [`harness`] runs the experiments.

pub mod catalog;
pub mod collector;
pub mod error;
pub mod fixtures;
pub mod harness;
pub mod featurize;
pub mod l1error;
pub mod model;
pub mod planspace;
pub mod seed;
pub mod workloadgen;

pub use catalog::{generate_catalog, Catalog, ExecutionLog, SchemaSpec};
pub use error::{Error, Result};
pub use planspace::{
    enumerate_subplans, infer_join_closure, CardinalityAssignment, JoinGraph, PlanLabel, PlanTree,
    Query, Subplan, SubOptConfig, TableSet,
};
