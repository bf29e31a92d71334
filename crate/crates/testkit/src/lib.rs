//! Shared fixtures and independent oracles for the engine's test suites.
//!
//! The oracles never call the engine's executor: the reference evaluator is
//! a nested-loop / linear-scan interpreter and the SQL runner goes through
//! SQLite, so either can be used to cross-check `eval_plan`. `laws` holds
//! seeded checks shared by the property suite and the acceptance run.

pub mod chains;
pub mod fixtures;
pub mod gen;
pub mod laws;
pub mod oracle;
pub mod sqlite;

pub use oracle::{bag_diff, reference_eval, Table};
