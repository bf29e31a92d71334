//! View composition engine.
//!
//! Views are group-by aggregation queries paired with a visual mapping. The
//! crate type-checks compositions of views, executes composition and
//! decomposition operators over an in-memory executor, fits linear models to
//! views, and lowers any plan to SQL.

pub mod algebra;
pub mod diag;
pub mod error;
pub mod eval;
pub mod expr;
pub mod ingest;
pub mod lift;
pub mod numeric;
pub mod plan;
pub mod relation;
pub mod safety;
pub mod schema;
pub mod sqlgen;
pub mod value;
pub mod view;

pub use diag::{Warning, WarningCode};
pub use error::{Error, FailedPair, Result};
pub use eval::eval_plan;
pub use expr::{ArithOp, CompareOp, Predicate, ScalarExpr};
pub use ingest::ingest_csv;
pub use lift::{lift, sample_model_view, LinearModel, ModelView};
pub use plan::{AggExpr, AggFunc, JoinKind, Plan, ProjectItem};
pub use relation::{attribute_domain, Catalog, Domain, Relation, Row};
pub use safety::{check_compose, ComposeKind, Relationship, SafetyVerdict, Status};
pub use schema::{AttributeDef, Role, Schema};
pub use value::{Value, ValueKind};
pub use view::operands::{cell_operand, legend_operand, marks_of, marks_operand, Operand};
pub use view::{
    constant_operand, make_view, BinaryOp, Channel, ConstantView, Context, LayoutHint, MarkType, Measure, MeasureExpr,
    MeasureType, View, ViewId, ViewJson, ViewSet, ViewSpec, VisualMapping,
};
