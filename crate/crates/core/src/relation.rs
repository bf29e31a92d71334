//! Bag-semantics relations and the table catalog.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::schema::Schema;
use crate::value::{Value, ValueKind};

pub type Row = Vec<Value>;

/// An ordered bag of rows over a schema. Row order carries no meaning for
/// equality between relations; see [`Relation::same_rows`].
#[derive(Debug, Clone, PartialEq)]
pub struct Relation {
    schema: Schema,
    rows: Vec<Row>,
}

fn conforms(value: &Value, kind: ValueKind) -> bool {
    value.kind().is_none_or(|k| k == kind)
}

impl Relation {
    pub fn new(schema: Schema, rows: Vec<Row>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if row.len() != schema.len() {
                return Err(Error::plan_type(format!(
                    "row {i} has {} values, schema has {} attributes",
                    row.len(),
                    schema.len()
                )));
            }
            for (v, a) in row.iter().zip(schema.attrs()) {
                if !conforms(v, a.kind) {
                    return Err(Error::plan_type(format!(
                        "row {i}: value {} does not conform to {} attribute `{}`",
                        v.literal(),
                        a.kind,
                        a.name
                    )));
                }
            }
        }
        Ok(Self { schema, rows })
    }

    /// Builds a relation whose rows were produced by the executor and are
    /// already known to conform.
    pub(crate) fn from_parts(schema: Schema, rows: Vec<Row>) -> Self {
        debug_assert!(rows.iter().all(|r| r.len() == schema.len()));
        Self { schema, rows }
    }

    pub fn empty(schema: Schema) -> Self {
        Self {
            schema,
            rows: Vec::new(),
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<Row> {
        self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Result<impl Iterator<Item = &Value>> {
        let idx = self
            .schema
            .index_of(name)
            .ok_or_else(|| Error::plan_type(format!("unknown attribute `{name}`")))?;
        Ok(self.rows.iter().map(move |r| &r[idx]))
    }

    /// Rows sorted by the value order; used for display and comparisons.
    pub fn sorted_rows(&self) -> Vec<Row> {
        let mut rows = self.rows.clone();
        rows.sort();
        rows
    }

    /// Multiset equality on rows, ignoring order. Schemas must match by name.
    pub fn same_rows(&self, other: &Relation) -> bool {
        let names: Vec<&str> = self.schema.names().collect();
        let other_names: Vec<&str> = other.schema.names().collect();
        names == other_names && self.sorted_rows() == other.sorted_rows()
    }

    /// Plain-text table for terminal output.
    pub fn to_table_string(&self) -> String {
        let headers: Vec<String> = self.schema.names().map(str::to_string).collect();
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|v| v.to_string()).collect())
            .collect();
        let mut widths: Vec<usize> = headers.iter().map(String::len).collect();
        for row in &body {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join(" | ")
                .trim_end()
                .to_string()
        };
        let mut out = line(&headers);
        out.push('\n');
        out.push_str(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-+-"));
        for row in &body {
            out.push('\n');
            out.push_str(&line(row));
        }
        out
    }

    /// Rows as JSON objects keyed by attribute name.
    pub fn rows_json(&self) -> Vec<serde_json::Map<String, serde_json::Value>> {
        self.rows
            .iter()
            .map(|row| {
                self.schema
                    .names()
                    .zip(row)
                    .map(|(n, v)| {
                        (
                            n.to_string(),
                            serde_json::to_value(v).unwrap_or(serde_json::Value::Null),
                        )
                    })
                    .collect()
            })
            .collect()
    }
}

/// Named base tables.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    tables: BTreeMap<String, Arc<Relation>>,
}

impl Catalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, name: impl Into<String>, relation: Relation) {
        self.tables.insert(name.into(), Arc::new(relation));
    }

    pub fn get(&self, name: &str) -> Result<&Arc<Relation>> {
        self.tables.get(name).ok_or_else(|| Error::Catalog(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tables.keys().map(String::as_str)
    }
}

/// Distinct non-null values of an attribute, plus bounds for ordered kinds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Domain {
    pub values: Vec<Value>,
    pub range: Option<(Value, Value)>,
}

pub fn attribute_domain(rel: &Relation, attr: &str) -> Result<Domain> {
    let kind = rel.schema().require(attr)?.kind;
    let distinct: BTreeSet<&Value> = rel.column(attr)?.filter(|v| !v.is_null()).collect();
    let values: Vec<Value> = distinct.into_iter().cloned().collect();
    let range = match kind {
        ValueKind::Numeric | ValueKind::Temporal => values
            .first()
            .zip(values.last())
            .map(|(lo, hi)| (lo.clone(), hi.clone())),
        _ => None,
    };
    Ok(Domain { values, range })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{AttributeDef, Role};

    fn flights() -> Relation {
        let schema = Schema::new(vec![
            AttributeDef::dimension("date", ValueKind::Numeric),
            AttributeDef::dimension("src", ValueKind::Categorical),
            AttributeDef::new("delay", Role::Measure, ValueKind::Numeric),
        ])
        .unwrap();
        let rows = [
            (1, "SFO", 10),
            (2, "SFO", 15),
            (3, "SFO", 20),
            (1, "OAK", 15),
            (2, "OAK", 10),
            (3, "OAK", 5),
        ]
        .into_iter()
        .map(|(d, s, y)| vec![Value::Integer(d), Value::text(s), Value::Integer(y)])
        .collect();
        Relation::new(schema, rows).unwrap()
    }

    #[test]
    fn numeric_domain_reports_range() {
        let d = attribute_domain(&flights(), "date").unwrap();
        assert_eq!(d.values, vec![1.into(), 2.into(), 3.into()]);
        assert_eq!(d.range, Some((Value::Integer(1), Value::Integer(3))));
    }

    #[test]
    fn categorical_domain_is_sorted_without_range() {
        let d = attribute_domain(&flights(), "src").unwrap();
        assert_eq!(d.values, vec![Value::text("OAK"), Value::text("SFO")]);
        assert_eq!(d.range, None);
    }

    #[test]
    fn empty_relation_has_empty_domain() {
        let empty = Relation::empty(flights().schema().clone());
        let d = attribute_domain(&empty, "date").unwrap();
        assert!(d.values.is_empty());
        assert!(d.range.is_none());
    }

    #[test]
    fn unknown_attribute_is_a_plan_type_error() {
        assert!(matches!(attribute_domain(&flights(), "nope"), Err(Error::PlanType(_))));
    }

    #[test]
    fn ragged_row_rejected() {
        let schema = flights().schema().clone();
        let err = Relation::new(schema, vec![vec![Value::Integer(1)]]).unwrap_err();
        assert!(matches!(err, Error::PlanType(_)));
    }

    #[test]
    fn nonconforming_value_rejected() {
        let schema = flights().schema().clone();
        let row = vec![Value::text("x"), Value::text("SFO"), Value::Integer(1)];
        assert!(Relation::new(schema, vec![row]).is_err());
    }
}
