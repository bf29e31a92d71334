//! CSV ingestion with value-kind inference.

use std::collections::BTreeMap;
use std::io::Read;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::relation::Relation;
use crate::schema::{AttributeDef, Role, Schema};
use crate::value::{Value, ValueKind};

pub fn parse_role(name: &str) -> Result<Role> {
    match name.to_ascii_lowercase().as_str() {
        "dimension" | "dim" => Ok(Role::Dimension),
        "measure" => Ok(Role::Measure),
        other => Err(Error::Config(format!("unknown role `{other}`"))),
    }
}

fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()
}

enum Numeric {
    Ints,
    Floats,
}

fn infer(cells: &[&str], role: Role) -> (ValueKind, Option<Numeric>) {
    let present: Vec<&str> = cells.iter().copied().filter(|c| !c.is_empty()).collect();
    if present.is_empty() {
        let kind = match role {
            Role::Measure => ValueKind::Numeric,
            Role::Dimension => ValueKind::Categorical,
        };
        return (kind, Some(Numeric::Floats));
    }
    if present.iter().all(|c| c.parse::<i64>().is_ok()) {
        return (ValueKind::Numeric, Some(Numeric::Ints));
    }
    if present.iter().all(|c| c.parse::<f64>().is_ok_and(f64::is_finite)) {
        return (ValueKind::Numeric, Some(Numeric::Floats));
    }
    if present.iter().all(|c| parse_date(c).is_some()) {
        return (ValueKind::Temporal, None);
    }
    (ValueKind::Categorical, None)
}

/// Reads RFC-4180 CSV with a header row. `roles` maps column names to
/// `dimension` or `measure`; unlisted columns are dimensions. A table may
/// carry at most one measure.
pub fn ingest_csv<R: Read>(source: R, roles: &BTreeMap<String, String>) -> Result<Relation> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if headers.iter().all(String::is_empty) {
        return Err(Error::Ingest {
            row: 0,
            message: "missing header row".into(),
        });
    }
    for name in roles.keys() {
        if !headers.contains(name) {
            return Err(Error::Config(format!("role given for unknown column `{name}`")));
        }
    }
    let col_roles = headers
        .iter()
        .map(|h| roles.get(h).map_or(Ok(Role::Dimension), |r| parse_role(r)))
        .collect::<Result<Vec<_>>>()?;
    if col_roles.iter().filter(|r| **r == Role::Measure).count() > 1 {
        return Err(Error::Config(
            "a table may declare at most one measure attribute".into(),
        ));
    }

    let mut records = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        if rec.len() != headers.len() {
            return Err(Error::Ingest {
                row: i + 1,
                message: format!("expected {} fields, found {}", headers.len(), rec.len()),
            });
        }
        records.push(rec);
    }

    let mut attrs = Vec::with_capacity(headers.len());
    let mut columns: Vec<Vec<Value>> = Vec::with_capacity(headers.len());
    for (j, name) in headers.iter().enumerate() {
        let cells: Vec<&str> = records.iter().map(|r| &r[j]).collect();
        let (kind, numeric) = infer(&cells, col_roles[j]);
        let values = cells
            .iter()
            .map(|c| match (c.is_empty(), kind, &numeric) {
                (true, ..) => Value::Null,
                (_, ValueKind::Numeric, Some(Numeric::Ints)) => Value::Integer(c.parse().unwrap_or_default()),
                (_, ValueKind::Numeric, _) => Value::Number(c.parse().unwrap_or(f64::NAN)),
                (_, ValueKind::Temporal, _) => parse_date(c).map_or(Value::Null, Value::Date),
                _ => Value::text(*c),
            })
            .collect();
        attrs.push(AttributeDef::new(name.clone(), col_roles[j], kind));
        columns.push(values);
    }
    let schema = Schema::new(attrs).map_err(|e| Error::Ingest {
        row: 0,
        message: e.to_string(),
    })?;
    let rows = (0..records.len())
        .map(|i| columns.iter().map(|c| c[i].clone()).collect())
        .collect();
    Relation::new(schema, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roles(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn flights_table() {
        let csv = "date,src,delay\n1,SFO,10\n2,SFO,15\n3,SFO,20\n1,OAK,15\n2,OAK,10\n3,OAK,5\n";
        let rel = ingest_csv(csv.as_bytes(), &roles(&[("delay", "measure")])).unwrap();
        assert_eq!(rel.len(), 6);
        let s = rel.schema();
        assert_eq!(s.get("date").unwrap().role, Role::Dimension);
        assert_eq!(s.get("src").unwrap().kind, ValueKind::Categorical);
        assert_eq!(s.get("delay").unwrap().role, Role::Measure);
        assert_eq!(rel.rows()[0][2], Value::Integer(10));
    }

    #[test]
    fn header_only_is_empty() {
        let rel = ingest_csv("a,b\n".as_bytes(), &roles(&[("b", "measure")])).unwrap();
        assert!(rel.is_empty());
        assert_eq!(rel.schema().len(), 2);
    }

    #[test]
    fn stray_text_makes_column_categorical() {
        let rel = ingest_csv("k\n1\nabc\n3\n".as_bytes(), &BTreeMap::new()).unwrap();
        assert_eq!(rel.schema().get("k").unwrap().kind, ValueKind::Categorical);
        assert_eq!(rel.rows()[0][0], Value::text("1"));
    }

    #[test]
    fn dates_and_nulls() {
        let rel = ingest_csv("d,m\n2021-01-02,1.5\n,\n".as_bytes(), &roles(&[("m", "measure")])).unwrap();
        assert_eq!(rel.schema().get("d").unwrap().kind, ValueKind::Temporal);
        assert_eq!(rel.rows()[1], vec![Value::Null, Value::Null]);
    }

    #[test]
    fn ragged_row_reports_index() {
        let err = ingest_csv("a,b\n1,2\n3\n".as_bytes(), &BTreeMap::new()).unwrap_err();
        assert!(matches!(err, Error::Ingest { row: 2, .. }), "{err}");
    }

    #[test]
    fn bad_role_map() {
        let err = ingest_csv("a\n1\n".as_bytes(), &roles(&[("a", "metric")])).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let err = ingest_csv("a\n1\n".as_bytes(), &roles(&[("zz", "measure")])).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
