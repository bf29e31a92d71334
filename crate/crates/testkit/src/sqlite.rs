//! Runs generated SQL against an in-memory SQLite database.

use rusqlite::functions::{Aggregate, Context, FunctionFlags};
use rusqlite::types::{ToSqlOutput, Value as SqlValue, ValueRef};
use rusqlite::Connection;
use vca_core::sqlgen::quote_ident;
use vca_core::{Catalog, Value};

use crate::oracle::Table;

struct StddevPop;

impl Aggregate<Vec<f64>, Option<f64>> for StddevPop {
    fn init(&self, _: &mut Context<'_>) -> rusqlite::Result<Vec<f64>> {
        Ok(Vec::new())
    }

    fn step(&self, ctx: &mut Context<'_>, acc: &mut Vec<f64>) -> rusqlite::Result<()> {
        match ctx.get_raw(0) {
            ValueRef::Integer(i) => acc.push(i as f64),
            ValueRef::Real(x) => acc.push(x),
            _ => {}
        }
        Ok(())
    }

    fn finalize(&self, _: &mut Context<'_>, acc: Option<Vec<f64>>) -> rusqlite::Result<Option<f64>> {
        let xs = acc.unwrap_or_default();
        if xs.is_empty() {
            return Ok(None);
        }
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        Ok(Some((xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n).sqrt()))
    }
}

fn to_sql(v: &Value) -> ToSqlOutput<'static> {
    ToSqlOutput::Owned(match v {
        Value::Null => SqlValue::Null,
        Value::Integer(i) => SqlValue::Integer(*i),
        Value::Number(x) => SqlValue::Real(*x),
        Value::Boolean(b) => SqlValue::Integer(*b as i64),
        Value::Text(s) => SqlValue::Text(s.clone()),
        Value::Date(d) => SqlValue::Text(d.format("%Y-%m-%d").to_string()),
    })
}

/// Opens a database holding every relation in `catalog`.
pub fn load(catalog: &Catalog) -> rusqlite::Result<Connection> {
    let conn = Connection::open_in_memory()?;
    conn.create_aggregate_function(
        "STDDEV_POP",
        1,
        FunctionFlags::SQLITE_UTF8 | FunctionFlags::SQLITE_DETERMINISTIC,
        StddevPop,
    )?;
    for name in catalog.names() {
        let rel = catalog.get(name).expect("listed name");
        let cols: Vec<String> = rel.schema().names().map(quote_ident).collect();
        conn.execute(&format!("CREATE TABLE {} ({})", quote_ident(name), cols.join(", ")), [])?;
        let marks = vec!["?"; cols.len()].join(", ");
        let mut stmt = conn.prepare(&format!("INSERT INTO {} VALUES ({marks})", quote_ident(name)))?;
        for row in rel.rows() {
            let params: Vec<ToSqlOutput<'static>> = row.iter().map(to_sql).collect();
            stmt.execute(rusqlite::params_from_iter(params))?;
        }
    }
    Ok(conn)
}

pub fn query(conn: &Connection, sql: &str) -> rusqlite::Result<Table> {
    let mut stmt = conn.prepare(sql)?;
    let names: Vec<String> = stmt.column_names().into_iter().map(str::to_string).collect();
    let width = names.len();
    let rows = stmt
        .query_map([], |r| {
            (0..width)
                .map(|i| {
                    Ok(match r.get_ref(i)? {
                        ValueRef::Null => Value::Null,
                        ValueRef::Integer(i) => Value::Integer(i),
                        ValueRef::Real(x) => Value::Number(x),
                        ValueRef::Text(t) => Value::text(String::from_utf8_lossy(t)),
                        ValueRef::Blob(_) => Value::Null,
                    })
                })
                .collect()
        })?
        .collect::<rusqlite::Result<Vec<Vec<Value>>>>()?;
    Ok(Table { names, rows })
}

/// Loads `catalog` and runs one query.
pub fn run(catalog: &Catalog, sql: &str) -> rusqlite::Result<Table> {
    query(&load(catalog)?, sql)
}
