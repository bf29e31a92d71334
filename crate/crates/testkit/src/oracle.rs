//! Reference interpreter and tolerant bag comparison.

use vca_core::expr::{Predicate, ScalarExpr};
use vca_core::{AggFunc, Catalog, JoinKind, Plan, Relation, Schema, Value};

/// Column names plus rows, with no typing attached.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub names: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl From<&Relation> for Table {
    fn from(r: &Relation) -> Self {
        Table {
            names: r.schema().names().map(str::to_string).collect(),
            rows: r.rows().to_vec(),
        }
    }
}

impl Table {
    fn index(&self, name: &str) -> Result<usize, String> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| format!("no column {name}"))
    }
}

fn schema_of(t: &Table, plan_schema: &Schema) -> Schema {
    debug_assert_eq!(t.names.len(), plan_schema.len());
    plan_schema.clone()
}

fn eval_scalar(e: &ScalarExpr, schema: &Schema, row: &[Value]) -> Result<Value, String> {
    e.eval(schema, row).map_err(|e| e.to_string())
}

fn eval_pred(p: &Predicate, schema: &Schema, row: &[Value]) -> Result<bool, String> {
    Ok(p.eval(schema, row).map_err(|e| e.to_string())? == Some(true))
}

fn agg(func: AggFunc, vals: &[Value]) -> Value {
    let present: Vec<&Value> = vals.iter().filter(|v| !v.is_null()).collect();
    if func == AggFunc::Count {
        return Value::Integer(present.len() as i64);
    }
    if present.is_empty() {
        return Value::Null;
    }
    let xs: Vec<f64> = present.iter().filter_map(|v| v.as_f64()).collect();
    let n = xs.len() as f64;
    match func {
        AggFunc::Count => unreachable!(),
        AggFunc::Min => (*present.iter().min().unwrap()).clone(),
        AggFunc::Max => (*present.iter().max().unwrap()).clone(),
        AggFunc::Sum => {
            if present.iter().all(|v| matches!(v, Value::Integer(_))) {
                Value::Integer(
                    present
                        .iter()
                        .map(|v| if let Value::Integer(i) = v { *i } else { 0 })
                        .sum(),
                )
            } else {
                Value::Number(xs.iter().sum())
            }
        }
        AggFunc::Avg => Value::Number(xs.iter().sum::<f64>() / n),
        AggFunc::Std => {
            let m = xs.iter().sum::<f64>() / n;
            Value::Number((xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n).sqrt())
        }
    }
}

/// Straightforward evaluation of `plan`: nested-loop joins, linear-scan
/// grouping, naive summation.
pub fn reference_eval(plan: &Plan, catalog: &Catalog) -> Result<Table, String> {
    let out_schema = plan.schema(catalog).map_err(|e| e.to_string())?;
    match plan {
        Plan::Scan { table } => Ok(Table::from(catalog.get(table).map_err(|e| e.to_string())?.as_ref())),
        Plan::Values { relation } => Ok(Table::from(relation.as_ref())),
        Plan::Filter { input, predicate } => {
            let t = reference_eval(input, catalog)?;
            let s = schema_of(&t, &input.schema(catalog).map_err(|e| e.to_string())?);
            let mut rows = Vec::new();
            for r in t.rows {
                if eval_pred(predicate, &s, &r)? {
                    rows.push(r);
                }
            }
            Ok(Table { names: t.names, rows })
        }
        Plan::Project { input, items } => {
            let t = reference_eval(input, catalog)?;
            let s = schema_of(&t, &input.schema(catalog).map_err(|e| e.to_string())?);
            let rows = t
                .rows
                .iter()
                .map(|r| items.iter().map(|i| eval_scalar(&i.expr, &s, r)).collect())
                .collect::<Result<_, _>>()?;
            Ok(Table {
                names: items.iter().map(|i| i.alias.clone()).collect(),
                rows,
            })
        }
        Plan::GroupAgg { input, group, agg: a } => {
            let t = reference_eval(input, catalog)?;
            let gi: Vec<usize> = group.iter().map(|g| t.index(g)).collect::<Result<_, _>>()?;
            let ai = t.index(&a.attr)?;
            let mut groups: Vec<(Vec<Value>, Vec<Value>)> = Vec::new();
            for r in &t.rows {
                let key: Vec<Value> = gi.iter().map(|&i| r[i].clone()).collect();
                match groups.iter_mut().find(|(k, _)| *k == key) {
                    Some((_, vals)) => vals.push(r[ai].clone()),
                    None => groups.push((key, vec![r[ai].clone()])),
                }
            }
            if groups.is_empty() && group.is_empty() {
                groups.push((vec![], vec![]));
            }
            let rows = groups
                .into_iter()
                .map(|(mut k, vals)| {
                    k.push(agg(a.func, &vals));
                    k
                })
                .collect();
            Ok(Table {
                names: out_schema.names().map(str::to_string).collect(),
                rows,
            })
        }
        Plan::Join {
            kind,
            left,
            right,
            keys,
        } => {
            let l = reference_eval(left, catalog)?;
            let r = reference_eval(right, catalog)?;
            let lk: Vec<usize> = keys.iter().map(|k| l.index(k)).collect::<Result<_, _>>()?;
            let rk: Vec<usize> = keys.iter().map(|k| r.index(k)).collect::<Result<_, _>>()?;
            let l_rest: Vec<usize> = (0..l.names.len()).filter(|i| !lk.contains(i)).collect();
            let r_rest: Vec<usize> = (0..r.names.len()).filter(|i| !rk.contains(i)).collect();
            let matches = |a: &[Value], b: &[Value]| {
                lk.iter()
                    .zip(&rk)
                    .all(|(&i, &j)| !a[i].is_null() && !b[j].is_null() && a[i] == b[j])
            };
            let mut rows = Vec::new();
            let mut r_used = vec![false; r.rows.len()];
            for a in &l.rows {
                let mut hit = false;
                for (j, b) in r.rows.iter().enumerate() {
                    if matches(a, b) {
                        hit = true;
                        r_used[j] = true;
                        let mut row: Vec<Value> = lk.iter().map(|&i| a[i].clone()).collect();
                        row.extend(l_rest.iter().map(|&i| a[i].clone()));
                        row.extend(r_rest.iter().map(|&i| b[i].clone()));
                        rows.push(row);
                    }
                }
                if !hit && *kind != JoinKind::Inner {
                    let mut row: Vec<Value> = lk.iter().map(|&i| a[i].clone()).collect();
                    row.extend(l_rest.iter().map(|&i| a[i].clone()));
                    row.extend(r_rest.iter().map(|_| Value::Null));
                    rows.push(row);
                }
            }
            if *kind == JoinKind::FullOuter {
                for (b, used) in r.rows.iter().zip(&r_used) {
                    if !used {
                        let mut row: Vec<Value> = rk.iter().map(|&j| b[j].clone()).collect();
                        row.extend(l_rest.iter().map(|_| Value::Null));
                        row.extend(r_rest.iter().map(|&j| b[j].clone()));
                        rows.push(row);
                    }
                }
            }
            Ok(Table {
                names: out_schema.names().map(str::to_string).collect(),
                rows,
            })
        }
        Plan::Union { inputs } => {
            let names: Vec<String> = out_schema.names().map(str::to_string).collect();
            let mut rows = Vec::new();
            for p in inputs {
                let t = reference_eval(p, catalog)?;
                let idx: Vec<usize> = names.iter().map(|n| t.index(n)).collect::<Result<_, _>>()?;
                rows.extend(t.rows.iter().map(|r| idx.iter().map(|&i| r[i].clone()).collect()));
            }
            Ok(Table { names, rows })
        }
        Plan::ModelTrain { .. } => Err("model training is not covered by the reference interpreter".into()),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Norm {
    Null,
    Num(f64),
    Text(String),
}

fn norm(v: &Value) -> Norm {
    match v {
        Value::Null => Norm::Null,
        Value::Boolean(b) => Norm::Num(if *b { 1.0 } else { 0.0 }),
        Value::Text(s) => Norm::Text(s.clone()),
        Value::Date(d) => Norm::Text(d.format("%Y-%m-%d").to_string()),
        other => Norm::Num(other.as_f64().unwrap_or(f64::NAN)),
    }
}

fn close(a: &Norm, b: &Norm, tol: f64) -> bool {
    match (a, b) {
        (Norm::Num(x), Norm::Num(y)) => x == y || (x - y).abs() <= tol * 1f64.max(x.abs()).max(y.abs()),
        _ => a == b,
    }
}

/// Multiset comparison with numeric tolerance, matching columns by name.
/// Returns a description of the first difference, or `None` when equal.
pub fn bag_diff(expected: &Table, actual: &Table, tol: f64) -> Option<String> {
    let mut en = expected.names.clone();
    let mut an = actual.names.clone();
    en.sort();
    an.sort();
    if en != an {
        return Some(format!("columns differ: {:?} vs {:?}", expected.names, actual.names));
    }
    if expected.rows.len() != actual.rows.len() {
        return Some(format!(
            "row counts differ: {} vs {}\nexpected {:?}\nactual {:?}",
            expected.rows.len(),
            actual.rows.len(),
            expected.rows,
            actual.rows
        ));
    }
    let idx: Vec<usize> = expected.names.iter().map(|n| actual.index(n).unwrap()).collect();
    let actual_rows: Vec<Vec<Norm>> = actual
        .rows
        .iter()
        .map(|r| idx.iter().map(|&i| norm(&r[i])).collect())
        .collect();
    let mut used = vec![false; actual_rows.len()];
    for row in &expected.rows {
        let e: Vec<Norm> = row.iter().map(norm).collect();
        let hit = actual_rows
            .iter()
            .enumerate()
            .find(|(j, a)| !used[*j] && e.iter().zip(a.iter()).all(|(x, y)| close(x, y, tol)));
        match hit {
            Some((j, _)) => used[j] = true,
            None => return Some(format!("no match for row {row:?} in {:?}", actual.rows)),
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use vca_core::{AggExpr, Predicate};

    #[test]
    fn group_scan_on_flights() {
        let plan = Plan::scan("flights").filter(Predicate::eq("src", "SFO")).group_agg(
            vec!["date".into()],
            AggExpr {
                func: AggFunc::Avg,
                attr: "delay".into(),
                alias: "y".into(),
            },
        );
        let t = reference_eval(&plan, &fixtures::flights_catalog()).unwrap();
        let want = Table {
            names: vec!["date".into(), "y".into()],
            rows: vec![
                vec![Value::Integer(3), Value::Number(20.0)],
                vec![Value::Integer(1), Value::Number(10.0)],
                vec![Value::Integer(2), Value::Number(15.0)],
            ],
        };
        assert_eq!(bag_diff(&want, &t, 0.0), None);
    }

    #[test]
    fn bag_diff_spots_duplicates() {
        let a = Table {
            names: vec!["x".into()],
            rows: vec![vec![Value::Integer(1)], vec![Value::Integer(1)]],
        };
        let b = Table {
            names: vec!["x".into()],
            rows: vec![vec![Value::Integer(1)], vec![Value::Integer(2)]],
        };
        assert!(bag_diff(&a, &b, 1e-9).is_some());
        let c = Table {
            names: vec!["x".into()],
            rows: vec![vec![Value::Number(1.0 + 1e-12)], vec![Value::Integer(1)]],
        };
        assert_eq!(bag_diff(&a, &c, 1e-9), None);
    }
}
