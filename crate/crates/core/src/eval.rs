//! Direct tree-walking evaluation of query plans under bag semantics.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::numeric::{ols, pairwise_sum, std_pop};
use crate::plan::{group_schema, join_schema, model_schema, project_schema, union_schema, AggFunc, JoinKind, Plan};
use crate::relation::{Catalog, Relation, Row};
use crate::schema::Schema;
use crate::value::Value;

pub fn eval_plan(plan: &Plan, catalog: &Catalog) -> Result<Relation> {
    match plan {
        Plan::Scan { table } => Ok(catalog.get(table)?.as_ref().clone()),
        Plan::Values { relation } => Ok(relation.as_ref().clone()),
        Plan::Filter { input, predicate } => {
            let rel = eval_plan(input, catalog)?;
            predicate.check(rel.schema())?;
            let schema = rel.schema().clone();
            let mut rows = Vec::new();
            for row in rel.into_rows() {
                if predicate.eval(&schema, &row)? == Some(true) {
                    rows.push(row);
                }
            }
            Ok(Relation::from_parts(schema, rows))
        }
        Plan::Project { input, items } => {
            let rel = eval_plan(input, catalog)?;
            let schema = project_schema(rel.schema(), items)?;
            let rows = rel
                .rows()
                .iter()
                .map(|r| {
                    items
                        .iter()
                        .map(|i| i.expr.eval(rel.schema(), r))
                        .collect::<Result<Row>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Relation::from_parts(schema, rows))
        }
        Plan::GroupAgg { input, group, agg } => {
            let rel = eval_plan(input, catalog)?;
            let schema = group_schema(rel.schema(), group, agg)?;
            let idx = indices(rel.schema(), group)?;
            let a = rel.schema().index_of(&agg.attr).expect("checked by group_schema");
            let mut groups: BTreeMap<Vec<Value>, Vec<Value>> = BTreeMap::new();
            for row in rel.rows() {
                let key = idx.iter().map(|&i| row[i].clone()).collect();
                groups.entry(key).or_default().push(row[a].clone());
            }
            if group.is_empty() && groups.is_empty() {
                groups.insert(Vec::new(), Vec::new());
            }
            let rows = groups
                .into_iter()
                .map(|(mut key, vals)| {
                    key.push(aggregate(agg.func, &vals));
                    key
                })
                .collect();
            Ok(Relation::from_parts(schema, rows))
        }
        Plan::Join {
            kind,
            left,
            right,
            keys,
        } => {
            let l = eval_plan(left, catalog)?;
            let r = eval_plan(right, catalog)?;
            join(&l, &r, keys, *kind)
        }
        Plan::Union { inputs } => {
            let rels = inputs
                .iter()
                .map(|p| eval_plan(p, catalog))
                .collect::<Result<Vec<_>>>()?;
            let schemas: Vec<Schema> = rels.iter().map(|r| r.schema().clone()).collect();
            let schema = union_schema(&schemas)?;
            let names: Vec<String> = schema.names().map(str::to_string).collect();
            let mut rows = Vec::new();
            for rel in &rels {
                let idx = indices(rel.schema(), &names)?;
                rows.extend(
                    rel.rows()
                        .iter()
                        .map(|row| idx.iter().map(|&i| row[i].clone()).collect::<Row>()),
                );
            }
            Ok(Relation::from_parts(schema, rows))
        }
        Plan::ModelTrain {
            input,
            cond,
            features,
            measure,
        } => {
            let rel = eval_plan(input, catalog)?;
            let schema = model_schema(rel.schema(), cond, features, measure)?;
            let fits = fit_groups(&rel, cond, features, measure)?;
            let rows = fits
                .fitted
                .into_iter()
                .map(|g| {
                    let mut row = g.group;
                    row.extend(g.coefficients.into_iter().map(Value::Number));
                    row.push(Value::Integer(g.rows as i64));
                    row
                })
                .collect();
            Ok(Relation::from_parts(schema, rows))
        }
    }
}

fn indices(schema: &Schema, names: &[String]) -> Result<Vec<usize>> {
    names
        .iter()
        .map(|n| {
            schema
                .index_of(n)
                .ok_or_else(|| Error::plan_type(format!("unknown attribute `{n}`")))
        })
        .collect()
}

/// Aggregates the non-null values of one group.
pub fn aggregate(func: AggFunc, values: &[Value]) -> Value {
    let present: Vec<&Value> = values.iter().filter(|v| !v.is_null()).collect();
    if func == AggFunc::Count {
        return Value::Integer(present.len() as i64);
    }
    if present.is_empty() {
        return Value::Null;
    }
    let floats = || present.iter().filter_map(|v| v.as_f64()).collect::<Vec<f64>>();
    match func {
        AggFunc::Count => unreachable!(),
        AggFunc::Min => present.iter().copied().min().cloned().unwrap_or(Value::Null),
        AggFunc::Max => present.iter().copied().max().cloned().unwrap_or(Value::Null),
        AggFunc::Sum => {
            let ints: Option<Vec<i64>> = present
                .iter()
                .map(|v| match v {
                    Value::Integer(i) => Some(*i),
                    _ => None,
                })
                .collect();
            match ints {
                Some(ints) => {
                    let total: i128 = ints.iter().map(|&i| i as i128).sum();
                    i64::try_from(total)
                        .map(Value::Integer)
                        .unwrap_or(Value::Number(total as f64))
                }
                None => Value::Number(pairwise_sum(&floats())),
            }
        }
        AggFunc::Avg => {
            let xs = floats();
            Value::Number(pairwise_sum(&xs) / xs.len() as f64)
        }
        AggFunc::Std => std_pop(&floats()).map_or(Value::Null, Value::Number),
    }
}

fn join(l: &Relation, r: &Relation, keys: &[String], kind: JoinKind) -> Result<Relation> {
    let schema = join_schema(l.schema(), r.schema(), keys, kind)?;
    let lk = indices(l.schema(), keys)?;
    let rk = indices(r.schema(), keys)?;
    let l_rest: Vec<usize> = (0..l.schema().len()).filter(|i| !lk.contains(i)).collect();
    let r_rest: Vec<usize> = (0..r.schema().len()).filter(|i| !rk.contains(i)).collect();

    let mut index: BTreeMap<Vec<&Value>, Vec<usize>> = BTreeMap::new();
    for (j, row) in r.rows().iter().enumerate() {
        let key: Vec<&Value> = rk.iter().map(|&i| &row[i]).collect();
        if key.iter().any(|v| v.is_null()) {
            continue;
        }
        index.entry(key).or_default().push(j);
    }

    let mut matched_right = vec![false; r.len()];
    let mut rows = Vec::new();
    for lrow in l.rows() {
        let key: Vec<&Value> = lk.iter().map(|&i| &lrow[i]).collect();
        let hits = if key.iter().any(|v| v.is_null()) {
            None
        } else {
            index.get(&key)
        };
        match hits {
            Some(hits) => {
                for &j in hits {
                    matched_right[j] = true;
                    let rrow = &r.rows()[j];
                    let mut out: Row = key.iter().map(|v| (*v).clone()).collect();
                    out.extend(l_rest.iter().map(|&i| lrow[i].clone()));
                    out.extend(r_rest.iter().map(|&i| rrow[i].clone()));
                    rows.push(out);
                }
            }
            None if kind != JoinKind::Inner => {
                let mut out: Row = key.iter().map(|v| (*v).clone()).collect();
                out.extend(l_rest.iter().map(|&i| lrow[i].clone()));
                out.extend(r_rest.iter().map(|_| Value::Null));
                rows.push(out);
            }
            None => {}
        }
    }
    if kind == JoinKind::FullOuter {
        for (j, rrow) in r.rows().iter().enumerate() {
            if matched_right[j] {
                continue;
            }
            let mut out: Row = rk.iter().map(|&i| rrow[i].clone()).collect();
            out.extend(l_rest.iter().map(|_| Value::Null));
            out.extend(r_rest.iter().map(|&i| rrow[i].clone()));
            rows.push(out);
        }
    }
    Ok(Relation::from_parts(schema, rows))
}

/// One fitted group of a model-training pass.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupFit {
    pub group: Vec<Value>,
    pub coefficients: Vec<f64>,
    pub rows: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Fits {
    pub fitted: Vec<GroupFit>,
    /// Groups that could not be fitted, with their usable row counts.
    pub degenerate: Vec<(Vec<Value>, usize)>,
}

/// Per-group least squares. Rows with a Null feature or target are skipped;
/// temporal features enter as epoch days.
pub fn fit_groups(rel: &Relation, cond: &[String], features: &[String], measure: &str) -> Result<Fits> {
    let ci = indices(rel.schema(), cond)?;
    let fi = indices(rel.schema(), features)?;
    let yi = indices(rel.schema(), &[measure.to_string()])?[0];
    let mut groups: BTreeMap<Vec<Value>, (Vec<Vec<f64>>, Vec<f64>)> = BTreeMap::new();
    for row in rel.rows() {
        let key: Vec<Value> = ci.iter().map(|&i| row[i].clone()).collect();
        let entry = groups.entry(key).or_default();
        let x: Option<Vec<f64>> = fi.iter().map(|&i| row[i].as_f64()).collect();
        if let (Some(x), Some(y)) = (x, row[yi].as_f64()) {
            entry.0.push(x);
            entry.1.push(y);
        }
    }
    let mut fits = Fits::default();
    for (group, (xs, ys)) in groups {
        match ols(&xs, &ys) {
            Some(coefficients) => fits.fitted.push(GroupFit {
                group,
                coefficients,
                rows: ys.len(),
            }),
            None => fits.degenerate.push((group, ys.len())),
        }
    }
    Ok(fits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Predicate;
    use crate::plan::{AggExpr, ProjectItem};
    use crate::schema::{AttributeDef, Role};
    use crate::value::ValueKind;

    fn catalog() -> Catalog {
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
        let mut c = Catalog::new();
        c.register("flights", Relation::new(schema, rows).unwrap());
        c
    }

    fn by_date(src: &str, alias: &str) -> Plan {
        Plan::scan("flights").filter(Predicate::eq("src", src)).group_agg(
            vec!["date".into()],
            AggExpr {
                func: AggFunc::Avg,
                attr: "delay".into(),
                alias: alias.into(),
            },
        )
    }

    #[test]
    fn grouped_average() {
        let out = eval_plan(&by_date("SFO", "y"), &catalog()).unwrap();
        let expect = vec![
            vec![Value::Integer(1), Value::Number(10.0)],
            vec![Value::Integer(2), Value::Number(15.0)],
            vec![Value::Integer(3), Value::Number(20.0)],
        ];
        assert_eq!(out.sorted_rows(), expect);
    }

    #[test]
    fn filter_true_is_identity() {
        let c = catalog();
        let out = eval_plan(&Plan::scan("flights").filter(Predicate::Const(true)), &c).unwrap();
        assert!(out.same_rows(c.get("flights").unwrap()));
    }

    #[test]
    fn full_outer_all_matched() {
        let p = Plan::join(
            JoinKind::FullOuter,
            by_date("SFO", "y1"),
            by_date("OAK", "y2"),
            vec!["date".into()],
        );
        let out = eval_plan(&p, &catalog()).unwrap();
        assert_eq!(out.len(), 3);
        assert!(out.rows().iter().all(|r| r.iter().all(|v| !v.is_null())));
    }

    #[test]
    fn full_outer_pads_both_sides() {
        let l = by_date("SFO", "y1").filter(Predicate::eq("date", 1i64));
        let r = by_date("OAK", "y2").filter(Predicate::eq("date", 2i64));
        let p = Plan::join(JoinKind::FullOuter, l, r, vec!["date".into()]);
        let out = eval_plan(&p, &catalog()).unwrap();
        assert_eq!(
            out.sorted_rows(),
            vec![
                vec![1i64.into(), 10.0.into(), Value::Null],
                vec![2i64.into(), Value::Null, 10.0.into()],
            ]
        );
    }

    #[test]
    fn null_keys_never_match() {
        let schema = Schema::new(vec![
            AttributeDef::dimension("k", ValueKind::Numeric),
            AttributeDef::measure("a"),
        ])
        .unwrap();
        let rel = Relation::new(schema, vec![vec![Value::Null, 1i64.into()]]).unwrap();
        let right = Plan::values(rel.clone()).project(vec![ProjectItem::keep("k"), ProjectItem::rename("a", "b")]);
        let p = Plan::join(JoinKind::Inner, Plan::values(rel), right, vec!["k".into()]);
        assert!(eval_plan(&p, &Catalog::new()).unwrap().is_empty());
    }

    #[test]
    fn ungrouped_aggregate_over_empty_input() {
        let p = Plan::scan("flights").filter(Predicate::Const(false)).group_agg(
            vec![],
            AggExpr {
                func: AggFunc::Count,
                attr: "delay".into(),
                alias: "y".into(),
            },
        );
        let out = eval_plan(&p, &catalog()).unwrap();
        assert_eq!(out.rows(), &[vec![Value::Integer(0)]]);
    }

    #[test]
    fn aggregating_a_dimension_is_rejected() {
        let p = Plan::scan("flights").group_agg(
            vec![],
            AggExpr {
                func: AggFunc::Max,
                attr: "src".into(),
                alias: "y".into(),
            },
        );
        assert!(matches!(eval_plan(&p, &catalog()), Err(Error::PlanType(_))));
        assert!(matches!(
            eval_plan(&Plan::scan("nope"), &catalog()),
            Err(Error::Catalog(_))
        ));
    }

    #[test]
    fn aggregate_functions() {
        let vals = [1i64, 2, 3, 4].map(Value::Integer);
        assert_eq!(aggregate(AggFunc::Sum, &vals), Value::Integer(10));
        assert_eq!(aggregate(AggFunc::Avg, &vals), Value::Number(2.5));
        assert_eq!(aggregate(AggFunc::Min, &vals), Value::Integer(1));
        assert_eq!(
            aggregate(AggFunc::Count, &[Value::Null, 1i64.into()]),
            Value::Integer(1)
        );
        assert_eq!(aggregate(AggFunc::Avg, &[Value::Null]), Value::Null);
    }
}
