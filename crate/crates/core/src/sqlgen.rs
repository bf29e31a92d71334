//! Lowering of query plans to ANSI SQL text.
//!
//! Simple shapes (`γ(σ(scan))`, `π(σ(scan))`) collapse into one SELECT; every
//! other child becomes a derived table aliased `t0`, `t1`, … in traversal
//! order, so the text is deterministic for a given plan.

use crate::error::{Error, Result};
use crate::expr::{ArithOp, CompareOp, Predicate, ScalarExpr};
use crate::plan::{AggFunc, JoinKind, Plan};
use crate::relation::Catalog;
use crate::value::{format_number, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SqlOptions {
    /// Emit `FULL OUTER JOIN`. When false, full joins are rewritten as a
    /// left join plus the anti-joined right rows.
    pub full_outer_join: bool,
}

impl Default for SqlOptions {
    fn default() -> Self {
        Self { full_outer_join: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SqlArtifact {
    pub text: String,
    pub param_free: bool,
}

const RESERVED: &[&str] = &[
    "all", "and", "as", "between", "by", "case", "cast", "cross", "distinct", "else", "end", "exists", "false", "from",
    "full", "group", "having", "in", "inner", "is", "join", "left", "like", "limit", "not", "null", "on", "or",
    "order", "outer", "right", "select", "table", "then", "true", "union", "using", "values", "when", "where", "with",
];

pub fn quote_ident(name: &str) -> String {
    let mut chars = name.chars();
    let simple = chars.next().is_some_and(|c| c.is_ascii_lowercase() || c == '_')
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
        && !RESERVED.contains(&name);
    if simple {
        name.to_string()
    } else {
        format!("\"{}\"", name.replace('"', "\"\""))
    }
}

pub fn sql_literal(v: &Value) -> String {
    match v {
        Value::Null => "NULL".into(),
        Value::Number(x) => format_number(*x),
        Value::Integer(i) => i.to_string(),
        Value::Text(s) => format!("'{}'", s.replace('\'', "''")),
        Value::Boolean(b) => if *b { "TRUE" } else { "FALSE" }.into(),
        Value::Date(d) => format!("DATE '{}'", d.format("%Y-%m-%d")),
    }
}

fn col(qual: Option<&str>, name: &str) -> String {
    match qual {
        Some(q) => format!("{q}.{}", quote_ident(name)),
        None => quote_ident(name),
    }
}

fn scalar(e: &ScalarExpr, qual: Option<&str>) -> String {
    match e {
        ScalarExpr::Column(c) => col(qual, c),
        ScalarExpr::Literal(v) => sql_literal(v),
        ScalarExpr::Arith {
            op: ArithOp::Div,
            left,
            right,
        } => format!(
            "(CAST({} AS DOUBLE PRECISION) / NULLIF({}, 0))",
            scalar(left, qual),
            scalar(right, qual)
        ),
        ScalarExpr::Arith { op, left, right } => {
            format!("({} {} {})", scalar(left, qual), op.symbol(), scalar(right, qual))
        }
    }
}

fn predicate(p: &Predicate, qual: Option<&str>) -> String {
    match p {
        Predicate::Const(true) => "1 = 1".into(),
        Predicate::Const(false) => "1 = 0".into(),
        Predicate::Compare { left, op, right } => {
            let sym = match op {
                CompareOp::Ne => "<>",
                other => other.symbol(),
            };
            format!("{} {sym} {}", scalar(left, qual), scalar(right, qual))
        }
        Predicate::InSet { expr, values } if values.is_empty() => {
            // false for any non-null input, unknown for null
            let x = scalar(expr, qual);
            format!("{x} <> {x}")
        }
        Predicate::InSet { expr, values } => {
            let vals: Vec<String> = values.iter().map(sql_literal).collect();
            format!("{} IN ({})", scalar(expr, qual), vals.join(", "))
        }
        Predicate::InRange { expr, low, high } => format!(
            "{} BETWEEN {} AND {}",
            scalar(expr, qual),
            sql_literal(low),
            sql_literal(high)
        ),
        Predicate::IsNull(e) => format!("{} IS NULL", scalar(e, qual)),
        Predicate::And(a, b) => format!("({} AND {})", predicate(a, qual), predicate(b, qual)),
        Predicate::Or(a, b) => format!("({} OR {})", predicate(a, qual), predicate(b, qual)),
        Predicate::Not(a) => format!("NOT ({})", predicate(a, qual)),
    }
}

fn agg_sql(f: AggFunc) -> &'static str {
    match f {
        AggFunc::Avg => "AVG",
        AggFunc::Sum => "SUM",
        AggFunc::Min => "MIN",
        AggFunc::Max => "MAX",
        AggFunc::Count => "COUNT",
        AggFunc::Std => "STDDEV_POP",
    }
}

struct Lowerer<'a> {
    catalog: &'a Catalog,
    opts: SqlOptions,
    next_alias: usize,
}

impl Lowerer<'_> {
    fn alias(&mut self) -> String {
        let a = format!("t{}", self.next_alias);
        self.next_alias += 1;
        a
    }

    fn names(&self, plan: &Plan) -> Result<Vec<String>> {
        Ok(plan.schema(self.catalog)?.names().map(str::to_string).collect())
    }

    /// A FROM-clause item for `plan`, aliased when `alias` is given.
    fn source_item(&mut self, plan: &Plan, alias: Option<&str>) -> Result<String> {
        match plan {
            Plan::Scan { table } => Ok(match alias {
                Some(a) => format!("{} AS {a}", quote_ident(table)),
                None => quote_ident(table),
            }),
            other => {
                let a = match alias {
                    Some(a) => a.to_string(),
                    None => self.alias(),
                };
                let q = self.query(other)?;
                Ok(format!("({q}) AS {a}"))
            }
        }
    }

    /// FROM and optional WHERE for a single-source SELECT over `plan`.
    fn source_where(&mut self, plan: &Plan) -> Result<(String, Option<String>)> {
        match plan {
            Plan::Filter { input, predicate: p } => {
                let from = self.source_item(input, None)?;
                Ok((from, Some(predicate(p, None))))
            }
            other => Ok((self.source_item(other, None)?, None)),
        }
    }

    fn select(&mut self, cols: &str, input: &Plan, tail: &str) -> Result<String> {
        let (from, wh) = self.source_where(input)?;
        let mut s = format!("SELECT {cols} FROM {from}");
        if let Some(w) = wh {
            s.push_str(" WHERE ");
            s.push_str(&w);
        }
        s.push_str(tail);
        Ok(s)
    }

    fn query(&mut self, plan: &Plan) -> Result<String> {
        match plan {
            Plan::Scan { table } => Ok(format!("SELECT * FROM {}", quote_ident(table))),
            Plan::Filter { .. } => self.select("*", plan, ""),
            Plan::Values { relation } => {
                let names: Vec<String> = relation.schema().names().map(quote_ident).collect();
                if relation.is_empty() {
                    let cols: Vec<String> = names.iter().map(|n| format!("NULL AS {n}")).collect();
                    return Ok(format!("SELECT {} WHERE 1 = 0", cols.join(", ")));
                }
                let selects: Vec<String> = relation
                    .rows()
                    .iter()
                    .map(|row| {
                        let cols: Vec<String> = row
                            .iter()
                            .zip(&names)
                            .map(|(v, n)| format!("{} AS {n}", sql_literal(v)))
                            .collect();
                        format!("SELECT {}", cols.join(", "))
                    })
                    .collect();
                Ok(selects.join(" UNION ALL "))
            }
            Plan::Project { input, items } => {
                let cols: Vec<String> = items
                    .iter()
                    .map(|i| match &i.expr {
                        ScalarExpr::Column(c) if *c == i.alias => quote_ident(c),
                        e => format!("{} AS {}", scalar(e, None), quote_ident(&i.alias)),
                    })
                    .collect();
                self.select(&cols.join(", "), input, "")
            }
            Plan::GroupAgg { input, group, agg } => {
                let mut cols: Vec<String> = group.iter().map(|g| quote_ident(g)).collect();
                cols.push(format!(
                    "{}({}) AS {}",
                    agg_sql(agg.func),
                    quote_ident(&agg.attr),
                    quote_ident(&agg.alias)
                ));
                let tail = if group.is_empty() {
                    String::new()
                } else {
                    format!(
                        " GROUP BY {}",
                        group.iter().map(|g| quote_ident(g)).collect::<Vec<_>>().join(", ")
                    )
                };
                self.select(&cols.join(", "), input, &tail)
            }
            Plan::Join {
                kind,
                left,
                right,
                keys,
            } => self.join(*kind, left, right, keys),
            Plan::Union { inputs } => {
                let names = self.names(plan)?;
                let cols: Vec<String> = names.iter().map(|n| quote_ident(n)).collect();
                let parts = inputs
                    .iter()
                    .map(|p| {
                        let from = self.source_item(p, None)?;
                        Ok(format!("SELECT {} FROM {from}", cols.join(", ")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(parts.join(" UNION ALL "))
            }
            Plan::ModelTrain { .. } => Err(Error::UnsupportedNode("model training has no SQL lowering".into())),
        }
    }

    fn join(&mut self, kind: JoinKind, left: &Plan, right: &Plan, keys: &[String]) -> Result<String> {
        let l_rest: Vec<String> = self.names(left)?.into_iter().filter(|n| !keys.contains(n)).collect();
        let r_rest: Vec<String> = self.names(right)?.into_iter().filter(|n| !keys.contains(n)).collect();
        let on = |a: &str, b: &str| {
            if keys.is_empty() {
                "1 = 1".to_string()
            } else {
                keys.iter()
                    .map(|k| format!("{} = {}", col(Some(a), k), col(Some(b), k)))
                    .collect::<Vec<_>>()
                    .join(" AND ")
            }
        };
        let rest = |qual: &str, names: &[String]| -> Vec<String> {
            names
                .iter()
                .map(|n| format!("{} AS {}", col(Some(qual), n), quote_ident(n)))
                .collect()
        };
        let nulls =
            |names: &[String]| -> Vec<String> { names.iter().map(|n| format!("NULL AS {}", quote_ident(n))).collect() };

        if kind == JoinKind::FullOuter && !self.opts.full_outer_join {
            let (a, b) = (self.alias(), self.alias());
            let mut cols: Vec<String> = keys
                .iter()
                .map(|k| format!("{} AS {}", col(Some(&a), k), quote_ident(k)))
                .collect();
            cols.extend(rest(&a, &l_rest));
            cols.extend(rest(&b, &r_rest));
            let lf = self.source_item(left, Some(&a))?;
            let rf = self.source_item(right, Some(&b))?;
            let head = format!("SELECT {} FROM {lf} LEFT JOIN {rf} ON {}", cols.join(", "), on(&a, &b));
            let (c, d) = (self.alias(), self.alias());
            let mut cols: Vec<String> = keys
                .iter()
                .map(|k| format!("{} AS {}", col(Some(&c), k), quote_ident(k)))
                .collect();
            cols.extend(nulls(&l_rest));
            cols.extend(rest(&c, &r_rest));
            let rf = self.source_item(right, Some(&c))?;
            let lf = self.source_item(left, Some(&d))?;
            let anti = if keys.is_empty() {
                String::new()
            } else {
                format!(" WHERE {}", on(&d, &c))
            };
            return Ok(format!(
                "{head} UNION ALL SELECT {} FROM {rf} WHERE NOT EXISTS (SELECT 1 FROM {lf}{anti})",
                cols.join(", ")
            ));
        }

        let (a, b) = (self.alias(), self.alias());
        let mut cols: Vec<String> = keys
            .iter()
            .map(|k| match kind {
                JoinKind::FullOuter => format!(
                    "COALESCE({}, {}) AS {}",
                    col(Some(&a), k),
                    col(Some(&b), k),
                    quote_ident(k)
                ),
                _ => format!("{} AS {}", col(Some(&a), k), quote_ident(k)),
            })
            .collect();
        cols.extend(rest(&a, &l_rest));
        cols.extend(rest(&b, &r_rest));
        let lf = self.source_item(left, Some(&a))?;
        let rf = self.source_item(right, Some(&b))?;
        let clause = match (kind, keys.is_empty()) {
            (JoinKind::Inner, true) => format!("CROSS JOIN {rf}"),
            (JoinKind::Inner, false) => format!("JOIN {rf} ON {}", on(&a, &b)),
            (JoinKind::LeftOuter, _) => format!("LEFT JOIN {rf} ON {}", on(&a, &b)),
            (JoinKind::FullOuter, _) => format!("FULL OUTER JOIN {rf} ON {}", on(&a, &b)),
        };
        Ok(format!("SELECT {} FROM {lf} {clause}", cols.join(", ")))
    }
}

pub fn compile(plan: &Plan, catalog: &Catalog) -> Result<SqlArtifact> {
    compile_with(plan, catalog, SqlOptions::default())
}

pub fn compile_with(plan: &Plan, catalog: &Catalog, opts: SqlOptions) -> Result<SqlArtifact> {
    if plan.contains_model() {
        return Err(Error::UnsupportedNode(
            "plans containing model training cannot be lowered to SQL".into(),
        ));
    }
    plan.schema(catalog)?;
    let mut l = Lowerer {
        catalog,
        opts,
        next_alias: 0,
    };
    Ok(SqlArtifact {
        text: l.query(plan)?,
        param_free: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::AggExpr;
    use crate::relation::Relation;
    use crate::schema::{AttributeDef, Role, Schema};
    use crate::value::ValueKind;

    fn catalog() -> Catalog {
        let schema = Schema::new(vec![
            AttributeDef::dimension("date", ValueKind::Numeric),
            AttributeDef::dimension("src", ValueKind::Categorical),
            AttributeDef::new("delay", Role::Measure, ValueKind::Numeric),
        ])
        .unwrap();
        let mut c = Catalog::new();
        c.register("flights", Relation::new(schema, vec![]).unwrap());
        c
    }

    fn v_sfo() -> Plan {
        Plan::scan("flights").filter(Predicate::eq("src", "SFO")).group_agg(
            vec!["date".into()],
            AggExpr {
                func: AggFunc::Avg,
                attr: "delay".into(),
                alias: "y".into(),
            },
        )
    }

    #[test]
    fn canonical_view_is_one_select() {
        let sql = compile(&v_sfo(), &catalog()).unwrap();
        assert_eq!(
            sql.text,
            "SELECT date, AVG(delay) AS y FROM flights WHERE src = 'SFO' GROUP BY date"
        );
        assert!(sql.param_free);
    }

    #[test]
    fn scan_passthrough() {
        assert_eq!(
            compile(&Plan::scan("flights"), &catalog()).unwrap().text,
            "SELECT * FROM flights"
        );
    }

    #[test]
    fn model_nodes_unsupported() {
        let p = Plan::ModelTrain {
            input: Box::new(v_sfo()),
            cond: vec![],
            features: vec!["date".into()],
            measure: "y".into(),
        };
        assert!(matches!(compile(&p, &catalog()), Err(Error::UnsupportedNode(_))));
    }

    #[test]
    fn quoting() {
        assert_eq!(quote_ident("date"), "date");
        assert_eq!(quote_ident("Order"), "\"Order\"");
        assert_eq!(quote_ident("order"), "\"order\"");
        assert_eq!(sql_literal(&Value::text("O'Hare")), "'O''Hare'");
    }

    #[test]
    fn deterministic_text() {
        let p = Plan::join(
            JoinKind::FullOuter,
            v_sfo(),
            v_sfo().project(vec![
                crate::plan::ProjectItem::keep("date"),
                crate::plan::ProjectItem::rename("y", "y2"),
            ]),
            vec!["date".into()],
        );
        let a = compile(&p, &catalog()).unwrap();
        let b = compile(&p, &catalog()).unwrap();
        assert_eq!(a, b);
        assert!(a.text.contains("FULL OUTER JOIN"));
        let rewritten = compile_with(&p, &catalog(), SqlOptions { full_outer_join: false }).unwrap();
        assert!(!rewritten.text.contains("FULL"));
        assert!(rewritten.text.contains("NOT EXISTS"));
    }
}
