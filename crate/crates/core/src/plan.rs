//! Logical query plans.
//!
//! Every algebra operator produces a `Plan`. The executor in [`crate::eval`]
//! and the SQL lowering in [`crate::sqlgen`] are the two consumers.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{ident, Predicate, ScalarExpr};
use crate::relation::{Catalog, Relation};
use crate::schema::{AttributeDef, Role, Schema};
use crate::value::ValueKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggFunc {
    Avg,
    Sum,
    Min,
    Max,
    Count,
    Std,
}

impl AggFunc {
    pub const ALL: [AggFunc; 6] = [
        AggFunc::Avg,
        AggFunc::Sum,
        AggFunc::Min,
        AggFunc::Max,
        AggFunc::Count,
        AggFunc::Std,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AggFunc::Avg => "avg",
            AggFunc::Sum => "sum",
            AggFunc::Min => "min",
            AggFunc::Max => "max",
            AggFunc::Count => "count",
            AggFunc::Std => "std",
        }
    }
}

impl FromStr for AggFunc {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AggFunc::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Type(format!("unknown aggregate function `{s}`")))
    }
}

impl fmt::Display for AggFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggExpr {
    pub func: AggFunc,
    pub attr: String,
    pub alias: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectItem {
    pub expr: ScalarExpr,
    pub alias: String,
}

impl ProjectItem {
    pub fn new(expr: ScalarExpr, alias: impl Into<String>) -> Self {
        Self {
            expr,
            alias: alias.into(),
        }
    }

    /// Pass-through of a column under its own name.
    pub fn keep(name: impl Into<String>) -> Self {
        let name = name.into();
        Self {
            expr: ScalarExpr::Column(name.clone()),
            alias: name,
        }
    }

    pub fn rename(from: impl Into<String>, to: impl Into<String>) -> Self {
        Self {
            expr: ScalarExpr::Column(from.into()),
            alias: to.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JoinKind {
    Inner,
    LeftOuter,
    FullOuter,
}

impl JoinKind {
    fn symbol(self) -> &'static str {
        match self {
            JoinKind::Inner => "⋈",
            JoinKind::LeftOuter => "⟕",
            JoinKind::FullOuter => "⟗",
        }
    }
}

pub const INTERCEPT: &str = "__intercept";
pub const FIT_ROWS: &str = "__n";

pub fn coef_column(feature: &str) -> String {
    format!("__coef_{feature}")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Plan {
    Scan {
        table: String,
    },
    Values {
        relation: Arc<Relation>,
    },
    Filter {
        input: Box<Plan>,
        predicate: Predicate,
    },
    Project {
        input: Box<Plan>,
        items: Vec<ProjectItem>,
    },
    GroupAgg {
        input: Box<Plan>,
        group: Vec<String>,
        agg: AggExpr,
    },
    /// Output columns: keys, then left non-keys, then right non-keys. For a
    /// full outer join the keys are coalesced from both sides. No keys means
    /// a cross product.
    Join {
        kind: JoinKind,
        left: Box<Plan>,
        right: Box<Plan>,
        keys: Vec<String>,
    },
    /// Children are aligned by attribute name to the first child's order.
    Union {
        inputs: Vec<Plan>,
    },
    /// Fits `measure ~ 1 + features` per distinct `cond` tuple. Output:
    /// cond attributes, intercept, one coefficient per feature, row count.
    ModelTrain {
        input: Box<Plan>,
        cond: Vec<String>,
        features: Vec<String>,
        measure: String,
    },
}

/// The three parts of a canonical plan `γ_{group, agg}(q)`.
#[derive(Debug, Clone, Copy)]
pub struct Canonical<'a> {
    pub group: &'a [String],
    pub agg: &'a AggExpr,
    pub q: &'a Plan,
}

impl Plan {
    pub fn scan(table: impl Into<String>) -> Plan {
        Plan::Scan { table: table.into() }
    }

    pub fn values(relation: Relation) -> Plan {
        Plan::Values {
            relation: Arc::new(relation),
        }
    }

    pub fn filter(self, predicate: Predicate) -> Plan {
        Plan::Filter {
            input: Box::new(self),
            predicate,
        }
    }

    pub fn project(self, items: Vec<ProjectItem>) -> Plan {
        Plan::Project {
            input: Box::new(self),
            items,
        }
    }

    pub fn group_agg(self, group: Vec<String>, agg: AggExpr) -> Plan {
        Plan::GroupAgg {
            input: Box::new(self),
            group,
            agg,
        }
    }

    pub fn join(kind: JoinKind, left: Plan, right: Plan, keys: Vec<String>) -> Plan {
        Plan::Join {
            kind,
            left: Box::new(left),
            right: Box::new(right),
            keys,
        }
    }

    /// True when no aggregation or model fitting occurs anywhere in the tree.
    pub fn is_aggregation_free(&self) -> bool {
        match self {
            Plan::Scan { .. } | Plan::Values { .. } => true,
            Plan::GroupAgg { .. } | Plan::ModelTrain { .. } => false,
            Plan::Filter { input, .. } | Plan::Project { input, .. } => input.is_aggregation_free(),
            Plan::Join { left, right, .. } => left.is_aggregation_free() && right.is_aggregation_free(),
            Plan::Union { inputs } => inputs.iter().all(Plan::is_aggregation_free),
        }
    }

    pub fn canonical(&self) -> Option<Canonical<'_>> {
        match self {
            Plan::GroupAgg { input, group, agg } if input.is_aggregation_free() => {
                Some(Canonical { group, agg, q: input })
            }
            _ => None,
        }
    }

    pub fn contains_model(&self) -> bool {
        match self {
            Plan::ModelTrain { .. } => true,
            Plan::Scan { .. } | Plan::Values { .. } => false,
            Plan::Filter { input, .. } | Plan::Project { input, .. } | Plan::GroupAgg { input, .. } => {
                input.contains_model()
            }
            Plan::Join { left, right, .. } => left.contains_model() || right.contains_model(),
            Plan::Union { inputs } => inputs.iter().any(Plan::contains_model),
        }
    }

    /// Output schema, type-checking the whole tree.
    pub fn schema(&self, catalog: &Catalog) -> Result<Schema> {
        match self {
            Plan::Scan { table } => Ok(catalog.get(table)?.schema().clone()),
            Plan::Values { relation } => Ok(relation.schema().clone()),
            Plan::Filter { input, predicate } => {
                let s = input.schema(catalog)?;
                predicate.check(&s)?;
                Ok(s)
            }
            Plan::Project { input, items } => project_schema(&input.schema(catalog)?, items),
            Plan::GroupAgg { input, group, agg } => group_schema(&input.schema(catalog)?, group, agg),
            Plan::Join {
                kind,
                left,
                right,
                keys,
            } => join_schema(&left.schema(catalog)?, &right.schema(catalog)?, keys, *kind),
            Plan::Union { inputs } => {
                let schemas = inputs.iter().map(|p| p.schema(catalog)).collect::<Result<Vec<_>>>()?;
                union_schema(&schemas)
            }
            Plan::ModelTrain {
                input,
                cond,
                features,
                measure,
            } => model_schema(&input.schema(catalog)?, cond, features, measure),
        }
    }
}

pub(crate) fn project_schema(input: &Schema, items: &[ProjectItem]) -> Result<Schema> {
    let mut attrs = Vec::with_capacity(items.len());
    for item in items {
        let kind = item.expr.kind(input)?;
        let def = match &item.expr {
            ScalarExpr::Column(c) => {
                let src = input.require(c)?;
                AttributeDef::new(item.alias.clone(), src.role, src.kind)
            }
            ScalarExpr::Literal(_) => {
                AttributeDef::dimension(item.alias.clone(), kind.unwrap_or(ValueKind::Categorical))
            }
            ScalarExpr::Arith { .. } => AttributeDef::measure(item.alias.clone()),
        };
        attrs.push(def);
    }
    Schema::new(attrs)
}

pub(crate) fn group_schema(input: &Schema, group: &[String], agg: &AggExpr) -> Result<Schema> {
    let mut attrs = Vec::with_capacity(group.len() + 1);
    for g in group {
        let def = input.require(g)?;
        attrs.push(AttributeDef::dimension(g.clone(), def.kind));
    }
    let src = input.require(&agg.attr)?;
    if src.role != Role::Measure {
        return Err(Error::plan_type(format!(
            "cannot aggregate dimension `{}`; only measures appear inside aggregates",
            agg.attr
        )));
    }
    let kind = match agg.func {
        AggFunc::Min | AggFunc::Max => src.kind,
        AggFunc::Count => ValueKind::Numeric,
        AggFunc::Avg | AggFunc::Sum | AggFunc::Std => {
            if src.kind != ValueKind::Numeric {
                return Err(Error::plan_type(format!(
                    "{}({}) needs a numeric attribute, found {}",
                    agg.func, agg.attr, src.kind
                )));
            }
            ValueKind::Numeric
        }
    };
    attrs.push(AttributeDef::new(agg.alias.clone(), Role::Measure, kind));
    Schema::new(attrs)
}

pub(crate) fn join_schema(left: &Schema, right: &Schema, keys: &[String], _kind: JoinKind) -> Result<Schema> {
    let key_set: BTreeSet<&str> = keys.iter().map(String::as_str).collect();
    let mut attrs = Vec::new();
    for k in keys {
        let l = left.require(k)?;
        let r = right.require(k)?;
        if l.kind != r.kind {
            return Err(Error::plan_type(format!(
                "join key `{k}` is {} on the left and {} on the right",
                l.kind, r.kind
            )));
        }
        attrs.push(l.clone());
    }
    attrs.extend(
        left.attrs()
            .iter()
            .filter(|a| !key_set.contains(a.name.as_str()))
            .cloned(),
    );
    for a in right.attrs().iter().filter(|a| !key_set.contains(a.name.as_str())) {
        if left.contains(&a.name) {
            return Err(Error::plan_type(format!(
                "join input attribute `{}` appears on both sides",
                a.name
            )));
        }
        attrs.push(a.clone());
    }
    Schema::new(attrs)
}

pub(crate) fn union_schema(schemas: &[Schema]) -> Result<Schema> {
    let first = schemas
        .first()
        .ok_or_else(|| Error::plan_type("union needs at least one input"))?;
    for (i, s) in schemas.iter().enumerate().skip(1) {
        if s.len() != first.len() {
            return Err(Error::plan_type(format!(
                "union input {i} has {} attributes, expected {}",
                s.len(),
                first.len()
            )));
        }
        for a in first.attrs() {
            let b = s
                .get(&a.name)
                .ok_or_else(|| Error::plan_type(format!("union input {i} lacks attribute `{}`", a.name)))?;
            if b.kind != a.kind {
                return Err(Error::plan_type(format!(
                    "union attribute `{}` is {} in input 0 and {} in input {i}",
                    a.name, a.kind, b.kind
                )));
            }
        }
    }
    Ok(first.clone())
}

pub(crate) fn model_schema(input: &Schema, cond: &[String], features: &[String], measure: &str) -> Result<Schema> {
    let mut attrs = Vec::new();
    for c in cond {
        attrs.push(input.require(c)?.clone());
    }
    for f in features {
        let def = input.require(f)?;
        if !matches!(def.kind, ValueKind::Numeric | ValueKind::Temporal) {
            return Err(Error::plan_type(format!(
                "model feature `{f}` must be quantitative, found {}",
                def.kind
            )));
        }
    }
    if input.require(measure)?.kind != ValueKind::Numeric {
        return Err(Error::plan_type(format!("model target `{measure}` is not numeric")));
    }
    attrs.push(AttributeDef::measure(INTERCEPT));
    attrs.extend(features.iter().map(|f| AttributeDef::measure(coef_column(f))));
    attrs.push(AttributeDef::measure(FIT_ROWS));
    Schema::new(attrs)
}

fn names(list: &[String]) -> String {
    list.iter()
        .map(|n| ident(n).into_owned())
        .collect::<Vec<_>>()
        .join(", ")
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Plan::Scan { table } => f.write_str(&ident(table)),
            Plan::Values { relation } => write!(f, "values({} rows)", relation.len()),
            Plan::Filter { input, predicate } => write!(f, "σ[{predicate}]({input})"),
            Plan::Project { input, items } => {
                let items: Vec<String> = items
                    .iter()
                    .map(|i| match &i.expr {
                        ScalarExpr::Column(c) if *c == i.alias => ident(c).into_owned(),
                        e => format!("{e}→{}", ident(&i.alias)),
                    })
                    .collect();
                write!(f, "π[{}]({input})", items.join(", "))
            }
            Plan::GroupAgg { input, group, agg } => write!(
                f,
                "γ[{}; {}({})→{}]({input})",
                names(group),
                agg.func,
                ident(&agg.attr),
                ident(&agg.alias)
            ),
            Plan::Join {
                kind,
                left,
                right,
                keys,
            } => write!(f, "({left} {}[{}] {right})", kind.symbol(), names(keys)),
            Plan::Union { inputs } => {
                let parts: Vec<String> = inputs.iter().map(|p| p.to_string()).collect();
                write!(f, "({})", parts.join(" ∪ "))
            }
            Plan::ModelTrain {
                input,
                cond,
                features,
                measure,
            } => write!(
                f,
                "M[{} ~ {} | {}]({input})",
                ident(measure),
                names(features),
                names(cond)
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Predicate;

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
    fn canonical_detection() {
        let p = v_sfo();
        let c = p.canonical().expect("canonical");
        assert_eq!(c.group, ["date".to_string()]);
        let nested = p.clone().group_agg(
            vec![],
            AggExpr {
                func: AggFunc::Sum,
                attr: "y".into(),
                alias: "y".into(),
            },
        );
        assert!(nested.canonical().is_none());
        assert!(Plan::scan("t").canonical().is_none());
    }

    #[test]
    fn display_is_algebraic() {
        assert_eq!(v_sfo().to_string(), "γ[date; avg(delay)→y](σ[src = 'SFO'](flights))");
    }

    #[test]
    fn agg_func_parse() {
        assert_eq!("AVG".parse::<AggFunc>().unwrap(), AggFunc::Avg);
        assert!(matches!("median".parse::<AggFunc>(), Err(Error::Type(_))));
    }
}
