//! Operand extraction: legend labels, mark selections, table cells and
//! constants, plus the predicate push-down shared with the decomposition
//! operators.

use std::collections::{BTreeMap, BTreeSet};

use crate::diag::{Warning, WarningCode};
use crate::error::{Error, Result};
use crate::expr::Predicate;
use crate::lift::ModelView;
use crate::plan::{Plan, ProjectItem};
use crate::value::Value;
use crate::view::{ConstantView, Context, View, ViewParts, ViewSet, MEASURE};

/// Anything the algebra accepts as an argument.
#[derive(Debug, Clone)]
pub enum Operand {
    View(View),
    Set(ViewSet),
    Constant(ConstantView),
    Model(ModelView),
}

impl Operand {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Operand::View(_) => "view",
            Operand::Set(_) => "viewset",
            Operand::Constant(_) => "constant",
            Operand::Model(_) => "model view",
        }
    }
}

impl From<View> for Operand {
    fn from(v: View) -> Self {
        Operand::View(v)
    }
}

impl From<ViewSet> for Operand {
    fn from(v: ViewSet) -> Self {
        Operand::Set(v)
    }
}

impl From<ConstantView> for Operand {
    fn from(v: ConstantView) -> Self {
        Operand::Constant(v)
    }
}

impl From<ModelView> for Operand {
    fn from(v: ModelView) -> Self {
        Operand::Model(v)
    }
}

/// Checks that `pred` only uses the view's output attributes.
pub(crate) fn check_selection(ctx: &Context, v: &View, pred: &Predicate) -> Result<()> {
    let allowed: BTreeSet<&str> = v.group_attrs.iter().map(String::as_str).chain([MEASURE]).collect();
    if let Some(bad) = pred.columns().iter().find(|c| !allowed.contains(c.as_str())) {
        return Err(Error::operand(format!(
            "predicate references `{bad}`, which is not an attribute of view {}",
            v.label()
        )));
    }
    let schema = v.schema(&ctx.catalog)?;
    pred.check(&schema)
        .map_err(|e| Error::operand(format!("malformed predicate `{pred}`: {e}")))
}

fn and_filter(q: &Plan, pred: Predicate) -> Plan {
    match q {
        Plan::Filter { input, predicate } => input.as_ref().clone().filter(predicate.clone().and(pred)),
        other => other.clone().filter(pred),
    }
}

/// Plan of `v` restricted to rows satisfying `pred`, with the `drop`
/// grouping attributes removed. Canonical views stay canonical: dimension
/// predicates move into `q`; predicates on the measure become a membership
/// test over the qualifying group keys.
pub(crate) fn restrict(ctx: &Context, v: &View, pred: &Predicate, drop: &[String]) -> Result<Plan> {
    let keep: Vec<String> = v.group_attrs.iter().filter(|g| !drop.contains(g)).cloned().collect();
    if let Some(c) = v.canonical_parts() {
        let cols = pred.columns();
        let push = if cols.iter().all(|c| v.group_attrs.contains(c)) {
            pred.clone()
        } else {
            let rel = ctx.evaluate(v)?;
            let schema = rel.schema().clone();
            let idx: Vec<usize> = v
                .group_attrs
                .iter()
                .map(|g| schema.index_of(g).expect("group attr in output"))
                .collect();
            let mut keys = Vec::new();
            for row in rel.rows() {
                if pred.eval(&schema, row)? == Some(true) {
                    keys.push(idx.iter().map(|&i| row[i].clone()).collect::<Vec<Value>>());
                }
            }
            Predicate::tuple_in(&v.group_attrs, &keys)
        };
        let q = match push {
            Predicate::Const(true) => c.q.clone(),
            p => and_filter(c.q, p),
        };
        return Ok(q.group_agg(keep, c.agg.clone()));
    }
    let filtered = match pred {
        Predicate::Const(true) => v.plan.clone(),
        p => v.plan.clone().filter(p.clone()),
    };
    if drop.is_empty() {
        return Ok(filtered);
    }
    let mut items: Vec<ProjectItem> = keep.iter().map(ProjectItem::keep).collect();
    items.push(ProjectItem::keep(MEASURE));
    Ok(filtered.project(items))
}

pub(crate) fn empty_warning(ctx: &Context, view: &mut View) -> Result<()> {
    if ctx.evaluate(view)?.is_empty() {
        view.warnings.push(Warning::new(
            WarningCode::EmptyOperand,
            format!("selection on {} matched no rows", view.label()),
        ));
    }
    Ok(())
}

/// Builds the view `v` restricted by `pred` with `drop` removed everywhere.
pub(crate) fn derive(ctx: &Context, v: &View, pred: &Predicate, drop: &[String], title: String) -> Result<View> {
    let plan = restrict(ctx, v, pred, drop)?;
    let mut view = View::build(
        ctx,
        ViewParts {
            title,
            plan,
            group_attrs: v.group_attrs.iter().filter(|g| !drop.contains(g)).cloned().collect(),
            measure: v.measure.clone(),
            mapping: v.mapping.without(drop),
            layout: v.layout,
            warnings: Vec::new(),
        },
    )?;
    empty_warning(ctx, &mut view)?;
    Ok(view)
}

/// Selects the group `attr = label` and drops `attr`.
pub fn legend_operand(ctx: &Context, v: &View, attr: &str, label: &Value) -> Result<View> {
    if !v.group_attrs.iter().any(|g| g == attr) {
        return Err(Error::operand(format!(
            "`{attr}` is not a grouping attribute of view {}",
            v.label()
        )));
    }
    let pred = Predicate::pin(&[(attr.to_string(), label.clone())]);
    check_selection(ctx, v, &pred)?;
    derive(
        ctx,
        v,
        &pred,
        &[attr.to_string()],
        format!("{} [{attr}={label}]", v.label()),
    )
}

/// Keeps the marks satisfying `selection`; grouping attributes unchanged.
pub fn marks_operand(ctx: &Context, v: &View, selection: &Predicate) -> Result<View> {
    check_selection(ctx, v, selection)?;
    let title = match selection {
        Predicate::Const(true) => v.title.clone(),
        p => format!("{} [{p}]", v.label()),
    };
    derive(ctx, v, selection, &[], title)
}

/// One single-mark view per row of `v`.
pub fn marks_of(ctx: &Context, v: &View) -> Result<ViewSet> {
    let rel = ctx.evaluate(v)?;
    let schema = rel.schema().clone();
    let mut views = Vec::with_capacity(rel.len());
    for row in rel.sorted_rows() {
        let key: Vec<(String, Value)> = v
            .group_attrs
            .iter()
            .map(|g| (g.clone(), row[schema.index_of(g).expect("group attr")].clone()))
            .collect();
        views.push(marks_operand(ctx, v, &Predicate::pin(&key))?);
    }
    if views.is_empty() {
        return Err(Error::operand(format!("view {} has no marks", v.label())));
    }
    ViewSet::new(views)
}

/// The single measure value at `row_key`, as a zero-dimensional view.
pub fn cell_operand(ctx: &Context, v: &View, row_key: &BTreeMap<String, Value>) -> Result<View> {
    let pinned: BTreeSet<&String> = row_key.keys().collect();
    let groups: BTreeSet<&String> = v.group_attrs.iter().collect();
    if pinned != groups {
        return Err(Error::operand(format!(
            "cell key must pin exactly the grouping attributes [{}] of view {}",
            v.group_attrs.join(", "),
            v.label()
        )));
    }
    let key: Vec<(String, Value)> = v.group_attrs.iter().map(|g| (g.clone(), row_key[g].clone())).collect();
    let pred = Predicate::pin(&key);
    check_selection(ctx, v, &pred)?;
    let rel = ctx.evaluate(v)?;
    let mut hits = 0;
    for row in rel.rows() {
        if pred.eval(rel.schema(), row)? == Some(true) {
            hits += 1;
        }
    }
    if hits != 1 {
        return Err(Error::operand(format!(
            "cell key `{pred}` matches {hits} rows of view {}, expected exactly one",
            v.label()
        )));
    }
    derive(ctx, v, &pred, &v.group_attrs, format!("{} [{pred}]", v.label()))
}
