//! Decomposition: extract a selection, explode into per-group views.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::expr::Predicate;
use crate::value::Value;
use crate::view::operands::{check_selection, derive};
use crate::view::{Context, View, ViewSet};

/// `R(σ_p(Q))` as a standalone view. No predicate copies the view.
pub fn extract(ctx: &Context, v: &View, p: Option<&Predicate>) -> Result<View> {
    let pred = p.cloned().unwrap_or(Predicate::Const(true));
    check_selection(ctx, v, &pred)?;
    derive(ctx, v, &pred, &[], format!("extract({})", v.label()))
}

/// One view per distinct value tuple of `attrs`, each without those
/// attributes.
pub fn explode(ctx: &Context, v: &View, attrs: &[String]) -> Result<ViewSet> {
    let mut seen = BTreeSet::new();
    for a in attrs {
        if !v.group_attrs.contains(a) {
            return Err(Error::operand(format!(
                "`{a}` is not a grouping attribute of view {}",
                v.label()
            )));
        }
        if !seen.insert(a) {
            return Err(Error::operand(format!("`{a}` listed twice")));
        }
    }
    if attrs.is_empty() {
        return ViewSet::new(vec![derive(ctx, v, &Predicate::Const(true), &[], v.title.clone())?]);
    }
    let rel = ctx.evaluate(v)?;
    let idx: Vec<usize> = attrs
        .iter()
        .map(|a| rel.schema().index_of(a).expect("group attr in output"))
        .collect();
    let tuples: BTreeSet<Vec<Value>> = rel
        .rows()
        .iter()
        .map(|r| idx.iter().map(|&i| r[i].clone()).collect())
        .collect();
    let mut views = Vec::with_capacity(tuples.len());
    for t in tuples {
        let key: Vec<(String, Value)> = attrs.iter().cloned().zip(t).collect();
        let pred = Predicate::pin(&key);
        let label: Vec<String> = key.iter().map(|(a, v)| format!("{a}={v}")).collect();
        views.push(derive(
            ctx,
            v,
            &pred,
            attrs,
            format!("{} [{}]", v.label(), label.join(", ")),
        )?);
    }
    if views.is_empty() {
        return Err(Error::operand(format!("view {} has no rows to explode", v.label())));
    }
    ViewSet::new(views)
}
