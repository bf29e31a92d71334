//! Union composition: merge marks, tagging each row with its source view.

use std::collections::BTreeSet;

use crate::error::{Error, FailedPair, Result};
use crate::expr::ScalarExpr;
use crate::plan::{Plan, ProjectItem};
use crate::safety::{check_compose, match_dims, ComposeKind};
use crate::value::Value;
use crate::view::operands::Operand;
use crate::view::{Context, LayoutHint, View, ViewParts, ViewSet, MEASURE};

use super::ensure_permitted;

pub fn union_binary(ctx: &Context, left: &View, right: &View, override_flag: bool) -> Result<View> {
    viewset_union(ctx, &ViewSet::new(vec![left.clone(), right.clone()])?, override_flag)
}

/// Checks every pair `(i, j)`, `i < j`. A single failing pair surfaces as
/// its verdict; several as a list.
pub(crate) fn check_all_pairs(
    ctx: &Context,
    views: &[View],
    kind: ComposeKind,
    override_flag: bool,
) -> Result<Vec<crate::diag::Warning>> {
    let mut failed = Vec::new();
    let mut warnings = Vec::new();
    for i in 0..views.len() {
        for j in i + 1..views.len() {
            let verdict = check_compose(ctx, &views[i], &Operand::View(views[j].clone()), kind);
            if verdict.permits(override_flag) {
                if let Ok(w) = ensure_permitted(verdict, override_flag) {
                    warnings.extend(w);
                }
            } else {
                failed.push(FailedPair {
                    left: views[i].label().to_string(),
                    right: views[j].label().to_string(),
                    verdict,
                });
            }
        }
    }
    match failed.len() {
        0 => {
            warnings.dedup();
            Ok(warnings)
        }
        1 if views.len() == 2 => Err(Error::Safety(Box::new(failed.remove(0).verdict))),
        _ => Err(Error::SafetyPairs(failed)),
    }
}

/// Renames that align each view's grouping attributes to the first view's.
pub(crate) fn alignments(ctx: &Context, views: &[View]) -> Vec<Vec<(String, String)>> {
    views
        .iter()
        .map(|v| match_dims(ctx.matcher(), &views[0].group_attrs, &v.group_attrs).1)
        .collect()
}

fn qid_values(views: &[View]) -> Vec<String> {
    let titles: Vec<&str> = views.iter().map(|v| v.title.as_str()).collect();
    let ids: Vec<&str> = views.iter().map(|v| v.id.0.as_str()).collect();
    let unique = |xs: &[&str], x: &str| !x.is_empty() && xs.iter().filter(|y| **y == x).count() == 1;
    views
        .iter()
        .enumerate()
        .map(|(i, v)| {
            if unique(&titles, &v.title) {
                v.title.clone()
            } else if unique(&ids, &v.id.0) {
                v.id.0.clone()
            } else {
                format!("{}#{}", v.id.0, i + 1)
            }
        })
        .collect()
}

fn fresh_qid(taken: &[String]) -> String {
    std::iter::once("qid".to_string())
        .chain((2..).map(|i| format!("qid{i}")))
        .find(|n| !taken.contains(n))
        .expect("unbounded")
}

/// Same canonical shape for all members: same aggregate, same `q` columns and
/// identical grouping names.
fn shared_canonical(ctx: &Context, views: &[View], aligned: &[Vec<(String, String)>]) -> Result<bool> {
    let Some(c0) = views[0].canonical_parts() else {
        return Ok(false);
    };
    let s0 = c0.q.schema(&ctx.catalog)?;
    for (v, renames) in views.iter().zip(aligned).skip(1) {
        let Some(c) = v.canonical_parts() else {
            return Ok(false);
        };
        if c.agg.func != c0.agg.func
            || c.agg.attr != c0.agg.attr
            || renames.iter().any(|(l, r)| l != r)
            || c.group.iter().collect::<BTreeSet<_>>() != c0.group.iter().collect::<BTreeSet<_>>()
        {
            return Ok(false);
        }
        let s = c.q.schema(&ctx.catalog)?;
        if s.len() != s0.len()
            || s0
                .attrs()
                .iter()
                .any(|a| s.get(&a.name).is_none_or(|b| b.kind != a.kind))
        {
            return Ok(false);
        }
    }
    Ok(true)
}

/// n-ary union. Each input gains a literal `qid` column that is mapped to the
/// most effective free channel.
pub fn viewset_union(ctx: &Context, vs: &ViewSet, override_flag: bool) -> Result<View> {
    let views = vs.views();
    let kind = if views.len() == 2 {
        ComposeKind::Union
    } else {
        ComposeKind::ViewsetUnion
    };
    let warnings = check_all_pairs(ctx, views, kind, override_flag)?;
    let first = &views[0];
    let aligned = alignments(ctx, views);
    let qid = fresh_qid(&first.group_attrs);
    let labels = qid_values(views);
    let mut mapping = first.mapping.clone();
    let channel = mapping.free_channel().ok_or_else(|| {
        Error::Mapping(format!(
            "no free channel for `{qid}` on a {} mark; unmap one of [{}] first",
            mapping.mark.name(),
            mapping.channels.keys().cloned().collect::<Vec<_>>().join(", ")
        ))
    })?;
    mapping.channels.insert(qid.clone(), channel);

    let plan = if shared_canonical(ctx, views, &aligned)? {
        let c0 = first.canonical_parts().expect("checked");
        let cols: Vec<String> = c0.q.schema(&ctx.catalog)?.names().map(str::to_string).collect();
        let inputs = views
            .iter()
            .zip(&labels)
            .map(|(v, label)| {
                let mut items: Vec<ProjectItem> = cols.iter().map(ProjectItem::keep).collect();
                items.push(ProjectItem::new(
                    ScalarExpr::Literal(Value::text(label.clone())),
                    qid.clone(),
                ));
                v.canonical_parts().expect("checked").q.clone().project(items)
            })
            .collect();
        let mut group = first.group_attrs.clone();
        group.push(qid.clone());
        Plan::Union { inputs }.group_agg(group, c0.agg.clone())
    } else {
        let inputs = views
            .iter()
            .zip(&aligned)
            .zip(&labels)
            .map(|((v, renames), label)| {
                let mut items: Vec<ProjectItem> = first
                    .group_attrs
                    .iter()
                    .map(|g| {
                        let src = renames.iter().find(|(l, _)| l == g).map_or(g, |(_, r)| r);
                        ProjectItem::rename(src.clone(), g.clone())
                    })
                    .collect();
                items.push(ProjectItem::keep(MEASURE));
                items.push(ProjectItem::new(
                    ScalarExpr::Literal(Value::text(label.clone())),
                    qid.clone(),
                ));
                v.plan.clone().project(items)
            })
            .collect();
        Plan::Union { inputs }
    };
    let mut group_attrs = first.group_attrs.clone();
    group_attrs.push(qid);
    let layout = if views.iter().any(|v| v.mapping.mark.fills_area()) {
        LayoutHint::Juxtapose
    } else {
        LayoutHint::Superpose
    };
    View::build(
        ctx,
        ViewParts {
            title: format!("union({})", labels.join(", ")),
            plan,
            group_attrs,
            measure: first.measure.clone(),
            mapping,
            layout: Some(layout),
            warnings,
        },
    )
}
