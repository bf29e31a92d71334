//! n-ary statistical composition and viewset cross products.

use std::collections::BTreeSet;

use crate::error::{Error, FailedPair, Result};
use crate::lift::{self, ModelView};
use crate::plan::{AggExpr, AggFunc, Plan, ProjectItem};
use crate::safety::{check_compose, ComposeKind, SafetyVerdict};
use crate::value::Value;
use crate::view::operands::Operand;
use crate::view::{BinaryOp, ConstantView, Context, Measure, MeasureExpr, View, ViewParts, ViewSet, MEASURE};

use super::union::{alignments, check_all_pairs};
use super::{compose_binary, stat_binary};

/// `γ_{A_gb, f*(a)→y}(q_1 ∪ … ∪ q_n)`: aggregates the raw rows behind every
/// member, never the members' aggregates.
pub fn viewset_stat(ctx: &Context, vs: &ViewSet, func: AggFunc, override_flag: bool) -> Result<View> {
    let views = vs.views();
    let mut parts = Vec::with_capacity(views.len());
    for v in views {
        match v.canonical_parts() {
            Some(c) => parts.push(c),
            None => {
                return Err(Error::Closure {
                    view: v.label().to_string(),
                })
            }
        }
    }
    let warnings = check_all_pairs(ctx, views, ComposeKind::ViewsetStat, override_flag)?;
    let first = &views[0];
    let aligned = alignments(ctx, views);
    let attr = parts[0].agg.attr.clone();

    // An attribute holding one value in every member carries no grouping
    // information and is dropped.
    let mut dropped: BTreeSet<String> = first.group_attrs.iter().cloned().collect();
    for (v, renames) in views.iter().zip(&aligned) {
        let rel = ctx.evaluate(v)?;
        dropped.retain(|g| {
            let name = renames.iter().find(|(l, _)| l == g).map_or(g, |(_, r)| r);
            rel.column(name)
                .map(|c| c.collect::<BTreeSet<&Value>>().len() == 1)
                .unwrap_or(false)
        });
    }

    let names0: Vec<String> = parts[0].q.schema(&ctx.catalog)?.names().map(str::to_string).collect();
    let mut inputs = Vec::with_capacity(views.len());
    let mut uniform = true;
    for (c, renames) in parts.iter().zip(&aligned) {
        let names: Vec<String> = c.q.schema(&ctx.catalog)?.names().map(str::to_string).collect();
        let same_cols = names.iter().collect::<BTreeSet<_>>() == names0.iter().collect::<BTreeSet<_>>();
        uniform &= same_cols && c.agg.attr == attr && renames.iter().all(|(l, r)| l == r);
    }
    for (c, renames) in parts.iter().zip(&aligned) {
        if uniform {
            inputs.push(c.q.clone());
            continue;
        }
        let mut items: Vec<ProjectItem> = first
            .group_attrs
            .iter()
            .map(|g| {
                let src = renames.iter().find(|(l, _)| l == g).map_or(g, |(_, r)| r);
                ProjectItem::rename(src.clone(), g.clone())
            })
            .collect();
        items.push(ProjectItem::rename(c.agg.attr.clone(), attr.clone()));
        inputs.push(c.q.clone().project(items));
    }
    let q = if inputs.len() == 1 {
        inputs.remove(0)
    } else {
        Plan::Union { inputs }
    };
    let group: Vec<String> = first
        .group_attrs
        .iter()
        .filter(|g| !dropped.contains(*g))
        .cloned()
        .collect();
    let plan = q.group_agg(
        group.clone(),
        AggExpr {
            func,
            attr: attr.clone(),
            alias: MEASURE.into(),
        },
    );
    let labels: Vec<&str> = views.iter().map(View::label).collect();
    View::build(
        ctx,
        ViewParts {
            title: format!("{func}{{{}}}", labels.join(", ")),
            plan,
            group_attrs: group,
            measure: Measure::new(MeasureExpr::Agg { func, attr }),
            mapping: first.mapping.without(&dropped),
            layout: None,
            warnings,
        },
    )
}

enum Item<'a> {
    View(&'a View),
    Constant(&'a ConstantView),
    Model(&'a ModelView),
}

impl Item<'_> {
    fn label(&self) -> String {
        match self {
            Item::View(v) => v.label().to_string(),
            Item::Constant(c) => c.label.clone(),
            Item::Model(m) => m.title.clone(),
        }
    }

    fn operand(&self) -> Operand {
        match self {
            Item::View(v) => Operand::View((*v).clone()),
            Item::Constant(c) => Operand::Constant((*c).clone()),
            Item::Model(m) => Operand::Model((*m).clone()),
        }
    }
}

fn items(o: &Operand) -> Vec<Item<'_>> {
    match o {
        Operand::Set(s) => s.views().iter().map(Item::View).collect(),
        Operand::View(v) => vec![Item::View(v)],
        Operand::Constant(c) => vec![Item::Constant(c)],
        Operand::Model(m) => vec![Item::Model(m)],
    }
}

fn pair_verdict(ctx: &Context, l: &Item<'_>, r: &Item<'_>) -> SafetyVerdict {
    match (l, r) {
        (Item::View(v), _) => check_compose(ctx, v, &r.operand(), ComposeKind::Stat),
        (Item::Model(m), Item::View(v)) => lift::check_view_model(ctx, v, m),
        (Item::Model(a), Item::Model(b)) => lift::check_model_model(a, b),
        (Item::Model(_), Item::Constant(_)) => lift::scalar_verdict(),
        (Item::Constant(c), _) => lift::constant_left_verdict(&c.label),
    }
}

/// `{V_i ∘ V_j}` for every pair, in left-major order. Every pair is checked
/// before anything executes; any failure aborts the whole product.
pub fn viewset_cross(
    ctx: &Context,
    lhs: &Operand,
    rhs: &Operand,
    op: &BinaryOp,
    override_flag: bool,
) -> Result<ViewSet> {
    let (ls, rs) = (items(lhs), items(rhs));
    let mut failed = Vec::new();
    for l in &ls {
        for r in &rs {
            let verdict = pair_verdict(ctx, l, r);
            if !verdict.permits(override_flag) {
                failed.push(FailedPair {
                    left: l.label(),
                    right: r.label(),
                    verdict,
                });
            }
        }
    }
    if !failed.is_empty() {
        return Err(Error::SafetyPairs(failed));
    }
    let mut out = Vec::with_capacity(ls.len() * rs.len());
    for l in &ls {
        for r in &rs {
            let result = match (l, r) {
                (Item::View(v), Item::View(_) | Item::Constant(_)) => {
                    stat_binary(ctx, v, &r.operand(), op, override_flag)?
                }
                _ => match compose_binary(ctx, &l.operand(), &r.operand(), op, override_flag)? {
                    Operand::View(v) => v,
                    _ => unreachable!("pairwise composition of non-set operands yields a view"),
                },
            };
            out.push(result);
        }
    }
    ViewSet::new(out)
}
