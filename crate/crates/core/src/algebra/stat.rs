//! Binary statistical composition.

use crate::diag::{Warning, WarningCode};
use crate::error::{Error, Result};
use crate::eval::eval_plan;
use crate::expr::ScalarExpr;
use crate::plan::{JoinKind, Plan, ProjectItem};
use crate::safety::{check_compose, ComposeKind, Relationship};
use crate::view::operands::Operand;
use crate::view::{BinaryOp, Context, Measure, MeasureExpr, View, ViewParts, MEASURE};

use super::ensure_permitted;

/// `π_{A_gb, y1 op y2 → y}(Q1 ⋈ Q2)`: a full outer join on matching
/// dimensions, or a left outer join when the right side has fewer.
pub fn stat_binary(ctx: &Context, left: &View, right: &Operand, op: &BinaryOp, override_flag: bool) -> Result<View> {
    let verdict = check_compose(ctx, left, right, ComposeKind::Stat);
    let relationship = verdict.relationship;
    let matched = verdict.matched.clone();
    let mut warnings = ensure_permitted(verdict, override_flag)?;

    let mut l_items: Vec<ProjectItem> = left.group_attrs.iter().map(ProjectItem::keep).collect();
    l_items.push(ProjectItem::rename(MEASURE, BinaryOp::LEFT));
    let left_plan = left.plan.clone().project(l_items);

    let (right_plan, right_expr, right_label) = match right {
        Operand::View(r) => {
            let mut items: Vec<ProjectItem> = matched
                .iter()
                .map(|(l, r)| ProjectItem::rename(r.clone(), l.clone()))
                .collect();
            items.push(ProjectItem::rename(MEASURE, BinaryOp::RIGHT));
            (
                r.plan.clone().project(items),
                r.measure.expr.clone(),
                r.label().to_string(),
            )
        }
        Operand::Constant(c) => (
            Plan::values(c.relation(BinaryOp::RIGHT)),
            MeasureExpr::Constant(c.value),
            c.label.clone(),
        ),
        other => {
            return Err(Error::operand(format!(
                "statistical composition expects a view or constant on the right, got a {}",
                other.kind_name()
            )))
        }
    };
    let keys: Vec<String> = left
        .group_attrs
        .iter()
        .filter(|g| matched.iter().any(|(l, _)| l == *g))
        .cloned()
        .collect();
    let kind = match (relationship, right) {
        (Some(Relationship::Exact), Operand::View(_)) => JoinKind::FullOuter,
        _ => JoinKind::LeftOuter,
    };
    let joined = Plan::join(kind, left_plan, right_plan, keys);

    let mut out: Vec<ProjectItem> = left.group_attrs.iter().map(ProjectItem::keep).collect();
    out.push(ProjectItem::new(
        op.apply(ScalarExpr::col(BinaryOp::LEFT), ScalarExpr::col(BinaryOp::RIGHT)),
        MEASURE,
    ));
    let plan = joined.clone().project(out);

    let rel = eval_plan(&joined, &ctx.catalog)?;
    let s = rel.schema();
    let (y1, y2) = (
        s.index_of(BinaryOp::LEFT).expect("y1"),
        s.index_of(BinaryOp::RIGHT).expect("y2"),
    );
    let both: Vec<_> = rel
        .rows()
        .iter()
        .filter(|r| !r[y1].is_null() && !r[y2].is_null())
        .collect();
    if both.is_empty() {
        warnings.push(Warning::new(
            WarningCode::EmptyJoin,
            format!(
                "no rows of {} and {right_label} matched; every measure is null",
                left.label()
            ),
        ));
    }
    if op.divides() {
        let expr = op.apply(ScalarExpr::col(BinaryOp::LEFT), ScalarExpr::col(BinaryOp::RIGHT));
        let mut zero = 0;
        for r in &both {
            if expr.eval(s, r)?.is_null() {
                zero += 1;
            }
        }
        if zero > 0 {
            warnings.push(Warning::new(
                WarningCode::DivideByZero,
                format!("{zero} row(s) divided by zero and were set to null"),
            ));
        }
    }

    View::build(
        ctx,
        ViewParts {
            title: format!("{} {op} {right_label}", left.label()),
            plan,
            group_attrs: left.group_attrs.clone(),
            measure: Measure::new(MeasureExpr::Combine {
                op: op.clone(),
                left: Box::new(left.measure.expr.clone()),
                right: Box::new(right_expr),
            }),
            mapping: left.mapping.clone(),
            layout: None,
            warnings,
        },
    )
}
