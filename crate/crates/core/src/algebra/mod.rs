//! Composition and decomposition operators.

mod decompose;
mod stat;
mod union;
mod viewset;

pub use decompose::{explode, extract};
pub use stat::stat_binary;
pub use union::{union_binary, viewset_union};
pub use viewset::{viewset_cross, viewset_stat};

pub use crate::view::{BinaryOp, LayoutHint};

use crate::diag::{Warning, WarningCode};
use crate::error::{Error, Result};
use crate::lift;
use crate::plan::AggFunc;
use crate::safety::{SafetyVerdict, Status};
use crate::view::operands::Operand;
use crate::view::{Context, View, ViewSet};

/// Turns a verdict into a go/no-go, returning the warnings to attach to the
/// result when execution proceeds.
pub(crate) fn ensure_permitted(verdict: SafetyVerdict, override_flag: bool) -> Result<Vec<Warning>> {
    if !verdict.permits(override_flag) {
        return Err(Error::Safety(Box::new(verdict)));
    }
    let mut warnings = verdict.warnings;
    if verdict.status == Status::Overridable {
        warnings.retain(|w| w.code != WarningCode::OverrideRequired);
        warnings.push(Warning::new(
            WarningCode::OverrideApplied,
            "composition executed under an explicit override",
        ));
    }
    Ok(warnings)
}

/// Binary composition dispatched on operand kinds. A viewset on either side
/// yields a viewset; otherwise a single view.
pub fn compose_binary(
    ctx: &Context,
    left: &Operand,
    right: &Operand,
    op: &BinaryOp,
    override_flag: bool,
) -> Result<Operand> {
    match (left, right) {
        (Operand::Set(_), _) | (_, Operand::Set(_)) => {
            viewset_cross(ctx, left, right, op, override_flag).map(Operand::Set)
        }
        (Operand::Constant(c), _) => Err(Error::operand(format!(
            "constant {} can only be used as the right operand",
            c.label
        ))),
        (Operand::View(l), Operand::View(_) | Operand::Constant(_)) => {
            stat_binary(ctx, l, right, op, override_flag).map(Operand::View)
        }
        (Operand::View(l), Operand::Model(m)) => {
            lift::compose_view_model(ctx, l, m, op, override_flag).map(Operand::View)
        }
        (Operand::Model(m), Operand::View(r)) => {
            lift::compose_model_view(ctx, m, r, op, override_flag).map(Operand::View)
        }
        (Operand::Model(a), Operand::Model(b)) => {
            lift::compose_model_model(ctx, a, b, op, override_flag).map(Operand::View)
        }
        (Operand::Model(m), Operand::Constant(_)) => {
            let rendered = m.to_view(ctx)?;
            stat_binary(ctx, &rendered, right, op, override_flag).map(Operand::View)
        }
    }
}

/// Flattens union arguments: viewsets contribute every member, model views
/// contribute their rendered samples.
pub fn union_operands(ctx: &Context, operands: &[Operand], override_flag: bool) -> Result<View> {
    let mut views = Vec::new();
    for o in operands {
        match o {
            Operand::View(v) => views.push(v.clone()),
            Operand::Set(s) => views.extend(s.views().iter().cloned()),
            Operand::Model(m) => views.push(m.to_view(ctx)?),
            Operand::Constant(c) => return Err(Error::operand(format!("constant {} cannot be unioned", c.label))),
        }
    }
    viewset_union(ctx, &ViewSet::new(views)?, override_flag)
}

/// n-ary statistical composition over a viewset (a single view counts as a
/// singleton set).
pub fn aggregate_operand(ctx: &Context, func: AggFunc, operand: &Operand, override_flag: bool) -> Result<View> {
    match operand {
        Operand::Set(s) => viewset_stat(ctx, s, func, override_flag),
        Operand::View(v) => viewset_stat(ctx, &ViewSet::new(vec![v.clone()])?, func, override_flag),
        other => Err(Error::operand(format!(
            "cannot aggregate a {}; expected a viewset",
            other.kind_name()
        ))),
    }
}
