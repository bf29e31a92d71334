//! Safety checking: measure typing and dimension-set matching decide whether
//! two views can be composed unambiguously.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::diag::{Warning, WarningCode};
use crate::error::Result;
use crate::view::operands::Operand;
use crate::view::{distinct_counts, measure_is_numeric, Context, MeasureType, View};

pub use crate::view::{measure_type, measure_type_of};

/// Decides whether two attributes refer to the same thing. The engine ships
/// exact-name matching; richer matchers can be plugged into a [`Context`].
pub trait AttributeMatcher: Send + Sync {
    fn compatible(&self, left: &str, right: &str) -> bool;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExactName;

impl AttributeMatcher for ExactName {
    fn compatible(&self, left: &str, right: &str) -> bool {
        left == right
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Safe,
    Overridable,
    Rejected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relationship {
    Exact,
    LeftSuperset,
    /// The right side has no dimensions left after matching.
    Scalar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SchemaMatch {
    Exact,
    LeftSuperset,
    NoMatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComposeKind {
    Stat,
    Union,
    ViewsetStat,
    ViewsetUnion,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SafetyVerdict {
    pub status: Status,
    pub relationship: Option<Relationship>,
    /// `(left, right)` attribute pairs used as join keys.
    pub matched: Vec<(String, String)>,
    /// Right-operand dimensions removed because they hold a single value.
    pub dropped: Vec<String>,
    pub warnings: Vec<Warning>,
}

impl SafetyVerdict {
    fn rejected(code: WarningCode, message: String) -> Self {
        Self {
            status: Status::Rejected,
            relationship: None,
            matched: Vec::new(),
            dropped: Vec::new(),
            warnings: vec![Warning::new(code, message)],
        }
    }

    pub fn is_safe(&self) -> bool {
        self.status == Status::Safe
    }

    /// Whether execution may proceed given the caller's override choice.
    pub fn permits(&self, override_flag: bool) -> bool {
        match self.status {
            Status::Safe => true,
            Status::Overridable => override_flag,
            Status::Rejected => false,
        }
    }
}

pub fn measures_compatible(t1: &MeasureType, t2: &MeasureType) -> bool {
    t1 == t2 || *t1 == MeasureType::Wildcard || *t2 == MeasureType::Wildcard
}

/// Exact-name dimension matching.
pub fn schema_match(dims1: &[String], dims2: &[String]) -> SchemaMatch {
    match_dims(&ExactName, dims1, dims2).0
}

/// Every right attribute must match exactly one left attribute, and no left
/// attribute may be claimed twice.
pub fn match_dims(
    matcher: &dyn AttributeMatcher,
    left: &[String],
    right: &[String],
) -> (SchemaMatch, Vec<(String, String)>) {
    let mut pairs = Vec::new();
    let mut claimed = BTreeSet::new();
    for r in right {
        let hits: Vec<&String> = left.iter().filter(|l| matcher.compatible(l, r)).collect();
        if hits.len() != 1 || !claimed.insert(hits[0].clone()) {
            return (SchemaMatch::NoMatch, Vec::new());
        }
        pairs.push((hits[0].clone(), r.clone()));
    }
    let m = if claimed.len() == left.len() {
        SchemaMatch::Exact
    } else {
        SchemaMatch::LeftSuperset
    };
    (m, pairs)
}

/// Verdict for composing `left` with `right` under `kind`. Never fails:
/// problems evaluating either operand become a rejection.
pub fn check_compose(ctx: &Context, left: &View, right: &Operand, kind: ComposeKind) -> SafetyVerdict {
    let result = match right {
        Operand::View(r) => check_views(ctx, left, r, kind),
        Operand::Constant(c) => Ok(check_constant(left, c.label.as_str(), kind)),
        Operand::Model(m) => Ok(crate::lift::check_view_model(ctx, left, m)),
        Operand::Set(_) => Ok(SafetyVerdict::rejected(
            WarningCode::UnsupportedRelationship,
            "a viewset is checked member by member; compose it through the viewset operators".into(),
        )),
    };
    result.unwrap_or_else(|e| {
        SafetyVerdict::rejected(
            WarningCode::EvaluationFailed,
            format!("could not evaluate operands: {e}"),
        )
    })
}

fn check_constant(left: &View, label: &str, kind: ComposeKind) -> SafetyVerdict {
    if kind != ComposeKind::Stat {
        return SafetyVerdict::rejected(
            WarningCode::UnsupportedRelationship,
            format!("constant {label} can only be the right operand of statistical composition"),
        );
    }
    let relationship = if left.group_attrs.is_empty() {
        Relationship::Exact
    } else {
        Relationship::Scalar
    };
    SafetyVerdict {
        status: Status::Safe,
        relationship: Some(relationship),
        matched: Vec::new(),
        dropped: Vec::new(),
        warnings: Vec::new(),
    }
}

fn check_views(ctx: &Context, left: &View, right: &View, kind: ComposeKind) -> Result<SafetyVerdict> {
    let ls = left.schema(&ctx.catalog)?;
    let rs = right.schema(&ctx.catalog)?;
    let mut dropped = Vec::new();
    let mut right_dims = right.group_attrs.clone();
    if kind == ComposeKind::Stat {
        let counts = distinct_counts(&ctx.evaluate(right)?, &right.group_attrs)?;
        dropped = right_dims
            .iter()
            .filter(|d| counts.get(*d) == Some(&1))
            .cloned()
            .collect();
        right_dims.retain(|d| !dropped.contains(d));
    }
    let (m, matched) = match_dims(ctx.matcher(), &left.group_attrs, &right_dims);
    let relationship = match m {
        SchemaMatch::Exact => Some(Relationship::Exact),
        SchemaMatch::LeftSuperset if right_dims.is_empty() => Some(Relationship::Scalar),
        SchemaMatch::LeftSuperset => Some(Relationship::LeftSuperset),
        SchemaMatch::NoMatch => None,
    };
    let mut verdict = SafetyVerdict {
        status: Status::Safe,
        relationship,
        matched,
        dropped,
        warnings: Vec::new(),
    };
    let (lt, rt) = (&left.measure.ty, &right.measure.ty);
    let reject = |v: &mut SafetyVerdict, code, msg: String| {
        v.status = Status::Rejected;
        v.warnings.push(Warning::new(code, msg));
    };
    let Some(rel) = relationship else {
        reject(
            &mut verdict,
            WarningCode::DimensionMismatch,
            format!(
                "dimensions [{}] of {} and [{}] of {} cannot be unambiguously matched",
                left.group_attrs.join(", "),
                left.label(),
                right_dims.join(", "),
                right.label()
            ),
        );
        return Ok(verdict);
    };
    if kind != ComposeKind::Stat && rel != Relationship::Exact {
        reject(
            &mut verdict,
            WarningCode::UnsupportedRelationship,
            format!(
                "{kind:?} composition needs identical dimensions; {} has [{}], {} has [{}]",
                left.label(),
                left.group_attrs.join(", "),
                right.label(),
                right_dims.join(", ")
            ),
        );
        return Ok(verdict);
    }
    if measures_compatible(lt, rt) {
        return Ok(verdict);
    }
    let numeric = measure_is_numeric(&ls) && measure_is_numeric(&rs);
    let msg = format!("measure types {lt} and {rt} are not compatible");
    if rel == Relationship::Exact && numeric && lt.attr() != rt.attr() {
        verdict.status = Status::Overridable;
        verdict.warnings.push(Warning::new(WarningCode::MeasureMismatch, msg));
        verdict.warnings.push(Warning::new(
            WarningCode::OverrideRequired,
            "both measures are numeric; composition is allowed with an explicit override",
        ));
    } else {
        reject(&mut verdict, WarningCode::MeasureMismatch, msg);
    }
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn schema_match_cases() {
        assert_eq!(
            schema_match(&s(&["date", "src"]), &s(&["src", "date"])),
            SchemaMatch::Exact
        );
        assert_eq!(
            schema_match(&s(&["city", "date"]), &s(&["date"])),
            SchemaMatch::LeftSuperset
        );
        assert_eq!(schema_match(&s(&["date"]), &s(&["market"])), SchemaMatch::NoMatch);
        assert_eq!(schema_match(&s(&["date"]), &s(&["date", "src"])), SchemaMatch::NoMatch);
    }

    #[test]
    fn compatibility() {
        let base = MeasureType::Base { attr: "delay".into() };
        let count = MeasureType::Count { attr: "delay".into() };
        assert!(measures_compatible(&base, &base));
        assert!(!measures_compatible(&base, &count));
        assert!(!measures_compatible(&count, &base));
        assert!(measures_compatible(&MeasureType::Wildcard, &base));
    }

    struct Prefix;
    impl AttributeMatcher for Prefix {
        fn compatible(&self, l: &str, r: &str) -> bool {
            l.starts_with(r) || r.starts_with(l)
        }
    }

    #[test]
    fn pluggable_matcher_rejects_ambiguity() {
        let (m, pairs) = match_dims(&Prefix, &s(&["date", "src"]), &s(&["dat"]));
        assert_eq!(m, SchemaMatch::LeftSuperset);
        assert_eq!(pairs, vec![("date".to_string(), "dat".to_string())]);
        let (m, _) = match_dims(&Prefix, &s(&["date", "dates"]), &s(&["dat"]));
        assert_eq!(m, SchemaMatch::NoMatch);
    }
}
