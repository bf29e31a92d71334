//! Lift: fit per-group linear models to a view, render model views by
//! sampling, and compose model views with views and with each other.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::diag::{Warning, WarningCode};
use crate::error::{Error, Result};
use crate::eval::{eval_plan, fit_groups};
use crate::expr::{ArithOp, ScalarExpr};
use crate::numeric::integer_root;
use crate::plan::{coef_column, JoinKind, Plan, ProjectItem, INTERCEPT};
use crate::relation::Relation;
use crate::safety::{measures_compatible, Relationship, SafetyVerdict, Status};
use crate::schema::{AttributeDef, Schema};
use crate::value::{Value, ValueKind};
use crate::view::operands::Operand;
use crate::view::{BinaryOp, Context, Measure, MeasureExpr, View, ViewId, ViewParts, VisualMapping, MEASURE};

/// Samples per feature before the grid cap applies.
pub const SAMPLES_PER_FEATURE: u64 = 20;
/// Upper bound on the size of the sampling grid.
pub const MAX_GRID: u64 = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearModel {
    pub features: Vec<String>,
    /// Intercept first, then one slope per feature.
    pub coefficients: Vec<f64>,
    pub training_rows: usize,
}

impl LinearModel {
    pub fn intercept(&self) -> f64 {
        self.coefficients[0]
    }

    pub fn slopes(&self) -> &[f64] {
        &self.coefficients[1..]
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.intercept() + self.slopes().iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelView {
    pub id: ViewId,
    pub title: String,
    pub base: View,
    pub features: Vec<String>,
    pub cond: Vec<String>,
    pub models: BTreeMap<Vec<Value>, LinearModel>,
    /// Observed `[min, max]` of each feature in the base view.
    pub domains: Vec<(f64, f64)>,
    pub mapping: VisualMapping,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelEntry {
    pub group: Vec<Value>,
    pub coefficients: Vec<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelJson {
    pub id: String,
    pub title: String,
    pub base: String,
    pub cond_attrs: Vec<String>,
    pub features: Vec<String>,
    pub models: Vec<ModelEntry>,
    pub mark: crate::view::MarkType,
    pub channels: BTreeMap<String, crate::view::Channel>,
    pub warnings: Vec<Warning>,
}

impl From<&ModelView> for ModelJson {
    fn from(m: &ModelView) -> Self {
        ModelJson {
            id: m.id.0.clone(),
            title: m.title.clone(),
            base: m.base.id.0.clone(),
            cond_attrs: m.cond.clone(),
            features: m.features.clone(),
            models: m
                .models
                .iter()
                .map(|(g, lm)| ModelEntry {
                    group: g.clone(),
                    coefficients: lm.coefficients.clone(),
                    n: lm.training_rows,
                })
                .collect(),
            mark: m.mapping.mark,
            channels: m.mapping.channels.clone(),
            warnings: m.warnings.clone(),
        }
    }
}

/// Fits `y ~ 1 + A_d` for every distinct `A_c` tuple of `v`.
pub fn lift(ctx: &Context, v: &View, features: &[String], cond: &[String]) -> Result<ModelView> {
    if features.is_empty() {
        return Err(Error::operand("lift needs at least one feature attribute"));
    }
    let mut seen = BTreeSet::new();
    for a in features.iter().chain(cond) {
        if !v.group_attrs.contains(a) {
            return Err(Error::operand(format!(
                "`{a}` is not a grouping attribute of view {}",
                v.label()
            )));
        }
        if !seen.insert(a) {
            return Err(Error::operand(format!(
                "`{a}` appears more than once among features and conditioning attributes"
            )));
        }
    }
    let rel = ctx.evaluate(v)?;
    for f in features {
        let kind = rel.schema().require(f)?.kind;
        if !matches!(kind, ValueKind::Numeric | ValueKind::Temporal) {
            return Err(Error::operand(format!(
                "feature `{f}` is {kind}; only quantitative attributes can be features"
            )));
        }
    }
    let fits = fit_groups(&rel, cond, features, MEASURE)?;
    let mut warnings = Vec::new();
    for (group, n) in &fits.degenerate {
        warnings.push(Warning::new(
            WarningCode::DegenerateFit,
            format!(
                "group {} has {n} usable row(s) for {} feature(s); its fit is underdetermined and was omitted",
                render_group(cond, group),
                features.len()
            ),
        ));
    }
    let models = fits
        .fitted
        .into_iter()
        .map(|g| {
            (
                g.group,
                LinearModel {
                    features: features.to_vec(),
                    coefficients: g.coefficients,
                    training_rows: g.rows,
                },
            )
        })
        .collect();
    let domains = features
        .iter()
        .map(|f| {
            let xs: Vec<f64> = rel.column(f)?.filter_map(Value::as_f64).collect();
            let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Ok(if xs.is_empty() { (0.0, 0.0) } else { (lo, hi) })
        })
        .collect::<Result<Vec<_>>>()?;
    let keep: BTreeSet<&String> = features.iter().chain(cond).collect();
    let mapping = VisualMapping {
        mark: v.mapping.mark,
        channels: v
            .mapping
            .channels
            .iter()
            .filter(|(a, _)| keep.contains(a) || a.as_str() == MEASURE)
            .map(|(a, c)| (a.clone(), *c))
            .collect(),
    };
    let mut title = format!("lift({}, [{}]", v.label(), features.join(", "));
    if !cond.is_empty() {
        title.push_str(&format!(", [{}]", cond.join(", ")));
    }
    title.push(')');
    Ok(ModelView {
        id: ctx.next_id(),
        title,
        base: v.clone(),
        features: features.to_vec(),
        cond: cond.to_vec(),
        models,
        domains,
        mapping,
        warnings,
    })
}

fn render_group(cond: &[String], group: &[Value]) -> String {
    if cond.is_empty() {
        return "(all rows)".into();
    }
    let parts: Vec<String> = cond.iter().zip(group).map(|(a, v)| format!("{a}={v}")).collect();
    format!("({})", parts.join(", "))
}

/// Per-feature sample count for `k` features: 20, scaled down so the grid
/// never exceeds 1000 points.
pub fn samples_per_feature(k: usize) -> u64 {
    SAMPLES_PER_FEATURE.min(integer_root(MAX_GRID, k as u32)).max(1)
}

fn axis(lo: f64, hi: f64, n: u64) -> Vec<f64> {
    if lo == hi || n <= 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect()
}

/// Equi-distant grid over `domains`, as the cartesian product of the axes.
pub fn sample_grid(domains: &[(f64, f64)]) -> Vec<Vec<f64>> {
    let n = samples_per_feature(domains.len());
    domains.iter().fold(vec![Vec::new()], |acc, &(lo, hi)| {
        let ax = axis(lo, hi, n);
        acc.iter()
            .flat_map(|prefix| {
                ax.iter().map(move |x| {
                    let mut p = prefix.clone();
                    p.push(*x);
                    p
                })
            })
            .collect()
    })
}

impl ModelView {
    pub fn plan(&self) -> Plan {
        Plan::ModelTrain {
            input: Box::new(self.base.plan.clone()),
            cond: self.cond.clone(),
            features: self.features.clone(),
            measure: MEASURE.into(),
        }
    }

    fn sample_schema(&self, ctx: &Context) -> Result<Schema> {
        let base = self.base.schema(&ctx.catalog)?;
        let mut attrs = Vec::new();
        for c in &self.cond {
            attrs.push(AttributeDef::dimension(c.clone(), base.require(c)?.kind));
        }
        for f in &self.features {
            attrs.push(AttributeDef::dimension(f.clone(), ValueKind::Numeric));
        }
        attrs.push(AttributeDef::measure(MEASURE));
        Schema::new(attrs)
    }

    /// Predictions over the sampling grid for every fitted group.
    pub fn sample_with(&self, ctx: &Context, domains: &[(f64, f64)]) -> Result<Relation> {
        if self.models.is_empty() {
            return Err(Error::EmptyModel);
        }
        let grid = sample_grid(domains);
        let mut rows = Vec::with_capacity(grid.len() * self.models.len());
        for (group, model) in &self.models {
            for point in &grid {
                let mut row = group.clone();
                row.extend(point.iter().map(|x| Value::Number(*x)));
                row.push(Value::Number(model.predict(point)));
                rows.push(row);
            }
        }
        Relation::new(self.sample_schema(ctx)?, rows)
    }

    /// The rendered model view as a literal-data view.
    pub fn to_view(&self, ctx: &Context) -> Result<View> {
        self.to_view_with(ctx, &self.domains)
    }

    fn to_view_with(&self, ctx: &Context, domains: &[(f64, f64)]) -> Result<View> {
        let rel = self.sample_with(ctx, domains)?;
        View::build(
            ctx,
            ViewParts {
                title: self.title.clone(),
                plan: Plan::values(rel),
                group_attrs: self.cond.iter().chain(&self.features).cloned().collect(),
                measure: Measure::new(MeasureExpr::Predicted(Box::new(self.base.measure.expr.clone()))),
                mapping: self.mapping.clone(),
                layout: None,
                warnings: self.warnings.clone(),
            },
        )
    }
}

pub fn sample_model_view(ctx: &Context, mv: &ModelView) -> Result<Relation> {
    mv.sample_with(ctx, &mv.domains)
}

fn verdict(status: Status, relationship: Option<Relationship>, warnings: Vec<Warning>) -> SafetyVerdict {
    SafetyVerdict {
        status,
        relationship,
        matched: Vec::new(),
        dropped: Vec::new(),
        warnings,
    }
}

pub(crate) fn scalar_verdict() -> SafetyVerdict {
    verdict(Status::Safe, Some(Relationship::Scalar), Vec::new())
}

pub(crate) fn constant_left_verdict(label: &str) -> SafetyVerdict {
    verdict(
        Status::Rejected,
        None,
        vec![Warning::new(
            WarningCode::UnsupportedRelationship,
            format!("constant {label} can only be the right operand"),
        )],
    )
}

fn measure_status(
    left: &crate::view::MeasureType,
    right: &crate::view::MeasureType,
    warnings: &mut Vec<Warning>,
) -> Status {
    if measures_compatible(left, right) {
        return Status::Safe;
    }
    warnings.push(Warning::new(
        WarningCode::MeasureMismatch,
        format!("measure types {left} and {right} are not compatible"),
    ));
    if left.attr() != right.attr() {
        warnings.push(Warning::new(
            WarningCode::OverrideRequired,
            "both measures are numeric; composition is allowed with an explicit override",
        ));
        Status::Overridable
    } else {
        Status::Rejected
    }
}

/// A view can be composed with a model view when the measures agree and the
/// view carries every feature and conditioning attribute of the model.
pub fn check_view_model(_ctx: &Context, v: &View, mv: &ModelView) -> SafetyVerdict {
    let mut warnings = Vec::new();
    let needed: Vec<&String> = mv.features.iter().chain(&mv.cond).collect();
    let missing: Vec<&str> = needed
        .iter()
        .filter(|a| !v.group_attrs.contains(a))
        .map(|a| a.as_str())
        .collect();
    if !missing.is_empty() {
        warnings.push(Warning::new(
            WarningCode::DimensionMismatch,
            format!("view {} lacks model attribute(s) [{}]", v.label(), missing.join(", ")),
        ));
        return verdict(Status::Rejected, None, warnings);
    }
    let status = measure_status(&v.measure.ty, &mv.base.measure.ty, &mut warnings);
    let relationship = if needed.len() == v.group_attrs.len() {
        Relationship::Exact
    } else {
        Relationship::LeftSuperset
    };
    let mut out = verdict(status, Some(relationship), warnings);
    out.matched = needed.iter().map(|a| ((*a).clone(), (*a).clone())).collect();
    out
}

pub fn check_model_model(a: &ModelView, b: &ModelView) -> SafetyVerdict {
    let mut warnings = Vec::new();
    let same = |x: &[String], y: &[String]| x.iter().collect::<BTreeSet<_>>() == y.iter().collect::<BTreeSet<_>>();
    if !same(&a.features, &b.features) || !same(&a.cond, &b.cond) {
        warnings.push(Warning::new(
            WarningCode::DimensionMismatch,
            format!(
                "model views differ in features or conditioning: [{} | {}] vs [{} | {}]",
                a.features.join(", "),
                a.cond.join(", "),
                b.features.join(", "),
                b.cond.join(", ")
            ),
        ));
        return verdict(Status::Rejected, None, warnings);
    }
    let status = measure_status(&a.base.measure.ty, &b.base.measure.ty, &mut warnings);
    verdict(status, Some(Relationship::Exact), warnings)
}

fn predict_expr(features: &[String]) -> ScalarExpr {
    features.iter().fold(ScalarExpr::col(INTERCEPT), |acc, f| {
        ScalarExpr::arith(
            ArithOp::Add,
            acc,
            ScalarExpr::arith(
                ArithOp::Mul,
                ScalarExpr::col(coef_column(f)),
                ScalarExpr::col(f.clone()),
            ),
        )
    })
}

fn compose_with_model(
    ctx: &Context,
    v: &View,
    mv: &ModelView,
    op: &BinaryOp,
    override_flag: bool,
    model_on_left: bool,
) -> Result<View> {
    let verdict = check_view_model(ctx, v, mv);
    let mut warnings = crate::algebra::ensure_permitted(verdict, override_flag)?;

    let mut items: Vec<ProjectItem> = v.group_attrs.iter().map(ProjectItem::keep).collect();
    items.push(ProjectItem::rename(MEASURE, BinaryOp::LEFT));
    let joined = Plan::join(
        JoinKind::Inner,
        v.plan.clone().project(items),
        mv.plan(),
        mv.cond.clone(),
    );
    let observed = ScalarExpr::col(BinaryOp::LEFT);
    let predicted = predict_expr(&mv.features);
    let combined = if model_on_left {
        op.apply(predicted, observed)
    } else {
        op.apply(observed, predicted)
    };
    let mut out: Vec<ProjectItem> = v.group_attrs.iter().map(ProjectItem::keep).collect();
    out.push(ProjectItem::new(combined, MEASURE));
    let plan = joined.project(out);

    let total = ctx.evaluate(v)?.len();
    let matched = eval_plan(&plan, &ctx.catalog)?.len();
    if matched == 0 {
        return Err(Error::EmptyJoin(format!(
            "no row of {} has a fitted model in {}",
            v.label(),
            mv.title
        )));
    }
    if matched < total {
        warnings.push(Warning::new(
            WarningCode::UnmatchedModelRows,
            format!(
                "{} row(s) of {} have no model and were excluded",
                total - matched,
                v.label()
            ),
        ));
    }
    let observed_m = v.measure.expr.clone();
    let predicted_m = MeasureExpr::Predicted(Box::new(mv.base.measure.expr.clone()));
    let (lm, rm, title) = if model_on_left {
        (predicted_m, observed_m, format!("{} {op} {}", mv.title, v.label()))
    } else {
        (observed_m, predicted_m, format!("{} {op} {}", v.label(), mv.title))
    };
    View::build(
        ctx,
        ViewParts {
            title,
            plan,
            group_attrs: v.group_attrs.clone(),
            measure: Measure::new(MeasureExpr::Combine {
                op: op.clone(),
                left: Box::new(lm),
                right: Box::new(rm),
            }),
            mapping: v.mapping.clone(),
            layout: None,
            warnings,
        },
    )
}

/// `V ∘ M`: each row of `V` against the model prediction for that row.
pub fn compose_view_model(ctx: &Context, v: &View, mv: &ModelView, op: &BinaryOp, override_flag: bool) -> Result<View> {
    compose_with_model(ctx, v, mv, op, override_flag, false)
}

/// `M ∘ V`, the mirror of [`compose_view_model`].
pub fn compose_model_view(ctx: &Context, mv: &ModelView, v: &View, op: &BinaryOp, override_flag: bool) -> Result<View> {
    compose_with_model(ctx, v, mv, op, override_flag, true)
}

/// Samples both model views on a shared grid and composes the predictions.
pub fn compose_model_model(
    ctx: &Context,
    a: &ModelView,
    b: &ModelView,
    op: &BinaryOp,
    override_flag: bool,
) -> Result<View> {
    let verdict = check_model_model(a, b);
    let warnings = crate::algebra::ensure_permitted(verdict, override_flag)?;
    let domains: Vec<(f64, f64)> = a
        .features
        .iter()
        .zip(&a.domains)
        .map(|(f, &(lo, hi))| {
            let j = b.features.iter().position(|g| g == f).expect("same features");
            let (blo, bhi) = b.domains[j];
            (lo.min(blo), hi.max(bhi))
        })
        .collect();
    let b_domains: Vec<(f64, f64)> = b
        .features
        .iter()
        .map(|f| domains[a.features.iter().position(|g| g == f).expect("same features")])
        .collect();
    let va = a.to_view_with(ctx, &domains)?;
    let vb = b.to_view_with(ctx, &b_domains)?;
    let mut out = crate::algebra::stat_binary(ctx, &va, &Operand::View(vb), op, override_flag)?;
    out.title = format!("{} {op} {}", a.title, b.title);
    out.warnings.extend(warnings);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        assert_eq!(sample_grid(&[(0.0, 1.0)]).len(), 20);
        assert_eq!(sample_grid(&[(0.0, 1.0), (0.0, 1.0)]).len(), 400);
        assert_eq!(sample_grid(&[(0.0, 1.0); 3]).len(), 1000);
        assert_eq!(sample_grid(&[(0.0, 1.0); 4]).len(), 625);
        assert_eq!(sample_grid(&[(2.0, 2.0)]), vec![vec![2.0]]);
    }

    #[test]
    fn axis_endpoints_exact() {
        let ax = axis(1.0, 3.0, 20);
        assert_eq!(ax[0], 1.0);
        assert_eq!(ax[19], 3.0);
    }
}
