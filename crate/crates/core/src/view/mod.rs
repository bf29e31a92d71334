//! The view operand: a query plan plus a visual mapping.

mod json;
pub mod operands;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diag::Warning;
use crate::error::{Error, Result};
use crate::expr::{ArithOp, Predicate, ScalarExpr};
use crate::plan::{AggExpr, AggFunc, Plan};
use crate::relation::{Catalog, Relation};
use crate::safety::{AttributeMatcher, ExactName};
use crate::schema::{AttributeDef, Role, Schema};
use crate::value::{format_number, Value, ValueKind};

pub use json::{MeasureJson, ViewJson};

/// Name of the measure column every view exposes.
pub const MEASURE: &str = "y";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarkType {
    Bar,
    Line,
    Point,
    Area,
    Text,
    Rect,
}

impl MarkType {
    pub const ALL: [MarkType; 6] = [
        MarkType::Bar,
        MarkType::Line,
        MarkType::Point,
        MarkType::Area,
        MarkType::Text,
        MarkType::Rect,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MarkType::Bar => "bar",
            MarkType::Line => "line",
            MarkType::Point => "point",
            MarkType::Area => "area",
            MarkType::Text => "text",
            MarkType::Rect => "rect",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        MarkType::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Mapping(format!("unknown mark `{s}`")))
    }

    /// Marks that fill the area between the measure value and zero.
    pub fn fills_area(self) -> bool {
        matches!(self, MarkType::Bar | MarkType::Area)
    }

    pub fn supports(self, ch: Channel) -> bool {
        match ch {
            Channel::Shape => self == MarkType::Point,
            Channel::Size => !matches!(self, MarkType::Area | MarkType::Rect),
            _ => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    X,
    Y,
    Color,
    Shape,
    Size,
    Column,
    Row,
    Detail,
}

impl Channel {
    pub const ALL: [Channel; 8] = [
        Channel::X,
        Channel::Y,
        Channel::Color,
        Channel::Shape,
        Channel::Size,
        Channel::Column,
        Channel::Row,
        Channel::Detail,
    ];

    /// Ordinal channels in decreasing perceptual effectiveness.
    pub const EFFECTIVENESS: [Channel; 4] = [Channel::Color, Channel::Shape, Channel::Size, Channel::Detail];

    pub fn name(self) -> &'static str {
        match self {
            Channel::X => "x",
            Channel::Y => "y",
            Channel::Color => "color",
            Channel::Shape => "shape",
            Channel::Size => "size",
            Channel::Column => "column",
            Channel::Row => "row",
            Channel::Detail => "detail",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Channel::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Mapping(format!("unknown channel `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VisualMapping {
    pub mark: MarkType,
    pub channels: BTreeMap<String, Channel>,
}

impl VisualMapping {
    pub fn new(mark: MarkType, channels: BTreeMap<String, Channel>) -> Result<Self> {
        let mut used = BTreeSet::new();
        for (attr, ch) in &channels {
            if !used.insert(*ch) {
                return Err(Error::Mapping(format!(
                    "channel `{}` is referenced more than once",
                    ch.name()
                )));
            }
            if !mark.supports(*ch) {
                return Err(Error::Mapping(format!(
                    "{} marks have no `{}` channel (attribute `{attr}`)",
                    mark.name(),
                    ch.name()
                )));
            }
        }
        Ok(Self { mark, channels })
    }

    /// Default encoding: grouping attributes fill x, color, column, row and
    /// detail in order; the measure goes to y.
    pub fn auto(mark: MarkType, group_attrs: &[String]) -> Self {
        let slots = [
            Channel::X,
            Channel::Color,
            Channel::Column,
            Channel::Row,
            Channel::Detail,
        ];
        let mut channels: BTreeMap<String, Channel> = group_attrs
            .iter()
            .zip(slots.into_iter().filter(|c| mark.supports(*c)))
            .map(|(a, c)| (a.clone(), c))
            .collect();
        channels.insert(MEASURE.to_string(), Channel::Y);
        Self { mark, channels }
    }

    pub fn validate(&self, schema: &Schema) -> Result<()> {
        for attr in self.channels.keys() {
            if !schema.contains(attr) {
                return Err(Error::Mapping(format!(
                    "mapped attribute `{attr}` is not in the view output"
                )));
            }
        }
        Ok(())
    }

    pub fn without<'a>(&self, attrs: impl IntoIterator<Item = &'a String>) -> Self {
        let drop: BTreeSet<&String> = attrs.into_iter().collect();
        Self {
            mark: self.mark,
            channels: self
                .channels
                .iter()
                .filter(|(a, _)| !drop.contains(a))
                .map(|(a, c)| (a.clone(), *c))
                .collect(),
        }
    }

    pub fn renamed(&self, f: &dyn Fn(&str) -> String) -> Self {
        Self {
            mark: self.mark,
            channels: self.channels.iter().map(|(a, c)| (f(a), *c)).collect(),
        }
    }

    /// Most effective ordinal channel this mark supports and no attribute uses.
    pub fn free_channel(&self) -> Option<Channel> {
        let used: BTreeSet<Channel> = self.channels.values().copied().collect();
        Channel::EFFECTIVENESS
            .into_iter()
            .find(|c| self.mark.supports(*c) && !used.contains(c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutHint {
    Superpose,
    Juxtapose,
}

/// The combining function of statistical composition.
#[derive(Debug, Clone, PartialEq)]
pub enum BinaryOp {
    Arith(ArithOp),
    /// Arithmetic over the columns `y1` (left) and `y2` (right).
    Custom(ScalarExpr),
}

/// Sorts the operands of `+` and `*` so commuted expressions compare equal.
fn commutative_form(e: &ScalarExpr) -> ScalarExpr {
    match e {
        ScalarExpr::Arith { op, left, right } => {
            let (l, r) = (commutative_form(left), commutative_form(right));
            let (l, r) = if matches!(op, ArithOp::Add | ArithOp::Mul) && l.to_string() > r.to_string() {
                (r, l)
            } else {
                (l, r)
            };
            ScalarExpr::arith(*op, l, r)
        }
        other => other.clone(),
    }
}

impl Default for BinaryOp {
    fn default() -> Self {
        BinaryOp::Arith(ArithOp::Sub)
    }
}

impl BinaryOp {
    pub const LEFT: &'static str = "y1";
    pub const RIGHT: &'static str = "y2";

    pub fn symmetric(&self) -> bool {
        match self {
            BinaryOp::Arith(op) => matches!(op, ArithOp::Add | ArithOp::Mul),
            BinaryOp::Custom(e) => {
                let swapped = e.rename(&|c| match c {
                    "y1" => "y2".into(),
                    "y2" => "y1".into(),
                    other => other.into(),
                });
                commutative_form(&swapped) == commutative_form(e)
            }
        }
    }

    pub fn custom(expr: ScalarExpr) -> Result<Self> {
        let mut cols = BTreeSet::new();
        expr.columns(&mut cols);
        if let Some(bad) = cols.iter().find(|c| *c != Self::LEFT && *c != Self::RIGHT) {
            return Err(Error::operand(format!(
                "combine expression may reference only y1 and y2, found `{bad}`"
            )));
        }
        Ok(BinaryOp::Custom(expr))
    }

    /// Builds the combining expression over the given operand expressions.
    pub fn apply(&self, left: ScalarExpr, right: ScalarExpr) -> ScalarExpr {
        match self {
            BinaryOp::Arith(op) => ScalarExpr::arith(*op, left, right),
            BinaryOp::Custom(e) => substitute(e, &left, &right),
        }
    }

    fn type_tag(&self) -> Option<&'static str> {
        match self {
            BinaryOp::Arith(ArithOp::Add | ArithOp::Sub) => None,
            BinaryOp::Arith(ArithOp::Mul) => Some("mul"),
            BinaryOp::Arith(ArithOp::Div) => Some("div"),
            BinaryOp::Custom(_) => Some("expr"),
        }
    }

    pub fn divides(&self) -> bool {
        match self {
            BinaryOp::Arith(op) => *op == ArithOp::Div,
            BinaryOp::Custom(e) => contains_div(e),
        }
    }
}

fn contains_div(e: &ScalarExpr) -> bool {
    match e {
        ScalarExpr::Arith { op, left, right } => *op == ArithOp::Div || contains_div(left) || contains_div(right),
        _ => false,
    }
}

fn substitute(e: &ScalarExpr, l: &ScalarExpr, r: &ScalarExpr) -> ScalarExpr {
    match e {
        ScalarExpr::Column(c) if c == BinaryOp::LEFT => l.clone(),
        ScalarExpr::Column(c) if c == BinaryOp::RIGHT => r.clone(),
        ScalarExpr::Arith { op, left, right } => {
            ScalarExpr::arith(*op, substitute(left, l, r), substitute(right, l, r))
        }
        other => other.clone(),
    }
}

impl fmt::Display for BinaryOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BinaryOp::Arith(op) => f.write_str(op.symbol()),
            BinaryOp::Custom(e) => write!(f, "{e}"),
        }
    }
}

/// Attribute-sensitive type of a measure expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MeasureType {
    Base {
        attr: String,
    },
    Count {
        attr: String,
    },
    Derived {
        function: String,
        attr: String,
    },
    /// Constants: compatible with any numeric measure.
    Wildcard,
}

impl MeasureType {
    pub fn attr(&self) -> Option<&str> {
        match self {
            MeasureType::Base { attr } | MeasureType::Count { attr } | MeasureType::Derived { attr, .. } => Some(attr),
            MeasureType::Wildcard => None,
        }
    }
}

impl fmt::Display for MeasureType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureType::Base { attr } => f.write_str(attr),
            MeasureType::Count { attr } => write!(f, "count<{attr}>"),
            MeasureType::Derived { function, attr } => write!(f, "{function}<{attr}>"),
            MeasureType::Wildcard => f.write_str("*"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureExpr {
    Agg {
        func: AggFunc,
        attr: String,
    },
    Attr(String),
    Constant(f64),
    Combine {
        op: BinaryOp,
        left: Box<MeasureExpr>,
        right: Box<MeasureExpr>,
    },
    /// Model prediction of a measure.
    Predicted(Box<MeasureExpr>),
}

impl MeasureExpr {
    pub fn agg(&self) -> Option<(AggFunc, &str)> {
        match self {
            MeasureExpr::Agg { func, attr } => Some((*func, attr)),
            _ => None,
        }
    }
}

impl fmt::Display for MeasureExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureExpr::Agg { func, attr } => write!(f, "{func}({attr})"),
            MeasureExpr::Attr(a) => f.write_str(a),
            MeasureExpr::Constant(c) => f.write_str(&format_number(*c)),
            MeasureExpr::Combine { op, left, right } => match op {
                BinaryOp::Arith(a) => write!(f, "({left} {} {right})", a.symbol()),
                BinaryOp::Custom(e) => write!(f, "combine({left}, {right}, {e})"),
            },
            MeasureExpr::Predicted(m) => write!(f, "predict({m})"),
        }
    }
}

/// Type of an aggregate call by function name.
pub fn measure_type_of(func: &str, attr: &str) -> Result<MeasureType> {
    Ok(agg_type(func.parse()?, attr))
}

fn agg_type(func: AggFunc, attr: &str) -> MeasureType {
    let attr = attr.to_string();
    match func {
        AggFunc::Avg | AggFunc::Std | AggFunc::Min | AggFunc::Max => MeasureType::Base { attr },
        AggFunc::Count => MeasureType::Count { attr },
        AggFunc::Sum => MeasureType::Derived {
            function: "sum".into(),
            attr,
        },
    }
}

pub fn measure_type(expr: &MeasureExpr) -> MeasureType {
    match expr {
        MeasureExpr::Agg { func, attr } => agg_type(*func, attr),
        MeasureExpr::Attr(a) => MeasureType::Base { attr: a.clone() },
        MeasureExpr::Constant(_) => MeasureType::Wildcard,
        MeasureExpr::Predicted(m) => measure_type(m),
        MeasureExpr::Combine { op, left, right } => {
            let (l, r) = (measure_type(left), measure_type(right));
            let anchor = if l == MeasureType::Wildcard { r } else { l };
            match (op.type_tag(), anchor.attr()) {
                (None, _) | (_, None) => anchor,
                (Some(tag), Some(attr)) => MeasureType::Derived {
                    function: tag.into(),
                    attr: attr.into(),
                },
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    pub expr: MeasureExpr,
    pub ty: MeasureType,
    pub output: String,
}

impl Measure {
    pub fn new(expr: MeasureExpr) -> Self {
        let ty = measure_type(&expr);
        Self {
            expr,
            ty,
            output: MEASURE.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct ViewId(pub String);

impl fmt::Display for ViewId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct View {
    pub id: ViewId,
    pub title: String,
    pub plan: Plan,
    pub group_attrs: Vec<String>,
    pub measure: Measure,
    pub mapping: VisualMapping,
    pub canonical: bool,
    pub layout: Option<LayoutHint>,
    pub warnings: Vec<Warning>,
}

/// Fields for [`View::build`]; the id and canonical flag are derived.
#[derive(Debug, Clone)]
pub struct ViewParts {
    pub title: String,
    pub plan: Plan,
    pub group_attrs: Vec<String>,
    pub measure: Measure,
    pub mapping: VisualMapping,
    pub layout: Option<LayoutHint>,
    pub warnings: Vec<Warning>,
}

impl View {
    /// Validates the parts against the plan's output schema and assigns an id.
    pub fn build(ctx: &Context, parts: ViewParts) -> Result<View> {
        let schema = parts.plan.schema(&ctx.catalog)?;
        for g in &parts.group_attrs {
            let def = schema.require(g)?;
            if def.role != Role::Dimension {
                return Err(Error::plan_type(format!("grouping attribute `{g}` is not a dimension")));
            }
        }
        schema.require(&parts.measure.output)?;
        parts.mapping.validate(&schema)?;
        let canonical = parts
            .plan
            .canonical()
            .is_some_and(|c| c.group == parts.group_attrs.as_slice() && c.agg.alias == parts.measure.output);
        Ok(View {
            id: ctx.next_id(),
            title: parts.title,
            plan: parts.plan,
            group_attrs: parts.group_attrs,
            measure: parts.measure,
            mapping: parts.mapping,
            canonical,
            layout: parts.layout,
            warnings: parts.warnings,
        })
    }

    pub fn parts(&self) -> ViewParts {
        ViewParts {
            title: self.title.clone(),
            plan: self.plan.clone(),
            group_attrs: self.group_attrs.clone(),
            measure: self.measure.clone(),
            mapping: self.mapping.clone(),
            layout: self.layout,
            warnings: Vec::new(),
        }
    }

    pub fn evaluate(&self, catalog: &Catalog) -> Result<Relation> {
        crate::eval::eval_plan(&self.plan, catalog)
    }

    pub fn schema(&self, catalog: &Catalog) -> Result<Schema> {
        self.plan.schema(catalog)
    }

    /// The `(group, agg, q)` decomposition of a canonical view.
    pub fn canonical_parts(&self) -> Option<crate::plan::Canonical<'_>> {
        if self.canonical {
            self.plan.canonical()
        } else {
            None
        }
    }

    /// Label used to name the view in messages: its title, or its id.
    pub fn label(&self) -> &str {
        if self.title.is_empty() {
            &self.id.0
        } else {
            &self.title
        }
    }
}

/// A canonical view built from its parts.
#[derive(Debug, Clone)]
pub struct ViewSpec {
    pub table: String,
    pub filter: Option<Predicate>,
    pub group_attrs: Vec<String>,
    pub func: AggFunc,
    pub attr: String,
    pub mark: MarkType,
    pub channels: Option<BTreeMap<String, Channel>>,
    pub title: Option<String>,
}

pub fn make_view(ctx: &Context, spec: &ViewSpec) -> Result<View> {
    let base = ctx.catalog.get(&spec.table)?.schema().clone();
    for g in &spec.group_attrs {
        let def = base.require(g)?;
        if def.role != Role::Dimension {
            return Err(Error::plan_type(format!("group attribute `{g}` is a measure")));
        }
    }
    let mut seen = BTreeSet::new();
    if let Some(dup) = spec.group_attrs.iter().find(|g| !seen.insert(*g)) {
        return Err(Error::plan_type(format!("group attribute `{dup}` listed twice")));
    }
    let mut plan = Plan::scan(&spec.table);
    if let Some(p) = &spec.filter {
        plan = plan.filter(p.clone());
    }
    let plan = plan.group_agg(
        spec.group_attrs.clone(),
        AggExpr {
            func: spec.func,
            attr: spec.attr.clone(),
            alias: MEASURE.into(),
        },
    );
    let mapping = match &spec.channels {
        Some(ch) => VisualMapping::new(spec.mark, ch.clone())?,
        None => VisualMapping::auto(spec.mark, &spec.group_attrs),
    };
    let title = spec.title.clone().unwrap_or_else(|| {
        let mut t = format!("{}({}) by [{}]", spec.func, spec.attr, spec.group_attrs.join(", "));
        if let Some(p) = &spec.filter {
            t.push_str(&format!(" where {p}"));
        }
        t
    });
    View::build(
        ctx,
        ViewParts {
            title,
            plan,
            group_attrs: spec.group_attrs.clone(),
            measure: Measure::new(MeasureExpr::Agg {
                func: spec.func,
                attr: spec.attr.clone(),
            }),
            mapping,
            layout: None,
            warnings: Vec::new(),
        },
    )
}

/// An ordered, nonempty collection of views.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewSet(Vec<View>);

impl ViewSet {
    pub fn new(views: Vec<View>) -> Result<Self> {
        if views.is_empty() {
            return Err(Error::operand("a viewset needs at least one view"));
        }
        Ok(Self(views))
    }

    pub fn views(&self) -> &[View] {
        &self.0
    }

    pub fn into_views(self) -> Vec<View> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A constant usable only as the right operand of statistical composition.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantView {
    pub value: f64,
    pub label: String,
}

pub fn constant_operand(value: f64) -> Result<ConstantView> {
    if !value.is_finite() {
        return Err(Error::operand(format!("constant {value} is not finite")));
    }
    Ok(ConstantView {
        value,
        label: format_number(value),
    })
}

impl ConstantView {
    pub fn relation(&self, column: &str) -> Relation {
        let schema = Schema::new(vec![AttributeDef::measure(column)]).expect("single column");
        Relation::new(schema, vec![vec![Value::Number(self.value)]]).expect("numeric value")
    }

    /// Zero-dimensional view `π_{val→y}`.
    pub fn to_view(&self, ctx: &Context) -> Result<View> {
        let mut channels = BTreeMap::new();
        channels.insert(MEASURE.to_string(), Channel::Y);
        View::build(
            ctx,
            ViewParts {
                title: self.label.clone(),
                plan: Plan::values(self.relation(MEASURE)),
                group_attrs: Vec::new(),
                measure: Measure::new(MeasureExpr::Constant(self.value)),
                mapping: VisualMapping {
                    mark: MarkType::Text,
                    channels,
                },
                layout: None,
                warnings: Vec::new(),
            },
        )
    }
}

#[derive(Debug, Default)]
pub struct IdGen(AtomicU64);

impl IdGen {
    fn next(&self) -> u64 {
        self.0.fetch_add(1, Ordering::Relaxed) + 1
    }
}

/// Catalog plus engine-wide services shared by all operators.
pub struct Context {
    pub catalog: Catalog,
    ids: IdGen,
    matcher: Arc<dyn AttributeMatcher>,
}

impl Default for Context {
    fn default() -> Self {
        Self::new(Catalog::new())
    }
}

impl fmt::Debug for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Context")
            .field("tables", &self.catalog.names().collect::<Vec<_>>())
            .field("next_id", &self.ids.0.load(Ordering::Relaxed))
            .finish()
    }
}

impl Context {
    pub fn new(catalog: Catalog) -> Self {
        Self {
            catalog,
            ids: IdGen::default(),
            matcher: Arc::new(ExactName),
        }
    }

    pub fn with_matcher(mut self, matcher: Arc<dyn AttributeMatcher>) -> Self {
        self.matcher = matcher;
        self
    }

    pub fn matcher(&self) -> &dyn AttributeMatcher {
        self.matcher.as_ref()
    }

    pub fn next_id(&self) -> ViewId {
        ViewId(format!("v{}", self.ids.next()))
    }

    /// Current id counter, for replaying a session deterministically.
    pub fn id_checkpoint(&self) -> u64 {
        self.ids.0.load(Ordering::Relaxed)
    }

    pub fn restore_ids(&self, checkpoint: u64) {
        self.ids.0.store(checkpoint, Ordering::Relaxed);
    }

    pub fn evaluate(&self, view: &View) -> Result<Relation> {
        view.evaluate(&self.catalog)
    }
}

/// Distinct values of each grouping attribute in an evaluated view.
pub(crate) fn distinct_counts(rel: &Relation, attrs: &[String]) -> Result<BTreeMap<String, usize>> {
    attrs
        .iter()
        .map(|a| {
            let set: BTreeSet<&Value> = rel.column(a)?.collect();
            Ok((a.clone(), set.len()))
        })
        .collect()
}

/// Kind of the measure column, if numeric or unknown.
pub(crate) fn measure_is_numeric(schema: &Schema) -> bool {
    schema.get(MEASURE).is_some_and(|a| a.kind == ValueKind::Numeric)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measure_types() {
        let t = |f: AggFunc| {
            measure_type(&MeasureExpr::Agg {
                func: f,
                attr: "delay".into(),
            })
        };
        assert_eq!(t(AggFunc::Avg), MeasureType::Base { attr: "delay".into() });
        assert_eq!(t(AggFunc::Min), MeasureType::Base { attr: "delay".into() });
        assert_eq!(t(AggFunc::Count), MeasureType::Count { attr: "delay".into() });
        assert_eq!(measure_type(&MeasureExpr::Constant(20.0)), MeasureType::Wildcard);
        assert!(matches!(measure_type_of("median", "delay"), Err(Error::Type(_))));
    }

    #[test]
    fn combined_types() {
        let avg = MeasureExpr::Agg {
            func: AggFunc::Avg,
            attr: "delay".into(),
        };
        let sub = MeasureExpr::Combine {
            op: BinaryOp::default(),
            left: Box::new(MeasureExpr::Constant(1.0)),
            right: Box::new(avg.clone()),
        };
        assert_eq!(measure_type(&sub), MeasureType::Base { attr: "delay".into() });
        let div = MeasureExpr::Combine {
            op: BinaryOp::Arith(ArithOp::Div),
            left: Box::new(avg.clone()),
            right: Box::new(avg),
        };
        assert_eq!(
            measure_type(&div),
            MeasureType::Derived {
                function: "div".into(),
                attr: "delay".into()
            }
        );
    }

    #[test]
    fn channel_used_once() {
        let mut ch = BTreeMap::new();
        ch.insert("a".to_string(), Channel::X);
        ch.insert("b".to_string(), Channel::X);
        assert!(matches!(VisualMapping::new(MarkType::Bar, ch), Err(Error::Mapping(_))));
    }

    #[test]
    fn free_channel_respects_mark() {
        let m = VisualMapping::auto(MarkType::Area, &["a".into(), "b".into()]);
        assert_eq!(m.channels["b"], Channel::Color);
        assert_eq!(m.free_channel(), Some(Channel::Detail));
        let p = VisualMapping::auto(MarkType::Point, &["a".into()]);
        assert_eq!(p.free_channel(), Some(Channel::Color));
    }

    #[test]
    fn op_symmetry() {
        assert!(BinaryOp::Arith(ArithOp::Add).symmetric());
        assert!(!BinaryOp::default().symmetric());
        let e = ScalarExpr::arith(ArithOp::Mul, ScalarExpr::col("y1"), ScalarExpr::col("y2"));
        assert!(BinaryOp::custom(e).unwrap().symmetric());
        assert!(BinaryOp::custom(ScalarExpr::col("z")).is_err());
    }

    #[test]
    fn constant_must_be_finite() {
        assert!(constant_operand(f64::NAN).is_err());
        assert_eq!(constant_operand(-3.5).unwrap().value, -3.5);
    }
}
