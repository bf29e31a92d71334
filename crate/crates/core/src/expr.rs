//! Scalar expressions and predicates with SQL three-valued logic.
//!
//! `Display` renders the DSL surface syntax, so a printed predicate can be fed
//! back through the parser.

use std::borrow::Cow;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::Schema;
use crate::value::{Value, ValueKind};

const KEYWORDS: &[&str] = &["and", "or", "not", "in", "is", "null", "true", "false"];

/// Renders a name as a DSL identifier, backtick-quoting when needed.
pub fn ident(name: &str) -> Cow<'_, str> {
    let mut chars = name.chars();
    let simple = chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !KEYWORDS.contains(&name.to_ascii_lowercase().as_str());
    if simple {
        Cow::Borrowed(name)
    } else {
        Cow::Owned(format!("`{}`", name.replace('`', "``")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            ArithOp::Add | ArithOp::Sub => 1,
            ArithOp::Mul | ArithOp::Div => 2,
        }
    }

    /// Applies the operator. Integer add/sub/mul stay integral unless they
    /// overflow; division always yields a float and is Null on a zero divisor.
    pub fn apply(self, l: &Value, r: &Value) -> Value {
        if let (Value::Integer(a), Value::Integer(b)) = (l, r) {
            let exact = match self {
                ArithOp::Add => a.checked_add(*b),
                ArithOp::Sub => a.checked_sub(*b),
                ArithOp::Mul => a.checked_mul(*b),
                ArithOp::Div => None,
            };
            if let Some(v) = exact {
                return Value::Integer(v);
            }
        }
        let (Some(a), Some(b)) = (l.as_f64(), r.as_f64()) else {
            return Value::Null;
        };
        match self {
            ArithOp::Add => Value::Number(a + b),
            ArithOp::Sub => Value::Number(a - b),
            ArithOp::Mul => Value::Number(a * b),
            ArithOp::Div if b == 0.0 => Value::Null,
            ArithOp::Div => Value::Number(a / b),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScalarExpr {
    Column(String),
    Literal(Value),
    Arith {
        op: ArithOp,
        left: Box<ScalarExpr>,
        right: Box<ScalarExpr>,
    },
}

impl ScalarExpr {
    pub fn col(name: impl Into<String>) -> Self {
        ScalarExpr::Column(name.into())
    }

    pub fn lit(v: impl Into<Value>) -> Self {
        ScalarExpr::Literal(v.into())
    }

    pub fn arith(op: ArithOp, left: ScalarExpr, right: ScalarExpr) -> Self {
        ScalarExpr::Arith {
            op,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn columns(&self, out: &mut BTreeSet<String>) {
        match self {
            ScalarExpr::Column(c) => {
                out.insert(c.clone());
            }
            ScalarExpr::Literal(_) => {}
            ScalarExpr::Arith { left, right, .. } => {
                left.columns(out);
                right.columns(out);
            }
        }
    }

    /// Result kind; `None` for a bare Null literal, which fits any kind.
    pub fn kind(&self, schema: &Schema) -> Result<Option<ValueKind>> {
        match self {
            ScalarExpr::Column(c) => Ok(Some(schema.require(c)?.kind)),
            ScalarExpr::Literal(v) => Ok(v.kind()),
            ScalarExpr::Arith { op, left, right } => {
                for side in [left, right] {
                    match side.kind(schema)? {
                        None | Some(ValueKind::Numeric) | Some(ValueKind::Temporal) => {}
                        Some(k) => {
                            return Err(Error::plan_type(format!(
                                "operator {} needs numeric operands, `{side}` is {k}",
                                op.symbol()
                            )))
                        }
                    }
                }
                Ok(Some(ValueKind::Numeric))
            }
        }
    }

    pub fn eval(&self, schema: &Schema, row: &[Value]) -> Result<Value> {
        Ok(match self {
            ScalarExpr::Column(c) => {
                let idx = schema
                    .index_of(c)
                    .ok_or_else(|| Error::plan_type(format!("unknown attribute `{c}`")))?;
                row[idx].clone()
            }
            ScalarExpr::Literal(v) => v.clone(),
            ScalarExpr::Arith { op, left, right } => {
                let l = left.eval(schema, row)?;
                let r = right.eval(schema, row)?;
                if l.is_null() || r.is_null() {
                    Value::Null
                } else {
                    op.apply(&l, &r)
                }
            }
        })
    }

    /// Renames column references through `f`.
    pub fn rename(&self, f: &dyn Fn(&str) -> String) -> ScalarExpr {
        match self {
            ScalarExpr::Column(c) => ScalarExpr::Column(f(c)),
            ScalarExpr::Literal(v) => ScalarExpr::Literal(v.clone()),
            ScalarExpr::Arith { op, left, right } => ScalarExpr::arith(*op, left.rename(f), right.rename(f)),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, parent: u8, right_side: bool) -> fmt::Result {
        match self {
            ScalarExpr::Column(c) => f.write_str(&ident(c)),
            ScalarExpr::Literal(v) => f.write_str(&v.literal()),
            ScalarExpr::Arith { op, left, right } => {
                let p = op.precedence();
                let paren = p < parent || (p == parent && right_side);
                if paren {
                    f.write_str("(")?;
                }
                left.fmt_prec(f, p, false)?;
                write!(f, " {} ", op.symbol())?;
                right.fmt_prec(f, p, true)?;
                if paren {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0, false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Eq => "=",
            CompareOp::Ne => "!=",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        }
    }

    pub fn test(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CompareOp::Eq => ord == Equal,
            CompareOp::Ne => ord != Equal,
            CompareOp::Lt => ord == Less,
            CompareOp::Le => ord != Greater,
            CompareOp::Gt => ord == Greater,
            CompareOp::Ge => ord != Less,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    Const(bool),
    Compare {
        left: ScalarExpr,
        op: CompareOp,
        right: ScalarExpr,
    },
    InSet {
        expr: ScalarExpr,
        values: Vec<Value>,
    },
    /// Inclusive range, SQL `BETWEEN`.
    InRange {
        expr: ScalarExpr,
        low: Value,
        high: Value,
    },
    IsNull(ScalarExpr),
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
    Not(Box<Predicate>),
}

fn cmp3(l: &Value, r: &Value) -> Option<std::cmp::Ordering> {
    if l.is_null() || r.is_null() {
        None
    } else {
        Some(l.cmp(r))
    }
}

impl Predicate {
    pub fn eq(attr: impl Into<String>, v: impl Into<Value>) -> Self {
        Predicate::Compare {
            left: ScalarExpr::col(attr),
            op: CompareOp::Eq,
            right: ScalarExpr::Literal(v.into()),
        }
    }

    pub fn and(self, other: Predicate) -> Self {
        match (self, other) {
            (Predicate::Const(true), p) | (p, Predicate::Const(true)) => p,
            (a, b) => Predicate::And(Box::new(a), Box::new(b)),
        }
    }

    pub fn or(self, other: Predicate) -> Self {
        match (self, other) {
            (Predicate::Const(false), p) | (p, Predicate::Const(false)) => p,
            (a, b) => Predicate::Or(Box::new(a), Box::new(b)),
        }
    }

    /// Conjunction of `attr = value` (or `attr is null`) terms.
    pub fn pin(key: &[(String, Value)]) -> Self {
        key.iter().fold(Predicate::Const(true), |acc, (a, v)| {
            let term = if v.is_null() {
                Predicate::IsNull(ScalarExpr::col(a.clone()))
            } else {
                Predicate::eq(a.clone(), v.clone())
            };
            acc.and(term)
        })
    }

    /// Membership of the attribute tuple in a finite set of tuples.
    pub fn tuple_in(attrs: &[String], tuples: &[Vec<Value>]) -> Self {
        if attrs.len() == 1 && tuples.iter().all(|t| !t[0].is_null()) && !tuples.is_empty() {
            return Predicate::InSet {
                expr: ScalarExpr::col(attrs[0].clone()),
                values: tuples.iter().map(|t| t[0].clone()).collect(),
            };
        }
        tuples.iter().fold(Predicate::Const(false), |acc, t| {
            let key: Vec<(String, Value)> = attrs.iter().cloned().zip(t.iter().cloned()).collect();
            acc.or(Predicate::pin(&key))
        })
    }

    pub fn columns(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_columns(&mut out);
        out
    }

    fn collect_columns(&self, out: &mut BTreeSet<String>) {
        match self {
            Predicate::Const(_) => {}
            Predicate::Compare { left, right, .. } => {
                left.columns(out);
                right.columns(out);
            }
            Predicate::InSet { expr, .. } | Predicate::InRange { expr, .. } => expr.columns(out),
            Predicate::IsNull(e) => e.columns(out),
            Predicate::And(a, b) | Predicate::Or(a, b) => {
                a.collect_columns(out);
                b.collect_columns(out);
            }
            Predicate::Not(p) => p.collect_columns(out),
        }
    }

    /// Checks attribute references and operand kinds against `schema`.
    pub fn check(&self, schema: &Schema) -> Result<()> {
        let comparable = |a: Option<ValueKind>, b: Option<ValueKind>, what: &dyn fmt::Display| match (a, b) {
            (Some(x), Some(y)) if x != y => Err(Error::plan_type(format!("cannot compare {x} with {y} in `{what}`"))),
            _ => Ok(()),
        };
        match self {
            Predicate::Const(_) => Ok(()),
            Predicate::Compare { left, right, .. } => comparable(left.kind(schema)?, right.kind(schema)?, self),
            Predicate::InSet { expr, values } => {
                let k = expr.kind(schema)?;
                values.iter().try_for_each(|v| comparable(k, v.kind(), self))
            }
            Predicate::InRange { expr, low, high } => {
                let k = expr.kind(schema)?;
                comparable(k, low.kind(), self)?;
                comparable(k, high.kind(), self)
            }
            Predicate::IsNull(e) => e.kind(schema).map(|_| ()),
            Predicate::And(a, b) | Predicate::Or(a, b) => {
                a.check(schema)?;
                b.check(schema)
            }
            Predicate::Not(p) => p.check(schema),
        }
    }

    /// Three-valued evaluation: `None` is SQL UNKNOWN.
    pub fn eval(&self, schema: &Schema, row: &[Value]) -> Result<Option<bool>> {
        Ok(match self {
            Predicate::Const(b) => Some(*b),
            Predicate::Compare { left, op, right } => {
                let l = left.eval(schema, row)?;
                let r = right.eval(schema, row)?;
                cmp3(&l, &r).map(|o| op.test(o))
            }
            Predicate::InSet { expr, values } => {
                let x = expr.eval(schema, row)?;
                if x.is_null() {
                    None
                } else if values.iter().any(|v| !v.is_null() && *v == x) {
                    Some(true)
                } else if values.iter().any(Value::is_null) {
                    None
                } else {
                    Some(false)
                }
            }
            Predicate::InRange { expr, low, high } => {
                let x = expr.eval(schema, row)?;
                let lo = cmp3(&x, low).map(|o| o.is_ge());
                let hi = cmp3(&x, high).map(|o| o.is_le());
                and3(lo, hi)
            }
            Predicate::IsNull(e) => Some(e.eval(schema, row)?.is_null()),
            Predicate::And(a, b) => and3(a.eval(schema, row)?, b.eval(schema, row)?),
            Predicate::Or(a, b) => or3(a.eval(schema, row)?, b.eval(schema, row)?),
            Predicate::Not(p) => p.eval(schema, row)?.map(|b| !b),
        })
    }

    pub fn rename(&self, f: &dyn Fn(&str) -> String) -> Predicate {
        match self {
            Predicate::Const(b) => Predicate::Const(*b),
            Predicate::Compare { left, op, right } => Predicate::Compare {
                left: left.rename(f),
                op: *op,
                right: right.rename(f),
            },
            Predicate::InSet { expr, values } => Predicate::InSet {
                expr: expr.rename(f),
                values: values.clone(),
            },
            Predicate::InRange { expr, low, high } => Predicate::InRange {
                expr: expr.rename(f),
                low: low.clone(),
                high: high.clone(),
            },
            Predicate::IsNull(e) => Predicate::IsNull(e.rename(f)),
            Predicate::And(a, b) => Predicate::And(Box::new(a.rename(f)), Box::new(b.rename(f))),
            Predicate::Or(a, b) => Predicate::Or(Box::new(a.rename(f)), Box::new(b.rename(f))),
            Predicate::Not(p) => Predicate::Not(Box::new(p.rename(f))),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Predicate::Or(..) => 1,
            Predicate::And(..) => 2,
            Predicate::Not(_) => 3,
            _ => 4,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, child: &Predicate, strict: bool) -> fmt::Result {
        let (p, c) = (self.precedence(), child.precedence());
        if c < p || (strict && c == p) {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

fn and3(a: Option<bool>, b: Option<bool>) -> Option<bool> {
    match (a, b) {
        (Some(false), _) | (_, Some(false)) => Some(false),
        (Some(true), Some(true)) => Some(true),
        _ => None,
    }
}

fn or3(a: Option<bool>, b: Option<bool>) -> Option<bool> {
    match (a, b) {
        (Some(true), _) | (_, Some(true)) => Some(true),
        (Some(false), Some(false)) => Some(false),
        _ => None,
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Const(b) => write!(f, "{b}"),
            Predicate::Compare { left, op, right } => {
                write!(f, "{left} {} {right}", op.symbol())
            }
            Predicate::InSet { expr, values } => {
                let vals: Vec<String> = values.iter().map(Value::literal).collect();
                write!(f, "{expr} in {{{}}}", vals.join(", "))
            }
            Predicate::InRange { expr, low, high } => {
                write!(f, "{expr} in [{}, {}]", low.literal(), high.literal())
            }
            Predicate::IsNull(e) => write!(f, "{e} is null"),
            Predicate::And(a, b) => {
                self.fmt_child(f, a, false)?;
                f.write_str(" and ")?;
                self.fmt_child(f, b, true)
            }
            Predicate::Or(a, b) => {
                self.fmt_child(f, a, false)?;
                f.write_str(" or ")?;
                self.fmt_child(f, b, true)
            }
            Predicate::Not(p) => {
                f.write_str("not ")?;
                self.fmt_child(f, p, false)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::AttributeDef;

    fn schema() -> Schema {
        Schema::new(vec![
            AttributeDef::dimension("a", ValueKind::Numeric),
            AttributeDef::dimension("s", ValueKind::Categorical),
        ])
        .unwrap()
    }

    #[test]
    fn unknown_compares_filter_out() {
        let s = schema();
        let row = vec![Value::Null, Value::text("x")];
        let p = Predicate::eq("a", 1i64);
        assert_eq!(p.eval(&s, &row).unwrap(), None);
        let not = Predicate::Not(Box::new(p.clone()));
        assert_eq!(not.eval(&s, &row).unwrap(), None);
        let or = p.or(Predicate::eq("s", "x"));
        assert_eq!(or.eval(&s, &row).unwrap(), Some(true));
    }

    #[test]
    fn in_set_with_null_member_is_unknown_on_miss() {
        let s = schema();
        let p = Predicate::InSet {
            expr: ScalarExpr::col("a"),
            values: vec![Value::Integer(1), Value::Null],
        };
        assert_eq!(p.eval(&s, &[2i64.into(), "x".into()]).unwrap(), None);
        assert_eq!(p.eval(&s, &[1i64.into(), "x".into()]).unwrap(), Some(true));
    }

    #[test]
    fn division_by_zero_is_null() {
        assert_eq!(ArithOp::Div.apply(&1i64.into(), &0i64.into()), Value::Null);
        assert_eq!(ArithOp::Div.apply(&1i64.into(), &4i64.into()), Value::Number(0.25));
        assert!(matches!(
            ArithOp::Add.apply(&i64::MAX.into(), &1i64.into()),
            Value::Number(_)
        ));
    }

    #[test]
    fn display_parenthesizes_minimally() {
        let e = ScalarExpr::arith(
            ArithOp::Sub,
            ScalarExpr::col("y1"),
            ScalarExpr::arith(ArithOp::Sub, ScalarExpr::col("y2"), ScalarExpr::lit(1i64)),
        );
        assert_eq!(e.to_string(), "y1 - (y2 - 1)");
        let p = Predicate::eq("a", 1i64)
            .or(Predicate::eq("a", 2i64))
            .and(Predicate::eq("s", "O'Hare"));
        assert_eq!(p.to_string(), "(a = 1 or a = 2) and s = 'O''Hare'");
        assert_eq!(ident("order by"), "`order by`");
        assert_eq!(ident("in"), "`in`");
    }

    #[test]
    fn mixed_kind_comparison_rejected() {
        let p = Predicate::eq("s", 1i64);
        assert!(matches!(p.check(&schema()), Err(Error::PlanType(_))));
        assert!(Predicate::eq("zz", 1i64).check(&schema()).is_err());
    }
}
