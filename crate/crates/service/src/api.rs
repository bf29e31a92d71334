//! Request bodies and their translation into session-language expressions.
//! Every mutating request becomes one expression, so its effect can be
//! shown to the user as a line of script.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::Deserialize;
use serde_json::Value as JsonValue;
use vca_core::expr::{ArithOp, ScalarExpr};
use vca_core::{AggFunc, Channel, ComposeKind, MarkType, Value};
use vca_dsl::{parse_predicate, parse_scalar, Expr, ViewDef};

use crate::error::{ApiError, ApiResult};

/// Reference to an operand. A bare string names a stored view or model, a
/// bare number is a constant.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OperandRef {
    Id(String),
    Number(f64),
    Tagged(Tagged),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Tagged {
    View(String),
    Constant(f64),
    Set(Vec<OperandRef>),
    Legend {
        view: String,
        attr: String,
        value: JsonValue,
    },
    Marks {
        view: String,
        predicate: String,
    },
    MarksOf(String),
    Cell {
        view: String,
        key: BTreeMap<String, JsonValue>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateTable {
    pub name: String,
    pub csv: String,
    #[serde(default)]
    pub roles: BTreeMap<String, String>,
    pub revision: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateView {
    pub table: String,
    /// Predicate in script syntax, e.g. `src = 'SFO'`.
    pub filter: Option<String>,
    pub group_attrs: Vec<String>,
    pub func: String,
    pub attr: String,
    pub mark: Option<String>,
    pub channels: Option<BTreeMap<String, String>>,
    pub title: Option<String>,
    pub revision: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Compose {
    pub left: OperandRef,
    pub right: Option<OperandRef>,
    /// `-`, `+`, `*`, `/`, or an expression over `y1` and `y2` for
    /// statistical composition; an aggregate name for `viewset_stat`.
    pub op: Option<String>,
    #[serde(default = "stat")]
    pub kind: String,
    #[serde(default, rename = "override")]
    pub override_flag: bool,
    pub revision: Option<u64>,
}

fn stat() -> String {
    "stat".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Decompose {
    pub view: String,
    pub kind: String,
    #[serde(default)]
    pub args: DecomposeArgs,
    pub revision: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeArgs {
    pub predicate: Option<String>,
    pub attrs: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lift {
    pub view: String,
    pub features: Vec<String>,
    #[serde(default)]
    pub cond: Vec<String>,
    pub revision: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Safety {
    pub left: OperandRef,
    pub right: OperandRef,
    #[serde(default = "stat")]
    pub kind: String,
}

pub fn parse_body<'a, T: Deserialize<'a>>(bytes: &'a [u8]) -> ApiResult<T> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::Validation(format!("invalid request body: {e}")))
}

fn invalid(e: impl std::fmt::Display) -> ApiError {
    ApiError::Validation(e.to_string())
}

pub fn value(v: &JsonValue) -> ApiResult<Value> {
    Ok(match v {
        JsonValue::Null => Value::Null,
        JsonValue::Bool(b) => Value::Boolean(*b),
        JsonValue::Number(n) => match n.as_i64() {
            Some(i) => Value::Integer(i),
            None => Value::Number(n.as_f64().ok_or_else(|| invalid(format!("unsupported number {n}")))?),
        },
        JsonValue::String(s) => Value::Text(s.clone()),
        JsonValue::Object(o) => match (o.len(), o.get("date")) {
            (1, Some(JsonValue::String(d))) => match parse_scalar(&format!("d'{d}'")) {
                Ok(ScalarExpr::Literal(v)) => v,
                _ => return Err(invalid(format!("`{d}` is not a YYYY-MM-DD date"))),
            },
            _ => return Err(invalid("object values must have the form {\"date\": \"YYYY-MM-DD\"}")),
        },
        JsonValue::Array(_) => return Err(invalid("arrays are not values")),
    })
}

pub fn operand(r: &OperandRef) -> ApiResult<Expr> {
    Ok(match r {
        OperandRef::Id(id) => Expr::Name(id.clone()),
        OperandRef::Number(x) => Expr::Const(*x),
        OperandRef::Tagged(t) => match t {
            Tagged::View(id) => Expr::Name(id.clone()),
            Tagged::Constant(x) => Expr::Const(*x),
            Tagged::Set(xs) => Expr::Set(xs.iter().map(operand).collect::<ApiResult<_>>()?),
            Tagged::Legend { view, attr, value: v } => Expr::Legend {
                view: Box::new(Expr::Name(view.clone())),
                attr: attr.clone(),
                value: value(v)?,
            },
            Tagged::Marks { view, predicate } => Expr::Marks {
                view: Box::new(Expr::Name(view.clone())),
                pred: parse_predicate(predicate).map_err(invalid)?,
            },
            Tagged::MarksOf(view) => Expr::MarksOf(Box::new(Expr::Name(view.clone()))),
            Tagged::Cell { view, key } => Expr::Cell {
                view: Box::new(Expr::Name(view.clone())),
                key: key
                    .iter()
                    .map(|(a, v)| Ok((a.clone(), value(v)?)))
                    .collect::<ApiResult<_>>()?,
            },
        },
    })
}

pub fn compose_kind(s: &str) -> ApiResult<ComposeKind> {
    Ok(match s {
        "stat" => ComposeKind::Stat,
        "union" => ComposeKind::Union,
        "viewset_stat" => ComposeKind::ViewsetStat,
        "viewset_union" => ComposeKind::ViewsetUnion,
        other => {
            return Err(invalid(format!(
                "unknown kind `{other}`; expected stat, union, viewset_stat or viewset_union"
            )))
        }
    })
}

fn arith(op: &str) -> Option<ArithOp> {
    Some(match op {
        "-" | "sub" => ArithOp::Sub,
        "+" | "add" => ArithOp::Add,
        "*" | "mul" => ArithOp::Mul,
        "/" | "div" => ArithOp::Div,
        _ => return None,
    })
}

impl CreateView {
    pub fn to_def(&self) -> ApiResult<ViewDef> {
        let channels = match &self.channels {
            None => Vec::new(),
            Some(m) => m
                .iter()
                .map(|(a, c)| Ok((a.clone(), Channel::parse(c).map_err(invalid)?)))
                .collect::<ApiResult<_>>()?,
        };
        Ok(ViewDef {
            table: self.table.clone(),
            filter: self
                .filter
                .as_deref()
                .map(parse_predicate)
                .transpose()
                .map_err(invalid)?,
            group: self.group_attrs.clone(),
            func: AggFunc::from_str(&self.func).map_err(invalid)?,
            attr: self.attr.clone(),
            mark: self.mark.as_deref().map(MarkType::parse).transpose().map_err(invalid)?,
            channels,
            title: self.title.clone(),
        })
    }
}

impl Compose {
    pub fn to_expr(&self) -> ApiResult<Expr> {
        let left = operand(&self.left)?;
        let right = self.right.as_ref().map(operand).transpose()?;
        let override_flag = self.override_flag;
        Ok(match compose_kind(&self.kind)? {
            ComposeKind::Stat => {
                let right = Box::new(right.ok_or_else(|| invalid("statistical composition needs `right`"))?);
                let left = Box::new(left);
                let op = self.op.as_deref().unwrap_or("-");
                match arith(op) {
                    Some(op) => Expr::Binary {
                        op,
                        left,
                        right,
                        override_flag,
                    },
                    None => Expr::Combine {
                        left,
                        right,
                        expr: parse_scalar(op).map_err(|e| invalid(format!("op `{op}`: {e}")))?,
                        override_flag,
                    },
                }
            }
            ComposeKind::Union | ComposeKind::ViewsetUnion => Expr::Union {
                args: std::iter::once(left).chain(right).collect(),
                override_flag,
            },
            ComposeKind::ViewsetStat => {
                let func = AggFunc::from_str(self.op.as_deref().unwrap_or("avg")).map_err(invalid)?;
                let arg = match right {
                    Some(r) => Expr::Set(vec![left, r]),
                    None => left,
                };
                Expr::Agg {
                    func,
                    arg: Box::new(arg),
                    override_flag,
                }
            }
        })
    }
}

impl Decompose {
    pub fn to_expr(&self) -> ApiResult<Expr> {
        let view = Box::new(Expr::Name(self.view.clone()));
        match self.kind.as_str() {
            "extract" => Ok(Expr::Extract {
                view,
                pred: self
                    .args
                    .predicate
                    .as_deref()
                    .map(parse_predicate)
                    .transpose()
                    .map_err(invalid)?,
            }),
            "explode" => Ok(Expr::Explode {
                view,
                attrs: self.args.attrs.clone().unwrap_or_default(),
            }),
            other => Err(invalid(format!("unknown kind `{other}`; expected extract or explode"))),
        }
    }
}

impl Lift {
    pub fn to_expr(&self) -> Expr {
        Expr::Lift {
            view: Box::new(Expr::Name(self.view.clone())),
            features: self.features.clone(),
            cond: self.cond.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn operand_forms() {
        let r: OperandRef = serde_json::from_value(json!("v1")).unwrap();
        assert_eq!(operand(&r).unwrap(), Expr::Name("v1".into()));
        let r: OperandRef = serde_json::from_value(json!(20)).unwrap();
        assert_eq!(operand(&r).unwrap(), Expr::Const(20.0));
        let r: OperandRef =
            serde_json::from_value(json!({"legend": {"view": "v1", "attr": "carb", "value": 1}})).unwrap();
        assert_eq!(operand(&r).unwrap().to_string(), "legend(v1, carb, 1)");
        let r: OperandRef = serde_json::from_value(json!({"set": ["v1", {"view": "v2"}]})).unwrap();
        assert_eq!(operand(&r).unwrap().to_string(), "{v1, v2}");
        assert!(serde_json::from_value::<OperandRef>(json!({"bogus": 1})).is_err());
    }

    #[test]
    fn dates_and_values() {
        assert_eq!(value(&json!(3)).unwrap(), Value::Integer(3));
        assert_eq!(value(&json!(2.5)).unwrap(), Value::Number(2.5));
        assert!(matches!(value(&json!({"date": "2024-02-29"})).unwrap(), Value::Date(_)));
        assert!(value(&json!({"date": "2023-02-29"})).is_err());
    }

    #[test]
    fn compose_translation() {
        let c: Compose = parse_body(br#"{"left": "v1", "right": "v2", "op": "-"}"#).unwrap();
        assert_eq!(c.to_expr().unwrap().to_string(), "v1 - v2");
        let c: Compose =
            parse_body(br#"{"left": "v1", "right": "v2", "op": "y1 / (y1 + y2)", "override": true}"#).unwrap();
        assert_eq!(
            c.to_expr().unwrap().to_string(),
            "combine(v1, v2, y1 / (y1 + y2), override)"
        );
        let c: Compose = parse_body(br#"{"left": {"set": ["v1", "v2"]}, "kind": "viewset_stat"}"#).unwrap();
        assert_eq!(c.to_expr().unwrap().to_string(), "agg(avg, {v1, v2})");
        let c: Compose = parse_body(br#"{"left": "v1", "kind": "stat"}"#).unwrap();
        assert!(c.to_expr().is_err());
        assert!(parse_body::<Compose>(br#"{"left": "v1", "rigth": "v2"}"#).is_err());
    }
}
