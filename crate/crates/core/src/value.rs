//! Scalar values and their kinds.
//!
//! `Value` carries a total order so it can key `BTreeMap`s for grouping and
//! joining. Integers and floats compare numerically across variants; values of
//! different kinds order by kind rank (null < boolean < numeric < date < text).

use std::cmp::Ordering;
use std::fmt;

use chrono::NaiveDate;
use serde::{Serialize, Serializer};

#[derive(Debug, Clone)]
pub enum Value {
    Null,
    Number(f64),
    Integer(i64),
    Text(String),
    Boolean(bool),
    Date(NaiveDate),
}

/// The inferred kind of an attribute's values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Numeric,
    Categorical,
    Temporal,
    Boolean,
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueKind::Numeric => "numeric",
            ValueKind::Categorical => "categorical",
            ValueKind::Temporal => "temporal",
            ValueKind::Boolean => "boolean",
        })
    }
}

fn epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid epoch")
}

/// Days since 1970-01-01.
pub fn epoch_days(date: NaiveDate) -> i64 {
    (date - epoch()).num_days()
}

impl Value {
    pub fn text(s: impl Into<String>) -> Self {
        Value::Text(s.into())
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    /// Kind of a non-null value; `None` for `Null`.
    pub fn kind(&self) -> Option<ValueKind> {
        match self {
            Value::Null => None,
            Value::Number(_) | Value::Integer(_) => Some(ValueKind::Numeric),
            Value::Text(_) => Some(ValueKind::Categorical),
            Value::Boolean(_) => Some(ValueKind::Boolean),
            Value::Date(_) => Some(ValueKind::Temporal),
        }
    }

    /// Numeric view of the value. Dates map to epoch days.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Number(x) => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            Value::Date(d) => Some(epoch_days(*d) as f64),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Null => 0,
            Value::Boolean(_) => 1,
            Value::Number(_) | Value::Integer(_) => 2,
            Value::Date(_) => 3,
            Value::Text(_) => 4,
        }
    }

    /// Literal syntax shared by the DSL and predicate display.
    pub fn literal(&self) -> String {
        match self {
            Value::Null => "null".to_string(),
            Value::Number(x) => format_number(*x),
            Value::Integer(i) => i.to_string(),
            Value::Text(s) => format!("'{}'", s.replace('\'', "''")),
            Value::Boolean(b) => b.to_string(),
            Value::Date(d) => format!("d'{}'", d.format("%Y-%m-%d")),
        }
    }
}

/// Shortest round-trip float text that always reads back as a float.
pub fn format_number(x: f64) -> String {
    let s = format!("{x}");
    if s.contains(['.', 'e', 'E']) || !x.is_finite() {
        s
    } else {
        format!("{s}.0")
    }
}

fn num_cmp(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).unwrap_or_else(|| a.total_cmp(&b))
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        use Value::*;
        match (self, other) {
            (Null, Null) => Ordering::Equal,
            (Boolean(a), Boolean(b)) => a.cmp(b),
            (Integer(a), Integer(b)) => a.cmp(b),
            (Integer(a), Number(b)) => num_cmp(*a as f64, *b),
            (Number(a), Integer(b)) => num_cmp(*a, *b as f64),
            (Number(a), Number(b)) => num_cmp(*a, *b),
            (Date(a), Date(b)) => a.cmp(b),
            (Text(a), Text(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => f.write_str("null"),
            Value::Number(x) => write!(f, "{x}"),
            Value::Integer(i) => write!(f, "{i}"),
            Value::Text(s) => f.write_str(s),
            Value::Boolean(b) => write!(f, "{b}"),
            Value::Date(d) => write!(f, "{}", d.format("%Y-%m-%d")),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Null => s.serialize_none(),
            Value::Number(x) if x.is_finite() => s.serialize_f64(*x),
            Value::Number(_) => s.serialize_none(),
            Value::Integer(i) => s.serialize_i64(*i),
            Value::Text(t) => s.serialize_str(t),
            Value::Boolean(b) => s.serialize_bool(*b),
            Value::Date(d) => s.collect_str(&d.format("%Y-%m-%d")),
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Number(x)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Integer(i)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Boolean(b)
    }
}

impl From<NaiveDate> for Value {
    fn from(d: NaiveDate) -> Self {
        Value::Date(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integers_and_numbers_compare_numerically() {
        assert_eq!(Value::Integer(3), Value::Number(3.0));
        assert!(Value::Integer(2) < Value::Number(2.5));
        assert!(Value::Number(-1.0) < Value::Integer(0));
    }

    #[test]
    fn dates_order_by_calendar() {
        let a = Value::Date(NaiveDate::from_ymd_opt(2021, 2, 1).unwrap());
        let b = Value::Date(NaiveDate::from_ymd_opt(2021, 10, 1).unwrap());
        assert!(a < b);
        assert_eq!(b.as_f64(), Some(18901.0));
    }

    #[test]
    fn literal_keeps_float_marker() {
        assert_eq!(Value::Number(10.0).literal(), "10.0");
        assert_eq!(Value::Number(-3.5).literal(), "-3.5");
        assert_eq!(Value::text("O'Hare").literal(), "'O''Hare'");
    }

    #[test]
    fn null_sorts_first() {
        let mut v = [Value::text("a"), Value::Integer(1), Value::Null];
        v.sort();
        assert_eq!(v[0], Value::Null);
    }
}
