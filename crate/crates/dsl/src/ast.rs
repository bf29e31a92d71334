//! Syntax tree and its printer. Printing is the inverse of parsing: the
//! printed text of any tree parses back to the same tree.

use std::fmt;

use vca_core::expr::{ident, ArithOp, Predicate, ScalarExpr};
use vca_core::{AggFunc, Channel, MarkType, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    Load {
        name: String,
        path: String,
        roles: Vec<(String, String)>,
    },
    DefView {
        name: String,
        def: ViewDef,
    },
    Assign {
        name: String,
        expr: Expr,
    },
    Show {
        name: String,
    },
    EmitSql {
        name: String,
    },
}

/// A statement with the position of its first token.
#[derive(Debug, Clone, PartialEq)]
pub struct Located {
    pub stmt: Statement,
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViewDef {
    pub table: String,
    pub filter: Option<Predicate>,
    pub group: Vec<String>,
    pub func: AggFunc,
    pub attr: String,
    pub mark: Option<MarkType>,
    pub channels: Vec<(String, Channel)>,
    pub title: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Name(String),
    Set(Vec<Expr>),
    Const(f64),
    Binary {
        op: ArithOp,
        left: Box<Expr>,
        right: Box<Expr>,
        override_flag: bool,
    },
    Combine {
        left: Box<Expr>,
        right: Box<Expr>,
        expr: ScalarExpr,
        override_flag: bool,
    },
    Union {
        args: Vec<Expr>,
        override_flag: bool,
    },
    Agg {
        func: AggFunc,
        arg: Box<Expr>,
        override_flag: bool,
    },
    Extract {
        view: Box<Expr>,
        pred: Option<Predicate>,
    },
    Explode {
        view: Box<Expr>,
        attrs: Vec<String>,
    },
    Lift {
        view: Box<Expr>,
        features: Vec<String>,
        cond: Vec<String>,
    },
    Legend {
        view: Box<Expr>,
        attr: String,
        value: Value,
    },
    Marks {
        view: Box<Expr>,
        pred: Predicate,
    },
    MarksOf(Box<Expr>),
    Cell {
        view: Box<Expr>,
        key: Vec<(String, Value)>,
    },
    View(ViewDef),
}

pub(crate) fn precedence(op: ArithOp) -> u8 {
    match op {
        ArithOp::Add | ArithOp::Sub => 1,
        ArithOp::Mul | ArithOp::Div => 2,
    }
}

fn names(xs: &[String]) -> String {
    let v: Vec<String> = xs.iter().map(|x| ident(x).into_owned()).collect();
    format!("[{}]", v.join(", "))
}

fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn list(f: &mut fmt::Formatter<'_>, xs: &[Expr]) -> fmt::Result {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

fn override_arg(flag: bool) -> &'static str {
    if flag {
        ", override"
    } else {
        ""
    }
}

impl fmt::Display for ViewDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "view({}", ident(&self.table))?;
        if let Some(p) = &self.filter {
            write!(f, ", filter: {p}")?;
        }
        write!(f, ", group: {}", names(&self.group))?;
        write!(f, ", agg: {}({})", self.func, ident(&self.attr))?;
        if let Some(m) = self.mark {
            write!(f, ", mark: {}", m.name())?;
        }
        if !self.channels.is_empty() {
            let ch: Vec<String> = self
                .channels
                .iter()
                .map(|(a, c)| format!("{}: {}", ident(a), c.name()))
                .collect();
            write!(f, ", channels: [{}]", ch.join(", "))?;
        }
        if let Some(t) = &self.title {
            write!(f, ", title: {}", quoted(t))?;
        }
        f.write_str(")")
    }
}

impl Expr {
    fn fmt_operand(&self, f: &mut fmt::Formatter<'_>, parent: u8, right: bool) -> fmt::Result {
        match self {
            Expr::Binary { op, .. } if right || precedence(*op) < parent => write!(f, "({self})"),
            _ => write!(f, "{self}"),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Name(n) => f.write_str(&ident(n)),
            Expr::Set(xs) => {
                f.write_str("{")?;
                list(f, xs)?;
                f.write_str("}")
            }
            Expr::Const(x) => write!(f, "const({})", Value::Number(*x).literal()),
            Expr::Binary {
                op,
                left,
                right,
                override_flag,
            } => {
                let p = precedence(*op);
                left.fmt_operand(f, p, false)?;
                write!(f, " {} ", op.symbol())?;
                right.fmt_operand(f, p, true)?;
                if *override_flag {
                    f.write_str(" override")?;
                }
                Ok(())
            }
            Expr::Combine {
                left,
                right,
                expr,
                override_flag,
            } => write!(f, "combine({left}, {right}, {expr}{})", override_arg(*override_flag)),
            Expr::Union { args, override_flag } => {
                f.write_str("union(")?;
                list(f, args)?;
                write!(f, "{})", override_arg(*override_flag))
            }
            Expr::Agg {
                func,
                arg,
                override_flag,
            } => write!(f, "agg({func}, {arg}{})", override_arg(*override_flag)),
            Expr::Extract { view, pred: None } => write!(f, "extract({view})"),
            Expr::Extract { view, pred: Some(p) } => write!(f, "extract({view}, {p})"),
            Expr::Explode { view, attrs } => write!(f, "explode({view}, {})", names(attrs)),
            Expr::Lift { view, features, cond } => {
                write!(f, "lift({view}, {}, {})", names(features), names(cond))
            }
            Expr::Legend { view, attr, value } => {
                write!(f, "legend({view}, {}, {})", ident(attr), value.literal())
            }
            Expr::Marks { view, pred } => write!(f, "marks({view}, {pred})"),
            Expr::MarksOf(v) => write!(f, "marks_of({v})"),
            Expr::Cell { view, key } => {
                write!(f, "cell({view}")?;
                for (a, v) in key {
                    write!(f, ", {} = {}", ident(a), v.literal())?;
                }
                f.write_str(")")
            }
            Expr::View(def) => write!(f, "{def}"),
        }
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Load { name, path, roles } => {
                write!(f, "load {} from {}", ident(name), quoted(path))?;
                if !roles.is_empty() {
                    let r: Vec<String> = roles
                        .iter()
                        .map(|(c, r)| format!("{}: {}", ident(c), ident(r)))
                        .collect();
                    write!(f, " roles {{{}}}", r.join(", "))?;
                }
                Ok(())
            }
            Statement::DefView { name, def } => write!(f, "{} = {def}", ident(name)),
            Statement::Assign { name, expr } => write!(f, "{} = {expr}", ident(name)),
            Statement::Show { name } => write!(f, "show {}", ident(name)),
            Statement::EmitSql { name } => write!(f, "emit_sql {}", ident(name)),
        }
    }
}

/// One statement per line.
pub fn print_script(stmts: &[Statement]) -> String {
    let mut s = String::new();
    for st in stmts {
        s.push_str(&st.to_string());
        s.push('\n');
    }
    s
}
