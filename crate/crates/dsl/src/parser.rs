//! Recursive-descent parser. Statements end at a newline or `;`; newlines
//! inside brackets are ignored.

use std::str::FromStr;

use vca_core::expr::{ArithOp, CompareOp, Predicate, ScalarExpr};
use vca_core::{AggFunc, Channel, MarkType, Value};

use crate::ast::{Expr, Located, Statement, ViewDef};
use crate::error::ParseError;
use crate::lexer::{tokenize, Tok, Token};

const FUNCTIONS: &[&str] = &[
    "view", "const", "union", "agg", "extract", "explode", "lift", "legend", "marks", "marks_of", "cell", "combine",
];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    /// Bracket nesting; newlines are skipped while positive.
    depth: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn skip_newlines_in_brackets(&mut self) {
        if self.depth > 0 {
            while self.toks[self.pos].tok == Tok::Newline {
                self.pos += 1;
            }
        }
    }

    fn peek(&mut self) -> &Tok {
        self.skip_newlines_in_brackets();
        &self.toks[self.pos].tok
    }

    fn peek_at(&mut self, n: usize) -> &Tok {
        self.skip_newlines_in_brackets();
        let mut i = self.pos;
        let mut seen = 0;
        while seen < n {
            i += 1;
            if i >= self.toks.len() {
                return &self.toks[self.toks.len() - 1].tok;
            }
            if !(self.depth > 0 && self.toks[i].tok == Tok::Newline) {
                seen += 1;
            }
        }
        &self.toks[i.min(self.toks.len() - 1)].tok
    }

    fn next(&mut self) -> Token {
        self.skip_newlines_in_brackets();
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        match t.tok {
            Tok::LParen | Tok::LBrace | Tok::LBracket => self.depth += 1,
            Tok::RParen | Tok::RBrace | Tok::RBracket => self.depth = self.depth.saturating_sub(1),
            _ => {}
        }
        t
    }

    fn error(&mut self, expected: &[&str]) -> ParseError {
        self.skip_newlines_in_brackets();
        let t = &self.toks[self.pos];
        ParseError {
            line: t.line,
            column: t.column,
            message: format!("unexpected {}", t.tok.describe()),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn fail<T>(&mut self, message: String) -> PResult<T> {
        let t = &self.toks[self.pos.saturating_sub(1)];
        Err(ParseError {
            line: t.line,
            column: t.column,
            message,
            expected: Vec::new(),
        })
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.error(&[tok.symbol()]))
        }
    }

    fn is_keyword(&mut self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident { name, quoted: false } if name == kw)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<()> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.error(&[kw]))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident { name, .. } => {
                self.next();
                Ok(name)
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn ident_list(&mut self) -> PResult<Vec<String>> {
        self.expect(Tok::LBracket)?;
        let mut out = Vec::new();
        if self.eat(&Tok::RBracket) {
            return Ok(out);
        }
        loop {
            out.push(self.ident()?);
            if self.eat(&Tok::RBracket) {
                return Ok(out);
            }
            if !self.eat(&Tok::Comma) {
                return Err(self.error(&[",", "]"]));
            }
        }
    }

    fn number(&mut self) -> PResult<f64> {
        let neg = self.eat(&Tok::Minus);
        let x = match self.peek().clone() {
            Tok::Int(i) => i as f64,
            Tok::Float(x) => x,
            _ => return Err(self.error(&["number"])),
        };
        self.next();
        Ok(if neg { -x } else { x })
    }

    /// A literal value: number, `'text'`, `d'date'`, `true`, `false`, `null`.
    fn literal(&mut self) -> PResult<Value> {
        let neg = self.eat(&Tok::Minus);
        let v = match self.peek().clone() {
            Tok::Int(i) => Value::Integer(if neg { -i } else { i }),
            Tok::Float(x) => Value::Number(if neg { -x } else { x }),
            _ if neg => return Err(self.error(&["number"])),
            Tok::Text(s) => Value::Text(s),
            Tok::Date(d) => Value::Date(d),
            Tok::Ident { name, quoted: false } if name == "true" => Value::Boolean(true),
            Tok::Ident { name, quoted: false } if name == "false" => Value::Boolean(false),
            Tok::Ident { name, quoted: false } if name == "null" => Value::Null,
            _ => return Err(self.error(&["literal"])),
        };
        self.next();
        Ok(v)
    }

    // ---- statements

    fn script(&mut self) -> PResult<Vec<Located>> {
        let mut out = Vec::new();
        loop {
            while matches!(self.peek(), Tok::Newline | Tok::Semi) {
                self.next();
            }
            if *self.peek() == Tok::Eof {
                return Ok(out);
            }
            out.push(self.statement()?);
            match self.peek() {
                Tok::Newline | Tok::Semi | Tok::Eof => {}
                _ => return Err(self.error(&["end of line", ";"])),
            }
        }
    }

    fn statement(&mut self) -> PResult<Located> {
        let (line, column) = {
            let t = &self.toks[self.pos];
            (t.line, t.column)
        };
        let assign_ahead = *self.peek_at(1) == Tok::Assign;
        let stmt = if !assign_ahead && self.eat_keyword("load") {
            let name = self.ident()?;
            self.expect_keyword("from")?;
            let path = match self.next().tok {
                Tok::Str(s) => s,
                _ => {
                    self.pos -= 1;
                    return Err(self.error(&["\"path\""]));
                }
            };
            let mut roles = Vec::new();
            if self.eat_keyword("roles") {
                self.expect(Tok::LBrace)?;
                loop {
                    let col = self.ident()?;
                    self.expect(Tok::Colon)?;
                    let role = self.ident()?;
                    roles.push((col, role));
                    if self.eat(&Tok::RBrace) {
                        break;
                    }
                    if !self.eat(&Tok::Comma) {
                        return Err(self.error(&[",", "}"]));
                    }
                }
            }
            Statement::Load { name, path, roles }
        } else if !assign_ahead && self.eat_keyword("show") {
            Statement::Show { name: self.ident()? }
        } else if !assign_ahead && self.eat_keyword("emit_sql") {
            Statement::EmitSql { name: self.ident()? }
        } else {
            let name = match self.peek().clone() {
                Tok::Ident { name, .. } => {
                    self.next();
                    name
                }
                _ => return Err(self.error(&["load", "show", "emit_sql", "identifier"])),
            };
            self.expect(Tok::Assign)?;
            match self.expr()? {
                Expr::View(def) => Statement::DefView { name, def },
                expr => Statement::Assign { name, expr },
            }
        };
        Ok(Located { stmt, line, column })
    }

    // ---- view expressions

    fn binary_op(&mut self, ops: &[(Tok, ArithOp)]) -> Option<ArithOp> {
        let t = self.peek().clone();
        ops.iter().find(|(k, _)| *k == t).map(|(_, op)| {
            self.next();
            *op
        })
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.binary(&[(Tok::Plus, ArithOp::Add), (Tok::Minus, ArithOp::Sub)], Self::product)
    }

    fn product(&mut self) -> PResult<Expr> {
        self.binary(&[(Tok::Star, ArithOp::Mul), (Tok::Slash, ArithOp::Div)], Self::term)
    }

    fn binary(&mut self, ops: &[(Tok, ArithOp)], sub: fn(&mut Self) -> PResult<Expr>) -> PResult<Expr> {
        let mut left = sub(self)?;
        while let Some(op) = self.binary_op(ops) {
            let right = sub(self)?;
            let override_flag = self.eat_keyword("override");
            left = Expr::Binary {
                op,
                left: Box::new(left),
                right: Box::new(right),
                override_flag,
            };
        }
        Ok(left)
    }

    /// Trailing `, override` inside an argument list.
    fn override_arg(&mut self) -> PResult<bool> {
        if *self.peek() == Tok::Comma
            && matches!(self.peek_at(1), Tok::Ident { name, quoted: false } if name == "override")
        {
            self.next();
            self.next();
            return Ok(true);
        }
        Ok(false)
    }

    fn term(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::LParen => {
                self.next();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::LBrace => {
                self.next();
                let mut xs = Vec::new();
                if !self.eat(&Tok::RBrace) {
                    loop {
                        xs.push(self.expr()?);
                        if self.eat(&Tok::RBrace) {
                            break;
                        }
                        if !self.eat(&Tok::Comma) {
                            return Err(self.error(&[",", "}"]));
                        }
                    }
                }
                Ok(Expr::Set(xs))
            }
            Tok::Int(_) | Tok::Float(_) | Tok::Minus => Ok(Expr::Const(self.number()?)),
            Tok::Ident { name, quoted } => {
                let call = !quoted && FUNCTIONS.contains(&name.as_str()) && *self.peek_at(1) == Tok::LParen;
                self.next();
                if call {
                    self.expect(Tok::LParen)?;
                    let e = self.call(&name)?;
                    self.expect(Tok::RParen)?;
                    Ok(e)
                } else {
                    Ok(Expr::Name(name))
                }
            }
            _ => Err(self.error(&["identifier", "(", "{", "number"])),
        }
    }

    fn call(&mut self, name: &str) -> PResult<Expr> {
        Ok(match name {
            "view" => Expr::View(self.view_def()?),
            "const" => Expr::Const(self.number()?),
            "union" => {
                let mut args = vec![self.expr()?];
                let mut override_flag = false;
                while *self.peek() == Tok::Comma {
                    if self.override_arg()? {
                        override_flag = true;
                        break;
                    }
                    self.next();
                    args.push(self.expr()?);
                }
                Expr::Union { args, override_flag }
            }
            "agg" => {
                let f = self.ident()?;
                let func = AggFunc::from_str(&f).or_else(|e| self.fail(e.to_string()))?;
                self.expect(Tok::Comma)?;
                let arg = Box::new(self.expr()?);
                let override_flag = self.override_arg()?;
                Expr::Agg {
                    func,
                    arg,
                    override_flag,
                }
            }
            "combine" => {
                let left = Box::new(self.expr()?);
                self.expect(Tok::Comma)?;
                let right = Box::new(self.expr()?);
                self.expect(Tok::Comma)?;
                let expr = self.scalar()?;
                let override_flag = self.override_arg()?;
                Expr::Combine {
                    left,
                    right,
                    expr,
                    override_flag,
                }
            }
            "extract" => {
                let view = Box::new(self.expr()?);
                let pred = if self.eat(&Tok::Comma) {
                    Some(self.predicate()?)
                } else {
                    None
                };
                Expr::Extract { view, pred }
            }
            "explode" => {
                let view = Box::new(self.expr()?);
                self.expect(Tok::Comma)?;
                Expr::Explode {
                    view,
                    attrs: self.ident_list()?,
                }
            }
            "lift" => {
                let view = Box::new(self.expr()?);
                self.expect(Tok::Comma)?;
                let features = self.ident_list()?;
                let cond = if self.eat(&Tok::Comma) {
                    self.ident_list()?
                } else {
                    Vec::new()
                };
                Expr::Lift { view, features, cond }
            }
            "legend" => {
                let view = Box::new(self.expr()?);
                self.expect(Tok::Comma)?;
                let attr = self.ident()?;
                self.expect(Tok::Comma)?;
                Expr::Legend {
                    view,
                    attr,
                    value: self.literal()?,
                }
            }
            "marks" => {
                let view = Box::new(self.expr()?);
                self.expect(Tok::Comma)?;
                Expr::Marks {
                    view,
                    pred: self.predicate()?,
                }
            }
            "marks_of" => Expr::MarksOf(Box::new(self.expr()?)),
            "cell" => {
                let view = Box::new(self.expr()?);
                let mut key = Vec::new();
                while self.eat(&Tok::Comma) {
                    let a = self.ident()?;
                    self.expect(Tok::Assign)?;
                    key.push((a, self.literal()?));
                }
                Expr::Cell { view, key }
            }
            _ => unreachable!("not a function: {name}"),
        })
    }

    fn view_def(&mut self) -> PResult<ViewDef> {
        let table = self.ident()?;
        let mut def = ViewDef {
            table,
            filter: None,
            group: Vec::new(),
            func: AggFunc::Count,
            attr: String::new(),
            mark: None,
            channels: Vec::new(),
            title: None,
        };
        let (mut has_group, mut has_agg) = (false, false);
        let mut seen: Vec<String> = Vec::new();
        while self.eat(&Tok::Comma) {
            let key = self.ident()?;
            if seen.contains(&key) {
                return self.fail(format!("argument `{key}` given twice"));
            }
            seen.push(key.clone());
            self.expect(Tok::Colon)?;
            match key.as_str() {
                "filter" => def.filter = Some(self.predicate()?),
                "group" => {
                    def.group = self.ident_list()?;
                    has_group = true;
                }
                "agg" => {
                    let f = self.ident()?;
                    def.func = AggFunc::from_str(&f).or_else(|e| self.fail(e.to_string()))?;
                    self.expect(Tok::LParen)?;
                    def.attr = self.ident()?;
                    self.expect(Tok::RParen)?;
                    has_agg = true;
                }
                "mark" => {
                    let m = self.ident()?;
                    def.mark = Some(MarkType::parse(&m).or_else(|e| self.fail(e.to_string()))?);
                }
                "channels" => {
                    self.expect(Tok::LBracket)?;
                    if !self.eat(&Tok::RBracket) {
                        loop {
                            let a = self.ident()?;
                            self.expect(Tok::Colon)?;
                            let c = self.ident()?;
                            let ch = Channel::parse(&c).or_else(|e| self.fail(e.to_string()))?;
                            def.channels.push((a, ch));
                            if self.eat(&Tok::RBracket) {
                                break;
                            }
                            if !self.eat(&Tok::Comma) {
                                return Err(self.error(&[",", "]"]));
                            }
                        }
                    }
                }
                "title" => match self.next().tok {
                    Tok::Str(s) => def.title = Some(s),
                    _ => {
                        self.pos -= 1;
                        return Err(self.error(&["\"title\""]));
                    }
                },
                other => {
                    return self.fail(format!(
                        "unknown view argument `{other}` (expected filter, group, agg, mark, channels or title)"
                    ))
                }
            }
        }
        if !has_group {
            return Err(self.error(&["group:"]));
        }
        if !has_agg {
            return Err(self.error(&["agg:"]));
        }
        Ok(def)
    }

    // ---- predicates and scalar expressions

    fn predicate(&mut self) -> PResult<Predicate> {
        let mut p = self.conjunction()?;
        while self.eat_keyword("or") {
            p = Predicate::Or(Box::new(p), Box::new(self.conjunction()?));
        }
        Ok(p)
    }

    fn conjunction(&mut self) -> PResult<Predicate> {
        let mut p = self.negation()?;
        while self.eat_keyword("and") {
            p = Predicate::And(Box::new(p), Box::new(self.negation()?));
        }
        Ok(p)
    }

    fn negation(&mut self) -> PResult<Predicate> {
        if self.eat_keyword("not") {
            return Ok(Predicate::Not(Box::new(self.negation()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Predicate> {
        let (save_pos, save_depth) = (self.pos, self.depth);
        let err = match self.comparison() {
            Ok(p) => return Ok(p),
            Err(e) => e,
        };
        // Not a comparison: backtrack and try the remaining atom forms.
        self.pos = save_pos;
        self.depth = save_depth;
        if self.eat_keyword("true") {
            return Ok(Predicate::Const(true));
        }
        if self.eat_keyword("false") {
            return Ok(Predicate::Const(false));
        }
        if *self.peek() == Tok::LParen {
            self.next();
            let p = self.predicate()?;
            self.expect(Tok::RParen)?;
            return Ok(p);
        }
        Err(err)
    }

    fn comparison(&mut self) -> PResult<Predicate> {
        let left = self.scalar()?;
        let op = match self.peek() {
            Tok::Assign => Some(CompareOp::Eq),
            Tok::Ne => Some(CompareOp::Ne),
            Tok::Lt => Some(CompareOp::Lt),
            Tok::Le => Some(CompareOp::Le),
            Tok::Gt => Some(CompareOp::Gt),
            Tok::Ge => Some(CompareOp::Ge),
            _ => None,
        };
        if let Some(op) = op {
            self.next();
            let right = self.scalar()?;
            return Ok(Predicate::Compare { left, op, right });
        }
        if self.eat_keyword("in") {
            if self.eat(&Tok::LBrace) {
                let mut values = Vec::new();
                if !self.eat(&Tok::RBrace) {
                    loop {
                        values.push(self.literal()?);
                        if self.eat(&Tok::RBrace) {
                            break;
                        }
                        if !self.eat(&Tok::Comma) {
                            return Err(self.error(&[",", "}"]));
                        }
                    }
                }
                return Ok(Predicate::InSet { expr: left, values });
            }
            self.expect(Tok::LBracket)?;
            let low = self.literal()?;
            self.expect(Tok::Comma)?;
            let high = self.literal()?;
            self.expect(Tok::RBracket)?;
            return Ok(Predicate::InRange { expr: left, low, high });
        }
        if self.eat_keyword("is") {
            self.expect_keyword("null")?;
            return Ok(Predicate::IsNull(left));
        }
        Err(self.error(&["=", "!=", "<", "<=", ">", ">=", "in", "is"]))
    }

    pub(crate) fn scalar(&mut self) -> PResult<ScalarExpr> {
        let mut left = self.scalar_term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(left),
            };
            self.next();
            left = ScalarExpr::arith(op, left, self.scalar_term()?);
        }
    }

    fn scalar_term(&mut self) -> PResult<ScalarExpr> {
        let mut left = self.scalar_factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => ArithOp::Mul,
                Tok::Slash => ArithOp::Div,
                _ => return Ok(left),
            };
            self.next();
            left = ScalarExpr::arith(op, left, self.scalar_factor()?);
        }
    }

    fn scalar_factor(&mut self) -> PResult<ScalarExpr> {
        match self.peek().clone() {
            Tok::LParen => {
                self.next();
                let e = self.scalar()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident { name, quoted } => {
                if !quoted && matches!(name.as_str(), "true" | "false" | "null") {
                    return Ok(ScalarExpr::Literal(self.literal()?));
                }
                if !quoted && matches!(name.as_str(), "and" | "or" | "not" | "in" | "is") {
                    return Err(self.error(&["identifier", "literal", "("]));
                }
                self.next();
                Ok(ScalarExpr::Column(name))
            }
            _ => Ok(ScalarExpr::Literal(self.literal()?)),
        }
    }
}

fn parser(src: &str) -> PResult<Parser> {
    Ok(Parser {
        toks: tokenize(src)?,
        pos: 0,
        depth: 0,
    })
}

/// Parses a whole script.
pub fn parse(src: &str) -> PResult<Vec<Located>> {
    parser(src)?.script()
}

/// Parses a standalone predicate such as a brush selection.
pub fn parse_predicate(src: &str) -> PResult<Predicate> {
    let mut p = parser(src)?;
    let pred = p.predicate()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(&["end of input"]));
    }
    Ok(pred)
}

/// Parses a standalone view expression.
pub fn parse_expr(src: &str) -> PResult<Expr> {
    let mut p = parser(src)?;
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(&["end of input"]));
    }
    Ok(e)
}

/// Parses a combining expression over `y1` and `y2`.
pub fn parse_scalar(src: &str) -> PResult<ScalarExpr> {
    let mut p = parser(src)?;
    let e = p.scalar()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(&["end of input"]));
    }
    Ok(e)
}
