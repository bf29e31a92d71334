//! Tokenizer. Newlines are significant as statement separators; `#` starts a
//! comment that runs to the end of the line.

use chrono::NaiveDate;

use crate::error::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    /// `quoted` is set for backtick identifiers, which never act as keywords.
    Ident {
        name: String,
        quoted: bool,
    },
    /// `"..."`: paths and titles.
    Str(String),
    /// `'...'`: text values.
    Text(String),
    Date(NaiveDate),
    Int(i64),
    Float(f64),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Semi,
    Newline,
    Assign,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident { name, .. } => format!("`{name}`"),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::Text(s) => format!("'{s}'"),
            Tok::Date(d) => format!("d'{d}'"),
            Tok::Int(i) => i.to_string(),
            Tok::Float(x) => x.to_string(),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::Semi => ";",
            Tok::Assign => "=",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            _ => "",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    line: usize,
    column: usize,
}

impl Lexer<'_> {
    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn err(&self, line: usize, column: usize, msg: impl Into<String>) -> ParseError {
        ParseError {
            line,
            column,
            message: msg.into(),
            expected: Vec::new(),
        }
    }

    /// Reads up to the closing `quote`; a doubled quote is an escaped one.
    fn quoted(&mut self, quote: char, line: usize, column: usize) -> Result<String, ParseError> {
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(self.err(line, column, format!("unterminated {quote}-quoted literal"))),
                Some(c) if c == quote => {
                    if self.peek() == Some(quote) {
                        self.bump();
                        s.push(quote);
                    } else {
                        return Ok(s);
                    }
                }
                Some(c) => s.push(c),
            }
        }
    }
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut lx = Lexer {
        chars: src.char_indices().peekable(),
        line: 1,
        column: 1,
    };
    let mut out = Vec::new();
    loop {
        let (line, column) = (lx.line, lx.column);
        let Some(c) = lx.peek() else {
            out.push(Token {
                tok: Tok::Eof,
                line,
                column,
            });
            return Ok(out);
        };
        let tok = match c {
            ' ' | '\t' | '\r' => {
                lx.bump();
                continue;
            }
            '#' => {
                while lx.peek().is_some_and(|c| c != '\n') {
                    lx.bump();
                }
                continue;
            }
            '\n' => {
                lx.bump();
                Tok::Newline
            }
            '"' => {
                lx.bump();
                Tok::Str(lx.quoted('"', line, column)?)
            }
            '\'' => {
                lx.bump();
                Tok::Text(lx.quoted('\'', line, column)?)
            }
            '`' => {
                lx.bump();
                Tok::Ident {
                    name: lx.quoted('`', line, column)?,
                    quoted: true,
                }
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(c) = lx.peek() {
                    let exp_sign = (c == '+' || c == '-') && s.ends_with(['e', 'E']);
                    if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || exp_sign {
                        s.push(c);
                        lx.bump();
                    } else {
                        break;
                    }
                }
                if s.contains(['.', 'e', 'E']) {
                    Tok::Float(
                        s.parse()
                            .map_err(|_| lx.err(line, column, format!("bad number `{s}`")))?,
                    )
                } else {
                    match s.parse::<i64>() {
                        Ok(i) => Tok::Int(i),
                        Err(_) => Tok::Float(
                            s.parse()
                                .map_err(|_| lx.err(line, column, format!("bad number `{s}`")))?,
                        ),
                    }
                }
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(c) = lx.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        s.push(c);
                        lx.bump();
                    } else {
                        break;
                    }
                }
                if s == "d" && lx.peek() == Some('\'') {
                    lx.bump();
                    let text = lx.quoted('\'', line, column)?;
                    let d = NaiveDate::parse_from_str(&text, "%Y-%m-%d")
                        .map_err(|_| lx.err(line, column, format!("bad date literal `{text}`")))?;
                    Tok::Date(d)
                } else {
                    Tok::Ident { name: s, quoted: false }
                }
            }
            _ => {
                lx.bump();
                let next = lx.peek();
                match (c, next) {
                    ('!', Some('=')) => {
                        lx.bump();
                        Tok::Ne
                    }
                    ('<', Some('=')) => {
                        lx.bump();
                        Tok::Le
                    }
                    ('>', Some('=')) => {
                        lx.bump();
                        Tok::Ge
                    }
                    ('<', Some('>')) => {
                        lx.bump();
                        Tok::Ne
                    }
                    ('(', _) => Tok::LParen,
                    (')', _) => Tok::RParen,
                    ('{', _) => Tok::LBrace,
                    ('}', _) => Tok::RBrace,
                    ('[', _) => Tok::LBracket,
                    (']', _) => Tok::RBracket,
                    (',', _) => Tok::Comma,
                    (':', _) => Tok::Colon,
                    (';', _) => Tok::Semi,
                    ('=', _) => Tok::Assign,
                    ('<', _) => Tok::Lt,
                    ('>', _) => Tok::Gt,
                    ('+', _) => Tok::Plus,
                    ('-', _) => Tok::Minus,
                    ('*', _) => Tok::Star,
                    ('/', _) => Tok::Slash,
                    _ => return Err(lx.err(line, column, format!("unexpected character `{c}`"))),
                }
            }
        };
        out.push(Token { tok, line, column });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn literals() {
        assert_eq!(
            toks("'O''Hare' d'2020-01-02' 3 2.5 1e3 `a b`"),
            vec![
                Tok::Text("O'Hare".into()),
                Tok::Date(NaiveDate::from_ymd_opt(2020, 1, 2).unwrap()),
                Tok::Int(3),
                Tok::Float(2.5),
                Tok::Float(1000.0),
                Tok::Ident {
                    name: "a b".into(),
                    quoted: true
                },
                Tok::Eof
            ]
        );
    }

    #[test]
    fn positions_and_comments() {
        let t = tokenize("a = b # note\n  c").unwrap();
        assert_eq!((t[4].line, t[4].column), (2, 3));
        assert_eq!(t[3].tok, Tok::Newline);
    }

    #[test]
    fn unterminated_text() {
        let e = tokenize("x = 'abc").unwrap_err();
        assert_eq!((e.line, e.column), (1, 5));
    }
}
