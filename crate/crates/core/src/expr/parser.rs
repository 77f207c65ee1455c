use std::fmt;

use super::{BinOp, Expr, Func};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedToken(String),
    UnexpectedEnd,
    UnbalancedParen,
    UnknownIdentifier(String),
    InvalidNumber(String),
    NonConstantExponent,
    Arity(String),
}

/// Parse failure with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: ", self.line, self.column)?;
        match &self.kind {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character '{}'", c),
            ParseErrorKind::UnexpectedToken(t) => write!(f, "unexpected '{}'", t),
            ParseErrorKind::UnexpectedEnd => write!(f, "unexpected end of input"),
            ParseErrorKind::UnbalancedParen => write!(f, "unbalanced parenthesis"),
            ParseErrorKind::UnknownIdentifier(s) => write!(f, "unknown identifier '{}'", s),
            ParseErrorKind::InvalidNumber(s) => write!(f, "invalid number '{}'", s),
            ParseErrorKind::NonConstantExponent => write!(f, "exponent must be a constant expression"),
            ParseErrorKind::Arity(name) => write!(f, "function '{}' takes exactly one argument", name),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(x) => x.to_string(),
            Tok::Ident(s) => s.clone(),
            Tok::Op(c) => c.to_string(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::Comma => ",".into(),
            Tok::End => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut i = 0;
    let err = |kind, pos: Pos| ParseError { kind, line: pos.line, column: pos.column };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_digit() || c == '.' {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse::<f64>().map_err(|_| err(ParseErrorKind::InvalidNumber(text.clone()), pos))?;
            Tok::Num(v)
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else {
            i += 1;
            match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                _ => return Err(err(ParseErrorKind::UnexpectedChar(c), pos)),
            }
        };
        col += i - start;
        out.push((tok, pos));
    }
    out.push((Tok::End, Pos { line, column: col }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    /// Positions of currently open parentheses.
    open: Vec<Pos>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        let p = self.pos();
        ParseError { kind, line: p.line, column: p.column }
    }

    fn unexpected(&self) -> ParseError {
        match self.peek() {
            Tok::End if !self.open.is_empty() => self.error(ParseErrorKind::UnbalancedParen),
            Tok::End => self.error(ParseErrorKind::UnexpectedEnd),
            Tok::RParen if self.open.is_empty() => self.error(ParseErrorKind::UnbalancedParen),
            t => self.error(ParseErrorKind::UnexpectedToken(t.describe())),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let pos = self.pos();
        let exponent = self.unary()?;
        if exponent.max_var() != 0 {
            return Err(ParseError { kind: ParseErrorKind::NonConstantExponent, line: pos.line, column: pos.column });
        }
        Ok(Expr::binary(BinOp::Pow, base, exponent))
    }

    fn close(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::RParen => {
                self.bump();
                self.open.pop();
                Ok(())
            }
            _ => Err(self.unexpected()),
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Const(v))
            }
            Tok::LParen => {
                self.bump();
                self.open.push(pos);
                let e = self.expr()?;
                self.close()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if name == "pi" {
                    return Ok(Expr::Pi);
                }
                if let Some(f) = Func::from_name(&name) {
                    if *self.peek() != Tok::LParen {
                        return Err(self.unexpected());
                    }
                    self.open.push(self.pos());
                    self.bump();
                    let arg = self.expr()?;
                    if *self.peek() == Tok::Comma {
                        return Err(ParseError {
                            kind: ParseErrorKind::Arity(name),
                            line: pos.line,
                            column: pos.column,
                        });
                    }
                    self.close()?;
                    return Ok(Expr::call(f, arg));
                }
                if let Some(k) = name.strip_prefix('u').and_then(|d| d.parse::<usize>().ok()) {
                    if k >= 1 && !name[1..].starts_with('0') {
                        return Ok(Expr::Var(k));
                    }
                }
                Err(ParseError { kind: ParseErrorKind::UnknownIdentifier(name), line: pos.line, column: pos.column })
            }
            _ => Err(self.unexpected()),
        }
    }
}

/// Parses an expression in `u1, u2, ...`, `pi`, the operators `+ - * / ^`
/// and the functions `sin cos sinh cosh exp log sqrt`.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, at: 0, open: Vec::new() };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected());
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kind(s: &str) -> (ParseErrorKind, usize) {
        let e = parse(s).unwrap_err();
        (e.kind, e.column)
    }

    #[test]
    fn unbalanced_paren_position() {
        let e = parse("sin(u1").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnbalancedParen);
        assert_eq!((e.line, e.column), (1, 7));
        assert_eq!(kind("u1)").0, ParseErrorKind::UnbalancedParen);
        assert_eq!(kind("((u1)").0, ParseErrorKind::UnbalancedParen);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(kind("u1^u2"), (ParseErrorKind::NonConstantExponent, 4));
        assert_eq!(kind("u0"), (ParseErrorKind::UnknownIdentifier("u0".into()), 1));
        assert_eq!(kind("2 * foo"), (ParseErrorKind::UnknownIdentifier("foo".into()), 5));
        assert_eq!(kind("sin(u1, u2)"), (ParseErrorKind::Arity("sin".into()), 1));
        assert_eq!(kind("1 + # 2"), (ParseErrorKind::UnexpectedChar('#'), 5));
        assert_eq!(kind("1 +").0, ParseErrorKind::UnexpectedEnd);
        assert_eq!(kind("1 2").0, ParseErrorKind::UnexpectedToken("2".into()));
        assert_eq!(kind("1..2").0, ParseErrorKind::InvalidNumber("1..2".into()));
        assert_eq!(kind("sin u1").0, ParseErrorKind::UnexpectedToken("u1".into()));
    }

    #[test]
    fn reports_line_numbers() {
        let e = parse("u1 +\n  $").unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
    }

    #[test]
    fn accepts_constant_exponents() {
        assert!(parse("u1^(1/2)").is_ok());
        assert!(parse("u1^-pi").is_ok());
        assert!(parse("2.5e-3 + 1E2 + .5").is_ok());
    }
}
