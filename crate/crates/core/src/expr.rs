//! A small arithmetic language over the single radial variable `r`.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?          // right-associative
//! atom    := number | 'r' | func '(' expr ')' | '(' expr ')'
//! func    := exp | log | sqrt | abs
//! ```
//!
//! `^` binds tighter than unary minus, so `-r^2` is `-(r^2)`, while the
//! exponent itself may carry a sign: `2^-1 = 0.5`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { pos: usize, name: String },
}

impl ParseError {
    /// Character offset of the failure, when it has one.
    pub fn position(&self) -> Option<usize> {
        match self {
            ParseError::Empty => None,
            ParseError::Syntax { pos, .. } | ParseError::UnknownIdentifier { pos, .. } => Some(*pos),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("`{func}` is undefined at argument {arg} (r = {r})")]
pub struct DomainError {
    pub func: &'static str,
    pub arg: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        match name {
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "sqrt" => Some(Func::Sqrt),
            "abs" => Some(Func::Abs),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(source: &str) -> Result<Expr, ParseError> {
        let tokens = lex(source)?;
        if tokens.len() == 1 {
            return Err(ParseError::Empty);
        }
        let mut parser = Parser { tokens, at: 0 };
        let expr = parser.expr()?;
        match parser.peek() {
            Tok::End => Ok(expr),
            _ => Err(parser.unexpected("end of input")),
        }
    }

    /// Evaluates at radius `r`. Results that leave the reals (log of a
    /// nonpositive number, sqrt of a negative one) are reported as domain
    /// errors; overflow to infinity is left to the caller.
    pub fn eval(&self, r: f64) -> Result<f64, DomainError> {
        Ok(match self {
            Expr::Num(x) => *x,
            Expr::Var => r,
            Expr::Neg(e) => -e.eval(r)?,
            Expr::Bin(op, lhs, rhs) => {
                let (x, y) = (lhs.eval(r)?, rhs.eval(r)?);
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x / y,
                    BinOp::Pow => {
                        let z = x.powf(y);
                        if z.is_nan() && !x.is_nan() && !y.is_nan() {
                            return Err(DomainError { func: "^", arg: x, r });
                        }
                        z
                    }
                }
            }
            Expr::Call(f, arg) => {
                let x = arg.eval(r)?;
                match f {
                    Func::Exp => x.exp(),
                    Func::Abs => x.abs(),
                    Func::Log if x > 0.0 => x.ln(),
                    Func::Sqrt if x >= 0.0 => x.sqrt(),
                    Func::Log | Func::Sqrt => {
                        return Err(DomainError { func: f.name(), arg: x, r });
                    }
                }
            }
        })
    }
}

/// Fully parenthesized rendering; re-parsing it reproduces the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => {
                if x.is_sign_negative() {
                    write!(f, "(-{})", -x)
                } else {
                    write!(f, "{x}")
                }
            }
            Expr::Var => f.write_str("r"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, lhs, rhs) => write!(f, "({lhs}{}{rhs})", op.symbol()),
            Expr::Call(func, arg) => write!(f, "{}({arg})", func.name()),
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
    End,
}

fn lex(source: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = source.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent part, only if followed by a digit (optionally signed)
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
            let value = text
                .parse::<f64>()
                .map_err(|_| ParseError::Syntax { pos: start, msg: format!("malformed number `{text}`") })?;
            out.push((Tok::Num(value), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), start));
        } else {
            let tok = match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => return Err(ParseError::Syntax { pos: start, msg: format!("unexpected character `{c}`") }),
            };
            out.push((tok, start));
            i += 1;
        }
    }
    out.push((Tok::End, chars.len()));
    Ok(out)
}

struct Parser {
    tokens: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].0
    }

    fn pos(&self) -> usize {
        self.tokens[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let tok = self.tokens[self.at].0.clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        tok
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        let found = match self.peek() {
            Tok::Num(x) => format!("number {x}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        };
        ParseError::Syntax { pos: self.pos(), msg: format!("expected {wanted}, found {found}") }
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
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
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
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let Tok::Op('-') = self.peek() {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let Tok::Op('^') = self.peek() {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(x) => {
                self.bump();
                Ok(Expr::Num(x))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                if name == "r" {
                    return Ok(Expr::Var);
                }
                let func = Func::from_name(&name).ok_or(ParseError::UnknownIdentifier { pos, name })?;
                if self.peek() != &Tok::LParen {
                    return Err(self.unexpected("`(` after function name"));
                }
                self.bump();
                let arg = self.expr()?;
                self.expect_rparen()?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            _ => Err(self.unexpected("a number, `r`, a function or `(`")),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if self.peek() == &Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected("`)`"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(src: &str, r: f64) -> f64 {
        Expr::parse(src).unwrap().eval(r).unwrap()
    }

    #[test]
    fn spec_examples() {
        assert_eq!(eval("(1+r^2)^(-2)", 1.0), 0.25);
        assert_eq!(eval("exp(-r^2)", 0.0), 1.0);
        let err = Expr::parse("r+").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { pos: 2, .. }), "{err:?}");
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval("-r^2", 3.0), -9.0);
        assert_eq!(eval("2^3^2", 0.0), 512.0);
        assert_eq!(eval("2^-1", 0.0), 0.5);
        assert_eq!(eval("1-2-3", 0.0), -4.0);
        assert_eq!(eval("8/4/2", 0.0), 1.0);
        assert_eq!(eval("1+2*3", 0.0), 7.0);
        assert_eq!(eval("--r", 2.0), 2.0);
        assert_eq!(eval("1.5e2 + r", 0.5), 150.5);
        assert_eq!(eval("sqrt(abs(-4))", 0.0), 2.0);
    }

    #[test]
    fn errors() {
        assert_eq!(Expr::parse("   "), Err(ParseError::Empty));
        assert!(matches!(Expr::parse("x + 1"), Err(ParseError::UnknownIdentifier { pos: 0, .. })));
        assert!(matches!(Expr::parse("sin(r)"), Err(ParseError::UnknownIdentifier { .. })));
        assert!(matches!(Expr::parse("(r"), Err(ParseError::Syntax { pos: 2, .. })));
        assert!(matches!(Expr::parse("r $"), Err(ParseError::Syntax { pos: 2, .. })));
        assert!(matches!(Expr::parse("exp r"), Err(ParseError::Syntax { .. })));
        assert!(matches!(Expr::parse("r r"), Err(ParseError::Syntax { pos: 2, .. })));
    }

    #[test]
    fn domain_errors_are_deferred() {
        let e = Expr::parse("log(r - 1)").unwrap();
        assert!(e.eval(2.0).is_ok());
        let err = e.eval(0.5).unwrap_err();
        assert_eq!(err.func, "log");
        assert!(Expr::parse("sqrt(r-1)").unwrap().eval(0.0).is_err());
        assert!(Expr::parse("(r-1)^0.5").unwrap().eval(0.0).is_err());
    }

    #[test]
    fn display_reparses() {
        for src in ["-r^2", "2^-1", "exp(-r)*(1+r)^(-3)", "-(-2)", "1e-7*r"] {
            let e = Expr::parse(src).unwrap();
            let again = Expr::parse(&e.to_string()).unwrap();
            assert_eq!(e, again, "{src} -> {e}");
        }
    }
}
