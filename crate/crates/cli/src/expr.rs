//! Closed-form field expressions such as `exp(-2*x1) + x2^2`.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr  = term (("+" | "-") term)*
//! term  = unary (("*" | "/") unary)*
//! unary = "-" unary | power
//! power = atom ("^" unary)?
//! atom  = number | "pi" | "e" | "x"k | func "(" expr ")" | "(" expr ")"
//! ```
//!
//! `^` is right associative and binds tighter than unary minus, so `-x1^2` is
//! `-(x1^2)`. Coordinates are `x1` to `xd`.

use std::fmt;

use moutard_core::{Grid, ScalarField};

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at column {}: {}", self.pos + 1, self.msg)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Abs,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Tanh => x.tanh(),
            Func::Abs => x.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Zero-based coordinate index.
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Parses `src` for a `dim`-dimensional grid.
    pub fn parse(src: &str, dim: usize) -> Result<Expr, ParseError> {
        let tokens = lex(src)?;
        let mut p = Parser { tokens, next: 0, dim, end: src.len() };
        let e = p.expr()?;
        match p.peek() {
            None => Ok(e),
            Some((pos, t)) => Err(ParseError { pos, msg: format!("unexpected {t}") }),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(k) => x[*k],
            Expr::Neg(a) => -a.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, b) => pow(a.eval(x), b, x),
            Expr::Call(f, a) => f.apply(a.eval(x)),
        }
    }

    pub fn sample(&self, grid: &Grid) -> ScalarField {
        ScalarField::from_fn(grid, |x| self.eval(x))
    }
}

// integer exponents go through powi so that x^2 is exactly x*x
fn pow(base: f64, exponent: &Expr, x: &[f64]) -> f64 {
    match exponent {
        Expr::Num(n) if n.fract() == 0.0 && n.abs() <= 64.0 => base.powi(*n as i32),
        Expr::Neg(inner) => match **inner {
            Expr::Num(n) if n.fract() == 0.0 && n.abs() <= 64.0 => base.powi(-n as i32),
            _ => base.powf(exponent.eval(x)),
        },
        _ => base.powf(exponent.eval(x)),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(v) => write!(f, "number {v}"),
            Token::Ident(s) => write!(f, "name {s:?}"),
            Token::Op(c) => write!(f, "{c:?}"),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = vec![];
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v = text
                .parse::<f64>()
                .map_err(|_| ParseError { pos: start, msg: format!("bad number {text:?}") })?;
            out.push((start, Token::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Token::Ident(src[start..i].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Token::Op(c)));
            i += 1;
        } else {
            return Err(ParseError { pos: i, msg: format!("unexpected character {c:?}") });
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    next: usize,
    dim: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<(usize, &Token)> {
        self.tokens.get(self.next).map(|(p, t)| (*p, t))
    }

    fn eat(&mut self, op: char) -> bool {
        if matches!(self.peek(), Some((_, Token::Op(c))) if *c == op) {
            self.next += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<(), ParseError> {
        if self.eat(op) {
            Ok(())
        } else {
            Err(self.error(format!("expected {op:?}")))
        }
    }

    fn error(&self, msg: String) -> ParseError {
        let pos = self.peek().map_or(self.end, |(p, _)| p);
        ParseError { pos, msg }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            Ok(Expr::Pow(Box::new(base), Box::new(self.unary()?)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let Some((pos, tok)) = self.peek() else {
            return Err(self.error("unexpected end of expression".into()));
        };
        let tok = tok.clone();
        self.next += 1;
        match tok {
            Token::Num(v) => Ok(Expr::Num(v)),
            Token::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Token::Op(c) => Err(ParseError { pos, msg: format!("unexpected {c:?}") }),
            Token::Ident(name) => {
                if let Some(f) = Func::lookup(&name) {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                match name.as_str() {
                    "pi" => return Ok(Expr::Num(std::f64::consts::PI)),
                    "e" => return Ok(Expr::Num(std::f64::consts::E)),
                    _ => {}
                }
                if let Some(k) = name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
                    if (1..=self.dim).contains(&k) {
                        return Ok(Expr::Var(k - 1));
                    }
                    return Err(ParseError { pos, msg: format!("{name} is not a coordinate of a {}-dimensional grid", self.dim) });
                }
                Err(ParseError { pos, msg: format!("unknown name {name:?}") })
            }
        }
    }
}
