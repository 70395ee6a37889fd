//! Expression trees for univariate functions of `x`.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?
//! primary := number | 'x' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | tan | exp | ln | sqrt | abs | sign
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so
//! `-x^2` is `-(x^2)` and `2^-x` is `2^(-x)`. Multiplication is always
//! explicit: `2*x`, never `2x`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Abs,
    /// Derivative of `abs`; `sign(0) = 0`.
    Sign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Pi,
    E,
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("`{node}` is undefined at x = {x}")]
pub struct DomainError {
    pub node: String,
    pub x: f64,
}

impl UnaryOp {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "tan" => UnaryOp::Tan,
            "exp" => UnaryOp::Exp,
            "ln" => UnaryOp::Ln,
            "sqrt" => UnaryOp::Sqrt,
            "abs" => UnaryOp::Abs,
            "sign" => UnaryOp::Sign,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Tan => "tan",
            UnaryOp::Exp => "exp",
            UnaryOp::Ln => "ln",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Abs => "abs",
            UnaryOp::Sign => "sign",
        }
    }
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
            BinaryOp::Pow => '^',
        }
    }
}

// Constructors used by the differentiator. They fold the trivial cases
// (0 + g, 1 * g, g ^ 1, ...) so derivative trees stay readable.

fn constant(v: f64) -> Expr {
    Expr::Const(v)
}

fn is_const(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Const(c) if *c == v)
}

fn unary(op: UnaryOp, e: Expr) -> Expr {
    Expr::Unary(op, Box::new(e))
}

fn neg(e: Expr) -> Expr {
    match e {
        Expr::Const(0.0) => constant(0.0),
        Expr::Unary(UnaryOp::Neg, inner) => *inner,
        e => unary(UnaryOp::Neg, e),
    }
}

fn add(l: Expr, r: Expr) -> Expr {
    if is_const(&l, 0.0) {
        r
    } else if is_const(&r, 0.0) {
        l
    } else {
        Expr::Binary(BinaryOp::Add, Box::new(l), Box::new(r))
    }
}

fn sub(l: Expr, r: Expr) -> Expr {
    if is_const(&r, 0.0) {
        l
    } else if is_const(&l, 0.0) {
        neg(r)
    } else {
        Expr::Binary(BinaryOp::Sub, Box::new(l), Box::new(r))
    }
}

fn mul(l: Expr, r: Expr) -> Expr {
    if is_const(&l, 0.0) || is_const(&r, 0.0) {
        constant(0.0)
    } else if is_const(&l, 1.0) {
        r
    } else if is_const(&r, 1.0) {
        l
    } else {
        Expr::Binary(BinaryOp::Mul, Box::new(l), Box::new(r))
    }
}

fn div(l: Expr, r: Expr) -> Expr {
    if is_const(&r, 1.0) {
        l
    } else {
        Expr::Binary(BinaryOp::Div, Box::new(l), Box::new(r))
    }
}

fn pow(l: Expr, r: Expr) -> Expr {
    if is_const(&r, 1.0) {
        l
    } else {
        Expr::Binary(BinaryOp::Pow, Box::new(l), Box::new(r))
    }
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr, ParseError> {
        Parser::new(text).parse()
    }

    /// True when the tree does not mention `x`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Var => false,
            Expr::Const(_) | Expr::Pi | Expr::E => true,
            Expr::Unary(_, e) => e.is_constant(),
            Expr::Binary(_, l, r) => l.is_constant() && r.is_constant(),
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64, DomainError> {
        let fail = || DomainError {
            node: self.to_string(),
            x,
        };
        let value = match self {
            Expr::Const(c) => *c,
            Expr::Var => x,
            Expr::Pi => std::f64::consts::PI,
            Expr::E => std::f64::consts::E,
            Expr::Unary(op, e) => {
                let v = e.eval(x)?;
                match op {
                    UnaryOp::Neg => -v,
                    UnaryOp::Sin => v.sin(),
                    UnaryOp::Cos => v.cos(),
                    UnaryOp::Tan => v.tan(),
                    UnaryOp::Exp => v.exp(),
                    UnaryOp::Ln if v <= 0.0 => return Err(fail()),
                    UnaryOp::Ln => v.ln(),
                    UnaryOp::Sqrt if v < 0.0 => return Err(fail()),
                    UnaryOp::Sqrt => v.sqrt(),
                    UnaryOp::Abs => v.abs(),
                    UnaryOp::Sign if v == 0.0 => 0.0,
                    UnaryOp::Sign => v.signum(),
                }
            }
            Expr::Binary(op, l, r) => {
                let a = l.eval(x)?;
                let b = r.eval(x)?;
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div if b == 0.0 => return Err(fail()),
                    BinaryOp::Div => a / b,
                    BinaryOp::Pow if a == 0.0 && b < 0.0 => return Err(fail()),
                    BinaryOp::Pow => a.powf(b),
                }
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(fail())
        }
    }

    /// Exact symbolic derivative with respect to `x`.
    pub fn derivative(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Pi | Expr::E => constant(0.0),
            Expr::Var => constant(1.0),
            Expr::Unary(op, inner) => {
                let u = (**inner).clone();
                let du = inner.derivative();
                if is_const(&du, 0.0) {
                    return constant(0.0);
                }
                let outer = match op {
                    UnaryOp::Neg => return neg(du),
                    UnaryOp::Sin => unary(UnaryOp::Cos, u),
                    UnaryOp::Cos => neg(unary(UnaryOp::Sin, u)),
                    // sec^2 u = 1 / cos(u)^2
                    UnaryOp::Tan => div(constant(1.0), pow(unary(UnaryOp::Cos, u), constant(2.0))),
                    UnaryOp::Exp => unary(UnaryOp::Exp, u),
                    UnaryOp::Ln => return div(du, u),
                    UnaryOp::Sqrt => {
                        div(constant(1.0), mul(constant(2.0), unary(UnaryOp::Sqrt, u)))
                    }
                    UnaryOp::Abs => unary(UnaryOp::Sign, u),
                    UnaryOp::Sign => return constant(0.0),
                };
                mul(outer, du)
            }
            Expr::Binary(op, l, r) => {
                let (f, g) = ((**l).clone(), (**r).clone());
                let (df, dg) = (l.derivative(), r.derivative());
                match op {
                    BinaryOp::Add => add(df, dg),
                    BinaryOp::Sub => sub(df, dg),
                    BinaryOp::Mul => add(mul(df, g), mul(f, dg)),
                    BinaryOp::Div => {
                        div(sub(mul(df, g.clone()), mul(f, dg)), pow(g, constant(2.0)))
                    }
                    BinaryOp::Pow => {
                        if r.is_constant() {
                            // g * f^(g-1) * f'
                            let lowered = match &g {
                                Expr::Const(c) => constant(c - 1.0),
                                g => sub(g.clone(), constant(1.0)),
                            };
                            mul(mul(g, pow(f, lowered)), df)
                        } else if l.is_constant() {
                            // f^g * ln(f) * g'
                            mul(mul(self.clone(), unary(UnaryOp::Ln, f)), dg)
                        } else {
                            // f^g * (g' ln f + g f' / f)
                            let inner =
                                add(mul(dg, unary(UnaryOp::Ln, f.clone())), div(mul(g, df), f));
                            mul(self.clone(), inner)
                        }
                    }
                }
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 1,
            Expr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 2,
            Expr::Unary(UnaryOp::Neg, _) => 3,
            Expr::Binary(BinaryOp::Pow, ..) => 4,
            Expr::Const(c) if c.is_sign_negative() => 3,
            _ => 5,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
            if e.precedence() < min_prec {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Const(c) if c.is_sign_negative() => write!(f, "-{:?}", -c),
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Var => f.write_str("x"),
            Expr::Pi => f.write_str("pi"),
            Expr::E => f.write_str("e"),
            Expr::Unary(UnaryOp::Neg, e) => {
                f.write_str("-")?;
                child(f, e, 4)
            }
            Expr::Unary(op, e) => write!(f, "{}({e})", op.name()),
            Expr::Binary(op, l, r) => {
                let (lp, rp) = match op {
                    BinaryOp::Add => (1, 2),
                    BinaryOp::Sub => (1, 2),
                    BinaryOp::Mul => (2, 3),
                    BinaryOp::Div => (2, 3),
                    // right-associative; a negated base needs parentheses
                    BinaryOp::Pow => (5, 3),
                };
                child(f, l, lp)?;
                write!(f, " {} ", op.symbol())?;
                child(f, r, rp)
            }
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        }
    }

    fn parse(mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        if self.pos == self.bytes.len() {
            return Err(ParseError::Empty);
        }
        let e = self.expr()?;
        self.skip_ws();
        if self.pos != self.bytes.len() {
            return Err(self.error(format!("unexpected `{}`", self.rest_char())));
        }
        Ok(e)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn rest_char(&self) -> char {
        self.src[self.pos..].chars().next().unwrap_or(' ')
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinaryOp::Add,
                Some(b'-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinaryOp::Mul,
                Some(b'/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            Ok(Expr::Unary(UnaryOp::Neg, Box::new(self.unary()?)))
        } else if self.eat(b'+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.eat(b'^') {
            let exponent = self.unary()?;
            Ok(Expr::Binary(
                BinaryOp::Pow,
                Box::new(base),
                Box::new(exponent),
            ))
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            Some(_) => Err(self.error(format!("unexpected `{}`", self.rest_char()))),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.bytes.len() && p.bytes[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut count = digits(self);
        if self.bytes.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            self.pos = start;
            return Err(self.error("malformed number"));
        }
        // Exponent only when followed by digits, so `2*e` still reads as Euler's number.
        if matches!(self.bytes.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.bytes.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = mark;
            }
        }
        let text = &self.src[start..self.pos];
        text.parse::<f64>()
            .map(Expr::Const)
            .map_err(|_| ParseError::Syntax {
                offset: start,
                message: format!("malformed number `{text}`"),
            })
    }

    fn identifier(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = &self.src[start..self.pos];
        match name {
            "x" => Ok(Expr::Var),
            "pi" => Ok(Expr::Pi),
            "e" => Ok(Expr::E),
            _ => {
                let Some(op) = UnaryOp::from_name(name) else {
                    return Err(ParseError::UnknownIdentifier {
                        offset: start,
                        name: name.to_string(),
                    });
                };
                if !self.eat(b'(') {
                    return Err(self.error(format!("expected `(` after `{name}`")));
                }
                let arg = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(Expr::Unary(op, Box::new(arg)))
            }
        }
    }
}
