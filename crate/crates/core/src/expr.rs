//! Polynomial expression grammar.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := '-' factor | atom ('^' nonneg-int)?
//! atom   := rational | 'theta' | var | '(' expr ')' | 'ln1p(' var ')'
//! var    := 'x' digit+ | 't' | 's'
//! ```
//!
//! Rationals are written `p` or `p/q`. `ln1p` is only accepted when the
//! caller asks for a numeric curve.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::field::{format_rational, rational_to_f64, Field, Rational, Scalar};
use crate::matrix::Ring;
use crate::poly::Poly;

/// Largest exponent accepted after `^`.
pub const MAX_EXPONENT: u32 = 256;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Num(Rational),
    Theta,
    Var(String),
    Ln1p(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

/// Whether `ln1p` is admitted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Context {
    Polynomial,
    NumericCurve,
}

pub fn parse(src: &str, ctx: Context) -> Result<Expr> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, ctx };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    ctx: Context,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            let digits = self.digits();
            if digits.is_empty() {
                return Err(self.err("expected a nonnegative integer exponent"));
            }
            let k: u32 = match digits.parse() {
                Ok(k) if k <= MAX_EXPONENT => k,
                _ => return Err(Error::Parse { pos: start, msg: format!("exponent exceeds {MAX_EXPONENT}") }),
            };
            return Ok(Expr::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn digits(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn var(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        let name = self.ident();
        if is_var(&name) {
            Ok(name)
        } else {
            Err(Error::Parse { pos: start, msg: format!("expected a variable, found '{name}'") })
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let num = self.digits();
                let mut den = "1".to_string();
                if self.src.get(self.pos) == Some(&b'/') {
                    self.pos += 1;
                    den = self.digits();
                    if den.is_empty() {
                        return Err(self.err("expected a denominator"));
                    }
                }
                let num: BigInt = num.parse().expect("digits");
                let den: BigInt = den.parse().expect("digits");
                if den.is_zero() {
                    return Err(Error::Parse { pos: start, msg: "zero denominator".into() });
                }
                Ok(Expr::Num(Rational::new(num, den)))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                let name = self.ident();
                match name.as_str() {
                    "theta" => Ok(Expr::Theta),
                    "ln1p" => {
                        if self.ctx != Context::NumericCurve {
                            return Err(Error::Parse { pos: start, msg: "ln1p is only allowed in numeric curves".into() });
                        }
                        self.expect(b'(')?;
                        let v = self.var()?;
                        self.expect(b')')?;
                        Ok(Expr::Ln1p(v))
                    }
                    _ if is_var(&name) => Ok(Expr::Var(name)),
                    _ => Err(Error::Parse { pos: start, msg: format!("unknown identifier '{name}'") }),
                }
            }
            Some(c) => Err(self.err(&format!("unexpected character '{}'", c as char))),
        }
    }
}

fn is_var(name: &str) -> bool {
    match name {
        "t" | "s" => true,
        _ => name.len() > 1 && name.starts_with('x') && name[1..].bytes().all(|b| b.is_ascii_digit()),
    }
}

impl Expr {
    fn is_atomic(&self) -> bool {
        match self {
            Expr::Num(q) => q.is_integer() && !q.is_negative(),
            Expr::Theta | Expr::Var(_) | Expr::Ln1p(_) => true,
            _ => false,
        }
    }

    fn is_sum(&self) -> bool {
        matches!(self, Expr::Add(..) | Expr::Sub(..))
    }

    /// Render as an operand of `*`.
    fn product_operand(&self, right: bool) -> String {
        if self.is_sum() || (right && matches!(self, Expr::Mul(..))) {
            format!("({self})")
        } else {
            self.to_string()
        }
    }

    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Var(v) | Expr::Ln1p(v) => out.push(v.clone()),
            Expr::Neg(a) | Expr::Pow(a, _) => a.collect_vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Num(_) | Expr::Theta => {}
        }
    }

    /// Exact polynomial over `field` in the named variables.
    pub fn to_poly(&self, field: &Field, names: &[&str]) -> Result<Poly> {
        let nvars = names.len();
        Ok(match self {
            Expr::Num(q) => Poly::constant(field.from_rational(q.clone()), nvars),
            Expr::Theta => Poly::constant(field.theta(), nvars),
            Expr::Var(v) => match names.iter().position(|n| n == v) {
                Some(i) => Poly::var(field, nvars, i),
                None => return Err(Error::Parse { pos: 0, msg: format!("unbound variable '{v}'") }),
            },
            Expr::Ln1p(_) => return Err(Error::Parse { pos: 0, msg: "ln1p is not polynomial".into() }),
            Expr::Neg(a) => a.to_poly(field, names)?.neg(),
            Expr::Add(a, b) => a.to_poly(field, names)?.add(&b.to_poly(field, names)?),
            Expr::Sub(a, b) => a.to_poly(field, names)?.sub(&b.to_poly(field, names)?),
            Expr::Mul(a, b) => a.to_poly(field, names)?.mul(&b.to_poly(field, names)?),
            Expr::Pow(a, k) => {
                let base = a.to_poly(field, names)?;
                let mut acc = base.one_like();
                for _ in 0..*k {
                    acc = acc.mul(&base);
                }
                acc
            }
        })
    }

    /// Compile to a float evaluator in the named variables.
    pub fn compile(&self, theta: f64, names: &[&str]) -> Result<Compiled> {
        let bind = |v: &String| {
            names
                .iter()
                .position(|n| n == v)
                .ok_or_else(|| Error::Parse { pos: 0, msg: format!("unbound variable '{v}'") })
        };
        Ok(match self {
            Expr::Num(q) => Compiled::Const(rational_to_f64(q)),
            Expr::Theta => Compiled::Const(theta),
            Expr::Var(v) => Compiled::Var(bind(v)?),
            Expr::Ln1p(v) => Compiled::Ln1p(bind(v)?),
            Expr::Neg(a) => Compiled::Neg(Box::new(a.compile(theta, names)?)),
            Expr::Add(a, b) => Compiled::Add(Box::new(a.compile(theta, names)?), Box::new(b.compile(theta, names)?)),
            Expr::Sub(a, b) => Compiled::Add(
                Box::new(a.compile(theta, names)?),
                Box::new(Compiled::Neg(Box::new(b.compile(theta, names)?))),
            ),
            Expr::Mul(a, b) => Compiled::Mul(Box::new(a.compile(theta, names)?), Box::new(b.compile(theta, names)?)),
            Expr::Pow(a, k) => Compiled::Pow(Box::new(a.compile(theta, names)?), *k as i32),
        }
        .simplify())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(q) => write!(f, "{}", format_rational(q)),
            Expr::Theta => write!(f, "theta"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Ln1p(v) => write!(f, "ln1p({v})"),
            Expr::Neg(a) => {
                if a.is_sum() || matches!(**a, Expr::Mul(..)) {
                    write!(f, "-({a})")
                } else {
                    write!(f, "-{a}")
                }
            }
            Expr::Add(a, b) => {
                if b.is_sum() {
                    write!(f, "{a} + ({b})")
                } else {
                    write!(f, "{a} + {b}")
                }
            }
            Expr::Sub(a, b) => {
                if b.is_sum() {
                    write!(f, "{a} - ({b})")
                } else {
                    write!(f, "{a} - {b}")
                }
            }
            Expr::Mul(a, b) => write!(f, "{}*{}", a.product_operand(false), b.product_operand(true)),
            Expr::Pow(a, k) => {
                if a.is_atomic() {
                    write!(f, "{a}^{k}")
                } else {
                    write!(f, "({a})^{k}")
                }
            }
        }
    }
}

/// Float expression tree with the derivative primitives the grammar lacks.
#[derive(Clone, Debug, PartialEq)]
pub enum Compiled {
    Const(f64),
    Var(usize),
    Ln1p(usize),
    /// `1 / (1 + x_i)`.
    Recip1p(usize),
    Neg(Box<Compiled>),
    Add(Box<Compiled>, Box<Compiled>),
    Mul(Box<Compiled>, Box<Compiled>),
    Pow(Box<Compiled>, i32),
}

impl Compiled {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Compiled::Const(c) => *c,
            Compiled::Var(i) => x[*i],
            Compiled::Ln1p(i) => x[*i].ln_1p(),
            Compiled::Recip1p(i) => 1.0 / (1.0 + x[*i]),
            Compiled::Neg(a) => -a.eval(x),
            Compiled::Add(a, b) => a.eval(x) + b.eval(x),
            Compiled::Mul(a, b) => a.eval(x) * b.eval(x),
            Compiled::Pow(a, k) => a.eval(x).powi(*k),
        }
    }

    /// Symbolic partial derivative in variable `i`.
    pub fn derivative(&self, i: usize) -> Compiled {
        use Compiled::*;
        match self {
            Const(_) => Const(0.0),
            Var(j) => Const(if *j == i { 1.0 } else { 0.0 }),
            Ln1p(j) => {
                if *j == i {
                    Recip1p(i)
                } else {
                    Const(0.0)
                }
            }
            Recip1p(j) => {
                if *j == i {
                    Neg(Box::new(Pow(Box::new(Recip1p(i)), 2)))
                } else {
                    Const(0.0)
                }
            }
            Neg(a) => Neg(Box::new(a.derivative(i))),
            Add(a, b) => Add(Box::new(a.derivative(i)), Box::new(b.derivative(i))),
            Mul(a, b) => Add(
                Box::new(Mul(Box::new(a.derivative(i)), b.clone())),
                Box::new(Mul(a.clone(), Box::new(b.derivative(i)))),
            ),
            Pow(a, k) => {
                if *k == 0 {
                    Const(0.0)
                } else {
                    Mul(
                        Box::new(Mul(Box::new(Const(*k as f64)), Box::new(Pow(a.clone(), k - 1)))),
                        Box::new(a.derivative(i)),
                    )
                }
            }
        }
        .simplify()
    }

    /// Constant folding and removal of trivial factors.
    pub fn simplify(self) -> Compiled {
        use Compiled::*;
        match self {
            Neg(a) => match a.simplify() {
                Const(c) => Const(-c),
                Neg(b) => *b,
                s => Neg(Box::new(s)),
            },
            Add(a, b) => match (a.simplify(), b.simplify()) {
                (Const(x), Const(y)) => Const(x + y),
                (Const(z), s) | (s, Const(z)) if z == 0.0 => s,
                (x, y) => Add(Box::new(x), Box::new(y)),
            },
            Mul(a, b) => match (a.simplify(), b.simplify()) {
                (Const(x), Const(y)) => Const(x * y),
                (Const(z), _) | (_, Const(z)) if z == 0.0 => Const(0.0),
                (Const(o), s) | (s, Const(o)) if o == 1.0 => s,
                (x, y) => Mul(Box::new(x), Box::new(y)),
            },
            Pow(a, k) => match (a.simplify(), k) {
                (_, 0) => Const(1.0),
                (s, 1) => s,
                (Const(c), k) => Const(c.powi(k)),
                (s, k) => Pow(Box::new(s), k),
            },
            other => other,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Compiled::Const(c) if *c == 0.0)
    }
}

/// Parse a constant of `field`, e.g. `"1/2 - 3*theta"`.
pub fn parse_scalar(src: &str, field: &Field) -> Result<Scalar> {
    let e = parse(src, Context::Polynomial)?;
    if let Some(v) = e.vars().first() {
        return Err(Error::Parse { pos: src.find(v.as_str()).unwrap_or(0), msg: "expected a constant".into() });
    }
    Ok(e.to_poly(field, &[])?.constant_term())
}

/// Parse a polynomial in the named variables.
pub fn parse_poly(src: &str, field: &Field, names: &[&str]) -> Result<Poly> {
    let e = parse(src, Context::Polynomial)?;
    for v in e.vars() {
        if !names.contains(&v.as_str()) {
            let pos = src.find(v.as_str()).unwrap_or(0);
            return Err(Error::Parse { pos, msg: format!("unbound variable '{v}'") });
        }
    }
    e.to_poly(field, names)
}
