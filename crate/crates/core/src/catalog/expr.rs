//! Closed-form univariate profile expressions in the variable `t`.
//!
//! Grammar: `+ - * / ^`, parentheses, numbers, the variable `t` (or `x`),
//! the constants `pi` and `e`, and the functions
//! `exp ln log sqrt sin cos sinh cosh`. Exponents after `^` must be constant.

use std::fmt;

use crate::error::{Error, Result};
use crate::jet::Jet3;

/// Margin used when evaluating singular operations at a sample point.
pub const EXPR_MARGIN: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
    Sinh,
    Cosh,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Call(Func, Box<Expr>),
}

use Expr::*;

fn b(e: Expr) -> Box<Expr> {
    Box::new(e)
}

fn add(x: Expr, y: Expr) -> Expr {
    match (&x, &y) {
        (Num(a), Num(c)) => Num(a + c),
        (Num(a), _) if *a == 0.0 => y,
        (_, Num(c)) if *c == 0.0 => x,
        _ => Add(b(x), b(y)),
    }
}

fn sub(x: Expr, y: Expr) -> Expr {
    match (&x, &y) {
        (Num(a), Num(c)) => Num(a - c),
        (_, Num(c)) if *c == 0.0 => x,
        (Num(a), _) if *a == 0.0 => neg(y),
        _ => Sub(b(x), b(y)),
    }
}

fn mul(x: Expr, y: Expr) -> Expr {
    match (&x, &y) {
        (Num(a), Num(c)) => Num(a * c),
        (Num(a), _) | (_, Num(a)) if *a == 0.0 => Num(0.0),
        (Num(a), _) if *a == 1.0 => y,
        (_, Num(c)) if *c == 1.0 => x,
        _ => Mul(b(x), b(y)),
    }
}

fn div(x: Expr, y: Expr) -> Expr {
    match (&x, &y) {
        (Num(a), _) if *a == 0.0 => Num(0.0),
        (_, Num(c)) if *c == 1.0 => x,
        _ => Div(b(x), b(y)),
    }
}

fn neg(x: Expr) -> Expr {
    match x {
        Num(a) => Num(-a),
        Neg(inner) => *inner,
        other => Neg(b(other)),
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser {
            src,
            chars: src.char_indices().collect(),
            pos: 0,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < p.chars.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Num(a) => *a,
            Var => t,
            Neg(x) => -x.eval(t),
            Add(x, y) => x.eval(t) + y.eval(t),
            Sub(x, y) => x.eval(t) - y.eval(t),
            Mul(x, y) => x.eval(t) * y.eval(t),
            Div(x, y) => x.eval(t) / y.eval(t),
            Pow(x, p) => x.eval(t).powf(*p),
            Call(f, x) => {
                let v = x.eval(t);
                match f {
                    Func::Exp => v.exp(),
                    Func::Ln => v.ln(),
                    Func::Sqrt => v.sqrt(),
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Sinh => v.sinh(),
                    Func::Cosh => v.cosh(),
                }
            }
        }
    }

    /// Jet of the expression composed with the jet `t`.
    pub fn eval_jet(&self, t: &Jet3) -> Result<Jet3> {
        Ok(match self {
            Num(a) => Jet3::constant(*a),
            Var => *t,
            Neg(x) => -x.eval_jet(t)?,
            Add(x, y) => x.eval_jet(t)? + y.eval_jet(t)?,
            Sub(x, y) => x.eval_jet(t)? - y.eval_jet(t)?,
            Mul(x, y) => x.eval_jet(t)? * y.eval_jet(t)?,
            Div(x, y) => x.eval_jet(t)? * y.eval_jet(t)?.recip(EXPR_MARGIN, "denominator")?,
            Pow(x, p) => {
                let v = x.eval_jet(t)?;
                if p.fract() == 0.0 && p.abs() < 64.0 {
                    if *p < 0.0 {
                        v.recip(EXPR_MARGIN, "base of negative power")?.powi(-(*p as i32))
                    } else {
                        v.powi(*p as i32)
                    }
                } else {
                    v.powf(*p, EXPR_MARGIN, "base of real power")?
                }
            }
            Call(f, x) => {
                let v = x.eval_jet(t)?;
                match f {
                    Func::Exp => v.exp(),
                    Func::Ln => v.ln(EXPR_MARGIN, "logarithm argument")?,
                    Func::Sqrt => v.sqrt(EXPR_MARGIN, "square-root argument")?,
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Sinh => v.sinh(),
                    Func::Cosh => v.cosh(),
                }
            }
        })
    }

    /// Symbolic derivative in `t`.
    pub fn derivative(&self) -> Expr {
        match self {
            Num(_) => Num(0.0),
            Var => Num(1.0),
            Neg(x) => neg(x.derivative()),
            Add(x, y) => add(x.derivative(), y.derivative()),
            Sub(x, y) => sub(x.derivative(), y.derivative()),
            Mul(x, y) => add(
                mul(x.derivative(), (**y).clone()),
                mul((**x).clone(), y.derivative()),
            ),
            Div(x, y) => div(
                sub(
                    mul(x.derivative(), (**y).clone()),
                    mul((**x).clone(), y.derivative()),
                ),
                Pow(y.clone(), 2.0),
            ),
            Pow(x, p) => {
                if *p == 0.0 {
                    return Num(0.0);
                }
                let inner = if *p == 1.0 { (**x).clone() } else { Pow(x.clone(), p - 1.0) };
                let outer = if *p - 1.0 == 0.0 { Num(*p) } else { mul(Num(*p), inner) };
                mul(outer, x.derivative())
            }
            Call(f, x) => {
                let dx = x.derivative();
                let g = |h: Func| Call(h, x.clone());
                let outer = match f {
                    Func::Exp => g(Func::Exp),
                    Func::Ln => div(Num(1.0), (**x).clone()),
                    Func::Sqrt => div(Num(0.5), g(Func::Sqrt)),
                    Func::Sin => g(Func::Cos),
                    Func::Cos => neg(g(Func::Sin)),
                    Func::Sinh => g(Func::Cosh),
                    Func::Cosh => g(Func::Sinh),
                };
                mul(outer, dx)
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Num(_) => true,
            Var => false,
            Neg(x) | Pow(x, _) | Call(_, x) => x.is_constant(),
            Add(x, y) | Sub(x, y) | Mul(x, y) | Div(x, y) => x.is_constant() && y.is_constant(),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num(a) => write!(f, "{a}"),
            Var => write!(f, "t"),
            Neg(x) => write!(f, "(-{x})"),
            Add(x, y) => write!(f, "({x} + {y})"),
            Sub(x, y) => write!(f, "({x} - {y})"),
            Mul(x, y) => write!(f, "{x}*{y}"),
            Div(x, y) => write!(f, "{x}/({y})"),
            Pow(x, p) => write!(f, "({x})^{p}"),
            Call(g, x) => write!(f, "{}({x})", g.name()),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    chars: Vec<(usize, char)>,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, what: &str) -> Error {
        Error::spec("profiles", format!("cannot parse `{}` at offset {}: {what}", self.src, self.pos))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].1.is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                '+' => {
                    self.pos += 1;
                    lhs = Add(b(lhs), b(self.term()?));
                }
                '-' => {
                    self.pos += 1;
                    lhs = Sub(b(lhs), b(self.term()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(c) = self.peek() {
            match c {
                '*' => {
                    self.pos += 1;
                    lhs = Mul(b(lhs), b(self.unary()?));
                }
                '/' => {
                    self.pos += 1;
                    lhs = Div(b(lhs), b(self.unary()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                Ok(Neg(b(self.unary()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let exp = self.unary()?;
            if !exp.is_constant() {
                return Err(self.error("exponent must be constant"));
            }
            return Ok(Pow(b(base), exp.eval(0.0)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.pos;
                while self.pos < self.chars.len() {
                    let c = self.chars[self.pos].1;
                    let exp_sign = (c == '-' || c == '+')
                        && self.pos > start
                        && matches!(self.chars[self.pos - 1].1, 'e' | 'E');
                    if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || exp_sign {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                let text: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
                text.parse::<f64>()
                    .map(Num)
                    .map_err(|_| self.error(&format!("bad number `{text}`")))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.chars.len() && self.chars[self.pos].1.is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
                match name.as_str() {
                    "t" | "x" => return Ok(Var),
                    "pi" => return Ok(Num(std::f64::consts::PI)),
                    "e" => return Ok(Num(std::f64::consts::E)),
                    _ => {}
                }
                let f = Func::from_name(&name).ok_or_else(|| self.error(&format!("unknown name `{name}`")))?;
                if self.peek() != Some('(') {
                    return Err(self.error("expected `(` after function name"));
                }
                self.pos += 1;
                let arg = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(Call(f, b(arg)))
            }
            Some(c) => Err(self.error(&format!("unexpected `{c}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_evaluate() {
        let e = Expr::parse("2*cosh(t) + t^2 - 1/(t+3)").unwrap();
        let t = 0.7f64;
        assert!((e.eval(t) - (2.0 * t.cosh() + t * t - 1.0 / (t + 3.0))).abs() < 1e-15);
        assert_eq!(Expr::parse("-t^2").unwrap().eval(3.0), -9.0);
        assert_eq!(Expr::parse("1e-3*x").unwrap().eval(2.0), 2e-3);
    }

    #[test]
    fn symbolic_derivatives() {
        for src in ["sin(t)+cos(t)", "1/(t^6+1)", "exp(2*t)*sqrt(t)", "ln(1+t^2)", "(t-1)*(t^3+t)"] {
            let e = Expr::parse(src).unwrap();
            let d = e.derivative();
            let t = 0.8;
            let h = 1e-5;
            let fd = (e.eval(t + h) - e.eval(t - h)) / (2.0 * h);
            assert!((d.eval(t) - fd).abs() < 1e-7, "{src}");
        }
    }

    #[test]
    fn jets_match_derivatives() {
        let e = Expr::parse("exp(t)/(1+t^2)").unwrap();
        let p = [0.3, 0.0, 0.0, 0.0];
        let j = e.eval_jet(&Jet3::variable(&p, 0).unwrap()).unwrap();
        let d1 = e.derivative();
        let d2 = d1.derivative();
        let d3 = d2.derivative();
        assert!((j.d(0) - d1.eval(0.3)).abs() < 1e-13);
        assert!((j.partial(&[0, 0]) - d2.eval(0.3)).abs() < 1e-12);
        assert!((j.partial(&[0, 0, 0]) - d3.eval(0.3)).abs() < 1e-11);
    }

    #[test]
    fn rejects_garbage() {
        for src in ["", "t +", "foo(t)", "t^t", "(t"] {
            assert!(Expr::parse(src).is_err(), "{src}");
        }
    }
}
