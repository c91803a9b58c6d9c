//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet3`] carries every mixed partial derivative of a scalar function of
//! four variables up to total order three, at an implicit base point. There are
//! exactly 35 multi-indices with `|α| ≤ 3` in four variables, so each jet is a
//! dense array. Internally the slots hold Taylor coefficients `∂^α f / α!`,
//! which turns multiplication into a plain truncated convolution; the public
//! accessors convert back to partial derivatives.

mod ode;

pub use ode::{integrate, integrate_on_grid, DenseSegment, JetTrajectory, OdeOptions};

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::{Point, DIM};

/// Number of multi-indices with total order at most three in four variables.
pub const NCOEF: usize = 35;
/// Highest total derivative order carried by a jet.
pub const ORDER: usize = 3;

type Exponents = [u8; DIM];

struct Tables {
    exps: [Exponents; NCOEF],
    degree: [u8; NCOEF],
    /// α! for each slot, converts Taylor coefficients to partials.
    factorial: [f64; NCOEF],
    /// index[a][b][c][d], `u8::MAX` when the total order exceeds 3.
    index: [[[[u8; 4]; 4]; 4]; 4],
    /// (i, j, k) with exps[i] + exps[j] = exps[k], sorted by degree of k.
    mul: Vec<(u8, u8, u8)>,
    /// Number of leading entries of `mul` whose product degree is ≤ d.
    mul_upto: [usize; ORDER + 1],
    /// Per variable: (src, dst, factor) for the partial derivative.
    deriv: [Vec<(u8, u8, f64)>; DIM],
    /// Per variable: (src, dst, factor) for the antiderivative vanishing on x_v = 0.
    integ: [Vec<(u8, u8, f64)>; DIM],
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(build_tables)
}

fn build_tables() -> Tables {
    let mut exps = Vec::with_capacity(NCOEF);
    for deg in 0..=ORDER as u8 {
        // lexicographic order on sorted variable lists of length `deg`
        let mut stack: Vec<Vec<usize>> = vec![vec![]];
        for _ in 0..deg {
            let mut next = Vec::new();
            for v in &stack {
                let start = v.last().copied().unwrap_or(0);
                for k in start..DIM {
                    let mut w = v.clone();
                    w.push(k);
                    next.push(w);
                }
            }
            stack = next;
        }
        for vars in stack {
            let mut e = [0u8; DIM];
            for v in vars {
                e[v] += 1;
            }
            exps.push(e);
        }
    }
    assert_eq!(exps.len(), NCOEF);
    let exps: [Exponents; NCOEF] = exps.try_into().unwrap();

    let mut index = [[[[u8::MAX; 4]; 4]; 4]; 4];
    let mut degree = [0u8; NCOEF];
    let mut factorial = [1.0; NCOEF];
    for (i, e) in exps.iter().enumerate() {
        index[e[0] as usize][e[1] as usize][e[2] as usize][e[3] as usize] = i as u8;
        degree[i] = e.iter().sum();
        factorial[i] = e
            .iter()
            .map(|&k| (1..=k as u32).product::<u32>() as f64)
            .product();
    }

    let lookup = |e: &Exponents| -> Option<u8> {
        if e.iter().map(|&k| k as usize).sum::<usize>() > ORDER {
            return None;
        }
        Some(index[e[0] as usize][e[1] as usize][e[2] as usize][e[3] as usize])
    };

    let mut mul = Vec::new();
    for i in 0..NCOEF {
        for j in 0..NCOEF {
            let mut e = [0u8; DIM];
            for v in 0..DIM {
                e[v] = exps[i][v] + exps[j][v];
            }
            if let Some(k) = lookup(&e) {
                mul.push((i as u8, j as u8, k));
            }
        }
    }
    mul.sort_by_key(|&(_, _, k)| degree[k as usize]);
    let mut mul_upto = [0usize; ORDER + 1];
    for (d, slot) in mul_upto.iter_mut().enumerate() {
        *slot = mul.iter().filter(|t| degree[t.2 as usize] as usize <= d).count();
    }

    let mut deriv: [Vec<(u8, u8, f64)>; DIM] = Default::default();
    let mut integ: [Vec<(u8, u8, f64)>; DIM] = Default::default();
    for (v, (dv, iv)) in deriv.iter_mut().zip(integ.iter_mut()).enumerate() {
        for (a, e) in exps.iter().enumerate() {
            // d/dx_v maps the coefficient at e + e_v (times e_v + 1) onto e
            let mut up = *e;
            up[v] += 1;
            if let Some(src) = lookup(&up) {
                dv.push((src, a as u8, (e[v] + 1) as f64));
                iv.push((a as u8, src, 1.0 / (e[v] + 1) as f64));
            }
        }
    }

    Tables {
        exps,
        degree,
        factorial,
        index,
        mul,
        mul_upto,
        deriv,
        integ,
    }
}

/// Slot of the multi-index with the given exponents, if its order is ≤ 3.
pub fn slot_of(exponents: [usize; DIM]) -> Option<usize> {
    if exponents.iter().sum::<usize>() > ORDER {
        return None;
    }
    let t = tables();
    Some(t.index[exponents[0]][exponents[1]][exponents[2]][exponents[3]] as usize)
}

/// Exponent vector of a slot.
pub fn exponents_of(slot: usize) -> [usize; DIM] {
    tables().exps[slot].map(|k| k as usize)
}

/// Truncated Taylor expansion to total order 3 in four variables.
#[derive(Clone, Copy, PartialEq)]
pub struct Jet3 {
    c: [f64; NCOEF],
}

impl Default for Jet3 {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Debug for Jet3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet3({}", self.c[0])?;
        for (i, &c) in self.c.iter().enumerate().skip(1) {
            if c != 0.0 {
                write!(f, ", {:?}: {}", exponents_of(i), c * tables().factorial[i])?;
            }
        }
        write!(f, ")")
    }
}

/// Elementary operations accepted by [`jet_compose`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JetOp {
    Add,
    Sub,
    Mul,
    Div,
    /// Real power with a fixed exponent.
    Pow(f64),
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
    /// `|f|`, resolved by the sign of the base value.
    Abs,
}

impl Jet3 {
    pub const fn zero() -> Self {
        Jet3 { c: [0.0; NCOEF] }
    }

    pub fn constant(value: f64) -> Self {
        let mut j = Self::zero();
        j.c[0] = value;
        j
    }

    /// The coordinate function `x_var` expanded around `point`.
    pub fn variable(point: &Point, var: usize) -> Result<Self> {
        if var >= DIM {
            return Err(Error::Argument(format!(
                "variable index {var} out of range 0..{DIM}"
            )));
        }
        let mut j = Self::constant(point[var]);
        j.c[1 + var] = 1.0;
        Ok(j)
    }

    /// All four coordinate jets at `point`.
    pub fn coordinates(point: &Point) -> [Jet3; DIM] {
        std::array::from_fn(|v| Self::variable(point, v).expect("index in range"))
    }

    /// Builds a jet from mixed partial derivatives indexed by slot.
    pub fn from_partials(partials: [f64; NCOEF]) -> Self {
        let t = tables();
        let mut c = partials;
        for (ci, f) in c.iter_mut().zip(t.factorial.iter()) {
            *ci /= f;
        }
        Jet3 { c }
    }

    pub fn from_taylor(coeffs: [f64; NCOEF]) -> Self {
        Jet3 { c: coeffs }
    }

    pub fn taylor(&self) -> &[f64; NCOEF] {
        &self.c
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// First partial ∂f/∂x_var.
    #[inline]
    pub fn d(&self, var: usize) -> f64 {
        self.c[1 + var]
    }

    /// Mixed partial for a list of differentiation variables, e.g. `&[0, 1]`
    /// is ∂²f/∂x₀∂x₁. Orders above 3 are zero by truncation.
    pub fn partial(&self, vars: &[usize]) -> f64 {
        let mut e = [0usize; DIM];
        for &v in vars {
            e[v] += 1;
        }
        self.partial_exp(e)
    }

    pub fn partial_exp(&self, exponents: [usize; DIM]) -> f64 {
        match slot_of(exponents) {
            Some(s) => self.c[s] * tables().factorial[s],
            None => 0.0,
        }
    }

    /// All 35 mixed partials in slot order.
    pub fn partials(&self) -> [f64; NCOEF] {
        let t = tables();
        std::array::from_fn(|i| self.c[i] * t.factorial[i])
    }

    /// Gradient at the base point.
    pub fn gradient(&self) -> [f64; DIM] {
        [self.c[1], self.c[2], self.c[3], self.c[4]]
    }

    /// Partial derivative as a jet. The top order of the result is unknown
    /// and set to zero, so only orders ≤ 2 are meaningful afterwards.
    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero();
        for &(src, dst, f) in &tables().deriv[var] {
            out.c[dst as usize] = f * self.c[src as usize];
        }
        out
    }

    /// Antiderivative in `var` that vanishes on the hyperplane through the
    /// base point; order-3 input terms are dropped.
    pub fn antiderivative(&self, var: usize) -> Self {
        let mut out = Self::zero();
        for &(src, dst, f) in &tables().integ[var] {
            out.c[dst as usize] = f * self.c[src as usize];
        }
        out
    }

    /// Drops every coefficient of order above `order`.
    pub fn truncate(&self, order: usize) -> Self {
        let t = tables();
        let mut out = *self;
        for (ci, &d) in out.c.iter_mut().zip(t.degree.iter()) {
            if d as usize > order {
                *ci = 0.0;
            }
        }
        out
    }

    /// Product keeping only orders ≤ `order`.
    pub fn mul_to_order(&self, rhs: &Self, order: usize) -> Self {
        let t = tables();
        let mut out = Self::zero();
        for &(i, j, k) in &t.mul[..t.mul_upto[order.min(ORDER)]] {
            out.c[k as usize] += self.c[i as usize] * rhs.c[j as usize];
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        Jet3 {
            c: self.c.map(|x| x * s),
        }
    }

    /// `g(f)` for a univariate `g` given its value and first three derivatives
    /// at `f(base)`.
    pub fn compose(&self, g: [f64; 4]) -> Self {
        let mut h = *self;
        h.c[0] = 0.0;
        let h2 = h * h;
        let h3 = h2 * h;
        let mut out = h.scale(g[1]) + h2.scale(g[2] / 2.0) + h3.scale(g[3] / 6.0);
        out.c[0] += g[0];
        out
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose([e, e, e, e])
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose([c, -s, -c, s])
    }

    pub fn sinh(&self) -> Self {
        let v = self.value();
        let (s, c) = (v.sinh(), v.cosh());
        self.compose([s, c, s, c])
    }

    pub fn cosh(&self) -> Self {
        let v = self.value();
        let (s, c) = (v.sinh(), v.cosh());
        self.compose([c, s, c, s])
    }

    pub fn powi(&self, n: i32) -> Self {
        let v = self.value();
        let nf = n as f64;
        self.compose([
            v.powi(n),
            nf * v.powi(n - 1),
            nf * (nf - 1.0) * v.powi(n - 2),
            nf * (nf - 1.0) * (nf - 2.0) * v.powi(n - 3),
        ])
    }

    /// Reciprocal without a singularity check.
    pub fn recip_unchecked(&self) -> Self {
        let v = self.value();
        let r = 1.0 / v;
        self.compose([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }

    pub fn recip(&self, margin: f64, factor: &str) -> Result<Self> {
        self.guard_nonzero(margin, factor)?;
        Ok(self.recip_unchecked())
    }

    pub fn ln(&self, margin: f64, factor: &str) -> Result<Self> {
        self.guard_positive(margin, factor)?;
        Ok(self.ln_unchecked())
    }

    pub fn ln_unchecked(&self) -> Self {
        let v = self.value();
        self.compose([v.ln(), 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v)])
    }

    pub fn sqrt(&self, margin: f64, factor: &str) -> Result<Self> {
        self.guard_positive(margin, factor)?;
        Ok(self.powf_unchecked(0.5))
    }

    pub fn sqrt_unchecked(&self) -> Self {
        self.powf_unchecked(0.5)
    }

    pub fn powf(&self, p: f64, margin: f64, factor: &str) -> Result<Self> {
        self.guard_positive(margin, factor)?;
        Ok(self.powf_unchecked(p))
    }

    pub fn powf_unchecked(&self, p: f64) -> Self {
        let v = self.value();
        self.compose([
            v.powf(p),
            p * v.powf(p - 1.0),
            p * (p - 1.0) * v.powf(p - 2.0),
            p * (p - 1.0) * (p - 2.0) * v.powf(p - 3.0),
        ])
    }

    /// `|f|` treated as `sign(f(base))·f`; the caller guarantees `f` does not
    /// change sign near the base point.
    pub fn abs_signed(&self, margin: f64, factor: &str) -> Result<Self> {
        self.guard_nonzero(margin, factor)?;
        Ok(self.abs_unchecked())
    }

    pub fn abs_unchecked(&self) -> Self {
        if self.value() < 0.0 {
            -*self
        } else {
            *self
        }
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|x| x.is_finite())
    }

    /// Largest absolute Taylor coefficient.
    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    fn guard_nonzero(&self, margin: f64, factor: &str) -> Result<()> {
        let v = self.value();
        if !(v.abs() > margin) {
            return Err(Error::Domain {
                factor: format!("{factor} (value {v:e})"),
                point: vec![],
            });
        }
        Ok(())
    }

    fn guard_positive(&self, margin: f64, factor: &str) -> Result<()> {
        let v = self.value();
        if !(v > margin) {
            return Err(Error::Domain {
                factor: format!("{factor} (value {v:e})"),
                point: vec![],
            });
        }
        Ok(())
    }
}

/// Applies an elementary operation to jet arguments, refusing to evaluate
/// within `margin` of a singular value.
pub fn jet_compose(op: JetOp, args: &[Jet3], margin: f64) -> Result<Jet3> {
    let arity = match op {
        JetOp::Add | JetOp::Sub | JetOp::Mul | JetOp::Div => 2,
        _ => 1,
    };
    if args.len() != arity {
        return Err(Error::Argument(format!(
            "{op:?} expects {arity} argument(s), got {}",
            args.len()
        )));
    }
    let a = args[0];
    Ok(match op {
        JetOp::Add => a + args[1],
        JetOp::Sub => a - args[1],
        JetOp::Mul => a * args[1],
        JetOp::Div => a * args[1].recip(margin, "divisor")?,
        JetOp::Pow(p) => {
            if p.fract() == 0.0 && p.abs() < 64.0 {
                if p < 0.0 {
                    a.recip(margin, "power base")?.powi(-p as i32)
                } else {
                    a.powi(p as i32)
                }
            } else {
                a.powf(p, margin, "power base")?
            }
        }
        JetOp::Sqrt => a.sqrt(margin, "sqrt argument")?,
        JetOp::Exp => a.exp(),
        JetOp::Log => a.ln(margin, "log argument")?,
        JetOp::Sin => a.sin(),
        JetOp::Cos => a.cos(),
        JetOp::Abs => a.abs_signed(margin, "abs argument")?,
    })
}

impl Add for Jet3 {
    type Output = Jet3;
    #[inline]
    fn add(mut self, rhs: Jet3) -> Jet3 {
        for (a, b) in self.c.iter_mut().zip(rhs.c.iter()) {
            *a += b;
        }
        self
    }
}

impl Sub for Jet3 {
    type Output = Jet3;
    #[inline]
    fn sub(mut self, rhs: Jet3) -> Jet3 {
        for (a, b) in self.c.iter_mut().zip(rhs.c.iter()) {
            *a -= b;
        }
        self
    }
}

impl Mul for Jet3 {
    type Output = Jet3;
    #[inline]
    fn mul(self, rhs: Jet3) -> Jet3 {
        self.mul_to_order(&rhs, ORDER)
    }
}

impl Div for Jet3 {
    type Output = Jet3;
    /// Unchecked quotient; use [`jet_compose`] for the guarded version.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet3) -> Jet3 {
        self * rhs.recip_unchecked()
    }
}

impl Neg for Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        self.scale(-1.0)
    }
}

impl Add<f64> for Jet3 {
    type Output = Jet3;
    fn add(mut self, rhs: f64) -> Jet3 {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet3 {
    type Output = Jet3;
    fn sub(mut self, rhs: f64) -> Jet3 {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet3 {
    type Output = Jet3;
    fn mul(self, rhs: f64) -> Jet3 {
        self.scale(rhs)
    }
}

impl Div<f64> for Jet3 {
    type Output = Jet3;
    fn div(self, rhs: f64) -> Jet3 {
        self.scale(1.0 / rhs)
    }
}

impl Add<Jet3> for f64 {
    type Output = Jet3;
    fn add(self, rhs: Jet3) -> Jet3 {
        rhs + self
    }
}

impl Sub<Jet3> for f64 {
    type Output = Jet3;
    fn sub(self, rhs: Jet3) -> Jet3 {
        -rhs + self
    }
}

impl Mul<Jet3> for f64 {
    type Output = Jet3;
    fn mul(self, rhs: Jet3) -> Jet3 {
        rhs.scale(self)
    }
}

impl Div<Jet3> for f64 {
    type Output = Jet3;
    fn div(self, rhs: Jet3) -> Jet3 {
        rhs.recip_unchecked().scale(self)
    }
}

impl AddAssign for Jet3 {
    fn add_assign(&mut self, rhs: Jet3) {
        *self = *self + rhs;
    }
}

impl SubAssign for Jet3 {
    fn sub_assign(&mut self, rhs: Jet3) {
        *self = *self - rhs;
    }
}

impl MulAssign for Jet3 {
    fn mul_assign(&mut self, rhs: Jet3) {
        *self = *self * rhs;
    }
}

impl std::iter::Sum for Jet3 {
    fn sum<I: Iterator<Item = Jet3>>(iter: I) -> Jet3 {
        iter.fold(Jet3::zero(), |a, b| a + b)
    }
}
