//! Truncated sparse bivariate power series.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::coeff::{Coeff, TOL};
use crate::Error;

/// Exponent pair of x^a y^b, ordered graded-lex: by total degree, then x-heavy first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Exp {
    pub a: u32,
    pub b: u32,
}

impl Exp {
    pub fn new(a: u32, b: u32) -> Exp {
        Exp { a, b }
    }

    pub fn deg(&self) -> u32 {
        self.a + self.b
    }

    fn index(&self) -> usize {
        let d = self.deg() as usize;
        d * (d + 1) / 2 + self.b as usize
    }

    fn from_index(i: usize) -> Exp {
        let mut d = 0usize;
        while (d + 1) * (d + 2) / 2 <= i {
            d += 1;
        }
        let b = i - d * (d + 1) / 2;
        Exp::new((d - b) as u32, b as u32)
    }
}

impl Ord for Exp {
    fn cmp(&self, o: &Exp) -> Ordering {
        self.deg().cmp(&o.deg()).then(self.b.cmp(&o.b))
    }
}

impl PartialOrd for Exp {
    fn partial_cmp(&self, o: &Exp) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

fn grid_len(order: u32) -> usize {
    let n = order as usize + 1;
    n * (n + 1) / 2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithKind {
    Add,
    Sub,
    Mul,
}

/// A formal power series in x, y known up to total degree `order`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    order: u32,
    terms: BTreeMap<Exp, Coeff>,
}

impl Series {
    pub fn zero(order: u32) -> Series {
        Series { order, terms: BTreeMap::new() }
    }

    pub fn constant(c: Coeff, order: u32) -> Series {
        Series::monomial(c, 0, 0, order)
    }

    pub fn one(order: u32) -> Series {
        Series::constant(Coeff::one(), order)
    }

    pub fn monomial(c: Coeff, a: u32, b: u32, order: u32) -> Series {
        let mut s = Series::zero(order);
        s.add_term(Exp::new(a, b), c);
        s
    }

    pub fn x(order: u32) -> Series {
        Series::monomial(Coeff::one(), 1, 0, order)
    }

    pub fn y(order: u32) -> Series {
        Series::monomial(Coeff::one(), 0, 1, order)
    }

    /// Sum of the given terms; repeated exponents accumulate, degrees above `order` are dropped.
    pub fn from_terms<I: IntoIterator<Item = ((u32, u32), Coeff)>>(order: u32, terms: I) -> Series {
        let mut s = Series::zero(order);
        for ((a, b), c) in terms {
            s.add_term(Exp::new(a, b), c);
        }
        s
    }

    /// Accumulates c·x^a y^b in place.
    pub fn add_term(&mut self, e: Exp, c: Coeff) {
        if e.deg() > self.order || c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                let s = &*v + &c;
                if s.is_zero() {
                    self.terms.remove(&e);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn set_term(&mut self, e: Exp, c: Coeff) {
        if e.deg() > self.order {
            return;
        }
        if c.is_zero() {
            self.terms.remove(&e);
        } else {
            self.terms.insert(e, c);
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exp, &Coeff)> + '_ {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, a: u32, b: u32) -> Coeff {
        self.terms.get(&Exp::new(a, b)).cloned().unwrap_or_else(|| self.zero_coeff())
    }

    pub fn get(&self, a: u32, b: u32) -> Option<&Coeff> {
        self.terms.get(&Exp::new(a, b))
    }

    pub fn constant_term(&self) -> Coeff {
        self.coeff(0, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when no coefficient is a float.
    pub fn is_exact(&self) -> bool {
        self.terms.values().all(Coeff::is_exact)
    }

    fn zero_coeff(&self) -> Coeff {
        if self.is_exact() {
            Coeff::zero()
        } else {
            Coeff::float(0.0)
        }
    }

    pub fn to_float(&self) -> Series {
        Series {
            order: self.order,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (*e, c.to_float()))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }

    /// Lowest degree present; `order + 1` for the zero series.
    pub fn valuation(&self) -> u32 {
        self.terms.keys().next().map(|e| e.deg()).unwrap_or(self.order + 1)
    }

    /// Lowest term in graded-lex order.
    pub fn leading(&self) -> Option<(Exp, &Coeff)> {
        self.terms.iter().next().map(|(e, c)| (*e, c))
    }

    /// Drops to a lower order; never raises the order.
    pub fn truncate(&self, order: u32) -> Series {
        let order = order.min(self.order);
        Series {
            order,
            terms: self.terms.iter().filter(|(e, _)| e.deg() <= order).map(|(e, c)| (*e, c.clone())).collect(),
        }
    }

    /// Re-labels the order, for values known exactly as polynomials.
    pub fn with_order(&self, order: u32) -> Series {
        Series {
            order,
            terms: self.terms.iter().filter(|(e, _)| e.deg() <= order).map(|(e, c)| (*e, c.clone())).collect(),
        }
    }

    pub fn homogeneous(&self, d: u32) -> Series {
        Series {
            order: self.order,
            terms: self.terms.iter().filter(|(e, _)| e.deg() == d).map(|(e, c)| (*e, c.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &Coeff) -> Series {
        let mut s = Series::zero(self.order);
        for (e, v) in &self.terms {
            s.add_term(*e, v * c);
        }
        s
    }

    pub fn map_coeffs<F: Fn(&Coeff) -> Coeff>(&self, f: F) -> Series {
        let mut s = Series::zero(self.order);
        for (e, v) in &self.terms {
            s.add_term(*e, f(v));
        }
        s
    }

    /// Multiplication by x^a y^b, keeping the order.
    pub fn shift(&self, a: u32, b: u32) -> Series {
        let mut s = Series::zero(self.order);
        for (e, v) in &self.terms {
            s.add_term(Exp::new(e.a + a, e.b + b), v.clone());
        }
        s
    }

    /// Exact division by x^a y^b; the order drops by a+b.
    pub fn unshift(&self, a: u32, b: u32) -> Option<Series> {
        if a + b > self.order {
            return if self.is_zero() { Some(Series::zero(0)) } else { None };
        }
        let mut s = Series::zero(self.order - a - b);
        for (e, v) in &self.terms {
            if e.a < a || e.b < b {
                return None;
            }
            s.add_term(Exp::new(e.a - a, e.b - b), v.clone());
        }
        Some(s)
    }

    /// Largest (a, b) with x^a y^b dividing every term.
    pub fn monomial_content(&self) -> (u32, u32) {
        let a = self.terms.keys().map(|e| e.a).min().unwrap_or(0);
        let b = self.terms.keys().map(|e| e.b).min().unwrap_or(0);
        (a, b)
    }

    pub fn dx(&self) -> Series {
        let mut s = Series::zero(self.order.saturating_sub(1));
        for (e, v) in &self.terms {
            if e.a > 0 {
                s.add_term(Exp::new(e.a - 1, e.b), v * &Coeff::int(e.a as i64));
            }
        }
        s
    }

    pub fn dy(&self) -> Series {
        let mut s = Series::zero(self.order.saturating_sub(1));
        for (e, v) in &self.terms {
            if e.b > 0 {
                s.add_term(Exp::new(e.a, e.b - 1), v * &Coeff::int(e.b as i64));
            }
        }
        s
    }

    /// Euler operator x∂x + y∂y (multiplies each term by its degree).
    pub fn euler(&self) -> Series {
        self.map_terms(|e, c| c * &Coeff::int(e.deg() as i64))
    }

    pub fn map_terms<F: Fn(&Exp, &Coeff) -> Coeff>(&self, f: F) -> Series {
        let mut s = Series::zero(self.order);
        for (e, v) in &self.terms {
            s.add_term(*e, f(e, v));
        }
        s
    }

    fn add_impl(&self, o: &Series, sign: bool) -> Series {
        let order = self.order.min(o.order);
        let mut s = self.truncate(order);
        for (e, v) in &o.terms {
            if e.deg() <= order {
                if sign {
                    s.add_term(*e, v.clone());
                } else {
                    s.add_term(*e, -v);
                }
            }
        }
        s
    }

    /// Product; the result order accounts for valuations of both factors.
    fn mul_impl(&self, o: &Series) -> Series {
        let (na, nb) = (self.order, o.order);
        let (va, vb) = (self.valuation(), o.valuation());
        let order = na.max(nb).min((na + vb).min(nb + va));
        let mut acc: Vec<Option<Coeff>> = vec![None; grid_len(order)];
        for (e1, c1) in &self.terms {
            if e1.deg() > order {
                break;
            }
            for (e2, c2) in &o.terms {
                let d = e1.deg() + e2.deg();
                if d > order {
                    break;
                }
                let e = Exp::new(e1.a + e2.a, e1.b + e2.b);
                let p = c1 * c2;
                let slot = &mut acc[e.index()];
                *slot = Some(match slot.take() {
                    Some(v) => &v + &p,
                    None => p,
                });
            }
        }
        let mut terms = BTreeMap::new();
        for (i, c) in acc.into_iter().enumerate() {
            if let Some(c) = c {
                if !c.is_zero() {
                    terms.insert(Exp::from_index(i), c);
                }
            }
        }
        Series { order, terms }
    }

    pub fn pow(&self, n: u32) -> Series {
        let mut acc = Series::constant(if self.is_exact() { Coeff::one() } else { Coeff::float(1.0) }, self.order);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Multiplicative inverse of a series with nonzero constant term.
    pub fn invert_unit(&self) -> Result<Series, Error> {
        let c0 = self.constant_term();
        let inv0 = c0.inv().filter(|_| !c0.is_zero()).ok_or(Error::NotUnit)?;
        let n = self.order;
        let parts = self.hom_parts();
        let mut out: Vec<BTreeMap<Exp, Coeff>> = Vec::with_capacity(n as usize + 1);
        let mut first = BTreeMap::new();
        first.insert(Exp::new(0, 0), inv0.clone());
        out.push(first);
        let neg_inv0 = -&inv0;
        for d in 1..=n {
            let mut acc = BTreeMap::new();
            for j in 1..=d {
                hom_mul_into(&parts[j as usize], &out[(d - j) as usize], &mut acc);
            }
            let hd = scale_map(acc, &neg_inv0);
            out.push(hd);
        }
        Ok(Series::from_parts(n, out))
    }

    /// Formal exponential; requires zero constant term.
    pub fn exp(&self) -> Result<Series, Error> {
        if !self.constant_term().is_zero() {
            return Err(Error::Precondition("exp requires a zero constant term".into()));
        }
        let n = self.order;
        let parts = self.hom_parts();
        let one = if self.is_exact() { Coeff::one() } else { Coeff::float(1.0) };
        let mut out: Vec<BTreeMap<Exp, Coeff>> = Vec::with_capacity(n as usize + 1);
        let mut first = BTreeMap::new();
        first.insert(Exp::new(0, 0), one);
        out.push(first);
        for d in 1..=n {
            let mut acc = BTreeMap::new();
            for j in 1..=d {
                let scaled = scale_map(parts[j as usize].clone(), &Coeff::int(j as i64));
                hom_mul_into(&scaled, &out[(d - j) as usize], &mut acc);
            }
            out.push(scale_map(acc, &Coeff::ratio(1, d as i64)));
        }
        Ok(Series::from_parts(n, out))
    }

    /// Formal logarithm; requires constant term 1.
    pub fn log(&self) -> Result<Series, Error> {
        if !self.constant_term().is_one() {
            return Err(Error::Precondition("log requires constant term 1".into()));
        }
        let t = &self.euler() * &self.invert_unit()?;
        Ok(t.map_terms(|e, c| if e.deg() == 0 { Coeff::zero() } else { c * &Coeff::ratio(1, e.deg() as i64) }))
    }

    /// self^γ for a series with constant term 1, via exp(γ log).
    pub fn powc(&self, gamma: &Coeff) -> Result<Series, Error> {
        if gamma.is_zero() {
            return Ok(Series::constant(Coeff::one().like(gamma), self.order));
        }
        self.log()?.scale(gamma).exp()
    }

    fn hom_parts(&self) -> Vec<BTreeMap<Exp, Coeff>> {
        let mut parts = vec![BTreeMap::new(); self.order as usize + 1];
        for (e, c) in &self.terms {
            parts[e.deg() as usize].insert(*e, c.clone());
        }
        parts
    }

    fn from_parts(order: u32, parts: Vec<BTreeMap<Exp, Coeff>>) -> Series {
        let mut s = Series::zero(order);
        for p in parts {
            for (e, c) in p {
                s.add_term(e, c);
            }
        }
        s
    }

    /// F(mx, my) for a pair with zero constant terms.
    pub fn substitute(&self, mx: &Series, my: &Series) -> Result<Series, Error> {
        if !mx.constant_term().is_zero() || !my.constant_term().is_zero() {
            return Err(Error::Precondition("substituted map must fix the origin".into()));
        }
        let n = self.order.min(mx.order).min(my.order);
        let mx = mx.truncate(n);
        let my = my.truncate(n);
        let exact = self.is_exact() && mx.is_exact() && my.is_exact();
        let one = if exact { Coeff::one() } else { Coeff::float(1.0) };
        let mut ypow = vec![Series::constant(one, n)];
        for b in 1..=n {
            let next = &ypow[b as usize - 1] * &my;
            ypow.push(next);
        }
        let max_a = self.terms.keys().map(|e| e.a).max().unwrap_or(0).min(n);
        // Horner in mx over P_a(my) = Σ_b f_ab my^b
        let mut acc = Series::zero(n);
        for a in (0..=max_a).rev() {
            acc = &acc * &mx;
            for (e, c) in self.terms.range(Exp::new(a, 0)..) {
                if e.deg() > n {
                    break;
                }
                if e.a == a {
                    acc = &acc + &ypow[e.b as usize].scale(c);
                }
            }
        }
        Ok(acc.with_order(n))
    }

    /// F(x + px, y + py) for a series treated as an exact polynomial.
    pub fn translate(&self, px: &Coeff, py: &Coeff) -> Series {
        let n = self.order;
        let mut out = Series::zero(n);
        for (e, c) in &self.terms {
            // (x+px)^a (y+py)^b
            for i in 0..=e.a {
                let cx = &binom(e.a, i) * &px.powi((e.a - i) as i64);
                if cx.is_zero() {
                    continue;
                }
                for j in 0..=e.b {
                    let cy = &binom(e.b, j) * &py.powi((e.b - j) as i64);
                    if cy.is_zero() {
                        continue;
                    }
                    out.add_term(Exp::new(i, j), &(c * &cx) * &cy);
                }
            }
        }
        out
    }

    /// Value at a point, treating the series as a polynomial.
    pub fn eval(&self, px: &Coeff, py: &Coeff) -> Coeff {
        let mut acc = Coeff::zero();
        for (e, c) in &self.terms {
            acc = &acc + &(&(c * &px.powi(e.a as i64)) * &py.powi(e.b as i64));
        }
        acc
    }

    /// Compares up to the smaller of the two orders.
    pub fn approx_eq(&self, o: &Series, tol: f64) -> bool {
        (self - o).max_abs() <= tol
    }

    pub fn eq_at_order(&self, o: &Series) -> bool {
        (self - o).is_zero()
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(Coeff::abs).fold(0.0, f64::max)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.deg() == 0)
    }

    /// A constant if every non-constant coefficient is within `tol` of zero.
    pub fn as_constant(&self, tol: f64) -> Option<Coeff> {
        if self.terms.iter().all(|(e, c)| e.deg() == 0 || c.approx_zero(tol)) {
            Some(self.constant_term())
        } else {
            None
        }
    }

    /// Drops float coefficients with magnitude at most `tol`; exact coefficients are kept.
    pub fn chop(&self, tol: f64) -> Series {
        Series {
            order: self.order,
            terms: self.terms.iter().filter(|(_, c)| c.is_exact() || c.abs() > tol).map(|(e, c)| (*e, c.clone())).collect(),
        }
    }

    pub fn is_polynomial_in(&self, max_deg: u32) -> bool {
        self.terms.keys().all(|e| e.deg() <= max_deg)
    }
}

/// Checked arithmetic on two series of the same order.
pub fn arith(a: &Series, b: &Series, kind: ArithKind) -> Result<Series, Error> {
    if a.order != b.order {
        return Err(Error::OrderMismatch(a.order, b.order));
    }
    Ok(match kind {
        ArithKind::Add => a + b,
        ArithKind::Sub => a - b,
        ArithKind::Mul => (a * b).with_order(a.order),
    })
}

pub fn binom(n: u32, k: u32) -> Coeff {
    let mut r = num_bigint::BigInt::from(1);
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    Coeff::rational(num_rational::BigRational::from_integer(r))
}

fn hom_mul_into(p: &BTreeMap<Exp, Coeff>, q: &BTreeMap<Exp, Coeff>, acc: &mut BTreeMap<Exp, Coeff>) {
    for (e1, c1) in p {
        for (e2, c2) in q {
            let e = Exp::new(e1.a + e2.a, e1.b + e2.b);
            let v = c1 * c2;
            match acc.get_mut(&e) {
                Some(x) => *x = &*x + &v,
                None => {
                    acc.insert(e, v);
                }
            }
        }
    }
}

fn scale_map(m: BTreeMap<Exp, Coeff>, c: &Coeff) -> BTreeMap<Exp, Coeff> {
    m.into_iter().map(|(e, v)| (e, &v * c)).filter(|(_, v)| !v.is_zero()).collect()
}

impl<'a> Add<&'a Series> for &'a Series {
    type Output = Series;
    fn add(self, o: &Series) -> Series {
        self.add_impl(o, true)
    }
}

impl<'a> Sub<&'a Series> for &'a Series {
    type Output = Series;
    fn sub(self, o: &Series) -> Series {
        self.add_impl(o, false)
    }
}

impl<'a> Mul<&'a Series> for &'a Series {
    type Output = Series;
    fn mul(self, o: &Series) -> Series {
        self.mul_impl(o)
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.map_coeffs(|c| -c)
    }
}

impl Neg for Series {
    type Output = Series;
    fn neg(self) -> Series {
        -&self
    }
}

macro_rules! owned_series_ops {
    ($tr:ident, $m:ident) => {
        impl $tr<Series> for Series {
            type Output = Series;
            fn $m(self, o: Series) -> Series {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a Series> for Series {
            type Output = Series;
            fn $m(self, o: &Series) -> Series {
                (&self).$m(o)
            }
        }
        impl<'a> $tr<Series> for &'a Series {
            type Output = Series;
            fn $m(self, o: Series) -> Series {
                self.$m(&o)
            }
        }
    };
}
owned_series_ops!(Add, add);
owned_series_ops!(Sub, sub);
owned_series_ops!(Mul, mul);

/// Writes `c*x^a*y^b` terms; used by the field printer with a trailing differential.
pub fn fmt_monomial(c: &Coeff, e: &Exp) -> String {
    let mut s = format!("({})", c);
    match e.a {
        0 => {}
        1 => s.push_str("*x"),
        a => s.push_str(&format!("*x^{}", a)),
    }
    match e.b {
        0 => {}
        1 => s.push_str("*y"),
        b => s.push_str(&format!("*y^{}", b)),
    }
    s
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(e, c)| fmt_monomial(c, e)).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Tolerance helper used by tests across the crate.
pub fn close(a: &Series, b: &Series) -> bool {
    (a - b).max_abs() <= TOL
}
