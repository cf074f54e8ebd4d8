//! Complex coefficients in two modes: exact Gaussian rationals and complex floats.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Float coefficients with magnitude below this are dropped from series.
pub const PRUNE: f64 = 1e-14;
/// Default comparison slack for float-mode assertions.
pub const TOL: f64 = 1e-10;

/// re + i·im with rational parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Gauss {
    pub re: BigRational,
    pub im: BigRational,
}

impl Gauss {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Gauss { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        Gauss { re, im: BigRational::zero() }
    }

    pub fn zero() -> Self {
        Gauss::real(BigRational::zero())
    }

    pub fn one() -> Self {
        Gauss::real(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn norm2(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn conj(&self) -> Gauss {
        Gauss::new(self.re.clone(), -&self.im)
    }

    pub fn inv(&self) -> Option<Gauss> {
        if self.is_zero() {
            return None;
        }
        if self.im.is_zero() {
            return Some(Gauss::real(self.re.recip()));
        }
        let n = self.norm2();
        Some(Gauss::new(&self.re / &n, -&self.im / &n))
    }

    pub fn add(&self, o: &Gauss) -> Gauss {
        if self.im.is_zero() && o.im.is_zero() {
            return Gauss::real(&self.re + &o.re);
        }
        Gauss::new(&self.re + &o.re, &self.im + &o.im)
    }

    pub fn sub(&self, o: &Gauss) -> Gauss {
        if self.im.is_zero() && o.im.is_zero() {
            return Gauss::real(&self.re - &o.re);
        }
        Gauss::new(&self.re - &o.re, &self.im - &o.im)
    }

    pub fn mul(&self, o: &Gauss) -> Gauss {
        match (self.im.is_zero(), o.im.is_zero()) {
            (true, true) => Gauss::real(&self.re * &o.re),
            (true, false) => Gauss::new(&self.re * &o.re, &self.re * &o.im),
            (false, true) => Gauss::new(&self.re * &o.re, &self.im * &o.re),
            (false, false) => Gauss::new(
                &self.re * &o.re - &self.im * &o.im,
                &self.re * &o.im + &self.im * &o.re,
            ),
        }
    }

    pub fn neg(&self) -> Gauss {
        Gauss::new(-&self.re, -&self.im)
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }
}

pub fn rat_to_f64(r: &BigRational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // very large parts: scale down before dividing
            let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(900);
            let n = (r.numer() >> shift).to_f64().unwrap_or(0.0);
            let d = (r.denom() >> shift).to_f64().unwrap_or(1.0);
            n / d
        }
    }
}

/// Exact k-th root of a rational, if it is rational.
pub fn rat_nth_root(r: &BigRational, k: u32) -> Option<BigRational> {
    if k == 1 {
        return Some(r.clone());
    }
    if r.is_negative() {
        if k % 2 == 0 {
            return None;
        }
        return rat_nth_root(&-r, k).map(|x| -x);
    }
    let n = r.numer().nth_root(k);
    let d = r.denom().nth_root(k);
    if num_traits::pow(n.clone(), k as usize) == *r.numer() && num_traits::pow(d.clone(), k as usize) == *r.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

/// Best rational approximation with denominator at most `max_den`, via continued fractions.
pub fn rationalize(x: f64, max_den: i64) -> Option<(i64, i64)> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut v = x;
    for _ in 0..64 {
        let a = v.floor();
        if a.abs() > 1e15 {
            break;
        }
        let a = a as i64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = v - a as f64;
        if frac.abs() < 1e-12 {
            break;
        }
        v = 1.0 / frac;
    }
    if k1 == 0 {
        None
    } else {
        Some((h1, k1))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Coeff {
    Exact(Gauss),
    Float(Complex64),
}

impl Coeff {
    pub fn zero() -> Coeff {
        Coeff::Exact(Gauss::zero())
    }

    pub fn one() -> Coeff {
        Coeff::Exact(Gauss::one())
    }

    pub fn i() -> Coeff {
        Coeff::Exact(Gauss::new(BigRational::zero(), BigRational::one()))
    }

    pub fn int(n: i64) -> Coeff {
        Coeff::Exact(Gauss::real(BigRational::from_integer(BigInt::from(n))))
    }

    pub fn ratio(n: i64, d: i64) -> Coeff {
        assert!(d != 0, "zero denominator");
        Coeff::Exact(Gauss::real(BigRational::new(BigInt::from(n), BigInt::from(d))))
    }

    pub fn gauss(re: (i64, i64), im: (i64, i64)) -> Coeff {
        Coeff::Exact(Gauss::new(
            BigRational::new(BigInt::from(re.0), BigInt::from(re.1)),
            BigRational::new(BigInt::from(im.0), BigInt::from(im.1)),
        ))
    }

    pub fn rational(r: BigRational) -> Coeff {
        Coeff::Exact(Gauss::real(r))
    }

    pub fn float(re: f64) -> Coeff {
        Coeff::Float(Complex64::new(re, 0.0))
    }

    pub fn complex(re: f64, im: f64) -> Coeff {
        Coeff::Float(Complex64::new(re, im))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Coeff::Exact(_))
    }

    /// Exact zero, or a float below the prune threshold.
    pub fn is_zero(&self) -> bool {
        match self {
            Coeff::Exact(g) => g.is_zero(),
            Coeff::Float(c) => c.norm() < PRUNE,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Coeff::Exact(g) => g.im.is_zero() && g.re.is_one(),
            Coeff::Float(c) => (c - Complex64::new(1.0, 0.0)).norm() < PRUNE,
        }
    }

    pub fn approx_zero(&self, tol: f64) -> bool {
        match self {
            Coeff::Exact(g) => g.is_zero(),
            Coeff::Float(c) => c.norm() <= tol,
        }
    }

    /// Equality: exact when both sides are exact, otherwise within `tol`.
    pub fn approx_eq(&self, other: &Coeff, tol: f64) -> bool {
        (self - other).approx_zero(tol)
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            Coeff::Exact(g) => g.to_c64(),
            Coeff::Float(c) => *c,
        }
    }

    pub fn to_float(&self) -> Coeff {
        Coeff::Float(self.to_c64())
    }

    pub fn abs(&self) -> f64 {
        self.to_c64().norm()
    }

    pub fn as_gauss(&self) -> Option<&Gauss> {
        match self {
            Coeff::Exact(g) => Some(g),
            Coeff::Float(_) => None,
        }
    }

    /// The rational value, when exact and real.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self {
            Coeff::Exact(g) if g.im.is_zero() => Some(g.re.clone()),
            _ => None,
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        match self {
            Coeff::Exact(g) if g.im.is_zero() && g.re.is_integer() => g.re.to_integer().to_i64(),
            Coeff::Float(c) if c.im.abs() <= TOL && (c.re - c.re.round()).abs() <= TOL => Some(c.re.round() as i64),
            _ => None,
        }
    }

    pub fn is_real(&self, tol: f64) -> bool {
        match self {
            Coeff::Exact(g) => g.im.is_zero(),
            Coeff::Float(c) => c.im.abs() <= tol,
        }
    }

    pub fn re_f64(&self) -> f64 {
        self.to_c64().re
    }

    pub fn im_f64(&self) -> f64 {
        self.to_c64().im
    }

    pub fn re(&self) -> Coeff {
        match self {
            Coeff::Exact(g) => Coeff::Exact(Gauss::real(g.re.clone())),
            Coeff::Float(c) => Coeff::float(c.re),
        }
    }

    pub fn im(&self) -> Coeff {
        match self {
            Coeff::Exact(g) => Coeff::Exact(Gauss::real(g.im.clone())),
            Coeff::Float(c) => Coeff::float(c.im),
        }
    }

    pub fn conj(&self) -> Coeff {
        match self {
            Coeff::Exact(g) => Coeff::Exact(g.conj()),
            Coeff::Float(c) => Coeff::Float(c.conj()),
        }
    }

    pub fn inv(&self) -> Option<Coeff> {
        match self {
            Coeff::Exact(g) => g.inv().map(Coeff::Exact),
            Coeff::Float(c) => {
                if c.norm() == 0.0 {
                    None
                } else {
                    Some(Coeff::Float(c.inv()))
                }
            }
        }
    }

    pub fn powi(&self, n: i64) -> Coeff {
        if n < 0 {
            return self.inv().expect("negative power of zero").powi(-n);
        }
        let mut base = self.clone();
        let mut acc = match self {
            Coeff::Exact(_) => Coeff::one(),
            Coeff::Float(_) => Coeff::float(1.0),
        };
        let mut e = n as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// This value in the mode of `mode`: floats stay floats, exact stays exact only against exact.
    pub fn like(&self, mode: &Coeff) -> Coeff {
        match (self, mode) {
            (Coeff::Exact(_), Coeff::Exact(_)) => self.clone(),
            _ => self.to_float(),
        }
    }

    /// Exact k-th roots that lie in Q(i): tries every rotation of the principal float root.
    pub fn exact_nth_roots(&self, k: u32) -> Vec<Coeff> {
        let g = match self {
            Coeff::Exact(g) => g,
            Coeff::Float(_) => return Vec::new(),
        };
        if k == 0 {
            return Vec::new();
        }
        if g.is_zero() {
            return vec![Coeff::zero()];
        }
        let mut out: Vec<Coeff> = Vec::new();
        if g.im.is_zero() {
            if let Some(r) = rat_nth_root(&g.re, k) {
                out.push(Coeff::rational(r));
            }
        }
        let c = g.to_c64();
        let (rho, theta) = c.to_polar();
        let mag = rho.powf(1.0 / k as f64);
        for j in 0..k {
            let ang = (theta + 2.0 * std::f64::consts::PI * j as f64) / k as f64;
            let z = Complex64::from_polar(mag, ang);
            let cand = match (exact_guess(z.re), exact_guess(z.im)) {
                (Some(a), Some(b)) => Coeff::Exact(Gauss::new(a, b)),
                _ => continue,
            };
            if cand.powi(k as i64) == *self && !out.contains(&cand) {
                out.push(cand);
            }
        }
        // both square roots of the rational case, etc.
        let units = [Coeff::int(-1), Coeff::i(), Coeff::i().neg_ref()];
        let base = out.clone();
        for r in base {
            for u in units.iter() {
                let cand = &r * u;
                if cand.powi(k as i64) == *self && !out.contains(&cand) {
                    out.push(cand);
                }
            }
        }
        out.sort_by(Coeff::total_cmp);
        out
    }

    pub fn neg_ref(&self) -> Coeff {
        match self {
            Coeff::Exact(g) => Coeff::Exact(g.neg()),
            Coeff::Float(c) => Coeff::Float(-c),
        }
    }

    /// Fixed total order: exact values by (re, im); floats by (re, im); exact before float.
    pub fn total_cmp(a: &Coeff, b: &Coeff) -> Ordering {
        match (a, b) {
            (Coeff::Exact(x), Coeff::Exact(y)) => x.re.cmp(&y.re).then_with(|| x.im.cmp(&y.im)),
            (Coeff::Float(x), Coeff::Float(y)) => x.re.total_cmp(&y.re).then_with(|| x.im.total_cmp(&y.im)),
            (Coeff::Exact(_), Coeff::Float(_)) => Ordering::Less,
            (Coeff::Float(_), Coeff::Exact(_)) => Ordering::Greater,
        }
    }
}

fn exact_guess(v: f64) -> Option<BigRational> {
    let (n, d) = rationalize(v, 1 << 20)?;
    if (n as f64 / d as f64 - v).abs() > 1e-9 * v.abs().max(1.0) {
        return None;
    }
    Some(BigRational::new(BigInt::from(n), BigInt::from(d)))
}

fn float_clean(c: Complex64) -> Complex64 {
    debug_assert!(c.re.is_finite() && c.im.is_finite(), "non-finite coefficient");
    c
}

impl<'a> Add<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn add(self, o: &Coeff) -> Coeff {
        match (self, o) {
            (Coeff::Exact(a), Coeff::Exact(b)) => Coeff::Exact(a.add(b)),
            _ => Coeff::Float(float_clean(self.to_c64() + o.to_c64())),
        }
    }
}

impl<'a> Sub<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn sub(self, o: &Coeff) -> Coeff {
        match (self, o) {
            (Coeff::Exact(a), Coeff::Exact(b)) => Coeff::Exact(a.sub(b)),
            _ => Coeff::Float(float_clean(self.to_c64() - o.to_c64())),
        }
    }
}

impl<'a> Mul<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn mul(self, o: &Coeff) -> Coeff {
        match (self, o) {
            (Coeff::Exact(a), Coeff::Exact(b)) => Coeff::Exact(a.mul(b)),
            _ => Coeff::Float(float_clean(self.to_c64() * o.to_c64())),
        }
    }
}

impl<'a> Div<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn div(self, o: &Coeff) -> Coeff {
        let inv = o.inv().expect("division by zero coefficient");
        self * &inv
    }
}

impl Neg for &Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        self.neg_ref()
    }
}

impl Neg for Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        self.neg_ref()
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl $tr<Coeff> for Coeff {
            type Output = Coeff;
            fn $m(self, o: Coeff) -> Coeff {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a Coeff> for Coeff {
            type Output = Coeff;
            fn $m(self, o: &Coeff) -> Coeff {
                (&self).$m(o)
            }
        }
        impl<'a> $tr<Coeff> for &'a Coeff {
            type Output = Coeff;
            fn $m(self, o: Coeff) -> Coeff {
                self.$m(&o)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);
owned_ops!(Div, div);

fn fmt_rat(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn fmt_f64(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    let s = format!("{}", v);
    if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{}.0", s)
    }
}

impl fmt::Display for Coeff {
    /// Canonical text: `3/4`, `-1+2i`, `1/2-3/4i`, `i`, `0.5-1.25i`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coeff::Exact(g) => {
                if g.im.is_zero() {
                    return write!(f, "{}", fmt_rat(&g.re));
                }
                let im = if g.im.is_one() {
                    "i".to_string()
                } else if (-&g.im).is_one() {
                    "-i".to_string()
                } else {
                    format!("{}i", fmt_rat(&g.im))
                };
                if g.re.is_zero() {
                    write!(f, "{}", im)
                } else if g.im.is_negative() {
                    write!(f, "{}{}", fmt_rat(&g.re), im)
                } else {
                    write!(f, "{}+{}", fmt_rat(&g.re), im)
                }
            }
            Coeff::Float(c) => {
                if c.im == 0.0 {
                    return write!(f, "{}", fmt_f64(c.re));
                }
                let im = fmt_f64(c.im);
                if c.re == 0.0 {
                    write!(f, "{}i", im)
                } else if c.im < 0.0 {
                    write!(f, "{}{}i", fmt_f64(c.re), im)
                } else {
                    write!(f, "{}+{}i", fmt_f64(c.re), im)
                }
            }
        }
    }
}

impl From<i64> for Coeff {
    fn from(n: i64) -> Coeff {
        Coeff::int(n)
    }
}

/// gcd of two non-negative machine integers.
pub fn gcd_u(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_arithmetic() {
        let a = Coeff::gauss((1, 2), (3, 1));
        let b = Coeff::gauss((-1, 1), (1, 3));
        let p = &a * &b;
        // (1/2+3i)(-1+i/3) = -1/2 - 1 + i(1/6 - 3)
        assert_eq!(p, Coeff::gauss((-3, 2), (-17, 6)));
        assert_eq!(&(&a / &b) * &b, a);
    }

    #[test]
    fn mixed_mode_promotes_to_float() {
        let a = Coeff::ratio(1, 2);
        let b = Coeff::float(0.25);
        assert!(matches!(&a + &b, Coeff::Float(_)));
        assert!((&a + &b).approx_eq(&Coeff::float(0.75), 1e-15));
    }

    #[test]
    fn display_is_canonical() {
        assert_eq!(Coeff::ratio(-3, 4).to_string(), "-3/4");
        assert_eq!(Coeff::gauss((-1, 1), (2, 1)).to_string(), "-1+2i");
        assert_eq!(Coeff::gauss((1, 2), (-3, 4)).to_string(), "1/2-3/4i");
        assert_eq!(Coeff::i().to_string(), "i");
        assert_eq!((-Coeff::i()).to_string(), "-i");
        assert_eq!(Coeff::float(2.0).to_string(), "2.0");
        assert_eq!(Coeff::complex(0.5, -1.25).to_string(), "0.5-1.25i");
    }

    #[test]
    fn exact_roots() {
        let r = Coeff::int(-4).exact_nth_roots(2);
        assert_eq!(r, vec![Coeff::gauss((0, 1), (-2, 1)), Coeff::gauss((0, 1), (2, 1))]);
        let c = Coeff::gauss((0, 1), (-8, 1));
        assert!(c.exact_nth_roots(3).contains(&Coeff::gauss((0, 1), (2, 1))));
        assert!(Coeff::int(2).exact_nth_roots(2).is_empty());
        assert_eq!(Coeff::ratio(9, 4).exact_nth_roots(2), vec![Coeff::ratio(-3, 2), Coeff::ratio(3, 2)]);
    }

    #[test]
    fn continued_fraction() {
        assert_eq!(rationalize(-3.0 / 7.0, 1000), Some((-3, 7)));
        assert_eq!(rationalize(0.5, 10), Some((1, 2)));
    }
}
