//! Cohomological equations X·F (+ c F) = G solved degree by degree.

use std::collections::BTreeMap;

use crate::fields::{d_one_form, lie_derivative_loglaurent, OneForm, VectorField};
use crate::series::{Coeff, Exp, LogLaurent, RationalSeries, Series};
use crate::Error;

/// Monomials of the right-hand side that block solvability, with their coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Obstructions {
    pub entries: Vec<(Exp, Coeff)>,
}

impl Obstructions {
    pub fn is_empty(&self) -> bool {
        self.entries.iter().all(|(_, c)| c.is_zero())
    }

    /// Nonzero entries only.
    pub fn nonzero(&self) -> Vec<(Exp, Coeff)> {
        self.entries.iter().filter(|(_, c)| !c.is_zero()).cloned().collect()
    }

    pub fn as_series(&self, order: u32) -> Series {
        Series::from_terms(order, self.entries.iter().map(|(e, c)| ((e.a, e.b), c.clone())))
    }
}

/// X = λ1 x∂x + (λ2 + R) y∂y with R(0,0) = 0.
#[derive(Clone, Debug)]
pub struct DiagonalData {
    pub l1: Coeff,
    pub l2: Coeff,
    pub r: Series,
}

impl DiagonalData {
    pub fn new(l1: Coeff, l2: Coeff, r: Series) -> DiagonalData {
        DiagonalData { l1, l2, r }
    }

    pub fn field(&self) -> VectorField {
        let n = self.r.order();
        let cx = Series::x(n).scale(&self.l1);
        let cy = &Series::y(n) * &(&Series::constant(self.l2.clone(), n) + &self.r);
        VectorField::new(cx, cy)
    }

    pub fn apply(&self, f: &Series) -> Series {
        let n = f.order().min(self.r.order());
        let f = f.truncate(n);
        let fy = f.dy().with_order(n).shift(0, 1);
        let lin = &f.dx().with_order(n).shift(1, 0).scale(&self.l1) + &fy.scale(&self.l2);
        &lin + &(&self.r.truncate(n) * &fy)
    }
}

/// X = X0 + R y^ε W0 with X0 = u^k x∂x + (1 + μ u^k) W0, W0 = λ1 x∂x + λ2 y∂y,
/// u = x^q y^p and λ1 = −p λ2 / q.
#[derive(Clone, Debug)]
pub struct ResonantData {
    pub p: u32,
    pub q: u32,
    pub k: u32,
    pub mu: Coeff,
    pub lambda2: Coeff,
    pub r: Series,
    pub eps: i8,
}

impl ResonantData {
    pub fn new(p: u32, q: u32, k: u32, mu: Coeff, lambda2: Coeff, r: Series, eps: i8) -> Result<ResonantData, Error> {
        let d = ResonantData { p, q, k, mu, lambda2, r, eps };
        d.check()?;
        Ok(d)
    }

    fn check(&self) -> Result<(), Error> {
        if self.q == 0 || self.k == 0 {
            return Err(Error::Precondition("q and k must be positive".into()));
        }
        if self.p == 0 && self.q != 1 {
            return Err(Error::Precondition("saddle-node data needs q = 1".into()));
        }
        if !(-1..=1).contains(&self.eps) {
            return Err(Error::Precondition("ε must be −1, 0 or 1".into()));
        }
        if self.lambda2.is_zero() {
            return Err(Error::Precondition("λ2 must be nonzero".into()));
        }
        let (ka, kb) = ((self.k + 1) * self.q, (self.k + 1) * self.p);
        if self.r.terms().any(|(e, _)| e.a < ka || e.b < kb) {
            return Err(Error::Precondition(format!("R is not divisible by u^{}", self.k + 1)));
        }
        if self.eps < 0 && self.r.terms().any(|(e, _)| e.b == 0) {
            return Err(Error::Precondition("R/y is not a series".into()));
        }
        Ok(())
    }

    pub fn lambda1(&self) -> Coeff {
        (&self.lambda2 * &Coeff::ratio(-(self.p as i64), self.q as i64)).like(&self.lambda2)
    }

    pub fn order(&self) -> u32 {
        self.r.order()
    }

    /// u^j at the given order.
    pub fn u_pow(&self, j: u32, order: u32) -> Series {
        Series::monomial(Coeff::one().like(&self.lambda2), self.q * j, self.p * j, order)
    }

    /// 1 + μ u^k.
    pub fn unit_factor(&self, order: u32) -> Series {
        &Series::one(order) + &self.u_pow(self.k, order).scale(&self.mu)
    }

    fn r_eps(&self, order: u32) -> Series {
        let r = self.r.truncate(order);
        match self.eps {
            1 => r.shift(0, 1),
            0 => r,
            _ => r.unshift(0, 1).expect("checked divisibility").with_order(order),
        }
    }

    pub fn w0(&self, order: u32) -> VectorField {
        VectorField::diagonal(&self.lambda1(), &self.lambda2, order)
    }

    pub fn x0(&self, order: u32) -> VectorField {
        let s = self.unit_factor(order);
        let cx = &self.u_pow(self.k, order).shift(1, 0).with_order(order) + &(&Series::x(order) * &s).scale(&self.lambda1());
        let cy = (&Series::y(order) * &s).scale(&self.lambda2);
        VectorField::new(cx, cy)
    }

    /// The field X = X0 + R y^ε W0.
    pub fn field(&self, order: u32) -> VectorField {
        let s = &self.unit_factor(order) + &self.r_eps(order);
        let cx = &self.u_pow(self.k, order).shift(1, 0).with_order(order) + &(&Series::x(order) * &s).scale(&self.lambda1());
        let cy = (&Series::y(order) * &s).scale(&self.lambda2);
        VectorField::new(cx, cy)
    }

    /// δ0 = ε λ2 (1 + μ u^k).
    pub fn delta0(&self, order: u32) -> Series {
        self.unit_factor(order).scale(&(&self.lambda2 * &Coeff::int(self.eps as i64)))
    }

    /// X·F + ε λ2 (1 + μ u^k) F.
    pub fn apply(&self, f: &Series) -> Series {
        let n = f.order().min(self.order());
        let f = f.truncate(n);
        let x = self.field(n);
        let (a, b) = x.series().expect("holomorphic");
        // a and b vanish at the origin, so the products are good to order n
        let lift = |d: Series, c: &Series| if c.constant_term().is_zero() { d.with_order(n) } else { d };
        let xf = &(&a * &lift(f.dx(), &a)) + &(&b * &lift(f.dy(), &b));
        &xf.with_order(n) + &(&self.delta0(n) * &f)
    }

    /// Exponent l with (a, b + ε) = l (q, p), if the monomial is resonant.
    fn resonance(&self, e: &Exp) -> Option<u32> {
        let b = e.b as i64 + self.eps as i64;
        if b < 0 || e.a % self.q != 0 {
            return None;
        }
        let l = e.a / self.q;
        if b == (l * self.p) as i64 {
            Some(l)
        } else {
            None
        }
    }
}

fn divisor_check(div: &Coeff, e: &Exp, floor: f64) -> Result<(), Error> {
    if div.is_exact() {
        if div.is_zero() {
            return Err(Error::SmallDivisor { a: e.a, b: e.b, divisor: 0.0 });
        }
    } else if div.abs() < floor {
        return Err(Error::SmallDivisor { a: e.a, b: e.b, divisor: div.abs() });
    }
    Ok(())
}

/// F with F(0,0) = 0 and X·F = G for X = λ1 x∂x + (λ2 + R) y∂y.
pub fn solve_diagonal(l1: &Coeff, l2: &Coeff, r: &Series, g: &Series, divisor_floor: f64) -> Result<Series, Error> {
    if !r.constant_term().is_zero() {
        return Err(Error::Precondition("R(0,0) must vanish".into()));
    }
    if !g.constant_term().approx_zero(if g.is_exact() { 0.0 } else { divisor_floor }) {
        return Err(Error::Unsolvable("G(0,0) ≠ 0".into()));
    }
    if l2.is_zero() && l1.is_zero() {
        return Err(Error::Degenerate("zero linear part".into()));
    }
    if l1.is_exact() && l2.is_exact() && !l2.is_zero() {
        let ratio = l1 / l2;
        if let Some(q) = ratio.as_rational() {
            if q <= num_rational::BigRational::from_integer(0.into()) {
                let p = num_traits::ToPrimitive::to_i64(&-q.numer()).unwrap_or(i64::MAX);
                let d = num_traits::ToPrimitive::to_i64(q.denom()).unwrap_or(i64::MAX);
                return Err(Error::RationalRatio { p, q: d });
            }
        }
    }
    let n = g.order().min(r.order());
    let data = DiagonalData::new(l1.clone(), l2.clone(), r.truncate(n));
    let g = g.truncate(n);
    let mut f = Series::zero(n);
    for d in 1..=n {
        let res = (&g - &data.apply(&f)).homogeneous(d);
        for (e, c) in res.terms() {
            let div = &(l1 * &Coeff::int(e.a as i64)) + &(l2 * &Coeff::int(e.b as i64));
            divisor_check(&div, e, divisor_floor)?;
            f.add_term(*e, c / &div);
        }
    }
    Ok(f)
}

/// F with X·F + ε λ2 (1 + μ u^k) F = G − (obstructions), degree by degree.
///
/// Within a degree, resonant monomials are handled first: those with l ≤ k are
/// reported, those with l > k fix the coefficient of F at index l − k. The free
/// constant ∂^{−ε}F/∂y^{−ε}(0,0) is left at zero.
pub fn solve_resonant(data: &ResonantData, g: &Series) -> Result<(Series, Obstructions), Error> {
    data.check()?;
    let n = g.order().min(data.order());
    let g = g.truncate(n);
    let l1 = data.lambda1();
    let l2 = data.lambda2.clone();
    let eps = Coeff::int(data.eps as i64);
    let mut f = Series::zero(n);
    let mut obs = Obstructions::default();
    let shift = data.k * data.q;
    let shift_b = data.k * data.p;
    for d in 0..=n {
        let res = (&g - &data.apply(&f)).homogeneous(d);
        let mut touched = false;
        for a in (0..=d).rev() {
            let e = Exp::new(a, d - a);
            let Some(l) = data.resonance(&e) else { continue };
            let c = res.coeff(e.a, e.b);
            if l <= data.k {
                obs.entries.push((e, c));
            } else if !c.is_zero() {
                let div = Coeff::int(((l - data.k) * data.q) as i64);
                f.add_term(Exp::new(e.a - shift, e.b - shift_b), &c / &div);
                touched = true;
            }
        }
        let res = if touched { (&g - &data.apply(&f)).homogeneous(d) } else { res };
        for (e, c) in res.terms() {
            if data.resonance(e).is_some() {
                continue;
            }
            let div = &(&l1 * &Coeff::int(e.a as i64)) + &(&l2 * &(&Coeff::int(e.b as i64) + &eps));
            divisor_check(&div, e, 0.0)?;
            f.add_term(*e, c / &div);
        }
    }
    Ok((f, obs))
}

/// Which normalized operator a log-class decomposition refers to.
#[derive(Clone, Debug)]
pub enum LogMode {
    QuasiResonant(DiagonalData),
    Resonant(ResonantData),
}

/// F = F̂ + log_y·log y + polar/u^k + α K where K is the log-class kernel direction.
#[derive(Clone, Debug)]
pub struct LogDecomposition {
    pub fhat: Series,
    pub alpha: Coeff,
    pub log_y: Coeff,
    pub polar: Coeff,
    pub g: Series,
}

fn laurent_series(a: &Series, n: u32, m: u32, tol: f64) -> Option<Series> {
    a.chop(tol).unshift(n, m)
}

/// Splits F in the log class against X: quasi-resonant K = log x − λ log y,
/// resonant K = −μ log x + (1 + μλ1)/λ2 log y + 1/(kq u^k).
pub fn decompose_logclass(f: &LogLaurent, mode: &LogMode, tol: f64) -> Result<LogDecomposition, Error> {
    let x = match mode {
        LogMode::QuasiResonant(d) => d.field(),
        LogMode::Resonant(d) => d.field(d.order()),
    };
    let ord = f.order().min(x.order());
    let gl = lie_derivative_loglaurent(&x.truncate(ord), f)?;
    let g = laurent_series(&gl.a, gl.n, gl.m, tol)
        .ok_or_else(|| Error::Precondition("X·F is not a power series at this order".into()))?;
    let g0 = g.constant_term();
    match mode {
        LogMode::QuasiResonant(d) => {
            let lam = &d.l1 / &d.l2;
            let alpha = f.alpha.clone();
            let log_y = &f.beta + &(&lam * &alpha);
            let fhat = laurent_series(&f.a, f.n, f.m, tol)
                .ok_or_else(|| Error::Inconsistent("polar part of A does not cancel".into()))?;
            if !(&log_y * &d.l2).approx_eq(&g0, tol) {
                return Err(Error::Inconsistent("log y coefficient disagrees with G(0,0)/λ2".into()));
            }
            Ok(LogDecomposition { fhat, alpha, log_y, polar: Coeff::zero(), g })
        }
        LogMode::Resonant(d) => {
            let (kq, l1) = (Coeff::int((d.k * d.q) as i64), d.lambda1());
            let ka = d.mu.neg_ref();
            let kb = &(&Coeff::one() + &(&d.mu * &l1)) / &d.lambda2;
            let alpha = if !ka.approx_zero(tol) {
                &f.alpha / &ka
            } else if f.alpha.approx_zero(tol) {
                &f.beta / &kb
            } else {
                return Err(Error::Inconsistent("log x coefficient with μ = 0".into()));
            };
            if !(&alpha * &kb).approx_eq(&f.beta, tol) {
                return Err(Error::Inconsistent("log coefficients are not proportional to the kernel direction".into()));
            }
            let polar = (&g0 / &kq).neg_ref();
            // A/(x^N y^M) − (α/(kq) + polar) u^{-k}
            let kappa = (&(&alpha / &kq) + &polar).neg_ref();
            let (ua, ub) = (d.k * d.q, d.k * d.p);
            let pole = LogLaurent::new(
                Series::constant(kappa, f.order()),
                ua,
                ub,
                Coeff::zero(),
                Coeff::zero(),
            );
            let rest = LogLaurent::new(f.a.clone(), f.n, f.m, Coeff::zero(), Coeff::zero()).add(&pole);
            let fhat = laurent_series(&rest.a, rest.n, rest.m, tol)
                .ok_or_else(|| Error::Inconsistent("polar part does not reduce to the u^-k pattern".into()))?;
            Ok(LogDecomposition { fhat, alpha, log_y: Coeff::zero(), polar, g })
        }
    }
}

fn laurent_terms(w: &RationalSeries, tol: f64) -> Result<(BTreeMap<(i64, i64), Coeff>, i64), Error> {
    let w = w.normalized();
    let (i, j, unit) = w
        .monomial_split()
        .ok_or_else(|| Error::Degenerate("residue along a non-axis divisor".into()))?;
    let s = (&w.num * &unit.invert_unit()?).chop(tol);
    let mut out = BTreeMap::new();
    for (e, c) in s.terms() {
        out.insert((e.a as i64 - i as i64, e.b as i64 - j as i64), c.clone());
    }
    Ok((out, s.order() as i64 - i as i64 - j as i64))
}

/// Primitive A/(x^N y^M) + α log x + β log y of a closed form with poles on the axes.
pub fn integrate_closed_form(w: &OneForm, tol: f64) -> Result<LogLaurent, Error> {
    let dw = d_one_form(w);
    if !dw.num.chop(tol).is_zero() {
        return Err(Error::Precondition("the form is not closed".into()));
    }
    let (px, nx) = laurent_terms(&w.wx, tol)?;
    let (py, ny) = laurent_terms(&w.wy, tol)?;
    let top = nx.min(ny) + 1;
    let mode = px.values().chain(py.values()).next().cloned().unwrap_or_else(Coeff::zero);
    let mut alpha = Coeff::zero().like(&mode);
    let mut beta = Coeff::zero().like(&mode);
    let mut terms: BTreeMap<(i64, i64), Coeff> = BTreeMap::new();
    for (&(i, j), c) in &px {
        if i == -1 {
            if j != 0 {
                return Err(Error::Inconsistent("x^-1 y^j dx term with j ≠ 0 in a closed form".into()));
            }
            alpha = c.clone();
        } else if i + j < top {
            terms.insert((i + 1, j), c / &Coeff::int(i + 1));
        }
    }
    for (&(i, j), c) in &py {
        if i != 0 {
            continue;
        }
        if j == -1 {
            beta = c.clone();
        } else if j < top {
            terms.insert((0, j + 1), c / &Coeff::int(j + 1));
        }
    }
    let nn = terms.keys().map(|k| -k.0).max().unwrap_or(0).max(0);
    let mm = terms.keys().map(|k| -k.1).max().unwrap_or(0).max(0);
    let order = (top + nn + mm).max(0) as u32;
    let a = Series::from_terms(
        order,
        terms.into_iter().filter(|((i, j), _)| i + j <= top).map(|((i, j), c)| (((i + nn) as u32, (j + mm) as u32), c)),
    );
    Ok(LogLaurent::new(a, nn as u32, mm as u32, alpha, beta).reduced())
}
