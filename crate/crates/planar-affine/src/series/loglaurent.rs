//! A/(x^N y^M) + α log x + β log y.

use std::fmt;

use super::coeff::Coeff;
use super::poly::Series;
use crate::Error;

#[derive(Clone, Debug, PartialEq)]
pub struct LogLaurent {
    pub a: Series,
    pub n: u32,
    pub m: u32,
    pub alpha: Coeff,
    pub beta: Coeff,
}

impl LogLaurent {
    pub fn new(a: Series, n: u32, m: u32, alpha: Coeff, beta: Coeff) -> LogLaurent {
        LogLaurent { a, n, m, alpha, beta }
    }

    pub fn from_series(a: Series) -> LogLaurent {
        LogLaurent { a, n: 0, m: 0, alpha: Coeff::zero(), beta: Coeff::zero() }
    }

    pub fn order(&self) -> u32 {
        self.a.order()
    }

    /// Cancels monomials shared between A and the pole.
    pub fn reduced(&self) -> LogLaurent {
        let (ca, cb) = self.a.monomial_content();
        let (ca, cb) = if self.a.is_zero() { (self.n, self.m) } else { (ca.min(self.n), cb.min(self.m)) };
        let a = self.a.unshift(ca, cb).unwrap_or_else(|| self.a.clone());
        LogLaurent { a, n: self.n - ca, m: self.m - cb, alpha: self.alpha.clone(), beta: self.beta.clone() }
    }

    /// Plain series when there is no pole and no logarithm.
    pub fn as_series(&self) -> Option<Series> {
        let r = self.reduced();
        if r.n == 0 && r.m == 0 && r.alpha.is_zero() && r.beta.is_zero() {
            Some(r.a)
        } else {
            None
        }
    }

    pub fn add(&self, o: &LogLaurent) -> LogLaurent {
        let (n, m) = (self.n.max(o.n), self.m.max(o.m));
        let a = &self.a.shift(n - self.n, m - self.m) + &o.a.shift(n - o.n, m - o.m);
        LogLaurent { a, n, m, alpha: &self.alpha + &o.alpha, beta: &self.beta + &o.beta }
    }

    pub fn scale(&self, c: &Coeff) -> LogLaurent {
        LogLaurent { a: self.a.scale(c), n: self.n, m: self.m, alpha: &self.alpha * c, beta: &self.beta * c }
    }

    /// Lie derivative along cx ∂x + cy ∂y; the result carries no logarithm.
    pub fn derive(&self, cx: &Series, cy: &Series) -> LogLaurent {
        // over x^{N+1} y^{M+1}: xy(W·A) − N y cx A − M x cy A + (α y cx + β x cy) x^N y^M
        let wa = &(cx * &self.a.dx()) + &(cy * &self.a.dy());
        let mut num = wa.shift(1, 1);
        if self.n > 0 {
            num = &num - &(&cx.shift(0, 1) * &self.a).scale(&Coeff::int(self.n as i64));
        }
        if self.m > 0 {
            num = &num - &(&cy.shift(1, 0) * &self.a).scale(&Coeff::int(self.m as i64));
        }
        let logs = &cx.shift(0, 1).scale(&self.alpha) + &cy.shift(1, 0).scale(&self.beta);
        num = &num + &logs.shift(self.n, self.m);
        LogLaurent::new(num, self.n + 1, self.m + 1, Coeff::zero(), Coeff::zero()).reduced()
    }

    pub fn dx(&self) -> Result<LogLaurent, Error> {
        Ok(self.derive(&Series::one(self.order()), &Series::zero(self.order())))
    }

    pub fn dy(&self) -> Result<LogLaurent, Error> {
        Ok(self.derive(&Series::zero(self.order()), &Series::one(self.order())))
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.alpha.is_zero() && self.beta.is_zero()
    }
}

impl fmt::Display for LogLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})/(x^{}*y^{}) + ({})*log(x) + ({})*log(y)", self.a, self.n, self.m, self.alpha, self.beta)
    }
}
