//! Quotients of series, compared by cross-multiplication.

use std::fmt;

use super::coeff::Coeff;
use super::poly::Series;
use crate::Error;

#[derive(Clone, Debug, PartialEq)]
pub struct RationalSeries {
    pub num: Series,
    pub den: Series,
}

impl RationalSeries {
    pub fn new(num: Series, den: Series) -> Result<RationalSeries, Error> {
        if den.is_zero() {
            return Err(Error::Degenerate("zero denominator".into()));
        }
        Ok(RationalSeries { num, den })
    }

    pub fn from_series(s: Series) -> RationalSeries {
        let one = Series::one(s.order());
        RationalSeries { num: s, den: one }
    }

    pub fn zero(order: u32) -> RationalSeries {
        RationalSeries::from_series(Series::zero(order))
    }

    pub fn constant(c: Coeff, order: u32) -> RationalSeries {
        RationalSeries::from_series(Series::constant(c, order))
    }

    pub fn order(&self) -> u32 {
        self.num.order().min(self.den.order())
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_exact(&self) -> bool {
        self.num.is_exact() && self.den.is_exact()
    }

    fn den_is_one(&self) -> bool {
        self.den.len() == 1 && self.den.constant_term().is_one()
    }

    /// Denominator is a unit at the origin.
    pub fn is_holomorphic(&self) -> bool {
        !self.den.constant_term().is_zero()
    }

    /// den = x^a y^b · unit, if it splits that way.
    pub fn monomial_split(&self) -> Option<(u32, u32, Series)> {
        let (a, b) = self.den.monomial_content();
        let unit = self.den.unshift(a, b)?;
        if unit.constant_term().is_zero() {
            None
        } else {
            Some((a, b, unit))
        }
    }

    /// The quotient as a plain series, when the denominator allows it.
    pub fn to_series(&self) -> Result<Series, Error> {
        if self.den_is_one() {
            return Ok(self.num.clone());
        }
        if self.is_holomorphic() {
            return Ok(&self.num * &self.den.invert_unit()?);
        }
        let (a, b, unit) = self
            .monomial_split()
            .ok_or_else(|| Error::Degenerate("denominator is not a monomial times a unit".into()))?;
        let q = &self.num * &unit.invert_unit()?;
        q.unshift(a, b)
            .ok_or_else(|| Error::Degenerate("quotient has a pole on an axis".into()))
    }

    /// Brings a monomial-times-unit denominator to a bare monomial and cancels common monomials.
    pub fn normalized(&self) -> RationalSeries {
        if self.den_is_one() {
            return self.clone();
        }
        if let Some((a, b, unit)) = self.monomial_split() {
            let num = match unit.invert_unit() {
                Ok(inv) => &self.num * &inv,
                Err(_) => return self.clone(),
            };
            let (ca, cb) = num.monomial_content();
            let (ca, cb) = (ca.min(a), cb.min(b));
            let num = num.unshift(ca, cb).unwrap_or(num);
            let den = Series::monomial(Coeff::one().like(&unit.constant_term()), a - ca, b - cb, num.order() + a + b);
            return RationalSeries { num, den };
        }
        self.clone()
    }

    pub fn add(&self, o: &RationalSeries) -> RationalSeries {
        if self.den == o.den {
            return RationalSeries { num: &self.num + &o.num, den: self.den.clone() };
        }
        RationalSeries { num: &self.num * &o.den + &o.num * &self.den, den: &self.den * &o.den }
    }

    pub fn sub(&self, o: &RationalSeries) -> RationalSeries {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> RationalSeries {
        RationalSeries { num: -&self.num, den: self.den.clone() }
    }

    pub fn mul(&self, o: &RationalSeries) -> RationalSeries {
        if self.den_is_one() && o.den_is_one() {
            return RationalSeries::from_series(&self.num * &o.num);
        }
        RationalSeries { num: &self.num * &o.num, den: &self.den * &o.den }
    }

    pub fn mul_series(&self, s: &Series) -> RationalSeries {
        RationalSeries { num: &self.num * s, den: self.den.clone() }
    }

    pub fn div(&self, o: &RationalSeries) -> Result<RationalSeries, Error> {
        if o.num.is_zero() {
            return Err(Error::Degenerate("division by zero".into()));
        }
        Ok(RationalSeries { num: &self.num * &o.den, den: &self.den * &o.num })
    }

    pub fn scale(&self, c: &Coeff) -> RationalSeries {
        RationalSeries { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn dx(&self) -> RationalSeries {
        if self.den_is_one() {
            return RationalSeries::from_series(self.num.dx());
        }
        RationalSeries {
            num: &self.num.dx() * &self.den - &self.num * &self.den.dx(),
            den: &self.den * &self.den,
        }
    }

    pub fn dy(&self) -> RationalSeries {
        if self.den_is_one() {
            return RationalSeries::from_series(self.num.dy());
        }
        RationalSeries {
            num: &self.num.dy() * &self.den - &self.num * &self.den.dy(),
            den: &self.den * &self.den,
        }
    }

    /// Cross-multiplied difference num·o.den − o.num·den.
    pub fn cross_diff(&self, o: &RationalSeries) -> Series {
        &self.num * &o.den - &o.num * &self.den
    }

    pub fn eq_cross(&self, o: &RationalSeries) -> bool {
        self.cross_diff(o).is_zero()
    }

    pub fn approx_eq_cross(&self, o: &RationalSeries, tol: f64) -> bool {
        self.cross_diff(o).max_abs() <= tol
    }

    pub fn truncate(&self, order: u32) -> RationalSeries {
        RationalSeries { num: self.num.truncate(order), den: self.den.truncate(order) }
    }

    pub fn to_float(&self) -> RationalSeries {
        RationalSeries { num: self.num.to_float(), den: self.den.to_float() }
    }
}

impl fmt::Display for RationalSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den_is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_denominators() {
        let n = 6;
        // (x^2 y + x^3) / (x (1 + y)) = x (y + x) / (1 + y)
        let num = Series::from_terms(n, [((2, 1), Coeff::one()), ((3, 0), Coeff::one())]);
        let den = Series::from_terms(n, [((1, 0), Coeff::one()), ((1, 1), Coeff::one())]);
        let r = RationalSeries::new(num, den).unwrap();
        let s = r.to_series().unwrap();
        let back = &s * &Series::from_terms(n, [((0, 0), Coeff::one()), ((0, 1), Coeff::one())]);
        assert!(back.truncate(4).eq_at_order(&Series::from_terms(4, [((1, 1), Coeff::one()), ((2, 0), Coeff::one())])));
        let pole = RationalSeries::new(Series::one(n), Series::x(n)).unwrap();
        assert!(pole.to_series().is_err());
    }

    #[test]
    fn cross_equality() {
        let n = 5;
        let a = RationalSeries::new(Series::x(n), Series::y(n)).unwrap();
        let b = RationalSeries::new(&Series::x(n) * &Series::x(n), &Series::x(n) * &Series::y(n)).unwrap();
        assert!(a.eq_cross(&b));
        assert!(!a.eq_cross(&RationalSeries::from_series(Series::x(n))));
    }
}
