//! x^n y^m (Qu)^γ · body, with n, m possibly negative.

use super::coeff::Coeff;
use super::poly::Series;
use crate::Error;

#[derive(Clone, Debug, PartialEq)]
pub struct DressedSeries {
    pub n: i64,
    pub m: i64,
    pub gamma: Coeff,
    pub qu: Series,
    pub body: Series,
}

impl DressedSeries {
    pub fn new(n: i64, m: i64, gamma: Coeff, qu: Series, body: Series) -> Result<DressedSeries, Error> {
        if !qu.constant_term().is_one() {
            return Err(Error::Precondition("dressing factor must equal 1 at the origin".into()));
        }
        Ok(DressedSeries { n, m, gamma, qu, body })
    }

    pub fn plain(body: Series) -> DressedSeries {
        let qu = Series::one(body.order());
        DressedSeries { n: 0, m: 0, gamma: Coeff::zero(), qu, body }
    }

    pub fn order(&self) -> u32 {
        self.body.order().min(self.qu.order())
    }

    /// The monomial exponents and (Qu)^γ · body as a series.
    pub fn expand(&self) -> Result<((i64, i64), Series), Error> {
        let f = self.qu.powc(&self.gamma)?;
        Ok(((self.n, self.m), &f * &self.body))
    }

    /// Same dressing, different body.
    pub fn with_body(&self, body: Series) -> DressedSeries {
        DressedSeries { n: self.n, m: self.m, gamma: self.gamma.clone(), qu: self.qu.clone(), body }
    }

    pub fn scale(&self, c: &Coeff) -> DressedSeries {
        self.with_body(self.body.scale(c))
    }

    /// Logarithmic derivative of the dressing factor along (cx, cy):
    /// n cx/x + m cy/y + γ (W·Qu)/Qu.
    pub fn dressing_log_derivative(&self, cx: &Series, cy: &Series) -> Result<Series, Error> {
        let mut h = Series::zero(cx.order().min(cy.order()));
        if self.n != 0 {
            let q = cx
                .unshift(1, 0)
                .ok_or_else(|| Error::Degenerate("∂x component not divisible by x".into()))?;
            h = &h + &q.scale(&Coeff::int(self.n));
        }
        if self.m != 0 {
            let q = cy
                .unshift(0, 1)
                .ok_or_else(|| Error::Degenerate("∂y component not divisible by y".into()))?;
            h = &h + &q.scale(&Coeff::int(self.m));
        }
        if !self.gamma.is_zero() {
            let wq = &(cx * &self.qu.dx()) + &(cy * &self.qu.dy());
            h = &h + &(&wq * &self.qu.invert_unit()?).scale(&self.gamma);
        }
        Ok(h)
    }

    /// Lie derivative along the holomorphic field cx ∂x + cy ∂y; the dressing is preserved.
    pub fn derive(&self, cx: &Series, cy: &Series) -> Result<DressedSeries, Error> {
        let h = self.dressing_log_derivative(cx, cy)?;
        let wb = &(cx * &self.body.dx()) + &(cy * &self.body.dy());
        Ok(self.with_body(&(&h * &self.body) + &wb))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_exponents() {
        let body = Series::from_terms(4, [((1, 0), Coeff::int(2)), ((0, 2), Coeff::int(1))]);
        let d = DressedSeries::new(1, 2, Coeff::zero(), Series::one(4), body.clone()).unwrap();
        assert_eq!(d.expand().unwrap(), ((1, 2), body.clone()));
        let qu = Series::from_terms(4, [((0, 0), Coeff::one()), ((1, 1), Coeff::one())]);
        let d = DressedSeries::new(0, 0, Coeff::one(), qu.clone(), body.clone()).unwrap();
        assert_eq!(d.expand().unwrap().1, &qu * &body);
    }

    #[test]
    fn square_root_matches_binomial_series() {
        // u = x y, Qu = 1 + u, four u-degrees
        let order = 8;
        let qu = Series::from_terms(order, [((0, 0), Coeff::one()), ((1, 1), Coeff::one())]);
        let d = DressedSeries::new(0, 0, Coeff::ratio(1, 2), qu, Series::one(order)).unwrap();
        let (_, s) = d.expand().unwrap();
        // binom(1/2, j) = prod_{i<j} (1/2 - i) / j!
        let mut c = Coeff::one();
        for j in 0..=4u32 {
            assert_eq!(s.coeff(j, j), c);
            c = &(&c * &(&Coeff::ratio(1, 2) - &Coeff::int(j as i64))) * &Coeff::ratio(1, j as i64 + 1);
        }
        assert!(DressedSeries::new(0, 0, Coeff::one(), Series::x(3), Series::one(3)).is_err());
    }
}
