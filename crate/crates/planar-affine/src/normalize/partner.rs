//! Transverse partners of normal forms and the dressed bracket check.

use super::lattice::lattice_coords;
use super::{normal_x0, poly_in_u, small};
use crate::fields::VectorField;
use crate::series::{Coeff, DressedSeries, Series};
use crate::Error;

/// Normal form data a partner is built against.
#[derive(Clone, Debug, PartialEq)]
pub enum NormalData {
    /// Z0 = λ1 x∂x + λ2 y∂y.
    Diagonal { l1: Coeff, l2: Coeff },
    /// Z0 = (Q∘u) X0; `q_poly` is forced by the target when δ ≠ 0.
    Resonant { p: u32, q: u32, k: u32, mu: Coeff, lambda2: Coeff, q_poly: Option<Vec<Coeff>> },
}

impl NormalData {
    pub fn eigenvalues(&self) -> (Coeff, Coeff) {
        match self {
            NormalData::Diagonal { l1, l2 } => (l1.clone(), l2.clone()),
            NormalData::Resonant { p, q, lambda2, .. } => {
                ((lambda2 * &Coeff::ratio(-(*p as i64), *q as i64)).like(lambda2), lambda2.clone())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PartnerTarget {
    Delta(Coeff),
    Exponents(i64, i64),
}

/// Ŷ = x^n y^m (Q∘u)^γ (c Z0 + d W0) in the resonant case, x^n y^m (d x∂x + c y∂y) otherwise.
#[derive(Clone, Debug)]
pub struct Partner {
    pub n: i64,
    pub m: i64,
    pub delta: Coeff,
    pub gamma: Coeff,
    pub q_poly: Vec<Coeff>,
    pub c: Coeff,
    pub d: Coeff,
    pub z0: VectorField,
    pub yx: DressedSeries,
    pub yy: DressedSeries,
}

impl Partner {
    /// Largest coefficient of [Z0, Ŷ] − δŶ, computed on the dressed bodies.
    pub fn bracket_residual(&self) -> Result<f64, Error> {
        let (rx, ry) = dressed_bracket_residual(&self.z0, &(self.yx.clone(), self.yy.clone()), &self.delta)?;
        Ok(rx.max_abs().max(ry.max_abs()))
    }
}

pub fn transverse_partner(
    data: &NormalData,
    target: &PartnerTarget,
    c: &Coeff,
    d: &Coeff,
    order: u32,
    tol: f64,
) -> Result<Partner, Error> {
    let (l1, l2) = data.eigenvalues();
    let (n, m) = match target {
        PartnerTarget::Exponents(n, m) => (*n, *m),
        PartnerTarget::Delta(delta) => lattice_coords(&l1, &l2, delta, tol)
            .ok_or_else(|| Error::Unsolvable(format!("δ = {delta} is not of the form nλ1 + mλ2")))?,
    };
    let delta = &(&l1 * &Coeff::int(n)) + &(&l2 * &Coeff::int(m));
    if let PartnerTarget::Delta(t) = target {
        if !t.approx_eq(&delta, tol) {
            return Err(Error::Unsolvable(format!("δ = {t} is not of the form nλ1 + mλ2")));
        }
    }
    let w0 = VectorField::diagonal(&l1, &l2, order);
    match data {
        NormalData::Diagonal { .. } => {
            let one = Series::one(order);
            let zero = Coeff::zero().like(&l2);
            let yx = DressedSeries::new(n, m, zero.clone(), one.clone(), Series::x(order).scale(d))?;
            let yy = DressedSeries::new(n, m, zero.clone(), one, Series::y(order).scale(c))?;
            Ok(Partner { n, m, delta, gamma: zero, q_poly: vec![Coeff::one()], c: c.clone(), d: d.clone(), z0: w0, yx, yy })
        }
        NormalData::Resonant { p, q, k, mu, lambda2, q_poly } => {
            let (p, q, k) = (*p, *q, *k);
            let (q_poly, gamma) = if small(&delta, tol) {
                if (n, m) != (0, 0) {
                    return Err(Error::Inconsistent("δ = 0 forces (n, m) = (0, 0)".into()));
                }
                (q_poly.clone().unwrap_or_else(|| vec![Coeff::one()]), Coeff::zero().like(lambda2))
            } else {
                // (n, m) ∉ (q, p)ℤ holds automatically: those exponents give δ = 0
                // Q = 1 − (n/δ + μ) u^k and γ = −(δμ + n)/(kq)
                let nc = Coeff::int(n);
                let mut forced = vec![Coeff::zero().like(lambda2); k as usize + 1];
                forced[0] = Coeff::one().like(lambda2);
                forced[k as usize] = (&(&nc / &delta) + mu).neg_ref();
                if let Some(given) = q_poly {
                    let same = (0..=k as usize).all(|j| {
                        let g = given.get(j).cloned().unwrap_or_else(Coeff::zero);
                        g.approx_eq(&forced[j], tol)
                    });
                    if !same {
                        return Err(Error::Inconsistent("Q differs from the value forced by (n, δ)".into()));
                    }
                }
                let gamma = (&(&(&delta * mu) + &nc) / &Coeff::int((k * q) as i64)).neg_ref();
                (forced, gamma)
            };
            let qu = poly_in_u(&q_poly, p, q, order);
            let z0 = normal_x0(p, q, k, mu, lambda2, order).mul_series(&qu).to_holomorphic()?;
            let (yx, yy) = dressed_components(&z0, &w0, n, m, &gamma, &qu, c, d)?;
            Ok(Partner { n, m, delta, gamma, q_poly, c: c.clone(), d: d.clone(), z0, yx, yy })
        }
    }
}

/// x^n y^m (Qu)^γ (c Z0 + d W0), componentwise.
#[allow(clippy::too_many_arguments)]
pub fn dressed_components(
    z0: &VectorField,
    w0: &VectorField,
    n: i64,
    m: i64,
    gamma: &Coeff,
    qu: &Series,
    c: &Coeff,
    d: &Coeff,
) -> Result<(DressedSeries, DressedSeries), Error> {
    let (zx, zy) = z0.series()?;
    let (wx, wy) = w0.series()?;
    let bx = &zx.scale(c) + &wx.scale(d);
    let by = &zy.scale(c) + &wy.scale(d);
    Ok((
        DressedSeries::new(n, m, gamma.clone(), qu.clone(), bx)?,
        DressedSeries::new(n, m, gamma.clone(), qu.clone(), by)?,
    ))
}

/// Bodies of [Z, Ŷ] − δŶ for Ŷ = D·(bx ∂x + by ∂y) with a common dressing D.
pub fn dressed_bracket_residual(z: &VectorField, y: &(DressedSeries, DressedSeries), delta: &Coeff) -> Result<(Series, Series), Error> {
    let (yx, yy) = y;
    if (yx.n, yx.m, &yx.gamma, &yx.qu) != (yy.n, yy.m, &yy.gamma, &yy.qu) {
        return Err(Error::Precondition("both components must carry the same dressing".into()));
    }
    let (cx, cy) = z.series()?;
    // [Z, D V]_i = Z·(D V_i) − D (V·Z_i)
    let comp = |yi: &DressedSeries, zi: &Series| -> Result<Series, Error> {
        let zd = yi.derive(&cx, &cy)?.body;
        let vz = &(&yx.body * &zi.dx()) + &(&yy.body * &zi.dy());
        Ok(&(&zd - &vz) - &yi.body.scale(delta))
    };
    Ok((comp(yx, &cx)?, comp(yy, &cy)?))
}

/// Largest coefficient of Y − Ŷ up to `order`, after clearing the monomial factor.
pub fn dressed_vs_field(model: &(DressedSeries, DressedSeries), field: &VectorField, order: u32) -> Result<f64, Error> {
    let (fx, fy) = field.series()?;
    let mut worst = 0.0f64;
    for (dm, f) in [(&model.0, fx), (&model.1, fy)] {
        let ((n, m), s) = dm.expand()?;
        let lhs = f.shift((-n).max(0) as u32, (-m).max(0) as u32);
        let rhs = s.shift(n.max(0) as u32, m.max(0) as u32);
        worst = worst.max((&lhs.truncate(order) - &rhs.truncate(order)).max_abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resonant(p: u32, q: u32, k: u32, mu: Coeff) -> NormalData {
        NormalData::Resonant { p, q, k, mu, lambda2: Coeff::one(), q_poly: None }
    }

    #[test]
    fn diagonal_delta_zero_is_commuting_family() {
        let data = NormalData::Diagonal { l1: Coeff::int(-1), l2: Coeff::gauss((0, 1), (1, 1)) };
        let pt = transverse_partner(&data, &PartnerTarget::Delta(Coeff::zero()), &Coeff::int(2), &Coeff::int(3), 8, 1e-10).unwrap();
        assert_eq!((pt.n, pt.m), (0, 0));
        assert_eq!(pt.yx.body, Series::x(8).scale(&Coeff::int(3)));
        assert_eq!(pt.yy.body, Series::y(8).scale(&Coeff::int(2)));
        assert_eq!(pt.bracket_residual().unwrap(), 0.0);
    }

    #[test]
    fn quasi_resonant_delta_recovers_exponents() {
        let l1 = Coeff::float(-std::f64::consts::SQRT_2);
        let l2 = Coeff::float(1.0);
        let delta = Coeff::float(1.0 - std::f64::consts::SQRT_2);
        let data = NormalData::Diagonal { l1, l2 };
        let pt = transverse_partner(&data, &PartnerTarget::Delta(delta), &Coeff::one(), &Coeff::one(), 8, 1e-10).unwrap();
        assert_eq!((pt.n, pt.m), (1, 1));
        assert!(pt.bracket_residual().unwrap() < 1e-12);
    }

    #[test]
    fn resonant_partner_bracket_is_exact() {
        // λ = −1/2, k = 1, μ = 0, (n, m) = (1, 1)
        let data = resonant(1, 2, 1, Coeff::zero());
        let pt = transverse_partner(&data, &PartnerTarget::Exponents(1, 1), &Coeff::int(2), &Coeff::ratio(1, 3), 10, 0.0).unwrap();
        assert_eq!(pt.delta, Coeff::ratio(1, 2));
        assert_eq!(pt.gamma, Coeff::ratio(-1, 2));
        assert_eq!(pt.q_poly, vec![Coeff::one(), Coeff::int(-2)]);
        let (rx, ry) = dressed_bracket_residual(&pt.z0, &(pt.yx.clone(), pt.yy.clone()), &pt.delta).unwrap();
        assert!(rx.is_zero() && ry.is_zero());
    }

    #[test]
    fn resonant_partner_rejects_excluded_exponents() {
        let data = resonant(1, 1, 1, Coeff::ratio(1, 2));
        // (1, 1) and (2, 2) lie in (q, p)ℤ and give δ = 0
        for e in [1, 2] {
            let err = transverse_partner(&data, &PartnerTarget::Exponents(e, e), &Coeff::one(), &Coeff::one(), 6, 0.0);
            assert!(matches!(err, Err(Error::Inconsistent(_))));
        }
        // a given Q that disagrees with the forced one
        let data = NormalData::Resonant {
            p: 1,
            q: 1,
            k: 1,
            mu: Coeff::ratio(1, 2),
            lambda2: Coeff::one(),
            q_poly: Some(vec![Coeff::one(), Coeff::int(7)]),
        };
        assert!(transverse_partner(&data, &PartnerTarget::Exponents(1, 0), &Coeff::one(), &Coeff::one(), 6, 0.0).is_err());
    }

    #[test]
    fn wrong_gamma_is_detected() {
        let data = resonant(1, 1, 1, Coeff::ratio(1, 2));
        let pt = transverse_partner(&data, &PartnerTarget::Exponents(1, 0), &Coeff::one(), &Coeff::one(), 8, 0.0).unwrap();
        assert_eq!(pt.gamma, Coeff::ratio(-1, 2));
        let bad = (pt.yx.clone(), pt.yy.clone());
        let bad = (
            DressedSeries { gamma: Coeff::ratio(1, 3), ..bad.0 },
            DressedSeries { gamma: Coeff::ratio(1, 3), ..bad.1 },
        );
        let (rx, ry) = dressed_bracket_residual(&pt.z0, &bad, &pt.delta).unwrap();
        assert!(!(rx.is_zero() && ry.is_zero()));
    }

    #[test]
    fn dressed_model_matches_its_expansion() {
        let data = resonant(1, 1, 1, Coeff::ratio(1, 2));
        let pt = transverse_partner(&data, &PartnerTarget::Exponents(1, 0), &Coeff::int(3), &Coeff::int(-1), 8, 0.0).unwrap();
        let ((n, m), sx) = pt.yx.expand().unwrap();
        let (_, sy) = pt.yy.expand().unwrap();
        assert_eq!((n, m), (1, 0));
        let field = VectorField::new(sx.shift(1, 0), sy.shift(1, 0));
        assert_eq!(dressed_vs_field(&(pt.yx, pt.yy), &field, 7).unwrap(), 0.0);
    }
}
