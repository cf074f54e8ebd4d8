//! Formal changes of coordinates and their action on vector fields.

mod rectify;

pub use rectify::{flow_box, normalize_nonisolated, rectify, NonisolatedNormalForm};

use crate::fields::{flow_map, VectorField};
use crate::series::{Coeff, RationalSeries, Series};
use crate::Error;

/// (x, y) ↦ (mx(x, y), my(x, y)), fixing the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct FormalMap {
    pub mx: Series,
    pub my: Series,
}

impl FormalMap {
    /// No checks; used for intermediate results.
    pub fn raw(mx: Series, my: Series) -> FormalMap {
        FormalMap { mx, my }
    }

    pub fn new(mx: Series, my: Series) -> Result<FormalMap, Error> {
        let m = FormalMap { mx, my };
        if !m.mx.constant_term().is_zero() || !m.my.constant_term().is_zero() {
            return Err(Error::Precondition("map must fix the origin".into()));
        }
        if m.det_at_origin().is_zero() {
            return Err(Error::Degenerate("linear part is not invertible".into()));
        }
        Ok(m)
    }

    pub fn identity(order: u32) -> FormalMap {
        FormalMap { mx: Series::x(order), my: Series::y(order) }
    }

    /// (a x + b y, c x + d y).
    pub fn linear(a: &Coeff, b: &Coeff, c: &Coeff, d: &Coeff, order: u32) -> Result<FormalMap, Error> {
        let mx = &Series::x(order).scale(a) + &Series::y(order).scale(b);
        let my = &Series::x(order).scale(c) + &Series::y(order).scale(d);
        FormalMap::new(mx, my)
    }

    pub fn diagonal(a: &Coeff, d: &Coeff, order: u32) -> Result<FormalMap, Error> {
        let z = Coeff::zero().like(a);
        FormalMap::linear(a, &z, &z, d, order)
    }

    pub fn order(&self) -> u32 {
        self.mx.order().min(self.my.order())
    }

    pub fn is_exact(&self) -> bool {
        self.mx.is_exact() && self.my.is_exact()
    }

    pub fn is_linear(&self) -> bool {
        self.mx.is_polynomial_in(1) && self.my.is_polynomial_in(1)
    }

    pub fn is_identity(&self) -> bool {
        self.mx == Series::x(self.mx.order()) && self.my == Series::y(self.my.order())
    }

    pub fn linear_part(&self) -> [[Coeff; 2]; 2] {
        [[self.mx.coeff(1, 0), self.mx.coeff(0, 1)], [self.my.coeff(1, 0), self.my.coeff(0, 1)]]
    }

    pub fn det_at_origin(&self) -> Coeff {
        let l = self.linear_part();
        &(&l[0][0] * &l[1][1]) - &(&l[0][1] * &l[1][0])
    }

    /// Jacobian matrix [[∂x mx, ∂y mx], [∂x my, ∂y my]].
    pub fn jacobian(&self) -> [[Series; 2]; 2] {
        let n = self.order();
        let fix = |s: Series| if self.is_linear() { s.with_order(n) } else { s };
        [[fix(self.mx.dx()), fix(self.mx.dy())], [fix(self.my.dx()), fix(self.my.dy())]]
    }

    /// F∘self.
    pub fn apply(&self, f: &Series) -> Result<Series, Error> {
        f.substitute(&self.mx, &self.my)
    }

    pub fn apply_rational(&self, f: &RationalSeries) -> Result<RationalSeries, Error> {
        Ok(RationalSeries { num: self.apply(&f.num)?, den: self.apply(&f.den)? })
    }

    /// self∘inner. When inner moves the origin to p, self is re-expanded at p
    /// first, which is exact for the polynomial truncations held here.
    pub fn compose(&self, inner: &FormalMap) -> Result<FormalMap, Error> {
        let (px, py) = (inner.mx.constant_term(), inner.my.constant_term());
        if px.is_zero() && py.is_zero() {
            return Ok(FormalMap { mx: inner.apply(&self.mx)?, my: inner.apply(&self.my)? });
        }
        let n = inner.order();
        let centred = FormalMap {
            mx: &inner.mx - &Series::constant(px.clone(), n),
            my: &inner.my - &Series::constant(py.clone(), n),
        };
        let moved = FormalMap { mx: self.mx.translate(&px, &py), my: self.my.translate(&px, &py) };
        moved.compose(&centred)
    }

    pub fn truncate(&self, order: u32) -> FormalMap {
        FormalMap { mx: self.mx.truncate(order), my: self.my.truncate(order) }
    }

    pub fn to_float(&self) -> FormalMap {
        FormalMap { mx: self.mx.to_float(), my: self.my.to_float() }
    }

    /// Largest coefficient of self − other.
    pub fn residual(&self, other: &FormalMap) -> f64 {
        (&self.mx - &other.mx).max_abs().max((&self.my - &other.my).max_abs())
    }
}

/// φ*W = (Dφ)⁻¹ · (W∘φ).
pub fn pullback(phi: &FormalMap, w: &VectorField) -> Result<VectorField, Error> {
    if phi.det_at_origin().is_zero() {
        return Err(Error::Degenerate("linear part is not invertible".into()));
    }
    let j = phi.jacobian();
    let detj = &(&j[0][0] * &j[1][1]) - &(&j[0][1] * &j[1][0]);
    if let Ok((a, b)) = w.series() {
        let wa = phi.apply(&a)?;
        let wb = phi.apply(&b)?;
        let inv = detj.invert_unit()?;
        let rx = &(&(&j[1][1] * &wa) - &(&j[0][1] * &wb)) * &inv;
        let ry = &(&(&j[0][0] * &wb) - &(&j[1][0] * &wa)) * &inv;
        return Ok(VectorField::new(rx, ry));
    }
    let wa = phi.apply_rational(&w.cx)?;
    let wb = phi.apply_rational(&w.cy)?;
    let d = RationalSeries::from_series(detj);
    let m = |s: &Series| RationalSeries::from_series(s.clone());
    let rx = m(&j[1][1]).mul(&wa).sub(&m(&j[0][1]).mul(&wb)).div(&d)?;
    let ry = m(&j[0][0]).mul(&wb).sub(&m(&j[1][0]).mul(&wa)).div(&d)?;
    Ok(VectorField::rational(rx, ry))
}

/// Compositional inverse by the fixed point ψ = A⁻¹(id − h∘ψ).
pub fn invert_map(phi: &FormalMap) -> Result<FormalMap, Error> {
    let n = phi.order();
    let l = phi.linear_part();
    let det = phi.det_at_origin();
    let dinv = det.inv().filter(|_| !det.is_zero()).ok_or_else(|| Error::Degenerate("linear part is not invertible".into()))?;
    // A⁻¹ = adj(A)/det
    let ai = [
        [&l[1][1] * &dinv, -(&l[0][1] * &dinv)],
        [-(&l[1][0] * &dinv), &l[0][0] * &dinv],
    ];
    let lin_x = &Series::x(n).scale(&l[0][0]) + &Series::y(n).scale(&l[0][1]);
    let lin_y = &Series::x(n).scale(&l[1][0]) + &Series::y(n).scale(&l[1][1]);
    let hx = &phi.mx.truncate(n) - &lin_x;
    let hy = &phi.my.truncate(n) - &lin_y;
    let apply_ai = |u: &Series, v: &Series| -> (Series, Series) {
        (&u.scale(&ai[0][0]) + &v.scale(&ai[0][1]), &u.scale(&ai[1][0]) + &v.scale(&ai[1][1]))
    };
    let (mut px, mut py) = apply_ai(&Series::x(n), &Series::y(n));
    for _ in 1..n.max(1) {
        let u = &Series::x(n) - &hx.substitute(&px, &py)?;
        let v = &Series::y(n) - &hy.substitute(&px, &py)?;
        let (nx, ny) = apply_ai(&u, &v);
        if nx == px && ny == py {
            break;
        }
        px = nx;
        py = ny;
    }
    Ok(FormalMap { mx: px.with_order(n), my: py.with_order(n) })
}

/// Tangential change 𝒯 = Φ_W^T and the field W/(1 + W·T) it should produce.
pub fn tangential(w: &VectorField, t: &Series) -> Result<(FormalMap, VectorField), Error> {
    if !t.constant_term().is_zero() {
        return Err(Error::Precondition("T(0,0) must vanish".into()));
    }
    let map = flow_map(w, t)?;
    let wt = w.apply_series(t)?;
    let factor = (&Series::one(wt.order()) + &wt).invert_unit()?;
    Ok((map, w.mul_series(&factor)))
}

/// 𝒯*Y = e^{δT}(Y − (Y·T) 𝒯*Z) for a pair with [Z, Y] = δY.
pub fn tangential_partner(z: &VectorField, y: &VectorField, delta: &Coeff, t: &Series) -> Result<VectorField, Error> {
    let (_, tz) = tangential(z, t)?;
    let yt = y.apply_series(t)?;
    let e = t.scale(delta).exp()?;
    let inner = y.sub(&tz.mul_series(&yt));
    Ok(inner.mul_series(&e).to_holomorphic()?)
}

#[derive(Clone, Debug)]
pub struct TransversalPrediction {
    pub map: FormalMap,
    pub z: VectorField,
    pub y: VectorField,
}

/// Transversal change 𝒩 = Φ_Y^N for [Z, Y] = D·Y with Y·D = 0, with the predicted pullbacks.
pub fn transversal(z: &VectorField, y: &VectorField, d: &Series, n: &Series, tol: f64) -> Result<TransversalPrediction, Error> {
    if !n.constant_term().is_zero() {
        return Err(Error::Precondition("N(0,0) must vanish".into()));
    }
    let br = z.bracket(y);
    let dy = y.mul_series(d);
    if br.residual(&dy) > tol {
        return Err(Error::Precondition("[Z, Y] = D·Y fails".into()));
    }
    if y.apply_series(d)?.max_abs() > tol {
        return Err(Error::Precondition("Y·D must vanish".into()));
    }
    let map = flow_map(y, n)?;
    let yn = y.apply_series(n)?;
    let py = y.mul_series(&(&Series::one(yn.order()) + &yn).invert_unit()?);
    let s = &z.apply_series(n)? + &(d * n);
    let pz = z.sub(&py.mul_series(&s));
    Ok(TransversalPrediction { map, z: pz.to_holomorphic()?, y: py.to_holomorphic()? })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(order: u32, t: &[((u32, u32), i64)]) -> Series {
        Series::from_terms(order, t.iter().map(|&(e, c)| (e, Coeff::int(c))))
    }

    #[test]
    fn identity_and_scaling() {
        let n = 6;
        let w = VectorField::new(s(n, &[((1, 0), 2), ((1, 1), 3)]), s(n, &[((0, 1), -1), ((3, 0), 1)]));
        let p = pullback(&FormalMap::identity(n), &w).unwrap();
        assert!(p.eq_fields(&w));
        let z0 = VectorField::diagonal(&Coeff::int(-3), &Coeff::int(5), n);
        let d = FormalMap::diagonal(&Coeff::int(2), &Coeff::ratio(-1, 3), n).unwrap();
        let p = pullback(&d, &z0).unwrap();
        assert!(p.eq_fields(&z0));
        assert_eq!(p.order(), n);
    }

    #[test]
    fn inverse_of_simple_map() {
        let n = 6;
        let phi = FormalMap::new(s(n, &[((1, 0), 2)]), s(n, &[((0, 1), 1), ((2, 0), 1)])).unwrap();
        let inv = invert_map(&phi).unwrap();
        assert_eq!(inv.mx, Series::x(n).scale(&Coeff::ratio(1, 2)));
        assert_eq!(inv.my, &Series::y(n) - &Series::monomial(Coeff::ratio(1, 4), 2, 0, n));
        assert!(invert_map(&FormalMap::identity(n)).unwrap().is_identity());
        assert!(FormalMap::new(Series::x(n), Series::x(n)).is_err());
    }

    #[test]
    fn tangential_examples() {
        let n = 6;
        let (m, pred) = tangential(&VectorField::d_dy(n), &Series::x(n)).unwrap();
        assert_eq!(m.mx, Series::x(n));
        assert_eq!(m.my, &Series::y(n) + &Series::x(n));
        assert!(pred.eq_fields(&VectorField::d_dy(n)));
        assert!(pullback(&m, &VectorField::d_dy(n)).unwrap().eq_fields(&VectorField::d_dy(n)));
        let w = VectorField::diagonal(&Coeff::int(1), &Coeff::int(-2), n);
        let (m, pred) = tangential(&w, &Series::zero(n)).unwrap();
        assert!(m.is_identity());
        assert!(pred.eq_fields(&w));
    }

    #[test]
    fn transversal_example() {
        let n = 6;
        let z0 = VectorField::diagonal(&Coeff::int(-1), &Coeff::int(2), n);
        let y = VectorField::new(Series::zero(n), Series::y(n));
        let pred = transversal(&z0, &y, &Series::zero(n), &Series::x(n), 0.0).unwrap();
        assert!(pred.y.eq_fields(&y));
        let direct = pullback(&pred.map, &y).unwrap();
        assert!(direct.eq_fields(&pred.y));
        let direct = pullback(&pred.map, &z0).unwrap();
        assert!(direct.eq_fields(&pred.z));
        let bad = transversal(&z0, &VectorField::new(Series::x(n), Series::one(n)), &Series::zero(n), &Series::x(n), 0.0);
        assert!(bad.is_err());
    }
}
