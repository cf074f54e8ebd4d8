//! Flow-box charts at regular points and the normal form along a curve of zeros.

use super::{invert_map, pullback, FormalMap};
use crate::fields::{flow_map, linear_part, VectorField};
use crate::series::{Coeff, Series};
use crate::Error;

/// (t, z) ↦ Φ_X^t(z·v): pulls X back to ∂t.
pub fn flow_box(x: &VectorField, v: (&Coeff, &Coeff)) -> Result<FormalMap, Error> {
    let (a, b) = x.series()?;
    let n = x.order();
    let (sx, sy) = (Series::y(n).scale(v.0), Series::y(n).scale(v.1));
    let mut gx = Series::x(n);
    let mut gy = Series::y(n);
    let mut mx = Series::zero(n);
    let mut my = Series::zero(n);
    let mut tk = Series::one(n);
    let mut fact = Coeff::one();
    for k in 0..=n {
        if k > 0 {
            let nx = &(&a * &gx.dx()) + &(&b * &gx.dy());
            let ny = &(&a * &gy.dx()) + &(&b * &gy.dy());
            gx = nx;
            gy = ny;
            tk = &tk * &Series::x(n);
            fact = &fact * &Coeff::ratio(1, k as i64);
        }
        let cx = gx.substitute(&sx, &sy)?;
        let cy = gy.substitute(&sx, &sy)?;
        mx = &mx + &(&tk * &cx).scale(&fact);
        my = &my + &(&tk * &cy).scale(&fact);
    }
    Ok(FormalMap::raw(mx.with_order(n), my.with_order(n)))
}

/// Chart G (chart → original, coordinates centred at `base`) with G*Z = ∂t.
pub fn rectify(z: &VectorField, base: Option<(&Coeff, &Coeff)>) -> Result<FormalMap, Error> {
    let (mut a, mut b) = z.series()?;
    if let Some((px, py)) = base {
        a = a.translate(px, py);
        b = b.translate(px, py);
    }
    let (v1, v2) = (a.constant_term(), b.constant_term());
    if v1.is_zero() && v2.is_zero() {
        return Err(Error::Degenerate("field vanishes at the base point".into()));
    }
    let one = Coeff::one();
    let zero = Coeff::zero();
    // transversal along the axis maximizing |det(Z(p), axis)|
    let axis = if v1.abs() >= v2.abs() { (&zero, &one) } else { (&one, &zero) };
    flow_box(&VectorField::new(a, b), axis)
}

#[derive(Clone, Debug)]
pub struct NonisolatedNormalForm {
    pub chart: FormalMap,
    pub k: u32,
    pub mu: Coeff,
    pub lambda2: Coeff,
}

impl NonisolatedNormalForm {
    /// λ2 y (1 + μ x^k) ∂y.
    pub fn field(&self, order: u32) -> VectorField {
        let s = &Series::one(order) + &Series::monomial(self.mu.clone(), self.k, 0, order);
        VectorField::new(Series::zero(order), (&Series::y(order) * &s).scale(&self.lambda2))
    }
}

/// Chart ψ with ψ*Z = λ2 y (1 + μ x^k) ∂y for a field vanishing along a curve.
pub fn normalize_nonisolated(z: &VectorField, tol: f64) -> Result<NonisolatedNormalForm, Error> {
    let n = z.order();
    let l = linear_part(z)?;
    let tr = &l[0][0] + &l[1][1];
    let det = &(&l[0][0] * &l[1][1]) - &(&l[0][1] * &l[1][0]);
    if !det.approx_zero(tol) || tr.approx_zero(tol) {
        return Err(Error::Precondition("linear part must have rank one and nonzero trace".into()));
    }
    let zero = Coeff::zero().like(&tr);
    let (v0x, v0y) = crate::fields::classify_kernel_vec(&l, &zero);
    let (v1x, v1y) = crate::fields::classify_kernel_vec(&l, &tr);
    let p = FormalMap::linear(&v0x, &v1x, &v0y, &v1y, n)?;
    let zp = pullback(&p, z)?;
    let (f, g) = zp.series()?;
    let u = crate::fields::classify_solve_graph(&g, &tr)?;
    let on = f.substitute(&Series::x(f.order()), &u)?;
    if on.truncate(n.saturating_sub(1)).max_abs() > if z.is_exact() { 0.0 } else { tol } {
        return Err(Error::Degenerate("zero set is not a curve at this order".into()));
    }
    // straighten the curve of zeros to y = 0
    let phi1 = FormalMap::raw(Series::x(n), &Series::y(n) + &u.with_order(n));
    let z1 = pullback(&phi1, &zp)?;
    let (c1, d1) = z1.series()?;
    let c1 = c1.chop(tol);
    let d1 = d1.chop(tol);
    let x1 = VectorField::new(
        c1.unshift(0, 1).ok_or_else(|| Error::Degenerate("field does not vanish on the curve".into()))?,
        d1.unshift(0, 1).ok_or_else(|| Error::Degenerate("field does not vanish on the curve".into()))?,
    );
    // flow box of X1/λ2 with time along y
    let one = Coeff::one().like(&tr);
    let zc = Coeff::zero().like(&tr);
    let g_t = flow_box(&x1.scale(&tr.inv().unwrap()), (&one, &zc))?;
    let g = FormalMap::raw(
        g_t.mx.substitute(&Series::y(n), &Series::x(n))?,
        g_t.my.substitute(&Series::y(n), &Series::x(n))?,
    );
    let z2 = pullback(&g, &z1)?;
    let (_, d2) = z2.series()?;
    let s_t = d2.chop(tol).unshift(0, 1).ok_or_else(|| Error::Degenerate("rectified field not divisible by y".into()))?;
    let s_t = s_t.scale(&tr.inv().unwrap());
    let m = s_t.order();
    let s0 = Series::from_terms(m, s_t.terms().filter(|(e, _)| e.b == 0).map(|(e, c)| ((e.a, 0), c.clone())));
    // λ2 y ∂y T = 1/s̃ − 1/s̃(x, 0)
    let h = &s_t.invert_unit()? - &s0.invert_unit()?;
    let t = h.map_terms(|e, c| if e.b == 0 { Coeff::zero() } else { c / &(&tr * &Coeff::int(e.b as i64)) });
    let zhat = VectorField::new(Series::zero(m), (&Series::y(m) * &s0).scale(&tr));
    let tmap = flow_map(&zhat, &t)?;
    let rest = (&s0 - &Series::one(m)).chop(tol);
    let (k, mu, nmap) = match rest.leading() {
        None => (0, Coeff::zero().like(&tr), FormalMap::identity(m)),
        Some((e, c)) => {
            if e.b != 0 {
                return Err(Error::Inconsistent("restriction to the curve is not a function of x".into()));
            }
            let k = e.a;
            let mu = c.clone();
            let q = rest.unshift(k, 0).unwrap().scale(&mu.inv().unwrap());
            let nfun = q.log()?.scale(&Coeff::ratio(1, k as i64));
            let mx = &Series::x(m) * &nfun.exp()?;
            (k, mu, FormalMap::raw(mx, Series::y(m)))
        }
    };
    let chart = p
        .compose(&phi1)?
        .compose(&g)?
        .compose(&invert_map(&tmap)?)?
        .compose(&invert_map(&nmap)?)?;
    Ok(NonisolatedNormalForm { chart, k, mu, lambda2: tr })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectify_vertical_field_is_a_swap() {
        let n = 6;
        let g = rectify(&VectorField::d_dy(n), None).unwrap();
        assert_eq!(g.mx, Series::y(n));
        assert_eq!(g.my, Series::x(n));
    }

    #[test]
    fn rectify_at_shifted_point() {
        let n = 7;
        // Z = x∂x + ∂y at p = (1, 0)
        let z = VectorField::new(Series::x(n), Series::one(n));
        let g = rectify(&z, Some((&Coeff::one(), &Coeff::zero()))).unwrap();
        let zt = VectorField::new(Series::x(n).translate(&Coeff::one(), &Coeff::zero()), Series::one(n));
        let back = pullback(&g, &zt).unwrap();
        assert!(back.eq_fields(&VectorField::d_dx(back.order())));
        assert!(rectify(&VectorField::diagonal(&Coeff::one(), &Coeff::one(), n), None).is_err());
    }

    #[test]
    fn nonisolated_examples() {
        let n = 8;
        let l2 = Coeff::int(3);
        let z = VectorField::new(Series::zero(n), Series::y(n).scale(&l2));
        let nf = normalize_nonisolated(&z, 0.0).unwrap();
        assert_eq!((nf.k, nf.mu.clone()), (0, Coeff::zero()));
        assert!(nf.chart.is_identity());
        // λ2 y (1 + x) ∂y
        let s = &Series::one(n) + &Series::x(n);
        let z = VectorField::new(Series::zero(n), (&Series::y(n) * &s).scale(&l2));
        let nf = normalize_nonisolated(&z, 0.0).unwrap();
        assert_eq!((nf.k, nf.mu.clone()), (1, Coeff::one()));
        let back = pullback(&nf.chart, &z).unwrap();
        assert!(back.eq_fields(&nf.field(back.order())));
        // λ2 (y + y^2) ∂y
        let z = VectorField::new(Series::zero(n), (&Series::y(n) + &Series::monomial(Coeff::one(), 0, 2, n)).scale(&l2));
        let nf = normalize_nonisolated(&z, 0.0).unwrap();
        assert_eq!(nf.mu, Coeff::zero());
        let back = pullback(&nf.chart, &z).unwrap();
        assert!(back.eq_fields(&nf.field(back.order())));
    }
}
