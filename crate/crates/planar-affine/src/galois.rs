//! Membership data for the groupoid of invariance of an affine pair [Z, Y] = δY.
//!
//! Everything works with jets at a base point. Callers move the base point to
//! the origin with [`translate_field`] first.

use crate::conjugacy::{invert_map, pullback, rectify, FormalMap};
use crate::fields::{det, dual_basis, flow_map, VectorField};
use crate::series::{Coeff, RationalSeries, Series};
use crate::Error;

/// Residuals of the linear system in (T, N).
#[derive(Clone, Debug, PartialEq)]
pub struct StarResiduals {
    /// Z·T
    pub r1: Series,
    /// δ·Y·T
    pub r2: Series,
    /// Y·Y·T
    pub r3: Series,
    /// Z·N + δN
    pub r4: Series,
    /// Y·Y·N
    pub r5: Series,
}

impl StarResiduals {
    pub fn all(&self) -> [&Series; 5] {
        [&self.r1, &self.r2, &self.r3, &self.r4, &self.r5]
    }

    pub fn vanish(&self, tol: f64) -> bool {
        self.all().iter().all(|r| small(r, tol))
    }

    pub fn max_abs(&self) -> f64 {
        self.all().iter().map(|r| r.max_abs()).fold(0.0, f64::max)
    }
}

/// Exact series must be zero; float series within `tol`.
fn small(s: &Series, tol: f64) -> bool {
    s.terms().all(|(_, c)| c.approx_zero(tol))
}

fn small_field(w: &VectorField, tol: f64) -> Result<bool, Error> {
    let (a, b) = w.series()?;
    Ok(small(&a, tol) && small(&b, tol))
}

fn holomorphic(w: &VectorField, name: &str) -> Result<(Series, Series), Error> {
    w.series().map_err(|_| Error::Precondition(format!("{name} must have unit denominators at the base point")))
}

/// Checks [Z, Y] = δY at truncation.
pub fn check_pair(z: &VectorField, y: &VectorField, delta: &Coeff, tol: f64) -> Result<(), Error> {
    holomorphic(z, "Z")?;
    holomorphic(y, "Y")?;
    let r = z.bracket(y).sub(&y.scale(delta));
    if !small_field(&r, tol)? {
        return Err(Error::Precondition(format!("[Z, Y] != {delta}·Y at truncation")));
    }
    Ok(())
}

pub fn star_residuals(z: &VectorField, y: &VectorField, delta: &Coeff, t: &Series, n: &Series, tol: f64) -> Result<StarResiduals, Error> {
    check_pair(z, y, delta, tol)?;
    let yt = y.apply_series(t)?;
    let zn = z.apply_series(n)?;
    Ok(StarResiduals {
        r1: z.apply_series(t)?,
        r2: yt.scale(delta),
        r3: y.apply_series(&yt)?,
        r4: &zn + &n.scale(delta),
        r5: y.apply_series(&y.apply_series(n)?)?,
    })
}

/// The constant c with r = c at truncation, if there is one.
fn rational_constant(r: &RationalSeries, tol: f64) -> Option<Coeff> {
    if r.num.terms().all(|(_, c)| c.approx_zero(tol)) {
        return Some(Coeff::zero());
    }
    let (e, lc) = r.den.leading()?;
    let c = &r.num.coeff(e.a, e.b) / lc;
    let rest = &r.num - &r.den.scale(&c);
    if rest.terms().all(|(_, v)| v.approx_zero(tol)) {
        Some(c)
    } else {
        None
    }
}

/// (T, N) with X = T·Z + N·Y, read off the dual coframe.
pub fn decompose_field(z: &VectorField, y: &VectorField, x: &VectorField) -> Result<(RationalSeries, RationalSeries), Error> {
    let (tz, ty) = dual_basis(z, y)?;
    Ok((tz.pair(x).normalized(), ty.pair(x).normalized()))
}

/// (c_X, d_X) with [Z, X] = 0 and [Y, X] = d_X Z + c_X Y, or None when X is not in the algebra.
pub fn algebra_membership(z: &VectorField, y: &VectorField, delta: &Coeff, x: &VectorField, tol: f64) -> Result<Option<(Coeff, Coeff)>, Error> {
    let (tz, ty) = dual_basis(z, y)?;
    let zx = z.bracket(x);
    if !(tz.pair(&zx).num.terms().all(|(_, c)| c.approx_zero(tol)) && ty.pair(&zx).num.terms().all(|(_, c)| c.approx_zero(tol))) {
        return Ok(None);
    }
    let yx = y.bracket(x);
    let d = match rational_constant(&tz.pair(&yx), tol) {
        Some(d) => d,
        None => return Ok(None),
    };
    let c = match rational_constant(&ty.pair(&yx), tol) {
        Some(c) => c,
        None => return Ok(None),
    };
    if !(delta * &d).approx_zero(tol) {
        return Ok(None);
    }
    Ok(Some((c, d)))
}

/// W(x + px, y + py) for a field with polynomial components.
pub fn translate_field(w: &VectorField, px: &Coeff, py: &Coeff) -> Result<VectorField, Error> {
    let (a, b) = holomorphic(w, "the field")?;
    Ok(VectorField::new(a.translate(px, py), b.translate(px, py)))
}

fn moves_origin(g: &FormalMap) -> bool {
    !g.mx.constant_term().is_zero() || !g.my.constant_term().is_zero()
}

/// Γ*W for a map that may move the origin; W is treated as polynomial.
fn pullback_any(g: &FormalMap, w: &VectorField) -> Result<VectorField, Error> {
    if !moves_origin(g) {
        return pullback(g, w);
    }
    let (cx, cy) = (g.mx.constant_term(), g.my.constant_term());
    let n = g.order();
    let g0 = FormalMap::raw(&g.mx - &Series::constant(cx.clone(), n), &g.my - &Series::constant(cy.clone(), n));
    pullback(&g0, &translate_field(w, &cx, &cy)?)
}

/// (c_Γ, d_Γ) with Γ*Z = Z and Γ*Y = d_Γ Z + c_Γ Y, c_Γ ≠ 0 and δ·d_Γ = 0.
pub fn aut_pair_check(g: &FormalMap, z: &VectorField, y: &VectorField, delta: &Coeff, tol: f64) -> Option<(Coeff, Coeff)> {
    let gz = pullback_any(g, z).ok()?;
    if !small_field(&gz.sub(z), tol).ok()? {
        return None;
    }
    let gy = pullback_any(g, y).ok()?;
    let (tz, ty) = dual_basis(z, y).ok()?;
    let d = rational_constant(&tz.pair(&gy), tol)?;
    let c = rational_constant(&ty.pair(&gy), tol)?;
    if c.approx_zero(tol) || !(delta * &d).approx_zero(tol) {
        return None;
    }
    Some((c, d))
}

#[derive(Clone, Debug)]
pub struct SymmetryDecomposition {
    /// First integral of Z.
    pub t: Series,
    /// Solution of Z·N = −δN.
    pub n: Series,
    /// Rectifying chart used for the solve.
    pub chart: FormalMap,
    /// max |Z·T|, |Z·N + δN|.
    pub sol_residual: f64,
    /// Largest coefficient of Γ − Φ_Y^N∘Φ_Z^T; None when Γ moves the base point.
    pub recomposition_residual: Option<f64>,
}

/// The terms free of x, i.e. the restriction to the line x = 0 as a series in y.
pub fn slice(s: &Series) -> Series {
    Series::from_terms(s.order(), s.terms().filter(|(e, _)| e.a == 0).map(|(e, c)| ((0, e.b), c.clone())))
}

/// Γ = Φ_Y^N ∘ Φ_Z^T for a symmetry Γ of Z at a regular point.
pub fn symmetry_decompose(z: &VectorField, y: &VectorField, delta: &Coeff, g: &FormalMap, tol: f64) -> Result<SymmetryDecomposition, Error> {
    check_pair(z, y, delta, tol)?;
    if z.is_singular()? {
        return Err(Error::Precondition("Z vanishes at the base point".into()));
    }
    let order = z.order().min(y.order()).min(g.order());
    let moved = moves_origin(g);
    if !small_field(&pullback_any(g, z)?.sub(z), tol)? {
        return Err(Error::Precondition("Γ is not a symmetry of Z".into()));
    }
    let chart = rectify(z, None)?;
    let chart_inv = invert_map(&chart)?;
    let yc = pullback(&chart, y)?;
    let (ya, yb) = yc.series()?;
    let b0 = slice(&yb);
    if b0.constant_term().approx_zero(tol) {
        return Err(Error::Degenerate("Y is tangent to Z at the base point; move the base point".into()));
    }
    let gc = if moved {
        if !chart.is_identity() {
            return Err(Error::Precondition("Γ must fix the base point unless Z is already rectified".into()));
        }
        g.clone()
    } else {
        chart_inv.compose(&g.compose(&chart)?)?
    };
    let n = order.min(gc.order()).min(yc.order());
    let alpha = slice(&gc.mx).with_order(n);
    let beta = slice(&gc.my).with_order(n);

    // (A, B)(s, z) = Φ_{Y'}^s(0, z), with s in the x slot
    let mut gx = Series::x(n);
    let mut gy = Series::y(n);
    let mut fa = Series::zero(n);
    let mut fb = Series::zero(n);
    let mut sk = Series::one(n);
    let mut fact = Coeff::one();
    for k in 0..=n {
        if k > 0 {
            gx = (&(&ya * &gx.dx()) + &(&yb * &gx.dy())).with_order(n);
            gy = (&(&ya * &gy.dx()) + &(&yb * &gy.dy())).with_order(n);
            sk = &sk * &Series::x(n);
            fact = &fact * &Coeff::ratio(1, k as i64);
        }
        fa = &fa + &(&sk * &slice(&gx)).scale(&fact);
        fb = &fb + &(&sk * &slice(&gy)).scale(&fact);
    }

    // B(η(z), z) = β(z) by fixed point; each pass fixes one more degree
    let b0_inv = b0.with_order(n).invert_unit()?;
    let zvar = Series::y(n);
    let mut eta = Series::zero(n);
    if !beta.constant_term().is_zero() {
        return Err(Error::Precondition("Γ must preserve the transversal through the base point".into()));
    }
    for _ in 0..=n + 1 {
        let err = &beta - &fb.substitute(&eta, &zvar)?;
        if small(&err, 0.0) {
            break;
        }
        eta = &eta + &(&err * &b0_inv);
    }
    let t_chart = &alpha - &fa.substitute(&eta, &zvar)?;
    let n_chart = &Series::x(n).scale(&delta.neg_ref()).exp()? * &eta;

    let t = chart_inv.apply(&t_chart)?;
    let nn = chart_inv.apply(&n_chart)?;
    let r1 = z.apply_series(&t)?;
    let r4 = &z.apply_series(&nn)? + &nn.scale(delta);
    let sol_residual = r1.max_abs().max(r4.max_abs());
    let recomposition_residual = if moved {
        None
    } else {
        let rec = flow_map(y, &nn)?.compose(&flow_map(z, &t)?)?;
        Some(g.truncate(n).residual(&rec.truncate(n)))
    };
    Ok(SymmetryDecomposition { t, n: nn, chart, sol_residual, recomposition_residual })
}

/// First point of a small integer grid where Z ≠ 0 and det(Z, Y) ≠ 0.
pub fn choose_base_point(z: &VectorField, y: &VectorField, tol: f64) -> Option<(Coeff, Coeff)> {
    let (za, zb) = z.series().ok()?;
    y.series().ok()?;
    let d = det(z, y).num;
    let mut grid: Vec<(i64, i64)> = Vec::new();
    for r in 0..=3i64 {
        for i in -r..=r {
            for j in -r..=r {
                if i.abs().max(j.abs()) == r {
                    grid.push((i, j));
                }
            }
        }
    }
    grid.into_iter().map(|(i, j)| (Coeff::int(i), Coeff::int(j))).find(|(px, py)| {
        let zero = za.eval(px, py).approx_zero(tol) && zb.eval(px, py).approx_zero(tol);
        !zero && !d.eval(px, py).approx_zero(tol)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::Sampler;

    /// Z = ∂t, Y = e^{δt}∂z.
    fn rectified(delta: &Coeff, n: u32) -> (VectorField, VectorField) {
        let e = Series::x(n).scale(delta).exp().unwrap();
        (VectorField::d_dx(n), VectorField::new(Series::zero(n), e))
    }

    #[test]
    fn flow_of_z_solves_the_system() {
        let n = 8;
        for d in [0, 1] {
            let delta = Coeff::int(d);
            let (z, y) = rectified(&delta, n);
            let r = star_residuals(&z, &y, &delta, &Series::one(n), &Series::zero(n), 0.0).unwrap();
            assert!(r.vanish(0.0));
        }
    }

    #[test]
    fn abelian_case_makes_second_equation_vacuous() {
        let n = 8;
        let (z, y) = rectified(&Coeff::zero(), n);
        let t = Series::from_terms(n, [((0, 3), Coeff::int(2)), ((2, 1), Coeff::ratio(1, 3))]);
        let r = star_residuals(&z, &y, &Coeff::zero(), &t, &Series::y(n), 0.0).unwrap();
        assert!(r.r2.is_zero());
        assert!(!r.r1.is_zero());
    }

    #[test]
    fn affine_eta_solves_the_system() {
        // N = e^{−δt} η(z), η affine
        let n = 9;
        let delta = Coeff::int(1);
        let (z, y) = rectified(&delta, n);
        let eta = &Series::constant(Coeff::int(3), n) + &Series::y(n).scale(&Coeff::ratio(-2, 5));
        let nn = &Series::x(n).scale(&Coeff::int(-1)).exp().unwrap() * &eta;
        let r = star_residuals(&z, &y, &delta, &Series::constant(Coeff::int(4), n), &nn, 0.0).unwrap();
        assert!(r.vanish(0.0), "{r:?}");
        // a quadratic η breaks the last equation only
        let nn = &nn + &(&Series::x(n).scale(&Coeff::int(-1)).exp().unwrap() * &Series::monomial(Coeff::one(), 0, 2, n));
        let r = star_residuals(&z, &y, &delta, &Series::zero(n), &nn, 0.0).unwrap();
        assert!(small(&r.r4, 0.0) && !small(&r.r5, 0.0));
    }

    #[test]
    fn star_requires_an_affine_pair() {
        let n = 6;
        let (z, y) = rectified(&Coeff::one(), n);
        assert!(star_residuals(&z, &y, &Coeff::int(2), &Series::one(n), &Series::zero(n), 0.0).is_err());
    }

    #[test]
    fn membership_examples() {
        let n = 8;
        let z = VectorField::diagonal(&Coeff::int(-1), &Coeff::int(2), n);
        let y = VectorField::new(Series::zero(n), Series::y(n));
        assert_eq!(algebra_membership(&z, &y, &Coeff::zero(), &z, 0.0).unwrap(), Some((Coeff::zero(), Coeff::zero())));
        let xdx = VectorField::new(Series::x(n), Series::zero(n));
        assert_eq!(algebra_membership(&z, &y, &Coeff::zero(), &xdx, 0.0).unwrap(), Some((Coeff::zero(), Coeff::zero())));
        let xz = z.mul_series(&Series::x(n));
        assert_eq!(algebra_membership(&z, &y, &Coeff::zero(), &xz, 0.0).unwrap(), None);
        // Y itself: [Y, Y] = 0, [Z, Y] = 0
        assert_eq!(algebra_membership(&z, &y, &Coeff::zero(), &y, 0.0).unwrap(), Some((Coeff::zero(), Coeff::zero())));
    }

    #[test]
    fn membership_reads_structure_constants() {
        // δ = 1 on the rectified chart: X = ∂t + z∂z has [Y, X] = −Y·1 + ... = c Y
        let n = 8;
        let delta = Coeff::one();
        let (z, y) = rectified(&delta, n);
        let x = VectorField::new(Series::one(n), Series::y(n));
        // T = 1, N = e^{−t} z: d = Y·T = 0, c = Y·N − δT = 1 − 1 = 0
        assert_eq!(algebra_membership(&z, &y, &delta, &x, 0.0).unwrap(), Some((Coeff::zero(), Coeff::zero())));
        let x = VectorField::new(Series::constant(Coeff::int(2), n), Series::y(n));
        assert_eq!(algebra_membership(&z, &y, &delta, &x, 0.0).unwrap(), Some((Coeff::int(-1), Coeff::zero())));
    }

    #[test]
    fn degenerate_pair_is_refused() {
        let n = 5;
        let z = VectorField::d_dx(n);
        assert!(algebra_membership(&z, &z, &Coeff::zero(), &z, 0.0).is_err());
    }

    #[test]
    fn aut_identity_and_shear() {
        let n = 6;
        let (z, y) = (VectorField::d_dx(n), VectorField::d_dy(n));
        assert_eq!(aut_pair_check(&FormalMap::identity(n), &z, &y, &Coeff::zero(), 0.0), Some((Coeff::one(), Coeff::zero())));
        let shear = FormalMap::raw(&Series::x(n) + &Series::y(n), Series::y(n));
        // (DΓ)⁻¹ ∂z = −∂t + ∂z
        assert_eq!(aut_pair_check(&shear, &z, &y, &Coeff::zero(), 0.0), Some((Coeff::one(), Coeff::int(-1))));
        assert_eq!(aut_pair_check(&shear, &z, &y, &Coeff::one(), 0.0), None);
        // not a symmetry of Z
        let bad = FormalMap::raw(Series::x(n).scale(&Coeff::int(2)), Series::y(n));
        assert_eq!(aut_pair_check(&bad, &z, &y, &Coeff::zero(), 0.0), None);
        // a translation along Z moves the base point and is still a symmetry
        let tr = FormalMap::raw(&Series::x(n) + &Series::constant(Coeff::int(3), n), Series::y(n));
        assert_eq!(aut_pair_check(&tr, &z, &y, &Coeff::zero(), 0.0), Some((Coeff::one(), Coeff::zero())));
    }

    #[test]
    fn aut_constants_compose() {
        let n = 6;
        let (z, y) = (VectorField::d_dx(n), VectorField::d_dy(n));
        let g1 = FormalMap::raw(&Series::x(n) + &Series::y(n), Series::y(n));
        let g2 = FormalMap::raw(&Series::x(n) + &Series::y(n).scale(&Coeff::int(2)), Series::y(n).scale(&Coeff::int(3)));
        let (c1, d1) = aut_pair_check(&g1, &z, &y, &Coeff::zero(), 0.0).unwrap();
        let (c2, d2) = aut_pair_check(&g2, &z, &y, &Coeff::zero(), 0.0).unwrap();
        let (c, d) = aut_pair_check(&g1.compose(&g2).unwrap(), &z, &y, &Coeff::zero(), 0.0).unwrap();
        assert_eq!(c, &c1 * &c2);
        assert_eq!(d, &d1 + &(&c1 * &d2));
    }

    #[test]
    fn identity_decomposes_trivially() {
        let n = 8;
        let delta = Coeff::one();
        let (z, y) = rectified(&delta, n);
        let dec = symmetry_decompose(&z, &y, &delta, &FormalMap::identity(n), 0.0).unwrap();
        assert!(dec.t.is_zero() && dec.n.is_zero());
        assert_eq!(dec.recomposition_residual, Some(0.0));
    }

    #[test]
    fn constant_time_flow_gives_constant_t() {
        let n = 8;
        let delta = Coeff::one();
        let (z, y) = rectified(&delta, n);
        let t0 = Coeff::ratio(5, 2);
        let g = FormalMap::raw(&Series::x(n) + &Series::constant(t0.clone(), n), Series::y(n));
        let dec = symmetry_decompose(&z, &y, &delta, &g, 0.0).unwrap();
        assert_eq!(dec.t, Series::constant(t0, dec.t.order()));
        assert!(dec.n.is_zero());
        assert_eq!(dec.recomposition_residual, None);
    }

    #[test]
    fn rectified_round_trip() {
        let n = 9;
        let mut smp = Sampler::new(21);
        for d in [0, 1, -2] {
            let delta = Coeff::int(d);
            let (z, y) = rectified(&delta, n);
            for _ in 0..4 {
                let alpha = smp.poly(n, 1, 4, 0.7).with_order(n);
                let alpha = slice(&alpha);
                let beta = &Series::y(n).scale(&Coeff::int(smp.int(1, 3))) + &slice(&smp.poly(n, 2, 4, 0.7));
                let g = FormalMap::raw(&Series::x(n) + &alpha, beta);
                let dec = symmetry_decompose(&z, &y, &delta, &g, 0.0).unwrap();
                assert_eq!(dec.recomposition_residual, Some(0.0));
                assert_eq!(dec.sol_residual, 0.0);
            }
        }
    }

    #[test]
    fn curved_chart_round_trip() {
        // push the rectified pair and a symmetry through a random chart
        let n = 8;
        let delta = Coeff::one();
        let (z0, y0) = rectified(&delta, n);
        let mut smp = Sampler::new(4);
        let phi = smp.near_identity(n, 3, 0.4);
        let phi_inv = invert_map(&phi).unwrap();
        let z = pullback(&phi_inv, &z0).unwrap();
        let y = pullback(&phi_inv, &y0).unwrap();
        let alpha = slice(&smp.poly(n, 1, 3, 0.8));
        let g0 = FormalMap::raw(&Series::x(n) + &alpha, &Series::y(n) + &slice(&smp.poly(n, 2, 3, 0.8)));
        let g = phi.compose(&g0).unwrap().compose(&phi_inv).unwrap();
        let dec = symmetry_decompose(&z, &y, &delta, &g, 0.0).unwrap();
        assert_eq!(dec.recomposition_residual, Some(0.0));
        assert_eq!(dec.sol_residual, 0.0);
    }

    #[test]
    fn non_symmetries_and_tangency_are_refused() {
        let n = 6;
        let (z, y) = rectified(&Coeff::zero(), n);
        let g = FormalMap::raw(Series::x(n).scale(&Coeff::int(2)), Series::y(n));
        assert!(matches!(symmetry_decompose(&z, &y, &Coeff::zero(), &g, 0.0), Err(Error::Precondition(_))));
        // Y = z∂t commutes with ∂t and is tangent to it
        let yt = VectorField::new(Series::y(n), Series::zero(n));
        let r = symmetry_decompose(&z, &yt, &Coeff::zero(), &FormalMap::identity(n), 0.0);
        assert!(matches!(r, Err(Error::Degenerate(_))), "{r:?}");
    }

    #[test]
    fn base_point_avoids_zeros_and_tangency() {
        let n = 6;
        let z = VectorField::diagonal(&Coeff::int(-1), &Coeff::int(1), n);
        let y = VectorField::new(Series::zero(n), Series::y(n));
        let (px, py) = choose_base_point(&z, &y, 0.0).unwrap();
        assert!(!px.is_zero() && !py.is_zero());
        let zp = translate_field(&z, &px, &py).unwrap();
        assert!(!zp.is_singular().unwrap());
    }
}
