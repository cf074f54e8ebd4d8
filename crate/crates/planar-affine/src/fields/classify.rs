//! Linear-part classification of a singular point at the origin.

use num_complex::Complex64;

use super::VectorField;
use crate::conjugacy::{pullback, FormalMap};
use crate::series::coeff::rationalize;
use crate::series::{Coeff, Series, TOL};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RationalityHint {
    Rational,
    Irrational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Subtype {
    /// λ ∈ ℝ<0 ∖ ℚ
    QuasiResonant,
    /// λ = −p/q ∈ ℚ≤0, gcd(p, q) = 1, q = 1 when p = 0
    Resonant { p: i64, q: i64 },
    /// λ ∈ ℝ>0 ∖ ℚ
    PoincareNonresonant,
    /// λ ∉ ℝ
    ComplexLambda,
    /// λ = p/q ∈ ℚ>0, not reduced
    Node { p: i64, q: i64 },
}

impl Subtype {
    pub fn name(&self) -> &'static str {
        match self {
            Subtype::QuasiResonant => "quasi-resonant",
            Subtype::Resonant { .. } => "resonant",
            Subtype::PoincareNonresonant => "poincare-nonresonant",
            Subtype::ComplexLambda => "complex-lambda",
            Subtype::Node { .. } => "node",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Regular,
    Nonisolated,
    NonNilpotent,
    Nilpotent,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SingularityClass {
    Regular,
    /// Linear part of rank one and the zero set is a curve; λ1 = 0.
    Nonisolated { lambda2: Coeff },
    NonNilpotent { lambda1: Coeff, lambda2: Coeff, subtype: Subtype },
    Nilpotent,
}

impl SingularityClass {
    pub fn kind(&self) -> Kind {
        match self {
            SingularityClass::Regular => Kind::Regular,
            SingularityClass::Nonisolated { .. } => Kind::Nonisolated,
            SingularityClass::NonNilpotent { .. } => Kind::NonNilpotent,
            SingularityClass::Nilpotent => Kind::Nilpotent,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind() {
            Kind::Regular => "regular",
            Kind::Nonisolated => "nonisolated",
            Kind::NonNilpotent => "nonnilpotent",
            Kind::Nilpotent => "nilpotent",
        }
    }

    pub fn eigenvalues(&self) -> Option<(Coeff, Coeff)> {
        match self {
            SingularityClass::NonNilpotent { lambda1, lambda2, .. } => Some((lambda1.clone(), lambda2.clone())),
            SingularityClass::Nonisolated { lambda2 } => Some((Coeff::zero().like(lambda2), lambda2.clone())),
            _ => None,
        }
    }

    /// λ = λ1/λ2.
    pub fn ratio(&self) -> Option<Coeff> {
        self.eigenvalues().map(|(a, b)| &a / &b)
    }

    pub fn subtype(&self) -> Option<&Subtype> {
        match self {
            SingularityClass::NonNilpotent { subtype, .. } => Some(subtype),
            _ => None,
        }
    }
}

/// Jacobian of a holomorphic field at the origin, rows (∂x, ∂y) of (cx, cy).
pub fn linear_part(z: &VectorField) -> Result<[[Coeff; 2]; 2], Error> {
    let (a, b) = z.series()?;
    Ok([[a.coeff(1, 0), a.coeff(0, 1)], [b.coeff(1, 0), b.coeff(0, 1)]])
}

pub fn classify(z: &VectorField) -> Result<SingularityClass, Error> {
    classify_with(z, None, TOL)
}

/// Classification; float inputs with a real eigenvalue ratio need `hint`.
pub fn classify_with(z: &VectorField, hint: Option<RationalityHint>, tol: f64) -> Result<SingularityClass, Error> {
    let (a, b) = z.series()?;
    if !a.constant_term().approx_zero(tol) || !b.constant_term().approx_zero(tol) {
        return Ok(SingularityClass::Regular);
    }
    let l = linear_part(z)?;
    let exact = z.is_exact();
    let tr = &l[0][0] + &l[1][1];
    let det = &(&l[0][0] * &l[1][1]) - &(&l[0][1] * &l[1][0]);
    let small = |c: &Coeff| c.approx_zero(tol);
    if small(&det) {
        if small(&tr) {
            return Ok(SingularityClass::Nilpotent);
        }
        return rank_one(z, &l, &tr, tol);
    }
    let disc = &(&tr * &tr) - &(&det * &Coeff::int(4));
    let half = Coeff::ratio(1, 2).like(&tr);
    let exact_roots = if exact { disc.exact_nth_roots(2) } else { Vec::new() };
    let (m1, m2) = if let Some(r) = exact_roots.last() {
        (&(&tr + r) * &half, &(&tr - r) * &half)
    } else {
        let s = disc.to_c64().sqrt();
        let t = tr.to_c64();
        (Coeff::Float((t + s) * 0.5), Coeff::Float((t - s) * 0.5))
    };
    let (l1, l2) = label(&l, m1, m2);
    let subtype = if exact {
        exact_subtype(&tr, &det, &l1, &l2)?
    } else {
        float_subtype(&(&l1 / &l2), hint, tol)?
    };
    Ok(SingularityClass::NonNilpotent { lambda1: l1, lambda2: l2, subtype })
}

fn eigvec(l: &[[Coeff; 2]; 2], mu: &Coeff) -> (Complex64, Complex64) {
    let m = |c: &Coeff| c.to_c64();
    let (a, b, c, d) = (m(&l[0][0]), m(&l[0][1]), m(&l[1][0]), m(&l[1][1]));
    let mu = mu.to_c64();
    if b.norm() > 1e-14 {
        (b, mu - a)
    } else if c.norm() > 1e-14 {
        (mu - d, c)
    } else if (mu - a).norm() <= (mu - d).norm() {
        (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    } else {
        (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    }
}

/// λ1 is the eigenvalue whose eigenvector is closest to the x-axis.
fn label(l: &[[Coeff; 2]; 2], m1: Coeff, m2: Coeff) -> (Coeff, Coeff) {
    let score = |mu: &Coeff| {
        let (vx, vy) = eigvec(l, mu);
        vx.norm() / (vx.norm() + vy.norm())
    };
    let (s1, s2) = (score(&m1), score(&m2));
    if s1 > s2 + 1e-12 || ((s1 - s2).abs() <= 1e-12 && Coeff::total_cmp(&m1, &m2) != std::cmp::Ordering::Greater) {
        (m1, m2)
    } else {
        (m2, m1)
    }
}

fn subtype_from_rational(num: i64, den: i64) -> Subtype {
    if num <= 0 {
        let q = den;
        let p = -num;
        if p == 0 {
            Subtype::Resonant { p: 0, q: 1 }
        } else {
            Subtype::Resonant { p, q }
        }
    } else {
        Subtype::Node { p: num, q: den }
    }
}

fn exact_subtype(tr: &Coeff, det: &Coeff, l1: &Coeff, l2: &Coeff) -> Result<Subtype, Error> {
    if l1.is_exact() && l2.is_exact() {
        let lam = l1 / l2;
        return Ok(match lam.as_rational() {
            Some(r) => {
                let num = r.numer().to_string().parse::<i64>().map_err(|_| Error::Degenerate("ratio too large".into()))?;
                let den = r.denom().to_string().parse::<i64>().map_err(|_| Error::Degenerate("ratio too large".into()))?;
                subtype_from_rational(num, den)
            }
            None => Subtype::ComplexLambda,
        });
    }
    // eigenvalues irrational: λ + 1/λ = t − 2 with t = tr²/det
    let t = &(tr * tr) / det;
    let s = &t * &(&t - &Coeff::int(4));
    let roots = s.exact_nth_roots(2);
    if let Some(r) = roots.last() {
        let half = Coeff::ratio(1, 2);
        let cands = [&(&(&t - &Coeff::int(2)) + r) * &half, &(&(&t - &Coeff::int(2)) - r) * &half];
        let target = (l1 / l2).to_c64();
        let best = cands
            .iter()
            .min_by(|a, b| (a.to_c64() - target).norm().total_cmp(&(b.to_c64() - target).norm()))
            .unwrap();
        // the recursive call only reads the ratio best/1
        return exact_subtype(best, &Coeff::one(), best, &Coeff::one());
    }
    let real = t.is_real(0.0) && s.as_rational().map(|v| v > num_rational::BigRational::from_integer(0.into())).unwrap_or(false);
    if !real {
        return Ok(Subtype::ComplexLambda);
    }
    // roots of λ² − (t−2)λ + 1 share the sign of t − 2
    let sum = (&t - &Coeff::int(2)).re_f64();
    Ok(if sum < 0.0 { Subtype::QuasiResonant } else { Subtype::PoincareNonresonant })
}

fn float_subtype(lam: &Coeff, hint: Option<RationalityHint>, tol: f64) -> Result<Subtype, Error> {
    let c = lam.to_c64();
    if c.im.abs() > tol.max(1e-9) * c.norm().max(1.0) {
        return Ok(Subtype::ComplexLambda);
    }
    match hint {
        None => Err(Error::Precondition(
            "eigenvalue ratio is real in float mode: a rationality hint is required".into(),
        )),
        Some(RationalityHint::Irrational) => Ok(if c.re < 0.0 { Subtype::QuasiResonant } else { Subtype::PoincareNonresonant }),
        Some(RationalityHint::Rational) => {
            let (n, d) = rationalize(c.re, 1_000_000).ok_or_else(|| Error::Inconsistent("ratio not rational".into()))?;
            if (n as f64 / d as f64 - c.re).abs() > 1e-8 {
                return Err(Error::Inconsistent(format!("ratio {} has no small rational form", c.re)));
            }
            Ok(subtype_from_rational(n, d))
        }
    }
}

/// Eigenvalues 0 and tr: decide between a curve of zeros and a saddle-node.
fn rank_one(z: &VectorField, l: &[[Coeff; 2]; 2], tr: &Coeff, tol: f64) -> Result<SingularityClass, Error> {
    let n = z.order();
    let zero = Coeff::zero().like(tr);
    let (v0x, v0y) = kernel_vec(l, &zero);
    let (v1x, v1y) = kernel_vec(l, tr);
    let p = FormalMap::linear(&v0x, &v1x, &v0y, &v1y, n)?;
    let zz = pullback(&p, z)?.to_holomorphic()?;
    let (f, g) = zz.series()?;
    let u = solve_graph(&g, tr)?;
    let rest = f.substitute(&Series::x(f.order()), &u)?;
    let on_curve = rest.truncate(n.saturating_sub(1)).max_abs() <= if z.is_exact() { 0.0 } else { tol };
    if on_curve {
        Ok(SingularityClass::Nonisolated { lambda2: tr.clone() })
    } else {
        Ok(SingularityClass::NonNilpotent {
            lambda1: zero,
            lambda2: tr.clone(),
            subtype: Subtype::Resonant { p: 0, q: 1 },
        })
    }
}

/// Exact eigenvector of l for eigenvalue mu.
pub(crate) fn kernel_vec(l: &[[Coeff; 2]; 2], mu: &Coeff) -> (Coeff, Coeff) {
    let (a, b, c, d) = (&l[0][0], &l[0][1], &l[1][0], &l[1][1]);
    let am = a - mu;
    let dm = d - mu;
    if !b.is_zero() {
        (b.clone(), -am)
    } else if !c.is_zero() {
        (dm, c.clone())
    } else if am.approx_zero(1e-12) {
        (Coeff::one().like(mu), Coeff::zero().like(mu))
    } else {
        (Coeff::zero().like(mu), Coeff::one().like(mu))
    }
}

/// u(x) with g(x, u(x)) = 0, where g = tr·y + higher terms.
pub(crate) fn solve_graph(g: &Series, tr: &Coeff) -> Result<Series, Error> {
    let n = g.order();
    let lin = g.coeff(0, 1);
    if lin.is_zero() {
        return Err(Error::Degenerate("zero set is not a graph over x".into()));
    }
    let _ = tr;
    let rest = g - &Series::y(n).scale(&lin);
    let inv = lin.inv().unwrap();
    let mut u = Series::zero(n);
    for _ in 0..=n + 1 {
        let next = rest.substitute(&Series::x(n), &u)?.scale(&-&inv);
        if next == u {
            break;
        }
        u = next;
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(n: u32, cx: &[((u32, u32), i64)], cy: &[((u32, u32), i64)]) -> VectorField {
        let mk = |t: &[((u32, u32), i64)]| Series::from_terms(n, t.iter().map(|&(e, c)| (e, Coeff::int(c))));
        VectorField::new(mk(cx), mk(cy))
    }

    #[test]
    fn basic_classes() {
        let n = 6;
        assert_eq!(classify(&field(n, &[], &[((0, 0), 1)])).unwrap(), SingularityClass::Regular);
        assert_eq!(classify(&field(n, &[((0, 1), 1)], &[])).unwrap(), SingularityClass::Nilpotent);
        let c = classify(&field(n, &[((1, 0), -1)], &[((0, 1), 2)])).unwrap();
        assert_eq!(
            c,
            SingularityClass::NonNilpotent {
                lambda1: Coeff::int(-1),
                lambda2: Coeff::int(2),
                subtype: Subtype::Resonant { p: 1, q: 2 }
            }
        );
        assert_eq!(c.ratio(), Some(Coeff::ratio(-1, 2)));
    }

    #[test]
    fn rank_one_cases() {
        let n = 6;
        assert_eq!(classify(&field(n, &[], &[((0, 1), 1)])).unwrap().kind(), Kind::Nonisolated);
        // saddle-node x^2 ∂x + y ∂y
        let sn = classify(&field(n, &[((2, 0), 1)], &[((0, 1), 1)])).unwrap();
        assert_eq!(sn.subtype(), Some(&Subtype::Resonant { p: 0, q: 1 }));
        // zero set y = x^2 curve: (y - x^2)(1 + x) ∂y
        let c = classify(&field(n, &[], &[((0, 1), 1), ((2, 0), -1), ((1, 1), 1), ((3, 0), -1)])).unwrap();
        assert_eq!(c.kind(), Kind::Nonisolated);
    }

    #[test]
    fn irrational_eigenvalues() {
        let n = 4;
        // [[0,1],[2,0]]: eigenvalues ±√2, λ = −1
        let c = classify(&field(n, &[((0, 1), 1)], &[((1, 0), 2)])).unwrap();
        assert_eq!(c.subtype(), Some(&Subtype::Resonant { p: 1, q: 1 }));
        // [[1,1],[1,0]]: golden ratio eigenvalues of opposite sign, λ irrational negative
        let c = classify(&field(n, &[((1, 0), 1), ((0, 1), 1)], &[((1, 0), 1)])).unwrap();
        assert_eq!(c.subtype(), Some(&Subtype::QuasiResonant));
        // rotation: complex ratio
        let c = classify(&field(n, &[((0, 1), -1)], &[((1, 0), 1)])).unwrap();
        assert_eq!(c.subtype(), Some(&Subtype::Resonant { p: 1, q: 1 }));
        let c = classify(&field(n, &[((1, 0), 1), ((0, 1), -1)], &[((1, 0), 1), ((0, 1), 1)])).unwrap();
        assert_eq!(c.subtype(), Some(&Subtype::ComplexLambda));
    }

    #[test]
    fn float_needs_hint() {
        let n = 4;
        let z = VectorField::diagonal(&Coeff::float(-std::f64::consts::SQRT_2), &Coeff::float(1.0), n);
        assert!(classify(&z).is_err());
        let c = classify_with(&z, Some(RationalityHint::Irrational), TOL).unwrap();
        assert_eq!(c.subtype(), Some(&Subtype::QuasiResonant));
        let z = VectorField::diagonal(&Coeff::float(-3.0 / 7.0), &Coeff::float(1.0), n);
        let c = classify_with(&z, Some(RationalityHint::Rational), TOL).unwrap();
        assert_eq!(c.subtype(), Some(&Subtype::Resonant { p: 3, q: 7 }));
    }
}
