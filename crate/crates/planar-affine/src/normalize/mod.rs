//! Preparation, formal normalization and partner identification at a reduced singularity.

mod lattice;
mod partner;

pub use lattice::{delta_lattice, lattice_coords, DeltaLattice, LatticeFlags};
pub use partner::{dressed_bracket_residual, dressed_components, dressed_vs_field, transverse_partner, NormalData, Partner, PartnerTarget};

use num_complex::Complex64;

use crate::cohom::{solve_diagonal, solve_resonant, DiagonalData, ResonantData};
use crate::conjugacy::{invert_map, pullback, FormalMap};
use crate::fields::{affine_ratio, det, flow_map, linear_part, SingularityClass, Subtype, VectorField};
use crate::series::{Coeff, DressedSeries, Exp, RationalSeries, Series};
use crate::Error;

/// Shape of the prepared field Z = U·X.
#[derive(Clone, Debug, PartialEq)]
pub enum PreparedKind {
    /// X = λ1 x∂x + (λ2 + R) y∂y.
    Diagonal { l1: Coeff, l2: Coeff },
    /// X = X0 + R y W0 with X0 = u^k x∂x + (1 + μ u^k) W0.
    Resonant { p: u32, q: u32, k: u32, mu: Coeff, lambda2: Coeff },
}

#[derive(Clone, Debug)]
pub struct PreparedField {
    pub u: Series,
    pub r: Series,
    pub kind: PreparedKind,
    /// chart → original coordinates
    pub chart: FormalMap,
    /// pullback of Z by `chart`
    pub field: VectorField,
}

impl PreparedField {
    pub fn order(&self) -> u32 {
        self.u.order().min(self.r.order())
    }

    /// The field X with Z = U·X.
    pub fn x_field(&self) -> VectorField {
        match &self.kind {
            PreparedKind::Diagonal { l1, l2 } => DiagonalData::new(l1.clone(), l2.clone(), self.r.clone()).field(),
            PreparedKind::Resonant { .. } => self.resonant_data(1).expect("prepared data").field(self.order()),
        }
    }

    /// Y0 of the transversal step.
    pub fn y0_kind(&self) -> &'static str {
        match self.kind {
            PreparedKind::Diagonal { .. } => "y*dy",
            PreparedKind::Resonant { .. } => "y*W0",
        }
    }

    /// Solver data for X·F + ε λ2 (1 + μ u^k) F, with R rewritten so that R y W0 = R' y^ε W0.
    pub fn resonant_data(&self, eps: i8) -> Option<ResonantData> {
        let PreparedKind::Resonant { p, q, k, mu, lambda2 } = &self.kind else { return None };
        let n = self.order();
        let r = match eps {
            1 => self.r.truncate(n),
            0 => self.r.shift(0, 1).with_order(n),
            _ => self.r.shift(0, 2).with_order(n),
        };
        ResonantData::new(*p, *q, *k, mu.clone(), lambda2.clone(), r, eps).ok()
    }
}

fn in_mode(s: Series, mode: &Coeff) -> Series {
    if mode.is_exact() {
        s
    } else {
        s.to_float()
    }
}

fn small(c: &Coeff, tol: f64) -> bool {
    c.approx_zero(if c.is_exact() { 0.0 } else { tol })
}

fn any_nonzero(s: &Series, tol: f64) -> bool {
    s.terms().any(|(_, c)| !small(c, tol))
}

/// u^j = x^{qj} y^{pj}.
pub fn u_pow(p: u32, q: u32, j: u32, order: u32, mode: &Coeff) -> Series {
    Series::monomial(Coeff::one().like(mode), q * j, p * j, order)
}

/// Σ c_j u^j.
pub fn poly_in_u(coeffs: &[Coeff], p: u32, q: u32, order: u32) -> Series {
    let mut s = Series::zero(order);
    for (j, c) in coeffs.iter().enumerate() {
        s.add_term(Exp::new(q * j as u32, p * j as u32), c.clone());
    }
    s
}

/// Coefficients of u^0..u^k.
pub fn project_u(s: &Series, p: u32, q: u32, k: u32) -> Vec<Coeff> {
    (0..=k).map(|j| s.coeff(q * j, p * j)).collect()
}

/// Eigenvector for μ scaled so that its larger component is 1.
fn eigvec(l: &[[Coeff; 2]; 2], mu: &Coeff) -> (Coeff, Coeff) {
    let (a, b, c, d) = (&l[0][0], &l[0][1], &l[1][0], &l[1][1]);
    let v1 = (b.clone(), mu - a);
    let v2 = (mu - d, c.clone());
    let norm = |v: &(Coeff, Coeff)| v.0.abs().max(v.1.abs());
    let v = if norm(&v1) >= norm(&v2) { v1 } else { v2 };
    let piv = if v.0.abs() >= v.1.abs() { v.0.clone() } else { v.1.clone() };
    let inv = piv.inv().expect("nonzero pivot");
    (&v.0 * &inv, &v.1 * &inv)
}

fn swap_xy(s: &Series) -> Series {
    Series::from_terms(s.order(), s.terms().map(|(e, c)| ((e.b, e.a), c.clone())))
}

/// f(x) with {y = f(x)} invariant for a∂x + b∂y whose linear part is diag(l1, l2).
fn invariant_graph(a: &Series, b: &Series, l1: &Coeff, l2: &Coeff, tol: f64) -> Result<Series, Error> {
    let n = a.order().min(b.order());
    let x = Series::x(n);
    let mut f = Series::zero(n);
    for j in 2..=n {
        let res = &b.substitute(&x, &f)? - &(&f.dx() * &a.substitute(&x, &f)?);
        let c = res.coeff(j, 0);
        if small(&c, tol * 1e-3) {
            continue;
        }
        let div = l2 - &(l1 * &Coeff::int(j as i64));
        if small(&div, tol) {
            return Err(Error::Unsolvable(format!("separatrix equation is resonant at x^{j}: singularity not reduced")));
        }
        f.add_term(Exp::new(j, 0), (&c / &div).neg_ref());
    }
    Ok(f)
}

/// (A, B) with Z = xA∂x + yB∂y.
fn divide_axes(z: &VectorField, tol: f64) -> Result<(Series, Series), Error> {
    let (a, b) = z.series()?;
    let a1 = a.chop(tol).unshift(1, 0).ok_or_else(|| Error::Inconsistent("{x = 0} is not invariant after preparation".into()))?;
    let b1 = b.chop(tol).unshift(0, 1).ok_or_else(|| Error::Inconsistent("{y = 0} is not invariant after preparation".into()))?;
    Ok((a1, b1))
}

/// (x e^h, y).
fn x_flow(h: &Series) -> Result<FormalMap, Error> {
    Ok(FormalMap::raw(&Series::x(h.order()) * &h.exp()?, Series::y(h.order())))
}

/// Brings a reduced non-nilpotent singularity to Z = U·X.
///
/// Both separatrices are straightened (for a saddle-node the second one is the
/// formal centre manifold). In the resonant case the foliation is then brought
/// to its orbital normal form degree by degree, so the prepared R vanishes.
pub fn prepare(z: &VectorField, class: &SingularityClass, tol: f64) -> Result<PreparedField, Error> {
    let SingularityClass::NonNilpotent { lambda1: l1, lambda2: l2, subtype } = class else {
        return Err(Error::Precondition("preparation needs a non-nilpotent singular point".into()));
    };
    if let Subtype::Node { .. } = subtype {
        return Err(Error::Precondition("resonant nodes are classified only".into()));
    }
    let z = z.to_holomorphic()?;
    let n = z.order();
    let l = linear_part(&z)?;
    let (v1x, v1y) = eigvec(&l, l1);
    let (v2x, v2y) = eigvec(&l, l2);
    let lin = FormalMap::linear(&v1x, &v2x, &v1y, &v2y, n)?;
    let z1 = pullback(&lin, &z)?;
    let (a, b) = z1.series()?;
    let (a, b) = (a.chop(tol), b.chop(tol));
    let fy = invariant_graph(&a, &b, l1, l2, tol)?;
    let gx = swap_xy(&invariant_graph(&swap_xy(&b), &swap_xy(&a), l2, l1, tol)?);
    let psi = FormalMap::raw(&Series::x(n) - &gx, &Series::y(n) - &fy);
    let chart = lin.compose(&invert_map(&psi)?)?;
    if let Subtype::Resonant { p, q } = subtype {
        return prepare_resonant(&z, chart, *p as u32, *q as u32, l2, tol);
    }
    let field = pullback(&chart, &z)?;
    let (a2, b2) = divide_axes(&field, tol)?;
    let u = a2.scale(&l1.inv().expect("λ1 ≠ 0 off the resonant case"));
    let r = (&(&b2 * &u.invert_unit()?) - &Series::constant(l2.clone(), b2.order())).chop(tol);
    let m = u.order().min(r.order());
    Ok(PreparedField {
        u: u.truncate(m),
        r: r.truncate(m),
        kind: PreparedKind::Diagonal { l1: l1.clone(), l2: l2.clone() },
        chart,
        field,
    })
}

/// K = λ2 A/B − λ1 for Z = xA∂x + yB∂y; it depends only on the foliation.
fn orbital_k(z: &VectorField, l1: &Coeff, l2: &Coeff, tol: f64) -> Result<Series, Error> {
    let (a, b) = divide_axes(z, tol)?;
    Ok((&(&a * &b.invert_unit()?).scale(l2) - &Series::constant(l1.clone(), a.order())).chop(tol))
}

fn prepare_resonant(z: &VectorField, chart0: FormalMap, p: u32, q: u32, l2: &Coeff, tol: f64) -> Result<PreparedField, Error> {
    let l1 = (l2 * &Coeff::ratio(-(p as i64), q as i64)).like(l2);
    let z2 = pullback(&chart0, z)?;
    let mut kser = orbital_k(&z2, &l1, l2, tol)?;
    let n = z2.order();
    let mut orb = FormalMap::identity(n);
    let mut k: Option<u32> = None;
    let mut mu: Option<Coeff> = None;
    let resonant = |e: &Exp| e.a % q == 0 && e.b == (e.a / q) * p;
    let step = |orb: &mut FormalMap, map: FormalMap| -> Result<Series, Error> {
        *orb = orb.compose(&map)?;
        orbital_k(&pullback(orb, &z2)?, &l1, l2, tol)
    };
    for d in 1..=kser.order() {
        // non-resonant monomials: h_ab = K_ab / (aλ1 + bλ2)
        let mut h = Series::zero(n);
        for (e, c) in kser.homogeneous(d).terms() {
            if resonant(e) || small(c, tol) {
                continue;
            }
            let div = &(&l1 * &Coeff::int(e.a as i64)) + &(l2 * &Coeff::int(e.b as i64));
            h.add_term(*e, c / &div);
        }
        if !h.is_zero() {
            kser = step(&mut orb, x_flow(&h)?)?;
        }
        if d % (p + q) != 0 {
            continue;
        }
        let j = d / (p + q);
        let cj = kser.coeff(q * j, p * j);
        match k {
            None => {
                if small(&cj, tol) {
                    continue;
                }
                k = Some(j);
                // x ↦ αx with α^{qk} c_k = 1
                let target = cj.inv().expect("nonzero");
                let alpha = if target.is_exact() {
                    target
                        .exact_nth_roots(q * j)
                        .into_iter()
                        .min_by(|a, b| {
                            let da = (a - &Coeff::one()).abs();
                            let db = (b - &Coeff::one()).abs();
                            da.total_cmp(&db).then(Coeff::total_cmp(a, b))
                        })
                        .ok_or_else(|| {
                            Error::Precondition(format!("the leading resonant coefficient {cj} has no exact {}-th root; use float mode", q * j))
                        })?
                } else {
                    Coeff::Float(target.to_c64().powf(1.0 / (q * j) as f64))
                };
                if !alpha.is_one() {
                    let one = Coeff::one().like(&alpha);
                    kser = step(&mut orb, FormalMap::diagonal(&alpha, &one, n)?)?;
                }
            }
            Some(kk) => {
                let i = j - kk;
                if i == kk {
                    mu = Some(cj.neg_ref());
                    continue;
                }
                // coefficient of u^j in u^k / (1 + μ u^k)
                let target = match (&mu, i % kk) {
                    (Some(m), 0) => m.neg_ref().powi((i / kk) as i64),
                    _ => Coeff::zero(),
                };
                let diff = &target - &cj;
                if small(&diff, tol) {
                    continue;
                }
                let c = &diff / &Coeff::int(q as i64 * (kk as i64 - i as i64));
                kser = step(&mut orb, x_flow(&u_pow(p, q, i, n, l2).scale(&c))?)?;
            }
        }
    }
    let chart = chart0.compose(&orb)?;
    let field = pullback(&chart, z)?;
    let (_, b3) = divide_axes(&field, tol)?;
    let Some(k) = k else {
        // no resonant term up to this order: the foliation is linear here
        let u = b3.scale(&l2.inv().expect("λ2 ≠ 0"));
        let r = Series::zero(u.order());
        return Ok(PreparedField { u, r, kind: PreparedKind::Diagonal { l1, l2: l2.clone() }, chart, field });
    };
    let mu = mu.ok_or_else(|| Error::Precondition(format!("order too low to read μ (needs degree {})", 2 * k * (p + q))))?;
    let m = kser.order();
    let s = &Series::one(m) + &u_pow(p, q, k, m, l2).scale(&mu);
    let model = &u_pow(p, q, k, m, l2) * &s.invert_unit()?;
    if any_nonzero(&(&kser - &model), tol) {
        return Err(Error::Inconsistent("orbital normalization left a residual term".into()));
    }
    let mb = b3.order();
    let sb = &Series::one(mb) + &u_pow(p, q, k, mb, l2).scale(&mu);
    let u = (&b3 * &sb.invert_unit()?).scale(&l2.inv().expect("λ2 ≠ 0"));
    let r = Series::zero(u.order());
    Ok(PreparedField { u, r, kind: PreparedKind::Resonant { p, q, k, mu, lambda2: l2.clone() }, chart, field })
}

/// pullback(chart, Z) = λ1 x∂x + λ2 y∂y, with the solver outputs.
#[derive(Clone, Debug)]
pub struct Linearization {
    pub chart: FormalMap,
    /// X·T = 1/U − 1
    pub t: Series,
    /// X·N = −R
    pub n: Series,
    pub z0: VectorField,
}

pub fn linearize_quasiresonant(prep: &PreparedField, divisor_floor: f64) -> Result<Linearization, Error> {
    let PreparedKind::Diagonal { l1, l2 } = &prep.kind else {
        return Err(Error::Precondition("linearization needs diagonal prepared data".into()));
    };
    let m = prep.order();
    let g = &prep.u.truncate(m).invert_unit()? - &Series::one(m);
    let t = solve_diagonal(l1, l2, &prep.r, &g, divisor_floor)?;
    let n = solve_diagonal(l1, l2, &prep.r, &prep.r.scale(&Coeff::int(-1)), divisor_floor)?;
    let mut chart = prep.chart.clone();
    if !t.is_zero() {
        // Φ_Z^{−T} pulls U·X back to X
        chart = chart.compose(&flow_map(&prep.field.truncate(m), &t.scale(&Coeff::int(-1)))?)?;
    }
    if !n.is_zero() {
        let y0 = VectorField::new(Series::zero(m), in_mode(Series::y(m), l2));
        chart = chart.compose(&invert_map(&flow_map(&y0, &n)?)?)?;
    }
    Ok(Linearization { chart, t, n, z0: VectorField::diagonal(l1, l2, m) })
}

/// (k, μ, Q) and the tangential data reaching Q·X0.
#[derive(Clone, Debug)]
pub struct FormalInvariants {
    pub p: u32,
    pub q: u32,
    pub k: u32,
    pub mu: Coeff,
    pub lambda2: Coeff,
    /// Q(u) = Σ q_poly[j] u^j, degree ≤ k, Q(0) = 1
    pub q_poly: Vec<Coeff>,
    /// X·T = 1/(Q∘u) − 1/U in the rotated chart
    pub t: Series,
    /// α with α^k = 1 applied to reach the canonical Q
    pub rotation: Coeff,
    pub chart: FormalMap,
}

/// Q of degree ≤ k with 1/Q ≡ 1/U on the monomials u^0..u^k.
pub fn project_unit(u: &Series, p: u32, q: u32, k: u32) -> Result<Vec<Coeff>, Error> {
    let pi = project_u(&u.invert_unit()?, p, q, k);
    let c0 = pi[0].inv().filter(|_| !pi[0].is_zero()).ok_or(Error::NotUnit)?;
    let mut out = vec![c0.clone()];
    for j in 1..=k as usize {
        let mut s = Coeff::zero().like(&c0);
        for i in 1..=j {
            s = &s + &(&pi[i] * &out[j - i]);
        }
        out.push((&s * &c0).neg_ref());
    }
    Ok(out)
}

/// Rotations α (α^k = 1) with a diagonal map (βx, γy) such that β^q γ^p = α.
fn rotations(k: u32, p: u32, q: u32, mode: &Coeff) -> Vec<(Coeff, Coeff, Coeff)> {
    if mode.is_exact() {
        let one = Coeff::one();
        let mut out = Vec::new();
        for a in one.exact_nth_roots(k) {
            if let Some(b) = a.exact_nth_roots(q).into_iter().next() {
                out.push((a, b, one.clone()));
            } else if let Some(g) = (p > 0).then(|| a.exact_nth_roots(p).into_iter().next()).flatten() {
                out.push((a, one.clone(), g));
            }
        }
        out
    } else {
        let one = Coeff::float(1.0);
        (0..k)
            .map(|j| {
                let th = 2.0 * std::f64::consts::PI * j as f64 / k as f64;
                let a = Coeff::Float(Complex64::from_polar(1.0, th));
                let b = Coeff::Float(Complex64::from_polar(1.0, th / q as f64));
                (a, b, one.clone())
            })
            .collect()
    }
}

/// (α, β, γ) putting Q(αu) in canonical position: the first nonzero non-constant
/// coefficient is minimal in the fixed total order (exact) or has argument in
/// [0, 2π/k) (float).
pub fn canonical_rotation(q_poly: &[Coeff], k: u32, p: u32, q: u32, tol: f64) -> (Coeff, Coeff, Coeff) {
    let mode = q_poly[0].clone();
    let cands = rotations(k, p, q, &mode);
    let first = q_poly.iter().enumerate().skip(1).find(|(_, c)| !small(c, tol)).map(|(j, _)| j);
    let Some(j) = first else {
        return cands.into_iter().next().expect("α = 1 is always available");
    };
    let key = |a: &Coeff| &q_poly[j] * &a.powi(j as i64);
    if mode.is_exact() {
        cands.into_iter().min_by(|x, y| Coeff::total_cmp(&key(&x.0), &key(&y.0))).expect("nonempty")
    } else {
        let arg = |a: &Coeff| {
            let v = key(a).to_c64().arg();
            if v < -1e-9 {
                v + 2.0 * std::f64::consts::PI
            } else {
                v.max(0.0)
            }
        };
        cands.into_iter().min_by(|x, y| arg(&x.0).total_cmp(&arg(&y.0))).expect("nonempty")
    }
}

pub fn formal_invariants(prep: &PreparedField, tol: f64) -> Result<FormalInvariants, Error> {
    let PreparedKind::Resonant { p, q, k, mu, lambda2 } = &prep.kind else {
        return Err(Error::Precondition("formal invariants need resonant prepared data".into()));
    };
    let (p, q, k) = (*p, *q, *k);
    let m = prep.order();
    let qraw = project_unit(&prep.u.truncate(m), p, q, k)?;
    let (alpha, beta, gamma) = canonical_rotation(&qraw, k, p, q, tol);
    let q_poly: Vec<Coeff> = qraw.iter().enumerate().map(|(j, c)| c * &alpha.powi(j as i64)).collect();
    let rot = FormalMap::diagonal(&beta, &gamma, m)?;
    let field = pullback(&rot, &prep.field.truncate(m))?;
    let u = rot.apply(&prep.u.truncate(m))?;
    let rotated = PreparedField {
        u: u.clone(),
        r: rot.apply(&prep.r.truncate(m))?.scale(&gamma),
        kind: prep.kind.clone(),
        chart: prep.chart.clone(),
        field: field.clone(),
    };
    let data = rotated.resonant_data(0).ok_or_else(|| Error::Inconsistent("rotated data lost divisibility".into()))?;
    let g = &poly_in_u(&q_poly, p, q, m).invert_unit()? - &u.invert_unit()?;
    let (t, obs) = solve_resonant(&data, &g)?;
    if let Some((e, c)) = obs.entries.iter().find(|(_, c)| !small(c, tol)) {
        return Err(Error::Inconsistent(format!("tangential obstruction {c} at x^{} y^{}", e.a, e.b)));
    }
    let mut chart = prep.chart.compose(&rot)?;
    if !t.is_zero() {
        chart = chart.compose(&flow_map(&field, &t)?)?;
    }
    Ok(FormalInvariants { p, q, k, mu: mu.clone(), lambda2: lambda2.clone(), q_poly, t, rotation: alpha, chart })
}

impl FormalInvariants {
    pub fn q_series(&self, order: u32) -> Series {
        poly_in_u(&self.q_poly, self.p, self.q, order)
    }

    pub fn lambda1(&self) -> Coeff {
        (&self.lambda2 * &Coeff::ratio(-(self.p as i64), self.q as i64)).like(&self.lambda2)
    }

    pub fn x0(&self, order: u32) -> VectorField {
        normal_x0(self.p, self.q, self.k, &self.mu, &self.lambda2, order)
    }

    /// Z0 = (Q∘u)·X0.
    pub fn z0(&self, order: u32) -> VectorField {
        self.x0(order).mul_series(&self.q_series(order)).to_holomorphic().expect("polynomial field")
    }
}

/// X0 = u^k x∂x + (1 + μ u^k) W0 with W0 = λ1 x∂x + λ2 y∂y.
pub fn normal_x0(p: u32, q: u32, k: u32, mu: &Coeff, l2: &Coeff, order: u32) -> VectorField {
    let l1 = (l2 * &Coeff::ratio(-(p as i64), q as i64)).like(l2);
    let uk = u_pow(p, q, k, order, l2);
    let s = &Series::one(order) + &uk.scale(mu);
    let cx = &uk.shift(1, 0) + &(&Series::x(order) * &s).scale(&l1);
    let cy = (&Series::y(order) * &s).scale(l2);
    VectorField::new(cx, cy)
}

/// Normal form of a non-degenerate resonant pair.
#[derive(Clone, Debug)]
pub struct NormalFormReport {
    pub k: u32,
    pub mu: Coeff,
    pub q_poly: Vec<Coeff>,
    pub n: i64,
    pub m: i64,
    pub gamma: Coeff,
    /// coefficients of P in u (empty when P = 0)
    pub p_poly: Vec<Coeff>,
    pub delta: Coeff,
    pub c: Coeff,
    pub d: Coeff,
    pub rotation: Coeff,
    pub z_tilde: VectorField,
    pub y_tilde: (DressedSeries, DressedSeries),
    pub chart: FormalMap,
    /// max |pullback(chart, Z) − Z̃|
    pub conj_residual: f64,
    /// max |pullback(chart, Y) − Ỹ| up to `certified_order`
    pub partner_residual: f64,
    /// max |[Z̃, Ỹ] − δỸ| in dressed form
    pub bracket_residual: f64,
    pub certified_order: u32,
}

/// (n, m, leading coefficient, unit) for f = x^n y^m · unit.
fn laurent_lead(f: &RationalSeries, tol: f64) -> Option<(i64, i64, Coeff, Series)> {
    let f = f.normalized();
    let (i, j, unit) = f.monomial_split()?;
    let num = (&f.num * &unit.invert_unit().ok()?).chop(tol);
    let (a, b) = num.monomial_content();
    let rest = num.unshift(a, b)?;
    let c = rest.constant_term();
    if small(&c, tol) {
        return None;
    }
    Some((a as i64 - i as i64, b as i64 - j as i64, c, rest))
}

/// Full resonant pipeline on a pair with [Z, Y] = δY.
pub fn resonant_normal_form(prep: &PreparedField, z: &VectorField, y: &VectorField, tol: f64) -> Result<NormalFormReport, Error> {
    if let PreparedKind::Diagonal { .. } = prep.kind {
        return Err(Error::Precondition("Z is formally linearizable at this order; use the linearizable route".into()));
    }
    let ar = affine_ratio(z, y, tol)?;
    let delta = ar.delta.ok_or_else(|| Error::Degenerate("[Z, Y] is not a constant multiple of Y".into()))?;
    if !ar.transverse {
        return Err(Error::Degenerate("Z and Y are not transverse".into()));
    }
    let inv = formal_invariants(prep, tol)?;
    let (p, q, k) = (inv.p, inv.q, inv.k);
    let lam1 = inv.lambda1();
    let lam2 = inv.lambda2.clone();
    // transversal step X·N + δ0 N = −R on the tangentially normalized field
    let zt = pullback(&inv.chart, z)?;
    let (_, zb) = zt.series()?;
    let ord = zb.order();
    let drift = (&(&zb * &inv.q_series(ord).invert_unit()?) - &inv.x0(ord).series()?.1).chop(tol);
    let mut chart = inv.chart.clone();
    if any_nonzero(&drift, tol) {
        let r = drift
            .unshift(0, 2)
            .ok_or_else(|| Error::Inconsistent("transversal remainder is not of the form R y W0".into()))?
            .scale(&lam2.inv().expect("λ2 ≠ 0"));
        let data = ResonantData::new(p, q, k, inv.mu.clone(), lam2.clone(), r, 1)?;
        let (nn, obs) = solve_resonant(&data, &data.r.scale(&Coeff::int(-1)))?;
        if obs.entries.iter().any(|(_, c)| !small(c, tol)) {
            return Err(Error::Inconsistent("transversal obstruction".into()));
        }
        let yw0 = data.w0(nn.order()).mul_series(&Series::y(nn.order())).to_holomorphic()?;
        chart = chart.compose(&invert_map(&flow_map(&yw0, &nn)?)?)?;
    }
    let z_hat = pullback(&chart, z)?;
    let y_hat = pullback(&chart, y)?;
    let ord = z_hat.order().min(y_hat.order());
    let z0 = inv.z0(ord);
    let conj_residual = z_hat.truncate(ord).residual(&z0);
    let w0 = VectorField::diagonal(&lam1, &lam2, ord);
    // Ŷ = a Z0 + b W0
    let dzw = det(&z0, &w0);
    let a_coef = det(&y_hat, &w0).div(&dzw)?;
    let b_coef = det(&z0, &y_hat).div(&dzw)?;
    let (n, m, d, _) = laurent_lead(&b_coef, tol).ok_or_else(|| Error::Degenerate("partner has no W0 component".into()))?;
    let predicted = &(&lam1 * &Coeff::int(n)) + &(&lam2 * &Coeff::int(m));
    if !predicted.approx_eq(&delta, tol) {
        return Err(Error::Inconsistent(format!("δ = {delta} but nλ1 + mλ2 = {predicted}")));
    }
    let data = NormalData::Resonant { p, q, k, mu: inv.mu.clone(), lambda2: lam2.clone(), q_poly: Some(inv.q_poly.clone()) };
    let probe = transverse_partner(&data, &PartnerTarget::Exponents(n, m), &Coeff::one(), &Coeff::zero(), ord, tol)?;
    let dress = probe.yx.qu.powc(&probe.gamma)?;
    // both coefficients are constants times x^n y^m (Q∘u)^γ
    let read_const = |f: &RationalSeries| -> Result<Coeff, Error> {
        if !any_nonzero(&f.num, tol) {
            return Ok(Coeff::zero().like(&lam2));
        }
        let (fn_, fm, _, rest) = laurent_lead(f, tol).ok_or_else(|| Error::Degenerate("coefficient is not a monomial times a unit".into()))?;
        if (fn_, fm) != (n, m) {
            return Err(Error::Inconsistent("Z0 and W0 coefficients carry different monomials".into()));
        }
        let ratio = &rest * &dress.truncate(rest.order()).invert_unit()?;
        ratio.as_constant(tol).ok_or_else(|| Error::Inconsistent("partner coefficient is not a constant times the dressing".into()))
    };
    let c = read_const(&a_coef)?;
    let d_check = read_const(&b_coef)?;
    if !d_check.approx_eq(&d, tol) {
        return Err(Error::Inconsistent("leading W0 coefficient mismatch".into()));
    }
    let partner = transverse_partner(&data, &PartnerTarget::Exponents(n, m), &c, &d, ord, tol)?;
    // the division by det(Z0, W0) = λ2 (Q∘u) u^k xy costs its degree
    let certified_order = ord.saturating_sub(k * (p + q) + 2);
    let partner_residual = dressed_vs_field(&(partner.yx.clone(), partner.yy.clone()), &y_hat, certified_order)?;
    let bracket_residual = partner.bracket_residual()?;
    Ok(NormalFormReport {
        k,
        mu: inv.mu.clone(),
        q_poly: inv.q_poly.clone(),
        n,
        m,
        gamma: partner.gamma.clone(),
        p_poly: Vec::new(),
        delta,
        c,
        d,
        rotation: inv.rotation.clone(),
        z_tilde: z0,
        y_tilde: (partner.yx, partner.yy),
        chart,
        conj_residual,
        partner_residual,
        bracket_residual,
        certified_order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{classify_with, RationalityHint};
    use crate::gen::Sampler;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn quasi(n: u32) -> (VectorField, SingularityClass) {
        let l1 = Coeff::float(-SQRT2);
        let l2 = Coeff::float(1.0);
        let z0 = VectorField::diagonal(&l1, &l2, n);
        let class = SingularityClass::NonNilpotent { lambda1: l1, lambda2: l2, subtype: Subtype::QuasiResonant };
        (z0, class)
    }

    fn resonant_class(p: i64, q: i64) -> SingularityClass {
        let l2 = Coeff::one();
        SingularityClass::NonNilpotent { lambda1: Coeff::ratio(-p, q), lambda2: l2, subtype: Subtype::Resonant { p, q } }
    }

    /// The field pushed forward by φ: pullback(φ, result) = z.
    fn push(phi: &FormalMap, z: &VectorField) -> VectorField {
        pullback(&invert_map(phi).unwrap(), z).unwrap()
    }

    #[test]
    fn prepared_linear_field_is_trivial() {
        let (z0, class) = quasi(8);
        let prep = prepare(&z0, &class, 1e-10).unwrap();
        assert!(prep.u.approx_eq(&Series::one(8), 1e-14));
        assert!(prep.r.max_abs() < 1e-14);
        assert!(prep.chart.residual(&FormalMap::identity(8)) < 1e-14);
        let lin = linearize_quasiresonant(&prep, 1e-8).unwrap();
        assert!(lin.chart.residual(&FormalMap::identity(8)) < 1e-14);
    }

    #[test]
    fn prepared_axes_field_reads_u_and_r_by_division() {
        // Z0 + x²∂x
        let n = 8;
        let (z0, class) = quasi(n);
        let z = z0.add(&VectorField::new(Series::monomial(Coeff::float(1.0), 2, 0, n), Series::zero(n)));
        let prep = prepare(&z, &class, 1e-10).unwrap();
        // U = 1 + x/λ1, R = λ2/U − λ2
        let u = &Series::one(n) + &Series::x(n).scale(&Coeff::float(-1.0 / SQRT2));
        assert!(prep.u.approx_eq(&u, 1e-12));
        let r = &u.invert_unit().unwrap() - &Series::one(n);
        assert!(prep.r.approx_eq(&r.truncate(prep.r.order()), 1e-12));
        assert!(prep.chart.residual(&FormalMap::identity(n)) < 1e-14);
    }

    #[test]
    fn curved_separatrix_is_straightened() {
        let n = 9;
        let (z0, class) = quasi(n);
        let bend = FormalMap::raw(&Series::x(n) + &Series::monomial(Coeff::float(0.5), 0, 2, n), &Series::y(n) + &Series::monomial(Coeff::float(1.0), 2, 0, n));
        let z = push(&bend, &z0);
        let prep = prepare(&z, &class, 1e-10).unwrap();
        assert!(prep.r.constant_term().approx_zero(1e-12));
        let back = pullback(&prep.chart, &z).unwrap();
        let (a, b) = back.series().unwrap();
        // both axes are invariant
        assert!(a.terms().all(|(e, c)| e.a > 0 || c.abs() < 1e-10));
        assert!(b.terms().all(|(e, c)| e.b > 0 || c.abs() < 1e-10));
        let ux = prep.x_field().mul_series(&prep.u);
        assert!(back.truncate(prep.order()).residual(&ux.truncate(prep.order())) < 1e-10);
    }

    #[test]
    fn tangential_step_alone_for_unit_multiple() {
        // exact: λ1 = i, λ2 = 1 and Z = (1 + x) Z0
        let n = 9;
        let (l1, l2) = (Coeff::i(), Coeff::one());
        let z0 = VectorField::diagonal(&l1, &l2, n);
        let z = z0.mul_series(&(&Series::one(n) + &Series::x(n))).to_holomorphic().unwrap();
        let class = classify_with(&z, None, 1e-10).unwrap();
        let prep = prepare(&z, &class, 1e-10).unwrap();
        assert!(prep.r.is_zero());
        let lin = linearize_quasiresonant(&prep, 1e-8).unwrap();
        assert!(lin.n.is_zero() && !lin.t.is_zero());
        let back = pullback(&lin.chart, &z).unwrap();
        assert!(back.eq_fields(&VectorField::diagonal(&l1, &l2, back.order())));
        // float, λ = −√2
        let (z0, class) = quasi(n);
        let z = z0.mul_series(&(&Series::one(n) + &Series::x(n)).to_float()).to_holomorphic().unwrap();
        let prep = prepare(&z, &class, 1e-10).unwrap();
        let lin = linearize_quasiresonant(&prep, 1e-8).unwrap();
        let back = pullback(&lin.chart, &z).unwrap();
        assert!(back.residual(&z0.truncate(back.order())) < 1e-9);
    }

    #[test]
    fn quasi_resonant_round_trip() {
        let n = 10;
        let (z0, class) = quasi(n);
        let mut smp = Sampler::new(7);
        let psi = smp.float_near_identity(n, 3, 0.5, 0.5);
        let z = push(&psi, &z0);
        let class2 = classify_with(&z, Some(RationalityHint::Irrational), 1e-10).unwrap();
        assert_eq!(class2.subtype(), class.subtype());
        let prep = prepare(&z, &class2, 1e-10).unwrap();
        let lin = linearize_quasiresonant(&prep, 1e-8).unwrap();
        let back = pullback(&lin.chart, &z).unwrap();
        let z0c = VectorField::diagonal(&class2.eigenvalues().unwrap().0, &class2.eigenvalues().unwrap().1, back.order());
        assert!(back.residual(&z0c) <= 1e-6, "residual {}", back.residual(&z0c));
    }

    fn x0(p: u32, q: u32, k: u32, mu: Coeff, n: u32) -> VectorField {
        normal_x0(p, q, k, &mu, &Coeff::one(), n)
    }

    #[test]
    fn invariants_of_normal_forms() {
        let n = 10;
        let mu = Coeff::ratio(1, 2);
        let x = x0(1, 1, 1, mu.clone(), n);
        let prep = prepare(&x, &resonant_class(1, 1), 0.0).unwrap();
        assert_eq!(prep.kind, PreparedKind::Resonant { p: 1, q: 1, k: 1, mu: mu.clone(), lambda2: Coeff::one() });
        let inv = formal_invariants(&prep, 0.0).unwrap();
        assert_eq!(inv.q_poly, vec![Coeff::one(), Coeff::zero()]);
        assert!(inv.t.is_zero());
        // U = 1 + u² with k = 1: Q = 1 and T absorbs u²
        let u2 = &Series::one(n) + &Series::monomial(Coeff::one(), 2, 2, n);
        let z = x.mul_series(&u2).to_holomorphic().unwrap();
        let prep = prepare(&z, &resonant_class(1, 1), 0.0).unwrap();
        let inv = formal_invariants(&prep, 0.0).unwrap();
        assert_eq!(inv.q_poly, vec![Coeff::one(), Coeff::zero()]);
        assert!(!inv.t.is_zero());
        let back = pullback(&inv.chart, &z).unwrap();
        assert!(back.eq_fields(&inv.z0(back.order())));
        // U = 1 + u: Q = 1 + u
        let u1 = &Series::one(n) + &Series::monomial(Coeff::one(), 1, 1, n);
        let z = x.mul_series(&u1).to_holomorphic().unwrap();
        let prep = prepare(&z, &resonant_class(1, 1), 0.0).unwrap();
        let inv = formal_invariants(&prep, 0.0).unwrap();
        assert_eq!(inv.q_poly, vec![Coeff::one(), Coeff::one()]);
        let back = pullback(&inv.chart, &z).unwrap();
        assert!(back.eq_fields(&inv.z0(back.order())));
    }

    #[test]
    fn invariants_survive_conjugation() {
        let n = 11;
        let mu = Coeff::ratio(1, 2);
        let q = &Series::one(n) + &Series::monomial(Coeff::ratio(-3, 2), 1, 1, n);
        let z_nf = x0(1, 1, 1, mu.clone(), n).mul_series(&q).to_holomorphic().unwrap();
        let mut smp = Sampler::new(11);
        let z = push(&smp.near_identity(n, 3, 0.3), &z_nf);
        let class = classify_with(&z, None, 0.0).unwrap();
        let prep = prepare(&z, &class, 0.0).unwrap();
        let inv = formal_invariants(&prep, 0.0).unwrap();
        assert_eq!((inv.k, inv.mu.clone()), (1, mu));
        assert_eq!(inv.q_poly, vec![Coeff::one(), Coeff::ratio(-3, 2)]);
        let back = pullback(&inv.chart, &z).unwrap();
        assert!(back.eq_fields(&inv.z0(back.order())));
    }

    #[test]
    fn saddle_node_orbital_form() {
        // x²∂x + y(1 + x/3)∂y conjugated
        let n = 9;
        let mu = Coeff::ratio(1, 3);
        let z_nf = x0(0, 1, 1, mu.clone(), n);
        let mut smp = Sampler::new(3);
        let z = push(&smp.near_identity(n, 3, 0.3), &z_nf);
        let class = classify_with(&z, None, 0.0).unwrap();
        let prep = prepare(&z, &class, 0.0).unwrap();
        assert_eq!(prep.kind, PreparedKind::Resonant { p: 0, q: 1, k: 1, mu, lambda2: Coeff::one() });
        assert!(prep.r.is_zero());
    }

    #[test]
    fn abelian_pair_has_trivial_exponents() {
        let n = 10;
        let x = x0(1, 1, 1, Coeff::ratio(1, 2), n);
        let w0 = VectorField::diagonal(&Coeff::int(-1), &Coeff::one(), n);
        let prep = prepare(&x, &resonant_class(1, 1), 0.0).unwrap();
        let rep = resonant_normal_form(&prep, &x, &w0, 0.0).unwrap();
        assert_eq!((rep.n, rep.m), (0, 0));
        assert_eq!(rep.delta, Coeff::zero());
        assert!(rep.p_poly.is_empty());
        assert_eq!((rep.c.clone(), rep.d.clone()), (Coeff::zero(), Coeff::one()));
        assert_eq!(rep.bracket_residual, 0.0);
        assert_eq!(rep.partner_residual, 0.0);
    }

    #[test]
    fn construct_conjugate_recover() {
        // λ = −1/2, k = 1, μ = 0, (n, m) = (1, 1), δ = λ1 + λ2
        let n = 12;
        let data = NormalData::Resonant { p: 1, q: 2, k: 1, mu: Coeff::zero(), lambda2: Coeff::one(), q_poly: None };
        let pt = transverse_partner(&data, &PartnerTarget::Exponents(1, 1), &Coeff::int(2), &Coeff::one(), n, 0.0).unwrap();
        let ((_, _), bx) = pt.yx.expand().unwrap();
        let (_, by) = pt.yy.expand().unwrap();
        let y_nf = VectorField::new(bx.shift(1, 1), by.shift(1, 1));
        let mut smp = Sampler::new(5);
        let phi = smp.near_identity(n, 3, 0.25);
        let z = push(&phi, &pt.z0);
        let y = push(&phi, &y_nf);
        let class = classify_with(&z, None, 0.0).unwrap();
        let prep = prepare(&z, &class, 0.0).unwrap();
        let rep = resonant_normal_form(&prep, &z, &y, 0.0).unwrap();
        assert_eq!((rep.k, rep.mu.clone(), rep.n, rep.m), (1, Coeff::zero(), 1, 1));
        assert_eq!(rep.q_poly, pt.q_poly);
        assert_eq!(rep.gamma, Coeff::ratio(-1, 2));
        assert_eq!(rep.delta, Coeff::ratio(1, 2));
        assert_eq!(rep.conj_residual, 0.0);
        assert_eq!(rep.partner_residual, 0.0);
        assert_eq!(rep.bracket_residual, 0.0);
        assert!(!rep.c.is_zero());
    }

    #[test]
    fn nodes_and_nilpotent_are_refused() {
        let z = VectorField::diagonal(&Coeff::int(2), &Coeff::one(), 6);
        let class = classify_with(&z, None, 0.0).unwrap();
        assert!(matches!(prepare(&z, &class, 0.0), Err(Error::Precondition(_))));
        assert!(prepare(&z, &SingularityClass::Nilpotent, 0.0).is_err());
    }
}
