//! Randomized property suites behind `verify`.
//!
//! Each suite draws its inputs from a seeded sampler, so a (suite, trials, seed)
//! triple always produces the same report. Failing trials are serialized as
//! counterexamples in the parser's text format.

use serde_json::{json, Value};

use super::{coeff_json, field_json, map_json, parse_field, print_field, series_json, Mode};
use crate::cohom::{solve_diagonal, solve_resonant, DiagonalData, ResonantData};
use crate::conjugacy::{invert_map, pullback, tangential, tangential_partner, transversal, FormalMap};
use crate::fields::{classify_with, d_one_form, dual_basis, godbillon_vey, GodbillonVey, RationalityHint, SingularityClass, Subtype, VectorField};
use crate::galois::{algebra_membership, aut_pair_check, slice, star_residuals, symmetry_decompose};
use crate::gen::Sampler;
use crate::normalize::{
    delta_lattice, linearize_quasiresonant, prepare, resonant_normal_form, transverse_partner, DeltaLattice, LatticeFlags,
    NormalData, PartnerTarget,
};
use crate::series::{Coeff, Series};
use crate::Error;

pub const SUITES: [&str; 10] = [
    "godbillon-vey",
    "prop2.8",
    "star-equivalence",
    "lemma3.2",
    "obstructions",
    "quasi-resonant",
    "resonant",
    "partners",
    "lattice",
    "parser",
];

#[derive(Clone, Debug)]
pub struct PropertyResult {
    pub name: String,
    pub pass: bool,
    pub trials: usize,
    pub counterexample: Option<Value>,
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub trials: usize,
    pub pass: bool,
    pub properties: Vec<PropertyResult>,
}

impl SuiteReport {
    pub fn to_json(&self) -> Value {
        json!({
            "suite": self.suite,
            "seed": self.seed,
            "trials": self.trials,
            "pass": self.pass,
            "properties": self.properties.iter().map(|p| json!({
                "name": p.name,
                "pass": p.pass,
                "trials": p.trials,
                "counterexample": p.counterexample.clone().unwrap_or(Value::Null),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn property(&self, name: &str) -> Option<&PropertyResult> {
        self.properties.iter().find(|p| p.name == name)
    }
}

/// Per-property tally; keeps the first counterexample.
struct Tally {
    props: Vec<PropertyResult>,
}

impl Tally {
    fn new(names: &[&str]) -> Tally {
        Tally {
            props: names
                .iter()
                .map(|n| PropertyResult { name: n.to_string(), pass: true, trials: 0, counterexample: None })
                .collect(),
        }
    }

    fn record(&mut self, name: &str, ok: bool, cx: impl FnOnce() -> Value) {
        let p = self.props.iter_mut().find(|p| p.name == name).expect("declared property");
        p.trials += 1;
        if !ok && p.pass {
            p.pass = false;
            p.counterexample = Some(cx());
        }
    }

    /// An error inside a trial fails the property with the error as counterexample.
    fn record_err(&mut self, name: &str, e: &Error, inputs: Value) {
        self.record(name, false, || json!({ "inputs": inputs, "error": super::error_json(e) }));
    }

    fn finish(self, suite: &str, seed: u64, trials: usize) -> SuiteReport {
        let pass = self.props.iter().all(|p| p.pass && p.trials > 0);
        SuiteReport { suite: suite.to_string(), seed, trials, pass, properties: self.props }
    }
}

pub fn default_trials(name: &str) -> Option<usize> {
    Some(match name {
        "godbillon-vey" => 20,
        "prop2.8" => 100,
        "star-equivalence" => 20,
        "lemma3.2" => 50,
        "obstructions" => 20,
        "quasi-resonant" => 5,
        "resonant" => 2,
        "partners" => 3,
        "lattice" => 20,
        "parser" => 50,
        _ => return None,
    })
}

pub fn run_suite(name: &str, trials: Option<usize>, seed: u64) -> Result<SuiteReport, Error> {
    let n = trials.or_else(|| default_trials(name)).ok_or_else(|| {
        Error::Usage(format!("unknown suite '{name}'; available: {}", SUITES.join(", ")))
    })?;
    let mut smp = Sampler::new(seed);
    let tally = match name {
        "godbillon-vey" => gv_suite(&mut smp, n),
        "prop2.8" => prop28(&mut smp, n),
        "star-equivalence" => star_equivalence(&mut smp, n),
        "lemma3.2" => lemma32(&mut smp, n),
        "obstructions" => obstructions(&mut smp, n),
        "quasi-resonant" => quasi_resonant(&mut smp, n),
        "resonant" => resonant(&mut smp, n),
        "partners" => partners(&mut smp, n),
        "lattice" => lattice(&mut smp, n),
        "parser" => parser(&mut smp, n),
        _ => unreachable!("default_trials covers every suite"),
    };
    Ok(tally.finish(name, seed, n))
}

/// φ_*W, written as the pullback by φ⁻¹.
fn push(phi: &FormalMap, w: &VectorField) -> Result<VectorField, Error> {
    pullback(&invert_map(phi)?, w)
}

fn nonzero_rational(smp: &mut Sampler) -> Coeff {
    loop {
        let c = smp.small_rational();
        if !c.is_zero() {
            return c;
        }
    }
}

// ---- Godbillon–Vey identities for the dual coframe ----

/// An exact affine pair (Z, Y, δ) in normal coordinates.
fn normal_pair(smp: &mut Sampler, order: u32) -> Result<(VectorField, VectorField, Coeff), Error> {
    if smp.chance(0.5) {
        // Z0 linear, Y0 = x^a y^b (α x∂x + β y∂y): δ = aλ1 + bλ2
        let l1 = nonzero_rational(smp);
        let l2 = nonzero_rational(smp);
        let (a, b) = (smp.int(0, 2) as u32, smp.int(0, 2) as u32);
        let al = smp.small_rational();
        let mut be = smp.small_rational();
        if (&(&l1 * &be) - &(&l2 * &al)).is_zero() {
            be = &be + &Coeff::one();
        }
        let z = VectorField::diagonal(&l1, &l2, order);
        let f = Series::monomial(Coeff::one(), a, b, order);
        let y = VectorField::new(&f * &Series::x(order).scale(&al), &f * &Series::y(order).scale(&be));
        let delta = &(&l1 * &Coeff::int(a as i64)) + &(&l2 * &Coeff::int(b as i64));
        Ok((z, y, delta))
    } else {
        // resonant saddle λ = −1, k = 1, μ = 1/2 with the (1, 0) partner
        let data = NormalData::Resonant { p: 1, q: 1, k: 1, mu: Coeff::ratio(1, 2), lambda2: Coeff::one(), q_poly: None };
        let c = smp.small_rational();
        let pt = transverse_partner(&data, &PartnerTarget::Exponents(1, 0), &c, &Coeff::one(), order, 0.0)?;
        let y = expand_partner(&pt)?;
        Ok((pt.z0.clone(), y, pt.delta.clone()))
    }
}

/// x^n y^m times the dressed body, as a plain field; needs n, m ≥ 0.
fn expand_partner(pt: &crate::normalize::Partner) -> Result<VectorField, Error> {
    let ((a, b), sx) = pt.yx.expand()?;
    let ((a2, b2), sy) = pt.yy.expand()?;
    if a < 0 || b < 0 || (a, b) != (a2, b2) {
        return Err(Error::Precondition("partner has negative exponents".into()));
    }
    Ok(VectorField::new(sx.shift(a as u32, b as u32), sy.shift(a as u32, b as u32)))
}

fn gv_suite(smp: &mut Sampler, trials: usize) -> Tally {
    let order = 10;
    let mut t = Tally::new(&["dtau_z", "dtau_y", "informative", "literal_orientation_differs"]);
    for _ in 0..trials {
        let built = normal_pair(smp, order).and_then(|(z0, y0, delta)| {
            let phi = smp.near_identity(order, 3, 0.3);
            Ok((push(&phi, &z0)?, push(&phi, &y0)?, delta, phi))
        });
        let (z, y, delta, phi) = match built {
            Ok(v) => v,
            Err(e) => {
                t.record_err("dtau_z", &e, Value::Null);
                continue;
            }
        };
        let inputs = || json!({ "Z": field_json(&z), "Y": field_json(&y), "delta": coeff_json(&delta), "map": map_json(&phi) });
        let run = || -> Result<(GodbillonVey, Option<bool>), Error> {
            let gv = godbillon_vey(&z, &y, &delta)?;
            // τ_Z∧τ_Y in place of τ_Y∧τ_Z changes the sign of the δ term
            let control = if delta.is_zero() {
                None
            } else {
                let (tz, ty) = dual_basis(&z, &y)?;
                let lit = d_one_form(&ty).sub(&tz.wedge(&ty).scale(&delta));
                Some(!lit.num.is_zero())
            };
            Ok((gv, control))
        };
        match run() {
            Ok((gv, control)) => {
                t.record("dtau_z", gv.dtau_z.is_zero(), || json!({ "inputs": inputs(), "numerator": series_json(&gv.dtau_z) }));
                t.record("dtau_y", gv.dtau_y.is_zero(), || json!({ "inputs": inputs(), "numerator": series_json(&gv.dtau_y) }));
                t.record("informative", gv.certified > gv.det_valuation, || {
                    json!({ "inputs": inputs(), "certified": gv.certified, "det_valuation": gv.det_valuation })
                });
                if let Some(c) = control {
                    t.record("literal_orientation_differs", c, inputs);
                }
            }
            Err(e) => t.record_err("dtau_z", &e, inputs()),
        }
    }
    t
}

// ---- tangential and transversal changes against direct pullback ----

fn prop28(smp: &mut Sampler, trials: usize) -> Tally {
    let order = 8;
    let names = ["N*Z", "N*Y", "T*Z", "T*Y"];
    let mut t = Tally::new(&names);
    for _ in 0..trials {
        let x = |smp: &mut Sampler, lo: u32, hi: u32| -> Series {
            let s = smp.poly(order, lo, hi, 0.7);
            Series::from_terms(order, s.terms().filter(|(e, _)| e.b == 0).map(|(e, c)| ((e.a, 0), c.clone())))
        };
        // Z = x a1(x) ∂x + (b(x) + y c(x)) ∂y and Y = x^j ∂y, so [Z, Y] = (j a1 − c) Y
        let j = smp.int(1, 3) as u32;
        let a1 = x(smp, 0, 2);
        let b = x(smp, 1, 3);
        let constant_d = smp.chance(0.5);
        let delta = smp.small_rational();
        let c = if constant_d {
            &a1.scale(&Coeff::int(j as i64)) - &Series::constant(delta.clone(), order)
        } else {
            x(smp, 0, 2)
        };
        let z0 = VectorField::new(&Series::x(order) * &a1, &b + &(&Series::y(order) * &c));
        let y0 = VectorField::new(Series::zero(order), Series::monomial(Coeff::one(), j, 0, order));
        let d0 = &a1.scale(&Coeff::int(j as i64)) - &c;
        // a random invertible linear change
        let l = loop {
            let m = [smp.int(-2, 2), smp.int(-2, 2), smp.int(-2, 2), smp.int(-2, 2)];
            if m[0] * m[3] - m[1] * m[2] != 0 {
                break FormalMap::linear(&Coeff::int(m[0]), &Coeff::int(m[1]), &Coeff::int(m[2]), &Coeff::int(m[3]), order);
            }
        };
        let tt = smp.poly(order, 1, 3, 0.5);
        let nn = smp.poly(order, 1, 3, 0.5);
        let res = (|| -> Result<Vec<(&'static str, bool, Value)>, Error> {
            let l = l?;
            let z = pullback(&l, &z0)?;
            let y = pullback(&l, &y0)?;
            let d = l.apply(&d0)?;
            let mut out = Vec::new();
            let pred = transversal(&z, &y, &d, &nn, 0.0)?;
            let dz = pullback(&pred.map, &z)?;
            let dy = pullback(&pred.map, &y)?;
            out.push(("N*Z", dz.eq_fields(&pred.z), json!(dz.residual(&pred.z))));
            out.push(("N*Y", dy.eq_fields(&pred.y), json!(dy.residual(&pred.y))));
            let (tmap, tz) = tangential(&z, &tt)?;
            let direct = pullback(&tmap, &z)?;
            out.push(("T*Z", direct.eq_fields(&tz), json!(direct.residual(&tz))));
            if constant_d {
                let ty = tangential_partner(&z, &y, &delta, &tt)?;
                let direct = pullback(&tmap, &y)?;
                out.push(("T*Y", direct.eq_fields(&ty), json!(direct.residual(&ty))));
            }
            Ok(out)
        })();
        let inputs = || {
            json!({
                "Z": field_json(&z0), "Y": field_json(&y0), "D": series_json(&d0),
                "T": series_json(&tt), "N": series_json(&nn),
            })
        };
        match res {
            Ok(checks) => {
                for (name, ok, r) in checks {
                    t.record(name, ok, || json!({ "inputs": inputs(), "residual": r }));
                }
            }
            Err(e) => t.record_err("N*Z", &e, inputs()),
        }
    }
    t
}

// ---- (★) residuals against algebra membership on the rectified chart ----

fn rectified(delta: &Coeff, n: u32) -> Result<(VectorField, VectorField), Error> {
    let e = Series::x(n).scale(delta).exp()?;
    Ok((VectorField::d_dx(n), VectorField::new(Series::zero(n), e)))
}

fn star_equivalence(smp: &mut Sampler, trials: usize) -> Tally {
    let order = 10;
    let mut t = Tally::new(&["star_iff_membership", "bracket_closure", "aut_constants", "recomposition"]);
    for d in [0, 1] {
        let delta = Coeff::int(d);
        let (z, y) = match rectified(&delta, order) {
            Ok(p) => p,
            Err(e) => {
                t.record_err("star_iff_membership", &e, json!({ "delta": d }));
                continue;
            }
        };
        let e = Series::x(order).scale(&delta.neg_ref()).exp().expect("exp of a linear series");
        let mut monos = Vec::new();
        for deg in 0..=6u32 {
            for a in 0..=deg {
                monos.push(Series::monomial(Coeff::one(), a, deg - a, order));
            }
        }
        let mut ns = monos.clone();
        ns.extend(monos.iter().filter(|m| m.terms().all(|(e, _)| e.a == 0)).map(|m| &e * m));
        let mut members = Vec::new();
        for tt in &monos {
            for nn in &ns {
                let x = z.mul_series(tt).add(&y.mul_series(nn));
                let inputs = || json!({ "delta": d, "T": series_json(tt), "N": series_json(nn) });
                let star = star_residuals(&z, &y, &delta, tt, nn, 0.0);
                let member = algebra_membership(&z, &y, &delta, &x, 0.0);
                match (star, member) {
                    (Ok(s), Ok(m)) => {
                        let ok = s.vanish(0.0) == m.is_some();
                        t.record("star_iff_membership", ok, || {
                            json!({ "inputs": inputs(), "star_vanishes": s.vanish(0.0), "member": m.is_some() })
                        });
                        if m.is_some() {
                            members.push(x);
                        }
                    }
                    (Err(e), _) | (_, Err(e)) => t.record_err("star_iff_membership", &e, inputs()),
                }
            }
        }
        // members form a Lie algebra up to the truncation loss of one bracket
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                let br = a.bracket(b);
                let r = algebra_membership(&z.truncate(br.order()), &y.truncate(br.order()), &delta, &br, 0.0);
                t.record("bracket_closure", matches!(r, Ok(Some(_))), || {
                    json!({ "delta": d, "X1": field_json(a), "X2": field_json(b) })
                });
            }
        }
        // random symmetries: structure constants compose, decomposition recomposes exactly
        let per = trials.div_ceil(2);
        let draw = |smp: &mut Sampler| -> FormalMap {
            let alpha = slice(&smp.poly(order, 1, 4, 0.7));
            let beta = &Series::y(order).scale(&Coeff::int(smp.int(1, 3))) + &slice(&smp.poly(order, 2, 4, 0.7));
            FormalMap::raw(&Series::x(order) + &alpha, beta)
        };
        // pair automorphisms on this chart: (t + a z + τ, b z), with a = 0 unless δ = 0.
        // For δ ≠ 0 a shift τ gives c = e^{-δτ}/b, not rational, so τ = 0 there.
        let draw_aut = |smp: &mut Sampler| -> FormalMap {
            let a = if d == 0 { smp.small_rational() } else { Coeff::zero() };
            let b = nonzero_rational(smp);
            let tau = Series::constant(if d == 0 { smp.small_rational() } else { Coeff::zero() }, order);
            FormalMap::raw(&(&Series::x(order) + &Series::y(order).scale(&a)) + &tau, Series::y(order).scale(&b))
        };
        for _ in 0..per {
            let a1 = draw_aut(smp);
            let a2 = draw_aut(smp);
            let c1 = aut_pair_check(&a1, &z, &y, &delta, 0.0);
            let c2 = aut_pair_check(&a2, &z, &y, &delta, 0.0);
            let c12 = a1.compose(&a2).ok().and_then(|g| aut_pair_check(&g, &z, &y, &delta, 0.0));
            let ok = match (c1, c2, c12) {
                (Some((c1, d1)), Some((c2, d2)), Some((c, dd))) => c == &c1 * &c2 && dd == &d1 + &(&c1 * &d2),
                _ => false,
            };
            t.record("aut_constants", ok, || json!({ "delta": d, "G1": map_json(&a1), "G2": map_json(&a2) }));
            let g = draw(smp);
            let inputs = || json!({ "delta": d, "G": map_json(&g) });
            match symmetry_decompose(&z, &y, &delta, &g, 0.0) {
                Ok(dec) => t.record("recomposition", dec.recomposition_residual == Some(0.0) && dec.sol_residual == 0.0, || {
                    json!({ "inputs": inputs(), "recomposition_residual": dec.recomposition_residual, "sol_residual": dec.sol_residual })
                }),
                Err(e) => t.record_err("recomposition", &e, inputs()),
            }
        }
    }
    t
}

// ---- homological equations ----

fn lemma32(smp: &mut Sampler, trials: usize) -> Tally {
    let order = 12;
    let mut t = Tally::new(&["float_round_trip", "rational_refused", "resonant_reroute"]);
    let l1 = Coeff::float(-std::f64::consts::SQRT_2);
    let l2 = Coeff::float(1.0);
    let zero = Series::zero(order).to_float();
    let data = DiagonalData::new(l1.clone(), l2.clone(), zero.clone());
    let (p, q) = (3u32, 7u32);
    let rdata = ResonantData::new(p, q, 1, Coeff::zero(), Coeff::one(), Series::zero(order), 0).expect("valid resonant data");
    for _ in 0..trials {
        let f0 = smp.float_poly(order, 1, order, 0.5, 1.0);
        let g = data.apply(&f0);
        match solve_diagonal(&l1, &l2, &zero, &g, 1e-12) {
            Ok(f) => {
                let r = (&f - &f0).max_abs();
                t.record("float_round_trip", r <= 1e-8, || json!({ "F0": series_json(&f0), "residual": r }));
            }
            Err(e) => t.record_err("float_round_trip", &e, json!({ "F0": series_json(&f0) })),
        }
        // λ1/λ2 = −3/7 exactly: the diagonal solver refuses, the resonant one solves
        let f0 = smp.poly(order, 1, order, 0.3);
        let g = rdata.apply(&f0);
        let refused = solve_diagonal(&Coeff::ratio(-3, 7), &Coeff::one(), &Series::zero(order), &g, 1e-12);
        let ok = matches!(refused, Err(Error::RationalRatio { p: 3, q: 7 }));
        t.record("rational_refused", ok, || json!({ "F0": series_json(&f0) }));
        match solve_resonant(&rdata, &g) {
            Ok((f, obs)) => {
                let cert = order - (p + q);
                let ok = obs.is_empty() && rdata.apply(&f) == g && f.truncate(cert) == f0.truncate(cert);
                t.record("resonant_reroute", ok, || json!({ "F0": series_json(&f0), "F": series_json(&f) }));
            }
            Err(e) => t.record_err("resonant_reroute", &e, json!({ "F0": series_json(&f0) })),
        }
    }
    t
}

fn obstructions(smp: &mut Sampler, trials: usize) -> Tally {
    let order = 8;
    let mut t = Tally::new(&["saddle_node_x", "saddle_node_one", "zeroed_is_solvable"]);
    let d = ResonantData::new(0, 1, 1, Coeff::zero(), Coeff::one(), Series::zero(order), 0).expect("valid saddle-node data");
    let single = |g: &Series, a: u32, b: u32| -> Result<bool, Error> {
        let (_, obs) = solve_resonant(&d, g)?;
        let nz = obs.nonzero();
        if nz.len() != 1 || (nz[0].0.a, nz[0].0.b) != (a, b) {
            return Ok(false);
        }
        let fixed = g - &obs.as_series(order);
        let (f, again) = solve_resonant(&d, &fixed)?;
        Ok(again.is_empty() && d.apply(&f) == fixed)
    };
    for (name, g, e) in [("saddle_node_x", Series::x(order), (1, 0)), ("saddle_node_one", Series::one(order), (0, 0))] {
        match single(&g, e.0, e.1) {
            Ok(ok) => t.record(name, ok, || json!({ "G": series_json(&g), "expected": [e.0, e.1] })),
            Err(err) => t.record_err(name, &err, json!({ "G": series_json(&g) })),
        }
    }
    for _ in 0..trials {
        let g = smp.poly(order, 0, order, 0.4);
        let res = solve_resonant(&d, &g).and_then(|(_, obs)| {
            let fixed = &g - &obs.as_series(order);
            let (f, again) = solve_resonant(&d, &fixed)?;
            Ok(again.is_empty() && d.apply(&f) == fixed)
        });
        match res {
            Ok(ok) => t.record("zeroed_is_solvable", ok, || json!({ "G": series_json(&g) })),
            Err(e) => t.record_err("zeroed_is_solvable", &e, json!({ "G": series_json(&g) })),
        }
    }
    t
}

// ---- normal form pipelines ----

fn quasi_resonant(smp: &mut Sampler, trials: usize) -> Tally {
    let order = 10;
    let mut t = Tally::new(&["class_preserved", "linearization_residual"]);
    let l1 = Coeff::float(-std::f64::consts::SQRT_2);
    let l2 = Coeff::float(1.0);
    let z0 = VectorField::diagonal(&l1, &l2, order);
    for _ in 0..trials {
        let psi = smp.float_near_identity(order, 3, 0.5, 0.5);
        let inputs = || json!({ "map": map_json(&psi) });
        let run = || -> Result<(bool, f64), Error> {
            let z = push(&psi, &z0)?;
            let class = classify_with(&z, Some(RationalityHint::Irrational), 1e-10)?;
            let same = matches!(class, SingularityClass::NonNilpotent { subtype: Subtype::QuasiResonant, .. });
            let prep = prepare(&z, &class, 1e-10)?;
            let lin = linearize_quasiresonant(&prep, 1e-8)?;
            let back = pullback(&lin.chart, &z)?;
            let (a, b) = class.eigenvalues().expect("non-nilpotent");
            Ok((same, back.residual(&VectorField::diagonal(&a, &b, back.order()))))
        };
        match run() {
            Ok((same, r)) => {
                t.record("class_preserved", same, inputs);
                t.record("linearization_residual", r <= 1e-6, || json!({ "inputs": inputs(), "residual": r }));
            }
            Err(e) => t.record_err("linearization_residual", &e, inputs()),
        }
    }
    t
}

/// Forward-constructs (Z̃, Ỹ) for λ = −1, k = 1, μ = 1/2, (n, m) = (1, 0),
/// conjugates by a random exact map and runs the full pipeline.
pub fn resonant_trial(smp: &mut Sampler, order: u32) -> Result<(bool, Value), Error> {
    let mu = Coeff::ratio(1, 2);
    let data = NormalData::Resonant { p: 1, q: 1, k: 1, mu: mu.clone(), lambda2: Coeff::one(), q_poly: None };
    let c = nonzero_rational(smp);
    let pt = transverse_partner(&data, &PartnerTarget::Exponents(1, 0), &c, &Coeff::one(), order, 0.0)?;
    let y_nf = expand_partner(&pt)?;
    let phi = smp.near_identity(order, 3, 0.25);
    let z = push(&phi, &pt.z0)?;
    let y = push(&phi, &y_nf)?;
    let class = classify_with(&z, None, 0.0)?;
    let prep = prepare(&z, &class, 0.0)?;
    let rep = resonant_normal_form(&prep, &z, &y, 0.0)?;
    let ok = rep.k == 1
        && rep.mu == mu
        && rep.q_poly == pt.q_poly
        && (rep.n, rep.m) == (1, 0)
        && rep.gamma == pt.gamma
        && rep.delta == pt.delta
        && rep.conj_residual == 0.0
        && rep.partner_residual == 0.0
        && rep.bracket_residual == 0.0;
    let report = json!({
        "map": map_json(&phi),
        "c": coeff_json(&c),
        "k": rep.k, "mu": coeff_json(&rep.mu), "Q": super::coeffs_json(&rep.q_poly),
        "n": rep.n, "m": rep.m, "gamma": coeff_json(&rep.gamma), "delta": coeff_json(&rep.delta),
        "expected_Q": super::coeffs_json(&pt.q_poly), "expected_gamma": coeff_json(&pt.gamma),
        "conj_residual": rep.conj_residual, "partner_residual": rep.partner_residual,
        "bracket_residual": rep.bracket_residual,
    });
    Ok((ok, report))
}

fn resonant(smp: &mut Sampler, trials: usize) -> Tally {
    let mut t = Tally::new(&["recovered"]);
    for _ in 0..trials {
        match resonant_trial(smp, 14) {
            Ok((ok, rep)) => t.record("recovered", ok, || rep),
            Err(e) => t.record_err("recovered", &e, Value::Null),
        }
    }
    t
}

/// Window cells (n, m) in [−2, 2]²: each either builds a partner with exact
/// bracket and δ = nλ1 + mλ2, or is an excluded cell whose δ vanishes.
pub fn partner_window(data: &NormalData, c: &Coeff, d: &Coeff, order: u32) -> Vec<((i64, i64), Result<(bool, bool), Error>)> {
    let (l1, l2) = data.eigenvalues();
    let mut out = Vec::new();
    for n in -2..=2i64 {
        for m in -2..=2i64 {
            let expected = &(&l1 * &Coeff::int(n)) + &(&l2 * &Coeff::int(m));
            let r = match transverse_partner(data, &PartnerTarget::Exponents(n, m), c, d, order, 0.0) {
                Ok(pt) => pt.bracket_residual().map(|r| (r == 0.0, pt.delta == expected)),
                Err(Error::Inconsistent(_)) if expected.is_zero() && (n, m) != (0, 0) => Ok((true, true)),
                Err(e) => Err(e),
            };
            out.push(((n, m), r));
        }
    }
    out
}

fn partner_data() -> Vec<NormalData> {
    vec![
        NormalData::Resonant { p: 1, q: 1, k: 1, mu: Coeff::ratio(1, 2), lambda2: Coeff::one(), q_poly: None },
        NormalData::Resonant { p: 1, q: 2, k: 1, mu: Coeff::zero(), lambda2: Coeff::one(), q_poly: None },
        NormalData::Resonant { p: 0, q: 1, k: 1, mu: Coeff::ratio(-1, 3), lambda2: Coeff::one(), q_poly: None },
        NormalData::Diagonal { l1: Coeff::ratio(-3, 7), l2: Coeff::one() },
        NormalData::Diagonal { l1: Coeff::i(), l2: Coeff::one() },
    ]
}

fn partners(smp: &mut Sampler, trials: usize) -> Tally {
    let order = 8;
    let mut t = Tally::new(&["bracket_exact", "delta_exact"]);
    for _ in 0..trials {
        let c = smp.small_rational();
        let d = nonzero_rational(smp);
        for data in partner_data() {
            for ((n, m), r) in partner_window(&data, &c, &d, order) {
                let inputs = || json!({ "data": format!("{data:?}"), "n": n, "m": m, "c": coeff_json(&c), "d": coeff_json(&d) });
                match r {
                    Ok((br, de)) => {
                        t.record("bracket_exact", br, inputs);
                        t.record("delta_exact", de, inputs);
                    }
                    Err(e) => t.record_err("bracket_exact", &e, inputs()),
                }
            }
        }
    }
    t
}

// ---- δ-lattices ----

/// Parsed representatives of the five cases with the flags that select them.
pub fn lattice_cases() -> Vec<(&'static str, &'static str, LatticeFlags, Option<RationalityHint>, &'static str)> {
    let f = |linearizable, normalform| LatticeFlags { linearizable, normalform };
    vec![
        ("regular", "dx + x*dy", f(None, None), None, "C"),
        ("linearizable, complex ratio", "i*x*dx + y*dy", f(Some(true), None), None, "rank2"),
        ("linearizable, irrational real ratio", "-1.4142135623730951*x*dx + 1.0*y*dy", f(Some(true), None), Some(RationalityHint::Irrational), "dense-line"),
        ("resonant, normal form", "(x^2*y - x)*dx + y*dy", f(Some(false), Some(true)), None, "rank1"),
        ("resonant, not normal form", "(x^2*y - x)*dx + y*dy", f(Some(false), Some(false)), None, "singleton"),
    ]
}

fn lattice(smp: &mut Sampler, trials: usize) -> Tally {
    let mut t = Tally::new(&["five_cases", "closure"]);
    let mut lats = Vec::new();
    for (label, src, flags, hint, want) in lattice_cases() {
        let res = parse_field(src, 8, Mode::Auto)
            .and_then(|z| classify_with(&z, hint, 1e-9))
            .and_then(|class| delta_lattice(&class, flags));
        match res {
            Ok(l) => {
                t.record("five_cases", l.name() == want, || json!({ "case": label, "field": src, "got": l.name(), "want": want }));
                lats.push(l);
            }
            Err(e) => t.record_err("five_cases", &e, json!({ "case": label, "field": src })),
        }
    }
    // closure: a + n(b − a) stays in the lattice for a, b in it and n ∈ [−5, 5]
    for _ in 0..trials {
        for l in &lats {
            let gens: Vec<Coeff> = match l {
                DeltaLattice::Rank2 { l1, l2 } | DeltaLattice::DenseLine { l1, l2 } => vec![l1.clone(), l2.clone()],
                DeltaLattice::Rank1 { generator: Some(g) } => vec![g.clone()],
                _ => continue,
            };
            let pick = |smp: &mut Sampler| -> Coeff {
                gens.iter().fold(Coeff::zero().like(&gens[0]), |acc, g| &acc + &(g * &Coeff::int(smp.int(-3, 3))))
            };
            let a = pick(smp);
            let b = pick(smp);
            for n in -5..=5 {
                let s = &a + &(&(&b - &a) * &Coeff::int(n));
                t.record("closure", l.contains(&s, 1e-9) == Some(true), || {
                    json!({ "lattice": l.name(), "a": coeff_json(&a), "b": coeff_json(&b), "n": n })
                });
            }
        }
    }
    t
}

// ---- printing and parsing ----

fn parser(smp: &mut Sampler, trials: usize) -> Tally {
    let order = 6;
    let mut t = Tally::new(&["exact_round_trip", "float_round_trip"]);
    for _ in 0..trials {
        let w = VectorField::new(smp.poly(order, 0, order, 0.3), smp.poly(order, 0, order, 0.3));
        let w = if smp.chance(0.3) { w.scale(&Coeff::gauss((smp.int(-3, 3), 1), (smp.int(1, 3), smp.int(1, 4)))) } else { w };
        let text = print_field(&w);
        let back = parse_field(&text, order, Mode::Auto);
        t.record("exact_round_trip", back.as_ref().map(|b| b == &w).unwrap_or(false), || json!({ "text": text }));
        let wf = VectorField::new(smp.float_poly(order, 0, order, 0.3, 4.0), smp.float_poly(order, 0, order, 0.3, 4.0));
        let text = print_field(&wf);
        let back = parse_field(&text, order, Mode::Float);
        t.record("float_round_trip", back.as_ref().map(|b| b == &wf).unwrap_or(false), || json!({ "text": text }));
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_a_usage_error() {
        assert!(matches!(run_suite("nope", None, 1), Err(Error::Usage(_))));
    }

    #[test]
    fn small_runs_pass() {
        for (name, n) in [("godbillon-vey", 4), ("prop2.8", 10), ("lemma3.2", 3), ("obstructions", 3), ("lattice", 2), ("parser", 10)] {
            let rep = run_suite(name, Some(n), 3).unwrap();
            assert!(rep.pass, "{}", serde_json::to_string_pretty(&rep.to_json()).unwrap());
        }
    }

    #[test]
    fn reports_are_reproducible() {
        let a = run_suite("prop2.8", Some(5), 9).unwrap().to_json();
        let b = run_suite("prop2.8", Some(5), 9).unwrap().to_json();
        assert_eq!(a, b);
    }
}
