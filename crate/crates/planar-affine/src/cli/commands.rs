//! Subcommand dispatch.

use std::io::Read;

use clap::Parser;
use serde_json::{json, Map, Value};

use super::args::{Cli, Command, Common, LambdaClass, ModeArg};
use super::verify;
use super::*;
use crate::conjugacy::{invert_map, normalize_nonisolated, pullback, rectify};
use crate::fields::{affine_ratio, classify_with, det, RationalityHint, SingularityClass, Subtype, VectorField};
use crate::galois::{
    aut_pair_check, algebra_membership, check_pair, choose_base_point, star_residuals, symmetry_decompose, translate_field,
};
use crate::normalize::{
    delta_lattice, formal_invariants, lattice_coords, linearize_quasiresonant, prepare, resonant_normal_form, transverse_partner,
    DeltaLattice, LatticeFlags, NormalData, PartnerTarget, PreparedField, PreparedKind,
};
use crate::series::Coeff;
use crate::Error;

/// What the binary prints and its exit status.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

/// Runs one invocation; `argv[0]` is the program name.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                return Outcome { stdout: e.to_string(), code: 0 };
            }
            let err = Error::Usage(e.to_string().lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ").to_string());
            return finish(true, "usage", Err(err));
        }
    };
    let name = command_name(&cli.command);
    let json_out = cli.opts.json;
    let result = dispatch(&cli);
    finish(json_out, name, result)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Parse { .. } => "parse",
        Command::Classify { .. } => "classify",
        Command::Prepare { .. } => "prepare",
        Command::Normalize { .. } => "normalize",
        Command::Invariants { .. } => "invariants",
        Command::Partner { .. } => "partner",
        Command::Lattice { .. } => "lattice",
        Command::GaloisCheck { .. } => "galois-check",
        Command::DecomposeSymmetry { .. } => "decompose-symmetry",
        Command::Verify { .. } => "verify",
    }
}

/// A report plus whether it describes a mathematical failure.
struct Report {
    body: Map<String, Value>,
    failed: bool,
}

impl Report {
    fn ok(body: Value) -> Report {
        Report { body: into_map(body), failed: false }
    }
}

fn into_map(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("result".into(), other);
            m
        }
    }
}

fn finish(json_out: bool, name: &str, r: Result<Report, Error>) -> Outcome {
    let (mut body, code) = match r {
        Ok(rep) => {
            let code = if rep.failed { 1 } else { 0 };
            let mut b = rep.body;
            b.insert("ok".into(), json!(!rep.failed));
            (b, code)
        }
        Err(e) => {
            let mut b = Map::new();
            b.insert("ok".into(), json!(false));
            b.insert("error".into(), error_json(&e));
            (b, e.exit_code())
        }
    };
    body.insert("schema".into(), json!(SCHEMA));
    body.insert("command".into(), json!(name));
    let v = Value::Object(body);
    let stdout = if json_out {
        let mut s = serde_json::to_string_pretty(&v).expect("serializable report");
        s.push('\n');
        s
    } else {
        render_text(&v)
    };
    Outcome { stdout, code }
}

fn read_source(text: &str) -> Result<String, Error> {
    if text == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Error::Usage(format!("cannot read stdin: {e}")))?;
        return Ok(s);
    }
    if let Some(path) = text.strip_prefix('@') {
        return std::fs::read_to_string(path).map_err(|e| Error::Usage(format!("cannot read {path}: {e}")));
    }
    Ok(text.to_string())
}

fn mode(o: &Common) -> Mode {
    match o.mode {
        None => Mode::Auto,
        Some(ModeArg::Exact) => Mode::Exact,
        Some(ModeArg::Float) => Mode::Float,
    }
}

fn load_field(text: &str, o: &Common) -> Result<VectorField, Error> {
    parse_field(&read_source(text)?, o.order, mode(o))
}

/// Loads Z and Y and brings both to float when either is.
fn load_pair(z: &str, y: &str, o: &Common) -> Result<(VectorField, VectorField), Error> {
    let z = load_field(z, o)?;
    let y = load_field(y, o)?;
    if z.is_exact() != y.is_exact() {
        return Ok((z.to_float(), y.to_float()));
    }
    Ok((z, y))
}

fn tol_for(exact: bool, o: &Common) -> f64 {
    if exact {
        0.0
    } else {
        o.tol
    }
}

fn hint(o: &Common) -> Option<RationalityHint> {
    o.lambda_class.map(|c| match c {
        LambdaClass::Rational => RationalityHint::Rational,
        LambdaClass::Irrational => RationalityHint::Irrational,
    })
}

fn classify_field(z: &VectorField, o: &Common) -> Result<SingularityClass, Error> {
    classify_with(z, hint(o), tol_for(z.is_exact(), o)).map_err(|e| match e {
        Error::Precondition(m) if m.contains("hint") => Error::Usage(format!("{m}; pass --lambda-class rational|irrational")),
        other => other,
    })
}

fn parse_point(text: &str, o: &Common) -> Result<(Coeff, Coeff), Error> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::Usage(format!("base point must be x,y, got '{text}'")));
    }
    Ok((parse_coeff(parts[0], mode(o))?, parse_coeff(parts[1], mode(o))?))
}

fn parse_window(text: &str) -> Result<((i64, i64), (i64, i64)), Error> {
    let bad = || Error::Usage(format!("window must be n0:n1,m0:m1, got '{text}'"));
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(bad());
    }
    let range = |s: &str| -> Result<(i64, i64), Error> {
        let (a, b) = s.split_once(':').ok_or_else(bad)?;
        let a: i64 = a.trim().parse().map_err(|_| bad())?;
        let b: i64 = b.trim().parse().map_err(|_| bad())?;
        if a > b || b - a > 64 {
            return Err(bad());
        }
        Ok((a, b))
    };
    Ok((range(parts[0])?, range(parts[1])?))
}

fn dispatch(cli: &Cli) -> Result<Report, Error> {
    let o = &cli.opts;
    match &cli.command {
        Command::Parse { field } => {
            let z = load_field(field, o)?;
            let (a, b) = z.series()?;
            Ok(Report::ok(json!({
                "field": field_json(&z),
                "mode": if z.is_exact() { "exact" } else { "float" },
                "order": o.order,
                "dx": series_json(&a),
                "dy": series_json(&b),
                "terms": a.len() + b.len(),
            })))
        }
        Command::Classify { field } => {
            let z = load_field(field, o)?;
            Ok(Report::ok(class_json(&classify_field(&z, o)?)))
        }
        Command::Prepare { field } => {
            let z = load_field(field, o)?;
            let class = classify_field(&z, o)?;
            let prep = prepare(&z, &class, tol_for(z.is_exact(), o))?;
            Ok(Report::ok(json!({ "class": class_json(&class), "prepared": prepared_json(&prep) })))
        }
        Command::Normalize { field, partner } => normalize_cmd(field, partner.as_deref(), o),
        Command::Invariants { field } => {
            let z = load_field(field, o)?;
            let tol = tol_for(z.is_exact(), o);
            let class = classify_field(&z, o)?;
            let prep = prepare(&z, &class, tol)?;
            if let PreparedKind::Diagonal { .. } = prep.kind {
                return Err(Error::Precondition("no resonant term up to this order; the field is orbitally linearizable here".into()));
            }
            let inv = formal_invariants(&prep, tol)?;
            let back = pullback(&inv.chart, &z)?;
            Ok(Report::ok(json!({
                "class": class_json(&class),
                "p": inv.p, "q": inv.q, "k": inv.k,
                "mu": coeff_json(&inv.mu),
                "Q": coeffs_json(&inv.q_poly),
                "lambda1": coeff_json(&inv.lambda1()),
                "lambda2": coeff_json(&inv.lambda2),
                "rotation": coeff_json(&inv.rotation),
                "T": series_json(&inv.t),
                "chart": map_json(&inv.chart),
                "normal_form": field_json(&inv.z0(back.order())),
                "conj_residual": num(back.residual(&inv.z0(back.order()))),
            })))
        }
        Command::Partner { field, window, delta } => partner_cmd(field, window, delta.as_deref(), o),
        Command::Lattice { field, linearizable, normalform, delta } => {
            let z = load_field(field, o)?;
            let tol = tol_for(z.is_exact(), o);
            let class = classify_field(&z, o)?;
            let mut flags = LatticeFlags { linearizable: linearizable.flag(), normalform: normalform.flag() };
            let mut derived = false;
            if let (SingularityClass::Nonisolated { .. }, None) = (&class, flags.normalform) {
                let nf = normalize_nonisolated(&z, tol)?;
                flags.normalform = Some(nf.mu.approx_zero(tol));
                derived = true;
            }
            let lat = delta_lattice(&class, flags)?;
            let mut body = lattice_json(&lat);
            let m = body.as_object_mut().expect("object");
            m.insert("class".into(), class_json(&class));
            m.insert("normalform_from_jet".into(), json!(derived));
            let mut failed = false;
            if let Some(d) = delta {
                let d = parse_coeff(d, mode(o))?;
                let c = lat.contains(&d, o.tol);
                m.insert("delta".into(), coeff_json(&d));
                m.insert("contains".into(), c.map_or(Value::Null, Value::Bool));
                if let DeltaLattice::Rank2 { l1, l2 } | DeltaLattice::DenseLine { l1, l2 } = &lat {
                    let coords = lattice_coords(l1, l2, &d, o.tol);
                    m.insert("coords".into(), coords.map_or(Value::Null, |(a, b)| json!([a, b])));
                }
                failed = c == Some(false);
            }
            Ok(Report { body: into_map(body), failed })
        }
        Command::GaloisCheck { field, partner, base_point, t, n } => galois_cmd(field, partner, base_point.as_deref(), t, n, o),
        Command::DecomposeSymmetry { field, partner, map, base_point } => decompose_cmd(field, partner, map, base_point.as_deref(), o),
        Command::Verify { suite, trials, seed } => {
            let rep = verify::run_suite(suite, *trials, *seed)?;
            let failed = !rep.pass;
            Ok(Report { body: into_map(rep.to_json()), failed })
        }
    }
}

fn prepared_json(p: &PreparedField) -> Value {
    let mut m = Map::new();
    match &p.kind {
        PreparedKind::Diagonal { l1, l2 } => {
            m.insert("kind".into(), json!("diagonal"));
            m.insert("lambda1".into(), coeff_json(l1));
            m.insert("lambda2".into(), coeff_json(l2));
        }
        PreparedKind::Resonant { p: pp, q, k, mu, lambda2 } => {
            m.insert("kind".into(), json!("resonant"));
            m.insert("p".into(), json!(pp));
            m.insert("q".into(), json!(q));
            m.insert("k".into(), json!(k));
            m.insert("mu".into(), coeff_json(mu));
            m.insert("lambda2".into(), coeff_json(lambda2));
        }
    }
    m.insert("U".into(), series_json(&p.u));
    m.insert("R".into(), series_json(&p.r));
    m.insert("chart".into(), map_json(&p.chart));
    m.insert("Y0".into(), json!(p.y0_kind()));
    Value::Object(m)
}

fn lattice_json(l: &DeltaLattice) -> Value {
    let mut m = Map::new();
    m.insert("lattice".into(), json!(l.name()));
    match l {
        DeltaLattice::Rank2 { l1, l2 } | DeltaLattice::DenseLine { l1, l2 } => {
            m.insert("generators".into(), json!([l1.to_string(), l2.to_string()]));
        }
        DeltaLattice::Rank1 { generator } => {
            m.insert("generator".into(), generator.as_ref().map_or(Value::Null, coeff_json));
        }
        DeltaLattice::Singleton { delta } => {
            m.insert("delta".into(), delta.as_ref().map_or(Value::Null, coeff_json));
        }
        DeltaLattice::Undetermined { reason } => {
            m.insert("reason".into(), json!(reason));
        }
        DeltaLattice::Complex | DeltaLattice::Empty => {}
    }
    Value::Object(m)
}

fn normalize_cmd(field: &str, partner: Option<&str>, o: &Common) -> Result<Report, Error> {
    let z = load_field(field, o)?;
    let tol = tol_for(z.is_exact(), o);
    let class = classify_field(&z, o)?;
    let mut m = Map::new();
    m.insert("class".into(), class_json(&class));
    match &class {
        SingularityClass::Regular => {
            let chart = rectify(&z, None)?;
            let back = pullback(&chart, &z)?;
            m.insert("route".into(), json!("flow-box"));
            m.insert("chart".into(), map_json(&chart));
            m.insert("normal_form".into(), json!("(1)*dx"));
            m.insert("conj_residual".into(), num(back.residual(&VectorField::d_dx(back.order()))));
        }
        SingularityClass::Nilpotent => {
            return Err(Error::Precondition("nilpotent linear part: no formal normal form is computed".into()));
        }
        SingularityClass::Nonisolated { .. } => {
            let nf = normalize_nonisolated(&z, tol)?;
            let back = pullback(&nf.chart, &z)?;
            m.insert("route".into(), json!("nonisolated"));
            m.insert("k".into(), json!(nf.k));
            m.insert("mu".into(), coeff_json(&nf.mu));
            m.insert("lambda2".into(), coeff_json(&nf.lambda2));
            m.insert("chart".into(), map_json(&nf.chart));
            m.insert("normal_form".into(), field_json(&nf.field(back.order())));
            m.insert("conj_residual".into(), num(back.residual(&nf.field(back.order()))));
        }
        SingularityClass::NonNilpotent { subtype, .. } => {
            let prep = prepare(&z, &class, tol)?;
            match (&prep.kind, subtype) {
                (PreparedKind::Diagonal { .. }, Subtype::Resonant { .. }) => {
                    m.insert("route".into(), json!("orbitally-linear"));
                    m.insert("prepared".into(), prepared_json(&prep));
                }
                (PreparedKind::Diagonal { .. }, _) => {
                    let lin = linearize_quasiresonant(&prep, o.divisor_floor)?;
                    let back = pullback(&lin.chart, &z)?;
                    m.insert("route".into(), json!("linearization"));
                    m.insert("chart".into(), map_json(&lin.chart));
                    m.insert("T".into(), series_json(&lin.t));
                    m.insert("N".into(), series_json(&lin.n));
                    m.insert("normal_form".into(), field_json(&lin.z0.truncate(back.order())));
                    m.insert("conj_residual".into(), num(back.residual(&lin.z0.truncate(back.order()))));
                }
                (PreparedKind::Resonant { .. }, _) => {
                    let y = match partner {
                        Some(p) => {
                            let y = load_field(p, o)?;
                            if z.is_exact() && !y.is_exact() {
                                return Err(Error::Usage("Z is exact but the partner has float literals; pass --mode float".into()));
                            }
                            y
                        }
                        None => {
                            // W0 carried back from the normal chart commutes with Z
                            let inv = formal_invariants(&prep, tol)?;
                            let (l1, l2) = (inv.lambda1(), inv.lambda2.clone());
                            let w0 = VectorField::diagonal(&l1, &l2, inv.chart.order());
                            pullback(&invert_map(&inv.chart)?, &w0)?
                        }
                    };
                    let rep = resonant_normal_form(&prep, &z, &y, tol)?;
                    m.insert("route".into(), json!("resonant"));
                    m.insert("partner_given".into(), json!(partner.is_some()));
                    m.insert("k".into(), json!(rep.k));
                    m.insert("mu".into(), coeff_json(&rep.mu));
                    m.insert("Q".into(), coeffs_json(&rep.q_poly));
                    m.insert("n".into(), json!(rep.n));
                    m.insert("m".into(), json!(rep.m));
                    m.insert("gamma".into(), coeff_json(&rep.gamma));
                    m.insert("P".into(), coeffs_json(&rep.p_poly));
                    m.insert("delta".into(), coeff_json(&rep.delta));
                    m.insert("c".into(), coeff_json(&rep.c));
                    m.insert("d".into(), coeff_json(&rep.d));
                    m.insert("rotation".into(), coeff_json(&rep.rotation));
                    m.insert("normal_form".into(), field_json(&rep.z_tilde));
                    m.insert("chart".into(), map_json(&rep.chart));
                    m.insert("conj_residual".into(), num(rep.conj_residual));
                    m.insert("partner_residual".into(), num(rep.partner_residual));
                    m.insert("bracket_residual".into(), num(rep.bracket_residual));
                    m.insert("certified_order".into(), json!(rep.certified_order));
                }
            }
        }
    }
    Ok(Report { body: m, failed: false })
}

fn normal_data(z: &VectorField, class: &SingularityClass, tol: f64) -> Result<NormalData, Error> {
    match class {
        SingularityClass::NonNilpotent { subtype: Subtype::Resonant { .. }, .. } => {
            let prep = prepare(z, class, tol)?;
            if let PreparedKind::Diagonal { l1, l2 } = prep.kind {
                // no resonant term up to this order: the linear model is the normal form
                return Ok(NormalData::Diagonal { l1, l2 });
            }
            let inv = formal_invariants(&prep, tol)?;
            Ok(NormalData::Resonant { p: inv.p, q: inv.q, k: inv.k, mu: inv.mu, lambda2: inv.lambda2, q_poly: Some(inv.q_poly) })
        }
        SingularityClass::NonNilpotent { lambda1, lambda2, subtype } if !matches!(subtype, Subtype::Node { .. }) => {
            Ok(NormalData::Diagonal { l1: lambda1.clone(), l2: lambda2.clone() })
        }
        _ => Err(Error::Precondition("partners are enumerated for reduced non-nilpotent singularities".into())),
    }
}

fn partner_cmd(field: &str, window: &str, delta: Option<&str>, o: &Common) -> Result<Report, Error> {
    let z = load_field(field, o)?;
    let tol = tol_for(z.is_exact(), o);
    let class = classify_field(&z, o)?;
    let data = normal_data(&z, &class, tol)?;
    let one = Coeff::one();
    let zero = Coeff::zero();
    let entry = |target: &PartnerTarget| -> Value {
        match transverse_partner(&data, target, &zero, &one, o.order, tol) {
            Ok(p) => json!({
                "n": p.n, "m": p.m,
                "delta": coeff_json(&p.delta),
                "gamma": coeff_json(&p.gamma),
                "Q": coeffs_json(&p.q_poly),
                "bracket_residual": p.bracket_residual().map(num).unwrap_or(Value::Null),
                "status": "ok",
            }),
            Err(e) => {
                let mut v = json!({ "status": "excluded", "error": error_json(&e) });
                if let PartnerTarget::Exponents(n, m) = target {
                    v["n"] = json!(n);
                    v["m"] = json!(m);
                }
                v
            }
        }
    };
    let mut body = Map::new();
    body.insert("class".into(), class_json(&class));
    let (l1, l2) = data.eigenvalues();
    body.insert("lambda1".into(), coeff_json(&l1));
    body.insert("lambda2".into(), coeff_json(&l2));
    if let NormalData::Resonant { k, mu, q_poly, .. } = &data {
        body.insert("k".into(), json!(k));
        body.insert("mu".into(), coeff_json(mu));
        body.insert("Q".into(), q_poly.as_ref().map_or(Value::Null, |q| coeffs_json(q)));
    }
    let mut failed = false;
    if let Some(d) = delta {
        let d = parse_coeff(d, mode(o))?;
        let e = entry(&PartnerTarget::Delta(d));
        failed = e["status"] != "ok";
        body.insert("partners".into(), json!([e]));
    } else {
        let ((n0, n1), (m0, m1)) = parse_window(window)?;
        let mut list = Vec::new();
        for n in n0..=n1 {
            for m in m0..=m1 {
                list.push(entry(&PartnerTarget::Exponents(n, m)));
            }
        }
        body.insert("window".into(), json!([[n0, n1], [m0, m1]]));
        body.insert("partners".into(), Value::Array(list));
    }
    Ok(Report { body, failed })
}

/// Base point and the pair translated there.
fn at_base(z: &VectorField, y: &VectorField, base: Option<&str>, o: &Common) -> Result<((Coeff, Coeff), VectorField, VectorField), Error> {
    let tol = tol_for(z.is_exact(), o);
    let p = match base {
        Some(b) => parse_point(b, o)?,
        None => choose_base_point(z, y, tol).ok_or_else(|| Error::Degenerate("no base point on the probe grid avoids zeros and tangency".into()))?,
    };
    let zp = translate_field(z, &p.0, &p.1)?;
    let yp = translate_field(y, &p.0, &p.1)?;
    Ok((p, zp, yp))
}

fn delta_of(z: &VectorField, y: &VectorField, tol: f64) -> Result<Coeff, Error> {
    affine_ratio(z, y, tol)?.delta.ok_or_else(|| Error::Degenerate("[Z, Y] is not a constant multiple of Y".into()))
}

fn galois_cmd(field: &str, partner: &str, base: Option<&str>, t: &str, n: &str, o: &Common) -> Result<Report, Error> {
    let (z, y) = load_pair(field, partner, o)?;
    let tol = tol_for(z.is_exact(), o);
    let delta = delta_of(&z, &y, tol)?;
    let ((px, py), zp, yp) = at_base(&z, &y, base, o)?;
    check_pair(&zp, &yp, &delta, tol)?;
    let md = if z.is_exact() { mode(o) } else { Mode::Float };
    let tt = parse_series(&read_source(t)?, o.order, md)?;
    let nn = parse_series(&read_source(n)?, o.order, md)?;
    let star = star_residuals(&zp, &yp, &delta, &tt, &nn, tol)?;
    let x = zp.mul_series(&tt).add(&yp.mul_series(&nn));
    let member = algebra_membership(&zp, &yp, &delta, &x, tol)?;
    let agree = star.vanish(tol) == member.is_some();
    let pair = |r: Option<(Coeff, Coeff)>| r.map_or(Value::Null, |(c, d)| json!({ "c": c.to_string(), "d": d.to_string() }));
    let (zx, zy) = zp.value_at_origin()?;
    let det0 = det(&zp, &yp).to_series().map(|s| s.constant_term()).unwrap_or_else(|_| Coeff::zero());
    let body = json!({
        "delta": coeff_json(&delta),
        "base_point": [px.to_string(), py.to_string()],
        "Z_at_base_point": [zx.to_string(), zy.to_string()],
        "regular_at_base_point": !(zx.approx_zero(tol) && zy.approx_zero(tol)),
        "transverse_at_base_point": !det0.approx_zero(tol),
        "T": series_json(&tt),
        "N": series_json(&nn),
        "star": {
            "r1": series_json(&star.r1), "r2": series_json(&star.r2), "r3": series_json(&star.r3),
            "r4": series_json(&star.r4), "r5": series_json(&star.r5),
            "vanish": star.vanish(tol),
        },
        "membership": pair(member),
        "Z_membership": pair(algebra_membership(&zp, &yp, &delta, &zp, tol)?),
        "Y_membership": pair(algebra_membership(&zp, &yp, &delta, &yp, tol)?),
        "agree": agree,
    });
    Ok(Report { body: into_map(body), failed: !agree })
}

fn decompose_cmd(field: &str, partner: &str, map: &str, base: Option<&str>, o: &Common) -> Result<Report, Error> {
    let (z, y) = load_pair(field, partner, o)?;
    let tol = tol_for(z.is_exact(), o);
    let delta = delta_of(&z, &y, tol)?;
    let ((px, py), zp, yp) = at_base(&z, &y, base, o)?;
    let md = if z.is_exact() { mode(o) } else { Mode::Float };
    let (mx, my) = parse_map(&read_source(map)?, o.order, md)?;
    let g = crate::conjugacy::FormalMap::raw(mx, my);
    let dec = symmetry_decompose(&zp, &yp, &delta, &g, tol)?;
    let aut = aut_pair_check(&g, &zp, &yp, &delta, tol);
    let body = json!({
        "delta": coeff_json(&delta),
        "base_point": [px.to_string(), py.to_string()],
        "T": series_json(&dec.t),
        "N": series_json(&dec.n),
        "chart": map_json(&dec.chart),
        "sol_residual": num(dec.sol_residual),
        "recomposition_residual": dec.recomposition_residual.map_or(Value::Null, num),
        "aut": aut.map_or(Value::Null, |(c, d)| json!({ "c": c.to_string(), "d": d.to_string() })),
        "moves_base_point": dec.recomposition_residual.is_none(),
    });
    Ok(Report::ok(body))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_json(args: &[&str]) -> (Value, i32) {
        let mut argv = vec!["planar-affine", "--json"];
        argv.extend_from_slice(args);
        let out = run(argv);
        (serde_json::from_str(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", out.stdout)), out.code)
    }

    #[test]
    fn classify_nonisolated() {
        let (v, code) = run_json(&["classify", "y*dy"]);
        assert_eq!(code, 0);
        assert_eq!(v["kind"], "nonisolated");
        assert_eq!(v["schema"], 1);
    }

    #[test]
    fn lattice_of_regular_field_is_c() {
        let (v, code) = run_json(&["lattice", "dx + x*dy"]);
        assert_eq!(code, 0);
        assert_eq!(v["lattice"], "C");
    }

    #[test]
    fn normalize_reports_resonant_data() {
        let (v, code) = run_json(&["normalize", "--order", "10", "(x^2*y - x)*dx + y*dy"]);
        assert_eq!(code, 0, "{v}");
        assert_eq!(v["route"], "resonant");
        for key in ["k", "mu", "Q", "n", "m", "gamma", "P", "delta"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["k"], 1);
        assert_eq!(v["delta"], "0");
    }

    #[test]
    fn exit_codes() {
        let (v, code) = run_json(&["parse", "dx/dy"]);
        assert_eq!(code, 2);
        assert_eq!(v["error"]["kind"], "syntax");
        let (_, code) = run_json(&["frobnicate"]);
        assert_eq!(code, 2);
        let (v, code) = run_json(&["invariants", "x*dx + y*dy"]);
        assert_eq!(code, 1, "{v}");
        let (_, code) = run_json(&["verify", "no-such-suite"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn window_and_point_syntax() {
        assert_eq!(parse_window("-1:1,0:2").unwrap(), ((-1, 1), (0, 2)));
        assert!(parse_window("1:0,0:1").is_err());
        assert!(parse_window("0:1").is_err());
    }

    #[test]
    fn partner_window_lists_every_cell() {
        let (v, code) = run_json(&["partner", "--window", "0:1,0:1", "--", "-x*dx + 2*y*dy"]);
        assert_eq!(code, 0, "{v}");
        assert_eq!(v["partners"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn galois_check_on_rectified_pair() {
        let (v, code) = run_json(&["galois-check", "dx", "--partner", "dy", "--base-point", "0,0", "--t", "y", "--n", "1"]);
        assert_eq!(code, 0, "{v}");
        assert_eq!(v["star"]["vanish"], true);
        assert!(v["membership"].is_object());
        assert_eq!(v["agree"], true);
    }

    #[test]
    fn decompose_a_shear() {
        let (v, code) = run_json(&["decompose-symmetry", "dx", "--partner", "dy", "--base-point", "0,0", "--map", "x + y^2; y + y^2"]);
        assert_eq!(code, 0, "{v}");
        assert_eq!(v["recomposition_residual"], 0.0);
    }
}
