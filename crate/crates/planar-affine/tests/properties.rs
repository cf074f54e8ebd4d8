use proptest::prelude::*;

use planar_affine::cli::{parse_field, print_field, Mode};
use planar_affine::cohom::{solve_diagonal, DiagonalData};
use planar_affine::conjugacy::{invert_map, pullback, FormalMap};
use planar_affine::fields::{godbillon_vey, VectorField};
use planar_affine::galois::{algebra_membership, aut_pair_check, star_residuals};
use planar_affine::normalize::DeltaLattice;
use planar_affine::series::{Coeff, Series};

fn rational() -> impl Strategy<Value = Coeff> {
    (-5i64..=5, 1i64..=4).prop_map(|(a, b)| Coeff::ratio(a, b))
}

fn nonzero() -> impl Strategy<Value = Coeff> {
    rational().prop_filter("nonzero", |c| !c.is_zero())
}

/// Sparse exact polynomial with terms of degree lo..=hi.
fn poly(order: u32, lo: u32, hi: u32) -> impl Strategy<Value = Series> {
    let slots: Vec<(u32, u32)> = (lo..=hi).flat_map(|d| (0..=d).map(move |a| (a, d - a))).collect();
    let n = slots.len();
    proptest::collection::vec(proptest::option::weighted(0.4, rational()), n).prop_map(move |cs| {
        Series::from_terms(order, slots.iter().zip(cs).filter_map(|(e, c)| c.map(|c| (*e, c))))
    })
}

fn near_identity(order: u32) -> impl Strategy<Value = FormalMap> {
    (poly(order, 2, 3), poly(order, 2, 3))
        .prop_map(move |(hx, hy)| FormalMap::raw(&Series::x(order) + &hx, &Series::y(order) + &hy))
}

/// Z = ∂x, Y = e^{δx}∂y truncated at `order`.
fn rectified(delta: &Coeff, order: u32) -> (VectorField, VectorField) {
    let e = Series::x(order).scale(delta).exp().unwrap();
    (VectorField::d_dx(order), VectorField::new(Series::zero(order), e))
}

fn push(phi: &FormalMap, w: &VectorField) -> VectorField {
    pullback(&invert_map(phi).unwrap(), w).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn product_is_associative_and_commutative(a in poly(6, 0, 4), b in poly(6, 0, 4), c in poly(6, 0, 4)) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
    }

    #[test]
    fn unit_inverse_and_log_exp(f in poly(7, 1, 4), c in nonzero()) {
        let u = &Series::constant(c, 7) + &f;
        let inv = u.invert_unit().unwrap();
        prop_assert_eq!(&u * &inv, Series::one(7));
        let one_plus = &Series::one(7) + &f;
        prop_assert_eq!(one_plus.log().unwrap().exp().unwrap(), one_plus);
    }

    #[test]
    fn printed_fields_parse_back(a in poly(6, 0, 6), b in poly(6, 0, 6), s in nonzero(), t in rational()) {
        let w = VectorField::new(a, b).scale(&(&s + &(&t * &Coeff::i())));
        let text = print_field(&w);
        prop_assert_eq!(parse_field(&text, 6, Mode::Auto).unwrap(), w, "{}", text);
    }

    #[test]
    fn pullback_is_functorial(p in near_identity(6), q in near_identity(6), a in poly(6, 1, 3), b in poly(6, 1, 3)) {
        let w = VectorField::new(a, b);
        let pq = p.compose(&q).unwrap();
        let lhs = pullback(&pq, &w).unwrap();
        let rhs = pullback(&q, &pullback(&p, &w).unwrap()).unwrap();
        prop_assert!(lhs.eq_fields(&rhs));
    }

    #[test]
    fn diagonal_solver_round_trip_off_the_reals(f in poly(8, 1, 8)) {
        // ratio i is never rational, so no divisor vanishes
        let (l1, l2) = (Coeff::i(), Coeff::one());
        let r = Series::zero(8);
        let g = DiagonalData::new(l1.clone(), l2.clone(), r.clone()).apply(&f);
        prop_assert_eq!(solve_diagonal(&l1, &l2, &r, &g, 1e-12).unwrap(), f);
    }

    #[test]
    fn godbillon_vey_survives_conjugation(d in -2i64..=2, phi in near_identity(10)) {
        let delta = Coeff::int(d);
        let (z0, y0) = rectified(&delta, 10);
        let (z, y) = (push(&phi, &z0), push(&phi, &y0));
        let gv = godbillon_vey(&z, &y, &delta).unwrap();
        prop_assert!(gv.dtau_z.is_zero());
        prop_assert!(gv.dtau_y.is_zero());
        prop_assert!(gv.certified > gv.det_valuation);
    }

    #[test]
    fn invariance_equations_match_membership(d in 0i64..=1, t in poly(8, 0, 3), n in poly(8, 0, 3)) {
        let delta = Coeff::int(d);
        let (z, y) = rectified(&delta, 8);
        let x = z.mul_series(&t).add(&y.mul_series(&n));
        let star = star_residuals(&z, &y, &delta, &t, &n, 0.0).unwrap();
        let member = algebra_membership(&z, &y, &delta, &x, 0.0).unwrap();
        prop_assert_eq!(star.vanish(0.0), member.is_some());
    }

    #[test]
    fn automorphism_constants_compose(d in 0i64..=1, a1 in rational(), a2 in rational(), b1 in nonzero(), b2 in nonzero(),
                                      s1 in rational(), s2 in rational()) {
        let n = 8;
        let delta = Coeff::int(d);
        let (z, y) = rectified(&delta, n);
        // (t + a z + τ, b z); a and τ must vanish when δ ≠ 0
        let aut = |a: &Coeff, b: &Coeff, s: &Coeff| {
            let (a, s) = if d == 0 { (a.clone(), s.clone()) } else { (Coeff::zero(), Coeff::zero()) };
            FormalMap::raw(&(&Series::x(n) + &Series::y(n).scale(&a)) + &Series::constant(s, n), Series::y(n).scale(b))
        };
        let (g1, g2) = (aut(&a1, &b1, &s1), aut(&a2, &b2, &s2));
        let (c1, e1) = aut_pair_check(&g1, &z, &y, &delta, 0.0).unwrap();
        let (c2, e2) = aut_pair_check(&g2, &z, &y, &delta, 0.0).unwrap();
        let (c, e) = aut_pair_check(&g1.compose(&g2).unwrap(), &z, &y, &delta, 0.0).unwrap();
        prop_assert_eq!(c, &c1 * &c2);
        prop_assert_eq!(e, &e1 + &(&c1 * &e2));
    }

    #[test]
    fn rank2_lattice_closure(i in -6i64..=6, j in -6i64..=6, k in -6i64..=6, l in -6i64..=6, n in -5i64..=5) {
        let (l1, l2) = (Coeff::i(), Coeff::one());
        let lat = DeltaLattice::Rank2 { l1: l1.clone(), l2: l2.clone() };
        let pt = |a: i64, b: i64| &(&l1 * &Coeff::int(a)) + &(&l2 * &Coeff::int(b));
        let (a, b) = (pt(i, j), pt(k, l));
        let s = &a + &(&(&b - &a) * &Coeff::int(n));
        prop_assert_eq!(lat.contains(&s, 1e-9), Some(true));
        let off = &s + &Coeff::ratio(1, 2);
        prop_assert_eq!(lat.contains(&off, 1e-9), Some(false));
    }
}
