//! Delta-lattice of a germ from its class and the analytic flags.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::fields::{SingularityClass, Subtype};
use crate::series::Coeff;
use crate::Error;

/// Analytic facts that a finite jet cannot decide.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LatticeFlags {
    pub linearizable: Option<bool>,
    /// Analytically conjugate to the formal normal form. For a curve of zeros
    /// this stands for μ = 0 in λ2 y (1 + μ x^k) ∂y.
    pub normalform: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DeltaLattice {
    /// ℂ
    Complex,
    /// λ1ℤ ⊕ λ2ℤ of rank 2
    Rank2 { l1: Coeff, l2: Coeff },
    /// λ1ℤ ⊕ λ2ℤ dense in a real line
    DenseLine { l1: Coeff, l2: Coeff },
    /// δℤ; the generator is known only in the linearizable case
    Rank1 { generator: Option<Coeff> },
    /// {δ}; δ = 0 for nilpotent germs
    Singleton { delta: Option<Coeff> },
    /// no transverse structure
    Empty,
    /// a flag the dichotomy depends on was not supplied
    Undetermined { reason: String },
}

impl DeltaLattice {
    pub fn name(&self) -> &'static str {
        match self {
            DeltaLattice::Complex => "C",
            DeltaLattice::Rank2 { .. } => "rank2",
            DeltaLattice::DenseLine { .. } => "dense-line",
            DeltaLattice::Rank1 { .. } => "rank1",
            DeltaLattice::Singleton { .. } => "singleton",
            DeltaLattice::Empty => "empty",
            DeltaLattice::Undetermined { .. } => "undetermined",
        }
    }

    /// Membership, when the description decides it.
    pub fn contains(&self, delta: &Coeff, tol: f64) -> Option<bool> {
        match self {
            DeltaLattice::Complex => Some(true),
            DeltaLattice::Rank2 { l1, l2 } | DeltaLattice::DenseLine { l1, l2 } => Some(lattice_coords(l1, l2, delta, tol).is_some()),
            DeltaLattice::Rank1 { generator: Some(g) } => {
                if g.is_zero() {
                    return Some(delta.approx_zero(tol));
                }
                let t = delta / g;
                Some(if t.is_exact() {
                    t.as_integer().is_some()
                } else {
                    let c = t.to_c64();
                    c.im.abs() <= tol && (c.re - c.re.round()).abs() <= tol
                })
            }
            DeltaLattice::Singleton { delta: Some(d) } => Some(d.approx_eq(delta, tol)),
            DeltaLattice::Empty => Some(false),
            _ => None,
        }
    }
}

fn rational_parts(c: &Coeff) -> Option<(BigRational, BigRational)> {
    c.as_gauss().map(|g| (g.re.clone(), g.im.clone()))
}

fn to_i64(r: &BigRational) -> Option<i64> {
    if r.is_integer() {
        r.to_integer().to_i64()
    } else {
        None
    }
}

/// (n, m) ∈ ℤ² with δ = nλ1 + mλ2. For a rational ratio λ1/λ2 = a/b the
/// representative with 0 ≤ n < b is returned; float inputs with a real
/// irrational ratio are searched over |n| ≤ 1000.
pub fn lattice_coords(l1: &Coeff, l2: &Coeff, delta: &Coeff, tol: f64) -> Option<(i64, i64)> {
    if l2.is_zero() {
        if l1.is_zero() {
            return delta.approx_zero(tol).then_some((0, 0));
        }
        return lattice_coords(l2, l1, delta, tol).map(|(n, m)| (m, n));
    }
    if l1.is_exact() && l2.is_exact() && delta.is_exact() {
        let (rr, ri) = rational_parts(&(l1 / l2))?;
        let (sr, si) = rational_parts(&(delta / l2))?;
        if !ri.is_zero() {
            let n = &si / &ri;
            let m = &sr - &(&n * &rr);
            return Some((to_i64(&n)?, to_i64(&m)?));
        }
        if !si.is_zero() {
            return None;
        }
        let b = rr.denom().to_i64()?;
        for n in 0..b.max(1) {
            let m = &sr - &(&rr * &BigRational::from_integer(n.into()));
            if let Some(m) = to_i64(&m) {
                return Some((n, m));
            }
        }
        return None;
    }
    let r: Complex64 = l1.to_c64() / l2.to_c64();
    let s: Complex64 = delta.to_c64() / l2.to_c64();
    let close = |n: i64, m: i64| (r * n as f64 + m as f64 - s).norm() <= tol.max(1e-9) * (1.0 + s.norm());
    if r.im.abs() > 1e-9 * r.norm() {
        let n = (s.im / r.im).round() as i64;
        let m = (s.re - n as f64 * r.re).round() as i64;
        return close(n, m).then_some((n, m));
    }
    (0..=2000i64)
        .map(|j| if j % 2 == 1 { (j + 1) / 2 } else { -(j / 2) })
        .find_map(|n| {
            let m = (s.re - n as f64 * r.re).round() as i64;
            close(n, m).then_some((n, m))
        })
}

fn flag_error(msg: &str) -> Error {
    Error::Inconsistent(format!("flags contradict the class: {msg}"))
}

pub fn delta_lattice(class: &SingularityClass, flags: LatticeFlags) -> Result<DeltaLattice, Error> {
    let LatticeFlags { linearizable, normalform } = flags;
    if linearizable == Some(true) && normalform == Some(false) {
        return Err(flag_error("a linearizable germ is conjugate to its normal form"));
    }
    Ok(match class {
        SingularityClass::Regular => DeltaLattice::Complex,
        SingularityClass::Nilpotent => {
            if linearizable == Some(true) || normalform == Some(true) {
                return Err(flag_error("nilpotent germs are neither linearizable nor in normal form"));
            }
            DeltaLattice::Singleton { delta: Some(Coeff::zero()) }
        }
        SingularityClass::Nonisolated { lambda2 } => match normalform {
            Some(false) => DeltaLattice::Empty,
            _ => DeltaLattice::Rank1 { generator: Some(lambda2.clone()) },
        },
        SingularityClass::NonNilpotent { lambda1, lambda2, subtype } => match subtype {
            Subtype::ComplexLambda | Subtype::PoincareNonresonant => {
                if linearizable == Some(false) || normalform == Some(false) {
                    return Err(flag_error("Poincaré-domain non-resonant germs are linearizable"));
                }
                let (l1, l2) = (lambda1.clone(), lambda2.clone());
                if let Subtype::ComplexLambda = subtype {
                    DeltaLattice::Rank2 { l1, l2 }
                } else {
                    DeltaLattice::DenseLine { l1, l2 }
                }
            }
            Subtype::QuasiResonant => match linearizable.or(normalform) {
                Some(true) => DeltaLattice::DenseLine { l1: lambda1.clone(), l2: lambda2.clone() },
                Some(false) => DeltaLattice::Empty,
                None => DeltaLattice::Undetermined { reason: "quasi-resonant: pass --linearizable yes|no".into() },
            },
            Subtype::Resonant { q, .. } => match (linearizable, normalform) {
                (Some(true), _) => DeltaLattice::Rank1 { generator: Some(lambda2 / &Coeff::int(*q)) },
                (_, Some(true)) => DeltaLattice::Rank1 { generator: None },
                (_, Some(false)) => DeltaLattice::Singleton { delta: None },
                _ => DeltaLattice::Undetermined { reason: "resonant: pass --normalform yes|no".into() },
            },
            Subtype::Node { q, .. } => {
                if normalform == Some(false) {
                    return Err(flag_error("resonant nodes are conjugate to their Poincaré–Dulac normal form"));
                }
                match linearizable {
                    Some(true) => DeltaLattice::Rank1 { generator: Some(lambda2 / &Coeff::int(*q)) },
                    _ => DeltaLattice::Rank1 { generator: None },
                }
            }
        },
    })
}
