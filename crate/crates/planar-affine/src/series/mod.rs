//! Truncated bivariate series and the expression classes built on them.

pub mod coeff;
pub mod dressed;
pub mod loglaurent;
pub mod poly;
pub mod rational;

pub use coeff::{Coeff, Gauss, PRUNE, TOL};
pub use dressed::DressedSeries;
pub use loglaurent::LogLaurent;
pub use poly::{arith, ArithKind, Exp, Series};
pub use rational::RationalSeries;

use crate::conjugacy::FormalMap;
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpLog {
    Exp,
    Log,
}

pub fn invert_unit(a: &Series) -> Result<Series, Error> {
    a.invert_unit()
}

/// F∘φ for a map fixing the origin.
pub fn substitute(f: &Series, phi: &FormalMap) -> Result<Series, Error> {
    f.substitute(&phi.mx, &phi.my)
}

pub fn exp_log(a: &Series, kind: ExpLog) -> Result<Series, Error> {
    match kind {
        ExpLog::Exp => a.exp(),
        ExpLog::Log => a.log(),
    }
}

pub fn dressed_expand(d: &DressedSeries) -> Result<((i64, i64), Series), Error> {
    d.expand()
}
