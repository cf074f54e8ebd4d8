//! Field and series expressions.
//!
//! ```text
//! sum    := [+|-] term ((+|-) term)*
//! term   := factor (* factor)*
//! factor := number [/ number] [i] | i | x [^ k] | y [^ k] | dx | dy | ( sum ) [^ k]
//! ```
//! A field is a sum whose every term carries exactly one of dx, dy.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::fields::VectorField;
use crate::series::{Coeff, Exp, Series};
use crate::Error;

/// Arithmetic requested on the command line; `Auto` is exact unless a float literal appears.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Auto,
    Exact,
    Float,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num { text: String, float: bool },
    I,
    X,
    Y,
    Dx,
    Dy,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Semi,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    pos: usize,
}

fn syntax(src: &str, pos: usize, msg: impl Into<String>) -> Error {
    let before = &src[..pos.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    Error::Syntax { line, col, msg: msg.into() }
}

fn lex(src: &str) -> Result<Vec<Token>, Error> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        let pos = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            ';' => Some(Tok::Semi),
            'i' => Some(Tok::I),
            'x' => Some(Tok::X),
            'y' => Some(Tok::Y),
            _ => None,
        };
        if let Some(t) = single {
            out.push(Token { tok: t, pos });
            i += 1;
            continue;
        }
        if c == 'd' {
            let t = match b.get(i + 1).map(|&v| v as char) {
                Some('x') => Tok::Dx,
                Some('y') => Tok::Dy,
                _ => return Err(syntax(src, pos, "expected dx or dy")),
            };
            out.push(Token { tok: t, pos });
            i += 2;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let mut j = i;
            let mut float = false;
            while j < b.len() && (b[j] as char).is_ascii_digit() {
                j += 1;
            }
            if j < b.len() && b[j] == b'.' {
                float = true;
                j += 1;
                while j < b.len() && (b[j] as char).is_ascii_digit() {
                    j += 1;
                }
            }
            if j < b.len() && (b[j] == b'e' || b[j] == b'E') {
                let mut k = j + 1;
                if k < b.len() && (b[k] == b'+' || b[k] == b'-') {
                    k += 1;
                }
                if k < b.len() && (b[k] as char).is_ascii_digit() {
                    while k < b.len() && (b[k] as char).is_ascii_digit() {
                        k += 1;
                    }
                    float = true;
                    j = k;
                } else {
                    return Err(syntax(src, j, "malformed exponent"));
                }
            }
            let text = &src[i..j];
            if text == "." {
                return Err(syntax(src, pos, "stray '.'"));
            }
            out.push(Token { tok: Tok::Num { text: text.to_string(), float }, pos });
            i = j;
            continue;
        }
        return Err(syntax(src, pos, format!("unexpected character '{}'", src[i..].chars().next().unwrap_or('?'))));
    }
    Ok(out)
}

/// P0 + Pdx·dx + Pdy·dy.
#[derive(Clone, Debug)]
struct Val {
    p0: Series,
    px: Series,
    py: Series,
}

impl Val {
    fn scalar(s: Series) -> Val {
        let n = s.order();
        Val { p0: s, px: Series::zero(n), py: Series::zero(n) }
    }

    fn has_diff(&self) -> bool {
        !self.px.is_zero() || !self.py.is_zero()
    }

    fn add(&self, o: &Val) -> Val {
        Val { p0: &self.p0 + &o.p0, px: &self.px + &o.px, py: &self.py + &o.py }
    }

    fn neg(&self) -> Val {
        Val { p0: -&self.p0, px: -&self.px, py: -&self.py }
    }
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    at: usize,
    order: u32,
    saw_float: bool,
    exact_only: bool,
    /// differentials are only legal outside parentheses
    depth: usize,
    /// dx/dy tokens seen in the current top-level term
    diffs: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.tok)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.src.len(), |t| t.pos)
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        syntax(self.src, self.pos(), msg)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|t| t.tok.clone());
        self.at += 1;
        t
    }

    fn uint(&mut self) -> Result<u32, Error> {
        match self.bump() {
            Some(Tok::Num { text, float: false }) => text.parse::<u32>().map_err(|_| {
                self.at -= 1;
                self.err("exponent too large")
            }),
            _ => {
                self.at -= 1;
                Err(self.err("expected a non-negative integer exponent"))
            }
        }
    }

    fn number(&mut self, text: &str, float: bool, pos: usize) -> Result<Coeff, Error> {
        if float {
            if self.exact_only {
                return Err(syntax(self.src, pos, "float literal in exact mode"));
            }
            self.saw_float = true;
            let v: f64 = text.parse().map_err(|_| syntax(self.src, pos, "malformed number"))?;
            Ok(Coeff::float(v))
        } else {
            let v: BigInt = text.parse().map_err(|_| syntax(self.src, pos, "malformed integer"))?;
            Ok(Coeff::rational(BigRational::from_integer(v)))
        }
    }

    fn sum(&mut self) -> Result<Val, Error> {
        let top = self.depth == 0;
        let mut sign_neg = false;
        match self.peek() {
            Some(Tok::Plus) => {
                self.bump();
            }
            Some(Tok::Minus) => {
                self.bump();
                sign_neg = true;
            }
            _ => {}
        }
        let mut acc: Option<Val> = None;
        loop {
            let start = self.pos();
            self.diffs = if top { 0 } else { self.diffs };
            let mut t = self.term()?;
            if top && self.diffs != 1 {
                let msg = if self.diffs == 0 { "term has no dx or dy" } else { "term has more than one differential" };
                return Err(syntax(self.src, start, msg));
            }
            if sign_neg {
                t = t.neg();
            }
            acc = Some(match acc {
                None => t,
                Some(a) => a.add(&t),
            });
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    sign_neg = false;
                }
                Some(Tok::Minus) => {
                    self.bump();
                    sign_neg = true;
                }
                _ => break,
            }
        }
        Ok(acc.expect("at least one term"))
    }

    fn term(&mut self) -> Result<Val, Error> {
        let mut v = self.factor()?;
        while let Some(Tok::Star) = self.peek() {
            self.bump();
            let f = self.factor()?;
            v = self.mul(&v, &f)?;
        }
        Ok(v)
    }

    fn mul(&self, a: &Val, b: &Val) -> Result<Val, Error> {
        if a.has_diff() && b.has_diff() {
            return Err(self.err("product of differentials"));
        }
        Ok(Val { p0: &a.p0 * &b.p0, px: &(&a.px * &b.p0) + &(&a.p0 * &b.px), py: &(&a.py * &b.p0) + &(&a.p0 * &b.py) })
    }

    fn factor(&mut self) -> Result<Val, Error> {
        let n = self.order;
        let pos = self.pos();
        let tok = match self.bump() {
            Some(t) => t,
            None => {
                self.at -= 1;
                return Err(self.err("unexpected end of input"));
            }
        };
        let v = match tok {
            Tok::Num { text, float } => {
                let mut c = self.number(&text, float, pos)?;
                if let Some(Tok::Slash) = self.peek() {
                    self.bump();
                    let dpos = self.pos();
                    match self.bump() {
                        Some(Tok::Num { text, float }) => {
                            let d = self.number(&text, float, dpos)?;
                            if d.is_zero() {
                                return Err(syntax(self.src, dpos, "division by zero"));
                            }
                            c = &c / &d;
                        }
                        _ => {
                            self.at -= 1;
                            return Err(syntax(self.src, dpos, "'/' must join two numeric literals"));
                        }
                    }
                }
                if let Some(Tok::I) = self.peek() {
                    self.bump();
                    c = &c * &Coeff::i();
                }
                Val::scalar(Series::constant(c, n))
            }
            Tok::I => Val::scalar(Series::constant(Coeff::i(), n)),
            Tok::X | Tok::Y => {
                let k = if let Some(Tok::Caret) = self.peek() {
                    self.bump();
                    self.uint()?
                } else {
                    1
                };
                let (a, b) = if tok == Tok::X { (k, 0) } else { (0, k) };
                let mut s = Series::zero(n);
                s.add_term(Exp::new(a, b), Coeff::one());
                Val::scalar(s)
            }
            Tok::Dx | Tok::Dy => {
                if self.depth > 0 {
                    return Err(syntax(self.src, pos, "differential inside parentheses"));
                }
                self.diffs += 1;
                let one = Series::one(n);
                if tok == Tok::Dx {
                    Val { p0: Series::zero(n), px: one, py: Series::zero(n) }
                } else {
                    Val { p0: Series::zero(n), px: Series::zero(n), py: one }
                }
            }
            Tok::LParen => {
                self.depth += 1;
                let inner = self.sum()?;
                self.depth -= 1;
                match self.bump() {
                    Some(Tok::RParen) => {}
                    _ => {
                        self.at -= 1;
                        return Err(self.err("expected ')'"));
                    }
                }
                if let Some(Tok::Caret) = self.peek() {
                    self.bump();
                    let k = self.uint()?;
                    Val::scalar(inner.p0.pow(k))
                } else {
                    inner
                }
            }
            _ => {
                self.at -= 1;
                return Err(self.err("expected a number, x, y, dx, dy or '('"));
            }
        };
        if let Some(Tok::Slash) = self.peek() {
            return Err(self.err("'/' must join two numeric literals"));
        }
        Ok(v)
    }

    fn finish(&self) -> Result<(), Error> {
        if self.at < self.toks.len() {
            let msg = match self.peek() {
                Some(Tok::RParen) => "unbalanced ')'",
                _ => "unexpected token",
            };
            return Err(self.err(msg));
        }
        Ok(())
    }
}

fn in_mode(s: Series, float: bool) -> Series {
    if float {
        s.to_float()
    } else {
        s
    }
}

fn parser(text: &str, order: u32, mode: Mode, depth: usize) -> Result<Parser<'_>, Error> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(syntax(text, 0, "empty expression"));
    }
    Ok(Parser { src: text, toks, at: 0, order, saw_float: false, exact_only: mode == Mode::Exact, depth, diffs: 0 })
}

/// Parses `Σ coef * x^a * y^b * (dx|dy)` into (dx component, dy component).
pub fn parse_field(text: &str, order: u32, mode: Mode) -> Result<VectorField, Error> {
    let mut p = parser(text, order, mode, 0)?;
    let v = p.sum()?;
    p.finish()?;
    let float = mode == Mode::Float || p.saw_float;
    Ok(VectorField::new(in_mode(v.px, float), in_mode(v.py, float)))
}

/// Parses a polynomial without differentials.
pub fn parse_series(text: &str, order: u32, mode: Mode) -> Result<Series, Error> {
    let mut p = parser(text, order, mode, 1)?;
    let v = p.sum()?;
    p.finish()?;
    let float = mode == Mode::Float || p.saw_float;
    Ok(in_mode(v.p0, float))
}

/// A single coefficient such as `-3/4`, `1+2i` or `0.5`.
pub fn parse_coeff(text: &str, mode: Mode) -> Result<Coeff, Error> {
    let s = parse_series(text, 0, mode)?;
    if !s.is_constant() {
        return Err(syntax(text, 0, "expected a constant"));
    }
    Ok(s.constant_term())
}

/// `a; b` as the two components of a map.
pub fn parse_map(text: &str, order: u32, mode: Mode) -> Result<(Series, Series), Error> {
    let Some(k) = text.find(';') else {
        return Err(syntax(text, text.len(), "expected two components separated by ';'"));
    };
    let a = parse_series(&text[..k], order, mode).map_err(|e| shift_err(e, text, 0))?;
    let b = parse_series(&text[k + 1..], order, mode).map_err(|e| shift_err(e, text, k + 1))?;
    if a.is_exact() != b.is_exact() {
        return Ok((a.to_float(), b.to_float()));
    }
    Ok((a, b))
}

/// Re-anchors a position reported inside `text[off..]` to `text`.
fn shift_err(e: Error, text: &str, off: usize) -> Error {
    match e {
        Error::Syntax { line, col, msg } if line == 1 => {
            let base = &text[..off];
            let line0 = base.matches('\n').count() + 1;
            let col0 = base.rsplit('\n').next().map_or(0, |l| l.chars().count());
            Error::Syntax { line: line0, col: col0 + col, msg }
        }
        other => other,
    }
}

/// True when the text holds a float literal.
pub fn has_float_literal(text: &str) -> bool {
    lex(text).map(|t| t.iter().any(|t| matches!(t.tok, Tok::Num { float: true, .. }))).unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_field() {
        let z = parse_field("(-1)*x*dx + 2*y*dy", 6, Mode::Auto).unwrap();
        assert!(z.eq_fields(&VectorField::diagonal(&Coeff::int(-1), &Coeff::int(2), 6)));
        assert!(z.is_exact());
    }

    #[test]
    fn mixed_rational_and_gaussian() {
        let z = parse_field("x^2*y*dx + (1/3 + 2i)*y^2*dy", 6, Mode::Auto).unwrap();
        let (a, b) = z.series().unwrap();
        assert_eq!(a, Series::monomial(Coeff::one(), 2, 1, 6));
        assert_eq!(b, Series::monomial(Coeff::gauss((1, 3), (2, 1)), 0, 2, 6));
    }

    #[test]
    fn slash_between_differentials_is_rejected() {
        match parse_field("dx/dy", 4, Mode::Auto) {
            Err(Error::Syntax { line: 1, col: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn positions_span_lines() {
        match parse_field("x*dx +\n  y*dy*dx", 4, Mode::Auto) {
            Err(Error::Syntax { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_field("x*dx + y", 4, Mode::Auto) {
            Err(Error::Syntax { line: 1, col: 8, msg }) => assert!(msg.contains("no dx")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_inputs() {
        for bad in ["", "x*dx +", "(x*dx)", "x^-1*dx", "2**x*dx", "x*dz", "x*dx)", "x * 2/ y * dx", "1.5*x*dx"] {
            let mode = if bad.contains('.') { Mode::Exact } else { Mode::Auto };
            assert!(matches!(parse_field(bad, 4, mode), Err(Error::Syntax { .. })), "{bad}");
        }
    }

    #[test]
    fn floats_switch_mode() {
        let z = parse_field("-1.5*x*dx + y*dy", 4, Mode::Auto).unwrap();
        assert!(!z.is_exact());
        let z = parse_field("-x*dx + y*dy", 4, Mode::Float).unwrap();
        assert!(!z.is_exact());
        assert!(has_float_literal("2.0*x*dx"));
        assert!(!has_float_literal("2*x*dx"));
    }

    #[test]
    fn parentheses_and_powers() {
        let z = parse_field("(x + y)^2 * dx - 3/4i * x * dy", 4, Mode::Auto).unwrap();
        let (a, b) = z.series().unwrap();
        assert_eq!(a, Series::from_terms(4, [((2, 0), Coeff::one()), ((1, 1), Coeff::int(2)), ((0, 2), Coeff::one())]));
        assert_eq!(b, Series::monomial(Coeff::gauss((0, 1), (-3, 4)), 1, 0, 4));
    }

    #[test]
    fn truncation_drops_high_terms() {
        let z = parse_field("x^5*dx + y*dy", 3, Mode::Auto).unwrap();
        assert!(z.series().unwrap().0.is_zero());
    }

    #[test]
    fn series_maps_and_constants() {
        assert_eq!(parse_coeff("-3/4", Mode::Auto).unwrap(), Coeff::ratio(-3, 4));
        assert_eq!(parse_coeff("1+2i", Mode::Auto).unwrap(), Coeff::gauss((1, 1), (2, 1)));
        let (a, b) = parse_map("x + y^2; 2*y", 4, Mode::Auto).unwrap();
        assert_eq!(a, &Series::x(4) + &Series::monomial(Coeff::one(), 0, 2, 4));
        assert_eq!(b, Series::y(4).scale(&Coeff::int(2)));
        match parse_map("x; y +", 4, Mode::Auto) {
            Err(Error::Syntax { col: 7, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(parse_series("x*dx", 4, Mode::Auto).is_err());
    }
}
