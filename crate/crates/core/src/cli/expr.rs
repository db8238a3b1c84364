//! Expressions for chart functions and End_V((ħ)) elements.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := power (('*' | '/') power)*        division by constants only
//! power  := unary ('^' ['-'] int)?
//! unary  := '-' unary | atom
//! atom   := number | 'i' | 'h' | 'x'k | ('cos'|'sin') '(' expr ')' | 'exp' '(' expr ')'
//!         | '(' expr ')'
//! matrix := '[' '[' expr (',' expr)* ']' (',' '[' … ']')* ']'
//! ```
//! `h` is ħ (negative powers allowed), `xk` the k-th coordinate (1-based).
//! On Fourier charts the argument of cos/sin must be an integer combination
//! of coordinates, and `exp` takes `i` times such a combination.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::coefficients::{parse_rational, ChartFunction, ChartRing, GaussianRational, MultiIndex, Rational};
use crate::error::{Error, Result};
use crate::weyl_forms::{GradedElement, TermKey};

/// A Laurent polynomial in ħ with chart-function coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct HSeries {
    ring: ChartRing,
    dim: usize,
    pub terms: BTreeMap<i32, ChartFunction>,
}

impl HSeries {
    fn zero(ring: ChartRing, dim: usize) -> Self {
        Self { ring, dim, terms: BTreeMap::new() }
    }

    fn function(f: ChartFunction) -> Self {
        let mut s = Self::zero(f.ring(), f.dim());
        s.push(0, f);
        s
    }

    fn constant(ring: ChartRing, dim: usize, c: GaussianRational) -> Self {
        Self::function(ChartFunction::constant(ring, dim, c))
    }

    fn push(&mut self, k: i32, f: ChartFunction) {
        let sum = match self.terms.remove(&k) {
            Some(old) => old.add(&f),
            None => f,
        };
        if !sum.is_zero() {
            self.terms.insert(k, sum);
        }
    }

    fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (k, f) in &o.terms {
            out.push(*k, f.clone());
        }
        out
    }

    fn neg(&self) -> Self {
        Self { terms: self.terms.iter().map(|(k, f)| (*k, f.neg())).collect(), ..self.clone() }
    }

    fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero(self.ring, self.dim);
        for (a, f) in &self.terms {
            for (b, g) in &o.terms {
                out.push(a + b, f.mul(g));
            }
        }
        out
    }

    fn as_constant(&self) -> Option<GaussianRational> {
        match self.terms.len() {
            0 => Some(GaussianRational::zero()),
            1 => self.terms.get(&0).and_then(|f| f.as_constant()),
            _ => None,
        }
    }

    fn is_single_hbar(&self) -> Option<i32> {
        let mut it = self.terms.iter();
        match (it.next(), it.next()) {
            (Some((k, f)), None) if f.as_constant() == Some(GaussianRational::one()) => Some(*k),
            _ => None,
        }
    }

    pub fn into_element(self, matrix_size: usize, row: usize, col: usize) -> GradedElement {
        let mut e = GradedElement::zero(self.dim, matrix_size, self.ring);
        for (k, f) in self.terms {
            e = e.add(&GradedElement::monomial(self.dim, matrix_size, TermKey::new(k, MultiIndex::zero(), 0, row, col), &f));
        }
        e
    }

    /// The ħ⁰ coefficient, failing when other orders are present.
    pub fn into_function(self) -> Result<ChartFunction> {
        if self.terms.keys().any(|k| *k != 0) {
            return Err(Error::InvalidArgument("expected a function without ħ".into()));
        }
        Ok(self.terms.get(&0).cloned().unwrap_or_else(|| ChartFunction::zero(self.ring, self.dim)))
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    ring: ChartRing,
    dim: usize,
}

fn err<T>(pos: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { pos, msg: msg.into() })
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            err(self.pos, format!("expected '{}'", c as char))
        }
    }

    fn expr(&mut self) -> Result<HSeries> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?);
            } else if self.eat(b'-') {
                acc = acc.add(&self.term()?.neg());
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<HSeries> {
        let mut acc = self.power()?;
        loop {
            if self.eat(b'*') {
                acc = acc.mul(&self.power()?);
            } else if self.peek() == Some(b'/') {
                let at = self.pos;
                self.pos += 1;
                let d = self.power()?;
                let c = match d.as_constant() {
                    Some(c) if !c.is_zero() => c,
                    _ => return err(at, "division by a non-constant or zero"),
                };
                acc = acc.mul(&HSeries::constant(self.ring, self.dim, c.inv()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Result<HSeries> {
        let base = self.unary()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let at = self.pos;
        let neg = self.eat(b'-');
        let e = self.integer()?;
        if neg {
            return match base.is_single_hbar() {
                Some(k) => {
                    let mut s = HSeries::zero(self.ring, self.dim);
                    s.push(-k * e as i32, ChartFunction::one(self.ring, self.dim));
                    Ok(s)
                }
                None => err(at, "negative powers are only allowed for h"),
            };
        }
        if e > 64 {
            return err(at, "exponent too large");
        }
        let mut out = HSeries::constant(self.ring, self.dim, GaussianRational::one());
        for _ in 0..e {
            out = out.mul(&base);
        }
        Ok(out)
    }

    fn unary(&mut self) -> Result<HSeries> {
        if self.eat(b'-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.atom()
    }

    fn integer(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .map_or_else(|| err(start, "expected an integer"), Ok)
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn atom(&mut self) -> Result<HSeries> {
        let at = match self.peek() {
            Some(_) => self.pos,
            None => return err(self.pos, "unexpected end of input"),
        };
        let c = self.src[at];
        if c == b'(' {
            self.pos += 1;
            let e = self.expr()?;
            self.expect(b')')?;
            return Ok(e);
        }
        if c.is_ascii_digit() {
            let start = self.pos;
            while self.pos < self.src.len() && (self.src[self.pos].is_ascii_digit()) {
                self.pos += 1;
            }
            let r = parse_rational(std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("?"))?;
            return Ok(HSeries::constant(self.ring, self.dim, GaussianRational::real(r)));
        }
        if !c.is_ascii_alphabetic() {
            return err(at, format!("unexpected character '{}'", c as char));
        }
        let name = self.ident();
        match name.as_str() {
            "i" => Ok(HSeries::constant(self.ring, self.dim, GaussianRational::i())),
            "h" => {
                let mut s = HSeries::zero(self.ring, self.dim);
                s.push(1, ChartFunction::one(self.ring, self.dim));
                Ok(s)
            }
            "cos" | "sin" | "exp" => {
                if !self.ring.is_fourier() {
                    return err(at, format!("{name} needs a Fourier chart"));
                }
                self.expect(b'(')?;
                self.skip_ws();
                let arg_at = self.pos;
                // the argument is a linear form, read on a polynomial ring
                let mut sub = Parser { src: self.src, pos: self.pos, ring: ChartRing::Poly { max_degree: 8 }, dim: self.dim };
                let arg = sub.expr()?;
                self.pos = sub.pos;
                self.expect(b')')?;
                self.periodic(&name, arg, arg_at)
            }
            _ if name.starts_with('x') => {
                let k: usize = name[1..].parse().map_err(|_| Error::Parse { pos: at, msg: format!("unknown name {name:?}") })?;
                if k == 0 || k > self.dim {
                    return err(at, format!("coordinate x{k} outside 1..={}", self.dim));
                }
                if self.ring.is_fourier() {
                    return err(at, "bare coordinates are not periodic; use cos/sin/exp on a Fourier chart");
                }
                Ok(HSeries::function(ChartFunction::monomial(self.ring, self.dim, MultiIndex::unit(k - 1), GaussianRational::one())))
            }
            _ => err(at, format!("unknown name {name:?}")),
        }
    }

    /// cos/sin/exp of an integer combination m·x.
    fn periodic(&mut self, name: &str, lin: HSeries, at: usize) -> Result<HSeries> {
        let f = lin.into_function().map_err(|_| Error::Parse { pos: at, msg: "argument must not contain h".into() })?;
        if f.is_truncated() {
            return err(at, "argument must be linear in the coordinates");
        }
        let mut m = [0i64; 4];
        for (k, c) in f.terms() {
            if k.total() != 1 {
                return err(at, "argument must be linear in the coordinates without constant term");
            }
            let axis = (0..4).find(|&a| k.0[a] == 1).unwrap_or(0);
            let coef = if name == "exp" {
                if !c.re.is_zero() {
                    return err(at, "exp takes i times an integer combination of coordinates");
                }
                c.im.clone()
            } else {
                if !c.im.is_zero() {
                    return err(at, "cos/sin take a real integer combination of coordinates");
                }
                c.re.clone()
            };
            if !coef.is_integer() || coef.abs() > Rational::from_integer(1000.into()) {
                return err(at, "mode coefficients must be small integers");
            }
            m[axis] = coef.to_integer().try_into().unwrap_or(0);
        }
        let mi = MultiIndex::from_slice(&m[..self.dim])?;
        let g = match name {
            "cos" => ChartFunction::cos(self.ring, self.dim, mi),
            "sin" => ChartFunction::sin(self.ring, self.dim, mi),
            _ => ChartFunction::monomial(self.ring, self.dim, mi, GaussianRational::one()),
        };
        Ok(HSeries::function(g))
    }
}

fn finish(p: &mut Parser<'_>) -> Result<()> {
    if p.peek().is_some() {
        return err(p.pos, "trailing input");
    }
    Ok(())
}

/// Parses a scalar expression.
pub fn parse_series(src: &str, ring: ChartRing, dim: usize) -> Result<HSeries> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, ring, dim };
    let e = p.expr()?;
    finish(&mut p)?;
    Ok(e)
}

pub fn parse_function(src: &str, ring: ChartRing, dim: usize) -> Result<ChartFunction> {
    parse_series(src, ring, dim)?.into_function().map_err(|_| Error::Parse { pos: 0, msg: "expected a function without h".into() })
}

/// Parses `[[a, b], [c, d]]` or a scalar expression (times the identity).
pub fn parse_endomorphism(src: &str, ring: ChartRing, dim: usize, matrix_size: usize) -> Result<GradedElement> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, ring, dim };
    if p.peek() != Some(b'[') {
        let s = p.expr()?;
        finish(&mut p)?;
        let mut e = GradedElement::zero(dim, matrix_size, ring);
        for r in 0..matrix_size {
            e = e.add(&s.clone().into_element(matrix_size, r, r));
        }
        return Ok(e);
    }
    let mut e = GradedElement::zero(dim, matrix_size, ring);
    p.expect(b'[')?;
    let mut row = 0;
    loop {
        let row_at = p.pos;
        p.expect(b'[')?;
        let mut col = 0;
        loop {
            let at = p.pos;
            let s = p.expr()?;
            if row >= matrix_size || col >= matrix_size {
                return err(at, format!("matrix entry ({}, {}) outside {matrix_size}×{matrix_size}", row + 1, col + 1));
            }
            e = e.add(&s.into_element(matrix_size, row, col));
            col += 1;
            if !p.eat(b',') {
                break;
            }
        }
        p.expect(b']')?;
        if col != matrix_size {
            return err(row_at, format!("row {} has {col} entries, expected {matrix_size}", row + 1));
        }
        row += 1;
        if !p.eat(b',') {
            break;
        }
    }
    p.expect(b']')?;
    finish(&mut p)?;
    if row != matrix_size {
        return err(0, format!("{row} rows, expected {matrix_size}"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::rat;

    const F: ChartRing = ChartRing::Fourier { max_mode: 8 };
    const P: ChartRing = ChartRing::Poly { max_degree: 6 };

    #[test]
    fn polynomials() {
        let f = parse_function("3/7 + x1*x2^2 - 2*x1", P, 2).unwrap();
        assert_eq!(f.coeff(&MultiIndex::from_slice(&[1, 2]).unwrap()), GaussianRational::one());
        assert_eq!(f.coeff(&MultiIndex::zero()), GaussianRational::from_frac(3, 7));
        assert_eq!(f.coeff(&MultiIndex::unit(0)), GaussianRational::from_int(-2));
    }

    #[test]
    fn trig() {
        let f = parse_function("cos(x1)^2 + sin(x1)^2", F, 2).unwrap();
        assert_eq!(f, ChartFunction::one(F, 2));
        let g = parse_function("exp(i*(2*x1 - x2))", F, 2).unwrap();
        assert_eq!(g.coeff(&MultiIndex::from_slice(&[2, -1]).unwrap()), GaussianRational::one());
    }

    #[test]
    fn hbar_series() {
        let s = parse_series("h^-1 + 2*h*cos(x2)", F, 2).unwrap();
        assert_eq!(s.terms.len(), 2);
        assert_eq!(s.terms[&-1], ChartFunction::one(F, 2));
        let _ = rat(1, 1);
    }

    #[test]
    fn positioned_errors() {
        match parse_function("1 + x1", F, 2) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        match parse_function("cos(x1 * x2)", F, 2) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_function("2 +", P, 2), Err(Error::Parse { pos: 3, .. })));
        assert!(matches!(parse_function("x3", P, 2), Err(Error::Parse { pos: 0, .. })));
        assert!(matches!(parse_function("1 / x1", P, 2), Err(Error::Parse { pos: 2, .. })));
    }

    #[test]
    fn matrices() {
        let e = parse_endomorphism("[[1, -x1], [0, 0]]", P, 2, 2).unwrap();
        assert_eq!(e.len(), 2);
        assert!(parse_endomorphism("[[1, 2]]", P, 2, 2).is_err());
        let s = parse_endomorphism("x2", P, 2, 2).unwrap();
        assert_eq!(s.len(), 2);
    }
}
