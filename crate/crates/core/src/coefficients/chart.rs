use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{GaussianRational, Rational};
use crate::error::{Error, Result};

/// Largest supported chart dimension 2n (n ∈ {1, 2}).
pub const MAX_DIM: usize = 4;

/// An integer vector of length `MAX_DIM`: a monomial multidegree, a Fourier
/// frequency or a y-multidegree, depending on context. Unused trailing
/// slots are zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct MultiIndex(pub [i16; MAX_DIM]);

impl MultiIndex {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn unit(axis: usize) -> Self {
        let mut m = Self::zero();
        m.0[axis] = 1;
        m
    }

    pub fn from_slice(v: &[i64]) -> Result<Self> {
        if v.len() > MAX_DIM {
            return Err(Error::Dimension(format!("multi-index of length {} exceeds {MAX_DIM}", v.len())));
        }
        let mut m = Self::zero();
        for (slot, x) in m.0.iter_mut().zip(v) {
            *slot = i16::try_from(*x).map_err(|_| Error::Dimension(format!("index entry {x} out of range")))?;
        }
        Ok(m)
    }

    pub fn to_vec(&self, dim: usize) -> Vec<i64> {
        self.0[..dim].iter().map(|x| *x as i64).collect()
    }

    pub fn total(&self) -> i32 {
        self.0.iter().map(|x| *x as i32).sum()
    }

    pub fn max_abs(&self) -> i32 {
        self.0.iter().map(|x| (*x as i32).abs()).max().unwrap_or(0)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut m = *self;
        for (a, b) in m.0.iter_mut().zip(o.0) {
            *a += b;
        }
        m
    }

    pub fn neg(&self) -> Self {
        let mut m = *self;
        for a in m.0.iter_mut() {
            *a = -*a;
        }
        m
    }

    pub fn inc(&self, axis: usize) -> Self {
        let mut m = *self;
        m.0[axis] += 1;
        m
    }

    pub fn dec(&self, axis: usize) -> Self {
        let mut m = *self;
        m.0[axis] -= 1;
        m
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| *x == 0)
    }
}

/// Which coefficient ring a chart function lives in, with its truncation bound.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChartRing {
    /// Polynomials in x of total degree ≤ `max_degree`.
    Poly { max_degree: u32 },
    /// Finite Fourier sums Σ c_m e^{i m·x} with max|m_i| ≤ `max_mode`.
    Fourier { max_mode: u32 },
}

impl ChartRing {
    pub fn is_fourier(&self) -> bool {
        matches!(self, ChartRing::Fourier { .. })
    }

    fn admits(&self, key: &MultiIndex) -> bool {
        match *self {
            ChartRing::Poly { max_degree } => key.total() <= max_degree as i32,
            ChartRing::Fourier { max_mode } => key.max_abs() <= max_mode as i32,
        }
    }

    fn same_kind(&self, o: &Self) -> bool {
        self.is_fourier() == o.is_fourier()
    }
}

/// A coefficient function on the chart.
///
/// Both variants store a sparse map from an integer vector to a Gaussian
/// rational: for `Poly` the key is the monomial multidegree of x, for
/// `Fourier` it is the frequency m of e^{i m·x}. Multiplication adds keys in
/// both cases; only differentiation and truncation differ.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ChartFunction {
    ring: ChartRing,
    dim: usize,
    terms: BTreeMap<MultiIndex, GaussianRational>,
    /// Fourier only: the coefficient at −m is the conjugate of the one at m.
    reality: bool,
    /// Set once a nonzero term has been dropped by the ring bound.
    truncated: bool,
}

impl ChartFunction {
    pub fn zero(ring: ChartRing, dim: usize) -> Self {
        Self { ring, dim, terms: BTreeMap::new(), reality: ring.is_fourier(), truncated: false }
    }

    pub fn constant(ring: ChartRing, dim: usize, c: GaussianRational) -> Self {
        let reality = ring.is_fourier() && c.is_real();
        let mut f = Self::zero(ring, dim);
        f.reality = reality;
        if !c.is_zero() {
            f.terms.insert(MultiIndex::zero(), c);
        }
        f
    }

    pub fn one(ring: ChartRing, dim: usize) -> Self {
        Self::constant(ring, dim, GaussianRational::one())
    }

    pub fn zero_like(&self) -> Self {
        Self::zero(self.ring, self.dim)
    }

    /// `c · x^deg` (Poly) or `c · e^{i deg·x}` (Fourier). Reality is not claimed.
    pub fn monomial(ring: ChartRing, dim: usize, key: MultiIndex, c: GaussianRational) -> Self {
        let mut f = Self::zero(ring, dim);
        f.reality = false;
        f.insert(key, c);
        f
    }

    /// Builds a function from raw terms; the reality flag is set when the
    /// coefficients actually satisfy the conjugation symmetry.
    pub fn from_terms(ring: ChartRing, dim: usize, terms: impl IntoIterator<Item = (MultiIndex, GaussianRational)>) -> Self {
        let mut f = Self::zero(ring, dim);
        for (k, c) in terms {
            f.add_term(k, &c);
        }
        f.reality = ring.is_fourier() && f.check_reality();
        f
    }

    /// cos(m·x) on the Fourier ring.
    pub fn cos(ring: ChartRing, dim: usize, m: MultiIndex) -> Self {
        let half = GaussianRational::from_frac(1, 2);
        Self::from_terms(ring, dim, [(m, half.clone()), (m.neg(), half)])
    }

    /// sin(m·x) on the Fourier ring.
    pub fn sin(ring: ChartRing, dim: usize, m: MultiIndex) -> Self {
        let c = GaussianRational::new(Rational::from_integer(0.into()), super::rat(-1, 2));
        Self::from_terms(ring, dim, [(m, c.clone()), (m.neg(), -c)])
    }

    fn insert(&mut self, key: MultiIndex, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        if self.ring.admits(&key) {
            self.terms.insert(key, c);
        } else {
            self.truncated = true;
        }
    }

    fn add_term(&mut self, key: MultiIndex, c: &GaussianRational) {
        if c.is_zero() {
            return;
        }
        if !self.ring.admits(&key) {
            self.truncated = true;
            return;
        }
        match self.terms.get_mut(&key) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, c.clone());
            }
        }
    }

    pub fn ring(&self) -> ChartRing {
        self.ring
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn has_reality_flag(&self) -> bool {
        self.reality
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, key: &MultiIndex) -> GaussianRational {
        self.terms.get(key).cloned().unwrap_or_default()
    }

    /// The constant value if the function has no x dependence.
    pub fn as_constant(&self) -> Option<GaussianRational> {
        match self.terms.len() {
            0 => Some(GaussianRational::zero()),
            1 => self.terms.get(&MultiIndex::zero()).cloned(),
            _ => None,
        }
    }

    /// Largest key size present: total degree (Poly) or max |m_i| (Fourier).
    pub fn spread(&self) -> i32 {
        self.terms
            .keys()
            .map(|k| if self.ring.is_fourier() { k.max_abs() } else { k.total() })
            .max()
            .unwrap_or(0)
    }

    /// Checks the conjugation symmetry c(−m) = conj(c(m)).
    pub fn check_reality(&self) -> bool {
        self.terms.iter().all(|(k, c)| self.coeff(&k.neg()) == c.conj())
    }

    fn compatible(&self, o: &Self) -> Result<()> {
        if !self.ring.same_kind(&o.ring) {
            return Err(Error::RingMismatch);
        }
        if self.dim != o.dim {
            return Err(Error::Dimension(format!("chart dimensions {} and {}", self.dim, o.dim)));
        }
        Ok(())
    }

    pub fn ring_add(&self, o: &Self) -> Result<Self> {
        self.compatible(o)?;
        Ok(self.add(o))
    }

    pub fn ring_mul(&self, o: &Self) -> Result<Self> {
        self.compatible(o)?;
        Ok(self.mul(o))
    }

    /// ∂/∂x^axis (0-based axis).
    pub fn ring_derive(&self, axis: usize) -> Result<Self> {
        if axis >= self.dim {
            return Err(Error::Dimension(format!("axis {} out of range for dimension {}", axis + 1, self.dim)));
        }
        Ok(self.derive(axis))
    }

    /// Normalized torus integral: the zero-frequency coefficient.
    pub fn ring_average(&self) -> Result<GaussianRational> {
        match self.ring {
            ChartRing::Fourier { .. } => Ok(self.coeff(&MultiIndex::zero())),
            ChartRing::Poly { .. } => Err(Error::Unsupported("average is only defined on the Fourier ring".into())),
        }
    }

    pub(crate) fn add(&self, o: &Self) -> Self {
        debug_assert_eq!(self.dim, o.dim);
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.add_term(*k, c);
        }
        out.reality = self.reality && o.reality;
        out.truncated |= o.truncated;
        out
    }

    pub(crate) fn add_assign(&mut self, o: &Self) {
        for (k, c) in &o.terms {
            self.add_term(*k, c);
        }
        self.reality &= o.reality;
        self.truncated |= o.truncated;
    }

    pub(crate) fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub(crate) fn neg(&self) -> Self {
        Self {
            ring: self.ring,
            dim: self.dim,
            terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect(),
            reality: self.reality,
            truncated: self.truncated,
        }
    }

    pub(crate) fn scale(&self, s: &GaussianRational) -> Self {
        if s.is_zero() {
            let mut z = Self::zero(self.ring, self.dim);
            z.truncated = self.truncated;
            return z;
        }
        if s.is_one() {
            return self.clone();
        }
        Self {
            ring: self.ring,
            dim: self.dim,
            terms: self.terms.iter().map(|(k, c)| (*k, c * s)).collect(),
            reality: self.reality && s.is_real(),
            truncated: self.truncated,
        }
    }

    pub(crate) fn scale_rational(&self, s: &Rational) -> Self {
        self.scale(&GaussianRational::real(s.clone()))
    }

    pub(crate) fn mul(&self, o: &Self) -> Self {
        debug_assert_eq!(self.dim, o.dim);
        if let Some(c) = o.as_constant() {
            let mut out = self.scale(&c);
            out.reality = self.reality && o.reality;
            out.truncated |= o.truncated;
            return out;
        }
        if let Some(c) = self.as_constant() {
            let mut out = o.scale(&c);
            out.reality = self.reality && o.reality;
            out.truncated |= self.truncated;
            return out;
        }
        let mut out = Self::zero(self.ring, self.dim);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &o.terms {
                out.add_term(ka.add(kb), &(ca * cb));
            }
        }
        out.reality = self.reality && o.reality;
        out.truncated |= self.truncated || o.truncated;
        out
    }

    pub(crate) fn derive(&self, axis: usize) -> Self {
        let mut out = Self::zero(self.ring, self.dim);
        out.truncated = self.truncated;
        out.reality = self.reality;
        for (k, c) in &self.terms {
            let e = k.0[axis];
            if e == 0 {
                continue;
            }
            let factor = GaussianRational::from_int(e as i64);
            match self.ring {
                ChartRing::Poly { .. } => out.add_term(k.dec(axis), &(c * &factor)),
                ChartRing::Fourier { .. } => out.add_term(*k, &(c * &factor).mul_i()),
            }
        }
        out
    }

    /// Evaluates a polynomial at the origin; for Fourier sums this is Σ c_m.
    pub fn value_at_origin(&self) -> GaussianRational {
        match self.ring {
            ChartRing::Poly { .. } => self.coeff(&MultiIndex::zero()),
            ChartRing::Fourier { .. } => {
                let mut s = GaussianRational::zero();
                for c in self.terms.values() {
                    s += c;
                }
                s
            }
        }
    }

    /// Same function with a different ring bound (keys beyond the new bound are dropped).
    pub fn with_ring(&self, ring: ChartRing) -> Self {
        let mut out = Self::zero(ring, self.dim);
        for (k, c) in &self.terms {
            out.add_term(*k, c);
        }
        out.reality = self.reality && ring.is_fourier();
        out.truncated |= self.truncated;
        out
    }

    /// Compact human-readable rendering, e.g. `3/7 + 1/2·e(1,0) + 1/2·e(-1,0)`.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (k, c) in &self.terms {
            if k.is_zero() {
                parts.push(format!("{c}"));
                continue;
            }
            let basis = match self.ring {
                ChartRing::Poly { .. } => {
                    let mut s = Vec::new();
                    for (i, e) in k.0[..self.dim].iter().enumerate() {
                        match e {
                            0 => {}
                            1 => s.push(format!("x{}", i + 1)),
                            _ => s.push(format!("x{}^{}", i + 1, e)),
                        }
                    }
                    s.join("*")
                }
                ChartRing::Fourier { .. } => {
                    let v: Vec<String> = k.0[..self.dim].iter().map(|e| e.to_string()).collect();
                    format!("e({})", v.join(","))
                }
            };
            if c.is_one() {
                parts.push(basis);
            } else {
                parts.push(format!("({c})*{basis}"));
            }
        }
        parts.join(" + ")
    }
}

impl fmt::Display for ChartFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[derive(Serialize, Deserialize)]
struct ChartFunctionRepr {
    ring: ChartRing,
    dim: usize,
    terms: Vec<(Vec<i64>, GaussianRational)>,
}

impl Serialize for ChartFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ChartFunctionRepr {
            ring: self.ring,
            dim: self.dim,
            terms: self.terms.iter().map(|(k, c)| (k.to_vec(self.dim), c.clone())).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ChartFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ChartFunctionRepr::deserialize(d)?;
        let mut terms = Vec::new();
        for (k, c) in r.terms {
            terms.push((MultiIndex::from_slice(&k).map_err(serde::de::Error::custom)?, c));
        }
        Ok(ChartFunction::from_terms(r.ring, r.dim, terms))
    }
}
