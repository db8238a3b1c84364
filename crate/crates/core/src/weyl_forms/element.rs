use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::forms::{self, FormMask};
use crate::coefficients::{ChartFunction, ChartRing, GaussianRational, MultiIndex};
use crate::error::{Error, Result};

/// Position of one monomial ħ^k y^α dx^S E_{row,col}.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct TermKey {
    pub forms: FormMask,
    pub hbar: i32,
    pub y: MultiIndex,
    pub row: u8,
    pub col: u8,
}

impl TermKey {
    pub fn new(hbar: i32, y: MultiIndex, forms: FormMask, row: usize, col: usize) -> Self {
        Self { forms, hbar, y, row: row as u8, col: col as u8 }
    }

    pub fn scalar(hbar: i32) -> Self {
        Self::new(hbar, MultiIndex::zero(), 0, 0, 0)
    }

    /// 2k + |α|.
    pub fn filtration(&self) -> i32 {
        2 * self.hbar + self.y.total()
    }

    pub fn form_degree(&self) -> u32 {
        forms::degree(self.forms)
    }

    pub fn y_degree(&self) -> i32 {
        self.y.total()
    }
}

/// Truncation of the 2[ħ]+[y]-adic filtration plus the ħ window reported to callers.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub hbar_min: i32,
    pub hbar_max: i32,
    /// Terms with 2k + |α| ≤ `max_filtration` are kept.
    pub max_filtration: i32,
    pub chart: ChartRing,
}

impl TruncationPolicy {
    pub fn new(hbar_min: i32, hbar_max: i32, max_filtration: i32, chart: ChartRing) -> Result<Self> {
        if max_filtration < 0 {
            return Err(Error::InvalidArgument(format!("max filtration {max_filtration} < 0")));
        }
        if hbar_min > hbar_max {
            return Err(Error::InvalidArgument(format!("empty ħ window [{hbar_min}, {hbar_max}]")));
        }
        Ok(Self { hbar_min, hbar_max, max_filtration, chart })
    }

    /// Exclusive filtration bound for stored elements.
    pub fn storage_precision(&self) -> i32 {
        self.max_filtration + 1
    }
}

/// A section of Ω•(W(End V)) on the chart: a finite sum of
/// f(x) ħ^k y^α dx^S E_{pq} with exact coefficients.
///
/// `prec` is the exclusive filtration bound of what is known: every term of
/// filtration ≥ `prec` is unknown and is never stored. `None` means the
/// element is exact.
#[derive(Clone, PartialEq, Debug)]
pub struct GradedElement {
    dim: usize,
    matrix_size: usize,
    ring: ChartRing,
    prec: Option<i32>,
    terms: BTreeMap<TermKey, ChartFunction>,
}

impl GradedElement {
    pub fn zero(dim: usize, matrix_size: usize, ring: ChartRing) -> Self {
        Self { dim, matrix_size, ring, prec: None, terms: BTreeMap::new() }
    }

    pub fn zero_like(&self) -> Self {
        Self::zero(self.dim, self.matrix_size, self.ring)
    }

    /// f(x)·I_N.
    pub fn function(f: &ChartFunction, matrix_size: usize) -> Self {
        let mut e = Self::zero(f.dim(), matrix_size, f.ring());
        for p in 0..matrix_size {
            e.add_term(TermKey::new(0, MultiIndex::zero(), 0, p, p), f);
        }
        e
    }

    pub fn constant(dim: usize, matrix_size: usize, ring: ChartRing, c: GaussianRational) -> Self {
        Self::function(&ChartFunction::constant(ring, dim, c), matrix_size)
    }

    pub fn one(dim: usize, matrix_size: usize, ring: ChartRing) -> Self {
        Self::constant(dim, matrix_size, ring, GaussianRational::one())
    }

    /// y^i · I_N (0-based axis).
    pub fn y(dim: usize, matrix_size: usize, ring: ChartRing, axis: usize) -> Self {
        let one = ChartFunction::one(ring, dim);
        let mut e = Self::zero(dim, matrix_size, ring);
        for p in 0..matrix_size {
            e.add_term(TermKey::new(0, MultiIndex::unit(axis), 0, p, p), &one);
        }
        e
    }

    /// A single monomial.
    pub fn monomial(dim: usize, matrix_size: usize, key: TermKey, f: &ChartFunction) -> Self {
        let mut e = Self::zero(dim, matrix_size, f.ring());
        e.add_term(key, f);
        e
    }

    pub fn from_terms(
        dim: usize,
        matrix_size: usize,
        ring: ChartRing,
        terms: impl IntoIterator<Item = (TermKey, ChartFunction)>,
    ) -> Self {
        let mut e = Self::zero(dim, matrix_size, ring);
        for (k, f) in terms {
            e.add_term(k, &f);
        }
        e
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix_size(&self) -> usize {
        self.matrix_size
    }

    pub fn ring(&self) -> ChartRing {
        self.ring
    }

    pub fn precision(&self) -> Option<i32> {
        self.prec
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TermKey, &ChartFunction)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, key: &TermKey) -> Option<&ChartFunction> {
        self.terms.get(key)
    }

    /// True when every known term vanishes (unknown tail aside).
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.prec.is_none()
    }

    pub fn is_truncated_in_x(&self) -> bool {
        self.terms.values().any(|f| f.is_truncated())
    }

    pub(crate) fn known(&self, filtration: i32) -> bool {
        self.prec.map_or(true, |p| filtration < p)
    }

    pub(crate) fn add_term(&mut self, key: TermKey, f: &ChartFunction) {
        if f.is_zero() || !self.known(key.filtration()) {
            return;
        }
        debug_assert!(
            (key.row as usize) < self.matrix_size && (key.col as usize) < self.matrix_size,
            "matrix position out of range"
        );
        match self.terms.get_mut(&key) {
            Some(old) => {
                old.add_assign(f);
                if old.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, f.clone());
            }
        }
    }

    pub(crate) fn add_scaled_term(&mut self, key: TermKey, f: &ChartFunction, s: &GaussianRational) {
        if s.is_zero() || !self.known(key.filtration()) {
            return;
        }
        self.add_term(key, &f.scale(s));
    }

    /// Lowers the known window to filtration < `prec`.
    pub fn truncate(&self, prec: i32) -> Self {
        let mut out = self.clone();
        out.truncate_in_place(prec);
        out
    }

    pub fn truncate_in_place(&mut self, prec: i32) {
        let p = self.prec.map_or(prec, |q| q.min(prec));
        self.prec = Some(p);
        self.terms.retain(|k, _| k.filtration() < p);
    }

    /// Forgets the precision bookkeeping; the element is treated as exact.
    pub fn assume_exact(mut self) -> Self {
        self.prec = None;
        self
    }

    pub(crate) fn set_precision(&mut self, prec: Option<i32>) {
        self.prec = prec;
        if let Some(p) = prec {
            self.terms.retain(|k, _| k.filtration() < p);
        }
    }

    /// Lower bound on the filtration of the true (untruncated) element;
    /// `None` for the exact zero.
    pub fn valuation_bound(&self) -> Option<i32> {
        let known = self.filtration_degree();
        match (known, self.prec) {
            (Some(a), Some(p)) => Some(a.min(p)),
            (Some(a), None) => Some(a),
            (None, p) => p,
        }
    }

    /// Min over terms of 2k + |α|; `None` stands for +∞ (the zero element).
    pub fn filtration_degree(&self) -> Option<i32> {
        self.terms.keys().map(|k| k.filtration()).min()
    }

    pub fn max_form_degree(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.form_degree()).max()
    }

    pub fn max_y_degree(&self) -> Option<i32> {
        self.terms.keys().map(|k| k.y_degree()).max()
    }

    pub fn min_hbar(&self) -> Option<i32> {
        self.terms.keys().map(|k| k.hbar).min()
    }

    pub(crate) fn check_compatible(&self, o: &Self) -> Result<()> {
        if self.dim != o.dim {
            return Err(Error::Incompatible(format!("chart dimensions {} and {}", self.dim, o.dim)));
        }
        if self.matrix_size != o.matrix_size {
            return Err(Error::Incompatible(format!("matrix sizes {} and {}", self.matrix_size, o.matrix_size)));
        }
        if self.ring.is_fourier() != o.ring.is_fourier() {
            return Err(Error::RingMismatch);
        }
        Ok(())
    }

    pub fn try_add(&self, o: &Self) -> Result<Self> {
        self.check_compatible(o)?;
        Ok(self.add(o))
    }

    pub fn add(&self, o: &Self) -> Self {
        debug_assert!(self.check_compatible(o).is_ok());
        let mut out = self.clone();
        out.set_precision(min_prec(self.prec, o.prec));
        for (k, f) in &o.terms {
            out.add_term(*k, f);
        }
        out
    }

    pub fn add_assign(&mut self, o: &Self) {
        self.set_precision(min_prec(self.prec, o.prec));
        for (k, f) in &o.terms {
            self.add_term(*k, f);
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&GaussianRational::from_int(-1))
    }

    pub fn scale(&self, s: &GaussianRational) -> Self {
        let mut out = Self { terms: BTreeMap::new(), ..self.clone() };
        if s.is_zero() {
            return out;
        }
        for (k, f) in &self.terms {
            out.add_term(*k, &f.scale(s));
        }
        out
    }

    /// Pointwise multiplication of every coefficient by a function of x.
    pub fn mul_function(&self, g: &ChartFunction) -> Self {
        let mut out = Self { terms: BTreeMap::new(), ..self.clone() };
        for (k, f) in &self.terms {
            out.add_term(*k, &f.mul(g));
        }
        out
    }

    /// Multiplication by ħ^s.
    pub fn shift_hbar(&self, s: i32) -> Self {
        Self {
            dim: self.dim,
            matrix_size: self.matrix_size,
            ring: self.ring,
            prec: self.prec.map(|p| p + 2 * s),
            terms: self.terms.iter().map(|(k, f)| (TermKey { hbar: k.hbar + s, ..*k }, f.clone())).collect(),
        }
    }

    /// Terms selected by a predicate, precision unchanged.
    pub fn filter(&self, pred: impl Fn(&TermKey) -> bool) -> Self {
        Self {
            terms: self.terms.iter().filter(|(k, _)| pred(k)).map(|(k, f)| (*k, f.clone())).collect(),
            ..self.clone()
        }
    }

    /// Homogeneous part of the given form degree.
    pub fn form_part(&self, q: u32) -> Self {
        self.filter(|k| k.form_degree() == q)
    }

    /// Splits by parity of the form degree: (even, odd).
    pub fn parity_parts(&self) -> (Self, Self) {
        (self.filter(|k| k.form_degree() % 2 == 0), self.filter(|k| k.form_degree() % 2 == 1))
    }

    /// σ: keep terms with no y and no dx.
    pub fn sigma(&self) -> Self {
        self.filter(|k| k.y.is_zero() && k.forms == 0)
    }

    /// Koszul differential δ = dx^i ∂/∂y^i.
    pub fn koszul_delta(&self) -> Self {
        let mut out = Self { terms: BTreeMap::new(), prec: self.prec.map(|p| p - 1), ..self.clone() };
        for (k, f) in &self.terms {
            for i in 0..self.dim {
                let e = k.y.0[i];
                if e == 0 {
                    continue;
                }
                if let Some((sign, mask)) = forms::left_mul(i, k.forms) {
                    let key = TermKey { forms: mask, y: k.y.dec(i), ..*k };
                    out.add_scaled_term(key, f, &GaussianRational::from_int(sign as i64 * e as i64));
                }
            }
        }
        out
    }

    /// Homotopy δ⁻¹ = y^k i(∂/∂x^k) ∫₀¹ a(ty, t dx) dt/t, termwise: a term of
    /// y-degree p and form degree q is contracted and divided by p + q.
    pub fn koszul_delta_inv(&self) -> Self {
        let mut out = Self { terms: BTreeMap::new(), prec: self.prec.map(|p| p + 1), ..self.clone() };
        for (k, f) in &self.terms {
            let p = k.y_degree();
            let q = k.form_degree() as i32;
            if q == 0 {
                continue;
            }
            let norm = GaussianRational::from_frac(1, (p + q) as i64);
            for i in forms::indices(k.forms) {
                if let Some((sign, mask)) = forms::contract(i, k.forms) {
                    let key = TermKey { forms: mask, y: k.y.inc(i), ..*k };
                    out.add_scaled_term(key, f, &norm.scale(&crate::coefficients::rat(sign as i64, 1)));
                }
            }
        }
        out
    }

    /// de Rham differential on the coefficient functions, dx^i multiplying from the left.
    pub fn de_rham(&self) -> Self {
        let mut out = Self { terms: BTreeMap::new(), ..self.clone() };
        for (k, f) in &self.terms {
            for i in 0..self.dim {
                if let Some((sign, mask)) = forms::left_mul(i, k.forms) {
                    let df = f.derive(i);
                    if df.is_zero() {
                        continue;
                    }
                    let key = TermKey { forms: mask, ..*k };
                    out.add_scaled_term(key, &df, &GaussianRational::from_int(sign as i64));
                }
            }
        }
        out
    }

    /// dx^i · self.
    pub fn left_dx(&self, i: usize) -> Self {
        let mut out = Self { terms: BTreeMap::new(), ..self.clone() };
        for (k, f) in &self.terms {
            if let Some((sign, mask)) = forms::left_mul(i, k.forms) {
                out.add_scaled_term(TermKey { forms: mask, ..*k }, f, &GaussianRational::from_int(sign as i64));
            }
        }
        out
    }

    /// Coefficient of dx^i when every term has form degree 1: self = Σ dx^i · part_i.
    pub fn one_form_component(&self, i: usize) -> Self {
        let mut out = Self { terms: BTreeMap::new(), ..self.clone() };
        for (k, f) in &self.terms {
            if k.forms == 1 << i {
                out.add_term(TermKey { forms: 0, ..*k }, f);
            }
        }
        out
    }

    /// Re-inserts every term; a canonical element is a fixed point.
    pub fn canonicalize(&self) -> Self {
        let mut out = Self { terms: BTreeMap::new(), ..self.clone() };
        for (k, f) in &self.terms {
            out.add_term(*k, f);
        }
        out
    }

    /// Embeds into a larger matrix size, placing the block at `offset`.
    pub fn embed_block(&self, matrix_size: usize, offset: usize) -> Result<Self> {
        if offset + self.matrix_size > matrix_size {
            return Err(Error::Dimension(format!(
                "block of size {} at offset {offset} does not fit in {matrix_size}",
                self.matrix_size
            )));
        }
        let mut out = Self { matrix_size, terms: BTreeMap::new(), ..self.clone() };
        for (k, f) in &self.terms {
            let key = TermKey { row: k.row + offset as u8, col: k.col + offset as u8, ..*k };
            out.terms.insert(key, f.clone());
        }
        Ok(out)
    }

    /// Entry (p, q) of the matrix part as a 1×1 element.
    pub fn matrix_entry(&self, p: usize, q: usize) -> Self {
        let mut out = Self { matrix_size: 1, terms: BTreeMap::new(), ..self.clone() };
        for (k, f) in &self.terms {
            if k.row as usize == p && k.col as usize == q {
                out.terms.insert(TermKey { row: 0, col: 0, ..*k }, f.clone());
            }
        }
        out
    }

    /// Matrix trace as a 1×1 element.
    pub fn trace(&self) -> Self {
        let mut out = Self { matrix_size: 1, terms: BTreeMap::new(), ..self.clone() };
        for (k, f) in &self.terms {
            if k.row == k.col {
                out.add_term(TermKey { row: 0, col: 0, ..*k }, f);
            }
        }
        out
    }

    /// Changes the Fourier/Poly bound of every coefficient.
    pub fn with_ring(&self, ring: ChartRing) -> Self {
        let mut out = Self { ring, terms: BTreeMap::new(), ..self.clone() };
        for (k, f) in &self.terms {
            out.add_term(*k, &f.with_ring(ring));
        }
        out
    }

    /// Deterministic one-term-per-line rendering.
    pub fn render(&self) -> String {
        let mut lines: Vec<String> = self.terms.iter().map(|(k, f)| render_term(self.dim, self.matrix_size, k, f)).collect();
        if lines.is_empty() {
            lines.push("0".into());
        }
        if let Some(p) = self.prec {
            lines.push(format!("+ O(filtration {p})"));
        }
        lines.join("\n")
    }

    pub fn to_repr(&self) -> ElementRepr {
        ElementRepr {
            dim: self.dim,
            matrix_size: self.matrix_size,
            ring: self.ring,
            precision: self.prec,
            terms: self
                .terms
                .iter()
                .map(|(k, f)| TermRepr {
                    hbar: k.hbar,
                    y: k.y.to_vec(self.dim),
                    dx: forms::indices(k.forms).map(|i| i + 1).collect(),
                    row: k.row as usize + 1,
                    col: k.col as usize + 1,
                    coeff: f.clone(),
                })
                .collect(),
        }
    }

    pub fn from_repr(r: &ElementRepr) -> Result<Self> {
        let mut e = Self::zero(r.dim, r.matrix_size, r.ring);
        e.prec = r.precision;
        for t in &r.terms {
            let idx: Vec<usize> = t.dx.iter().map(|i| i - 1).collect();
            let (sign, mask) =
                forms::from_indices(&idx).ok_or_else(|| Error::InvalidArgument("repeated dx index".into()))?;
            if t.row == 0 || t.col == 0 || t.row > r.matrix_size || t.col > r.matrix_size {
                return Err(Error::InvalidArgument(format!("matrix position ({}, {}) out of range", t.row, t.col)));
            }
            let key = TermKey::new(t.hbar, MultiIndex::from_slice(&t.y)?, mask, t.row - 1, t.col - 1);
            e.add_scaled_term(key, &t.coeff, &GaussianRational::from_int(sign as i64));
        }
        Ok(e)
    }
}

fn min_prec(a: Option<i32>, b: Option<i32>) -> Option<i32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

pub(crate) fn render_term(dim: usize, n: usize, k: &TermKey, f: &ChartFunction) -> String {
    let mut parts = vec![format!("({})", f.render())];
    if k.hbar != 0 {
        parts.push(if k.hbar == 1 { "h".into() } else { format!("h^{}", k.hbar) });
    }
    for i in 0..dim {
        match k.y.0[i] {
            0 => {}
            1 => parts.push(format!("y{}", i + 1)),
            e => parts.push(format!("y{}^{}", i + 1, e)),
        }
    }
    if k.forms != 0 {
        parts.push(forms::render(k.forms));
    }
    if n > 1 {
        parts.push(format!("E{}{}", k.row + 1, k.col + 1));
    }
    parts.join(" ")
}

impl fmt::Display for GradedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// JSON form of one term: dx and matrix indices are 1-based.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermRepr {
    pub hbar: i32,
    pub y: Vec<i64>,
    pub dx: Vec<usize>,
    pub row: usize,
    pub col: usize,
    pub coeff: ChartFunction,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ElementRepr {
    pub dim: usize,
    pub matrix_size: usize,
    pub ring: ChartRing,
    pub precision: Option<i32>,
    pub terms: Vec<TermRepr>,
}

impl GradedElement {
    /// Σ_{p,q} m_pq(x) E_pq at order ħ^hbar, with no y and no dx.
    pub fn from_function_matrix(dim: usize, ring: ChartRing, hbar: i32, m: &[Vec<ChartFunction>]) -> Self {
        let n = m.len();
        let mut e = Self::zero(dim, n, ring);
        for (p, row) in m.iter().enumerate() {
            for (q, f) in row.iter().enumerate() {
                e.add_term(TermKey::new(hbar, MultiIndex::zero(), 0, p, q), f);
            }
        }
        e
    }

    /// The y-free, dx-free coefficient matrix at order ħ^hbar.
    pub fn function_matrix(&self, hbar: i32) -> Vec<Vec<ChartFunction>> {
        let n = self.matrix_size;
        let mut m = vec![vec![ChartFunction::zero(self.ring, self.dim); n]; n];
        for (k, f) in &self.terms {
            if k.hbar == hbar && k.forms == 0 && k.y.is_zero() {
                m[k.row as usize][k.col as usize] = f.clone();
            }
        }
        m
    }

    /// Coefficient of the top form dx¹⋯dx^{2n} at order ħ^hbar (matrix entry (0, 0)).
    pub fn top_coefficient(&self, hbar: i32) -> ChartFunction {
        let top: FormMask = ((1u16 << self.dim) - 1) as FormMask;
        let key = TermKey::new(hbar, MultiIndex::zero(), top, 0, 0);
        self.terms.get(&key).cloned().unwrap_or_else(|| ChartFunction::zero(self.ring, self.dim))
    }

    /// Distinct ħ exponents present.
    pub fn hbar_exponents(&self) -> Vec<i32> {
        let mut v: Vec<i32> = self.terms.keys().map(|k| k.hbar).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}
