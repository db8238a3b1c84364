use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_traits::{One, Zero};

use super::element::{GradedElement, TermKey};
use super::forms::{self, FormMask};
use super::frame::SymplecticFrame;
use crate::coefficients::{ChartFunction, GaussianRational, MultiIndex, Rational};
use crate::error::Result;

/// One summand of y^α ∘ y^β: coefficient · ħ^k · y^γ.
#[derive(Clone, Debug)]
struct MoyalEntry {
    k: i32,
    y: MultiIndex,
    c: GaussianRational,
}

type Table = HashMap<(MultiIndex, MultiIndex), Arc<Vec<MoyalEntry>>>;

/// Fiberwise Moyal product on Ω•(W(End V)) for a constant Poisson tensor.
///
/// Products of y-monomials are memoized; the table is shared between clones.
#[derive(Clone, Debug)]
pub struct WeylAlgebra {
    frame: SymplecticFrame,
    support: Vec<(usize, usize)>,
    table: Arc<RwLock<Table>>,
}

impl WeylAlgebra {
    pub fn new(frame: SymplecticFrame) -> Self {
        let support = frame.poisson_support();
        Self { frame, support, table: Arc::new(RwLock::new(HashMap::new())) }
    }

    pub fn frame(&self) -> &SymplecticFrame {
        &self.frame
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    fn entries(&self, a: &MultiIndex, b: &MultiIndex) -> Arc<Vec<MoyalEntry>> {
        if let Some(e) = self.table.read().expect("moyal table poisoned").get(&(*a, *b)) {
            return e.clone();
        }
        let v = Arc::new(self.expand(a, b));
        self.table.write().expect("moyal table poisoned").insert((*a, *b), v.clone());
        v
    }

    /// exp((ħ/2) ω^{ij} ∂_{yⁱ}⊗∂_{zʲ}) y^α z^β |_{z=y}, as a sum over transfer
    /// matrices t_ij (number of times the pair (i, j) is contracted).
    fn expand(&self, a: &MultiIndex, b: &MultiIndex) -> Vec<MoyalEntry> {
        let mut out: HashMap<(i32, MultiIndex), Rational> = HashMap::new();
        let mut ra = *a;
        let mut rb = *b;
        let mut stack: Vec<u32> = Vec::new();
        self.enumerate(0, &mut ra, &mut rb, &mut stack, a, b, &mut out);
        let mut v: Vec<MoyalEntry> = out
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((k, y), c)| MoyalEntry { k, y, c: GaussianRational::real(c) })
            .collect();
        v.sort_by(|x, y| (x.k, x.y).cmp(&(y.k, y.y)));
        v
    }

    #[allow(clippy::too_many_arguments)]
    fn enumerate(
        &self,
        idx: usize,
        ra: &mut MultiIndex,
        rb: &mut MultiIndex,
        counts: &mut Vec<u32>,
        a: &MultiIndex,
        b: &MultiIndex,
        out: &mut HashMap<(i32, MultiIndex), Rational>,
    ) {
        if idx == self.support.len() {
            let k: u32 = counts.iter().sum();
            let mut c = Rational::one();
            for (t, &(i, j)) in counts.iter().zip(&self.support) {
                if *t > 0 {
                    c *= pow(self.frame.upper(i, j), *t) / factorial(*t);
                }
            }
            c *= Rational::new(1.into(), num_bigint::BigInt::from(2u32).pow(k));
            for axis in 0..MultiIndexExt::LEN {
                c *= falling(a.0[axis] as u32, (a.0[axis] - ra.0[axis]) as u32);
                c *= falling(b.0[axis] as u32, (b.0[axis] - rb.0[axis]) as u32);
            }
            let y = ra.add(rb);
            let e = out.entry((k as i32, y)).or_insert_with(Rational::zero);
            *e += c;
            return;
        }
        let (i, j) = self.support[idx];
        let mut t = 0u32;
        loop {
            counts.push(t);
            self.enumerate(idx + 1, ra, rb, counts, a, b, out);
            counts.pop();
            if ra.0[i] == 0 || rb.0[j] == 0 {
                break;
            }
            ra.0[i] -= 1;
            rb.0[j] -= 1;
            t += 1;
        }
        ra.0[i] += t as i16;
        rb.0[j] += t as i16;
    }

    /// a ∘ b.
    pub fn moyal(&self, a: &GradedElement, b: &GradedElement) -> GradedElement {
        self.product(a, b, None, |_, _| 1)
    }

    pub fn try_moyal(&self, a: &GradedElement, b: &GradedElement) -> Result<GradedElement> {
        a.check_compatible(b)?;
        Ok(self.moyal(a, b))
    }

    /// a ∘ b keeping only filtration < `cap`.
    pub fn moyal_capped(&self, a: &GradedElement, b: &GradedElement, cap: i32) -> GradedElement {
        self.product(a, b, Some(cap), |_, _| 1)
    }

    /// Graded commutator a∘b − (−1)^{q_a q_b} b∘a, term by term in form degree.
    pub fn gcomm(&self, a: &GradedElement, b: &GradedElement) -> GradedElement {
        self.gcomm_capped(a, b, None)
    }

    pub fn try_gcomm(&self, a: &GradedElement, b: &GradedElement) -> Result<GradedElement> {
        a.check_compatible(b)?;
        Ok(self.gcomm(a, b))
    }

    pub fn gcomm_capped(&self, a: &GradedElement, b: &GradedElement, cap: Option<i32>) -> GradedElement {
        let ab = self.product(a, b, cap, |_, _| 1);
        let ba = self.product(b, a, cap, |l, r| if forms::degree(l) * forms::degree(r) % 2 == 1 { -1 } else { 1 });
        ab.sub(&ba)
    }

    /// (1/ħ)[a, b].
    pub fn hcomm(&self, a: &GradedElement, b: &GradedElement) -> GradedElement {
        self.gcomm(a, b).shift_hbar(-1)
    }

    /// (1/ħ)[a, b] keeping filtration < `cap` of the result.
    pub fn hcomm_capped(&self, a: &GradedElement, b: &GradedElement, cap: i32) -> GradedElement {
        self.gcomm_capped(a, b, Some(cap + 2)).shift_hbar(-1)
    }

    /// Bilinear expansion with an extra sign depending on the (left, right) form masks.
    pub(crate) fn product(
        &self,
        a: &GradedElement,
        b: &GradedElement,
        cap: Option<i32>,
        sign: impl Fn(FormMask, FormMask) -> i32,
    ) -> GradedElement {
        debug_assert!(a.check_compatible(b).is_ok(), "incompatible operands");
        let mut out = GradedElement::zero(a.dim(), a.matrix_size(), a.ring());
        let (va, vb) = match (a.valuation_bound(), b.valuation_bound()) {
            (Some(x), Some(y)) => (x, y),
            // an exact zero factor
            _ => return out,
        };
        let mut prec = min_opt(a.precision().map(|p| p + vb), b.precision().map(|p| p + va));
        prec = min_opt(prec, cap);
        out.set_precision(prec);
        let mut acc: HashMap<TermKey, ChartFunction> = HashMap::new();
        for (ka, fa) in a.terms() {
            let fila = ka.filtration();
            for (kb, fb) in b.terms() {
                if ka.col != kb.row {
                    continue;
                }
                if let Some(p) = prec {
                    if fila + kb.filtration() >= p {
                        continue;
                    }
                }
                let Some((s, mask)) = forms::wedge(ka.forms, kb.forms) else { continue };
                let s = s * sign(ka.forms, kb.forms);
                let entries = self.entries(&ka.y, &kb.y);
                if entries.is_empty() {
                    continue;
                }
                let f = fa.mul(fb);
                if f.is_zero() {
                    continue;
                }
                for e in entries.iter() {
                    let key = TermKey { forms: mask, hbar: ka.hbar + kb.hbar + e.k, y: e.y, row: ka.row, col: kb.col };
                    let c = if s < 0 { -e.c.clone() } else { e.c.clone() };
                    let term = f.scale(&c);
                    match acc.get_mut(&key) {
                        Some(old) => old.add_assign(&term),
                        None => {
                            acc.insert(key, term);
                        }
                    }
                }
            }
        }
        let mut keys: Vec<_> = acc.into_iter().collect();
        keys.sort_by(|x, y| x.0.cmp(&y.0));
        for (k, f) in keys {
            out.add_term(k, &f);
        }
        out
    }

    /// Σ_{i,j} ω_ij dxⁱdxʲ · I_N.
    pub fn omega_form(&self, like: &GradedElement) -> GradedElement {
        let mut out = like.zero_like();
        let dim = self.dim();
        for i in 0..dim {
            for j in (i + 1)..dim {
                let c = self.frame.lower(i, j) * Rational::from_integer(2.into());
                if c.is_zero() {
                    continue;
                }
                let f = ChartFunction::constant(like.ring(), dim, GaussianRational::real(c));
                for p in 0..like.matrix_size() {
                    out.add_term(TermKey::new(0, MultiIndex::zero(), (1 << i) | (1 << j), p, p), &f);
                }
            }
        }
        out
    }

    /// dxⁱ ω_ij yʲ · I_N, the generator of δ = (1/ħ)[·, ·].
    pub fn koszul_generator(&self, like: &GradedElement) -> GradedElement {
        let mut out = like.zero_like();
        let dim = self.dim();
        for i in 0..dim {
            for j in 0..dim {
                let c = self.frame.lower(i, j);
                if c.is_zero() {
                    continue;
                }
                let f = ChartFunction::constant(like.ring(), dim, GaussianRational::real(c.clone()));
                for p in 0..like.matrix_size() {
                    out.add_term(TermKey::new(0, MultiIndex::unit(j), 1 << i, p, p), &f);
                }
            }
        }
        out
    }

    /// Number of memoized monomial products.
    pub fn table_len(&self) -> usize {
        self.table.read().expect("moyal table poisoned").len()
    }
}

struct MultiIndexExt;
impl MultiIndexExt {
    const LEN: usize = crate::coefficients::MAX_DIM;
}

fn min_opt(a: Option<i32>, b: Option<i32>) -> Option<i32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn pow(r: &Rational, e: u32) -> Rational {
    let mut out = Rational::one();
    for _ in 0..e {
        out *= r;
    }
    out
}

pub(crate) fn factorial(n: u32) -> Rational {
    let mut out = Rational::one();
    for k in 2..=n {
        out *= Rational::from_integer(k.into());
    }
    out
}

/// n (n−1) ⋯ (n−k+1).
fn falling(n: u32, k: u32) -> Rational {
    let mut out = Rational::one();
    for j in 0..k {
        out *= Rational::from_integer((n - j).into());
    }
    out
}
