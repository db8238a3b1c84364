use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_traits::{One, Zero};

use super::liouville::{liouville_eps, permutations, LiouvilleTensor};
use super::simplex::{pair_index, SimplexCache};
use crate::coefficients::{GaussianRational, HLaurent, MultiIndex, Rational, MAX_DIM};
use crate::error::{Error, Result};
use crate::weyl_forms::{GradedElement, SymplecticFrame, TermKey, WeylAlgebra};

/// One term c·ħ^k·y^α·E_{row,col} of a fiber Weyl element.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberTerm {
    pub hbar: i32,
    pub y: MultiIndex,
    pub row: usize,
    pub col: usize,
    pub c: GaussianRational,
}

/// Terms of a fiber element: constant coefficients, no dx. Exact input only.
pub fn fiber_terms(e: &GradedElement) -> Result<Vec<FiberTerm>> {
    let mut out = Vec::with_capacity(e.len());
    for (k, f) in e.terms() {
        if k.forms != 0 {
            return Err(Error::InvalidArgument("fiber element carries dx".into()));
        }
        let c = f.as_constant().ok_or_else(|| Error::InvalidArgument("fiber element must be constant in x".into()))?;
        out.push(FiberTerm { hbar: k.hbar, y: k.y, row: k.row as usize, col: k.col as usize, c });
    }
    Ok(out)
}

type MonoKey = (Vec<MultiIndex>, MultiIndex);

/// The cocycle τ₂ₙ for a fixed symplectic form B, with memoized monomial values.
#[derive(Clone, Debug)]
pub struct FfsCocycle {
    dim: usize,
    b: Vec<Vec<Rational>>,
    eps: LiouvilleTensor,
    simplex: SimplexCache,
    memo: Arc<RwLock<HashMap<MonoKey, Option<(i32, Rational)>>>>,
}

impl FfsCocycle {
    /// τ for the Poisson tensor B = ω^{ij} of `frame`, the B of the fiber product.
    pub fn new(frame: &SymplecticFrame) -> Result<Self> {
        Self::from_b(frame.upper_matrix().to_vec())
    }

    pub fn from_b(b: Vec<Vec<Rational>>) -> Result<Self> {
        let eps = liouville_eps(&b)?;
        Ok(Self::with_eps(b, eps))
    }

    /// Uses a caller-supplied ε (for mutation tests).
    pub fn with_eps(b: Vec<Vec<Rational>>, eps: LiouvilleTensor) -> Self {
        Self { dim: b.len(), b, eps, simplex: SimplexCache::new(), memo: Arc::new(RwLock::new(HashMap::new())) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.dim / 2
    }

    pub fn eps(&self) -> &LiouvilleTensor {
        &self.eps
    }

    pub fn b(&self) -> &[Vec<Rational>] {
        &self.b
    }

    pub fn simplex_cache(&self) -> &SimplexCache {
        &self.simplex
    }

    /// τ₂ₙ(y^{α₁}⊗…⊗y^{α₂ₙ})(y^{α₀}) = c·ħ^k, or `None` when it vanishes.
    pub fn tau_monomial(&self, args: &[MultiIndex], a0: &MultiIndex) -> Option<(i32, Rational)> {
        debug_assert_eq!(args.len(), self.dim);
        let key = (args.to_vec(), *a0);
        if let Some(v) = self.memo.read().expect("tau memo poisoned").get(&key) {
            return v.clone();
        }
        let v = self.tau_monomial_uncached(args, a0);
        self.memo.write().expect("tau memo poisoned").insert(key, v.clone());
        v
    }

    fn tau_monomial_uncached(&self, args: &[MultiIndex], a0: &MultiIndex) -> Option<(i32, Rational)> {
        let m = self.dim;
        let total: i32 = args.iter().map(|a| a.total()).sum::<i32>() + a0.total() - m as i32;
        if total < 0 || total % 2 != 0 {
            return None;
        }
        let mut sum = Rational::zero();
        for (idx, e) in self.eps.nonzero() {
            // π₂ₙ: slot b is differentiated by ∂_{i_b}
            let mut slots = Vec::with_capacity(m + 1);
            slots.push(*a0);
            let mut coef = e.clone();
            let mut ok = true;
            for (a, &i) in args.iter().zip(idx) {
                let p = a.0[i as usize];
                if p == 0 {
                    ok = false;
                    break;
                }
                coef *= Rational::from_integer((p as i64).into());
                slots.push(a.dec(i as usize));
            }
            if !ok {
                continue;
            }
            let mut by_counts: HashMap<Vec<u32>, Rational> = HashMap::new();
            let mut counts = vec![0u32; m * (m + 1) / 2];
            self.matchings(&mut slots, &mut counts, Rational::one(), &mut by_counts);
            for (cnt, w) in by_counts {
                let k: u32 = cnt.iter().sum();
                let half = Rational::new(1.into(), num_bigint::BigInt::from(2u32).pow(k));
                sum += &coef * w * half * self.simplex.weight(m, &cnt);
            }
        }
        if sum.is_zero() {
            None
        } else {
            Some((total / 2, sum))
        }
    }

    /// Sums Π B-weights over perfect matchings of the y-atoms across distinct
    /// slots, grouped by the number of contractions of every slot pair.
    fn matchings(&self, slots: &mut [MultiIndex], counts: &mut [u32], w: Rational, out: &mut HashMap<Vec<u32>, Rational>) {
        let m = self.dim;
        let Some(b) = slots.iter().position(|s| !s.is_zero()) else {
            let e = out.entry(counts.to_vec()).or_insert_with(Rational::zero);
            *e += w;
            return;
        };
        let i = (0..MAX_DIM).find(|&i| slots[b].0[i] > 0).expect("nonzero slot");
        slots[b].0[i] -= 1;
        for c in 0..slots.len() {
            if c == b {
                continue;
            }
            for j in 0..self.dim {
                let r = slots[c].0[j];
                if r == 0 {
                    continue;
                }
                let bw = if b < c { &self.b[i][j] } else { &self.b[j][i] };
                if bw.is_zero() {
                    continue;
                }
                let pi = if b < c { pair_index(m, b, c) } else { pair_index(m, c, b) };
                slots[c].0[j] -= 1;
                counts[pi] += 1;
                let nw = &w * bw * Rational::from_integer((r as i64).into());
                self.matchings(slots, counts, nw, out);
                counts[pi] -= 1;
                slots[c].0[j] += 1;
            }
        }
        slots[b].0[i] += 1;
    }

    /// τ₂ₙ on scalar fiber elements, as an exact Laurent polynomial in ħ.
    pub fn tau(&self, args: &[GradedElement], a0: &GradedElement) -> Result<HLaurent> {
        if args.len() != self.dim {
            return Err(Error::InvalidArgument(format!("τ takes {} arguments, got {}", self.dim, args.len())));
        }
        let mut terms: Vec<Vec<FiberTerm>> = Vec::with_capacity(self.dim);
        for a in args.iter() {
            if a.matrix_size() != 1 {
                return Err(Error::InvalidArgument("τ is scalar; use theta for matrices".into()));
            }
            terms.push(fiber_terms(a)?);
        }
        let t0 = fiber_terms(a0)?;
        let cochain = |ys: &[&FiberTerm], z: &FiberTerm| self.term_value(ys, z);
        Ok(sum_over_terms(&terms, &t0, &|ys, z| cochain(ys, z).map(|(k, c)| (k, c))))
    }

    fn term_value(&self, ys: &[&FiberTerm], z: &FiberTerm) -> Option<(i32, GaussianRational)> {
        let mono: Vec<MultiIndex> = ys.iter().map(|t| t.y).collect();
        let (k, v) = self.tau_monomial(&mono, &z.y)?;
        let mut c = z.c.scale(&v);
        let mut h = k + z.hbar;
        for t in ys {
            c = &c * &t.c;
            h += t.hbar;
        }
        Some((h, c))
    }

    /// Θᴺ₂ₙ = φᴺ(τ₂ₙ) on matrix-valued fiber elements.
    pub fn theta(&self, args: &[GradedElement], m0: &GradedElement) -> Result<HLaurent> {
        phi_n(self.dim, args, m0, &|ys: &[&FiberTerm], z: &FiberTerm| self.term_value(ys, z))
    }
}

/// Multilinear expansion of a scalar cochain over term lists.
fn sum_over_terms(
    terms: &[Vec<FiberTerm>],
    t0: &[FiberTerm],
    f: &dyn Fn(&[&FiberTerm], &FiberTerm) -> Option<(i32, GaussianRational)>,
) -> HLaurent {
    let mut acc: Vec<(i32, GaussianRational)> = Vec::new();
    let mut pick: Vec<&FiberTerm> = Vec::with_capacity(terms.len());
    fn rec<'a>(
        terms: &'a [Vec<FiberTerm>],
        t0: &[FiberTerm],
        pick: &mut Vec<&'a FiberTerm>,
        f: &dyn Fn(&[&FiberTerm], &FiberTerm) -> Option<(i32, GaussianRational)>,
        acc: &mut Vec<(i32, GaussianRational)>,
    ) {
        if pick.len() == terms.len() {
            for z in t0 {
                if let Some(v) = f(pick, z) {
                    acc.push(v);
                }
            }
            return;
        }
        for t in &terms[pick.len()] {
            pick.push(t);
            rec(terms, t0, pick, f, acc);
            pick.pop();
        }
    }
    rec(terms, t0, &mut pick, f, &mut acc);
    laurent(acc)
}

fn laurent(acc: Vec<(i32, GaussianRational)>) -> HLaurent {
    let k_min = acc.iter().map(|x| x.0).min().unwrap_or(0);
    HLaurent::from_terms(k_min, None, acc)
}

/// φᴺ(ψ)(M₁⊗a₁,…)(M₀⊗a₀) = (1/k!) Σ_ν (−1)^ν ψ(a_ν(1)⊗…)(a₀) tr(M₀M_ν(1)⋯),
/// with ψ given on single terms and extended multilinearly.
pub fn phi_n(
    arity: usize,
    args: &[GradedElement],
    m0: &GradedElement,
    psi: &dyn Fn(&[&FiberTerm], &FiberTerm) -> Option<(i32, GaussianRational)>,
) -> Result<HLaurent> {
    if args.len() != arity {
        return Err(Error::InvalidArgument(format!("cochain of arity {arity} given {} arguments", args.len())));
    }
    let n = m0.matrix_size();
    if args.iter().any(|a| a.matrix_size() != n) {
        return Err(Error::Incompatible("matrix sizes differ".into()));
    }
    let terms: Vec<Vec<FiberTerm>> = args.iter().map(fiber_terms).collect::<Result<_>>()?;
    let t0 = fiber_terms(m0)?;
    let perms = permutations(arity);
    let mut acc: Vec<(i32, GaussianRational)> = Vec::new();
    let mut fact = Rational::one();
    for k in 2..=arity {
        fact *= Rational::from_integer((k as i64).into());
    }
    let inv_fact = Rational::one() / fact;
    for (nu, sign) in &perms {
        let permuted: Vec<Vec<FiberTerm>> = nu.iter().map(|&i| terms[i].clone()).collect();
        let traced = |ys: &[&FiberTerm], z: &FiberTerm| {
            // tr(E_{z} E_{y1} ⋯ E_{yk}) = 1 iff the indices chain back to z.row
            let mut c = z.col;
            for t in ys {
                if t.row != c {
                    return None;
                }
                c = t.col;
            }
            if c != z.row {
                return None;
            }
            psi(ys, z).map(|(h, v)| (h, v.scale(&(Rational::from_integer((*sign).into()) * &inv_fact))))
        };
        let part = sum_over_terms(&permuted, &t0, &traced);
        acc.extend(part.terms().map(|(k, c)| (k, c.clone())));
    }
    Ok(laurent(acc))
}

/// (bψ)(a₁⊗…⊗a_{k+1})(a₀) for a cochain ψ with values in the dual module:
/// ψ(a₂,…)(a₀∘a₁) + Σᵢ (−1)ⁱ ψ(…, aᵢ∘aᵢ₊₁, …)(a₀) + (−1)^{k+1} ψ(a₁,…,a_k)(a_{k+1}∘a₀).
pub fn hochschild_b(
    alg: &WeylAlgebra,
    psi: &dyn Fn(&[GradedElement], &GradedElement) -> Result<HLaurent>,
    args: &[GradedElement],
    a0: &GradedElement,
) -> Result<HLaurent> {
    let k = args.len().checked_sub(1).ok_or_else(|| Error::InvalidArgument("b needs at least one argument".into()))?;
    let mut total = psi(&args[1..], &alg.moyal(a0, &args[0]))?;
    for i in 1..=k {
        let mut v: Vec<GradedElement> = Vec::with_capacity(k);
        v.extend_from_slice(&args[..i - 1]);
        v.push(alg.moyal(&args[i - 1], &args[i]));
        v.extend_from_slice(&args[i + 1..]);
        let t = psi(&v, a0)?;
        total = if i % 2 == 0 { total.add(&t) } else { total.sub(&t) };
    }
    let last = psi(&args[..k], &alg.moyal(&args[k], a0))?;
    total = if (k + 1) % 2 == 0 { total.add(&last) } else { total.sub(&last) };
    Ok(total)
}

/// A pure fiber monomial c·ħ^k·y^α·E_{row,col}.
pub fn fiber_monomial(dim: usize, matrix_size: usize, hbar: i32, y: MultiIndex, row: usize, col: usize, c: GaussianRational) -> GradedElement {
    let ring = crate::coefficients::ChartRing::Poly { max_degree: 0 };
    let f = crate::coefficients::ChartFunction::constant(ring, dim, c);
    GradedElement::monomial(dim, matrix_size, TermKey::new(hbar, y, 0, row, col), &f)
}
