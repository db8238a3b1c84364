//! The Feigin–Felder–Shoikhet cocycle: Liouville tensor, simplex weights,
//! the Hochschild cocycle τ₂ₙ, its matrix/Lie extension Θᴺ₂ₙ, and the
//! trace density Ψ_D(a) = ħ⁻ⁿ Θᴺ₂ₙ(A, …, A, λ(a)).
//!
//! Form-valued arguments: with A = Σ dxⁱ Aᵢ, the 2n-fold evaluation is
//! Θ(A, …, A) = Σ_ν (−1)^ν τ⊗tr(A_ν(1), …, A_ν(2n)) dx¹⋯dx²ⁿ, i.e. the
//! (2n)! from the wedge cancels the 1/(2n)! of φᴺ.

mod cocycle;
mod liouville;
mod simplex;

pub use cocycle::{fiber_monomial, fiber_terms, hochschild_b, phi_n, FfsCocycle, FiberTerm};
pub use liouville::{liouville_eps, permutations, pfaffian, LiouvilleTensor};
pub use simplex::{pair_index, simplex_integral, SimplexCache};

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::coefficients::{ChartFunction, GaussianRational, HLaurent, MultiIndex, Rational};
use crate::error::{Error, Result};
use crate::fedosov::FedosovConnection;
use crate::weyl_forms::{GradedElement, TermKey};

/// Ψ_D(a) through ħ^order, lifting `a` with the connection's own λ.
pub fn psi(cocycle: &FfsCocycle, conn: &FedosovConnection, a: &GradedElement, order: i32) -> Result<GradedElement> {
    let n = cocycle.n() as i32;
    let va = conn.a().valuation_bound().unwrap_or(1);
    let need = 2 * order + 4 * n - 2 * n * va + 1;
    let lam = conn.lift_to(a, need)?;
    psi_with(cocycle, conn.a(), &lam, order)
}

/// Largest order for which `psi` is fully determined by the stored A.
pub fn psi_capacity(conn: &FedosovConnection, a: &GradedElement) -> Option<i32> {
    let dim = conn.geometry().dim() as i32;
    let n = dim / 2;
    let va = conn.a().valuation_bound()?;
    let vl = a.valuation_bound()?;
    let pa = conn.a().precision().unwrap_or(i32::MAX / 4);
    let pl = conn.lift_capacity(vl).min(i32::MAX / 4);
    let k1 = (pa - 1 + (2 * n - 1) * va + vl - 4 * n).div_euclid(2);
    let k2 = (pl - 1 + 2 * n * va - 4 * n).div_euclid(2);
    Some(k1.min(k2))
}

/// ħ⁻ⁿ Σ_ν (−1)^ν τ⊗tr(A_ν(1), …, A_ν(2n); λ) for an explicit one-form A and
/// flat section λ, through ħ^order. The result is a scalar top form whose
/// precision records the highest determined order.
pub fn psi_with(cocycle: &FfsCocycle, a: &GradedElement, lam: &GradedElement, order: i32) -> Result<GradedElement> {
    let dim = a.dim();
    let n = (dim / 2) as i32;
    if cocycle.dim() != dim || lam.dim() != dim || lam.matrix_size() != a.matrix_size() {
        return Err(Error::Incompatible("Ψ arguments live on different charts or bundles".into()));
    }
    if a.terms().any(|(k, _)| k.form_degree() != 1) {
        return Err(Error::InvalidArgument("A must be a one-form".into()));
    }
    if lam.terms().any(|(k, _)| k.forms != 0) {
        return Err(Error::InvalidArgument("λ(a) must be a 0-form".into()));
    }
    let top_mask = ((1u16 << dim) - 1) as u8;
    let mut out = GradedElement::zero(dim, 1, a.ring());
    let (Some(va), Some(vl)) = (a.valuation_bound(), lam.valuation_bound()) else {
        out.set_precision(Some(2 * order + 2));
        return Ok(out);
    };
    let budget = 2 * order + 4 * n;
    let fa_max = budget - (2 * n - 1) * va - vl;
    let fl_max = budget - 2 * n * va;
    if a.precision().map_or(false, |p| p <= fa_max) {
        return Err(Error::Truncation(format!(
            "Ψ through ħ^{order} needs A below filtration {}, have {}",
            fa_max + 1,
            a.precision().unwrap_or_default()
        )));
    }
    if lam.precision().map_or(false, |p| p <= fl_max) {
        return Err(Error::Truncation(format!(
            "Ψ through ħ^{order} needs λ(a) below filtration {}, have {}",
            fl_max + 1,
            lam.precision().unwrap_or_default()
        )));
    }
    let comps: Vec<Vec<(TermKey, ChartFunction)>> = (0..dim)
        .map(|i| {
            a.one_form_component(i)
                .terms()
                .filter(|(k, _)| k.filtration() <= fa_max)
                .map(|(k, f)| (*k, f.clone()))
                .collect()
        })
        .collect();
    let lterms: Vec<(TermKey, ChartFunction)> =
        lam.terms().filter(|(k, _)| k.filtration() <= fl_max).map(|(k, f)| (*k, f.clone())).collect();
    let perms = permutations(dim);
    let mut acc: BTreeMap<i32, ChartFunction> = BTreeMap::new();
    let mut pick: Vec<usize> = Vec::with_capacity(dim);
    let ctx = PsiCtx { cocycle, comps: &comps, lterms: &lterms, perms: &perms, budget, va, vl, n };
    let one = ChartFunction::one(a.ring(), dim);
    ctx.walk(&mut pick, 0, &one, &mut acc);
    for (h, f) in acc {
        if h <= order {
            out.add_term(TermKey::new(h, MultiIndex::zero(), top_mask, 0, 0), &f);
        }
    }
    out.set_precision(Some(2 * order + 2));
    Ok(out)
}

struct PsiCtx<'a> {
    cocycle: &'a FfsCocycle,
    comps: &'a [Vec<(TermKey, ChartFunction)>],
    lterms: &'a [(TermKey, ChartFunction)],
    perms: &'a [(Vec<usize>, i32)],
    budget: i32,
    va: i32,
    vl: i32,
    n: i32,
}

impl PsiCtx<'_> {
    /// Chooses one term from each Aᵢ (in dx order), then each λ term, and adds
    /// the fully antisymmetrized τ⊗tr value times the coefficient product.
    fn walk(&self, pick: &mut Vec<usize>, used: i32, prod: &ChartFunction, acc: &mut BTreeMap<i32, ChartFunction>) {
        let dim = self.comps.len();
        let slot = pick.len();
        if slot == dim {
            self.finish(pick, used, prod, acc);
            return;
        }
        let rest = (dim - slot - 1) as i32 * self.va + self.vl;
        for (t, (k, f)) in self.comps[slot].iter().enumerate() {
            if used + k.filtration() + rest > self.budget {
                continue;
            }
            pick.push(t);
            let p = prod.mul(f);
            if !p.is_zero() {
                self.walk(pick, used + k.filtration(), &p, acc);
            }
            pick.pop();
        }
    }

    fn finish(&self, pick: &[usize], used: i32, prod: &ChartFunction, acc: &mut BTreeMap<i32, ChartFunction>) {
        let keys: Vec<&TermKey> = pick.iter().enumerate().map(|(i, &t)| &self.comps[i][t].0).collect();
        for (k0, f0) in self.lterms {
            if used + k0.filtration() > self.budget {
                continue;
            }
            let mut by_order: BTreeMap<i32, Rational> = BTreeMap::new();
            for (nu, sign) in self.perms {
                // tr(E_λ E_ν(1) ⋯ E_ν(2n))
                let mut c = k0.col;
                let mut ok = true;
                for &i in nu {
                    if keys[i].row != c {
                        ok = false;
                        break;
                    }
                    c = keys[i].col;
                }
                if !ok || c != k0.row {
                    continue;
                }
                let ys: Vec<MultiIndex> = nu.iter().map(|&i| keys[i].y).collect();
                if let Some((h, v)) = self.cocycle.tau_monomial(&ys, &k0.y) {
                    let hh: i32 = h + k0.hbar + keys.iter().map(|k| k.hbar).sum::<i32>() - self.n;
                    let e = by_order.entry(hh).or_insert_with(Rational::zero);
                    if *sign > 0 {
                        *e += v;
                    } else {
                        *e -= v;
                    }
                }
            }
            for (h, v) in by_order {
                if v.is_zero() {
                    continue;
                }
                let term = prod.mul(f0).scale(&GaussianRational::real(v));
                match acc.get_mut(&h) {
                    Some(old) => old.add_assign(&term),
                    None => {
                        acc.insert(h, term);
                    }
                }
            }
        }
    }
}

/// Torus average of the top-form coefficient, order by order.
pub fn average(form: &GradedElement) -> Result<HLaurent> {
    let dim = form.dim();
    let top = ((1u16 << dim) - 1) as u8;
    let mut terms = Vec::new();
    for (k, f) in form.terms() {
        if k.forms != top || !k.y.is_zero() || k.row != k.col {
            return Err(Error::InvalidArgument("average expects a scalar top form".into()));
        }
        terms.push((k.hbar, f.ring_average()?));
    }
    let k_max = form.precision().map(|p| (p - 1).div_euclid(2));
    let k_min = terms.iter().map(|t| t.0).min().unwrap_or(k_max.unwrap_or(0)).min(k_max.unwrap_or(i32::MAX));
    Ok(HLaurent::from_terms(k_min, k_max, terms.into_iter().filter(|t| !t.1.is_zero())))
}
