//! Chern–Weil side of the index theorem: the 𝔥-equivariant projection pr,
//! its curvature C, the invariant form Q (Â factor times Chern factor), and
//! the right-hand side [Â · exp((ω − Ω_ħ)/ħ) · ch]₂ₙ.
//!
//! The fiber bracket is the rescaled one, (1/ħ)[·, ·], so that quadratic
//! scalars close into 𝔰𝔭₂ₙ. With it, C(A, A) = ħR + ħR^E + ω − Ω_ħ and
//! Ψ_D(I) agrees with Q_n(C(A, A)) without an extra ħ⁻ⁿ.

mod series;

pub use series::{ahat_scalar, log_ahat_kernel, sinhc, PowerSeries};

use crate::coefficients::{ChartFunction, GaussianRational, MultiIndex, Rational};
use crate::error::{Error, Result};
use crate::fedosov::{curvature_term, ChartGeometry};
use crate::weyl_forms::{forms, GradedElement, TermKey, WeylAlgebra};

/// pr(v) = v|_{y=0} + (1/N) σ₂(tr v) I_N, applied coefficientwise in dx and ħ.
pub fn pr(v: &GradedElement) -> GradedElement {
    let n = v.matrix_size();
    let mut out = v.filter(|k| k.y.is_zero());
    let inv_n = GaussianRational::from_frac(1, n as i64);
    let quad = v.trace().filter(|k| k.y.total() == 2).scale(&inv_n);
    for p in 0..n {
        out.add_assign(&quad.embed_block(n, p).expect("scalar block fits"));
    }
    out
}

/// C(v, w) = (1/ħ)[pr v, pr w] − pr((1/ħ)[v, w]) with graded brackets, so
/// that C(A, A) = Σ dxⁱdxʲ C(Aᵢ, Aⱼ) for a one-form A.
pub fn curvature_c(alg: &WeylAlgebra, v: &GradedElement, w: &GradedElement) -> GradedElement {
    alg.hcomm(&pr(v), &pr(w)).sub(&pr(&alg.hcomm(v, w)))
}

/// The 𝔰𝔭 part of an 𝔥-valued form as the matrix M with (1/ħ)[X₁, yᵖ] = M^p_l yˡ,
/// stored as a y-free element with matrix size 2n.
pub fn sp_matrix(alg: &WeylAlgebra, x: &GradedElement) -> GradedElement {
    let dim = x.dim();
    let n = x.matrix_size();
    let x1 = x.trace().filter(|k| k.y.total() == 2).scale(&GaussianRational::from_frac(1, n as i64));
    let mut m = GradedElement::zero(dim, dim, x.ring());
    m.set_precision(x1.precision());
    for p in 0..dim {
        let yp = GradedElement::y(dim, 1, x.ring(), p);
        for (k, f) in alg.hcomm(&x1, &yp).terms() {
            let l = (0..dim).find(|&l| k.y == MultiIndex::unit(l)).expect("linear result");
            m.add_term(TermKey::new(k.hbar, MultiIndex::zero(), k.forms, p, l), f);
        }
    }
    m
}

/// det((M/2)/sinh(M/2))^{1/2} = exp(½ Σₖ cₖ tr M^{2k}) for a matrix of
/// commuting two-forms, truncated at form degree `max_form_degree`.
pub fn ahat_form(alg: &WeylAlgebra, m: &GradedElement, max_form_degree: u32) -> Result<GradedElement> {
    let dim = m.dim();
    let kmax = (max_form_degree / 4) as usize;
    let kernel = log_ahat_kernel(4 * kmax + 1)?;
    let one = GradedElement::one(dim, 1, m.ring());
    let mut log = GradedElement::zero(dim, 1, m.ring());
    let m2 = alg.moyal(m, m);
    let mut pow = m2.clone();
    for k in 1..=kmax {
        let c = GaussianRational::real(&kernel.0[2 * k] / Rational::from_integer(2.into()));
        log.add_assign(&pow.trace().scale(&c));
        pow = alg.moyal(&pow, &m2);
    }
    Ok(exp_forms(alg, &log, &one, max_form_degree))
}

/// exp(x) for a nilpotent even form x with no constant part, cut at `max_form_degree`.
pub fn exp_forms(alg: &WeylAlgebra, x: &GradedElement, one: &GradedElement, max_form_degree: u32) -> GradedElement {
    let cut = |e: &GradedElement| e.filter(|k| k.form_degree() <= max_form_degree);
    let mut out = one.clone();
    let mut term = one.clone();
    for k in 1..=max_form_degree.max(1) {
        term = cut(&alg.moyal(&term, x)).scale(&GaussianRational::from_frac(1, k as i64));
        if term.is_zero() {
            break;
        }
        out.add_assign(&term);
    }
    out
}

/// Q_n(X, …, X): the 2n-form part of det((M/2)/sinh(M/2))^{1/2}·tr exp(X₂/ħ)
/// for an 𝔥-valued two-form X with 𝔰𝔭 matrix M and 𝔤𝔩 part X₂ = X|_{y=0}.
pub fn q_n(alg: &WeylAlgebra, x: &GradedElement) -> Result<GradedElement> {
    let dim = x.dim();
    let top = dim as u32;
    let ahat = ahat_form(alg, &sp_matrix(alg, x), top)?;
    let x2 = x.filter(|k| k.y.is_zero()).shift_hbar(-1);
    let one = GradedElement::one(dim, x.matrix_size(), x.ring());
    let ch = exp_forms(alg, &x2, &one, top).trace();
    Ok(alg.moyal(&ahat, &ch).form_part(top))
}

/// χ(Q)(A, …, A) = Q(C(A, A), …, C(A, A)) for the one-form A.
pub fn chi_q_on_connection(alg: &WeylAlgebra, a: &GradedElement) -> Result<GradedElement> {
    q_n(alg, &curvature_c(alg, a, a))
}

/// Σ_ν (−1)^ν Q(C(v_ν(1), v_ν(2)), …)/(2j)! for 2j fiber arguments and a
/// j-linear symmetric Q given on 𝔥 elements.
pub fn chi_q(
    alg: &WeylAlgebra,
    q: &dyn Fn(&[GradedElement]) -> Result<GaussianRational>,
    args: &[GradedElement],
) -> Result<GaussianRational> {
    if args.len() % 2 != 0 {
        return Err(Error::InvalidArgument("χ(Q) takes an even number of arguments".into()));
    }
    let perms = crate::ffs::permutations(args.len());
    let mut sum = GaussianRational::zero();
    for (nu, s) in &perms {
        let cs: Vec<GradedElement> =
            nu.chunks(2).map(|p| curvature_c(alg, &args[p[0]], &args[p[1]])).collect();
        let v = q(&cs)?;
        sum = if *s > 0 { &sum + &v } else { &sum - &v };
    }
    Ok(sum.scale(&(Rational::from_integer(1.into()) / crate::weyl_forms::factorial(args.len() as u32))))
}

/// tr_{Im q} exp(s·q dq dq), the Chern character of the image bundle with the
/// Grassmann curvature scaled by `scale`; `scale = 1` is the usual form.
pub fn chern_character(alg: &WeylAlgebra, q: &[Vec<ChartFunction>], scale: &Rational) -> Result<GradedElement> {
    let n = q.len();
    let dim = alg.dim();
    let ring = q.first().and_then(|r| r.first()).map(|f| f.ring()).ok_or_else(|| Error::InvalidArgument("empty q".into()))?;
    let qe = GradedElement::from_function_matrix(dim, ring, 0, q);
    if alg.moyal(&qe, &qe) != qe {
        return Err(Error::InvalidArgument("q is not idempotent".into()));
    }
    let dq = qe.de_rham();
    let r = alg.moyal(&alg.moyal(&qe, &dq), &dq).scale(&GaussianRational::real(scale.clone()));
    let one = GradedElement::one(dim, n, ring);
    let e = exp_forms(alg, &r, &one, dim as u32);
    Ok(alg.moyal(&qe, &e).trace())
}

/// The scalar symplectic curvature matrix of `geom` (from ħR in K = ħ(R + R^V)).
pub fn riemann_matrix(geom: &ChartGeometry, alg: &WeylAlgebra) -> GradedElement {
    sp_matrix(alg, &curvature_term(geom, alg))
}

/// [Â(M) · exp((ω − Ω_ħ)/ħ) · ch(q)]₂ₙ with the bundle curvature scaled by
/// `ch_scale` (2 in the normalization where ∇² = (1/2ħ)[K, ·]).
pub fn rhs_index(geom: &ChartGeometry, q: &[Vec<ChartFunction>], ch_scale: &Rational) -> Result<GradedElement> {
    let alg = WeylAlgebra::new(geom.frame().clone());
    let dim = geom.dim();
    let top = dim as u32;
    let ring = geom.ring();
    let one = GradedElement::one(dim, 1, ring);
    let ahat = ahat_form(&alg, &riemann_matrix(geom, &alg), top)?;
    let x = alg.omega_form(&one).shift_hbar(-1).sub(&geom.omega_h().shift_hbar(-1));
    let ex = exp_forms(&alg, &x, &one, top);
    let ch = chern_character(&alg, q, ch_scale)?;
    Ok(alg.moyal(&alg.moyal(&ahat, &ex), &ch).form_part(top))
}

/// The two-form component of a scalar form as a single function (dim 2) or
/// the dx¹dx² coefficient (higher dims).
pub fn two_form_coefficient(e: &GradedElement, hbar: i32) -> ChartFunction {
    let (_, mask) = forms::from_indices(&[0, 1]).expect("distinct");
    e.coeff(&TermKey::new(hbar, MultiIndex::zero(), mask, 0, 0)).cloned().unwrap_or_else(|| ChartFunction::zero(e.ring(), e.dim()))
}
