//! Fedosov connections on a chart: construction of r by the δ⁻¹ recursion,
//! flat lifts λ, the induced star product, and equivalence by conjugation.
//!
//! Conventions (all checked by post-conditions rather than assumed):
//! * ∇ = dxⁱ∂ᵢ − dxⁱΓᵏ_ij yʲ∂_{yᵏ} + [Γ_V, ·];
//! * D = ∇ − δ + (1/ħ)[r, ·], A = −dxⁱω_ij yʲ + r;
//! * C^W = K + 2∇A + (1/ħ)[A, A] where K is fixed by ∇²a = (1/2ħ)[K, a],
//!   i.e. K = ħ(R + R^V) with K = 2dG + (2/ħ)G∘G for G = Γ̂ + ħΓ_V.

mod geometry;

pub use geometry::ChartGeometry;

use serde::Serialize;

use crate::coefficients::{ChartFunction, GaussianRational, MultiIndex};
use crate::error::{Error, Result};
use crate::weyl_forms::{GradedElement, TermKey, TruncationPolicy, WeylAlgebra};

/// ∇ of Eq. ∇ applied to a form-valued section.
pub fn nabla(geom: &ChartGeometry, alg: &WeylAlgebra, a: &GradedElement) -> GradedElement {
    let mut out = geom.nabla_scalar(a);
    if !geom.is_flat_bundle_free() {
        out.add_assign(&alg.gcomm(&geom.bundle_form(), a));
    }
    out
}

/// The outcome of every post-condition check on a connection.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConnectionChecks {
    /// C^W = −ω + Ω_ħ on every known term.
    pub curvature: bool,
    /// Exclusive filtration bound up to which C^W is known.
    pub curvature_known_below: Option<i32>,
    /// C^W has no y and a scalar matrix part.
    pub central: bool,
    /// δ⁻¹ r = 0.
    pub normalized: bool,
    /// r is a one-form of filtration ≥ 2.
    pub r_shape: bool,
    /// D∘D vanishes on {yⁱ}, {xⁱ}, and the matrix units.
    pub nilpotent: bool,
    pub nilpotent_known_below: Option<i32>,
}

impl ConnectionChecks {
    pub fn all_pass(&self) -> bool {
        self.curvature && self.central && self.normalized && self.r_shape && self.nilpotent
    }
}

/// A Fedosov connection D = ∇ + (1/ħ)[A, ·] solved through a filtration bound.
#[derive(Clone, Debug)]
pub struct FedosovConnection {
    geometry: ChartGeometry,
    algebra: WeylAlgebra,
    policy: TruncationPolicy,
    /// ħ(R + R^V).
    k_term: GradedElement,
    r: GradedElement,
    a: GradedElement,
    curvature: GradedElement,
    /// Whether r was produced by the normalized recursion (δ⁻¹r = 0 holds).
    normalized: bool,
}

impl FedosovConnection {
    /// Solves r = δ⁻¹(½(K − Ω_ħ) + ∇r + (1/2ħ)[r, r]) through filtration
    /// `policy.max_filtration` and checks the curvature post-condition.
    pub fn build(geometry: &ChartGeometry, policy: TruncationPolicy) -> Result<Self> {
        geometry.validate()?;
        if policy.chart.is_fourier() != geometry.ring().is_fourier() {
            return Err(Error::RingMismatch);
        }
        let algebra = WeylAlgebra::new(geometry.frame().clone());
        let k_term = curvature_term(geometry, &algebra);
        let target = policy.storage_precision();
        let half = GaussianRational::from_frac(1, 2);
        let omega_h = geometry.omega_h_matrix();
        let source0 = k_term.sub(&omega_h).scale(&half).truncate(target - 1);
        let zero = GradedElement::zero(geometry.dim(), geometry.matrix_size(), geometry.ring());
        let mut r = zero.truncate(target);
        let mut converged = false;
        for _ in 0..=(target + 1) {
            let mut src = source0.clone();
            src.add_assign(&nabla(geometry, &algebra, &r).truncate(target - 1));
            src.add_assign(&algebra.hcomm_capped(&r, &r, target - 1).scale(&half));
            let next = src.koszul_delta_inv().truncate(target);
            if next == r {
                converged = true;
                break;
            }
            r = next;
        }
        if !converged {
            return Err(Error::NonConvergence(format!("r did not stabilize below filtration {target}")));
        }
        let a = algebra.koszul_generator(&zero).neg().add(&r);
        let mut conn = Self {
            geometry: geometry.clone(),
            algebra,
            policy,
            k_term,
            r,
            a,
            curvature: zero,
            normalized: true,
        };
        conn.curvature = conn.weyl_curvature();
        if !conn.curvature_matches() {
            return Err(Error::PostCondition("C^W ≠ −ω + Ω_ħ".into()));
        }
        Ok(conn)
    }

    pub fn geometry(&self) -> &ChartGeometry {
        &self.geometry
    }

    pub fn algebra(&self) -> &WeylAlgebra {
        &self.algebra
    }

    pub fn policy(&self) -> &TruncationPolicy {
        &self.policy
    }

    pub fn r(&self) -> &GradedElement {
        &self.r
    }

    /// The connection one-form A = −dxⁱω_ij yʲ + r.
    pub fn a(&self) -> &GradedElement {
        &self.a
    }

    /// ħ(R + R^V), the curvature of ∇ in the normalization ∇² = (1/2ħ)[·, ·].
    pub fn k_term(&self) -> &GradedElement {
        &self.k_term
    }

    pub fn curvature(&self) -> &GradedElement {
        &self.curvature
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn zero(&self) -> GradedElement {
        GradedElement::zero(self.geometry.dim(), self.geometry.matrix_size(), self.geometry.ring())
    }

    /// −ω + Ω_ħ as an element.
    pub fn expected_curvature(&self) -> GradedElement {
        self.algebra.omega_form(&self.zero()).neg().add(&self.geometry.omega_h_matrix())
    }

    pub fn nabla(&self, a: &GradedElement) -> GradedElement {
        nabla(&self.geometry, &self.algebra, a)
    }

    /// D a = ∇a − δa + (1/ħ)[r, a].
    pub fn d(&self, a: &GradedElement) -> GradedElement {
        let mut out = self.nabla(a);
        out.add_assign(&a.koszul_delta().neg());
        out.add_assign(&self.algebra.hcomm(&self.r, a));
        out
    }

    /// C^W = ħ(R + R^V) + 2∇A + (1/ħ)[A, A].
    pub fn weyl_curvature(&self) -> GradedElement {
        let mut c = self.k_term.clone();
        c.add_assign(&self.nabla(&self.a).scale(&GaussianRational::from_int(2)));
        c.add_assign(&self.algebra.hcomm(&self.a, &self.a));
        c
    }

    fn curvature_matches(&self) -> bool {
        let diff = self.curvature.sub(&self.expected_curvature());
        diff.is_zero()
    }

    /// Runs every post-condition.
    pub fn check(&self) -> ConnectionChecks {
        let c = &self.curvature;
        let central = c.terms().all(|(k, _)| k.y.is_zero()) && is_scalar_matrix(c);
        let r_shape = self.r.terms().all(|(k, _)| k.form_degree() == 1 && k.filtration() >= 2);
        let normalized = self.r.koszul_delta_inv().is_zero();
        let mut nilpotent = true;
        let mut known: Option<i32> = None;
        for g in self.generators() {
            let dd = self.d(&self.d(&g));
            nilpotent &= dd.is_zero();
            known = match (known, dd.precision()) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, None) => a,
                (None, b) => b,
            };
        }
        ConnectionChecks {
            curvature: self.curvature_matches(),
            curvature_known_below: c.precision(),
            central,
            normalized,
            r_shape,
            nilpotent,
            nilpotent_known_below: known,
        }
    }

    /// yⁱ·I, xⁱ·I (Poly charts) or e^{ixⁱ}·I (Fourier), and the matrix units.
    pub fn generators(&self) -> Vec<GradedElement> {
        let dim = self.geometry.dim();
        let n = self.geometry.matrix_size();
        let ring = self.geometry.ring();
        let mut v = Vec::new();
        for i in 0..dim {
            v.push(GradedElement::y(dim, n, ring, i));
            let f = ChartFunction::monomial(ring, dim, MultiIndex::unit(i), GaussianRational::one());
            v.push(GradedElement::function(&f, n));
        }
        let one = ChartFunction::one(ring, dim);
        for p in 0..n {
            for q in 0..n {
                if n > 1 {
                    v.push(GradedElement::monomial(dim, n, TermKey::new(0, MultiIndex::zero(), 0, p, q), &one));
                }
            }
        }
        v
    }

    /// Largest exclusive filtration bound reachable for λ(a) with valuation `v`.
    pub fn lift_capacity(&self, v: i32) -> i32 {
        match self.r.precision() {
            Some(p) => p + v - 1,
            None => i32::MAX,
        }
    }

    /// λ(a) through the policy's filtration bound.
    pub fn lift(&self, a: &GradedElement) -> Result<GradedElement> {
        self.lift_to(a, self.policy.storage_precision())
    }

    /// The flat section with σ(λ(a)) = a, known below filtration
    /// min(`prec`, capacity): λ = a + δ⁻¹(∇λ + (1/ħ)[r, λ]).
    pub fn lift_to(&self, a: &GradedElement, prec: i32) -> Result<GradedElement> {
        if a.terms().any(|(k, _)| !k.y.is_zero() || k.forms != 0) {
            return Err(Error::InvalidArgument("λ takes an element without y or dx".into()));
        }
        if a.matrix_size() != self.geometry.matrix_size() || a.dim() != self.geometry.dim() {
            return Err(Error::Incompatible("lift argument does not match the bundle".into()));
        }
        let Some(v) = a.valuation_bound() else { return Ok(a.clone()) };
        let target = prec.min(self.lift_capacity(v));
        let mut lam = a.truncate(target);
        for _ in 0..=(target - v + 2).max(1) {
            let mut src = self.nabla(&lam).truncate(target - 1);
            src.add_assign(&self.algebra.hcomm_capped(&self.r, &lam, target - 1));
            let mut next = a.truncate(target);
            next.add_assign(&src.koszul_delta_inv());
            next.truncate_in_place(target);
            if next == lam {
                return Ok(lam);
            }
            lam = next;
        }
        Err(Error::NonConvergence("λ did not stabilize".into()))
    }

    /// σ(λ(a)∘λ(b)) with every order up to ħ^order determined when possible.
    pub fn star(&self, a: &GradedElement, b: &GradedElement, order: i32) -> Result<GradedElement> {
        let (Some(va), Some(vb)) = (a.valuation_bound(), b.valuation_bound()) else {
            return Ok(self.zero());
        };
        let la = self.lift_to(a, 2 * order + 1 - vb)?;
        let lb = self.lift_to(b, 2 * order + 1 - va)?;
        Ok(self.algebra.moyal_capped(&la, &lb, 2 * order + 1).sigma())
    }

    /// Ã = U⁻¹∘A∘U + ħU⁻¹∘∇U for U ∈ I_N ⊕ Γ(W¹(End V)).
    pub fn conjugate(&self, u: &GradedElement) -> Result<FedosovConnection> {
        let n = self.geometry.matrix_size();
        if u.matrix_size() != n || u.terms().any(|(k, _)| k.forms != 0) {
            return Err(Error::InvalidArgument("U must be a 0-form of the bundle's matrix size".into()));
        }
        let id = GradedElement::one(self.geometry.dim(), n, self.geometry.ring());
        let u1 = u.sub(&id);
        if u1.valuation_bound().map_or(false, |v| v < 1) {
            return Err(Error::InvalidArgument("U − I must lie in filtration ≥ 1".into()));
        }
        let prec = self.a.precision().unwrap_or(self.policy.storage_precision());
        let uinv = neumann_inverse(&self.algebra, &u1, prec)?;
        let mut at = self.algebra.moyal_capped(&self.algebra.moyal_capped(&uinv, &self.a, prec), u, prec);
        at.add_assign(&self.algebra.moyal_capped(&uinv, &self.nabla(u), prec - 2).shift_hbar(1));
        let a0 = self.algebra.koszul_generator(&self.zero()).neg();
        let r = at.sub(&a0);
        if r.filtration_degree().map_or(false, |f| f < 2) {
            return Err(Error::PostCondition("conjugated r has filtration < 2".into()));
        }
        let mut conn = Self { r, a: at, normalized: false, ..self.clone() };
        conn.curvature = conn.weyl_curvature();
        if !conn.curvature_matches() {
            return Err(Error::PostCondition("conjugation changed the Weyl curvature".into()));
        }
        Ok(conn)
    }

    /// Whether D q = 0 on every known term.
    pub fn check_flat_endomorphism(&self, q: &GradedElement) -> Result<bool> {
        if q.terms().any(|(k, _)| !k.y.is_zero() || k.forms != 0 || k.hbar != 0) {
            return Err(Error::InvalidArgument("q must be a y-, dx- and ħ-free endomorphism".into()));
        }
        Ok(self.d(q).is_zero())
    }
}

/// ħ(R + R^V) = 2dG + (2/ħ) G∘G with G = Γ̂ + ħΓ_V.
pub fn curvature_term(geom: &ChartGeometry, alg: &WeylAlgebra) -> GradedElement {
    let g = geom.christoffel_generator().add(&geom.bundle_form().shift_hbar(1));
    let two = GaussianRational::from_int(2);
    let mut k = g.de_rham().scale(&two);
    k.add_assign(&alg.moyal(&g, &g).shift_hbar(-1).scale(&two));
    k
}

/// (I + u1)⁻¹ = Σ (−u1)^k, known below filtration `prec`.
pub fn neumann_inverse(alg: &WeylAlgebra, u1: &GradedElement, prec: i32) -> Result<GradedElement> {
    let id = GradedElement::one(u1.dim(), u1.matrix_size(), u1.ring());
    let Some(v) = u1.valuation_bound() else { return Ok(id.truncate(prec)) };
    if v < 1 {
        return Err(Error::InvalidArgument("Neumann series needs filtration ≥ 1".into()));
    }
    let neg = u1.neg();
    let mut sum = id.truncate(prec);
    let mut pow = id.truncate(prec);
    for _ in 0..prec.max(0) {
        pow = alg.moyal_capped(&pow, &neg, prec);
        if pow.is_zero() {
            break;
        }
        sum.add_assign(&pow);
    }
    sum.truncate_in_place(prec);
    Ok(sum)
}

fn is_scalar_matrix(c: &GradedElement) -> bool {
    let n = c.matrix_size();
    for (k, f) in c.terms() {
        if k.row != k.col {
            return false;
        }
        for p in 0..n {
            let other = TermKey { row: p as u8, col: p as u8, ..*k };
            if c.coeff(&other) != Some(f) {
                return false;
            }
        }
    }
    true
}

/// Highest ħ order fully determined in a y-free element: max k with 2k < prec.
pub fn known_hbar_order(e: &GradedElement) -> Option<i32> {
    e.precision().map(|p| (p - 1).div_euclid(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{ChartRing, MultiIndex};
    use crate::weyl_forms::{forms, SymplecticFrame};

    const POLY: ChartRing = ChartRing::Poly { max_degree: 8 };
    const FOURIER: ChartRing = ChartRing::Fourier { max_mode: 6 };

    fn policy(ring: ChartRing, d: i32) -> TruncationPolicy {
        TruncationPolicy::new(-2, 4, d, ring).unwrap()
    }

    fn omega_h(ring: ChartRing, f: ChartFunction) -> GradedElement {
        let (_, mask) = forms::from_indices(&[0, 1]).unwrap();
        let _ = ring;
        GradedElement::monomial(2, 1, TermKey::new(1, MultiIndex::zero(), mask, 0, 0), &f)
    }

    #[test]
    fn flat_chart_has_trivial_r() {
        let g = ChartGeometry::flat(SymplecticFrame::standard(2).unwrap(), POLY, 1);
        let c = FedosovConnection::build(&g, policy(POLY, 4)).unwrap();
        assert!(c.r().is_zero());
        assert!(c.check().all_pass());
    }

    #[test]
    fn curved_poly_chart() {
        let phi = ChartFunction::from_terms(
            POLY,
            2,
            [
                (MultiIndex::from_slice(&[3, 0]).unwrap(), G::from_frac(1, 6)),
                (MultiIndex::from_slice(&[1, 2]).unwrap(), G::from_frac(1, 2)),
            ],
        );
        let g = ChartGeometry::flat(SymplecticFrame::standard(2).unwrap(), POLY, 1).with_generating_function(&phi).unwrap();
        let c = FedosovConnection::build(&g, policy(POLY, 4)).unwrap();
        let ch = c.check();
        assert!(ch.all_pass(), "{ch:?}");
        assert!(!c.r().is_zero());
    }

    #[test]
    fn torus_with_omega_h() {
        let cos = ChartFunction::cos(FOURIER, 2, MultiIndex::unit(0));
        let phi = ChartFunction::sin(FOURIER, 2, MultiIndex::unit(0));
        let g = ChartGeometry::flat(SymplecticFrame::standard(2).unwrap(), FOURIER, 1)
            .with_generating_function(&phi)
            .unwrap()
            .with_omega_h(omega_h(FOURIER, cos))
            .unwrap();
        let c = FedosovConnection::build(&g, policy(FOURIER, 4)).unwrap();
        let ch = c.check();
        assert!(ch.all_pass(), "{ch:?}");
    }

    use crate::coefficients::GaussianRational as G;

    #[test]
    fn star_product_flat_is_moyal() {
        let g = ChartGeometry::flat(SymplecticFrame::standard(2).unwrap(), POLY, 1);
        let c = FedosovConnection::build(&g, policy(POLY, 6)).unwrap();
        let x = |i| GradedElement::function(&ChartFunction::monomial(POLY, 2, MultiIndex::unit(i), G::one()), 1);
        let s = c.star(&x(0), &x(1), 1).unwrap();
        // x¹⋆x² = x¹x² + (ħ/2)ω^{12} = x¹x² − ħ
        let mut want = GradedElement::function(&ChartFunction::monomial(POLY, 2, MultiIndex::from_slice(&[1, 1]).unwrap(), G::one()), 1);
        want.add_assign(&GradedElement::constant(2, 1, POLY, G::from_int(-1)).shift_hbar(1));
        assert_eq!(s.assume_exact(), want);
    }
}
