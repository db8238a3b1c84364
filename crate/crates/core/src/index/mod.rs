//! Idempotent lifting, the principal symbol, the class map cl(P) = Ψ_D(P),
//! an explicit exactness witness for closed polynomial forms, and the
//! end-to-end comparison of both sides of the index theorem.

use serde::Serialize;

use crate::chern_weil::rhs_index;
use crate::coefficients::{rat, ChartFunction, ChartRing, GaussianRational, HLaurent, MultiIndex};
use crate::error::{Error, Result};
use crate::fedosov::{ChartGeometry, FedosovConnection};
use crate::ffs::{average, psi, psi_capacity, FfsCocycle};
use crate::weyl_forms::{forms, GradedElement, TermKey, TruncationPolicy};

/// A matrix P over End_V((ħ)) with P⋆P = P through ħ^order.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumIdempotent {
    pub p: GradedElement,
    pub order: i32,
    /// Passes of the Newton iteration that were needed.
    pub passes: usize,
}

fn check_classical_idempotent(q: &GradedElement) -> Result<()> {
    let mut sq = GradedElement::zero(q.dim(), q.matrix_size(), q.ring());
    let m = q.function_matrix(0);
    let n = m.len();
    for p in 0..n {
        for r in 0..n {
            let mut s = ChartFunction::zero(q.ring(), q.dim());
            for (t, row) in m.iter().enumerate() {
                s.add_assign(&m[p][t].mul(&row[r]));
            }
            sq.add_term(TermKey::new(0, MultiIndex::zero(), 0, p, r), &s);
        }
    }
    if sq.sub(&q.filter(|k| k.hbar == 0)).is_zero() {
        Ok(())
    } else {
        Err(Error::InvalidArgument("q·q ≠ q in the function ring".into()))
    }
}

fn function_element(geom: &ChartGeometry, q: &[Vec<ChartFunction>]) -> Result<GradedElement> {
    if q.len() != geom.matrix_size() || q.iter().any(|r| r.len() != q.len()) {
        return Err(Error::Dimension(format!("q must be {0}×{0}", geom.matrix_size())));
    }
    if q.iter().flatten().any(|f| f.ring() != geom.ring() || f.dim() != geom.dim()) {
        return Err(Error::RingMismatch);
    }
    Ok(GradedElement::from_function_matrix(geom.dim(), geom.ring(), 0, q))
}

/// P⋆P − P through ħ^order.
pub fn idempotent_defect(conn: &FedosovConnection, p: &GradedElement, order: i32) -> Result<GradedElement> {
    let pp = conn.star(p, p, order)?;
    Ok(pp.sub(&p.truncate(2 * order + 2)))
}

/// Lifts the classical idempotent q by P ← 3P⋆P − 2P⋆P⋆P from P = q.
pub fn lift_idempotent(conn: &FedosovConnection, q: &[Vec<ChartFunction>], order: i32) -> Result<QuantumIdempotent> {
    let seed = function_element(conn.geometry(), q)?;
    lift_idempotent_from(conn, &seed, order)
}

/// The same iteration from an arbitrary seed whose ħ⁰ part is idempotent.
pub fn lift_idempotent_from(conn: &FedosovConnection, seed: &GradedElement, order: i32) -> Result<QuantumIdempotent> {
    if seed.terms().any(|(k, _)| !k.y.is_zero() || k.forms != 0 || k.hbar < 0) {
        return Err(Error::InvalidArgument("idempotent seed must be an End_V[[ħ]] element".into()));
    }
    check_classical_idempotent(seed)?;
    let cap = (conn.lift_capacity(0) - 1).div_euclid(2);
    if order > cap {
        return Err(Error::Truncation(format!(
            "ħ^{order} needs λ below filtration {}, the connection reaches {}",
            2 * order + 1,
            conn.lift_capacity(0)
        )));
    }
    let prec = 2 * order + 2;
    let mut p = seed.truncate(prec);
    let three = GaussianRational::from_int(3);
    let two = GaussianRational::from_int(2);
    for pass in 0..(order.max(0) as usize + 3) {
        let pp = conn.star(&p, &p, order)?;
        if pp.sub(&p).is_zero() {
            return Ok(QuantumIdempotent { p, order, passes: pass });
        }
        let ppp = conn.star(&pp, &p, order)?;
        p = pp.scale(&three).sub(&ppp.scale(&two)).truncate(prec);
    }
    Err(Error::NonConvergence("idempotent lift did not settle".into()))
}

/// P|_{ħ=0}.
pub fn principal_symbol(p: &GradedElement) -> Vec<Vec<ChartFunction>> {
    p.function_matrix(0)
}

/// cl(P) = Ψ_D(P) through ħ^order.
pub fn cl(cocycle: &FfsCocycle, conn: &FedosovConnection, p: &QuantumIdempotent, order: i32) -> Result<GradedElement> {
    psi(cocycle, conn, &p.p, order)
}

/// η with dη = α for a closed polynomial form α of positive degree, via the
/// radial homotopy: x^β dx^S ↦ (1/(|β|+|S|)) Σ_k x^{β+e_k} ι_{∂_k} dx^S.
pub fn poincare_homotopy(alpha: &GradedElement) -> Result<GradedElement> {
    if alpha.ring().is_fourier() {
        return Err(Error::Unsupported("homotopy needs polynomial coefficients; compare torus averages instead".into()));
    }
    if alpha.terms().any(|(k, _)| !k.y.is_zero() || k.forms == 0) {
        return Err(Error::InvalidArgument("homotopy takes a y-free form of positive degree".into()));
    }
    if !alpha.de_rham().is_zero() {
        return Err(Error::InvalidArgument("form is not closed".into()));
    }
    let dim = alpha.dim();
    let mut eta = alpha.zero_like();
    for (key, f) in alpha.terms() {
        for (beta, c) in f.terms() {
            let s = beta.total() as i64 + key.form_degree() as i64;
            for k in 0..dim {
                let Some((sign, mask)) = forms::contract(k, key.forms) else { continue };
                let coef = c.scale(&rat(sign as i64, s));
                let g = ChartFunction::monomial(alpha.ring(), dim, beta.inc(k), coef);
                eta.add_term(TermKey { forms: mask, ..*key }, &g);
            }
        }
    }
    Ok(eta)
}

/// Comparison at one ħ order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrderCheck {
    pub order: i32,
    pub lhs: Option<String>,
    pub rhs: Option<String>,
    pub pass: bool,
}

/// Both sides of the index theorem for one geometry and idempotent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexReport {
    /// "average" on torus charts, "pointwise" on polynomial charts.
    pub comparison: String,
    pub lhs_form: String,
    pub rhs_form: String,
    #[serde(skip)]
    pub lhs: Option<HLaurent>,
    #[serde(skip)]
    pub rhs: Option<HLaurent>,
    pub orders: Vec<OrderCheck>,
    pub idempotent_order: i32,
    pub idempotent_passes: usize,
    /// Highest ħ order Ψ_D(P) can be determined at with the stored connection.
    pub determined_through: i32,
    pub notes: Vec<String>,
}

impl IndexReport {
    pub fn all_pass(&self) -> bool {
        !self.orders.is_empty() && self.orders.iter().all(|o| o.pass)
    }
}

/// Ψ_D(P) versus [Â · exp((ω − Ω_ħ)/ħ) · ch(q)]₂ₙ for orders ħ⁻ⁿ … ħ^order.
pub fn verify_index(geom: &ChartGeometry, q: &[Vec<ChartFunction>], policy: TruncationPolicy, order: i32) -> Result<IndexReport> {
    let conn = FedosovConnection::build(geom, policy)?;
    let cocycle = FfsCocycle::new(geom.frame())?;
    verify_with(&conn, &cocycle, q, order)
}

pub fn verify_with(conn: &FedosovConnection, cocycle: &FfsCocycle, q: &[Vec<ChartFunction>], order: i32) -> Result<IndexReport> {
    let geom = conn.geometry();
    let n = (geom.dim() / 2) as i32;
    // Ψ reads λ(P) up to filtration 2·order + 2n + 1
    let p_order = order + n;
    let idem = lift_idempotent(conn, q, p_order)?;
    let mut notes = Vec::new();
    let determined = psi_capacity(conn, &idem.p).unwrap_or(order);
    if determined < order {
        return Err(Error::Truncation(format!(
            "Ψ_D(P) is determined through ħ^{determined} only (filtration bound {}), ħ^{order} requested",
            conn.policy().max_filtration
        )));
    }
    let lhs = cl(cocycle, conn, &idem, order)?;
    let rhs = rhs_index(geom, q, &rat(2, 1))?.filter(|k| k.hbar <= order).truncate(2 * order + 2);
    let mut report = IndexReport {
        comparison: String::new(),
        lhs_form: lhs.render(),
        rhs_form: rhs.render(),
        lhs: None,
        rhs: None,
        orders: Vec::new(),
        idempotent_order: idem.order,
        idempotent_passes: idem.passes,
        determined_through: determined,
        notes: Vec::new(),
    };
    if geom.ring().is_fourier() {
        report.comparison = "average".into();
        let la = average(&lhs)?;
        let ra = average(&rhs)?;
        for k in -n..=order {
            let (l, r) = (la.coeff(k), ra.coeff(k));
            let pass = l.is_some() && l == r;
            report.orders.push(OrderCheck { order: k, lhs: l.map(|c| c.to_string()), rhs: r.map(|c| c.to_string()), pass });
        }
        report.lhs = Some(la);
        report.rhs = Some(ra);
    } else {
        report.comparison = "pointwise".into();
        for k in -n..=order {
            let l = lhs.filter(|t| t.hbar == k).assume_exact();
            let r = rhs.filter(|t| t.hbar == k).assume_exact();
            let pass = l == r;
            if !pass {
                notes.push(format!("order {k}: forms differ; on a polynomial chart only constant-coefficient agreement is asserted"));
            }
            report.orders.push(OrderCheck { order: k, lhs: Some(l.render()), rhs: Some(r.render()), pass });
        }
    }
    report.notes = notes;
    Ok(report)
}

/// The rank-one projector onto (cos x¹, sin x¹) on a Fourier chart.
pub fn rotation_projector(ring: ChartRing, dim: usize) -> Vec<Vec<ChartFunction>> {
    let half = ChartFunction::constant(ring, dim, GaussianRational::from_frac(1, 2));
    let c2 = ChartFunction::cos(ring, dim, MultiIndex::from_slice(&[2]).expect("index")).scale(&GaussianRational::from_frac(1, 2));
    let s2 = ChartFunction::sin(ring, dim, MultiIndex::from_slice(&[2]).expect("index")).scale(&GaussianRational::from_frac(1, 2));
    vec![vec![half.add(&c2), s2.clone()], vec![s2, half.sub(&c2)]]
}

#[cfg(test)]
mod tests;
