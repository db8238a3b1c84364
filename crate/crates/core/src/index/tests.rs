use super::*;
use crate::coefficients::GaussianRational as G;
use crate::weyl_forms::SymplecticFrame;

const POLY: ChartRing = ChartRing::Poly { max_degree: 8 };
const FOURIER: ChartRing = ChartRing::Fourier { max_mode: 8 };

fn omega_h() -> GradedElement {
    let f = ChartFunction::constant(FOURIER, 2, G::from_frac(3, 7)).add(&ChartFunction::cos(FOURIER, 2, MultiIndex::unit(0)));
    GradedElement::monomial(2, 1, TermKey::new(1, MultiIndex::zero(), 0b11, 0, 0), &f)
}

fn policy(ring: ChartRing) -> TruncationPolicy {
    TruncationPolicy::new(-2, 2, 5, ring).unwrap()
}

#[test]
fn constant_projector_is_already_idempotent() {
    let g = ChartGeometry::flat(SymplecticFrame::standard(2).unwrap(), POLY, 2);
    let conn = FedosovConnection::build(&g, policy(POLY)).unwrap();
    let one = ChartFunction::one(POLY, 2);
    let zero = ChartFunction::zero(POLY, 2);
    let q = vec![vec![one, zero.clone()], vec![zero.clone(), zero]];
    let p = lift_idempotent(&conn, &q, 2).unwrap();
    assert_eq!(p.passes, 0);
    assert_eq!(principal_symbol(&p.p), q);
}

#[test]
fn polynomial_gauge_projector() {
    let g = ChartGeometry::flat(SymplecticFrame::standard(2).unwrap(), POLY, 2);
    let conn = FedosovConnection::build(&g, policy(POLY)).unwrap();
    let one = ChartFunction::one(POLY, 2);
    let zero = ChartFunction::zero(POLY, 2);
    let mx = ChartFunction::monomial(POLY, 2, MultiIndex::unit(0), G::from_int(-1));
    let q = vec![vec![one, mx], vec![zero.clone(), zero]];
    let p = lift_idempotent(&conn, &q, 2).unwrap();
    assert!(idempotent_defect(&conn, &p.p, 2).unwrap().is_zero());
    assert_eq!(principal_symbol(&p.p), q);
    assert!(lift_idempotent(&conn, &q, 3).is_err());
}

#[test]
fn homotopy_inverts_d() {
    let area = GradedElement::monomial(2, 1, TermKey::new(0, MultiIndex::zero(), 0b11, 0, 0), &ChartFunction::one(POLY, 2));
    let eta = poincare_homotopy(&area).unwrap();
    assert_eq!(eta.de_rham(), area);
    let x1x2 = ChartFunction::monomial(POLY, 2, MultiIndex::from_slice(&[1, 1]).unwrap(), G::one());
    let exact = GradedElement::monomial(2, 1, TermKey::new(-1, MultiIndex::zero(), 0b10, 0, 0), &x1x2).de_rham();
    assert_eq!(poincare_homotopy(&exact).unwrap().de_rham(), exact);
    assert!(poincare_homotopy(&GradedElement::zero(2, 1, POLY).truncate(0).assume_exact()).unwrap().is_zero());
    let not_closed = GradedElement::monomial(2, 1, TermKey::new(0, MultiIndex::zero(), 0b10, 0, 0), &x1x2);
    assert!(poincare_homotopy(&not_closed).is_err());
}

#[test]
fn torus_rotation_projector_index() {
    let frame = SymplecticFrame::standard(2).unwrap();
    let g = ChartGeometry::flat(frame, FOURIER, 2)
        .with_projector_connection(&rotation_projector(FOURIER, 2))
        .unwrap();
    let g = g.with_omega_h(omega_h()).unwrap();
    let report = verify_index(&g, &rotation_projector(FOURIER, 2), policy(FOURIER), 1).unwrap();
    assert!(report.all_pass(), "{report:#?}");
    let lhs = report.lhs.unwrap();
    assert_eq!(lhs.coeff(-1), Some(G::one()));
    assert_eq!(lhs.coeff(0), Some(G::from_frac(-3, 7)));
}
