use proptest::prelude::*;

use fedosov_index::cli::fixture;
use fedosov_index::coefficients::{ChartFunction, ChartRing, GaussianRational as G, MultiIndex};
use fedosov_index::fedosov::FedosovConnection;
use fedosov_index::ffs::{fiber_monomial, FfsCocycle};
use fedosov_index::index::poincare_homotopy;
use fedosov_index::weyl_forms::{forms, GradedElement, SymplecticFrame, TermKey, WeylAlgebra};

const POLY: ChartRing = ChartRing::Poly { max_degree: 6 };
const FOURIER: ChartRing = ChartRing::Fourier { max_mode: 8 };

/// (ħ power, y exponents, dx mask, x exponents, coefficient)
type Raw = (i32, Vec<i64>, u8, Vec<i64>, i64);

fn raw(dim: usize, max_y: i64, max_x: i64) -> impl Strategy<Value = Raw> {
    (
        -1i32..3,
        proptest::collection::vec(0..=max_y, dim),
        0u8..(1u8 << dim),
        proptest::collection::vec(0..=max_x, dim),
        (-3i64..4).prop_filter("nonzero", |c| *c != 0),
    )
}

fn element(dim: usize, ring: ChartRing, terms: &[Raw]) -> GradedElement {
    let mut e = GradedElement::zero(dim, 1, ring);
    for (k, y, mask, x, c) in terms {
        // on Fourier charts the exponents are shifted into modes −1..1
        let x: Vec<i64> = if ring.is_fourier() { x.iter().map(|v| v - 1).collect() } else { x.clone() };
        let f = ChartFunction::monomial(ring, dim, MultiIndex::from_slice(&x).unwrap(), G::from_int(*c));
        let key = TermKey::new(*k, MultiIndex::from_slice(y).unwrap(), *mask, 0, 0);
        e = e.add(&GradedElement::monomial(dim, 1, key, &f));
    }
    e
}

fn arb(dim: usize, ring: ChartRing, max_y: i64) -> impl Strategy<Value = GradedElement> {
    proptest::collection::vec(raw(dim, max_y, 2), 1..4).prop_map(move |t| element(dim, ring, &t))
}

fn parity(a: &GradedElement) -> Option<u32> {
    let mut it = a.terms().map(|(k, _)| k.form_degree() % 2);
    let p = it.next()?;
    it.all(|q| q == p).then_some(p)
}

fn homogeneous(dim: usize, ring: ChartRing, max_y: i64) -> impl Strategy<Value = GradedElement> {
    arb(dim, ring, max_y).prop_filter("homogeneous parity", |a| parity(a).is_some())
}

fn sign_of(a: &GradedElement) -> G {
    if parity(a) == Some(1) {
        G::from_int(-1)
    } else {
        G::one()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn moyal_is_associative(a in arb(2, POLY, 3), b in arb(2, POLY, 3), c in arb(2, POLY, 3)) {
        let alg = WeylAlgebra::new(SymplecticFrame::standard(2).unwrap());
        prop_assert_eq!(alg.moyal(&alg.moyal(&a, &b), &c), alg.moyal(&a, &alg.moyal(&b, &c)));
    }

    #[test]
    fn moyal_is_associative_in_four_dimensions(a in arb(4, FOURIER, 2), b in arb(4, FOURIER, 2), c in arb(4, FOURIER, 2)) {
        let alg = WeylAlgebra::new(SymplecticFrame::standard(4).unwrap());
        prop_assert_eq!(alg.moyal(&alg.moyal(&a, &b), &c), alg.moyal(&a, &alg.moyal(&b, &c)));
    }

    #[test]
    fn hodge_decomposition(a in arb(2, POLY, 4)) {
        let rebuilt = a.sigma().add(&a.koszul_delta_inv().koszul_delta()).add(&a.koszul_delta().koszul_delta_inv());
        prop_assert_eq!(rebuilt, a);
    }

    #[test]
    fn differentials_square_to_zero(a in arb(4, POLY, 3)) {
        prop_assert!(a.koszul_delta().koszul_delta().is_zero());
        prop_assert!(a.koszul_delta_inv().koszul_delta_inv().is_zero());
        prop_assert!(a.de_rham().de_rham().is_zero());
    }

    #[test]
    fn delta_and_d_are_graded_derivations(a in homogeneous(2, FOURIER, 3), b in arb(2, FOURIER, 3)) {
        let alg = WeylAlgebra::new(SymplecticFrame::standard(2).unwrap());
        let s = sign_of(&a);
        let lhs = alg.moyal(&a, &b).koszul_delta();
        let rhs = alg.moyal(&a.koszul_delta(), &b).add(&alg.moyal(&a, &b.koszul_delta()).scale(&s));
        prop_assert_eq!(lhs, rhs);
        let lhs = alg.moyal(&a, &b).de_rham();
        let rhs = alg.moyal(&a.de_rham(), &b).add(&alg.moyal(&a, &b.de_rham()).scale(&s));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn homotopy_inverts_de_rham(beta in arb(2, POLY, 0)) {
        let alpha = beta.filter(|k| k.form_degree() == 1).de_rham();
        if !alpha.is_zero() {
            prop_assert_eq!(poincare_homotopy(&alpha).unwrap().de_rham(), alpha);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn fedosov_differential_is_a_derivation(a in homogeneous(2, FOURIER, 2), b in arb(2, FOURIER, 2)) {
        let sc = fixture("torus-trig").unwrap().resolve().unwrap();
        let conn = FedosovConnection::build(&sc.geometry, sc.policy).unwrap();
        let alg = conn.algebra();
        let s = sign_of(&a);
        let lhs = conn.d(&alg.moyal(&a, &b));
        let rhs = alg.moyal(&conn.d(&a), &b).add(&alg.moyal(&a, &conn.d(&b)).scale(&s));
        let p = lhs.precision().into_iter().chain(rhs.precision()).min().unwrap_or(i32::MAX);
        prop_assert_eq!(lhs.truncate(p), rhs.truncate(p));
    }

    #[test]
    fn theta_vanishes_on_the_relative_subalgebra(
        h in 0usize..5,
        y in proptest::collection::vec(0i64..3, 2),
        m0y in proptest::collection::vec(0i64..3, 2),
        entries in proptest::collection::vec(0usize..2, 4),
    ) {
        let c = FfsCocycle::new(&SymplecticFrame::standard(2).unwrap()).unwrap();
        let fm = |y: &[i64], a, b| fiber_monomial(2, 2, 0, MultiIndex::from_slice(y).unwrap(), a, b, G::one());
        let scalar = |y: &[i64]| fm(y, 0, 0).add(&fm(y, 1, 1));
        let x = match h {
            0 => fm(&[0, 0], 0, 1),
            1 => fm(&[0, 0], 1, 1),
            2 => scalar(&[2, 0]),
            3 => scalar(&[1, 1]),
            _ => scalar(&[0, 2]),
        };
        let v = c.theta(&[x, fm(&y, entries[0], entries[1])], &fm(&m0y, entries[2], entries[3])).unwrap();
        prop_assert!(v.is_zero());
    }
}

#[test]
fn form_signs_agree_with_wedge() {
    for idx in [[0usize, 1], [1, 0], [2, 3], [3, 0]] {
        let (s, mask) = forms::from_indices(&idx).unwrap();
        let (s2, _) = forms::wedge(1 << idx[0], 1 << idx[1]).unwrap();
        assert_eq!(s, s2);
        assert_eq!(forms::degree(mask), 2);
    }
}
