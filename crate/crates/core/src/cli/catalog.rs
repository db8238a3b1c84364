//! Property checks run by `selftest`, each reduced to a pass/fail row.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::CheckRow;
use crate::chern_weil::ahat_scalar;
use crate::coefficients::{rat, ChartFunction, ChartRing, GaussianRational, MultiIndex};
use crate::error::Result;
use crate::ffs::{fiber_monomial, hochschild_b, FfsCocycle};
use crate::weyl_forms::{GradedElement, SymplecticFrame, TermKey, WeylAlgebra};

/// B = ω^{ij} with B^{12} = 1.
pub fn unit_poisson_frame() -> SymplecticFrame {
    SymplecticFrame::from_upper(vec![vec![rat(0, 1), rat(1, 1)], vec![rat(-1, 1), rat(0, 1)]]).expect("invertible")
}

/// A seeded generator, so every battery is reproducible.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_coeff(rng: &mut impl Rng) -> GaussianRational {
    let mut num = rng.gen_range(-4i64..=4);
    if num == 0 {
        num = 1;
    }
    let c = GaussianRational::from_frac(num, rng.gen_range(1i64..=3));
    if rng.gen_bool(0.25) {
        c.mul_i()
    } else {
        c
    }
}

/// c·ħ^k·y^α·E_pq with |α| ≤ `max_y`, constant coefficient.
pub fn random_fiber_monomial(rng: &mut impl Rng, dim: usize, matrix_size: usize, max_y: i64) -> GradedElement {
    let mut y = vec![0i64; dim];
    let total = rng.gen_range(0..=max_y);
    for _ in 0..total {
        y[rng.gen_range(0..dim)] += 1;
    }
    let k = rng.gen_range(-1..=1);
    let (p, q) = (rng.gen_range(0..matrix_size), rng.gen_range(0..matrix_size));
    fiber_monomial(dim, matrix_size, k, MultiIndex::from_slice(&y).expect("small"), p, q, small_coeff(rng))
}

/// A short sum of monomials f(x)·ħ^k·y^α·dx^S with polynomial f.
pub fn random_form(rng: &mut impl Rng, dim: usize) -> GradedElement {
    let ring = ChartRing::Poly { max_degree: 6 };
    let mut e = GradedElement::zero(dim, 1, ring);
    for _ in 0..rng.gen_range(1..=4) {
        let mut y = vec![0i64; dim];
        let mut x = vec![0i64; dim];
        for _ in 0..rng.gen_range(0..=3) {
            y[rng.gen_range(0..dim)] += 1;
        }
        for _ in 0..rng.gen_range(0..=2) {
            x[rng.gen_range(0..dim)] += 1;
        }
        let mask: u8 = rng.gen_range(0..(1u8 << dim));
        let f = ChartFunction::monomial(ring, dim, MultiIndex::from_slice(&x).expect("small"), small_coeff(rng));
        let key = TermKey::new(rng.gen_range(-1..=2), MultiIndex::from_slice(&y).expect("small"), mask, 0, 0);
        e = e.add(&GradedElement::monomial(dim, 1, key, &f));
    }
    e
}

pub fn tau_value() -> CheckRow {
    let c = FfsCocycle::new(&unit_poisson_frame()).expect("frame");
    let y = |i| fiber_monomial(2, 1, 0, MultiIndex::unit(i), 0, 0, GaussianRational::one());
    let one = fiber_monomial(2, 1, 0, MultiIndex::zero(), 0, 0, GaussianRational::one());
    let got = c.tau(&[y(0), y(1)], &one);
    let pass = matches!(&got, Ok(v) if v.coeff(0) == Some(GaussianRational::from_int(-1)) && v.terms().count() == 1);
    let detail = match got {
        Ok(v) => format!("τ₂(y¹⊗y²)(1) = {}", v.coeff(0).map_or("?".into(), |c| c.to_string())),
        Err(e) => e.to_string(),
    };
    CheckRow::new("tau-value", pass, detail)
}

/// b(τ₂) on every triple of monomials ħ^k y^α, k ∈ [−1, 2], of total y-degree ≤ 3,
/// paired with every a₀ = y^β, |β| ≤ 3.
pub fn hochschild_cocycle(cocycle: &FfsCocycle, max_hbar: i32) -> Result<(usize, usize)> {
    let alg = WeylAlgebra::new(unit_poisson_frame());
    let mut basis = Vec::new();
    for d in 0..=3i64 {
        for a in 0..=d {
            basis.push((d, MultiIndex::from_slice(&[a, d - a]).expect("small")));
        }
    }
    let mono = |k: i32, y: MultiIndex| fiber_monomial(2, 1, k, y, 0, 0, GaussianRational::one());
    let a0s: Vec<GradedElement> = basis.iter().map(|(_, y)| mono(0, *y)).collect();
    let psi = |args: &[GradedElement], a0: &GradedElement| cocycle.tau(args, a0);
    let (mut checked, mut failed) = (0, 0);
    for (d1, y1) in &basis {
        for (d2, y2) in &basis {
            for (d3, y3) in &basis {
                if d1 + d2 + d3 > 3 {
                    continue;
                }
                for k1 in -1..=max_hbar {
                    for k2 in -1..=max_hbar {
                        for k3 in -1..=max_hbar {
                            let args = [mono(k1, *y1), mono(k2, *y2), mono(k3, *y3)];
                            for a0 in &a0s {
                                checked += 1;
                                if !hochschild_b(&alg, &psi, &args, a0)?.is_zero() {
                                    failed += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok((checked, failed))
}

pub fn hochschild_row(mutate_eps: bool, slow: bool) -> CheckRow {
    let base = FfsCocycle::new(&unit_poisson_frame()).expect("frame");
    let cocycle = if mutate_eps { FfsCocycle::with_eps(base.b().to_vec(), base.eps().corrupted()) } else { base };
    match hochschild_cocycle(&cocycle, if slow { 2 } else { 0 }) {
        Ok((n, 0)) => CheckRow::new("hochschild-b-tau", true, format!("{n} evaluations vanish")),
        Ok((n, f)) => CheckRow::new("hochschild-b-tau", false, format!("{f} of {n} evaluations nonzero")),
        Err(e) => CheckRow::new("hochschild-b-tau", false, e.to_string()),
    }
}

/// (a∘b)∘c = a∘(b∘c) on random monomial triples.
pub fn associativity(seed: u64, samples: usize, dim: usize) -> (usize, usize) {
    let frame = SymplecticFrame::standard(dim).expect("frame");
    let alg = WeylAlgebra::new(frame);
    let mut r = rng(seed);
    let mut failed = 0;
    for _ in 0..samples {
        let n = r.gen_range(1..=2);
        let [a, b, c] = [(); 3].map(|_| random_fiber_monomial(&mut r, dim, n, 4));
        if alg.moyal(&alg.moyal(&a, &b), &c) != alg.moyal(&a, &alg.moyal(&b, &c)) {
            failed += 1;
        }
    }
    (samples, failed)
}

/// a = σ(a) + δδ⁻¹a + δ⁻¹δa on random forms.
pub fn hodge(seed: u64, samples: usize, dim: usize) -> (usize, usize) {
    let mut r = rng(seed);
    let mut failed = 0;
    for _ in 0..samples {
        let a = random_form(&mut r, dim);
        let rebuilt = a.sigma().add(&a.koszul_delta_inv().koszul_delta()).add(&a.koszul_delta().koszul_delta_inv());
        if rebuilt != a {
            failed += 1;
        }
    }
    (samples, failed)
}

fn count_row(name: &str, (n, f): (usize, usize), what: &str) -> CheckRow {
    if f == 0 {
        CheckRow::new(name, true, format!("{n} {what}"))
    } else {
        CheckRow::new(name, false, format!("{f} of {n} {what} fail"))
    }
}

/// Θ vanishes when one argument lies in 𝔤𝔩_N ⊕ 𝔰𝔭₂ₙ and is invariant under it.
pub fn relative_cocycle() -> CheckRow {
    let frame = unit_poisson_frame();
    let c = FfsCocycle::new(&frame).expect("frame");
    let alg = WeylAlgebra::new(frame);
    let fm = |y: &[i64], r, s| fiber_monomial(2, 2, 0, MultiIndex::from_slice(y).expect("small"), r, s, GaussianRational::one());
    let scalar = |y: &[i64]| fm(y, 0, 0).add(&fm(y, 1, 1));
    let h = [fm(&[0, 0], 0, 1), fm(&[0, 0], 1, 1), scalar(&[2, 0]), scalar(&[1, 1]), scalar(&[0, 2])];
    let args = [fm(&[1, 0], 0, 0), fm(&[0, 1], 1, 0), fm(&[2, 1], 0, 1), fm(&[1, 2], 1, 1), fm(&[0, 3], 0, 0)];
    let m0s = [fm(&[0, 0], 0, 0), fm(&[1, 1], 1, 0), fm(&[0, 2], 0, 1)];
    let (mut n, mut bad) = (0, 0);
    let mut run = || -> Result<()> {
        for x in &h {
            for a in &args {
                for m0 in &m0s {
                    n += 1;
                    bad += usize::from(!c.theta(&[x.clone(), a.clone()], m0)?.is_zero());
                }
                for b in &args {
                    for m0 in &m0s {
                        n += 1;
                        let t1 = c.theta(&[alg.hcomm(x, a), b.clone()], m0)?;
                        let t2 = c.theta(&[a.clone(), alg.hcomm(x, b)], m0)?;
                        let t3 = c.theta(&[a.clone(), b.clone()], &alg.hcomm(x, m0))?;
                        bad += usize::from(!t1.add(&t2).add(&t3).is_zero());
                    }
                }
            }
        }
        Ok(())
    };
    match run() {
        Ok(()) => count_row("theta-relative", (n, bad), "contraction/invariance evaluations"),
        Err(e) => CheckRow::new("theta-relative", false, e.to_string()),
    }
}

/// Â scalar series against its closed-form coefficients.
pub fn ahat_series() -> CheckRow {
    let want = [rat(1, 1), rat(0, 1), rat(-1, 12), rat(0, 1), rat(1, 160), rat(0, 1), rat(-61, 120960)];
    let pass = matches!(ahat_scalar(7), Ok(got) if got.0 == want);
    CheckRow::new("ahat-series", pass, "(x/sinh x)^(1/2) through x^6".to_string())
}

/// The built-in property catalog.
pub fn run(slow: bool, mutate_eps: bool) -> Vec<CheckRow> {
    let samples = if slow { 200 } else { 40 };
    let mut rows = vec![tau_value(), hochschild_row(mutate_eps, slow)];
    rows.push(count_row("associativity-n1", associativity(11, samples, 2), "triples"));
    rows.push(count_row("associativity-n2", associativity(12, samples, 4), "triples"));
    rows.push(count_row("hodge-identity", hodge(13, samples, 2), "elements"));
    rows.push(relative_cocycle());
    rows.push(ahat_series());
    rows
}
