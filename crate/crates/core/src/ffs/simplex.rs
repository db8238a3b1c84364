use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};

use crate::coefficients::Rational;

/// ∫ over 0 ≤ u₁ ≤ … ≤ u_m ≤ 1 of Π uᵢ^{pᵢ}, integrating u₁ first.
///
/// Each step turns u_k^{s} into u_{k+1}^{s+1}/(s+1), so the value is
/// Π_k 1/(p₁ + … + p_k + k).
pub fn simplex_integral(powers: &[u32]) -> Rational {
    let mut out = Rational::one();
    let mut s: u64 = 0;
    for (k, &p) in powers.iter().enumerate() {
        s += p as u64;
        out /= Rational::from_integer((s + k as u64 + 1).into());
    }
    out
}

/// Polynomial in u₁…u_m as a sparse exponent map.
type UPoly = HashMap<Vec<u32>, Rational>;

/// Memo for J(m) = ∫_Δ Π_{b<c} (2u_b − 2u_c + 1)^{m_bc} du with u₀ = 0,
/// keyed by the pair-count vector in the order of [`pair_index`].
#[derive(Clone, Debug, Default)]
pub struct SimplexCache {
    table: Arc<Mutex<HashMap<Vec<u32>, Rational>>>,
}

/// Position of the pair (b, c), b < c ≤ m, in a flat vector.
pub fn pair_index(m: usize, b: usize, c: usize) -> usize {
    debug_assert!(b < c && c <= m);
    // pairs ordered (0,1), (0,2), …, (0,m), (1,2), …
    b * (2 * m + 1 - b) / 2 + (c - b - 1)
}

impl SimplexCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.table.lock().expect("simplex cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// J(m) over the m-simplex Δ_m where `counts` lists m_bc for every pair.
    pub fn weight(&self, m: usize, counts: &[u32]) -> Rational {
        if let Some(v) = self.table.lock().expect("simplex cache poisoned").get(counts) {
            return v.clone();
        }
        let v = expand_weight(m, counts);
        self.table.lock().expect("simplex cache poisoned").insert(counts.to_vec(), v.clone());
        v
    }
}

fn expand_weight(m: usize, counts: &[u32]) -> Rational {
    let mut poly: UPoly = HashMap::new();
    poly.insert(vec![0; m], Rational::one());
    for b in 0..=m {
        for c in (b + 1)..=m {
            let e = counts[pair_index(m, b, c)];
            if e == 0 {
                continue;
            }
            // 2u_b − 2u_c + 1 with u₀ = 0
            let mut lin: UPoly = HashMap::new();
            lin.insert(vec![0; m], Rational::one());
            if b > 0 {
                let mut k = vec![0; m];
                k[b - 1] = 1;
                lin.insert(k, Rational::from_integer(2.into()));
            }
            let mut k = vec![0; m];
            k[c - 1] = 1;
            lin.insert(k, Rational::from_integer((-2).into()));
            for _ in 0..e {
                poly = mul(&poly, &lin);
            }
        }
    }
    poly.iter().map(|(k, v)| v * simplex_integral(k)).sum()
}

fn mul(a: &UPoly, b: &UPoly) -> UPoly {
    let mut out: UPoly = HashMap::new();
    for (ka, va) in a {
        for (kb, vb) in b {
            let k: Vec<u32> = ka.iter().zip(kb).map(|(x, y)| x + y).collect();
            let e = out.entry(k).or_insert_with(Rational::zero);
            *e += va * vb;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::rat;

    /// Independent oracle: integrate a univariate-coefficient polynomial
    /// variable by variable with explicit antiderivatives.
    fn iterated(powers: &[u32]) -> Rational {
        // f(t) as coefficients of t^k after integrating out u₁..u_k with upper limit t
        let mut f: Vec<Rational> = vec![Rational::one()];
        for &p in powers {
            // multiply by t^p, then integrate from 0 to t
            let mut g = vec![Rational::zero(); f.len() + p as usize + 1];
            for (k, c) in f.iter().enumerate() {
                let e = k + p as usize;
                g[e + 1] += c / Rational::from_integer(((e + 1) as i64).into());
            }
            f = g;
        }
        f.iter().sum()
    }

    #[test]
    fn spec_values() {
        assert_eq!(simplex_integral(&[0, 0]), rat(1, 2));
        assert_eq!(simplex_integral(&[1, 0]), rat(1, 6));
        assert_eq!(simplex_integral(&[0, 1]), rat(1, 3));
        assert_eq!(simplex_integral(&[0, 0, 0, 0]), rat(1, 24));
    }

    #[test]
    fn matches_iterated_integration() {
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..3 {
                    for d in 0..3 {
                        let p = [a, b, c, d];
                        assert_eq!(simplex_integral(&p), iterated(&p));
                    }
                }
            }
        }
    }

    #[test]
    fn pair_indexing_is_dense() {
        for m in [2usize, 4] {
            let mut seen = vec![];
            for b in 0..=m {
                for c in (b + 1)..=m {
                    seen.push(pair_index(m, b, c));
                }
            }
            let want: Vec<usize> = (0..m * (m + 1) / 2).collect();
            assert_eq!(seen, want);
        }
    }

    #[test]
    fn weights() {
        let cache = SimplexCache::new();
        // m = 2, no contractions: the simplex volume
        assert_eq!(cache.weight(2, &[0, 0, 0]), rat(1, 2));
        // (1 − 2u₁) over Δ₂: 1/2 − 2·(1/6)
        assert_eq!(cache.weight(2, &[1, 0, 0]), rat(1, 6));
        // (2u₁ − 2u₂ + 1) over Δ₂: 1/2 + 2/6 − 2/3
        assert_eq!(cache.weight(2, &[0, 0, 1]), rat(1, 6));
        assert_eq!(cache.len(), 3);
    }
}
