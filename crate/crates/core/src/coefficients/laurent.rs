use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::GaussianRational;

/// Truncated Laurent series in ħ.
///
/// Orders below `k_min` vanish, orders in `[k_min, k_max]` are known exactly
/// and orders above `k_max` are unknown. `k_max = None` means every order is
/// known (the series is a finite Laurent polynomial).
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct HLaurent {
    pub k_min: i32,
    pub k_max: Option<i32>,
    coeffs: BTreeMap<i32, GaussianRational>,
}

impl HLaurent {
    pub fn zero_window(k_min: i32, k_max: Option<i32>) -> Self {
        Self { k_min, k_max, coeffs: BTreeMap::new() }
    }

    /// The exact constant `c`.
    pub fn constant(c: GaussianRational) -> Self {
        let mut s = Self::zero_window(0, None);
        s.set(0, c);
        s
    }

    /// Exact monomial `c·ħ^k`.
    pub fn monomial(k: i32, c: GaussianRational) -> Self {
        let mut s = Self::zero_window(k, None);
        s.set(k, c);
        s
    }

    pub fn from_terms(k_min: i32, k_max: Option<i32>, terms: impl IntoIterator<Item = (i32, GaussianRational)>) -> Self {
        let mut s = Self::zero_window(k_min, k_max);
        for (k, c) in terms {
            let sum = s.coeffs.get(&k).map(|old| old + &c).unwrap_or(c);
            s.set(k, sum);
        }
        s
    }

    fn set(&mut self, k: i32, c: GaussianRational) {
        debug_assert!(k >= self.k_min, "order {k} below window start {}", self.k_min);
        if self.is_determined(k) {
            if c.is_zero() {
                self.coeffs.remove(&k);
            } else {
                self.coeffs.insert(k, c);
            }
        }
    }

    pub fn is_determined(&self, k: i32) -> bool {
        self.k_max.map_or(true, |m| k <= m)
    }

    /// `None` when the order lies above the known window.
    pub fn coeff(&self, k: i32) -> Option<GaussianRational> {
        if !self.is_determined(k) {
            return None;
        }
        Some(self.coeffs.get(&k).cloned().unwrap_or_default())
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &GaussianRational)> {
        self.coeffs.iter().map(|(k, c)| (*k, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let k_max = min_opt(self.k_max, o.k_max);
        let mut out = Self::zero_window(self.k_min.min(o.k_min), k_max);
        for (k, c) in self.coeffs.iter().chain(o.coeffs.iter()) {
            if out.is_determined(*k) {
                let sum = out.coeffs.get(k).map(|old| old + c).unwrap_or_else(|| c.clone());
                out.set(*k, sum);
            }
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self {
            k_min: self.k_min,
            k_max: self.k_max,
            coeffs: self.coeffs.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let k_min = self.k_min + o.k_min;
        let k_max = min_opt(self.k_max.map(|m| m + o.k_min), o.k_max.map(|m| m + self.k_min));
        let mut out = Self::zero_window(k_min, k_max);
        for (ka, ca) in &self.coeffs {
            for (kb, cb) in &o.coeffs {
                let k = ka + kb;
                if out.is_determined(k) {
                    let prod = ca * cb;
                    let sum = out.coeffs.get(&k).map(|old| old + &prod).unwrap_or(prod);
                    out.set(k, sum);
                }
            }
        }
        out
    }

    pub fn scale(&self, s: &GaussianRational) -> Self {
        Self::from_terms(self.k_min, self.k_max, self.coeffs.iter().map(|(k, c)| (*k, c * s)))
    }

    /// Multiplication by ħ^s.
    pub fn shift(&self, s: i32) -> Self {
        Self {
            k_min: self.k_min + s,
            k_max: self.k_max.map(|m| m + s),
            coeffs: self.coeffs.iter().map(|(k, c)| (k + s, c.clone())).collect(),
        }
    }

    /// Restricts the known window to orders `<= k_max`.
    pub fn truncate(&self, k_max: i32) -> Self {
        let k_max = min_opt(self.k_max, Some(k_max));
        let mut out = Self::zero_window(self.k_min, k_max);
        for (k, c) in &self.coeffs {
            if out.is_determined(*k) {
                out.coeffs.insert(*k, c.clone());
            }
        }
        out
    }

    /// True when both series agree on every order known to both.
    pub fn agrees_with(&self, o: &Self) -> bool {
        let hi = min_opt(self.k_max, o.k_max);
        let lo = self.k_min.min(o.k_min);
        let keys = self.coeffs.keys().chain(o.coeffs.keys()).copied().filter(|k| *k >= lo);
        for k in keys {
            if hi.map_or(true, |h| k <= h) && self.coeff(k) != o.coeff(k) {
                return false;
            }
        }
        true
    }
}

fn min_opt(a: Option<i32>, b: Option<i32>) -> Option<i32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl fmt::Display for HLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})·ħ")?,
                _ => write!(f, "({c})·ħ^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        match self.k_max {
            Some(m) => write!(f, " + O(ħ^{})", m + 1),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::GaussianRational as G;

    fn series(k_min: i32, k_max: Option<i32>, c: &[(i32, i64)]) -> HLaurent {
        HLaurent::from_terms(k_min, k_max, c.iter().map(|(k, v)| (*k, G::from_int(*v))))
    }

    #[test]
    fn product_window_is_the_determined_part() {
        // (ħ^-1 + 2 + O(ħ)) · (1 + 3ħ + O(ħ^2))
        let a = series(-1, Some(0), &[(-1, 1), (0, 2)]);
        let b = series(0, Some(1), &[(0, 1), (1, 3)]);
        let p = a.mul(&b);
        assert_eq!(p.k_min, -1);
        assert_eq!(p.k_max, Some(0));
        assert_eq!(p.coeff(-1), Some(G::from_int(1)));
        assert_eq!(p.coeff(0), Some(G::from_int(5)));
        assert_eq!(p.coeff(1), None);
    }

    #[test]
    fn sum_window_shrinks() {
        let a = series(0, Some(3), &[(0, 1), (3, 1)]);
        let b = series(-1, Some(1), &[(-1, 2)]);
        let s = a.add(&b);
        assert_eq!(s.k_max, Some(1));
        assert_eq!(s.coeff(3), None);
        assert_eq!(s.coeff(-1), Some(G::from_int(2)));
    }

    #[test]
    fn exact_times_truncated() {
        let a = HLaurent::monomial(-1, G::from_int(1));
        let b = series(0, Some(2), &[(0, 1), (2, 5)]);
        let p = a.mul(&b);
        assert_eq!(p.k_max, Some(1));
        assert_eq!(p.coeff(1), Some(G::from_int(5)));
    }

    #[test]
    fn agreement_on_overlap() {
        let a = series(0, Some(1), &[(0, 1), (1, 4)]);
        let b = series(0, Some(3), &[(0, 1), (1, 4), (2, 9)]);
        assert!(a.agrees_with(&b));
        assert!(!a.agrees_with(&series(0, Some(3), &[(0, 1)])));
    }
}
