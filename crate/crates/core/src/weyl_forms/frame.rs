use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::coefficients::{rat, Rational};
use crate::error::{Error, Result};

/// Constant symplectic structure on a chart: ω_ij and the Poisson tensor ω^{ij}.
///
/// The two-form is ω = ω_ij dxⁱdxʲ summed over all ordered pairs, so with
/// ω_12 = 1/2 it equals dx¹dx².
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct SymplecticFrame {
    dim: usize,
    #[serde(with = "matrix_serde")]
    lower: Vec<Vec<Rational>>,
    #[serde(with = "matrix_serde")]
    upper: Vec<Vec<Rational>>,
}

impl SymplecticFrame {
    /// Builds the frame from ω_ij, inverting to get ω^{ij}.
    pub fn from_lower(lower: Vec<Vec<Rational>>) -> Result<Self> {
        let upper = invert(&lower)?;
        Self::new(lower, upper)
    }

    /// Builds the frame from a Poisson tensor B = ω^{ij}.
    pub fn from_upper(upper: Vec<Vec<Rational>>) -> Result<Self> {
        let lower = invert(&upper)?;
        Self::new(lower, upper)
    }

    pub fn new(lower: Vec<Vec<Rational>>, upper: Vec<Vec<Rational>>) -> Result<Self> {
        let dim = lower.len();
        if ![2, 4].contains(&dim) {
            return Err(Error::Dimension(format!("chart dimension {dim} (supported: 2, 4)")));
        }
        for m in [&lower, &upper] {
            if m.len() != dim || m.iter().any(|r| r.len() != dim) {
                return Err(Error::Dimension("symplectic matrices must be square of the chart dimension".into()));
            }
            for i in 0..dim {
                for j in 0..dim {
                    if m[i][j] != -m[j][i].clone() {
                        return Err(Error::Geometry(format!("matrix not antisymmetric at ({}, {})", i + 1, j + 1)));
                    }
                }
            }
        }
        for i in 0..dim {
            for j in 0..dim {
                let s: Rational = (0..dim).map(|k| &lower[i][k] * &upper[k][j]).sum();
                let want = if i == j { Rational::one() } else { Rational::zero() };
                if s != want {
                    return Err(Error::Geometry("ω_ik ω^{kj} ≠ δ_i^j".into()));
                }
            }
        }
        Ok(Self { dim, lower, upper })
    }

    /// Darboux frame with ω_{2k-1,2k} = c on every block.
    pub fn darboux(dim: usize, c: Rational) -> Result<Self> {
        let mut lower = vec![vec![Rational::zero(); dim]; dim];
        for k in 0..dim / 2 {
            lower[2 * k][2 * k + 1] = c.clone();
            lower[2 * k + 1][2 * k] = -c.clone();
        }
        Self::from_lower(lower)
    }

    /// The frame with ω_{2k-1,2k} = 1/2, i.e. ω = Σ dx^{2k-1}dx^{2k}.
    pub fn standard(dim: usize) -> Result<Self> {
        Self::darboux(dim, rat(1, 2))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.dim / 2
    }

    pub fn lower(&self, i: usize, j: usize) -> &Rational {
        &self.lower[i][j]
    }

    pub fn upper(&self, i: usize, j: usize) -> &Rational {
        &self.upper[i][j]
    }

    pub fn lower_matrix(&self) -> &[Vec<Rational>] {
        &self.lower
    }

    pub fn upper_matrix(&self) -> &[Vec<Rational>] {
        &self.upper
    }

    /// Ordered pairs (i, j) with ω^{ij} ≠ 0.
    pub fn poisson_support(&self) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for i in 0..self.dim {
            for j in 0..self.dim {
                if !self.upper[i][j].is_zero() {
                    v.push((i, j));
                }
            }
        }
        v
    }
}

/// Exact Gauss–Jordan inverse.
pub fn invert(m: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut inv: Vec<Vec<Rational>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect()).collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero()).ok_or_else(|| Error::Arithmetic("singular matrix".into()))?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] = &a[col][j] / &p;
            inv[col][j] = &inv[col][j] / &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in 0..n {
                    let t = &f * &a[col][j];
                    a[r][j] -= t;
                    let t = &f * &inv[col][j];
                    inv[r][j] -= t;
                }
            }
        }
    }
    Ok(inv)
}

mod matrix_serde {
    use crate::coefficients::{format_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<Vec<String>> = m.iter().map(|r| r.iter().map(format_rational).collect()).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rational>>, D::Error> {
        let v: Vec<Vec<String>> = Vec::deserialize(d)?;
        v.iter()
            .map(|r| r.iter().map(|s| parse_rational(s).map_err(serde::de::Error::custom)).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_frame_inverse() {
        let f = SymplecticFrame::standard(2).unwrap();
        assert_eq!(f.upper(0, 1), &rat(-2, 1));
        let g = SymplecticFrame::from_upper(vec![vec![rat(0, 1), rat(1, 1)], vec![rat(-1, 1), rat(0, 1)]]).unwrap();
        assert_eq!(g.lower(0, 1), &rat(-1, 1));
    }

    #[test]
    fn rejects_bad_input() {
        let sym = vec![vec![rat(0, 1), rat(1, 1)], vec![rat(1, 1), rat(0, 1)]];
        assert!(SymplecticFrame::from_lower(sym).is_err());
        assert!(SymplecticFrame::darboux(3, rat(1, 1)).is_err());
        let wrong_inverse = vec![vec![rat(0, 1), rat(1, 1)], vec![rat(-1, 1), rat(0, 1)]];
        assert!(SymplecticFrame::new(wrong_inverse.clone(), wrong_inverse).is_err());
    }
}
