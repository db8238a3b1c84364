use std::collections::BTreeMap;

use num_traits::Zero;

use crate::coefficients::Rational;
use crate::error::{Error, Result};
use crate::weyl_forms::{factorial, invert};

/// ε^{i₁…i₂ₙ} = ((−1)ⁿ/n!) Σ_ν (−1)^ν B^{i_ν(1) i_ν(2)} ⋯ B^{i_ν(2n−1) i_ν(2n)}.
///
/// Only components with pairwise distinct indices can be nonzero; they are
/// stored sparsely keyed by the index tuple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiouvilleTensor {
    dim: usize,
    components: BTreeMap<Vec<u8>, Rational>,
}

impl LiouvilleTensor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, idx: &[usize]) -> Rational {
        let key: Vec<u8> = idx.iter().map(|&i| i as u8).collect();
        self.components.get(&key).cloned().unwrap_or_else(Rational::zero)
    }

    /// Nonzero components in lexicographic order of the index tuple.
    pub fn nonzero(&self) -> impl Iterator<Item = (&[u8], &Rational)> {
        self.components.iter().map(|(k, v)| (k.as_slice(), v))
    }

    /// Negates a single component, breaking antisymmetry. Debug hook for
    /// mutation tests of the cocycle checks.
    pub fn corrupted(&self) -> Self {
        let mut out = self.clone();
        if let Some((_, v)) = out.components.iter_mut().next() {
            *v = -v.clone();
        }
        out
    }

    pub fn is_antisymmetric(&self) -> bool {
        self.components.iter().all(|(k, v)| {
            let idx: Vec<usize> = k.iter().map(|&i| i as usize).collect();
            (0..idx.len()).all(|a| {
                ((a + 1)..idx.len()).all(|b| {
                    let mut s = idx.clone();
                    s.swap(a, b);
                    self.get(&s) == -v.clone()
                })
            })
        })
    }
}

/// The Liouville tensor of the constant antisymmetric matrix `b`.
pub fn liouville_eps(b: &[Vec<Rational>]) -> Result<LiouvilleTensor> {
    let dim = b.len();
    if dim == 0 || dim % 2 != 0 || b.iter().any(|r| r.len() != dim) {
        return Err(Error::Dimension(format!("B must be square of even size, got {dim}")));
    }
    for i in 0..dim {
        for j in 0..dim {
            if b[i][j] != -b[j][i].clone() {
                return Err(Error::Geometry("B is not antisymmetric".into()));
            }
        }
    }
    invert(b).map_err(|_| Error::Arithmetic("B is singular".into()))?;
    let n = dim / 2;
    let pre = Rational::from_integer(if n % 2 == 0 { 1.into() } else { (-1).into() }) / factorial(n as u32);
    let perms = permutations(dim);
    let mut components = BTreeMap::new();
    for idx in permutations(dim) {
        let idx: Vec<usize> = idx.0;
        let mut s = Rational::zero();
        for (nu, sign) in &perms {
            let mut p = Rational::from_integer((*sign).into());
            for k in 0..n {
                p *= &b[idx[nu[2 * k]]][idx[nu[2 * k + 1]]];
                if p.is_zero() {
                    break;
                }
            }
            s += p;
        }
        s *= &pre;
        if !s.is_zero() {
            components.insert(idx.iter().map(|&i| i as u8).collect(), s);
        }
    }
    Ok(LiouvilleTensor { dim, components })
}

/// All permutations of 0..m with their signs, in lexicographic order.
pub fn permutations(m: usize) -> Vec<(Vec<usize>, i32)> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<(Vec<usize>, i32)>) {
        let m = used.len();
        if cur.len() == m {
            let mut inv = 0;
            for a in 0..m {
                for b in (a + 1)..m {
                    if cur[a] > cur[b] {
                        inv += 1;
                    }
                }
            }
            out.push((cur.clone(), if inv % 2 == 0 { 1 } else { -1 }));
            return;
        }
        for i in 0..m {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; m], &mut out);
    out
}

/// Pfaffian of a 2×2 or 4×4 antisymmetric matrix.
pub fn pfaffian(b: &[Vec<Rational>]) -> Option<Rational> {
    match b.len() {
        2 => Some(b[0][1].clone()),
        4 => Some(&b[0][1] * &b[2][3] - &b[0][2] * &b[1][3] + &b[0][3] * &b[1][2]),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::rat;

    fn unit2() -> Vec<Vec<Rational>> {
        vec![vec![rat(0, 1), rat(1, 1)], vec![rat(-1, 1), rat(0, 1)]]
    }

    #[test]
    fn two_dimensional_value() {
        let e = liouville_eps(&unit2()).unwrap();
        assert_eq!(e.get(&[0, 1]), rat(-2, 1));
        assert_eq!(e.get(&[1, 0]), rat(2, 1));
        assert_eq!(e.get(&[0, 0]), rat(0, 1));
        assert!(e.is_antisymmetric());
        assert!(!e.corrupted().is_antisymmetric());
    }

    #[test]
    fn four_dimensional_matches_pfaffian() {
        let b = vec![
            vec![rat(0, 1), rat(3, 2), rat(1, 1), rat(0, 1)],
            vec![rat(-3, 2), rat(0, 1), rat(2, 1), rat(-1, 3)],
            vec![rat(-1, 1), rat(-2, 1), rat(0, 1), rat(5, 1)],
            vec![rat(0, 1), rat(1, 3), rat(-5, 1), rat(0, 1)],
        ];
        let e = liouville_eps(&b).unwrap();
        let pf = pfaffian(&b).unwrap();
        for (p, s) in permutations(4) {
            assert_eq!(e.get(&p), Rational::from_integer(s.into()) * rat(4, 1) * &pf);
        }
        assert!(e.is_antisymmetric());
        assert_eq!(e.nonzero().count(), 24);
    }

    #[test]
    fn singular_rejected() {
        let z = vec![vec![rat(0, 1); 2]; 2];
        assert!(liouville_eps(&z).is_err());
    }

    #[test]
    fn permutation_signs() {
        let p = permutations(3);
        assert_eq!(p.len(), 6);
        assert_eq!(p.iter().map(|x| x.1).sum::<i32>(), 0);
        assert!(p.iter().any(|(v, s)| v == &vec![1, 0, 2] && *s == -1));
    }
}
