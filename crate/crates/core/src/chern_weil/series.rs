use num_traits::{One, Zero};

use crate::coefficients::Rational;
use crate::error::{Error, Result};
use crate::weyl_forms::factorial;

/// Truncated power series Σ cₖ xᵏ, k < len, with exact coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerSeries(pub Vec<Rational>);

impl PowerSeries {
    pub fn zero(len: usize) -> Self {
        Self(vec![Rational::zero(); len])
    }

    pub fn one(len: usize) -> Self {
        let mut s = Self::zero(len);
        if len > 0 {
            s.0[0] = Rational::one();
        }
        s
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.len().min(o.len());
        let mut out = Self::zero(n);
        for (i, a) in self.0.iter().enumerate().take(n) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.0.iter().enumerate().take(n - i) {
                out.0[i + j] += a * b;
            }
        }
        out
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self(self.0.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.len().min(o.len());
        Self((0..n).map(|i| &self.0[i] + &o.0[i]).collect())
    }

    /// 1/s, requiring s₀ ≠ 0.
    pub fn inv(&self) -> Result<Self> {
        let n = self.len();
        let c0 = self.0.first().filter(|c| !c.is_zero()).ok_or_else(|| Error::Arithmetic("series not invertible".into()))?;
        let mut out = Self::zero(n);
        out.0[0] = Rational::one() / c0;
        for k in 1..n {
            let mut s = Rational::zero();
            for j in 1..=k {
                s += &self.0[j] * &out.0[k - j];
            }
            out.0[k] = -s / c0;
        }
        Ok(out)
    }

    /// log s for s₀ = 1, from (log s)' = s'/s.
    pub fn log(&self) -> Result<Self> {
        if self.0.first() != Some(&Rational::one()) {
            return Err(Error::Arithmetic("log needs constant term 1".into()));
        }
        let n = self.len();
        let d = self.derivative();
        let q = d.mul(&self.inv()?);
        let mut out = Self::zero(n);
        for k in 1..n {
            out.0[k] = &q.0[k - 1] / Rational::from_integer((k as i64).into());
        }
        Ok(out)
    }

    /// exp s for s₀ = 0, from e' = s'e.
    pub fn exp(&self) -> Result<Self> {
        if self.0.first().map_or(false, |c| !c.is_zero()) {
            return Err(Error::Arithmetic("exp needs constant term 0".into()));
        }
        let n = self.len();
        let d = self.derivative();
        let mut out = Self::zero(n);
        if n == 0 {
            return Ok(out);
        }
        out.0[0] = Rational::one();
        for k in 1..n {
            let mut s = Rational::zero();
            for j in 0..k {
                if j < d.len() {
                    s += &d.0[j] * &out.0[k - 1 - j];
                }
            }
            out.0[k] = s / Rational::from_integer((k as i64).into());
        }
        Ok(out)
    }

    fn derivative(&self) -> Self {
        let n = self.len();
        let mut out = Self::zero(n.saturating_sub(1));
        for k in 1..n {
            out.0[k - 1] = &self.0[k] * Rational::from_integer((k as i64).into());
        }
        out
    }
}

/// sinh(t·x)/(t·x) = Σ t^{2k} x^{2k}/(2k+1)!.
pub fn sinhc(len: usize, t: &Rational) -> PowerSeries {
    let mut s = PowerSeries::zero(len);
    let t2 = t * t;
    let mut tp = Rational::one();
    for k in (0..len).step_by(2) {
        s.0[k] = &tp / factorial(k as u32 + 1);
        tp *= &t2;
    }
    s
}

/// (x/sinh x)^{1/2} through x^{len−1}.
pub fn ahat_scalar(len: usize) -> Result<PowerSeries> {
    let inv = sinhc(len, &Rational::one()).inv()?;
    inv.log()?.scale(&Rational::new(1.into(), 2.into())).exp()
}

/// log((x/2)/sinh(x/2)) through x^{len−1}; only even powers are nonzero.
pub fn log_ahat_kernel(len: usize) -> Result<PowerSeries> {
    Ok(sinhc(len, &Rational::new(1.into(), 2.into())).log()?.scale(&-Rational::one()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::rat;

    #[test]
    fn exp_log_roundtrip() {
        let s = PowerSeries(vec![rat(0, 1), rat(1, 1), rat(-2, 3), rat(5, 7), rat(0, 1)]);
        assert_eq!(s.exp().unwrap().log().unwrap(), s);
    }

    #[test]
    fn inverse() {
        let s = sinhc(7, &rat(1, 1));
        assert_eq!(s.mul(&s.inv().unwrap()), PowerSeries::one(7));
    }

    #[test]
    fn kernel_coefficients() {
        // log((x/2)/sinh(x/2)) = −x²/24 + x⁴/2880 − x⁶/181440 + …
        let k = log_ahat_kernel(9).unwrap();
        assert_eq!(k.0[2], rat(-1, 24));
        assert_eq!(k.0[4], rat(1, 2880));
        assert_eq!(k.0[6], rat(-1, 181440));
        assert_eq!(k.0[8], rat(1, 9676800));
        assert!(k.0.iter().step_by(2).count() > 0 && k.0.iter().skip(1).step_by(2).all(|c| c.is_zero()));
    }
}
