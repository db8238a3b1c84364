//! Exact scalars and the two coefficient-function rings on a chart.
//!
//! Everything here is exact: [`Rational`] is an arbitrary-precision
//! fraction, [`GaussianRational`] adds `i`, [`HLaurent`] is a truncated
//! Laurent series in ħ with explicit bookkeeping of which orders are known,
//! and [`ChartFunction`] is either a polynomial jet or a finite Fourier sum
//! with period 2π per axis.

mod chart;
mod gaussian;
mod laurent;

pub use chart::{ChartFunction, ChartRing, MultiIndex, MAX_DIM};
pub use gaussian::GaussianRational;
pub use laurent::HLaurent;

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// `"p/q"`, with `q` omitted when it is 1.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse { pos: 0, msg: format!("not a rational: {s:?}") };
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q == BigInt::from(0) {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(p.into(), q.into())
}
