//! Exact rational helpers: construction shortcuts and the canonical `"p/q"`
//! wire format used by every JSON document this crate emits.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::Zero;

use crate::Error;

pub fn big(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn big_u(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Canonical serialization: always `p/q`, lowest terms, `q > 0`, sign on `p`.
/// Integers print as `p/1`.
pub fn format_ratio(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Exact inverse of [`format_ratio`] on values. Also accepts a bare integer
/// `p` (read as `p/1`) and non-canonical fractions, which are reduced.
pub fn parse_ratio(s: &str) -> Result<BigRational, Error> {
    let (np, dp) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let numer: BigInt = np
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("cannot parse rational {s:?}: bad numerator")))?;
    let denom: BigInt = dp
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("cannot parse rational {s:?}: bad denominator")))?;
    if denom.is_zero() {
        return Err(Error::InvalidInput(format!("cannot parse rational {s:?}: zero denominator")));
    }
    Ok(BigRational::new(numer, denom))
}

pub fn format_all(xs: &[BigRational]) -> Vec<String> {
    xs.iter().map(format_ratio).collect()
}
