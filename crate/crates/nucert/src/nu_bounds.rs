//! Lower bounds for the section-counting invariant nu(L; E).
//!
//! For divisors L, E on a surface put S_n = sum_{k>=1} h0(nL - kE) and
//! nu(L; E) = liminf_n S_n / (n h0(nL)). Three estimates live here:
//!
//! * [`morse_lower_bound`]: the quadratic Q(n, k) with h0(nL - kE) >= Q(n, k),
//!   valid for 1 <= k <= n (L.E)/E^2,
//! * [`nu_lower_bound`]: the closed-form limit of summing Q, a certified lower
//!   bound for nu(L; E) depending only on L^2, L.E, E^2,
//! * [`truncated_nu`]: the exact finite-n quotient S_n / (n h0(nL)) through a
//!   section-counting oracle.

use num::rational::BigRational;
use num::BigInt;

use crate::rational::{big, ratio};
use crate::toric::ToricDivisor;
use crate::Error;

/// Gives up if section counts fail to vanish after this many k-steps; the
/// toric and curve oracles always vanish long before.
const MAX_TRUNCATION_STEPS: u64 = 1_000_000;

/// The three intersection numbers (L^2, L.E, E^2) of a pair of positive
/// divisor classes on a surface.
///
/// All three must be positive, and the pair must satisfy the Hodge index
/// inequality (L.E)^2 >= L^2 E^2, as any pair of ample classes does. Both are
/// checked at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurfacePair {
    l_sq: i64,
    l_dot_e: i64,
    e_sq: i64,
}

impl SurfacePair {
    pub fn new(l_sq: i64, l_dot_e: i64, e_sq: i64) -> Result<Self, Error> {
        if l_sq <= 0 || l_dot_e <= 0 || e_sq <= 0 {
            return Err(Error::InvalidInput(format!(
                "surface pair needs positive intersection numbers, got L^2 = {l_sq}, L.E = {l_dot_e}, E^2 = {e_sq}"
            )));
        }
        let lhs = i128::from(l_dot_e) * i128::from(l_dot_e);
        let rhs = i128::from(l_sq) * i128::from(e_sq);
        if lhs < rhs {
            return Err(Error::InvalidInput(format!(
                "surface pair violates the Hodge index inequality: (L.E)^2 = {lhs} < L^2 E^2 = {rhs}"
            )));
        }
        Ok(SurfacePair { l_sq, l_dot_e, e_sq })
    }

    /// Reads the three intersection numbers off a pair of toric divisors.
    pub fn from_divisors(l: &ToricDivisor, e: &ToricDivisor) -> Result<Self, Error> {
        let l_sq = l.intersection_number(l)?;
        let l_dot_e = l.intersection_number(e)?;
        let e_sq = e.intersection_number(e)?;
        SurfacePair::new(l_sq, l_dot_e, e_sq)
    }

    pub fn l_sq(&self) -> i64 {
        self.l_sq
    }

    pub fn l_dot_e(&self) -> i64 {
        self.l_dot_e
    }

    pub fn e_sq(&self) -> i64 {
        self.e_sq
    }
}

/// Exact lower bound for h0(nL - kE): Q(n, k) = L^2 n^2/2 - (L.E) nk + E^2 k^2/2.
///
/// Valid in the range 1 <= k <= n (L.E)/E^2; outside it the call fails with a
/// precondition error. The value may be negative near the upper end of the
/// range, where it is a true but empty bound.
pub fn morse_lower_bound(pair: &SurfacePair, n: u64, k: u64) -> Result<BigRational, Error> {
    if n == 0 || k == 0 {
        return Err(Error::Precondition(format!("Morse bound needs n >= 1 and k >= 1, got n = {n}, k = {k}")));
    }
    let n_i = i128::from(n);
    let k_i = i128::from(k);
    if k_i * i128::from(pair.e_sq) > n_i * i128::from(pair.l_dot_e) {
        return Err(Error::Precondition(format!(
            "Morse bound needs k <= n (L.E)/E^2, got k = {k}, n = {n}, L.E = {}, E^2 = {}",
            pair.l_dot_e, pair.e_sq
        )));
    }
    // Q(n, k) over a common denominator 2.
    let twice = i128::from(pair.l_sq) * n_i * n_i - 2 * i128::from(pair.l_dot_e) * n_i * k_i
        + i128::from(pair.e_sq) * k_i * k_i;
    Ok(BigRational::new(BigInt::from(twice), BigInt::from(2)))
}

/// Certified asymptotic lower bound for nu(L; E) from intersection numbers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct NuBound(pub BigRational);

impl NuBound {
    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn as_f64(&self) -> f64 {
        let n = self.0.numer();
        let d = self.0.denom();
        // Within this crate's coefficient limits both parts fit comfortably.
        let to_f64 = |x: &BigInt| -> f64 {
            let s = x.to_string();
            s.parse().expect("decimal integer parses as f64")
        };
        to_f64(n) / to_f64(d)
    }
}

/// nu(L; E) >= beta/4 + beta^2/(24 alpha) where beta = L^2/(L.E) and
/// alpha = (L.E)/E^2, obtained by summing the Morse bound over k and n.
///
/// The bound scales linearly when L is scaled: replacing L by cL multiplies it
/// by c, matching nu itself.
pub fn nu_lower_bound(pair: &SurfacePair) -> NuBound {
    let beta = ratio(pair.l_sq, pair.l_dot_e);
    let alpha = ratio(pair.l_dot_e, pair.e_sq);
    let value = &beta / big(4) + &beta * &beta / (big(24) * alpha);
    NuBound(value)
}

/// nu(O(a); O(b)) on the projective line: exactly a/(2b).
pub fn curve_nu(a: i64, b: i64) -> Result<BigRational, Error> {
    if a <= 0 || b <= 0 {
        return Err(Error::InvalidInput(format!("curve degrees must be positive, got a = {a}, b = {b}")));
    }
    Ok(ratio(a, 2 * b))
}

/// Counts h0(nL - kE) for the fixed pair behind the oracle. k = 0 means
/// h0(nL) itself. Counts must eventually vanish in k for every fixed n.
pub trait SectionOracle {
    fn h0(&self, n: u64, k: u64) -> u64;
}

/// Exact truncated quotient S_n / (n h0(nL)) with S_n = sum_{k>=1} h0(nL - kE).
///
/// The sum stops at the first k with h0 = 0, which for the oracles in this
/// crate is where it stays zero. Fails if h0(nL) = 0.
pub fn truncated_nu<O: SectionOracle + ?Sized>(oracle: &O, n: u64) -> Result<BigRational, Error> {
    let (h0_nl, s_n) = section_sum(oracle, n)?;
    Ok(ratio(
        i64::try_from(s_n).map_err(|_| Error::InvalidInput("section sum overflow".into()))?,
        i64::try_from(n * h0_nl).map_err(|_| Error::InvalidInput("section count overflow".into()))?,
    ))
}

/// (h0(nL), S_n) for one n through the oracle.
pub fn section_sum<O: SectionOracle + ?Sized>(oracle: &O, n: u64) -> Result<(u64, u64), Error> {
    if n == 0 {
        return Err(Error::Precondition("truncation level n must be at least 1".into()));
    }
    let h0_nl = oracle.h0(n, 0);
    if h0_nl == 0 {
        return Err(Error::Precondition(format!("h0(nL) = 0 at n = {n}, the quotient is undefined")));
    }
    let mut s_n: u64 = 0;
    let mut k: u64 = 1;
    loop {
        let value = oracle.h0(n, k);
        if value == 0 {
            break;
        }
        s_n = s_n.checked_add(value).ok_or_else(|| Error::InvalidInput("section sum overflow".into()))?;
        k += 1;
        if k > MAX_TRUNCATION_STEPS {
            return Err(Error::Precondition(format!(
                "section counts did not vanish within {MAX_TRUNCATION_STEPS} steps at n = {n}"
            )));
        }
    }
    Ok((h0_nl, s_n))
}

/// Minimum of the truncated quotient over n = 1..=window.
pub fn windowed_nu_min<O: SectionOracle + ?Sized>(oracle: &O, window: u64) -> Result<BigRational, Error> {
    if window == 0 {
        return Err(Error::Precondition("window must be at least 1".into()));
    }
    let mut best: Option<BigRational> = None;
    for n in 1..=window {
        let value = truncated_nu(oracle, n)?;
        best = Some(match best {
            None => value,
            Some(cur) => {
                if value < cur {
                    value
                } else {
                    cur
                }
            }
        });
    }
    Ok(best.expect("window is nonempty"))
}

/// True when the truncated quotient is nonnegative and finite in the trivial
/// sense of having been computable at all; exposed for report plumbing.
pub fn nu_is_defined<O: SectionOracle + ?Sized>(oracle: &O, n: u64) -> bool {
    n >= 1 && oracle.h0(n, 0) > 0
}
