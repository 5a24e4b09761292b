//! Equalizing weights and exact certificates.
//!
//! For an intersection matrix G of ample divisors D_1..D_r, the map sends a
//! simplex point t to the normalized reciprocals of (Gt)_i = <L_t . D_i>,
//! L_t = sum t_i D_i. A fixed point equalizes the products t_i (Gt)_i, and at
//! such a point every divisor clears the strict margin
//!
//!   <L^2>/<L.D_i> + <L^2>^2 <D_i^2> / (6 <L.D_i>^3) - r t_i > 0,
//!
//! which is an open condition. [`solve_fixed_point`] finds the point in
//! floating point, [`rationalize`] moves to a nearby rational simplex point
//! where the margins are verified in exact arithmetic, and the result is an
//! integer certificate: multiplicities m_i with sum m_i = denominator such
//! that nu(sum m_i D_i; D_i) > (r/4) m_i for every i.

use num::rational::BigRational;
use num::{FromPrimitive, Signed, ToPrimitive, Zero};

use crate::intersection::{DivisorWeights, IntersectionForm, Scalar};
use crate::rational::{big, big_u, ratio};
use crate::Error;

/// One application of the equalizing map: t -> normalized 1/(Gt)_i.
///
/// Defined whenever every (Gt)_i is positive, which holds for any simplex
/// point once the matrix has positive entries.
pub fn fixed_point_map<S: Scalar>(
    form: &IntersectionForm,
    t: &DivisorWeights<S>,
) -> Result<DivisorWeights<S>, Error> {
    let pairing = form.pairing(t)?;
    let mut reciprocals = Vec::with_capacity(form.r());
    let mut total = S::zero();
    for value in &pairing.lt_dot_di {
        if !(value > &S::zero()) {
            return Err(Error::Precondition("the map needs <L_t . D_i> > 0 for every i".into()));
        }
        let rec = S::one() / value.clone();
        total = total + rec.clone();
        reciprocals.push(rec);
    }
    let coords = reciprocals.into_iter().map(|v| v / total.clone()).collect();
    Ok(DivisorWeights::new_unchecked(coords))
}

/// Numerical fixed point of the equalizing map.
#[derive(Debug, Clone)]
pub struct FixedPointResult {
    pub x: DivisorWeights<f64>,
    /// Common value of x_i (Gx)_i at the fixed point.
    pub phi: f64,
    /// max_i |x_i (Gx)_i - phi(x)| at the returned point.
    pub residual: f64,
    pub iterations: u64,
}

fn pairing_values(form: &IntersectionForm, x: &[f64]) -> Vec<f64> {
    let r = form.r();
    (0..r).map(|i| (0..r).map(|j| form.entry(i, j) as f64 * x[j]).sum()).collect()
}

fn phi_of(gx: &[f64]) -> f64 {
    let total: f64 = gx.iter().map(|v| 1.0 / v).sum();
    1.0 / total
}

fn residual_of(x: &[f64], gx: &[f64]) -> f64 {
    let phi = phi_of(gx);
    x.iter().zip(gx).map(|(xi, gi)| (xi * gi - phi).abs()).fold(0.0, f64::max)
}

/// Gaussian elimination with partial pivoting; None on a singular system.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot_row = (col..n).max_by(|&p, &q| {
            a[p][col].abs().partial_cmp(&a[q][col].abs()).expect("finite entries")
        })?;
        if a[pivot_row][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in (row + 1)..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Newton step for the system
///   F_i = x_i (Gx)_i - x_{i+1} (Gx)_{i+1}   (i < r-1)
///   F_{r-1} = sum x_i - 1.
fn newton_step(form: &IntersectionForm, x: &[f64]) -> Option<Vec<f64>> {
    let r = form.r();
    let gx = pairing_values(form, x);
    let mut jac = vec![vec![0.0; r]; r];
    let mut rhs = vec![0.0; r];
    for i in 0..(r - 1) {
        rhs[i] = -(x[i] * gx[i] - x[i + 1] * gx[i + 1]);
        for j in 0..r {
            let mut v = x[i] * form.entry(i, j) as f64 - x[i + 1] * form.entry(i + 1, j) as f64;
            if j == i {
                v += gx[i];
            }
            if j == i + 1 {
                v -= gx[i + 1];
            }
            jac[i][j] = v;
        }
    }
    for j in 0..r {
        jac[r - 1][j] = 1.0;
    }
    rhs[r - 1] = -(x.iter().sum::<f64>() - 1.0);
    let delta = solve_linear(jac, rhs)?;
    // Backtrack into the open simplex, then far enough that the residual
    // does not get worse.
    let base_res = residual_of(x, &gx);
    let mut step = 1.0;
    for _ in 0..60 {
        let candidate: Vec<f64> = x.iter().zip(&delta).map(|(xi, di)| xi + step * di).collect();
        if candidate.iter().all(|&v| v > 0.0) {
            let cand_res = residual_of(&candidate, &pairing_values(form, &candidate));
            if cand_res <= base_res {
                return Some(candidate);
            }
        }
        step /= 2.0;
    }
    None
}

/// Finds the equalizing fixed point: damped iteration of the map, then Newton
/// refinement, stopping when the residual drops to `tolerance`.
pub fn solve_fixed_point(
    form: &IntersectionForm,
    tolerance: f64,
    max_iter: u64,
) -> Result<FixedPointResult, Error> {
    form.require_valid()?;
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tolerance}")));
    }
    if max_iter == 0 {
        return Err(Error::InvalidInput("iteration budget must be positive".into()));
    }
    let r = form.r();
    let mut x: Vec<f64> = vec![1.0 / r as f64; r];
    let mut best = x.clone();
    let mut best_residual = residual_of(&x, &pairing_values(form, &x));
    let mut iterations: u64 = 0;

    let finish = |x: Vec<f64>, residual: f64, iterations: u64| {
        let gx = pairing_values(form, &x);
        let phi = phi_of(&gx);
        FixedPointResult { x: DivisorWeights::new_unchecked(x), phi, residual, iterations }
    };

    let damped_budget = (max_iter / 2).max(1);
    while iterations < damped_budget {
        if best_residual <= tolerance {
            return Ok(finish(best, best_residual, iterations));
        }
        let weights = DivisorWeights::new_unchecked(x.clone());
        let mapped = fixed_point_map(form, &weights)?;
        x = x
            .iter()
            .zip(mapped.coords())
            .map(|(old, new)| 0.5 * (old + new))
            .collect();
        iterations += 1;
        let residual = residual_of(&x, &pairing_values(form, &x));
        if residual < best_residual {
            best = x.clone();
            best_residual = residual;
        }
    }

    while iterations < max_iter {
        if best_residual <= tolerance {
            return Ok(finish(best, best_residual, iterations));
        }
        match newton_step(form, &x) {
            Some(next) => x = next,
            None => {
                // Singular or stalled Newton system: fall back to one damped
                // map application and try again.
                let weights = DivisorWeights::new_unchecked(x.clone());
                let mapped = fixed_point_map(form, &weights)?;
                x = x.iter().zip(mapped.coords()).map(|(old, new)| 0.5 * (old + new)).collect();
            }
        }
        iterations += 1;
        let residual = residual_of(&x, &pairing_values(form, &x));
        if residual < best_residual {
            best = x.clone();
            best_residual = residual;
        }
    }

    if best_residual <= tolerance {
        return Ok(finish(best, best_residual, iterations));
    }
    Err(Error::NonConvergence { best_residual, iterations })
}

/// Exact margin of divisor i at a rational simplex point:
/// <L^2>/<L.D_i> + <L^2>^2 <D_i^2>/(6 <L.D_i>^3) - r t_i.
pub fn strict_margin(
    form: &IntersectionForm,
    weights: &DivisorWeights<BigRational>,
    i: usize,
) -> Result<BigRational, Error> {
    let margins = all_margins(form, weights)?;
    margins
        .into_iter()
        .nth(i)
        .ok_or_else(|| Error::InvalidInput(format!("divisor index {i} out of range")))
}

/// All r margins at once; the certificate demands every one positive.
pub fn all_margins(
    form: &IntersectionForm,
    weights: &DivisorWeights<BigRational>,
) -> Result<Vec<BigRational>, Error> {
    let bounds = bound_pairs(form, weights)?;
    Ok(bounds.into_iter().map(|b| b.lhs - b.rhs).collect())
}

/// Certified inequality for one divisor, stated as lhs > rhs with
/// lhs = 4 nu_lb(L_t; D_i) and rhs = r t_i.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundPair {
    pub lhs: BigRational,
    pub rhs: BigRational,
}

/// The certified pairs at a rational simplex point.
pub fn bound_pairs(
    form: &IntersectionForm,
    weights: &DivisorWeights<BigRational>,
) -> Result<Vec<BoundPair>, Error> {
    let pairing = form.pairing(weights)?;
    let r = form.r();
    let lt_sq = &pairing.lt_squared;
    if !(lt_sq > &BigRational::zero()) {
        return Err(Error::Precondition("margins need <L_t^2> > 0".into()));
    }
    let mut out = Vec::with_capacity(r);
    for i in 0..r {
        let ld = &pairing.lt_dot_di[i];
        if !(ld > &BigRational::zero()) {
            return Err(Error::Precondition("margins need <L_t . D_i> > 0".into()));
        }
        let d_sq = big(form.entry(i, i));
        let ld_cubed = ld * ld * ld;
        let lhs = lt_sq / ld + lt_sq * lt_sq * d_sq / (big(6) * ld_cubed);
        let rhs = big(r as i64) * &weights.coords()[i];
        out.push(BoundPair { lhs, rhs });
    }
    Ok(out)
}

fn apportion(targets: &[BigRational], total: u64) -> Vec<u64> {
    let m = big_u(total);
    let mut floors: Vec<u64> = Vec::with_capacity(targets.len());
    let mut remainders: Vec<BigRational> = Vec::with_capacity(targets.len());
    for t in targets {
        let scaled = t * &m;
        let floor = scaled.floor();
        remainders.push(&scaled - &floor);
        floors.push(floor.to_integer().to_u64().expect("apportionment floor fits u64"));
    }
    let assigned: u64 = floors.iter().sum();
    let missing = total - assigned;
    let mut order: Vec<usize> = (0..targets.len()).collect();
    order.sort_by(|&a, &b| remainders[b].cmp(&remainders[a]).then(a.cmp(&b)));
    for &i in order.iter().take(missing as usize) {
        floors[i] += 1;
    }
    // Lift zeros to 1, taking from the currently largest coordinate. The sum
    // stays fixed, and with total >= r the largest coordinate exceeds 1 while
    // any zero remains.
    loop {
        let Some(zero_at) = floors.iter().position(|&v| v == 0) else {
            break;
        };
        let max_val = *floors.iter().max().expect("nonempty");
        debug_assert!(max_val >= 2);
        let max_at = floors.iter().position(|&v| v == max_val).expect("max exists");
        floors[max_at] -= 1;
        floors[zero_at] = 1;
    }
    floors
}

/// Integer certificate: multiplicities m_i summing to `denominator`, with the
/// per-divisor inequalities stored exactly.
///
/// The content is the statement that for L = sum m_i D_i every divisor
/// satisfies nu(L; D_i) > (r/4) m_i, witnessed by
/// denominator * lhs_i / 4 > denominator * rhs_i / 4 = (r/4) m_i, where the
/// left side is a proven lower bound for nu(L; D_i).
#[derive(Debug, Clone, PartialEq)]
pub struct NuCertificate {
    r: usize,
    m: Vec<u64>,
    denominator: u64,
    per_divisor: Vec<BoundPair>,
    residual: f64,
    assumed_ample: bool,
}

impl NuCertificate {
    pub fn from_parts(
        m: Vec<u64>,
        denominator: u64,
        per_divisor: Vec<BoundPair>,
        residual: f64,
        assumed_ample: bool,
    ) -> Result<Self, Error> {
        let r = m.len();
        if r == 0 {
            return Err(Error::CertificateInvalid("certificate has no multiplicities".into()));
        }
        if per_divisor.len() != r {
            return Err(Error::CertificateInvalid(format!(
                "certificate has {r} multiplicities but {} bound pairs",
                per_divisor.len()
            )));
        }
        if denominator == 0 {
            return Err(Error::CertificateInvalid("certificate denominator is zero".into()));
        }
        Ok(NuCertificate { r, m, denominator, per_divisor, residual, assumed_ample })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn multiplicities(&self) -> &[u64] {
        &self.m
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn per_divisor(&self) -> &[BoundPair] {
        &self.per_divisor
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn assumed_ample(&self) -> bool {
        self.assumed_ample
    }

    /// The rational simplex point m_i / denominator behind the certificate.
    pub fn weights(&self) -> DivisorWeights<BigRational> {
        let denom = big_u(self.denominator);
        let coords = self.m.iter().map(|&mi| big_u(mi) / &denom).collect();
        DivisorWeights::new_unchecked(coords)
    }

    /// Margins lhs_i - rhs_i; all positive in a valid certificate.
    pub fn margins(&self) -> Vec<BigRational> {
        self.per_divisor.iter().map(|b| &b.lhs - &b.rhs).collect()
    }

    /// Certified lower bound for nu(sum m_j D_j; D_i): denominator * lhs_i / 4.
    pub fn scaled_nu_lower_bounds(&self) -> Vec<BigRational> {
        let scale = ratio(1, 4) * big_u(self.denominator);
        self.per_divisor.iter().map(|b| &b.lhs * &scale).collect()
    }

    /// Full exact re-verification against the intersection matrix.
    ///
    /// Recomputes both sides of every inequality from the matrix and the
    /// multiplicities; any discrepancy with the stored values, a non-positive
    /// margin, or a structural defect rejects the certificate.
    pub fn verify(&self, form: &IntersectionForm) -> Result<(), Error> {
        form.require_valid().map_err(|e| Error::CertificateInvalid(format!("intersection matrix rejected: {e}")))?;
        if form.r() != self.r {
            return Err(Error::CertificateInvalid(format!(
                "certificate is for {} divisors, matrix has {}",
                self.r,
                form.r()
            )));
        }
        if self.m.len() != self.r || self.per_divisor.len() != self.r {
            return Err(Error::CertificateInvalid("certificate field lengths disagree".into()));
        }
        if self.m.iter().any(|&mi| mi == 0) {
            return Err(Error::CertificateInvalid("every multiplicity must be at least 1".into()));
        }
        let total: u64 = self.m.iter().sum();
        if total != self.denominator {
            return Err(Error::CertificateInvalid(format!(
                "multiplicities sum to {total}, denominator is {}",
                self.denominator
            )));
        }
        let mut g = self.denominator;
        for &mi in &self.m {
            g = num::integer::gcd(g, mi);
        }
        if g != 1 {
            return Err(Error::CertificateInvalid(format!(
                "multiplicities and denominator share the factor {g}; store the reduced form"
            )));
        }
        let recomputed = bound_pairs(form, &self.weights())
            .map_err(|e| Error::CertificateInvalid(format!("margin recomputation failed: {e}")))?;
        for (i, (stored, fresh)) in self.per_divisor.iter().zip(&recomputed).enumerate() {
            if stored != fresh {
                return Err(Error::CertificateInvalid(format!(
                    "stored inequality for divisor {i} does not match the matrix"
                )));
            }
            if !(&fresh.lhs - &fresh.rhs).is_positive() {
                return Err(Error::CertificateInvalid(format!(
                    "margin for divisor {i} is not positive"
                )));
            }
        }
        Ok(())
    }
}

/// Converts a numerical fixed point into an exact certificate.
///
/// Scans denominators from r up to `denominator_cap`, apportions each into
/// integer multiplicities closest to the solved weights, and accepts the
/// first denominator whose margins all verify positive in exact arithmetic.
pub fn rationalize(
    form: &IntersectionForm,
    solved: &FixedPointResult,
    denominator_cap: u64,
    assumed_ample: bool,
) -> Result<NuCertificate, Error> {
    form.require_valid()?;
    let r = form.r();
    if solved.x.len() != r {
        return Err(Error::DimensionMismatch(format!(
            "solution has {} coordinates, matrix has {r}",
            solved.x.len()
        )));
    }
    let mut exact: Vec<BigRational> = Vec::with_capacity(r);
    for &v in solved.x.coords() {
        let value = BigRational::from_f64(v)
            .filter(|q| q.is_positive())
            .ok_or_else(|| Error::InvalidInput(format!("solution coordinate {v} is not a positive finite number")))?;
        exact.push(value);
    }
    let total: BigRational = exact.iter().fold(BigRational::zero(), |acc, v| acc + v);
    let targets: Vec<BigRational> = exact.into_iter().map(|v| v / &total).collect();

    let start = r as u64;
    if denominator_cap < start {
        return Err(Error::DenominatorCapExceeded { cap: denominator_cap });
    }
    for denominator in start..=denominator_cap {
        let m = apportion(&targets, denominator);
        let denom_big = big_u(denominator);
        let coords: Vec<BigRational> = m.iter().map(|&mi| big_u(mi) / &denom_big).collect();
        let weights = DivisorWeights::new(coords)?;
        let pairs = bound_pairs(form, &weights)?;
        if pairs.iter().all(|b| (&b.lhs - &b.rhs).is_positive()) {
            let mut g = denominator;
            for &mi in &m {
                g = num::integer::gcd(g, mi);
            }
            let reduced_m: Vec<u64> = m.iter().map(|&mi| mi / g).collect();
            let reduced_denom = denominator / g;
            return NuCertificate::from_parts(reduced_m, reduced_denom, pairs, solved.residual, assumed_ample);
        }
    }
    Err(Error::DenominatorCapExceeded { cap: denominator_cap })
}
