//! Order filtrations on section spaces, bases adapted to them, and the
//! effectivity threshold search.
//!
//! A divisor E filters V = H0(bL) by vanishing order: F^k is the subspace of
//! sections vanishing to order at least k along E (isomorphic to H0(bL - kE)).
//! A basis is adapted to the filtration when it meets every level in a full
//! set, and then its order sum equals sum_{k>=1} dim F^k, the maximum over
//! all bases. Two concrete models are supported:
//!
//! * monomial: V spanned by the lattice points of the polygon of bL on a
//!   toric surface, where the monomial basis is adapted to every invariant
//!   order filtration at once,
//! * linear: V = Q^d with two explicit flags of subspaces, where a common
//!   adapted basis is assembled stratum by stratum.
//!
//! The same module hosts [`find_epsilon_b`] and [`epsilon_from_certificate`],
//! which turn a multiplicity certificate into an explicit effectivity level b
//! with a checked slack epsilon.

use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::nu_bounds::{nu_lower_bound, section_sum, windowed_nu_min, SectionOracle, SurfacePair};
use crate::rational::{big_u, format_ratio};
use crate::solver::NuCertificate;
use crate::toric::ToricDivisor;
use crate::Error;

/// How many truncation levels the epsilon precondition samples.
pub const PRECHECK_WINDOW: u64 = 8;

/// Level dimensions of one filtration: dims[k] = dim F^k, with F^0 the whole
/// space and every level beyond the stored depth equal to zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionProfile {
    dims: Vec<u64>,
}

impl DimensionProfile {
    pub fn new(dims: Vec<u64>) -> Result<Self, Error> {
        if dims.is_empty() {
            return Err(Error::InvalidInput("a dimension profile needs at least the ambient dimension".into()));
        }
        for w in dims.windows(2) {
            if w[1] > w[0] {
                return Err(Error::InvalidInput(format!(
                    "filtration dimensions must be nonincreasing, got {} before {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(DimensionProfile { dims })
    }

    pub fn ambient_dim(&self) -> u64 {
        self.dims[0]
    }

    pub fn level_dim(&self, k: u64) -> u64 {
        usize::try_from(k).ok().and_then(|k| self.dims.get(k)).copied().unwrap_or(0)
    }

    /// Largest level index stored; deeper levels are zero by convention.
    pub fn depth(&self) -> u64 {
        (self.dims.len() - 1) as u64
    }

    /// sum_{k>=1} dim F^k, the order sum of any adapted basis.
    pub fn order_sum(&self) -> u64 {
        self.dims.iter().skip(1).sum()
    }
}

/// Order sum of an adapted basis, straight from the level dimensions.
pub fn mu_sum(profile: &DimensionProfile) -> u64 {
    profile.order_sum()
}

/// Exact linear algebra over Q used by the linear section model.
pub mod qlin {
    use super::*;

    pub type Vector = Vec<BigRational>;

    fn pivot_col(row: &[BigRational]) -> Option<usize> {
        row.iter().position(|x| !x.is_zero())
    }

    /// Incrementally maintained reduced row echelon basis.
    #[derive(Debug, Clone, Default)]
    pub struct SpanBuilder {
        rows: Vec<Vector>,
    }

    impl SpanBuilder {
        pub fn new() -> Self {
            SpanBuilder { rows: Vec::new() }
        }

        fn reduce(&self, v: &mut Vector) {
            for row in &self.rows {
                let pc = pivot_col(row).expect("stored rows are nonzero");
                if !v[pc].is_zero() {
                    let f = v[pc].clone();
                    for (vc, rc) in v.iter_mut().zip(row.iter()) {
                        *vc = &*vc - &(&f * rc);
                    }
                }
            }
        }

        /// Adds the vector if independent from the rows so far; reports
        /// whether the rank grew.
        pub fn insert(&mut self, v: &[BigRational]) -> bool {
            let mut v = v.to_vec();
            self.reduce(&mut v);
            let Some(pc) = pivot_col(&v) else {
                return false;
            };
            let lead = v[pc].clone();
            for x in v.iter_mut() {
                *x = &*x / &lead;
            }
            for row in self.rows.iter_mut() {
                if !row[pc].is_zero() {
                    let f = row[pc].clone();
                    for (rc, vc) in row.iter_mut().zip(v.iter()) {
                        *rc = &*rc - &(&f * vc);
                    }
                }
            }
            let pos = self
                .rows
                .iter()
                .position(|r| pivot_col(r).expect("nonzero") > pc)
                .unwrap_or(self.rows.len());
            self.rows.insert(pos, v);
            true
        }

        pub fn contains(&self, v: &[BigRational]) -> bool {
            let mut v = v.to_vec();
            self.reduce(&mut v);
            v.iter().all(Zero::is_zero)
        }

        pub fn rank(&self) -> usize {
            self.rows.len()
        }

        pub fn into_rows(self) -> Vec<Vector> {
            self.rows
        }
    }

    /// Subspace of Q^ambient, stored as a reduced row echelon basis.
    #[derive(Debug, Clone, PartialEq)]
    pub struct Subspace {
        ambient: usize,
        basis: Vec<Vector>,
    }

    impl Subspace {
        pub fn new(ambient: usize, spanning: Vec<Vector>) -> Result<Self, Error> {
            if ambient == 0 {
                return Err(Error::InvalidInput("ambient dimension must be positive".into()));
            }
            let mut builder = SpanBuilder::new();
            for v in &spanning {
                if v.len() != ambient {
                    return Err(Error::DimensionMismatch(format!(
                        "vector of length {} in ambient dimension {ambient}",
                        v.len()
                    )));
                }
                builder.insert(v);
            }
            Ok(Subspace { ambient, basis: builder.into_rows() })
        }

        pub fn zero(ambient: usize) -> Result<Self, Error> {
            Subspace::new(ambient, Vec::new())
        }

        pub fn full(ambient: usize) -> Result<Self, Error> {
            let mut rows = Vec::with_capacity(ambient);
            for i in 0..ambient {
                let mut v = vec![BigRational::zero(); ambient];
                v[i] = BigRational::one();
                rows.push(v);
            }
            Subspace::new(ambient, rows)
        }

        pub fn ambient(&self) -> usize {
            self.ambient
        }

        pub fn dim(&self) -> usize {
            self.basis.len()
        }

        pub fn basis(&self) -> &[Vector] {
            &self.basis
        }

        pub fn contains(&self, v: &[BigRational]) -> bool {
            if v.len() != self.ambient {
                return false;
            }
            let mut builder = SpanBuilder::new();
            for row in &self.basis {
                builder.insert(row);
            }
            builder.contains(v)
        }

        pub fn contains_subspace(&self, other: &Subspace) -> bool {
            other.basis.iter().all(|v| self.contains(v))
        }

        pub fn sum(&self, other: &Subspace) -> Result<Subspace, Error> {
            self.check_same_ambient(other)?;
            let mut rows = self.basis.clone();
            rows.extend(other.basis.iter().cloned());
            Subspace::new(self.ambient, rows)
        }

        /// { x : <x, v> = 0 for all v here }, via the kernel of the basis matrix.
        pub fn annihilator(&self) -> Result<Subspace, Error> {
            let pivots: Vec<usize> =
                self.basis.iter().map(|r| pivot_col(r).expect("basis rows are nonzero")).collect();
            let mut kernel = Vec::new();
            for free in 0..self.ambient {
                if pivots.contains(&free) {
                    continue;
                }
                let mut v = vec![BigRational::zero(); self.ambient];
                v[free] = BigRational::one();
                for (row, &p) in self.basis.iter().zip(&pivots) {
                    v[p] = -row[free].clone();
                }
                kernel.push(v);
            }
            Subspace::new(self.ambient, kernel)
        }

        pub fn intersect(&self, other: &Subspace) -> Result<Subspace, Error> {
            self.check_same_ambient(other)?;
            self.annihilator()?.sum(&other.annihilator()?)?.annihilator()
        }

        fn check_same_ambient(&self, other: &Subspace) -> Result<(), Error> {
            if self.ambient != other.ambient {
                return Err(Error::DimensionMismatch(format!(
                    "subspaces of Q^{} and Q^{}",
                    self.ambient, other.ambient
                )));
            }
            Ok(())
        }
    }

    /// Largest k with v in levels[k-1], where levels lists F^1, F^2, ...;
    /// 0 when v is in none of them.
    pub fn flag_order(levels: &[Subspace], v: &[BigRational]) -> u64 {
        for k in (1..=levels.len()).rev() {
            if levels[k - 1].contains(v) {
                return k as u64;
            }
        }
        0
    }
}

/// Two nested flags on the same Q^d, listing the levels F^1 ) F^2 ) ... of
/// each filtration (F^0 = Q^d is implicit, deeper levels are zero).
#[derive(Debug, Clone)]
pub struct TwoFlags {
    ambient: usize,
    first: Vec<qlin::Subspace>,
    second: Vec<qlin::Subspace>,
}

impl TwoFlags {
    pub fn new(ambient: usize, first: Vec<qlin::Subspace>, second: Vec<qlin::Subspace>) -> Result<Self, Error> {
        if ambient == 0 {
            return Err(Error::InvalidInput("ambient dimension must be positive".into()));
        }
        for (name, flag) in [("first", &first), ("second", &second)] {
            for (k, level) in flag.iter().enumerate() {
                if level.ambient() != ambient {
                    return Err(Error::DimensionMismatch(format!(
                        "{name} flag level {} lives in Q^{}, ambient is Q^{ambient}",
                        k + 1,
                        level.ambient()
                    )));
                }
            }
            for w in flag.windows(2) {
                if !w[0].contains_subspace(&w[1]) {
                    return Err(Error::InvalidInput(format!("{name} flag levels are not nested")));
                }
            }
        }
        Ok(TwoFlags { ambient, first, second })
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn first(&self) -> &[qlin::Subspace] {
        &self.first
    }

    pub fn second(&self) -> &[qlin::Subspace] {
        &self.second
    }

    fn level(&self, which: usize, k: usize) -> Result<qlin::Subspace, Error> {
        let flag = if which == 0 { &self.first } else { &self.second };
        if k == 0 {
            qlin::Subspace::full(self.ambient)
        } else if k <= flag.len() {
            Ok(flag[k - 1].clone())
        } else {
            qlin::Subspace::zero(self.ambient)
        }
    }

    fn profile(&self, which: usize) -> Result<DimensionProfile, Error> {
        let flag = if which == 0 { &self.first } else { &self.second };
        let mut dims = vec![self.ambient as u64];
        dims.extend(flag.iter().map(|s| s.dim() as u64));
        DimensionProfile::new(dims)
    }
}

/// What spans the section space, when anything does.
#[derive(Debug, Clone)]
pub enum SectionModel {
    /// Lattice points of the polygon of bL with their order vectors.
    Monomial { points: Vec<[i64; 2]>, orders: Vec<Vec<u64>> },
    /// Explicit pair of flags on Q^d.
    Linear(TwoFlags),
    /// Level dimensions only; no basis can be exhibited.
    Abstract,
}

/// A section space together with one dimension profile per filtration.
#[derive(Debug, Clone)]
pub struct FilteredSectionSpace {
    model: SectionModel,
    profiles: Vec<DimensionProfile>,
}

/// Basis element of the monomial model: a lattice point with its vanishing
/// orders along the filtering divisors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialSection {
    pub point: [i64; 2],
    pub orders: Vec<u64>,
}

/// Basis element of the linear model with its exact flag orders.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedVector {
    pub vector: qlin::Vector,
    pub orders: Vec<u64>,
}

/// A basis adapted to every filtration of the space at once.
#[derive(Debug, Clone)]
pub enum AdaptedBasis {
    Monomial(Vec<MonomialSection>),
    Linear(Vec<AdaptedVector>),
}

impl AdaptedBasis {
    pub fn len(&self) -> usize {
        match self {
            AdaptedBasis::Monomial(v) => v.len(),
            AdaptedBasis::Linear(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// One row of orders per basis element.
    pub fn order_matrix(&self) -> Vec<Vec<u64>> {
        match self {
            AdaptedBasis::Monomial(v) => v.iter().map(|s| s.orders.clone()).collect(),
            AdaptedBasis::Linear(v) => v.iter().map(|s| s.orders.clone()).collect(),
        }
    }

    /// Sum of orders over the basis, one total per filtration.
    pub fn order_sums(&self) -> Vec<u64> {
        let matrix = self.order_matrix();
        let Some(first) = matrix.first() else {
            return Vec::new();
        };
        let mut sums = vec![0u64; first.len()];
        for row in &matrix {
            for (acc, &v) in sums.iter_mut().zip(row) {
                *acc += v;
            }
        }
        sums
    }
}

impl FilteredSectionSpace {
    /// Numeric-only space: profiles with no basis model behind them.
    pub fn from_profiles(profiles: Vec<DimensionProfile>) -> Result<Self, Error> {
        if profiles.is_empty() {
            return Err(Error::InvalidInput("need at least one filtration profile".into()));
        }
        let ambient = profiles[0].ambient_dim();
        if profiles.iter().any(|p| p.ambient_dim() != ambient) {
            return Err(Error::InvalidInput("filtration profiles disagree on the ambient dimension".into()));
        }
        Ok(FilteredSectionSpace { model: SectionModel::Abstract, profiles })
    }

    /// H0 of b*l on its toric surface, filtered by vanishing order along each
    /// of the given effective invariant divisors.
    pub fn from_toric(l: &ToricDivisor, b: u64, divisors: &[ToricDivisor]) -> Result<Self, Error> {
        if divisors.is_empty() {
            return Err(Error::InvalidInput("need at least one filtering divisor".into()));
        }
        let b_i64 = i64::try_from(b).map_err(|_| Error::InvalidInput("level b too large".into()))?;
        if b == 0 {
            return Err(Error::InvalidInput("level b must be at least 1".into()));
        }
        let scaled = ToricDivisor::checked_combination(l.surface(), &[(b_i64, l)])?;
        for (i, e) in divisors.iter().enumerate() {
            if e.surface() != l.surface() {
                return Err(Error::InvalidInput(format!("filtering divisor {i} lives on a different surface")));
            }
            if !e.is_effective_witness() || e.is_zero() {
                return Err(Error::InvalidInput(format!(
                    "filtering divisor {i} must be a nonzero invariant divisor with nonnegative coefficients"
                )));
            }
        }
        let points = scaled.lattice_points();
        if points.is_empty() {
            return Err(Error::Precondition(format!("h0({b} * L) = 0, nothing to filter")));
        }
        let mut orders: Vec<Vec<u64>> = Vec::with_capacity(points.len());
        for &u in &points {
            let mut row = Vec::with_capacity(divisors.len());
            for e in divisors {
                let mu = e
                    .coeffs()
                    .iter()
                    .enumerate()
                    .filter(|(_, &d)| d > 0)
                    .map(|(rho, &d)| scaled.order_at(u, rho).div_euclid(d))
                    .min()
                    .expect("a nonzero effective divisor has a positive coefficient");
                debug_assert!(mu >= 0, "points of the polygon have nonnegative ray orders");
                row.push(mu as u64);
            }
            orders.push(row);
        }
        let profiles = (0..divisors.len())
            .map(|i| {
                let max_order = orders.iter().map(|row| row[i]).max().unwrap_or(0);
                let dims: Vec<u64> = (0..=max_order)
                    .map(|k| orders.iter().filter(|row| row[i] >= k).count() as u64)
                    .collect();
                DimensionProfile::new(dims)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FilteredSectionSpace { model: SectionModel::Monomial { points, orders }, profiles })
    }

    /// Q^d with two explicit flags.
    pub fn from_flags(flags: TwoFlags) -> Result<Self, Error> {
        let profiles = vec![flags.profile(0)?, flags.profile(1)?];
        Ok(FilteredSectionSpace { model: SectionModel::Linear(flags), profiles })
    }

    pub fn profiles(&self) -> &[DimensionProfile] {
        &self.profiles
    }

    pub fn model(&self) -> &SectionModel {
        &self.model
    }

    pub fn dim(&self) -> u64 {
        self.profiles[0].ambient_dim()
    }

    /// Order sums sum_{k>=1} dim F^k, one per filtration.
    pub fn mu_sums(&self) -> Vec<u64> {
        self.profiles.iter().map(|p| p.order_sum()).collect()
    }

    /// A basis adapted to all filtrations simultaneously.
    ///
    /// In the monomial model the monomials themselves are adapted, because
    /// every filtration level is spanned by the monomials it contains. In the
    /// linear model the basis is assembled by strata of exact order pairs
    /// (a, b), descending in a and then in b: inside W(a,b) = F1^a cap F2^b,
    /// the vectors picked earlier span W(a+1,b) + W(a,b+1), and extending them
    /// to a basis of W(a,b) yields vectors of exact order (a, b).
    pub fn adapted_basis(&self) -> Result<AdaptedBasis, Error> {
        match &self.model {
            SectionModel::Abstract => Err(Error::Precondition(
                "this space carries only dimension profiles, no basis model to adapt".into(),
            )),
            SectionModel::Monomial { points, orders } => {
                let mut sections: Vec<MonomialSection> = points
                    .iter()
                    .zip(orders)
                    .map(|(&point, orders)| MonomialSection { point, orders: orders.clone() })
                    .collect();
                sections.sort_by(|a, b| b.orders.cmp(&a.orders).then(a.point.cmp(&b.point)));
                Ok(AdaptedBasis::Monomial(sections))
            }
            SectionModel::Linear(flags) => {
                let m1 = flags.first().len();
                let m2 = flags.second().len();
                let mut picked = qlin::SpanBuilder::new();
                let mut basis: Vec<AdaptedVector> = Vec::new();
                for a in (0..=m1).rev() {
                    let f1 = flags.level(0, a)?;
                    for b in (0..=m2).rev() {
                        let f2 = flags.level(1, b)?;
                        let w = f1.intersect(&f2)?;
                        for v in w.basis() {
                            if picked.insert(v) {
                                basis.push(AdaptedVector {
                                    vector: v.clone(),
                                    orders: vec![a as u64, b as u64],
                                });
                            }
                        }
                    }
                }
                debug_assert_eq!(basis.len(), flags.ambient());
                Ok(AdaptedBasis::Linear(basis))
            }
        }
    }
}

/// Checks the defining property of an adapted basis: for every filtration i
/// and level k, the number of basis elements of order >= k equals dim F_i^k.
pub fn is_adapted(basis_orders: &[Vec<u64>], profiles: &[DimensionProfile]) -> bool {
    if profiles.is_empty() {
        return false;
    }
    let r = profiles.len();
    if basis_orders.iter().any(|row| row.len() != r) {
        return false;
    }
    for (i, profile) in profiles.iter().enumerate() {
        if basis_orders.len() as u64 != profile.ambient_dim() {
            return false;
        }
        let max_order = basis_orders.iter().map(|row| row[i]).max().unwrap_or(0);
        let top = max_order.max(profile.depth());
        for k in 1..=top {
            let count = basis_orders.iter().filter(|row| row[i] >= k).count() as u64;
            if count != profile.level_dim(k) {
                return false;
            }
        }
    }
    true
}

/// The filtration profile of a toric pair read through the section oracle:
/// dims[k] = h0(bL - kE) until it vanishes. Equal to the monomial count
/// profile, and used to cross-check it.
pub fn toric_profile_via_h0(l: &ToricDivisor, b: u64, e: &ToricDivisor) -> Result<DimensionProfile, Error> {
    let b_i64 = i64::try_from(b).map_err(|_| Error::InvalidInput("level b too large".into()))?;
    if b == 0 {
        return Err(Error::InvalidInput("level b must be at least 1".into()));
    }
    let mut dims = Vec::new();
    let mut k: i64 = 0;
    loop {
        let h0 = l.scale_sub(b_i64, e, k)?.h0();
        if h0 == 0 {
            break;
        }
        dims.push(h0);
        k += 1;
        if k > 1_000_000 {
            return Err(Error::Precondition("section counts did not vanish within 1000000 levels".into()));
        }
    }
    if dims.is_empty() {
        return Err(Error::Precondition(format!("h0({b} * L) = 0, nothing to filter")));
    }
    DimensionProfile::new(dims)
}

/// Per-divisor data at the effectivity level found by [`find_epsilon_b`].
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonBDivisor {
    pub multiplicity: u64,
    /// S_b = sum_{k>=1} h0(bL - k D_i).
    pub section_sum: u64,
    pub h0_bl: u64,
    /// The cleared threshold (1 + epsilon) h0(bL) m_i b.
    pub required: BigRational,
}

/// Result of the effectivity search: the smallest level b at which every
/// divisor clears its threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonBReport {
    pub epsilon: BigRational,
    pub b: u64,
    pub per_divisor: Vec<EpsilonBDivisor>,
}

/// Searches for the smallest b <= b_cap with
/// S_b >= (1 + epsilon) h0(bL) m_i b for every divisor.
///
/// Before the scan, each divisor must pass the estimate check: the best lower
/// bound for nu(L; D_i) available here, the larger of the closed-form bound
/// and the truncated quotients over a small window, must reach
/// (1 + epsilon) m_i. An epsilon too large for the estimates is rejected up
/// front instead of failing the scan slowly.
pub fn find_epsilon_b(
    pairs: &[SurfacePair],
    oracles: &[&dyn SectionOracle],
    multiplicities: &[u64],
    epsilon: &BigRational,
    b_cap: u64,
) -> Result<EpsilonBReport, Error> {
    let r = pairs.len();
    if r == 0 || oracles.len() != r || multiplicities.len() != r {
        return Err(Error::DimensionMismatch(format!(
            "got {r} pairs, {} oracles, {} multiplicities",
            oracles.len(),
            multiplicities.len()
        )));
    }
    if !epsilon.is_positive() {
        return Err(Error::InvalidInput(format!("epsilon must be positive, got {}", format_ratio(epsilon))));
    }
    if multiplicities.iter().any(|&m| m == 0) {
        return Err(Error::InvalidInput("every multiplicity must be at least 1".into()));
    }
    if b_cap == 0 {
        return Err(Error::InvalidInput("the level cap must be at least 1".into()));
    }
    let one_plus = BigRational::one() + epsilon;
    for i in 0..r {
        let closed_form = nu_lower_bound(&pairs[i]).0;
        let windowed = windowed_nu_min(oracles[i], PRECHECK_WINDOW)?;
        let estimate = closed_form.max(windowed);
        let required = &one_plus * big_u(multiplicities[i]);
        if estimate < required {
            return Err(Error::EpsilonPrecondition(format!(
                "divisor {i}: best estimate for nu(L; D_i) is {}, below the required (1 + epsilon) m_i = {}",
                format_ratio(&estimate),
                format_ratio(&required)
            )));
        }
    }
    for b in 1..=b_cap {
        let mut per_divisor = Vec::with_capacity(r);
        let mut all_clear = true;
        for i in 0..r {
            let (h0_bl, s_b) = section_sum(oracles[i], b)?;
            let required = &one_plus * big_u(h0_bl) * big_u(multiplicities[i]) * big_u(b);
            if big_u(s_b) < required {
                all_clear = false;
                break;
            }
            per_divisor.push(EpsilonBDivisor {
                multiplicity: multiplicities[i],
                section_sum: s_b,
                h0_bl,
                required,
            });
        }
        if all_clear {
            return Ok(EpsilonBReport { epsilon: epsilon.clone(), b, per_divisor });
        }
    }
    Err(Error::BCapExceeded { cap: b_cap })
}

/// Half the smallest slack of a certificate: with
/// nu(L; D_i) >= denominator * lhs_i / 4 > m_i, returns
/// (1/2) min_i (denominator * lhs_i / (4 m_i) - 1), a ready-made epsilon for
/// [`find_epsilon_b`].
pub fn epsilon_from_certificate(certificate: &NuCertificate) -> Result<BigRational, Error> {
    let bounds = certificate.scaled_nu_lower_bounds();
    let mut slack: Option<BigRational> = None;
    for (bound, &mi) in bounds.iter().zip(certificate.multiplicities()) {
        let s = bound / big_u(mi) - BigRational::one();
        slack = Some(match slack {
            None => s,
            Some(cur) => cur.min(s),
        });
    }
    let slack = slack.ok_or_else(|| Error::CertificateInvalid("certificate has no divisors".into()))?;
    let epsilon = slack / big_u(2);
    if !epsilon.is_positive() {
        return Err(Error::EpsilonPrecondition(format!(
            "certificate leaves no positive slack, got {}",
            format_ratio(&epsilon)
        )));
    }
    Ok(epsilon)
}
