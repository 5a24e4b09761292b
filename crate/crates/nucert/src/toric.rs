//! Exact section counting on smooth complete toric surfaces.
//!
//! A surface is a fan in Z^2: cyclically ordered primitive rays, every
//! consecutive pair positively oriented with determinant +1 (smoothness), and
//! the cycle wrapping around the origin exactly once (completeness). A
//! torus-invariant divisor D = sum_rho a_rho D_rho determines the polygon
//! P_D = { u : <u, v_rho> >= -a_rho }, and h0(D) is the number of lattice
//! points of P_D. Everything here is exact: polygon vertices are computed as
//! fractions over i128 and points are counted row by row with integer
//! floor/ceil divisions, so h0 never passes through floating point.
//!
//! Intersection numbers come from the fan: distinct prime divisors meet in 1
//! point exactly when their rays are adjacent, and self-intersections are read
//! off the relation v_{i-1} + v_{i+1} = -(D_i^2) v_i.

use std::fmt;

use num::rational::{BigRational, Ratio};
use num::BigInt;

use crate::intersection::IntersectionForm;
use crate::nu_bounds::SectionOracle;
use crate::Error;

type Q128 = Ratio<i128>;

/// Keeps every intermediate product of the lattice scan far inside i128.
pub const RAY_COORD_LIMIT: i64 = 100;
/// Largest coefficient a divisor may carry on any ray.
pub const COEFF_LIMIT: i64 = 100_000;

fn gcd64(a: i64, b: i64) -> i64 {
    num::integer::gcd(a, b)
}

fn cross(a: [i64; 2], b: [i64; 2]) -> i64 {
    a[0] * b[1] - a[1] * b[0]
}

/// 0 for the open upper half plane plus the positive x-axis, 1 for the rest;
/// together with the cross product this orders rays by angle from (1, 0).
fn half(v: [i64; 2]) -> u8 {
    if v[1] > 0 || (v[1] == 0 && v[0] > 0) {
        0
    } else {
        1
    }
}

fn angular_less(a: [i64; 2], b: [i64; 2]) -> bool {
    match half(a).cmp(&half(b)) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => cross(a, b) > 0,
    }
}

/// Smooth complete fan in Z^2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToricSurface {
    rays: Vec<[i64; 2]>,
}

impl ToricSurface {
    pub fn new(rays: Vec<[i64; 2]>) -> Result<Self, Error> {
        let n = rays.len();
        if n < 3 {
            return Err(Error::InvalidInput(format!("a complete fan needs at least 3 rays, got {n}")));
        }
        for (i, v) in rays.iter().enumerate() {
            if v[0].abs() > RAY_COORD_LIMIT || v[1].abs() > RAY_COORD_LIMIT {
                return Err(Error::InvalidInput(format!(
                    "ray {i} = ({}, {}) exceeds the coordinate limit {RAY_COORD_LIMIT}",
                    v[0], v[1]
                )));
            }
            if gcd64(v[0].abs(), v[1].abs()) != 1 {
                return Err(Error::InvalidInput(format!("ray {i} = ({}, {}) is not primitive", v[0], v[1])));
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if rays[i] == rays[j] {
                    return Err(Error::InvalidInput(format!("rays {i} and {j} coincide")));
                }
            }
        }
        for i in 0..n {
            let j = (i + 1) % n;
            let d = cross(rays[i], rays[j]);
            if d != 1 {
                return Err(Error::InvalidInput(format!(
                    "consecutive rays {i}, {j} span a cone of determinant {d}, expected +1 (counterclockwise, smooth)"
                )));
            }
        }
        // Exactly one descent in the cyclic angular order means the rays wrap
        // around the origin once, which is completeness.
        let descents = (0..n)
            .filter(|&i| {
                let j = (i + 1) % n;
                !angular_less(rays[i], rays[j])
            })
            .count();
        if descents != 1 {
            return Err(Error::InvalidInput(format!(
                "rays wind around the origin {descents} times, expected exactly once"
            )));
        }
        Ok(ToricSurface { rays })
    }

    /// Projective plane: rays (1,0), (0,1), (-1,-1).
    pub fn p2() -> ToricSurface {
        ToricSurface::new(vec![[1, 0], [0, 1], [-1, -1]]).expect("valid fan")
    }

    /// P1 x P1: rays (1,0), (0,1), (-1,0), (0,-1).
    pub fn p1xp1() -> ToricSurface {
        ToricSurface::new(vec![[1, 0], [0, 1], [-1, 0], [0, -1]]).expect("valid fan")
    }

    /// Hirzebruch surface F_e: rays (1,0), (0,1), (-1,e), (0,-1).
    /// The ray (0,1) carries the section of self-intersection -e and (1,0) a fiber.
    pub fn hirzebruch(e: u32) -> Result<ToricSurface, Error> {
        let e = i64::from(e);
        if e > RAY_COORD_LIMIT {
            return Err(Error::InvalidInput(format!("Hirzebruch parameter {e} exceeds {RAY_COORD_LIMIT}")));
        }
        ToricSurface::new(vec![[1, 0], [0, 1], [-1, e], [0, -1]])
    }

    pub fn ray_count(&self) -> usize {
        self.rays.len()
    }

    pub fn rays(&self) -> &[[i64; 2]] {
        &self.rays
    }

    /// D_i . D_j for the prime invariant divisors: 1 for adjacent rays, 0 for
    /// non-adjacent, and the fan relation value on the diagonal.
    pub fn prime_intersection(&self, i: usize, j: usize) -> i64 {
        let n = self.rays.len();
        assert!(i < n && j < n, "ray index out of range");
        if i == j {
            let p = self.rays[(i + n - 1) % n];
            let q = self.rays[(i + 1) % n];
            let v = self.rays[i];
            let s = [p[0] + q[0], p[1] + q[1]];
            // s is collinear with v (their determinants with v cancel), so one
            // nonzero coordinate of v determines the multiplier exactly.
            let c = if v[0] != 0 { s[0] / v[0] } else { s[1] / v[1] };
            debug_assert_eq!([c * v[0], c * v[1]], s);
            -c
        } else if (i + 1) % n == j || (j + 1) % n == i {
            1
        } else {
            0
        }
    }

    pub fn divisor(&self, coeffs: Vec<i64>) -> Result<ToricDivisor, Error> {
        if coeffs.len() != self.rays.len() {
            return Err(Error::DimensionMismatch(format!(
                "divisor has {} coefficients, fan has {} rays",
                coeffs.len(),
                self.rays.len()
            )));
        }
        for (i, a) in coeffs.iter().enumerate() {
            if a.abs() > COEFF_LIMIT {
                return Err(Error::InvalidInput(format!(
                    "coefficient {i} = {a} exceeds the limit {COEFF_LIMIT}"
                )));
            }
        }
        Ok(ToricDivisor { surface: self.clone(), coeffs })
    }

    /// The prime invariant divisor of ray i.
    pub fn ray_divisor(&self, i: usize) -> Result<ToricDivisor, Error> {
        if i >= self.rays.len() {
            return Err(Error::InvalidInput(format!("ray index {i} out of range")));
        }
        let mut coeffs = vec![0; self.rays.len()];
        coeffs[i] = 1;
        self.divisor(coeffs)
    }
}

impl fmt::Display for ToricSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rays: Vec<String> = self.rays.iter().map(|v| format!("({},{})", v[0], v[1])).collect();
        write!(f, "fan[{}]", rays.join(" "))
    }
}

/// Torus-invariant divisor sum a_rho D_rho on a fixed surface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToricDivisor {
    surface: ToricSurface,
    coeffs: Vec<i64>,
}

impl fmt::Display for ToricDivisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coeffs: Vec<String> = self.coeffs.iter().map(i64::to_string).collect();
        write!(f, "divisor[{}] on {}", coeffs.join(","), self.surface)
    }
}

impl ToricDivisor {
    pub fn surface(&self) -> &ToricSurface {
        &self.surface
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// Degree-d multiple of the line class on the standard P2 fan.
    pub fn p2_o(d: i64) -> Result<ToricDivisor, Error> {
        ToricSurface::p2().divisor(vec![0, 0, d])
    }

    /// Bidegree (a, b) class on the standard P1 x P1 fan.
    pub fn p1xp1_o(a: i64, b: i64) -> Result<ToricDivisor, Error> {
        ToricSurface::p1xp1().divisor(vec![0, 0, a, b])
    }

    /// s_mult times the (-e)-section plus f_mult fibers on F_e.
    pub fn hirzebruch_class(e: u32, s_mult: i64, f_mult: i64) -> Result<ToricDivisor, Error> {
        ToricSurface::hirzebruch(e)?.divisor(vec![f_mult, s_mult, 0, 0])
    }

    /// All coefficients nonnegative: the presented representative is itself an
    /// effective divisor.
    pub fn is_effective_witness(&self) -> bool {
        self.coeffs.iter().all(|&a| a >= 0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&a| a == 0)
    }

    /// <u, v_rho> + a_rho: the vanishing order of the character section chi^u
    /// of O(D) along the prime divisor of ray rho.
    pub fn order_at(&self, point: [i64; 2], ray: usize) -> i64 {
        let v = self.surface.rays[ray];
        point[0] * v[0] + point[1] * v[1] + self.coeffs[ray]
    }

    pub fn checked_combination(surface: &ToricSurface, terms: &[(i64, &ToricDivisor)]) -> Result<ToricDivisor, Error> {
        let mut coeffs = vec![0i128; surface.ray_count()];
        for (c, d) in terms {
            if d.surface != *surface {
                return Err(Error::InvalidInput("divisors live on different surfaces".into()));
            }
            for (acc, a) in coeffs.iter_mut().zip(&d.coeffs) {
                *acc += i128::from(*c) * i128::from(*a);
            }
        }
        let coeffs: Vec<i64> = coeffs
            .into_iter()
            .map(|a| i64::try_from(a).map_err(|_| Error::InvalidInput("divisor coefficient overflow".into())))
            .collect::<Result<_, _>>()?;
        surface.divisor(coeffs)
    }

    /// n*self - k*other on the common surface.
    pub fn scale_sub(&self, n: i64, other: &ToricDivisor, k: i64) -> Result<ToricDivisor, Error> {
        ToricDivisor::checked_combination(&self.surface, &[(n, self), (-k, other)])
    }

    /// Exact intersection number <D . E> from the fan.
    pub fn intersection_number(&self, other: &ToricDivisor) -> Result<i64, Error> {
        if self.surface != other.surface {
            return Err(Error::InvalidInput("divisors live on different surfaces".into()));
        }
        let n = self.surface.ray_count();
        let mut total: i128 = 0;
        for i in 0..n {
            if self.coeffs[i] == 0 {
                continue;
            }
            for j in 0..n {
                if other.coeffs[j] == 0 {
                    continue;
                }
                let m = self.surface.prime_intersection(i, j);
                total += i128::from(self.coeffs[i]) * i128::from(other.coeffs[j]) * i128::from(m);
            }
        }
        i64::try_from(total).map_err(|_| Error::InvalidInput("intersection number overflow".into()))
    }

    /// Toric ampleness test: D . D_rho > 0 against every prime invariant divisor.
    pub fn is_ample(&self) -> bool {
        (0..self.surface.ray_count()).all(|i| {
            let ray_div = self.surface.ray_divisor(i).expect("valid ray index");
            self.intersection_number(&ray_div).expect("same surface") > 0
        })
    }

    /// Nef test, which on a complete toric surface is equivalent to the class
    /// being base-point free.
    pub fn is_basepoint_free(&self) -> bool {
        (0..self.surface.ray_count()).all(|i| {
            let ray_div = self.surface.ray_divisor(i).expect("valid ray index");
            self.intersection_number(&ray_div).expect("same surface") >= 0
        })
    }

    pub fn polygon(&self) -> DivisorPolygon {
        DivisorPolygon::new(self)
    }

    /// Exact h0: the number of lattice points of the divisor polygon.
    pub fn h0(&self) -> u64 {
        self.polygon().count_lattice_points()
    }

    /// Lattice points of the polygon, bottom row to top row, left to right.
    pub fn lattice_points(&self) -> Vec<[i64; 2]> {
        self.polygon().lattice_points()
    }
}

/// Half-plane { u : <u, normal> >= -offset }.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HalfPlane {
    pub normal: [i64; 2],
    pub offset: i64,
}

/// Intersection of the half-planes of a divisor, with its vertex set.
/// For a complete fan the region is compact, so an empty vertex set means an
/// empty polygon.
#[derive(Debug, Clone)]
pub struct DivisorPolygon {
    halfplanes: Vec<HalfPlane>,
    vertices: Vec<(Q128, Q128)>,
}

fn ceil_div(a: i128, b: i128) -> i128 {
    debug_assert!(b > 0);
    -(-a).div_euclid(b)
}

fn floor_div(a: i128, b: i128) -> i128 {
    debug_assert!(b > 0);
    a.div_euclid(b)
}

impl DivisorPolygon {
    fn new(divisor: &ToricDivisor) -> DivisorPolygon {
        let halfplanes: Vec<HalfPlane> = divisor
            .surface
            .rays()
            .iter()
            .zip(divisor.coeffs())
            .map(|(&normal, &offset)| HalfPlane { normal, offset })
            .collect();
        let vertices = Self::candidate_vertices(&halfplanes);
        DivisorPolygon { halfplanes, vertices }
    }

    /// Feasible intersection points of constraint-boundary pairs. Every vertex
    /// of the (compact) region arises this way; corners where three or more
    /// boundaries meet simply show up more than once.
    fn candidate_vertices(halfplanes: &[HalfPlane]) -> Vec<(Q128, Q128)> {
        let mut found = Vec::new();
        for i in 0..halfplanes.len() {
            for j in (i + 1)..halfplanes.len() {
                let a = halfplanes[i];
                let b = halfplanes[j];
                let det = i128::from(cross(a.normal, b.normal));
                if det == 0 {
                    continue;
                }
                let ai = i128::from(a.offset);
                let aj = i128::from(b.offset);
                let px = -ai * i128::from(b.normal[1]) + aj * i128::from(a.normal[1]);
                let py = -aj * i128::from(a.normal[0]) + ai * i128::from(b.normal[0]);
                let feasible = halfplanes.iter().all(|hp| {
                    let lhs = i128::from(hp.normal[0]) * px + i128::from(hp.normal[1]) * py;
                    let rhs = -i128::from(hp.offset) * det;
                    if det > 0 {
                        lhs >= rhs
                    } else {
                        lhs <= rhs
                    }
                });
                if feasible {
                    found.push((Q128::new(px, det), Q128::new(py, det)));
                }
            }
        }
        found.sort();
        found.dedup();
        found
    }

    pub fn halfplanes(&self) -> &[HalfPlane] {
        &self.halfplanes
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> Vec<(BigRational, BigRational)> {
        self.vertices
            .iter()
            .map(|(x, y)| {
                (
                    BigRational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom())),
                    BigRational::new(BigInt::from(*y.numer()), BigInt::from(*y.denom())),
                )
            })
            .collect()
    }

    /// The x-interval of the row at height y, as exact integer bounds.
    fn row_range(&self, y: i128) -> Option<(i128, i128)> {
        let mut lo: Option<i128> = None;
        let mut hi: Option<i128> = None;
        for hp in &self.halfplanes {
            let vx = i128::from(hp.normal[0]);
            let vy = i128::from(hp.normal[1]);
            let rhs = -i128::from(hp.offset) - vy * y;
            if vx > 0 {
                let bound = ceil_div(rhs, vx);
                lo = Some(lo.map_or(bound, |cur| cur.max(bound)));
            } else if vx < 0 {
                let bound = floor_div(-rhs, -vx);
                hi = Some(hi.map_or(bound, |cur| cur.min(bound)));
            } else if rhs > 0 {
                return None;
            }
        }
        // A complete fan has rays pointing both left and right, so both bounds
        // exist for any divisor on a validated surface.
        let (lo, hi) = (lo?, hi?);
        if lo > hi {
            None
        } else {
            Some((lo, hi))
        }
    }

    fn row_span(&self) -> Option<(i128, i128)> {
        if self.vertices.is_empty() {
            return None;
        }
        let y_min = self.vertices.iter().map(|(_, y)| y).min().expect("nonempty");
        let y_max = self.vertices.iter().map(|(_, y)| y).max().expect("nonempty");
        Some((y_min.ceil().to_integer(), y_max.floor().to_integer()))
    }

    pub fn count_lattice_points(&self) -> u64 {
        let Some((y_lo, y_hi)) = self.row_span() else {
            return 0;
        };
        let mut count: u64 = 0;
        for y in y_lo..=y_hi {
            if let Some((lo, hi)) = self.row_range(y) {
                count += u64::try_from(hi - lo + 1).expect("row width fits u64");
            }
        }
        count
    }

    pub fn lattice_points(&self) -> Vec<[i64; 2]> {
        let Some((y_lo, y_hi)) = self.row_span() else {
            return Vec::new();
        };
        let mut points = Vec::new();
        for y in y_lo..=y_hi {
            if let Some((lo, hi)) = self.row_range(y) {
                for x in lo..=hi {
                    points.push([
                        i64::try_from(x).expect("coordinate fits i64"),
                        i64::try_from(y).expect("coordinate fits i64"),
                    ]);
                }
            }
        }
        points
    }
}

/// h0 of O(d) on the projective line: d + 1 for d >= 0, else 0.
pub fn curve_h0(d: i64) -> u64 {
    if d >= 0 {
        (d + 1) as u64
    } else {
        0
    }
}

/// h0 oracle for a fixed pair (L, E) of toric divisors: h0(nL - kE).
#[derive(Debug, Clone)]
pub struct ToricPairOracle {
    l: ToricDivisor,
    e: ToricDivisor,
}

impl ToricPairOracle {
    pub fn new(l: ToricDivisor, e: ToricDivisor) -> Result<Self, Error> {
        if l.surface() != e.surface() {
            return Err(Error::InvalidInput("divisors live on different surfaces".into()));
        }
        Ok(ToricPairOracle { l, e })
    }
}

impl SectionOracle for ToricPairOracle {
    fn h0(&self, n: u64, k: u64) -> u64 {
        let n = i64::try_from(n).expect("n fits i64");
        let k = i64::try_from(k).expect("k fits i64");
        self.l
            .scale_sub(n, &self.e, k)
            .map(|d| d.h0())
            .expect("scaled divisor within coefficient limits")
    }
}

/// h0 oracle for a pair of degrees on the projective line: h0(O(n a - k b)).
#[derive(Debug, Clone, Copy)]
pub struct CurvePairOracle {
    pub l_degree: i64,
    pub e_degree: i64,
}

impl SectionOracle for CurvePairOracle {
    fn h0(&self, n: u64, k: u64) -> u64 {
        let n = i64::try_from(n).expect("n fits i64");
        let k = i64::try_from(k).expect("k fits i64");
        curve_h0(n * self.l_degree - k * self.e_degree)
    }
}

/// Builds the intersection matrix <D_i . D_j> of a tuple of ample divisors.
pub fn intersection_form_of(divisors: &[ToricDivisor]) -> Result<IntersectionForm, Error> {
    if divisors.is_empty() {
        return Err(Error::InvalidInput("need at least one divisor".into()));
    }
    let surface = divisors[0].surface();
    for (i, d) in divisors.iter().enumerate() {
        if d.surface() != surface {
            return Err(Error::InvalidInput(format!("divisor {i} lives on a different surface")));
        }
        if !d.is_ample() {
            return Err(Error::InvalidInput(format!("divisor {i} is not ample")));
        }
    }
    let r = divisors.len();
    let mut rows = vec![vec![0i64; r]; r];
    for i in 0..r {
        for j in i..r {
            let v = divisors[i].intersection_number(&divisors[j])?;
            rows[i][j] = v;
            rows[j][i] = v;
        }
    }
    let form = IntersectionForm::new(rows)?;
    form.require_valid()?;
    Ok(form)
}

/// A divisor together with how its support is meant: the invariant
/// representative itself, or a general member of its linear system.
#[derive(Debug, Clone)]
pub struct SupportedDivisor {
    pub divisor: ToricDivisor,
    pub general_member: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SharedComponent {
    pub first: usize,
    pub second: usize,
    pub ray: usize,
}

/// Outcome of [`proper_intersection_check`].
#[derive(Debug, Clone)]
pub struct ProperIntersectionReport {
    pub pass: bool,
    pub shared_components: Vec<SharedComponent>,
    /// True when a general member took part: emptiness of triple intersections
    /// involving it holds for a general choice and is assumed, not computed.
    pub general_position_assumed: bool,
}

/// Pairwise proper intersection and emptiness of triple intersections for
/// divisors with declared supports.
///
/// Invariant supports share a component exactly when they share a ray; that is
/// reported pair by pair. Three distinct invariant prime divisors never share
/// a point, because a torus-fixed point lies on exactly the two divisors of
/// its cone, so with pairwise disjoint ray supports the triple check is a fan
/// fact and needs no computation. General members of base-point-free classes
/// intersect everything properly for a general choice; their participation is
/// flagged as an assumption rather than verified.
pub fn proper_intersection_check(divisors: &[SupportedDivisor]) -> Result<ProperIntersectionReport, Error> {
    if divisors.len() < 2 {
        return Err(Error::InvalidInput("need at least two divisors to check".into()));
    }
    let surface = divisors[0].divisor.surface();
    let mut supports: Vec<Option<Vec<usize>>> = Vec::with_capacity(divisors.len());
    for (i, sd) in divisors.iter().enumerate() {
        if sd.divisor.surface() != surface {
            return Err(Error::InvalidInput(format!("divisor {i} lives on a different surface")));
        }
        if sd.divisor.is_zero() {
            return Err(Error::InvalidInput(format!("divisor {i} is zero")));
        }
        if sd.general_member {
            if !sd.divisor.is_basepoint_free() {
                return Err(Error::InvalidInput(format!(
                    "divisor {i} is declared a general member but its class is not base-point free"
                )));
            }
            supports.push(None);
        } else {
            if !sd.divisor.is_effective_witness() {
                return Err(Error::InvalidInput(format!(
                    "divisor {i} has a negative coefficient, so it is not an effective invariant divisor"
                )));
            }
            let rays: Vec<usize> = sd
                .divisor
                .coeffs()
                .iter()
                .enumerate()
                .filter(|(_, &a)| a > 0)
                .map(|(rho, _)| rho)
                .collect();
            supports.push(Some(rays));
        }
    }
    let mut shared = Vec::new();
    for i in 0..divisors.len() {
        for j in (i + 1)..divisors.len() {
            if let (Some(a), Some(b)) = (&supports[i], &supports[j]) {
                for &ray in a {
                    if b.contains(&ray) {
                        shared.push(SharedComponent { first: i, second: j, ray });
                    }
                }
            }
        }
    }
    let general_position_assumed = divisors.iter().any(|d| d.general_member);
    Ok(ProperIntersectionReport { pass: shared.is_empty(), shared_components: shared, general_position_assumed })
}
