//! Abstract intersection data for a tuple of divisors on a surface.
//!
//! An [`IntersectionForm`] records the pairwise intersection numbers
//! `entries(i, j) = <D_i . D_j>` of r divisors. Validation checks exactly the
//! conditions that are observable from the matrix alone: symmetry, strictly
//! positive entries, and the pairwise index-type inequality
//! `entries(i, j)^2 >= entries(i, i) * entries(j, j)`, which any tuple of ample
//! divisors satisfies. Passing validation is a necessary condition, not a proof
//! that the matrix comes from actual ample divisors; ampleness of an abstract
//! input stays a caller assumption and is recorded as such in certificates.

use std::fmt;
use std::ops::Div;

use num::rational::BigRational;
use num::{One, Zero};

use crate::{rational, Error};

/// Arithmetic shared by the two computation modes: exact rationals for
/// certification, f64 for the fixed point solve.
pub trait Scalar:
    Clone + PartialOrd + Zero + One + Div<Output = Self>
{
    fn from_int(v: i64) -> Self;
    /// Mode-specific check that a sum of weights equals 1: exact equality for
    /// rationals, within 1e-12 for floats.
    fn is_unit_sum(total: &Self) -> bool;
}

impl Scalar for f64 {
    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn is_unit_sum(total: &Self) -> bool {
        (total - 1.0).abs() <= 1e-12
    }
}

impl Scalar for BigRational {
    fn from_int(v: i64) -> Self {
        rational::big(v)
    }
    fn is_unit_sum(total: &Self) -> bool {
        total.is_one()
    }
}

/// Symmetric r x r integer matrix of intersection numbers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionForm {
    r: usize,
    entries: Vec<i64>,
}

/// One violated matrix invariant, reported with 0-based indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FormViolation {
    Asymmetry { i: usize, j: usize },
    NonpositiveEntry { i: usize, j: usize, value: i64 },
    HodgeViolation { i: usize, j: usize, off_diagonal_sq: i128, diagonal_product: i128 },
}

impl fmt::Display for FormViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormViolation::Asymmetry { i, j } => {
                write!(f, "entries ({i},{j}) and ({j},{i}) differ")
            }
            FormViolation::NonpositiveEntry { i, j, value } => {
                write!(f, "entry ({i},{j}) = {value} is not >= 1")
            }
            FormViolation::HodgeViolation { i, j, off_diagonal_sq, diagonal_product } => {
                write!(
                    f,
                    "index inequality fails at ({i},{j}): {off_diagonal_sq} < {diagonal_product}"
                )
            }
        }
    }
}

/// Outcome of [`IntersectionForm::validate`]: empty means every checked
/// invariant holds.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FormReport {
    pub violations: Vec<FormViolation>,
}

impl FormReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for FormReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "all invariants hold");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

impl IntersectionForm {
    /// Builds a form from row vectors. Only the shape is enforced here; the
    /// matrix invariants are checked by [`IntersectionForm::validate`] so that
    /// defective inputs can be reported rather than rejected blind.
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self, Error> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::InvalidInput("intersection form must have at least one row".into()));
        }
        let mut entries = Vec::with_capacity(r * r);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != r {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {r}",
                    row.len()
                )));
            }
            entries.extend_from_slice(row);
        }
        Ok(IntersectionForm { r, entries })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.r + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        (0..self.r).map(|i| (0..self.r).map(|j| self.entry(i, j)).collect()).collect()
    }

    /// Checks symmetry, positivity of every entry, and the pairwise index-type
    /// inequality. All violations are collected, none aborts the scan.
    pub fn validate(&self) -> FormReport {
        let mut violations = Vec::new();
        for i in 0..self.r {
            for j in 0..self.r {
                if j > i && self.entry(i, j) != self.entry(j, i) {
                    violations.push(FormViolation::Asymmetry { i, j });
                }
                if self.entry(i, j) < 1 {
                    violations.push(FormViolation::NonpositiveEntry { i, j, value: self.entry(i, j) });
                }
            }
        }
        for i in 0..self.r {
            for j in (i + 1)..self.r {
                let off = self.entry(i, j) as i128;
                let off_sq = off * off;
                let diag = self.entry(i, i) as i128 * self.entry(j, j) as i128;
                if off_sq < diag {
                    violations.push(FormViolation::HodgeViolation {
                        i,
                        j,
                        off_diagonal_sq: off_sq,
                        diagonal_product: diag,
                    });
                }
            }
        }
        FormReport { violations }
    }

    pub fn require_valid(&self) -> Result<(), Error> {
        let report = self.validate();
        if report.passed() {
            Ok(())
        } else {
            Err(Error::InvalidForm(report))
        }
    }

    /// Intersection numbers of the fractional divisor `L_t = sum_i t_i D_i`
    /// against each D_i and against itself:
    /// `lt_dot_di(i) = sum_j t_j entries(i, j)` and
    /// `lt_squared = sum_i t_i lt_dot_di(i)`.
    pub fn pairing<S: Scalar>(&self, t: &DivisorWeights<S>) -> Result<PairingValues<S>, Error> {
        if t.len() != self.r {
            return Err(Error::DimensionMismatch(format!(
                "weight vector has {} coordinates, form has rank {}",
                t.len(),
                self.r
            )));
        }
        let coords = t.coords();
        let mut lt_dot_di = Vec::with_capacity(self.r);
        for i in 0..self.r {
            let mut acc = S::zero();
            for (j, tj) in coords.iter().enumerate() {
                acc = acc + tj.clone() * S::from_int(self.entry(i, j));
            }
            lt_dot_di.push(acc);
        }
        let mut lt_squared = S::zero();
        for (ti, di) in coords.iter().zip(lt_dot_di.iter()) {
            lt_squared = lt_squared + ti.clone() * di.clone();
        }
        Ok(PairingValues { lt_dot_di, lt_squared })
    }
}

/// Point of the standard simplex: nonnegative coordinates summing to 1
/// (exactly in rational mode, within 1e-12 in float mode).
#[derive(Debug, Clone, PartialEq)]
pub struct DivisorWeights<S> {
    coords: Vec<S>,
}

impl<S: Scalar> DivisorWeights<S> {
    pub fn new(coords: Vec<S>) -> Result<Self, Error> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("weight vector must be nonempty".into()));
        }
        let zero = S::zero();
        for (i, c) in coords.iter().enumerate() {
            if !(*c >= zero) {
                return Err(Error::InvalidInput(format!("weight {i} is negative")));
            }
        }
        let total = coords.iter().fold(S::zero(), |acc, c| acc + c.clone());
        if !S::is_unit_sum(&total) {
            return Err(Error::InvalidInput("weights do not sum to 1".into()));
        }
        Ok(DivisorWeights { coords })
    }

    /// Barycenter (1/r, ..., 1/r).
    pub fn uniform(r: usize) -> Result<Self, Error> {
        if r == 0 {
            return Err(Error::InvalidInput("weight vector must be nonempty".into()));
        }
        let share = S::one() / S::from_int(r as i64);
        Self::new(vec![share; r])
    }

    /// Vertex e_i of the simplex.
    pub fn vertex(r: usize, i: usize) -> Result<Self, Error> {
        if i >= r {
            return Err(Error::InvalidInput(format!("vertex index {i} out of range for r = {r}")));
        }
        let mut coords = vec![S::zero(); r];
        coords[i] = S::one();
        Self::new(coords)
    }

    pub(crate) fn new_unchecked(coords: Vec<S>) -> Self {
        DivisorWeights { coords }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<S> {
        self.coords
    }
}

/// Result of [`IntersectionForm::pairing`].
#[derive(Debug, Clone, PartialEq)]
pub struct PairingValues<S> {
    pub lt_dot_di: Vec<S>,
    pub lt_squared: S,
}
