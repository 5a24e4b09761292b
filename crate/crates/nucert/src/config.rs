//! JSON problem descriptions, certificate documents, and the command layer
//! shared by the binary and the integration tests.
//!
//! Every command reads one JSON file and writes one JSON document. A `solve`
//! run embeds its input, the recorded assumptions, and the certificate; a
//! later `verify-certificate` run takes that document alone, rebuilds the
//! intersection matrix from the embedded input, and replays every inequality
//! in exact arithmetic.

use std::fmt;

use num::rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::filtration::{
    epsilon_from_certificate, find_epsilon_b, is_adapted, AdaptedBasis, FilteredSectionSpace,
};
use crate::intersection::IntersectionForm;
use crate::nu_bounds::{curve_nu, nu_lower_bound, section_sum, SectionOracle, SurfacePair};
use crate::rational::{format_ratio, parse_ratio, ratio};
use crate::solver::{rationalize, solve_fixed_point, BoundPair, NuCertificate};
use crate::toric::{
    intersection_form_of, proper_intersection_check, SharedComponent, SupportedDivisor,
    ToricDivisor, ToricPairOracle, ToricSurface, COEFF_LIMIT,
};
use crate::Error;
use crate::{DEFAULT_B_CAP, DEFAULT_DENOMINATOR_CAP, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE};

/// How a surface is described in a problem file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SurfaceSpec {
    /// "p2" or "p1xp1".
    Name(String),
    /// {"hirzebruch": e} for the Hirzebruch surface F_e.
    Hirzebruch { hirzebruch: u32 },
    /// {"rays": [[1,0], ...]} for an arbitrary smooth complete fan.
    Rays { rays: Vec<[i64; 2]> },
}

impl SurfaceSpec {
    pub fn resolve(&self) -> Result<ToricSurface, Error> {
        match self {
            SurfaceSpec::Name(name) => match name.to_ascii_lowercase().as_str() {
                "p2" => Ok(ToricSurface::p2()),
                "p1xp1" => Ok(ToricSurface::p1xp1()),
                other => Err(Error::InvalidInput(format!(
                    "unknown surface name {other:?}; use \"p2\", \"p1xp1\", {{\"hirzebruch\": e}}, or {{\"rays\": [...]}}"
                ))),
            },
            SurfaceSpec::Hirzebruch { hirzebruch } => ToricSurface::hirzebruch(*hirzebruch),
            SurfaceSpec::Rays { rays } => ToricSurface::new(rays.clone()),
        }
    }
}

/// A divisor class on the chosen surface. Exactly one of the class fields
/// must be present: `degree` (p2 only), `o` (p1xp1 only), or `coeffs` (ray
/// coefficients on any surface).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivisorSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub o: Option<[i64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<i64>>,
    /// Marks the divisor as a general member of its class rather than the
    /// invariant representative; only `proper-check` consults this.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub general: Option<bool>,
}

impl DivisorSpec {
    pub fn resolve(&self, surface: &ToricSurface) -> Result<ToricDivisor, Error> {
        let given =
            usize::from(self.degree.is_some()) + usize::from(self.o.is_some()) + usize::from(self.coeffs.is_some());
        if given != 1 {
            return Err(Error::InvalidInput(
                "a divisor needs exactly one of \"degree\", \"o\", or \"coeffs\"".into(),
            ));
        }
        if let Some(d) = self.degree {
            if *surface != ToricSurface::p2() {
                return Err(Error::InvalidInput("\"degree\" is shorthand for the p2 surface only".into()));
            }
            return surface.divisor(vec![0, 0, d]);
        }
        if let Some([a, b]) = self.o {
            if *surface != ToricSurface::p1xp1() {
                return Err(Error::InvalidInput("\"o\" is shorthand for the p1xp1 surface only".into()));
            }
            return surface.divisor(vec![0, 0, a, b]);
        }
        let coeffs = self.coeffs.clone().expect("checked above");
        surface.divisor(coeffs)
    }

    pub fn is_general(&self) -> bool {
        self.general.unwrap_or(false)
    }
}

/// Degrees (a, b) for the pair (O(a), O(b)) on the projective line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    pub l_degree: i64,
    pub e_degree: i64,
}

/// Raw intersection numbers for a surface pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub l_sq: i64,
    pub l_dot_e: i64,
    pub e_sq: i64,
}

/// Assumptions the user asserts about abstract input. Numeric input (an
/// intersection matrix or a raw pair) cannot be checked for ampleness, so
/// `"ample": true` must be stated explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputAssumptions {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ample: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub general_position: Option<bool>,
}

/// Solver and search knobs, overridable from the command line.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOptions {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub denominator_cap: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_cap: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<String>,
}

/// One problem file. Which fields are required depends on the command.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surface: Option<SurfaceSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub divisors: Option<Vec<DivisorSpec>>,
    /// The bundle being filtered in `adapted-basis`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bundle: Option<DivisorSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intersection_matrix: Option<Vec<Vec<i64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<PairSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve: Option<CurveSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multiplicities: Option<Vec<u64>>,
    /// Truncation level n for `oracle-nu`, filtration level b for
    /// `adapted-basis`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assumptions: Option<InputAssumptions>,
    /// An existing certificate, usable by `find-b` to derive epsilon.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub options: Option<ConfigOptions>,
}

/// Serialized certificate. All fractions are "p/q" strings in lowest terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateRecord {
    pub r: usize,
    pub multiplicities: Vec<u64>,
    pub denominator: u64,
    /// Exact margins lhs_i - rhs_i of the per-divisor inequalities.
    pub margins: Vec<String>,
    /// Certified lower bounds denominator * lhs_i / 4 for nu(L; D_i).
    pub nu_lower_bounds: Vec<String>,
    /// Residual of the floating-point solve that located the point.
    pub residual: f64,
    pub assumed_ample: bool,
}

impl CertificateRecord {
    pub fn from_certificate(certificate: &NuCertificate) -> CertificateRecord {
        CertificateRecord {
            r: certificate.r(),
            multiplicities: certificate.multiplicities().to_vec(),
            denominator: certificate.denominator(),
            margins: certificate.margins().iter().map(format_ratio).collect(),
            nu_lower_bounds: certificate.scaled_nu_lower_bounds().iter().map(format_ratio).collect(),
            residual: certificate.residual(),
            assumed_ample: certificate.assumed_ample(),
        }
    }

    /// Rebuilds the exact certificate. The stored margins determine the
    /// inequalities: rhs_i = r m_i / denominator, lhs_i = margin_i + rhs_i.
    /// The stored lower bounds must match this reconstruction exactly.
    pub fn to_certificate(&self) -> Result<NuCertificate, Error> {
        if self.r != self.multiplicities.len()
            || self.margins.len() != self.r
            || self.nu_lower_bounds.len() != self.r
        {
            return Err(Error::CertificateInvalid(format!(
                "record claims r = {} but carries {} multiplicities, {} margins, {} bounds",
                self.r,
                self.multiplicities.len(),
                self.margins.len(),
                self.nu_lower_bounds.len()
            )));
        }
        if self.denominator == 0 {
            return Err(Error::CertificateInvalid("record denominator is zero".into()));
        }
        let mut pairs = Vec::with_capacity(self.r);
        for (i, margin_text) in self.margins.iter().enumerate() {
            let margin = parse_ratio(margin_text)
                .map_err(|e| Error::CertificateInvalid(format!("margin {i} is not a fraction: {e}")))?;
            let rhs = ratio(
                i64::try_from(self.r as u64 * self.multiplicities[i])
                    .map_err(|_| Error::CertificateInvalid("multiplicity overflow".into()))?,
                i64::try_from(self.denominator)
                    .map_err(|_| Error::CertificateInvalid("denominator overflow".into()))?,
            );
            let lhs = margin + &rhs;
            pairs.push(BoundPair { lhs, rhs });
        }
        let certificate = NuCertificate::from_parts(
            self.multiplicities.clone(),
            self.denominator,
            pairs,
            self.residual,
            self.assumed_ample,
        )?;
        let expected: Vec<String> =
            certificate.scaled_nu_lower_bounds().iter().map(format_ratio).collect();
        if expected != self.nu_lower_bounds {
            return Err(Error::CertificateInvalid(
                "stored nu lower bounds disagree with the margins and multiplicities".into(),
            ));
        }
        Ok(certificate)
    }
}

/// Provenance of the ampleness requirement in an emitted document.
pub const AMPLE_VERIFIED_TORIC: &str = "verified-toric";
pub const AMPLE_ASSUMED: &str = "assumed-by-user";
pub const AMPLE_NOT_APPLICABLE: &str = "not-applicable";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentAssumptions {
    pub ample: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub general_position: Option<bool>,
    /// Filtration commands assume the scaled bundle bL embeds the surface;
    /// there is no check for this, so those documents carry "assumed" here.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scaled_bundle_very_ample: Option<String>,
}

impl DocumentAssumptions {
    fn with_ample(ample: &str) -> DocumentAssumptions {
        DocumentAssumptions {
            ample: ample.to_string(),
            general_position: None,
            scaled_bundle_very_ample: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptedBasisEntry {
    pub point: [i64; 2],
    pub orders: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FindBDivisorReport {
    pub multiplicity: u64,
    pub section_sum: u64,
    pub h0_bl: u64,
    pub required: String,
}

/// Command-specific result payload of a document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ReportPayload {
    NuBound {
        model: String,
        /// The certified lower bound as an exact fraction.
        value: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        l_sq: Option<i64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        l_dot_e: Option<i64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        e_sq: Option<i64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        alpha: Option<String>,
        #[serde(skip_serializing_if = "Option::is_none")]
        beta: Option<String>,
    },
    OracleNu {
        model: String,
        level: u64,
        h0_nl: u64,
        section_sum: u64,
        /// S_n / (n h0(nL)) as an exact fraction.
        value: String,
    },
    ProperCheck {
        pass: bool,
        shared_components: Vec<SharedComponent>,
        general_position_assumed: bool,
    },
    AdaptedBasis {
        dim: u64,
        level: u64,
        basis: Vec<AdaptedBasisEntry>,
        mu_sums: Vec<u64>,
        profiles: Vec<Vec<u64>>,
        adapted: bool,
    },
    FindB {
        epsilon: String,
        b: u64,
        per_divisor: Vec<FindBDivisorReport>,
    },
    Verification {
        status: String,
        r: usize,
        denominator: u64,
        margins: Vec<String>,
    },
}

/// The single output shape of every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateDocument {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: String,
    pub input: ProblemConfig,
    pub assumptions: DocumentAssumptions,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<ReportPayload>,
}

pub const SCHEMA_VERSION: u32 = 1;

fn document(
    command: &str,
    input: ProblemConfig,
    assumptions: DocumentAssumptions,
    certificate: Option<CertificateRecord>,
    report: Option<ReportPayload>,
) -> CertificateDocument {
    CertificateDocument {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        input,
        assumptions,
        certificate,
        report,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Solve,
    VerifyCertificate,
    NuBound,
    OracleNu,
    ProperCheck,
    AdaptedBasis,
    FindB,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::Solve => "solve-multiplicities",
            CommandKind::VerifyCertificate => "verify-certificate",
            CommandKind::NuBound => "nu-bound",
            CommandKind::OracleNu => "oracle-nu",
            CommandKind::ProperCheck => "proper-check",
            CommandKind::AdaptedBasis => "adapted-basis",
            CommandKind::FindB => "find-b",
        }
    }
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Command-line overrides; every unset field falls back to the problem file
/// and then to the crate defaults.
#[derive(Debug, Clone, Default)]
pub struct CliOverrides {
    pub tolerance: Option<f64>,
    pub max_iter: Option<u64>,
    pub denominator_cap: Option<u64>,
    pub b_cap: Option<u64>,
    pub epsilon: Option<String>,
}

/// Fully resolved knobs for one run.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub tolerance: f64,
    pub max_iter: u64,
    pub denominator_cap: u64,
    pub b_cap: u64,
    pub epsilon: Option<BigRational>,
}

fn resolve_options(cli: &CliOverrides, from_config: Option<&ConfigOptions>) -> Result<RunOptions, Error> {
    let cfg = from_config.cloned().unwrap_or_default();
    let epsilon_text = cli.epsilon.clone().or(cfg.epsilon);
    let epsilon = match epsilon_text {
        Some(text) => Some(
            parse_ratio(&text)
                .map_err(|e| Error::InvalidInput(format!("epsilon {text:?} is not a fraction: {e}")))?,
        ),
        None => None,
    };
    Ok(RunOptions {
        tolerance: cli.tolerance.or(cfg.tolerance).unwrap_or(DEFAULT_TOLERANCE),
        max_iter: cli.max_iter.or(cfg.max_iter).unwrap_or(DEFAULT_MAX_ITER),
        denominator_cap: cli.denominator_cap.or(cfg.denominator_cap).unwrap_or(DEFAULT_DENOMINATOR_CAP),
        b_cap: cli.b_cap.or(cfg.b_cap).unwrap_or(DEFAULT_B_CAP),
        epsilon,
    })
}

/// What one command produced: the document to print and the process exit
/// code (nonzero only for `proper-check` reporting a failed check).
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub document: CertificateDocument,
    pub exit_code: i32,
}

fn parse_problem(text: &str) -> Result<ProblemConfig, Error> {
    serde_json::from_str(text).map_err(|e| Error::Json(format!("problem file: {e}")))
}

fn parse_document(text: &str) -> Result<CertificateDocument, Error> {
    serde_json::from_str(text).map_err(|e| Error::Json(format!("certificate document: {e}")))
}

fn resolve_divisors(config: &ProblemConfig) -> Result<(ToricSurface, Vec<ToricDivisor>, Vec<bool>), Error> {
    let surface_spec = config
        .surface
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("this command needs a \"surface\"".into()))?;
    let divisor_specs = config
        .divisors
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("this command needs \"divisors\"".into()))?;
    if divisor_specs.is_empty() {
        return Err(Error::InvalidInput("\"divisors\" must not be empty".into()));
    }
    let surface = surface_spec.resolve()?;
    let mut divisors = Vec::with_capacity(divisor_specs.len());
    let mut general = Vec::with_capacity(divisor_specs.len());
    for spec in divisor_specs {
        divisors.push(spec.resolve(&surface)?);
        general.push(spec.is_general());
    }
    Ok((surface, divisors, general))
}

fn ample_assumed(config: &ProblemConfig, what: &str) -> Result<(), Error> {
    let acknowledged = config.assumptions.map(|a| a.ample == Some(true)).unwrap_or(false);
    if !acknowledged {
        return Err(Error::InvalidInput(format!(
            "{what} cannot be checked for ampleness; acknowledge it with \"assumptions\": {{\"ample\": true}}"
        )));
    }
    Ok(())
}

/// The intersection matrix for `solve` and `verify-certificate`, with how
/// ampleness was settled.
fn build_form(config: &ProblemConfig) -> Result<(IntersectionForm, bool, DocumentAssumptions), Error> {
    match (&config.intersection_matrix, &config.surface) {
        (Some(rows), None) => {
            ample_assumed(config, "an abstract intersection matrix")?;
            let form = IntersectionForm::new(rows.clone())?;
            let assumptions = DocumentAssumptions {
                general_position: config.assumptions.and_then(|a| a.general_position),
                ..DocumentAssumptions::with_ample(AMPLE_ASSUMED)
            };
            Ok((form, true, assumptions))
        }
        (None, Some(_)) => {
            let (_, divisors, _) = resolve_divisors(config)?;
            for (i, d) in divisors.iter().enumerate() {
                if !d.is_effective_witness() {
                    return Err(Error::InvalidInput(format!(
                        "divisor {i} has a negative ray coefficient; present each divisor by an effective representative"
                    )));
                }
                if d.is_zero() {
                    return Err(Error::InvalidInput(format!("divisor {i} is zero")));
                }
            }
            let form = intersection_form_of(&divisors)?;
            let assumptions = DocumentAssumptions {
                general_position: config.assumptions.and_then(|a| a.general_position),
                ..DocumentAssumptions::with_ample(AMPLE_VERIFIED_TORIC)
            };
            Ok((form, false, assumptions))
        }
        (Some(_), Some(_)) => Err(Error::InvalidInput(
            "give either \"intersection_matrix\" or \"surface\" + \"divisors\", not both".into(),
        )),
        (None, None) => Err(Error::InvalidInput(
            "this command needs \"intersection_matrix\" or \"surface\" + \"divisors\"".into(),
        )),
    }
}

/// Rejects truncation levels whose internal divisor combinations would leave
/// the supported coefficient range.
fn check_oracle_range(l: &ToricDivisor, e: &ToricDivisor, n_max: u64) -> Result<(), Error> {
    let max_l = l.coeffs().iter().map(|a| a.abs()).max().unwrap_or(0).max(1);
    let max_e = e.coeffs().iter().map(|a| a.abs()).max().unwrap_or(0).max(1);
    let l_dot_e = l.intersection_number(e)?.max(1);
    let e_sq = e.intersection_number(e)?.max(1);
    let n = i128::from(n_max);
    let k_max = n * i128::from(l_dot_e) / i128::from(e_sq) + 1;
    let limit = i128::from(COEFF_LIMIT);
    if n * i128::from(max_l) > limit || k_max * i128::from(max_e) > limit {
        return Err(Error::InvalidInput(format!(
            "level {n_max} drives divisor coefficients beyond the supported limit {COEFF_LIMIT}"
        )));
    }
    Ok(())
}

fn run_solve(config: ProblemConfig, options: &RunOptions) -> Result<RunOutcome, Error> {
    let (form, assumed, assumptions) = build_form(&config)?;
    if form.r() < 2 {
        return Err(Error::InvalidInput(format!(
            "solve needs at least 2 divisors, got {}",
            form.r()
        )));
    }
    let solved = solve_fixed_point(&form, options.tolerance, options.max_iter)?;
    let certificate = rationalize(&form, &solved, options.denominator_cap, assumed)?;
    certificate.verify(&form)?;
    let record = CertificateRecord::from_certificate(&certificate);
    let doc = document("solve-multiplicities", config, assumptions, Some(record), None);
    Ok(RunOutcome { document: doc, exit_code: 0 })
}

fn run_verify(document_text: &str) -> Result<RunOutcome, Error> {
    let doc = parse_document(document_text)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::CertificateInvalid(format!(
            "unsupported schema version {}",
            doc.schema_version
        )));
    }
    let record = doc
        .certificate
        .as_ref()
        .ok_or_else(|| Error::CertificateInvalid("document carries no certificate".into()))?;
    let certificate = record.to_certificate()?;
    let (form, _, assumptions) = build_form(&doc.input)
        .map_err(|e| Error::CertificateInvalid(format!("embedded input rejected: {e}")))?;
    certificate.verify(&form)?;
    let report = ReportPayload::Verification {
        status: "valid".to_string(),
        r: certificate.r(),
        denominator: certificate.denominator(),
        margins: record.margins.clone(),
    };
    let out = document("verify-certificate", doc.input, assumptions, Some(record.clone()), Some(report));
    Ok(RunOutcome { document: out, exit_code: 0 })
}

fn run_nu_bound(config: ProblemConfig) -> Result<RunOutcome, Error> {
    if let Some(curve) = config.curve {
        let value = curve_nu(curve.l_degree, curve.e_degree)?;
        let report = ReportPayload::NuBound {
            model: "curve".to_string(),
            value: format_ratio(&value),
            l_sq: None,
            l_dot_e: None,
            e_sq: None,
            alpha: None,
            beta: None,
        };
        let assumptions =
            DocumentAssumptions::with_ample(AMPLE_NOT_APPLICABLE);
        let doc = document("nu-bound", config, assumptions, None, Some(report));
        return Ok(RunOutcome { document: doc, exit_code: 0 });
    }
    let (pair, assumptions) = if let Some(p) = config.pair {
        ample_assumed(&config, "a raw intersection pair")?;
        (
            SurfacePair::new(p.l_sq, p.l_dot_e, p.e_sq)?,
            DocumentAssumptions::with_ample(AMPLE_ASSUMED),
        )
    } else if config.surface.is_some() {
        let (_, divisors, _) = resolve_divisors(&config)?;
        if divisors.len() != 2 {
            return Err(Error::InvalidInput(format!(
                "nu-bound needs exactly two divisors [L, E], got {}",
                divisors.len()
            )));
        }
        for (i, d) in divisors.iter().enumerate() {
            if !d.is_ample() {
                return Err(Error::InvalidInput(format!("divisor {i} is not ample")));
            }
        }
        (
            SurfacePair::from_divisors(&divisors[0], &divisors[1])?,
            DocumentAssumptions::with_ample(AMPLE_VERIFIED_TORIC),
        )
    } else {
        return Err(Error::InvalidInput(
            "nu-bound needs \"curve\", \"pair\", or \"surface\" + two \"divisors\"".into(),
        ));
    };
    let value = nu_lower_bound(&pair);
    let report = ReportPayload::NuBound {
        model: "surface".to_string(),
        value: format_ratio(value.value()),
        l_sq: Some(pair.l_sq()),
        l_dot_e: Some(pair.l_dot_e()),
        e_sq: Some(pair.e_sq()),
        alpha: Some(format_ratio(&ratio(pair.l_dot_e(), pair.e_sq()))),
        beta: Some(format_ratio(&ratio(pair.l_sq(), pair.l_dot_e()))),
    };
    let doc = document("nu-bound", config, assumptions, None, Some(report));
    Ok(RunOutcome { document: doc, exit_code: 0 })
}

fn run_oracle_nu(config: ProblemConfig) -> Result<RunOutcome, Error> {
    let level = config
        .level
        .ok_or_else(|| Error::InvalidInput("oracle-nu needs a \"level\" n".into()))?;
    if let Some(curve) = config.curve {
        if curve.l_degree <= 0 || curve.e_degree <= 0 {
            return Err(Error::InvalidInput("curve degrees must be positive".into()));
        }
        let oracle = crate::toric::CurvePairOracle { l_degree: curve.l_degree, e_degree: curve.e_degree };
        let (h0_nl, s_n) = section_sum(&oracle, level)?;
        let value = crate::nu_bounds::truncated_nu(&oracle, level)?;
        let report = ReportPayload::OracleNu {
            model: "curve".to_string(),
            level,
            h0_nl,
            section_sum: s_n,
            value: format_ratio(&value),
        };
        let assumptions =
            DocumentAssumptions::with_ample(AMPLE_NOT_APPLICABLE);
        let doc = document("oracle-nu", config, assumptions, None, Some(report));
        return Ok(RunOutcome { document: doc, exit_code: 0 });
    }
    let (_, divisors, _) = resolve_divisors(&config)?;
    if divisors.len() != 2 {
        return Err(Error::InvalidInput(format!(
            "oracle-nu needs exactly two divisors [L, E], got {}",
            divisors.len()
        )));
    }
    let l = divisors[0].clone();
    let e = divisors[1].clone();
    if !l.is_ample() {
        return Err(Error::InvalidInput("the bundle L must be ample".into()));
    }
    if e.is_zero() || e.h0() == 0 {
        return Err(Error::InvalidInput("E must be a nonzero class with an effective member".into()));
    }
    check_oracle_range(&l, &e, level)?;
    let oracle = ToricPairOracle::new(l, e)?;
    let (h0_nl, s_n) = section_sum(&oracle, level)?;
    let value = crate::nu_bounds::truncated_nu(&oracle, level)?;
    let report = ReportPayload::OracleNu {
        model: "toric".to_string(),
        level,
        h0_nl,
        section_sum: s_n,
        value: format_ratio(&value),
    };
    let assumptions =
        DocumentAssumptions::with_ample(AMPLE_VERIFIED_TORIC);
    let doc = document("oracle-nu", config, assumptions, None, Some(report));
    Ok(RunOutcome { document: doc, exit_code: 0 })
}

fn run_proper_check(config: ProblemConfig) -> Result<RunOutcome, Error> {
    let (_, divisors, general) = resolve_divisors(&config)?;
    let supported: Vec<SupportedDivisor> = divisors
        .into_iter()
        .zip(general)
        .map(|(divisor, general_member)| SupportedDivisor { divisor, general_member })
        .collect();
    let result = proper_intersection_check(&supported)?;
    let assumptions = DocumentAssumptions {
        general_position: Some(result.general_position_assumed),
        ..DocumentAssumptions::with_ample(AMPLE_NOT_APPLICABLE)
    };
    let exit_code = if result.pass { 0 } else { 3 };
    let report = ReportPayload::ProperCheck {
        pass: result.pass,
        shared_components: result.shared_components,
        general_position_assumed: result.general_position_assumed,
    };
    let doc = document("proper-check", config, assumptions, None, Some(report));
    Ok(RunOutcome { document: doc, exit_code })
}

fn run_adapted_basis(config: ProblemConfig) -> Result<RunOutcome, Error> {
    let level = config
        .level
        .ok_or_else(|| Error::InvalidInput("adapted-basis needs a \"level\" b".into()))?;
    let bundle_spec = config
        .bundle
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("adapted-basis needs a \"bundle\"".into()))?;
    let (surface, divisors, _) = resolve_divisors(&config)?;
    let bundle = bundle_spec.resolve(&surface)?;
    let space = FilteredSectionSpace::from_toric(&bundle, level, &divisors)?;
    let basis = space.adapted_basis()?;
    let adapted = is_adapted(&basis.order_matrix(), space.profiles());
    let AdaptedBasis::Monomial(sections) = basis else {
        return Err(Error::InvalidInput("toric input always yields a monomial basis".into()));
    };
    let entries: Vec<AdaptedBasisEntry> = sections
        .iter()
        .map(|s| AdaptedBasisEntry { point: s.point, orders: s.orders.clone() })
        .collect();
    let profiles: Vec<Vec<u64>> = space
        .profiles()
        .iter()
        .map(|p| (0..=p.depth()).map(|k| p.level_dim(k)).collect())
        .collect();
    let report = ReportPayload::AdaptedBasis {
        dim: space.dim(),
        level,
        basis: entries,
        mu_sums: space.mu_sums(),
        profiles,
        adapted,
    };
    let assumptions = DocumentAssumptions {
        scaled_bundle_very_ample: Some("assumed".to_string()),
        ..DocumentAssumptions::with_ample(AMPLE_NOT_APPLICABLE)
    };
    let doc = document("adapted-basis", config, assumptions, None, Some(report));
    Ok(RunOutcome { document: doc, exit_code: 0 })
}

fn run_find_b(config: ProblemConfig, options: &RunOptions) -> Result<RunOutcome, Error> {
    let (surface, divisors, _) = resolve_divisors(&config)?;
    let multiplicities = config
        .multiplicities
        .clone()
        .ok_or_else(|| Error::InvalidInput("find-b needs \"multiplicities\"".into()))?;
    if multiplicities.len() != divisors.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} multiplicities for {} divisors",
            multiplicities.len(),
            divisors.len()
        )));
    }
    for (i, d) in divisors.iter().enumerate() {
        if !d.is_ample() {
            return Err(Error::InvalidInput(format!("divisor {i} is not ample")));
        }
        if !d.is_effective_witness() {
            return Err(Error::InvalidInput(format!(
                "divisor {i} has a negative ray coefficient; present it by an effective representative"
            )));
        }
    }
    let epsilon = match &options.epsilon {
        Some(e) => e.clone(),
        None => {
            let record = config.certificate.as_ref().ok_or_else(|| {
                Error::InvalidInput(
                    "find-b needs an epsilon: pass --epsilon, set options.epsilon, or embed a certificate".into(),
                )
            })?;
            epsilon_from_certificate(&record.to_certificate()?)?
        }
    };
    let mut terms = Vec::with_capacity(divisors.len());
    for (&m, d) in multiplicities.iter().zip(&divisors) {
        let m = i64::try_from(m).map_err(|_| Error::InvalidInput("multiplicity overflow".into()))?;
        terms.push((m, d));
    }
    let l = ToricDivisor::checked_combination(&surface, &terms)?;
    let mut pairs = Vec::with_capacity(divisors.len());
    let mut oracles = Vec::with_capacity(divisors.len());
    for d in &divisors {
        check_oracle_range(&l, d, options.b_cap)?;
        pairs.push(SurfacePair::from_divisors(&l, d)?);
        oracles.push(ToricPairOracle::new(l.clone(), d.clone())?);
    }
    let oracle_refs: Vec<&dyn SectionOracle> = oracles.iter().map(|o| o as &dyn SectionOracle).collect();
    let found = find_epsilon_b(&pairs, &oracle_refs, &multiplicities, &epsilon, options.b_cap)?;
    let report = ReportPayload::FindB {
        epsilon: format_ratio(&found.epsilon),
        b: found.b,
        per_divisor: found
            .per_divisor
            .iter()
            .map(|d| FindBDivisorReport {
                multiplicity: d.multiplicity,
                section_sum: d.section_sum,
                h0_bl: d.h0_bl,
                required: format_ratio(&d.required),
            })
            .collect(),
    };
    let assumptions = DocumentAssumptions {
        scaled_bundle_very_ample: Some("assumed".to_string()),
        ..DocumentAssumptions::with_ample(AMPLE_VERIFIED_TORIC)
    };
    let doc = document("find-b", config, assumptions, None, Some(report));
    Ok(RunOutcome { document: doc, exit_code: 0 })
}

/// Runs one command against the raw text of its input file.
pub fn run(kind: CommandKind, input_text: &str, overrides: &CliOverrides) -> Result<RunOutcome, Error> {
    if let CommandKind::VerifyCertificate = kind {
        return run_verify(input_text);
    }
    let config = parse_problem(input_text)?;
    let options = resolve_options(overrides, config.options.as_ref())?;
    match kind {
        CommandKind::Solve => run_solve(config, &options),
        CommandKind::NuBound => run_nu_bound(config),
        CommandKind::OracleNu => run_oracle_nu(config),
        CommandKind::ProperCheck => run_proper_check(config),
        CommandKind::AdaptedBasis => run_adapted_basis(config),
        CommandKind::FindB => run_find_b(config, &options),
        CommandKind::VerifyCertificate => unreachable!("handled above"),
    }
}

/// Pretty JSON plus a trailing newline, the on-disk form of every document.
pub fn render_document(doc: &CertificateDocument) -> Result<String, Error> {
    let mut text =
        serde_json::to_string_pretty(doc).map_err(|e| Error::Json(format!("serializing document: {e}")))?;
    text.push('\n');
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn overrides() -> CliOverrides {
        CliOverrides::default()
    }

    const FOUR_LINES_MATRIX: &str = r#"{
        "intersection_matrix": [[1,1,1,1],[1,1,1,1],[1,1,1,1],[1,1,1,1]],
        "assumptions": {"ample": true}
    }"#;

    #[test]
    fn solve_matrix_roundtrip() {
        let outcome = run(CommandKind::Solve, FOUR_LINES_MATRIX, &overrides()).unwrap();
        assert_eq!(outcome.exit_code, 0);
        let cert = outcome.document.certificate.as_ref().unwrap();
        assert_eq!(cert.multiplicities, vec![1, 1, 1, 1]);
        assert_eq!(cert.denominator, 4);
        assert_eq!(cert.margins, vec!["1/6"; 4]);
        assert_eq!(cert.nu_lower_bounds, vec!["7/6"; 4]);
        assert!(cert.assumed_ample);
        assert_eq!(outcome.document.assumptions.ample, AMPLE_ASSUMED);

        let text = render_document(&outcome.document).unwrap();
        let verified = run(CommandKind::VerifyCertificate, &text, &overrides()).unwrap();
        assert_eq!(verified.exit_code, 0);
        assert!(matches!(
            verified.document.report,
            Some(ReportPayload::Verification { ref status, .. }) if status == "valid"
        ));
    }

    #[test]
    fn solve_requires_acknowledged_ampleness() {
        let text = r#"{"intersection_matrix": [[1,1],[1,1]]}"#;
        let result = run(CommandKind::Solve, text, &overrides());
        assert!(matches!(result, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn solve_toric_divisors() {
        let text = r#"{
            "surface": "p2",
            "divisors": [{"degree": 1}, {"degree": 1}, {"degree": 1}, {"degree": 1}]
        }"#;
        let outcome = run(CommandKind::Solve, text, &overrides()).unwrap();
        let cert = outcome.document.certificate.as_ref().unwrap();
        assert_eq!(cert.multiplicities, vec![1, 1, 1, 1]);
        assert!(!cert.assumed_ample);
        assert_eq!(outcome.document.assumptions.ample, AMPLE_VERIFIED_TORIC);
    }

    #[test]
    fn verify_rejects_tampered_multiplicity() {
        let outcome = run(CommandKind::Solve, FOUR_LINES_MATRIX, &overrides()).unwrap();
        let mut doc = outcome.document;
        doc.certificate.as_mut().unwrap().multiplicities[0] = 2;
        let text = render_document(&doc).unwrap();
        let result = run(CommandKind::VerifyCertificate, &text, &overrides());
        assert!(matches!(result, Err(Error::CertificateInvalid(_))));
    }

    #[test]
    fn verify_rejects_tampered_matrix() {
        let outcome = run(CommandKind::Solve, FOUR_LINES_MATRIX, &overrides()).unwrap();
        let mut doc = outcome.document;
        doc.input.intersection_matrix.as_mut().unwrap()[0][0] = 2;
        let text = render_document(&doc).unwrap();
        let result = run(CommandKind::VerifyCertificate, &text, &overrides());
        assert!(matches!(result, Err(Error::CertificateInvalid(_))));
    }

    #[test]
    fn verify_rejects_tampered_margin() {
        let outcome = run(CommandKind::Solve, FOUR_LINES_MATRIX, &overrides()).unwrap();
        let mut doc = outcome.document;
        doc.certificate.as_mut().unwrap().margins[2] = "1/5".to_string();
        let text = render_document(&doc).unwrap();
        let result = run(CommandKind::VerifyCertificate, &text, &overrides());
        assert!(matches!(result, Err(Error::CertificateInvalid(_))));
    }

    #[test]
    fn nu_bound_from_pair() {
        let text = r#"{"pair": {"l_sq": 16, "l_dot_e": 4, "e_sq": 1}, "assumptions": {"ample": true}}"#;
        let outcome = run(CommandKind::NuBound, text, &overrides()).unwrap();
        let Some(ReportPayload::NuBound { value, alpha, beta, .. }) = outcome.document.report else {
            panic!("expected a nu-bound report");
        };
        assert_eq!(value, "7/6");
        assert_eq!(alpha.as_deref(), Some("4/1"));
        assert_eq!(beta.as_deref(), Some("4/1"));
    }

    #[test]
    fn nu_bound_for_curve() {
        let text = r#"{"curve": {"l_degree": 3, "e_degree": 2}}"#;
        let outcome = run(CommandKind::NuBound, text, &overrides()).unwrap();
        let Some(ReportPayload::NuBound { value, model, .. }) = outcome.document.report else {
            panic!("expected a nu-bound report");
        };
        assert_eq!(model, "curve");
        assert_eq!(value, "3/4");
    }

    #[test]
    fn oracle_nu_on_p2() {
        let text = r#"{
            "surface": "p2",
            "divisors": [{"degree": 1}, {"coeffs": [1, 0, 0]}],
            "level": 3
        }"#;
        let outcome = run(CommandKind::OracleNu, text, &overrides()).unwrap();
        let Some(ReportPayload::OracleNu { value, h0_nl, section_sum, .. }) = outcome.document.report
        else {
            panic!("expected an oracle-nu report");
        };
        assert_eq!(value, "1/3");
        assert_eq!(h0_nl, 10);
        assert_eq!(section_sum, 10);
    }

    #[test]
    fn proper_check_exit_codes() {
        let passing = r#"{
            "surface": "p2",
            "divisors": [
                {"coeffs": [1, 0, 0]},
                {"coeffs": [0, 1, 0]},
                {"coeffs": [0, 0, 1]},
                {"degree": 1, "general": true}
            ]
        }"#;
        let outcome = run(CommandKind::ProperCheck, passing, &overrides()).unwrap();
        assert_eq!(outcome.exit_code, 0);

        let failing = r#"{
            "surface": "p2",
            "divisors": [{"coeffs": [1, 1, 0]}, {"coeffs": [0, 1, 1]}]
        }"#;
        let outcome = run(CommandKind::ProperCheck, failing, &overrides()).unwrap();
        assert_eq!(outcome.exit_code, 3);
        let Some(ReportPayload::ProperCheck { pass, shared_components, .. }) = outcome.document.report
        else {
            panic!("expected a proper-check report");
        };
        assert!(!pass);
        assert_eq!(shared_components.len(), 1);
    }

    #[test]
    fn adapted_basis_on_p2() {
        let text = r#"{
            "surface": "p2",
            "bundle": {"degree": 2},
            "level": 1,
            "divisors": [{"coeffs": [1, 0, 0]}, {"coeffs": [0, 1, 0]}]
        }"#;
        let outcome = run(CommandKind::AdaptedBasis, text, &overrides()).unwrap();
        let Some(ReportPayload::AdaptedBasis { dim, mu_sums, adapted, basis, .. }) =
            outcome.document.report
        else {
            panic!("expected an adapted-basis report");
        };
        assert_eq!(dim, 6);
        assert_eq!(mu_sums, vec![4, 4]);
        assert!(adapted);
        assert_eq!(basis[0].orders, vec![2, 0]);
    }

    #[test]
    fn find_b_with_explicit_epsilon() {
        let text = r#"{
            "surface": "p2",
            "divisors": [{"degree": 1}, {"degree": 1}, {"degree": 1}, {"degree": 1}],
            "multiplicities": [1, 1, 1, 1],
            "options": {"epsilon": "1/10"}
        }"#;
        let outcome = run(CommandKind::FindB, text, &overrides()).unwrap();
        let Some(ReportPayload::FindB { b, per_divisor, .. }) = outcome.document.report else {
            panic!("expected a find-b report");
        };
        assert_eq!(b, 1);
        assert_eq!(per_divisor[0].section_sum, 20);
        assert_eq!(per_divisor[0].h0_bl, 15);
    }

    #[test]
    fn find_b_epsilon_from_certificate() {
        let solve = run(CommandKind::Solve, FOUR_LINES_MATRIX, &overrides()).unwrap();
        let record = solve.document.certificate.unwrap();
        let config = ProblemConfig {
            surface: Some(SurfaceSpec::Name("p2".to_string())),
            divisors: Some(vec![
                DivisorSpec { degree: Some(1), o: None, coeffs: None, general: None };
                4
            ]),
            multiplicities: Some(vec![1, 1, 1, 1]),
            certificate: Some(record),
            ..Default::default()
        };
        let text = serde_json::to_string(&config).unwrap();
        let outcome = run(CommandKind::FindB, &text, &overrides()).unwrap();
        let Some(ReportPayload::FindB { epsilon, b, .. }) = outcome.document.report else {
            panic!("expected a find-b report");
        };
        assert_eq!(epsilon, "1/12");
        assert_eq!(b, 1);
    }

    #[test]
    fn cli_epsilon_overrides_config() {
        let text = r#"{
            "surface": "p2",
            "divisors": [{"degree": 1}, {"degree": 1}, {"degree": 1}, {"degree": 1}],
            "multiplicities": [1, 1, 1, 1],
            "options": {"epsilon": "1/10"}
        }"#;
        let cli = CliOverrides { epsilon: Some("2/5".to_string()), ..Default::default() };
        let result = run(CommandKind::FindB, text, &cli);
        assert!(matches!(result, Err(Error::EpsilonPrecondition(_))));
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = r#"{"surprise": 1}"#;
        assert!(matches!(run(CommandKind::Solve, text, &overrides()), Err(Error::Json(_))));
    }

    #[test]
    fn record_certificate_roundtrip() {
        let outcome = run(CommandKind::Solve, FOUR_LINES_MATRIX, &overrides()).unwrap();
        let record = outcome.document.certificate.unwrap();
        let certificate = record.to_certificate().unwrap();
        let back = CertificateRecord::from_certificate(&certificate);
        assert_eq!(record, back);
    }

    #[test]
    fn document_json_is_deterministic() {
        let a = run(CommandKind::Solve, FOUR_LINES_MATRIX, &overrides()).unwrap();
        let b = run(CommandKind::Solve, FOUR_LINES_MATRIX, &overrides()).unwrap();
        assert_eq!(render_document(&a.document).unwrap(), render_document(&b.document).unwrap());
    }

    #[test]
    fn divisor_spec_shorthand_scoping() {
        let p1xp1 = ToricSurface::p1xp1();
        let spec = DivisorSpec { degree: Some(2), o: None, coeffs: None, general: None };
        assert!(matches!(spec.resolve(&p1xp1), Err(Error::InvalidInput(_))));
        let spec = DivisorSpec { degree: None, o: Some([1, 1]), coeffs: None, general: None };
        assert!(spec.resolve(&p1xp1).is_ok());
        let both = DivisorSpec { degree: Some(1), o: Some([1, 1]), coeffs: None, general: None };
        assert!(matches!(both.resolve(&p1xp1), Err(Error::InvalidInput(_))));
    }
}
