//! Randomized numerical checks of the symmetrization inequalities and
//! identities, one report row per (property, domain, group).
//!
//! Every trial reduces to a relative slack: `(rhs - lhs) / scale` for `≤`
//! claims, `(lhs - rhs) / scale` for `≥` claims and `-|lhs - rhs| / scale` for
//! identities, with `scale = max(|lhs|, |rhs|)` unless a property says
//! otherwise. A row passes when its smallest slack is at least `-tolerance`.

mod cases;
mod inputs;
mod quadrature;
mod suite;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::energy::KernelKind;
use crate::error::{Error, Result};
use crate::group::{GroupSpec, MapClass};
use crate::grid::{Domain, DomainKind};

pub use self::suite::{run_suite, with_thread_cap, SuiteConfig, SuiteEntry, SuiteReport, CSV_HEADER};

/// Relative tolerance of identities under exact node permutations.
pub const EXACT_EQUALITY_TOL: f64 = 1e-10;
/// Relative tolerance of identities under interpolated maps.
pub const INTERPOLATED_EQUALITY_TOL: f64 = 1e-5;
/// Default relative tolerance of inequalities.
pub const INEQUALITY_TOL: f64 = 1e-9;
/// Largest resolution per axis of the direct double and triple sums.
pub const DIRECT_SUM_MAX_N: usize = 64;

/// The catalogue.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PropertyId {
    #[serde(rename = "norm_preservation")]
    NormPreservation,
    #[serde(rename = "mono_logconvex")]
    MonoLogconvex,
    #[serde(rename = "grad_convexity")]
    GradConvexity,
    #[serde(rename = "kinetic_symm")]
    KineticSymm,
    #[serde(rename = "potential_equality")]
    PotentialEquality,
    #[serde(rename = "conv_invariance")]
    ConvInvariance,
    #[serde(rename = "conv_symm_I")]
    ConvSymmI,
    #[serde(rename = "conv_symm_II")]
    ConvSymmII,
    #[serde(rename = "pair_mean")]
    PairMean,
    #[serde(rename = "triple_conv")]
    TripleConv,
    #[serde(rename = "g_riesz")]
    GRiesz,
    #[serde(rename = "rel_ke_symm")]
    RelKeSymm,
    #[serde(rename = "jensen_nl")]
    JensenNl,
    #[serde(rename = "sdr_polya_szego")]
    SdrPolyaSzego,
    #[serde(rename = "sdr_hardy_littlewood")]
    SdrHardyLittlewood,
    #[serde(rename = "sdr_riesz")]
    SdrRiesz,
}

impl PropertyId {
    pub const ALL: [PropertyId; 16] = [
        PropertyId::NormPreservation,
        PropertyId::MonoLogconvex,
        PropertyId::GradConvexity,
        PropertyId::KineticSymm,
        PropertyId::PotentialEquality,
        PropertyId::ConvInvariance,
        PropertyId::ConvSymmI,
        PropertyId::ConvSymmII,
        PropertyId::PairMean,
        PropertyId::TripleConv,
        PropertyId::GRiesz,
        PropertyId::RelKeSymm,
        PropertyId::JensenNl,
        PropertyId::SdrPolyaSzego,
        PropertyId::SdrHardyLittlewood,
        PropertyId::SdrRiesz,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PropertyId::NormPreservation => "norm_preservation",
            PropertyId::MonoLogconvex => "mono_logconvex",
            PropertyId::GradConvexity => "grad_convexity",
            PropertyId::KineticSymm => "kinetic_symm",
            PropertyId::PotentialEquality => "potential_equality",
            PropertyId::ConvInvariance => "conv_invariance",
            PropertyId::ConvSymmI => "conv_symm_I",
            PropertyId::ConvSymmII => "conv_symm_II",
            PropertyId::PairMean => "pair_mean",
            PropertyId::TripleConv => "triple_conv",
            PropertyId::GRiesz => "g_riesz",
            PropertyId::RelKeSymm => "rel_ke_symm",
            PropertyId::JensenNl => "jensen_nl",
            PropertyId::SdrPolyaSzego => "sdr_polya_szego",
            PropertyId::SdrHardyLittlewood => "sdr_hardy_littlewood",
            PropertyId::SdrRiesz => "sdr_riesz",
        }
    }

    pub fn is_equality(self) -> bool {
        matches!(self, PropertyId::NormPreservation | PropertyId::PotentialEquality | PropertyId::ConvInvariance)
    }

    /// Rows about the rearrangement `u*`, which ignore the group.
    pub fn is_rearrangement(self) -> bool {
        matches!(self, PropertyId::SdrPolyaSzego | PropertyId::SdrHardyLittlewood | PropertyId::SdrRiesz)
    }

    /// Rows evaluated by direct double or triple sums.
    pub fn uses_direct_sum(self) -> bool {
        matches!(self, PropertyId::TripleConv | PropertyId::SdrRiesz)
    }

    pub fn uses_kernel(self) -> bool {
        matches!(
            self,
            PropertyId::ConvInvariance
                | PropertyId::ConvSymmI
                | PropertyId::ConvSymmII
                | PropertyId::GRiesz
                | PropertyId::RelKeSymm
                | PropertyId::SdrRiesz
        )
    }

    /// Kernel used when the configuration does not name one.
    pub fn default_kernel(self, kind: DomainKind) -> Option<KernelKind> {
        match self {
            PropertyId::ConvSymmII if kind == DomainKind::Line1d => Some(KernelKind::NegAbs),
            PropertyId::RelKeSymm => Some(KernelKind::RelativisticBessel { m: 1.0 }),
            // narrow, so that h * U stays clear of the square's edge under rotations
            PropertyId::ConvInvariance => Some(KernelKind::Gaussian { sigma: 0.25 }),
            p if p.uses_kernel() => Some(KernelKind::Gaussian { sigma: 0.5 }),
            _ => None,
        }
    }

    pub fn default_tolerance(self, class: MapClass) -> f64 {
        match self {
            p if p.is_equality() => match class {
                MapClass::Exact => EXACT_EQUALITY_TOL,
                MapClass::Interpolated => INTERPOLATED_EQUALITY_TOL,
            },
            PropertyId::GradConvexity => 1e-4,
            PropertyId::SdrPolyaSzego | PropertyId::SdrHardyLittlewood => 1e-6,
            _ => INEQUALITY_TOL,
        }
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PropertyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PropertyId::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown property id `{s}`")))
    }
}

/// One property on one (domain, group) pair.
#[derive(Clone, Debug)]
pub struct PropertyCase {
    pub id: PropertyId,
    pub domain: Domain,
    pub group: GroupSpec,
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub kernel: Option<KernelKind>,
}

impl PropertyCase {
    /// Case with the property's default tolerance for the group's map class
    /// on `domain` and its default kernel.
    pub fn new(id: PropertyId, domain: Domain, group: GroupSpec, trials: usize, seed: u64) -> Self {
        let class = crate::group::GroupQuadrature::new(&domain, &group).map(|g| g.class()).unwrap_or(MapClass::Exact);
        PropertyCase {
            id,
            tolerance: id.default_tolerance(class),
            kernel: id.default_kernel(domain.kind()),
            domain,
            group,
            trials,
            seed,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_kernel(mut self, kernel: KernelKind) -> Self {
        self.kernel = Some(kernel);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config(format!("{}: trial count must be at least 1", self.id)));
        }
        if !(self.tolerance > 0.0) || !self.tolerance.is_finite() {
            return Err(Error::Config(format!("{}: tolerance must be positive, got {}", self.id, self.tolerance)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Misconfigured: no trial was run.
    Rejected,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Rejected => "rejected",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub id: PropertyId,
    pub domain: String,
    pub group: String,
    pub map_class: MapClass,
    pub trials: usize,
    /// Smallest relative slack; for identities, minus the largest deviation.
    pub min_slack: f64,
    /// `max(0, -min_slack)`: the worst violation (or deviation).
    pub max_violation: f64,
    pub tolerance: f64,
    pub status: Status,
    /// Index of the trial with the smallest slack, if any ran.
    pub worst_trial: Option<usize>,
    pub detail: String,
}

impl ReportRow {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Runs one case. Zero trials or a nonpositive tolerance is an error;
/// a property that cannot run on the configured domain, group or kernel
/// yields a `Rejected` row; an error inside a trial yields a `Fail` row.
pub fn run_case(case: &PropertyCase) -> Result<ReportRow> {
    case.validate()?;
    let mut row = ReportRow {
        id: case.id,
        domain: case.domain.describe(),
        group: case.group.label(),
        map_class: MapClass::Exact,
        trials: case.trials,
        min_slack: f64::NAN,
        max_violation: f64::NAN,
        tolerance: case.tolerance,
        status: Status::Rejected,
        worst_trial: None,
        detail: String::new(),
    };
    let ctx = match cases::Context::prepare(case) {
        Ok(ctx) => ctx,
        Err(e) => {
            row.detail = e.to_string();
            return Ok(row);
        }
    };
    row.map_class = ctx.class();
    match cases::run_trials(&ctx) {
        Ok(slacks) => {
            let (worst, min) = slacks
                .iter()
                .copied()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (k, s)| if s < acc.1 || s.is_nan() { (k, s) } else { acc });
            row.min_slack = min;
            row.max_violation = (-min).max(0.0);
            row.worst_trial = Some(worst);
            row.status = if min >= -case.tolerance { Status::Pass } else { Status::Fail };
            if row.status == Status::Fail {
                row.detail = format!("trial {worst} slack {min:e}");
            }
        }
        Err(e) => {
            row.status = Status::Fail;
            row.detail = e.to_string();
        }
    }
    Ok(row)
}

#[cfg(test)]
mod tests;
