use crate::group::{MapClass, NORM_EPS};
use crate::grid::{Domain, DomainKind, GridFunction};
use crate::random::{derive_seed, positive_bumps, random_function, Smoothness};

use super::PropertyId;

/// What a property may be fed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum InputFamily {
    /// Smooth, rough and indicator inputs in turn.
    Any,
    /// Smooth and rough only.
    NoIndicator,
    /// Smooth inputs with smooth modulus (positive bumps).
    SmoothModulus,
    /// Signed smooth inputs.
    Smooth,
}

impl InputFamily {
    /// Interpolated maps are only accurate on smooth inputs, and identities
    /// involving `|u|^p` also need a smooth modulus.
    pub(crate) fn for_case(id: PropertyId, class: MapClass) -> Self {
        match (id, class) {
            (PropertyId::SdrPolyaSzego, _) => InputFamily::NoIndicator,
            // the discrete chain rule behind this one only holds approximately
            (PropertyId::GradConvexity, _) => InputFamily::Smooth,
            (id, _) if id.is_rearrangement() => InputFamily::Any,
            (id, MapClass::Interpolated) if id.is_equality() => InputFamily::SmoothModulus,
            (_, MapClass::Interpolated) => InputFamily::Smooth,
            (_, MapClass::Exact) => InputFamily::Any,
        }
    }
}

/// Seeded input `stream` of trial `k`.
pub(crate) fn trial_input(
    domain: &Domain,
    family: InputFamily,
    seed: u64,
    id: PropertyId,
    k: usize,
    stream: u64,
) -> GridFunction {
    let s = derive_seed(&[seed, id as u64, k as u64, stream]);
    match family {
        InputFamily::SmoothModulus => positive_bumps(domain, s),
        InputFamily::Smooth => random_function(domain, s, Smoothness::Smooth),
        InputFamily::Any => {
            let kinds = [Smoothness::Smooth, Smoothness::Rough, Smoothness::Indicator];
            random_function(domain, s, kinds[k % 3])
        }
        InputFamily::NoIndicator => {
            let kinds = [Smoothness::Smooth, Smoothness::Rough];
            random_function(domain, s, kinds[k % 2])
        }
    }
}

/// A G-invariant weight: `|x|²` on line and plane, the axial `x²` on the
/// cylinder.
pub(crate) fn invariant_square(domain: &Domain) -> GridFunction {
    let radial = domain.kind() != DomainKind::Cylinder;
    GridFunction::from_fn_index(domain, |i, j| {
        let x = domain.coord(domain.index(i, j));
        if radial {
            x[0] * x[0] + x[1] * x[1]
        } else {
            x[0] * x[0]
        }
    })
}

fn scale(a: f64, b: f64) -> f64 {
    a.abs().max(b.abs()).max(NORM_EPS)
}

/// Slack of `lhs ≤ rhs`.
pub(crate) fn slack_le(lhs: f64, rhs: f64) -> f64 {
    (rhs - lhs) / scale(lhs, rhs)
}

/// Slack of `lhs ≥ rhs`.
pub(crate) fn slack_ge(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs) / scale(lhs, rhs)
}

/// Minus the relative deviation of `lhs = rhs`.
pub(crate) fn slack_eq(lhs: f64, rhs: f64) -> f64 {
    -(lhs - rhs).abs() / scale(lhs, rhs)
}
