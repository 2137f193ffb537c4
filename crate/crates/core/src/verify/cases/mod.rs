mod convolution;
mod orbital;
mod rearrangement;

use rayon::prelude::*;

use crate::energy::{positive_definite_check, Kernel, KernelKind, PdMode};
use crate::error::{Error, Result};
use crate::group::{GroupQuadrature, MapClass};
use crate::grid::{integrate_re, Domain, DomainKind, GridFunction};

use super::inputs::{trial_input, InputFamily};
use super::quadrature::desk_domain;
use super::{PropertyCase, PropertyId};

/// Everything a trial needs, built and checked once per case.
pub(crate) struct Context {
    pub(crate) id: PropertyId,
    pub(crate) domain: Domain,
    pub(crate) group: GroupQuadrature,
    pub(crate) kernel: Option<Kernel>,
    /// The group acting on the difference grid (line and plane only).
    pub(crate) difference_group: Option<GroupQuadrature>,
    /// Invariant background of unit mass.
    pub(crate) background: Option<GridFunction>,
    seed: u64,
    trials: usize,
    family: InputFamily,
}

impl Context {
    pub(crate) fn prepare(case: &PropertyCase) -> Result<Self> {
        let id = case.id;
        let reject = |reason: String| Error::Misconfigured { id: id.to_string(), reason };
        let kind = case.domain.kind();
        case.group.validate_for(kind).map_err(|e| reject(e.to_string()))?;
        if id.is_rearrangement() && kind == DomainKind::Cylinder {
            return Err(reject("the rearrangement is not defined on the cylinder".into()));
        }
        let domain = if id.uses_direct_sum() { desk_domain(&case.domain)? } else { case.domain.clone() };
        let group = GroupQuadrature::new(&domain, &case.group)?;
        let kernel = match (&case.kernel, id.uses_kernel()) {
            (Some(_), false) => return Err(reject("this property takes no kernel".into())),
            (None, true) => return Err(reject("this property needs a kernel".into())),
            (None, false) => None,
            (Some(k), true) => {
                let kernel = Kernel::new(k.clone(), &domain).map_err(|e| reject(e.to_string()))?;
                check_kernel(id, &kernel, &group).map_err(reject)?;
                Some(kernel)
            }
        };
        let difference_group = match (id, kind) {
            (PropertyId::TripleConv, DomainKind::Line1d | DomainKind::Plane2d) => {
                Some(GroupQuadrature::new(&domain.difference_domain(), &case.group)?)
            }
            _ => None,
        };
        let background = (id == PropertyId::ConvSymmII).then(|| unit_background(&domain));
        let family = InputFamily::for_case(id, group.class());
        Ok(Context {
            id,
            domain,
            group,
            kernel,
            difference_group,
            background,
            seed: case.seed,
            trials: case.trials,
            family,
        })
    }

    pub(crate) fn class(&self) -> MapClass {
        self.group.class()
    }

    pub(crate) fn kernel(&self) -> &Kernel {
        self.kernel.as_ref().expect("checked in prepare")
    }

    /// Input `stream` of trial `k`.
    pub(crate) fn input(&self, k: usize, stream: u64) -> GridFunction {
        self.input_on(&self.domain, k, stream)
    }

    pub(crate) fn input_on(&self, domain: &Domain, k: usize, stream: u64) -> GridFunction {
        trial_input(domain, self.family, self.seed, self.id, k, stream)
    }
}

/// Requirements a property places on its kernel.
fn check_kernel(id: PropertyId, kernel: &Kernel, group: &GroupQuadrature) -> std::result::Result<(), String> {
    let samples = kernel.samples().re();
    match id {
        PropertyId::ConvSymmI | PropertyId::ConvSymmII => {
            let mode = if id == PropertyId::ConvSymmI { PdMode::All } else { PdMode::MeanZero };
            let (ok, min) = positive_definite_check(kernel, mode);
            if !ok {
                return Err(format!(
                    "{} kernel is not positive definite ({mode:?}); smallest eigenvalue {min:e}",
                    kernel.kind().name()
                ));
            }
        }
        PropertyId::GRiesz | PropertyId::RelKeSymm | PropertyId::SdrRiesz => {
            if samples.iter().any(|&s| s < 0.0) {
                return Err(format!("{} kernel takes negative values", kernel.kind().name()));
            }
        }
        _ => {}
    }
    if id == PropertyId::SdrRiesz {
        check_radially_decreasing(kernel, &samples)?;
    }
    // the analytic kinds are radial; only tables need their samples checked
    if let KernelKind::Table(_) = kernel.kind() {
        let tol = match group.class() {
            MapClass::Exact => 1e-12,
            MapClass::Interpolated => 1e-6,
        };
        let dev = kernel.group_deviation(group.spec()).map_err(|e| e.to_string())?;
        if dev > tol {
            return Err(format!("kernel table is not invariant under {} (deviation {dev:e})", group.spec().label()));
        }
    }
    Ok(())
}

fn check_radially_decreasing(kernel: &Kernel, samples: &[f64]) -> std::result::Result<(), String> {
    let diff = kernel.domain().difference_domain();
    let mut order: Vec<(f64, f64)> = (0..diff.len()).map(|i| (diff.radius(i), samples[i])).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let top = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let mut floor = f64::INFINITY;
    let mut group_min = f64::INFINITY;
    let mut group_r = f64::NEG_INFINITY;
    for (r, s) in order {
        if r > group_r + 1e-12 {
            floor = floor.min(group_min);
            group_min = f64::INFINITY;
            group_r = r;
        }
        if s > floor + 1e-12 * top {
            return Err(format!("{} kernel is not radially nonincreasing", kernel.kind().name()));
        }
        group_min = group_min.min(s);
    }
    Ok(())
}

/// Unit-mass Gaussian of width `L/8`, radial on line and plane and axial on
/// the cylinder.
fn unit_background(domain: &Domain) -> GridFunction {
    let sigma = domain.half_width() / 8.0;
    let radial = domain.kind() != DomainKind::Cylinder;
    let rho = GridFunction::from_fn(domain, |x| {
        let r2 = if radial { x[0] * x[0] + x[1] * x[1] } else { x[0] * x[0] };
        (-r2 / (2.0 * sigma * sigma)).exp()
    });
    let mass = integrate_re(&rho);
    rho.scaled(1.0 / mass)
}

/// Relative slack of every trial, in trial order.
pub(crate) fn run_trials(ctx: &Context) -> Result<Vec<f64>> {
    (0..ctx.trials).into_par_iter().map(|k| trial(ctx, k)).collect()
}

fn trial(ctx: &Context, k: usize) -> Result<f64> {
    match ctx.id {
        PropertyId::NormPreservation => orbital::norm_preservation(ctx, k),
        PropertyId::MonoLogconvex => orbital::mono_logconvex(ctx, k),
        PropertyId::GradConvexity => orbital::grad_convexity(ctx, k),
        PropertyId::KineticSymm => orbital::kinetic_symm(ctx, k),
        PropertyId::PotentialEquality => orbital::potential_equality(ctx, k),
        PropertyId::PairMean => orbital::pair_mean(ctx, k),
        PropertyId::JensenNl => orbital::jensen_nl(ctx, k),
        PropertyId::ConvInvariance => convolution::conv_invariance(ctx, k),
        PropertyId::ConvSymmI => convolution::conv_symm_i(ctx, k),
        PropertyId::ConvSymmII => convolution::conv_symm_ii(ctx, k),
        PropertyId::TripleConv => convolution::triple_conv(ctx, k),
        PropertyId::GRiesz => convolution::g_riesz(ctx, k),
        PropertyId::RelKeSymm => convolution::rel_ke_symm(ctx, k),
        PropertyId::SdrPolyaSzego => rearrangement::polya_szego(ctx, k),
        PropertyId::SdrHardyLittlewood => rearrangement::hardy_littlewood(ctx, k),
        PropertyId::SdrRiesz => rearrangement::riesz(ctx, k),
    }
}
