//! Energy functionals on the grid: Dirichlet kinetic energy, external
//! potential, two-point self-interaction (optionally against a background
//! density), relativistic kinetic energy and convex nonlinear terms.

mod bessel;
mod kernel;
mod relativistic;

pub use bessel::bessel_k;
pub use kernel::{positive_definite_check, relativistic_kernel, Kernel, KernelKind, PdMode};
pub use relativistic::{relativistic_r, RelativisticKernelForm, RelativisticMethod, RelativisticOperator};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{invariance_deviation, GroupQuadrature};
use crate::grid::{dirichlet_form, integrate_re, neg_laplacian, DType, Domain, GridFunction};

/// `T[u] = ∫ |∇u|²`, face-centred.
pub fn kinetic_t(u: &GridFunction) -> f64 {
    dirichlet_form(u)
}

/// `P[|u|²] = ∫ V |u|²`.
pub fn potential_p(u: &GridFunction, v: &GridFunction) -> Result<f64> {
    u.domain().check_same(v.domain())?;
    let w = u.domain().cell_measure();
    Ok(w * u.values().iter().zip(v.values()).map(|(a, b)| b.re * a.norm_sqr()).sum::<f64>())
}

fn density_values(u: &GridFunction) -> Vec<f64> {
    u.values().iter().map(|v| v.norm_sqr()).collect()
}

fn check_kernel(u: &GridFunction, kernel: &Kernel) -> Result<()> {
    kernel.domain().check_same(u.domain())
}

/// `Q[|u|²] = ∬ |u(x)|² h(x - y) |u(y)|² dx dy`.
pub fn self_q(u: &GridFunction, kernel: &Kernel) -> Result<f64> {
    check_kernel(u, kernel)?;
    let rho = density_values(u);
    Ok(kernel.bilinear(&rho, &rho))
}

/// `H_ρ(f, g) = ∬ (f - ρ)(x) h(x - y) (g - ρ)(y) dx dy` for real `f`, `g`.
pub fn background_form(f: &GridFunction, g: &GridFunction, kernel: &Kernel, rho: &GridFunction) -> Result<f64> {
    f.domain().check_same(g.domain())?;
    f.domain().check_same(rho.domain())?;
    check_kernel(f, kernel)?;
    let shift = |x: &GridFunction| -> Vec<f64> { x.values().iter().zip(rho.values()).map(|(a, r)| a.re - r.re).collect() };
    Ok(kernel.bilinear(&shift(f), &shift(g)))
}

/// `H_ρ(|u|², |u|²)`, defined when `|u|²` and `ρ` carry the same mass.
pub fn self_q_background(u: &GridFunction, kernel: &Kernel, rho: &GridFunction) -> Result<f64> {
    u.domain().check_same(rho.domain())?;
    let (found, expected) = (integrate_re(&u.density()), integrate_re(rho));
    if (found - expected).abs() > 1e-8 * expected.abs().max(1.0) {
        return Err(Error::MassMismatch { expected, found });
    }
    let d = u.density();
    background_form(&d, &d, kernel, rho)
}

/// Convex profile `f` of a nonlinear term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// `f(s) = s^γ`
    Power { gamma: f64 },
}

impl Profile {
    pub fn value(&self, s: f64) -> f64 {
        match *self {
            Profile::Power { gamma } => s.powf(gamma),
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match *self {
            Profile::Power { gamma } => {
                if s == 0.0 {
                    if gamma > 1.0 {
                        0.0
                    } else {
                        gamma
                    }
                } else {
                    gamma * s.powf(gamma - 1.0)
                }
            }
        }
    }
}

/// `∫ a(x) f(|u(x)|^p) dx` with convex `f` and `a >= 0`.
#[derive(Clone, Debug)]
pub struct Nonlinearity {
    power: f64,
    profile: Profile,
    coefficient: GridFunction,
}

impl Nonlinearity {
    pub fn new(power: f64, profile: Profile, coefficient: GridFunction) -> Result<Self> {
        if !(power >= 1.0) || !power.is_finite() {
            return Err(Error::InvalidParameter(format!("nonlinearity power must be >= 1, got {power}")));
        }
        let Profile::Power { gamma } = profile;
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("profile exponent must be > 1, got {gamma}")));
        }
        if coefficient.values().iter().any(|a| a.re < 0.0 || a.im != 0.0) {
            return Err(Error::InvalidParameter("nonlinearity coefficient must be real and nonnegative".into()));
        }
        let nl = Nonlinearity { power, profile, coefficient };
        nl.check_convex(16.0)?;
        Ok(nl)
    }

    /// `f(s) = s^γ` with coefficient `a ≡ 1`.
    pub fn power_law(domain: &Domain, power: f64, gamma: f64) -> Result<Self> {
        Self::new(power, Profile::Power { gamma }, GridFunction::constant(domain, 1.0))
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    pub fn coefficient(&self) -> &GridFunction {
        &self.coefficient
    }

    /// Second differences of `f` on `[0, s_max]` are `>= -1e-12` (relative).
    pub fn check_convex(&self, s_max: f64) -> Result<()> {
        let n = 256;
        let ds = s_max / n as f64;
        let f: Vec<f64> = (0..=n).map(|i| self.profile.value(i as f64 * ds)).collect();
        let scale = f.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for i in 1..n {
            if f[i + 1] - 2.0 * f[i] + f[i - 1] < -1e-12 * scale {
                return Err(Error::InvalidParameter(format!("profile is not convex near s = {}", i as f64 * ds)));
            }
        }
        Ok(())
    }

    pub fn check_invariant(&self, group: &GroupQuadrature, tol: f64) -> Result<()> {
        let dev = invariance_deviation(&self.coefficient, group)?;
        if dev > tol {
            return Err(Error::InvalidParameter(format!("nonlinearity coefficient is not invariant (deviation {dev:.3e})")));
        }
        Ok(())
    }
}

/// `∫ a f(|u|^p)`.
pub fn nonlinear_term(u: &GridFunction, nl: &Nonlinearity) -> Result<f64> {
    u.domain().check_same(nl.coefficient.domain())?;
    let w = u.domain().cell_measure();
    Ok(w * u
        .values()
        .iter()
        .zip(nl.coefficient.values())
        .map(|(v, a)| a.re * nl.profile.value(v.norm().powf(nl.power)))
        .sum::<f64>())
}

#[derive(Clone, Debug)]
pub enum Kinetic {
    Classical,
    Relativistic(RelativisticOperator),
}

/// Energy functional with a mass constraint `∫|u|² = N`.
#[derive(Clone)]
pub struct EnergySpec {
    kinetic: Kinetic,
    potential: GridFunction,
    coupling: f64,
    kernel: Option<Kernel>,
    nonlinearity: Option<Nonlinearity>,
    background: Option<GridFunction>,
    mass: f64,
}

impl std::fmt::Debug for RelativisticOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RelativisticOperator(m={})", self.mass())
    }
}

impl std::fmt::Debug for EnergySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EnergySpec")
            .field("kinetic", &self.kinetic)
            .field("domain", &self.potential.domain().describe())
            .field("coupling", &self.coupling)
            .field("kernel", &self.kernel)
            .field("nonlinear", &self.nonlinearity.is_some())
            .field("background", &self.background.is_some())
            .field("mass", &self.mass)
            .finish()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub potential: f64,
    pub interaction: f64,
    pub nonlinear: f64,
    pub total: f64,
}

impl EnergySpec {
    /// Classical kinetic energy plus `∫ V |u|²`, mass `N`.
    pub fn new(potential: GridFunction, mass: f64) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {mass}")));
        }
        if potential.values().iter().any(|v| v.im != 0.0) {
            return Err(Error::InvalidParameter("potential must be real".into()));
        }
        Ok(EnergySpec {
            kinetic: Kinetic::Classical,
            potential,
            coupling: 0.0,
            kernel: None,
            nonlinearity: None,
            background: None,
            mass,
        })
    }

    pub fn relativistic(mut self, m: f64) -> Result<Self> {
        self.kinetic = Kinetic::Relativistic(RelativisticOperator::new(self.domain(), m)?);
        Ok(self)
    }

    /// Adds `b Q[|u|²]`.
    pub fn with_interaction(mut self, coupling: f64, kernel: Kernel) -> Result<Self> {
        self.domain().check_same(kernel.domain())?;
        if !coupling.is_finite() {
            return Err(Error::InvalidParameter("coupling must be finite".into()));
        }
        self.coupling = coupling;
        self.kernel = Some(kernel);
        Ok(self)
    }

    /// Measures the interaction against `ρ`, turning `b Q` into `b H_ρ`.
    pub fn with_background(mut self, rho: GridFunction) -> Result<Self> {
        self.domain().check_same(rho.domain())?;
        if self.kernel.is_none() {
            return Err(Error::Config("a background density needs an interaction kernel".into()));
        }
        if rho.values().iter().any(|v| v.re < 0.0 || v.im != 0.0) {
            return Err(Error::InvalidParameter("background density must be real and nonnegative".into()));
        }
        let found = integrate_re(&rho);
        if (found - self.mass).abs() > 1e-10 * self.mass.max(1.0) {
            return Err(Error::MassMismatch { expected: self.mass, found });
        }
        self.background = Some(rho);
        Ok(self)
    }

    pub fn with_nonlinearity(mut self, nl: Nonlinearity) -> Result<Self> {
        self.domain().check_same(nl.coefficient.domain())?;
        self.nonlinearity = Some(nl);
        Ok(self)
    }

    pub fn domain(&self) -> &Domain {
        self.potential.domain()
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn kinetic(&self) -> &Kinetic {
        &self.kinetic
    }

    pub fn potential(&self) -> &GridFunction {
        &self.potential
    }

    pub fn kernel(&self) -> Option<&Kernel> {
        self.kernel.as_ref()
    }

    pub fn background(&self) -> Option<&GridFunction> {
        self.background.as_ref()
    }

    pub fn nonlinearity(&self) -> Option<&Nonlinearity> {
        self.nonlinearity.as_ref()
    }

    /// Every configured ingredient is invariant under `group` within `tol`.
    pub fn check_invariant(&self, group: &GroupQuadrature, tol: f64) -> Result<()> {
        let dev = invariance_deviation(&self.potential, group)?;
        if dev > tol {
            return Err(Error::InvalidParameter(format!("potential is not invariant (deviation {dev:.3e})")));
        }
        if let Some(rho) = &self.background {
            let dev = invariance_deviation(rho, group)?;
            if dev > tol {
                return Err(Error::InvalidParameter(format!("background is not invariant (deviation {dev:.3e})")));
            }
        }
        if let Some(nl) = &self.nonlinearity {
            nl.check_invariant(group, tol)?;
        }
        if let Some(k) = &self.kernel {
            let dev = k.group_deviation(group.spec())?;
            if dev > tol {
                return Err(Error::InvalidParameter(format!("kernel is not invariant (deviation {dev:.3e})")));
            }
        }
        Ok(())
    }

    pub fn breakdown(&self, u: &GridFunction) -> Result<EnergyBreakdown> {
        self.domain().check_same(u.domain())?;
        let kinetic = match &self.kinetic {
            Kinetic::Classical => kinetic_t(u),
            Kinetic::Relativistic(op) => op.energy(u)?,
        };
        let potential = potential_p(u, &self.potential)?;
        let interaction = match (&self.kernel, &self.background) {
            (Some(k), Some(rho)) if self.coupling != 0.0 => {
                let d = u.density();
                self.coupling * background_form(&d, &d, k, rho)?
            }
            (Some(k), None) if self.coupling != 0.0 => self.coupling * self_q(u, k)?,
            _ => 0.0,
        };
        let nonlinear = match &self.nonlinearity {
            Some(nl) => nonlinear_term(u, nl)?,
            None => 0.0,
        };
        let total = kinetic + potential + interaction + nonlinear;
        if !total.is_finite() {
            return Err(Error::NonFinite("energy".into()));
        }
        Ok(EnergyBreakdown { kinetic, potential, interaction, nonlinear, total })
    }

    /// First variation `g = δE/δū`: the derivative of `E` along `v` is
    /// `2 Re ∫ conj(g) v`. Boundary nodes of Dirichlet domains are held at zero.
    pub fn gradient(&self, u: &GridFunction) -> Result<GridFunction> {
        self.domain().check_same(u.domain())?;
        let n = u.len();
        let mut g: Vec<Complex64> = match &self.kinetic {
            Kinetic::Classical => neg_laplacian(u).values().to_vec(),
            Kinetic::Relativistic(op) => op.apply(u)?,
        };
        for i in 0..n {
            g[i] += u.values()[i] * self.potential.values()[i].re;
        }
        if let (Some(k), true) = (&self.kernel, self.coupling != 0.0) {
            let mut rho = density_values(u);
            if let Some(bg) = &self.background {
                for (r, b) in rho.iter_mut().zip(bg.values()) {
                    *r -= b.re;
                }
            }
            let field = k.convolve(&rho);
            for i in 0..n {
                g[i] += u.values()[i] * (2.0 * self.coupling * field[i]);
            }
        }
        if let Some(nl) = &self.nonlinearity {
            if nl.power <= 1.0 {
                return Err(Error::Unsupported("nonlinearity with p = 1 is not differentiable at zero".into()));
            }
            let p = nl.power;
            for i in 0..n {
                let v = u.values()[i];
                let r = v.norm();
                if r > 0.0 {
                    let s = r.powf(p);
                    g[i] += v * (0.5 * p * nl.coefficient.values()[i].re * nl.profile.derivative(s) * r.powf(p - 2.0));
                }
            }
        }
        let d = u.domain();
        if d.dirichlet() {
            for (i, v) in g.iter_mut().enumerate() {
                if d.is_boundary(i) {
                    *v = Complex64::new(0.0, 0.0);
                }
            }
        }
        if u.dtype() == DType::Real {
            for v in g.iter_mut() {
                v.im = 0.0;
            }
        }
        Ok(GridFunction::raw(d, g, u.dtype()))
    }
}

pub fn total_energy(spec: &EnergySpec, u: &GridFunction) -> Result<f64> {
    Ok(spec.breakdown(u)?.total)
}

#[cfg(test)]
mod tests;
