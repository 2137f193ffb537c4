//! Mass-constrained energy minimization by projected descent:
//! `u ← √N (u - τ d) / ‖u - τ d‖₂`, where `d` is the energy gradient, smoothed
//! by an inverse kinetic preconditioner so the step size is not limited by
//! the grid's highest frequencies, and made tangent to the constraint sphere. A step is accepted only if the energy
//! drops; otherwise `τ` shrinks by the backtracking factor.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::energy::{total_energy, EnergySpec, Kinetic};
use crate::error::{Error, Result};
use crate::fft::{signed_index, FftNd};
use crate::group::GroupQuadrature;
use crate::grid::{inner_product, l2_norm, DType, Domain, GridFunction};
use crate::random::{bump, derive_seed, positive_bumps, random_function, Smoothness};
use crate::symmetrize::{symmetry_deviation, OrbitModuli};

/// Consecutive small relative energy changes needed to stop.
pub const QUIET_STEPS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Initializer {
    /// Positive Gaussian bumps at random off-centre positions.
    Random { seed: u64 },
    /// Unit-width Gaussian centred at `center` (one entry per axis).
    GaussianOffset { center: Vec<f64> },
    #[serde(skip)]
    Custom(GridFunction),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinimizerConfig {
    /// Initial step `τ`.
    pub step: f64,
    pub max_iters: usize,
    /// Relative energy change below which a step counts as quiet.
    pub energy_tol: f64,
    /// Finite-difference check of the gradient at the starting point.
    pub gradient_check: bool,
    pub initializer: Initializer,
    pub backtrack: f64,
    pub growth: f64,
    pub precondition: bool,
    /// Iterations between symmetry-deviation samples in the trace.
    pub monitor_every: usize,
}

impl Default for MinimizerConfig {
    fn default() -> Self {
        MinimizerConfig {
            step: 0.5,
            max_iters: 20_000,
            energy_tol: 1e-13,
            gradient_check: false,
            initializer: Initializer::Random { seed: 0 },
            backtrack: 0.5,
            growth: 1.25,
            precondition: true,
            monitor_every: 10,
        }
    }
}

impl MinimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::InvalidParameter(format!("step must be positive, got {}", self.step)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::InvalidParameter(format!("backtrack must lie in (0, 1), got {}", self.backtrack)));
        }
        if !(self.growth > 1.0) || !self.growth.is_finite() {
            return Err(Error::InvalidParameter(format!("growth must exceed 1, got {}", self.growth)));
        }
        if !(self.energy_tol > 0.0) {
            return Err(Error::InvalidParameter("energy_tol must be positive".into()));
        }
        if self.monitor_every == 0 {
            return Err(Error::InvalidParameter("monitor_every must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub energy: f64,
    pub step: f64,
    pub mass_residual: f64,
    pub symmetry_deviation: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct RunTrace {
    pub records: Vec<IterationRecord>,
    pub u: GridFunction,
    pub energy: f64,
    pub converged: bool,
    /// The step fell below its floor before the quiet-step count was reached;
    /// the energy had stopped decreasing in floating point.
    pub stalled: bool,
    pub iterations: usize,
    pub gradient_check_error: Option<f64>,
}

impl RunTrace {
    /// Per-iteration trace as CSV.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "iter,energy,step,mass_residual,symmetry_deviation")?;
        for r in &self.records {
            let dev = r.symmetry_deviation.map(|d| format!("{d:.17e}")).unwrap_or_default();
            writeln!(out, "{},{:.17e},{:.17e},{:.17e},{}", r.iter, r.energy, r.step, r.mass_residual, dev)?;
        }
        Ok(())
    }
}

/// `δE/δū`; see [`EnergySpec::gradient`].
pub fn energy_gradient(spec: &EnergySpec, u: &GridFunction) -> Result<GridFunction> {
    spec.gradient(u)
}

/// Largest relative mismatch between `2 Re ⟨g, v⟩` and central differences of
/// the energy over `directions` seeded smooth directions.
pub fn gradient_check(spec: &EnergySpec, u: &GridFunction, directions: usize, seed: u64) -> Result<f64> {
    let g = spec.gradient(u)?;
    let mut worst = 0.0f64;
    for k in 0..directions {
        let v = direction(u, derive_seed(&[seed, k as u64]));
        let analytic = 2.0 * inner_product(&g, &v)?.re;
        let eps = 1e-5 * l2_norm(u).max(1.0) / l2_norm(&v);
        let ep = total_energy(spec, &u.add_scaled(eps, &v)?)?;
        let em = total_energy(spec, &u.add_scaled(-eps, &v)?)?;
        let numeric = (ep - em) / (2.0 * eps);
        let scale = analytic.abs().max(numeric.abs()).max(1e-12);
        worst = worst.max((numeric - analytic).abs() / scale);
    }
    Ok(worst)
}

fn direction(u: &GridFunction, seed: u64) -> GridFunction {
    let d = u.domain();
    let re = random_function(d, seed, Smoothness::Smooth);
    if u.dtype() == DType::Real {
        return re;
    }
    let im = random_function(d, derive_seed(&[seed, 1]), Smoothness::Smooth);
    let vals = re.values().iter().zip(im.values()).map(|(a, b)| Complex64::new(a.re, b.re)).collect();
    GridFunction::from_complex(d, vals).expect("finite values of matching length")
}

/// Rescales `u` to `∫|u|² = mass`.
pub fn normalize(u: &GridFunction, mass: f64) -> Result<GridFunction> {
    let norm = l2_norm(u);
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::InvalidParameter("cannot normalize a zero or non-finite function".into()));
    }
    Ok(u.scaled(mass.sqrt() / norm))
}

pub fn initial_state(spec: &EnergySpec, init: &Initializer) -> Result<GridFunction> {
    let d = spec.domain();
    let u = match init {
        Initializer::Random { seed } => positive_bumps(d, *seed),
        Initializer::GaussianOffset { center } => {
            if center.is_empty() || center.len() > 2 {
                return Err(Error::InvalidParameter("gaussian_offset center needs one or two entries".into()));
            }
            let c = [center[0], center.get(1).copied().unwrap_or(0.0)];
            GridFunction::from_fn(d, bump(d, c, 1.0, 2.0))
        }
        Initializer::Custom(u) => {
            d.check_same(u.domain())?;
            u.clone()
        }
    };
    normalize(&u, spec.mass())
}

/// Inverse of `shift + kinetic symbol` on the unpadded transform grid.
struct Preconditioner {
    fft: FftNd,
    inverse_symbol: Vec<f64>,
}

impl Preconditioner {
    fn new(spec: &EnergySpec) -> Self {
        let d = spec.domain();
        let shape = d.shape();
        let steps = d.steps();
        let shift = 1.0;
        let symbol = |idx: usize| -> f64 {
            let (i, j) = d.unravel(idx);
            let mut s = 0.0;
            for (a, k) in [(0, i), (1, j)] {
                let n = shape[a];
                if n > 1 {
                    let theta = std::f64::consts::PI * signed_index(k, n) as f64 / n as f64;
                    s += (2.0 * theta.sin() / steps[a]).powi(2);
                }
            }
            match spec.kinetic() {
                Kinetic::Classical => s,
                Kinetic::Relativistic(op) => {
                    let m = op.mass();
                    s / ((s + m * m).sqrt() + m)
                }
            }
        };
        let inverse_symbol = (0..d.len()).map(|i| 1.0 / (shift + symbol(i))).collect();
        Preconditioner { fft: FftNd::new(shape), inverse_symbol }
    }

    fn apply(&self, domain: &Domain, g: &GridFunction) -> GridFunction {
        let mut buf = g.values().to_vec();
        self.fft.forward(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.inverse_symbol) {
            *b *= s;
        }
        self.fft.inverse(&mut buf);
        let n = domain.len() as f64;
        let real = g.dtype() == DType::Real;
        for (i, b) in buf.iter_mut().enumerate() {
            *b /= n;
            if real {
                b.im = 0.0;
            }
            if domain.dirichlet() && domain.is_boundary(i) {
                *b = Complex64::new(0.0, 0.0);
            }
        }
        GridFunction::raw(domain, buf, g.dtype())
    }
}

/// `P(g - λu)` with `λ` chosen so the direction is orthogonal to `u`; to first
/// order the renormalization then leaves the step unchanged, so the energy
/// decreases for small `τ` whatever the (positive) preconditioner `P`.
fn tangent_direction(d: &Domain, pre: Option<&Preconditioner>, u: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    let apply = |f: &GridFunction| match pre {
        Some(p) => p.apply(d, f),
        None => f.clone(),
    };
    let (pg, pu) = (apply(g), apply(u));
    let lambda = inner_product(u, &pg)?.re / inner_product(u, &pu)?.re;
    pg.add_scaled(-lambda, &pu)
}

/// Minimizes `spec` on the sphere `∫|u|² = N`. `monitor`, when given, is
/// used for the symmetry deviation recorded in the trace.
pub fn ground_state(spec: &EnergySpec, cfg: &MinimizerConfig, monitor: Option<&GroupQuadrature>) -> Result<RunTrace> {
    cfg.validate()?;
    let d = spec.domain().clone();
    let mass = spec.mass();
    let mut u = initial_state(spec, &cfg.initializer)?;
    let gradient_check_error = if cfg.gradient_check { Some(gradient_check(spec, &u, 20, 0)?) } else { None };
    let pre = cfg.precondition.then(|| Preconditioner::new(spec));
    let mut energy = total_energy(spec, &u)?;
    let deviation = |u: &GridFunction| monitor.map(|g| symmetry_deviation(u, g)).transpose();
    let residual = |u: &GridFunction| (l2_norm(u).powi(2) - mass).abs();
    let mut records = vec![IterationRecord {
        iter: 0,
        energy,
        step: 0.0,
        mass_residual: residual(&u),
        symmetry_deviation: deviation(&u)?,
    }];
    let min_step = cfg.step * 1e-14;
    let max_step = cfg.step * 1e6;
    let mut tau = cfg.step;
    let mut quiet = 0;
    let mut converged = false;
    let mut stalled = false;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        let g = spec.gradient(&u)?;
        let dir = tangent_direction(&d, pre.as_ref(), &u, &g)?;
        let accepted = loop {
            let trial = normalize(&u.add_scaled(-tau, &dir)?, mass)?;
            let e = total_energy(spec, &trial)?;
            if !e.is_finite() {
                return Err(Error::Diverged(format!("energy became {e} at iteration {iterations}")));
            }
            if e < energy {
                break Some((trial, e));
            }
            tau *= cfg.backtrack;
            if tau < min_step {
                break None;
            }
        };
        let Some((next, e)) = accepted else {
            stalled = true;
            converged = true;
            break;
        };
        iterations += 1;
        let change = (energy - e) / e.abs().max(f64::MIN_POSITIVE);
        u = next;
        energy = e;
        let step = tau;
        tau = (tau * cfg.growth).min(max_step);
        quiet = if change < cfg.energy_tol { quiet + 1 } else { 0 };
        let done = quiet >= QUIET_STEPS;
        let sample = done || iterations % cfg.monitor_every == 0 || iterations == cfg.max_iters;
        records.push(IterationRecord {
            iter: iterations,
            energy,
            step,
            mass_residual: residual(&u),
            symmetry_deviation: if sample { deviation(&u)? } else { None },
        });
        if done {
            converged = true;
            break;
        }
    }
    if let Some(last) = records.last_mut() {
        if last.symmetry_deviation.is_none() {
            last.symmetry_deviation = deviation(&u)?;
        }
    }
    Ok(RunTrace { records, u, energy, converged, stalled, iterations, gradient_check_error })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub deviation: f64,
    pub energy: f64,
    /// Energy of `M_2(u)` rescaled to the constraint mass.
    pub symmetrized_energy: f64,
    /// `E[u] - E[M_2(u)]`, nonnegative when symmetrization does not raise the energy.
    pub gap: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compares the final state with its normalized `(G, 2)` orbital mean.
pub fn symmetry_report(trace: &RunTrace, spec: &EnergySpec, group: &GroupQuadrature) -> Result<SymmetryReport> {
    let u = &trace.u;
    let deviation = symmetry_deviation(u, group)?;
    let mean = OrbitModuli::new(u, group)?.mean(2.0)?;
    let symmetrized = normalize(&mean, spec.mass())?;
    let energy = total_energy(spec, u)?;
    let symmetrized_energy = total_energy(spec, &symmetrized)?;
    let gap = energy - symmetrized_energy;
    let tolerance = 1e-6 * energy.abs();
    Ok(SymmetryReport { deviation, energy, symmetrized_energy, gap, tolerance, pass: gap >= -tolerance })
}
