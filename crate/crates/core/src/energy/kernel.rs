//! Even two-point kernels `h(x - y)` sampled on a domain's difference grid,
//! with their transform-based convolution and positive-definiteness
//! certificate.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bessel::bessel_k;
use crate::error::{Error, Result};
use crate::fft::Convolver;
use crate::group::{invariance_deviation, GroupQuadrature, GroupSpec};
use crate::grid::{Domain, DomainKind, GridFunction};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelKind {
    /// `e^{-|z|²/(2σ²)}`
    Gaussian { sigma: f64 },
    /// `1_{|z| <= a}`
    Box { a: f64 },
    /// `-|z|`, line only.
    NegAbs,
    /// The relativistic kinetic kernel of mass `m` in the domain's dimension,
    /// with the origin sample set to zero.
    RelativisticBessel { m: f64 },
    /// Samples on the difference grid.
    #[serde(skip)]
    Table(GridFunction),
}

impl KernelKind {
    pub fn name(&self) -> &'static str {
        match self {
            KernelKind::Gaussian { .. } => "gaussian",
            KernelKind::Box { .. } => "box",
            KernelKind::NegAbs => "neg_abs",
            KernelKind::RelativisticBessel { .. } => "relativistic_bessel",
            KernelKind::Table(_) => "table",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PdMode {
    All,
    MeanZero,
}

/// `R_m(z) = (m/2π)^{(d+1)/2} K_{(d+1)/2}(m|z|) / |z|^{(d+1)/2}` for `z ≠ 0`.
pub fn relativistic_kernel(m: f64, dim: usize, r: f64) -> f64 {
    let nu = (dim as f64 + 1.0) / 2.0;
    if r == 0.0 {
        return 0.0;
    }
    (m / (2.0 * PI)).powf(nu) * bessel_k(nu, m * r).expect("order and argument are valid") / r.powf(nu)
}

/// A kernel bound to the domain whose functions it convolves.
#[derive(Clone)]
pub struct Kernel {
    kind: KernelKind,
    domain: Domain,
    conv: Convolver,
    spectrum: Vec<Complex64>,
}

impl std::fmt::Debug for Kernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Kernel").field("kind", &self.kind.name()).field("domain", &self.domain.describe()).finish()
    }
}

impl Kernel {
    pub fn new(kind: KernelKind, domain: &Domain) -> Result<Self> {
        match &kind {
            KernelKind::Gaussian { sigma } if !(*sigma > 0.0) => {
                return Err(Error::InvalidParameter(format!("gaussian kernel needs sigma > 0, got {sigma}")))
            }
            KernelKind::Box { a } if !(*a > 0.0) => {
                return Err(Error::InvalidParameter(format!("box kernel needs a > 0, got {a}")))
            }
            KernelKind::NegAbs if domain.kind() != DomainKind::Line1d => {
                return Err(Error::Unsupported("neg_abs kernel is defined on line1d only".into()))
            }
            KernelKind::RelativisticBessel { m } if !(*m > 0.0) => {
                return Err(Error::InvalidParameter(format!("relativistic kernel needs m > 0, got {m}")))
            }
            KernelKind::Table(t) => check_table(t, domain)?,
            _ => {}
        }
        let conv = Convolver::new(domain);
        let mut k = Kernel { kind, domain: domain.clone(), conv, spectrum: Vec::new() };
        k.spectrum = k.conv.kernel_spectrum(|a, b| k.sample(a, b));
        Ok(k)
    }

    pub fn gaussian(sigma: f64, domain: &Domain) -> Result<Self> {
        Self::new(KernelKind::Gaussian { sigma }, domain)
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Distance between nodes `(a, b)` grid steps apart. On the cylinder this
    /// is the chord of the unit-radius embedding in R³, so a kernel that is
    /// positive definite on R³ stays positive definite on the grid.
    fn distance(&self, a: i64, b: i64) -> f64 {
        let [h0, h1] = self.domain.steps();
        let across = if self.domain.is_periodic(1) {
            let m = self.domain.shape()[1] as i64;
            let b = (b + m / 2).rem_euclid(m) - m / 2;
            2.0 * (0.5 * b as f64 * h1).sin()
        } else {
            b as f64 * h1
        };
        (a as f64 * h0).hypot(across)
    }

    /// Kernel value at a difference of `(a, b)` grid steps.
    pub fn sample(&self, a: i64, b: i64) -> f64 {
        let r = self.distance(a, b);
        match &self.kind {
            KernelKind::Gaussian { sigma } => (-r * r / (2.0 * sigma * sigma)).exp(),
            KernelKind::Box { a } => {
                if r <= *a {
                    1.0
                } else {
                    0.0
                }
            }
            KernelKind::NegAbs => -r,
            KernelKind::RelativisticBessel { m } => relativistic_kernel(*m, self.domain.dim(), r),
            KernelKind::Table(t) => {
                let [n0, n1] = self.domain.shape();
                let i = a + n0 as i64 - 1;
                let j = if self.domain.is_periodic(1) {
                    b.rem_euclid(n1 as i64)
                } else if self.domain.dim() == 2 {
                    b + n1 as i64 - 1
                } else {
                    b
                };
                let [t0, t1] = t.domain().shape();
                if i < 0 || j < 0 || i >= t0 as i64 || j >= t1 as i64 {
                    0.0
                } else {
                    t.values()[t.domain().index(i as usize, j as usize)].re
                }
            }
        }
    }

    /// Samples on the difference grid of the bound domain.
    pub fn samples(&self) -> GridFunction {
        let diff = self.domain.difference_domain();
        let [n0, n1] = self.domain.shape();
        let periodic = self.domain.is_periodic(1);
        let two_d = self.domain.dim() == 2;
        GridFunction::from_fn_index(&diff, |i, j| {
            let a = i as i64 - (n0 as i64 - 1);
            let b = if periodic || !two_d { j as i64 } else { j as i64 - (n1 as i64 - 1) };
            self.sample(a, b)
        })
    }

    /// `(h * f)(x) = ∫ h(x - y) f(y) dy` for real `f`.
    pub fn convolve(&self, f: &[f64]) -> Vec<f64> {
        self.conv.convolve(&self.spectrum, f)
    }

    /// Complex convolution, part by part.
    pub fn convolve_complex(&self, f: &[Complex64]) -> Vec<Complex64> {
        let re: Vec<f64> = f.iter().map(|v| v.re).collect();
        let im: Vec<f64> = f.iter().map(|v| v.im).collect();
        let (cr, ci) = (self.convolve(&re), self.convolve(&im));
        cr.into_iter().zip(ci).map(|(a, b)| Complex64::new(a, b)).collect()
    }

    /// `∬ f(x) h(x - y) g(y) dx dy`.
    pub fn bilinear(&self, f: &[f64], g: &[f64]) -> f64 {
        let hg = self.convolve(g);
        self.domain.cell_measure() * f.iter().zip(&hg).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Spectrum of `f ↦ h * f` on the padded grid.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let w = self.domain.cell_measure();
        self.spectrum.iter().map(|s| s.re * w).collect()
    }

    /// Largest deviation from invariance of the difference-grid samples under
    /// `group`.
    pub fn group_deviation(&self, group: &GroupSpec) -> Result<f64> {
        if matches!(group, GroupSpec::CylinderShift { .. }) {
            // angular shifts move both points and leave every difference alone
            return Ok(0.0);
        }
        let samples = self.samples();
        let g = GroupQuadrature::new(samples.domain(), group)?;
        invariance_deviation(&samples, &g)
    }
}

fn check_table(t: &GridFunction, domain: &Domain) -> Result<()> {
    let diff = domain.difference_domain();
    if t.domain().shape() != diff.shape() || t.domain().kind() != diff.kind() {
        return Err(Error::DomainMismatch(format!(
            "kernel table on {} but the difference grid is {}",
            t.domain().describe(),
            diff.describe()
        )));
    }
    let [t0, t1] = diff.shape();
    let periodic = domain.is_periodic(1);
    let max = t.max_abs();
    for i in 0..t0 {
        for j in 0..t1 {
            let mj = if periodic {
                (t1 - j) % t1
            } else {
                t1 - 1 - j
            };
            let a = t.values()[diff.index(i, j)].re;
            let b = t.values()[diff.index(t0 - 1 - i, mj)].re;
            if (a - b).abs() > 1e-12 * max.max(1.0) {
                return Err(Error::InvalidParameter("kernel table is not even".into()));
            }
        }
    }
    Ok(())
}

/// Discrete certificate: every eigenvalue of the padded convolution operator
/// (the zero frequency exempt in `MeanZero` mode) is `>= -1e-10 · max`.
/// Returns the verdict and the smallest eigenvalue considered.
pub fn positive_definite_check(kernel: &Kernel, mode: PdMode) -> (bool, f64) {
    let eig = kernel.eigenvalues();
    let max = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let start = if mode == PdMode::MeanZero { 1 } else { 0 };
    let min = eig[start..].iter().copied().fold(f64::INFINITY, f64::min);
    (min >= -1e-10 * max, min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// `∬ f h g` by the direct double sum.
    fn double_sum(k: &Kernel, f: &[f64], g: &[f64]) -> f64 {
        let d = k.domain();
        let w = d.cell_measure();
        let [_, n1] = d.shape();
        let mut total = 0.0;
        for i in 0..d.len() {
            for j in 0..d.len() {
                let a = (i / n1) as i64 - (j / n1) as i64;
                let b = (i % n1) as i64 - (j % n1) as i64;
                total += f[i] * k.sample(a, b) * g[j];
            }
        }
        total * w * w
    }

    fn domains() -> Vec<Domain> {
        vec![
            Domain::line1d(4.0, 33).unwrap(),
            Domain::plane2d(4.0, 12).unwrap(),
            Domain::cylinder(3.0, 10, 12).unwrap(),
        ]
    }

    #[test]
    fn convolution_matches_double_sum() {
        for d in domains() {
            let k = Kernel::gaussian(0.9, &d).unwrap();
            let f: Vec<f64> = (0..d.len()).map(|i| ((i * 7 % 11) as f64 - 5.0) / 3.0).collect();
            let g: Vec<f64> = (0..d.len()).map(|i| ((i * 5 % 13) as f64) / 4.0).collect();
            let (fast, slow) = (k.bilinear(&f, &g), double_sum(&k, &f, &g));
            assert!((fast - slow).abs() <= 1e-12 * slow.abs(), "{}: {fast} vs {slow}", d.describe());
            assert!((fast - k.bilinear(&g, &f)).abs() <= 1e-12 * slow.abs());
        }
    }

    #[test]
    fn certificates() {
        let line = Domain::line1d(8.0, 64).unwrap();
        let (ok, min) = positive_definite_check(&Kernel::gaussian(1.0, &line).unwrap(), PdMode::All);
        assert!(ok && min >= -1e-12, "{min}");
        let (ok, min) = positive_definite_check(&Kernel::new(KernelKind::Box { a: 1.0 }, &line).unwrap(), PdMode::All);
        assert!(!ok && min < 0.0);
        let neg = Kernel::new(KernelKind::NegAbs, &line).unwrap();
        assert!(positive_definite_check(&neg, PdMode::MeanZero).0);
        assert!(!positive_definite_check(&neg, PdMode::All).0);
        let sq = Domain::plane2d(4.0, 16).unwrap();
        assert!(positive_definite_check(&Kernel::gaussian(0.7, &sq).unwrap(), PdMode::All).0);
        // a wide Gaussian in the wrapped angle alone would fail here
        let cyl = Domain::cylinder(8.0, 32, 64).unwrap();
        assert!(positive_definite_check(&Kernel::gaussian(1.0, &cyl).unwrap(), PdMode::All).0);
    }

    #[test]
    fn neg_abs_needs_a_line() {
        let sq = Domain::plane2d(4.0, 16).unwrap();
        assert!(matches!(Kernel::new(KernelKind::NegAbs, &sq), Err(Error::Unsupported(_))));
        assert!(Kernel::gaussian(0.0, &sq).is_err());
    }

    #[test]
    fn table_round_trips_samples() {
        for d in domains() {
            let k = Kernel::gaussian(1.1, &d).unwrap();
            let t = Kernel::new(KernelKind::Table(k.samples()), &d).unwrap();
            for (a, b) in [(0, 0), (1, 0), (-3, 2), (2, -1)] {
                let b = if d.dim() == 1 { 0 } else { b };
                assert_eq!(t.sample(a, b), k.sample(a, b));
            }
            let f: Vec<f64> = (0..d.len()).map(|i| (i % 5) as f64).collect();
            assert!((t.bilinear(&f, &f) - k.bilinear(&f, &f)).abs() <= 1e-12 * k.bilinear(&f, &f));
        }
    }

    #[test]
    fn odd_table_is_rejected() {
        let d = Domain::line1d(4.0, 9).unwrap();
        let diff = d.difference_domain();
        let odd = GridFunction::from_fn(&diff, |x| x[0]);
        assert!(Kernel::new(KernelKind::Table(odd), &d).is_err());
    }

    #[test]
    fn radial_kernels_are_invariant() {
        let sq = Domain::plane2d(4.0, 16).unwrap();
        let k = Kernel::gaussian(1.0, &sq).unwrap();
        assert!(k.group_deviation(&GroupSpec::rotation_zn(4)).unwrap() <= 1e-14);
        let cyl = Domain::cylinder(4.0, 16, 16).unwrap();
        let k = Kernel::gaussian(1.0, &cyl).unwrap();
        assert!(k.group_deviation(&GroupSpec::cylinder_shift(8)).unwrap() <= 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn pd_certificate_is_sound(vals in prop::collection::vec(-2.0f64..2.0, 48)) {
            let d = Domain::line1d(6.0, 48).unwrap().with_dirichlet(false);
            let k = Kernel::gaussian(0.8, &d).unwrap();
            prop_assert!(positive_definite_check(&k, PdMode::All).0);
            let q = k.bilinear(&vals, &vals);
            let norm2: f64 = vals.iter().map(|v| v * v).sum::<f64>() * d.cell_measure();
            prop_assert!(q >= -1e-10 * norm2);
        }
    }
}
