//! Relativistic kinetic energy `⟨u, (√(-Δ + m²) - m) u⟩` in two forms: a
//! Fourier multiplier, and the two-point kernel form
//! `∬ |u(x) - u(y)|² R_m(x - y) dx dy`.
//!
//! Transform convention: `û(k) = ∫ u(x) e^{-ikx} dx`, inverse with `(2π)^{-d}`.
//! On the grid `û(k_j) ≈ w · DFT_j` and `dk = (2π)^d / (N w)`, so the multiplier
//! form becomes `(w / N) Σ_j (√(|k_j|² + m²) - m) |DFT_j|²`.
//!
//! The kernel form sums `w² |u_i - u_j|² R_m(x_i - x_j)` over ordered node
//! pairs off the diagonal. `R_m` is singular at the origin, so for cell pairs
//! within [`NEAR_FIELD`] steps of each other (the diagonal included) the
//! midpoint value is swapped for the exact cell-pair integral of the
//! linearized integrand `|∇u · z|² R_m(z)`. Only pairs inside the truncated
//! domain are counted, so inputs should have decayed at the edge.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernel::{relativistic_kernel, Kernel, KernelKind};
use crate::error::{Error, Result};
use crate::fft::{signed_index, FftNd};
use crate::grid::{gradient, Domain, GridFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelativisticMethod {
    Spectral,
    Kernel,
}

fn check_mass(m: f64) -> Result<()> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::InvalidParameter(format!("relativistic mass must be positive, got {m}")));
    }
    Ok(())
}

/// The multiplier `√(|k|² + m²) - m` on a domain's unpadded transform grid.
#[derive(Clone)]
pub struct RelativisticOperator {
    domain: Domain,
    mass: f64,
    fft: FftNd,
    multiplier: Vec<f64>,
}

impl RelativisticOperator {
    pub fn new(domain: &Domain, mass: f64) -> Result<Self> {
        check_mass(mass)?;
        let shape = domain.shape();
        let steps = domain.steps();
        let freq = |axis: usize, j: usize| {
            let n = shape[axis];
            if n == 1 {
                0.0
            } else {
                2.0 * PI * signed_index(j, n) as f64 / (n as f64 * steps[axis])
            }
        };
        let multiplier = (0..domain.len())
            .map(|idx| {
                let (i, j) = domain.unravel(idx);
                let k2 = freq(0, i).powi(2) + freq(1, j).powi(2);
                // √(k² + m²) - m without cancellation
                k2 / ((k2 + mass * mass).sqrt() + mass)
            })
            .collect();
        Ok(RelativisticOperator { domain: domain.clone(), mass, fft: FftNd::new(shape), multiplier })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    fn transform(&self, u: &GridFunction) -> Result<Vec<Complex64>> {
        self.domain.check_same(u.domain())?;
        let mut buf = u.values().to_vec();
        self.fft.forward(&mut buf);
        Ok(buf)
    }

    pub fn energy(&self, u: &GridFunction) -> Result<f64> {
        let buf = self.transform(u)?;
        let s: f64 = buf.iter().zip(&self.multiplier).map(|(c, m)| m * c.norm_sqr()).sum();
        Ok(s * self.domain.cell_measure() / self.domain.len() as f64)
    }

    /// `(√(-Δ + m²) - m) u`, the first variation of [`Self::energy`].
    pub fn apply(&self, u: &GridFunction) -> Result<Vec<Complex64>> {
        let mut buf = self.transform(u)?;
        for (c, m) in buf.iter_mut().zip(&self.multiplier) {
            *c *= m;
        }
        self.fft.inverse(&mut buf);
        let n = self.domain.len() as f64;
        for c in buf.iter_mut() {
            *c /= n;
        }
        Ok(buf)
    }
}

/// Kernel form of the relativistic energy on a domain.
#[derive(Clone, Debug)]
pub struct RelativisticKernelForm {
    kernel: Kernel,
    row_sums: Vec<f64>,
    near_field: [f64; 2],
}

impl RelativisticKernelForm {
    pub fn new(domain: &Domain, mass: f64) -> Result<Self> {
        check_mass(mass)?;
        let kernel = Kernel::new(KernelKind::RelativisticBessel { m: mass }, domain)?;
        let row_sums = kernel.convolve(&vec![1.0; domain.len()]);
        let near_field = near_field_correction(mass, domain);
        Ok(RelativisticKernelForm { kernel, row_sums, near_field })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    /// `Σ_{i≠j} w² |u_i - u_j|² R(x_i - x_j)`, without the diagonal cells.
    pub fn off_diagonal(&self, u: &GridFunction) -> Result<f64> {
        self.kernel.domain().check_same(u.domain())?;
        let w = u.domain().cell_measure();
        let ru = self.kernel.convolve_complex(u.values());
        let mut total = 0.0;
        for ((v, r), s) in u.values().iter().zip(&ru).zip(&self.row_sums) {
            total += 2.0 * v.norm_sqr() * s - 2.0 * (v.conj() * r).re;
        }
        Ok(w * total)
    }

    pub fn energy(&self, u: &GridFunction) -> Result<f64> {
        let off = self.off_diagonal(u)?;
        let grad = gradient(u)?;
        let near: f64 = (0..u.domain().dim())
            .map(|a| self.near_field[a] * grad.component(a).iter().map(|g| g.norm_sqr()).sum::<f64>())
            .sum();
        Ok(off + near)
    }
}

/// Offsets (in steps, per axis) whose cell pairs are integrated exactly.
pub const NEAR_FIELD: i64 = 6;

/// Per-axis coefficients `C_a` such that the near-field cell pairs add
/// `Σ_i C_a |∂_a u(x_i)|²` beyond the midpoint sum.
fn near_field_correction(m: f64, domain: &Domain) -> [f64; 2] {
    let dim = domain.dim();
    let steps = domain.steps();
    let w = domain.cell_measure();
    let reach = |a: usize| {
        let n = domain.shape()[a] as i64;
        if a >= dim {
            0
        } else if domain.is_periodic(a) {
            NEAR_FIELD.min((n - 1) / 2)
        } else {
            NEAR_FIELD.min(n - 1)
        }
    };
    let mut out = [0.0; 2];
    for o0 in -reach(0)..=reach(0) {
        for o1 in -reach(1)..=reach(1) {
            let z = [o0 as f64 * steps[0], o1 as f64 * steps[1]];
            let r = z[0].hypot(z[1]);
            for (a, c) in out.iter_mut().enumerate().take(dim) {
                let midpoint = if r == 0.0 { 0.0 } else { w * w * z[a] * z[a] * relativistic_kernel(m, dim, r) };
                *c += cell_pair_moment(m, dim, steps, [o0, o1], a) - midpoint;
            }
        }
    }
    out
}

/// `∫ z_a² R_m(z) Λ(z - o h) dz`, where `Λ(z) = Π_b (h_b - |z_b|)_+` is the
/// overlap measure of two cells.
pub(crate) fn cell_pair_moment(m: f64, dim: usize, steps: [f64; 2], offset: [i64; 2], axis: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(24);
    let centre = [offset[0] as f64 * steps[0], offset[1] as f64 * steps[1]];
    let weight = |z: [f64; 2]| {
        (0..dim).map(|b| (steps[b] - (z[b] - centre[b]).abs()).max(0.0)).product::<f64>()
    };
    let integrand = |z: [f64; 2]| {
        let r = z[0].hypot(z[1]);
        if r == 0.0 {
            return 0.0;
        }
        z[axis] * z[axis] * relativistic_kernel(m, dim, r) * weight(z)
    };
    // Λ is smooth on each quarter of its support
    let lows = |b: usize| -> Vec<f64> {
        if b < dim {
            vec![centre[b] - steps[b], centre[b]]
        } else {
            vec![0.0]
        }
    };
    let mut total = 0.0;
    for &lo0 in &lows(0) {
        for &lo1 in &lows(1) {
            total += if dim == 1 {
                gl_interval(&nodes, &weights, lo0, lo0 + steps[0], |x| integrand([x, 0.0]))
            } else if [lo0, lo0 + steps[0]].contains(&0.0) && [lo1, lo1 + steps[1]].contains(&0.0) {
                polar_corner(&nodes, &weights, [lo0, lo1], steps, &integrand)
            } else {
                gl_interval(&nodes, &weights, lo0, lo0 + steps[0], |x| {
                    gl_interval(&nodes, &weights, lo1, lo1 + steps[1], |y| integrand([x, y]))
                })
            };
        }
    }
    total
}

/// Integral over the rectangle `[lo, lo + h]` that has the origin as a corner,
/// in polar coordinates about the origin so the `1/|z|` behaviour is absorbed
/// by the Jacobian.
fn polar_corner(nodes: &[f64], weights: &[f64], lo: [f64; 2], h: [f64; 2], f: &impl Fn([f64; 2]) -> f64) -> f64 {
    let sign = [if lo[0] < 0.0 { -1.0 } else { 1.0 }, if lo[1] < 0.0 { -1.0 } else { 1.0 }];
    let kink = (h[1] / h[0]).atan();
    let radial = |phi: f64| {
        let (sn, cs) = phi.sin_cos();
        let r_max = (h[0] / cs).min(h[1] / sn);
        gl_interval(nodes, weights, 0.0, r_max, |r| r * f([sign[0] * r * cs, sign[1] * r * sn]))
    };
    gl_interval(nodes, weights, 0.0, kink, radial) + gl_interval(nodes, weights, kink, PI / 2.0, radial)
}

fn gl_interval(nodes: &[f64], weights: &[f64], a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    half * nodes.iter().zip(weights).map(|(x, w)| w * f(mid + half * x)).sum::<f64>()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// `R[u]` by either method.
pub fn relativistic_r(u: &GridFunction, m: f64, method: RelativisticMethod) -> Result<f64> {
    match method {
        RelativisticMethod::Spectral => RelativisticOperator::new(u.domain(), m)?.energy(u),
        RelativisticMethod::Kernel => RelativisticKernelForm::new(u.domain(), m)?.energy(u),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{dirichlet_form, inner_product};

    fn gauss_1d(l: f64, n: usize) -> GridFunction {
        let d = Domain::line1d(l, n).unwrap();
        GridFunction::from_fn(&d, |x| PI.powf(-0.25) * (-x[0] * x[0] / 2.0).exp())
    }

    fn gauss_2d(l: f64, n: usize) -> GridFunction {
        let d = Domain::plane2d(l, n).unwrap();
        GridFunction::from_fn(&d, |x| (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp() / PI.sqrt())
    }

    #[test]
    fn zero_function_has_zero_energy() {
        let d = Domain::line1d(4.0, 64).unwrap();
        let z = GridFunction::zeros(&d);
        for method in [RelativisticMethod::Spectral, RelativisticMethod::Kernel] {
            assert_eq!(relativistic_r(&z, 1.0, method).unwrap(), 0.0);
        }
        assert!(relativistic_r(&z, 0.0, RelativisticMethod::Spectral).is_err());
    }

    #[test]
    fn methods_agree_in_one_dimension() {
        let u = gauss_1d(10.0, 512);
        let s = relativistic_r(&u, 1.0, RelativisticMethod::Spectral).unwrap();
        let k = relativistic_r(&u, 1.0, RelativisticMethod::Kernel).unwrap();
        assert!((s - k).abs() <= 0.02 * s, "{s} vs {k}");
    }

    #[test]
    fn methods_agree_in_two_dimensions() {
        let u = gauss_2d(8.0, 64);
        let s = relativistic_r(&u, 1.0, RelativisticMethod::Spectral).unwrap();
        let k = relativistic_r(&u, 1.0, RelativisticMethod::Kernel).unwrap();
        assert!((s - k).abs() <= 0.02 * s, "{s} vs {k}");
    }

    #[test]
    fn kernel_form_matches_direct_pair_sum() {
        let d = Domain::plane2d(4.0, 12).unwrap();
        let u = GridFunction::from_fn(&d, |x| (-(x[0] - 0.3).powi(2) - x[1] * x[1]).exp());
        let form = RelativisticKernelForm::new(&d, 1.3).unwrap();
        let w = d.cell_measure();
        let mut direct = 0.0;
        for i in 0..d.len() {
            for j in 0..d.len() {
                if i != j {
                    let [a, b] = [d.coord(i), d.coord(j)];
                    let r = (a[0] - b[0]).hypot(a[1] - b[1]);
                    direct += w * w * (u.values()[i] - u.values()[j]).norm_sqr() * relativistic_kernel(1.3, 2, r);
                }
            }
        }
        let fast = form.off_diagonal(&u).unwrap();
        assert!((fast - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn large_mass_limit() {
        let u = gauss_1d(10.0, 512);
        let m = 50.0;
        let ratio = relativistic_r(&u, m, RelativisticMethod::Spectral).unwrap() * 2.0 * m / dirichlet_form(&u);
        assert!((0.9..=1.1).contains(&ratio), "{ratio}");
    }

    #[test]
    fn operator_is_the_first_variation() {
        let u = gauss_1d(6.0, 128);
        let op = RelativisticOperator::new(u.domain(), 0.7).unwrap();
        let lu = GridFunction::from_complex(u.domain(), op.apply(&u).unwrap()).unwrap();
        // quadratic form: R[u] = ⟨u, L u⟩
        let q = inner_product(&u, &lu).unwrap();
        assert!((q.re - op.energy(&u).unwrap()).abs() <= 1e-12 * q.re);
        assert!(q.im.abs() <= 1e-12 * q.re);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(24);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let p: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(46)).sum();
        assert!((p - 2.0 / 47.0).abs() < 1e-14);
    }

    #[test]
    fn cell_moments_match_cartesian_rule() {
        let h = [0.2, 0.2];
        let n = 2000;
        for offset in [[0, 0], [1, 0], [1, 1]] {
            let centre = [offset[0] as f64 * h[0], offset[1] as f64 * h[1]];
            let dz = 2.0 * h[0] / n as f64;
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let z = [centre[0] - h[0] + (i as f64 + 0.5) * dz, centre[1] - h[1] + (j as f64 + 0.5) * dz];
                    let r = z[0].hypot(z[1]);
                    let lam = (h[0] - (z[0] - centre[0]).abs()) * (h[1] - (z[1] - centre[1]).abs());
                    s += z[0] * z[0] * relativistic_kernel(1.0, 2, r) * lam;
                }
            }
            let cartesian = s * dz * dz;
            let quad = cell_pair_moment(1.0, 2, h, offset, 0);
            assert!((quad - cartesian).abs() < 1e-3 * cartesian, "{offset:?}: {quad} vs {cartesian}");
        }
        // near the origin z² R_m ~ 1/(2π) in one dimension
        let small = cell_pair_moment(1.0, 1, [1e-3, 0.0], [0, 0], 0);
        assert!((small - 1e-6 / (2.0 * PI)).abs() < 1e-3 * small);
    }

    #[test]
    fn kernel_form_converges_in_two_dimensions() {
        let errs: Vec<f64> = [32, 64]
            .iter()
            .map(|&n| {
                let u = gauss_2d(8.0, n);
                let s = relativistic_r(&u, 1.0, RelativisticMethod::Spectral).unwrap();
                (relativistic_r(&u, 1.0, RelativisticMethod::Kernel).unwrap() - s).abs() / s
            })
            .collect();
        assert!(errs[1] < errs[0]);
    }
}
