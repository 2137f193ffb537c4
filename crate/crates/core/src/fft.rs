//! Row-major FFTs over one- and two-axis buffers, plus the zero-padded
//! linear convolution used by every two-point interaction term.
//!
//! Convention: forward transform uses the kernel `e^{-ikx}`, the inverse is
//! unnormalized here and callers divide by the buffer length.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::Domain;

#[derive(Clone)]
pub(crate) struct FftNd {
    dims: [usize; 2],
    fwd: [Arc<dyn Fft<f64>>; 2],
    inv: [Arc<dyn Fft<f64>>; 2],
}

impl FftNd {
    pub fn new(dims: [usize; 2]) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = [planner.plan_fft_forward(dims[0]), planner.plan_fft_forward(dims[1])];
        let inv = [planner.plan_fft_inverse(dims[0]), planner.plan_fft_inverse(dims[1])];
        FftNd { dims, fwd, inv }
    }

    pub fn dims(&self) -> [usize; 2] {
        self.dims
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.run(buf, &self.fwd);
    }

    /// Unnormalized inverse.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.run(buf, &self.inv);
    }

    fn run(&self, buf: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>; 2]) {
        let [m0, m1] = self.dims;
        debug_assert_eq!(buf.len(), m0 * m1);
        if m1 > 1 {
            // rows are contiguous along axis 1
            plans[1].process(buf);
        }
        if m0 > 1 {
            let mut col = vec![Complex64::new(0.0, 0.0); m0];
            for j in 0..m1 {
                for i in 0..m0 {
                    col[i] = buf[i * m1 + j];
                }
                plans[0].process(&mut col);
                for i in 0..m0 {
                    buf[i * m1 + j] = col[i];
                }
            }
        }
    }
}

/// Signed integer frequency index for position `j` of a length-`m` transform.
pub(crate) fn signed_index(j: usize, m: usize) -> i64 {
    if j <= m / 2 {
        j as i64
    } else {
        j as i64 - m as i64
    }
}

/// Zero-padded linear convolution on a domain. Non-periodic axes are padded to
/// twice their length so that no wraparound reaches the grid; periodic axes
/// (the cylinder angle) convolve circularly.
#[derive(Clone)]
pub(crate) struct Convolver {
    shape: [usize; 2],
    fft: FftNd,
    cell: f64,
}

impl Convolver {
    pub fn new(domain: &Domain) -> Self {
        let shape = domain.shape();
        let mut dims = [1usize; 2];
        for a in 0..2 {
            dims[a] = if shape[a] == 1 {
                1
            } else if domain.is_periodic(a) {
                shape[a]
            } else {
                2 * shape[a]
            };
        }
        Convolver { shape, fft: FftNd::new(dims), cell: domain.cell_measure() }
    }

    /// Offset (in grid steps) represented by padded index `j` on axis `a`.
    pub fn offset(&self, a: usize, j: usize) -> i64 {
        let m = self.fft.dims()[a];
        if m == self.shape[a] {
            // periodic axis: offsets 0..m
            j as i64
        } else {
            signed_index(j, m)
        }
    }

    /// Transform of the kernel sampled at every padded offset. The slot at
    /// offset `-n` is never reached by a grid-to-grid difference; it only
    /// affects the circulant spectrum used for certificates.
    pub fn kernel_spectrum(&self, sample: impl Fn(i64, i64) -> f64) -> Vec<Complex64> {
        let [m0, m1] = self.fft.dims();
        let mut buf = vec![Complex64::new(0.0, 0.0); m0 * m1];
        for i in 0..m0 {
            let oi = self.offset(0, i);
            for j in 0..m1 {
                let oj = self.offset(1, j);
                buf[i * m1 + j] = Complex64::new(sample(oi, oj), 0.0);
            }
        }
        self.fft.forward(&mut buf);
        buf
    }

    /// `(h * f)(x_i) = sum_j w h(x_i - x_j) f_j` for real `f`.
    pub fn convolve(&self, spectrum: &[Complex64], f: &[f64]) -> Vec<f64> {
        let [m0, m1] = self.fft.dims();
        let [n0, n1] = self.shape;
        let mut buf = vec![Complex64::new(0.0, 0.0); m0 * m1];
        for i in 0..n0 {
            for j in 0..n1 {
                buf[i * m1 + j] = Complex64::new(f[i * n1 + j], 0.0);
            }
        }
        self.fft.forward(&mut buf);
        for (b, s) in buf.iter_mut().zip(spectrum) {
            *b *= s;
        }
        self.fft.inverse(&mut buf);
        let scale = self.cell / (m0 * m1) as f64;
        let mut out = vec![0.0; n0 * n1];
        for i in 0..n0 {
            for j in 0..n1 {
                out[i * n1 + j] = buf[i * m1 + j].re * scale;
            }
        }
        out
    }
}
