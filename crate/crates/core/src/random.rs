//! Seeded random test functions.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::grid::{Domain, DomainKind, GridFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothness {
    /// Sum of 2 to 8 signed Gaussian bumps.
    Smooth,
    /// Low-pass filtered white noise under a Gaussian window.
    Rough,
    /// Union of 1 to 4 intervals or rectangles.
    Indicator,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes stream identifiers into one seed (SplitMix64 finalizer).
pub fn derive_seed(parts: &[u64]) -> u64 {
    parts.iter().fold(0x9E37_79B9_7F4A_7C15u64, |acc, &p| {
        let mut z = acc ^ p.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(acc << 6).wrapping_add(acc >> 2);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    })
}

/// A single bump centred at `c` with axial width `sigma`; on the cylinder the
/// angular profile is `exp(κ (cos(θ - c_θ) - 1))`.
pub(crate) fn bump(domain: &Domain, c: [f64; 2], sigma: f64, kappa: f64) -> impl Fn([f64; 2]) -> f64 + '_ {
    move |x: [f64; 2]| match domain.kind() {
        DomainKind::Line1d => (-(x[0] - c[0]).powi(2) / (2.0 * sigma * sigma)).exp(),
        DomainKind::Plane2d => (-((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)) / (2.0 * sigma * sigma)).exp(),
        DomainKind::Cylinder => {
            (-(x[0] - c[0]).powi(2) / (2.0 * sigma * sigma)).exp() * (kappa * ((x[1] - c[1]).cos() - 1.0)).exp()
        }
    }
}

fn random_centre(domain: &Domain, rng: &mut ChaCha8Rng, spread: f64) -> [f64; 2] {
    let l = domain.half_width();
    let c0 = rng.gen_range(-spread * l..=spread * l);
    let c1 = match domain.kind() {
        DomainKind::Line1d => 0.0,
        DomainKind::Plane2d => rng.gen_range(-spread * l..=spread * l),
        DomainKind::Cylinder => rng.gen_range(0.0..2.0 * PI),
    };
    [c0, c1]
}

/// Deterministic random function of the requested kind.
pub fn random_function(domain: &Domain, seed: u64, smoothness: Smoothness) -> GridFunction {
    let mut rng = rng(seed);
    match smoothness {
        Smoothness::Smooth => smooth(domain, &mut rng, true),
        Smoothness::Rough => rough(domain, &mut rng),
        Smoothness::Indicator => indicator(domain, &mut rng),
    }
}

/// Sum of bumps with positive amplitudes (the minimizer's asymmetric start).
pub fn positive_bumps(domain: &Domain, seed: u64) -> GridFunction {
    smooth(domain, &mut rng(seed), false)
}

fn smooth(domain: &Domain, rng: &mut ChaCha8Rng, signed: bool) -> GridFunction {
    let l = domain.half_width();
    let count = rng.gen_range(2..=8);
    let bumps: Vec<([f64; 2], f64, f64, f64)> = (0..count)
        .map(|_| {
            let c = random_centre(domain, rng, 0.3);
            let sigma = rng.gen_range(0.0625 * l..=0.125 * l);
            let kappa = rng.gen_range(1.0..=4.0);
            let mut amp = rng.gen_range(0.5..=1.5);
            if signed && rng.gen_bool(0.5) {
                amp = -amp;
            }
            (c, sigma, kappa, amp)
        })
        .collect();
    GridFunction::from_fn(domain, |x| bumps.iter().map(|&(c, s, k, a)| a * bump(domain, c, s, k)(x)).sum())
}

fn rough(domain: &Domain, rng: &mut ChaCha8Rng) -> GridFunction {
    let [n0, n1] = domain.shape();
    let noise: Vec<f64> = (0..domain.len()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    // separable binomial-like smoothing over +-3 nodes
    let taps: Vec<f64> = (-3i64..=3).map(|k| (-(k * k) as f64 / 4.0).exp()).collect();
    let norm: f64 = taps.iter().sum();
    let pass = |src: &[f64], axis: usize| -> Vec<f64> {
        let mut out = vec![0.0; src.len()];
        let n = [n0, n1][axis] as i64;
        if n == 1 {
            return src.to_vec();
        }
        let periodic = domain.is_periodic(axis);
        for idx in 0..src.len() {
            let (i, j) = domain.unravel(idx);
            let k0 = if axis == 0 { i } else { j } as i64;
            let mut acc = 0.0;
            for (t, w) in taps.iter().enumerate() {
                let mut k = k0 + t as i64 - 3;
                if periodic {
                    k = k.rem_euclid(n);
                } else if k < 0 || k >= n {
                    continue;
                }
                let src_idx = if axis == 0 { domain.index(k as usize, j) } else { domain.index(i, k as usize) };
                acc += w * src[src_idx];
            }
            out[idx] = acc / norm;
        }
        out
    };
    let smoothed = pass(&pass(&noise, 0), 1);
    let l = domain.half_width();
    let window = |x: [f64; 2]| {
        let r2 = match domain.kind() {
            DomainKind::Cylinder => x[0] * x[0],
            _ => x[0] * x[0] + x[1] * x[1],
        };
        (-r2 / (2.0 * (0.4 * l).powi(2))).exp()
    };
    GridFunction::from_fn_index(domain, |i, j| {
        let idx = domain.index(i, j);
        smoothed[idx] * window(domain.coord(idx))
    })
}

fn indicator(domain: &Domain, rng: &mut ChaCha8Rng) -> GridFunction {
    let l = domain.half_width();
    let count = rng.gen_range(1..=4);
    let boxes: Vec<[(f64, f64); 2]> = (0..count)
        .map(|_| {
            let a = rng.gen_range(-0.6 * l..0.5 * l);
            let b = rng.gen_range(a + 0.05 * l..=0.6 * l);
            let second = match domain.kind() {
                DomainKind::Line1d => (0.0, 0.0),
                DomainKind::Plane2d => {
                    let c = rng.gen_range(-0.6 * l..0.5 * l);
                    (c, rng.gen_range(c + 0.05 * l..=0.6 * l))
                }
                DomainKind::Cylinder => {
                    let c = rng.gen_range(0.0..2.0 * PI);
                    (c, rng.gen_range(0.3..=PI))
                }
            };
            [(a, b), second]
        })
        .collect();
    let inside = |x: [f64; 2], bx: &[(f64, f64); 2]| {
        let axial = x[0] >= bx[0].0 && x[0] <= bx[0].1;
        axial
            && match domain.kind() {
                DomainKind::Line1d => true,
                DomainKind::Plane2d => x[1] >= bx[1].0 && x[1] <= bx[1].1,
                // angular arc of length bx[1].1 starting at bx[1].0
                DomainKind::Cylinder => (x[1] - bx[1].0).rem_euclid(2.0 * PI) <= bx[1].1,
            }
    };
    GridFunction::from_fn(domain, |x| if boxes.iter().any(|b| inside(x, b)) { 1.0 } else { 0.0 })
}
