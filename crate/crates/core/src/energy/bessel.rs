//! Modified Bessel functions of the second kind at the orders the
//! relativistic kernel needs.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Below this the power series is used for `K_1`.
pub const SERIES_LIMIT: f64 = 2.0;
/// From here on the large-argument expansion is used for `K_1`.
pub const ASYMPTOTIC_FROM: f64 = 16.0;

/// `K_ν(z)` for `ν ∈ {1/2, 1, 3/2}` and `z > 0`.
pub fn bessel_k(nu: f64, z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::InvalidParameter(format!("bessel_k needs finite z > 0, got {z}")));
    }
    if nu == 0.5 {
        Ok(k_half(z))
    } else if nu == 1.0 {
        Ok(k1(z))
    } else if nu == 1.5 {
        Ok(k_half(z) * (1.0 + 1.0 / z))
    } else {
        Err(Error::Unsupported(format!("bessel_k order {nu}; supported orders are 1/2, 1, 3/2")))
    }
}

fn k_half(z: f64) -> f64 {
    (PI / (2.0 * z)).sqrt() * (-z).exp()
}

pub(crate) fn k1(z: f64) -> f64 {
    if z < SERIES_LIMIT {
        k1_series(z)
    } else if z < ASYMPTOTIC_FROM {
        k1_integral(z)
    } else {
        k1_asymptotic(z)
    }
}

/// `K_1(z) = 1/z + I_1(z) ln(z/2) - (z/4) Σ_k (ψ(k+1) + ψ(k+2)) (z²/4)^k / (k! (k+1)!)`.
pub(crate) fn k1_series(z: f64) -> f64 {
    let q = z * z / 4.0;
    let mut term = 1.0; // (z²/4)^k / (k! (k+1)!)
    let mut psi_a = -EULER_GAMMA; // ψ(k+1)
    let mut psi_b = 1.0 - EULER_GAMMA; // ψ(k+2)
    let mut i1 = 0.0;
    let mut tail = 0.0;
    for k in 0..60 {
        i1 += term;
        tail += (psi_a + psi_b) * term;
        let kf = k as f64;
        term *= q / ((kf + 1.0) * (kf + 2.0));
        psi_a += 1.0 / (kf + 1.0);
        psi_b += 1.0 / (kf + 2.0);
        if term < 1e-18 * i1 {
            break;
        }
    }
    1.0 / z + (z / 2.0) * i1 * (z / 2.0).ln() - (z / 4.0) * tail
}

/// Trapezoid rule on `K_1(z) = ∫_0^∞ e^{-z cosh t} cosh t dt`; the integrand
/// decays double-exponentially so the rule converges geometrically.
pub(crate) fn k1_integral(z: f64) -> f64 {
    let t_max = (1.0 + 45.0 / z).acosh();
    let steps = 256;
    let dt = t_max / steps as f64;
    let mut sum = 0.5; // t = 0 endpoint, e^{-z(cosh 0 - 1)} cosh 0
    for i in 1..=steps {
        let t = i as f64 * dt;
        let c = t.cosh();
        let w = if i == steps { 0.5 } else { 1.0 };
        sum += w * (-z * (c - 1.0)).exp() * c;
    }
    sum * dt * (-z).exp()
}

/// `√(π/2z) e^{-z} Σ_k a_k(1) / z^k`, truncated at the smallest term.
pub(crate) fn k1_asymptotic(z: f64) -> f64 {
    let mu = 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..40 {
        let odd = (2 * k - 1) as f64;
        let next = term * (mu - odd * odd) / (k as f64 * 8.0 * z);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    k_half(z) * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn closed_forms() {
        let a = bessel_k(0.5, 1.0).unwrap();
        assert!((a - (PI / 2.0).sqrt() * (-1f64).exp()).abs() < 1e-16);
        assert!((a - 0.4610686).abs() < 1e-7);
        let b = bessel_k(1.5, 1.0).unwrap();
        assert!((b - 0.922_137).abs() < 1e-6);
        assert!((b - 2.0 * a).abs() < 1e-15);
    }

    #[test]
    fn k1_reference_values() {
        // reference values from arbitrary-precision evaluation
        for (z, expect) in [
            (0.1, 9.853_844_780_870_606),
            (1.0, 0.601_907_230_197_235),
            (5.0, 0.004_044_613_445_452_16),
            (30.0, 2.167_732_001_891_55e-14),
        ] {
            let got = bessel_k(1.0, z).unwrap();
            assert!(rel(got, expect) < 1e-12, "z={z}: {got} vs {expect}");
        }
    }

    #[test]
    fn branches_agree_at_seams() {
        for z in [SERIES_LIMIT, SERIES_LIMIT * (1.0 - 1e-9)] {
            assert!(rel(k1_series(z), k1_integral(z)) < 1e-12);
        }
        assert!(rel(k1_integral(ASYMPTOTIC_FROM), k1_asymptotic(ASYMPTOTIC_FROM)) < 1e-12);
    }

    #[test]
    fn k1_matches_leading_asymptotics() {
        let z: f64 = 50.0;
        let ratio = bessel_k(1.0, z).unwrap() * z.sqrt() * z.exp() / (PI / 2.0).sqrt();
        assert!((ratio - 1.0).abs() < 1e-2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(bessel_k(1.0, 0.0).is_err());
        assert!(bessel_k(1.0, -2.0).is_err());
        assert!(matches!(bessel_k(2.0, 1.0), Err(Error::Unsupported(_))));
    }
}
