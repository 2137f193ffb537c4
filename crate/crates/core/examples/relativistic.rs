//! Relativistic kinetic energy by the spectral multiplier and by the pair
//! kernel, and its nonrelativistic limit `R ≈ T / 2m`.

use std::f64::consts::PI;

use symground::energy::{kinetic_t, relativistic_r, RelativisticMethod};
use symground::grid::{Domain, GridFunction};

fn main() -> symground::Result<()> {
    let d = Domain::line1d(10.0, 512)?;
    let u = GridFunction::from_fn(&d, |x| PI.powf(-0.25) * (-x[0] * x[0] / 2.0).exp());
    let t = kinetic_t(&u);
    for m in [0.5, 1.0, 5.0, 50.0] {
        let s = relativistic_r(&u, m, RelativisticMethod::Spectral)?;
        let k = relativistic_r(&u, m, RelativisticMethod::Kernel)?;
        println!("m={m:<5} spectral={s:.8} kernel={k:.8} gap={:+.2e} R*2m/T={:.5}", (k - s) / s, s * 2.0 * m / t);
    }
    Ok(())
}
