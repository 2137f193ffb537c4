//! Ground states from an asymmetric start: the harmonic well ends symmetric
//! with energy 1, the shifted well does not.

use symground::energy::{EnergySpec, Kernel};
use symground::grid::{Domain, GridFunction};
use symground::group::{GroupQuadrature, GroupSpec};
use symground::minimizer::{ground_state, symmetry_report, MinimizerConfig};

fn main() -> symground::Result<()> {
    let d = Domain::line1d(8.0, 257)?;
    let z2 = GroupQuadrature::new(&d, &GroupSpec::ReflectionZ2)?;
    let cfg = MinimizerConfig::default();
    for (label, shift, coupling) in [("harmonic", 0.0, 0.0), ("harmonic + b Q", 0.0, 0.5), ("shifted well", 1.0, 0.0)] {
        let v = GridFunction::from_fn(&d, |x| (x[0] - shift).powi(2));
        let mut spec = EnergySpec::new(v, 1.0)?;
        if coupling != 0.0 {
            spec = spec.with_interaction(coupling, Kernel::gaussian(1.0, &d)?)?;
        }
        let trace = ground_state(&spec, &cfg, Some(&z2))?;
        let r = symmetry_report(&trace, &spec, &z2)?;
        println!(
            "{label:<15} E={:.8} iterations={:<5} deviation={:.2e} E[u]-E[M2 u]={:+.2e}",
            trace.energy, trace.iterations, r.deviation, r.gap
        );
    }
    Ok(())
}
