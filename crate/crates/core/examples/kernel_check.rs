//! Positive-definiteness certificates of the analytic kernels on the line.

use symground::energy::{positive_definite_check, Kernel, KernelKind, PdMode};
use symground::grid::Domain;

fn main() -> symground::Result<()> {
    let d = Domain::line1d(8.0, 128)?;
    let kinds = [
        KernelKind::Gaussian { sigma: 1.0 },
        KernelKind::Box { a: 1.0 },
        KernelKind::NegAbs,
        KernelKind::RelativisticBessel { m: 1.0 },
    ];
    for kind in kinds {
        let k = Kernel::new(kind, &d)?;
        for mode in [PdMode::All, PdMode::MeanZero] {
            let (ok, min) = positive_definite_check(&k, mode);
            println!("{:<20} {:<10} pd={ok:<5} min eigenvalue {min:+.3e}", k.kind().name(), format!("{mode:?}"));
        }
    }
    Ok(())
}
