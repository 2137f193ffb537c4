//! Orbital means of a lopsided positive function under quarter turns and
//! under a 64-point circle, and the norm each one preserves. The circle's
//! rotations interpolate, so there norms hold to quadrature accuracy only.

use symground::grid::{lp_norm, Domain};
use symground::group::{GroupQuadrature, GroupSpec};
use symground::random::positive_bumps;
use symground::symmetrize::{orbital_mean, symmetry_deviation, MeanSpec};

fn main() -> symground::Result<()> {
    let d = Domain::plane2d(8.0, 64)?;
    let u = positive_bumps(&d, 42);
    for spec in [GroupSpec::rotation_zn(4), GroupSpec::circle_so2(64)] {
        let g = GroupQuadrature::new(&d, &spec)?;
        println!("{} ({:?} maps)", spec.label(), g.class());
        for p in [1.0, 2.0, 4.0] {
            let m = orbital_mean(&u, &MeanSpec::new(p, g.clone())?)?;
            println!(
                "  p={p}: |u|_p={:.12} |M_p u|_p={:.12} deviation {:.2e} -> {:.2e}",
                lp_norm(&u, p)?,
                lp_norm(&m, p)?,
                symmetry_deviation(&u, &g)?,
                symmetry_deviation(&m, &g)?
            );
        }
    }
    Ok(())
}
