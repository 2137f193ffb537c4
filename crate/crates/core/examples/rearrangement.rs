//! Symmetric decreasing rearrangement on the line: same distribution of
//! values, less kinetic energy.

use symground::energy::kinetic_t;
use symground::grid::{Domain, GridFunction};
use symground::symmetrize::sdr;

fn main() -> symground::Result<()> {
    let d = Domain::line1d(8.0, 257)?;
    let u = GridFunction::from_fn(&d, |x| (-(x[0] - 2.0).powi(2)).exp() + 0.6 * (-(x[0] + 3.0).powi(2) / 0.5).exp());
    let star = sdr(&u)?;
    let (mut a, mut b) = (u.moduli(), star.moduli());
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    println!("equimeasurable: {}", a == b);
    println!("T[u] = {:.10}, T[u*] = {:.10}", kinetic_t(&u), kinetic_t(&star));
    let peak = star.moduli().iter().cloned().fold(0.0, f64::max);
    println!("u* peaks at x = {:.4} with {peak:.6}", d.coord(d.len() / 2)[0]);
    Ok(())
}
