//! Direct sums over node pairs, independent of the transform-based
//! convolution.

use rayon::prelude::*;

use crate::error::Result;
use crate::grid::{Domain, DomainKind, GridFunction};

use super::DIRECT_SUM_MAX_N;

/// `domain` coarsened to at most [`DIRECT_SUM_MAX_N`] nodes per axis, same
/// half-width.
pub(crate) fn desk_domain(domain: &Domain) -> Result<Domain> {
    let [n0, n1] = domain.shape();
    let n0 = n0.min(DIRECT_SUM_MAX_N);
    let d = match domain.kind() {
        DomainKind::Line1d => Domain::line1d(domain.half_width(), n0)?,
        DomainKind::Plane2d => Domain::plane2d(domain.half_width(), n0)?,
        DomainKind::Cylinder => Domain::cylinder(domain.half_width(), n0, n1.min(DIRECT_SUM_MAX_N))?,
    };
    Ok(d.with_dirichlet(domain.dirichlet()))
}

/// Index on `domain.difference_domain()` of the difference between nodes
/// `x` and `y` of `domain`.
fn difference_index(domain: &Domain, diff: &Domain, x: (usize, usize), y: (usize, usize)) -> usize {
    let [n0, n1] = domain.shape();
    let i = x.0 + n0 - 1 - y.0;
    let j = match domain.kind() {
        DomainKind::Line1d => 0,
        DomainKind::Plane2d => x.1 + n1 - 1 - y.1,
        DomainKind::Cylinder => (x.1 + n1 - y.1) % n1,
    };
    diff.index(i, j)
}

/// `∬ u(x) v(x - y) w(y) dx dy` with `v` on the difference grid.
pub(crate) fn difference_sum(u: &[f64], v: &GridFunction, w: &[f64], domain: &Domain) -> f64 {
    let diff = v.domain();
    let vv = v.re();
    let cell = domain.cell_measure();
    // collected before summing so the result does not depend on the thread count
    let rows: Vec<f64> = (0..domain.len())
        .into_par_iter()
        .map(|x| {
            if u[x] == 0.0 {
                return 0.0;
            }
            let xi = domain.unravel(x);
            let inner: f64 =
                (0..domain.len()).map(|y| vv[difference_index(domain, diff, xi, domain.unravel(y))] * w[y]).sum();
            u[x] * inner
        })
        .collect();
    cell * cell * rows.iter().sum::<f64>()
}
