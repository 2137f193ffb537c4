use crate::energy::{kinetic_t, potential_p};
use crate::error::Result;
use crate::grid::inner_product;
use crate::symmetrize::sdr;

use super::super::inputs::{invariant_square, slack_ge, slack_le};
use super::super::quadrature::difference_sum;
use super::Context;

pub(super) fn polya_szego(ctx: &Context, k: usize) -> Result<f64> {
    let u = ctx.input(k, 0);
    Ok(slack_ge(kinetic_t(&u), kinetic_t(&sdr(&u)?)))
}

/// `∫ u v ≤ ∫ u* v*` and, for increasing radial `V`, `∫ V |u|² ≥ ∫ V (u*)²`.
pub(super) fn hardy_littlewood(ctx: &Context, k: usize) -> Result<f64> {
    let u = ctx.input(k, 0);
    let v = ctx.input(k, 1);
    let (us, vs) = (sdr(&u)?, sdr(&v)?);
    let pairing = slack_le(inner_product(&u, &v)?.re, inner_product(&us, &vs)?.re);
    let weight = invariant_square(&ctx.domain);
    let confining = slack_ge(potential_p(&u, &weight)?, potential_p(&us, &weight)?);
    Ok(pairing.min(confining))
}

/// `∬ u h v ≤ ∬ u* h v*` for a symmetric decreasing `h`, by direct sums.
pub(super) fn riesz(ctx: &Context, k: usize) -> Result<f64> {
    let u = ctx.input(k, 0);
    let v = ctx.input(k, 1);
    let h = ctx.kernel().samples();
    let d = &ctx.domain;
    let lhs = difference_sum(&u.re(), &h, &v.re(), d);
    let rhs = difference_sum(&sdr(&u)?.re(), &h, &sdr(&v)?.re(), d);
    Ok(slack_le(lhs, rhs))
}
