use crate::energy::background_form;
use crate::error::Result;
use crate::group::invariance_deviation;
use crate::grid::{integrate_re, GridFunction};
use crate::symmetrize::{signed_orbital_average, OrbitModuli};

use super::super::inputs::{slack_ge, slack_le};
use super::super::quadrature::difference_sum;
use super::Context;

/// `h * U` is invariant when `U` is.
pub(super) fn conv_invariance(ctx: &Context, k: usize) -> Result<f64> {
    let u = ctx.input(k, 0);
    let avg = signed_orbital_average(&u, &ctx.group)?;
    let smoothed = GridFunction::from_real(&ctx.domain, ctx.kernel().convolve(&avg.re()))?;
    Ok(-invariance_deviation(&smoothed, &ctx.group)?)
}

/// `H(u, u) ≥ H(U, U)`.
pub(super) fn conv_symm_i(ctx: &Context, k: usize) -> Result<f64> {
    let u = ctx.input(k, 0);
    let avg = signed_orbital_average(&u, &ctx.group)?.re();
    let (u, h) = (u.re(), ctx.kernel());
    Ok(slack_ge(h.bilinear(&u, &u), h.bilinear(&avg, &avg)))
}

/// `H_ρ(f, f) ≥ H_ρ(F, F)` for a unit-mass density `f` and its signed
/// average `F`.
pub(super) fn conv_symm_ii(ctx: &Context, k: usize) -> Result<f64> {
    let rho = ctx.background.as_ref().expect("set in prepare");
    let d = ctx.input(k, 0).density();
    let f = d.scaled(1.0 / integrate_re(&d));
    let avg = signed_orbital_average(&f, &ctx.group)?;
    let h = ctx.kernel();
    Ok(slack_ge(background_form(&f, &f, h, rho)?, background_form(&avg, &avg, h, rho)?))
}

/// `∬ u(x) v(x-y) w(y) ≤ ∬ M_p(u)(x) M_q(v)(x-y) M_r(w)(y)` for nonnegative
/// `u, v, w` with `1/p + 1/q + 1/r = 1`, by direct sums. On the cylinder the
/// shifts leave differences alone, so `M_q(v) = v`.
pub(super) fn triple_conv(ctx: &Context, k: usize) -> Result<f64> {
    let (p, q, r) = [(3.0, 3.0, 3.0), (2.0, 4.0, 4.0), (4.0, 2.0, 4.0)][k % 3];
    let d = &ctx.domain;
    let u = ctx.input(k, 0).modulus();
    let w = ctx.input(k, 2).modulus();
    let v = ctx.input_on(&d.difference_domain(), k, 1).modulus();
    let mv = match &ctx.difference_group {
        Some(g) => OrbitModuli::new(&v, g)?.mean(q)?,
        None => v.clone(),
    };
    let mu = OrbitModuli::new(&u, &ctx.group)?.mean(p)?;
    let mw = OrbitModuli::new(&w, &ctx.group)?.mean(r)?;
    let lhs = difference_sum(&u.re(), &v, &w.re(), d);
    let rhs = difference_sum(&mu.re(), &mv, &mw.re(), d);
    Ok(slack_le(lhs, rhs))
}

/// `∬ u h v ≤ ∬ M_2(u) h M_2(v)` for nonnegative `u, v, h`.
pub(super) fn g_riesz(ctx: &Context, k: usize) -> Result<f64> {
    let u = ctx.input(k, 0).modulus();
    let v = ctx.input(k, 1).modulus();
    let mu = OrbitModuli::new(&u, &ctx.group)?.mean(2.0)?;
    let mv = OrbitModuli::new(&v, &ctx.group)?.mean(2.0)?;
    let h = ctx.kernel();
    Ok(slack_le(h.bilinear(&u.re(), &v.re()), h.bilinear(&mu.re(), &mv.re())))
}

/// `∬ |u(x) - u(y)|² h(x - y) ≥ ∬ |M_2 u(x) - M_2 u(y)|² h(x - y)`.
pub(super) fn rel_ke_symm(ctx: &Context, k: usize) -> Result<f64> {
    let u = ctx.input(k, 0);
    let mean = OrbitModuli::new(&u, &ctx.group)?.mean(2.0)?;
    let h = ctx.kernel();
    let ones = vec![1.0; ctx.domain.len()];
    let mass = h.convolve(&ones);
    let w = ctx.domain.cell_measure();
    // ∬ |f(x) - f(y)|² h = 2 ∫ |f|² (h * 1) - 2 ∫ f (h * f)
    let pair_energy = |f: &[f64]| -> f64 {
        let hf = h.convolve(f);
        2.0 * w * f.iter().zip(&mass).zip(&hf).map(|((a, m), b)| a * a * m - a * b).sum::<f64>()
    };
    Ok(slack_ge(pair_energy(&u.re()), pair_energy(&mean.re())))
}
