use crate::energy::{kinetic_t, nonlinear_term, potential_p, Nonlinearity, Profile};
use crate::error::Result;
use crate::grid::{gradient, inner_product, lp_norm, DomainKind, GridFunction};
use crate::symmetrize::OrbitModuli;

use super::super::inputs::{invariant_square, slack_eq, slack_ge, slack_le};
use super::Context;

pub(super) fn norm_preservation(ctx: &Context, k: usize) -> Result<f64> {
    let u = ctx.input(k, 0);
    let orbit = OrbitModuli::new(&u, &ctx.group)?;
    let mut worst = 0.0f64;
    for p in [1.0, 2.0, 3.0, 4.0] {
        let mean = orbit.mean(p)?;
        worst = worst.min(slack_eq(lp_norm(&mean, p)?, lp_norm(&u, p)?));
    }
    Ok(worst)
}

/// `M_1 ≤ M_2 ≤ M_3 ≤ M_4` and `M_q ≤ M_p^θ M_r^{1-θ}` for
/// `1/q = θ/p + (1-θ)/r`, node by node, relative to `max M_4`.
pub(super) fn mono_logconvex(ctx: &Context, k: usize) -> Result<f64> {
    let u = ctx.input(k, 0);
    let orbit = OrbitModuli::new(&u, &ctx.group)?;
    let means: Vec<Vec<f64>> = (1..=4).map(|p| orbit.mean(p as f64).map(|m| m.re())).collect::<Result<_>>()?;
    let scale = means[3].iter().fold(0.0f64, |a, &b| a.max(b)).max(f64::MIN_POSITIVE);
    let interpolate = |p: f64, q: f64, r: f64| {
        let theta = (1.0 / q - 1.0 / r) / (1.0 / p - 1.0 / r);
        let (ip, iq, ir) = (p as usize - 1, q as usize - 1, r as usize - 1);
        (0..u.len())
            .map(|i| means[ip][i].powf(theta) * means[ir][i].powf(1.0 - theta) - means[iq][i])
            .fold(f64::INFINITY, f64::min)
    };
    let mut worst = f64::INFINITY;
    for w in means.windows(2) {
        worst = worst.min(w[0].iter().zip(&w[1]).map(|(a, b)| b - a).fold(f64::INFINITY, f64::min));
    }
    worst = worst.min(interpolate(1.0, 2.0, 4.0)).min(interpolate(2.0, 3.0, 4.0)).min(interpolate(1.0, 3.0, 4.0));
    Ok(worst / scale)
}

/// `|∇_h M_p(u)| ≤ (Σ_k w_k |∇_h (u∘g_k)|^p)^{1/p}` at interior nodes, with
/// central differences on both sides, relative to the largest right side.
pub(super) fn grad_convexity(ctx: &Context, k: usize) -> Result<f64> {
    let u = ctx.input(k, 0);
    let d = &ctx.domain;
    let orbit = ctx.group.orbit(&u)?;
    let weights = ctx.group.weights();
    let orbit_grads: Vec<Vec<f64>> = orbit.iter().map(|v| gradient(v).map(|g| g.magnitude())).collect::<Result<_>>()?;
    let moduli = OrbitModuli::new(&u, &ctx.group)?;
    let [n0, n1] = d.shape();
    let interior = |idx: usize| {
        let (i, j) = d.unravel(idx);
        let inner0 = i > 0 && i + 1 < n0;
        let inner1 = d.dim() == 1 || d.is_periodic(1) || (j > 0 && j + 1 < n1);
        inner0 && inner1
    };
    let mut worst = f64::INFINITY;
    let mut scale = 0.0f64;
    for p in [1.0, 2.0, 3.0] {
        let lhs = gradient(&moduli.mean(p)?)?.magnitude();
        for idx in (0..d.len()).filter(|&i| interior(i)) {
            let rhs = orbit_grads.iter().zip(weights).map(|(g, w)| w * g[idx].powf(p)).sum::<f64>().powf(1.0 / p);
            scale = scale.max(rhs);
            worst = worst.min(rhs - lhs[idx]);
        }
    }
    Ok(worst / scale.max(f64::MIN_POSITIVE))
}

pub(super) fn kinetic_symm(ctx: &Context, k: usize) -> Result<f64> {
    let u = ctx.input(k, 0);
    let mean = OrbitModuli::new(&u, &ctx.group)?.mean(2.0)?;
    Ok(slack_ge(kinetic_t(&u), kinetic_t(&mean)))
}

pub(super) fn potential_equality(ctx: &Context, k: usize) -> Result<f64> {
    let u = ctx.input(k, 0);
    let v = invariant_square(&ctx.domain);
    let mean = OrbitModuli::new(&u, &ctx.group)?.mean(2.0)?;
    Ok(slack_eq(potential_p(&u, &v)?, potential_p(&mean, &v)?))
}

/// `∫ u v ≤ ∫ M_p(u) M_q(v)` with conjugate exponents cycling over trials.
pub(super) fn pair_mean(ctx: &Context, k: usize) -> Result<f64> {
    let (p, q) = [(2.0, 2.0), (3.0, 1.5), (1.5, 3.0)][k % 3];
    let u = ctx.input(k, 0);
    let v = ctx.input(k, 1);
    let mu = OrbitModuli::new(&u, &ctx.group)?.mean(p)?;
    let mv = OrbitModuli::new(&v, &ctx.group)?.mean(q)?;
    Ok(slack_le(inner_product(&u, &v)?.re, inner_product(&mu, &mv)?.re))
}

/// `∫ a F(|u|^p) ≥ ∫ a F(M_p(u)^p)` with `F(s) = s^γ` and an invariant
/// weight `a`.
pub(super) fn jensen_nl(ctx: &Context, k: usize) -> Result<f64> {
    let (p, gamma) = [(2.0, 2.0), (1.5, 3.0), (2.0, 1.5), (1.0, 2.0)][k % 4];
    let d = &ctx.domain;
    let l2 = d.half_width() * d.half_width();
    let weight = GridFunction::from_fn_index(d, |i, j| {
        let x = d.coord(d.index(i, j));
        let r2 = if d.kind() == DomainKind::Cylinder { x[0] * x[0] } else { x[0] * x[0] + x[1] * x[1] };
        1.0 / (1.0 + r2 / l2)
    });
    let nl = Nonlinearity::new(p, Profile::Power { gamma }, weight)?;
    let u = ctx.input(k, 0);
    let mean = OrbitModuli::new(&u, &ctx.group)?.mean(p)?;
    Ok(slack_ge(nonlinear_term(&u, &nl)?, nonlinear_term(&mean, &nl)?))
}
