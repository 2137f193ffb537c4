//! Symmetrization operators: the `(G, p)` orbital mean, the signed orbital
//! average and the symmetric decreasing rearrangement.

use num_complex::Complex64;
use crate::error::{Error, Result};
use crate::group::{act_unchecked, GroupQuadrature, NORM_EPS};
use crate::grid::{l2_norm, Domain, DomainKind, GridFunction};

/// Exponent and group of an orbital mean.
#[derive(Clone, Debug)]
pub struct MeanSpec {
    pub p: f64,
    pub group: GroupQuadrature,
}

impl MeanSpec {
    pub fn new(p: f64, group: GroupQuadrature) -> Result<Self> {
        check_exponent(p)?;
        Ok(MeanSpec { p, group })
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("orbital mean needs finite p >= 1, got {p}")));
    }
    Ok(())
}

/// `|u(g_k x)|` for every element, so several exponents can share one pullback.
#[derive(Clone, Debug)]
pub struct OrbitModuli {
    domain: Domain,
    weights: Vec<f64>,
    moduli: Vec<Vec<f64>>,
}

impl OrbitModuli {
    pub fn new(u: &GridFunction, group: &GroupQuadrature) -> Result<Self> {
        group.domain().check_same(u.domain())?;
        let orbit = group.orbit(u)?;
        Ok(OrbitModuli {
            domain: u.domain().clone(),
            weights: group.weights().to_vec(),
            moduli: orbit.iter().map(GridFunction::moduli).collect(),
        })
    }

    /// `(Σ_k w_k |u(g_k x)|^p)^{1/p}` at every node.
    pub fn mean(&self, p: f64) -> Result<GridFunction> {
        check_exponent(p)?;
        let n = self.domain.len();
        let values = (0..n)
            .map(|i| {
                let peak = self.moduli.iter().map(|m| m[i]).fold(0.0, f64::max);
                if peak == 0.0 {
                    return 0.0;
                }
                // scaled by the orbit maximum to keep |u|^p in range
                let s: f64 = self.moduli.iter().zip(&self.weights).map(|(m, w)| w * (m[i] / peak).powf(p)).sum();
                peak * s.powf(1.0 / p)
            })
            .collect();
        Ok(GridFunction::raw_real(&self.domain, values))
    }

    /// Largest spread `max_k |u(g_k x)| - min_k |u(g_k x)|` over nodes, relative
    /// to the largest modulus.
    pub fn orbit_spread(&self) -> f64 {
        let n = self.domain.len();
        let mut spread = 0.0f64;
        let mut top = 0.0f64;
        for i in 0..n {
            let (lo, hi) = self.moduli.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), m| (lo.min(m[i]), hi.max(m[i])));
            spread = spread.max(hi - lo);
            top = top.max(hi);
        }
        spread / top.max(NORM_EPS)
    }
}

/// `M_p(u)(x) = (∫_G |u(g.x)|^p dg)^{1/p}`.
pub fn orbital_mean(u: &GridFunction, spec: &MeanSpec) -> Result<GridFunction> {
    check_exponent(spec.p)?;
    OrbitModuli::new(u, &spec.group)?.mean(spec.p)
}

/// `U(x) = ∫_G u(g.x) dg`, linear in `u`.
pub fn signed_orbital_average(u: &GridFunction, group: &GroupQuadrature) -> Result<GridFunction> {
    group.domain().check_same(u.domain())?;
    let mut acc = vec![Complex64::new(0.0, 0.0); u.len()];
    for (g, w) in group.elements().iter().zip(group.weights()) {
        let v = act_unchecked(g, u);
        for (a, x) in acc.iter_mut().zip(v.values()) {
            *a += x * w;
        }
    }
    Ok(GridFunction::raw(u.domain(), acc, u.dtype()))
}

/// Node order used by the rearrangement: distance from the origin, then index.
///
/// On line and plane the distance is compared through the exact integer
/// `Σ (2i - n + 1)²`, so mirror-image nodes tie exactly and always break the
/// same way; float radii would break them by rounding noise.
pub fn radial_order(domain: &Domain) -> Vec<usize> {
    let mut order: Vec<usize> = (0..domain.len()).collect();
    if domain.kind() == DomainKind::Cylinder {
        let radius: Vec<f64> = order.iter().map(|&i| domain.radius(i)).collect();
        order.sort_by(|&a, &b| radius[a].total_cmp(&radius[b]).then(a.cmp(&b)));
        return order;
    }
    let [n0, n1] = domain.shape();
    let key = |idx: usize| -> i64 {
        let (i, j) = domain.unravel(idx);
        let a = 2 * i as i64 - n0 as i64 + 1;
        let b = if domain.dim() == 2 { 2 * j as i64 - n1 as i64 + 1 } else { 0 };
        a * a + b * b
    };
    order.sort_by_key(|&i| (key(i), i));
    order
}

/// Symmetric decreasing rearrangement `u*` of `|u|`.
///
/// The largest values of `|u|` go to the nodes closest to the origin, so the
/// value multiset is kept exactly.
pub fn sdr(u: &GridFunction) -> Result<GridFunction> {
    if u.domain().kind() == DomainKind::Cylinder {
        return Err(Error::Unsupported("symmetric decreasing rearrangement is not defined on the cylinder".into()));
    }
    let mut values = u.moduli();
    values.sort_by(|a, b| b.total_cmp(a));
    let mut out = vec![0.0; u.len()];
    for (node, v) in radial_order(u.domain()).into_iter().zip(values) {
        out[node] = v;
    }
    Ok(GridFunction::raw_real(u.domain(), out))
}

/// `‖ |u| − M_2(u) ‖₂ / max(‖u‖₂, ε)`.
pub fn symmetry_deviation(u: &GridFunction, group: &GroupQuadrature) -> Result<f64> {
    let mean = OrbitModuli::new(u, group)?.mean(2.0)?;
    let diff: Vec<f64> = u.moduli().iter().zip(mean.values()).map(|(a, b)| a - b.re).collect();
    Ok(l2_norm(&GridFunction::raw_real(u.domain(), diff)) / l2_norm(u).max(NORM_EPS))
}

/// Distance from the origin beyond which `u` vanishes, for diagnostics.
pub fn support_radius(u: &GridFunction) -> f64 {
    let d = u.domain();
    u.values()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() > 0.0)
        .map(|(i, _)| d.radius(i))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::kinetic_t;
    use crate::group::GroupSpec;
    use crate::grid::{integrate_re, lp_norm};
    use proptest::prelude::*;

    fn line() -> Domain {
        Domain::line1d(8.0, 512).unwrap()
    }

    fn ind(d: &Domain, a: f64, b: f64) -> GridFunction {
        GridFunction::from_fn(d, |x| if x[0] >= a && x[0] <= b { 1.0 } else { 0.0 })
    }

    fn z2(d: &Domain) -> GroupQuadrature {
        GroupQuadrature::new(d, &GroupSpec::ReflectionZ2).unwrap()
    }

    #[test]
    fn mean_of_half_line_indicator() {
        let d = line();
        let m = orbital_mean(&ind(&d, 0.0, 1.0), &MeanSpec::new(2.0, z2(&d)).unwrap()).unwrap();
        for (i, v) in m.values().iter().enumerate() {
            let x = d.coord(i)[0];
            let expect = if x.abs() <= 1.0 { 0.5f64.sqrt() } else { 0.0 };
            assert!((v.re - expect).abs() < 1e-15, "x={x}");
        }
    }

    #[test]
    fn mean_of_quadrant_disk() {
        let d = Domain::plane2d(2.0, 64).unwrap();
        let g = GroupQuadrature::new(&d, &GroupSpec::rotation_zn(4)).unwrap();
        let u = GridFunction::from_fn(&d, |x| if x[0] > 0.0 && x[1] > 0.0 && x[0].hypot(x[1]) < 1.0 { 1.0 } else { 0.0 });
        let m = orbital_mean(&u, &MeanSpec::new(2.0, g).unwrap()).unwrap();
        for (i, v) in m.values().iter().enumerate() {
            let r = d.radius(i);
            let expect = if r < 1.0 { 0.5 } else { 0.0 };
            assert!((v.re - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn invariant_function_is_fixed() {
        let d = line();
        let u = GridFunction::from_fn(&d, |x| (-x[0] * x[0]).exp());
        for p in [1.0, 2.0, 3.3] {
            let m = orbital_mean(&u, &MeanSpec::new(p, z2(&d)).unwrap()).unwrap();
            assert!(m.sub(&u).unwrap().max_abs() <= 1e-12);
        }
        assert!(MeanSpec::new(0.5, z2(&d)).is_err());
    }

    #[test]
    fn signed_average_examples() {
        let d = line();
        let g = z2(&d);
        let u = signed_orbital_average(&ind(&d, 0.0, 1.0), &g).unwrap();
        for (i, v) in u.values().iter().enumerate() {
            let expect = if d.coord(i)[0].abs() <= 1.0 { 0.5 } else { 0.0 };
            assert_eq!(v.re, expect);
        }
        let odd = GridFunction::from_fn(&d, |x| if x[0].abs() <= 1.0 { x[0] } else { 0.0 });
        assert!(signed_orbital_average(&odd, &g).unwrap().max_abs() <= 1e-12);
        let even = GridFunction::from_fn(&d, |x| x[0].cos() * (-x[0] * x[0]).exp());
        assert!(signed_orbital_average(&even, &g).unwrap().sub(&even).unwrap().max_abs() <= 1e-15);
    }

    #[test]
    fn rearrangement_examples() {
        let d = line();
        assert_eq!(sdr(&ind(&d, 0.0, 2.0)).unwrap(), ind(&d, -1.0, 1.0));
        let two = GridFunction::from_fn(&d, |x| if (2.0..=3.0).contains(&x[0].abs()) { 1.0 } else { 0.0 });
        assert_eq!(sdr(&two).unwrap(), ind(&d, -1.0, 1.0));
    }

    #[test]
    fn square_rearranges_to_equal_area_disk() {
        let n = 256;
        let d = Domain::plane2d(2.0, n).unwrap();
        let h = d.steps()[0];
        let sq = GridFunction::from_fn(&d, |x| if x[0].abs() < 0.5 && x[1].abs() < 0.5 { 1.0 } else { 0.0 });
        let r = sdr(&sq).unwrap();
        let radius = 1.0 / std::f64::consts::PI.sqrt();
        for (i, v) in r.values().iter().enumerate() {
            let dist = d.radius(i);
            if dist < radius - h {
                assert_eq!(v.re, 1.0);
            } else if dist > radius + h {
                assert_eq!(v.re, 0.0);
            }
        }
        assert!((integrate_re(&r) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rearrangement_rejects_cylinder() {
        let d = Domain::cylinder(2.0, 16, 16).unwrap();
        assert!(matches!(sdr(&GridFunction::zeros(&d)), Err(Error::Unsupported(_))));
    }

    #[test]
    fn deviation_examples() {
        let d = line();
        let g = z2(&d);
        let dev = symmetry_deviation(&ind(&d, 0.0, 1.0), &g).unwrap();
        assert!((dev - (2.0 - 2f64.sqrt()).sqrt()).abs() < 1e-12, "{dev}");
        let gauss = GridFunction::from_fn(&d, |x| (-x[0] * x[0]).exp());
        assert!(symmetry_deviation(&gauss, &g).unwrap() <= 1e-12);
        assert_eq!(symmetry_deviation(&GridFunction::zeros(&d), &g).unwrap(), 0.0);
    }

    fn plane_case() -> (Domain, GroupQuadrature) {
        let d = Domain::plane2d(3.0, 24).unwrap();
        let g = GroupQuadrature::new(&d, &GroupSpec::rotation_zn(4)).unwrap();
        (d, g)
    }

    fn arb_values(len: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-3.0f64..3.0, len)
    }

    #[test]
    fn mirror_ties_break_the_same_way() {
        // lopsided single bump: the rearrangement must not zigzag
        let d = Domain::line1d(8.0, 513).unwrap();
        let u = GridFunction::from_fn(&d, |x| (-(x[0] - 1.0).powi(2) / 2.0).exp() + 0.8 * (-(x[0] - 2.0).powi(2) / 0.5).exp());
        let r = sdr(&u).unwrap();
        assert!(kinetic_t(&r) <= kinetic_t(&u));
        let order = radial_order(&d);
        for pair in order[1..].chunks(2) {
            assert!(pair[0] < pair[1], "left node of each mirror pair comes first");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn mean_preserves_norms(vals in arb_values(24 * 24)) {
            let (d, g) = plane_case();
            let u = GridFunction::from_real(&d, vals).unwrap();
            let orbit = OrbitModuli::new(&u, &g).unwrap();
            for p in [1.0, 2.0, 3.0, 4.0] {
                let m = orbit.mean(p).unwrap();
                let (a, b) = (lp_norm(&m, p).unwrap(), lp_norm(&u, p).unwrap());
                prop_assert!((a - b).abs() <= 1e-10 * b.max(NORM_EPS));
                prop_assert!(m.values().iter().all(|v| v.re >= 0.0));
                let (_, dev) = crate::group::is_invariant(&m, &g, 1e-10).unwrap();
                prop_assert!(dev <= 1e-10);
            }
        }

        #[test]
        fn mean_is_monotone_and_log_convex(vals in arb_values(24 * 24), p in 1.0f64..3.0, gap in 0.1f64..3.0, theta in 0.05f64..0.95) {
            let (d, g) = plane_case();
            let u = GridFunction::from_real(&d, vals).unwrap();
            let orbit = OrbitModuli::new(&u, &g).unwrap();
            let r = p + gap;
            let q = 1.0 / (theta / p + (1.0 - theta) / r);
            let (mp, mq, mr) = (orbit.mean(p).unwrap(), orbit.mean(q).unwrap(), orbit.mean(r).unwrap());
            for i in 0..d.len() {
                let (a, b, c) = (mp.values()[i].re, mq.values()[i].re, mr.values()[i].re);
                prop_assert!(a <= b + 1e-12 && b <= c + 1e-12);
                prop_assert!(b <= a.powf(theta) * c.powf(1.0 - theta) + 1e-12);
            }
        }

        #[test]
        fn rearrangement_is_equimeasurable_and_decreasing(vals in arb_values(24 * 24)) {
            let (d, _) = plane_case();
            let u = GridFunction::from_real(&d, vals).unwrap();
            let r = sdr(&u).unwrap();
            let mut a = u.moduli();
            let mut b = r.moduli();
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            prop_assert_eq!(a, b);
            let order = radial_order(&d);
            for w in order.windows(2) {
                prop_assert!(r.values()[w[0]].re >= r.values()[w[1]].re);
            }
        }
    }

    #[test]
    fn equality_for_constant_modulus_orbits() {
        let (d, g) = plane_case();
        let u = GridFunction::from_fn_complex(&d, |x| {
            Complex64::from_polar((-(x[0] * x[0] + x[1] * x[1])).exp(), 3.0 * x[1].atan2(x[0]))
        });
        let orbit = OrbitModuli::new(&u, &g).unwrap();
        assert!(orbit.orbit_spread() <= 1e-12);
        let (m1, m4) = (orbit.mean(1.0).unwrap(), orbit.mean(4.0).unwrap());
        assert!(m1.sub(&m4).unwrap().max_abs() <= 1e-10);
    }
}
