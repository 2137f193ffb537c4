use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use super::*;
use crate::grid::{inner_product, l2_norm, lp_norm};

fn line(l: f64, n: usize) -> Domain {
    Domain::line1d(l, n).unwrap()
}

fn ground(d: &Domain) -> GridFunction {
    GridFunction::from_fn(d, |x| PI.powf(-0.25) * (-x[0] * x[0] / 2.0).exp())
}

fn harmonic(d: &Domain) -> GridFunction {
    GridFunction::from_fn(d, |x| x[0] * x[0] + x[1] * x[1])
}

/// `∬ f h g` by the direct double sum over node pairs.
fn double_sum(k: &Kernel, f: &[f64], g: &[f64]) -> f64 {
    let d = k.domain();
    let [_, n1] = d.shape();
    let w = d.cell_measure();
    let mut total = 0.0;
    for i in 0..d.len() {
        for j in 0..d.len() {
            let a = (i / n1) as i64 - (j / n1) as i64;
            let b = (i % n1) as i64 - (j % n1) as i64;
            total += f[i] * k.sample(a, b) * g[j];
        }
    }
    total * w * w
}

#[test]
fn kinetic_examples() {
    let d = line(8.0, 512);
    assert_eq!(kinetic_t(&GridFunction::zeros(&d)), 0.0);
    assert!((kinetic_t(&ground(&d)) - 0.5).abs() < 1e-3);
    let u = ground(&d);
    let shift = 16;
    let mut vals = vec![0.0; d.len()];
    for i in 0..d.len() - shift {
        vals[i + shift] = u.values()[i].re;
    }
    let shifted = GridFunction::from_real(&d, vals).unwrap();
    assert!((kinetic_t(&shifted) - kinetic_t(&u)).abs() < 1e-14);
}

#[test]
fn potential_examples() {
    let d = line(8.0, 512);
    let u = ground(&d);
    assert_eq!(potential_p(&u, &GridFunction::zeros(&d)).unwrap(), 0.0);
    assert!((potential_p(&u, &harmonic(&d)).unwrap() - 0.5).abs() < 1e-3);
    let other = line(8.0, 256);
    assert!(potential_p(&u, &harmonic(&other)).is_err());
}

#[test]
fn potential_is_invariant_under_exact_maps() {
    let d = Domain::plane2d(4.0, 32).unwrap();
    let g = GroupQuadrature::new(&d, &crate::group::GroupSpec::rotation_zn(4)).unwrap();
    let u = GridFunction::from_fn(&d, |x| (-(x[0] - 1.0).powi(2) - (x[1] + 0.3).powi(2)).exp());
    let v = harmonic(&d);
    let p = potential_p(&u, &v).unwrap();
    for w in g.orbit(&u).unwrap() {
        assert!((potential_p(&w, &v).unwrap() - p).abs() <= 1e-12 * p);
    }
}

#[test]
fn point_mass_self_energy() {
    let d = line(4.0, 64);
    let k = Kernel::gaussian(1.0, &d).unwrap();
    let w = d.cell_measure();
    let mut vals = vec![0.0; d.len()];
    vals[20] = w.powf(-0.5);
    let u = GridFunction::from_real(&d, vals).unwrap();
    let q = self_q(&u, &k).unwrap();
    let rho = density_values(&u);
    assert!((q - double_sum(&k, &rho, &rho)).abs() <= 1e-10);
    assert!((q - 1.0).abs() <= 1e-12);
    assert_eq!(self_q(&GridFunction::zeros(&d), &k).unwrap(), 0.0);
}

#[test]
fn background_examples() {
    let d = line(4.0, 32).with_dirichlet(false);
    let k = Kernel::new(KernelKind::NegAbs, &d).unwrap();
    let u = GridFunction::from_fn(&d, |x| (-(x[0] - 0.8).powi(2)).exp());
    let mass = integrate_re(&u.density());
    let bump = GridFunction::from_fn(&d, |x| (-x[0] * x[0] / 2.0).exp());
    let rho = bump.scaled(mass / integrate_re(&bump));
    let h = self_q_background(&u, &k, &rho).unwrap();
    assert!(h > 0.0);
    let (f, r) = (density_values(&u), density_values(&rho.map_real(|v| v.re.sqrt())));
    let shifted: Vec<f64> = f.iter().zip(&r).map(|(a, b)| a - b).collect();
    assert!((h - double_sum(&k, &shifted, &shifted)).abs() <= 1e-12 * h.abs().max(1.0));
    // Q[f] - 2 cross(ρ, f) + Q[ρ]
    let expanded = k.bilinear(&f, &f) - 2.0 * k.bilinear(&r, &f) + k.bilinear(&r, &r);
    assert!((h - expanded).abs() <= 1e-10 * k.bilinear(&f, &f).abs());
    let same = rho.map_real(|v| v.re.sqrt());
    assert!(self_q_background(&same, &k, &rho).unwrap().abs() <= 1e-12);
    assert!(matches!(self_q_background(&u.scaled(2.0), &k, &rho), Err(Error::MassMismatch { .. })));
}

#[test]
fn background_form_is_bilinear() {
    let d = line(4.0, 32);
    let k = Kernel::gaussian(0.6, &d).unwrap();
    let f = GridFunction::from_fn(&d, |x| (x[0] * 1.3).sin() + 1.0);
    let g = GridFunction::from_fn(&d, |x| (-x[0] * x[0]).exp());
    let rho = GridFunction::from_fn(&d, |x| 0.5 * (-(x[0] * x[0]) / 3.0).exp());
    let shift = |a: &GridFunction| -> Vec<f64> { a.values().iter().zip(rho.values()).map(|(x, r)| x.re - r.re).collect() };
    let fast = background_form(&f, &g, &k, &rho).unwrap();
    let slow = double_sum(&k, &shift(&f), &shift(&g));
    assert!((fast - slow).abs() <= 1e-12 * slow.abs());
    assert!((fast - background_form(&g, &f, &k, &rho).unwrap()).abs() <= 1e-12 * slow.abs());
}

#[test]
fn nonlinear_examples() {
    let d = line(8.0, 512);
    let nl = Nonlinearity::power_law(&d, 2.0, 2.0).unwrap();
    assert_eq!(nonlinear_term(&GridFunction::zeros(&d), &nl).unwrap(), 0.0);
    let u = GridFunction::from_fn(&d, |x| if (0.0..=1.0).contains(&x[0]) { 1.0 } else { 0.0 });
    assert!((nonlinear_term(&u, &nl).unwrap() - 1.0).abs() < 1e-12);
    let g = GroupQuadrature::new(&d, &crate::group::GroupSpec::ReflectionZ2).unwrap();
    let m = crate::symmetrize::orbital_mean(&u, &crate::symmetrize::MeanSpec::new(2.0, g).unwrap()).unwrap();
    assert!((nonlinear_term(&m, &nl).unwrap() - 0.5).abs() < 1e-12);
    assert!(Nonlinearity::power_law(&d, 2.0, 0.5).is_err());
    assert!(Nonlinearity::power_law(&d, 0.5, 2.0).is_err());
}

#[test]
fn harmonic_energy_and_monotone_coupling() {
    let d = line(8.0, 512);
    let u = ground(&d);
    let spec = EnergySpec::new(harmonic(&d), 1.0).unwrap();
    assert!((total_energy(&spec, &u).unwrap() - 1.0).abs() < 2e-3);
    let free = EnergySpec::new(GridFunction::zeros(&d), 1.0).unwrap();
    assert_eq!(total_energy(&free, &GridFunction::zeros(&d)).unwrap(), 0.0);
    let k = Kernel::gaussian(1.0, &d).unwrap();
    let mut last = total_energy(&spec, &u).unwrap();
    for b in [0.1, 0.5, 2.0] {
        let e = total_energy(&spec.clone().with_interaction(b, k.clone()).unwrap(), &u).unwrap();
        assert!(e > last);
        last = e;
    }
}

#[test]
fn background_requires_matching_mass() {
    let d = line(4.0, 64);
    let k = Kernel::gaussian(1.0, &d).unwrap();
    let spec = EnergySpec::new(harmonic(&d), 1.0).unwrap().with_interaction(0.5, k).unwrap();
    let rho = GridFunction::from_fn(&d, |x| (-x[0] * x[0]).exp());
    assert!(matches!(spec.clone().with_background(rho.clone()), Err(Error::MassMismatch { .. })));
    let rho = rho.scaled(1.0 / integrate_re(&rho));
    assert!(spec.with_background(rho).is_ok());
    assert!(EnergySpec::new(harmonic(&d), 0.0).is_err());
}

/// Central-difference check of `2 Re ⟨g, v⟩` along `v`.
fn fd_error(spec: &EnergySpec, u: &GridFunction, v: &GridFunction) -> f64 {
    let g = spec.gradient(u).unwrap();
    let analytic = 2.0 * inner_product(&g, v).unwrap().re;
    let eps = 1e-5 * l2_norm(u) / l2_norm(v);
    let ep = total_energy(spec, &u.add_scaled(eps, v).unwrap()).unwrap();
    let em = total_energy(spec, &u.add_scaled(-eps, v).unwrap()).unwrap();
    let numeric = (ep - em) / (2.0 * eps);
    (numeric - analytic).abs() / analytic.abs().max(1e-3)
}

fn smooth_pair(d: &Domain, seed: u64) -> (GridFunction, GridFunction) {
    let s = seed as f64;
    let u = GridFunction::from_fn(d, |x| (-(x[0] - 0.3 * s.sin()).powi(2) - 0.5 * x[1] * x[1]).exp() * (1.0 + 0.2 * x[0]));
    let v = GridFunction::from_fn_complex(d, |x| {
        Complex64::new((0.7 * x[0] + s).cos(), (1.1 * x[1] - s).sin()) * (-(x[0] * x[0] + x[1] * x[1]) / 4.0).exp()
    });
    (u, v)
}

#[test]
fn gradient_matches_finite_differences() {
    let d = line(6.0, 128);
    let sq = Domain::plane2d(5.0, 24).unwrap();
    let rho_line = {
        let r = GridFunction::from_fn(&d, |x| (-x[0] * x[0]).exp());
        r.scaled(2.0 / integrate_re(&r))
    };
    let specs = vec![
        EnergySpec::new(GridFunction::zeros(&d), 1.0).unwrap(),
        EnergySpec::new(harmonic(&d), 1.0).unwrap(),
        EnergySpec::new(harmonic(&d), 1.0).unwrap().with_interaction(0.5, Kernel::gaussian(1.0, &d).unwrap()).unwrap(),
        EnergySpec::new(harmonic(&d), 2.0)
            .unwrap()
            .with_interaction(0.7, Kernel::new(KernelKind::NegAbs, &d).unwrap())
            .unwrap()
            .with_background(rho_line)
            .unwrap(),
        EnergySpec::new(harmonic(&d), 1.0).unwrap().relativistic(1.0).unwrap(),
        EnergySpec::new(harmonic(&d), 1.0).unwrap().with_nonlinearity(Nonlinearity::power_law(&d, 3.0, 1.5).unwrap()).unwrap(),
        EnergySpec::new(harmonic(&sq), 1.0).unwrap().with_interaction(-0.4, Kernel::gaussian(0.8, &sq).unwrap()).unwrap(),
    ];
    for (k, spec) in specs.iter().enumerate() {
        for seed in 0..5 {
            let (u, v) = smooth_pair(spec.domain(), seed);
            let err = fd_error(spec, &u, &v);
            assert!(err <= 1e-5, "spec {k} seed {seed}: {err}");
        }
    }
}

#[test]
fn gradient_of_zero_is_zero() {
    let d = line(4.0, 64);
    let spec = EnergySpec::new(harmonic(&d), 1.0).unwrap();
    assert_eq!(spec.gradient(&GridFunction::zeros(&d)).unwrap().max_abs(), 0.0);
}

#[test]
fn laplacian_eigenfunction_is_stationary() {
    let d = line(8.0, 512);
    // vanishes on the boundary nodes themselves
    let edge = d.coord(d.len() - 1)[0];
    let u = GridFunction::from_fn(&d, |x| (PI * x[0] / (2.0 * edge)).cos());
    let spec = EnergySpec::new(GridFunction::zeros(&d), 1.0).unwrap();
    let g = spec.gradient(&u).unwrap();
    let c = inner_product(&u, &g).unwrap().re / inner_product(&u, &u).unwrap().re;
    let residual = l2_norm(&g.add_scaled(-c, &u).unwrap()) / l2_norm(&g);
    assert!(residual <= 0.05, "{residual}");
}

#[test]
fn linear_nonlinearity_is_not_differentiable() {
    let d = line(4.0, 64);
    let spec = EnergySpec::new(harmonic(&d), 1.0).unwrap().with_nonlinearity(Nonlinearity::power_law(&d, 1.0, 2.0).unwrap()).unwrap();
    assert!(matches!(spec.gradient(&ground(&d)), Err(Error::Unsupported(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pd_kernels_give_nonnegative_self_energy(vals in prop::collection::vec(-2.0f64..2.0, 40)) {
        let d = line(5.0, 40);
        let k = Kernel::gaussian(0.7, &d).unwrap();
        let u = GridFunction::from_real(&d, vals).unwrap();
        let q = self_q(&u, &k).unwrap();
        prop_assert!(q >= -1e-10 * lp_norm(&u, 2.0).unwrap().powi(4));
        let rho = density_values(&u);
        let slow = double_sum(&k, &rho, &rho);
        prop_assert!((q - slow).abs() <= 1e-12 * slow.abs().max(1e-300));
    }
}
