use super::inputs::{slack_eq, slack_ge, slack_le};
use super::*;
use crate::energy::kinetic_t;
use crate::group::GroupQuadrature;
use crate::symmetrize::OrbitModuli;

fn line(n: usize) -> Domain {
    Domain::line1d(8.0, n).unwrap()
}

fn kinetic_slack(u: &crate::grid::GridFunction) -> f64 {
    let g = GroupQuadrature::new(u.domain(), &GroupSpec::ReflectionZ2).unwrap();
    let mean = OrbitModuli::new(u, &g).unwrap().mean(2.0).unwrap();
    slack_ge(kinetic_t(u), kinetic_t(&mean))
}

#[test]
fn slack_signs() {
    assert!(slack_le(1.0, 2.0) > 0.0);
    assert!(slack_le(2.0, 1.0) < 0.0);
    assert!(slack_ge(2.0, 1.0) > 0.0);
    assert_eq!(slack_eq(3.0, 3.0), 0.0);
    assert!((slack_eq(1.0, 2.0) + 0.5).abs() < 1e-15);
}

#[test]
fn norm_preservation_under_reflection() {
    let case = PropertyCase::new(PropertyId::NormPreservation, line(257), GroupSpec::ReflectionZ2, 100, 3);
    let row = run_case(&case).unwrap();
    assert_eq!(row.status, Status::Pass, "{row:?}");
    assert!(row.max_violation <= 1e-10);
    assert_eq!(row.map_class, MapClass::Exact);
}

#[test]
fn offset_gaussian_strictly_lowers_kinetic_energy() {
    let d = line(257);
    let u = crate::grid::GridFunction::from_fn(&d, |x| (-(x[0] - 1.0).powi(2)).exp());
    assert!(kinetic_slack(&u) > 1e-4);
}

#[test]
fn even_input_keeps_kinetic_energy() {
    let d = line(257);
    let u = crate::grid::GridFunction::from_fn(&d, |x| (-x[0] * x[0]).exp() + 0.5 * (-(x[0] * x[0] - 4.0).powi(2)).exp());
    assert!(kinetic_slack(&u).abs() <= 1e-10);
}

#[test]
fn mirrored_indicators_pair_mean() {
    let d = line(256);
    let u = crate::grid::GridFunction::from_fn(&d, |x| f64::from(u8::from((0.0..=1.0).contains(&x[0]))));
    let v = crate::grid::GridFunction::from_fn(&d, |x| f64::from(u8::from((-1.0..=0.0).contains(&x[0]))));
    let g = GroupQuadrature::new(&d, &GroupSpec::ReflectionZ2).unwrap();
    let mu = OrbitModuli::new(&u, &g).unwrap().mean(2.0).unwrap();
    let mv = OrbitModuli::new(&v, &g).unwrap().mean(2.0).unwrap();
    let lhs = crate::grid::inner_product(&u, &v).unwrap().re;
    let rhs = crate::grid::inner_product(&mu, &mv).unwrap().re;
    assert_eq!(lhs, 0.0);
    assert!((slack_le(lhs, rhs) - 1.0).abs() < 1e-12);
}

#[test]
fn box_kernel_is_rejected_for_conv_symm_i() {
    let case = PropertyCase::new(PropertyId::ConvSymmI, line(129), GroupSpec::ReflectionZ2, 5, 0)
        .with_kernel(KernelKind::Box { a: 1.0 });
    let row = run_case(&case).unwrap();
    assert_eq!(row.status, Status::Rejected);
    assert!(row.detail.contains("positive definite"), "{}", row.detail);
    assert!(row.worst_trial.is_none());
}

#[test]
fn kernel_on_kernel_free_row_is_rejected() {
    let case = PropertyCase::new(PropertyId::KineticSymm, line(65), GroupSpec::ReflectionZ2, 2, 0)
        .with_kernel(KernelKind::Gaussian { sigma: 1.0 });
    assert_eq!(run_case(&case).unwrap().status, Status::Rejected);
}

#[test]
fn group_on_wrong_domain_is_rejected() {
    let case = PropertyCase::new(PropertyId::KineticSymm, line(65), GroupSpec::rotation_zn(4), 2, 0);
    assert_eq!(run_case(&case).unwrap().status, Status::Rejected);
}

#[test]
fn rearrangement_on_cylinder_is_rejected() {
    let d = Domain::cylinder(4.0, 16, 8).unwrap();
    let case = PropertyCase::new(PropertyId::SdrPolyaSzego, d, GroupSpec::cylinder_shift(8), 2, 0);
    assert_eq!(run_case(&case).unwrap().status, Status::Rejected);
}

#[test]
fn zero_trials_is_an_error() {
    let case = PropertyCase::new(PropertyId::KineticSymm, line(65), GroupSpec::ReflectionZ2, 0, 0);
    assert!(run_case(&case).is_err());
    let config = SuiteConfig { trials: 0, ..SuiteConfig::default() };
    assert!(run_suite(&config).is_err());
}

#[test]
fn nonpositive_tolerance_is_an_error() {
    let case = PropertyCase::new(PropertyId::KineticSymm, line(65), GroupSpec::ReflectionZ2, 1, 0).with_tolerance(0.0);
    assert!(run_case(&case).is_err());
}

#[test]
fn property_ids_round_trip() {
    for id in PropertyId::ALL {
        assert_eq!(id.as_str().parse::<PropertyId>().unwrap(), id);
        let json = serde_json::to_string(&id).unwrap();
        assert_eq!(json, format!("\"{}\"", id.as_str()));
        assert_eq!(serde_json::from_str::<PropertyId>(&json).unwrap(), id);
    }
    assert!("conv_symm_i".parse::<PropertyId>().is_err());
}

fn small_config() -> SuiteConfig {
    SuiteConfig {
        matrix: vec![SuiteEntry { domain: crate::grid::DomainConfig::line1d(4.0, 65), group: GroupSpec::ReflectionZ2 }],
        trials: 4,
        seed: 11,
        properties: vec![PropertyId::PairMean, PropertyId::ConvSymmII, PropertyId::SdrHardyLittlewood],
        ..SuiteConfig::default()
    }
}

#[test]
fn csv_is_deterministic() {
    let render = || {
        let mut buf = Vec::new();
        run_suite(&small_config()).unwrap().write_csv(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    };
    let a = render();
    assert_eq!(a, render());
    let mut lines = a.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert_eq!(lines.count(), 3);
}

#[test]
fn small_suite_passes() {
    let report = run_suite(&small_config()).unwrap();
    assert!(report.pass, "{:?}", report.rows);
    assert!(!report.any_rejected());
}

#[test]
fn suite_config_rejects_unknown_keys() {
    assert!(serde_json::from_str::<SuiteConfig>(r#"{"trails": 3}"#).is_err());
    let c: SuiteConfig = serde_json::from_str(r#"{"trials": 3}"#).unwrap();
    assert_eq!(c.trials, 3);
    assert_eq!(c.matrix.len(), 4);
}

#[test]
fn default_catalogue_skips_rearrangements_on_cylinder() {
    let cases = SuiteConfig::default().cases().unwrap();
    assert_eq!(cases.len(), 16 * 3 + 13);
    assert!(cases.iter().all(|c| !(c.id.is_rearrangement() && c.domain.kind() == DomainKind::Cylinder)));
}
