use std::path::PathBuf;

use serde_json::{json, Value};

use crate::energy::{kinetic_t, positive_definite_check, Kernel};
use crate::error::{Error, Result};
use crate::grid::{lp_norm, write_csv, GridFunction};
use crate::group::GroupQuadrature;
use crate::minimizer::{ground_state, symmetry_report};
use crate::random::{random_function, Smoothness};
use crate::symmetrize::{orbital_mean, sdr, symmetry_deviation, MeanSpec};
use crate::verify::{run_suite, with_thread_cap, Status};

use super::config::{read_grid_function, Command, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// What a command produced; nothing is written until the command is done.
#[derive(Debug, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    /// Paths relative to the output directory.
    pub files: Vec<(PathBuf, Vec<u8>)>,
    pub warnings: Vec<String>,
}

pub fn execute(config: &RunConfig) -> Result<Outcome> {
    match config.command {
        Command::Verify => verify(config),
        Command::Minimize => minimize(config),
        Command::Mean => mean(config),
        Command::Rearrange => rearrange(config),
        Command::KernelCheck => kernel_check(config),
    }
}

fn csv_bytes(f: &GridFunction) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_csv(f, &mut buf)?;
    Ok(buf)
}

fn json_bytes(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("a json value always serializes");
    s.push('\n');
    s.into_bytes()
}

fn verify(config: &RunConfig) -> Result<Outcome> {
    let suite = config.suite_config()?;
    let report = with_thread_cap(|| run_suite(&suite))?;
    let mut out = Outcome::default();
    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    let mut json = Vec::new();
    report.write_json(&mut json)?;
    json.push(b'\n');
    for r in report.rows.iter().filter(|r| r.status == Status::Rejected) {
        out.warnings.push(format!("{} on {} / {} rejected: {}", r.id, r.domain, r.group, r.detail));
    }
    let failed = report.rows.iter().any(|r| r.status == Status::Fail);
    out.code = if failed {
        EXIT_FAILED
    } else if report.any_rejected() {
        EXIT_CONFIG
    } else {
        EXIT_OK
    };
    out.stdout = String::from_utf8(csv.clone()).expect("csv is utf-8");
    out.files.push((config.output.report_csv.clone(), csv));
    out.files.push((config.output.report_json.clone(), json));
    Ok(out)
}

fn minimize(config: &RunConfig) -> Result<Outcome> {
    let domain = config.domain_config().build()?;
    let energy = config.energy.clone().unwrap_or_default();
    let spec = energy.build(&domain, &config.base_dir)?;
    let group = GroupQuadrature::new(&domain, &config.group_spec())?;
    let trace = ground_state(&spec, &config.minimizer_config(), Some(&group))?;
    let symmetry = symmetry_report(&trace, &spec, &group)?;
    let breakdown = spec.breakdown(&trace.u)?;
    let mut out = Outcome::default();
    if trace.stalled {
        out.warnings.push(format!("step size collapsed after {} iterations; energy stopped decreasing", trace.iterations));
    }
    if !trace.converged {
        out.warnings.push(format!("no convergence within {} iterations", trace.iterations));
    }
    let summary = json!({
        "command": "minimize",
        "domain": domain.describe(),
        "group": config.group_spec().label(),
        "energy": trace.energy,
        "breakdown": breakdown,
        "converged": trace.converged,
        "stalled": trace.stalled,
        "iterations": trace.iterations,
        "gradient_check_error": trace.gradient_check_error,
        "symmetry": symmetry,
    });
    let mut trace_csv = Vec::new();
    trace.write_csv(&mut trace_csv)?;
    out.code = if trace.converged { EXIT_OK } else { EXIT_FAILED };
    out.stdout = String::from_utf8(json_bytes(&summary)).expect("json is utf-8");
    out.files.push((config.output.summary_json.clone(), json_bytes(&summary)));
    out.files.push((config.output.trace_csv.clone(), trace_csv));
    out.files.push((config.output.state_csv.clone(), csv_bytes(&trace.u)?));
    Ok(out)
}

/// The `input` file, or a seeded smooth function on the configured domain.
fn load_input(config: &RunConfig) -> Result<GridFunction> {
    match &config.input {
        Some(path) => {
            let u = read_grid_function(&config.base_dir.join(path))?;
            if config.domain.is_some() {
                config.domain_config().build()?.check_same(u.domain()).map_err(|e| {
                    Error::Config(format!("input {} does not match the domain block: {e}", path.display()))
                })?;
            }
            Ok(u)
        }
        None => Ok(random_function(&config.domain_config().build()?, config.seed(), Smoothness::Smooth)),
    }
}

fn mean(config: &RunConfig) -> Result<Outcome> {
    let u = load_input(config)?;
    let p = config.mean.clone().unwrap_or_default().p;
    let group = GroupQuadrature::new(u.domain(), &config.group_spec())?;
    let mean = orbital_mean(&u, &MeanSpec::new(p, group.clone())?)?;
    let summary = json!({
        "command": "mean",
        "domain": u.domain().describe(),
        "group": config.group_spec().label(),
        "map_class": group.class().as_str(),
        "p": p,
        "norm_input": lp_norm(&u, p)?,
        "norm_mean": lp_norm(&mean, p)?,
        "symmetry_deviation_input": symmetry_deviation(&u, &group)?,
        "symmetry_deviation_mean": symmetry_deviation(&mean, &group)?,
    });
    Ok(Outcome {
        code: EXIT_OK,
        stdout: String::from_utf8(json_bytes(&summary)).expect("json is utf-8"),
        files: vec![
            (config.output.summary_json.clone(), json_bytes(&summary)),
            (config.output.state_csv.clone(), csv_bytes(&mean)?),
        ],
        warnings: Vec::new(),
    })
}

fn rearrange(config: &RunConfig) -> Result<Outcome> {
    let u = load_input(config)?;
    let star = sdr(&u)?;
    let summary = json!({
        "command": "rearrange",
        "domain": u.domain().describe(),
        "l2_input": lp_norm(&u, 2.0)?,
        "l2_rearranged": lp_norm(&star, 2.0)?,
        "max_input": u.max_abs(),
        "max_rearranged": star.max_abs(),
        "kinetic_input": kinetic_t(&u),
        "kinetic_rearranged": kinetic_t(&star),
    });
    Ok(Outcome {
        code: EXIT_OK,
        stdout: String::from_utf8(json_bytes(&summary)).expect("json is utf-8"),
        files: vec![
            (config.output.summary_json.clone(), json_bytes(&summary)),
            (config.output.state_csv.clone(), csv_bytes(&star)?),
        ],
        warnings: Vec::new(),
    })
}

/// Positive definiteness in the configured mode decides the exit code; sign
/// and group invariance are reported alongside.
fn kernel_check(config: &RunConfig) -> Result<Outcome> {
    let domain = config.domain_config().build()?;
    let kind = config.kernel.as_ref().expect("checked in parse_config").resolve(&config.base_dir)?;
    let kernel = Kernel::new(kind, &domain)?;
    let mode = config.pd_mode();
    let (positive_definite, min_eigenvalue) = positive_definite_check(&kernel, mode);
    let nonnegative = kernel.samples().re().iter().all(|&s| s >= 0.0);
    let group = config.group_spec();
    let group_deviation = kernel.group_deviation(&group)?;
    let summary = json!({
        "command": "kernel-check",
        "domain": domain.describe(),
        "kernel": kernel.kind().name(),
        "mode": mode,
        "positive_definite": positive_definite,
        "min_eigenvalue": min_eigenvalue,
        "nonnegative": nonnegative,
        "group": group.label(),
        "group_deviation": group_deviation,
    });
    Ok(Outcome {
        code: if positive_definite { EXIT_OK } else { EXIT_FAILED },
        stdout: String::from_utf8(json_bytes(&summary)).expect("json is utf-8"),
        files: vec![(config.output.summary_json.clone(), json_bytes(&summary))],
        warnings: Vec::new(),
    })
}
