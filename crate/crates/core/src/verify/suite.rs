use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::KernelKind;
use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::grid::{DomainConfig, DomainKind};

use super::{run_case, PropertyCase, PropertyId, ReportRow, Status};

/// One (domain, group) pair of the suite matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteEntry {
    pub domain: DomainConfig,
    pub group: GroupSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub matrix: Vec<SuiteEntry>,
    pub trials: usize,
    pub seed: u64,
    /// Properties to run; empty means every property that applies to each
    /// entry.
    pub properties: Vec<PropertyId>,
    pub kernel_overrides: BTreeMap<PropertyId, KernelKind>,
    pub tolerance_overrides: BTreeMap<PropertyId, f64>,
}

impl Default for SuiteConfig {
    /// Line with the reflection, the square with quarter turns and with 64
    /// rotations, and the cylinder with 64 angular shifts; 50 trials each.
    fn default() -> Self {
        SuiteConfig {
            matrix: vec![
                SuiteEntry { domain: DomainConfig::line1d(8.0, 257), group: GroupSpec::ReflectionZ2 },
                SuiteEntry { domain: DomainConfig::plane2d(8.0, 64), group: GroupSpec::rotation_zn(4) },
                SuiteEntry { domain: DomainConfig::plane2d(8.0, 64), group: GroupSpec::circle_so2(64) },
                SuiteEntry { domain: DomainConfig::cylinder(8.0, 128, 64), group: GroupSpec::cylinder_shift(64) },
            ],
            trials: 50,
            seed: 0,
            properties: Vec::new(),
            kernel_overrides: BTreeMap::new(),
            tolerance_overrides: BTreeMap::new(),
        }
    }
}

impl SuiteConfig {
    /// Cases in matrix order, then catalogue order.
    pub fn cases(&self) -> Result<Vec<PropertyCase>> {
        if self.trials == 0 {
            return Err(Error::Config("suite trial count must be at least 1".into()));
        }
        if self.matrix.is_empty() {
            return Err(Error::Config("suite matrix is empty".into()));
        }
        for (id, &tol) in &self.tolerance_overrides {
            if !(tol > 0.0) || !tol.is_finite() {
                return Err(Error::Config(format!("tolerance override for {id} must be positive, got {tol}")));
            }
        }
        let mut cases = Vec::new();
        for entry in &self.matrix {
            let domain = entry.domain.build()?;
            let ids: Vec<PropertyId> = if self.properties.is_empty() {
                PropertyId::ALL
                    .into_iter()
                    .filter(|p| !(p.is_rearrangement() && domain.kind() == DomainKind::Cylinder))
                    .collect()
            } else {
                self.properties.clone()
            };
            for id in ids {
                let mut case = PropertyCase::new(id, domain.clone(), entry.group.clone(), self.trials, self.seed);
                if let Some(k) = self.kernel_overrides.get(&id) {
                    case = case.with_kernel(k.clone());
                }
                if let Some(&t) = self.tolerance_overrides.get(&id) {
                    case = case.with_tolerance(t);
                }
                cases.push(case);
            }
        }
        Ok(cases)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    /// Every row passed.
    pub pass: bool,
    pub rows: Vec<ReportRow>,
}

pub const CSV_HEADER: &str = "id,trials,min_slack,max_violation,pass,domain,group,map_class,tolerance,status";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl SuiteReport {
    pub fn from_rows(rows: Vec<ReportRow>) -> Self {
        SuiteReport { pass: rows.iter().all(ReportRow::passed), rows }
    }

    pub fn any_rejected(&self) -> bool {
        self.rows.iter().any(|r| r.status == Status::Rejected)
    }

    /// One line per row; floats with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{:.16e},{:.16e},{},{},{},{},{:.16e},{}",
                r.id,
                r.trials,
                r.min_slack,
                r.max_violation,
                r.passed(),
                csv_field(&r.domain),
                csv_field(&r.group),
                r.map_class.as_str(),
                r.tolerance,
                r.status.as_str()
            )?;
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Runs every case of `config`, cases and trials in parallel, rows in case
/// order.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    let cases = config.cases()?;
    let rows: Vec<ReportRow> = cases.par_iter().map(run_case).collect::<Result<_>>()?;
    Ok(SuiteReport::from_rows(rows))
}

/// Runs `f` on a pool capped at `SYMGROUND_THREADS` threads when the variable
/// holds a positive integer, on the global pool otherwise.
pub fn with_thread_cap<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let cap = std::env::var("SYMGROUND_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok()).filter(|&n| n > 0);
    match cap.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}
