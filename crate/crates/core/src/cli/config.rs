use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::energy::{EnergySpec, Kernel, KernelKind, Nonlinearity, PdMode};
use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::grid::{read_csv, Domain, DomainConfig, DomainKind, GridFunction};
use crate::minimizer::{Initializer, MinimizerConfig};
use crate::verify::{PropertyId, SuiteConfig, SuiteEntry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Verify,
    Minimize,
    Mean,
    Rearrange,
    KernelCheck,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Minimize => "minimize",
            Command::Mean => "mean",
            Command::Rearrange => "rearrange",
            Command::KernelCheck => "kernel-check",
        }
    }
}

/// A kernel as written in a config: an analytic kind or a table of
/// difference-grid samples in grid-function CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelConfig {
    Gaussian { sigma: f64 },
    Box { a: f64 },
    NegAbs,
    RelativisticBessel { m: f64 },
    Table { path: PathBuf },
}

impl KernelConfig {
    pub fn resolve(&self, base: &Path) -> Result<KernelKind> {
        Ok(match self {
            KernelConfig::Gaussian { sigma } => KernelKind::Gaussian { sigma: *sigma },
            KernelConfig::Box { a } => KernelKind::Box { a: *a },
            KernelConfig::NegAbs => KernelKind::NegAbs,
            KernelConfig::RelativisticBessel { m } => KernelKind::RelativisticBessel { m: *m },
            KernelConfig::Table { path } => KernelKind::Table(read_grid_function(&base.join(path))?),
        })
    }
}

pub(crate) fn read_grid_function(path: &Path) -> Result<GridFunction> {
    let file = File::open(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    read_csv(BufReader::new(file)).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KineticConfig {
    Classical,
    Relativistic { m: f64 },
}

/// External potential. `quadratic` is `strength · |x - center|²` over the
/// non-periodic axes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    Zero,
    Quadratic {
        #[serde(default)]
        center: Vec<f64>,
        #[serde(default = "one")]
        strength: f64,
    },
    Table { path: PathBuf },
}

/// Background density, rescaled to the constraint mass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BackgroundConfig {
    /// Centred Gaussian; radial on line and plane, axial on the cylinder.
    Gaussian { sigma: f64 },
    Table { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionConfig {
    pub coupling: f64,
    pub kernel: KernelConfig,
    #[serde(default)]
    pub background: Option<BackgroundConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearityConfig {
    pub power: f64,
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyConfig {
    pub mass: f64,
    pub kinetic: KineticConfig,
    pub potential: PotentialConfig,
    pub interaction: Option<InteractionConfig>,
    pub nonlinearity: Option<NonlinearityConfig>,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        EnergyConfig {
            mass: 1.0,
            kinetic: KineticConfig::Classical,
            potential: PotentialConfig::Zero,
            interaction: None,
            nonlinearity: None,
        }
    }
}

fn one() -> f64 {
    1.0
}

impl EnergyConfig {
    pub fn build(&self, domain: &Domain, base: &Path) -> Result<EnergySpec> {
        let potential = match &self.potential {
            PotentialConfig::Zero => GridFunction::zeros(domain),
            PotentialConfig::Quadratic { center, strength } => {
                let c = axis_center(center, domain)?;
                let periodic = [domain.is_periodic(0), domain.dim() < 2 || domain.is_periodic(1)];
                GridFunction::from_fn(domain, |x| {
                    let r2: f64 = (0..2).filter(|&a| !periodic[a]).map(|a| (x[a] - c[a]).powi(2)).sum();
                    strength * r2
                })
            }
            PotentialConfig::Table { path } => {
                let v = read_grid_function(&base.join(path))?;
                domain.check_same(v.domain())?;
                v
            }
        };
        let mut spec = EnergySpec::new(potential, self.mass)?;
        if let KineticConfig::Relativistic { m } = self.kinetic {
            spec = spec.relativistic(m)?;
        }
        if let Some(int) = &self.interaction {
            let kernel = Kernel::new(int.kernel.resolve(base)?, domain)?;
            spec = spec.with_interaction(int.coupling, kernel)?;
            if let Some(bg) = &int.background {
                let rho = match bg {
                    BackgroundConfig::Gaussian { sigma } => centred_gaussian(domain, *sigma)?,
                    BackgroundConfig::Table { path } => read_grid_function(&base.join(path))?,
                };
                let mass = crate::grid::integrate_re(&rho);
                if !(mass > 0.0) {
                    return Err(Error::Config("background density has no mass".into()));
                }
                spec = spec.with_background(rho.scaled(self.mass / mass))?;
            }
        }
        if let Some(nl) = &self.nonlinearity {
            spec = spec.with_nonlinearity(Nonlinearity::power_law(domain, nl.power, nl.gamma)?)?;
        }
        Ok(spec)
    }
}

fn axis_center(center: &[f64], domain: &Domain) -> Result<[f64; 2]> {
    if center.len() > domain.dim() {
        return Err(Error::Config(format!(
            "potential center has {} entries for a {}-dimensional domain",
            center.len(),
            domain.dim()
        )));
    }
    Ok([center.first().copied().unwrap_or(0.0), center.get(1).copied().unwrap_or(0.0)])
}

fn centred_gaussian(domain: &Domain, sigma: f64) -> Result<GridFunction> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Config(format!("background sigma must be positive, got {sigma}")));
    }
    let radial = domain.kind() != DomainKind::Cylinder;
    Ok(GridFunction::from_fn(domain, |x| {
        let r2 = if radial { x[0] * x[0] + x[1] * x[1] } else { x[0] * x[0] };
        (-r2 / (2.0 * sigma * sigma)).exp()
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteBlock {
    /// Defaults to the top-level domain and group when either is given, and
    /// to the four-entry default matrix otherwise.
    pub matrix: Option<Vec<SuiteEntry>>,
    pub trials: usize,
    pub properties: Vec<PropertyId>,
    pub kernels: BTreeMap<PropertyId, KernelConfig>,
    pub tolerances: BTreeMap<PropertyId, f64>,
}

impl Default for SuiteBlock {
    fn default() -> Self {
        SuiteBlock {
            matrix: None,
            trials: 50,
            properties: Vec::new(),
            kernels: BTreeMap::new(),
            tolerances: BTreeMap::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeanBlock {
    pub p: f64,
}

impl Default for MeanBlock {
    fn default() -> Self {
        MeanBlock { p: 2.0 }
    }
}

/// File names inside the output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub report_csv: PathBuf,
    pub report_json: PathBuf,
    pub trace_csv: PathBuf,
    pub state_csv: PathBuf,
    pub summary_json: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            report_csv: "report.csv".into(),
            report_json: "report.json".into(),
            trace_csv: "trace.csv".into(),
            state_csv: "state.csv".into(),
            summary_json: "summary.json".into(),
        }
    }
}

/// A parsed and checked configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub domain: Option<DomainConfig>,
    #[serde(default)]
    pub group: Option<GroupSpec>,
    #[serde(default)]
    pub energy: Option<EnergyConfig>,
    #[serde(default)]
    pub minimizer: Option<MinimizerConfig>,
    #[serde(default)]
    pub suite: Option<SuiteBlock>,
    #[serde(default)]
    pub mean: Option<MeanBlock>,
    /// Grid-function CSV read by `mean` and `rearrange`; a seeded smooth
    /// random function when absent.
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub kernel: Option<KernelConfig>,
    #[serde(default)]
    pub pd_mode: Option<PdMode>,
    #[serde(default)]
    pub output: OutputConfig,
    /// Directory that relative paths in the config are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    /// The domain block, or `line1d` with `L = 8`, `n = 257`.
    pub fn domain_config(&self) -> DomainConfig {
        self.domain.clone().unwrap_or_else(|| DomainConfig::line1d(8.0, 257))
    }

    /// The group block, or the reflection.
    pub fn group_spec(&self) -> GroupSpec {
        self.group.clone().unwrap_or(GroupSpec::ReflectionZ2)
    }

    pub fn pd_mode(&self) -> PdMode {
        self.pd_mode.unwrap_or(PdMode::All)
    }

    pub fn suite_block(&self) -> SuiteBlock {
        self.suite.clone().unwrap_or_default()
    }

    pub fn suite_config(&self) -> Result<SuiteConfig> {
        let block = self.suite_block();
        let matrix = match block.matrix {
            Some(m) => m,
            None if self.domain.is_some() || self.group.is_some() => {
                vec![SuiteEntry { domain: self.domain_config(), group: self.group_spec() }]
            }
            None => SuiteConfig::default().matrix,
        };
        let kernel_overrides =
            block.kernels.iter().map(|(id, k)| Ok((*id, k.resolve(&self.base_dir)?))).collect::<Result<_>>()?;
        Ok(SuiteConfig {
            matrix,
            trials: block.trials,
            seed: self.seed(),
            properties: block.properties,
            kernel_overrides,
            tolerance_overrides: block.tolerances,
        })
    }

    /// The minimizer block; a top-level seed reseeds a random initializer.
    pub fn minimizer_config(&self) -> MinimizerConfig {
        let mut cfg = self.minimizer.clone().unwrap_or_default();
        if let (Some(seed), Initializer::Random { .. }) = (self.seed, &cfg.initializer) {
            cfg.initializer = Initializer::Random { seed };
        }
        cfg
    }

    fn uses_group(&self) -> bool {
        matches!(self.command, Command::Verify | Command::Minimize | Command::Mean | Command::KernelCheck)
    }

    /// Blocks that the command ignores.
    pub fn unused_blocks(&self) -> Vec<&'static str> {
        let c = self.command;
        let mut unused = Vec::new();
        let mut flag = |present: bool, used: bool, name: &'static str| {
            if present && !used {
                unused.push(name);
            }
        };
        flag(self.group.is_some(), self.uses_group(), "group");
        flag(self.energy.is_some(), c == Command::Minimize, "energy");
        flag(self.minimizer.is_some(), c == Command::Minimize, "minimizer");
        flag(self.suite.is_some(), c == Command::Verify, "suite");
        flag(self.mean.is_some(), c == Command::Mean, "mean");
        flag(self.input.is_some(), matches!(c, Command::Mean | Command::Rearrange), "input");
        flag(self.kernel.is_some(), c == Command::KernelCheck, "kernel");
        flag(self.pd_mode.is_some(), c == Command::KernelCheck, "pd_mode");
        unused
    }

    /// Cross-block checks that need no file access.
    pub fn check(&self) -> Result<()> {
        let domain = self.domain_config();
        let kind = domain.build()?.kind();
        let top_level = self.domain.is_some() || self.group.is_some();
        if self.uses_group() && (top_level || self.command != Command::Verify) {
            self.group_spec().validate_for(kind)?;
        }
        match self.command {
            Command::Verify => {
                let block = self.suite_block();
                if block.trials == 0 {
                    return Err(Error::Config("suite.trials must be at least 1".into()));
                }
                if let Some(matrix) = &block.matrix {
                    if matrix.is_empty() {
                        return Err(Error::Config("suite.matrix is empty".into()));
                    }
                    for e in matrix {
                        e.group.validate_for(e.domain.build()?.kind())?;
                    }
                }
            }
            Command::Minimize => {
                if self.energy.is_none() {
                    return Err(Error::Config("minimize needs an `energy` block".into()));
                }
                self.minimizer_config().validate()?;
            }
            Command::Mean => {
                let p = self.mean.clone().unwrap_or_default().p;
                if !(p >= 1.0) || !p.is_finite() {
                    return Err(Error::Config(format!("mean.p must be a finite number >= 1, got {p}")));
                }
            }
            Command::Rearrange => {
                if kind == DomainKind::Cylinder {
                    return Err(Error::Config("rearrange is not defined on the cylinder".into()));
                }
            }
            Command::KernelCheck => {
                if self.kernel.is_none() {
                    return Err(Error::Config("kernel-check needs a `kernel` block".into()));
                }
            }
        }
        Ok(())
    }
}

/// Parses a JSON config, fills defaults and checks block consistency.
/// Unknown keys are errors.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let config: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    config.check()?;
    Ok(config)
}
