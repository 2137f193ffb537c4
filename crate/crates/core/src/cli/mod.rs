//! Command-line front end: a JSON config selects the command, flags only
//! pick the config, the output directory, a seed override and quietness.
//!
//! Exit codes: 0 on success, 1 when a suite row fails, a run does not
//! converge or a kernel check fails, 2 on configuration errors (including
//! rejected suite rows). Diagnostics go to stderr prefixed `error:` or
//! `warning:`.

mod commands;
mod config;

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::Parser;

use crate::error::{Error, Result};

pub use self::commands::{execute, Outcome, EXIT_CONFIG, EXIT_FAILED, EXIT_OK};
pub use self::config::{
    parse_config, BackgroundConfig, Command, EnergyConfig, InteractionConfig, KernelConfig, KineticConfig, MeanBlock,
    NonlinearityConfig, OutputConfig, PotentialConfig, RunConfig, SuiteBlock,
};

const DEFAULTS: &str = "\
Config defaults:
  seed            0
  domain          {\"kind\":\"line1d\",\"L\":8,\"n\":257}
  group           {\"kind\":\"reflection_z2\"}
  suite           50 trials; without suite.matrix, domain or group: the
                  line / square (quarter turns, 64 rotations) / cylinder matrix
  energy          mass 1, classical kinetic, zero potential (required by minimize)
  mean.p          2
  input           seeded smooth random function (mean, rearrange)
  pd_mode         all (kernel-check)
  output          report.csv, report.json, trace.csv, state.csv, summary.json
Unknown keys are errors. SYMGROUND_THREADS caps the worker threads.";

#[derive(Debug, Parser)]
#[command(name = "symground", version, about = "Orbital means, symmetrization checks and ground states", after_help = DEFAULTS)]
pub struct Args {
    /// Command to run; may instead be given as `command` in the config.
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// JSON config file, `-` for stdin.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write files only; nothing on stdout.
    #[arg(long)]
    pub quiet: bool,
}

/// Reads, merges and checks the config named by `args`.
pub fn load_config(args: &Args) -> Result<RunConfig> {
    let (text, base_dir) = match &args.config {
        Some(p) if p.as_os_str() == "-" => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            (s, PathBuf::from("."))
        }
        Some(p) => {
            let s = fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            (s, p.parent().map(Path::to_path_buf).unwrap_or_default())
        }
        None => match args.command {
            Some(c) => (format!("{{\"command\":\"{}\"}}", c.as_str()), PathBuf::from(".")),
            None => return Err(Error::Config("give a command or --config".into())),
        },
    };
    let mut value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
    if let (Some(c), Some(obj)) = (args.command, value.as_object_mut()) {
        match obj.get("command").and_then(|v| v.as_str()) {
            Some(existing) if existing != c.as_str() => {
                return Err(Error::Config(format!("command `{}` conflicts with the config's `{existing}`", c.as_str())));
            }
            _ => {
                obj.insert("command".into(), c.as_str().into());
            }
        }
    }
    if let (Some(seed), Some(obj)) = (args.seed, value.as_object_mut()) {
        obj.insert("seed".into(), seed.into());
    }
    let mut config = parse_config(&value.to_string())?;
    config.base_dir = base_dir;
    Ok(config)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Diverged(_) => EXIT_FAILED,
        _ => EXIT_CONFIG,
    }
}

fn write_outputs(out_dir: &Path, outcome: &Outcome) -> Result<()> {
    fs::create_dir_all(out_dir)
        .map_err(|e| Error::Config(format!("cannot create output directory {}: {e}", out_dir.display())))?;
    for (name, bytes) in &outcome.files {
        let path = out_dir.join(name);
        fs::write(&path, bytes).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

/// Runs the CLI on `argv` and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return EXIT_OK;
        }
        Err(e) => {
            // clap's rendering already starts with `error:`
            eprint!("{}", e.render());
            return EXIT_CONFIG;
        }
    };
    let result = load_config(&args).and_then(|config| {
        for block in config.unused_blocks() {
            eprintln!("warning: `{block}` is ignored by {}", config.command.as_str());
        }
        let outcome = execute(&config)?;
        write_outputs(&args.out_dir, &outcome)?;
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            if !args.quiet {
                let mut stdout = std::io::stdout().lock();
                // a closed pipe is not worth a failure once the files are written
                let _ = stdout.write_all(outcome.stdout.as_bytes()).and_then(|_| stdout.flush());
            }
            outcome.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
