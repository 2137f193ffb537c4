//! A reduced verification matrix written as CSV to stdout. Pass the trial
//! count as the first argument (default 5).

use symground::grid::DomainConfig;
use symground::group::GroupSpec;
use symground::verify::{run_suite, SuiteConfig, SuiteEntry};

fn main() -> symground::Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let config = SuiteConfig {
        matrix: vec![
            SuiteEntry { domain: DomainConfig::line1d(8.0, 257), group: GroupSpec::ReflectionZ2 },
            SuiteEntry { domain: DomainConfig::plane2d(8.0, 64), group: GroupSpec::rotation_zn(4) },
        ],
        trials,
        ..SuiteConfig::default()
    };
    let report = run_suite(&config)?;
    report.write_csv(std::io::stdout().lock())?;
    eprintln!("overall pass: {}", report.pass);
    Ok(())
}
