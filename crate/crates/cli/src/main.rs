use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use exposure_lab::netcore::EnumerationCap;
use exposure_lab::scenario::{
    self, parse_scenario, parse_search_config, reproduce, run, run_coupling, run_search, CouplingConfig, Example,
    RunFlags, Scenario,
};
use exposure_lab::Error;

/// Exact-enumeration checks for exposure-mapping estimands.
#[derive(Parser)]
#[command(name = "exposure-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Override the seed given in the input file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print only the machine-readable report.
    #[arg(long, global = true)]
    json_only: bool,
    /// Refuse networks with more units than this.
    #[arg(long, global = true)]
    max_n: Option<usize>,
    /// Candidate budget for `search`.
    #[arg(long, global = true)]
    budget: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every requested check on a scenario file.
    Run { file: PathBuf },
    /// Reproduce one of the worked examples, or `all`.
    Reproduce { id: String },
    /// Search randomly generated scenarios for sign reversals.
    Search { config: PathBuf },
    /// Check the urn coupling exactly and by sampling.
    CouplingTest { config: PathBuf },
    /// Load and validate a scenario file without running it.
    Validate { file: PathBuf },
}

/// Exit code when a search finds nothing.
const NOT_FOUND: u8 = 4;
/// Exit code when a reproduction assertion fails.
const REPRODUCE_FAILED: u8 = 3;

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Reads a scenario from disk, falling back to the bundled files by name.
fn load(path: &Path, cap: EnumerationCap) -> Result<Scenario, Error> {
    let name = path.file_stem().map_or_else(|| "scenario".into(), |s| s.to_string_lossy().into_owned());
    if !path.exists() {
        if let Some(text) = scenario::bundled_text(&path.to_string_lossy()) {
            return parse_scenario(text, &name, cap);
        }
    }
    parse_scenario(&read(path)?, &name, cap)
}

fn config_text(path: &Path, bundled: &[(&str, &'static str)]) -> Result<String, Error> {
    if !path.exists() {
        if let Some((_, text)) = bundled.iter().find(|(n, _)| Path::new(n) == path) {
            return Ok(text.to_string());
        }
    }
    read(path)
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize")
}

fn execute(cli: &Cli) -> Result<u8, Error> {
    let cap = cli.max_n.map_or(EnumerationCap::MAX, EnumerationCap::new);
    let flags = RunFlags {
        seed: cli.seed,
        max_n: cli.max_n,
    };
    match &cli.command {
        Command::Run { file } => {
            let sc = load(file, cap)?;
            let report = run(&sc, flags)?;
            println!("{}", report.to_json());
            if !cli.json_only {
                eprint!("{}", report.table());
            }
            Ok(0)
        }
        Command::Validate { file } => {
            let sc = load(file, cap)?;
            if !cli.json_only {
                eprintln!("ok: {sc}");
            }
            println!("{}", json(&serde_json::json!({"valid": true, "scenario": sc.name, "digest": sc.digest})));
            Ok(0)
        }
        Command::Reproduce { id } => {
            let examples = if id == "all" {
                Example::ALL.to_vec()
            } else {
                vec![id.parse::<Example>()?]
            };
            let mut all_passed = true;
            let mut out = Vec::new();
            for e in examples {
                let r = reproduce(e)?;
                all_passed &= r.passed;
                if !cli.json_only {
                    eprint!("{}", r.summary());
                }
                out.push(r);
            }
            println!("{}", json(&out));
            Ok(if all_passed { 0 } else { REPRODUCE_FAILED })
        }
        Command::Search { config } => {
            let text = config_text(
                config,
                &[
                    ("search_pindown", scenario::BUNDLED_SEARCH_PINDOWN),
                    ("search_overall", scenario::BUNDLED_SEARCH_OVERALL),
                ],
            )?;
            let cfg = parse_search_config(&text, cli.seed, cli.budget, cli.max_n)?;
            let report = run_search(&cfg)?;
            println!("{}", json(&report));
            if !cli.json_only {
                eprintln!(
                    "{} reversal(s) among {} candidates ({} skipped)",
                    report.found.len(),
                    report.evaluated,
                    report.skipped
                );
                for hit in &report.found {
                    eprintln!("--- candidate {} (tau = {})\n{}", hit.index, hit.tau, hit.scenario);
                }
            }
            Ok(if report.found.is_empty() { NOT_FOUND } else { 0 })
        }
        Command::CouplingTest { config } => {
            let text = config_text(
                config,
                &[
                    ("coupling_star", scenario::BUNDLED_COUPLING_STAR),
                    ("coupling_full", scenario::BUNDLED_COUPLING_FULL),
                ],
            )?;
            let mut cfg = CouplingConfig::from_toml(&text)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let report = run_coupling(&cfg)?;
            println!("{}", json(&report));
            if !cli.json_only {
                eprintln!(
                    "{} configurations, max TV {:e}, {} sampled pairs, {} order violations: {}",
                    report.rows.len(),
                    report.max_tv,
                    report.total_samples,
                    report.order_violations,
                    if report.passed { "PASS" } else { "FAIL" }
                );
            }
            Ok(if report.passed { 0 } else { REPRODUCE_FAILED })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
