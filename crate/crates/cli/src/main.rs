use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gaussfisher::config::{ScenarioConfig, ScenarioKind};
use gaussfisher::error::CliError;
use gaussfisher::{output, run_scenario};

/// Fisher information of a driven oscillator under open-system dynamics.
#[derive(Debug, Parser)]
#[command(name = "gaussfisher", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and write its CSV.
    Run {
        #[arg(long)]
        scenario: ScenarioKind,
        /// Key-value config file applied on top of the scenario defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override, `key=value`; repeatable and applied after the config file.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the oracle batch and write its report.
    Verify {
        #[arg(long)]
        out: PathBuf,
    },
}

/// Optional cap on worker threads.
const THREADS_VAR: &str = "GAUSSFISHER_THREADS";

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_VAR}: expected a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("{THREADS_VAR}: {e}")))
}

fn execute(command: Command) -> Result<(), CliError> {
    configure_threads()?;
    let (cfg, out) = match command {
        Command::Run {
            scenario,
            config,
            set,
            out,
        } => {
            let mut cfg = ScenarioConfig::defaults(scenario);
            if let Some(path) = &config {
                cfg.apply_file(path)?;
            }
            for s in &set {
                cfg.apply_override(s)?;
            }
            let out = out
                .or_else(|| cfg.output_path.clone())
                .ok_or_else(|| CliError::Config("field `out`: no output path given".into()))?;
            (cfg, out)
        }
        Command::Verify { out } => (ScenarioConfig::defaults(ScenarioKind::Verify), out),
    };
    let (table, failed) = run_scenario(&cfg)?;
    output::write_file(&table, &out)?;
    if failed > 0 {
        return Err(CliError::Verification {
            failed,
            total: table.rows.len(),
        });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gaussfisher: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
