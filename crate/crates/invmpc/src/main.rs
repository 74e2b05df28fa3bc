use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use invmpc::{emit_csv, run_scenario, write_compare_table, FileConfig, HarnessError, MetricsReport, Result};
use invmpc_core::{Case, ControlMode};

/// Closed-loop simulation of a receding-horizon controlled three-phase inverter.
#[derive(Debug, Parser)]
#[command(name = "invmpc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Odcm,
    Opcm,
}

impl From<ModeArg> for ControlMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Odcm => ControlMode::Odcm,
            ModeArg::Opcm => ControlMode::Opcm,
        }
    }
}

#[derive(Debug, clap::Args)]
struct Common {
    /// TOML configuration file; unset keys keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Simulated time in seconds (overrides the config file).
    #[arg(long, conflicts_with = "full")]
    duration: Option<f64>,
    /// Simulate the long 1 s run instead of the default 0.1 s.
    #[arg(long)]
    full: bool,
    /// Output directory for CSV and summary files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one controller on one disturbance case.
    Run {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        case: u8,
        #[command(flatten)]
        common: Common,
    },
    /// Run several mode/case combinations and print a side-by-side table.
    Compare {
        #[arg(long, value_delimiter = ',', default_value = "1,2,3",
              value_parser = clap::value_parser!(u8).range(1..=3))]
        cases: Vec<u8>,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "odcm,opcm")]
        modes: Vec<ModeArg>,
        #[command(flatten)]
        common: Common,
    },
}

fn load_config(common: &Common) -> Result<FileConfig> {
    let mut cfg = match &common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    if common.full {
        cfg.run.duration = 1.0;
    }
    if let Some(d) = common.duration {
        cfg.run.duration = d;
    }
    Ok(cfg)
}

fn case_of(n: u8) -> Case {
    Case::from_number(n).expect("clap restricts the range")
}

fn run_one(file: &FileConfig, mode: ControlMode, case: Case, out: &Path) -> Result<MetricsReport> {
    let cfg = file.to_scenario(mode, case)?;
    let started = Instant::now();
    let (log, report) = run_scenario(&cfg)?;
    let elapsed = started.elapsed();
    let stem = format!("{}_case{}", mode.label(), case.number());
    let (ts, summary) = emit_csv(&log, &report, mode, case, &file.to_toml(), out, &stem)?;
    eprintln!(
        "{} case {}: {:.2} s wall, wrote {} and {}",
        mode.label(),
        case.number(),
        elapsed.as_secs_f64(),
        ts.display(),
        summary.display()
    );
    Ok(report)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { mode, case, common } => {
            let file = load_config(&common)?;
            let mode = mode.into();
            let case = case_of(case);
            let report = run_one(&file, mode, case, &common.out)?;
            let stdout = io::stdout();
            write_compare_table(stdout.lock(), &[(mode, case, report)])
                .map_err(|e| HarnessError::Io { path: "<stdout>".into(), source: e })?;
        }
        Command::Compare { cases, modes, common } => {
            let file = load_config(&common)?;
            let mut results = Vec::new();
            for &m in &modes {
                for &c in &cases {
                    let (mode, case) = (ControlMode::from(m), case_of(c));
                    results.push((mode, case, run_one(&file, mode, case, &common.out)?));
                }
            }
            let mut table = Vec::new();
            write_compare_table(&mut table, &results).expect("writing to memory");
            let path = common.out.join("compare.csv");
            std::fs::write(&path, &table).map_err(|e| HarnessError::Io { path: path.clone(), source: e })?;
            io::stdout().write_all(&table).map_err(|e| HarnessError::Io { path: "<stdout>".into(), source: e })?;
        }
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
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
