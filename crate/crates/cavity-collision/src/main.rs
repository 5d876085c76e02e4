use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cavity_collision::acceptance;
use cavity_collision::config::RunConfig;
use cavity_collision::error::Error;
use cavity_collision::sweep;

/// Cavity-assisted Rydberg collision simulator.
#[derive(Parser)]
#[command(name = "cavity-collision", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the sweep (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Config override, `key=value`; repeatable, applied after the file.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the derived parameter chain and both closed-form angle routes.
    Angle(Common),
    /// Detuning sweep: analytic and numerical joint probabilities per eta.
    Fig2(Common),
    /// Bell-correlator phase scan at the maximum-entanglement detuning.
    Fig3(Common),
    /// Run the acceptance criteria and report pass/fail per criterion.
    Selftest(Common),
}

fn load_config(common: &Common) -> Result<RunConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    for kv in &common.overrides {
        cfg.apply_override(kv)?;
    }
    cfg.validate()?;
    if let Some(n) = common.threads {
        // ignore failure if a global pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(cfg)
}

fn emit(common: &Common, text: &str) -> Result<(), Error> {
    match &common.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run() -> Result<bool, Error> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Angle(common) => {
            let cfg = load_config(common)?;
            emit(common, &sweep::angle_report(&cfg)?)?;
            Ok(true)
        }
        Command::Fig2(common) => {
            let cfg = load_config(common)?;
            let out = sweep::run_fig2(&cfg)?;
            emit(common, &sweep::fig2_csv(&cfg, &out))?;
            Ok(out.failures.is_empty())
        }
        Command::Fig3(common) => {
            let cfg = load_config(common)?;
            let out = sweep::run_fig3(&cfg)?;
            emit(common, &sweep::fig3_csv(&cfg, &out))?;
            Ok(true)
        }
        Command::Selftest(common) => {
            let cfg = load_config(common)?;
            let results = acceptance::run_all(&cfg)?;
            let mut text = String::new();
            text.push_str(&format!("# config_hash = {}\n", cfg.hash()));
            let mut all_pass = true;
            for r in &results {
                text.push_str(&r.line());
                text.push('\n');
                all_pass &= r.pass;
            }
            text.push_str(if all_pass {
                "ALL CRITERIA PASSED\n"
            } else {
                "CRITERIA FAILED\n"
            });
            emit(common, &text)?;
            Ok(all_pass)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(2),
        Err(e @ (Error::Config(_) | Error::InvalidParameter(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
