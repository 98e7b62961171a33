use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use dysonlab_cli::config::DEFAULT_OUT_DIR;
use dysonlab_cli::{run, write_report, Mode, Overrides, Report, ScenarioConfig};

/// Runs a dysonlab scenario.
///
/// Exit status: 0 when every check passes, 1 when a check fails, 2 on a
/// configuration or runtime error. Set DYSONLAB_THREADS to limit the
/// worker threads.
#[derive(Debug, Parser)]
#[command(name = "dysonlab", version)]
struct Cli {
    mode: Mode,
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides [output] dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sampler seed (overrides [sampler] seed).
    #[arg(long)]
    seed: Option<u64>,
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("DYSONLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("DYSONLAB_THREADS must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

/// Reports a failure before any scenario ran: stderr plus an error
/// `report.json` in the output directory.
fn early_failure(mode: Mode, out: Option<PathBuf>, message: String) -> ExitCode {
    eprintln!("error: {message}");
    let mut report = Report::new(mode);
    report.fail(message);
    report.files.push("report.json".into());
    let dir = out.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    if let Err(e) = write_report(&dir, &report) {
        eprintln!("error: cannot write {}: {e}", dir.display());
    }
    ExitCode::from(2)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Err(message) = configure_threads() {
        return early_failure(cli.mode, cli.out, message);
    }
    let overrides = Overrides {
        seed: cli.seed,
        out: cli.out.clone(),
    };
    let cfg = match ScenarioConfig::load(&cli.config, cli.mode, &overrides) {
        Ok(cfg) => cfg,
        Err(e) => return early_failure(cli.mode, cli.out, e.to_string()),
    };

    let clock = Instant::now();
    let report = run(&cfg);
    let wall = clock.elapsed().as_secs_f64();
    if let Err(e) = write_report(&cfg.out_dir, &report) {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(2);
    }
    let metadata = serde_json::json!({
        "wall_time_seconds": wall,
        "threads": rayon::current_num_threads(),
    });
    if let Err(e) = std::fs::write(cfg.out_dir.join("metadata.json"), format!("{metadata:#}\n")) {
        eprintln!("error: cannot write metadata: {e}");
        return ExitCode::from(2);
    }
    log::info!("{} finished in {wall:.2} s: {:?}", cfg.mode, report.status);
    ExitCode::from(report.exit_code())
}
