use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use zll_cli::config::{Experiment, Format, PartialConfig};
use zll_cli::report::{write_atomic, write_reports, RunStatus};
use zll_cli::{plot, run, CliError, EXIT_ERROR};
use zll_core::LadderMode;

/// Numerical experiments on Hardy's Z function along a Jacob's ladder.
#[derive(Parser, Debug)]
#[command(name = "zll", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one experiment (or `all`) and write its report.
    Run(RunArgs),
    /// Collect reports of one experiment into plot columns.
    Plot(PlotArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// `key=value` file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    experiment: Option<Experiment>,
    /// Window start T (at least 100).
    #[arg(long)]
    t: Option<f64>,
    /// ε in U = T^{u_exponent + 2ε}, in (0, 0.05].
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    u_exponent: Option<f64>,
    /// Explicit window length, overriding the exponent.
    #[arg(long)]
    u: Option<f64>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<LadderMode>,
    /// Relative quadrature tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Ladder cache file (default: `$ZLL_CACHE_DIR/zll-ladder-<mode>.cache`).
    #[arg(long)]
    cache_path: Option<PathBuf>,
    /// Report path (default: `<experiment>.<format>`).
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Print the resolved configuration as `key=value` lines and exit.
    #[arg(long)]
    dump_config: bool,
}

#[derive(Args, Debug)]
struct PlotArgs {
    /// Report files written by `zll run`.
    inputs: Vec<PathBuf>,
    #[arg(long, short)]
    out: PathBuf,
}

fn parse_mode(s: &str) -> Result<LadderMode, String> {
    s.parse().map_err(|_| format!("unknown mode `{s}` (numeric_hl or analytic_hl)"))
}

fn run_command(a: RunArgs) -> Result<i32, CliError> {
    let file = match &a.config {
        Some(p) => PartialConfig::from_file(p)?,
        None => PartialConfig::default(),
    };
    let flags = PartialConfig {
        experiment: a.experiment,
        t: a.t,
        epsilon: a.epsilon,
        u_exponent: a.u_exponent,
        u: a.u,
        mode: a.mode,
        tol: a.tol,
        threads: a.threads,
        cache_path: a.cache_path,
        out_path: a.out,
        format: a.format,
    };
    let cfg = file.overlay(flags).resolve()?;
    if a.dump_config {
        print!("{}", cfg.to_kv());
        return Ok(zll_cli::EXIT_OK);
    }
    eprintln!(
        "experiment={} T={} U={:.6e} epsilon={} mode={} tol={:e} threads={}",
        cfg.experiment.name(),
        cfg.t,
        cfg.window_len(),
        cfg.epsilon,
        cfg.mode.as_str(),
        cfg.tol,
        cfg.threads
    );
    let reports = run::run(&cfg)?;
    write_reports(&cfg.out_path, cfg.format, &reports)?;
    let mut status = RunStatus::Pass;
    for r in &reports {
        let failed = r.failed_checks();
        let note = match (&r.error, failed.is_empty()) {
            (Some(e), _) => format!(" ({e})"),
            (None, false) => format!(" (failed: {})", failed.join(", ")),
            (None, true) => String::new(),
        };
        println!(
            "{:<14} T={:<10} U={:<12.6e} ratio={:<12.6} {}{note}",
            r.experiment,
            r.t,
            r.u,
            r.ratio,
            r.status.as_str()
        );
        status = status.worst(r.status);
    }
    println!("report written to {}", cfg.out_path.display());
    Ok(status.exit_code())
}

fn plot_command(a: PlotArgs) -> Result<i32, CliError> {
    let mut rows = Vec::new();
    for p in &a.inputs {
        rows.extend(plot::read_rows(p)?);
    }
    let text = plot::emit_plot_data(rows)?;
    write_atomic(&a.out, text.as_bytes())?;
    Ok(zll_cli::EXIT_OK)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR as u8 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Run(a) => run_command(a),
        Command::Plot(a) => plot_command(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
