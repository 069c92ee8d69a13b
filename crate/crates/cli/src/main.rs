//! `platoon-asmc`: runs platoon episodes from a JSON config and writes
//! traces, RMS reports and a plotspec into an output directory.
//!
//! Precedence for every overridable field: command-line flag, then (for the
//! output directory only) `PLATOON_ASMC_OUT`, then the config file, then the
//! built-in defaults.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use platoon_core::{
    build_report, export_trace, metrics::plotspec, run_episode, ControllerChoice, ControllerKind, Error, RmsReport,
    RunConfig, Trace,
};

#[derive(Parser)]
#[command(name = "platoon-asmc", version, about = "Leader-follower platoon simulator with adaptive sliding mode control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or both controllers on a scenario.
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// JSON config file. Built-in defaults are used when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Which controller(s) to run.
    #[arg(long, value_name = "proposed|baseline|both")]
    controller: Option<ControllerChoice>,
    /// Simulated duration in seconds.
    #[arg(long, value_name = "S")]
    duration: Option<f64>,
    /// Output directory.
    #[arg(long, value_name = "DIR", env = "PLATOON_ASMC_OUT")]
    out: Option<PathBuf>,
    /// Plant integration step in seconds.
    #[arg(long, value_name = "S")]
    dt: Option<f64>,
    /// Do not print the report to stdout.
    #[arg(long)]
    quiet: bool,
}

/// Failure classes, each with its own exit code.
enum Failure {
    Usage(anyhow::Error),
    Invalid(anyhow::Error),
    Aborted(anyhow::Error),
    Io(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Invalid(_) => 3,
            Failure::Aborted(_) => 4,
            Failure::Io(_) => 5,
        }
    }

    fn line(&self) -> String {
        let (kind, err) = match self {
            Failure::Usage(e) => ("usage", e),
            Failure::Invalid(e) => ("invalid", e),
            Failure::Aborted(e) => ("aborted", e),
            Failure::Io(e) => ("io", e),
        };
        let msg = format!("{err:#}").replace('\n', " ");
        format!("error[{kind}]: {msg}")
    }
}

fn classify(e: Error) -> Failure {
    match e {
        Error::Invalid { .. } | Error::Config(_) => Failure::Invalid(e.into()),
        Error::Aborted { .. } | Error::NonFinite(_) => Failure::Aborted(e.into()),
        _ => Failure::Io(e.into()),
    }
}

fn effective_config(args: &RunArgs) -> Result<RunConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path).map_err(classify)?,
        None => RunConfig::default(),
    };
    if let Some(c) = args.controller {
        cfg.output.controller = c;
    }
    if let Some(d) = args.duration {
        cfg.set_duration(d).map_err(classify)?;
    }
    if let Some(dt) = args.dt {
        cfg.set_dt_plant(dt).map_err(classify)?;
    }
    if let Some(out) = &args.out {
        cfg.output.dir = out.clone();
    }
    cfg.validate().map_err(classify)?;
    Ok(cfg)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::Io)
}

fn trace_file(kind: ControllerKind) -> String {
    format!("trace_{}.csv", kind.label())
}

fn single_report(report: &RmsReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario: {}  controller: {}  (warm-up cutoff {} s)", report.scenario, report.controller, report.warmup);
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<24}{:>14}", "", "RMS error (m)");
    for r in &report.robots {
        let _ = writeln!(out, "{:<24}{:>14.6}", format!("Robot{} x", r.robot), r.rms_x);
        let _ = writeln!(out, "{:<24}{:>14.6}", format!("Robot{} y", r.robot), r.rms_y);
    }
    for g in &report.gaps {
        let _ = writeln!(out, "{:<24}{:>14.6}", format!("Gap {}-{}", g.front, g.rear), g.rms_gap);
    }
    out
}

/// Report text and JSON for the finished traces. The warm-up variant is only
/// emitted when a cutoff is configured.
fn reports(cfg: &RunConfig, traces: &[Trace]) -> Result<(String, String), Failure> {
    let mut cutoffs = vec![0.0];
    if cfg.metrics.warmup > 0.0 {
        cutoffs.push(cfg.metrics.warmup);
    }
    let mut text = String::new();
    let mut json = serde_json::Map::new();
    for (i, &w) in cutoffs.iter().enumerate() {
        let key = if i == 0 { "full_run" } else { "after_warmup" };
        if i > 0 {
            text.push('\n');
        }
        match traces {
            [p, b] => {
                let c = build_report(p, b, w).map_err(classify)?;
                text.push_str(&c.to_table());
                json.insert(key.into(), serde_json::to_value(&c).expect("report serialises"));
            }
            [t] => {
                let r = RmsReport::from_trace(t, w).map_err(classify)?;
                text.push_str(&single_report(&r));
                json.insert(key.into(), serde_json::to_value(&r).expect("report serialises"));
            }
            _ => unreachable!("one or two controllers per run"),
        }
    }
    let json = serde_json::to_string_pretty(&serde_json::Value::Object(json)).expect("report serialises");
    Ok((text, json + "\n"))
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let cfg = effective_config(&args)?;
    let dir = cfg.output.dir.clone();
    fs::create_dir_all(&dir)
        .with_context(|| format!("creating output directory {}", dir.display()))
        .map_err(Failure::Io)?;
    write(&dir.join("effective_config.json"), &(cfg.to_json() + "\n"))?;

    let kinds = cfg.output.controller.kinds();
    // Episodes are independent, so `both` runs them side by side.
    let results: Vec<platoon_core::Result<Trace>> = std::thread::scope(|s| {
        let handles: Vec<_> = kinds.iter().map(|&k| s.spawn({
            let cfg = &cfg;
            move || run_episode(cfg, k)
        })).collect();
        handles.into_iter().map(|h| h.join().expect("episode thread panicked")).collect()
    });

    let mut traces = Vec::new();
    for (&kind, result) in kinds.iter().zip(results) {
        match result {
            Ok(t) => {
                export_trace(&t, &dir.join(trace_file(kind))).map_err(classify)?;
                traces.push(t);
            }
            Err(Error::Aborted { time, robot, trace }) => {
                // Keep what was simulated for post-mortem inspection.
                let partial = dir.join(format!("trace_{}_partial.csv", kind.label()));
                export_trace(&trace, &partial).map_err(classify)?;
                return Err(Failure::Aborted(anyhow::anyhow!(
                    "{} episode aborted at t={time}s: robot {robot} state became non-finite (partial trace in {})",
                    kind.label(),
                    partial.display()
                )));
            }
            Err(e) => return Err(classify(e)),
        }
    }

    let files: Vec<String> = kinds.iter().map(|&k| trace_file(k)).collect();
    write(&dir.join("plotspec.txt"), &plotspec(cfg.platoon.n_robots, &files))?;
    let (text, json) = reports(&cfg, &traces)?;
    write(&dir.join("report.txt"), &text)?;
    write(&dir.join("report.json"), &json)?;
    if !args.quiet {
        print!("{text}");
        println!("\noutputs written to {}", dir.display());
    }
    Ok(())
}

fn usage_message(e: &clap::Error) -> String {
    let text = e.to_string();
    let first = text.lines().next().unwrap_or("bad arguments");
    first.trim_start_matches("error: ").to_owned()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let f = Failure::Usage(anyhow::anyhow!("{}", usage_message(&e)));
            eprintln!("{}", f.line());
            return ExitCode::from(f.code());
        }
    };
    let result = match cli.command {
        Command::Run(args) => run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.line());
            ExitCode::from(f.code())
        }
    }
}
