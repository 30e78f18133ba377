use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use rover_health::scenario::{builtin_scenarios, run_scenario, RunOutput, ScenarioConfig};
use rover_health_cli::output::{load_runs, write_report, write_run, REPORT_FILE};
use rover_health_cli::plot::{emit_plots, PlotData};
use rover_health_cli::{builtin_config, parse_config_with, report, CliError, CsvTable, Override, RunEntry};

/// Exit status for a run whose integration went non-finite.
const EXIT_ABORT: u8 = 2;
const EXIT_USAGE: u8 = 1;

#[derive(Debug, Parser)]
#[command(name = "rover-health", version, about = "Rover fault-detection simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct OutArgs {
    /// Output directory.
    #[arg(long, env = "ROVER_HEALTH_OUT", default_value = "rover-health-out")]
    out: PathBuf,
    /// Skip the SVG plots.
    #[arg(long)]
    no_plots: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario from a file or a builtin name.
    Run {
        #[arg(long, conflicts_with = "scenario", required_unless_present = "scenario")]
        config: Option<PathBuf>,
        /// Builtin scenario name (see `list`).
        #[arg(long)]
        scenario: Option<String>,
        #[command(flatten)]
        out: OutArgs,
        /// Noise seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Dotted-path override, e.g. `faults[0].offset_deg=5`. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_override)]
        overrides: Vec<Override>,
    },
    /// Run every builtin scenario in parallel and write a report.
    Batch {
        #[arg(long, required = true)]
        all_builtin: bool,
        #[command(flatten)]
        out: OutArgs,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List builtin scenarios.
    List,
    /// Rebuild the cross-run report from a results directory.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        /// Report path; defaults to `<in>/report.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw the plots for an exported telemetry CSV.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_override(s: &str) -> Result<Override, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

fn describe(run: &RunOutput<f64>, dir: &Path) {
    let s = &run.summary;
    let latency = s
        .latencies
        .iter()
        .filter_map(|l| l.adaptive)
        .min_by(f64::total_cmp)
        .map_or_else(|| "-".to_string(), |l| format!("{l:.2} s"));
    println!(
        "{:<14} t_end {:>7.2} s  adaptive alarms {:>2}  latency {:>7}  min H {:.3}  -> {}",
        s.name,
        s.t_end,
        s.adaptive_detections().count(),
        latency,
        s.min_health,
        dir.display()
    );
    if let Some(reason) = &s.aborted {
        eprintln!("{}: aborted: {reason}", s.name);
    }
}

fn run_one(cfg: ScenarioConfig, out: &OutArgs) -> Result<bool, CliError> {
    let run = run_scenario(&cfg)?;
    let dir = write_run(&out.out, &cfg, &run, !out.no_plots)?;
    describe(&run, &dir);
    Ok(run.abort.is_none())
}

fn batch(seed: Option<u64>, out: &OutArgs) -> Result<bool, CliError> {
    let configs: Vec<ScenarioConfig> = builtin_scenarios()
        .into_iter()
        .map(|mut cfg| {
            if let Some(seed) = seed {
                cfg.noise.seed = seed;
            }
            cfg
        })
        .collect();
    // Each run writes only under its own directory.
    let results: Vec<_> = configs
        .par_iter()
        .map(|cfg| -> Result<_, CliError> {
            let run = run_scenario(cfg)?;
            let dir = write_run(&out.out, cfg, &run, !out.no_plots)?;
            Ok((run, dir))
        })
        .collect();
    let mut entries = Vec::new();
    let mut clean = true;
    for (cfg, result) in configs.iter().zip(results) {
        let (run, dir) = result?;
        describe(&run, &dir);
        clean &= run.abort.is_none();
        entries.push(RunEntry::new(cfg, run.summary));
    }
    let path = out.out.join(REPORT_FILE);
    write_report(&report(entries), &path)?;
    println!("report -> {}", path.display());
    Ok(clean)
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Run {
            config,
            scenario,
            out,
            seed,
            overrides,
        } => {
            let mut cfg = match (config, scenario) {
                (Some(path), _) => parse_config_with(&path, &overrides)?,
                (None, Some(name)) => builtin_config(&name, &overrides)?,
                (None, None) => return Err(CliError::Usage("run needs --config or --scenario".into())),
            };
            if let Some(seed) = seed {
                cfg.noise.seed = seed;
            }
            run_one(cfg, &out)
        }
        Command::Batch { out, seed, .. } => batch(seed, &out),
        Command::List => {
            for cfg in builtin_scenarios() {
                let faults: Vec<&str> = cfg.faults.iter().map(|f| f.label()).collect();
                println!(
                    "{:<14} {} waypoint(s), {} s, faults: {}",
                    cfg.name,
                    cfg.mission.waypoints.len(),
                    cfg.duration,
                    if faults.is_empty() {
                        "none".to_string()
                    } else {
                        faults.join(", ")
                    }
                );
            }
            Ok(true)
        }
        Command::Report { input, out } => {
            let runs = load_runs(&input)?;
            if runs.is_empty() {
                return Err(CliError::Usage(format!("no run results under {}", input.display())));
            }
            let path = out.unwrap_or_else(|| input.join(REPORT_FILE));
            write_report(&report(runs), &path)?;
            println!("report -> {}", path.display());
            Ok(true)
        }
        Command::Plot { input, out } => {
            let table = CsvTable::open(&input)?;
            if table.is_empty() {
                return Err(CliError::Usage(format!("{} has no telemetry rows", input.display())));
            }
            let title = input
                .parent()
                .and_then(Path::file_name)
                .map_or_else(|| "telemetry".to_string(), |n| n.to_string_lossy().into_owned());
            for path in emit_plots(&PlotData::from_table(&table), &title, &out)? {
                println!("{}", path.display());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_ABORT),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
