//! Command-line interface: scenario generation, metric and performance
//! reports, experiment plans, and trace validation.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::ScenarioConfig;
use crate::contact::DEFAULT_SAMPLE_INTERVAL;
use crate::error::{Error, Result};
use crate::experiment::{correlation_report, run_plan, separation_report};
use crate::io::csv::{emit_csv, MetricCsvRow, PerfCsvRow, SeparationCsvRow};
use crate::io::{
    export_bonnmotion, export_ns2_movements, import_bonnmotion, import_ns2_movements,
    parse_config, FileConfig, ImportGeometry,
};
use crate::metrics::compute_all;
use crate::models::generate;
use crate::rng::{derive_seed, RandomStream};
use crate::routesim::{build_flows, run_simulation};
use crate::trace::{validate, Scenario};

/// Salt separating the traffic stream from the scenario stream.
const TRAFFIC_SEED_SALT: u64 = 0x74726166666963; // "traffic"

/// Environment variable overriding the experiment output directory.
pub const OUT_DIR_ENV: &str = "MANETLAB_OUT_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "manetlab",
    version,
    about = "Deterministic mobility-scenario laboratory for mobile ad hoc networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Configuration file ([scenario]/[routing]/[experiment] sections).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Override the scenario seed from the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output file; output directory for `experiment`.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a movement trace file from the scenario config.
    Generate {
        /// Trace file format to write.
        #[arg(long, value_enum, default_value_t = TraceFormat::Bonnmotion)]
        format: TraceFormat,
    },
    /// Compute the mobility metrics of a generated or imported scenario.
    Metrics {
        /// Read the scenario from this trace file instead of generating it.
        #[arg(long, value_name = "FILE")]
        trace: Option<PathBuf>,
        /// Format of the trace file.
        #[arg(long, value_enum, default_value_t = TraceFormat::Bonnmotion)]
        format: TraceFormat,
    },
    /// Run the routing simulation and report PDR, delay and NRL.
    Simulate,
    /// Execute the experiment plan and write aggregate, separation and
    /// correlation CSVs.
    Experiment,
    /// Check a trace file for structural violations.
    Validate {
        /// Trace file to check.
        #[arg(long, value_name = "FILE")]
        trace: PathBuf,
        /// Format of the trace file.
        #[arg(long, value_enum, default_value_t = TraceFormat::Bonnmotion)]
        format: TraceFormat,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum TraceFormat {
    Ns2,
    Bonnmotion,
}

pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = load_config(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.scenario.seed = seed;
        cfg.plan.base.seed = seed;
    }

    match cli.command {
        Command::Generate { format } => {
            let scenario = generate(&cfg.scenario)?;
            let text = match format {
                TraceFormat::Ns2 => export_ns2_movements(&scenario),
                TraceFormat::Bonnmotion => export_bonnmotion(&scenario),
            };
            write_output(cli.out.as_deref(), &text)
        }
        Command::Metrics { trace, format } => {
            let scenario = match trace {
                Some(path) => import_trace(&path, format, &cfg.scenario)?,
                None => generate(&cfg.scenario)?,
            };
            let report = validate(&scenario, None);
            if !report.is_valid() {
                return Err(Error::usage(format!(
                    "scenario fails validation ({} violations; first: {})",
                    report.violations.len(),
                    report.violations[0]
                )));
            }
            let metrics = compute_all(&scenario, cfg.scenario.radio_range, DEFAULT_SAMPLE_INTERVAL)?;
            let row = MetricCsvRow {
                model: cfg.scenario.model,
                seed: cfg.scenario.seed,
                node_count: scenario.node_count(),
                duration: scenario.duration,
                report: metrics,
            };
            write_output(cli.out.as_deref(), &emit_csv(&[row]))
        }
        Command::Simulate => {
            let scenario_cfg = ScenarioConfig {
                duration: cfg.sim.sim_duration,
                ..cfg.scenario.clone()
            };
            let scenario = generate(&scenario_cfg)?;
            let mut rng = RandomStream::new(derive_seed(scenario_cfg.seed, TRAFFIC_SEED_SALT));
            let flows = build_flows(scenario_cfg.node_count, &cfg.sim, &mut rng)?;
            let report = run_simulation(&scenario, &flows, &cfg.sim, &mut rng)?;
            let row = PerfCsvRow {
                model: scenario_cfg.model,
                seed: scenario_cfg.seed,
                node_count: scenario_cfg.node_count,
                duration: scenario_cfg.duration,
                routing_radio_range: cfg.sim.routing_radio_range,
                flows: flows.len(),
                report,
            };
            write_output(cli.out.as_deref(), &emit_csv(&[row]))
        }
        Command::Experiment => run_experiment(&cfg, cli.out.as_deref()),
        Command::Validate { trace, format } => {
            let scenario = import_trace(&trace, format, &cfg.scenario)?;
            let report = validate(&scenario, Some(cfg.scenario.max_speed));
            if report.is_valid() {
                println!("OK: no violations");
            } else {
                println!("{} violation(s):", report.violations.len());
                for v in &report.violations {
                    println!("  {v}");
                }
            }
            Ok(())
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Error::config(format!("cannot read {}: {e}", p.display())))?;
            parse_config(&text)
        }
        None => Ok(FileConfig::default()),
    }
}

fn import_trace(path: &Path, format: TraceFormat, cfg: &ScenarioConfig) -> Result<Scenario> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
    let geometry = ImportGeometry {
        area_width: cfg.area_width,
        area_height: cfg.area_height,
        duration: cfg.duration,
        radio_range: cfg.radio_range,
    };
    match format {
        TraceFormat::Ns2 => import_ns2_movements(&text, &geometry),
        TraceFormat::Bonnmotion => import_bonnmotion(&text, &geometry),
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text)
                .map_err(|e| Error::config(format!("cannot write {}: {e}", path.display())))?;
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_experiment(cfg: &FileConfig, out: Option<&Path>) -> Result<()> {
    let out_dir = out
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out_dir)
        .map_err(|e| Error::config(format!("cannot create {}: {e}", out_dir.display())))?;

    let output = run_plan(&cfg.plan)?;

    let write = |name: &str, text: String| -> Result<PathBuf> {
        let path = out_dir.join(name);
        fs::write(&path, text)
            .map_err(|e| Error::config(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    };

    let mut written = vec![
        write("aggregate.csv", emit_csv(&output.rows))?,
        write("runs.csv", emit_csv(&output.runs))?,
    ];

    let has_all_models = crate::config::ModelKind::ALL
        .iter()
        .all(|m| cfg.plan.models.contains(m));
    if cfg.plan.outputs.wants_metrics() {
        if has_all_models {
            let mut rows = Vec::new();
            for &speed in &cfg.plan.speed_points {
                let at_speed: Vec<_> = output
                    .rows
                    .iter()
                    .filter(|r| r.max_speed == speed)
                    .cloned()
                    .collect();
                let report = separation_report(&at_speed)?;
                rows.extend(report.entries.into_iter().map(|entry| SeparationCsvRow {
                    max_speed: speed,
                    entry,
                }));
            }
            written.push(write("separation.csv", emit_csv(&rows))?);
        } else {
            eprintln!("separation.csv skipped: plan does not cover all four models");
        }
    }

    if cfg.plan.outputs.wants_metrics() && cfg.plan.outputs.wants_performance() {
        if output.rows.len() >= 3 {
            let report = correlation_report(&output.rows)?;
            written.push(write("correlation.csv", emit_csv(&report.entries))?);
        } else {
            eprintln!("correlation.csv skipped: fewer than 3 aggregate points");
        }
    }

    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}
