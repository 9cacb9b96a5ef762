//! Command-line driver.

use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::bench::{recompute, run_benchmark, SensitivityReport};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::ingest::{generate_synthetic, write_synthetic};
use crate::report::{emit_report, load_report, EmitOptions};
use crate::selectors::{select, Method};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

pub const THREADS_ENV: &str = "SHRINKBENCH_THREADS";

#[derive(Debug, Parser)]
#[command(name = "shrinkbench", version, about = "Feature-selection sensitivity to data volume")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate and align a data directory, print dataset statistics
    Ingest(RunArgs),
    /// Write a synthetic dataset (per-ticker CSVs + manifest.json)
    Synth(SynthArgs),
    /// Run one selector on the full dataset
    Select(SelectArgs),
    /// Run the shrinking-sample benchmark and write the report
    Bench(BenchArgs),
    /// Re-render report outputs from an existing report.json
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Config file (`key = value` lines, or a .json RunConfig)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory of per-ticker OHLCV CSV files
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Synthetic dataset spec, e.g. n_rows=600,n_tickers=24,planted_count=3,noise_sigma=0.05,seed=7
    #[arg(long)]
    synthetic: Option<String>,
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    horizon: Option<String>,
    #[arg(long)]
    start_date: Option<String>,
    #[arg(long)]
    end_date: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Comma-separated method ids, `default` or `all`
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    gap_ref: Option<String>,
    #[arg(long)]
    time_scale: Option<String>,
    /// none | zscore
    #[arg(long)]
    normalization: Option<String>,
    #[arg(long)]
    dtw_band: Option<String>,
    /// 81-point schedule (100% to 20% in 1% steps)
    #[arg(long)]
    full_schedule: bool,
    /// Schedule step in percent
    #[arg(long)]
    schedule_step: Option<String>,
    /// prefix | suffix | random
    #[arg(long)]
    shrink_policy: Option<String>,
    #[arg(long)]
    prescreen: Option<String>,
    #[arg(long)]
    folds: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    /// Extra `key=value` settings, repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    synthetic: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SelectArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long)]
    method: String,
    /// Print the full selection result as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Leave the generation time out of report.md
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Existing report.json
    #[arg(long)]
    input: PathBuf,
    /// Output directory (defaults to the input's directory)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_timestamp: bool,
}

impl RunArgs {
    fn to_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        let overrides: [(&str, &Option<String>); 17] = [
            ("synthetic", &self.synthetic),
            ("target", &self.target),
            ("horizon", &self.horizon),
            ("start_date", &self.start_date),
            ("end_date", &self.end_date),
            ("k", &self.k),
            ("seed", &self.seed),
            ("methods", &self.methods),
            ("epsilon_match", &self.epsilon),
            ("gap_ref", &self.gap_ref),
            ("time_scale", &self.time_scale),
            ("normalization", &self.normalization),
            ("dtw_band", &self.dtw_band),
            ("schedule_step", &self.schedule_step),
            ("shrink_policy", &self.shrink_policy),
            ("prescreen", &self.prescreen),
            ("folds", &self.folds),
        ];
        if let Some(dir) = &self.data_dir {
            cfg.data_dir = Some(dir.clone());
        }
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if let Some(t) = &self.threads {
            cfg.set("threads", t)?;
        }
        if self.full_schedule {
            cfg.set("full_schedule", "true")?;
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        if let Ok(t) = std::env::var(THREADS_ENV) {
            cfg.set("threads", &t)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn configure_threads(threads: Option<usize>) {
    let threads = threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    // the global pool can only be built once per process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
}

enum Failure {
    Usage(String),
    Data(String),
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn data(e: Error) -> Failure {
    Failure::Data(e.to_string())
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            EXIT_DATA
        }
    }
}

fn run(command: Command) -> std::result::Result<(), Failure> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match command {
        Command::Ingest(args) => {
            let cfg = args.to_config().map_err(usage)?;
            let (ds, source) = cfg.load_dataset().map_err(data)?;
            let f = ds.features();
            let _ = writeln!(out, "source: {source}");
            let _ = writeln!(out, "features: {}", f.n_cols());
            let _ = writeln!(out, "rows: {} (after horizon {})", f.n_rows(), ds.horizon());
            if let (Some(first), Some(last)) = (f.dates().first(), f.dates().last()) {
                let _ = writeln!(out, "dates: {first} .. {last}");
            }
            let _ = writeln!(out, "target: {}", ds.target_id());
        }
        Command::Synth(args) => {
            let spec = match &args.synthetic {
                Some(s) => s.parse().map_err(usage)?,
                None => Default::default(),
            };
            let data_set = generate_synthetic(&spec).map_err(usage)?;
            write_synthetic(&data_set, &args.out).map_err(data)?;
            let _ = writeln!(out, "wrote {} series to {}", data_set.series.len(), args.out.display());
            let _ = writeln!(out, "planted: {}", data_set.manifest.planted.join(","));
        }
        Command::Select(args) => {
            let mut cfg = args.run.to_config().map_err(usage)?;
            let method: Method = args.method.parse().map_err(usage)?;
            cfg.methods = vec![method];
            configure_threads(cfg.threads);
            let (ds, _) = cfg.load_dataset().map_err(data)?;
            let result = select(&ds, &cfg.selector_spec(method)).map_err(data)?;
            if args.json {
                let json = serde_json::to_string_pretty(&result).map_err(|e| data(e.into()))?;
                let _ = writeln!(out, "{json}");
            } else {
                for id in &result.selected {
                    let _ = writeln!(out, "{id}");
                }
            }
        }
        Command::Bench(args) => {
            let mut cfg = args.run.to_config().map_err(usage)?;
            if let Some(o) = &args.out {
                cfg.out_dir = o.clone();
            }
            configure_threads(cfg.threads);
            let (ds, source) = cfg.load_dataset().map_err(data)?;
            let schedule = cfg.schedule().map_err(usage)?;
            let mut report =
                run_benchmark(&ds, &cfg.selector_specs(), &schedule, cfg.seed, cfg.folds).map_err(data)?;
            report.config.notes.insert("source".into(), source);
            // threads and output location do not affect results
            let mut snapshot = cfg.clone();
            snapshot.threads = None;
            snapshot.out_dir = PathBuf::new();
            report.config.run_config = Some(serde_json::to_value(&snapshot).map_err(|e| data(e.into()))?);
            write_outputs(&report, &cfg.out_dir, args.no_timestamp, &mut out)?;
        }
        Command::Report(args) => {
            let report = load_report(&args.input).map_err(data)?;
            let report = recompute(report);
            let dir = args.out.clone().unwrap_or_else(|| {
                args.input
                    .parent()
                    .map(PathBuf::from)
                    .unwrap_or_else(|| PathBuf::from("."))
            });
            write_outputs(&report, &dir, args.no_timestamp, &mut out)?;
        }
    }
    Ok(())
}

fn write_outputs(
    report: &SensitivityReport,
    dir: &std::path::Path,
    no_timestamp: bool,
    out: &mut impl std::io::Write,
) -> std::result::Result<(), Failure> {
    let opts = EmitOptions {
        timestamp: (!no_timestamp).then(|| chrono::Local::now().format("%Y-%m-%d %H:%M:%S").to_string()),
    };
    let written = emit_report(report, dir, &opts).map_err(data)?;
    let _ = writeln!(out, "{:<20} {:>10} {:>10} {:>12} {:>10}", "method", "mean_r2", "slope", "fluctuation", "composite");
    for (i, &m) in report.composite_rank.iter().enumerate() {
        if let Some(t) = report.trajectory(m) {
            let f = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.6}"));
            let _ = writeln!(
                out,
                "{:<20} {:>10} {:>10} {:>12} {:>10}",
                m.id(),
                f(t.mean_r2_overall),
                f(t.slope),
                f(t.fluctuation),
                i + 1
            );
        }
    }
    let _ = writeln!(out, "wrote {} files to {}", written.len(), dir.display());
    Ok(())
}
