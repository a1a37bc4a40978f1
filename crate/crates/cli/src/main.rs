//! Command-line driver: replay a dataset through the engine, generate
//! synthetic data, run a benchmark file, or list the parameter presets.
//!
//! Exit codes: 0 on success, 1 for configuration errors, 2 for data errors.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tnstream::io::{
    analogue, format_table, generate, load_csv, min_max_normalize, preset, replay_stream,
    run_benchmark, write_score_rows, write_snapshots, BenchmarkConfig, Dataset, GeneratorSpec,
    IoError, MetricsMode, ReplayOptions, PRESET_NAMES,
};
use tnstream::metrics::OutlierPolicy;
use tnstream::spatial::{IndexBackend, LshParams};
use tnstream::stream::{MacroScope, StreamConfig};

/// Hyperplanes for `--backend lsh` when neither a preset nor `--num-hashes` gives one.
const DEFAULT_HASHES: usize = 10;

#[derive(Parser)]
#[command(
    name = "tnstream",
    version,
    about = "Tightest-neighbor stream clustering"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a dataset through the engine and write JSON-lines snapshots.
    Run(Box<RunArgs>),
    /// Write a synthetic labeled dataset as CSV.
    Generate(GenerateArgs),
    /// Run every row of a TOML benchmark file.
    Bench(BenchArgs),
    /// List the built-in parameter presets.
    Presets,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Kd,
    Ball,
    Lsh,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    All,
    Unattached,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricsArg {
    FinalWindow,
    Cumulative,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    AsCluster,
    Exclude,
}

#[derive(Args)]
struct StreamArgs {
    /// Start from a named preset; explicit flags override its fields.
    #[arg(long)]
    preset: Option<String>,
    /// Sliding window width W.
    #[arg(long)]
    window: Option<usize>,
    /// Micro-cluster threshold N.
    #[arg(long)]
    min_pts: Option<usize>,
    /// Macro-cluster threshold.
    #[arg(long)]
    n_micro: Option<usize>,
    /// Maximum micro-cluster radius r.
    #[arg(long)]
    r_max: Option<f64>,
    /// Neighbors per micro-cluster in the macro-level graph
    #[arg(long)]
    k: Option<usize>,
    /// Neighbors examined when sizing a new micro-cluster's radius
    #[arg(long)]
    tk: Option<usize>,
    /// Shared neighbors required for a neighbor to count toward the radius
    #[arg(long)]
    mk: Option<usize>,
    /// Outlier threshold multiplier; `inf` disables outlier removal.
    #[arg(long)]
    alpha: Option<f64>,
    /// Neighbor index
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    /// Total LSH hyperplanes across all tables.
    #[arg(long)]
    num_hashes: Option<usize>,
    /// LSH tables; defaults to one per ten hyperplanes.
    #[arg(long)]
    num_tables: Option<usize>,
    /// Arrivals per pipeline run.
    #[arg(long)]
    stride: Option<usize>,
    /// Micro-clusters clustered when new macro-clusters are defined
    #[arg(long, value_enum)]
    macro_scope: Option<ScopeArg>,
}

impl StreamArgs {
    fn resolve(&self, seed: u64) -> Result<StreamConfig, IoError> {
        let base = match &self.preset {
            Some(name) => Some(preset(name).ok_or_else(|| IoError::UnknownPreset(name.clone()))?),
            None => None,
        };
        let need = |flag: &str, v: Option<usize>, b: Option<usize>| {
            v.or(b)
                .ok_or_else(|| IoError::Config(format!("--{flag} is required without --preset")))
        };
        let mut config = StreamConfig {
            window: need("window", self.window, base.map(|b| b.window))?,
            min_pts: need("min-pts", self.min_pts, base.map(|b| b.min_pts))?,
            n_micro: need("n-micro", self.n_micro, base.map(|b| b.n_micro))?,
            r_max: self
                .r_max
                .or(base.map(|b| b.r_max))
                .ok_or_else(|| IoError::Config("--r-max is required without --preset".into()))?,
            k: need("k", self.k, base.map(|b| b.k))?,
            tk: need("tk", self.tk, base.map(|b| b.tk))?,
            mk: need("mk", self.mk, base.map(|b| b.mk))?,
            alpha: self
                .alpha
                .or(base.map(|b| b.alpha))
                .unwrap_or(tnstream::tn::DEFAULT_ALPHA),
            backend: base.map_or(IndexBackend::KdTree, |b| b.backend),
            macro_scope: base.map(|b| b.macro_scope).unwrap_or_default(),
            stride: self.stride.or(base.map(|b| b.stride)).unwrap_or(1),
        };
        let backend = match self.backend {
            Some(BackendArg::Kd) => Some(IndexBackend::KdTree),
            Some(BackendArg::Ball) => Some(IndexBackend::BallTree),
            Some(BackendArg::Lsh) if matches!(config.backend, IndexBackend::Lsh(_)) => None,
            Some(BackendArg::Lsh) => Some(IndexBackend::Lsh(LshParams::from_total(
                DEFAULT_HASHES,
                1,
                seed,
            ))),
            None => None,
        };
        if let Some(b) = backend {
            config.backend = b;
        }
        if let IndexBackend::Lsh(p) = &mut config.backend {
            let total = self.num_hashes.unwrap_or(p.num_hyperplanes * p.num_tables);
            let tables = self.num_tables.unwrap_or((total / 10).max(1));
            *p = LshParams::from_total(total, tables, seed);
        } else if self.num_hashes.is_some() || self.num_tables.is_some() {
            return Err(IoError::Config(
                "--num-hashes and --num-tables need the lsh backend".into(),
            ));
        }
        if let Some(s) = self.macro_scope {
            config.macro_scope = match s {
                ScopeArg::All => MacroScope::All,
                ScopeArg::Unattached => MacroScope::Unattached,
            };
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct RunArgs {
    /// CSV dataset to replay.
    #[arg(
        long,
        conflicts_with = "analogue",
        required_unless_present = "analogue"
    )]
    input: Option<PathBuf>,
    /// Replay a generated stand-in for a named benchmark dataset instead.
    #[arg(long)]
    analogue: Option<String>,
    /// The CSV's last column is an integer class label.
    #[arg(long)]
    labels: bool,
    /// Keep raw feature values instead of scaling each to [0, 1].
    #[arg(long)]
    no_normalize: bool,
    /// LSH and generator seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Snapshot file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Arrivals between snapshots; defaults to the window width.
    #[arg(long)]
    snapshot_every: Option<usize>,
    /// Points scored against the labels
    #[arg(long, value_enum, default_value = "final-window")]
    metrics: MetricsArg,
    /// How points outside every macro-cluster are scored
    #[arg(long, value_enum, default_value = "as-cluster")]
    outlier_policy: PolicyArg,
    #[command(flatten)]
    stream: StreamArgs,
}

#[derive(Args)]
struct GenerateArgs {
    /// Generator spec as JSON, e.g. `{"kind":"blobs","k":2,"n":100,"dim":2,"sigma":0.1,"separation":10}`.
    #[arg(
        long,
        conflicts_with = "analogue",
        required_unless_present = "analogue"
    )]
    spec: Option<String>,
    /// Generate the stand-in for a named benchmark dataset.
    #[arg(long)]
    analogue: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Scale every feature to [0, 1].
    #[arg(long)]
    normalize: bool,
    /// CSV file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// TOML file of `[[run]]` tables.
    config: PathBuf,
    /// JSON-lines scorecard file; the table always goes to standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, IoError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn analogue_spec(name: &str) -> Result<GeneratorSpec, IoError> {
    analogue(name).ok_or_else(|| IoError::Config(format!("no generated analogue for {name:?}")))
}

fn run(args: &RunArgs) -> Result<(), IoError> {
    let config = args.stream.resolve(args.seed)?;
    let data = match (&args.input, &args.analogue) {
        (Some(path), _) => load_csv(path, args.labels, !args.no_normalize)?,
        (None, Some(name)) => {
            let ds = generate(&analogue_spec(name)?, args.seed)?;
            if args.no_normalize {
                ds
            } else {
                Dataset {
                    points: min_max_normalize(&ds.points),
                    labels: ds.labels,
                }
            }
        }
        (None, None) => unreachable!("clap requires an input"),
    };
    let options = ReplayOptions {
        metrics: match args.metrics {
            MetricsArg::FinalWindow => MetricsMode::FinalWindow,
            MetricsArg::Cumulative => MetricsMode::Cumulative,
        },
        outlier_policy: match args.outlier_policy {
            PolicyArg::AsCluster => OutlierPolicy::AsCluster,
            PolicyArg::Exclude => OutlierPolicy::Exclude,
        },
        snapshot_every: args.snapshot_every,
    };
    let outcome = replay_stream(&data, &config, &options)?;
    write_snapshots(open_output(&args.output)?, &outcome.snapshots)?;
    let mut summary = serde_json::json!({
        "points": data.len(),
        "snapshots": outcome.snapshots.len(),
        "n_mc": outcome.n_mc,
        "n_macro": outcome.n_macro,
    });
    match outcome.scores {
        Some(Ok(s)) => summary["scores"] = serde_json::to_value(s)?,
        Some(Err(e)) => summary["scores_error"] = e.to_string().into(),
        None => {}
    }
    eprintln!("{summary}");
    Ok(())
}

fn generate_cmd(args: &GenerateArgs) -> Result<(), IoError> {
    let spec = match (&args.spec, &args.analogue) {
        (Some(json), _) => {
            serde_json::from_str(json).map_err(|e| IoError::InvalidSpec(e.to_string()))?
        }
        (None, Some(name)) => analogue_spec(name)?,
        (None, None) => unreachable!("clap requires a spec"),
    };
    let mut ds = generate(&spec, args.seed)?;
    if args.normalize {
        ds.points = min_max_normalize(&ds.points);
    }
    let mut out = open_output(&args.output)?;
    for (pos, (_, x)) in ds.points.iter().enumerate() {
        let fields: Vec<String> = x.iter().map(f64::to_string).collect();
        writeln!(out, "{},{}", fields.join(","), ds.labels[pos])?;
    }
    out.flush()?;
    Ok(())
}

fn bench(args: &BenchArgs) -> Result<(), IoError> {
    let config = BenchmarkConfig::load(&args.config).map_err(|e| match e {
        IoError::Io(io) => IoError::Config(format!("{}: {io}", args.config.display())),
        other => other,
    })?;
    let rows = run_benchmark(&config);
    if let Some(path) = &args.output {
        write_score_rows(BufWriter::new(File::create(path)?), &rows)?;
    }
    io::stdout()
        .lock()
        .write_all(format_table(&rows).as_bytes())?;
    Ok(())
}

fn presets() -> Result<(), IoError> {
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "{:<16} {:>6} {:>3} {:>8} {:>7} {:>2} {:>3} {:>3}  backend",
        "name", "W", "N", "r_max", "n_micro", "k", "tk", "mk"
    )?;
    for name in PRESET_NAMES {
        let c = preset(name).expect("listed preset exists");
        let backend = match c.backend {
            IndexBackend::Lsh(p) => format!("lsh {}x{}", p.num_tables, p.num_hyperplanes),
            b => b.name().to_string(),
        };
        writeln!(
            out,
            "{:<16} {:>6} {:>3} {:>8} {:>7} {:>2} {:>3} {:>3}  {backend}",
            name, c.window, c.min_pts, c.r_max, c.n_micro, c.k, c.tk, c.mk
        )?;
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
    let result = match &cli.command {
        Command::Run(a) => run(a),
        Command::Generate(a) => generate_cmd(a),
        Command::Bench(a) => bench(a),
        Command::Presets => presets(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        // a closed reader (`| head`) is not a failure
        Err(IoError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 1 } else { 2 })
        }
    }
}
