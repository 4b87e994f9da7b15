//! `sketchydmd`: simulate shallow-water snapshots, fit (sketched) DMD models,
//! reconstruct, benchmark and export rasters.
//!
//! Exit codes: 0 ok, 2 configuration or input, 3 solver, 4 parameters,
//! 5 out of range.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sketchydmd::dmd::ModeKind;
use sketchydmd::select::Criterion;
use sketchydmd::sketch::Method;

#[derive(Parser, Debug)]
#[command(name = "sketchydmd", version, about = "Sketching-based dynamic mode decomposition of shallow-water data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the shallow-water solver and store the sampled field.
    Simulate {
        /// `key = value` configuration file.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a DMD model and keep the most important modes.
    Dmd(DmdArgs),
    /// Evaluate a stored model at chosen times.
    Reconstruct(ReconstructArgs),
    /// Time and score every method/criterion/seed combination.
    Benchmark(BenchmarkArgs),
    /// Write one snapshot as a `lon_deg,lat_deg,value` CSV.
    Export {
        #[arg(long = "in")]
        input: PathBuf,
        /// 1-based snapshot number.
        #[arg(long)]
        snapshot: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct DmdArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "det")]
    method: Method,
    /// SVD truncation rank R. Defaults to r for early truncation, 2r otherwise.
    #[arg(long)]
    rank: Option<usize>,
    /// Number of modes r to keep.
    #[arg(long)]
    modes: usize,
    #[arg(long, default_value = "integral")]
    criterion: Criterion,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long, default_value = "projected")]
    mode_kind: ModeKind,
    /// Score growth with σΔT instead of σ in 1/s.
    #[arg(long)]
    normalized_growth: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    #[arg(long)]
    model: PathBuf,
    /// Comma-separated times in seconds from the first snapshot.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required_unless_present = "all", conflicts_with = "all")]
    times: Vec<f64>,
    /// Every snapshot time of the fitted window.
    #[arg(long)]
    all: bool,
    /// Allow times outside the fitted window.
    #[arg(long)]
    extrapolate: bool,
    /// Snapshot file whose grid and field are copied to a sidecar, so the
    /// output can be exported.
    #[arg(long)]
    grid_from: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BenchmarkArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "det,range-x1,range-x,range-corange")]
    methods: Vec<Method>,
    #[arg(long, value_delimiter = ',', default_value = "early,amp,growth,kou,integral")]
    criteria: Vec<Criterion>,
    #[arg(long)]
    modes: usize,
    /// Comma list, `a..b` ranges allowed.
    #[arg(long, default_value = "0")]
    seeds: String,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long, default_value = "projected")]
    mode_kind: ModeKind,
    #[arg(long)]
    normalized_growth: bool,
    #[arg(long)]
    report: PathBuf,
}

fn init_threads() {
    let Ok(raw) = std::env::var("SKETCHYDMD_THREADS") else {
        return;
    };
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("could not size thread pool: {e}");
            }
        }
        _ => log::warn!("ignoring SKETCHYDMD_THREADS={raw}: expected a positive integer"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    init_threads();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, out } => commands::simulate(&config, &out),
        Command::Dmd(a) => commands::dmd(&a),
        Command::Reconstruct(a) => commands::reconstruct(&a),
        Command::Benchmark(a) => commands::benchmark(&a),
        Command::Export { input, snapshot, out } => commands::export(&input, snapshot, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
