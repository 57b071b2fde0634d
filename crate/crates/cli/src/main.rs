use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};

use krop::cleanup::krop_cleanup;
use krop::codebook::{
    krop_params, krop_row, load_params, params_to_json, save_params, ThetaScheme,
};
use krop::experiments::{
    self, ExperimentConfig, ExperimentKind, Family, MemoryShape, OutputFormat,
};
use krop::memory::CleanupStrategy;
use krop::rng::SeededRng;
use krop::Error;

mod vecfile;

/// Krop codebook clean-up and HRR memory experiments.
#[derive(Debug, Parser)]
#[command(name = "krop", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Time dense clean-up against krop clean-up for each K.
    Timing(ExperimentArgs),
    /// Measure retrieval rate and capacity per codebook family.
    Capacity(ExperimentArgs),
    /// Track retrieval rate while overwriting a full memory.
    Mutable(ExperimentArgs),
    /// Clean up a vector against a krop codebook and print the winning row.
    Cleanup(CleanupArgs),
    /// Write one row of a krop codebook.
    Row(RowArgs),
    /// Generate a krop parameter file.
    Params(ParamsArgs),
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Root seed for every random draw.
    #[arg(long, env = "KROP_SEED")]
    seed: Option<u64>,
    /// Directory for the report files.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Inclusive range of K = log2 N, written lo..hi.
    #[arg(long, value_name = "LO..HI", value_parser = parse_k_range)]
    k: Option<(usize, usize)>,
    /// Upper end of the K range.
    #[arg(long, value_name = "INT")]
    k_max: Option<usize>,
    /// Timed repetitions per K (timing).
    #[arg(long, value_name = "INT")]
    reps: Option<usize>,
    /// Random trials per cell (capacity, mutable).
    #[arg(long, value_name = "INT")]
    trials: Option<usize>,
    /// Overwrites per trial (mutable).
    #[arg(long, value_name = "INT")]
    steps: Option<usize>,
    /// Codebook families: normal, binary, sylvester, krop.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    families: Option<Vec<Family>>,
    /// Clean-up strategies: krop, sign, none.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    strategies: Option<Vec<CleanupStrategy>>,
    /// Memory sizes for the mutable experiment, written M:K.
    #[arg(long, value_name = "LIST", value_delimiter = ',', value_parser = parse_shape)]
    shapes: Option<Vec<MemoryShape>>,
    /// Angle scheme: evenly-spaced or uniform-random.
    #[arg(long, value_name = "SCHEME")]
    theta_scheme: Option<ThetaScheme>,
    /// Worker threads (default: 1 for timing, all cores otherwise).
    #[arg(long, value_name = "INT")]
    threads: Option<usize>,
    /// JSON config file; flags override its values.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Report format: csv, json or both.
    #[arg(long, value_name = "FORMAT")]
    format: Option<OutputFormat>,
}

#[derive(Debug, Args)]
struct CleanupArgs {
    /// Krop parameter file.
    #[arg(long, value_name = "PATH")]
    params: PathBuf,
    /// Vector file, one value per line.
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// Also write the winning codebook row to this file.
    #[arg(long, value_name = "PATH")]
    emit_row: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RowArgs {
    /// Krop parameter file.
    #[arg(long, value_name = "PATH")]
    params: PathBuf,
    /// Row index in 0..2^K.
    #[arg(long, value_name = "INT")]
    index: usize,
    /// Output vector file (default: stdout).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ParamsArgs {
    /// Number of angles; the codebook has 2^K rows.
    #[arg(long, value_name = "INT")]
    k: usize,
    /// Angle scheme: evenly-spaced or uniform-random.
    #[arg(long, value_name = "SCHEME", default_value = "evenly-spaced")]
    theta_scheme: ThetaScheme,
    /// Seed for uniform-random angles.
    #[arg(long, env = "KROP_SEED", default_value_t = 0)]
    seed: u64,
    /// Output file (default: stdout).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Internal(String),
}

impl Failure {
    /// Errors caused by the caller's input. Allocation failures are the
    /// only ones treated as internal.
    fn from_input(e: Error) -> Self {
        match e {
            Error::Allocation { .. } => Failure::Internal(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn parse_k_range(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| format!("expected LO..HI, got {s:?}"))?;
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if lo > hi {
        return Err(format!("empty range {lo}..{hi}"));
    }
    Ok((lo, hi))
}

fn parse_shape(s: &str) -> Result<MemoryShape, String> {
    let (m, k) = s
        .split_once(':')
        .ok_or_else(|| format!("expected M:K, got {s:?}"))?;
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    Ok(MemoryShape {
        m: parse(m)?,
        k: parse(k)?,
    })
}

fn effective_config(
    kind: ExperimentKind,
    args: &ExperimentArgs,
) -> Result<ExperimentConfig, Failure> {
    let mut config = match &args.config {
        Some(path) => {
            let config = ExperimentConfig::load(path).map_err(Failure::from_input)?;
            if config.experiment != kind {
                return Err(Failure::Usage(format!(
                    "{} is a {} config",
                    path.display(),
                    config.experiment.as_str()
                )));
            }
            config
        }
        None => ExperimentConfig::for_kind(kind),
    };

    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some((lo, hi)) = args.k {
        config.k_min = lo;
        config.k_max = hi;
        if args.shapes.is_none() {
            config.shapes.clear();
        }
    }
    if let Some(k_max) = args.k_max {
        config.k_max = k_max;
    }
    if let Some(reps) = args.reps {
        config.reps = reps;
    }
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    if let Some(steps) = args.steps {
        config.steps = steps;
    }
    if let Some(families) = &args.families {
        config.families = families.clone();
    }
    if let Some(strategies) = &args.strategies {
        config.strategies = strategies.clone();
    }
    if let Some(shapes) = &args.shapes {
        config.shapes = shapes.clone();
    }
    if let Some(scheme) = args.theta_scheme {
        config.theta_scheme = scheme;
    }
    if args.threads.is_some() {
        config.threads = args.threads;
    }
    if let Some(format) = args.format {
        config.format = format;
    }
    if let Some(out) = &args.out {
        config.out_dir = Some(out.clone());
    }
    config.validate().map_err(Failure::from_input)?;
    Ok(config)
}

fn run_experiment(kind: ExperimentKind, args: &ExperimentArgs) -> Result<(), Failure> {
    let config = effective_config(kind, args)?;
    let Some(out_dir) = config.out_dir.clone() else {
        let mut cmd = Cli::command();
        cmd.build();
        let sub = cmd
            .find_subcommand_mut(kind.as_str())
            .expect("subcommand exists");
        sub.error(
            ErrorKind::MissingRequiredArgument,
            "no output directory: pass --out or set out_dir in --config",
        )
        .exit();
    };
    fs::create_dir_all(&out_dir)
        .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", out_dir.display())))?;

    println!("{}", config.to_json());
    let report = experiments::run(&config).map_err(|e| Failure::Internal(e.to_string()))?;
    for note in &report.notes {
        eprintln!("note: {note}");
    }
    let written = report
        .write(&out_dir, config.format)
        .map_err(Failure::from_input)?;
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run_cleanup(args: &CleanupArgs) -> Result<(), Failure> {
    let params = load_params(&args.params).map_err(Failure::from_input)?;
    let input = vecfile::read(&args.input).map_err(Failure::from_input)?;
    let result = krop_cleanup(&params, &input).map_err(Failure::from_input)?;
    let index = result.index.expect("krop clean-up returns an index");
    let score = result
        .scores
        .as_ref()
        .expect("krop clean-up returns scores")[index];
    println!("index {index}");
    println!("score {score:?}");
    if let Some(path) = &args.emit_row {
        vecfile::write(path, &result.vector).map_err(Failure::from_input)?;
    }
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_row(args: &RowArgs) -> Result<(), Failure> {
    let params = load_params(&args.params).map_err(Failure::from_input)?;
    let row = krop_row(&params, args.index).map_err(Failure::from_input)?;
    emit(args.out.as_deref(), &vecfile::to_string(&row))
}

fn run_params(args: &ParamsArgs) -> Result<(), Failure> {
    let params = match args.theta_scheme {
        ThetaScheme::EvenlySpaced => krop_params(args.k, args.theta_scheme, None),
        ThetaScheme::UniformRandom => {
            let mut rng = SeededRng::new(args.seed);
            krop_params(args.k, args.theta_scheme, Some(&mut rng))
        }
    }
    .map_err(Failure::from_input)?;
    match &args.out {
        Some(path) => save_params(&params, path).map_err(Failure::from_input),
        None => emit(None, &params_to_json(&params)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Timing(args) => run_experiment(ExperimentKind::Timing, args),
        Command::Capacity(args) => run_experiment(ExperimentKind::Capacity, args),
        Command::Mutable(args) => run_experiment(ExperimentKind::Mutable, args),
        Command::Cleanup(args) => run_cleanup(args),
        Command::Row(args) => run_row(args),
        Command::Params(args) => run_params(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(1)
        }
    }
}
