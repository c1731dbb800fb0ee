//! `pinch` — placement, thresholds, and Monte Carlo sweeps for a
//! waveguide-fed pinching-antenna downlink.
//!
//! Exit status: 0 on success, 1 for usage or configuration errors, 2 for
//! computation or IO failures. All diagnostics go to stderr; data goes to
//! the selected output path or stdout.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pinch_cli::config::{parse_config, OutputFormat, ResolvedConfig, RunConfig};
use pinch_cli::output::{
    render_place_csv, render_place_json, render_sweep_csv, render_sweep_json, render_thresholds,
    render_trial_dump, RateUnit,
};
use pinch_core::placement::{feasibility, fine_tune};
use pinch_core::{
    qos_snr_threshold, run_sweep_detailed, Sweep, UrllcParams, UserPosition, DEFAULT_PHASE_TOL,
};

#[derive(Parser)]
#[command(
    name = "pinch",
    version,
    about = "Pinching-antenna placement and finite-blocklength link analysis"
)]
struct Cli {
    /// Path to a TOML configuration file (omitted sections take defaults).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Worker threads for the simulation (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the SNR thresholds implied by the reliability target.
    Thresholds(ThresholdsArgs),
    /// Place the antenna array for one user and report the link quality.
    Place(PlaceArgs),
    /// Run a Monte Carlo sweep and write CSV or JSON results.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct ThresholdsArgs {
    /// Block error probability target, in (0, 0.5).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Blocklength in channel uses.
    #[arg(long)]
    blocklength: Option<u32>,
    /// Payload size in information bits.
    #[arg(long)]
    bits: Option<u32>,
}

#[derive(Args)]
struct PlaceArgs {
    /// User x-coordinate along the waveguide, meters.
    #[arg(long, allow_hyphen_values = true)]
    user_x: f64,
    /// User lateral offset from the waveguide, meters.
    #[arg(long, allow_hyphen_values = true)]
    user_y: f64,
    /// Output format (overrides the config file).
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Report rates in nats per channel use instead of bits.
    #[arg(long)]
    nats: bool,
    /// Write the report to a file instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Which parameter to sweep.
    #[arg(long, value_enum)]
    kind: Option<SweepKind>,
    /// Comma-separated sweep values (strictly increasing).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    values: Option<Vec<String>>,
    /// Trials per sweep point.
    #[arg(long)]
    trials: Option<u64>,
    /// Master seed for the per-trial RNG streams.
    #[arg(long)]
    seed: Option<u64>,
    /// Output format (overrides the config file).
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Report rates in nats per channel use instead of bits.
    #[arg(long)]
    nats: bool,
    /// Write results to a file instead of stdout (overrides the config).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Also write every per-trial record as JSON to this path.
    #[arg(long, value_name = "PATH")]
    trial_dump: Option<PathBuf>,
    /// Disable the conventional-baseline comparison.
    #[arg(long)]
    no_baseline: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKind {
    Power,
    Blocklength,
    Area,
    Antennas,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

/// Failure classes, mapped to exit codes.
enum AppError {
    /// Bad flags or configuration: exit 1.
    Usage(String),
    /// Computation or IO failure: exit 2.
    Run(String),
}

impl AppError {
    fn usage(msg: impl Display) -> Self {
        AppError::Usage(msg.to_string())
    }
    fn run(msg: impl Display) -> Self {
        AppError::Run(msg.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            // clap prints help to stdout and errors to stderr by itself.
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: could not configure the thread pool: {e}");
            return ExitCode::from(2);
        }
    }

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(AppError::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<(), AppError> {
    let resolved = load_config(cli.config.as_deref())?;
    match &cli.command {
        Command::Thresholds(args) => cmd_thresholds(args, &resolved),
        Command::Place(args) => cmd_place(args, &resolved),
        Command::Sweep(args) => cmd_sweep(args, &resolved),
    }
}

/// Reads and resolves the configuration; a missing --config means defaults.
fn load_config(path: Option<&Path>) -> Result<ResolvedConfig, AppError> {
    let parsed = match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| AppError::run(format!("cannot read config {}: {e}", p.display())))?;
            parse_config(&text).map_err(AppError::usage)?
        }
        None => RunConfig::default(),
    };
    parsed.resolve().map_err(AppError::usage)
}

fn cmd_thresholds(args: &ThresholdsArgs, resolved: &ResolvedConfig) -> Result<(), AppError> {
    let urllc = UrllcParams::new(
        args.epsilon.unwrap_or_else(|| resolved.urllc.epsilon()),
        args.blocklength.unwrap_or_else(|| resolved.urllc.blocklength()),
        args.bits.unwrap_or_else(|| resolved.urllc.payload_bits()),
    )
    .map_err(AppError::usage)?;
    let thresholds = qos_snr_threshold(&urllc).map_err(AppError::run)?;
    print!("{}", render_thresholds(&urllc, &thresholds));
    Ok(())
}

fn cmd_place(args: &PlaceArgs, resolved: &ResolvedConfig) -> Result<(), AppError> {
    if !args.user_x.is_finite() || !args.user_y.is_finite() {
        return Err(AppError::usage("user coordinates must be finite"));
    }
    let user = UserPosition {
        x: args.user_x,
        y: args.user_y,
    };
    let thresholds = qos_snr_threshold(&resolved.urllc).map_err(AppError::run)?;
    let feas = feasibility(&user, &resolved.system, &thresholds);
    let placed = fine_tune(&user, &resolved.system, &resolved.urllc, DEFAULT_PHASE_TOL)
        .map_err(AppError::run)?;

    let unit = if args.nats { RateUnit::Nats } else { RateUnit::Bits };
    let format = args
        .format
        .map(OutputFormat::from)
        .unwrap_or(resolved.output_format);
    let text = match format {
        OutputFormat::Csv => render_place_csv(&placed, &feas, unit),
        OutputFormat::Json => render_place_json(&placed, &feas, unit),
    };
    write_output(args.out.as_deref(), &text)
}

fn cmd_sweep(args: &SweepArgs, resolved: &ResolvedConfig) -> Result<(), AppError> {
    let sweep = match (&args.kind, &args.values) {
        (Some(kind), Some(values)) => Some(parse_sweep(*kind, values)?),
        (Some(_), None) => {
            return Err(AppError::usage("--kind requires --values"));
        }
        (None, Some(_)) => {
            return Err(AppError::usage("--values requires --kind"));
        }
        (None, None) => None,
    };
    let sweep = sweep
        .or_else(|| resolved.sweep.clone())
        .ok_or_else(|| {
            AppError::usage("no sweep given: pass --kind and --values or configure one")
        })?;

    let mut config = resolved.simulation(sweep);
    if let Some(trials) = args.trials {
        config.num_trials = trials;
    }
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if args.no_baseline {
        config.baseline_enabled = false;
    }
    config.validate().map_err(AppError::usage)?;

    let (results, records) = run_sweep_detailed(&config, &resolved.system, &resolved.urllc)
        .map_err(AppError::run)?;

    let unit = if args.nats { RateUnit::Nats } else { RateUnit::Bits };
    let format = args
        .format
        .map(OutputFormat::from)
        .unwrap_or(resolved.output_format);
    let text = match format {
        OutputFormat::Csv => render_sweep_csv(&results, config.master_seed, unit),
        OutputFormat::Json => render_sweep_json(&results, config.master_seed, unit),
    };
    let out_path = args.out.clone().or_else(|| resolved.output_path.clone());
    write_output(out_path.as_deref(), &text)?;

    if let Some(dump_path) = &args.trial_dump {
        let dump = render_trial_dump(&results, &records);
        write_output(Some(dump_path), &dump)?;
    }
    Ok(())
}

/// Parses comma-separated sweep values for the chosen kind.
fn parse_sweep(kind: SweepKind, raw: &[String]) -> Result<Sweep, AppError> {
    let raw: Vec<&str> = raw
        .iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .collect();
    if raw.is_empty() {
        return Err(AppError::usage("--values must list at least one value"));
    }
    fn parse_list<T: std::str::FromStr>(raw: &[&str], what: &str) -> Result<Vec<T>, AppError>
    where
        T::Err: Display,
    {
        raw.iter()
            .map(|s| {
                s.parse::<T>()
                    .map_err(|e| AppError::usage(format!("bad {what} value {s:?}: {e}")))
            })
            .collect()
    }
    Ok(match kind {
        SweepKind::Power => Sweep::Power(parse_list(&raw, "power")?),
        SweepKind::Blocklength => Sweep::Blocklength(parse_list(&raw, "blocklength")?),
        SweepKind::Area => Sweep::Area(parse_list(&raw, "area")?),
        SweepKind::Antennas => Sweep::Antennas(parse_list(&raw, "antennas")?),
    })
}

/// Writes the rendered text to the path, or stdout when no path is set.
fn write_output(path: Option<&Path>, text: &str) -> Result<(), AppError> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| AppError::run(format!("cannot write output {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
