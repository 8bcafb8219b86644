//! Command-line front end: ergodic rate sweeps, asymptotic trend studies, and
//! beam-pattern tables.

use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use densemimo::experiment::{
    emit, emit_gaps, run_sweep, run_theorem_study, EmitFormat, ExperimentConfig, Scheme,
    StudyConfig,
};
use densemimo::{ArrayConfig, Error, Result};

#[derive(Parser)]
#[command(name = "densemimo", version, about = "Massive-MIMO rate simulations for densely spaced linear arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ergodic rate versus SNR for Gaussian/QPSK/16-QAM signaling.
    Sweep(SweepArgs),
    /// Asymptotic trend studies (1: truncation loss, 2: dense vs critical,
    /// 3: QPSK gap to capacity).
    Theorem(TheoremArgs),
    /// Magnitude of one DFT beam over a grid of directional cosines.
    Pattern(PatternArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Output path, `-` for stdout.
    #[arg(long, default_value = "-")]
    out: String,
    /// Output format: csv or json.
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML config file; command-line flags override its fields.
    #[arg(long)]
    config: Option<String>,
    /// Normalized transmit array length L_t.
    #[arg(long)]
    lt: Option<f64>,
    /// Normalized receive array length L_r.
    #[arg(long)]
    lr: Option<f64>,
    /// Transmit separation(s); repeat for several curves.
    #[arg(long = "dt")]
    dt: Vec<f64>,
    /// Receive separation.
    #[arg(long)]
    dr: Option<f64>,
    /// Number of propagation paths (default 4·min{L_t, L_r}).
    #[arg(long)]
    paths: Option<usize>,
    /// Start of the normalized-SNR grid in dB.
    #[arg(long)]
    snr_db_start: Option<f64>,
    /// End of the normalized-SNR grid in dB (inclusive).
    #[arg(long)]
    snr_db_stop: Option<f64>,
    /// Grid step in dB.
    #[arg(long)]
    snr_db_step: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Base seed; trial t uses seed ^ t.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of gaussian,qpsk,qam16.
    #[arg(long)]
    schemes: Option<String>,
    /// Transmit covariance: auto, dense, or critical.
    #[arg(long)]
    covariance: Option<String>,
    /// Clip directional cosines to [-(1-eps), 1-eps].
    #[arg(long)]
    clip_eps: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct TheoremArgs {
    /// Which study to run: 1, 2, or 3.
    #[arg(long)]
    which: u8,
    /// TOML config file; command-line flags override its fields.
    #[arg(long)]
    config: Option<String>,
    /// L_t ladder for studies 1 and 2 (comma-separated).
    #[arg(long)]
    sizes: Option<String>,
    /// Δ_t ladder for study 3 (comma-separated, decreasing).
    #[arg(long)]
    dt_list: Option<String>,
    /// Fixed transmit separation for studies 1 and 2.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    dr: Option<f64>,
    /// Load α = L_t/L_r for studies 1 and 2.
    #[arg(long)]
    alpha: Option<f64>,
    /// Fixed L_t for study 3.
    #[arg(long)]
    lt: Option<f64>,
    /// Fixed L_r for study 3.
    #[arg(long)]
    lr: Option<f64>,
    /// Normalized SNR (linear).
    #[arg(long)]
    snr_norm: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    paths: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct PatternArgs {
    /// Normalized array length L.
    #[arg(long, default_value_t = 3.0)]
    l: f64,
    /// Antenna separation Δ.
    #[arg(long, default_value_t = 0.25)]
    sep: f64,
    /// Beam (DFT column) index.
    #[arg(long, default_value_t = 0)]
    k: usize,
    /// Start of the directional-cosine grid.
    #[arg(long, default_value_t = -1.0)]
    phi_start: f64,
    /// End of the directional-cosine grid (inclusive).
    #[arg(long, default_value_t = 1.0)]
    phi_stop: f64,
    /// Number of grid points.
    #[arg(long, default_value_t = 401)]
    points: usize,
    #[command(flatten)]
    output: OutputArgs,
}

fn env_seed() -> Option<u64> {
    std::env::var("DENSEMIMO_SEED").ok().and_then(|v| v.parse().ok())
}

fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| Error::Config(format!("cannot parse {what} entry '{t}'")))
        })
        .collect()
}

fn load_toml<T: serde::de::DeserializeOwned>(path: &str) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io { path: path.into(), source: e })?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{path}: {e}")))
}

fn snr_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || stop < start {
        return Err(Error::Config(format!(
            "invalid SNR grid: start={start}, stop={stop}, step={step}"
        )));
    }
    let n = ((stop - start) / step).round() as usize + 1;
    Ok((0..n).map(|i| start + i as f64 * step).collect())
}

fn run_sweep_cmd(args: &SweepArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => load_toml::<ExperimentConfig>(path)?,
        None => {
            let mut c = ExperimentConfig::default();
            if let Some(seed) = env_seed() {
                c.base_seed = seed;
            }
            c
        }
    };
    if let Some(v) = args.lt {
        cfg.lt = v;
    }
    if let Some(v) = args.lr {
        cfg.lr = v;
    }
    if !args.dt.is_empty() {
        cfg.dt_list = args.dt.clone();
    }
    if let Some(v) = args.dr {
        cfg.dr = v;
    }
    if args.paths.is_some() {
        cfg.paths = args.paths;
    }
    match (args.snr_db_start, args.snr_db_stop, args.snr_db_step) {
        (None, None, None) => {}
        (Some(a), Some(b), Some(s)) => cfg.snr_grid_db = snr_grid(a, b, s)?,
        _ => {
            return Err(Error::Config(
                "--snr-db-start, --snr-db-stop, and --snr-db-step must be given together".into(),
            ))
        }
    }
    if let Some(v) = args.trials {
        cfg.trials = v;
    }
    if let Some(v) = args.seed {
        cfg.base_seed = v;
    }
    if let Some(s) = &args.schemes {
        cfg.schemes = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(Scheme::from_str)
            .collect::<Result<Vec<_>>>()?;
        if cfg.schemes.is_empty() {
            return Err(Error::Config("--schemes selected no scheme".into()));
        }
    }
    if let Some(c) = &args.covariance {
        cfg.covariance = c.parse()?;
    }
    if args.clip_eps.is_some() {
        cfg.clip_eps = args.clip_eps;
    }
    let points = run_sweep(&cfg)?;
    emit(&points, args.output.format.parse()?, &args.output.out)
}

fn run_theorem_cmd(args: &TheoremArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => load_toml::<StudyConfig>(path)?,
        None => {
            let mut c = StudyConfig::default();
            if let Some(seed) = env_seed() {
                c.base_seed = seed;
            }
            c
        }
    };
    if let Some(s) = &args.sizes {
        cfg.sizes = parse_list(s, "sizes")?;
    }
    if let Some(s) = &args.dt_list {
        cfg.dt_list = parse_list(s, "dt-list")?;
    }
    if let Some(v) = args.dt {
        cfg.dt = v;
    }
    if let Some(v) = args.dr {
        cfg.dr = v;
    }
    if let Some(v) = args.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = args.lt {
        cfg.lt = v;
    }
    if let Some(v) = args.lr {
        cfg.lr = v;
    }
    if let Some(v) = args.snr_norm {
        cfg.snr_norm = v;
    }
    if let Some(v) = args.trials {
        cfg.trials = v;
    }
    if let Some(v) = args.seed {
        cfg.base_seed = v;
    }
    if args.paths.is_some() {
        cfg.paths = args.paths;
    }
    let rows = run_theorem_study(args.which, &cfg)?;
    emit_gaps(&rows, args.output.format.parse()?, &args.output.out)
}

fn run_pattern_cmd(args: &PatternArgs) -> Result<()> {
    if args.points < 2 {
        return Err(Error::Config("--points must be at least 2".into()));
    }
    let cfg = ArrayConfig::new(args.l, args.sep)?;
    let step = (args.phi_stop - args.phi_start) / (args.points - 1) as f64;
    let grid: Vec<f64> = (0..args.points).map(|i| args.phi_start + i as f64 * step).collect();
    let rows = densemimo::array::beam_pattern(&cfg, args.k, &grid)?;
    let format: EmitFormat = args.output.format.parse()?;
    let content = match format {
        EmitFormat::Csv => {
            let mut s = String::from("phi,magnitude\n");
            for (phi, mag) in &rows {
                s.push_str(&format!("{phi},{mag}\n"));
            }
            s
        }
        EmitFormat::Json => {
            let pairs: Vec<[f64; 2]> = rows.iter().map(|&(p, m)| [p, m]).collect();
            let mut s = serde_json::to_string_pretty(&pairs)
                .map_err(|e| Error::Numerical(e.to_string()))?;
            s.push('\n');
            s
        }
    };
    if args.output.out == "-" {
        print!("{content}");
        Ok(())
    } else {
        std::fs::write(&args.output.out, content)
            .map_err(|e| Error::Io { path: args.output.out.clone(), source: e })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep(args) => run_sweep_cmd(args),
        Command::Theorem(args) => run_theorem_cmd(args),
        Command::Pattern(args) => run_pattern_cmd(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
