//! `geoblock` command-line front end.

mod config;
mod ops;
mod summary;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use geoblock::artifact::{envelope, json_schema, Artifact, ErrorData};

use config::{split_points, Experiment, Operation, SpaceSpec};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] geoblock::Error),
    #[error("{}", match line { Some(l) => format!("line {l}: {message}"), None => message.clone() })]
    Config { line: Option<usize>, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {inner}")]
    InFile { path: PathBuf, inner: Box<CliError> },
    #[error("usage: {0}")]
    Usage(String),
}

impl CliError {
    fn config(line: usize, message: String) -> Self {
        CliError::Config { line: Some(line), message }
    }

    fn in_file(self, path: &Path) -> Self {
        match self {
            CliError::Io { .. } | CliError::InFile { .. } => self,
            other => CliError::InFile { path: path.to_path_buf(), inner: Box::new(other) },
        }
    }

    fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Config { .. } => "config",
            CliError::Io { .. } => "io",
            CliError::InFile { inner, .. } => inner.code(),
            CliError::Usage(_) => "usage",
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "geoblock", version, about = "Light rays, blocking sets and geodesic growth on model geometries")]
struct Cli {
    /// Print the JSON schema of the artifacts and exit.
    #[arg(long, global = true)]
    schema: bool,
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Seed for sampled scans.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the JSON artifact here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug)]
struct PairArgs {
    /// Space configuration file.
    #[arg(long)]
    space: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    #[arg(long, allow_hyphen_values = true)]
    y: String,
    /// Horizon: largest ray length considered.
    #[arg(long = "T")]
    horizon: f64,
}

#[derive(Args, Debug)]
struct SeriesArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    #[arg(long, allow_hyphen_values = true)]
    y: String,
    #[arg(long = "Tmax")]
    t_max: f64,
    /// Horizon spacing.
    #[arg(long = "Tstep", default_value_t = 1.0)]
    t_step: f64,
    /// Also write the series as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List light rays (or all geodesic segments) from x to y.
    Enumerate {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        geodesics: bool,
    },
    /// Build the structural blocker set, certify it and bound b(x,y) from below.
    Block {
        #[command(flatten)]
        pair: PairArgs,
        /// Explicit blockers separated by `;`.
        #[arg(long, allow_hyphen_values = true)]
        blockers: Option<String>,
    },
    /// Check an explicit blocker set.
    Verify {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, allow_hyphen_values = true)]
        blockers: String,
    },
    /// Classify a pair against cross or sphere blocking.
    Classify {
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Cumulative geodesic and light counts at increasing horizons.
    Growth(SeriesArgs),
    /// Growth-rate estimate with oracle and counting-inequality checks.
    Entropy(SeriesArgs),
    /// Cross-blocking scan over point pairs of a surface of revolution.
    Scan {
        #[arg(long)]
        space: PathBuf,
        #[arg(long = "T")]
        horizon: f64,
        /// Polar grid divisions.
        #[arg(long, conflicts_with = "pairs")]
        grid: Option<usize>,
        /// Number of seeded random pairs.
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long, default_value_t = 0.05)]
        margin: f64,
    },
    /// Summarize artifacts as a table; fails if an embedded check failed.
    Report {
        #[arg(required = true)]
        artifacts: Vec<PathBuf>,
    },
    /// Run an experiment file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

fn pair_experiment(op: Operation, pair: PairArgs) -> Result<Experiment, CliError> {
    let mut exp = Experiment::new(SpaceSpec::load(&pair.space)?, op);
    exp.x = Some(pair.x);
    exp.y = Some(pair.y);
    exp.horizon = Some(pair.horizon);
    Ok(exp)
}

fn series_experiment(op: Operation, args: SeriesArgs) -> Result<Experiment, CliError> {
    let mut exp = Experiment::new(SpaceSpec::load(&args.space)?, op);
    exp.x = Some(args.x);
    exp.y = Some(args.y);
    exp.t_max = Some(args.t_max);
    exp.t_step = args.t_step;
    exp.csv = args.csv;
    Ok(exp)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn run_experiment(mut exp: Experiment, cli_out: Option<PathBuf>, cli_seed: Option<u64>) -> Result<ExitCode, CliError> {
    if let Some(seed) = cli_seed {
        exp.seed = seed;
    }
    if cli_out.is_some() {
        exp.output = cli_out;
    }
    exp.validate()?;
    let outcome = ops::execute(&exp)?;
    let art = Artifact::parse(&outcome.json)?;
    let summary = summary::summarize(&art)?;
    match &exp.output {
        Some(path) => write_file(path, &outcome.json)?,
        None => print!("{}", outcome.json),
    }
    if let (Some(path), Some(csv)) = (&exp.csv, &outcome.csv) {
        write_file(path, csv)?;
    }
    eprintln!("{}: {}", outcome.kind, summary.text);
    Ok(if summary.check == Some(false) { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn report(paths: &[PathBuf]) -> Result<ExitCode, CliError> {
    let mut rows = Vec::new();
    for path in paths {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
        let art = Artifact::parse(&text).map_err(|e| CliError::from(e).in_file(path))?;
        let s = summary::summarize(&art).map_err(|e| CliError::from(e).in_file(path))?;
        rows.push((path.display().to_string(), art.kind.clone(), s));
    }
    print!("{}", summary::table(&rows));
    let failed = rows.iter().any(|(_, _, s)| s.check == Some(false));
    Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    if cli.schema {
        print!("{}", json_schema());
        return Ok(ExitCode::SUCCESS);
    }
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    }
    let command = cli.command.ok_or_else(|| CliError::Usage("a subcommand is required (try --help)".into()))?;
    let (out, seed) = (cli.out, cli.seed);
    let exp = match command {
        Command::Enumerate { pair, geodesics } => {
            let mut e = pair_experiment(Operation::Enumerate, pair)?;
            e.geodesics = geodesics;
            e
        }
        Command::Block { pair, blockers } => {
            let mut e = pair_experiment(Operation::Block, pair)?;
            e.blockers = blockers.map(|b| split_points(&b));
            e
        }
        Command::Verify { pair, blockers } => {
            let mut e = pair_experiment(Operation::Verify, pair)?;
            e.blockers = Some(split_points(&blockers));
            e
        }
        Command::Classify { pair } => pair_experiment(Operation::Classify, pair)?,
        Command::Growth(args) => series_experiment(Operation::Growth, args)?,
        Command::Entropy(args) => series_experiment(Operation::Entropy, args)?,
        Command::Scan { space, horizon, grid, pairs, margin } => {
            let mut e = Experiment::new(SpaceSpec::load(&space)?, Operation::Scan);
            e.horizon = Some(horizon);
            e.grid = grid;
            e.pairs = pairs;
            e.margin = margin;
            e
        }
        Command::Report { artifacts } => return report(&artifacts),
        Command::Run { config } => Experiment::load(&config)?,
    };
    run_experiment(exp, out, seed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            let data = ErrorData { code: e.code().to_string(), message: e.to_string() };
            let text = envelope("error", &data).unwrap_or_else(|_| format!("{{\"error\": {:?}}}\n", e.to_string()));
            let _ = std::io::stderr().write_all(text.as_bytes());
            ExitCode::from(2)
        }
    }
}
