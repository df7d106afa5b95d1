use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use cornerpde::experiment::{
    extend_command, output_root, pencil_command, preset, read_signal_csv, run_experiment, run_single,
    smoothness_command, ExperimentConfig, RunConfig, SmoothnessSpec, PRESET_NAMES,
};
use cornerpde::{Error, Result};

#[derive(Parser)]
#[command(name = "cornerpde", version, about = "Parabolic problems on corner domains")]
struct Cli {
    /// Worker threads for independent mesh levels.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Output directory; defaults to a subdirectory of $CORNERPDE_OUT (or ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Laplace pencil spectrum and admissible weights at one corner.
    Pencil {
        #[arg(long)]
        theta: f64,
        #[arg(long, default_value_t = 3)]
        count: usize,
        /// Discretize the angular problem instead of using the closed form.
        #[arg(long)]
        numeric: bool,
        #[arg(long, default_value_t = 2000)]
        grid: usize,
    },
    /// Linear solve from a JSON run config.
    Solve { config: PathBuf },
    /// Picard iteration for the semilinear problem from a JSON run config.
    Semilinear { config: PathBuf },
    /// Rates from run directories on a refinement chain, coarse to fine.
    Smoothness(SmoothnessArgs),
    /// Reflection extension of a sampled signal to negative times.
    Extend {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        signal: PathBuf,
        /// Comma-separated, strictly decreasing values above 1.
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
    },
    /// Full pipeline from a preset name or a JSON experiment config.
    Experiment { target: String },
}

#[derive(Args)]
struct SmoothnessArgs {
    #[arg(required = true, num_args = 1..)]
    runs: Vec<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 4)]
    fit_points: usize,
    #[arg(long, default_value_t = 12)]
    nterm_points: usize,
    #[arg(long, default_value_t = 16)]
    nterm_min: usize,
    #[arg(long, default_value_t = 0.125)]
    nterm_max_fraction: f64,
}

fn print<T: Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        // a closed pipe (e.g. `| head`) is not an error for a report
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "run".into(), |s| s.to_string_lossy().into_owned())
}

fn load_experiment(target: &str) -> Result<ExperimentConfig> {
    if PRESET_NAMES.contains(&target) {
        return preset(target);
    }
    let path = Path::new(target);
    if !path.exists() {
        return Err(Error::Config {
            field: "experiment".into(),
            message: format!("`{target}` is neither a preset ({}) nor a file", PRESET_NAMES.join(", ")),
        });
    }
    ExperimentConfig::from_json(&std::fs::read_to_string(path)?)
}

fn run(cli: Cli) -> Result<()> {
    let dir = |default: &str| cli.out.clone().unwrap_or_else(|| output_root().join(default));
    match &cli.command {
        Command::Pencil { theta, count, numeric, grid } => {
            let report = pencil_command(*theta, *count, numeric.then_some(*grid), &dir("pencil"))?;
            print(&report)
        }
        Command::Solve { config } | Command::Semilinear { config } => {
            let semilinear = matches!(cli.command, Command::Semilinear { .. });
            let cfg = RunConfig::from_json(&std::fs::read_to_string(config)?)?;
            let report = run_single(&cfg, &dir(&stem(config)), semilinear)?;
            print(&report)
        }
        Command::Smoothness(a) => {
            let spec = SmoothnessSpec {
                p: a.p,
                fit_points: a.fit_points,
                nterm_points: a.nterm_points,
                nterm_min: a.nterm_min,
                nterm_max_fraction: a.nterm_max_fraction,
                ..SmoothnessSpec::default()
            };
            let runs: Vec<&Path> = a.runs.iter().map(PathBuf::as_path).collect();
            print(&smoothness_command(&runs, &spec, &dir("smoothness"))?)
        }
        Command::Extend { k, signal, lambdas } => {
            let s = read_signal_csv(signal)?;
            print(&extend_command(&s, *k, lambdas.as_deref(), &dir("extend"))?)
        }
        Command::Experiment { target } => {
            let cfg = load_experiment(target)?;
            let root = cli.out.clone().unwrap_or_else(output_root);
            let report = run_experiment(&cfg, &root, cli.threads)?;
            eprintln!("wrote {} files to {}", report.manifest.len(), root.join(&cfg.output_dir).display());
            print(&report)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.threads == 0 {
        eprintln!("error: --threads must be at least 1");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
