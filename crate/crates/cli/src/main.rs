use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fdiab::RawParams;
use fdiab_cli::figures::{gnuplot_table, Figure};
use fdiab_cli::runner::summary;
use fdiab_cli::{run_sweep, write_csv, CliError, Engine, RunOptions, SweepSpec};

/// Environment variable holding the worker thread count.
const WORKERS_ENV: &str = "FDIAB_WORKERS";

/// Analytic and Monte Carlo coverage and capacity sweeps for full-duplex IAB networks.
#[derive(Parser, Debug)]
#[command(name = "fdiab", version)]
struct Args {
    /// Parameter file of `key = value` lines; defaults to the reference deployment.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sweep file naming the axis, its values and the metrics.
    #[arg(long, required_unless_present = "figure", conflicts_with = "figure")]
    sweep: Option<PathBuf>,
    /// CSV file for a sweep, output directory for a figure.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the engines listed in the sweep.
    #[arg(long, value_parser = ["analytic", "mc", "both"])]
    engine: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    mc_iters: Option<usize>,
    /// Canned figure sweep: assoc_vs_bias, coverage_vs_bias, capouter_vs_rsi,
    /// capouter_vs_adc, ergodic_vs_rsi or ergodic_vs_xi.
    #[arg(long)]
    figure: Option<String>,
    /// Fill the `seconds` column with wall times (makes the CSV non-reproducible).
    #[arg(long)]
    timing: bool,
}

fn workers() -> Result<usize, CliError> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Parse(format!("{WORKERS_ENV} = `{v}` is not a positive integer"))),
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

fn create(path: &PathBuf) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn run(args: Args) -> Result<(), CliError> {
    let base = match &args.config {
        Some(p) => RawParams::from_file(p).map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))?,
        None => RawParams::default(),
    };
    let (figure, mut spec) = match (&args.figure, &args.sweep) {
        (Some(id), _) => {
            let f = Figure::parse(id)?;
            (Some(f), f.spec())
        }
        (None, Some(path)) => (None, SweepSpec::from_file(path)?),
        (None, None) => unreachable!("clap requires one of --sweep and --figure"),
    };
    if let Some(e) = &args.engine {
        spec.engines = Engine::parse_set(e)?;
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    if let Some(n) = args.mc_iters {
        spec.mc_iterations = n;
    }
    let opts = RunOptions { workers: workers()?, timing: args.timing };
    let rows = run_sweep(&spec, &base, &opts)?;
    match figure {
        Some(f) => {
            let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("."));
            std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
            write_csv(&rows, create(&f.csv_path(&dir))?)?;
            std::fs::write(f.dat_path(&dir), gnuplot_table(&rows)).map_err(|e| CliError::Io(e.to_string()))?;
        }
        None => match &args.out {
            Some(p) => write_csv(&rows, create(p)?)?,
            None => write_csv(&rows, std::io::stdout().lock())?,
        },
    }
    if args.out.is_some() || figure.is_some() {
        print!("{}", summary(&rows));
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
