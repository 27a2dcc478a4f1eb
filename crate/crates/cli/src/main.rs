use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use jc_entropy::dynamics::{SourceModel, DEFAULT_N_CAP, DEFAULT_SOURCE_TOL};
use jc_entropy::sweep::{
    quench_crossovers, run_quench_sweep, run_thermal_sweep, spectrum_listing, thermal_crossovers, write_json,
    write_rows, OutputFormat, QuenchSweepSpec, TableRow, ThermalSweepSpec,
};
use jc_entropy::thermal::DEFAULT_TRUNC_TOL;
use jc_entropy::{Error, ModelParams};

/// Entropy sweeps of the Jaynes-Cummings model, written as CSV or JSON.
#[derive(Parser)]
#[command(name = "jc-sweep", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Thermal equilibrium over a temperature grid, for each κ/ω.
    Thermal(ThermalArgs),
    /// Excited atom in a photon field, over a grid of τ = κt/(π√N̄).
    Quench(QuenchArgs),
    /// Dressed energies and the negative lower branch.
    Spectrum(SpectrumArgs),
    /// Refined sign changes of (S_AR − S_R)/S_A in a sweep.
    Crossovers {
        #[command(subcommand)]
        sweep: CrossoverSweep,
    },
}

#[derive(Subcommand)]
enum CrossoverSweep {
    Thermal(ThermalArgs),
    Quench(QuenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Source {
    Geometric,
    Poisson,
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ThermalArgs {
    /// Comma-separated κ/ω values.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 2.5, 5.0])]
    kappa_ratio: Vec<f64>,
    /// ω₀/ω (1 is resonance).
    #[arg(long, default_value_t = 1.0)]
    omega0: f64,
    #[arg(long, default_value_t = 0.01)]
    inv_beta_min: f64,
    #[arg(long, default_value_t = 4.0)]
    inv_beta_max: f64,
    #[arg(long, default_value_t = 400)]
    points: usize,
    /// Truncation tolerance on the Boltzmann tail.
    #[arg(long, default_value_t = DEFAULT_TRUNC_TOL)]
    tol: f64,
    #[arg(long, default_value_t = jc_entropy::thermal::DEFAULT_N_CAP)]
    n_cap: usize,
    #[command(flatten)]
    output: Output,
}

impl ThermalArgs {
    fn spec(&self) -> ThermalSweepSpec {
        ThermalSweepSpec {
            kappa_ratios: self.kappa_ratio.clone(),
            omega0: self.omega0,
            inv_beta_min: self.inv_beta_min,
            inv_beta_max: self.inv_beta_max,
            points: self.points,
            trunc_tol: self.tol,
            n_cap: self.n_cap,
        }
    }
}

#[derive(Args)]
struct QuenchArgs {
    /// κ/ω.
    #[arg(long, default_value_t = 1.0)]
    kappa_ratio: f64,
    #[arg(long, default_value_t = 1.0)]
    omega0: f64,
    /// Comma-separated photon statistics.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Source::Geometric])]
    source: Vec<Source>,
    /// Comma-separated mean photon numbers.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 5.0, 50.0])]
    nbar: Vec<f64>,
    #[arg(long, default_value_t = 1e-4)]
    tau_min: f64,
    #[arg(long, default_value_t = 3.0)]
    tau_max: f64,
    #[arg(long, default_value_t = 1000)]
    points: usize,
    /// Truncation tolerance on the photon distribution tail.
    #[arg(long, default_value_t = DEFAULT_SOURCE_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_N_CAP)]
    n_cap: usize,
    #[command(flatten)]
    output: Output,
}

impl QuenchArgs {
    /// Groups ordered by source as given, then N̄ ascending.
    fn spec(&self) -> QuenchSweepSpec {
        let mut nbars = self.nbar.clone();
        nbars.sort_by(f64::total_cmp);
        nbars.dedup();
        let mut kinds = self.source.clone();
        kinds.dedup();
        let sources = kinds
            .iter()
            .flat_map(|kind| {
                nbars.iter().map(move |&nbar| match kind {
                    Source::Geometric => SourceModel::Geometric { nbar },
                    Source::Poisson => SourceModel::Poisson { nbar },
                })
            })
            .collect();
        QuenchSweepSpec {
            kappa_ratio: self.kappa_ratio,
            omega0: self.omega0,
            sources,
            tau_min: self.tau_min,
            tau_max: self.tau_max,
            points: self.points,
            trunc_tol: self.tol,
            n_cap: self.n_cap,
        }
    }
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long, default_value_t = 1.0)]
    kappa_ratio: f64,
    #[arg(long, default_value_t = 1.0)]
    omega0: f64,
    /// Highest photon index listed.
    #[arg(long, default_value_t = 30)]
    n_max: usize,
    #[command(flatten)]
    output: Output,
}

enum Failure {
    Spec(String),
    Numeric(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Spec(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Spec(m) | Failure::Numeric(m) | Failure::Io(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_) | Error::InvalidSource(_) | Error::InvalidSweep(_) | Error::InvalidBranch(_) => {
                Failure::Spec(e.to_string())
            }
            Error::Io(_) => Failure::Io(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn writer(output: &Output) -> Result<Box<dyn Write>, Failure> {
    Ok(match &output.out {
        Some(path) => {
            Box::new(BufWriter::new(File::create(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit<R: TableRow>(rows: &[R], output: &Output) -> Result<(), Failure> {
    let format = match output.format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    };
    let mut out = writer(output)?;
    write_rows(rows, format, &mut out)?;
    out.flush()?;
    Ok(())
}

/// Rows that failed numerically were written with an `error(...)` regime.
fn check_error_rows(errors: usize, total: usize) -> Result<(), Failure> {
    if errors == 0 {
        Ok(())
    } else {
        Err(Failure::Numeric(format!("{errors} of {total} rows failed; see the regime column")))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Thermal(args) => {
            let rows = run_thermal_sweep(&args.spec())?;
            emit(&rows, &args.output)?;
            check_error_rows(rows.iter().filter(|r| r.error.is_some()).count(), rows.len())
        }
        Command::Quench(args) => {
            let rows = run_quench_sweep(&args.spec())?;
            emit(&rows, &args.output)?;
            check_error_rows(rows.iter().filter(|r| r.error.is_some()).count(), rows.len())
        }
        Command::Spectrum(args) => {
            let params = ModelParams::new(1.0, args.omega0, args.kappa_ratio)?;
            let listing = spectrum_listing(&params, args.n_max)?;
            match args.output.format {
                Format::Csv => {
                    emit(&listing.rows, &args.output)?;
                    let branch = match (listing.negative_branch.first(), listing.negative_branch.last()) {
                        (Some(lo), Some(hi)) => format!("n = {lo}..={hi} ({} levels)", listing.negative_branch.len()),
                        _ => "empty".to_owned(),
                    };
                    eprintln!(
                        "negative lower branch: {branch}; ground level {:?} at {}",
                        listing.ground.level, listing.ground.energy
                    );
                }
                Format::Json => {
                    let mut out = writer(&args.output)?;
                    write_json(&listing, &mut out)?;
                    out.flush()?;
                }
            }
            Ok(())
        }
        Command::Crossovers { sweep: CrossoverSweep::Thermal(args) } => {
            let spec = args.spec();
            let rows = run_thermal_sweep(&spec)?;
            emit(&thermal_crossovers(&spec, &rows)?, &args.output)?;
            check_error_rows(rows.iter().filter(|r| r.error.is_some()).count(), rows.len())
        }
        Command::Crossovers { sweep: CrossoverSweep::Quench(args) } => {
            let spec = args.spec();
            let rows = run_quench_sweep(&spec)?;
            emit(&quench_crossovers(&spec, &rows)?, &args.output)?;
            check_error_rows(rows.iter().filter(|r| r.error.is_some()).count(), rows.len())
        }
    }
}

/// Sizes the global worker pool from `JC_THREADS` when set.
fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("JC_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Spec(format!("JC_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().map_err(|e| Failure::Spec(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("jc-sweep: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
