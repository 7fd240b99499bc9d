mod commands;
mod output;
mod svg;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use semitoric_core::critical::FixedPointLabel;
use semitoric_core::momentum::DEFAULT_GAMMA;
use thiserror::Error;

use output::Format;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] semitoric_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use semitoric_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Core(E::InvalidParams(_) | E::Domain(_)) => 1,
            CliError::Core(_) => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "semitoric-lab",
    version,
    about = "Fixed points, singularity types, momentum images and fibres of the semitoric family F_t = (J, H_t) on the toric octagon"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Deformation parameter in [0, 1]. Defaults to 0, or 1/2 for `fibre`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub t: Option<f64>,
    /// Coupling in (0, 1/48).
    #[arg(long, global = true, default_value_t = DEFAULT_GAMMA, allow_hyphen_values = true)]
    pub gamma: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Overrides the pass tolerance of `transitions` and `verify` suites.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// The eight fixed points with coordinates, eigenvalues and type.
    FixedPoints,
    /// Williamson type of fixed points, or rank-one points on the level J = j.
    Classify {
        /// Restrict to one fixed point (A, B, C, D, Pmin, Pmax, Qmin, Qmax).
        #[arg(long)]
        label: Option<FixedPointLabel>,
        /// Classify the rank-one points on this J-level instead.
        #[arg(long)]
        j: Option<f64>,
    },
    /// Closed-form and numerically detected transition times.
    Transitions,
    /// Point cloud of F_t(M) from a (j, rho, theta) grid.
    MomentumImage {
        #[arg(long, default_value = "50x40x50")]
        grid: commands::Grid,
        /// Also write an SVG scatter plot here.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Surface of revolution of the reduced space at J = j.
    ReducedSpace {
        #[arg(long, allow_hyphen_values = true)]
        j: f64,
        /// Samples in h and in the rotation angle.
        #[arg(long, default_value = "64x48")]
        grid: commands::Grid,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Samples of the fibre F_t^{-1}(j, h); the double-pinched fibres are
    /// meshed and verified.
    Fibre {
        /// Fibre value as `j,h`.
        #[arg(long, allow_hyphen_values = true)]
        value: commands::Value2,
        /// Mesh resolution in r and theta for the double-pinched fibres.
        #[arg(long, default_value = "16x32")]
        grid: commands::Grid,
        /// Sample count per sweep for other fibres.
        #[arg(long, default_value_t = 512)]
        n: usize,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run the invariant suites and print one row per suite.
    Verify {
        #[arg(long, value_enum)]
        suite: Option<verify::Suite>,
        /// Number of random samples for sampling suites.
        #[arg(long)]
        n: Option<usize>,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("SEMITORIC_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "SEMITORIC_LAB_THREADS must be a positive integer, got {v:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<output::Report, CliError> {
    configure_threads()?;
    let g = &cli.global;
    if let Some(tol) = g.tol {
        if !(tol > 0.0) {
            return Err(CliError::Usage(format!(
                "--tol must be positive, got {tol}"
            )));
        }
    }
    match cli.command {
        Command::FixedPoints => commands::fixed_point_table(g),
        Command::Classify { label, j } => commands::classify(g, label, j),
        Command::Transitions => commands::transitions(g),
        Command::MomentumImage { grid, svg } => commands::momentum_image(g, &grid, svg.as_deref()),
        Command::ReducedSpace { j, grid, svg } => commands::reduced_space(j, &grid, svg.as_deref()),
        Command::Fibre {
            value,
            grid,
            n,
            svg,
        } => commands::fibre(g, value, &grid, n, svg.as_deref()),
        Command::Verify { suite, n } => verify::run(g, suite, n),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let format = cli.global.format;
    let out = cli.global.out.clone();
    let result = run(cli).and_then(|report| {
        let bytes = output::render(&report, format)?;
        output::emit(&bytes, out.as_deref())?;
        Ok(report.failure)
    });
    match result {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(why)) => {
            eprintln!("verification failed: {why}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
