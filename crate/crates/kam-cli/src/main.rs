//! `kam` — command-line interface to the Kubo-Ando mean calculus library.
//!
//! Verbs: `mean`, `norm-mean`, `check-mean-axioms`, `check-order`,
//! `verify <suite>`, `preserver run`, `measure check-equivalence`.
//! All I/O is JSON; reports are deterministic for a fixed config and seed
//! (modulo the wall-time field). The environment variable `KAM_SEED`
//! overrides the seed.

mod report;
mod run;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_SCHEMA: u8 = 2;
pub const EXIT_CONE: u8 = 3;
pub const EXIT_CONDITIONING: u8 = 4;
pub const EXIT_INCONCLUSIVE: u8 = 5;

#[derive(Parser)]
#[command(
    name = "kam",
    version,
    about = "Kubo-Ando mean calculus: mean evaluation, axiom suites, order checks and the norm-preserver certification pipeline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Matrix dimension for sampled batteries (1..=16).
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// Number of sampled trials (1..=1_000_000).
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// RNG seed; the KAM_SEED environment variable overrides this.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Relative tolerance for Loewner comparisons.
    #[arg(long)]
    order_tol: Option<f64>,
    /// Relative tolerance for matrix equality.
    #[arg(long)]
    eq_tol: Option<f64>,
    /// Magnitude of the negative eigenvalue floor for cone membership.
    #[arg(long)]
    psd_floor: Option<f64>,
    /// Write the JSON report here as well as to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate A σ B and report norms for every available route.
    Mean {
        /// Catalog name (arithmetic|geometric|harmonic|logarithmic|power:p)
        /// or path to a measure JSON file.
        #[arg(long)]
        mean: String,
        /// Path to the first matrix (JSON schema {"n", "re", "im"}).
        #[arg(long)]
        a: PathBuf,
        /// Path to the second matrix.
        #[arg(long)]
        b: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
        /// Write the result matrix JSON to this path.
        #[arg(long)]
        result: Option<PathBuf>,
    },
    /// Norm of A σ B (spectral route, with the ε-ladder on the boundary).
    NormMean {
        #[arg(long)]
        mean: String,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run the connection-axiom battery for one mean.
    CheckMeanAxioms {
        #[arg(long)]
        mean: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Compare the projection-norm order criterion against the direct
    /// Loewner comparison for a concrete pair.
    CheckOrder {
        #[arg(long)]
        mean: String,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run a named property suite, or replay a witness file.
    Verify {
        /// One of: axioms, maximality, scaling, projection-norm,
        /// order-criterion, h-part, orthogonality.
        suite: Option<String>,
        #[arg(long)]
        mean: Option<String>,
        #[command(flatten)]
        common: CommonOpts,
        /// Replay a witness produced by a failing check instead of
        /// sampling fresh trials.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
    /// Candidate-map certification.
    Preserver {
        #[command(subcommand)]
        action: PreserverAction,
    },
    /// Measure-backed utilities.
    Measure {
        #[command(subcommand)]
        action: MeasureAction,
    },
}

#[derive(Subcommand)]
enum PreserverAction {
    /// Run the full certification pipeline on a candidate map.
    Run {
        /// Map specification JSON ({"kind": ..., "U"/"C"/"eta"/...}).
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        mean: String,
        #[command(flatten)]
        common: CommonOpts,
    },
}

#[derive(Subcommand)]
enum MeasureAction {
    /// Cross-validate the spectral and quadrature routes for one measure.
    CheckEquivalence {
        /// Path to the measure JSON ({"alpha", "beta", "atoms"}).
        #[arg(long)]
        measure: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Mean { mean, a, b, common, result } => run::cmd_mean(&mean, &a, &b, &common, result.as_deref()),
        Command::NormMean { mean, a, b, common } => run::cmd_norm_mean(&mean, &a, &b, &common),
        Command::CheckMeanAxioms { mean, common } => run::cmd_check_axioms(&mean, &common),
        Command::CheckOrder { mean, a, b, common } => run::cmd_check_order(&mean, &a, &b, &common),
        Command::Verify { suite, mean, common, replay } => {
            run::cmd_verify(suite.as_deref(), mean.as_deref(), &common, replay.as_deref())
        }
        Command::Preserver { action } => match action {
            PreserverAction::Run { map, mean, common } => run::cmd_preserver(&map, &mean, &common),
        },
        Command::Measure { action } => match action {
            MeasureAction::CheckEquivalence { measure, common } => {
                run::cmd_measure_equivalence(&measure, &common)
            }
        },
    };
    match code {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(run::exit_code_for(&e))
        }
    }
}
