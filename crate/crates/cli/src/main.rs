//! `hjb-iso`: symmetry algebras, solution transforms, path simulation and
//! statistical verification from the command line.
//!
//! Exit codes: 0 success or pass, 1 verification failure, 2 usage or
//! runtime error.

mod algebra;
mod args;
mod config;
mod eta;
mod simulate;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use args::{AffineArgs, FamilyChoice, PotentialArgs, SimArgs};
use config::RunConfig;

pub const GIT_DESCRIBE: &str = env!("HJB_ISO_GIT_DESCRIBE");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Iso(#[from] hjb_iso::isovectors::IsoError),
    #[error(transparent)]
    Solution(#[from] hjb_iso::solutions::SolutionError),
    #[error(transparent)]
    Sde(#[from] hjb_iso::sde::SdeError),
    #[error(transparent)]
    Martingale(#[from] hjb_iso::martingale::MartingaleError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Parser, Debug)]
#[command(name = "hjb-iso", version, about, propagate_version = true)]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Cap on worker threads. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print JSON instead of text for basis, brackets and structure.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generators of the symmetry algebra, their brackets and structure.
    #[command(allow_negative_numbers = true)]
    Basis {
        #[command(flatten)]
        potential: PotentialArgs,
        #[arg(long, value_enum, default_value_t = FamilyChoice::Auto)]
        family: FamilyChoice,
    },
    /// Structure-constant table, compared with the reference table when
    /// one exists for the chosen basis.
    #[command(allow_negative_numbers = true)]
    Brackets {
        #[command(flatten)]
        potential: PotentialArgs,
        #[arg(long, value_enum, default_value_t = FamilyChoice::Auto)]
        family: FamilyChoice,
        /// Also list vanishing brackets.
        #[arg(long)]
        show_zero: bool,
    },
    /// sl2 / Heisenberg identification and subalgebra checks.
    #[command(allow_negative_numbers = true)]
    Structure {
        #[command(flatten)]
        potential: PotentialArgs,
    },
    /// New solution from a generator: the group action `e^{mu M_i} eta`
    /// (free case) or the infinitesimal image `X_i(eta)`.
    #[command(allow_negative_numbers = true)]
    Transform {
        /// Seed solution, e.g. `gaussian:1,0` or `affine:2,2,3`.
        #[arg(long, default_value = "constant")]
        eta: String,
        #[arg(long)]
        gamma: Option<f64>,
        /// 1-based generator index.
        #[arg(long)]
        generator: usize,
        /// Group parameter; without it the generator is applied as a
        /// differential operator.
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long, value_enum, default_value_t = FamilyChoice::Auto)]
        family: FamilyChoice,
        /// Grid points per axis for the residual report and CSV output.
        #[arg(long, default_value_t = 9)]
        points: usize,
        /// Write `t,q,eta` on the grid to this CSV file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate a path ensemble and write it with a manifest.
    #[command(allow_negative_numbers = true)]
    Simulate {
        /// affine, besq, bernstein or ou.
        #[arg(long)]
        model: Option<String>,
        /// Solution driving the Bernstein drift.
        #[arg(long)]
        eta: Option<String>,
        #[arg(long)]
        gamma: Option<f64>,
        #[command(flatten)]
        affine: AffineArgs,
        #[command(flatten)]
        sim: SimArgs,
        /// Affine coordinate written out: x, r or z.
        #[arg(long, default_value = "x")]
        observe: String,
        /// Output path prefix.
        #[arg(long)]
        out: Option<PathBuf>,
        /// csv, binary or both.
        #[arg(long)]
        format: Option<String>,
    },
    /// Run a verification suite; exit code 1 when it fails.
    #[command(allow_negative_numbers = true)]
    Verify {
        /// omega, density, brackets or residuals.
        #[arg(long)]
        suite: String,
        #[command(flatten)]
        potential: PotentialArgs,
        #[arg(long)]
        eta: Option<String>,
        #[arg(long, value_enum, default_value_t = FamilyChoice::Auto)]
        family: FamilyChoice,
        #[command(flatten)]
        affine: AffineArgs,
        #[command(flatten)]
        sim: SimArgs,
        /// Marginal time for the density suite.
        #[arg(long)]
        t: Option<f64>,
        /// |z| threshold for martingale tests.
        #[arg(long)]
        z: Option<f64>,
        /// Relative residual tolerance.
        #[arg(long)]
        residual_tol: Option<f64>,
    },
    /// Closed-form marginal density of the δ = 1 or δ = 3 model.
    #[command(allow_negative_numbers = true)]
    Density {
        #[command(flatten)]
        affine: AffineArgs,
        /// Initial z (δ = 1 only).
        #[arg(long, default_value_t = 0.0)]
        z0: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
        /// Write `q,pdf,cdf` to this CSV file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<bool, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Basis { potential, family } => {
            algebra::cmd_basis(&potential.resolve(&cfg)?, family, cli.json)
        }
        Command::Brackets {
            potential,
            family,
            show_zero,
        } => algebra::cmd_brackets(&potential.resolve(&cfg)?, family, show_zero, cli.json),
        Command::Structure { potential } => {
            algebra::cmd_structure(&potential.resolve(&cfg)?, cli.json)
        }
        Command::Transform {
            eta,
            gamma,
            generator,
            mu,
            family,
            points,
            out,
        } => {
            let gamma = gamma.or(cfg.potential.gamma).unwrap_or(1.0);
            let eta = eta::parse_eta(&eta, gamma)?;
            algebra::cmd_transform(&eta, generator, mu, family, points, out.as_deref())
        }
        Command::Simulate {
            model,
            eta,
            gamma,
            affine,
            sim,
            observe,
            out,
            format,
        } => {
            let req = simulate::SimulateRequest::resolve(
                &cfg, model, eta, gamma, &affine, &sim, observe, out, format,
            )?;
            simulate::cmd_simulate(&req)
        }
        Command::Verify {
            suite,
            potential,
            eta,
            family,
            affine,
            sim,
            t,
            z,
            residual_tol,
        } => {
            let req = verify::VerifyRequest {
                potential,
                eta: eta.or(cfg.simulation.eta.clone()),
                family,
                affine,
                sim,
                t: t.unwrap_or(1.0),
                z: z.or(cfg.tolerance.z).unwrap_or(hjb_iso::martingale::DEFAULT_THRESHOLD),
                residual_tol: residual_tol.or(cfg.tolerance.residual).unwrap_or(1e-8),
            };
            verify::cmd_verify(&suite, &req, &cfg)
        }
        Command::Density {
            affine,
            z0,
            t,
            points,
            out,
        } => simulate::cmd_density(&affine, &cfg, z0, t, points, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
