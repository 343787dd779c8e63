//! Command-line front end for `painleve-torus`.
//!
//! [`parse_args`] turns `argv` into an [`Invocation`]; [`run`] executes it and
//! [`exit_code`] maps any failure to the process status: `1` for usage and
//! input errors, `2` when a numerical method fails to converge, `3` when the
//! inputs are valid but the requested object does not exist.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use painleve_torus::{Complex64, Error, PVIIndex};

mod commands;
pub mod config;
mod doc;

pub use config::{ConfigFile, OutputFormat, RunConfig};

/// Bad flags, values or config files.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

#[derive(Debug, Parser)]
#[command(
    name = "painleve-torus",
    version,
    about = "Solvability of Δu + eᵘ = 8πnδ₀ + 4π(δ_p + δ_{−p}) on flat tori"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// TOML file with defaults for the numerical settings below.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true, env = "PAINLEVE_TORUS_THREADS")]
    pub threads: Option<usize>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Output format; inferred from a `.csv` extension of --out otherwise.
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[arg(long, global = true)]
    pub ode_rel_tol: Option<f64>,
    #[arg(long, global = true)]
    pub clearance: Option<f64>,
    #[arg(long, global = true)]
    pub newton_max_iter: Option<usize>,
    #[arg(long, global = true)]
    pub series_tol: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct TauArg {
    /// Modulus τ as `re,im` with positive imaginary part.
    #[arg(long, value_parser = parse_tau, allow_hyphen_values = true)]
    pub tau: Complex64,
}

#[derive(Debug, Clone, Args)]
pub struct RsArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub r: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub s: f64,
}

#[derive(Debug, Clone, Args)]
pub struct IndexArg {
    /// PVI index: `0` or `1,0,0,0`.
    #[arg(long, default_value = "0", value_parser = parse_index)]
    pub n: PVIIndex,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Lattice data of E_τ: nome, quasi-periods η₁ η₂, e₁ e₂ e₃ and g₂ g₃.
    Ctx {
        #[command(flatten)]
        tau: TauArg,
    },
    /// Weierstrass ℘, ℘′ and ζ at a point of E_τ.
    Eval {
        #[command(flatten)]
        tau: TauArg,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z: Complex64,
    },
    /// Critical points of the Green function G, or of G_p(z) = ½(G(z−p) + G(z+p)) with --p.
    GreenCrit {
        #[command(flatten)]
        tau: TauArg,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        p: Option<Complex64>,
        /// Newton seeds per axis of the fundamental domain.
        #[arg(long, default_value_t = 10)]
        seeds: usize,
    },
    /// Hitchin's solution p_{r,s}(τ) of elliptic PVI with ℘(p), Z_{r,s} and the Hamiltonian pair (A, B).
    Hitchin {
        #[command(flatten)]
        tau: TauArg,
        #[command(flatten)]
        rs: RsArgs,
        /// Step in τ for the derivative giving A.
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
    },
    /// Okamoto-transformed solution p^{(1,0,0,0)}_{r,s}(τ) of elliptic PVI with ℘(p) and (A, B).
    Okamoto {
        #[command(flatten)]
        tau: TauArg,
        #[command(flatten)]
        rs: RsArgs,
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
    },
    /// Finite-difference residual of elliptic PVI along the explicit solution of index n.
    EpviCheck {
        #[command(flatten)]
        tau: TauArg,
        #[command(flatten)]
        rs: RsArgs,
        #[command(flatten)]
        index: IndexArg,
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
    },
    /// Hamiltonian flow of elliptic PVI from the explicit solution at --tau to --tau-end.
    PviFlow {
        #[command(flatten)]
        tau: TauArg,
        #[command(flatten)]
        rs: RsArgs,
        #[command(flatten)]
        index: IndexArg,
        #[arg(long, value_parser = parse_tau, allow_hyphen_values = true)]
        tau_end: Complex64,
        #[arg(long, default_value_t = 8)]
        steps: usize,
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
    },
    /// Monodromy N₁, N₂, γ± of the generalized Lamé equation and its classification.
    ///
    /// The equation is built either from the explicit PVI solution (--r, --s)
    /// or from a Hamiltonian point (--p, --a).
    Mono {
        #[command(flatten)]
        tau: TauArg,
        #[arg(
            long,
            allow_hyphen_values = true,
            requires = "s",
            required_unless_present = "p"
        )]
        r: Option<f64>,
        #[arg(long, allow_hyphen_values = true, requires = "r")]
        s: Option<f64>,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true,
              requires = "a", conflicts_with_all = ["r", "s"])]
        p: Option<Complex64>,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, requires = "p")]
        a: Option<Complex64>,
        #[command(flatten)]
        index: IndexArg,
        /// Base point of the loops.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        q0: Option<Complex64>,
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
    },
    /// Whether p lies in the region Ω_τⁿ of solvable singular sources, with a witness (r, s).
    OmegaTest {
        #[command(flatten)]
        tau: TauArg,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        p: Complex64,
        #[command(flatten)]
        index: IndexArg,
    },
    /// The region Ω_τⁿ sampled at cell centres of a grid over the fundamental domain.
    OmegaScan {
        #[command(flatten)]
        tau: TauArg,
        #[command(flatten)]
        index: IndexArg,
        #[arg(long, default_value_t = 64)]
        res: usize,
    },
    /// Solution u_β of the curvature equation synthesized from the unitary monodromy.
    Synth {
        #[command(flatten)]
        tau: TauArg,
        #[command(flatten)]
        rs: RsArgs,
        #[command(flatten)]
        index: IndexArg,
        #[arg(long, default_value_t = 64)]
        res: usize,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ctx { .. } => "ctx",
            Command::Eval { .. } => "eval",
            Command::GreenCrit { .. } => "green-crit",
            Command::Hitchin { .. } => "hitchin",
            Command::Okamoto { .. } => "okamoto",
            Command::EpviCheck { .. } => "epvi-check",
            Command::PviFlow { .. } => "pvi-flow",
            Command::Mono { .. } => "mono",
            Command::OmegaTest { .. } => "omega-test",
            Command::OmegaScan { .. } => "omega-scan",
            Command::Synth { .. } => "synth",
        }
    }
}

/// A parsed command line.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Command,
    pub config: RunConfig,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

/// Accepts `re,im` or a bare real.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let num = |x: &str| {
        x.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("`{x}` is not a finite number"))
    };
    match s.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(num(re)?, num(im)?)),
        None => Ok(Complex64::new(num(s)?, 0.0)),
    }
}

pub fn parse_tau(s: &str) -> Result<Complex64, String> {
    let tau = parse_complex(s)?;
    if tau.im > 0.0 {
        Ok(tau)
    } else {
        Err(format!("Im τ must be positive, got {}", tau.im))
    }
}

pub fn parse_index(s: &str) -> Result<PVIIndex, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parses `argv` (program name first) and merges the config file below the
/// flags.
pub fn parse_args<I, S>(argv: I) -> anyhow::Result<Invocation>
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let g = cli.global;
    let flags = ConfigFile {
        tolerance: g.tolerance,
        ode_rel_tol: g.ode_rel_tol,
        clearance: g.clearance,
        newton_max_iter: g.newton_max_iter,
        series_tol: g.series_tol,
        output_format: g.format,
    };
    let file = match &g.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let inferred = ConfigFile {
        output_format: g
            .out
            .as_ref()
            .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")))
            .map(|_| OutputFormat::Csv),
        ..Default::default()
    };
    let config = RunConfig::from_layers(flags.or(file).or(inferred))?;
    if g.threads == Some(0) {
        return Err(UsageError("--threads must be at least 1".into()).into());
    }
    Ok(Invocation {
        command: cli.command,
        config,
        out: g.out,
        threads: g.threads,
    })
}

/// Executes the invocation, writing to `--out` or stdout.
pub fn run(inv: &Invocation) -> anyhow::Result<()> {
    if let Some(n) = inv.threads {
        // A pool may already exist when called twice in one process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    commands::execute(inv)
}

/// Process status for a failure from [`parse_args`] or [`run`].
pub fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<clap::Error>() {
        return if e.use_stderr() { 1 } else { 0 };
    }
    match err.downcast_ref::<Error>() {
        Some(e) => error_code(e),
        None => 1,
    }
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::NoConvergence(_)
        | Error::StepFailure(_)
        | Error::BranchJump { .. }
        | Error::IllConditioned { .. } => 2,
        Error::NotUnitary
        | Error::DegenerateZ { .. }
        | Error::DegenerateDenominator { .. }
        | Error::NoValidBasepoint { .. }
        | Error::CircleIntersectsSingularity { .. }
        | Error::HalfPeriodCollision { .. } => 3,
        Error::InvalidTau { .. }
        | Error::InvalidArgument(_)
        | Error::PoleProximity { .. }
        | Error::SingularityProximity { .. }
        | Error::HalfLatticeInput
        | Error::HalfPeriodInput
        | Error::UnsupportedIndex(_)
        | Error::StepTooLarge { .. } => 1,
    }
}
