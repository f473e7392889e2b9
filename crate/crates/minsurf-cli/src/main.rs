//! Command-line front end for the minsurf library: catalog listing,
//! invariant grids, condition checks, direct-sum certification, coefficient
//! vectors, and polar sampling, with JSON and CSV reports.

mod cmds;
mod report;
mod settings;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

/// Everything ran and every gate passed.
pub const EXIT_PASS: i32 = 0;
/// A condition or certification gate exceeded its tolerance.
pub const EXIT_CONDITION_FAIL: i32 = 1;
/// Invalid configuration or a violated structural constraint.
pub const EXIT_CONFIG: i32 = 2;
/// The geometry degenerated everywhere the command looked.
pub const EXIT_DEGENERATE: i32 = 3;
/// Gauss curvature is 1 across the grid; residuals are inapplicable.
pub const EXIT_CURVATURE_ONE: i32 = 4;

/// Terminal failure carrying the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    /// Configuration failure, exit code 2.
    pub fn config(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl From<minsurf::Error> for Failure {
    fn from(e: minsurf::Error) -> Self {
        use minsurf::Error as E;
        let code = match &e {
            E::DegenerateFlag(_)
            | E::SignDiscontinuity
            | E::DivisionByDegenerateNormalCurvature
            | E::FrameDiscontinuity
            | E::VariantInapplicable(_)
            | E::ZeroVector(_) => EXIT_DEGENERATE,
            E::CurvatureOne => EXIT_CURVATURE_ONE,
            _ => EXIT_CONFIG,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

const AFTER_HELP: &str = "\
Exit codes:
  0  pass
  1  condition or certification gate failed
  2  invalid configuration or violated constraint
  3  degenerate geometry
  4  curvature-one saturation

CSV columns:
  list        name, ambient_dim, sphere_dim, x0, x1, y0, y1, description
  invariants  x, y, F, K, then for each order r: H{2r+1}_re, H{2r+1}_im,
              H{2r+2}_re, H{2r+2}_im, norm2_{r+1}, Kperp_r, kappa_r, mu_r,
              ecc_r, a_plus_r, a_minus_r, phi_r_re, phi_r_im, Kstar_r;
              cells are empty where a quantity is undefined
  check       x, y, residual (empty where the point was flagged)
  directsum   order, b_hat, c_hat, d_hat_re, d_hat_im, rho_hat, norm_gap,
              k_perp_gap, hopf_gap
  cvectors    order, b_hat, c_hat, d_hat_re, d_hat_im, rho_hat in explicit
              mode; draw, m, max_violation in audit mode
  polar       x, y, s1..s6 (components of the oriented unit section)

JSON reports start with a `schema: 1` version marker and keep a stable key
order, so identical settings reproduce byte-identical output.

The file passed with --config holds `key = value` lines using the long flag
names; command-line flags win over file values. Worker threads come from
--threads, then the MINSURF_THREADS variable, then all available cores.";

#[derive(Parser)]
#[command(
    name = "minsurf",
    version,
    about = "Invariants and curvature conditions of minimal surfaces in round spheres",
    after_long_help = AFTER_HELP
)]
struct Cli {
    /// Settings file of `key = value` lines using the long flag names.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Report format (default json).
    #[arg(long, global = true, value_enum)]
    format: Option<report::Format>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Seed for randomized audits (default 24301).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: MINSURF_THREADS, else all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct SurfaceArgs {
    /// Catalog surface name (see `minsurf list`).
    #[arg(long)]
    surface: Option<String>,
    /// File with an inline surface description (`key = value` lines).
    #[arg(long, value_name = "FILE")]
    spec: Option<PathBuf>,
}

#[derive(Args, Default)]
struct GridArgs {
    /// Sampling grid as NXxNY (default: 16x16; 3x3 for directsum).
    #[arg(long)]
    grid: Option<String>,
    /// Parameter box as x0,x1,y0,y1 (default: the surface domain).
    #[arg(long)]
    domain: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// List the catalog surfaces.
    List,
    /// Tabulate pointwise invariants over a grid.
    Invariants {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Highest normal order to report (default 1).
        #[arg(long)]
        max_order: Option<usize>,
    },
    /// Evaluate a curvature-condition residual over a grid.
    Check {
        /// Condition id: ricci6, ricci4, flat-metric, holomorphic:R,
        /// exceptional:R, or prop32:S.
        condition: String,
        #[command(flatten)]
        surface: SurfaceArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Stencil step for finite-difference residuals (default 0.001).
        #[arg(long)]
        h: Option<f64>,
        /// Pass threshold on the largest |residual| (default per condition).
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Build a weighted direct sum over a base curve (default
    /// equilateral-torus) and certify it against its predicted invariants.
    Directsum {
        /// Summand weights, comma separated; normalized to unit square sum.
        #[arg(long)]
        a: Option<String>,
        /// Summand phases in [0, pi), comma separated, strictly increasing.
        #[arg(long)]
        theta: Option<String>,
        #[command(flatten)]
        surface: SurfaceArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Family angle for the phase-law check (default pi/6).
        #[arg(long)]
        phi: Option<f64>,
        /// Relative gap threshold for the certification gates (default 1e-6).
        #[arg(long)]
        tolerance: Option<f64>,
        /// Stencil step for the curvature-condition report (default 0.001).
        #[arg(long)]
        h: Option<f64>,
    },
    /// Report coefficient vectors with their predicted constants, or audit
    /// orthogonality over random draws.
    Cvectors {
        /// Summand weights, comma separated; normalized to unit square sum.
        #[arg(long)]
        a: Option<String>,
        /// Summand phases in [0, pi), comma separated, strictly increasing.
        #[arg(long)]
        theta: Option<String>,
        /// Audit this many random weight and phase draws instead.
        #[arg(long, value_name = "COUNT")]
        audit: Option<usize>,
        /// Summand count for audit draws (default: alternate 2 and 3).
        #[arg(long)]
        m: Option<usize>,
        /// Pass threshold for audited orthogonality (default 1e-12).
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Sample the polar curve and measure congruence with its source.
    Polar {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Pass threshold on the congruence gap (default 1e-6).
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

enum Run {
    List,
    Invariants,
    Check(String),
    Directsum,
    Cvectors,
    Polar,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            std::process::exit(f.code);
        }
    }
}

fn run(cli: Cli) -> Result<i32, Failure> {
    let mut o = settings::Overrides {
        format: cli.format,
        out: cli.out,
        seed: cli.seed,
        threads: cli.threads,
        ..Default::default()
    };
    let run = match cli.command {
        Command::List => Run::List,
        Command::Invariants {
            surface,
            grid,
            max_order,
        } => {
            o.surface = surface.surface;
            o.spec = surface.spec;
            o.grid = grid.grid;
            o.domain = grid.domain;
            o.max_order = max_order;
            Run::Invariants
        }
        Command::Check {
            condition,
            surface,
            grid,
            h,
            tolerance,
        } => {
            o.surface = surface.surface;
            o.spec = surface.spec;
            o.grid = grid.grid;
            o.domain = grid.domain;
            o.h = h;
            o.tolerance = tolerance;
            Run::Check(condition)
        }
        Command::Directsum {
            a,
            theta,
            surface,
            grid,
            phi,
            tolerance,
            h,
        } => {
            o.a = a;
            o.theta = theta;
            o.surface = surface.surface;
            o.spec = surface.spec;
            o.grid = grid.grid;
            o.domain = grid.domain;
            o.phi = phi;
            o.tolerance = tolerance;
            o.h = h;
            Run::Directsum
        }
        Command::Cvectors {
            a,
            theta,
            audit,
            m,
            tolerance,
        } => {
            o.a = a;
            o.theta = theta;
            o.audit = audit;
            o.m = m;
            o.tolerance = tolerance;
            Run::Cvectors
        }
        Command::Polar {
            surface,
            grid,
            tolerance,
        } => {
            o.surface = surface.surface;
            o.spec = surface.spec;
            o.grid = grid.grid;
            o.domain = grid.domain;
            o.tolerance = tolerance;
            Run::Polar
        }
    };
    let s = settings::Settings::resolve(o, cli.config.as_deref())?;
    settings::init_thread_pool(&s)?;
    match run {
        Run::List => cmds::list(&s),
        Run::Invariants => cmds::invariants(&s),
        Run::Check(condition) => cmds::check(&s, &condition),
        Run::Directsum => cmds::directsum(&s),
        Run::Cvectors => cmds::cvectors(&s),
        Run::Polar => cmds::polar(&s),
    }
}
