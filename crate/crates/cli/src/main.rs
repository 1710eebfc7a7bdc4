//! `sgdom`: scaled-graph dominance analysis from the command line.

mod commands;
mod plot;
mod report;
mod system;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sgdom_core::analysis::{
    log_grid, uniform_taus, SweepConfig, DEFAULT_EPS, DEFAULT_TAUPOINTS, DEFAULT_WMAX,
    DEFAULT_WMIN, DEFAULT_WPOINTS,
};
use sgdom_core::ratpoly::DEFAULT_TOL;
use sgdom_core::sgraph::CloudConfig;

const SYSTEM_HELP: &str = "\
System files are JSON objects tagged by \"kind\":

  {\"name\": \"P\", \"kind\": \"rational\", \"m\": 1,
   \"entries\": [[{\"num\": [1], \"den\": [2, -3, 0, 1]}]]}

  {\"name\": \"G\", \"kind\": \"statespace\",
   \"a\": [[-1]], \"b\": [[1]], \"c\": [[1]], \"d\": [[0]]}

Polynomial coefficients are in ascending powers of s (the example is
1 / (s^3 - 3 s + 2)); matrices are row-major nested arrays. Feedback is
positive, u = C y and y = P u; pass --negate-c for the negative convention.

Exit codes: 0 certified or success, 1 usage or input error,
2 separation failed, 3 assumption failed, 4 graphical verdict contradicted
by the pole count.";

#[derive(Parser, Debug)]
#[command(name = "sgdom", version, about = "Scaled-graph dominance analysis of MIMO LTI feedback loops", after_help = SYSTEM_HELP)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    /// Smallest positive frequency of the log grid (0 and infinity are always added).
    #[arg(long, default_value_t = DEFAULT_WMIN)]
    pub wmin: f64,
    #[arg(long, default_value_t = DEFAULT_WMAX)]
    pub wmax: f64,
    /// Log-spaced frequencies between wmin and wmax.
    #[arg(long, default_value_t = DEFAULT_WPOINTS)]
    pub wpoints: usize,
    /// Loop scalings k / n for k = 1..n.
    #[arg(long, default_value_t = DEFAULT_TAUPOINTS)]
    pub taupoints: usize,
    /// Random unit vectors per cloud.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Local refinement steps per cloud extreme.
    #[arg(long)]
    pub refine: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Separation threshold.
    #[arg(long, default_value_t = DEFAULT_EPS)]
    pub eps: f64,
    /// Tolerance for coefficient reduction and realization.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

impl GridArgs {
    pub fn cloud(&self) -> CloudConfig {
        let d = CloudConfig::default();
        CloudConfig {
            samples: self.samples.unwrap_or(d.samples),
            refine_iters: self.refine.unwrap_or(d.refine_iters),
            seed: self.seed,
            ..d
        }
    }

    pub fn sweep(&self, oracle: bool) -> Result<SweepConfig, String> {
        if !(self.wmin > 0.0 && self.wmax.is_finite() && self.wmax >= self.wmin) {
            return Err(format!(
                "need 0 < wmin <= wmax < inf, got wmin = {}, wmax = {}",
                self.wmin, self.wmax
            ));
        }
        if self.wpoints > 1 && self.wmax == self.wmin {
            return Err("wmax must exceed wmin when wpoints > 1".into());
        }
        if self.taupoints == 0 {
            return Err("taupoints must be positive".into());
        }
        if !(self.tol > 0.0) {
            return Err("tol must be positive".into());
        }
        let cfg = SweepConfig {
            omegas: log_grid(self.wmin, self.wmax, self.wpoints),
            taus: uniform_taus(self.taupoints),
            cloud: self.cloud(),
            eps: self.eps,
            run_oracle: oracle,
            ..SweepConfig::default()
        };
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

#[derive(Args, Debug, Clone)]
pub struct LoopArgs {
    /// Plant system file.
    pub plant: PathBuf,
    /// Controller system file.
    pub controller: PathBuf,
    /// Use C in the negative feedback convention, u = -C y.
    #[arg(long)]
    pub negate_c: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// sigma_max(P) sigma_max(C) < 1 at every frequency
    Gain,
    /// psi(P) + psi(C) < pi at every frequency
    Phase,
    /// P accretive and C strictly anti-accretive at every frequency
    Passivity,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Export the scaled graph of a system over frequency as CSV and SVG.
    Sg {
        system: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        /// Output directory for sg.csv and sg.svg.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify closed-loop dominance of a feedback interconnection.
    Feedback {
        #[command(flatten)]
        lp: LoopArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Skip the polynomial pole count.
        #[arg(long)]
        no_oracle: bool,
        /// Print the JSON report instead of text.
        #[arg(long)]
        json: bool,
        /// Output directory for report.txt and report.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Principal gains, phases and regions over frequency.
    Principal {
        system: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        /// Single frequency instead of the grid ("inf" allowed).
        #[arg(long)]
        omega: Option<f64>,
        /// Test point reported as inside or outside each region, "re,im".
        #[arg(long, default_value = "-1,0", allow_hyphen_values = true)]
        point: String,
        /// Output directory for principal.csv, principal_eig.csv and principal.svg.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Frequency-wise small-gain, small-phase or passivity condition.
    Certify {
        #[command(flatten)]
        lp: LoopArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum)]
        mode: Mode,
    },
    /// Characteristic numerator det(I - P C) and closed-loop unstable pole count.
    Oracle {
        #[command(flatten)]
        lp: LoopArgs,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                commands::EXIT_INPUT
            } else {
                0
            });
        }
    };
    let code = match cli.cmd {
        Command::Sg { system, grid, out } => commands::sg(&system, &grid, out.as_deref()),
        Command::Feedback {
            lp,
            grid,
            no_oracle,
            json,
            out,
        } => commands::feedback(&lp, &grid, !no_oracle, json, out.as_deref()),
        Command::Principal {
            system,
            grid,
            omega,
            point,
            out,
        } => commands::principal(&system, &grid, omega, &point, out.as_deref()),
        Command::Certify { lp, grid, mode } => commands::certify(&lp, &grid, mode),
        Command::Oracle { lp, tol } => commands::oracle(&lp, tol),
    };
    match code {
        Ok(c) => ExitCode::from(c),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(commands::EXIT_INPUT)
        }
    }
}
