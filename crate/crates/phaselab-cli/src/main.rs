//! `phaselab` — experiment driver for the solid–liquid phase-field laboratory.
//!
//! Every subcommand reads one flat `section.key = value` config, writes its
//! artifacts plus a content-hash `manifest` into `--out`, and prints a short
//! deterministic summary. Failures exit with a class-specific code and one
//! machine-readable line on stderr:
//!
//! ```text
//! phaselab: error: class=<class> exit=<code>: <message>
//! ```
//!
//! | exit | class       | meaning                                        |
//! |------|-------------|------------------------------------------------|
//! | 0    | —           | success                                        |
//! | 2    | config      | bad usage, unparsable config, invalid values   |
//! | 3    | numerics    | solver nonconvergence, NaN, aborted run        |
//! | 4    | io          | read/write failure                             |
//! | 5    | boundary    | boundary data admits no solution               |
//! | 6    | determinism | `--seedless` re-run produced different bytes   |

mod commands;
mod config;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{parse_config, Mode, RunConfig};

const DEFAULTS_HELP: &str = "\
Config format: flat `section.key = value` lines; `#` starts a comment.
Exactly one parameter chart section is mandatory: [physical] (density,
specific_heat, conductivity, kinetic_coeff, surface_tension, latent_heat,
melt_temperature, temp_scale, interface_width, domain_length, time_scale),
[nondim] (eps, pe, alpha, theta, beta, st), or [hat] (alpha_hat, beta_hat,
gamma, delta, eps, theta). Everything else defaults:

  run.mode            (optional; must match the subcommand when present)
  potential.name      quartic
  model.form          full            (full | caginalp)
  grid.dim            1               (1 | 2)
  grid.nx, grid.ny    256, 256
  grid.len_x, len_y   1, 1
  boundary.kind       no-flux         (no-flux | mixed)
  boundary.gamma_faces left           (mixed only; comma list of faces)
  boundary.q_b, t_b   0, 0            (mixed only: flux and wall temperature)
  initial.kind        pure-phase      (pure-phase | front | bubble | file)
  initial.phi, temp   1, 0
  initial.front_position 0.5          (front; solid_side left|right, default left)
  initial.radius      0.25            (bubble; center_x/center_y default 0.5)
  initial.path        —               (file; grid is taken from the snapshot)
  time.dt             solver default  (accuracy heuristic printed by `run`)
  time.t_end          1
  time.diag_every     10              (steps between diagnostics rows; 0 = initial only)
  sweep.eps_list      0.08,0.04,0.02,0.01
  sweep.scenario      planar          (planar | radial)
  sweep.theta         chart value
  galerkin.n_modes    16
  stefan.law          full            (full | linear flux-jump law)
  stefan.n_cells      512
  stefan.sample_dt    0.02

Artifacts per subcommand (in --out): run → diagnostics.csv, final.snap;
profile → profile.csv; sweep → sweep.csv; galerkin → modes.csv, final.snap;
stefan-compare → front_pde.csv, front_oracle.csv; diagnose → diagnose.csv.
Every command also writes `manifest` (sha256 per artifact, sorted); identical
configs yield identical manifests.";

#[derive(Parser)]
#[command(
    name = "phaselab",
    version,
    about = "Phase-field laboratory for solid-liquid transitions",
    after_long_help = DEFAULTS_HELP
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Path to the flat `section.key = value` configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory for artifacts and the manifest (created if missing).
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,

    /// Concurrency limit for sweep rows; all other work is single-threaded.
    #[arg(long, global = true, value_name = "N", default_value_t = 1)]
    jobs: usize,

    /// Run the command twice and fail unless both produce identical manifests.
    #[arg(long, global = true)]
    seedless: bool,

    /// Print the resolved configuration (defaults filled in) and exit.
    #[arg(long, global = true)]
    emit_config: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Integrate the coupled evolution system on a grid.
    Run,
    /// Solve the equilibrium layer profile and report its surface tension.
    Profile,
    /// Sweep the interface width and report sharp-interface residuals.
    Sweep,
    /// Integrate the spectral mode system on the unit interval.
    Galerkin,
    /// Compare a diffuse front against the front-tracking reference solver.
    StefanCompare,
    /// Report energies, entropy production, and front location of a snapshot.
    Diagnose,
}

impl Cmd {
    fn mode(self) -> Mode {
        match self {
            Cmd::Run => Mode::Run,
            Cmd::Profile => Mode::Profile,
            Cmd::Sweep => Mode::Sweep,
            Cmd::Galerkin => Mode::Galerkin,
            Cmd::StefanCompare => Mode::StefanCompare,
            Cmd::Diagnose => Mode::Diagnose,
        }
    }
}

enum CliError {
    Config(String),
    Lib(phaselab::Error),
    Determinism(String),
}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<phaselab::Error> for CliError {
    fn from(e: phaselab::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Lib(phaselab::Error::Io(e))
    }
}

impl CliError {
    fn class_and_code(&self) -> (&'static str, u8) {
        match self {
            CliError::Config(_) => ("config", 2),
            CliError::Lib(phaselab::Error::Domain(_)) => ("config", 2),
            CliError::Lib(phaselab::Error::Numerics(_)) => ("numerics", 3),
            CliError::Lib(phaselab::Error::Io(_)) => ("io", 4),
            CliError::Lib(phaselab::Error::Incompatibility(_)) => ("boundary", 5),
            CliError::Determinism(_) => ("determinism", 6),
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Config(m) => m.clone(),
            CliError::Lib(e) => e.to_string(),
            CliError::Determinism(m) => m.clone(),
        }
    }
}

fn dispatch(mode: Mode, cfg: &RunConfig, out_dir: &Path, jobs: usize) -> phaselab::Result<Vec<PathBuf>> {
    match mode {
        Mode::Run => commands::cmd_run(cfg, out_dir),
        Mode::Profile => commands::cmd_profile(cfg, out_dir),
        Mode::Sweep => commands::cmd_sweep(cfg, out_dir, jobs),
        Mode::Galerkin => commands::cmd_galerkin(cfg, out_dir),
        Mode::StefanCompare => commands::cmd_stefan_compare(cfg, out_dir),
        Mode::Diagnose => commands::cmd_diagnose(cfg, out_dir),
    }
}

/// Run the command into `out_dir` and write the manifest; returns its text.
fn run_once(mode: Mode, cfg: &RunConfig, out_dir: &Path, jobs: usize) -> Result<String, CliError> {
    std::fs::create_dir_all(out_dir)?;
    let artifacts = dispatch(mode, cfg, out_dir, jobs)?;
    let text = manifest::write_manifest(out_dir, &artifacts)?;
    println!("manifest: {} artifact(s) in {}", artifacts.len(), out_dir.display());
    Ok(text)
}

fn real_main(cli: Cli) -> Result<(), CliError> {
    let mode = cli.cmd.mode();
    let Some(config_path) = &cli.config else {
        return Err(CliError::Config("missing --config PATH".to_string()));
    };
    let mut cfg = parse_config(config_path)?;
    if let Some(file_mode) = cfg.mode {
        if file_mode != mode {
            return Err(CliError::Config(format!(
                "config sets run.mode = {} but the subcommand is `{}`",
                file_mode.name(),
                mode.name()
            )));
        }
    }
    cfg.mode = Some(mode);

    if cli.emit_config {
        print!("{}", config::emit(&cfg));
        return Ok(());
    }

    let first = run_once(mode, &cfg, &cli.out, cli.jobs)?;

    if cli.seedless {
        let check_dir = cli.out.join(".seedless-check");
        let second = run_once(mode, &cfg, &check_dir, cli.jobs);
        // Clean up before reporting so a failure never leaves the scratch dir.
        let cleanup = std::fs::remove_dir_all(&check_dir);
        let second = second?;
        cleanup.map_err(CliError::from)?;
        if second != first {
            let diff = first
                .lines()
                .zip(second.lines())
                .find(|(a, b)| a != b)
                .map(|(a, b)| format!("first run: `{a}`, second run: `{b}`"))
                .unwrap_or_else(|| "manifests differ in length".to_string());
            return Err(CliError::Determinism(format!(
                "the two runs disagree — {diff}"
            )));
        }
        println!("determinism check passed: both runs produced identical manifests");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (class, code) = e.class_and_code();
            eprintln!("phaselab: error: class={class} exit={code}: {}", e.message());
            ExitCode::from(code)
        }
    }
}
