//! The six experiment commands.
//!
//! Each command consumes a validated [`RunConfig`], writes its artifacts into
//! the output directory, prints a short deterministic summary to stdout, and
//! returns the artifact paths for the manifest. Nothing here emits timestamps
//! or machine-dependent bytes: two runs of the same config produce
//! byte-identical artifacts.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use phaselab::field::{BoundarySpec, FieldState, Grid};
use phaselab::galerkin::{build_bases, integrate_modes};
use phaselab::params::{hat_and_sharp_params, nondimensionalize, HatParams, SharpScalings};
use phaselab::pde::{default_dt, diagnostics, lifting_solution, run, Problem};
use phaselab::potential::{Potential, PotentialRegistry};
use phaselab::profile::{solve_profile_default, PlanarProfile};
use phaselab::snapshot::{
    load_snapshot, save_diagnostics_csv, save_mode_csv, save_snapshot, save_sweep_csv,
};
use phaselab::stefan::{
    eps_sweep, locate_interface, stefan_reference_1d, StefanProblem, SweepScenario,
};
use phaselab::{Error, Result};

use crate::config::{BoundaryKind, Chart, GridSpec, InitialSpec, RunConfig, Side};

/// Resolve the potential by name from the strategy registry.
fn potential(cfg: &RunConfig) -> Result<Arc<dyn Potential>> {
    let reg = PotentialRegistry::with_builtins();
    reg.get(&cfg.potential).ok_or_else(|| {
        Error::Domain(format!(
            "unknown potential `{}` (registered: {})",
            cfg.potential,
            reg.names().join(", ")
        ))
    })
}

/// Evolution coefficients and limit scalings from whichever chart is present.
fn chart_params(cfg: &RunConfig) -> Result<(HatParams, SharpScalings)> {
    match &cfg.chart {
        Chart::Hat(h) => {
            h.validate()?;
            Ok((*h, h.sharp_scalings()))
        }
        Chart::Nondim(n) => hat_and_sharp_params(n),
        Chart::Physical(p) => hat_and_sharp_params(&nondimensionalize(p)?),
    }
}

fn build_grid(spec: &GridSpec) -> Result<Grid> {
    match spec.dim {
        1 => Grid::line(spec.nx, spec.len_x),
        2 => Grid::rect(spec.nx, spec.ny, spec.len_x, spec.len_y),
        d => Err(Error::Domain(format!("grid dimension must be 1 or 2, got {d}"))),
    }
}

fn build_bc(kind: &BoundaryKind) -> BoundarySpec {
    match kind {
        BoundaryKind::NoFlux => BoundarySpec::no_flux(),
        BoundaryKind::Mixed { gamma_faces, q_b, t_b } => {
            BoundarySpec::mixed(gamma_faces, *q_b, *t_b)
        }
    }
}

/// The affine temperature offset the spectral solver works relative to.
fn bc_offsets(kind: &BoundaryKind) -> (f64, f64) {
    match kind {
        BoundaryKind::NoFlux => (0.0, 0.0),
        BoundaryKind::Mixed { q_b, t_b, .. } => (*q_b, *t_b),
    }
}

/// Cell-centered initial state for the grid solver.
fn build_initial(
    cfg: &RunConfig,
    grid: &Grid,
    eps: f64,
    prof: &PlanarProfile,
) -> Result<FieldState> {
    match &cfg.initial {
        InitialSpec::PurePhase { phi, temp } => Ok(FieldState::uniform(grid, *phi, *temp)),
        InitialSpec::Front { position, temp, solid_side } => {
            let mut state = FieldState::uniform(grid, 0.0, *temp);
            let ny = if grid.dim == 1 { 1 } else { grid.ny };
            for j in 0..ny {
                for i in 0..grid.nx {
                    let x = grid.x(i);
                    let z = match solid_side {
                        Side::Left => (x - position) / eps,
                        Side::Right => (position - x) / eps,
                    };
                    state.phi[if grid.dim == 1 { i } else { grid.idx(i, j) }] = prof.phi_at(z);
                }
            }
            Ok(state)
        }
        InitialSpec::Bubble { radius, center_x, center_y, temp } => {
            if grid.dim != 2 {
                return Err(Error::Domain(
                    "initial.kind = bubble needs a 2D grid (set grid.dim = 2)".to_string(),
                ));
            }
            let mut state = FieldState::uniform(grid, 0.0, *temp);
            for j in 0..grid.ny {
                for i in 0..grid.nx {
                    let r = (grid.x(i) - center_x).hypot(grid.y(j) - center_y);
                    state.phi[grid.idx(i, j)] = prof.phi_at((radius - r) / eps);
                }
            }
            Ok(state)
        }
        InitialSpec::File { path } => {
            let (snap_grid, state) = load_snapshot(path)?;
            if snap_grid.cell_count() != grid.cell_count() || snap_grid.dim != grid.dim {
                return Err(Error::Domain(format!(
                    "snapshot grid ({}D, {} cells) does not match grid.* ({}D, {} cells); \
                     drop the grid keys or point at a matching snapshot",
                    snap_grid.dim,
                    snap_grid.cell_count(),
                    grid.dim,
                    grid.cell_count()
                )));
            }
            Ok(state)
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

/// `run`: integrate the coupled system, keep diagnostics and the final state.
pub fn cmd_run(cfg: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let (hat, _) = chart_params(cfg)?;
    let pot = potential(cfg)?;
    let prof = solve_profile_default(pot.as_ref())?;
    let grid = build_grid(&cfg.grid)?;
    let bc = build_bc(&cfg.boundary);
    let initial = build_initial(cfg, &grid, hat.eps, &prof)?;
    let problem =
        Problem { grid: grid.clone(), bc, params: hat, form: cfg.form, potential: pot.clone() };
    let dt = cfg.time.dt.unwrap_or_else(|| default_dt(&grid, &hat, pot.as_ref()));

    let out = run(&problem, initial, dt, cfg.time.t_end, cfg.time.diag_every, |_, _| Ok(()))?;

    let diag_path = out_dir.join("diagnostics.csv");
    save_diagnostics_csv(&diag_path, &out.diagnostics)?;
    let snap_path = out_dir.join("final.snap");
    save_snapshot(&snap_path, &grid, &out.final_state)?;

    let last = out.diagnostics.last().expect("runs always record the initial state");
    println!(
        "run: form={} eps={} dt={dt:e} steps={} diagnostics_rows={}",
        cfg.form.name(),
        hat.eps,
        out.steps,
        out.diagnostics.len()
    );
    println!(
        "final: t={:.6} E={:.16e} E0={:.16e} E1={:.16e} S={:.16e}",
        last.time,
        last.energies.total,
        last.energies.quadratic,
        last.energies.augmented,
        last.energies.entropy
    );
    Ok(vec![diag_path, snap_path])
}

/// `profile`: solve the equilibrium layer and report its surface tension.
pub fn cmd_profile(cfg: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let pot = potential(cfg)?;
    let prof = solve_profile_default(pot.as_ref())?;
    let path = out_dir.join("profile.csv");
    let mut file = BufWriter::new(File::create(&path)?);
    prof.write_columns(&mut file)?;
    file.flush()?;
    println!("potential = {}", cfg.potential);
    println!("sigma0 = {:.16e}", prof.surface_tension);
    Ok(vec![path])
}

/// `sweep`: interface-width sweep of the sharp-interface residuals.
pub fn cmd_sweep(cfg: &RunConfig, out_dir: &Path, jobs: usize) -> Result<Vec<PathBuf>> {
    let (hat, bars) = chart_params(cfg)?;
    let theta = cfg.sweep.theta.unwrap_or(hat.theta);
    let pot = potential(cfg)?;
    let report = eps_sweep(&bars, theta, &pot, &cfg.sweep.eps_list, cfg.sweep.scenario, jobs)?;
    let path = out_dir.join("sweep.csv");
    save_sweep_csv(&path, &report.rows)?;
    for row in &report.rows {
        println!(
            "sweep: eps={} v={:.6e} gt_defect={:.6e} jump_defect={:.6e} truncated={}",
            row.eps, row.v, row.gt_defect, row.jump_defect, row.truncated
        );
    }
    println!("fitted_order = {:.6}", report.fitted_order);
    Ok(vec![path])
}

/// `galerkin`: spectral mode integration on the unit interval.
pub fn cmd_galerkin(cfg: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let (hat, _) = chart_params(cfg)?;
    let pot = potential(cfg)?;
    let grid = build_grid(&cfg.grid)?;
    let bc = build_bc(&cfg.boundary);
    let basis = build_bases(&grid, &bc, cfg.galerkin.n_modes)?;
    let (q_b, t_b) = bc_offsets(&cfg.boundary);

    let prof;
    let m0 = match &cfg.initial {
        InitialSpec::PurePhase { phi, temp } => {
            basis.project(|_| *phi, |x| temp - (t_b + q_b * (1.0 - x)))
        }
        InitialSpec::Front { position, temp, solid_side } => {
            prof = solve_profile_default(pot.as_ref())?;
            let sign = match solid_side {
                Side::Left => 1.0,
                Side::Right => -1.0,
            };
            basis.project(
                |x| prof.phi_at(sign * (x - position) / hat.eps),
                |x| temp - (t_b + q_b * (1.0 - x)),
            )
        }
        other => {
            return Err(Error::Domain(format!(
                "galerkin projects closed-form initial data; initial.kind must be \
                 pure-phase or front, got {other:?}"
            )))
        }
    };

    let dt = cfg.time.dt.unwrap_or_else(|| default_dt(&grid, &hat, pot.as_ref()));
    let traj = integrate_modes(
        &m0,
        &basis,
        pot.as_ref(),
        &hat,
        &bc,
        cfg.form,
        dt,
        cfg.time.t_end,
        cfg.time.diag_every.max(1),
    )?;

    let modes_path = out_dir.join("modes.csv");
    save_mode_csv(&modes_path, &traj)?;
    let last = traj.samples.last().expect("trajectories always hold the initial sample");
    let final_state = basis.reconstruct_state(&last.modes, &bc, &grid)?;
    let snap_path = out_dir.join("final.snap");
    save_snapshot(&snap_path, &grid, &final_state)?;

    println!(
        "galerkin: n_modes={} dt={dt:e} samples={} truncated={} aliasing_warning={}",
        basis.n(),
        traj.samples.len(),
        traj.truncated,
        traj.aliasing_warning
    );
    println!(
        "final: t={:.6} E={:.16e} r_max={:.16e}",
        last.modes.time, last.energies.total, traj.r_max
    );
    Ok(vec![modes_path, snap_path])
}

/// `stefan-compare`: diffuse front vs. the front-tracking reference.
pub fn cmd_stefan_compare(cfg: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let (hat, bars) = chart_params(cfg)?;
    let pot = potential(cfg)?;
    let prof = solve_profile_default(pot.as_ref())?;
    let grid = build_grid(&cfg.grid)?;
    if grid.dim != 1 {
        return Err(Error::Domain(
            "stefan-compare runs planar fronts; set grid.dim = 1".to_string(),
        ));
    }
    let InitialSpec::Front { position, temp, solid_side } = &cfg.initial else {
        return Err(Error::Domain(
            "stefan-compare needs a planar front; set initial.kind = front".to_string(),
        ));
    };
    let bc = build_bc(&cfg.boundary);
    let initial = build_initial(cfg, &grid, hat.eps, &prof)?;
    let problem = Problem {
        grid: grid.clone(),
        bc: bc.clone(),
        params: hat,
        form: cfg.form,
        potential: pot.clone(),
    };
    let dt = cfg.time.dt.unwrap_or_else(|| default_dt(&grid, &hat, pot.as_ref()));
    let sample_every = ((cfg.stefan.sample_dt / dt).round() as usize).max(1);

    let mut samples: Vec<(f64, f64)> = Vec::new();
    run(&problem, initial, dt, cfg.time.t_end, 0, |k, state| {
        if k % sample_every == 0 {
            let geom = locate_interface(&grid, state, prof.anchor, SweepScenario::Planar1d)?;
            if let Some(&x) = geom.positions.first() {
                samples.push((state.time, x));
            }
        }
        Ok(())
    })?;
    if samples.is_empty() {
        return Err(Error::Numerics(
            "the diffuse front left the domain before the first sample".to_string(),
        ));
    }

    let orientation = match solid_side {
        Side::Left => 1.0,
        Side::Right => -1.0,
    };
    let oracle_problem = StefanProblem {
        bars,
        theta: hat.theta,
        sigma0: prof.surface_tension,
        law: cfg.stefan.law,
        len: grid.len_x,
        n_cells: cfg.stefan.n_cells,
        front0: *position,
        t0: *temp,
        bc,
        orientation,
    };
    let dx_oracle = grid.len_x / cfg.stefan.n_cells as f64;
    let dt_oracle = 0.4 * dx_oracle * dx_oracle * bars.beta_bar / bars.delta_bar;
    let oracle_every = ((cfg.stefan.sample_dt / dt_oracle).round() as usize).max(1);
    let traj = stefan_reference_1d(&oracle_problem, cfg.time.t_end, oracle_every)?;

    // Reference position at time t by linear interpolation of the trajectory.
    let oracle_at = |t: f64| -> f64 {
        let k = traj.times.partition_point(|&s| s < t);
        if k == 0 {
            traj.positions[0]
        } else if k == traj.times.len() {
            *traj.positions.last().unwrap()
        } else {
            let (t0, t1) = (traj.times[k - 1], traj.times[k]);
            let w = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
            traj.positions[k - 1] * (1.0 - w) + traj.positions[k] * w
        }
    };
    let max_gap = samples
        .iter()
        .map(|&(t, x)| (x - oracle_at(t)).abs())
        .fold(0.0_f64, f64::max);

    let pde_path = out_dir.join("front_pde.csv");
    let mut text = String::from("time,position\n");
    for &(t, x) in &samples {
        text.push_str(&format!("{t:.16e},{x:.16e}\n"));
    }
    write_text(&pde_path, &text)?;

    let oracle_path = out_dir.join("front_oracle.csv");
    let mut text = String::from("time,position,velocity,T_interface\n");
    for i in 0..traj.times.len() {
        text.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e}\n",
            traj.times[i], traj.positions[i], traj.velocities[i], traj.interface_temps[i]
        ));
    }
    write_text(&oracle_path, &text)?;

    println!(
        "stefan-compare: eps={} law={:?} pde_samples={} oracle_samples={}",
        hat.eps,
        cfg.stefan.law,
        samples.len(),
        traj.times.len()
    );
    println!("max_front_gap = {:.16e} ({:.3} eps)", max_gap, max_gap / hat.eps);
    Ok(vec![pde_path, oracle_path])
}

/// `diagnose`: energy/entropy/front report for a stored snapshot.
pub fn cmd_diagnose(cfg: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let InitialSpec::File { path } = &cfg.initial else {
        return Err(Error::Domain(
            "diagnose inspects a stored state; set initial.kind = file and initial.path"
                .to_string(),
        ));
    };
    let (hat, _) = chart_params(cfg)?;
    let pot = potential(cfg)?;
    let (grid, state) = load_snapshot(path)?;
    let bc = build_bc(&cfg.boundary);
    let problem = Problem {
        grid: grid.clone(),
        bc: bc.clone(),
        params: hat,
        form: cfg.form,
        potential: pot,
    };
    let lifting = match lifting_solution(&grid, &bc) {
        Ok(l) => Some(l),
        Err(Error::Incompatibility(_)) => None,
        Err(e) => return Err(e),
    };
    let rec = diagnostics(&problem, &state, &state, 1.0, lifting.as_deref())?;
    let path = out_dir.join("diagnose.csv");
    save_diagnostics_csv(&path, &[rec.clone()])?;

    let scenario = if grid.dim == 1 { SweepScenario::Planar1d } else { SweepScenario::Radial2d };
    let front = locate_interface(&grid, &state, 0.5, scenario)
        .ok()
        .and_then(|g| g.positions.first().copied());
    println!(
        "diagnose: t={:.6} cells={} E={:.16e} E0={:.16e} E1={:.16e} S={:.16e}",
        state.time,
        grid.cell_count(),
        rec.energies.total,
        rec.energies.quadratic,
        rec.energies.augmented,
        rec.energies.entropy
    );
    println!(
        "production: conduction={:.16e} mobility={:.16e}",
        rec.entropy_prod_conduction, rec.entropy_prod_mobility
    );
    match front {
        Some(x) => println!("front = {x:.16e}"),
        None => println!("front = none"),
    }
    Ok(vec![path])
}
