//! Drivers for the four experiments exposed by the binary.

use crate::config::{kappa_label, ProblemKind, RunConfig};
use kvfem::analysis::{convergence_study, energy_history, steady_state_gap, RateTable};
use kvfem::assembly::{assemble_operators, OperatorSet};
use kvfem::fem::{build_dof_map, quadrature, DofMap};
use kvfem::io::{
    write_energy_csv, write_gap_csv, write_rate_table_csv, write_vtk_legacy, FieldSnapshot,
};
use kvfem::mesh::{build_structured_unit_square, TriMesh};
use kvfem::problems::{cavity_problem, decay_problem, manufactured_problem, ProblemDefinition};
use kvfem::stepper::{ModelParams, NonlinearSolveConfig, State, Stepper, Trajectory};
use std::error::Error;
use std::path::Path;

type DynResult<T> = Result<T, Box<dyn Error + Send + Sync>>;

fn solver_config(cfg: &RunConfig) -> NonlinearSolveConfig {
    NonlinearSolveConfig {
        picard_tol: cfg.picard_tol,
        max_iters: cfg.max_iters,
    }
}

struct Discretization {
    mesh: TriMesh,
    dofs: DofMap,
    ops: OperatorSet,
}

fn discretize(n: usize) -> DynResult<Discretization> {
    let mesh = build_structured_unit_square(n)?;
    let dofs = build_dof_map(&mesh);
    let ops = assemble_operators(&mesh, &dofs, &quadrature(5)?);
    Ok(Discretization { mesh, dofs, ops })
}

fn run_problem(
    disc: &Discretization,
    problem: &ProblemDefinition,
    params: ModelParams,
    cfg: &RunConfig,
    n: usize,
) -> DynResult<Trajectory> {
    let grid = cfg.k_rule.grid(n, cfg.t_final)?;
    let mut stepper = Stepper::new(
        &disc.mesh,
        &disc.dofs,
        &disc.ops,
        problem,
        params,
        grid,
        solver_config(cfg),
    );
    Ok(stepper.run()?)
}

fn write_snapshot(disc: &Discretization, state: &State, path: &Path) -> DynResult<()> {
    write_vtk_legacy(
        &FieldSnapshot {
            mesh: &disc.mesh,
            dofs: &disc.dofs,
            velocity: &state.velocity,
            pressure: &state.pressure,
            time: state.time,
        },
        path,
    )?;
    Ok(())
}

/// Convergence-rate tables of the manufactured problem over (h, κ).
pub fn convergence(cfg: &RunConfig, out: &Path) -> DynResult<()> {
    let mut v_l2: Vec<(String, RateTable)> = Vec::new();
    let mut v_h1: Vec<(String, RateTable)> = Vec::new();
    let mut p_l2: Vec<(String, RateTable)> = Vec::new();
    for &kappa in &cfg.kappa_list {
        let study = convergence_study(
            &cfg.h_list,
            kappa,
            cfg.nu,
            cfg.k_rule,
            cfg.t_final,
            solver_config(cfg),
        )?;
        let label = kappa_label(kappa);
        for row in &study.velocity_l2.rows {
            match row.rate {
                Some(rate) => println!(
                    "convergence kappa={label} h=1/{}: velocity_l2_err={:.6e} rate={:.6}",
                    row.n, row.error, rate
                ),
                None => println!(
                    "convergence kappa={label} h=1/{}: velocity_l2_err={:.6e}",
                    row.n, row.error
                ),
            }
        }
        v_l2.push((label.clone(), study.velocity_l2));
        v_h1.push((label.clone(), study.velocity_h1));
        p_l2.push((label, study.pressure_l2));
    }
    write_rate_table_csv(&v_l2, &out.join("velocity_l2_rates.csv"))?;
    write_rate_table_csv(&v_h1, &out.join("velocity_h1_rates.csv"))?;
    write_rate_table_csv(&p_l2, &out.join("pressure_l2_rates.csv"))?;
    Ok(())
}

/// Force-free decay: energy histories for each κ plus the κ = 0 reference
/// on the same grid, with final snapshots.
pub fn decay(cfg: &RunConfig, out: &Path) -> DynResult<()> {
    let n = cfg.h_list[0];
    let disc = discretize(n)?;
    let problem = decay_problem();
    let mut kappas = cfg.kappa_list.clone();
    if !kappas.contains(&0.0) {
        kappas.push(0.0);
    }
    for &kappa in &kappas {
        let params = ModelParams::new(kappa, cfg.nu)?;
        let traj = run_problem(&disc, &problem, params, cfg, n)?;
        let label = kappa_label(kappa);
        let series = energy_history(&traj, kappa);
        write_energy_csv(&series, &out.join(format!("energy_k{label}.csv")))?;
        write_snapshot(
            &disc,
            &traj.final_state,
            &out.join(format!("decay_k{label}.vtk")),
        )?;
        let last = series.last().expect("nonempty series");
        println!("decay kappa={label}: kinetic(T)={:e}", last.1);
    }
    Ok(())
}

/// Lid-driven cavity: gap of each κ run against the κ = 0 steady state.
pub fn cavity(cfg: &RunConfig, out: &Path) -> DynResult<()> {
    let n = cfg.h_list[0];
    let disc = discretize(n)?;
    let problem = cavity_problem();
    let grid = cfg.k_rule.grid(n, cfg.t_final)?;

    // Reference: Navier-Stokes (κ = 0) run to T, certified stationary.
    let reference = {
        let params = ModelParams::new(0.0, cfg.nu)?;
        let mut stepper = Stepper::new(
            &disc.mesh,
            &disc.dofs,
            &disc.ops,
            &problem,
            params,
            grid,
            solver_config(cfg),
        );
        let mut state = stepper.initial_state()?;
        let mut previous = state.velocity.clone();
        for _ in 0..grid.n_steps {
            previous.copy_from_slice(&state.velocity);
            let (next, _) = stepper.backward_euler_step(&state)?;
            state = next;
        }
        let defect = steady_state_gap(&disc.ops.mass, &state.velocity, &previous)? / grid.k;
        if defect > 1e-8 {
            return Err(format!(
                "reference Navier-Stokes run is not stationary at T={}: defect {defect:.3e}",
                cfg.t_final
            )
            .into());
        }
        println!("cavity reference: stationarity_defect={defect:e}");
        write_snapshot(&disc, &state, &out.join("cavity_k0_steady.vtk"))?;
        state
    };

    let mut gaps = Vec::new();
    for &kappa in &cfg.kappa_list {
        let params = ModelParams::new(kappa, cfg.nu)?;
        let traj = run_problem(&disc, &problem, params, cfg, n)?;
        let gap = steady_state_gap(
            &disc.ops.mass,
            &traj.final_state.velocity,
            &reference.velocity,
        )?;
        let label = kappa_label(kappa);
        println!("cavity kappa={label}: gap={gap:e}");
        write_snapshot(
            &disc,
            &traj.final_state,
            &out.join(format!("cavity_k{label}.vtk")),
        )?;
        gaps.push((label, gap));
    }
    write_gap_csv(&gaps, &out.join("cavity_gaps.csv"))?;
    Ok(())
}

/// One run of one problem, ending in a snapshot at T.
pub fn single(cfg: &RunConfig, out: &Path) -> DynResult<()> {
    let n = cfg.h_list[0];
    let disc = discretize(n)?;
    let problem = match cfg.problem {
        ProblemKind::Manufactured => manufactured_problem(),
        ProblemKind::Decay => decay_problem(),
        ProblemKind::Cavity => cavity_problem(),
    };
    let params = ModelParams::new(cfg.kappa_list[0], cfg.nu)?;
    let traj = run_problem(&disc, &problem, params, cfg, n)?;
    if problem.exact_velocity.is_some() {
        let report =
            kvfem::analysis::error_norms(&disc.mesh, &disc.dofs, &traj.final_state, &problem)?;
        println!(
            "single {}: l2={:.6e} h1={:.6e} p={:.6e}",
            problem.name, report.l2_velocity, report.h1_velocity, report.l2_pressure
        );
    } else {
        println!(
            "single {}: kinetic(T)={:e}",
            problem.name,
            traj.steps.last().expect("nonempty").kinetic
        );
    }
    write_snapshot(
        &disc,
        &traj.final_state,
        &out.join(format!("single_{}.vtk", problem.name)),
    )?;
    Ok(())
}
