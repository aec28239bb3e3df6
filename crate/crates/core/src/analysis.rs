//! Error norms against exact solutions, convergence-rate tables, and the
//! diagnostic series behind the decay and cavity experiments.

use crate::assembly::{assemble_operators, OperatorSet};
use crate::error::{Error, Result};
use crate::fem::{build_dof_map, p2_basis_at, quadrature, DofMap};
use crate::mesh::{build_structured_unit_square, TriMesh};
use crate::problems::{manufactured_problem, ProblemDefinition};
use crate::sparse::SparseMatrix;
use crate::stepper::{ModelParams, NonlinearSolveConfig, State, StepRule, Stepper, Trajectory};
use rayon::prelude::*;

/// Discretization errors at one time level, measured with the degree-6
/// rule; the pressure error compares zero-mean representatives.
#[derive(Clone, Copy, Debug)]
pub struct ErrorReport {
    /// ‖u(t) − U‖_L²
    pub l2_velocity: f64,
    /// ‖∇(u(t) − U)‖_L²
    pub h1_velocity: f64,
    /// ‖p(t) − P‖_L², both fields mean-shifted
    pub l2_pressure: f64,
}

/// Errors and rates over a sequence of meshes; rate_i = log₂(e_{i−1}/e_i).
#[derive(Clone, Debug)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
}

#[derive(Clone, Copy, Debug)]
pub struct RateRow {
    /// Cells per side (h = 1/n).
    pub n: usize,
    pub error: f64,
    /// Undefined on the first row.
    pub rate: Option<f64>,
}

impl RateTable {
    pub fn from_errors(ns: &[usize], errors: &[f64]) -> RateTable {
        assert_eq!(ns.len(), errors.len());
        let rows = ns
            .iter()
            .zip(errors)
            .enumerate()
            .map(|(i, (&n, &error))| RateRow {
                n,
                error,
                rate: (i > 0).then(|| (errors[i - 1] / error).log2()),
            })
            .collect();
        RateTable { rows }
    }

    /// Rate on the finest mesh pair.
    pub fn final_rate(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.rate)
    }

    pub fn rates(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.rate).collect()
    }
}

/// Evaluate L²/H¹ velocity errors and the L² pressure error of a state
/// against the problem's exact fields at the state's time.
pub fn error_norms(
    mesh: &TriMesh,
    dofs: &DofMap,
    state: &State,
    problem: &ProblemDefinition,
) -> Result<ErrorReport> {
    let exact_u = problem
        .exact_velocity
        .ok_or_else(|| Error::MissingExactSolution(problem.name.into()))?;
    let exact_grad = problem
        .exact_velocity_gradient
        .ok_or_else(|| Error::MissingExactSolution(problem.name.into()))?;
    let exact_p = problem
        .exact_pressure
        .ok_or_else(|| Error::MissingExactSolution(problem.name.into()))?;
    let t = state.time;
    let rule = quadrature(6).expect("degree 6 supported");
    let ns = dofs.n_velocity_scalar_dofs;

    // Zero-mean representatives of both pressures.
    let mut area_total = 0.0;
    let mut p_exact_mean = 0.0;
    let mut p_disc_mean = 0.0;
    for cell in 0..mesh.n_cells() {
        let geom = mesh.triangle_geometry(cell)?;
        let area = 0.5 * geom.det;
        area_total += area;
        p_disc_mean += area * state.pressure[cell];
        for (&pt, &w) in rule.points.iter().zip(&rule.weights) {
            p_exact_mean += w * geom.det * exact_p(geom.to_physical(pt), t);
        }
    }
    p_exact_mean /= area_total;
    p_disc_mean /= area_total;

    let mut l2 = 0.0;
    let mut h1 = 0.0;
    let mut lp = 0.0;
    for cell in 0..mesh.n_cells() {
        let geom = mesh.triangle_geometry(cell)?;
        let jit = geom.grad_transform();
        let cd = &dofs.cell_to_velocity_dofs[cell];
        let p_disc = state.pressure[cell] - p_disc_mean;
        for (&pt, &w) in rule.points.iter().zip(&rule.weights) {
            let (vals, ref_grads) = p2_basis_at(pt);
            let phys = geom.to_physical(pt);
            let mut uh = [0.0f64; 2];
            let mut guh = [[0.0f64; 2]; 2];
            for i in 0..6 {
                let gx = jit[0][0] * ref_grads[i][0] + jit[0][1] * ref_grads[i][1];
                let gy = jit[1][0] * ref_grads[i][0] + jit[1][1] * ref_grads[i][1];
                let cx = state.velocity[cd[i]];
                let cy = state.velocity[ns + cd[i]];
                uh[0] += cx * vals[i];
                uh[1] += cy * vals[i];
                guh[0][0] += cx * gx;
                guh[0][1] += cx * gy;
                guh[1][0] += cy * gx;
                guh[1][1] += cy * gy;
            }
            let ue = exact_u(phys, t);
            let ge = exact_grad(phys, t);
            let wq = w * geom.det;
            l2 += wq * ((uh[0] - ue[0]).powi(2) + (uh[1] - ue[1]).powi(2));
            for c in 0..2 {
                for d in 0..2 {
                    h1 += wq * (guh[c][d] - ge[c][d]).powi(2);
                }
            }
            let pe = exact_p(phys, t) - p_exact_mean;
            lp += wq * (p_disc - pe).powi(2);
        }
    }
    Ok(ErrorReport {
        l2_velocity: l2.sqrt(),
        h1_velocity: h1.sqrt(),
        l2_pressure: lp.sqrt(),
    })
}

/// Result of one manufactured-solution run.
#[derive(Clone, Copy, Debug)]
pub struct SingleRun {
    pub n: usize,
    pub report: ErrorReport,
    pub max_div_residual: f64,
    pub max_picard_iters: usize,
}

/// Run the manufactured problem on an n×n mesh and measure final-time
/// errors.
pub fn manufactured_run(
    n: usize,
    params: ModelParams,
    k_rule: StepRule,
    t_final: f64,
    config: NonlinearSolveConfig,
) -> Result<SingleRun> {
    let problem = manufactured_problem();
    let mesh = build_structured_unit_square(n)?;
    let dofs = build_dof_map(&mesh);
    let ops = assemble_operators(&mesh, &dofs, &quadrature(5).expect("supported"));
    let grid = k_rule.grid(n, t_final)?;
    let mut stepper = Stepper::new(&mesh, &dofs, &ops, &problem, params, grid, config);
    let traj = stepper.run()?;
    let report = error_norms(&mesh, &dofs, &traj.final_state, &problem)?;
    Ok(SingleRun {
        n,
        report,
        max_div_residual: traj.max_div_residual(),
        max_picard_iters: traj.max_picard_iters(),
    })
}

/// Convergence study of the manufactured problem over a mesh sequence.
#[derive(Clone, Debug)]
pub struct ConvergenceStudy {
    pub velocity_l2: RateTable,
    pub velocity_h1: RateTable,
    pub pressure_l2: RateTable,
    pub runs: Vec<SingleRun>,
}

/// Run the manufactured problem at every mesh in `h_list` (given as cell
/// counts, h = 1/n) and tabulate final-time errors and rates. Independent
/// runs execute concurrently.
pub fn convergence_study(
    h_list: &[usize],
    kappa: f64,
    nu: f64,
    k_rule: StepRule,
    t_final: f64,
    config: NonlinearSolveConfig,
) -> Result<ConvergenceStudy> {
    let params = ModelParams::new(kappa, nu)?;
    let runs: Vec<SingleRun> = h_list
        .par_iter()
        .map(|&n| manufactured_run(n, params, k_rule, t_final, config))
        .collect::<Result<_>>()?;
    let ns: Vec<usize> = runs.iter().map(|r| r.n).collect();
    let pick =
        |f: fn(&ErrorReport) -> f64| -> Vec<f64> { runs.iter().map(|r| f(&r.report)).collect() };
    Ok(ConvergenceStudy {
        velocity_l2: RateTable::from_errors(&ns, &pick(|r| r.l2_velocity)),
        velocity_h1: RateTable::from_errors(&ns, &pick(|r| r.h1_velocity)),
        pressure_l2: RateTable::from_errors(&ns, &pick(|r| r.l2_pressure)),
        runs,
    })
}

/// Per-step energy series (t, ‖U‖², κ‖∇U‖²) of a trajectory.
pub fn energy_history(traj: &Trajectory, kappa: f64) -> Vec<(f64, f64, f64)> {
    traj.steps
        .iter()
        .map(|s| (s.time, s.kinetic, kappa * s.gradient))
        .collect()
}

/// L² (mass-norm) distance between two velocity coefficient vectors.
pub fn steady_state_gap(mass: &SparseMatrix, a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() != mass.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "states of lengths {} and {} against mass of size {}",
            a.len(),
            b.len(),
            mass.nrows()
        )));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    Ok(mass.bilinear(&d, &d).max(0.0).sqrt())
}

/// Stationarity defect ‖U(T) − U(T−k)‖ / k of the last step of a run,
/// used to certify a steady reference state.
pub fn stationarity_defect(
    ops: &OperatorSet,
    last: &State,
    second_last: &[f64],
    k: f64,
) -> Result<f64> {
    Ok(steady_state_gap(&ops.mass, &last.velocity, second_last)? / k)
}
