//! The three benchmark problems: a manufactured solution with closed-form
//! forcing, force-free decay of the same initial field, and the lid-driven
//! cavity.
//!
//! The manufactured velocity is
//!
//!   u₁ =  10 x²(x−1)² y(y−1)(2y−1) cos t
//!   u₂ = −10 y²(y−1)² x(x−1)(2x−1) cos t
//!
//! which is pointwise divergence-free and vanishes on ∂Ω. The sign of u₂
//! is forced by incompressibility. The pressure 40xy cos t is stored
//! mean-shifted to (40xy − 10) cos t, the zero-mean representative the
//! discrete pressure converges to. The forcing
//! f = u_t + (u·∇)u − κΔu_t − νΔu + ∇p is evaluated from hand-derived
//! partial derivatives and depends on (κ, ν) at evaluation time.

use crate::stepper::ModelParams;

pub type InitialFn = fn([f64; 2]) -> [f64; 2];
pub type VelocityFn = fn([f64; 2], f64) -> [f64; 2];
/// Velocity gradient: rows are components, columns (∂x, ∂y).
pub type VelocityGradFn = fn([f64; 2], f64) -> [[f64; 2]; 2];
pub type PressureFn = fn([f64; 2], f64) -> f64;
pub type ForcingFn = fn([f64; 2], f64, &ModelParams) -> [f64; 2];

/// Initial data, boundary data, forcing and (when known) exact fields for
/// one experiment.
#[derive(Clone)]
pub struct ProblemDefinition {
    pub name: &'static str,
    pub initial_velocity: InitialFn,
    /// Dirichlet data on ∂Ω as a function of position and time.
    pub boundary_values: VelocityFn,
    pub forcing: ForcingFn,
    pub exact_velocity: Option<VelocityFn>,
    pub exact_velocity_gradient: Option<VelocityGradFn>,
    pub exact_pressure: Option<PressureFn>,
    /// Suggested (κ, ν) for single runs.
    pub params_hint: ModelParams,
    /// Suggested final time.
    pub t_final_hint: f64,
}

// Building blocks of the manufactured fields.
// ff(x) = x²(x−1)², gg(x) = x(x−1)(2x−1) = ff'(x)/2.
fn ff(x: f64) -> f64 {
    let d = x - 1.0;
    x * x * d * d
}
fn ff2(x: f64) -> f64 {
    // ff''
    12.0 * x * x - 12.0 * x + 2.0
}
fn gg(x: f64) -> f64 {
    x * (x - 1.0) * (2.0 * x - 1.0)
}
fn gg1(x: f64) -> f64 {
    6.0 * x * x - 6.0 * x + 1.0
}
fn gg2(x: f64) -> f64 {
    12.0 * x - 6.0
}

fn exact_velocity_space(p: [f64; 2]) -> [f64; 2] {
    let [x, y] = p;
    [10.0 * ff(x) * gg(y), -10.0 * ff(y) * gg(x)]
}

fn manufactured_velocity(p: [f64; 2], t: f64) -> [f64; 2] {
    let s = exact_velocity_space(p);
    [s[0] * t.cos(), s[1] * t.cos()]
}

fn manufactured_velocity_gradient(p: [f64; 2], t: f64) -> [[f64; 2]; 2] {
    let [x, y] = p;
    let c = t.cos();
    [
        [20.0 * gg(x) * gg(y) * c, 10.0 * ff(x) * gg1(y) * c],
        [-10.0 * ff(y) * gg1(x) * c, -20.0 * gg(y) * gg(x) * c],
    ]
}

fn manufactured_pressure(p: [f64; 2], t: f64) -> f64 {
    (40.0 * p[0] * p[1] - 10.0) * t.cos()
}

fn manufactured_forcing(p: [f64; 2], t: f64, params: &ModelParams) -> [f64; 2] {
    let [x, y] = p;
    let (c, s) = (t.cos(), t.sin());

    let u1 = 10.0 * ff(x) * gg(y) * c;
    let u2 = -10.0 * ff(y) * gg(x) * c;
    let du1_dx = 20.0 * gg(x) * gg(y) * c;
    let du1_dy = 10.0 * ff(x) * gg1(y) * c;
    let du2_dx = -10.0 * ff(y) * gg1(x) * c;
    let du2_dy = -20.0 * gg(y) * gg(x) * c;

    let lap1_space = 10.0 * (ff2(x) * gg(y) + ff(x) * gg2(y));
    let lap2_space = -10.0 * (ff(y) * gg2(x) + ff2(y) * gg(x));

    let u1_t = -10.0 * ff(x) * gg(y) * s;
    let u2_t = 10.0 * ff(y) * gg(x) * s;
    let lap1_t = -lap1_space * s;
    let lap2_t = -lap2_space * s;

    let conv1 = u1 * du1_dx + u2 * du1_dy;
    let conv2 = u1 * du2_dx + u2 * du2_dy;

    let dp_dx = 40.0 * y * c;
    let dp_dy = 40.0 * x * c;

    [
        u1_t + conv1 - params.kappa * lap1_t - params.nu * lap1_space * c + dp_dx,
        u2_t + conv2 - params.kappa * lap2_t - params.nu * lap2_space * c + dp_dy,
    ]
}

fn zero_initial(_p: [f64; 2]) -> [f64; 2] {
    [0.0, 0.0]
}

fn zero_boundary(_p: [f64; 2], _t: f64) -> [f64; 2] {
    [0.0, 0.0]
}

fn zero_forcing(_p: [f64; 2], _t: f64, _params: &ModelParams) -> [f64; 2] {
    [0.0, 0.0]
}

fn lid_boundary(p: [f64; 2], _t: f64) -> [f64; 2] {
    // Discontinuous-lid convention: the corners belong to the lid.
    if p[1] >= 1.0 {
        [1.0, 0.0]
    } else {
        [0.0, 0.0]
    }
}

/// Manufactured solution with time-harmonic amplitude; exact fields
/// attached, forcing in closed form.
pub fn manufactured_problem() -> ProblemDefinition {
    ProblemDefinition {
        name: "manufactured",
        initial_velocity: exact_velocity_space,
        boundary_values: manufactured_velocity,
        forcing: manufactured_forcing,
        exact_velocity: Some(manufactured_velocity),
        exact_velocity_gradient: Some(manufactured_velocity_gradient),
        exact_pressure: Some(manufactured_pressure),
        params_hint: ModelParams {
            kappa: 1.0,
            nu: 1.0,
        },
        t_final_hint: 1.0,
    }
}

/// Force-free decay: the manufactured initial field released with f ≡ 0
/// and homogeneous boundary values.
pub fn decay_problem() -> ProblemDefinition {
    ProblemDefinition {
        name: "decay",
        initial_velocity: exact_velocity_space,
        boundary_values: zero_boundary,
        forcing: zero_forcing,
        exact_velocity: None,
        exact_velocity_gradient: None,
        exact_pressure: None,
        params_hint: ModelParams {
            kappa: 1.0,
            nu: 1.0,
        },
        t_final_hint: 4.0,
    }
}

/// Lid-driven cavity: no-slip walls, unit lid velocity (1, 0) on y = 1.
pub fn cavity_problem() -> ProblemDefinition {
    ProblemDefinition {
        name: "cavity",
        initial_velocity: zero_initial,
        boundary_values: lid_boundary,
        forcing: zero_forcing,
        exact_velocity: None,
        exact_velocity_gradient: None,
        exact_pressure: None,
        params_hint: ModelParams {
            kappa: 1.0,
            nu: 1.0,
        },
        t_final_hint: 40.0,
    }
}
