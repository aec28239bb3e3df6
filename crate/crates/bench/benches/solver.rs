//! Criterion benchmarks for the solver building blocks: operator
//! assembly, the sparse direct solver, and a full backward Euler step.

use criterion::{criterion_group, criterion_main, Criterion};
use kvfem::assembly::{
    apply_dirichlet, assemble_convection, assemble_operators, dirichlet_mask, dirichlet_values,
};
use kvfem::fem::{build_dof_map, quadrature};
use kvfem::mesh::build_structured_unit_square;
use kvfem::problems::manufactured_problem;
use kvfem::sparse::{lu_factor_with_order, ColumnOrdering};
use kvfem::stepper::{
    compose_saddle, ModelParams, NonlinearSolveConfig, Stepper, TimeGrid, PINNED_PRESSURE_DOF,
};
use std::hint::black_box;

fn bench_assembly(c: &mut Criterion) {
    let mesh = build_structured_unit_square(16).unwrap();
    let dofs = build_dof_map(&mesh);
    let rule = quadrature(5).unwrap();
    c.bench_function("assemble_operators_n16", |b| {
        b.iter(|| black_box(assemble_operators(&mesh, &dofs, &rule)))
    });
    let w = dofs.interpolate_velocity(|p| [p[1], -p[0]]);
    c.bench_function("assemble_convection_n16", |b| {
        b.iter(|| black_box(assemble_convection(&mesh, &dofs, &rule, &w).unwrap()))
    });
}

fn saddle(n: usize) -> kvfem::SparseMatrix {
    let mesh = build_structured_unit_square(n).unwrap();
    let dofs = build_dof_map(&mesh);
    let ops = assemble_operators(&mesh, &dofs, &quadrature(5).unwrap());
    let w = dofs.interpolate_velocity(|p| [p[1], -p[0]]);
    let conv = assemble_convection(&mesh, &dofs, &quadrature(5).unwrap(), &w).unwrap();
    let nsys = dofs.n_velocity_vector_dofs() + dofs.n_pressure_dofs;
    let mut mat = compose_saddle(
        &ops,
        &conv.matrix,
        1.0,
        1.0,
        (n * n) as f64,
        PINNED_PRESSURE_DOF,
    );
    let mask = dirichlet_mask(&dofs, nsys);
    let g = dirichlet_values(&dofs, nsys, |_| [0.0, 0.0]);
    let mut rhs = vec![0.0; nsys];
    apply_dirichlet(&mut mat, &mut rhs, &mask, &g);
    mat
}

fn bench_sparse(c: &mut Criterion) {
    let mat = saddle(16);
    c.bench_function("min_degree_saddle_n16", |b| {
        b.iter(|| black_box(ColumnOrdering::min_degree(&mat)))
    });
    let ord = ColumnOrdering::min_degree(&mat);
    c.bench_function("lu_factor_saddle_n16", |b| {
        b.iter(|| black_box(lu_factor_with_order(&mat, &ord).unwrap()))
    });
    let mut factors = lu_factor_with_order(&mat, &ord).unwrap();
    c.bench_function("lu_refactor_saddle_n16", |b| {
        b.iter(|| factors.refactor(&mat).unwrap())
    });
    let rhs = vec![1.0; mat.nrows()];
    c.bench_function("lu_solve_saddle_n16", |b| {
        b.iter(|| black_box(factors.solve(&rhs).unwrap()))
    });
}

fn bench_step(c: &mut Criterion) {
    let mesh = build_structured_unit_square(16).unwrap();
    let dofs = build_dof_map(&mesh);
    let ops = assemble_operators(&mesh, &dofs, &quadrature(5).unwrap());
    let problem = manufactured_problem();
    let grid = TimeGrid::new(1.0, 256).unwrap();
    let mut stepper = Stepper::new(
        &mesh,
        &dofs,
        &ops,
        &problem,
        ModelParams {
            kappa: 1.0,
            nu: 1.0,
        },
        grid,
        NonlinearSolveConfig::default(),
    );
    let s0 = stepper.initial_state().unwrap();
    // warm the factor cache so the bench measures the steady-state step
    let (s1, _) = stepper.backward_euler_step(&s0).unwrap();
    c.bench_function("backward_euler_step_n16", |b| {
        b.iter(|| black_box(stepper.backward_euler_step(&s1).unwrap()))
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_assembly, bench_sparse, bench_step
}
criterion_main!(benches);
