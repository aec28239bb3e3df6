//! Assembly of the discrete operators of the weak form: velocity mass M,
//! velocity stiffness A, pressure–divergence coupling B, the
//! skew-symmetrized convection matrix C(w), load vectors, and Dirichlet
//! elimination.
//!
//! Velocity matrices are 2N×2N over blocked vector dofs and block
//! diagonal (the forms act componentwise); B has one row per pressure
//! dof with cellwise divergence integrals. C(w) realizes the trilinear
//! form b(w,u,φ) = ½(w·∇u, φ) − ½(w·∇φ, u), which makes C exactly
//! skew-symmetric entrywise so that φᵀC(w)φ vanishes to rounding.

use crate::error::Result;
use crate::fem::{p2_basis_at, DofMap, QuadratureRule};
use crate::mesh::TriMesh;
use crate::sparse::SparseMatrix;

/// Basis values and reference gradients tabulated at quadrature points.
struct BasisTable {
    values: Vec<[f64; 6]>,
    ref_grads: Vec<[[f64; 2]; 6]>,
    weights: Vec<f64>,
}

impl BasisTable {
    fn new(rule: &QuadratureRule) -> BasisTable {
        let mut values = Vec::with_capacity(rule.len());
        let mut ref_grads = Vec::with_capacity(rule.len());
        for &p in &rule.points {
            let (v, g) = p2_basis_at(p);
            values.push(v);
            ref_grads.push(g);
        }
        BasisTable {
            values,
            ref_grads,
            weights: rule.weights.clone(),
        }
    }
}

/// The time-independent operators of the discretization.
#[derive(Clone, Debug)]
pub struct OperatorSet {
    /// Velocity mass matrix, (u, φ); symmetric positive definite.
    pub mass: SparseMatrix,
    /// Velocity stiffness matrix, (∇u, ∇φ); symmetric positive
    /// semidefinite, definite on the non-Dirichlet dofs.
    pub stiffness: SparseMatrix,
    /// Divergence coupling, (χ, ∇·u): pressure rows × velocity columns.
    pub divergence: SparseMatrix,
    /// Transpose of `divergence`, kept for saddle-point composition.
    pub divergence_t: SparseMatrix,
    /// Cell areas (the P0 mass diagonal), for pressure means and norms.
    pub cell_areas: Vec<f64>,
}

/// Skew-symmetric convection operator C(w) for a frozen velocity field w.
#[derive(Clone, Debug)]
pub struct ConvectionOperator {
    pub matrix: SparseMatrix,
}

/// Assemble M, A and B with the supplied quadrature rule (degree 5 makes
/// every polynomial integrand exact).
pub fn assemble_operators(mesh: &TriMesh, dofs: &DofMap, rule: &QuadratureRule) -> OperatorSet {
    let table = BasisTable::new(rule);
    let n = dofs.n_velocity_scalar_dofs;
    let ncells = mesh.n_cells();

    let cap = 2 * 36 * ncells;
    let mut m_rows = Vec::with_capacity(cap);
    let mut m_cols = Vec::with_capacity(cap);
    let mut m_vals = Vec::with_capacity(cap);
    let mut a_vals = Vec::with_capacity(cap);
    let mut b_rows = Vec::with_capacity(12 * ncells);
    let mut b_cols = Vec::with_capacity(12 * ncells);
    let mut b_vals = Vec::with_capacity(12 * ncells);
    let mut cell_areas = Vec::with_capacity(ncells);

    for cell in 0..ncells {
        let geom = mesh.triangle_geometry(cell).expect("valid cell");
        let jit = geom.grad_transform();
        let det = geom.det;
        cell_areas.push(0.5 * det);
        let cd = &dofs.cell_to_velocity_dofs[cell];

        let mut me = [[0.0f64; 6]; 6];
        let mut ke = [[0.0f64; 6]; 6];
        let mut bex = [0.0f64; 6];
        let mut bey = [0.0f64; 6];

        for q in 0..table.weights.len() {
            let w = table.weights[q] * det;
            let vals = &table.values[q];
            let mut grads = [[0.0f64; 2]; 6];
            for i in 0..6 {
                let g = table.ref_grads[q][i];
                grads[i] = [
                    jit[0][0] * g[0] + jit[0][1] * g[1],
                    jit[1][0] * g[0] + jit[1][1] * g[1],
                ];
            }
            for i in 0..6 {
                let wv = w * vals[i];
                for j in 0..6 {
                    me[i][j] += wv * vals[j];
                    ke[i][j] += w * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                }
                bex[i] += w * grads[i][0];
                bey[i] += w * grads[i][1];
            }
        }

        for i in 0..6 {
            let (xi, yi) = (dofs.x_dof(cd[i]), dofs.y_dof(cd[i]));
            for j in 0..6 {
                let (xj, yj) = (dofs.x_dof(cd[j]), dofs.y_dof(cd[j]));
                m_rows.push(xi);
                m_cols.push(xj);
                m_vals.push(me[i][j]);
                a_vals.push(ke[i][j]);
                m_rows.push(yi);
                m_cols.push(yj);
                m_vals.push(me[i][j]);
                a_vals.push(ke[i][j]);
            }
            b_rows.push(cell);
            b_cols.push(xi);
            b_vals.push(bex[i]);
            b_rows.push(cell);
            b_cols.push(yi);
            b_vals.push(bey[i]);
        }
    }

    let mass = SparseMatrix::from_triplets(2 * n, 2 * n, &m_rows, &m_cols, &m_vals)
        .expect("mass triplets in range");
    let stiffness = SparseMatrix::from_triplets(2 * n, 2 * n, &m_rows, &m_cols, &a_vals)
        .expect("stiffness triplets in range");
    let divergence =
        SparseMatrix::from_triplets(dofs.n_pressure_dofs, 2 * n, &b_rows, &b_cols, &b_vals)
            .expect("divergence triplets in range");
    let divergence_t = divergence.transpose();
    OperatorSet {
        mass,
        stiffness,
        divergence,
        divergence_t,
        cell_areas,
    }
}

/// Assemble the convection matrix C(w) from the skew form with the given
/// rule; degree 5 integrates the all-P2 integrand exactly, which is what
/// makes the discrete skew identity hold at rounding level.
pub fn assemble_convection(
    mesh: &TriMesh,
    dofs: &DofMap,
    rule: &QuadratureRule,
    w: &[f64],
) -> Result<ConvectionOperator> {
    let n = dofs.n_velocity_scalar_dofs;
    if w.len() != 2 * n {
        return Err(crate::error::Error::DimensionMismatch(format!(
            "velocity field of length {} vs {} dofs",
            w.len(),
            2 * n
        )));
    }
    let table = BasisTable::new(rule);
    let ncells = mesh.n_cells();
    let cap = 2 * 36 * ncells;
    let mut rows = Vec::with_capacity(cap);
    let mut cols = Vec::with_capacity(cap);
    let mut vals = Vec::with_capacity(cap);

    for cell in 0..ncells {
        let geom = mesh.triangle_geometry(cell).expect("valid cell");
        let jit = geom.grad_transform();
        let det = geom.det;
        let cd = &dofs.cell_to_velocity_dofs[cell];

        let mut ce = [[0.0f64; 6]; 6];
        for q in 0..table.weights.len() {
            let wq = table.weights[q] * det;
            let vals_q = &table.values[q];
            let mut grads = [[0.0f64; 2]; 6];
            for i in 0..6 {
                let g = table.ref_grads[q][i];
                grads[i] = [
                    jit[0][0] * g[0] + jit[0][1] * g[1],
                    jit[1][0] * g[0] + jit[1][1] * g[1],
                ];
            }
            let mut wx = 0.0;
            let mut wy = 0.0;
            for i in 0..6 {
                wx += w[dofs.x_dof(cd[i])] * vals_q[i];
                wy += w[dofs.y_dof(cd[i])] * vals_q[i];
            }
            // w·∇φ_i at this point, for each basis function
            let mut wgrad = [0.0f64; 6];
            for i in 0..6 {
                wgrad[i] = wx * grads[i][0] + wy * grads[i][1];
            }
            for i in 0..6 {
                for j in 0..6 {
                    ce[i][j] += 0.5 * wq * (wgrad[j] * vals_q[i] - wgrad[i] * vals_q[j]);
                }
            }
        }

        for i in 0..6 {
            for j in 0..6 {
                rows.push(dofs.x_dof(cd[i]));
                cols.push(dofs.x_dof(cd[j]));
                vals.push(ce[i][j]);
                rows.push(dofs.y_dof(cd[i]));
                cols.push(dofs.y_dof(cd[j]));
                vals.push(ce[i][j]);
            }
        }
    }

    let matrix = SparseMatrix::from_triplets(2 * n, 2 * n, &rows, &cols, &vals)?;
    Ok(ConvectionOperator { matrix })
}

/// Load vector (f, φ_i) for every velocity basis function; the rule should
/// over-integrate non-polynomial forcings (degree 6 in practice).
pub fn assemble_load(
    mesh: &TriMesh,
    dofs: &DofMap,
    rule: &QuadratureRule,
    f: impl Fn([f64; 2]) -> [f64; 2],
) -> Vec<f64> {
    let table = BasisTable::new(rule);
    let n = dofs.n_velocity_scalar_dofs;
    let mut load = vec![0.0; 2 * n];
    for cell in 0..mesh.n_cells() {
        let geom = mesh.triangle_geometry(cell).expect("valid cell");
        let det = geom.det;
        let cd = &dofs.cell_to_velocity_dofs[cell];
        let mut lx = [0.0f64; 6];
        let mut ly = [0.0f64; 6];
        for q in 0..table.weights.len() {
            let w = table.weights[q] * det;
            let p = geom.to_physical(rule.points[q]);
            let fv = f(p);
            for i in 0..6 {
                lx[i] += w * fv[0] * table.values[q][i];
                ly[i] += w * fv[1] * table.values[q][i];
            }
        }
        for i in 0..6 {
            load[dofs.x_dof(cd[i])] += lx[i];
            load[dofs.y_dof(cd[i])] += ly[i];
        }
    }
    load
}

/// Symmetric elimination of constrained dofs: known values move to the
/// right-hand side, constrained rows become identity rows reproducing the
/// prescribed values exactly.
///
/// `constrained` and `values` are indexed by global row/column of `mat`;
/// the matrix pattern must contain the diagonal of every constrained row.
pub fn apply_dirichlet(
    mat: &mut SparseMatrix,
    rhs: &mut [f64],
    constrained: &[bool],
    values: &[f64],
) {
    let n = mat.nrows();
    assert_eq!(mat.ncols(), n);
    assert_eq!(rhs.len(), n);
    assert_eq!(constrained.len(), n);
    assert_eq!(values.len(), n);
    for r in 0..n {
        if constrained[r] {
            let mut saw_diag = false;
            let (cols, vals) = mat.row_mut(r);
            for (&c, v) in cols.iter().zip(vals.iter_mut()) {
                *v = if c == r {
                    saw_diag = true;
                    1.0
                } else {
                    0.0
                };
            }
            assert!(saw_diag, "constrained row {r} lacks a diagonal entry");
            rhs[r] = values[r];
        } else {
            let (cols, vals) = mat.row_mut(r);
            for (&c, v) in cols.iter().zip(vals.iter_mut()) {
                if constrained[c] {
                    rhs[r] -= *v * values[c];
                    *v = 0.0;
                }
            }
        }
    }
}

/// Velocity Dirichlet mask extended to a system of `n_total` rows
/// (pressure rows are never constrained).
pub fn dirichlet_mask(dofs: &DofMap, n_total: usize) -> Vec<bool> {
    let n = dofs.n_velocity_scalar_dofs;
    let mut mask = vec![false; n_total];
    for d in 0..n {
        if dofs.dirichlet_mask[d] {
            mask[dofs.x_dof(d)] = true;
            mask[dofs.y_dof(d)] = true;
        }
    }
    mask
}

/// Boundary values at the Dirichlet nodes, as a full-length value vector.
pub fn dirichlet_values(
    dofs: &DofMap,
    n_total: usize,
    g: impl Fn([f64; 2]) -> [f64; 2],
) -> Vec<f64> {
    let n = dofs.n_velocity_scalar_dofs;
    let mut values = vec![0.0; n_total];
    for d in 0..n {
        if dofs.dirichlet_mask[d] {
            let v = g(dofs.node_coords[d]);
            values[dofs.x_dof(d)] = v[0];
            values[dofs.y_dof(d)] = v[1];
        }
    }
    values
}
