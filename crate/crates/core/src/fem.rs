//! Reference-element machinery for the P2–P0 pair: quadratic Lagrange
//! basis on the reference triangle, symmetric Gauss quadrature rules, and
//! global degree-of-freedom numbering.
//!
//! Scalar velocity dofs live at mesh vertices followed by edge midpoints;
//! vector dofs are stored blocked (all x-components, then all
//! y-components), so the saddle-point block structure stays explicit.
//! Pressure dofs are one constant per cell.

use crate::error::{Error, Result};
use crate::mesh::TriMesh;

/// Local node order on the reference triangle: vertices v0, v1, v2, then
/// the midpoints of (v0,v1), (v1,v2), (v2,v0).
pub const P2_NODES: [[f64; 2]; 6] = [
    [0.0, 0.0],
    [1.0, 0.0],
    [0.0, 1.0],
    [0.5, 0.0],
    [0.5, 0.5],
    [0.0, 0.5],
];

/// Values and reference gradients of the six P2 basis functions at a point
/// of the closed reference triangle.
pub fn p2_basis_at(xi: [f64; 2]) -> ([f64; 6], [[f64; 2]; 6]) {
    let (x, y) = (xi[0], xi[1]);
    let l0 = 1.0 - x - y;
    let (l1, l2) = (x, y);
    let values = [
        l0 * (2.0 * l0 - 1.0),
        l1 * (2.0 * l1 - 1.0),
        l2 * (2.0 * l2 - 1.0),
        4.0 * l0 * l1,
        4.0 * l1 * l2,
        4.0 * l2 * l0,
    ];
    // ∇λ0 = (−1,−1), ∇λ1 = (1,0), ∇λ2 = (0,1)
    let g0 = 4.0 * l0 - 1.0;
    let g1 = 4.0 * l1 - 1.0;
    let g2 = 4.0 * l2 - 1.0;
    let gradients = [
        [-g0, -g0],
        [g1, 0.0],
        [0.0, g2],
        [4.0 * (l0 - l1), -4.0 * l1],
        [4.0 * l2, 4.0 * l1],
        [-4.0 * l2, 4.0 * (l0 - l2)],
    ];
    (values, gradients)
}

/// Quadrature rule on the reference triangle.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    /// Reference coordinates of the quadrature points.
    pub points: Vec<[f64; 2]>,
    /// Positive weights summing to the reference-triangle area 1/2.
    pub weights: Vec<f64>,
    /// Highest total polynomial degree integrated exactly.
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

// Pushes the three points with barycentric coordinates perm(a, b, b).
fn push_group3(pts: &mut Vec<[f64; 2]>, ws: &mut Vec<f64>, a: f64, b: f64, w: f64) {
    pts.push([b, b]);
    pts.push([a, b]);
    pts.push([b, a]);
    ws.extend_from_slice(&[0.5 * w; 3]);
}

// Pushes the six points with barycentric coordinates perm(a, b, c).
fn push_group6(pts: &mut Vec<[f64; 2]>, ws: &mut Vec<f64>, a: f64, b: f64, c: f64, w: f64) {
    for p in [[b, c], [c, b], [a, c], [c, a], [a, b], [b, a]] {
        pts.push(p);
    }
    ws.extend_from_slice(&[0.5 * w; 6]);
}

/// Fixed symmetric Gauss rules of at least the requested degree.
/// Supported requests: 2 through 6. Degree 5 (7 points) is the default
/// for operator assembly, degree 6 (12 points) for load vectors and
/// error norms.
pub fn quadrature(degree: usize) -> Result<QuadratureRule> {
    let mut pts = Vec::new();
    let mut ws = Vec::new();
    let actual = match degree {
        2 => {
            let third = 1.0 / 3.0;
            push_group3(&mut pts, &mut ws, 2.0 * third, 1.0 / 6.0, third);
            2
        }
        3 | 4 => {
            push_group3(
                &mut pts,
                &mut ws,
                0.816_847_572_980_459,
                0.091_576_213_509_771,
                0.109_951_743_655_322,
            );
            push_group3(
                &mut pts,
                &mut ws,
                0.108_103_018_168_070,
                0.445_948_490_915_965,
                0.223_381_589_678_011,
            );
            4
        }
        5 => {
            pts.push([1.0 / 3.0, 1.0 / 3.0]);
            ws.push(0.5 * 0.225);
            push_group3(
                &mut pts,
                &mut ws,
                0.059_715_871_789_770,
                0.470_142_064_105_115,
                0.132_394_152_788_506,
            );
            push_group3(
                &mut pts,
                &mut ws,
                0.797_426_985_353_087,
                0.101_286_507_323_456,
                0.125_939_180_544_827,
            );
            5
        }
        6 => {
            push_group3(
                &mut pts,
                &mut ws,
                0.873_821_971_016_996,
                0.063_089_014_491_502,
                0.050_844_906_370_207,
            );
            push_group3(
                &mut pts,
                &mut ws,
                0.501_426_509_658_179,
                0.249_286_745_170_910,
                0.116_786_275_726_379,
            );
            push_group6(
                &mut pts,
                &mut ws,
                0.636_502_499_121_399,
                0.310_352_451_033_785,
                0.053_145_049_844_816,
                0.082_851_075_618_374,
            );
            6
        }
        other => {
            return Err(Error::InvalidParameter(format!(
                "unsupported quadrature degree {other} (supported: 2..=6)"
            )))
        }
    };
    Ok(QuadratureRule {
        points: pts,
        weights: ws,
        degree: actual,
    })
}

/// Global dof numbering for the P2 velocity / P0 pressure pair.
#[derive(Clone, Debug)]
pub struct DofMap {
    /// Scalar P2 dofs: #vertices + #edges.
    pub n_velocity_scalar_dofs: usize,
    /// One dof per cell.
    pub n_pressure_dofs: usize,
    /// Per cell, the six scalar dof indices (3 vertices, 3 edge midpoints)
    /// in the reference node order.
    pub cell_to_velocity_dofs: Vec<[usize; 6]>,
    /// True for scalar dofs whose node lies on ∂Ω.
    pub dirichlet_mask: Vec<bool>,
    /// Physical coordinates of each scalar dof's node.
    pub node_coords: Vec<[f64; 2]>,
}

/// Deterministic numbering: vertex dofs first (mesh order), then edge
/// midpoint dofs (mesh edge order).
pub fn build_dof_map(mesh: &TriMesh) -> DofMap {
    let nv = mesh.n_vertices();
    let n_scalar = nv + mesh.n_edges();

    let mut cell_to_velocity_dofs = Vec::with_capacity(mesh.n_cells());
    for cell in 0..mesh.n_cells() {
        let t = mesh.triangles[cell];
        let e = mesh.cell_edges[cell];
        cell_to_velocity_dofs.push([t[0], t[1], t[2], nv + e[0], nv + e[1], nv + e[2]]);
    }

    let mut node_coords = Vec::with_capacity(n_scalar);
    node_coords.extend_from_slice(&mesh.vertices);
    for e in 0..mesh.n_edges() {
        node_coords.push(mesh.edge_midpoint(e));
    }

    let dirichlet_mask = node_coords
        .iter()
        .map(|&p| TriMesh::on_boundary(p))
        .collect();

    DofMap {
        n_velocity_scalar_dofs: n_scalar,
        n_pressure_dofs: mesh.n_cells(),
        cell_to_velocity_dofs,
        dirichlet_mask,
        node_coords,
    }
}

impl DofMap {
    /// Length of a velocity coefficient vector (both components, blocked).
    pub fn n_velocity_vector_dofs(&self) -> usize {
        2 * self.n_velocity_scalar_dofs
    }

    /// Global index of the x-component of scalar dof `d`.
    pub fn x_dof(&self, d: usize) -> usize {
        d
    }

    /// Global index of the y-component of scalar dof `d`.
    pub fn y_dof(&self, d: usize) -> usize {
        self.n_velocity_scalar_dofs + d
    }

    /// Nodal interpolant of a vector field, as a blocked coefficient vector.
    pub fn interpolate_velocity(&self, f: impl Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
        let n = self.n_velocity_scalar_dofs;
        let mut u = vec![0.0; 2 * n];
        for (d, &p) in self.node_coords.iter().enumerate() {
            let v = f(p);
            u[d] = v[0];
            u[n + d] = v[1];
        }
        u
    }

    /// Nodal interpolant of a scalar field.
    pub fn interpolate_scalar(&self, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        self.node_coords.iter().map(|&p| f(p)).collect()
    }
}
