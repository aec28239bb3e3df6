//! Structured triangulations of the unit square.
//!
//! The mesh is an n×n grid of squares, each split along the lower-left to
//! upper-right diagonal into two counterclockwise triangles. The mesh
//! parameter is h = 1/n. Entities carry deterministic global ids:
//! vertices row-major from the bottom-left corner, cells two per square
//! (lower triangle first), edges in order of first appearance while
//! walking cells.

use crate::error::{Error, Result};

/// Which side of the unit square a boundary edge lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

/// Affine map data for one triangle: x(ξ) = v0 + J·ξ with ξ in the
/// reference triangle {(0,0), (1,0), (0,1)}.
#[derive(Clone, Copy, Debug)]
pub struct CellGeometry {
    /// Physical coordinates of the three vertices.
    pub vertices: [[f64; 2]; 3],
    /// Jacobian J = [v1−v0 | v2−v0], column-major in the sense
    /// `jacobian[r][c]` = ∂x_r/∂ξ_c.
    pub jacobian: [[f64; 2]; 2],
    /// det J; positive for counterclockwise vertices.
    pub det: f64,
}

impl CellGeometry {
    /// Map a reference point to physical coordinates.
    pub fn to_physical(&self, xi: [f64; 2]) -> [f64; 2] {
        let [v0, _, _] = self.vertices;
        [
            v0[0] + self.jacobian[0][0] * xi[0] + self.jacobian[0][1] * xi[1],
            v0[1] + self.jacobian[1][0] * xi[0] + self.jacobian[1][1] * xi[1],
        ]
    }

    /// Rows of J⁻ᵀ; maps reference gradients to physical gradients via
    /// ∇φ = J⁻ᵀ ∇̂φ.
    pub fn grad_transform(&self) -> [[f64; 2]; 2] {
        let j = &self.jacobian;
        let inv_det = 1.0 / self.det;
        // J⁻¹ = 1/det [[j11, -j01], [-j10, j00]]; transpose it.
        [
            [j[1][1] * inv_det, -j[1][0] * inv_det],
            [-j[0][1] * inv_det, j[0][0] * inv_det],
        ]
    }
}

/// Triangulated unit square with edge connectivity and boundary tags.
#[derive(Clone, Debug)]
pub struct TriMesh {
    /// Vertex coordinates in [0,1]².
    pub vertices: Vec<[f64; 2]>,
    /// Vertex-index triples, counterclockwise.
    pub triangles: Vec<[usize; 3]>,
    /// Vertex-index pairs (as first encountered; not sorted).
    pub edges: Vec<[usize; 2]>,
    /// Per cell, global edge ids of the local edges (v0,v1), (v1,v2), (v2,v0).
    pub cell_edges: Vec<[usize; 3]>,
    /// Per edge, the one or two incident cells.
    pub edge_cells: Vec<(usize, Option<usize>)>,
    /// Edge ids on ∂Ω with their side tag.
    pub boundary_edges: Vec<(usize, Side)>,
    /// Number of grid cells per side (n); mesh parameter h = 1/n.
    pub n_cells_per_side: usize,
}

/// Build the structured n×n triangulation; every square is split along the
/// same lower-left to upper-right diagonal.
pub fn build_structured_unit_square(n: usize) -> Result<TriMesh> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "mesh subdivision must be at least 1".into(),
        ));
    }
    let nv = (n + 1) * (n + 1);
    let nf = n as f64;
    let vid = |i: usize, j: usize| j * (n + 1) + i;

    let mut vertices = Vec::with_capacity(nv);
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 / nf, j as f64 / nf]);
        }
    }

    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            triangles.push([a, b, c]); // lower-right triangle
            triangles.push([a, c, d]); // upper-left triangle
        }
    }

    // Edge ids in order of first appearance over cells.
    let mut edge_of_pair = std::collections::HashMap::new();
    let mut edges: Vec<[usize; 2]> = Vec::new();
    let mut edge_cells: Vec<(usize, Option<usize>)> = Vec::new();
    let mut cell_edges = Vec::with_capacity(triangles.len());
    for (cell, tri) in triangles.iter().enumerate() {
        let mut ids = [0usize; 3];
        for (k, (a, b)) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])]
            .into_iter()
            .enumerate()
        {
            let key = (a.min(b), a.max(b));
            let id = *edge_of_pair.entry(key).or_insert_with(|| {
                edges.push([a, b]);
                edge_cells.push((cell, None));
                edges.len() - 1
            });
            if edge_cells[id].0 != cell {
                debug_assert!(edge_cells[id].1.is_none());
                edge_cells[id].1 = Some(cell);
            }
            ids[k] = id;
        }
        cell_edges.push(ids);
    }

    let mut boundary_edges = Vec::new();
    for (id, &(_, second)) in edge_cells.iter().enumerate() {
        if second.is_some() {
            continue;
        }
        let [a, b] = edges[id];
        let mid = [
            0.5 * (vertices[a][0] + vertices[b][0]),
            0.5 * (vertices[a][1] + vertices[b][1]),
        ];
        let side = if mid[1] == 0.0 {
            Side::Bottom
        } else if mid[0] == 1.0 {
            Side::Right
        } else if mid[1] == 1.0 {
            Side::Top
        } else {
            debug_assert_eq!(mid[0], 0.0);
            Side::Left
        };
        boundary_edges.push((id, side));
    }

    Ok(TriMesh {
        vertices,
        triangles,
        edges,
        cell_edges,
        edge_cells,
        boundary_edges,
        n_cells_per_side: n,
    })
}

impl TriMesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Mesh parameter h = 1/n, the side length of the grid squares.
    pub fn h(&self) -> f64 {
        1.0 / self.n_cells_per_side as f64
    }

    /// Midpoint of an edge.
    pub fn edge_midpoint(&self, edge: usize) -> [f64; 2] {
        let [a, b] = self.edges[edge];
        [
            0.5 * (self.vertices[a][0] + self.vertices[b][0]),
            0.5 * (self.vertices[a][1] + self.vertices[b][1]),
        ]
    }

    /// Whether a point of the closed unit square lies on its boundary.
    pub fn on_boundary(p: [f64; 2]) -> bool {
        p[0] == 0.0 || p[0] == 1.0 || p[1] == 0.0 || p[1] == 1.0
    }

    /// Affine map data for one cell.
    pub fn triangle_geometry(&self, cell: usize) -> Result<CellGeometry> {
        let tri = self
            .triangles
            .get(cell)
            .ok_or_else(|| Error::IndexOutOfRange(format!("cell {cell}")))?;
        let v = [
            self.vertices[tri[0]],
            self.vertices[tri[1]],
            self.vertices[tri[2]],
        ];
        let jacobian = [
            [v[1][0] - v[0][0], v[2][0] - v[0][0]],
            [v[1][1] - v[0][1], v[2][1] - v[0][1]],
        ];
        let det = jacobian[0][0] * jacobian[1][1] - jacobian[0][1] * jacobian[1][0];
        debug_assert!(det > 0.0, "triangle {cell} is not counterclockwise");
        Ok(CellGeometry {
            vertices: v,
            jacobian,
            det,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entity_counts_n1() {
        let m = build_structured_unit_square(1).unwrap();
        assert_eq!(m.n_vertices(), 4);
        assert_eq!(m.n_cells(), 2);
        assert_eq!(m.n_edges(), 5);
        assert_eq!(m.boundary_edges.len(), 4);
    }

    #[test]
    fn entity_counts_n4() {
        let m = build_structured_unit_square(4).unwrap();
        assert_eq!(m.n_vertices(), 25);
        assert_eq!(m.n_cells(), 32);
        assert_eq!(m.n_edges(), 56);
        assert_eq!(m.boundary_edges.len(), 16);
    }

    #[test]
    fn rejects_zero_subdivision() {
        assert!(build_structured_unit_square(0).is_err());
    }

    #[test]
    fn areas_partition_unit_square_n2() {
        let m = build_structured_unit_square(2).unwrap();
        let total: f64 = (0..m.n_cells())
            .map(|c| 0.5 * m.triangle_geometry(c).unwrap().det)
            .sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_counts_and_area_up_to_n64() {
        for n in 1..=64 {
            let m = build_structured_unit_square(n).unwrap();
            assert_eq!(m.n_vertices(), (n + 1) * (n + 1));
            assert_eq!(m.n_cells(), 2 * n * n);
            assert_eq!(m.n_edges(), 3 * n * n + 2 * n);
            assert_eq!(m.boundary_edges.len(), 4 * n);
            let total: f64 = (0..m.n_cells())
                .map(|c| 0.5 * m.triangle_geometry(c).unwrap().det)
                .sum();
            assert!((total - 1.0).abs() < 1e-12, "area mismatch at n={n}");
        }
    }

    #[test]
    fn every_triangle_positively_oriented() {
        let m = build_structured_unit_square(7).unwrap();
        for c in 0..m.n_cells() {
            assert!(m.triangle_geometry(c).unwrap().det > 0.0);
        }
    }

    #[test]
    fn interior_edges_have_two_cells_boundary_one() {
        let m = build_structured_unit_square(5).unwrap();
        let boundary: std::collections::HashSet<_> =
            m.boundary_edges.iter().map(|&(e, _)| e).collect();
        for (id, &(_, second)) in m.edge_cells.iter().enumerate() {
            if boundary.contains(&id) {
                assert!(second.is_none());
            } else {
                assert!(second.is_some());
            }
        }
    }

    #[test]
    fn edge_cell_incidence_is_symmetric() {
        let m = build_structured_unit_square(6).unwrap();
        for cell in 0..m.n_cells() {
            for &e in &m.cell_edges[cell] {
                let (c0, c1) = m.edge_cells[e];
                assert!(c0 == cell || c1 == Some(cell));
            }
        }
        for (e, &(c0, c1)) in m.edge_cells.iter().enumerate() {
            assert!(m.cell_edges[c0].contains(&e));
            if let Some(c1) = c1 {
                assert!(m.cell_edges[c1].contains(&e));
            }
        }
    }

    #[test]
    fn geometry_jacobians() {
        let m = build_structured_unit_square(1).unwrap();
        for c in 0..2 {
            assert!((m.triangle_geometry(c).unwrap().det - 1.0).abs() < 1e-15);
        }
        let m2 = build_structured_unit_square(2).unwrap();
        for c in 0..m2.n_cells() {
            assert!((m2.triangle_geometry(c).unwrap().det - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn reference_origin_maps_to_first_vertex() {
        let m = build_structured_unit_square(3).unwrap();
        for c in 0..m.n_cells() {
            let g = m.triangle_geometry(c).unwrap();
            let p = g.to_physical([0.0, 0.0]);
            assert_eq!(p, m.vertices[m.triangles[c][0]]);
        }
    }

    #[test]
    fn geometry_rejects_bad_cell() {
        let m = build_structured_unit_square(2).unwrap();
        assert!(m.triangle_geometry(99).is_err());
    }

    #[test]
    fn boundary_sides_classified() {
        let m = build_structured_unit_square(3).unwrap();
        let mut counts = [0usize; 4];
        for &(e, side) in &m.boundary_edges {
            let mid = m.edge_midpoint(e);
            match side {
                Side::Bottom => {
                    assert_eq!(mid[1], 0.0);
                    counts[0] += 1;
                }
                Side::Right => {
                    assert_eq!(mid[0], 1.0);
                    counts[1] += 1;
                }
                Side::Top => {
                    assert_eq!(mid[1], 1.0);
                    counts[2] += 1;
                }
                Side::Left => {
                    assert_eq!(mid[0], 0.0);
                    counts[3] += 1;
                }
            }
        }
        assert_eq!(counts, [3, 3, 3, 3]);
    }
}
