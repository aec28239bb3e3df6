//! On-disk outputs: legacy ASCII VTK snapshots and CSV tables. All
//! writers are deterministic; identical inputs produce byte-identical
//! files.

use crate::analysis::RateTable;
use crate::error::{Error, Result};
use crate::fem::DofMap;
use crate::mesh::TriMesh;
use std::io::Write;
use std::path::Path;

/// A velocity/pressure field pinned to its mesh, ready for export.
#[derive(Clone, Copy)]
pub struct FieldSnapshot<'a> {
    pub mesh: &'a TriMesh,
    pub dofs: &'a DofMap,
    /// Blocked velocity coefficients at the P2 nodes.
    pub velocity: &'a [f64],
    /// Cellwise pressure values.
    pub pressure: &'a [f64],
    pub time: f64,
}

/// Compact lossless float formatting: plain zero, shortest round-trip
/// scientific otherwise.
fn fmt_compact(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v:e}")
    }
}

/// Six-decimal fixed formatting used by the rate tables.
fn fmt_table(v: f64) -> String {
    format!("{v:.6}")
}

/// Write a legacy ASCII VTK UNSTRUCTURED_GRID file. Every P2 node becomes
/// a point and every triangle is split into four subtriangles through its
/// midpoint nodes, so the quadratic field is stored without loss; the
/// cellwise pressure is replicated onto the subtriangles.
pub fn write_vtk_legacy(snapshot: &FieldSnapshot, path: &Path) -> Result<()> {
    let dofs = snapshot.dofs;
    let mesh = snapshot.mesh;
    let ns = dofs.n_velocity_scalar_dofs;
    assert_eq!(snapshot.velocity.len(), 2 * ns);
    assert_eq!(snapshot.pressure.len(), mesh.n_cells());

    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str(&format!(
        "velocity/pressure snapshot at t={}\n",
        fmt_compact(snapshot.time)
    ));
    out.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");

    out.push_str(&format!("POINTS {ns} double\n"));
    for &p in &dofs.node_coords {
        out.push_str(&format!("{} {} 0\n", fmt_compact(p[0]), fmt_compact(p[1])));
    }

    let ncells = 4 * mesh.n_cells();
    out.push_str(&format!("CELLS {ncells} {}\n", 4 * ncells));
    // local subtriangles in the node order [v0, v1, v2, m01, m12, m20]
    const SPLIT: [[usize; 3]; 4] = [[0, 3, 5], [3, 1, 4], [5, 4, 2], [3, 4, 5]];
    for cell in 0..mesh.n_cells() {
        let cd = &dofs.cell_to_velocity_dofs[cell];
        for tri in SPLIT {
            out.push_str(&format!("3 {} {} {}\n", cd[tri[0]], cd[tri[1]], cd[tri[2]]));
        }
    }
    out.push_str(&format!("CELL_TYPES {ncells}\n"));
    for _ in 0..ncells {
        out.push_str("5\n");
    }

    out.push_str(&format!("POINT_DATA {ns}\nVECTORS velocity double\n"));
    for d in 0..ns {
        out.push_str(&format!(
            "{} {} 0\n",
            fmt_compact(snapshot.velocity[d]),
            fmt_compact(snapshot.velocity[ns + d])
        ));
    }

    out.push_str(&format!(
        "CELL_DATA {ncells}\nSCALARS pressure double 1\nLOOKUP_TABLE default\n"
    ));
    for cell in 0..mesh.n_cells() {
        let p = fmt_compact(snapshot.pressure[cell]);
        for _ in 0..4 {
            out.push_str(&p);
            out.push('\n');
        }
    }

    std::fs::File::create(path)?.write_all(out.as_bytes())?;
    Ok(())
}

/// Write rate tables keyed by κ label as CSV: header
/// `h,err_k<κ>,rate_k<κ>,…`, h printed as exact fractions, numbers with
/// six decimals, empty rate cell on the first row.
pub fn write_rate_table_csv(tables: &[(String, RateTable)], path: &Path) -> Result<()> {
    let Some((_, first)) = tables.first() else {
        return Err(Error::InvalidParameter("no tables to write".into()));
    };
    let ns: Vec<usize> = first.rows.iter().map(|r| r.n).collect();
    for (label, table) in tables {
        let theirs: Vec<usize> = table.rows.iter().map(|r| r.n).collect();
        if theirs != ns {
            return Err(Error::DimensionMismatch(format!(
                "table for kappa={label} is on a different mesh sequence"
            )));
        }
    }

    let mut out = String::from("h");
    for (label, _) in tables {
        out.push_str(&format!(",err_k{label},rate_k{label}"));
    }
    out.push('\n');
    for (i, &n) in ns.iter().enumerate() {
        out.push_str(&format!("1/{n}"));
        for (_, table) in tables {
            let row = &table.rows[i];
            out.push(',');
            out.push_str(&fmt_table(row.error));
            out.push(',');
            if let Some(rate) = row.rate {
                out.push_str(&fmt_table(rate));
            }
        }
        out.push('\n');
    }
    std::fs::File::create(path)?.write_all(out.as_bytes())?;
    Ok(())
}

/// Write an energy time series as CSV with columns t, kinetic, gradient.
pub fn write_energy_csv(series: &[(f64, f64, f64)], path: &Path) -> Result<()> {
    let mut out = String::from("t,kinetic,gradient\n");
    for &(t, k, g) in series {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_compact(t),
            fmt_compact(k),
            fmt_compact(g)
        ));
    }
    std::fs::File::create(path)?.write_all(out.as_bytes())?;
    Ok(())
}

/// Write (κ, gap) pairs as CSV.
pub fn write_gap_csv(rows: &[(String, f64)], path: &Path) -> Result<()> {
    let mut out = String::from("kappa,gap\n");
    for (label, gap) in rows {
        out.push_str(&format!("{label},{}\n", fmt_compact(*gap)));
    }
    std::fs::File::create(path)?.write_all(out.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::build_dof_map;
    use crate::mesh::build_structured_unit_square;

    fn tmpfile(name: &str) -> std::path::PathBuf {
        let mut p = std::env::temp_dir();
        p.push(format!("kvfem_io_test_{}_{name}", std::process::id()));
        p
    }

    #[test]
    fn vtk_counts_for_unit_mesh() {
        let mesh = build_structured_unit_square(1).unwrap();
        let dofs = build_dof_map(&mesh);
        let snap = FieldSnapshot {
            mesh: &mesh,
            dofs: &dofs,
            velocity: &vec![0.0; dofs.n_velocity_vector_dofs()],
            pressure: &vec![0.0; dofs.n_pressure_dofs],
            time: 0.0,
        };
        let path = tmpfile("counts.vtk");
        write_vtk_legacy(&snap, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("POINTS 9 double"));
        assert!(text.contains("CELLS 8 32"));
        assert!(text.contains("CELL_TYPES 8"));
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn vtk_zero_velocity_tuples() {
        let mesh = build_structured_unit_square(2).unwrap();
        let dofs = build_dof_map(&mesh);
        let snap = FieldSnapshot {
            mesh: &mesh,
            dofs: &dofs,
            velocity: &vec![0.0; dofs.n_velocity_vector_dofs()],
            pressure: &vec![0.0; dofs.n_pressure_dofs],
            time: 0.0,
        };
        let path = tmpfile("zero.vtk");
        write_vtk_legacy(&snap, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let after = text.split("VECTORS velocity double\n").nth(1).unwrap();
        let tuples: Vec<&str> = after.lines().take(dofs.n_velocity_scalar_dofs).collect();
        assert!(tuples.iter().all(|&l| l == "0 0 0"));
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn vtk_round_trip_reproduces_nodal_values() {
        let mesh = build_structured_unit_square(2).unwrap();
        let dofs = build_dof_map(&mesh);
        let ns = dofs.n_velocity_scalar_dofs;
        let velocity: Vec<f64> = (0..2 * ns).map(|i| (i as f64 * 0.37).sin()).collect();
        let pressure: Vec<f64> = (0..dofs.n_pressure_dofs)
            .map(|i| (i as f64 * 0.11).cos())
            .collect();
        let snap = FieldSnapshot {
            mesh: &mesh,
            dofs: &dofs,
            velocity: &velocity,
            pressure: &pressure,
            time: 0.5,
        };
        let path = tmpfile("roundtrip.vtk");
        write_vtk_legacy(&snap, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();

        // minimal reader: velocity tuples then pressure scalars
        let after = text.split("VECTORS velocity double\n").nth(1).unwrap();
        for (d, line) in after.lines().take(ns).enumerate() {
            let parts: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse().unwrap())
                .collect();
            assert_eq!(parts[0], velocity[d]);
            assert_eq!(parts[1], velocity[ns + d]);
            assert_eq!(parts[2], 0.0);
        }
        let after = text.split("LOOKUP_TABLE default\n").nth(1).unwrap();
        let scalars: Vec<f64> = after
            .lines()
            .take(4 * mesh.n_cells())
            .map(|t| t.parse().unwrap())
            .collect();
        for cell in 0..mesh.n_cells() {
            for s in 0..4 {
                assert_eq!(scalars[4 * cell + s], pressure[cell]);
            }
        }
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn rate_csv_layout() {
        let t = RateTable::from_errors(&[4, 8], &[4e-2, 1e-2]);
        let path = tmpfile("rates.csv");
        write_rate_table_csv(&[("1".to_string(), t)], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3); // header + 2 rows
        assert_eq!(lines[0], "h,err_k1,rate_k1");
        assert_eq!(lines[1], "1/4,0.040000,"); // no rate on the first row
        assert_eq!(lines[2], "1/8,0.010000,2.000000");
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn rate_csv_rejects_mismatched_grids() {
        let a = RateTable::from_errors(&[4, 8], &[4e-2, 1e-2]);
        let b = RateTable::from_errors(&[4, 16], &[4e-2, 1e-2]);
        let path = tmpfile("mismatch.csv");
        assert!(write_rate_table_csv(&[("1".into(), a), ("2".into(), b)], &path).is_err());
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn energy_csv_layout() {
        let path = tmpfile("energy.csv");
        write_energy_csv(&[], &path).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            "t,kinetic,gradient\n"
        );
        write_energy_csv(&[(0.0, 0.0, 0.0), (0.5, 1.25, 0.25)], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], "0,0,0");
        assert_eq!(lines[2], "5e-1,1.25e0,2.5e-1");
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn writers_are_deterministic() {
        let mesh = build_structured_unit_square(2).unwrap();
        let dofs = build_dof_map(&mesh);
        let velocity: Vec<f64> = (0..dofs.n_velocity_vector_dofs())
            .map(|i| (i as f64).sqrt())
            .collect();
        let pressure: Vec<f64> = (0..dofs.n_pressure_dofs).map(|i| i as f64 * 0.1).collect();
        let snap = FieldSnapshot {
            mesh: &mesh,
            dofs: &dofs,
            velocity: &velocity,
            pressure: &pressure,
            time: 1.0,
        };
        let p1 = tmpfile("det1.vtk");
        let p2 = tmpfile("det2.vtk");
        write_vtk_legacy(&snap, &p1).unwrap();
        write_vtk_legacy(&snap, &p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
        std::fs::remove_file(&p1).ok();
        std::fs::remove_file(&p2).ok();
    }
}
