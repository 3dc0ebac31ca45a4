//! File writers: legacy VTK snapshots, per-edge sidecars, CSV logs and the
//! run manifest.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use gdm_obstacle::{GradientDiscretisation, StepReport};

/// Legacy ASCII unstructured grid with `A` and `B` evaluated at the cell
/// barycenters.
pub fn write_vtk<W: Write>(
    mut out: W,
    gd: &GradientDiscretisation<f64>,
    a: &[f64],
    b: &[f64],
    title: &str,
) -> io::Result<()> {
    let mesh = gd.mesh();
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{title}")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", mesh.num_vertices())?;
    for v in mesh.vertices() {
        writeln!(out, "{:.15e} {:.15e} 0", v[0], v[1])?;
    }
    writeln!(out, "CELLS {} {}", mesh.num_cells(), 4 * mesh.num_cells())?;
    for c in mesh.cells() {
        writeln!(out, "3 {} {} {}", c[0], c[1], c[2])?;
    }
    writeln!(out, "CELL_TYPES {}", mesh.num_cells())?;
    for _ in 0..mesh.num_cells() {
        writeln!(out, "5")?;
    }
    writeln!(out, "CELL_DATA {}", mesh.num_cells())?;
    for (name, v) in [("A", a), ("B", b)] {
        writeln!(out, "SCALARS {name} double 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for c in 0..mesh.num_cells() {
            let value = gd.value_in_cell(c, gd.local_values(v, c), mesh.barycenter(c));
            writeln!(out, "{value:.15e}")?;
        }
    }
    Ok(())
}

/// One row per edge: midpoint, boundary flag, DOF values and the edge
/// obstacle average.
pub fn write_edge_csv<W: Write>(mut out: W, gd: &GradientDiscretisation<f64>, a: &[f64], b: &[f64]) -> io::Result<()> {
    let (ea, eb) = (gd.expand_to_edges(a), gd.expand_to_edges(b));
    writeln!(out, "edge,x_mid,y_mid,boundary,A_value,B_value,obstacle_average")?;
    for (i, e) in gd.mesh().edges().iter().enumerate() {
        writeln!(
            out,
            "{i},{:.15e},{:.15e},{},{:.15e},{:.15e},{:.15e}",
            e.midpoint[0],
            e.midpoint[1],
            u8::from(e.boundary),
            ea[i],
            eb[i],
            gd.obstacle_edges()[i]
        )?;
    }
    Ok(())
}

pub const RESIDUAL_HEADER: &str = "step,time,picard_iterations,psor_sweeps,cg_iterations,residual_sign,residual_complementarity,final_damping,contraction_violated";

pub fn write_residual_row<W: Write>(mut out: W, step: usize, time: f64, r: &StepReport<f64>) -> io::Result<()> {
    writeln!(
        out,
        "{step},{time:.15e},{},{},{},{:.6e},{:.6e},{},{}",
        r.picard_iterations,
        r.psor_sweeps,
        r.cg_iterations,
        r.residual_sign,
        r.residual_complementarity,
        r.final_damping,
        u8::from(r.contraction_violated)
    )
}

pub fn write_residual_log(path: &Path, times: &[f64], reports: &[StepReport<f64>]) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{RESIDUAL_HEADER}")?;
    for (n, r) in reports.iter().enumerate() {
        write_residual_row(&mut out, n + 1, times[n + 1], r)?;
    }
    out.flush()
}

pub fn write_snapshot(dir: &Path, stem: &str, gd: &GradientDiscretisation<f64>, a: &[f64], b: &[f64], time: f64) -> io::Result<()> {
    let mut vtk = BufWriter::new(File::create(dir.join(format!("{stem}.vtk")))?);
    write_vtk(&mut vtk, gd, a, b, &format!("gdm-obstacle {stem} t={time:.15e}"))?;
    vtk.flush()?;
    let mut csv = BufWriter::new(File::create(dir.join(format!("{stem}_edges.csv")))?);
    write_edge_csv(&mut csv, gd, a, b)?;
    csv.flush()
}

/// Resolved configuration followed by a `[status]` section.
pub fn write_manifest(dir: &Path, command: &str, resolved: &str, status: &[(&str, String)]) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(dir.join("manifest.ini"))?);
    writeln!(out, "# gdm-obstacle {command}")?;
    write!(out, "{resolved}")?;
    writeln!(out, "\n[status]")?;
    for (k, v) in status {
        writeln!(out, "{k} = {v}")?;
    }
    out.flush()
}

/// Row of a pass/fail table.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
    /// Soft checks are reported but never fail a command.
    pub soft: bool,
}

impl Check {
    pub fn status(&self) -> &'static str {
        match (self.passed, self.soft) {
            (true, _) => "pass",
            (false, true) => "warn",
            (false, false) => "fail",
        }
    }
}

pub fn write_checks(path: &Path, checks: &[Check]) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "check,measured,threshold,status")?;
    for c in checks {
        writeln!(out, "{},{:.6e},{:.6e},{}", c.name, c.measured, c.threshold, c.status())?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use gdm_obstacle::{Mesh, TimeGrid};
    use std::sync::Arc;

    #[test]
    fn vtk_layout() {
        let mesh = Arc::new(Mesh::unit_square(1).unwrap());
        let gd = GradientDiscretisation::crouzeix_raviart(mesh, TimeGrid::uniform(1.0, 1).unwrap(), |_| 1.0).unwrap();
        let mut buf = Vec::new();
        write_vtk(&mut buf, &gd, &[0.5], &[0.0], "t").unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[4], "POINTS 4 double");
        assert!(s.contains("CELLS 2 8\n3 0 1 3\n3 0 3 2\n"));
        assert!(s.contains("CELL_TYPES 2\n5\n5\n"));
        // the diagonal DOF has value 1/3 at each barycenter (e = 1 - 2λ, λ = 1/3)
        let a = s.split("SCALARS A double 1\nLOOKUP_TABLE default\n").nth(1).unwrap();
        for v in a.lines().take(2) {
            assert!((v.parse::<f64>().unwrap() - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn edge_csv_has_header_and_all_edges() {
        let mesh = Arc::new(Mesh::unit_square(2).unwrap());
        let gd = GradientDiscretisation::crouzeix_raviart(mesh, TimeGrid::uniform(1.0, 1).unwrap(), |_| 1.0).unwrap();
        let z = vec![0.0; gd.num_dofs()];
        let mut buf = Vec::new();
        write_edge_csv(&mut buf, &gd, &z, &z).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().count(), 17);
        assert!(s.starts_with("edge,x_mid"));
    }
}
