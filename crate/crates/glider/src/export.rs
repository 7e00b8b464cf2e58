//! CSV artifact writers.
//!
//! All angles cross this boundary in degrees; run metadata travels in `#`
//! header comments so every file is self-describing. Values are written with
//! Rust's shortest-roundtrip float formatting, which keeps byte-identical
//! outputs across runs and worker counts.

use std::fmt::Write as _;
use std::path::Path;

use crate::dynamics::PositionTrajectory;
use crate::equilibria::{BifurcationDiagram, Equilibrium};
use crate::manifold::{NullclineCurve, TvmCurve, TvmSurface};
use crate::repulsion::{RepulsionField, RidgePoint};
use crate::scenarios::SimSample;
use crate::Result;

/// Header metadata common to trajectory-like exports.
#[derive(Debug, Clone)]
pub struct RunMeta {
    pub profile: String,
    pub theta_deg: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub termination: String,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)?;
    Ok(())
}

/// `t,vx,vz,x,z,theta` with provenance comments. The `theta` column is in
/// degrees, matching every other angle in the file formats.
pub fn write_trajectory_csv(
    path: &Path,
    trajectory: &PositionTrajectory,
    meta: &RunMeta,
) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "# profile: {}", meta.profile);
    let _ = writeln!(out, "# theta_deg: {}", meta.theta_deg);
    let _ = writeln!(out, "# rel_tol: {}", meta.rel_tol);
    let _ = writeln!(out, "# abs_tol: {}", meta.abs_tol);
    let _ = writeln!(out, "# termination: {}", meta.termination);
    let _ = writeln!(out, "# theta unit: deg");
    out.push_str("t,vx,vz,x,z,theta\n");
    for (&t, row) in trajectory.times().iter().zip(trajectory.rows()) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            t, row[2], row[3], row[0], row[1], meta.theta_deg
        );
    }
    write_file(path, &out)
}

/// `vx,vz,ax,az` acceleration samples on a grid.
pub fn write_vector_field_csv(path: &Path, rows: &[(f64, f64, f64, f64)]) -> Result<()> {
    let mut out = String::from("vx,vz,ax,az\n");
    for (vx, vz, ax, az) in rows {
        let _ = writeln!(out, "{vx},{vz},{ax},{az}");
    }
    write_file(path, &out)
}

fn equilibrium_row(theta_deg: f64, eq: &Equilibrium) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        theta_deg,
        eq.gamma_star.to_degrees(),
        eq.v_star,
        eq.state.vx,
        eq.state.vz,
        eq.delta,
        eq.tau,
        eq.kind
    )
}

/// `theta_deg,gamma_star_deg,v_star,vx_star,vz_star,delta,tau,kind`.
pub fn write_equilibria_csv(path: &Path, theta_deg: f64, eqs: &[Equilibrium]) -> Result<()> {
    let mut out = String::from("theta_deg,gamma_star_deg,v_star,vx_star,vz_star,delta,tau,kind\n");
    for eq in eqs {
        out.push_str(&equilibrium_row(theta_deg, eq));
        out.push('\n');
    }
    write_file(path, &out)
}

/// Branch points carry their branch id; per-θ scan points are appended with
/// `branch_id = -1`.
pub fn write_bifurcation_csv(path: &Path, diagram: &BifurcationDiagram) -> Result<()> {
    let mut out = String::from(
        "theta_deg,gamma_star_deg,v_star,vx_star,vz_star,delta,tau,kind,branch_id\n",
    );
    for (id, branch) in diagram.branches.iter().enumerate() {
        for (theta, eq) in &branch.points {
            let _ = writeln!(out, "{},{}", equilibrium_row(theta.degrees(), eq), id);
        }
    }
    for (theta, eqs) in &diagram.per_theta {
        for eq in eqs {
            let _ = writeln!(out, "{},-1", equilibrium_row(theta.degrees(), eq));
        }
    }
    write_file(path, &out)
}

/// `theta_deg,vx,vz,accel_tangential` for a single-pitch TVM curve.
pub fn write_tvm_csv(path: &Path, curve: &TvmCurve) -> Result<()> {
    let mut out = String::from("theta_deg,vx,vz,accel_tangential\n");
    append_tvm_rows(&mut out, curve);
    write_file(path, &out)
}

fn append_tvm_rows(out: &mut String, curve: &TvmCurve) {
    let theta_deg = curve.theta.degrees();
    for p in &curve.points {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            theta_deg, p.state.vx, p.state.vz, p.accel_tangential
        );
    }
}

/// Same schema as [`write_tvm_csv`], θ-sorted; failed slices are recorded as
/// `# gap:` comments rather than interpolated.
pub fn write_surface_csv(path: &Path, surface: &TvmSurface) -> Result<()> {
    let mut out = String::new();
    for (theta, reason) in &surface.gaps {
        let _ = writeln!(out, "# gap: theta_deg={} reason={}", theta.degrees(), reason);
    }
    out.push_str("theta_deg,vx,vz,accel_tangential\n");
    for slice in &surface.slices {
        append_tvm_rows(&mut out, slice);
    }
    write_file(path, &out)
}

/// `theta_deg,gamma_deg,vx,vz` with the singular angles in header comments.
pub fn write_nullcline_csv(path: &Path, curve: &NullclineCurve) -> Result<()> {
    let mut out = String::new();
    let singular: Vec<String> = curve
        .singular_angles
        .iter()
        .map(|g| format!("{}", g.to_degrees()))
        .collect();
    let _ = writeln!(out, "# singular_gamma_deg: {}", singular.join(" "));
    out.push_str("theta_deg,gamma_deg,vx,vz\n");
    let theta_deg = curve.theta.degrees();
    for s in &curve.samples {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            theta_deg,
            s.gamma.to_degrees(),
            s.state.vx,
            s.state.vz
        );
    }
    write_file(path, &out)
}

/// `vx,vz,rho,masked` plus grid metadata comments; masked nodes carry
/// `rho = nan`.
pub fn write_field_csv(path: &Path, field: &RepulsionField) -> Result<()> {
    let g = &field.grid;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# grid: nx={} nz={} vx=[{} {}] vz=[{} {}]",
        g.nx, g.nz, g.vx_range.0, g.vx_range.1, g.vz_range.0, g.vz_range.1
    );
    let _ = writeln!(out, "# theta_deg: {}", field.theta.degrees());
    let _ = writeln!(out, "# window: {}", field.window);
    out.push_str("vx,vz,rho,masked\n");
    for col in 0..g.nx {
        for row in 0..g.nz {
            let vx = g.vx_at(col);
            let vz = g.vz_at(row);
            match field.value(col, row) {
                Some(rho) => {
                    let _ = writeln!(out, "{vx},{vz},{rho},0");
                }
                None => {
                    let _ = writeln!(out, "{vx},{vz},nan,1");
                }
            }
        }
    }
    write_file(path, &out)
}

/// `vx,vz,rho` ridge samples; masked columns are skipped.
pub fn write_ridge_csv(path: &Path, ridge: &[Option<RidgePoint>]) -> Result<()> {
    let mut out = String::from("vx,vz,rho\n");
    for point in ridge.iter().flatten() {
        let _ = writeln!(out, "{},{},{}", point.vx, point.vz, point.rho);
    }
    write_file(path, &out)
}

/// `t,x,z,vx,vz,theta_deg,dist_tvm`; `rows` and `dist_tvm` must be aligned.
pub fn write_simulation_csv(
    path: &Path,
    rows: &[SimSample],
    dist_tvm: &[f64],
    meta: &RunMeta,
) -> Result<()> {
    assert_eq!(rows.len(), dist_tvm.len());
    let mut out = String::new();
    let _ = writeln!(out, "# profile: {}", meta.profile);
    let _ = writeln!(out, "# rel_tol: {}", meta.rel_tol);
    let _ = writeln!(out, "# abs_tol: {}", meta.abs_tol);
    let _ = writeln!(out, "# termination: {}", meta.termination);
    out.push_str("t,x,z,vx,vz,theta_deg,dist_tvm\n");
    for (sample, dist) in rows.iter().zip(dist_tvm) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            sample.t,
            sample.x,
            sample.z,
            sample.state.vx,
            sample.state.vz,
            sample.theta.degrees(),
            dist
        );
    }
    write_file(path, &out)
}
