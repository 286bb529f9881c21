//! Output directories for single runs.

use std::fs::File;
use std::path::Path;

use super::cases::{ConvectionReport, SolveOutput};
use super::report::{fmt_f64, write_error_csv, write_profile_csv, write_summary, write_table_csv};
use crate::error::Result;
use crate::grid::Location;

/// `report.csv` and `solution.csv` (`x[,y],numerical,reference`).
pub fn write_solve_output(dir: &Path, out: &SolveOutput) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_error_csv(File::create(dir.join("report.csv"))?, std::slice::from_ref(&out.report))?;
    let grid = *out.numerical.grid();
    let two_d = grid.dims() == 2;
    let header: &[&str] = if two_d { &["x", "y", "numerical", "reference"] } else { &["x", "numerical", "reference"] };
    let rows = grid.positions(Location::Node).zip(out.numerical.values()).zip(&out.reference).map(|((p, &v), &r)| {
        if two_d {
            vec![p[0], p[1], v, r]
        } else {
            vec![p[0], v, r]
        }
    });
    write_table_csv(File::create(dir.join("solution.csv"))?, header, rows)
}

/// Velocity and stream function averaged to cell centres.
pub fn centred_fields(report: &ConvectionReport) -> Vec<Vec<f64>> {
    let state = &report.state;
    let grid = *state.phi.grid();
    let n = grid.shape()[0];
    let (u, v, phi, psi) = (state.u.x.values(), state.u.y.values(), state.phi.values(), report.stream_function.values());
    (0..n * n)
        .map(|k| {
            let (i, j) = (k % n, k / n);
            let w = j * n + (i + n - 1) % n;
            let s = ((j + n - 1) % n) * n + i;
            let sw = ((j + n - 1) % n) * n + (i + n - 1) % n;
            let p = grid.position(Location::Node, k);
            vec![p[0], p[1], 0.5 * (u[k] + u[w]), 0.5 * (v[k] + v[s]), phi[k], 0.25 * (psi[k] + psi[w] + psi[s] + psi[sw])]
        })
        .collect()
}

/// `profile.csv`, `fields.csv` and `summary.txt`.
pub fn write_convection_output(dir: &Path, report: &ConvectionReport) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_profile_csv(File::create(dir.join("profile.csv"))?, &report.profile)?;
    write_table_csv(File::create(dir.join("fields.csv"))?, &["x", "y", "u", "v", "phi", "psi"], centred_fields(report))?;
    let last = report.log.entries.last();
    let inc = last.map_or([f64::NAN; 3], |e| e.increments);
    let c = &report.config;
    let summary = [
        ("ra", fmt_f64(c.ra)),
        ("pr", fmt_f64(c.pr)),
        ("eta_d", fmt_f64(c.eta_d)),
        ("eta_n", fmt_f64(c.eta_n)),
        ("n", c.n.to_string()),
        ("dt", fmt_f64(c.time_step())),
        ("converged", report.log.converged.to_string()),
        ("steps", report.state.step.to_string()),
        ("time", fmt_f64(report.state.time)),
        ("nusselt", fmt_f64(report.nusselt)),
        ("wall_flux", fmt_f64(report.wall_flux)),
        ("increment_u", fmt_f64(inc[0])),
        ("increment_v", fmt_f64(inc[1])),
        ("increment_phi", fmt_f64(inc[2])),
        ("asymmetry_phi", fmt_f64(report.asymmetry[0])),
        ("asymmetry_speed", fmt_f64(report.asymmetry[1])),
        ("divergence", fmt_f64(last.map_or(f64::NAN, |e| e.divergence))),
        ("sor_sweeps", report.log.total_sor_sweeps.to_string()),
        ("runtime_s", fmt_f64(report.log.runtime_seconds)),
    ];
    write_summary(File::create(dir.join("summary.txt"))?, &summary)
}
