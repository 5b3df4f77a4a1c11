//! CSV tables and legacy VTK snapshots.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::Result;
use stmortar::interface::{GmresReport, SpectralReport};
use stmortar::mortar::MortarAssumptionReport;
use stmortar::subdomain::{SubdomainSolver, SubdomainTrajectory};
use stmortar::verification::study::{Rates, StudyRow};

pub const CONVERGENCE_HEADER: [&str; 11] = [
    "level",
    "dofs",
    "gmres_iters",
    "e_u",
    "rate_u",
    "e_p_dg",
    "rate_p_dg",
    "e_p",
    "rate_p",
    "e_lambda",
    "rate_lambda",
];

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_convergence(path: &Path, rows: &[(String, StudyRow, Option<Rates>)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CONVERGENCE_HEADER)?;
    for (label, row, rates) in rows {
        let e = row.errors.as_array();
        let rate = |n: usize| rates.map(|r| num(r.errors[n])).unwrap_or_default();
        w.write_record([
            label.clone(),
            row.mortar_dofs.to_string(),
            row.gmres_iterations.to_string(),
            num(e[0]),
            rate(0),
            num(e[1]),
            rate(1),
            num(e[2]),
            rate(2),
            num(e[3]),
            rate(3),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_residuals(path: &Path, report: &GmresReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iteration", "residual", "relative"])?;
    let r0 = report.residual_history.first().copied().unwrap_or(0.0);
    for (k, r) in report.residual_history.iter().enumerate() {
        let rel = if r0 > 0.0 { r / r0 } else { 0.0 };
        w.write_record([k.to_string(), num(*r), num(rel)])?;
    }
    w.flush()?;
    Ok(())
}

pub struct SpectralRow {
    pub label: String,
    pub dim: usize,
    pub h: f64,
    pub euclidean: SpectralReport,
    pub l2: SpectralReport,
}

pub fn write_spectral(path: &Path, rows: &[SpectralRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "level",
        "dim",
        "h",
        "lambda_min_sym",
        "norm_s",
        "cos_beta",
        "sin_beta",
        "symmetry_defect",
        "ratio_l2",
        "ratio_l2_times_h",
    ])?;
    for r in rows {
        let e = &r.euclidean;
        w.write_record([
            r.label.clone(),
            r.dim.to_string(),
            num(r.h),
            num(e.lambda_min_sym),
            num(e.norm_s),
            num(e.cos_beta),
            num(e.predicted_factor),
            num(e.symmetry_defect),
            num(r.l2.ratio()),
            num(r.l2.ratio() * r.h),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub struct OracleRow {
    pub label: String,
    pub unknowns: usize,
    pub max_difference: f64,
    pub residual: f64,
    pub condition: Option<f64>,
}

pub fn write_oracle(path: &Path, rows: &[OracleRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "level",
        "unknowns",
        "max_difference",
        "residual",
        "condition",
    ])?;
    for r in rows {
        w.write_record([
            r.label.clone(),
            r.unknowns.to_string(),
            num(r.max_difference),
            num(r.residual),
            r.condition.map(num).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_assumptions(path: &Path, rows: &[(String, MortarAssumptionReport)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["level", "interface", "c_space", "time_nested"])?;
    for (label, rep) in rows {
        for i in &rep.interfaces {
            w.write_record([
                label.clone(),
                i.interface.to_string(),
                num(i.c_space),
                i.time_nested.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Pressure and cell-center velocity of one subdomain at step `k` as a
/// legacy ASCII structured grid.
pub fn write_vtk(
    path: &Path,
    solver: &SubdomainSolver,
    traj: &SubdomainTrajectory,
    k: usize,
) -> Result<()> {
    let dm = &solver.dofmap;
    let spec = &solver.spec;
    let mut w = BufWriter::new(File::create(path)?);
    let (t0, t1) = spec.time.cell(k);
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "subdomain {} step {k} slab [{t0}, {t1}]", spec.id)?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET STRUCTURED_GRID")?;
    writeln!(w, "DIMENSIONS {} {} 1", spec.nx + 1, spec.ny + 1)?;
    writeln!(w, "POINTS {} double", (spec.nx + 1) * (spec.ny + 1))?;
    for j in 0..=spec.ny {
        for i in 0..=spec.nx {
            let x = spec.rect.x0 + spec.dx() * i as f64;
            let y = spec.rect.y0 + spec.dy() * j as f64;
            writeln!(w, "{} {} 0", num(x), num(y))?;
        }
    }
    writeln!(w, "CELL_DATA {}", dm.n_cells())?;
    writeln!(w, "SCALARS pressure double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for p in &traj.p[k] {
        writeln!(w, "{}", num(*p))?;
    }
    writeln!(w, "VECTORS velocity double")?;
    for c in 0..dm.n_cells() {
        let (x, y) = dm.cell_center(c);
        let [ux, uy] = dm.velocity_at(&traj.u[k], c, x, y);
        writeln!(w, "{} {} 0", num(ux), num(uy))?;
    }
    w.flush()?;
    Ok(())
}
