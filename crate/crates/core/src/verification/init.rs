//! Discrete initial pressure by elliptic projection: a steady mortar mixed
//! problem with the exact initial state as data.

use rayon::prelude::*;

use crate::dd::DdSetup;
use crate::error::SolverError;
use crate::fem::{add_boundary_load, project_spatial, CellField, FluxField};
use crate::interface::{gmres, GmresOptions, GmresReport, SteadyInterfaceOperator};
use crate::subdomain::{SteadySolver, DATA_POINTS};

#[derive(Debug, Clone, PartialEq)]
pub struct InitialProjection {
    pub p0: Vec<CellField>,
    pub u0: Vec<FluxField>,
    /// Spatial mortar coefficients.
    pub lambda0: Vec<f64>,
    pub report: GmresReport,
}

/// Solves, on every subdomain and with a spatial mortar on each interface,
///
/// ```text
/// a(u_h, v) + b(v, p_h) + b_Γ(v, λ_h) = −⟨p_0, v·n⟩_{∂Ω}
/// b(u_h, w)                          = −(∇·u_0, w)
/// b_Γ(u_h, μ)                         = 0
/// ```
///
/// with `u_0 = −K∇p_0`. This is the elliptic projection of `(u_0, p_0, p_0|_Γ)`.
pub fn elliptic_projection_init(
    setup: &DdSetup,
    initial_pressure: &(dyn Fn(f64, f64) -> f64 + Sync),
    initial_flux_divergence: &(dyn Fn(f64, f64) -> f64 + Sync),
    opts: &GmresOptions<'_>,
) -> Result<InitialProjection, SolverError> {
    let steady: Vec<SteadySolver> = setup
        .solvers
        .par_iter()
        .map(SteadySolver::new)
        .collect::<Result<_, _>>()?;
    let n_cells: Vec<usize> = setup.solvers.iter().map(|s| s.dofmap.n_cells()).collect();
    let n_faces: Vec<usize> = setup.solvers.iter().map(|s| s.dofmap.n_faces()).collect();

    let loads: Vec<(Vec<f64>, Vec<f64>)> = setup
        .solvers
        .par_iter()
        .map(|s| {
            let dm = &s.dofmap;
            let mut bc = vec![0.0; dm.n_faces()];
            for &side in &s.exterior_sides {
                add_boundary_load(
                    dm,
                    side,
                    |x, y, _| initial_pressure(x, y),
                    (0.0, 1.0),
                    DATA_POINTS,
                    &mut bc,
                );
            }
            bc.iter_mut().for_each(|v| *v = -*v);
            let area = dm.cell_area();
            let f = project_spatial(dm, initial_flux_divergence, DATA_POINTS);
            (bc, f.iter().map(|v| -area * v).collect())
        })
        .collect();

    let op = SteadyInterfaceOperator {
        solvers: &steady,
        n_cells: &n_cells,
        n_faces: &n_faces,
        coupling: &setup.coupling,
    };
    let bar: Vec<FluxField> = steady
        .par_iter()
        .zip(&loads)
        .map(|(s, (ru, rp))| s.solve(ru, rp).map(|(u, _)| u))
        .collect::<Result<_, _>>()?;
    let mut g = vec![0.0; setup.coupling.space_dim];
    for (cs, u) in setup.coupling.per_subdomain.iter().zip(&bar) {
        for c in cs {
            c.add_space_moments(u, 1.0, &mut g);
        }
    }
    let (lambda0, report) = gmres(&op, &g, opts)?;
    let mortar = op.mortar_loads(&lambda0);
    let solved: Vec<(FluxField, CellField)> = steady
        .par_iter()
        .zip(&loads)
        .zip(mortar)
        .map(|((s, (ru, rp)), ml)| {
            let rhs: Vec<f64> = ru.iter().zip(&ml).map(|(a, b)| a + b).collect();
            s.solve(&rhs, rp)
        })
        .collect::<Result<_, _>>()?;
    let (u0, p0) = solved.into_iter().unzip();
    Ok(InitialProjection {
        p0,
        u0,
        lambda0,
        report,
    })
}
