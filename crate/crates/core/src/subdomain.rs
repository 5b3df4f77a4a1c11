//! Backward Euler (DG(0) in time) marching of the mixed system on one
//! subdomain, and a steady mixed solve used for initial data.
//!
//! Step `k` solves
//!
//! ```text
//! [ A   Bᵀ      ] [u]   [ -ℓ_k                 ]
//! [ B  -M / Δt  ] [p] = [ -M (q̄_k + p_{k-1}/Δt) ]
//! ```
//!
//! where `ℓ_k` collects the exterior Dirichlet load and the slab-averaged
//! mortar load. Since `M` is diagonal the pressure is eliminated and the SPD
//! matrix `A + Δt BᵀM⁻¹B` is factored once per distinct step size.

use crate::error::SolverError;
use crate::fem::{
    add_boundary_load, assemble_divergence, assemble_velocity_mass, project_scalar, CellField,
    DofMap, FluxField, PermeabilityField,
};
use crate::geometry::{BoundarySide, SubdomainSpec};
use crate::linalg::{EnvelopeCholesky, SparseLu, SparseOperator};
use crate::mortar::SubdomainCoupling;

/// Data of the parabolic problem `∂_t p − ∇·K∇p = q` with Dirichlet data
/// on the exterior boundary.
pub trait ProblemData: Sync {
    fn source(&self, x: f64, y: f64, t: f64) -> f64;
    fn boundary_pressure(&self, x: f64, y: f64, t: f64) -> f64;
}

/// Problem data with `q = 0` and `g = 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroData;

impl ProblemData for ZeroData {
    fn source(&self, _: f64, _: f64, _: f64) -> f64 {
        0.0
    }
    fn boundary_pressure(&self, _: f64, _: f64, _: f64) -> f64 {
        0.0
    }
}

/// Discrete data of one subdomain: initial pressure, per-step source
/// averages and per-step exterior Dirichlet loads.
#[derive(Debug, Clone, PartialEq)]
pub struct SubdomainData {
    pub p0: CellField,
    pub source: Vec<CellField>,
    pub boundary_load: Vec<FluxField>,
}

/// Gauss points per direction for data projection.
pub const DATA_POINTS: usize = 3;

impl SubdomainData {
    pub fn zero(solver: &SubdomainSolver) -> Self {
        let n = solver.spec.n_steps();
        Self {
            p0: vec![0.0; solver.dofmap.n_cells()],
            source: vec![vec![0.0; solver.dofmap.n_cells()]; n],
            boundary_load: vec![vec![0.0; solver.dofmap.n_faces()]; n],
        }
    }

    pub fn sample(solver: &SubdomainSolver, problem: &dyn ProblemData, p0: CellField) -> Self {
        let time = &solver.spec.time;
        let dm = &solver.dofmap;
        let mut source = Vec::with_capacity(time.len());
        let mut boundary_load = Vec::with_capacity(time.len());
        for k in 0..time.len() {
            let slab = time.cell(k);
            source.push(project_scalar(
                dm,
                |x, y, t| problem.source(x, y, t),
                slab,
                DATA_POINTS,
            ));
            let mut load = vec![0.0; dm.n_faces()];
            for &side in &solver.exterior_sides {
                add_boundary_load(
                    dm,
                    side,
                    |x, y, t| problem.boundary_pressure(x, y, t),
                    slab,
                    DATA_POINTS,
                    &mut load,
                );
            }
            boundary_load.push(load);
        }
        Self {
            p0,
            source,
            boundary_load,
        }
    }
}

/// Velocities and pressures of every local step, plus the initial pressure.
#[derive(Debug, Clone, PartialEq)]
pub struct SubdomainTrajectory {
    pub p0: CellField,
    pub u: Vec<FluxField>,
    pub p: Vec<CellField>,
}

impl SubdomainTrajectory {
    pub fn n_steps(&self) -> usize {
        self.u.len()
    }
}

/// Mortar Dirichlet data for a march: the subdomain's couplings and the
/// global mortar vector.
#[derive(Debug, Clone, Copy)]
pub struct MortarData<'a> {
    pub couplings: &'a [SubdomainCoupling],
    pub lambda: &'a [f64],
}

#[derive(Debug)]
struct StepFactor {
    dt: f64,
    chol: EnvelopeCholesky,
}

/// Factored step systems of one subdomain. Immutable after construction,
/// so one solver may be shared by concurrent marches.
#[derive(Debug)]
pub struct SubdomainSolver {
    pub spec: SubdomainSpec,
    pub dofmap: DofMap,
    pub a: SparseOperator,
    pub b: SparseOperator,
    /// Sides on the exterior boundary, where Dirichlet data is imposed.
    pub exterior_sides: Vec<BoundarySide>,
    factors: Vec<StepFactor>,
    step_factor: Vec<usize>,
}

fn same_step(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

impl SubdomainSolver {
    pub fn new(
        spec: SubdomainSpec,
        permeability: &PermeabilityField,
        exterior_sides: Vec<BoundarySide>,
    ) -> Result<Self, SolverError> {
        let dofmap = DofMap::new(&spec);
        let a = assemble_velocity_mass(&dofmap, permeability)?;
        let b = assemble_divergence(&dofmap);
        let order = dofmap.banded_face_order();
        let mut factors: Vec<StepFactor> = Vec::new();
        let mut step_factor = Vec::with_capacity(spec.n_steps());
        for dt in spec.time.widths() {
            let idx = match factors.iter().position(|f| same_step(f.dt, dt)) {
                Some(i) => i,
                None => {
                    let schur = schur_matrix(&a, &b, dofmap.cell_area(), dt);
                    let chol =
                        EnvelopeCholesky::factor(&schur, order.clone()).map_err(|e| match e {
                            SolverError::Singular { row, pivot, .. } => SolverError::Singular {
                                subdomain: spec.id,
                                row,
                                pivot,
                            },
                            other => other,
                        })?;
                    factors.push(StepFactor { dt, chol });
                    factors.len() - 1
                }
            };
            step_factor.push(idx);
        }
        Ok(Self {
            spec,
            dofmap,
            a,
            b,
            exterior_sides,
            factors,
            step_factor,
        })
    }

    /// Number of distinct step sizes, i.e. factorizations held.
    pub fn n_factorizations(&self) -> usize {
        self.factors.len()
    }

    pub fn n_steps(&self) -> usize {
        self.spec.n_steps()
    }

    /// Marches all local steps and hands `(k, u^k, p^k)` to `visit`.
    /// `data = None` means zero source, boundary and initial data; `mortar =
    /// None` means zero interface data.
    pub fn march(
        &self,
        data: Option<&SubdomainData>,
        mortar: Option<MortarData<'_>>,
        mut visit: impl FnMut(usize, &[f64], &[f64]),
    ) {
        let dm = &self.dofmap;
        let area = dm.cell_area();
        let (nf, nc) = (dm.n_faces(), dm.n_cells());
        let mut p_prev = data.map_or_else(|| vec![0.0; nc], |d| d.p0.clone());
        let mut f = vec![0.0; nc];
        let mut rhs = vec![0.0; nf];
        let mut p = vec![0.0; nc];
        let mut work = Vec::new();
        let mut mortar_work = Vec::new();
        for k in 0..self.n_steps() {
            let dt = self.spec.time.width(k);
            match data {
                Some(d) => {
                    for (c, fc) in f.iter_mut().enumerate() {
                        *fc = dt * d.source[k][c] + p_prev[c];
                    }
                    for (r, l) in rhs.iter_mut().zip(&d.boundary_load[k]) {
                        *r = -l;
                    }
                }
                None => {
                    f.copy_from_slice(&p_prev);
                    rhs.iter_mut().for_each(|r| *r = 0.0);
                }
            }
            if let Some(m) = mortar {
                for c in m.couplings {
                    c.add_load(m.lambda, k, dt, -1.0, &mut rhs, &mut mortar_work);
                }
            }
            self.b.apply_transpose_add(-1.0, &f, &mut rhs);
            self.factors[self.step_factor[k]]
                .chol
                .solve_in_place(&mut rhs, &mut work);
            self.b.apply(&rhs, &mut p);
            for (pc, fc) in p.iter_mut().zip(&f) {
                *pc = *pc * dt / area + fc;
            }
            visit(k, &rhs, &p);
            p_prev.copy_from_slice(&p);
        }
    }

    pub fn trajectory(
        &self,
        data: Option<&SubdomainData>,
        mortar: Option<MortarData<'_>>,
    ) -> SubdomainTrajectory {
        let n = self.n_steps();
        let mut u = Vec::with_capacity(n);
        let mut p = Vec::with_capacity(n);
        self.march(data, mortar, |_, uk, pk| {
            u.push(uk.to_vec());
            p.push(pk.to_vec());
        });
        let p0 = data.map_or_else(|| vec![0.0; self.dofmap.n_cells()], |d| d.p0.clone());
        SubdomainTrajectory { p0, u, p }
    }

    /// Solve with the true source and initial data and zero interface data.
    pub fn solve_bar(&self, data: &SubdomainData) -> SubdomainTrajectory {
        self.trajectory(Some(data), None)
    }

    /// Solve with zero source and initial data and interface data `λ`.
    pub fn solve_star(
        &self,
        couplings: &[SubdomainCoupling],
        lambda: &[f64],
    ) -> SubdomainTrajectory {
        self.trajectory(None, Some(MortarData { couplings, lambda }))
    }

    /// Residual of cellwise mass balance
    /// `(p^k − p^{k−1})|E|/Δt + ∫_{∂E} u·n − q̄_k|E|` for every step and cell.
    pub fn mass_balance_residual(
        &self,
        data: Option<&SubdomainData>,
        traj: &SubdomainTrajectory,
    ) -> f64 {
        let dm = &self.dofmap;
        let area = dm.cell_area();
        let mut worst: f64 = 0.0;
        for k in 0..traj.n_steps() {
            let dt = self.spec.time.width(k);
            let prev = if k == 0 { &traj.p0 } else { &traj.p[k - 1] };
            for c in 0..dm.n_cells() {
                let q = data.map_or(0.0, |d| d.source[k][c]);
                let r = (traj.p[k][c] - prev[c]) * area / dt + dm.divergence(&traj.u[k], c) * area
                    - q * area;
                worst = worst.max(r.abs());
            }
        }
        worst
    }
}

/// `A + (Δt/|E|) BᵀB`.
fn schur_matrix(a: &SparseOperator, b: &SparseOperator, area: f64, dt: f64) -> SparseOperator {
    let mut t: Vec<(usize, usize, f64)> = a.triplets().collect();
    let s = dt / area;
    for c in 0..b.nrows() {
        let row: Vec<(usize, f64)> = b.row(c).collect();
        for &(f, vf) in &row {
            for &(g, vg) in &row {
                t.push((f, g, s * vf * vg));
            }
        }
    }
    SparseOperator::from_triplets(a.nrows(), a.ncols(), &t)
}

/// Steady mixed solver `[[A, Bᵀ], [B, 0]]` for one subdomain.
#[derive(Debug)]
pub struct SteadySolver {
    n_faces: usize,
    lu: SparseLu,
}

impl SteadySolver {
    pub fn new(solver: &SubdomainSolver) -> Result<Self, SolverError> {
        let nf = solver.dofmap.n_faces();
        let nc = solver.dofmap.n_cells();
        let mut t: Vec<(usize, usize, f64)> = solver.a.triplets().collect();
        for (c, f, v) in solver.b.triplets() {
            t.push((nf + c, f, v));
            t.push((f, nf + c, v));
        }
        let lu = SparseLu::factor(&SparseOperator::from_triplets(nf + nc, nf + nc, &t))?;
        Ok(Self { n_faces: nf, lu })
    }

    /// Returns `(u, p)` for velocity load `rhs_u` and pressure load `rhs_p`.
    pub fn solve(
        &self,
        rhs_u: &[f64],
        rhs_p: &[f64],
    ) -> Result<(FluxField, CellField), SolverError> {
        let rhs: Vec<f64> = rhs_u.iter().chain(rhs_p).copied().collect();
        let mut x = self.lu.solve(&rhs);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite("steady subdomain solve"));
        }
        let p = x.split_off(self.n_faces);
        Ok((x, p))
    }
}
