//! Domain decomposition driver: setup of subdomain solvers and couplings,
//! the interface GMRES solve and recovery of subdomain trajectories.

use rayon::prelude::*;

use crate::error::SolverError;
use crate::fem::{CellField, DofMap, PermeabilityField};
use crate::geometry::{BoundarySide, Decomposition, COORD_TOL};
use crate::interface::{compute_g, gmres, GmresOptions, GmresReport, InterfaceOperator};
use crate::mortar::{assemble_coupling, CouplingBlocks, MortarSpace};
use crate::subdomain::{
    MortarData, ProblemData, SubdomainData, SubdomainSolver, SubdomainTrajectory,
};

/// Sides of subdomain `i` that lie on the exterior boundary.
pub fn exterior_sides(decomposition: &Decomposition, i: usize) -> Vec<BoundarySide> {
    let r = &decomposition.subdomains[i].rect;
    let d = &decomposition.domain;
    let tol = COORD_TOL * d.width().max(d.height()).max(1.0);
    BoundarySide::ALL
        .into_iter()
        .filter(|side| match side {
            BoundarySide::West => (r.x0 - d.x0).abs() <= tol,
            BoundarySide::East => (r.x1 - d.x1).abs() <= tol,
            BoundarySide::South => (r.y0 - d.y0).abs() <= tol,
            BoundarySide::North => (r.y1 - d.y1).abs() <= tol,
        })
        .collect()
}

/// Everything needed to apply the interface operator for one decomposition
/// and mortar choice.
#[derive(Debug)]
pub struct DdSetup {
    pub decomposition: Decomposition,
    pub mortars: Vec<MortarSpace>,
    pub solvers: Vec<SubdomainSolver>,
    pub coupling: CouplingBlocks,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DdSolution {
    pub lambda: Vec<f64>,
    pub trajectories: Vec<SubdomainTrajectory>,
    pub report: GmresReport,
}

impl DdSetup {
    /// `permeability(x, y)` is sampled at cell centers.
    pub fn new(
        decomposition: Decomposition,
        mortars: Vec<MortarSpace>,
        permeability: impl Fn(f64, f64) -> [f64; 3] + Sync,
    ) -> Result<Self, SolverError> {
        let solvers: Vec<SubdomainSolver> = decomposition
            .subdomains
            .par_iter()
            .map(|spec| {
                let k = PermeabilityField::sample(&DofMap::new(spec), &permeability);
                SubdomainSolver::new(spec.clone(), &k, exterior_sides(&decomposition, spec.id))
            })
            .collect::<Result<_, _>>()?;
        let dofmaps: Vec<DofMap> = solvers.iter().map(|s| s.dofmap.clone()).collect();
        let coupling = assemble_coupling(&decomposition, &mortars, &dofmaps)?;
        Ok(Self {
            decomposition,
            mortars,
            solvers,
            coupling,
        })
    }

    pub fn n_mortar_dofs(&self) -> usize {
        self.coupling.dim()
    }

    pub fn operator(&self) -> InterfaceOperator<'_> {
        InterfaceOperator {
            solvers: &self.solvers,
            coupling: &self.coupling,
        }
    }

    /// Projects source and boundary data; `p0[i]` is the initial pressure
    /// of subdomain `i`.
    pub fn sample_data(&self, problem: &dyn ProblemData, p0: Vec<CellField>) -> Vec<SubdomainData> {
        self.solvers
            .par_iter()
            .zip(p0)
            .map(|(s, p)| SubdomainData::sample(s, problem, p))
            .collect()
    }

    pub fn zero_initial(&self) -> Vec<CellField> {
        self.solvers
            .iter()
            .map(|s| vec![0.0; s.dofmap.n_cells()])
            .collect()
    }

    pub fn compute_g(&self, data: &[SubdomainData]) -> Result<Vec<f64>, SolverError> {
        compute_g(&self.solvers, &self.coupling, data)
    }

    /// Subdomain trajectories for given interface data.
    pub fn recover(&self, data: &[SubdomainData], lambda: &[f64]) -> Vec<SubdomainTrajectory> {
        self.solvers
            .par_iter()
            .zip(&self.coupling.per_subdomain)
            .zip(data)
            .map(|((s, cs), d)| {
                s.trajectory(
                    Some(d),
                    Some(MortarData {
                        couplings: cs,
                        lambda,
                    }),
                )
            })
            .collect()
    }

    /// Solves `S λ = g` by GMRES and recovers the subdomain solutions.
    pub fn solve(
        &self,
        data: &[SubdomainData],
        opts: &GmresOptions<'_>,
    ) -> Result<DdSolution, SolverError> {
        let g = self.compute_g(data)?;
        let (lambda, report) = gmres(&self.operator(), &g, opts)?;
        let trajectories = self.recover(data, &lambda);
        Ok(DdSolution {
            lambda,
            trajectories,
            report,
        })
    }

    /// Largest signed flux mismatch `|Σ_i b_Γ^T(u_i, μ_r)|` over mortar basis
    /// functions, i.e. the residual of weak flux continuity.
    pub fn flux_mismatch(&self, trajectories: &[SubdomainTrajectory]) -> Vec<f64> {
        let fluxes: Vec<Vec<Vec<f64>>> = trajectories.iter().map(|t| t.u.clone()).collect();
        self.coupling.apply(&fluxes)
    }
}
