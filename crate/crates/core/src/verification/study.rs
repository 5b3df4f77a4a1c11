//! Refinement studies and the graded multiscale configuration.

use crate::dd::{DdSetup, DdSolution};
use crate::error::SolverError;
use crate::geometry::{block_decomposition, refine_example1, Axis, Decomposition, Rect};
use crate::interface::GmresOptions;
use crate::mortar::{build_mortar_space, matched_mortars, MortarSpace};

use super::errors::{error_norms, ErrorReport};
use super::init::{elliptic_projection_init, InitialProjection};
use super::manufactured::ManufacturedCase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MortarKind {
    /// Discontinuous bilinear, `H = 2h`, `ΔT = 2Δt`: `2^ℓ` cells per
    /// interface in space and time.
    Dgq1,
    /// Discontinuous biquadratic, refined every other level: `2^⌊ℓ/2⌋` cells.
    Dgq2,
    /// Piecewise constants on the finer trace grid of each interface.
    Matched,
}

impl MortarKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Dgq1 => "dgq1",
            Self::Dgq2 => "dgq2",
            Self::Matched => "matched",
        }
    }
}

pub fn example1_mortars(
    decomposition: &Decomposition,
    level: u32,
    kind: MortarKind,
) -> Vec<MortarSpace> {
    let (cells, degree) = match kind {
        MortarKind::Dgq1 => (1usize << level, 1),
        MortarKind::Dgq2 => (1usize << (level / 2), 2),
        MortarKind::Matched => return matched_mortars(decomposition),
    };
    decomposition
        .interfaces
        .iter()
        .map(|f| {
            build_mortar_space(f, cells, cells, degree, degree, decomposition.final_time)
                .expect("valid degree")
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Example2Mode {
    /// Graded subdomain grids, linear mortars.
    Multiscale,
    /// Uniform `h = 1/128`, `Δt = 1/64`, mortars equal to the traces.
    Fine,
}

/// Cells per side of each block of the 4 × 4 decomposition (rows from the
/// bottom), graded toward the lower-left corner.
pub const EXAMPLE2_CELLS: [[usize; 4]; 4] = [
    [32, 16, 16, 16],
    [16, 16, 8, 8],
    [16, 8, 4, 4],
    [16, 8, 4, 2],
];

/// Mortar cells per interface of the multiscale configuration, indexed by
/// the row (vertical interfaces) or column (horizontal interfaces).
pub const EXAMPLE2_MORTAR_CELLS: [usize; 4] = [8, 4, 2, 2];

pub fn example2_configuration(
    mode: Example2Mode,
) -> Result<(Decomposition, Vec<MortarSpace>), SolverError> {
    let t = 0.5;
    match mode {
        Example2Mode::Multiscale => {
            let d = block_decomposition(
                Rect::unit_square(),
                t,
                4,
                4,
                |ix, iy| EXAMPLE2_CELLS[iy][ix],
                |ix, iy| EXAMPLE2_CELLS[iy][ix].max(4),
            )?;
            let mortars = d
                .interfaces
                .iter()
                .map(|f| {
                    let s = &d.subdomains[f.subdomains.0];
                    let index = match f.axis {
                        Axis::Vertical => (s.rect.y0 * 4.0).round() as usize,
                        Axis::Horizontal => (s.rect.x0 * 4.0).round() as usize,
                    };
                    build_mortar_space(f, EXAMPLE2_MORTAR_CELLS[index], 4, 1, 1, t)
                })
                .collect::<Result<_, _>>()?;
            Ok((d, mortars))
        }
        Example2Mode::Fine => {
            let d = block_decomposition(Rect::unit_square(), t, 4, 4, |_, _| 32, |_, _| 32)?;
            let m = matched_mortars(&d);
            Ok((d, m))
        }
    }
}

/// One solved configuration with its errors.
#[derive(Debug)]
pub struct CaseRun {
    pub setup: DdSetup,
    pub initial: InitialProjection,
    pub solution: DdSolution,
    pub errors: ErrorReport,
}

/// Elliptic-projection initial data, interface GMRES, recovery and error
/// norms for `case` on a prepared setup.
pub fn run_case(
    case: &ManufacturedCase,
    setup: DdSetup,
    opts: &GmresOptions<'_>,
) -> Result<CaseRun, SolverError> {
    let initial = elliptic_projection_init(
        &setup,
        &|x, y| case.initial_pressure(x, y),
        &|x, y| case.velocity_divergence(x, y, 0.0),
        opts,
    )?;
    let data = setup.sample_data(case, initial.p0.clone());
    let solution = setup.solve(&data, opts)?;
    let errors = error_norms(case, &setup, &solution.trajectories, &solution.lambda);
    Ok(CaseRun {
        setup,
        initial,
        solution,
        errors,
    })
}

pub fn setup_example1(
    case: &ManufacturedCase,
    level: u32,
    kind: MortarKind,
) -> Result<DdSetup, SolverError> {
    let (d, _) = refine_example1(level)?;
    let mortars = example1_mortars(&d, level, kind);
    let k = case.permeability;
    DdSetup::new(d, mortars, move |_, _| k)
}

pub fn setup_example2(case: &ManufacturedCase, mode: Example2Mode) -> Result<DdSetup, SolverError> {
    let (d, mortars) = example2_configuration(mode)?;
    let k = case.permeability;
    DdSetup::new(d, mortars, move |_, _| k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub level: u32,
    pub h: f64,
    pub mortar_dofs: usize,
    pub gmres_iterations: usize,
    pub errors: ErrorReport,
}

impl StudyRow {
    pub fn from_run(level: u32, run: &CaseRun) -> Self {
        Self {
            level,
            h: run.setup.decomposition.h(),
            mortar_dofs: run.setup.n_mortar_dofs(),
            gmres_iterations: run.solution.report.iterations,
            errors: run.errors,
        }
    }
}

/// Rates between consecutive rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    /// `log(it_a/it_b)/log(h_a/h_b)`; negative when iterations grow.
    pub gmres: f64,
    /// `log(e_a/e_b)/log(h_a/h_b)` for `e_u, e_p_dg, e_p, e_lambda`.
    pub errors: [f64; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<StudyRow>,
    /// `rates[i]` compares row `i` with row `i − 1`; `None` for the first.
    pub rates: Vec<Option<Rates>>,
}

fn rate(a: f64, b: f64, ha: f64, hb: f64) -> f64 {
    (a / b).ln() / (ha / hb).ln()
}

impl ConvergenceTable {
    pub fn from_rows(rows: Vec<StudyRow>) -> Self {
        let rates = (0..rows.len())
            .map(|i| {
                (i > 0).then(|| {
                    let (a, b) = (&rows[i - 1], &rows[i]);
                    let ea = a.errors.as_array();
                    let eb = b.errors.as_array();
                    Rates {
                        gmres: rate(
                            a.gmres_iterations as f64,
                            b.gmres_iterations as f64,
                            a.h,
                            b.h,
                        ),
                        errors: std::array::from_fn(|n| rate(ea[n], eb[n], a.h, b.h)),
                    }
                })
            })
            .collect();
        Self { rows, rates }
    }
}

/// Example 1 refinement study over `levels` with the given mortars.
pub fn convergence_study(
    case: &ManufacturedCase,
    levels: &[u32],
    kind: MortarKind,
    opts: &GmresOptions<'_>,
) -> Result<ConvergenceTable, SolverError> {
    let mut rows = Vec::with_capacity(levels.len());
    for &level in levels {
        let run = run_case(case, setup_example1(case, level, kind)?, opts)?;
        rows.push(StudyRow::from_run(level, &run));
    }
    Ok(ConvergenceTable::from_rows(rows))
}
