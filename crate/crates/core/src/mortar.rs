//! Space-time mortar spaces on interfaces, the coupling between subdomain
//! flux traces and mortars, trace projections, and a numeric check of the
//! mortar grid conditions.
//!
//! # Mortar vector layout
//!
//! Interfaces are stored back to back in interface order. Within interface
//! `γ` the dof of spatial basis `(e, a)` (mortar cell `e`, Legendre degree
//! `a`) and temporal basis `(τ, b)` sits at
//! `offset[γ] + (e (m+1) + a) · n_t + τ (s+1) + b` where `n_t` is the number
//! of temporal dofs of the interface. Basis functions are tensor Legendre
//! polynomials on each space-time mortar cell, so the `L²` Gram is diagonal.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::MortarError;
use crate::fem::DofMap;
use crate::geometry::{
    merge_breakpoints, BoundarySide, Decomposition, InterfaceSpec, Partition1D, COORD_TOL,
};
use crate::linalg::SparseOperator;
use crate::quadrature::{legendre_norm_sq, legendre_on, GaussRule};

/// Gauss points per merged interval; exact for all supported degrees.
const COUPLING_POINTS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct MortarSpace {
    pub interface: usize,
    pub space: Partition1D,
    pub time: Partition1D,
    pub degree_space: usize,
    pub degree_time: usize,
}

impl MortarSpace {
    pub fn n_space_dofs(&self) -> usize {
        self.space.len() * (self.degree_space + 1)
    }

    pub fn n_time_dofs(&self) -> usize {
        self.time.len() * (self.degree_time + 1)
    }

    pub fn n_dofs(&self) -> usize {
        self.n_space_dofs() * self.n_time_dofs()
    }

    pub fn dof(&self, space_dof: usize, time_dof: usize) -> usize {
        space_dof * self.n_time_dofs() + time_dof
    }

    /// Diagonal of the space-time `L²` Gram matrix.
    pub fn gram_diagonal(&self) -> Vec<f64> {
        let sg = self.space_gram();
        let tg: Vec<f64> = (0..self.time.len())
            .flat_map(|k| {
                let (t0, t1) = self.time.cell(k);
                (0..=self.degree_time).map(move |b| legendre_norm_sq(b, t0, t1))
            })
            .collect();
        sg.iter()
            .flat_map(|&s| tg.iter().map(move |&t| s * t))
            .collect()
    }

    /// Diagonal of the spatial `L²` Gram matrix.
    pub fn space_gram(&self) -> Vec<f64> {
        (0..self.space.len())
            .flat_map(|e| {
                let (s0, s1) = self.space.cell(e);
                (0..=self.degree_space).map(move |a| legendre_norm_sq(a, s0, s1))
            })
            .collect()
    }

    /// Value of the mortar function with interface-local coefficients at
    /// tangential coordinate `s` and time `t`.
    pub fn evaluate(&self, coeffs: &[f64], s: f64, t: f64) -> f64 {
        let e = self.space.locate(s);
        let k = self.time.locate(t);
        let (s0, s1) = self.space.cell(e);
        let (t0, t1) = self.time.cell(k);
        let mut v = 0.0;
        for a in 0..=self.degree_space {
            let pa = legendre_on(a, s0, s1, s);
            for b in 0..=self.degree_time {
                let pb = legendre_on(b, t0, t1, t);
                v += coeffs[self.dof(
                    e * (self.degree_space + 1) + a,
                    k * (self.degree_time + 1) + b,
                )] * pa
                    * pb;
            }
        }
        v
    }
}

/// Uniform mortar grid with `space_cells × time_cells` cells on `interface`.
pub fn build_mortar_space(
    interface: &InterfaceSpec,
    space_cells: usize,
    time_cells: usize,
    degree_space: usize,
    degree_time: usize,
    final_time: f64,
) -> Result<MortarSpace, MortarError> {
    for d in [degree_space, degree_time] {
        if d > 2 {
            return Err(MortarError::Degree(d));
        }
    }
    Ok(MortarSpace {
        interface: interface.id,
        space: Partition1D::uniform(interface.range.0, interface.range.1, space_cells)?,
        time: Partition1D::uniform(0.0, final_time, time_cells)?,
        degree_space,
        degree_time,
    })
}

/// Mortars equal to the finer trace grid of each interface, piecewise
/// constant in space and time. The side with more space-time trace cells
/// provides both the spatial and the temporal grid.
pub fn matched_mortars(decomposition: &Decomposition) -> Vec<MortarSpace> {
    decomposition
        .interfaces
        .iter()
        .map(|f| {
            let (i, j) = f.subdomains;
            let cells = |s: usize| {
                let spec = &decomposition.subdomains[s];
                let side = f.side_of(s).unwrap();
                (spec.side_partition(side), spec.time.clone())
            };
            let (si, ti) = cells(i);
            let (sj, tj) = cells(j);
            let (space, time) = if si.len() * ti.len() >= sj.len() * tj.len() {
                (si, ti)
            } else {
                (sj, tj)
            };
            MortarSpace {
                interface: f.id,
                space,
                time,
                degree_space: 0,
                degree_time: 0,
            }
        })
        .collect()
}

/// Offsets of each interface block in a mortar vector.
#[derive(Debug, Clone, PartialEq)]
pub struct MortarLayout {
    offsets: Vec<usize>,
}

impl MortarLayout {
    pub fn new(spaces: &[MortarSpace]) -> Self {
        let mut offsets = Vec::with_capacity(spaces.len() + 1);
        offsets.push(0);
        for s in spaces {
            offsets.push(offsets.last().unwrap() + s.n_dofs());
        }
        Self { offsets }
    }

    pub fn total(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn range(&self, interface: usize) -> std::ops::Range<usize> {
        self.offsets[interface]..self.offsets[interface + 1]
    }
}

/// Coupling of one subdomain with one adjacent interface.
///
/// For face `f` of the trace (flux dof `φ_f`, normal trace `1/|f|`) and
/// subdomain time slab `k`:
/// `b_Γ^T(φ_f 1_k, μ_{(σ,τ)}) = sign · c_space[f, σ] · t_time[k, τ]`.
#[derive(Debug, Clone)]
pub struct SubdomainCoupling {
    pub interface: usize,
    pub side: BoundarySide,
    /// `+1` if the subdomain's outward normal is the positive axis direction.
    pub sign: f64,
    /// Velocity dofs of the trace faces, in increasing tangential coordinate.
    pub faces: Vec<usize>,
    pub face_lengths: Vec<f64>,
    /// `(1/|f|) ∫_f P_a` per (trace face, spatial mortar dof).
    pub c_space: SparseOperator,
    /// `∫_{slab} P_b` per (subdomain time step, temporal mortar dof).
    pub t_time: SparseOperator,
    pub offset: usize,
    /// Offset of this interface in a spatial-only (steady) mortar vector.
    pub space_offset: usize,
    pub n_space_dofs: usize,
    pub n_time_dofs: usize,
}

impl SubdomainCoupling {
    /// Spatial mortar coefficients of `λ` averaged against the temporal
    /// basis over slab `k`: `w[σ] = Σ_τ T[k, τ] λ[σ, τ]`.
    fn slab_weights(&self, lambda: &[f64], k: usize, w: &mut Vec<f64>) {
        w.clear();
        w.resize(self.n_space_dofs, 0.0);
        let block = &lambda[self.offset..self.offset + self.n_space_dofs * self.n_time_dofs];
        for (tau, tv) in self.t_time.row(k) {
            for (sigma, ws) in w.iter_mut().enumerate() {
                *ws += tv * block[sigma * self.n_time_dofs + tau];
            }
        }
    }

    /// `load[f] += alpha · (1/Δt_k) b_Γ^T(φ_f 1_k, λ)`, i.e. the slab-averaged
    /// mortar Dirichlet load on the velocity equations.
    pub fn add_load(
        &self,
        lambda: &[f64],
        k: usize,
        dt: f64,
        alpha: f64,
        load: &mut [f64],
        work: &mut Vec<f64>,
    ) {
        self.slab_weights(lambda, k, work);
        let scale = alpha * self.sign / dt;
        for (local, &f) in self.faces.iter().enumerate() {
            let v: f64 = self
                .c_space
                .row(local)
                .map(|(sigma, c)| c * work[sigma])
                .sum();
            load[f] += scale * v;
        }
    }

    /// `out[r] += alpha · b_Γ^T(u^k 1_k, μ_r)` for the mortar dofs of this
    /// interface, where `u` holds the subdomain fluxes of step `k`.
    pub fn add_moments(
        &self,
        u: &[f64],
        k: usize,
        alpha: f64,
        out: &mut [f64],
        work: &mut Vec<f64>,
    ) {
        work.clear();
        work.resize(self.n_space_dofs, 0.0);
        for (local, &f) in self.faces.iter().enumerate() {
            let uf = u[f];
            if uf == 0.0 {
                continue;
            }
            for (sigma, c) in self.c_space.row(local) {
                work[sigma] += c * uf;
            }
        }
        let block = &mut out[self.offset..self.offset + self.n_space_dofs * self.n_time_dofs];
        for (tau, tv) in self.t_time.row(k) {
            let s = alpha * self.sign * tv;
            for (sigma, ws) in work.iter().enumerate() {
                block[sigma * self.n_time_dofs + tau] += s * ws;
            }
        }
    }

    /// Steady counterpart of [`Self::add_load`] for a spatial mortar vector.
    pub fn add_space_load(&self, lambda: &[f64], alpha: f64, load: &mut [f64]) {
        let block = &lambda[self.space_offset..self.space_offset + self.n_space_dofs];
        for (local, &f) in self.faces.iter().enumerate() {
            let v: f64 = self
                .c_space
                .row(local)
                .map(|(sigma, c)| c * block[sigma])
                .sum();
            load[f] += alpha * self.sign * v;
        }
    }

    /// Steady counterpart of [`Self::add_moments`].
    pub fn add_space_moments(&self, u: &[f64], alpha: f64, out: &mut [f64]) {
        let block = &mut out[self.space_offset..self.space_offset + self.n_space_dofs];
        for (local, &f) in self.faces.iter().enumerate() {
            for (sigma, c) in self.c_space.row(local) {
                block[sigma] += alpha * self.sign * c * u[f];
            }
        }
    }

    /// Face values of the `L²` projection of `λ` onto face × slab constants.
    pub fn project(&self, lambda: &[f64], k: usize, dt: f64) -> Vec<f64> {
        let mut work = Vec::new();
        self.slab_weights(lambda, k, &mut work);
        (0..self.faces.len())
            .map(|local| {
                self.c_space
                    .row(local)
                    .map(|(sigma, c)| c * work[sigma])
                    .sum::<f64>()
                    / dt
            })
            .collect()
    }
}

/// All subdomain/interface couplings of a decomposition.
#[derive(Debug, Clone)]
pub struct CouplingBlocks {
    pub layout: MortarLayout,
    /// Dimension of the spatial-only mortar vector.
    pub space_dim: usize,
    /// `per_subdomain[i]` lists the couplings of subdomain `i`.
    pub per_subdomain: Vec<Vec<SubdomainCoupling>>,
}

impl CouplingBlocks {
    pub fn dim(&self) -> usize {
        self.layout.total()
    }

    /// `b_Γ^T(u, μ_r)` for all mortar dofs, given every subdomain's flux
    /// history `fluxes[i][k]`.
    pub fn apply(&self, fluxes: &[Vec<Vec<f64>>]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        let mut work = Vec::new();
        for (i, couplings) in self.per_subdomain.iter().enumerate() {
            for c in couplings {
                for (k, u) in fluxes[i].iter().enumerate() {
                    c.add_moments(u, k, 1.0, &mut out, &mut work);
                }
            }
        }
        out
    }
}

fn integrate_legendre_pieces(
    fine: &Partition1D,
    coarse: &Partition1D,
    degree: usize,
    rule: &GaussRule,
    mut add: impl FnMut(usize, usize, f64),
) {
    let merged = merge_breakpoints(&[fine.breakpoints(), coarse.breakpoints()]);
    for w in merged.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        let fk = fine.locate(mid);
        let ce = coarse.locate(mid);
        let (c0, c1) = coarse.cell(ce);
        for d in 0..=degree {
            let v = rule.integrate(a, b, |x| legendre_on(d, c0, c1, x));
            add(fk, ce * (degree + 1) + d, v);
        }
    }
}

fn same_span(a: &Partition1D, lo: f64, hi: f64) -> bool {
    let scale = (hi - lo).abs().max(1.0);
    (a.start() - lo).abs() <= COORD_TOL * scale && (a.end() - hi).abs() <= COORD_TOL * scale
}

/// Builds the factorized coupling `b_Γ^T` for every subdomain/interface pair.
pub fn assemble_coupling(
    decomposition: &Decomposition,
    spaces: &[MortarSpace],
    dofmaps: &[DofMap],
) -> Result<CouplingBlocks, MortarError> {
    if spaces.len() != decomposition.interfaces.len() {
        return Err(MortarError::Count {
            expected: decomposition.interfaces.len(),
            found: spaces.len(),
        });
    }
    let layout = MortarLayout::new(spaces);
    let mut space_offsets = vec![0];
    for s in spaces {
        space_offsets.push(space_offsets.last().unwrap() + s.n_space_dofs());
    }
    let rule = GaussRule::new(COUPLING_POINTS);
    let mut per_subdomain = vec![Vec::new(); decomposition.n_subdomains()];
    for (f, space) in decomposition.interfaces.iter().zip(spaces) {
        if space.interface != f.id
            || !same_span(&space.space, f.range.0, f.range.1)
            || !same_span(&space.time, 0.0, decomposition.final_time)
        {
            return Err(MortarError::SegmentMismatch(f.id));
        }
        for sub in [f.subdomains.0, f.subdomains.1] {
            let spec = &decomposition.subdomains[sub];
            let dm = &dofmaps[sub];
            let side = f.side_of(sub).expect("interface lists its subdomains");
            let trace = spec.side_partition(side);
            let n_trace = trace.len();
            let face_lengths: Vec<f64> = trace.widths().collect();

            let mut ct = Vec::new();
            integrate_legendre_pieces(
                &trace,
                &space.space,
                space.degree_space,
                &rule,
                |k, sigma, v| {
                    ct.push((k, sigma, v / face_lengths[k]));
                },
            );
            let mut tt = Vec::new();
            integrate_legendre_pieces(
                &spec.time,
                &space.time,
                space.degree_time,
                &rule,
                |k, tau, v| {
                    tt.push((k, tau, v));
                },
            );
            per_subdomain[sub].push(SubdomainCoupling {
                interface: f.id,
                side,
                sign: side.outward_sign(),
                faces: (0..n_trace).map(|k| dm.boundary_face(side, k)).collect(),
                face_lengths,
                c_space: SparseOperator::from_triplets(n_trace, space.n_space_dofs(), &ct),
                t_time: SparseOperator::from_triplets(spec.n_steps(), space.n_time_dofs(), &tt),
                offset: layout.range(f.id).start,
                space_offset: space_offsets[f.id],
                n_space_dofs: space.n_space_dofs(),
                n_time_dofs: space.n_time_dofs(),
            });
        }
    }
    Ok(CouplingBlocks {
        layout,
        space_dim: *space_offsets.last().unwrap(),
        per_subdomain,
    })
}

/// `Q_{h,i}^{Δt} μ` on every interface of subdomain `i`: for each coupling,
/// `values[k][face]` is the average of `μ` over face × slab `k`.
pub fn project_onto_trace(
    blocks: &CouplingBlocks,
    decomposition: &Decomposition,
    mortar: &[f64],
    subdomain: usize,
) -> Vec<(usize, Vec<Vec<f64>>)> {
    let time = &decomposition.subdomains[subdomain].time;
    blocks.per_subdomain[subdomain]
        .iter()
        .map(|c| {
            (
                c.interface,
                (0..time.len())
                    .map(|k| c.project(mortar, k, time.width(k)))
                    .collect(),
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceAssumption {
    pub interface: usize,
    /// `min_μ (‖Q_i μ‖² + ‖Q_j μ‖²)^{1/2} / ‖μ‖` over spatial mortars.
    pub c_space: f64,
    /// Both subdomain time grids refine the mortar time grid and the
    /// temporal mortar degree does not exceed the subdomain degree (0).
    pub time_nested: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MortarAssumptionReport {
    pub interfaces: Vec<InterfaceAssumption>,
    pub c_space: f64,
    pub time_nested: bool,
    pub warnings: Vec<String>,
}

/// Spatial condition below this value is reported as violated.
pub const C_SPACE_WARN: f64 = 1e-8;

pub fn check_mortar_assumptions(
    decomposition: &Decomposition,
    spaces: &[MortarSpace],
) -> Result<MortarAssumptionReport, MortarError> {
    if spaces.len() != decomposition.interfaces.len() {
        return Err(MortarError::Count {
            expected: decomposition.interfaces.len(),
            found: spaces.len(),
        });
    }
    let rule = GaussRule::new(COUPLING_POINTS);
    let mut interfaces = Vec::new();
    let mut warnings = Vec::new();
    for (f, space) in decomposition.interfaces.iter().zip(spaces) {
        let n = space.n_space_dofs();
        let mut q = DMatrix::<f64>::zeros(n, n);
        let mut time_nested = space.degree_time == 0;
        for sub in [f.subdomains.0, f.subdomains.1] {
            let spec = &decomposition.subdomains[sub];
            let side = f.side_of(sub).unwrap();
            let trace = spec.side_partition(side);
            // Rows: trace faces; entries (1/|f|) ∫_f P_a, so (C μ)_f is the
            // face average and ‖Q μ‖² = Σ_f |f| (C μ)_f².
            let mut c = DMatrix::<f64>::zeros(trace.len(), n);
            integrate_legendre_pieces(
                &trace,
                &space.space,
                space.degree_space,
                &rule,
                |k, sigma, v| {
                    c[(k, sigma)] += v / trace.width(k);
                },
            );
            let weights = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                trace.len(),
                trace.widths(),
            ));
            q += c.transpose() * weights * &c;
            time_nested &= spec.time.refines(&space.time);
        }
        let g: Vec<f64> = space.space_gram();
        let scaled = DMatrix::from_fn(n, n, |r, s| q[(r, s)] / (g[r] * g[s]).sqrt());
        let lmin = SymmetricEigen::new(scaled).eigenvalues.min().max(0.0);
        let c_space = lmin.sqrt();
        if c_space < C_SPACE_WARN {
            warnings.push(format!(
                "interface {}: spatial mortar not controlled by subdomain traces (c_space = {c_space:.3e})",
                f.id
            ));
        }
        if !time_nested {
            warnings.push(format!(
                "interface {}: temporal mortar space is not contained in both subdomain time spaces \
                 (degree {} vs subdomain degree 0 or non-nested grids)",
                f.id, space.degree_time
            ));
        }
        interfaces.push(InterfaceAssumption {
            interface: f.id,
            c_space,
            time_nested,
        });
    }
    Ok(MortarAssumptionReport {
        c_space: interfaces
            .iter()
            .map(|i| i.c_space)
            .fold(f64::INFINITY, f64::min),
        time_nested: interfaces.iter().all(|i| i.time_nested),
        interfaces,
        warnings,
    })
}
