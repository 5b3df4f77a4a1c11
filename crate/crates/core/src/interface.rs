//! The space-time Steklov-Poincaré operator, its right-hand side, full
//! GMRES, dense assembly and spectral diagnostics.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::SolverError;
use crate::linalg::{dot, norm2};
use crate::mortar::CouplingBlocks;
use crate::subdomain::{MortarData, SteadySolver, SubdomainData, SubdomainSolver};

/// Square linear map on mortar coefficient vectors.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<(), SolverError>;
}

#[derive(Debug, Clone, Copy)]
pub struct IdentityOperator(pub usize);

impl LinearOperator for IdentityOperator {
    fn dim(&self) -> usize {
        self.0
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<(), SolverError> {
        y.copy_from_slice(x);
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct DenseOperator(pub DMatrix<f64>);

impl LinearOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.0.nrows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<(), SolverError> {
        for (r, yr) in y.iter_mut().enumerate() {
            *yr = (0..self.0.ncols()).map(|c| self.0[(r, c)] * x[c]).sum();
        }
        Ok(())
    }
}

fn gather(parts: Vec<Vec<f64>>, y: &mut [f64]) -> Result<(), SolverError> {
    y.iter_mut().for_each(|v| *v = 0.0);
    for part in parts {
        for (a, b) in y.iter_mut().zip(part) {
            *a += b;
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite("interface operator"));
    }
    Ok(())
}

/// `(Sλ)_r = −Σ_i b_Γ^T(u*_i(λ), μ_r)`: one star solve per subdomain, run in
/// parallel, with moments gathered in subdomain order.
#[derive(Debug, Clone, Copy)]
pub struct InterfaceOperator<'a> {
    pub solvers: &'a [SubdomainSolver],
    pub coupling: &'a CouplingBlocks,
}

impl LinearOperator for InterfaceOperator<'_> {
    fn dim(&self) -> usize {
        self.coupling.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<(), SolverError> {
        let dim = self.dim();
        if x.len() != dim || y.len() != dim {
            return Err(SolverError::Dimension {
                expected: dim,
                found: x.len(),
            });
        }
        let parts: Vec<Vec<f64>> = self
            .solvers
            .par_iter()
            .zip(&self.coupling.per_subdomain)
            .map(|(s, cs)| {
                let mut out = vec![0.0; dim];
                let mut work = Vec::new();
                s.march(
                    None,
                    Some(MortarData {
                        couplings: cs,
                        lambda: x,
                    }),
                    |k, u, _| {
                        for c in cs {
                            c.add_moments(u, k, -1.0, &mut out, &mut work);
                        }
                    },
                );
                out
            })
            .collect();
        gather(parts, y)
    }
}

/// `g_r = Σ_i b_Γ^T(ū_i, μ_r)` from the bar solves.
pub fn compute_g(
    solvers: &[SubdomainSolver],
    coupling: &CouplingBlocks,
    data: &[SubdomainData],
) -> Result<Vec<f64>, SolverError> {
    let dim = coupling.dim();
    let parts: Vec<Vec<f64>> = solvers
        .par_iter()
        .zip(&coupling.per_subdomain)
        .zip(data)
        .map(|((s, cs), d)| {
            let mut out = vec![0.0; dim];
            let mut work = Vec::new();
            s.march(Some(d), None, |k, u, _| {
                for c in cs {
                    c.add_moments(u, k, 1.0, &mut out, &mut work);
                }
            });
            out
        })
        .collect();
    let mut g = vec![0.0; dim];
    gather(parts, &mut g)?;
    Ok(g)
}

/// Steady interface operator on spatial mortars, used for the elliptic
/// projection of the initial data.
#[derive(Debug, Clone, Copy)]
pub struct SteadyInterfaceOperator<'a> {
    pub solvers: &'a [SteadySolver],
    pub n_cells: &'a [usize],
    pub n_faces: &'a [usize],
    pub coupling: &'a CouplingBlocks,
}

impl SteadyInterfaceOperator<'_> {
    /// Velocity loads of every subdomain for spatial mortar data `λ`.
    pub fn mortar_loads(&self, lambda: &[f64]) -> Vec<Vec<f64>> {
        self.coupling
            .per_subdomain
            .iter()
            .zip(self.n_faces)
            .map(|(cs, &nf)| {
                let mut load = vec![0.0; nf];
                for c in cs {
                    c.add_space_load(lambda, -1.0, &mut load);
                }
                load
            })
            .collect()
    }
}

impl LinearOperator for SteadyInterfaceOperator<'_> {
    fn dim(&self) -> usize {
        self.coupling.space_dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<(), SolverError> {
        let dim = self.dim();
        let loads = self.mortar_loads(x);
        let parts: Result<Vec<Vec<f64>>, SolverError> = self
            .solvers
            .par_iter()
            .zip(&self.coupling.per_subdomain)
            .zip(loads)
            .zip(self.n_cells)
            .map(|(((s, cs), load), &nc)| {
                let (u, _) = s.solve(&load, &vec![0.0; nc])?;
                let mut out = vec![0.0; dim];
                for c in cs {
                    c.add_space_moments(&u, -1.0, &mut out);
                }
                Ok(out)
            })
            .collect();
        gather(parts?, y)
    }
}

#[derive(Clone, Copy)]
pub struct GmresOptions<'a> {
    /// Stop when `‖b − A x‖₂ ≤ tol ‖b‖₂`.
    pub tol: f64,
    pub max_iter: usize,
    /// Right preconditioner. None by default.
    pub preconditioner: Option<&'a dyn LinearOperator>,
}

impl Default for GmresOptions<'_> {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 1000,
            preconditioner: None,
        }
    }
}

impl std::fmt::Debug for GmresOptions<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GmresOptions")
            .field("tol", &self.tol)
            .field("max_iter", &self.max_iter)
            .field("preconditioned", &self.preconditioner.is_some())
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmresReport {
    pub iterations: usize,
    /// `‖r_k‖₂` for `k = 0..=iterations`, from the Givens least-squares
    /// recurrence.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub tol: f64,
}

impl GmresReport {
    pub fn relative_residual(&self) -> f64 {
        let r0 = self.residual_history[0];
        if r0 == 0.0 {
            0.0
        } else {
            self.residual_history.last().unwrap() / r0
        }
    }
}

/// Full GMRES from a zero initial guess with modified Gram-Schmidt and one
/// reorthogonalization pass. Non-convergence is reported, not an error.
pub fn gmres(
    op: &dyn LinearOperator,
    b: &[f64],
    opts: &GmresOptions<'_>,
) -> Result<(Vec<f64>, GmresReport), SolverError> {
    let n = op.dim();
    if b.len() != n {
        return Err(SolverError::Dimension {
            expected: n,
            found: b.len(),
        });
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite("GMRES right-hand side"));
    }
    let beta = norm2(b);
    let mut history = vec![beta];
    if beta == 0.0 {
        let report = GmresReport {
            iterations: 0,
            residual_history: history,
            converged: true,
            tol: opts.tol,
        };
        return Ok((vec![0.0; n], report));
    }
    let target = opts.tol * beta;
    let mut basis: Vec<Vec<f64>> = vec![b.iter().map(|v| v / beta).collect()];
    let mut hess: Vec<Vec<f64>> = Vec::new();
    let mut rotations: Vec<(f64, f64)> = Vec::new();
    let mut rhs = vec![beta];
    let mut z = vec![0.0; n];
    let mut converged = false;

    for j in 0..opts.max_iter.min(n.max(1)) {
        let mut w = vec![0.0; n];
        match opts.preconditioner {
            Some(m) => {
                m.apply(&basis[j], &mut z)?;
                op.apply(&z, &mut w)?;
            }
            None => op.apply(&basis[j], &mut w)?,
        }
        let mut h = vec![0.0; j + 2];
        for _ in 0..2 {
            for (i, v) in basis.iter().enumerate() {
                let c = dot(&w, v);
                h[i] += c;
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= c * vk;
                }
            }
        }
        let hn = norm2(&w);
        h[j + 1] = hn;
        for (i, &(c, s)) in rotations.iter().enumerate() {
            let (a, bb) = (h[i], h[i + 1]);
            h[i] = c * a + s * bb;
            h[i + 1] = -s * a + c * bb;
        }
        let r = h[j].hypot(h[j + 1]);
        let (c, s) = if r == 0.0 {
            (1.0, 0.0)
        } else {
            (h[j] / r, h[j + 1] / r)
        };
        h[j] = r;
        h[j + 1] = 0.0;
        rotations.push((c, s));
        let g = rhs[j];
        rhs[j] = c * g;
        rhs.push(-s * g);
        hess.push(h);
        let res = rhs[j + 1].abs();
        history.push(res);
        if res <= target {
            converged = true;
            break;
        }
        if hn <= 1e-14 * beta {
            // Happy breakdown: the Krylov space is invariant.
            converged = true;
            break;
        }
        basis.push(w.iter().map(|v| v / hn).collect());
    }

    let k = hess.len();
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = ((i + 1)..k).map(|l| hess[l][i] * y[l]).sum();
        y[i] = (rhs[i] - s) / hess[i][i];
    }
    let mut x = vec![0.0; n];
    for (yi, v) in y.iter().zip(&basis) {
        for (xk, vk) in x.iter_mut().zip(v) {
            *xk += yi * vk;
        }
    }
    if let Some(m) = opts.preconditioner {
        let mut px = vec![0.0; n];
        m.apply(&x, &mut px)?;
        x = px;
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite("GMRES solution"));
    }
    let report = GmresReport {
        iterations: k,
        residual_history: history,
        converged,
        tol: opts.tol,
    };
    Ok((x, report))
}

/// Default dimension cap for dense assembly.
pub const DENSE_CAP: usize = 2000;

/// Column `r` is `op(e_r)`.
pub fn assemble_dense(op: &dyn LinearOperator, cap: usize) -> Result<DMatrix<f64>, SolverError> {
    let n = op.dim();
    if n > cap {
        return Err(SolverError::DenseCap { dim: n, cap });
    }
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for r in 0..n {
        e[r] = 1.0;
        op.apply(&e, &mut col)?;
        e[r] = 0.0;
        m.column_mut(r).copy_from_slice(&col);
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub lambda_min_sym: f64,
    pub norm_s: f64,
    pub cos_beta: f64,
    /// `sin β`, the per-iteration GMRES residual factor bound.
    pub predicted_factor: f64,
    /// `‖S − Sᵀ‖₂ / ‖S‖₂`.
    pub symmetry_defect: f64,
}

impl SpectralReport {
    pub fn ratio(&self) -> f64 {
        self.norm_s / self.lambda_min_sym
    }
}

/// `cos β = λ_min((S + Sᵀ)/2) / ‖S‖₂`. With `gram` (diagonal of the mortar
/// Gram matrix `G`) the operator is measured in `L²` as `G^{-1/2} S G^{-1/2}`.
pub fn spectral_diagnostics(
    s: &DMatrix<f64>,
    gram: Option<&[f64]>,
) -> Result<SpectralReport, SolverError> {
    let n = s.nrows();
    let m = match gram {
        Some(g) => {
            if g.len() != n {
                return Err(SolverError::Dimension {
                    expected: n,
                    found: g.len(),
                });
            }
            DMatrix::from_fn(n, n, |r, c| s[(r, c)] / (g[r] * g[c]).sqrt())
        }
        None => s.clone(),
    };
    let sym = (&m + m.transpose()) * 0.5;
    let lambda_min = SymmetricEigen::new(sym).eigenvalues.min();
    let norm = m.clone().svd(false, false).singular_values.max();
    let skew = (&m - m.transpose()).svd(false, false).singular_values.max();
    if !(lambda_min > 0.0) {
        return Err(SolverError::NotPositiveDefinite(lambda_min));
    }
    let cos_beta = (lambda_min / norm).min(1.0);
    Ok(SpectralReport {
        lambda_min_sym: lambda_min,
        norm_s: norm,
        cos_beta,
        predicted_factor: (1.0 - cos_beta * cos_beta).max(0.0).sqrt(),
        symmetry_defect: skew / norm,
    })
}
