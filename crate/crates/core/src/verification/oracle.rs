//! Direct sparse solve of the complete coupled space-time system: every
//! subdomain step and every mortar dof in one matrix.

use crate::dd::DdSetup;
use crate::error::SolverError;
use crate::linalg::{max_abs_diff, SparseLu, SparseOperator};
use crate::subdomain::{SubdomainData, SubdomainTrajectory};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub lambda: Vec<f64>,
    pub trajectories: Vec<SubdomainTrajectory>,
    /// `‖K x − f‖_∞ / max(‖f‖_∞, 1)`.
    pub residual: f64,
    /// 2-norm condition number, when the system is small enough for a dense
    /// SVD.
    pub condition: Option<f64>,
}

/// Default cap on the number of unknowns.
pub const ORACLE_CAP: usize = 200_000;
/// Systems up to this size also get a dense condition estimate.
pub const CONDITION_CAP: usize = 1500;

struct Layout {
    /// Start of subdomain `i`, step `k` block: `[u (n_faces), p (n_cells)]`.
    step_offset: Vec<Vec<usize>>,
    mortar_offset: usize,
    total: usize,
}

fn layout(setup: &DdSetup) -> Layout {
    let mut off = 0;
    let step_offset = setup
        .solvers
        .iter()
        .map(|s| {
            let block = s.dofmap.n_faces() + s.dofmap.n_cells();
            (0..s.n_steps())
                .map(|_| {
                    let o = off;
                    off += block;
                    o
                })
                .collect()
        })
        .collect();
    Layout {
        step_offset,
        mortar_offset: off,
        total: off + setup.coupling.dim(),
    }
}

/// Assembles and solves
///
/// ```text
/// A u^k + Bᵀ p^k + (1/Δt_k) b_Γ(·, λ)|_k    = −ℓ_k
/// B u^k − M p^k/Δt_k + M p^{k−1}/Δt_k        = −M q̄_k
/// Σ_i Σ_k b_Γ^T(u_i^k, μ_r)                  = 0
/// ```
///
/// for all subdomains at once.
pub fn monolithic_oracle(
    setup: &DdSetup,
    data: &[SubdomainData],
    cap: usize,
) -> Result<OracleSolution, SolverError> {
    let lay = layout(setup);
    if lay.total > cap {
        return Err(SolverError::DenseCap {
            dim: lay.total,
            cap,
        });
    }
    let mut t: Vec<(usize, usize, f64)> = Vec::new();
    let mut rhs = vec![0.0; lay.total];
    for (i, s) in setup.solvers.iter().enumerate() {
        let dm = &s.dofmap;
        let nf = dm.n_faces();
        let area = dm.cell_area();
        for k in 0..s.n_steps() {
            let dt = s.spec.time.width(k);
            let o = lay.step_offset[i][k];
            t.extend(s.a.triplets().map(|(r, c, v)| (o + r, o + c, v)));
            for (r, c, v) in s.b.triplets() {
                t.push((o + nf + r, o + c, v));
                t.push((o + c, o + nf + r, v));
            }
            for c in 0..dm.n_cells() {
                t.push((o + nf + c, o + nf + c, -area / dt));
                if k == 0 {
                    rhs[o + nf + c] = -area * (data[i].source[k][c] + data[i].p0[c] / dt);
                } else {
                    let prev = lay.step_offset[i][k - 1];
                    t.push((o + nf + c, prev + nf + c, area / dt));
                    rhs[o + nf + c] = -area * data[i].source[k][c];
                }
            }
            for (f, l) in data[i].boundary_load[k].iter().enumerate() {
                rhs[o + f] = -l;
            }
            for cpl in &setup.coupling.per_subdomain[i] {
                for (tau, tv) in cpl.t_time.row(k) {
                    for (local, &face) in cpl.faces.iter().enumerate() {
                        for (sigma, cv) in cpl.c_space.row(local) {
                            let m = lay.mortar_offset + cpl.offset + sigma * cpl.n_time_dofs + tau;
                            let w = cpl.sign * cv * tv;
                            t.push((o + face, m, w / dt));
                            t.push((m, o + face, w));
                        }
                    }
                }
            }
        }
    }
    let k = SparseOperator::from_triplets(lay.total, lay.total, &t);
    let condition = (lay.total <= CONDITION_CAP).then(|| {
        let sv = k.to_dense().svd(false, false).singular_values;
        sv.max() / sv.min()
    });
    let lu = SparseLu::factor(&k)?;
    let x = lu.solve(&rhs);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite("monolithic oracle"));
    }
    let kx = k.mul_vec(&x);
    let scale = rhs.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let residual = max_abs_diff(&kx, &rhs) / scale;

    let trajectories = setup
        .solvers
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let nf = s.dofmap.n_faces();
            let nc = s.dofmap.n_cells();
            let (u, p) = lay.step_offset[i]
                .iter()
                .map(|&o| (x[o..o + nf].to_vec(), x[o + nf..o + nf + nc].to_vec()))
                .unzip();
            SubdomainTrajectory {
                p0: data[i].p0.clone(),
                u,
                p,
            }
        })
        .collect();
    Ok(OracleSolution {
        lambda: x[lay.mortar_offset..].to_vec(),
        trajectories,
        residual,
        condition,
    })
}

/// Largest coefficient difference between two sets of trajectories and
/// mortar vectors.
pub fn max_coefficient_difference(
    a: (&[SubdomainTrajectory], &[f64]),
    b: (&[SubdomainTrajectory], &[f64]),
) -> f64 {
    let mut d = max_abs_diff(a.1, b.1);
    for (ta, tb) in a.0.iter().zip(b.0) {
        for (x, y) in ta.u.iter().zip(&tb.u).chain(ta.p.iter().zip(&tb.p)) {
            d = d.max(max_abs_diff(x, y));
        }
    }
    d
}
