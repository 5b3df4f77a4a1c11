//! The discrete summation-in-time identity and a stability monitor.

use crate::dd::DdSetup;
use crate::quadrature::GaussRule;
use crate::subdomain::{ProblemData, SubdomainTrajectory};

use super::errors::ERROR_POINTS;
use super::manufactured::ManufacturedCase;

/// Both sides of the summation-in-time identity for a piecewise-constant
/// trajectory `φ^0 = initial`, `φ^k = steps[k-1]` with cell weights `w`:
///
/// ```text
/// Σ_k (φ^k − φ^{k−1}, φ^k)  =  ½‖φ^N‖² − ½‖φ^0‖² + ½ Σ_k ‖φ^k − φ^{k−1}‖²
/// ```
pub fn summation_in_time(initial: &[f64], steps: &[Vec<f64>], weights: &[f64]) -> (f64, f64) {
    let ip = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .zip(weights)
            .map(|((x, y), w)| w * x * y)
            .sum::<f64>()
    };
    let mut lhs = 0.0;
    let mut jumps = 0.0;
    let mut prev = initial;
    for cur in steps {
        let d: Vec<f64> = cur.iter().zip(prev).map(|(a, b)| a - b).collect();
        lhs += ip(&d, cur);
        jumps += ip(&d, &d);
        prev = cur;
    }
    let rhs = 0.5 * (ip(prev, prev) - ip(initial, initial)) + 0.5 * jumps;
    (lhs, rhs)
}

/// `‖p_h‖_DG + ‖u_h‖ + ‖p_h‖` against `‖q‖ + ‖∇·K∇p_0‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityMonitor {
    pub solution_norm: f64,
    pub data_norm: f64,
}

impl StabilityMonitor {
    pub fn constant(&self) -> f64 {
        self.solution_norm / self.data_norm
    }
}

pub fn stability_monitor(
    case: &ManufacturedCase,
    setup: &DdSetup,
    trajectories: &[SubdomainTrajectory],
) -> StabilityMonitor {
    let rule = GaussRule::new(ERROR_POINTS);
    let (mut dg, mut u2, mut p2, mut q2, mut d2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (s, tr) in setup.solvers.iter().zip(trajectories) {
        let dm = &s.dofmap;
        let area = dm.cell_area();
        let mut prev = &tr.p0;
        for cur in &tr.p {
            dg += cur
                .iter()
                .zip(prev)
                .map(|(a, b)| area * (a - b).powi(2))
                .sum::<f64>();
            prev = cur;
        }
        dg += prev.iter().map(|v| area * v * v).sum::<f64>();
        for c in 0..dm.n_cells() {
            let (i, j) = dm.cell_ij(c);
            let (x0, x1, y0, y1) = dm.cell_bounds(i, j);
            for k in 0..tr.n_steps() {
                let (t0, t1) = s.spec.time.cell(k);
                p2 += (t1 - t0) * area * tr.p[k][c].powi(2);
                for (t, wt) in rule.on(t0, t1) {
                    for (y, wy) in rule.on(y0, y1) {
                        for (x, wx) in rule.on(x0, x1) {
                            let w = wt * wy * wx;
                            let [ux, uy] = dm.velocity_at(&tr.u[k], c, x, y);
                            u2 += w * (ux * ux + uy * uy);
                            q2 += w * case.source(x, y, t).powi(2);
                        }
                    }
                }
            }
            for (y, wy) in rule.on(y0, y1) {
                for (x, wx) in rule.on(x0, x1) {
                    d2 += wy * wx * case.velocity_divergence(x, y, 0.0).powi(2);
                }
            }
        }
    }
    StabilityMonitor {
        solution_norm: dg.sqrt() + u2.sqrt() + p2.sqrt(),
        data_norm: q2.sqrt() + d2.sqrt(),
    }
}
