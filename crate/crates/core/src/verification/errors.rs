use rayon::prelude::*;

use crate::dd::DdSetup;
use crate::geometry::merge_breakpoints;
use crate::quadrature::GaussRule;
use crate::subdomain::SubdomainTrajectory;

use super::manufactured::ManufacturedCase;

/// Gauss points per direction for error integrals.
pub const ERROR_POINTS: usize = 3;

/// Errors relative to the matching norms of the exact solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    /// `‖u − u_h‖_{L²(0,T;L²(Ω))}`.
    pub e_u: f64,
    /// Final-time term of the DG norm, `‖p(T) − p_h(T⁻)‖_{L²(Ω)}`, relative
    /// to `‖p(T)‖`. The jump terms carry a `Δt^{-1/2}` factor and are left
    /// out; see `e_p_dg_full`.
    pub e_p_dg: f64,
    /// Full DG norm with the jumps, relative to `‖p(T)‖_{L²(Ω)}`.
    pub e_p_dg_full: f64,
    /// `‖p − p_h‖_{L²(0,T;L²(Ω))}`.
    pub e_p: f64,
    /// `‖p − λ_H‖_{L²(Γ × (0,T))}`.
    pub e_lambda: f64,
    /// `‖∇·(u − u_h)‖_{L²(0,T;L²(Ω))}`, only when every subdomain and mortar
    /// shares one time grid.
    pub e_div: Option<f64>,
}

impl ErrorReport {
    pub fn as_array(&self) -> [f64; 4] {
        [self.e_u, self.e_p_dg, self.e_p, self.e_lambda]
    }
}

#[derive(Default, Clone, Copy)]
struct Sums {
    eu: f64,
    u: f64,
    ep: f64,
    p: f64,
    dg: f64,
    final_err: f64,
    p_final: f64,
    ediv: f64,
    div: f64,
}

impl std::ops::Add for Sums {
    type Output = Sums;
    fn add(self, o: Sums) -> Sums {
        Sums {
            eu: self.eu + o.eu,
            u: self.u + o.u,
            ep: self.ep + o.ep,
            p: self.p + o.p,
            dg: self.dg + o.dg,
            final_err: self.final_err + o.final_err,
            p_final: self.p_final + o.p_final,
            ediv: self.ediv + o.ediv,
            div: self.div + o.div,
        }
    }
}

fn ratio(err2: f64, norm2: f64) -> f64 {
    if norm2 > 0.0 {
        (err2 / norm2).sqrt()
    } else {
        err2.sqrt()
    }
}

/// Computes all error norms of a DD solution with `λ` the global mortar
/// vector.
pub fn error_norms(
    case: &ManufacturedCase,
    setup: &DdSetup,
    trajectories: &[SubdomainTrajectory],
    lambda: &[f64],
) -> ErrorReport {
    let rule = GaussRule::new(ERROR_POINTS);
    let t_final = setup.decomposition.final_time;
    let sums = setup
        .solvers
        .par_iter()
        .zip(trajectories)
        .map(|(s, tr)| {
            let dm = &s.dofmap;
            let area = dm.cell_area();
            let mut acc = Sums::default();
            for c in 0..dm.n_cells() {
                let (i, j) = dm.cell_ij(c);
                let (x0, x1, y0, y1) = dm.cell_bounds(i, j);
                for k in 0..tr.n_steps() {
                    let (t0, t1) = s.spec.time.cell(k);
                    let uk = &tr.u[k];
                    let pk = tr.p[k][c];
                    let div_h = dm.divergence(uk, c);
                    for (t, wt) in rule.on(t0, t1) {
                        for (y, wy) in rule.on(y0, y1) {
                            for (x, wx) in rule.on(x0, x1) {
                                let w = wt * wy * wx;
                                let u = case.velocity(x, y, t);
                                let uh = dm.velocity_at(uk, c, x, y);
                                let p = case.pressure(x, y, t);
                                let div = case.velocity_divergence(x, y, t);
                                acc.eu += w * ((u[0] - uh[0]).powi(2) + (u[1] - uh[1]).powi(2));
                                acc.u += w * (u[0] * u[0] + u[1] * u[1]);
                                acc.ep += w * (p - pk).powi(2);
                                acc.p += w * p * p;
                                acc.ediv += w * (div - div_h).powi(2);
                                acc.div += w * div * div;
                            }
                        }
                    }
                    let prev = if k == 0 { tr.p0[c] } else { tr.p[k - 1][c] };
                    acc.dg += area * (pk - prev).powi(2);
                }
                let p_last = tr.p.last().map_or(tr.p0[c], |p| p[c]);
                for (y, wy) in rule.on(y0, y1) {
                    for (x, wx) in rule.on(x0, x1) {
                        let p = case.pressure(x, y, t_final);
                        acc.final_err += wy * wx * (p - p_last).powi(2);
                        acc.p_final += wy * wx * p * p;
                    }
                }
            }
            acc
        })
        .reduce(Sums::default, |a, b| a + b);

    let (mut el, mut nl) = (0.0, 0.0);
    for (f, space) in setup.decomposition.interfaces.iter().zip(&setup.mortars) {
        let coeffs = &lambda[setup.coupling.layout.range(f.id)];
        let (i, j) = f.subdomains;
        let di = &setup.decomposition.subdomains[i];
        let dj = &setup.decomposition.subdomains[j];
        let ss = merge_breakpoints(&[
            space.space.breakpoints(),
            di.side_partition(f.side_of(i).unwrap()).breakpoints(),
            dj.side_partition(f.side_of(j).unwrap()).breakpoints(),
        ]);
        let ts = merge_breakpoints(&[
            space.time.breakpoints(),
            di.time.breakpoints(),
            dj.time.breakpoints(),
        ]);
        for sw in ss.windows(2) {
            for tw in ts.windows(2) {
                for (t, wt) in rule.on(tw[0], tw[1]) {
                    for (s, ws) in rule.on(sw[0], sw[1]) {
                        let (x, y) = f.point(s);
                        let p = case.pressure(x, y, t);
                        let lh = space.evaluate(coeffs, s, t);
                        el += wt * ws * (p - lh).powi(2);
                        nl += wt * ws * p * p;
                    }
                }
            }
        }
    }

    let common = setup.decomposition.has_common_time_grid()
        && setup
            .mortars
            .iter()
            .all(|m| m.time == setup.decomposition.subdomains[0].time);
    ErrorReport {
        e_u: ratio(sums.eu, sums.u),
        e_p_dg: ratio(sums.final_err, sums.p_final),
        e_p_dg_full: ratio(sums.dg + sums.final_err, sums.p_final),
        e_p: ratio(sums.ep, sums.p),
        e_lambda: ratio(el, nl),
        e_div: common.then(|| ratio(sums.ediv, sums.div)),
    }
}

/// Exact-solution norms `(‖u‖, ‖p‖, ‖p(T)‖)` over the space-time domain,
/// integrated on the subdomain grids.
pub fn exact_norms(case: &ManufacturedCase, setup: &DdSetup) -> (f64, f64, f64) {
    let rule = GaussRule::new(ERROR_POINTS);
    let mut acc = [0.0; 3];
    for s in &setup.solvers {
        let dm = &s.dofmap;
        for c in 0..dm.n_cells() {
            let (i, j) = dm.cell_ij(c);
            let (x0, x1, y0, y1) = dm.cell_bounds(i, j);
            for k in 0..s.n_steps() {
                let (t0, t1) = s.spec.time.cell(k);
                for (t, wt) in rule.on(t0, t1) {
                    for (y, wy) in rule.on(y0, y1) {
                        for (x, wx) in rule.on(x0, x1) {
                            let u = case.velocity(x, y, t);
                            acc[0] += wt * wy * wx * (u[0] * u[0] + u[1] * u[1]);
                            acc[1] += wt * wy * wx * case.pressure(x, y, t).powi(2);
                        }
                    }
                }
            }
            for (y, wy) in rule.on(y0, y1) {
                for (x, wx) in rule.on(x0, x1) {
                    acc[2] += wy * wx * case.pressure(x, y, setup.decomposition.final_time).powi(2);
                }
            }
        }
    }
    (acc[0].sqrt(), acc[1].sqrt(), acc[2].sqrt())
}
