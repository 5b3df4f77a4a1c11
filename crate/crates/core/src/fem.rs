//! Lowest-order Raviart-Thomas velocity × piecewise-constant pressure on a
//! uniform rectangular subdomain grid.
//!
//! Velocity unknowns are face fluxes `∫_f v·e dS` with `e` the positive
//! coordinate direction normal to the face (`+x` on vertical faces, `+y` on
//! horizontal faces). Pressure unknowns are cell values.

use crate::error::FemError;
use crate::geometry::{BoundarySide, SubdomainSpec};
use crate::linalg::SparseOperator;
use crate::quadrature::GaussRule;

/// Per-cell pressure values of one subdomain.
pub type CellField = Vec<f64>;
/// Per-face normal fluxes of one subdomain.
pub type FluxField = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceOrientation {
    /// Face at fixed `x`, flux along `+x`.
    Vertical,
    /// Face at fixed `y`, flux along `+y`.
    Horizontal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub subdomain: usize,
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub dx: f64,
    pub dy: f64,
}

impl DofMap {
    pub fn new(spec: &SubdomainSpec) -> Self {
        Self {
            subdomain: spec.id,
            nx: spec.nx,
            ny: spec.ny,
            x0: spec.rect.x0,
            y0: spec.rect.y0,
            dx: spec.dx(),
            dy: spec.dy(),
        }
    }

    pub fn n_vfaces(&self) -> usize {
        (self.nx + 1) * self.ny
    }

    pub fn n_hfaces(&self) -> usize {
        self.nx * (self.ny + 1)
    }

    pub fn n_faces(&self) -> usize {
        self.n_vfaces() + self.n_hfaces()
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    /// Vertical face at `x = x0 + i dx`, row `j`.
    pub fn vface(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    /// Horizontal face at `y = y0 + j dy`, column `i`.
    pub fn hface(&self, i: usize, j: usize) -> usize {
        self.n_vfaces() + j * self.nx + i
    }

    pub fn cell(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn cell_ij(&self, c: usize) -> (usize, usize) {
        (c % self.nx, c / self.nx)
    }

    pub fn face_info(&self, f: usize) -> (FaceOrientation, usize, usize) {
        if f < self.n_vfaces() {
            (
                FaceOrientation::Vertical,
                f % (self.nx + 1),
                f / (self.nx + 1),
            )
        } else {
            let g = f - self.n_vfaces();
            (FaceOrientation::Horizontal, g % self.nx, g / self.nx)
        }
    }

    pub fn face_length(&self, f: usize) -> f64 {
        match self.face_info(f).0 {
            FaceOrientation::Vertical => self.dy,
            FaceOrientation::Horizontal => self.dx,
        }
    }

    /// `[west, east, south, north]` faces of cell `(i, j)`.
    pub fn cell_faces(&self, i: usize, j: usize) -> [usize; 4] {
        [
            self.vface(i, j),
            self.vface(i + 1, j),
            self.hface(i, j),
            self.hface(i, j + 1),
        ]
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn cell_bounds(&self, i: usize, j: usize) -> (f64, f64, f64, f64) {
        let x0 = self.x0 + self.dx * i as f64;
        let y0 = self.y0 + self.dy * j as f64;
        (x0, x0 + self.dx, y0, y0 + self.dy)
    }

    pub fn cell_center(&self, c: usize) -> (f64, f64) {
        let (i, j) = self.cell_ij(c);
        let (x0, x1, y0, y1) = self.cell_bounds(i, j);
        (0.5 * (x0 + x1), 0.5 * (y0 + y1))
    }

    pub fn side_len(&self, side: BoundarySide) -> usize {
        match side {
            BoundarySide::West | BoundarySide::East => self.ny,
            BoundarySide::South | BoundarySide::North => self.nx,
        }
    }

    /// The `k`-th face (increasing tangential coordinate) on a side.
    pub fn boundary_face(&self, side: BoundarySide, k: usize) -> usize {
        match side {
            BoundarySide::West => self.vface(0, k),
            BoundarySide::East => self.vface(self.nx, k),
            BoundarySide::South => self.hface(k, 0),
            BoundarySide::North => self.hface(k, self.ny),
        }
    }

    /// Face interval `(lo, hi)` in the tangential coordinate of a side.
    pub fn boundary_face_interval(&self, side: BoundarySide, k: usize) -> (f64, f64) {
        match side {
            BoundarySide::West | BoundarySide::East => {
                let y = self.y0 + self.dy * k as f64;
                (y, y + self.dy)
            }
            BoundarySide::South | BoundarySide::North => {
                let x = self.x0 + self.dx * k as f64;
                (x, x + self.dx)
            }
        }
    }

    /// Fixed coordinate of a side.
    pub fn side_position(&self, side: BoundarySide) -> f64 {
        match side {
            BoundarySide::West => self.x0,
            BoundarySide::East => self.x0 + self.dx * self.nx as f64,
            BoundarySide::South => self.y0,
            BoundarySide::North => self.y0 + self.dy * self.ny as f64,
        }
    }

    /// Face ordering that keeps every cell's four faces within about
    /// `2 nx + 1` positions of each other: bottom faces of row `j`, then the
    /// vertical faces of row `j`.
    pub fn banded_face_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.n_faces());
        for j in 0..=self.ny {
            order.extend((0..self.nx).map(|i| self.hface(i, j)));
            if j < self.ny {
                order.extend((0..=self.nx).map(|i| self.vface(i, j)));
            }
        }
        order
    }

    /// RT0 velocity at `(x, y)` inside cell `c`.
    pub fn velocity_at(&self, flux: &[f64], c: usize, x: f64, y: f64) -> [f64; 2] {
        let (i, j) = self.cell_ij(c);
        let (x0, x1, y0, y1) = self.cell_bounds(i, j);
        let [w, e, s, n] = self.cell_faces(i, j);
        let area = self.cell_area();
        [
            (flux[w] * (x1 - x) + flux[e] * (x - x0)) / area,
            (flux[s] * (y1 - y) + flux[n] * (y - y0)) / area,
        ]
    }

    /// Divergence of an RT0 field on cell `c` (constant).
    pub fn divergence(&self, flux: &[f64], c: usize) -> f64 {
        let (i, j) = self.cell_ij(c);
        let [w, e, s, n] = self.cell_faces(i, j);
        (flux[e] - flux[w] + flux[n] - flux[s]) / self.cell_area()
    }
}

/// Cellwise-constant symmetric permeability tensors `[kxx, kxy, kyy]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PermeabilityField {
    tensors: Vec<[f64; 3]>,
}

impl PermeabilityField {
    pub fn identity(n_cells: usize) -> Self {
        Self {
            tensors: vec![[1.0, 0.0, 1.0]; n_cells],
        }
    }

    pub fn constant(n_cells: usize, k: [f64; 3]) -> Self {
        Self {
            tensors: vec![k; n_cells],
        }
    }

    /// Samples `k(x, y)` at cell centers.
    pub fn sample(dofmap: &DofMap, k: impl Fn(f64, f64) -> [f64; 3]) -> Self {
        Self {
            tensors: (0..dofmap.n_cells())
                .map(|c| {
                    let (x, y) = dofmap.cell_center(c);
                    k(x, y)
                })
                .collect(),
        }
    }

    pub fn tensors(&self) -> &[[f64; 3]] {
        &self.tensors
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            tensors: self
                .tensors
                .iter()
                .map(|t| [t[0] * c, t[1] * c, t[2] * c])
                .collect(),
        }
    }

    /// Inverse tensors, failing on any cell that is not SPD.
    pub fn inverses(&self) -> Result<Vec<[f64; 3]>, FemError> {
        self.tensors
            .iter()
            .enumerate()
            .map(|(cell, &[a, b, c])| {
                let det = a * c - b * b;
                if !(a > 0.0 && det > 0.0) || !det.is_finite() {
                    return Err(FemError::NotSpd { cell });
                }
                Ok([c / det, -b / det, a / det])
            })
            .collect()
    }
}

/// Velocity mass matrix `(K⁻¹ u, v)` in flux-dof scaling, integrated exactly
/// for cellwise-constant `K`.
pub fn assemble_velocity_mass(
    dofmap: &DofMap,
    k: &PermeabilityField,
) -> Result<SparseOperator, FemError> {
    if k.tensors().len() != dofmap.n_cells() {
        return Err(FemError::FieldSize {
            expected: dofmap.n_cells(),
            found: k.tensors().len(),
        });
    }
    let kinv = k.inverses()?;
    let (dx, dy) = (dofmap.dx, dofmap.dy);
    let mut t = Vec::with_capacity(dofmap.n_cells() * 16);
    for j in 0..dofmap.ny {
        for i in 0..dofmap.nx {
            let c = dofmap.cell(i, j);
            let [a, b, cc] = kinv[c];
            let [w, e, s, n] = dofmap.cell_faces(i, j);
            let xs = a * dx / dy;
            let ys = cc * dy / dx;
            for (p, q, m) in [(w, w, 2.0), (e, e, 2.0), (w, e, 1.0), (e, w, 1.0)] {
                t.push((p, q, xs * m / 6.0));
            }
            for (p, q, m) in [(s, s, 2.0), (n, n, 2.0), (s, n, 1.0), (n, s, 1.0)] {
                t.push((p, q, ys * m / 6.0));
            }
            if b != 0.0 {
                for xf in [w, e] {
                    for yf in [s, n] {
                        t.push((xf, yf, 0.25 * b));
                        t.push((yf, xf, 0.25 * b));
                    }
                }
            }
        }
    }
    let n = dofmap.n_faces();
    Ok(SparseOperator::from_triplets(n, n, &t))
}

/// `B[cell, face] = -(∇·φ_face, 1_cell)`.
pub fn assemble_divergence(dofmap: &DofMap) -> SparseOperator {
    let mut t = Vec::with_capacity(dofmap.n_cells() * 4);
    for j in 0..dofmap.ny {
        for i in 0..dofmap.nx {
            let c = dofmap.cell(i, j);
            let [w, e, s, n] = dofmap.cell_faces(i, j);
            t.extend([(c, w, 1.0), (c, e, -1.0), (c, s, 1.0), (c, n, -1.0)]);
        }
    }
    SparseOperator::from_triplets(dofmap.n_cells(), dofmap.n_faces(), &t)
}

/// Diagonal pressure mass matrix (cell areas).
pub fn assemble_pressure_mass(dofmap: &DofMap) -> SparseOperator {
    SparseOperator::diagonal(&vec![dofmap.cell_area(); dofmap.n_cells()])
}

/// Cell averages of `f` over `cell × (t0, t1)` by a tensor Gauss rule with
/// `points` nodes per direction.
pub fn project_scalar(
    dofmap: &DofMap,
    f: impl Fn(f64, f64, f64) -> f64,
    time_interval: (f64, f64),
    points: usize,
) -> CellField {
    let rule = GaussRule::new(points);
    let (t0, t1) = time_interval;
    let measure = dofmap.cell_area() * (t1 - t0);
    (0..dofmap.n_cells())
        .map(|c| {
            let (i, j) = dofmap.cell_ij(c);
            let (x0, x1, y0, y1) = dofmap.cell_bounds(i, j);
            let mut s = 0.0;
            for (t, wt) in rule.on(t0, t1) {
                for (y, wy) in rule.on(y0, y1) {
                    for (x, wx) in rule.on(x0, x1) {
                        s += wt * wy * wx * f(x, y, t);
                    }
                }
            }
            s / measure
        })
        .collect()
}

/// Cell averages of a time-independent `f`.
pub fn project_spatial(dofmap: &DofMap, f: impl Fn(f64, f64) -> f64, points: usize) -> CellField {
    project_scalar(dofmap, |x, y, _| f(x, y), (0.0, 1.0), points)
}

/// Adds the Dirichlet load `⟨φ_f·n, g⟩` averaged over `(t0, t1)` for every
/// face on `side` to `load`.
pub fn add_boundary_load(
    dofmap: &DofMap,
    side: BoundarySide,
    g: impl Fn(f64, f64, f64) -> f64,
    time_interval: (f64, f64),
    points: usize,
    load: &mut [f64],
) {
    let rule = GaussRule::new(points);
    let (t0, t1) = time_interval;
    let pos = dofmap.side_position(side);
    let sign = side.outward_sign();
    for k in 0..dofmap.side_len(side) {
        let (s0, s1) = dofmap.boundary_face_interval(side, k);
        let mut avg = 0.0;
        for (t, wt) in rule.on(t0, t1) {
            for (s, ws) in rule.on(s0, s1) {
                let (x, y) = match side {
                    BoundarySide::West | BoundarySide::East => (pos, s),
                    BoundarySide::South | BoundarySide::North => (s, pos),
                };
                avg += wt * ws * g(x, y, t);
            }
        }
        avg /= (s1 - s0) * (t1 - t0);
        load[dofmap.boundary_face(side, k)] += sign * avg;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Partition1D, Rect};

    fn dofmap(nx: usize, ny: usize, w: f64, h: f64) -> DofMap {
        let spec = SubdomainSpec::new(
            0,
            Rect::new(0.0, w, 0.0, h),
            nx,
            ny,
            Partition1D::uniform(0.0, 1.0, 1).unwrap(),
        );
        DofMap::new(&spec)
    }

    /// RT0 basis function of face `f` evaluated at `(x, y)` in cell `c`.
    fn basis(d: &DofMap, f: usize, c: usize, x: f64, y: f64) -> [f64; 2] {
        let mut flux = vec![0.0; d.n_faces()];
        flux[f] = 1.0;
        d.velocity_at(&flux, c, x, y)
    }

    /// Independent route: 4×4 Gauss quadrature of the basis products.
    fn mass_by_quadrature(d: &DofMap, kinv: [f64; 3]) -> nalgebra::DMatrix<f64> {
        let rule = GaussRule::new(4);
        let n = d.n_faces();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for c in 0..d.n_cells() {
            let (i, j) = d.cell_ij(c);
            let faces = d.cell_faces(i, j);
            let (x0, x1, y0, y1) = d.cell_bounds(i, j);
            for (x, wx) in rule.on(x0, x1) {
                for (y, wy) in rule.on(y0, y1) {
                    for &p in &faces {
                        for &q in &faces {
                            let u = basis(d, p, c, x, y);
                            let v = basis(d, q, c, x, y);
                            let ku = [
                                kinv[0] * u[0] + kinv[1] * u[1],
                                kinv[1] * u[0] + kinv[2] * u[1],
                            ];
                            m[(p, q)] += wx * wy * (ku[0] * v[0] + ku[1] * v[1]);
                        }
                    }
                }
            }
        }
        m
    }

    #[test]
    fn unit_cell_x_block() {
        let d = dofmap(1, 1, 1.0, 1.0);
        let a = assemble_velocity_mass(&d, &PermeabilityField::identity(1)).unwrap();
        let (w, e) = (d.vface(0, 0), d.vface(1, 0));
        assert!((a.get(w, w) - 1.0 / 3.0).abs() < 1e-15);
        assert!((a.get(e, e) - 1.0 / 3.0).abs() < 1e-15);
        assert!((a.get(w, e) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn mass_matches_quadrature_oracle() {
        let d = dofmap(3, 2, 0.7, 0.4);
        for k in [[1.0, 0.0, 1.0], [2.0, 0.5, 1.5], [0.3, 0.0, 4.0]] {
            let det = k[0] * k[2] - k[1] * k[1];
            let kinv = [k[2] / det, -k[1] / det, k[0] / det];
            let a =
                assemble_velocity_mass(&d, &PermeabilityField::constant(d.n_cells(), k)).unwrap();
            let oracle = mass_by_quadrature(&d, kinv);
            let diff = (a.to_dense() - oracle).abs().max();
            assert!(diff < 1e-13, "diff {diff}");
            assert!(a.is_symmetric());
        }
    }

    #[test]
    fn mass_scales_inversely_with_k() {
        let d = dofmap(2, 3, 1.0, 1.0);
        let k = PermeabilityField::constant(d.n_cells(), [1.5, 0.2, 0.9]);
        let a1 = assemble_velocity_mass(&d, &k).unwrap();
        let a2 = assemble_velocity_mass(&d, &k.scaled(2.0)).unwrap();
        let diff = (a1.to_dense() * 0.5 - a2.to_dense()).abs().max();
        assert!(diff < 1e-15);
    }

    #[test]
    fn diagonal_k_has_no_cross_coupling() {
        let d = dofmap(1, 1, 1.0, 1.0);
        let a =
            assemble_velocity_mass(&d, &PermeabilityField::constant(1, [2.0, 0.0, 4.0])).unwrap();
        let [w, e, s, n] = d.cell_faces(0, 0);
        assert!((a.get(w, w) - 1.0 / 6.0).abs() < 1e-15);
        assert!((a.get(s, s) - 1.0 / 12.0).abs() < 1e-15);
        for x in [w, e] {
            for y in [s, n] {
                assert_eq!(a.get(x, y), 0.0);
            }
        }
    }

    #[test]
    fn mass_is_spd_on_small_grids() {
        for nx in 1..=4 {
            for ny in 1..=4 {
                let d = dofmap(nx, ny, 1.0, 0.6);
                let a = assemble_velocity_mass(
                    &d,
                    &PermeabilityField::constant(d.n_cells(), [1.0, 0.3, 2.0]),
                )
                .unwrap();
                let eig = nalgebra::SymmetricEigen::new(a.to_dense());
                assert!(eig.eigenvalues.min() > 0.0);
            }
        }
    }

    #[test]
    fn non_spd_tensor_is_rejected() {
        let d = dofmap(1, 1, 1.0, 1.0);
        let k = PermeabilityField::constant(1, [1.0, 2.0, 1.0]);
        assert_eq!(
            assemble_velocity_mass(&d, &k),
            Err(FemError::NotSpd { cell: 0 })
        );
    }

    #[test]
    fn divergence_rows() {
        let d = dofmap(1, 1, 1.0, 1.0);
        let b = assemble_divergence(&d);
        let [w, e, s, n] = d.cell_faces(0, 0);
        assert_eq!(
            (b.get(0, e), b.get(0, w), b.get(0, n), b.get(0, s)),
            (-1.0, 1.0, -1.0, 1.0)
        );
    }

    #[test]
    fn divergence_of_constant_field_vanishes() {
        let d = dofmap(3, 4, 1.0, 2.0);
        // u = (1, -2): flux through vertical faces = dy, horizontal = -2 dx.
        let flux: Vec<f64> = (0..d.n_faces())
            .map(|f| match d.face_info(f).0 {
                FaceOrientation::Vertical => d.dy,
                FaceOrientation::Horizontal => -2.0 * d.dx,
            })
            .collect();
        let bu = assemble_divergence(&d).mul_vec(&flux);
        assert!(bu.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn divergence_theorem_on_one_cell() {
        let d = dofmap(2, 2, 1.0, 1.0);
        let (i, j) = (1, 0);
        let c = d.cell(i, j);
        let [w, e, s, n] = d.cell_faces(i, j);
        let mut flux = vec![0.0; d.n_faces()];
        flux[e] = 1.0;
        flux[n] = 1.0;
        flux[w] = -1.0;
        flux[s] = -1.0;
        assert!((d.divergence(&flux, c) - 4.0 / d.cell_area()).abs() < 1e-12);
    }

    #[test]
    fn pressure_mass_entries() {
        let d = dofmap(2, 2, 1.0, 1.0);
        let m = assemble_pressure_mass(&d);
        assert!((0..4).all(|c| m.get(c, c) == 0.25));
        let d = dofmap(4, 4, 1.0, 1.0);
        assert_eq!(assemble_pressure_mass(&d).get(0, 0), 0.0625);
        let d = dofmap(2, 5, 1.0, 1.0);
        assert!((assemble_pressure_mass(&d).get(3, 3) - 0.1).abs() < 1e-16);
    }

    #[test]
    fn projection_of_simple_functions() {
        let d = dofmap(1, 1, 1.0, 1.0);
        assert!((project_scalar(&d, |_, _, _| 3.5, (0.0, 0.2), 3)[0] - 3.5).abs() < 1e-14);
        assert!((project_scalar(&d, |x, _, _| x, (0.3, 0.9), 3)[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn patch_test_linear_pressure() {
        // p = 1 + 2x - 3y, K = I, u = (-2, 3): the discrete system with exact
        // Dirichlet data is satisfied by the interpolant of u and the cell
        // averages of p.
        let d = dofmap(3, 2, 1.0, 1.0);
        let p = |x: f64, y: f64| 1.0 + 2.0 * x - 3.0 * y;
        let a = assemble_velocity_mass(&d, &PermeabilityField::identity(d.n_cells())).unwrap();
        let b = assemble_divergence(&d);
        let flux: Vec<f64> = (0..d.n_faces())
            .map(|f| match d.face_info(f).0 {
                FaceOrientation::Vertical => -2.0 * d.dy,
                FaceOrientation::Horizontal => 3.0 * d.dx,
            })
            .collect();
        let ph = project_spatial(&d, p, 3);
        let mut r = a.mul_vec(&flux);
        b.apply_transpose_add(1.0, &ph, &mut r);
        let mut load = vec![0.0; d.n_faces()];
        for side in BoundarySide::ALL {
            add_boundary_load(&d, side, |x, y, _| p(x, y), (0.0, 1.0), 3, &mut load);
        }
        for (ri, li) in r.iter().zip(&load) {
            assert!((ri + li).abs() < 1e-12, "{ri} {li}");
        }
        assert!(b.mul_vec(&flux).iter().all(|v| v.abs() < 1e-12));
    }
}
