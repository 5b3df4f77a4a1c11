use crate::geometry::Rect;
use crate::subdomain::ProblemData;

type ScalarFn = fn(f64, f64, f64) -> f64;
type VectorFn = fn(f64, f64, f64) -> [f64; 2];

/// Known pressure `p`, its derivatives, and the matching source
/// `q = ∂_t p − ∇·(K∇p)` for constant `K`.
#[derive(Debug, Clone, Copy)]
pub struct ManufacturedCase {
    pub label: &'static str,
    pub domain: Rect,
    pub final_time: f64,
    /// `[kxx, kxy, kyy]`.
    pub permeability: [f64; 3],
    /// Multiplies every field; relative errors do not depend on it.
    pub scale: f64,
    pressure: ScalarFn,
    gradient: VectorFn,
    time_derivative: ScalarFn,
    source: ScalarFn,
}

impl ManufacturedCase {
    pub fn scaled(mut self, s: f64) -> Self {
        self.scale *= s;
        self
    }

    pub fn pressure(&self, x: f64, y: f64, t: f64) -> f64 {
        self.scale * (self.pressure)(x, y, t)
    }

    pub fn gradient(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        let g = (self.gradient)(x, y, t);
        [self.scale * g[0], self.scale * g[1]]
    }

    pub fn time_derivative(&self, x: f64, y: f64, t: f64) -> f64 {
        self.scale * (self.time_derivative)(x, y, t)
    }

    /// Darcy velocity `u = −K∇p`.
    pub fn velocity(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        let [gx, gy] = self.gradient(x, y, t);
        let [a, b, c] = self.permeability;
        [-(a * gx + b * gy), -(b * gx + c * gy)]
    }

    /// `∇·u = q − ∂_t p`.
    pub fn velocity_divergence(&self, x: f64, y: f64, t: f64) -> f64 {
        self.source(x, y, t) - self.time_derivative(x, y, t)
    }

    pub fn initial_pressure(&self, x: f64, y: f64) -> f64 {
        self.pressure(x, y, 0.0)
    }

    /// Largest relative discrepancy between the source closure and
    /// `∂_t p − ∇·(K∇p)` from central differences with step `h`, and
    /// between the gradient closure and differences of `p`.
    pub fn finite_difference_defect(&self, points: &[(f64, f64, f64)], h: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for &(x, y, t) in points {
            let p = |x, y, t| self.pressure(x, y, t);
            let dt = (p(x, y, t + h) - p(x, y, t - h)) / (2.0 * h);
            let gx = (p(x + h, y, t) - p(x - h, y, t)) / (2.0 * h);
            let gy = (p(x, y + h, t) - p(x, y - h, t)) / (2.0 * h);
            let div = (self.velocity(x + h, y, t)[0] - self.velocity(x - h, y, t)[0]) / (2.0 * h)
                + (self.velocity(x, y + h, t)[1] - self.velocity(x, y - h, t)[1]) / (2.0 * h);
            let q = self.source(x, y, t);
            let g = self.gradient(x, y, t);
            let scale = q.abs().max(g[0].abs()).max(g[1].abs()).max(1.0);
            for d in [
                q - (dt + div),
                g[0] - gx,
                g[1] - gy,
                self.time_derivative(x, y, t) - dt,
            ] {
                worst = worst.max(d.abs() / scale);
            }
        }
        worst
    }
}

impl ProblemData for ManufacturedCase {
    fn source(&self, x: f64, y: f64, t: f64) -> f64 {
        self.scale * (self.source)(x, y, t)
    }

    fn boundary_pressure(&self, x: f64, y: f64, t: f64) -> f64 {
        self.pressure(x, y, t)
    }
}

const PI_4: f64 = std::f64::consts::FRAC_PI_4;

/// `p = sin(8t) sin(11x) cos(11y − π/4)`, `K = I` on `(0,1)² × (0, 0.5)`.
pub fn example1() -> ManufacturedCase {
    ManufacturedCase {
        label: "example1",
        domain: Rect::unit_square(),
        final_time: 0.5,
        permeability: [1.0, 0.0, 1.0],
        scale: 1.0,
        pressure: |x, y, t| (8.0 * t).sin() * (11.0 * x).sin() * (11.0 * y - PI_4).cos(),
        gradient: |x, y, t| {
            let s = 11.0 * (8.0 * t).sin();
            [
                s * (11.0 * x).cos() * (11.0 * y - PI_4).cos(),
                -s * (11.0 * x).sin() * (11.0 * y - PI_4).sin(),
            ]
        },
        time_derivative: |x, y, t| {
            8.0 * (8.0 * t).cos() * (11.0 * x).sin() * (11.0 * y - PI_4).cos()
        },
        source: |x, y, t| {
            let space = (11.0 * x).sin() * (11.0 * y - PI_4).cos();
            8.0 * (8.0 * t).cos() * space + 242.0 * (8.0 * t).sin() * space
        },
    }
}

fn ex2_envelope(x: f64, y: f64, t: f64) -> f64 {
    (-10.0 * (x * x + y * y + 0.25 * t * t)).exp()
}

/// `p = 1000 x y t exp(−10(x² + y² + t²/4))`, `K = I` on
/// `(0,1)² × (0, 0.5)`: a layer at the lower-left corner.
pub fn example2() -> ManufacturedCase {
    ManufacturedCase {
        label: "example2",
        domain: Rect::unit_square(),
        final_time: 0.5,
        permeability: [1.0, 0.0, 1.0],
        scale: 1.0,
        pressure: |x, y, t| 1000.0 * x * y * t * ex2_envelope(x, y, t),
        gradient: |x, y, t| {
            let e = 1000.0 * t * ex2_envelope(x, y, t);
            [e * y * (1.0 - 20.0 * x * x), e * x * (1.0 - 20.0 * y * y)]
        },
        time_derivative: |x, y, t| 1000.0 * x * y * ex2_envelope(x, y, t) * (1.0 - 5.0 * t * t),
        source: |x, y, t| {
            let e = 1000.0 * x * y * ex2_envelope(x, y, t);
            e * ((1.0 - 5.0 * t * t) - t * (400.0 * (x * x + y * y) - 120.0))
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(n: usize) -> Vec<(f64, f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        (0..n)
            .map(|_| {
                (
                    rng.gen_range(0.0..1.0),
                    rng.gen_range(0.0..1.0),
                    rng.gen_range(0.0..0.5),
                )
            })
            .collect()
    }

    #[test]
    fn sources_match_finite_differences() {
        let pts = random_points(50);
        assert!(example1().finite_difference_defect(&pts, 1e-5) < 1e-6);
        assert!(example2().finite_difference_defect(&pts, 1e-5) < 1e-6);
    }

    #[test]
    fn initial_pressure_vanishes() {
        for (x, y, _) in random_points(20) {
            assert_eq!(example1().initial_pressure(x, y), 0.0);
            assert_eq!(example2().initial_pressure(x, y), 0.0);
        }
    }

    #[test]
    fn scaling_is_linear() {
        let c = example1().scaled(0.5);
        assert_eq!(
            c.pressure(0.3, 0.2, 0.1),
            0.5 * example1().pressure(0.3, 0.2, 0.1)
        );
        assert_eq!(
            c.source(0.3, 0.2, 0.1),
            0.5 * example1().source(0.3, 0.2, 0.1)
        );
    }
}
