//! Gauss-Legendre rules and Legendre polynomials on the reference interval.

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// `n`-point rule, exact for polynomials of degree `2n - 1`.
    ///
    /// Nodes come from Newton iteration on `P_n`, which converges to machine
    /// precision from the Chebyshev initial guesses for every `n` used here.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss rule needs at least one point");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Legendre polynomial `P_n(x)` by the three-term recurrence.
pub fn legendre(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        _ => {
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            p1
        }
    }
}

/// Legendre polynomial of degree `n` on the cell `[a, b]`, evaluated at `x`.
pub fn legendre_on(n: usize, a: f64, b: f64, x: f64) -> f64 {
    legendre(n, (2.0 * x - a - b) / (b - a))
}

/// `∫_a^b P_n(ξ(x))² dx = (b - a) / (2n + 1)`.
pub fn legendre_norm_sq(n: usize, a: f64, b: f64) -> f64 {
    (b - a) / (2 * n + 1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules_integrate_monomials_exactly() {
        for n in 1..=6 {
            let rule = GaussRule::new(n);
            for d in 0..(2 * n) {
                let exact = if d % 2 == 1 {
                    0.0
                } else {
                    2.0 / (d as f64 + 1.0)
                };
                let got = rule.integrate(-1.0, 1.0, |x| x.powi(d as i32));
                assert!((got - exact).abs() < 1e-14, "n={n} d={d}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn three_point_rule_matches_closed_form() {
        let r = GaussRule::new(3);
        let s = (0.6f64).sqrt();
        assert!((r.nodes[0] + s).abs() < 1e-15);
        assert!((r.nodes[2] - s).abs() < 1e-15);
        assert!((r.weights[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn legendre_orthogonality() {
        let rule = GaussRule::new(4);
        for a in 0..3 {
            for b in 0..3 {
                let v = rule.integrate(0.2, 0.7, |x| {
                    legendre_on(a, 0.2, 0.7, x) * legendre_on(b, 0.2, 0.7, x)
                });
                let e = if a == b {
                    legendre_norm_sq(a, 0.2, 0.7)
                } else {
                    0.0
                };
                assert!((v - e).abs() < 1e-15);
            }
        }
    }
}
