//! Quadrature rules: Gauss–Hermite for Gaussian-weighted integrals and a
//! uniform trapezoid grid for windowed oscillatory ones.

use serde::{Deserialize, Serialize};

/// Gauss–Hermite rule for `int exp(-x^2) f(x) dx`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// `n`-point rule; nodes by Newton iteration on the orthonormal
    /// Hermite recursion.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Hermite rule needs at least one node");
        let pim4 = std::f64::consts::PI.powf(-0.25);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        let nf = n as f64;
        let mut z = 0.0;
        for i in 0..m {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = pim4;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = 2.0 / (pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        // ascending order
        nodes.reverse();
        weights.reverse();
        Self { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// `int f(x) dx` for `f` decaying like a unit Gaussian: applies the rule
    /// to `f(x) exp(x^2)`.
    pub fn integrate_plain(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.integrate(|x| f(x) * (x * x).exp())
    }
}

/// Uniform trapezoid grid on `[-half_width, half_width]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub half_width: f64,
    pub nodes: usize,
}

impl Window {
    pub fn new(half_width: f64, nodes: usize) -> Self {
        Self { half_width, nodes }
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / (self.nodes - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.nodes).map(|i| -self.half_width + i as f64 * h).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.nodes)
            .map(|i| if i == 0 || i + 1 == self.nodes { 0.5 * h } else { h })
            .collect()
    }

    /// Same window with the step halved.
    pub fn refined(&self) -> Self {
        Self { half_width: self.half_width, nodes: 2 * self.nodes - 1 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_hermite_moments() {
        let gh = GaussHermite::new(40);
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((gh.integrate(|_| 1.0) - sqrt_pi).abs() < 1e-13);
        assert!((gh.integrate(|x| x * x) - sqrt_pi / 2.0).abs() < 1e-13);
        assert!((gh.integrate(|x| x.powi(4)) - 0.75 * sqrt_pi).abs() < 1e-12);
        assert!(gh.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn odd_rule_has_origin_node() {
        let gh = GaussHermite::new(7);
        assert!(gh.nodes[3].abs() < 1e-15);
        assert!((gh.integrate(|x| x.powi(12)) - 10395.0 / 64.0 * std::f64::consts::PI.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn trapezoid_window() {
        let w = Window::new(8.0, 161);
        let s: f64 = w.points().iter().zip(w.weights()).map(|(x, wt)| wt * (-x * x).exp()).sum();
        assert!((s - std::f64::consts::PI.sqrt()).abs() < 1e-13);
        assert_eq!(w.refined().nodes, 321);
    }
}
