//! Wigner functions on phase-space grids.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::Diagnostic;
use crate::error::{Error, Result};
use crate::fock::{CMatrix, DensityMatrix};
use crate::quadrature::Window;
use crate::special::{assoc_laguerre_table, ln_factorial};

use super::optical::{support_dim, SAMPLER_TAIL};

/// Largest grid-edge value, relative to the peak, accepted as covering the
/// state's support.
pub const SUPPORT_TOL: f64 = 1e-6;

/// `<m|D(beta)|n>` for `m, n < dim`, `D(beta) = exp(beta a^+ - beta* a)`.
pub fn displacement_elements(beta: Complex64, dim: usize) -> CMatrix {
    let x = beta.norm_sqr();
    let gauss = (-0.5 * x).exp();
    let mut out = CMatrix::zeros(dim, dim);
    for k in 0..dim {
        let lag = assoc_laguerre_table(dim - k, k, x);
        let up = beta.powu(k as u32);
        let down = (-beta.conj()).powu(k as u32);
        for n in 0..dim - k {
            let m = n + k;
            let c = gauss * lag[n] * (0.5 * (ln_factorial(n) - ln_factorial(m))).exp();
            out[(m, n)] = up * c;
            if k > 0 {
                out[(n, m)] = down * c;
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WignerGridSpec {
    pub q: Window,
    pub p: Window,
}

impl WignerGridSpec {
    pub fn square(half_width: f64, nodes: usize) -> Self {
        let w = Window::new(half_width, nodes);
        Self { q: w, p: w }
    }
}

impl Default for WignerGridSpec {
    fn default() -> Self {
        Self::square(6.0, 121)
    }
}

/// `W(q, p)` sampled on a rectangular grid, `values[i][j] = W(q_i, p_j)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WignerGrid {
    pub spec: WignerGridSpec,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl WignerGrid {
    pub fn from_fn(spec: WignerGridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let q = spec.q.points();
        let p = spec.p.points();
        let values = q.iter().map(|&qi| p.iter().map(|&pj| f(qi, pj)).collect()).collect();
        Self { spec, q, p, values }
    }

    /// `int dq dp / (2 pi) W` by the trapezoid rule.
    pub fn normalisation(&self) -> f64 {
        let wq = self.spec.q.weights();
        let wp = self.spec.p.weights();
        let mut s = 0.0;
        for (i, row) in self.values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                s += wq[i] * wp[j] * v;
            }
        }
        s / (2.0 * PI)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &WignerGrid) -> Result<f64> {
        if self.q.len() != other.q.len() || self.p.len() != other.p.len() {
            return Err(Error::DimensionMismatch { expected: self.q.len() * self.p.len(), got: other.q.len() * other.p.len() });
        }
        Ok(self
            .values
            .iter()
            .flatten()
            .zip(other.values.iter().flatten())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Largest `|W|` on the grid boundary relative to the largest `|W|`.
    pub fn edge_ratio(&self) -> f64 {
        let nq = self.q.len();
        let np = self.p.len();
        let mut edge = 0.0f64;
        for (i, row) in self.values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if i == 0 || j == 0 || i + 1 == nq || j + 1 == np {
                    edge = edge.max(v.abs());
                }
            }
        }
        edge / self.max_abs().max(f64::MIN_POSITIVE)
    }

    pub fn diagnostics(&self, op: &'static str) -> Vec<Diagnostic> {
        let r = self.edge_ratio();
        if r > SUPPORT_TOL {
            vec![Diagnostic::warn("support_coverage", op, r, SUPPORT_TOL)]
        } else {
            Vec::new()
        }
    }

    /// Four-point Lagrange interpolation in each direction; zero outside.
    pub fn interpolate(&self, q: f64, p: f64) -> f64 {
        let (Some((iq, wq)), Some((ip, wp))) = (stencil(&self.spec.q, q), stencil(&self.spec.p, p)) else {
            return 0.0;
        };
        let mut s = 0.0;
        for a in 0..4 {
            let row = &self.values[iq + a];
            for b in 0..4 {
                s += wq[a] * wp[b] * row[ip + b];
            }
        }
        s
    }

    /// `W_sym(X, mu, nu) = int dq dp / (2 pi) W delta(X - mu q - nu p)`,
    /// integrating the interpolated grid along the line with `nodes` points.
    pub fn symplectic_tomogram(&self, x: f64, mu: f64, nu: f64, nodes: usize) -> Result<f64> {
        let r = mu.hypot(nu);
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidParameter { name: "mu, nu", reason: "(mu, nu) must be finite and not (0, 0)".into() });
        }
        let (c, s) = (mu / r, nu / r);
        let (q0, p0) = (x / r * c, x / r * s);
        let reach = self.spec.q.half_width.hypot(self.spec.p.half_width);
        let line = Window::new(reach, nodes);
        let sum: f64 = line
            .points()
            .iter()
            .zip(line.weights())
            .map(|(&t, w)| w * self.interpolate(q0 - t * s, p0 + t * c))
            .sum();
        Ok(sum / (2.0 * PI * r))
    }
}

fn stencil(axis: &Window, x: f64) -> Option<(usize, [f64; 4])> {
    let h = axis.step();
    let u = (x + axis.half_width) / h;
    if !(u >= 0.0) || u > (axis.nodes - 1) as f64 {
        return None;
    }
    let i = (u.floor() as usize).clamp(1, axis.nodes.saturating_sub(3)) - 1;
    let t = u - i as f64;
    let nodes = [0.0, 1.0, 2.0, 3.0];
    let mut w = [1.0; 4];
    for a in 0..4 {
        for b in 0..4 {
            if a != b {
                w[a] *= (t - nodes[b]) / (nodes[a] - nodes[b]);
            }
        }
    }
    Some((i, w))
}

/// `W(q, p) = 2 sum_mn rho_mn (-1)^n <m|D(2 xi)|n>`, `xi = (q + i p)/sqrt 2`.
pub fn wigner_at(rho: &DensityMatrix, q: f64, p: f64) -> f64 {
    let d = support_dim(rho, SAMPLER_TAIL);
    wigner_block(&rho.matrix().view((0, 0), (d, d)).into_owned(), q, p)
}

fn wigner_block(block: &CMatrix, q: f64, p: f64) -> f64 {
    let d = block.nrows();
    let disp = displacement_elements(Complex64::new(q, p) * SQRT_2, d);
    let mut acc = 0.0;
    for m in 0..d {
        for n in 0..d {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * (block[(n, m)] * disp[(m, n)]).re;
        }
    }
    2.0 * acc
}

pub fn wigner_from_state(rho: &DensityMatrix, spec: WignerGridSpec) -> WignerGrid {
    let d = support_dim(rho, SAMPLER_TAIL);
    let block = rho.matrix().view((0, 0), (d, d)).into_owned();
    WignerGrid::from_fn(spec, |q, p| wigner_block(&block, q, p))
}

/// Wigner function of `|n><n|`: `2 (-1)^n e^{-(q^2+p^2)} L_n(2(q^2+p^2))`.
pub fn fock_wigner(n: usize, q: f64, p: f64) -> f64 {
    let r2 = 2.0 * (q * q + p * p);
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    2.0 * sign * (-0.5 * r2).exp() * crate::special::laguerre(n, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{make_density, StateSpec};
    use crate::tomography::symplectic_tomogram;

    #[test]
    fn displacement_matches_matrix_exponential() {
        let beta = Complex64::new(0.4, -0.7);
        let dense = crate::fock::displacement_matrix(SQRT_2 * beta.im, SQRT_2 * beta.re, 64).unwrap();
        let ours = displacement_elements(beta, 12);
        let mut err = 0.0f64;
        for i in 0..12 {
            for j in 0..12 {
                err = err.max((ours[(i, j)] - dense.get(i, j)).norm());
            }
        }
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn vacuum_and_fock_one() {
        let vac = make_density(&StateSpec::Vacuum, 8).unwrap();
        assert!((wigner_at(&vac, 0.0, 0.0) - 2.0).abs() < 1e-14);
        assert!((wigner_at(&vac, 0.5, -1.0) - 2.0 * (-1.25f64).exp()).abs() < 1e-14);
        let one = make_density(&StateSpec::Fock { m: 1 }, 8).unwrap();
        assert!(wigner_at(&one, 0.0, 0.0) < 0.0);
        for (q, p) in [(0.3, 0.2), (1.0, -0.5)] {
            assert!((wigner_at(&one, q, p) - fock_wigner(1, q, p)).abs() < 1e-13);
        }
        let g = wigner_from_state(&vac, WignerGridSpec::square(7.0, 141));
        assert!((g.normalisation() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn coherent_is_displaced_gaussian() {
        let alpha = Complex64::new(0.8, -0.6);
        let rho = make_density(&StateSpec::coherent(alpha), 48).unwrap();
        let (q0, p0) = (SQRT_2 * alpha.re, SQRT_2 * alpha.im);
        for (q, p) in [(0.0, 0.0), (1.1, -0.8), (-0.5, 0.4)] {
            let want = 2.0 * (-(q - q0) * (q - q0) - (p - p0) * (p - p0)).exp();
            assert!((wigner_at(&rho, q, p) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn line_integral_reproduces_symplectic_tomogram() {
        let rho = make_density(&StateSpec::coherent(Complex64::new(1.0, 0.0)), 48).unwrap();
        let g = wigner_from_state(&rho, WignerGridSpec::square(7.0, 281));
        for (x, mu, nu) in [(1.0, 1.0, 0.0), (0.3, 0.6, 0.9), (-0.5, 1.3, -0.4)] {
            let a = g.symplectic_tomogram(x, mu, nu, 801).unwrap();
            let b = symplectic_tomogram(&rho, x, mu, nu).unwrap();
            assert!((a - b).abs() < 1e-4, "{a} {b}");
        }
    }
}
