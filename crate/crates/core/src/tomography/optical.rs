//! Optical tomogram `w(X, theta)`, the density of `q cos(theta) + p sin(theta)`,
//! and its symplectic extension `W(X, mu, nu)`, the density of `mu q + nu p`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{CMatrix, DensityMatrix};
use crate::states::fock_wavefunctions;

/// Probability weight beyond which Fock levels are ignored when sampling
/// tomograms of a density matrix.
pub const SAMPLER_TAIL: f64 = 1e-26;

/// Smallest `d` such that `sum_{n >= d} rho_nn <= tol`.
pub fn support_dim(rho: &DensityMatrix, tol: f64) -> usize {
    let pops = rho.populations();
    let mut tail = 0.0;
    for d in (0..pops.len()).rev() {
        tail += pops[d].max(0.0);
        if tail > tol {
            return d + 1;
        }
    }
    1
}

/// `sum_mn rho_mn e^{i(n-m) theta} psi_m(X) psi_n(X)`.
fn quadratic_form(block: &CMatrix, psi: &[f64], theta: f64) -> f64 {
    let d = block.nrows();
    let mut acc = 0.0;
    for m in 0..d {
        acc += block[(m, m)].re * psi[m] * psi[m];
        let mut row = Complex64::new(0.0, 0.0);
        for n in m + 1..d {
            row += block[(m, n)] * Complex64::from_polar(psi[n], (n - m) as f64 * theta);
        }
        acc += 2.0 * psi[m] * row.re;
    }
    acc
}

/// `Re(rho_mn e^{i(n-m) theta})`, so the tomogram on a ray is `psi^T B psi`.
fn real_phase_matrix(block: &CMatrix, theta: f64) -> Vec<f64> {
    let d = block.nrows();
    let phases: Vec<Complex64> = (0..d).map(|k| Complex64::from_polar(1.0, k as f64 * theta)).collect();
    let mut out = vec![0.0; d * d];
    for m in 0..d {
        for n in 0..d {
            let z = if n >= m { block[(m, n)] * phases[n - m] } else { block[(m, n)] * phases[m - n].conj() };
            out[m * d + n] = z.re;
        }
    }
    out
}

fn real_quadratic_form(b: &[f64], psi: &[f64]) -> f64 {
    let d = psi.len();
    let mut acc = 0.0;
    for m in 0..d {
        let row = &b[m * d..(m + 1) * d];
        let inner: f64 = row.iter().zip(psi).map(|(x, y)| x * y).sum();
        acc += psi[m] * inner;
    }
    acc
}

/// Optical tomogram of `rho` at quadrature value `x` and angle `theta`.
pub fn optical_tomogram(rho: &DensityMatrix, x: f64, theta: f64) -> f64 {
    let d = support_dim(rho, SAMPLER_TAIL);
    let block = rho.matrix().view((0, 0), (d, d)).into_owned();
    quadratic_form(&block, &fock_wavefunctions(d - 1, x), theta)
}

/// Symplectic tomogram `W(X, mu, nu) = w(X/r, phi) / r` with
/// `r = sqrt(mu^2 + nu^2)`, `phi = atan2(nu, mu)`.
pub fn symplectic_tomogram(rho: &DensityMatrix, x: f64, mu: f64, nu: f64) -> Result<f64> {
    let (r, phi) = polar(mu, nu)?;
    Ok(optical_tomogram(rho, x / r, phi) / r)
}

fn polar(mu: f64, nu: f64) -> Result<(f64, f64)> {
    let r = mu.hypot(nu);
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter { name: "mu, nu", reason: "(mu, nu) must be finite and not (0, 0)".into() });
    }
    Ok((r, nu.atan2(mu)))
}

/// Source of symplectic-tomogram samples for the inverse transforms.
pub trait SymplecticSampler: Sync {
    fn sample(&self, x: f64, mu: f64, nu: f64) -> f64;

    /// Samples along `X = r y` for each `y` in `ys`, multiplied by `r`, so the
    /// result is the optical tomogram `w(y, phi)` along the ray of `(mu, nu)`.
    fn scaled_line(&self, ys: &[f64], mu: f64, nu: f64) -> Vec<f64> {
        let r = mu.hypot(nu);
        ys.iter().map(|&y| r * self.sample(r * y, mu, nu)).collect()
    }
}

impl<F: Fn(f64, f64, f64) -> f64 + Sync> SymplecticSampler for F {
    fn sample(&self, x: f64, mu: f64, nu: f64) -> f64 {
        self(x, mu, nu)
    }
}

/// Samples a density matrix, with the oscillator eigenfunctions on a fixed
/// set of scaled nodes cached between lines.
#[derive(Debug, Clone)]
pub struct StateSampler {
    block: CMatrix,
    cache: Option<(Vec<f64>, Vec<Vec<f64>>)>,
}

impl StateSampler {
    pub fn new(rho: &DensityMatrix) -> Self {
        let d = support_dim(rho, SAMPLER_TAIL);
        Self { block: rho.matrix().view((0, 0), (d, d)).into_owned(), cache: None }
    }

    /// Precomputes eigenfunctions on `ys` so `scaled_line` on those nodes
    /// costs one quadratic form per node.
    pub fn with_nodes(mut self, ys: &[f64]) -> Self {
        let d = self.block.nrows();
        self.cache = Some((ys.to_vec(), ys.iter().map(|&y| fock_wavefunctions(d - 1, y)).collect()));
        self
    }

    pub fn support(&self) -> usize {
        self.block.nrows()
    }
}

impl SymplecticSampler for StateSampler {
    fn sample(&self, x: f64, mu: f64, nu: f64) -> f64 {
        let r = mu.hypot(nu);
        let phi = nu.atan2(mu);
        quadratic_form(&self.block, &fock_wavefunctions(self.block.nrows() - 1, x / r), phi) / r
    }

    fn scaled_line(&self, ys: &[f64], mu: f64, nu: f64) -> Vec<f64> {
        let b = real_phase_matrix(&self.block, nu.atan2(mu));
        match &self.cache {
            Some((nodes, psis)) if nodes.as_slice() == ys => psis.iter().map(|psi| real_quadratic_form(&b, psi)).collect(),
            _ => ys
                .iter()
                .map(|&y| real_quadratic_form(&b, &fock_wavefunctions(self.block.nrows() - 1, y)))
                .collect(),
        }
    }
}
