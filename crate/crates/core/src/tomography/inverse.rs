//! Reconstruction of the Wigner function and the density matrix from
//! symplectic-tomogram samples.
//!
//! Both inverses go through the characteristic function
//! `chi(mu, nu) = int dX e^{iX} W_sym(X, mu, nu) = <e^{i(mu q + nu p)}>`,
//! which is evaluated on each ray as `int dy e^{i r y} w(y, phi)`.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::Diagnostic;
use crate::error::{Error, Result};
use crate::fock::CMatrix;
use crate::quadrature::Window;

use super::optical::SymplecticSampler;
use super::wigner::{displacement_elements, WignerGrid, WignerGridSpec};

/// Trapezoid windows for the inverse transforms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Scaled quadrature `y = X / r` along each ray.
    pub y: Window,
    /// Both `mu` and `nu`.
    pub munu: Window,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { y: Window::new(10.0, 257), munu: Window::new(6.0, 65) }
    }
}

impl QuadratureSpec {
    /// Twice the nodes on windows wider by `sqrt 2`.
    pub fn doubled(&self) -> Self {
        let grow = |w: Window| Window::new(w.half_width * SQRT_2, 2 * w.nodes - 1);
        Self { y: grow(self.y), munu: grow(self.munu) }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, w) in [("y window", self.y), ("mu/nu window", self.munu)] {
            if w.nodes < 3 || !(w.half_width > 0.0) || !w.half_width.is_finite() {
                return Err(Error::InvalidParameter { name: "quadrature", reason: format!("{name} needs >= 3 nodes and a positive width") });
            }
        }
        Ok(())
    }
}

/// `chi(mu_i, nu_j)` on the tensor grid of `spec.munu`.
#[derive(Debug, Clone)]
pub struct CharacteristicGrid {
    pub axis: Vec<f64>,
    pub weights: Vec<f64>,
    /// `values[i][j] = chi(axis[i], axis[j])`.
    pub values: Vec<Vec<Complex64>>,
}

impl CharacteristicGrid {
    pub fn sample(sampler: &dyn SymplecticSampler, spec: &QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        let axis = spec.munu.points();
        let weights = spec.munu.weights();
        let ys = spec.y.points();
        let wy = spec.y.weights();
        let n = axis.len();
        let mut values = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for i in 0..n {
            for j in 0..n {
                // chi(-mu, -nu) = conj chi(mu, nu); the grid is symmetric.
                let (mi, mj) = (n - 1 - i, n - 1 - j);
                if (mi, mj) < (i, j) {
                    values[i][j] = values[mi][mj].conj();
                    continue;
                }
                let (mu, nu) = (axis[i], axis[j]);
                let r = mu.hypot(nu);
                values[i][j] = if r == 0.0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    let line = sampler.scaled_line(&ys, mu, nu);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for ((&y, w), v) in ys.iter().zip(&wy).zip(line) {
                        acc += Complex64::from_polar(w * v, r * y);
                    }
                    acc
                };
            }
        }
        Ok(Self { axis, weights, values })
    }
}

/// Reconstructed Wigner grid and the largest imaginary part met before it was
/// dropped, a measure of quadrature error.
#[derive(Debug, Clone)]
pub struct WignerReconstruction {
    pub grid: WignerGrid,
    pub imag_defect: f64,
}

/// `W(q, p) = (1/2 pi) int dmu dnu chi(mu, nu) e^{-i(mu q + nu p)}`.
pub fn wigner_from_characteristic(chi: &CharacteristicGrid, spec: WignerGridSpec) -> WignerReconstruction {
    let q = spec.q.points();
    let p = spec.p.points();
    let n = chi.axis.len();
    // half[i][k] = sum_j w_j chi_ij e^{-i nu_j p_k}
    let phase_p: Vec<Vec<Complex64>> =
        chi.axis.iter().map(|&nu| p.iter().map(|&pk| Complex64::from_polar(1.0, -nu * pk)).collect()).collect();
    let half: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            (0..p.len())
                .map(|k| (0..n).map(|j| chi.values[i][j] * phase_p[j][k] * chi.weights[j]).sum())
                .collect()
        })
        .collect();
    let mut imag_defect = 0.0f64;
    let values = q
        .iter()
        .map(|&qi| {
            let phase: Vec<Complex64> =
                chi.axis.iter().zip(&chi.weights).map(|(&mu, w)| Complex64::from_polar(*w, -mu * qi)).collect();
            (0..p.len())
                .map(|k| {
                    let z: Complex64 = (0..n).map(|i| phase[i] * half[i][k]).sum::<Complex64>() / (2.0 * PI);
                    imag_defect = imag_defect.max(z.im.abs());
                    z.re
                })
                .collect()
        })
        .collect();
    WignerReconstruction { grid: WignerGrid { spec, q, p, values }, imag_defect }
}

pub fn wigner_from_symplectic(
    sampler: &dyn SymplecticSampler,
    grid: WignerGridSpec,
    quad: &QuadratureSpec,
) -> Result<WignerReconstruction> {
    let chi = CharacteristicGrid::sample(sampler, quad)?;
    Ok(wigner_from_characteristic(&chi, grid))
}

/// Reconstructed operator, symmetrised to `(A + A^+)/2`, with the Hermiticity
/// defect `max |A - A^+|` of the raw quadrature result.
#[derive(Debug, Clone)]
pub struct DensityReconstruction {
    pub matrix: CMatrix,
    pub hermiticity_defect: f64,
    pub trace: Complex64,
}

impl DensityReconstruction {
    pub fn diagnostics(&self, op: &'static str, tol: f64) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if self.hermiticity_defect > tol {
            out.push(Diagnostic::warn("quadrature_residual", op, self.hermiticity_defect, tol));
        }
        let trace_err = (self.trace - 1.0).norm();
        if trace_err > tol {
            out.push(Diagnostic::warn("trace_defect", op, trace_err, tol));
        }
        out
    }
}

/// `rho = (1/2 pi) int dmu dnu chi(mu, nu) D(beta)`, `beta = (nu - i mu)/sqrt 2`,
/// truncated to `dim` Fock levels.
pub fn density_from_characteristic(chi: &CharacteristicGrid, dim: usize) -> Result<DensityReconstruction> {
    if dim < 1 {
        return Err(Error::CutoffTooSmall(dim));
    }
    let mut acc = CMatrix::zeros(dim, dim);
    for (i, &mu) in chi.axis.iter().enumerate() {
        for (j, &nu) in chi.axis.iter().enumerate() {
            let w = chi.weights[i] * chi.weights[j];
            let beta = Complex64::new(nu, -mu) / SQRT_2;
            acc += displacement_elements(beta, dim) * (chi.values[i][j] * w);
        }
    }
    acc /= Complex64::new(2.0 * PI, 0.0);
    let adj = acc.adjoint();
    let hermiticity_defect = (&acc - &adj).iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let matrix = (&acc + &adj) * Complex64::new(0.5, 0.0);
    let trace = matrix.trace();
    Ok(DensityReconstruction { matrix, hermiticity_defect, trace })
}

pub fn density_from_symplectic(
    sampler: &dyn SymplecticSampler,
    dim: usize,
    quad: &QuadratureSpec,
) -> Result<DensityReconstruction> {
    let chi = CharacteristicGrid::sample(sampler, quad)?;
    density_from_characteristic(&chi, dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{make_density, StateSpec};
    use crate::tomography::{wigner_from_state, StateSampler};

    fn sampler(spec: &StateSpec, quad: &QuadratureSpec) -> StateSampler {
        StateSampler::new(&make_density(spec, 48).unwrap()).with_nodes(&quad.y.points())
    }

    #[test]
    fn vacuum_characteristic_function() {
        let quad = QuadratureSpec::default();
        let chi = CharacteristicGrid::sample(&sampler(&StateSpec::Vacuum, &quad), &quad).unwrap();
        for (i, &mu) in chi.axis.iter().enumerate().step_by(8) {
            for (j, &nu) in chi.axis.iter().enumerate().step_by(8) {
                let want = (-(mu * mu + nu * nu) / 4.0).exp();
                assert!((chi.values[i][j] - want).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn wigner_round_trip_improves_with_budget() {
        let spec = StateSpec::coherent(Complex64::new(1.0, 0.0));
        let grid = WignerGridSpec::square(4.0, 41);
        let truth = wigner_from_state(&make_density(&spec, 48).unwrap(), grid);
        let quad = QuadratureSpec::default();
        let a = wigner_from_symplectic(&sampler(&spec, &quad), grid, &quad).unwrap();
        let quad2 = quad.doubled();
        let b = wigner_from_symplectic(&sampler(&spec, &quad2), grid, &quad2).unwrap();
        let ea = a.grid.max_abs_diff(&truth).unwrap();
        let eb = b.grid.max_abs_diff(&truth).unwrap();
        assert!(ea < 1e-2 && eb < ea, "{ea} {eb}");
        assert!(a.imag_defect < 1e-2);
    }

    #[test]
    fn wigner_reconstruction_is_linear() {
        let quad = QuadratureSpec::default();
        let grid = WignerGridSpec::square(3.0, 13);
        let r0 = make_density(&StateSpec::Vacuum, 16).unwrap();
        let r1 = make_density(&StateSpec::Fock { m: 1 }, 16).unwrap();
        let mix = crate::fock::DensityMatrix::new(
            crate::fock::TruncatedOperator::new((r0.matrix() + r1.matrix()) * Complex64::new(0.5, 0.0)).unwrap(),
        )
        .unwrap();
        let w = |r| wigner_from_symplectic(&StateSampler::new(r), grid, &quad).unwrap().grid;
        let (a, b, m) = (w(&r0), w(&r1), w(&mix));
        for i in 0..13 {
            for j in 0..13 {
                let avg = 0.5 * (a.values[i][j] + b.values[i][j]);
                assert!((m.values[i][j] - avg).abs() <= 1e-9 * avg.abs().max(1.0));
            }
        }
    }

    #[test]
    fn density_round_trip() {
        let quad = QuadratureSpec::default();
        for (spec, k) in [(StateSpec::Vacuum, 0), (StateSpec::Fock { m: 1 }, 1)] {
            let rec = density_from_symplectic(&sampler(&spec, &quad), 6, &quad).unwrap();
            assert!((rec.matrix[(k, k)].re - 1.0).abs() < 1e-2);
            assert!(rec.hermiticity_defect < 1e-2);
        }
    }
}
