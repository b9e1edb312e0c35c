//! Integral-transform kernels from the density matrix, the Wigner function
//! and the symplectic tomogram to the squeeze tomogram.
//!
//! Each kernel exists in literal form, evaluated as stated with its
//! singular sets treated as domain errors, and in a control form derived from
//! the definition `W(n) = <n|S R rho R^+ S^+|n>`. The literal forms are
//! arbitrated against the oracle; see `verify`.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::DensityMatrix;
use crate::quadrature::Window;
use crate::special::{assoc_laguerre_table, laguerre};
use crate::states::fock_wavefunctions;

use super::inverse::{CharacteristicGrid, QuadratureSpec};
use super::optical::{support_dim, SymplecticSampler, SAMPLER_TAIL};
use super::wigner::WignerGrid;
use super::TomographyFrame;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelForm {
    /// Exactly as stated.
    Literal,
    /// For the symplectic kernel only: the literal expression with primed and
    /// unprimed parameters exchanged inside the radicals and denominators.
    PrimesSwapped,
    /// From the definition.
    Derived,
}

impl KernelForm {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelForm::Literal => "literal",
            KernelForm::PrimesSwapped => "primes_swapped",
            KernelForm::Derived => "derived",
        }
    }
}

/// `1 - sqrt(1 - s)` without cancellation for small `s`.
fn one_minus_root(s: f64) -> f64 {
    s / (1.0 + (1.0 - s).sqrt())
}

fn check_literal_domain(mu: f64, nu: f64) -> Result<f64> {
    let s = 4.0 * mu * mu * nu * nu;
    let singular = |which| Err(Error::SingularKernel { mu, nu, which });
    if !mu.is_finite() || !nu.is_finite() {
        return singular("non-finite parameter");
    }
    if nu == 0.0 {
        return singular("nu = 0");
    }
    if s > 1.0 {
        return singular("1 - 4 mu^2 nu^2 < 0");
    }
    let d = one_minus_root(s);
    if d == 0.0 {
        return singular("1 - sqrt(1 - 4 mu^2 nu^2) = 0");
    }
    Ok(d)
}

/// Chirp `b` of the literal density and Wigner kernels,
/// `sqrt 2 / (1 - sqrt(1 - 4 mu^2 nu^2)) - mu / (nu (mu^2 + nu^2))`.
pub fn literal_chirp(mu: f64, nu: f64) -> Result<f64> {
    let d = check_literal_domain(mu, nu)?;
    Ok(SQRT_2 / d - mu / (nu * (mu * mu + nu * nu)))
}

/// Chirp of `<n|S R|x>`: `-sin(2 theta) sinh(2 lambda) / (mu^2 + nu^2)`.
pub fn derived_chirp(frame: TomographyFrame) -> f64 {
    let (mu, nu) = frame.munu();
    -(2.0 * frame.theta).sin() * (2.0 * frame.lambda).sinh() / (mu * mu + nu * nu)
}

fn chirp(frame: TomographyFrame, form: KernelForm) -> Result<f64> {
    match form {
        KernelForm::Derived => Ok(derived_chirp(frame)),
        _ => {
            let (mu, nu) = frame.munu();
            literal_chirp(mu, nu)
        }
    }
}

/// Density-matrix kernel in literal form:
/// `psi_n(x/r) psi_n(y/r) / r * exp(-i x^2/2 [b + i/r^2] + i y^2/2 [b - i/r^2])`
/// written out with Hermite polynomials, `r^2 = mu^2 + nu^2`.
pub fn kernel_density_to_squeeze(x: f64, y: f64, n: usize, mu: f64, nu: f64) -> Result<Complex64> {
    let b = literal_chirp(mu, nu)?;
    Ok(density_kernel_with_chirp(x, y, n, mu.hypot(nu), b))
}

pub fn kernel_density_to_squeeze_derived(x: f64, y: f64, n: usize, frame: TomographyFrame) -> Complex64 {
    let (mu, nu) = frame.munu();
    density_kernel_with_chirp(x, y, n, mu.hypot(nu), derived_chirp(frame))
}

fn density_kernel_with_chirp(x: f64, y: f64, n: usize, r: f64, b: f64) -> Complex64 {
    let px = fock_wavefunctions(n, x / r)[n];
    let py = fock_wavefunctions(n, y / r)[n];
    Complex64::from_polar(px * py / r, -0.5 * b * (x * x - y * y))
}

/// `W(n) = int dx dy rho(x, y) K(x, y, n)` for `n <= n_max`.
///
/// The kernel factorises as `f_n(x) f_n(y)^*`, so the transform is
/// `sum_mk rho_mk c_mn c_kn^*` with `c_mn = int psi_m f_n`, each overlap by
/// the trapezoid rule on a window sized from the state's support and the
/// chirp.
pub fn squeeze_from_density(
    rho: &DensityMatrix,
    frame: TomographyFrame,
    n_max: usize,
    form: KernelForm,
) -> Result<Vec<f64>> {
    let b = chirp(frame, form)?;
    let (mu, nu) = frame.munu();
    let r = mu.hypot(nu);
    let d = support_dim(rho, SAMPLER_TAIL);
    let half = ((2 * d + 1) as f64).sqrt().max(r * ((2 * n_max + 1) as f64).sqrt()) + 8.0;
    let k_max = b.abs() * half + ((2 * d + 1) as f64).sqrt() + ((2 * n_max + 1) as f64).sqrt() / r;
    let step = (PI / (6.0 * k_max)).min(0.05);
    let nodes = ((2.0 * half / step).ceil() as usize + 1).min(200_001);
    let w = Window::new(half, nodes);
    let mut c = vec![vec![Complex64::new(0.0, 0.0); n_max + 1]; d];
    for (&x, wt) in w.points().iter().zip(w.weights()) {
        let psi = fock_wavefunctions(d - 1, x);
        let phi = fock_wavefunctions(n_max, x / r);
        let phase = Complex64::from_polar(wt / r.sqrt(), -0.5 * b * x * x);
        for m in 0..d {
            let pm = psi[m] * phase;
            for (cn, f) in c[m].iter_mut().zip(&phi) {
                *cn += pm * f;
            }
        }
    }
    let m = rho.matrix();
    Ok((0..=n_max)
        .map(|n| {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..d {
                for k in 0..d {
                    acc += m[(i, k)] * c[i][n] * c[k][n].conj();
                }
            }
            acc.re
        })
        .collect())
}

/// `|z|^2` of the literal Wigner kernel,
/// `2 q^2 / r^2 + 2 r^2 (p - b q)^2`.
pub fn literal_z2(q: f64, p: f64, mu: f64, nu: f64) -> Result<f64> {
    let b = literal_chirp(mu, nu)?;
    let r2 = mu * mu + nu * nu;
    Ok(2.0 * q * q / r2 + 2.0 * r2 * (p - b * q).powi(2))
}

/// `|z|^2 = 2(q'^2 + p'^2)` at `q' = e^-lambda cos(theta) q - nu p`,
/// `p' = e^lambda sin(theta) q + mu p`, the point carried to `(q, p)` by the
/// frame's linear map.
pub fn derived_z2(q: f64, p: f64, frame: TomographyFrame) -> f64 {
    let (mu, nu) = frame.munu();
    let qp = (-frame.lambda).exp() * frame.theta.cos() * q - nu * p;
    let pp = frame.lambda.exp() * frame.theta.sin() * q + mu * p;
    2.0 * (qp * qp + pp * pp)
}

fn laguerre_kernel(n: usize, z2: f64) -> f64 {
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    sign / PI * (-0.5 * z2).exp() * laguerre(n, z2)
}

/// Wigner kernel in literal form, `(-1)^n / pi e^{-|z|^2/2} L_n(|z|^2)`.
pub fn kernel_wigner_to_squeeze(q: f64, p: f64, n: usize, mu: f64, nu: f64) -> Result<f64> {
    Ok(laguerre_kernel(n, literal_z2(q, p, mu, nu)?))
}

pub fn kernel_wigner_to_squeeze_derived(q: f64, p: f64, n: usize, frame: TomographyFrame) -> f64 {
    laguerre_kernel(n, derived_z2(q, p, frame))
}

/// `W(n) = int dq dp W(q, p) K_W(q, p, n)` by the trapezoid rule on the grid.
pub fn squeeze_from_wigner(grid: &WignerGrid, frame: TomographyFrame, n_max: usize, form: KernelForm) -> Result<Vec<f64>> {
    let (mu, nu) = frame.munu();
    if form != KernelForm::Derived {
        check_literal_domain(mu, nu)?;
    }
    let wq = grid.spec.q.weights();
    let wp = grid.spec.p.weights();
    let mut out = vec![0.0; n_max + 1];
    for (i, &q) in grid.q.iter().enumerate() {
        for (j, &p) in grid.p.iter().enumerate() {
            let z2 = match form {
                KernelForm::Derived => derived_z2(q, p, frame),
                _ => literal_z2(q, p, mu, nu)?,
            };
            let g = (-0.5 * z2).exp();
            if g == 0.0 {
                continue;
            }
            let lag = assoc_laguerre_table(n_max + 1, 0, z2);
            let wv = wq[i] * wp[j] * grid.values[i][j] * g / PI;
            for (n, l) in lag.iter().enumerate() {
                out[n] += if n % 2 == 0 { wv * l } else { -wv * l };
            }
        }
    }
    Ok(out)
}

/// `(mu~, nu~)` entering `alpha = (nu~ - i mu~)/sqrt 2` of the symplectic
/// kernel, for target frame `(mu', nu')` and integration point `(mu, nu)`.
pub fn symplectic_tilde(target: TomographyFrame, mu: f64, nu: f64, form: KernelForm) -> Result<(f64, f64)> {
    let (mp, np) = target.munu();
    match form {
        KernelForm::Literal => {
            let singular = |which| Err(Error::SingularKernel { mu, nu, which });
            if mu == 0.0 {
                return singular("mu = 0");
            }
            if nu == 0.0 {
                return singular("nu = 0");
            }
            let s = 4.0 * mu * mu * nu * nu;
            if s > 1.0 {
                return singular("1 - 4 mu^2 nu^2 < 0");
            }
            let root = (1.0 - s).sqrt();
            Ok((-np / (2.0 * nu) * one_minus_root(s) + mp * mu, np / (2.0 * mu) * (1.0 + root) + mp * nu))
        }
        KernelForm::PrimesSwapped => {
            let singular = |which| Err(Error::SingularKernel { mu: mp, nu: np, which });
            if mp == 0.0 {
                return singular("mu' = 0");
            }
            if np == 0.0 {
                return singular("nu' = 0");
            }
            let s = 4.0 * mp * mp * np * np;
            if s > 1.0 {
                return singular("1 - 4 mu'^2 nu'^2 < 0");
            }
            let root = (1.0 - s).sqrt();
            Ok((-nu / (2.0 * np) * one_minus_root(s) + mu * mp, nu / (2.0 * mp) * (1.0 + root) + mu * np))
        }
        KernelForm::Derived => {
            let (l, t) = (target.lambda, target.theta);
            Ok((mu * mp - nu * l.exp() * t.sin(), mu * np + nu * (-l).exp() * t.cos()))
        }
    }
}

/// Symplectic kernel in literal form, `e^{iX}/(2 pi) e^{-|alpha|^2/2} L_n(|alpha|^2)`.
pub fn kernel_symplectic_to_squeeze(n: usize, mu_p: f64, nu_p: f64, x: f64, mu: f64, nu: f64) -> Result<Complex64> {
    let target = super::munu_to_frame(mu_p, nu_p)?;
    kernel_symplectic_with(n, target, x, mu, nu, KernelForm::Literal)
}

pub fn kernel_symplectic_with(n: usize, target: TomographyFrame, x: f64, mu: f64, nu: f64, form: KernelForm) -> Result<Complex64> {
    let (mt, nt) = symplectic_tilde(target, mu, nu, form)?;
    let a2 = 0.5 * (mt * mt + nt * nt);
    Ok(Complex64::from_polar((-0.5 * a2).exp() * laguerre(n, a2) / (2.0 * PI), x))
}

/// Result of the symplectic-to-squeeze transform.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymplecticTransform {
    pub values: Vec<f64>,
    /// Largest `|Im W(n)|`; the exact transform is real.
    pub imag_residual: f64,
    /// Integration nodes skipped because the kernel is undefined there.
    pub excluded_nodes: usize,
    pub total_nodes: usize,
}

/// `W(n) = int dX dmu dnu W_sym K_S`. The `X` integral is done first, giving
/// `(1/2 pi) int dmu dnu chi(mu, nu) e^{-|alpha|^2/2} L_n(|alpha|^2)`.
pub fn squeeze_from_characteristic(
    chi: &CharacteristicGrid,
    target: TomographyFrame,
    n_max: usize,
    form: KernelForm,
) -> Result<SymplecticTransform> {
    let mut acc = vec![Complex64::new(0.0, 0.0); n_max + 1];
    let mut excluded = 0;
    for (i, &mu) in chi.axis.iter().enumerate() {
        for (j, &nu) in chi.axis.iter().enumerate() {
            let (mt, nt) = match symplectic_tilde(target, mu, nu, form) {
                Ok(v) => v,
                Err(Error::SingularKernel { mu: m, nu: n, .. }) if m == mu && n == nu => {
                    excluded += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let a2 = 0.5 * (mt * mt + nt * nt);
            let g = (-0.5 * a2).exp();
            if g == 0.0 {
                continue;
            }
            let wv = chi.values[i][j] * (chi.weights[i] * chi.weights[j] * g / (2.0 * PI));
            for (n, l) in assoc_laguerre_table(n_max + 1, 0, a2).iter().enumerate() {
                acc[n] += wv * *l;
            }
        }
    }
    Ok(SymplecticTransform {
        values: acc.iter().map(|z| z.re).collect(),
        imag_residual: acc.iter().fold(0.0, |m, z| m.max(z.im.abs())),
        excluded_nodes: excluded,
        total_nodes: chi.axis.len() * chi.axis.len(),
    })
}

pub fn squeeze_from_symplectic(
    sampler: &dyn SymplecticSampler,
    target: TomographyFrame,
    n_max: usize,
    quad: &QuadratureSpec,
    form: KernelForm,
) -> Result<SymplecticTransform> {
    let chi = CharacteristicGrid::sample(sampler, quad)?;
    squeeze_from_characteristic(&chi, target, n_max, form)
}

/// Value approached along a path into a singular set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitValue {
    pub value: f64,
    /// `|f(delta_k) - f(delta_{k-1})|` at the last step.
    pub last_change: f64,
    pub converged: bool,
}

/// Evaluates `f(delta)` at `delta = 10^-2, ..., 10^-8` and reports the last
/// value; converged when the last step changed it by at most
/// `1e-6 max(1, |value|)`. Steps where `f` fails are skipped.
pub fn limit_path(f: impl Fn(f64) -> Result<f64>) -> Result<LimitValue> {
    let mut prev: Option<f64> = None;
    let mut last = None;
    for k in 2..=8 {
        let delta = 10f64.powi(-k);
        let Ok(v) = f(delta) else { continue };
        let change = prev.map_or(f64::INFINITY, |p| (v - p).abs());
        last = Some(LimitValue { value: v, last_change: change, converged: change <= 1e-6 * v.abs().max(1.0) });
        prev = Some(v);
    }
    last.ok_or_else(|| Error::Quadrature("limit path: every evaluation failed".into()))
}

/// Literal Wigner kernel at `mu = 0, nu = 1`, approached along
/// `theta = pi/2 - delta`, `lambda = 0`.
pub fn wigner_kernel_fock_limit(q: f64, p: f64, n: usize) -> Result<LimitValue> {
    limit_path(|delta| {
        let (mu, nu) = TomographyFrame::new(0.0, std::f64::consts::FRAC_PI_2 - delta).munu();
        kernel_wigner_to_squeeze(q, p, n, mu, nu)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{make_density, StateSpec};
    use crate::tomography::{squeeze_tomogram_oracle, wigner_from_state, fock_wigner, StateSampler, WignerGridSpec};

    fn oracle(spec: &StateSpec, frame: TomographyFrame, n_max: usize) -> Vec<f64> {
        let rho = make_density(spec, 64).unwrap();
        squeeze_tomogram_oracle(&rho, frame, n_max).unwrap().values.remove(0)
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn literal_density_kernel_properties() {
        let (mu, nu) = (0.8, 0.4);
        assert_eq!(kernel_density_to_squeeze(0.0, 0.7, 1, mu, nu).unwrap().norm(), 0.0);
        for (x, y) in [(0.3, -1.2), (1.5, 0.2)] {
            let a = kernel_density_to_squeeze(x, y, 3, mu, nu).unwrap();
            let b = kernel_density_to_squeeze(y, x, 3, mu, nu).unwrap();
            assert!((a - b.conj()).norm() < 1e-12);
        }
        assert!(matches!(kernel_density_to_squeeze(0.1, 0.1, 0, 1.0, 0.0), Err(Error::SingularKernel { .. })));
        assert!(matches!(kernel_density_to_squeeze(0.1, 0.1, 0, 0.0, 1.0), Err(Error::SingularKernel { .. })));
        assert!(matches!(kernel_density_to_squeeze(0.1, 0.1, 0, 1.0, 1.0), Err(Error::SingularKernel { .. })));
    }

    #[test]
    fn derived_density_kernel_matches_oracle() {
        for spec in [StateSpec::Vacuum, StateSpec::coherent(Complex64::new(1.0, 0.5))] {
            for frame in [TomographyFrame::new(0.5, 1.0), TomographyFrame::new(-0.4, 0.3)] {
                let rho = make_density(&spec, 48).unwrap();
                let got = squeeze_from_density(&rho, frame, 12, KernelForm::Derived).unwrap();
                let err = max_diff(&got, &oracle(&spec, frame, 12));
                assert!(err < 1e-9, "{err}");
            }
        }
    }

    #[test]
    fn derived_wigner_kernel_matches_oracle() {
        let spec = StateSpec::coherent(Complex64::new(1.0, 0.0));
        let grid = wigner_from_state(&make_density(&spec, 48).unwrap(), WignerGridSpec::square(7.0, 141));
        let frame = TomographyFrame::new(0.3, 0.8);
        let got = squeeze_from_wigner(&grid, frame, 8, KernelForm::Derived).unwrap();
        let err = max_diff(&got, &oracle(&spec, frame, 8));
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn wigner_kernel_at_quarter_turn_is_fock_wigner() {
        let frame = TomographyFrame::new(0.0, std::f64::consts::FRAC_PI_2);
        for n in 0..4 {
            for (q, p) in [(0.0, 0.5), (0.7, -0.2)] {
                let k = kernel_wigner_to_squeeze_derived(q, p, n, frame);
                assert!((2.0 * PI * k - fock_wigner(n, q, p)).abs() < 1e-12);
            }
        }
        assert!(kernel_wigner_to_squeeze(0.3, 0.2, 0, 0.0, 1.0).is_err());
        let lim = wigner_kernel_fock_limit(0.7, -0.2, 0).unwrap();
        assert!(lim.converged && lim.value.abs() < 1e-12);
    }

    #[test]
    fn symplectic_kernel_structure() {
        let target = TomographyFrame::new(0.4, 0.6);
        let a = kernel_symplectic_with(2, target, 0.0, 0.3, 0.5, KernelForm::Literal).unwrap();
        let b = kernel_symplectic_with(2, target, 1.3, 0.3, 0.5, KernelForm::Literal).unwrap();
        assert!((a.norm() - b.norm()).abs() < 1e-15);
        assert!((b / a - Complex64::from_polar(1.0, 1.3)).norm() < 1e-12);
        assert!(kernel_symplectic_with(0, target, 0.0, 0.0, 0.5, KernelForm::Literal).is_err());
        for (mu, nu) in [(0.3, 0.5), (-1.2, 0.2), (0.7, -0.4)] {
            let (a1, b1) = symplectic_tilde(target, mu, nu, KernelForm::PrimesSwapped).unwrap();
            let (a2, b2) = symplectic_tilde(target, mu, nu, KernelForm::Derived).unwrap();
            assert!((a1 - a2).abs() < 1e-12 && (b1 - b2).abs() < 1e-12);
        }
    }

    #[test]
    fn derived_symplectic_transform_matches_oracle() {
        let spec = StateSpec::coherent(Complex64::new(1.0, 0.0));
        let quad = QuadratureSpec::default();
        let sampler = StateSampler::new(&make_density(&spec, 48).unwrap()).with_nodes(&quad.y.points());
        let target = TomographyFrame::new(0.4, 0.6);
        let t = squeeze_from_symplectic(&sampler, target, 8, &quad, KernelForm::Derived).unwrap();
        let err = max_diff(&t.values, &oracle(&spec, target, 8));
        assert!(err < 1e-3, "{err}");
        assert_eq!(t.excluded_nodes, 0);
    }
}
