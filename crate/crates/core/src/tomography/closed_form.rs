//! Closed-form squeeze tomograms of the example states.

use num_complex::Complex64;

use super::{SqueezeTomogram, TomographyFrame};
use crate::error::{Error, Result};
use crate::special::{hermite_complex_scaled, ln_factorial, two_index_hermite_table, Symmetric2};
use crate::states::{Parity, StateSpec};

/// Below this `|lambda|` the coherent matrix element uses the unsqueezed
/// (rotated coherent) limit.
pub const LAMBDA_SWITCH: f64 = 1e-6;

/// Boltzmann tail dropped by the thermal sum.
pub const THERMAL_TAIL_TOL: f64 = 1e-10;

/// Levels summed when checking normalisation of a closed form.
const NORM_LEVELS_MIN: usize = 1024;
const NORM_LEVELS_MAX: usize = 16384;

/// `ln[(2m)! / (m!^2 4^m)]`, the squared central Hermite ratio
/// `H_{2m}(0)^2 / ((2m)! 2^{2m})`.
fn ln_central(m: usize) -> f64 {
    ln_factorial(2 * m) - 2.0 * ln_factorial(m) - 2.0 * m as f64 * std::f64::consts::LN_2
}

/// Squeezed-vacuum tomogram `(-tanh l)^n H_n(0)^2 / (n! 2^n cosh l)`.
pub fn squeeze_tomogram_vacuum(n: usize, lambda: f64) -> f64 {
    if n % 2 == 1 {
        return 0.0;
    }
    let t = lambda.tanh();
    if n == 0 {
        return 1.0 / lambda.cosh();
    }
    if t == 0.0 {
        return 0.0;
    }
    (n as f64 * t.abs().ln() + ln_central(n / 2)).exp() / lambda.cosh()
}

/// `<n|S(lambda) R(theta)|alpha>` for `n = 0..=n_max`.
///
/// Writing `t = tanh(lambda)`, `A = alpha e^{i theta}`, the amplitude is
/// `e^{i theta/2} cosh^{-1/2} exp(-|alpha|^2/2 + A^2 t/2) h_n` with
/// `h_0 = 1` and `h_{n+1} = [(A / cosh) h_n - t sqrt(n) h_{n-1}] / sqrt(n+1)`,
/// the Hermite recursion with the factors `(t/2)^{n/2} / sqrt(n!)` absorbed.
pub fn coherent_matrix_elements(n_max: usize, lambda: f64, theta: f64, alpha: Complex64) -> Vec<Complex64> {
    if lambda.abs() < LAMBDA_SWITCH {
        return (0..=n_max).map(|n| rotated_coherent_amplitude(n, theta, alpha)).collect();
    }
    let a = alpha * Complex64::from_polar(1.0, theta);
    let (t, c) = (lambda.tanh(), lambda.cosh());
    let pre = Complex64::from_polar(1.0, 0.5 * theta) / c.sqrt() * (-0.5 * alpha.norm_sqr() + 0.5 * a * a * t).exp();
    let drive = a / c;
    let mut out = Vec::with_capacity(n_max + 1);
    let mut prev = Complex64::new(0.0, 0.0);
    let mut cur = Complex64::new(1.0, 0.0);
    out.push(pre);
    for n in 0..n_max {
        let nf = n as f64;
        let next = (drive * cur - prev * (t * nf.sqrt())) / (nf + 1.0).sqrt();
        prev = cur;
        cur = next;
        out.push(pre * cur);
    }
    out
}

/// `e^{i theta/2} <n|alpha e^{i theta}>`, the `lambda -> 0` limit.
fn rotated_coherent_amplitude(n: usize, theta: f64, alpha: Complex64) -> Complex64 {
    let r = alpha.norm();
    if r == 0.0 {
        return if n == 0 { Complex64::from_polar(1.0, 0.5 * theta) } else { Complex64::new(0.0, 0.0) };
    }
    let ln_mag = -0.5 * r * r + n as f64 * r.ln() - 0.5 * ln_factorial(n);
    Complex64::from_polar(ln_mag.exp(), 0.5 * theta + n as f64 * (alpha.arg() + theta))
}

/// `<n|S(lambda) R(theta)|alpha>`.
pub fn coherent_matrix_element(n: usize, lambda: f64, theta: f64, alpha: Complex64) -> Complex64 {
    coherent_matrix_elements(n, lambda, theta, alpha)[n]
}

/// The same amplitude evaluated directly from a Hermite polynomial of
/// argument `A / sqrt(|sinh 2 lambda|)`.
///
/// For `lambda > 0` this is `pre sqrt(t^n / (2^n n!)) H_n(A / sqrt(sinh 2l))`.
/// For `lambda < 0` the square root of `tanh` is imaginary and the form
/// becomes `pre i^n sqrt(|t|^n / (2^n n!)) H_n(-i A / sqrt|sinh 2l|)`.
pub fn coherent_matrix_element_hermite(n: usize, lambda: f64, theta: f64, alpha: Complex64) -> Complex64 {
    if lambda.abs() < LAMBDA_SWITCH {
        return rotated_coherent_amplitude(n, theta, alpha);
    }
    let a = alpha * Complex64::from_polar(1.0, theta);
    let (t, c) = (lambda.tanh(), lambda.cosh());
    let pre = Complex64::from_polar(1.0, 0.5 * theta) / c.sqrt() * (-0.5 * alpha.norm_sqr() + 0.5 * a * a * t).exp();
    let root = (2.0 * lambda).sinh().abs().sqrt();
    let (x, phase) = if lambda > 0.0 {
        (a / root, Complex64::new(1.0, 0.0))
    } else {
        (Complex64::new(0.0, -1.0) * a / root, Complex64::new(0.0, 1.0).powu(n as u32))
    };
    let (h, ln_scale) = hermite_complex_scaled(n, x);
    let nf = n as f64;
    let ln_mag = ln_scale + 0.5 * (nf * (0.5 * t.abs()).ln() - ln_factorial(n));
    pre * phase * h * ln_mag.exp()
}

/// Coherent-state tomogram `|<n|S R|alpha>|^2`.
pub fn squeeze_tomogram_coherent(n: usize, lambda: f64, theta: f64, alpha: Complex64) -> f64 {
    coherent_matrix_element(n, lambda, theta, alpha).norm_sqr()
}

/// `|<n|S(lambda)|m>|^2` for `n = 0..=n_max`, from the two-index Hermite
/// identity `sech(lambda) H^R_{nm}(0)^2 / (n! m!)`.
pub fn fock_tomogram_column(n_max: usize, lambda: f64, m: usize) -> Vec<f64> {
    let table = two_index_hermite_table(Symmetric2::squeeze(lambda), n_max, m);
    let sech = 1.0 / lambda.cosh();
    table.iter().map(|row| sech * row[m] * row[m]).collect()
}

/// Fock-state tomogram `|<n|S(lambda)|m>|^2`; independent of `theta`.
pub fn squeeze_tomogram_fock(n: usize, lambda: f64, m: usize) -> f64 {
    if m == 1 {
        return squeeze_tomogram_fock_one(n, lambda);
    }
    fock_tomogram_column(n, lambda, m)[n]
}

/// `n^2 tanh^{n-1} H_{n-1}(0)^2 / (2^{n-1} n! cosh^3)`, the tomogram of `|1>`.
pub fn squeeze_tomogram_fock_one(n: usize, lambda: f64) -> f64 {
    if n % 2 == 0 {
        return 0.0;
    }
    let k = n - 1;
    let t = lambda.tanh();
    let c3 = lambda.cosh().powi(3);
    if k == 0 {
        return 1.0 / c3;
    }
    if t == 0.0 {
        return 0.0;
    }
    let nf = n as f64;
    // H_k(0)^2 / 2^k = k! * k! / ((k/2)!^2 4^{k/2})
    let ln_v = 2.0 * nf.ln() + k as f64 * t.abs().ln() + ln_central(k / 2) + ln_factorial(k) - ln_factorial(n);
    ln_v.exp() / c3
}

/// Even (`+`) or odd (`-`) cat tomogram
/// `[1 +- (-1)^n] / (1 +- e^{-2|alpha|^2}) W_alpha(n)`.
pub fn squeeze_tomogram_cat(n: usize, lambda: f64, theta: f64, alpha: Complex64, parity: Parity) -> f64 {
    let s = parity.sign();
    let factor = 1.0 + s * if n % 2 == 0 { 1.0 } else { -1.0 };
    if factor == 0.0 {
        return 0.0;
    }
    factor / (1.0 + s * (-2.0 * alpha.norm_sqr()).exp()) * squeeze_tomogram_coherent(n, lambda, theta, alpha)
}

/// Smallest `M` with Boltzmann tail `e^{-(M+1)/T} <= 1e-10`.
pub fn thermal_m_sum_max(temperature: f64) -> usize {
    (temperature * (1.0 / THERMAL_TAIL_TOL).ln()).ceil() as usize
}

fn thermal_weights(temperature: f64, m_sum_max: usize) -> Result<Vec<f64>> {
    if !(temperature > 0.0) {
        return Err(Error::InvalidParameter { name: "T", reason: format!("must be positive, got {temperature}") });
    }
    let tail = (-((m_sum_max + 1) as f64) / temperature).exp();
    if tail > THERMAL_TAIL_TOL {
        return Err(Error::TailMass { tail_mass: tail, limit: THERMAL_TAIL_TOL, cutoff: m_sum_max + 1 });
    }
    Ok(crate::states::thermal_populations(temperature, m_sum_max + 1))
}

/// Thermal tomogram for `n = 0..=n_max`, summing Fock tomograms up to
/// `m_sum_max`.
pub fn thermal_tomogram_column(n_max: usize, lambda: f64, temperature: f64, m_sum_max: usize) -> Result<Vec<f64>> {
    let p = thermal_weights(temperature, m_sum_max)?;
    let table = two_index_hermite_table(Symmetric2::squeeze(lambda), n_max, m_sum_max);
    let sech = 1.0 / lambda.cosh();
    Ok(table.iter().map(|row| sech * row.iter().zip(&p).map(|(g, w)| w * g * g).sum::<f64>()).collect())
}

/// Thermal-state tomogram; independent of `theta`.
pub fn squeeze_tomogram_thermal(n: usize, lambda: f64, temperature: f64, m_sum_max: usize) -> Result<f64> {
    Ok(thermal_tomogram_column(n, lambda, temperature, m_sum_max)?[n])
}

/// Evaluates `levels(len)` on growing lengths until the last quarter holds
/// negligible probability; returns the row used for normalisation.
fn full_row(n_max: usize, mut levels: impl FnMut(usize) -> Vec<f64>) -> Vec<f64> {
    let mut len = NORM_LEVELS_MIN.max(2 * (n_max + 1));
    loop {
        let row = levels(len);
        let tail: f64 = row[3 * len / 4..].iter().sum();
        if tail < 1e-16 || len >= NORM_LEVELS_MAX {
            return row;
        }
        len *= 2;
    }
}

/// Closed-form tomogram of `spec` on each frame. Totals are summed over as
/// many levels as needed to capture the state, not only `n <= n_max`.
pub fn closed_form_tomogram(spec: &StateSpec, frames: &[TomographyFrame], n_max: usize) -> Result<SqueezeTomogram> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(frames.len());
    for f in frames {
        let (l, th) = (f.lambda, f.theta);
        let row = match *spec {
            StateSpec::Vacuum => full_row(n_max, |len| (0..len).map(|n| squeeze_tomogram_vacuum(n, l)).collect()),
            StateSpec::Fock { m: 1 } => {
                full_row(n_max, |len| (0..len).map(|n| squeeze_tomogram_fock_one(n, l)).collect())
            }
            StateSpec::Fock { m } => full_row(n_max, |len| fock_tomogram_column(len - 1, l, m)),
            StateSpec::Coherent { .. } => {
                let a = spec.alpha().unwrap();
                full_row(n_max, |len| {
                    coherent_matrix_elements(len - 1, l, th, a).iter().map(|z| z.norm_sqr()).collect()
                })
            }
            StateSpec::Cat { parity, .. } => {
                let a = spec.alpha().unwrap();
                let s = parity.sign();
                let norm = 1.0 + s * (-2.0 * a.norm_sqr()).exp();
                full_row(n_max, |len| {
                    coherent_matrix_elements(len - 1, l, th, a)
                        .iter()
                        .enumerate()
                        .map(|(n, z)| (1.0 + s * if n % 2 == 0 { 1.0 } else { -1.0 }) / norm * z.norm_sqr())
                        .collect()
                })
            }
            StateSpec::Thermal { temperature } => {
                let m_max = thermal_m_sum_max(temperature);
                let mut err = None;
                let row = full_row(n_max, |len| {
                    thermal_tomogram_column(len - 1, l, temperature, m_max).unwrap_or_else(|e| {
                        err = Some(e);
                        vec![0.0; len]
                    })
                });
                if let Some(e) = err {
                    return Err(e);
                }
                row
            }
        };
        rows.push(row);
    }
    let extra = vec![0.0; frames.len()];
    Ok(SqueezeTomogram::from_rows(n_max, frames.to_vec(), rows, extra))
}
