//! Squeeze tomogram by explicit conjugation,
//! `W(n) = <n| S(lambda) R(theta) rho R(theta)^+ S(lambda)^+ |n>`.
//!
//! `rho` is split into weighted pure components and `S R` is applied to each
//! as the action of the banded generator `lambda/2 (a^2 - a^+^2)`. The working
//! space grows past the state's own cutoff until the squeezed components have
//! negligible weight on its top levels, so the result does not inherit the
//! truncation error of a dense exponential at the state's cutoff.

use std::collections::HashMap;

use nalgebra::DVector;
use num_complex::Complex64;

use super::{SqueezeTomogram, TomographyFrame};
use crate::error::{Error, Result};
use crate::fock::{
    boundary_margin, expm_multiply, rotation_matrix, squeeze_matrix, DensityMatrix, StateVector,
    TruncatedOperator, LAMBDA_MAX,
};

/// Sum below which the tomogram is declared to have leaked past the cutoff.
pub const LEAKAGE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Work in exactly this dimension instead of growing the space.
    pub fixed_dim: Option<usize>,
    /// Largest working dimension the adaptive mode may reach.
    pub max_dim: usize,
    /// Accepted weight, times the component's weight in `rho`, on the top
    /// `ceil(W/10)` levels of the working space.
    pub boundary_tol: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { fixed_dim: None, max_dim: 8192, boundary_tol: 1e-15 }
    }
}

impl OracleOptions {
    pub fn fixed(dim: usize) -> Self {
        Self { fixed_dim: Some(dim), ..Self::default() }
    }
}

/// `(lambda/2)(a^2 - a^+^2) v` in the span of `v`'s indices.
pub fn squeeze_generator_apply(lambda: f64, v: &StateVector) -> StateVector {
    let w = v.len();
    let half = 0.5 * lambda;
    DVector::from_fn(w, |n, _| {
        let nf = n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        if n + 2 < w {
            acc += v[n + 2] * ((nf + 1.0) * (nf + 2.0)).sqrt();
        }
        if n >= 2 {
            acc -= v[n - 2] * (nf * (nf - 1.0)).sqrt();
        }
        acc * half
    })
}

/// `S(lambda) v` in dimension `v.len()`.
pub fn squeeze_apply(lambda: f64, v: &StateVector) -> StateVector {
    let w = v.len() as f64;
    let bound = lambda.abs() * (w + 1.0);
    expm_multiply(|x| squeeze_generator_apply(lambda, x), bound, v)
}

/// `S(lambda)|k>` restricted to the levels of `k`'s parity, `n = 2j + k % 2`,
/// in a space of `dim` levels. The generator is real and tridiagonal there.
fn squeeze_fock_column(lambda: f64, k: usize, dim: usize) -> Vec<f64> {
    let p = k % 2;
    let len = (dim + 1 - p) / 2;
    let half = 0.5 * lambda;
    let mut u = DVector::<f64>::zeros(len);
    u[k / 2] = 1.0;
    let apply = |x: &DVector<f64>| {
        DVector::from_fn(len, |j, _| {
            let n = (2 * j + p) as f64;
            let mut acc = 0.0;
            if j + 1 < len {
                acc += x[j + 1] * ((n + 1.0) * (n + 2.0)).sqrt();
            }
            if j >= 1 {
                acc -= x[j - 1] * (n * (n - 1.0)).sqrt();
            }
            acc * half
        })
    };
    let out = expm_multiply(apply, lambda.abs() * (dim as f64 + 1.0), &u);
    let mut probs = vec![0.0; dim];
    for (j, x) in out.iter().enumerate() {
        probs[2 * j + p] = x * x;
    }
    probs
}

/// Weighted pure components `rho = sum_i w_i |v_i><v_i|`.
#[derive(Debug, Clone)]
enum Component {
    Fock(usize),
    Vector(StateVector),
}

impl Component {
    fn len(&self) -> usize {
        match self {
            Component::Fock(k) => k + 1,
            Component::Vector(v) => v.len(),
        }
    }
}

#[derive(Debug, Clone)]
struct Components {
    weights: Vec<f64>,
    parts: Vec<Component>,
    diagonal: bool,
}

const COMPONENT_FLOOR: f64 = 1e-17;

impl Components {
    fn of(rho: &DensityMatrix) -> Self {
        let m = rho.matrix();
        let n = rho.dim();
        let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] == Complex64::new(0.0, 0.0)));
        let mut weights = Vec::new();
        let mut parts = Vec::new();
        if diagonal {
            for (k, p) in rho.populations().into_iter().enumerate() {
                if p > COMPONENT_FLOOR {
                    weights.push(p);
                    parts.push(Component::Fock(k));
                }
            }
        } else {
            let eig = m.clone().symmetric_eigen();
            for (k, &w) in eig.eigenvalues.iter().enumerate() {
                if w > COMPONENT_FLOOR {
                    let col = eig.eigenvectors.column(k);
                    let len = col.iter().rposition(|z| z.norm_sqr() > 1e-34).map_or(1, |i| i + 1);
                    weights.push(w);
                    parts.push(Component::Vector(col.rows(0, len).into_owned()));
                }
            }
        }
        Self { weights, parts, diagonal }
    }
}

fn rotate(theta: f64, v: &StateVector) -> StateVector {
    DVector::from_fn(v.len(), |n, _| v[n] * Complex64::from_polar(1.0, theta * (n as f64 + 0.5)))
}

fn padded(v: &StateVector, dim: usize) -> StateVector {
    let mut out = StateVector::zeros(dim);
    out.rows_mut(0, v.len()).copy_from(v);
    out
}

fn top_weight(probs: &[f64]) -> f64 {
    let n = probs.len();
    probs[n - boundary_margin(n)..].iter().sum()
}

/// Probabilities of `S(lambda) R(theta) c` over the working space, plus its
/// top-level weight. `hint` carries the working dimension between frames.
fn squeezed_probabilities(
    frame: &TomographyFrame,
    comp: &Component,
    weight: f64,
    n_max: usize,
    opts: &OracleOptions,
    hint: &mut usize,
) -> Result<(Vec<f64>, f64)> {
    let run = |dim: usize| match comp {
        Component::Fock(k) => squeeze_fock_column(frame.lambda, *k, dim),
        Component::Vector(v) => {
            let u = squeeze_apply(frame.lambda, &padded(&rotate(frame.theta, v), dim));
            u.iter().map(|z| z.norm_sqr()).collect()
        }
    };
    if let Some(dim) = opts.fixed_dim {
        if comp.len() > dim {
            return Err(Error::DimensionMismatch { expected: dim, got: comp.len() });
        }
        let probs = run(dim);
        let boundary = top_weight(&probs);
        return Ok((probs, boundary));
    }
    let base = (2 * comp.len()).max(2 * (n_max + 1)).max(64).next_power_of_two();
    let mut dim = base.max(*hint / 2);
    loop {
        let probs = run(dim);
        let boundary = top_weight(&probs);
        if weight * boundary <= opts.boundary_tol {
            *hint = dim;
            return Ok((probs, boundary));
        }
        dim *= 2;
        if dim > opts.max_dim {
            return Err(Error::TruncationLeakage { sum: 1.0 - boundary, tol: LEAKAGE_TOL });
        }
    }
}

fn check_frame(frame: &TomographyFrame) -> Result<()> {
    if !frame.lambda.is_finite() || frame.lambda.abs() > LAMBDA_MAX || !frame.theta.is_finite() {
        return Err(Error::InvalidParameter {
            name: "lambda",
            reason: format!("frame ({}, {}) outside |lambda| <= {LAMBDA_MAX}", frame.lambda, frame.theta),
        });
    }
    Ok(())
}

/// Oracle tomogram on several frames at once; rotation-invariant states
/// reuse the squeezed components across frames with the same `lambda`.
pub fn squeeze_tomogram_oracle_grid(
    rho: &DensityMatrix,
    frames: &[TomographyFrame],
    n_max: usize,
    opts: &OracleOptions,
) -> Result<SqueezeTomogram> {
    if let Some(dim) = opts.fixed_dim {
        if n_max + boundary_margin(dim) >= dim {
            return Err(Error::InvalidParameter {
                name: "n_max",
                reason: format!("n_max {n_max} must be below N - margin = {}", dim - boundary_margin(dim)),
            });
        }
    }
    let comps = Components::of(rho);
    let mut cache: HashMap<u64, (Vec<f64>, f64)> = HashMap::new();
    let mut hints = vec![0usize; comps.parts.len()];
    let mut rows = Vec::with_capacity(frames.len());
    let mut extra = Vec::with_capacity(frames.len());
    for frame in frames {
        check_frame(frame)?;
        let key = frame.lambda.to_bits();
        let (row, boundary) = match cache.get(&key).filter(|_| comps.diagonal) {
            Some(hit) => hit.clone(),
            None => {
                let mut row = vec![0.0; n_max + 1];
                let mut boundary = 0.0;
                for ((w, c), hint) in comps.weights.iter().zip(&comps.parts).zip(hints.iter_mut()) {
                    let (probs, b) = squeezed_probabilities(frame, c, *w, n_max, opts, hint)?;
                    if probs.len() > row.len() {
                        row.resize(probs.len(), 0.0);
                    }
                    for (r, p) in row.iter_mut().zip(probs) {
                        *r += w * p;
                    }
                    boundary += w * b;
                }
                if comps.diagonal {
                    cache.insert(key, (row.clone(), boundary));
                }
                (row, boundary)
            }
        };
        if let Some(dim) = opts.fixed_dim {
            let interior: f64 = row.iter().take(dim - boundary_margin(dim)).sum();
            if interior < 1.0 - LEAKAGE_TOL {
                return Err(Error::TruncationLeakage { sum: interior, tol: LEAKAGE_TOL });
            }
        }
        rows.push(row);
        extra.push(boundary);
    }
    Ok(SqueezeTomogram::from_rows(n_max, frames.to_vec(), rows, extra))
}

/// Ground-truth squeeze tomogram at one frame.
pub fn squeeze_tomogram_oracle(rho: &DensityMatrix, frame: TomographyFrame, n_max: usize) -> Result<SqueezeTomogram> {
    squeeze_tomogram_oracle_grid(rho, &[frame], n_max, &OracleOptions::default())
}

/// `U(n) = (S R)^+ |n><n| S R` in dimension `dim`, so that
/// `tr(rho U(n)) = W(n)`.
pub fn squeeze_dequantizer(n: usize, frame: TomographyFrame, dim: usize) -> Result<TruncatedOperator> {
    if n >= dim {
        return Err(Error::DimensionMismatch { expected: dim, got: n + 1 });
    }
    let s = squeeze_matrix(frame.lambda, dim)?;
    let r = rotation_matrix(frame.theta, dim)?;
    let v = s.compose(&r)?;
    let row = v.matrix().row(n).into_owned();
    let u = row.adjoint() * row;
    Ok(TruncatedOperator::from_parts(u, v.tail_mass()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{make_density, StateSpec};
    use crate::tomography::squeeze_tomogram_vacuum;

    #[test]
    fn banded_action_matches_dense_squeeze() {
        let dim = 40;
        let s = squeeze_matrix(0.6, dim).unwrap();
        let v = StateVector::from_fn(dim, |n, _| {
            if n < 10 {
                Complex64::new(1.0 / (n + 1) as f64, 0.2 * n as f64)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let diff = (s.matrix() * &v - squeeze_apply(0.6, &v)).norm();
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn identity_frame_gives_photon_statistics() {
        let rho = make_density(&StateSpec::coherent(Complex64::new(1.5, -0.5)), 64).unwrap();
        let w = squeeze_tomogram_oracle(&rho, TomographyFrame::new(0.0, 0.0), 30).unwrap();
        let pops = rho.populations();
        for n in 0..=30 {
            assert!((w.values[0][n] - pops[n]).abs() < 1e-12);
        }
    }

    #[test]
    fn vacuum_matches_closed_form() {
        let rho = make_density(&StateSpec::Vacuum, 128).unwrap();
        let w = squeeze_tomogram_oracle(&rho, TomographyFrame::new(1.0, 0.0), 40).unwrap();
        for n in 0..=40 {
            assert!((w.values[0][n] - squeeze_tomogram_vacuum(n, 1.0)).abs() < 1e-8);
        }
        assert!((w.values[0][2] - 0.187944).abs() < 1e-6);
        assert!((w.total[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fixed_and_doubled_cutoff_agree() {
        let rho = make_density(&StateSpec::coherent(Complex64::new(1.0, 0.5)), 64).unwrap();
        let frames = [TomographyFrame::new(0.5, 0.7), TomographyFrame::new(-0.5, 1.2)];
        let a = squeeze_tomogram_oracle_grid(&rho, &frames, 20, &OracleOptions::fixed(64)).unwrap();
        let b = squeeze_tomogram_oracle_grid(&rho, &frames, 20, &OracleOptions::fixed(128)).unwrap();
        for f in 0..2 {
            for n in 0..=20 {
                assert!((a.values[f][n] - b.values[f][n]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn fixed_mode_reports_leakage() {
        let rho = make_density(&StateSpec::coherent(Complex64::new(4.0, 0.0)), 64).unwrap();
        let err = squeeze_tomogram_oracle_grid(&rho, &[TomographyFrame::new(2.0, 0.0)], 20, &OracleOptions::fixed(64));
        assert!(matches!(err, Err(Error::TruncationLeakage { .. })));
    }

    #[test]
    fn dequantizer_reproduces_oracle() {
        let dim = 96;
        let rho = make_density(&StateSpec::coherent(Complex64::new(0.8, 0.3)), dim).unwrap();
        let frame = TomographyFrame::new(0.4, 0.9);
        let w = squeeze_tomogram_oracle(&rho, frame, 6).unwrap();
        for n in 0..=6 {
            let u = squeeze_dequantizer(n, frame, dim).unwrap();
            let t = (rho.matrix() * u.matrix()).trace();
            assert!((t.re - w.values[0][n]).abs() < 1e-10);
            assert!(t.im.abs() < 1e-12);
        }
        let u0 = squeeze_dequantizer(3, TomographyFrame::new(0.0, 0.0), dim).unwrap();
        assert!((u0.get(3, 3) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((u0.matrix().trace().re - 1.0).abs() < 1e-15);
        let vac = make_density(&StateSpec::Vacuum, dim).unwrap();
        let u2 = squeeze_dequantizer(2, TomographyFrame::new(1.0, 0.0), dim).unwrap();
        assert!(((vac.matrix() * u2.matrix()).trace().re - 0.187944).abs() < 1e-6);
    }
}
