//! Squeeze tomography of photon states.
//!
//! The squeeze tomogram of a state `rho` is the photon-number distribution
//! `W(n; lambda, theta) = <n| S(lambda) R(theta) rho R(theta)^+ S(lambda)^+ |n>`
//! of the rotated and squeezed state. This crate computes it two ways, by
//! explicit conjugation in a truncated Fock space (the oracle) and through
//! closed forms and integral-transform kernels, and relates it to the
//! optical and symplectic tomograms and to the Wigner function.
//!
//! Units are `hbar = m = omega = 1` with `q = (a + a^+)/sqrt 2`,
//! `p = (a - a^+)/(i sqrt 2)` and physicists' Hermite polynomials.
//! Wigner functions are normalised so that `int dq dp / (2 pi) W = 1`.

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod io;
pub mod quadrature;
pub mod special;
pub mod states;
pub mod tomography;
pub mod verify;

pub mod cli;

pub use diagnostics::{Diagnostic, Severity};
pub use error::{Error, Result};
pub use fock::{DensityMatrix, PlebanskiParams, StateVector, TruncatedOperator};
pub use num_complex::Complex64;
pub use states::StateSpec;
pub use tomography::{SqueezeTomogram, TomographyFrame};

/// Default Fock cutoff.
pub const DEFAULT_CUTOFF: usize = 128;

/// Tail mass above which results carry a warning.
pub const TAIL_WARN: f64 = 1e-8;
