//! Optical, symplectic and squeeze tomograms, their relation to the Wigner
//! function and density matrix, and the integral-transform kernels.

mod closed_form;
mod frame;
mod inverse;
pub mod kernels;
mod optical;
mod oracle;
mod wigner;

pub use closed_form::*;
pub use frame::*;
pub use inverse::*;
pub use optical::*;
pub use oracle::*;
pub use wigner::*;

use serde::{Deserialize, Serialize};

use crate::diagnostics::Diagnostic;
use crate::error::Result;
use crate::quadrature::Window;
use crate::states::{make_density, StateSpec};

use kernels::KernelForm;

/// Values below this are treated as roundoff and clipped to zero.
pub const CLIP_FLOOR: f64 = -1e-12;

/// Squeeze-tomogram route names used in grid files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Oracle,
    ClosedForm,
    #[serde(rename = "kernel_22")]
    Kernel22,
    #[serde(rename = "kernel_24")]
    Kernel24,
    #[serde(rename = "kernel_eqnew04")]
    KernelEqnew04,
}

impl Route {
    pub fn as_str(self) -> &'static str {
        match self {
            Route::Oracle => "oracle",
            Route::ClosedForm => "closed_form",
            Route::Kernel22 => "kernel_22",
            Route::Kernel24 => "kernel_24",
            Route::KernelEqnew04 => "kernel_eqnew04",
        }
    }
}

impl std::str::FromStr for Route {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        Ok(match s {
            "oracle" => Route::Oracle,
            "closed_form" => Route::ClosedForm,
            "kernel_22" => Route::Kernel22,
            "kernel_24" => Route::Kernel24,
            "kernel_eqnew04" => Route::KernelEqnew04,
            _ => return Err(crate::Error::Parse(format!("unknown route `{s}`"))),
        })
    }
}

/// Photon-number probabilities `W(n)`, `n <= n_max`, for each frame.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SqueezeTomogram {
    pub n_max: usize,
    pub frames: Vec<TomographyFrame>,
    /// `values[f][n]`, clipped at zero.
    pub values: Vec<Vec<f64>>,
    /// `sum_n W(n)` over every level the route evaluated, per frame.
    pub total: Vec<f64>,
    /// Probability unaccounted for per frame, `max(0, 1 - total)` plus any
    /// estimated truncation loss.
    pub tail_mass: Vec<f64>,
    /// Smallest value seen before clipping.
    pub min_before_clip: f64,
}

impl SqueezeTomogram {
    /// Assembles a tomogram from raw rows (each at least `n_max + 1` long;
    /// the surplus only enters `total`).
    pub(crate) fn from_rows(n_max: usize, frames: Vec<TomographyFrame>, rows: Vec<Vec<f64>>, extra_tail: Vec<f64>) -> Self {
        let mut min_before_clip = f64::INFINITY;
        let mut values = Vec::with_capacity(rows.len());
        let mut total = Vec::with_capacity(rows.len());
        let mut tail_mass = Vec::with_capacity(rows.len());
        for (row, extra) in rows.into_iter().zip(extra_tail) {
            let sum: f64 = row.iter().sum();
            min_before_clip = row.iter().take(n_max + 1).fold(min_before_clip, |m, &v| m.min(v));
            values.push(row.iter().take(n_max + 1).map(|&v| v.max(0.0)).collect());
            total.push(sum);
            tail_mass.push((1.0 - sum).max(0.0) + extra);
        }
        Self { n_max, frames, values, total, tail_mass, min_before_clip }
    }

    pub fn row(&self, frame: usize) -> &[f64] {
        &self.values[frame]
    }

    pub fn diagnostics(&self, op: &'static str) -> Vec<Diagnostic> {
        let mut out: Vec<Diagnostic> =
            self.tail_mass.iter().filter_map(|&t| Diagnostic::tail_mass(op, t)).take(1).collect();
        if self.min_before_clip < CLIP_FLOOR {
            out.push(Diagnostic::warn("negative_probability", op, self.min_before_clip, CLIP_FLOOR));
        }
        out
    }
}

/// Settings for [`route_tomogram`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteOptions {
    /// Fock cutoff of the density matrix handed to the oracle and kernels.
    pub cutoff: usize,
    /// Kernel variant for the kernel routes.
    pub form: KernelForm,
    pub quadrature: QuadratureSpec,
}

impl Default for RouteOptions {
    fn default() -> Self {
        Self { cutoff: crate::DEFAULT_CUTOFF, form: KernelForm::Derived, quadrature: QuadratureSpec::default() }
    }
}

/// Wigner grid wide enough for a state supported on `d` Fock levels.
pub fn wigner_grid_for_support(d: usize) -> WignerGridSpec {
    let half = ((2 * d + 1) as f64).sqrt() + 5.0;
    let nodes = (2.0 * half / 0.1).ceil() as usize + 1;
    WignerGridSpec { q: Window::new(half, nodes), p: Window::new(half, nodes) }
}

/// Squeeze tomogram of `spec` on `frames` by the chosen route.
pub fn route_tomogram(
    spec: &StateSpec,
    route: Route,
    frames: &[TomographyFrame],
    n_max: usize,
    opts: &RouteOptions,
) -> Result<SqueezeTomogram> {
    if route == Route::ClosedForm {
        return closed_form_tomogram(spec, frames, n_max);
    }
    let rho = make_density(spec, opts.cutoff)?;
    if route == Route::Oracle {
        return squeeze_tomogram_oracle_grid(&rho, frames, n_max, &OracleOptions::default());
    }
    let rows: Vec<Vec<f64>> = match route {
        Route::Kernel22 => {
            frames.iter().map(|f| kernels::squeeze_from_density(&rho, *f, n_max, opts.form)).collect::<Result<_>>()?
        }
        Route::Kernel24 => {
            let grid = wigner_from_state(&rho, wigner_grid_for_support(support_dim(&rho, SAMPLER_TAIL)));
            frames.iter().map(|f| kernels::squeeze_from_wigner(&grid, *f, n_max, opts.form)).collect::<Result<_>>()?
        }
        Route::KernelEqnew04 => {
            let q = &opts.quadrature;
            let sampler = StateSampler::new(&rho).with_nodes(&q.y.points());
            let chi = CharacteristicGrid::sample(&sampler, q)?;
            frames
                .iter()
                .map(|f| kernels::squeeze_from_characteristic(&chi, *f, n_max, opts.form).map(|t| t.values))
                .collect::<Result<_>>()?
        }
        Route::Oracle | Route::ClosedForm => unreachable!(),
    };
    let extra = vec![0.0; frames.len()];
    Ok(SqueezeTomogram::from_rows(n_max, frames.to_vec(), rows, extra))
}
