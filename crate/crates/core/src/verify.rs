//! Cross-validation of every tomogram route against the oracle.
//!
//! Closed-form rows are mandatory. Kernel rows compare each kernel form with
//! the oracle and either pass or are recorded as discrepancies.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::states::{make_density, Parity, StateSpec};
use crate::tomography::kernels::{self, KernelForm};
use crate::tomography::{
    closed_form_tomogram, fock_wigner, squeeze_tomogram_oracle, squeeze_tomogram_oracle_grid, wigner_from_state,
    OracleOptions, QuadratureSpec, Route, StateSampler, TomographyFrame, WignerGridSpec,
};
use crate::Complex64;

/// Closed form against oracle.
pub const CLOSED_FORM_TOL: f64 = 1e-7;
/// `|sum_n W(n) - 1|`.
pub const NORMALISATION_TOL: f64 = 1e-6;
pub const DENSITY_KERNEL_TOL: f64 = 1e-4;
pub const WIGNER_KERNEL_TOL: f64 = 1e-4;
pub const SYMPLECTIC_KERNEL_TOL: f64 = 1e-3;
const KERNEL_N_MAX: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub cutoff: usize,
    pub n_max: usize,
    pub quick: bool,
    pub quadrature: QuadratureSpec,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { cutoff: crate::DEFAULT_CUTOFF, n_max: 40, quick: false, quadrature: QuadratureSpec::default() }
    }
}

impl VerifyConfig {
    pub fn quick() -> Self {
        Self { cutoff: 64, n_max: 20, quick: true, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Discrepancy,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Discrepancy => "discrepancy",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub category: &'static str,
    pub route: &'static str,
    pub form: Option<&'static str>,
    pub state: String,
    pub frames: String,
    /// `None` when the route could not be evaluated at all.
    pub max_error: Option<f64>,
    pub tolerance: f64,
    pub status: Status,
    pub mandatory: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub rows: Vec<CheckRow>,
}

impl VerifyReport {
    pub fn mandatory_failures(&self) -> usize {
        self.rows.iter().filter(|r| r.mandatory && r.status != Status::Pass).count()
    }

    pub fn discrepancies(&self) -> usize {
        self.rows.iter().filter(|r| r.status == Status::Discrepancy).count()
    }

    /// 3 if a mandatory row failed, else 1 if any discrepancy was recorded,
    /// else 0.
    pub fn exit_code(&self) -> i32 {
        if self.mandatory_failures() > 0 {
            3
        } else if self.discrepancies() > 0 {
            1
        } else {
            0
        }
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::from("# Verification report\n\n");
        let c = &self.config;
        let _ = writeln!(
            s,
            "Cutoff N = {}, n <= {}, {} mode. Exit code {}: {} mandatory failure(s), {} discrepancy row(s).\n",
            c.cutoff,
            c.n_max,
            if c.quick { "quick" } else { "full" },
            self.exit_code(),
            self.mandatory_failures(),
            self.discrepancies()
        );
        s.push_str("| category | route | form | state | frames | max error | tolerance | status | note |\n");
        s.push_str("|---|---|---|---|---|---|---|---|---|\n");
        for r in &self.rows {
            let err = r.max_error.map_or_else(|| "n/a".to_string(), |e| format!("{e:.3e}"));
            let _ = writeln!(
                s,
                "| {} | {} | {} | `{}` | {} | {} | {:.0e} | {}{} | {} |",
                r.category,
                r.route,
                r.form.unwrap_or("-"),
                r.state,
                r.frames,
                err,
                r.tolerance,
                r.status.as_str(),
                if r.mandatory { " (mandatory)" } else { "" },
                r.note.replace('|', "\\|")
            );
        }
        s
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn grid(lambdas: &[f64], thetas: &[f64]) -> Vec<TomographyFrame> {
    thetas.iter().flat_map(|&t| lambdas.iter().map(move |&l| TomographyFrame::new(l, t))).collect()
}

fn describe(lambdas: &[f64], thetas: &[f64]) -> String {
    let th: Vec<String> = thetas.iter().map(|t| format!("{t:.4}")).collect();
    format!(
        "lambda in [{}, {}] x {}, theta in {{{}}}",
        lambdas[0],
        lambdas[lambdas.len() - 1],
        lambdas.len(),
        th.join(", ")
    )
}

/// States of the closed-form check.
pub fn closed_form_states(quick: bool) -> Vec<StateSpec> {
    let c = Complex64::new;
    if quick {
        return vec![
            StateSpec::Vacuum,
            StateSpec::Fock { m: 1 },
            StateSpec::coherent(c(1.0, 0.5)),
            StateSpec::cat(c(1.5, 0.0), Parity::Odd),
            StateSpec::thermal(0.5),
        ];
    }
    vec![
        StateSpec::Vacuum,
        StateSpec::Fock { m: 1 },
        StateSpec::coherent(c(3.0, 0.0)),
        StateSpec::coherent(c(-1.0, 2.0)),
        StateSpec::cat(c(3.0, 0.0), Parity::Odd),
        StateSpec::cat(c(2.0, 1.0), Parity::Even),
        StateSpec::thermal(2.0),
        StateSpec::thermal(0.5),
    ]
}

fn closed_form_rows(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let steps = if cfg.quick { 4 } else { 20 };
    let lambdas: Vec<f64> = (0..=steps).map(|i| -1.0 + 2.0 * i as f64 / steps as f64).collect();
    let thetas: &[f64] = if cfg.quick { &[0.0, 0.7] } else { &[0.0, 0.7, FRAC_PI_2] };
    let frames = grid(&lambdas, thetas);
    let frames_desc = describe(&lambdas, thetas);
    let mut rows = Vec::new();
    for spec in closed_form_states(cfg.quick) {
        let rho = make_density(&spec, cfg.cutoff)?;
        let oracle = squeeze_tomogram_oracle_grid(&rho, &frames, cfg.n_max, &OracleOptions::default())?;
        let closed = closed_form_tomogram(&spec, &frames, cfg.n_max)?;
        let err = oracle.values.iter().zip(&closed.values).fold(0.0f64, |m, (a, b)| m.max(max_diff(a, b)));
        let status = |ok: bool| if ok { Status::Pass } else { Status::Fail };
        rows.push(CheckRow {
            category: "closed_form",
            route: Route::ClosedForm.as_str(),
            form: None,
            state: spec.to_string(),
            frames: frames_desc.clone(),
            max_error: Some(err),
            tolerance: CLOSED_FORM_TOL,
            status: status(err <= CLOSED_FORM_TOL),
            mandatory: true,
            note: "max |closed form - oracle| over n and frames".into(),
        });
        let norm = oracle.total.iter().chain(&closed.total).fold(0.0f64, |m, t| m.max((t - 1.0).abs()));
        rows.push(CheckRow {
            category: "normalisation",
            route: "oracle+closed_form",
            form: None,
            state: spec.to_string(),
            frames: frames_desc.clone(),
            max_error: Some(norm),
            tolerance: NORMALISATION_TOL,
            status: status(norm <= NORMALISATION_TOL),
            mandatory: true,
            note: "max |sum_n W(n) - 1| over every level each route evaluated".into(),
        });
    }
    Ok(rows)
}

fn kernel_note(route: Route, form: KernelForm, passed: bool) -> String {
    if passed {
        return "agrees with the oracle".into();
    }
    match (route, form) {
        (Route::Kernel22, KernelForm::Literal) => {
            "literal chirp coefficient differs from -sin(2 theta) sinh(2 lambda)/(mu^2 + nu^2), so the phase across the kernel is wrong"
        }
        (Route::Kernel24, KernelForm::Literal) => {
            "literal |z|^2 is not the quadratic form 2(q'^2 + p'^2) of the inverse frame map"
        }
        (Route::KernelEqnew04, KernelForm::Literal) => {
            "literal mu~, nu~ compose the frames in the wrong order; exchanging primed and unprimed parameters fixes it"
        }
        _ => "disagrees with the oracle",
    }
    .into()
}

fn kernel_row(
    route: Route,
    form: KernelForm,
    spec: &StateSpec,
    frame: TomographyFrame,
    tol: f64,
    got: Result<Vec<f64>>,
    want: &[f64],
) -> CheckRow {
    let frames = format!("lambda = {}, theta = {}", frame.lambda, frame.theta);
    let (max_error, status, note) = match got {
        Ok(v) => {
            let e = max_diff(&v, want);
            let ok = e <= tol;
            (Some(e), if ok { Status::Pass } else { Status::Discrepancy }, kernel_note(route, form, ok))
        }
        Err(e) => (None, Status::Discrepancy, format!("not evaluable: {e}")),
    };
    CheckRow {
        category: "kernel",
        route: route.as_str(),
        form: Some(form.as_str()),
        state: spec.to_string(),
        frames,
        max_error,
        tolerance: tol,
        status,
        mandatory: false,
        note,
    }
}

fn kernel_rows(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let f22 = TomographyFrame::new(0.5, 1.0);
    let f24 = TomographyFrame::new(0.3, 0.8);
    let f28 = TomographyFrame::new(0.4, 0.6);
    let dim = cfg.cutoff.min(64);
    let mut rows = Vec::new();
    for spec in [StateSpec::Vacuum, StateSpec::coherent(Complex64::new(1.0, 0.0))] {
        let rho = make_density(&spec, dim)?;
        let oracle = |f| -> Result<Vec<f64>> { Ok(squeeze_tomogram_oracle(&rho, f, KERNEL_N_MAX)?.values.remove(0)) };

        let want = oracle(f22)?;
        for form in [KernelForm::Literal, KernelForm::Derived] {
            let got = kernels::squeeze_from_density(&rho, f22, KERNEL_N_MAX, form);
            rows.push(kernel_row(Route::Kernel22, form, &spec, f22, DENSITY_KERNEL_TOL, got, &want));
        }

        let want = oracle(f24)?;
        let w = wigner_from_state(&rho, WignerGridSpec::square(7.0, 141));
        for form in [KernelForm::Literal, KernelForm::Derived] {
            let got = kernels::squeeze_from_wigner(&w, f24, KERNEL_N_MAX, form);
            rows.push(kernel_row(Route::Kernel24, form, &spec, f24, WIGNER_KERNEL_TOL, got, &want));
        }

        let want = oracle(f28)?;
        let sampler = StateSampler::new(&rho).with_nodes(&cfg.quadrature.y.points());
        let chi = crate::tomography::CharacteristicGrid::sample(&sampler, &cfg.quadrature)?;
        for form in [KernelForm::Literal, KernelForm::PrimesSwapped, KernelForm::Derived] {
            let got = kernels::squeeze_from_characteristic(&chi, f28, KERNEL_N_MAX, form).map(|t| t.values);
            rows.push(kernel_row(Route::KernelEqnew04, form, &spec, f28, SYMPLECTIC_KERNEL_TOL, got, &want));
        }
    }
    Ok(rows)
}

/// At `mu = 0, nu = 1` the Wigner kernel times `2 pi` should be the Wigner
/// function of `|n>`.
fn fock_wigner_rows() -> Vec<CheckRow> {
    const TOL: f64 = 1e-10;
    let points = [(0.0, 0.5), (0.7, -0.2), (-1.1, 0.9), (1.5, 1.5)];
    let frame = TomographyFrame::new(0.0, FRAC_PI_2);
    let row = |form: KernelForm, max_error: Option<f64>, status, note: String| CheckRow {
        category: "fock_wigner_claim",
        route: Route::Kernel24.as_str(),
        form: Some(form.as_str()),
        state: "n = 0..3".into(),
        frames: "mu = 0, nu = 1".into(),
        max_error,
        tolerance: TOL,
        status,
        mandatory: false,
        note,
    };
    let mut derived = 0.0f64;
    let mut limit = 0.0f64;
    let mut converged = true;
    let mut direct_error = None;
    for n in 0..4 {
        for &(q, p) in &points {
            let truth = fock_wigner(n, q, p);
            derived = derived.max((2.0 * PI * kernels::kernel_wigner_to_squeeze_derived(q, p, n, frame) - truth).abs());
            if let Err(e) = kernels::kernel_wigner_to_squeeze(q, p, n, 0.0, 1.0) {
                direct_error.get_or_insert(e.to_string());
            }
            match kernels::wigner_kernel_fock_limit(q, p, n) {
                Ok(l) => {
                    converged &= l.converged;
                    limit = limit.max((2.0 * PI * l.value - truth).abs());
                }
                Err(_) => converged = false,
            }
        }
    }
    let literal_ok = direct_error.is_none() && limit <= TOL;
    let literal_note = format!(
        "direct evaluation: {}; limit along theta -> pi/2 {} and misses the Fock Wigner function by {limit:.3e}",
        direct_error.as_deref().unwrap_or("defined"),
        if converged { "converges" } else { "does not converge" }
    );
    vec![
        row(
            KernelForm::Literal,
            Some(limit),
            if literal_ok { Status::Pass } else { Status::Discrepancy },
            literal_note,
        ),
        row(
            KernelForm::Derived,
            Some(derived),
            if derived <= TOL { Status::Pass } else { Status::Discrepancy },
            "2 pi K equals the Wigner function of |n>".into(),
        ),
    ]
}

pub fn run_verification(cfg: &VerifyConfig) -> Result<VerifyReport> {
    cfg.quadrature.validate()?;
    let mut rows = closed_form_rows(cfg)?;
    rows.extend(kernel_rows(cfg)?);
    rows.extend(fock_wigner_rows());
    Ok(VerifyReport { config: *cfg, rows })
}
