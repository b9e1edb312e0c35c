//! Squeezing generated by time-dependent quadratic Hamiltonians: the
//! parametric oscillator through its classical mode function, and the
//! Caldirola-Kanai damped oscillator through its invariant's coefficients.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Accepted drift of `Im(eps^* eps')` along a trajectory.
pub const INVARIANT_TOL: f64 = 1e-9;

/// Accepted drift of `sigma_p sigma_q - sigma_pq^2` over a time grid.
pub const CONSTANCY_TOL: f64 = 1e-6;

/// Value of `sigma_p sigma_q - sigma_pq^2` claimed for the Kanai states.
pub const NOMINAL_UNCERTAINTY: f64 = 0.25;

/// Frequency `omega(t)` of the parametric oscillator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OmegaProfile {
    Constant { omega: f64 },
    /// `before` for `t < at`, `after` from then on.
    Step { before: f64, after: f64, at: f64 },
    /// `omega0 (1 + depth sin(freq t))`.
    Sinusoidal { omega0: f64, depth: f64, freq: f64 },
    /// Linear interpolation, held constant outside the table.
    Tabulated { t: Vec<f64>, omega: Vec<f64> },
}

impl OmegaProfile {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Err(Error::InvalidParameter { name: "omega profile", reason: reason.into() });
        match self {
            OmegaProfile::Constant { omega } if !omega.is_finite() => bad("omega must be finite"),
            OmegaProfile::Step { before, after, at } if !(before.is_finite() && after.is_finite() && at.is_finite()) => {
                bad("step parameters must be finite")
            }
            OmegaProfile::Sinusoidal { omega0, depth, freq }
                if !(omega0.is_finite() && depth.is_finite() && freq.is_finite()) =>
            {
                bad("sinusoidal parameters must be finite")
            }
            OmegaProfile::Tabulated { t, omega } => {
                if t.is_empty() || t.len() != omega.len() {
                    return bad("table needs matching, non-empty t and omega columns");
                }
                if t.windows(2).any(|w| !(w[0] < w[1])) {
                    return bad("table times must increase strictly");
                }
                if t.iter().chain(omega).any(|v| !v.is_finite()) {
                    return bad("table entries must be finite");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn omega(&self, t: f64) -> f64 {
        match self {
            OmegaProfile::Constant { omega } => *omega,
            OmegaProfile::Step { before, after, at } => {
                if t < *at {
                    *before
                } else {
                    *after
                }
            }
            OmegaProfile::Sinusoidal { omega0, depth, freq } => omega0 * (1.0 + depth * (freq * t).sin()),
            OmegaProfile::Tabulated { t: ts, omega } => {
                let k = ts.partition_point(|&x| x <= t);
                if k == 0 {
                    omega[0]
                } else if k == ts.len() {
                    omega[k - 1]
                } else {
                    let s = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
                    omega[k - 1] + s * (omega[k] - omega[k - 1])
                }
            }
        }
    }

    /// Times where `omega` or its derivative jumps.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            OmegaProfile::Step { at, .. } => vec![*at],
            OmegaProfile::Tabulated { t, .. } => t.clone(),
            _ => Vec::new(),
        }
    }
}

/// Dormand-Prince 5(4) settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { rtol: 1e-11, atol: 1e-11, h_min: 1e-13, max_steps: 2_000_000 }
    }
}

type State = [f64; 4];

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// Integrates `y' = f(t, y)` from `t0` to `t1` adaptively. The right-hand
/// side is only sampled inside `[t0, t1]`, so a jump at either end is
/// never straddled.
fn dopri5(
    f: &impl Fn(f64, &State) -> State,
    t0: f64,
    t1: f64,
    y0: State,
    h: &mut f64,
    steps: &mut usize,
    opts: &IntegratorOptions,
) -> Result<State> {
    let mut t = t0;
    let mut y = y0;
    let span = t1 - t0;
    if span <= 0.0 {
        return Ok(y);
    }
    *h = h.min(span);
    while t < t1 {
        if *steps >= opts.max_steps {
            return Err(Error::StepBudget { t, max_steps: opts.max_steps });
        }
        let last = t + *h >= t1;
        let step = if last { t1 - t } else { *h };
        let mut k = [[0.0; 4]; 7];
        k[0] = f(t, &y);
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                for i in 0..4 {
                    ys[i] += step * A[s][j] * kj[i];
                }
            }
            k[s] = f((t + C[s] * step).min(t1), &ys);
        }
        let mut y5 = y;
        let mut err = 0.0f64;
        for i in 0..4 {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for s in 0..7 {
                d5 += B5[s] * k[s][i];
                d4 += B4[s] * k[s][i];
            }
            y5[i] += step * d5;
            let sc = opts.atol + opts.rtol * y[i].abs().max(y5[i].abs());
            err = err.max((step * (d5 - d4)).abs() / sc);
        }
        *steps += 1;
        if err <= 1.0 {
            t = if last { t1 } else { t + step };
            y = y5;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        let proposed = step * factor;
        if err > 1.0 && proposed < opts.h_min {
            return Err(Error::StepSizeUnderflow { t });
        }
        if !(last && err <= 1.0) {
            *h = proposed;
        }
    }
    Ok(y)
}

/// `eps(t)` and `eps'(t)` on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalTrajectory {
    pub t: Vec<f64>,
    pub eps: Vec<Complex64>,
    pub eps_dot: Vec<Complex64>,
}

impl ClassicalTrajectory {
    /// `Im(eps^* eps')` at each grid point; `1` for the initial data.
    pub fn invariant(&self) -> Vec<f64> {
        self.eps.iter().zip(&self.eps_dot).map(|(e, d)| (e.conj() * d).im).collect()
    }

    pub fn invariant_drift(&self) -> f64 {
        self.invariant().iter().fold(0.0, |m, v| m.max((v - 1.0).abs()))
    }
}

/// Solves `eps'' + omega(t)^2 eps = 0`, `eps(0) = 1`, `eps'(0) = i`, reporting
/// `eps` on `t_grid` (increasing, starting at or after 0).
pub fn integrate_epsilon(profile: &OmegaProfile, t_grid: &[f64], opts: &IntegratorOptions) -> Result<ClassicalTrajectory> {
    profile.validate()?;
    if t_grid.iter().any(|t| !t.is_finite()) || t_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter { name: "t_grid", reason: "times must be finite and strictly increasing".into() });
    }
    if t_grid.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidParameter { name: "t_grid", reason: "times must be >= 0".into() });
    }
    let rhs = |t: f64, y: &State| {
        let w2 = profile.omega(t).powi(2);
        [y[2], y[3], -w2 * y[0], -w2 * y[1]]
    };
    let breaks = profile.breakpoints();
    let mut y: State = [1.0, 0.0, 0.0, 1.0];
    let mut t = 0.0;
    let mut h = 1e-3;
    let mut steps = 0;
    let mut traj = ClassicalTrajectory { t: Vec::new(), eps: Vec::new(), eps_dot: Vec::new() };
    for &target in t_grid {
        let inside: Vec<f64> = breaks.iter().copied().filter(|&b| b > t && b < target).collect();
        for b in inside {
            y = dopri5(&rhs, t, b, y, &mut h, &mut steps, opts)?;
            t = b;
        }
        y = dopri5(&rhs, t, target, y, &mut h, &mut steps, opts)?;
        t = target;
        traj.t.push(t);
        traj.eps.push(Complex64::new(y[0], y[1]));
        traj.eps_dot.push(Complex64::new(y[2], y[3]));
    }
    let drift = traj.invariant_drift();
    if drift > INVARIANT_TOL {
        return Err(Error::InvariantDrift { drift, tol: INVARIANT_TOL });
    }
    Ok(traj)
}

/// First and second moments of a Gaussian state; `sigma_*` are variances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianMoments {
    pub t: f64,
    pub mean_q: f64,
    pub mean_p: f64,
    pub sigma_q: f64,
    pub sigma_p: f64,
    pub sigma_pq: f64,
}

impl GaussianMoments {
    /// `sigma_q sigma_p - sigma_pq^2`.
    pub fn uncertainty(&self) -> f64 {
        self.sigma_q * self.sigma_p - self.sigma_pq * self.sigma_pq
    }

    /// Correlation coefficient `sigma_pq / sqrt(sigma_q sigma_p)`.
    pub fn correlation(&self) -> f64 {
        self.sigma_pq / (self.sigma_q * self.sigma_p).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParametricMoments {
    pub moments: GaussianMoments,
    /// `r` with `sigma_q sigma_p = 1 / (4 (1 - r^2))`, signed like `sigma_pq`.
    pub r: f64,
    /// `|eps| < 1`, equivalently `sigma_q < 1/2`.
    pub squeezed: bool,
}

/// `sigma_q = |eps|^2/2`, `sigma_p = |eps'|^2/2`, `sigma_pq = Re(eps^* eps')/2`
/// for the ground packet `Psi_0`.
pub fn parametric_variances(traj: &ClassicalTrajectory) -> Vec<ParametricMoments> {
    traj.t
        .iter()
        .zip(traj.eps.iter().zip(&traj.eps_dot))
        .map(|(&t, (e, d))| {
            let moments = GaussianMoments {
                t,
                mean_q: 0.0,
                mean_p: 0.0,
                sigma_q: 0.5 * e.norm_sqr(),
                sigma_p: 0.5 * d.norm_sqr(),
                sigma_pq: 0.5 * (e.conj() * d).re,
            };
            let prod = moments.sigma_q * moments.sigma_p;
            let r = (1.0 - 1.0 / (4.0 * prod)).max(0.0).sqrt().copysign(moments.sigma_pq);
            ParametricMoments { moments, r, squeezed: e.norm() < 1.0 }
        })
        .collect()
}

/// `lambda_q`, `lambda_p` of the Caldirola-Kanai invariant `A = lambda_q q + lambda_p p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KanaiCoefficients {
    pub t: f64,
    pub gamma: f64,
    pub lambda_q: Complex64,
    pub lambda_p: Complex64,
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidParameter { name: "gamma", reason: format!("need 0 <= gamma < 1, got {gamma}") });
    }
    Ok(())
}

/// With `s = sqrt(1 - gamma^2)`:
/// `lambda_p = e^{-gamma t} (i e^{i s t} - sin st) / sqrt(2 s)`,
/// `lambda_q = e^{gamma t} ((i gamma + s) e^{i s t} + s cos st - gamma sin st) / sqrt(2 s)`.
pub fn kanai_coefficients(gamma: f64, t: f64) -> Result<KanaiCoefficients> {
    check_gamma(gamma)?;
    let s = (1.0 - gamma * gamma).sqrt();
    let pre = 1.0 / (2.0 * s).sqrt();
    let e = Complex64::from_polar(1.0, s * t);
    let i = Complex64::i();
    let lambda_p = pre * (-gamma * t).exp() * (i * e - (s * t).sin());
    let lambda_q = pre * (gamma * t).exp() * ((i * gamma + s) * e + s * (s * t).cos() - gamma * (s * t).sin());
    Ok(KanaiCoefficients { t, gamma, lambda_q, lambda_p })
}

/// `<q> = 2 Im(lambda_p alpha^*)`, `<p> = 2 Im(lambda_q^* alpha)`,
/// `sigma_q = |lambda_p|^2`, `sigma_p = |lambda_q|^2`,
/// `sigma_pq = -Re(lambda_p lambda_q^*)`.
pub fn kanai_moments(gamma: f64, alpha: Complex64, t: f64) -> Result<GaussianMoments> {
    let k = kanai_coefficients(gamma, t)?;
    Ok(GaussianMoments {
        t,
        mean_q: 2.0 * (k.lambda_p * alpha.conj()).im,
        mean_p: 2.0 * (k.lambda_q.conj() * alpha).im,
        sigma_q: k.lambda_p.norm_sqr(),
        sigma_p: k.lambda_q.norm_sqr(),
        sigma_pq: -(k.lambda_p * k.lambda_q.conj()).re,
    })
}

/// Constancy and value of `sigma_p sigma_q - sigma_pq^2` for the Kanai states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UncertaintyAudit {
    pub gamma: f64,
    /// Mean over the grid.
    pub invariant_value: f64,
    pub nominal_value: f64,
    /// `max_t |value(t) - value(t_0)|`.
    pub constancy_drift: f64,
    /// Factor on both `lambda_p` and `lambda_q` that would turn the measured
    /// value into `nominal_value`: `(nominal / measured)^{1/4}`.
    pub reconciling_scale: f64,
    pub matches_nominal: bool,
}

pub fn uncertainty_audit(gamma: f64, t_grid: &[f64]) -> Result<UncertaintyAudit> {
    check_gamma(gamma)?;
    if t_grid.is_empty() {
        return Err(Error::InvalidParameter { name: "t_grid", reason: "empty".into() });
    }
    let values = t_grid
        .iter()
        .map(|&t| kanai_moments(gamma, Complex64::new(0.0, 0.0), t).map(|m| m.uncertainty()))
        .collect::<Result<Vec<_>>>()?;
    let first = values[0];
    let drift = values.iter().fold(0.0f64, |m, v| m.max((v - first).abs()));
    if drift > CONSTANCY_TOL {
        return Err(Error::InvariantDrift { drift, tol: CONSTANCY_TOL });
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Ok(UncertaintyAudit {
        gamma,
        invariant_value: mean,
        nominal_value: NOMINAL_UNCERTAINTY,
        constancy_drift: drift,
        reconciling_scale: (NOMINAL_UNCERTAINTY / mean).powf(0.25),
        matches_nominal: (mean - NOMINAL_UNCERTAINTY).abs() <= CONSTANCY_TOL,
    })
}

/// Gaussian position density with mean `<q>(t)` and variance `sigma_q(t) = |lambda_p|^2`.
pub fn kanai_density(gamma: f64, alpha: Complex64, q: f64, t: f64) -> Result<f64> {
    let m = kanai_moments(gamma, alpha, t)?;
    Ok(gaussian(q, m.mean_q, m.sigma_q))
}

fn gaussian(q: f64, mean: f64, var: f64) -> f64 {
    (-(q - mean).powi(2) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}

/// Position density on a `(t, q)` grid with the moments behind each row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityGrid {
    pub gamma: f64,
    pub alpha: Complex64,
    pub q_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    /// `density[i][j]` at `t_grid[i]`, `q_grid[j]`.
    pub density: Vec<Vec<f64>>,
    pub moments: Vec<GaussianMoments>,
}

pub fn kanai_density_grid(gamma: f64, alpha: Complex64, q_grid: &[f64], t_grid: &[f64]) -> Result<DensityGrid> {
    let moments = t_grid.iter().map(|&t| kanai_moments(gamma, alpha, t)).collect::<Result<Vec<_>>>()?;
    let density = moments.iter().map(|m| q_grid.iter().map(|&q| gaussian(q, m.mean_q, m.sigma_q)).collect()).collect();
    Ok(DensityGrid { gamma, alpha, q_grid: q_grid.to_vec(), t_grid: t_grid.to_vec(), density, moments })
}

/// Variance of a sampled Gaussian from the curvature of `ln rho` around its
/// largest sample on a uniform grid; exact for a Gaussian up to rounding.
pub fn gaussian_variance_from_samples(q: &[f64], rho: &[f64]) -> Option<f64> {
    if q.len() < 3 {
        return None;
    }
    let h = q[1] - q[0];
    let k = rho.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?.0.clamp(1, q.len() - 2);
    let curv = rho[k + 1].ln() - 2.0 * rho[k].ln() + rho[k - 1].ln();
    (curv < 0.0).then(|| -h * h / curv)
}
