//! Example photon states as density matrices, and oscillator wavefunctions.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, StateVector, TRACE_DEFICIT_TOL};
use crate::special::ln_factorial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    #[serde(rename = "+", alias = "even")]
    Even,
    #[serde(rename = "-", alias = "odd")]
    Odd,
}

impl Parity {
    /// `+1` for even, `-1` for odd.
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// Which state to build. Canonical JSON:
/// `{"kind":"coherent","alpha":[3.0,0.0]}`, `{"kind":"thermal","T":1.5}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum StateSpec {
    Vacuum,
    Fock {
        m: usize,
    },
    Coherent {
        alpha: [f64; 2],
    },
    Cat {
        alpha: [f64; 2],
        parity: Parity,
    },
    Thermal {
        #[serde(rename = "T")]
        temperature: f64,
    },
}

impl StateSpec {
    pub fn coherent(alpha: Complex64) -> Self {
        Self::Coherent { alpha: [alpha.re, alpha.im] }
    }

    pub fn cat(alpha: Complex64, parity: Parity) -> Self {
        Self::Cat { alpha: [alpha.re, alpha.im], parity }
    }

    pub fn thermal(temperature: f64) -> Self {
        Self::Thermal { temperature }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            StateSpec::Vacuum | StateSpec::Fock { .. } => Ok(()),
            StateSpec::Coherent { alpha } => check_alpha(alpha, false),
            StateSpec::Cat { alpha, .. } => check_alpha(alpha, true),
            StateSpec::Thermal { temperature } if temperature > 0.0 && temperature.is_finite() => Ok(()),
            StateSpec::Thermal { temperature } => Err(Error::InvalidParameter {
                name: "T",
                reason: format!("temperature must be positive, got {temperature}"),
            }),
        }
    }

    pub fn alpha(&self) -> Option<Complex64> {
        match *self {
            StateSpec::Coherent { alpha } | StateSpec::Cat { alpha, .. } => Some(Complex64::new(alpha[0], alpha[1])),
            _ => None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("state spec serialises")
    }
}

fn check_alpha(alpha: [f64; 2], nonzero: bool) -> Result<()> {
    if !alpha[0].is_finite() || !alpha[1].is_finite() {
        return Err(Error::InvalidParameter { name: "alpha", reason: "non-finite amplitude".into() });
    }
    if nonzero && alpha[0] == 0.0 && alpha[1] == 0.0 {
        return Err(Error::InvalidParameter { name: "alpha", reason: "cat states need alpha != 0".into() });
    }
    Ok(())
}

/// Parses `3`, `-1.5`, `2j`, `0.5+0j`, `1-2.5j`, `1e-3+4e-1j`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let s = s.trim();
    let bad = || Error::Parse(format!("cannot parse complex number `{s}`"));
    let Some(body) = s.strip_suffix(['j', 'i']) else {
        return s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |t: &str| match t {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => t.parse::<f64>().map_err(|_| bad()),
    };
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| bad())?;
            Ok(Complex64::new(re, imag(&body[k..])?))
        }
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

impl FromStr for StateSpec {
    type Err = Error;

    /// `vacuum`, `fock:M`, `coherent:A`, `cat:A:+`, `cat:A:-`, `thermal:T`,
    /// or the canonical JSON object.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            let spec: StateSpec = serde_json::from_str(s).map_err(|e| Error::Parse(format!("state JSON: {e}")))?;
            spec.validate()?;
            return Ok(spec);
        }
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Parse(format!("unrecognised state `{s}`"));
        let spec = match parts.as_slice() {
            ["vacuum"] => StateSpec::Vacuum,
            ["fock", m] => StateSpec::Fock { m: m.parse().map_err(|_| bad())? },
            ["coherent", a] => StateSpec::coherent(parse_complex(a)?),
            ["cat", a, p] => {
                let parity = match *p {
                    "+" | "even" => Parity::Even,
                    "-" | "odd" => Parity::Odd,
                    _ => return Err(bad()),
                };
                StateSpec::cat(parse_complex(a)?, parity)
            }
            ["thermal", t] => StateSpec::thermal(t.parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            StateSpec::Vacuum => write!(f, "vacuum"),
            StateSpec::Fock { m } => write!(f, "fock:{m}"),
            StateSpec::Coherent { alpha } => write!(f, "coherent:{}{:+}j", alpha[0], alpha[1]),
            StateSpec::Cat { alpha, parity } => {
                let p = if parity == Parity::Even { "+" } else { "-" };
                write!(f, "cat:{}{:+}j:{p}", alpha[0], alpha[1])
            }
            StateSpec::Thermal { temperature } => write!(f, "thermal:{temperature}"),
        }
    }
}

/// Fock amplitudes `e^{-|a|^2/2} a^n / sqrt(n!)` of `|alpha>`, `n < dim`.
pub fn coherent_amplitudes(alpha: Complex64, dim: usize) -> StateVector {
    let mut v = StateVector::zeros(dim);
    if dim == 0 {
        return v;
    }
    v[0] = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 1..dim {
        v[n] = v[n - 1] * alpha / (n as f64).sqrt();
    }
    v
}

/// Normalisation `N_+-` of the even/odd cat `N (|a> +- |-a>)`.
pub fn cat_normalisation(alpha: Complex64, parity: Parity) -> f64 {
    (1.0 / (2.0 * (1.0 + parity.sign() * (-2.0 * alpha.norm_sqr()).exp()))).sqrt()
}

/// Boltzmann populations `e^{-(n+1/2)/T} / Z` for `n < dim`, with
/// `Z = cosech(1/(2T)) / 2`.
pub fn thermal_populations(temperature: f64, dim: usize) -> Vec<f64> {
    let beta = 1.0 / temperature;
    // e^{-(n+1/2)/T}/Z = (1 - e^{-1/T}) e^{-n/T}
    let norm = -(-beta).exp_m1();
    (0..dim).map(|n| norm * (-beta * n as f64).exp()).collect()
}

/// Mean photon number of the thermal state, `1/(e^{1/T} - 1)`.
pub fn thermal_mean_photons(temperature: f64) -> f64 {
    1.0 / (1.0 / temperature).exp_m1()
}

/// Builds the density matrix of `spec` in dimension `dim`.
///
/// Fails when the probability lost beyond the cutoff exceeds `1e-6`; for
/// coherent-type states that is roughly when `|a|^2 + 6|a| + 10 > dim`.
pub fn make_density(spec: &StateSpec, dim: usize) -> Result<DensityMatrix> {
    spec.validate()?;
    if dim < 2 {
        return Err(Error::CutoffTooSmall(dim));
    }
    let check_tail = |tail: f64| {
        if tail > TRACE_DEFICIT_TOL {
            Err(Error::TailMass { tail_mass: tail, limit: TRACE_DEFICIT_TOL, cutoff: dim })
        } else {
            Ok(())
        }
    };
    match *spec {
        StateSpec::Vacuum => {
            let mut p = vec![0.0; dim];
            p[0] = 1.0;
            DensityMatrix::from_populations(&p)
        }
        StateSpec::Fock { m } => {
            if m >= dim {
                return Err(Error::TailMass { tail_mass: 1.0, limit: TRACE_DEFICIT_TOL, cutoff: dim });
            }
            let mut p = vec![0.0; dim];
            p[m] = 1.0;
            DensityMatrix::from_populations(&p)
        }
        StateSpec::Coherent { .. } => {
            let psi = coherent_amplitudes(spec.alpha().unwrap(), dim);
            check_tail(1.0 - psi.norm_squared())?;
            DensityMatrix::from_pure(&psi)
        }
        StateSpec::Cat { parity, .. } => {
            let alpha = spec.alpha().unwrap();
            let norm = cat_normalisation(alpha, parity);
            let mut psi = coherent_amplitudes(alpha, dim);
            for (n, z) in psi.iter_mut().enumerate() {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                *z *= norm * (1.0 + parity.sign() * sign);
            }
            check_tail(1.0 - psi.norm_squared())?;
            DensityMatrix::from_pure(&psi)
        }
        StateSpec::Thermal { temperature } => {
            let p = thermal_populations(temperature, dim);
            check_tail((-(dim as f64) / temperature).exp())?;
            DensityMatrix::from_populations(&p)
        }
    }
}

/// `[psi_0(x), ..., psi_{n_max}(x)]` for the oscillator eigenfunctions
/// `psi_n(x) = pi^{-1/4} (2^n n!)^{-1/2} H_n(x) e^{-x^2/2}`.
///
/// Uses the orthonormal recursion with a running log scale so neither the
/// Hermite growth nor the Gaussian decay over- or underflows prematurely.
pub fn fock_wavefunctions(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut ln_scale = -0.5 * x * x - 0.25 * std::f64::consts::PI.ln();
    let mut prev = 0.0_f64;
    let mut cur = 1.0_f64;
    out.push(ln_scale.exp());
    for k in 0..n_max {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        let big = cur.abs().max(prev.abs());
        if big > 1e100 {
            prev /= big;
            cur /= big;
            ln_scale += big.ln();
        }
        out.push(cur * ln_scale.exp());
    }
    out
}

/// Oscillator eigenfunction `psi_n(x)`.
pub fn fock_wavefunction(n: usize, x: f64) -> Complex64 {
    Complex64::new(fock_wavefunctions(n, x)[n], 0.0)
}

/// `<x|alpha> = pi^{-1/4} exp(-x^2/2 + sqrt2 alpha x - alpha^2/2 - |alpha|^2/2)`:
/// a unit Gaussian centred at `sqrt2 Re(alpha)` with phase slope
/// `sqrt2 Im(alpha)`.
pub fn coherent_wavefunction(alpha: Complex64, x: f64) -> Complex64 {
    let expo = -0.5 * x * x + std::f64::consts::SQRT_2 * alpha * x - 0.5 * alpha * alpha - 0.5 * alpha.norm_sqr();
    expo.exp() * std::f64::consts::PI.powf(-0.25)
}

/// `ln` of the Poisson mass `e^{-mu} mu^n / n!`.
pub fn ln_poisson(mean: f64, n: usize) -> f64 {
    if mean == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -mean + n as f64 * mean.ln() - ln_factorial(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussHermite;

    #[test]
    fn json_encoding() {
        let s = StateSpec::coherent(Complex64::new(3.0, 0.0));
        assert_eq!(s.to_json(), r#"{"kind":"coherent","alpha":[3.0,0.0]}"#);
        assert_eq!(StateSpec::thermal(1.5).to_json(), r#"{"kind":"thermal","T":1.5}"#);
        let back: StateSpec = r#"{"kind":"thermal","T":1.5}"#.parse().unwrap();
        assert_eq!(back, StateSpec::thermal(1.5));
        let cat: StateSpec = r#"{"kind":"cat","alpha":[2.0,0.0],"parity":"odd"}"#.parse().unwrap();
        assert_eq!(cat, StateSpec::cat(Complex64::new(2.0, 0.0), Parity::Odd));
        assert!(r#"{"kind":"thermal","T":-1}"#.parse::<StateSpec>().is_err());
    }

    #[test]
    fn short_forms() {
        assert_eq!("vacuum".parse::<StateSpec>().unwrap(), StateSpec::Vacuum);
        assert_eq!("fock:1".parse::<StateSpec>().unwrap(), StateSpec::Fock { m: 1 });
        assert_eq!("coherent:3+0j".parse::<StateSpec>().unwrap(), StateSpec::coherent(Complex64::new(3.0, 0.0)));
        assert_eq!("cat:2:-".parse::<StateSpec>().unwrap(), StateSpec::cat(Complex64::new(2.0, 0.0), Parity::Odd));
        assert_eq!("thermal:0.5".parse::<StateSpec>().unwrap(), StateSpec::thermal(0.5));
        assert!("cat:0:+".parse::<StateSpec>().is_err());
        assert!("squeezed:1".parse::<StateSpec>().is_err());
        for s in ["coherent:1-2j", "cat:0.5+1.5j:+", "thermal:2", "fock:7"] {
            let spec: StateSpec = s.parse().unwrap();
            assert_eq!(spec.to_string().parse::<StateSpec>().unwrap(), spec);
        }
    }

    #[test]
    fn complex_literals() {
        let c = |re, im| Complex64::new(re, im);
        assert_eq!(parse_complex("3").unwrap(), c(3.0, 0.0));
        assert_eq!(parse_complex("0.5+0j").unwrap(), c(0.5, 0.0));
        assert_eq!(parse_complex("1-2.5j").unwrap(), c(1.0, -2.5));
        assert_eq!(parse_complex("-2j").unwrap(), c(0.0, -2.0));
        assert_eq!(parse_complex("1e-3+4e-1j").unwrap(), c(1e-3, 0.4));
        assert_eq!(parse_complex("-1-j").unwrap(), c(-1.0, -1.0));
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn vacuum_and_coherent_density() {
        let rho = make_density(&StateSpec::Vacuum, 16).unwrap();
        assert_eq!(rho.matrix()[(0, 0)].re, 1.0);
        assert_eq!(rho.matrix().iter().filter(|z| z.norm() != 0.0).count(), 1);

        let rho = make_density(&StateSpec::coherent(Complex64::new(3.0, 0.0)), 64).unwrap();
        for (n, p) in rho.populations().iter().enumerate() {
            let expect = ln_poisson(9.0, n).exp();
            assert!((p - expect).abs() < 1e-15, "n={n}");
        }
        assert!(matches!(
            make_density(&StateSpec::coherent(Complex64::new(5.0, 0.0)), 32),
            Err(Error::TailMass { .. })
        ));
    }

    #[test]
    fn thermal_mean_photon_number() {
        for &t in &[0.3, 1.0, 2.0, 5.0] {
            let rho = make_density(&StateSpec::thermal(t), 256).unwrap();
            let mean: f64 = rho.populations().iter().enumerate().map(|(n, p)| n as f64 * p).sum();
            // geometric series: sum n x^n (1-x) = x/(1-x), x = e^{-1/T}
            let x = (-1.0 / t).exp();
            let oracle = x / (1.0 - x);
            assert!(((mean - oracle) / oracle).abs() <= 1e-6);
            assert!((thermal_mean_photons(t) - oracle).abs() < 1e-12 * oracle.max(1.0));
            let m = rho.matrix();
            for i in 0..256 {
                for j in 0..256 {
                    if i != j {
                        assert_eq!(m[(i, j)].norm(), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn cat_states() {
        let alpha = Complex64::new(1.3, 0.4);
        let odd = make_density(&StateSpec::cat(alpha, Parity::Odd), 64).unwrap();
        let even = make_density(&StateSpec::cat(alpha, Parity::Even), 64).unwrap();
        assert!((odd.trace() - 1.0).abs() < 1e-12 && (even.trace() - 1.0).abs() < 1e-12);
        let po = odd.populations();
        let pe = even.populations();
        let coh = coherent_amplitudes(alpha, 64);
        for n in 0..64 {
            if n % 2 == 0 {
                assert_eq!(po[n], 0.0);
            } else {
                assert_eq!(pe[n], 0.0);
            }
            // |N_+-|^2 * 4 * |c_n|^2 on the surviving parity
            let nplus = cat_normalisation(alpha, Parity::Even).powi(2);
            let nminus = cat_normalisation(alpha, Parity::Odd).powi(2);
            let recon = pe[n] / (4.0 * nplus) + po[n] / (4.0 * nminus);
            assert!((recon - coh[n].norm_sqr()).abs() < 1e-14);
        }
    }

    #[test]
    fn wavefunction_normalisation_and_orthogonality() {
        let gh = GaussHermite::new(60);
        assert!((fock_wavefunction(0, 0.0).re - std::f64::consts::PI.powf(-0.25)).abs() < 1e-15);
        for n in 0..=20 {
            let norm = gh.integrate_plain(|x| fock_wavefunctions(n, x)[n].powi(2));
            assert!((norm - 1.0).abs() <= 1e-10, "n={n}: {norm}");
        }
        let overlap = gh.integrate_plain(|x| {
            let w = fock_wavefunctions(2, x);
            w[0] * w[2]
        });
        assert!(overlap.abs() < 1e-14);
        // far tail stays finite
        let far = fock_wavefunctions(300, 30.0);
        assert!(far.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn coherent_wavefunction_overlaps() {
        let gh = GaussHermite::new(120);
        assert!((coherent_wavefunction(Complex64::new(0.0, 0.0), 0.4) - fock_wavefunction(0, 0.4)).norm() < 1e-15);
        for alpha in [Complex64::new(0.5, 0.0), Complex64::new(-1.2, 2.1), Complex64::new(0.0, 3.0), Complex64::new(2.0, -2.0)] {
            let norm = gh.integrate_plain(|x| coherent_wavefunction(alpha, x).norm_sqr());
            assert!((norm - 1.0).abs() <= 1e-10);
            let amps = coherent_amplitudes(alpha, 21);
            for n in 0..=20 {
                let re = gh.integrate_plain(|x| fock_wavefunctions(n, x)[n] * coherent_wavefunction(alpha, x).re);
                let im = gh.integrate_plain(|x| fock_wavefunctions(n, x)[n] * coherent_wavefunction(alpha, x).im);
                assert!((Complex64::new(re, im) - amps[n]).norm() <= 1e-8, "alpha={alpha} n={n}");
            }
        }
    }
}
