//! Hermite and Laguerre polynomials by three-term recursion, plus the
//! two-index Hermite polynomials at the origin.
//!
//! Orders past roughly 150 overflow `f64` once multiplied out, so every
//! family also has a log-magnitude form ([`LogScaled`]) in which the
//! recursion is periodically renormalised.

use num_complex::Complex64;

/// Largest order the special functions are tuned for.
pub const N_MAX: usize = 512;

const RESCALE_ABOVE: f64 = 1e120;

/// `sign * exp(ln_abs)`; `sign` is `-1`, `0` or `1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogScaled {
    pub sign: f64,
    pub ln_abs: f64,
}

impl LogScaled {
    pub const ZERO: Self = Self { sign: 0.0, ln_abs: f64::NEG_INFINITY };
    pub const ONE: Self = Self { sign: 1.0, ln_abs: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self { sign: x.signum(), ln_abs: x.abs().ln() }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0.0
    }

    pub fn to_f64(self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            self.sign * self.ln_abs.exp()
        }
    }

    pub fn mul(self, other: Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        Self { sign: self.sign * other.sign, ln_abs: self.ln_abs + other.ln_abs }
    }

    pub fn powi(self, k: i32) -> Self {
        if k == 0 {
            return Self::ONE;
        }
        if self.is_zero() {
            return Self::ZERO;
        }
        let sign = if k % 2 == 0 { 1.0 } else { self.sign };
        Self { sign, ln_abs: self.ln_abs * k as f64 }
    }

    /// Multiplies by `exp(ln_factor)`.
    pub fn scale_ln(self, ln_factor: f64) -> Self {
        if self.is_zero() {
            self
        } else {
            Self { sign: self.sign, ln_abs: self.ln_abs + ln_factor }
        }
    }
}

/// `ln n!`.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Physicists' Hermite polynomial `H_n(x)`.
pub fn hermite(n: usize, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `H_n(x)` in sign/log-magnitude form; never overflows.
pub fn hermite_log(n: usize, x: f64) -> LogScaled {
    let mut prev = 0.0_f64;
    let mut cur = 1.0_f64;
    let mut ln_scale = 0.0;
    for k in 0..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
        let big = cur.abs().max(prev.abs());
        if big > RESCALE_ABOVE {
            prev /= big;
            cur /= big;
            ln_scale += big.ln();
        }
    }
    LogScaled::from_f64(cur).scale_ln(ln_scale)
}

/// `H_n(z)` for complex argument.
pub fn hermite_complex(n: usize, z: Complex64) -> Complex64 {
    let (mantissa, ln_scale) = hermite_complex_scaled(n, z);
    mantissa * ln_scale.exp()
}

/// `H_n(z) = mantissa * exp(ln_scale)`; the mantissa stays bounded.
pub fn hermite_complex_scaled(n: usize, z: Complex64) -> (Complex64, f64) {
    let mut prev = Complex64::new(0.0, 0.0);
    let mut cur = Complex64::new(1.0, 0.0);
    let mut ln_scale = 0.0;
    for k in 0..n {
        let next = 2.0 * z * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
        let big = cur.norm().max(prev.norm());
        if big > RESCALE_ABOVE {
            prev /= big;
            cur /= big;
            ln_scale += big.ln();
        }
    }
    (cur, ln_scale)
}

/// Laguerre polynomial `L_n(x)`.
pub fn laguerre(n: usize, x: f64) -> f64 {
    assoc_laguerre(n, 0, x)
}

/// Generalised Laguerre polynomial `L_n^{(k)}(x)`.
pub fn assoc_laguerre(n: usize, k: usize, x: f64) -> f64 {
    let a = k as f64;
    let mut prev = 0.0;
    let mut cur = 1.0;
    for j in 0..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + a - x) * cur - (jf + a) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `[L_0^{(k)}(x), ..., L_{len-1}^{(k)}(x)]`.
pub fn assoc_laguerre_table(len: usize, k: usize, x: f64) -> Vec<f64> {
    let a = k as f64;
    let mut out = Vec::with_capacity(len);
    let mut prev = 0.0;
    let mut cur = 1.0;
    for j in 0..len {
        out.push(cur);
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + a - x) * cur - (jf + a) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    out
}

/// Symmetric 2x2 matrix `[[r11, r12], [r12, r22]]` defining a two-index
/// Hermite family through the generating function
/// `exp(-x.R.x / 2) = sum_{n,m} H^R_{nm}(0) x1^n x2^m / (n! m!)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Symmetric2 {
    pub r11: f64,
    pub r12: f64,
    pub r22: f64,
}

impl Symmetric2 {
    /// The matrix whose Hermite family gives the Fock matrix elements of
    /// the squeeze operator: `[[tanh l, -sech l], [-sech l, -tanh l]]`.
    pub fn squeeze(lambda: f64) -> Self {
        let t = lambda.tanh();
        let s = 1.0 / lambda.cosh();
        Self { r11: t, r12: -s, r22: -t }
    }
}

/// Table `g[n][m] = H^R_{nm}(0) / sqrt(n! m!)` for `n <= n_max`, `m <= m_max`.
///
/// The normalised recursion keeps entries of order one for the contraction
/// matrices used here, so no rescaling is needed.
pub fn two_index_hermite_table(r: Symmetric2, n_max: usize, m_max: usize) -> Vec<Vec<f64>> {
    let mut g = vec![vec![0.0; m_max + 1]; n_max + 1];
    g[0][0] = 1.0;
    // H_{n+1,m} = -r11 n H_{n-1,m} - r12 m H_{n,m-1}
    for n in 0..n_max {
        let below = if n > 0 { g[n - 1][0] } else { 0.0 };
        g[n + 1][0] = -r.r11 * (n as f64).sqrt() * below / ((n + 1) as f64).sqrt();
    }
    // H_{n,m+1} = -r12 n H_{n-1,m} - r22 m H_{n,m-1}
    for m in 0..m_max {
        let inv = 1.0 / ((m + 1) as f64).sqrt();
        let sm = (m as f64).sqrt();
        for n in 0..=n_max {
            let a = if n > 0 { g[n - 1][m] * (n as f64).sqrt() } else { 0.0 };
            let b = if m > 0 { g[n][m - 1] * sm } else { 0.0 };
            g[n][m + 1] = (-r.r12 * a - r.r22 * b) * inv;
        }
    }
    g
}

/// Two-index Hermite polynomial at the origin, `H^R_{nm}(0)`.
///
/// Overflows to infinity for large orders; see
/// [`hermite_two_index_zero_log`].
pub fn hermite_two_index_zero(r: Symmetric2, n: usize, m: usize) -> f64 {
    hermite_two_index_zero_log(r, n, m).to_f64()
}

/// `H^R_{nm}(0)` in sign/log-magnitude form.
pub fn hermite_two_index_zero_log(r: Symmetric2, n: usize, m: usize) -> LogScaled {
    let g = two_index_hermite_table(r, n, m)[n][m];
    LogScaled::from_f64(g).scale_ln(0.5 * (ln_factorial(n) + ln_factorial(m)))
}
