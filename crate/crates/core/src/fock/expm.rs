//! Dense complex matrix exponential by scaling and squaring with diagonal
//! Padé approximants of degree 3 to 13 (Higham 2005).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

type CMatrix = DMatrix<Complex64>;

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn one_norm(a: &CMatrix) -> f64 {
    a.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn scaled_identity(n: usize, s: f64) -> CMatrix {
    CMatrix::from_diagonal_element(n, n, Complex64::new(s, 0.0))
}

fn lin_comb(terms: &[(f64, &CMatrix)], n: usize) -> CMatrix {
    let mut out = CMatrix::zeros(n, n);
    for (c, m) in terms {
        out.zip_apply(*m, |o, x| *o += x * *c);
    }
    out
}

/// `exp(a)` for a square complex matrix.
pub fn expm(a: &CMatrix) -> Result<CMatrix> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.ncols() });
    }
    for (j, col) in a.column_iter().enumerate() {
        if let Some(i) = col.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { row: i, col: j });
        }
    }
    if n == 0 {
        return Ok(a.clone());
    }

    let norm = one_norm(a);
    for &(m, theta) in &THETA {
        if norm <= theta {
            let (u, v) = pade_low(a, m);
            return solve_pade(&u, &v);
        }
    }

    let s = if norm > THETA_13 { (norm / THETA_13).log2().ceil() as i32 } else { 0 };
    let scaled = a * Complex64::new(2f64.powi(-s), 0.0);
    let (u, v) = pade13(&scaled);
    let mut x = solve_pade(&u, &v)?;
    for _ in 0..s {
        x = &x * &x;
    }
    Ok(x)
}

/// `exp(A) v` for an operator known only through its action `apply`.
///
/// `norm_bound` must bound `||A||_1`. The interval is split so each step
/// has norm at most 2 and the Taylor series of each step is summed to
/// convergence.
pub fn expm_multiply<T, F>(apply: F, norm_bound: f64, v: &nalgebra::DVector<T>) -> nalgebra::DVector<T>
where
    T: nalgebra::ComplexField<RealField = f64>,
    F: Fn(&nalgebra::DVector<T>) -> nalgebra::DVector<T>,
{
    let steps = (norm_bound / 2.0).ceil().max(1.0) as usize;
    let inv = 1.0 / steps as f64;
    let mut out = v.clone();
    for _ in 0..steps {
        let mut term = out.clone();
        let mut sum = out.clone();
        for k in 1..80 {
            term = apply(&term) * T::from_real(inv / k as f64);
            sum += &term;
            if term.norm() <= 1e-18 * sum.norm() {
                break;
            }
        }
        out = sum;
    }
    out
}

fn pade_low(a: &CMatrix, m: usize) -> (CMatrix, CMatrix) {
    let n = a.nrows();
    let b: &[f64] = match m {
        3 => &B3,
        5 => &B5,
        7 => &B7,
        _ => &B9,
    };
    let a2 = a * a;
    // even powers A^0, A^2, ..., A^{m-1}
    let mut powers = vec![scaled_identity(n, 1.0), a2.clone()];
    while powers.len() < m.div_ceil(2) {
        let next = powers.last().unwrap() * &a2;
        powers.push(next);
    }
    let odd: Vec<(f64, &CMatrix)> = powers.iter().enumerate().map(|(k, p)| (b[2 * k + 1], p)).collect();
    let even: Vec<(f64, &CMatrix)> = powers.iter().enumerate().map(|(k, p)| (b[2 * k], p)).collect();
    let u = a * lin_comb(&odd, n);
    let v = lin_comb(&even, n);
    (u, v)
}

fn pade13(a: &CMatrix) -> (CMatrix, CMatrix) {
    let n = a.nrows();
    let b = &B13;
    let ident = scaled_identity(n, 1.0);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * lin_comb(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)], n);
    let u = a * (inner_u + lin_comb(&[(b[7], &a6), (b[5], &a4), (b[3], &a2), (b[1], &ident)], n));
    let inner_v = &a6 * lin_comb(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)], n);
    let v = inner_v + lin_comb(&[(b[6], &a6), (b[4], &a4), (b[2], &a2), (b[0], &ident)], n);
    (u, v)
}

fn solve_pade(u: &CMatrix, v: &CMatrix) -> Result<CMatrix> {
    let p = v + u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .ok_or_else(|| Error::InvalidParameter { name: "matrix", reason: "Padé denominator is singular".into() })
}
