use num_complex::Complex64;

use super::{expm, top_tail_mass, CMatrix, PlebanskiParams, StateVector, TruncatedOperator, LAMBDA_MAX};
use crate::diagnostics::Diagnostic;
use crate::error::{Error, Result};

fn check_cutoff(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::CutoffTooSmall(dim));
    }
    Ok(())
}

fn check_lambda(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() || value.abs() > LAMBDA_MAX {
        return Err(Error::InvalidParameter { name, reason: format!("|{value}| exceeds the squeeze bound {LAMBDA_MAX}") });
    }
    Ok(())
}

/// Exponentiates `generator` and records the weight the result pushes from
/// the vacuum into the top levels.
fn exp_with_leakage(generator: CMatrix) -> Result<TruncatedOperator> {
    let u = expm(&generator)?;
    let leak = top_tail_mass(&u.column(0).into_owned());
    Ok(TruncatedOperator::from_parts(u, leak))
}

/// Ladder matrix with `<n|a|n+1> = sqrt(n+1)`.
pub fn annihilation_matrix(dim: usize) -> Result<TruncatedOperator> {
    check_cutoff(dim)?;
    let mut a = CMatrix::zeros(dim, dim);
    for n in 0..dim - 1 {
        a[(n, n + 1)] = Complex64::new(((n + 1) as f64).sqrt(), 0.0);
    }
    TruncatedOperator::new(a)
}

/// `(q, p)` with `q = (a + a^+)/sqrt 2` and `p = (a - a^+)/(i sqrt 2)`.
pub fn quadrature_matrices(dim: usize) -> Result<(TruncatedOperator, TruncatedOperator)> {
    let a = annihilation_matrix(dim)?.into_matrix();
    let ad = a.adjoint();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let q = (&a + &ad) * Complex64::new(s, 0.0);
    let p = (&a - &ad) * Complex64::new(0.0, -s);
    Ok((TruncatedOperator::new(q)?, TruncatedOperator::new(p)?))
}

/// `exp(A)` by scaling and squaring.
pub fn matrix_exponential(a: &TruncatedOperator) -> Result<TruncatedOperator> {
    Ok(TruncatedOperator::from_parts(expm(a.matrix())?, a.tail_mass()))
}

/// `S(lambda) = exp[i lambda/2 (q p + p q)] = exp[lambda/2 (a^2 - a^+^2)]`.
///
/// Maps `q -> e^lambda q` under `S q S^+`. Couples only Fock states of equal
/// parity; requires `|lambda| <= LAMBDA_MAX`.
pub fn squeeze_matrix(lambda: f64, dim: usize) -> Result<TruncatedOperator> {
    check_lambda("lambda", lambda)?;
    let (q, p) = quadrature_matrices(dim)?;
    let (q, p) = (q.matrix(), p.matrix());
    let gen = (q * p + p * q) * Complex64::new(0.0, 0.5 * lambda);
    exp_with_leakage(gen)
}

/// `R(theta) = exp[i theta/2 (q^2 + p^2)]`, diagonal with entries
/// `exp(i theta (n + 1/2))`.
pub fn rotation_matrix(theta: f64, dim: usize) -> Result<TruncatedOperator> {
    check_cutoff(dim)?;
    let diag = StateVector::from_iterator(dim, (0..dim).map(|n| Complex64::from_polar(1.0, theta * (n as f64 + 0.5))));
    TruncatedOperator::new(CMatrix::from_diagonal(&diag))
}

/// `exp[i (eta q - xi p)]`, the displacement by `beta = (xi + i eta)/sqrt 2`.
pub fn displacement_matrix(eta: f64, xi: f64, dim: usize) -> Result<TruncatedOperator> {
    let (q, p) = quadrature_matrices(dim)?;
    let gen = (q.matrix() * Complex64::new(0.0, eta)) - (p.matrix() * Complex64::new(0.0, xi));
    exp_with_leakage(gen)
}

/// Stoler's `S(z) = exp[(z a^2 - z^* a^+^2)/2]`.
///
/// For real `z` this is exactly [`squeeze_matrix`] at `lambda = z` (same sign,
/// no phase): `i lambda/2 (q p + p q) = lambda/2 (a^2 - a^+^2)`.
pub fn stoler_squeeze(z: Complex64, dim: usize) -> Result<TruncatedOperator> {
    check_lambda("|z|", z.norm())?;
    let a = annihilation_matrix(dim)?.into_matrix();
    let a2 = &a * &a;
    let ad2 = a2.adjoint();
    let gen = (a2 * z - ad2 * z.conj()) * Complex64::new(0.5, 0.0);
    exp_with_leakage(gen)
}

/// Squeeze parameter of [`squeeze_matrix`] equivalent to a real Stoler `z`.
pub fn stoler_to_lambda(z: f64) -> f64 {
    z
}

/// Result of [`plebanski_transform`].
#[derive(Debug, Clone)]
pub struct Transformed {
    pub state: StateVector,
    /// Weight on the top `ceil(N/10)` levels of the output.
    pub tail_mass: f64,
}

impl Transformed {
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        Diagnostic::tail_mass("plebanski_transform", self.tail_mass).into_iter().collect()
    }
}

/// Applies `exp[i(eta q - xi p)] exp[(i/2) ln a (q p + p q)]` to `psi`.
pub fn plebanski_transform(params: PlebanskiParams, psi: &StateVector) -> Result<Transformed> {
    let params = PlebanskiParams::new(params.eta, params.xi, params.a)?;
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidParameter { name: "psi", reason: format!("not normalised (norm {norm})") });
    }
    let dim = psi.len();
    let squeezed = squeeze_matrix(params.a.ln(), dim)?.apply(psi)?;
    let out = displacement_matrix(params.eta, params.xi, dim)?.apply(&squeezed)?;
    let tail_mass = top_tail_mass(&out);
    Ok(Transformed { state: out, tail_mass })
}

/// Fock basis vector `|n>` in dimension `dim`.
pub fn fock_vector(n: usize, dim: usize) -> Result<StateVector> {
    if n >= dim {
        return Err(Error::InvalidParameter { name: "n", reason: format!("level {n} outside cutoff {dim}") });
    }
    let mut v = StateVector::zeros(dim);
    v[n] = Complex64::new(1.0, 0.0);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::ln_factorial;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn coherent_vector(alpha: Complex64, dim: usize) -> StateVector {
        let mut v = StateVector::zeros(dim);
        v[0] = c((-alpha.norm_sqr() / 2.0).exp(), 0.0);
        for n in 1..dim {
            v[n] = v[n - 1] * alpha / (n as f64).sqrt();
        }
        v
    }

    fn ex03(n: usize, lambda: f64) -> f64 {
        if n % 2 == 1 {
            return 0.0;
        }
        let m = n / 2;
        // (-tanh)^n H_n(0)^2 / (n! 2^n cosh), H_{2m}(0)^2 = ((2m)!/m!)^2
        let ln = n as f64 * lambda.tanh().abs().ln() + 2.0 * (ln_factorial(n) - ln_factorial(m))
            - ln_factorial(n)
            - n as f64 * 2f64.ln()
            - lambda.cosh().ln();
        if lambda == 0.0 {
            return if n == 0 { 1.0 } else { 0.0 };
        }
        ln.exp()
    }

    #[test]
    fn annihilation_small_and_action() {
        let a = annihilation_matrix(2).unwrap();
        assert_eq!(a.get(0, 1), c(1.0, 0.0));
        assert_eq!(a.get(0, 0), c(0.0, 0.0));
        assert_eq!(a.get(1, 0), c(0.0, 0.0));
        assert_eq!(a.get(1, 1), c(0.0, 0.0));
        let a = annihilation_matrix(6).unwrap();
        assert!(a.apply(&fock_vector(0, 6).unwrap()).unwrap().iter().all(|z| z.norm() == 0.0));
        let out = a.apply(&fock_vector(2, 6).unwrap()).unwrap();
        assert!((out[1] - c(2f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!(annihilation_matrix(1).is_err());
    }

    #[test]
    fn quadratures_vacuum_and_commutator() {
        let (q, p) = quadrature_matrices(16).unwrap();
        let (q, p) = (q.matrix(), p.matrix());
        assert!(((q * q)[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
        assert!(((p * p)[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
        assert!((q[(1, 0)] - c(std::f64::consts::FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        let comm = q * p - p * q;
        for i in 0..15 {
            for j in 0..15 {
                let t = if i == j { c(0.0, 1.0) } else { c(0.0, 0.0) };
                assert!((comm[(i, j)] - t).norm() < 1e-13);
            }
        }
        assert!((q - q.adjoint()).iter().all(|z| z.norm() == 0.0));
        assert!((p - p.adjoint()).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn exponential_of_rotation_generator_is_unitary_diagonal() {
        let n = 10;
        let gen = CMatrix::from_diagonal(&StateVector::from_iterator(n, (0..n).map(|k| c(0.0, 0.7 * (k as f64 + 0.5)))));
        let u = matrix_exponential(&TruncatedOperator::new(gen).unwrap()).unwrap();
        for k in 0..n {
            assert!((u.get(k, k).norm() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn squeeze_identity_parity_and_vacuum() {
        let s0 = squeeze_matrix(0.0, 32).unwrap();
        assert_eq!(s0.matrix(), &CMatrix::identity(32, 32));
        for &lambda in &[-1.0, -0.3, 0.5, 1.0] {
            let s = squeeze_matrix(lambda, 128).unwrap();
            assert!(s.unitarity_defect() < 1e-9, "unitarity at {lambda}: {}", s.unitarity_defect());
            assert_eq!(s.get(1, 0), c(0.0, 0.0));
            for i in 0..128 {
                for j in 0..128 {
                    if (i + j) % 2 == 1 {
                        assert!(s.get(i, j).norm() <= 1e-12);
                    }
                }
            }
            let p00 = s.get(0, 0).norm_sqr();
            assert!((p00 - 1.0 / lambda.cosh()).abs() < 1e-12);
            for n in 0..40 {
                assert!((s.get(n, 0).norm_sqr() - ex03(n, lambda)).abs() < 1e-12, "n={n}");
            }
            assert!(s.diagnostics("squeeze_matrix").is_empty());
        }
        assert!(squeeze_matrix(2.5, 16).is_err());
    }

    #[test]
    fn squeeze_scales_position() {
        // S q S^+ = e^lambda q on the interior
        let lambda = 0.4;
        let s = squeeze_matrix(lambda, 128).unwrap();
        let (q, _) = quadrature_matrices(128).unwrap();
        let lhs = s.matrix() * q.matrix() * s.matrix().adjoint();
        let rhs = q.matrix() * c(lambda.exp(), 0.0);
        for i in 0..24 {
            for j in 0..24 {
                assert!((lhs[(i, j)] - rhs[(i, j)]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn squeeze_truncation_convergence() {
        let a = squeeze_matrix(0.8, 64).unwrap();
        let b = squeeze_matrix(0.8, 128).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                assert!((a.get(i, j) - b.get(i, j)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn rotation_is_diagonal_phase() {
        assert_eq!(rotation_matrix(0.0, 8).unwrap().matrix(), &CMatrix::identity(8, 8));
        let r = rotation_matrix(1.3, 20).unwrap();
        for n in 0..20 {
            assert!((r.get(n, n).norm() - 1.0).abs() < 1e-15);
            assert!((r.get(n, n) - Complex64::from_polar(1.0, 1.3 * (n as f64 + 0.5))).norm() < 1e-14);
        }
    }

    #[test]
    fn rotation_of_coherent_state() {
        let alpha = c(1.2, -0.7);
        let theta = 0.9;
        let dim = 64;
        let lhs = rotation_matrix(theta, dim).unwrap().apply(&coherent_vector(alpha, dim)).unwrap();
        let rhs = coherent_vector(alpha * Complex64::from_polar(1.0, theta), dim) * Complex64::from_polar(1.0, theta / 2.0);
        assert!((lhs - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max) <= 1e-8);
    }

    #[test]
    fn displacement_makes_poisson_and_inverts() {
        let dim = 64;
        let (eta, xi) = (1.1, -2.0);
        let d = displacement_matrix(eta, xi, dim).unwrap();
        assert!(d.unitarity_defect() < 1e-9);
        let psi = d.apply(&fock_vector(0, dim).unwrap()).unwrap();
        let mean = (eta * eta + xi * xi) / 2.0;
        let tv: f64 = (0..dim)
            .map(|n| {
                let poisson = (-mean + n as f64 * mean.ln() - ln_factorial(n)).exp();
                (psi[n].norm_sqr() - poisson).abs()
            })
            .sum::<f64>()
            / 2.0;
        assert!(tv <= 1e-6, "total variation {tv}");
        // amplitude matches the coherent state beta = (xi + i eta)/sqrt 2
        let beta = c(xi, eta) / 2f64.sqrt();
        let coh = coherent_vector(beta, dim);
        assert!((0..30).all(|n| (psi[n] - coh[n]).norm() < 1e-10));

        let back = displacement_matrix(-eta, -xi, dim).unwrap();
        let prod = back.compose(&d).unwrap();
        for i in 0..40 {
            for j in 0..40 {
                let t = if i == j { 1.0 } else { 0.0 };
                assert!((prod.get(i, j) - c(t, 0.0)).norm() < 1e-8);
            }
        }
        assert_eq!(displacement_matrix(0.0, 0.0, 16).unwrap().matrix(), &CMatrix::identity(16, 16));
    }

    #[test]
    fn stoler_matches_quadrature_squeeze() {
        assert_eq!(stoler_squeeze(c(0.0, 0.0), 16).unwrap().matrix(), &CMatrix::identity(16, 16));
        for &z in &[-0.9, 0.35, 1.0] {
            let st = stoler_squeeze(c(z, 0.0), 128).unwrap();
            let sq = squeeze_matrix(stoler_to_lambda(z), 128).unwrap();
            let mut worst = 0.0_f64;
            for n in 0..100 {
                worst = worst.max((st.get(n, 0).norm_sqr() - sq.get(n, 0).norm_sqr()).abs());
                if n % 2 == 1 {
                    assert!(st.get(n, 0).norm_sqr() <= 1e-24);
                }
            }
            assert!(worst <= 1e-8);
            // the opposite sign would also match on |.|^2 of the vacuum column, but
            // not the amplitudes: check they agree entrywise.
            assert!((st.matrix() - sq.matrix()).iter().take(60).all(|d| d.norm() < 1e-12));
        }
        let complex = stoler_squeeze(c(0.3, 0.4), 64).unwrap();
        assert!(complex.unitarity_defect() < 1e-9);
    }

    #[test]
    fn plebanski_special_cases() {
        let dim = 128;
        let psi0 = fock_vector(0, dim).unwrap();
        let id = plebanski_transform(PlebanskiParams { eta: 0.0, xi: 0.0, a: 1.0 }, &psi0).unwrap();
        assert!((id.state.clone() - psi0.clone()).norm() < 1e-15);

        let lambda = 0.7f64;
        let out = plebanski_transform(PlebanskiParams { eta: 0.0, xi: 0.0, a: (-lambda).exp() }, &psi0).unwrap();
        assert!((out.state.norm() - 1.0).abs() < 1e-6);
        let worst = (0..60).map(|n| (out.state[n].norm_sqr() - ex03(n, lambda)).abs()).fold(0.0, f64::max);
        assert!(worst <= 1e-8, "{worst}");

        // a = 1: displaced number state D|1>
        let psi1 = fock_vector(1, 64).unwrap();
        let dn = plebanski_transform(PlebanskiParams { eta: 0.5, xi: 0.2, a: 1.0 }, &psi1).unwrap();
        let direct = displacement_matrix(0.5, 0.2, 64).unwrap().apply(&psi1).unwrap();
        assert!((&dn.state - &direct).norm() < 1e-14);
        assert!(dn.diagnostics().is_empty());
    }
}
