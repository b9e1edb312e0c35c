//! Linear algebra on the truncated Fock space `span{|0>, ..., |N-1>}`.

mod expm;
mod operators;

pub use expm::{expm, expm_multiply};
pub use operators::*;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::Diagnostic;
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type StateVector = DVector<Complex64>;

/// Largest squeeze parameter accepted by the squeeze constructors.
pub const LAMBDA_MAX: f64 = 2.0;

/// Number of top Fock levels treated as corrupted by truncation:
/// `ceil(N / 10)`.
pub fn boundary_margin(dim: usize) -> usize {
    dim.div_ceil(10)
}

/// Square complex matrix acting on the truncated Fock space, together with
/// an estimate of the probability it pushes past the cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    mat: CMatrix,
    tail_mass: f64,
}

impl TruncatedOperator {
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch { expected: mat.nrows(), got: mat.ncols() });
        }
        if mat.nrows() < 2 {
            return Err(Error::CutoffTooSmall(mat.nrows()));
        }
        Ok(Self { mat, tail_mass: 0.0 })
    }

    pub(crate) fn from_parts(mat: CMatrix, tail_mass: f64) -> Self {
        Self { mat, tail_mass }
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(CMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    /// Probability weight the operator moves into the top 10% of the basis
    /// when applied to the vacuum; zero for exactly representable operators.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.mat[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self { mat: self.mat.adjoint(), tail_mass: self.tail_mass }
    }

    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        self.check_dim(rhs.dim())?;
        Ok(Self { mat: &self.mat * &rhs.mat, tail_mass: self.tail_mass.max(rhs.tail_mass) })
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        self.check_dim(psi.len())?;
        Ok(&self.mat * psi)
    }

    /// `max |(U^+ U - I)_ij|` over the interior block `[0, N - margin)`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        let interior = n - boundary_margin(n);
        let gram = self.mat.adjoint() * &self.mat;
        let mut worst = 0.0_f64;
        for i in 0..interior {
            for j in 0..interior {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    pub fn diagnostics(&self, op: &'static str) -> Vec<Diagnostic> {
        Diagnostic::tail_mass(op, self.tail_mass).into_iter().collect()
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got });
        }
        Ok(())
    }

    /// Row-major `[[[re, im], ...], ...]` layout used by `dump`.
    pub fn to_rows(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| [self.mat[(i, j)].re, self.mat[(i, j)].im]).collect())
            .collect()
    }
}

/// Weight of `psi` on the top `ceil(N/10)` Fock levels.
pub fn top_tail_mass(psi: &StateVector) -> f64 {
    let n = psi.len();
    psi.iter().skip(n - boundary_margin(n)).map(|z| z.norm_sqr()).sum()
}

/// Hermitian, unit-trace (up to truncation tail), positive semidefinite
/// operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: TruncatedOperator,
}

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_DEFICIT_TOL: f64 = 1e-6;
pub const POSITIVITY_TOL: f64 = 1e-9;

impl DensityMatrix {
    /// Validates all three invariants, including positivity through a full
    /// Hermitian eigendecomposition.
    pub fn new(op: TruncatedOperator) -> Result<Self> {
        Self::check_hermitian_trace(&op)?;
        let herm = (op.matrix() + op.matrix().adjoint()) * Complex64::new(0.5, 0.0);
        let eig = herm.symmetric_eigenvalues();
        if let Some(&min) = eig.iter().min_by(|a, b| a.total_cmp(b)) {
            if min < -POSITIVITY_TOL {
                return Err(Error::NotADensityMatrix(format!("eigenvalue {min:.3e} is negative")));
            }
        }
        Ok(Self { op })
    }

    fn check_hermitian_trace(op: &TruncatedOperator) -> Result<()> {
        let m = op.matrix();
        let n = op.dim();
        for i in 0..n {
            for j in 0..=i {
                let d = (m[(i, j)] - m[(j, i)].conj()).norm();
                if !(d <= HERMITICITY_TOL) {
                    return Err(Error::NotADensityMatrix(format!(
                        "entries ({i},{j}) and ({j},{i}) are not conjugate (defect {d:.3e})"
                    )));
                }
            }
        }
        let tr = m.trace();
        if tr.re > 1.0 + 1e-12 || tr.re < 1.0 - TRACE_DEFICIT_TOL {
            return Err(Error::NotADensityMatrix(format!("trace {:.15} outside [1-1e-6, 1]", tr.re)));
        }
        Ok(())
    }

    /// `|psi><psi|`; positivity holds by construction.
    pub fn from_pure(psi: &StateVector) -> Result<Self> {
        let mat = psi * psi.adjoint();
        let op = TruncatedOperator::new(mat)?;
        Self::check_hermitian_trace(&op)?;
        Ok(Self { op })
    }

    /// Diagonal state with the given populations.
    pub fn from_populations(p: &[f64]) -> Result<Self> {
        if let Some(i) = p.iter().position(|&x| !(x >= 0.0)) {
            return Err(Error::NotADensityMatrix(format!("population {i} is {}", p[i])));
        }
        let diag = DVector::from_iterator(p.len(), p.iter().map(|&x| Complex64::new(x, 0.0)));
        let op = TruncatedOperator::new(CMatrix::from_diagonal(&diag))?;
        Self::check_hermitian_trace(&op)?;
        Ok(Self { op })
    }

    pub fn op(&self) -> &TruncatedOperator {
        &self.op
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn trace(&self) -> f64 {
        self.matrix().trace().re
    }

    /// Probability lost beyond the cutoff, `1 - tr rho`.
    pub fn tail_mass(&self) -> f64 {
        (1.0 - self.trace()).max(0.0)
    }

    /// `<n|rho|n>` for every level.
    pub fn populations(&self) -> Vec<f64> {
        self.matrix().diagonal().iter().map(|z| z.re).collect()
    }

    /// One past the highest populated level. Rows and columns beyond it are
    /// zero because the matrix is positive semidefinite.
    pub fn effective_dim(&self) -> usize {
        let pops = self.populations();
        pops.iter().rposition(|&p| p > 1e-300).map_or(1, |i| i + 1)
    }

    /// The same state in a larger truncated space (zero padded).
    pub fn embed(&self, dim: usize) -> Result<Self> {
        if dim < self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: dim });
        }
        let mut mat = CMatrix::zeros(dim, dim);
        mat.view_mut((0, 0), (self.dim(), self.dim())).copy_from(self.matrix());
        Ok(Self { op: TruncatedOperator::from_parts(mat, self.op.tail_mass) })
    }

    pub fn diagnostics(&self, op: &'static str) -> Vec<Diagnostic> {
        Diagnostic::tail_mass(op, self.tail_mass()).into_iter().collect()
    }
}

/// Parameters `(eta, xi, a)` of the displaced-and-scaled state family
/// `exp[i(eta q - xi p)] exp[(i/2) ln a (q p + p q)] |psi>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlebanskiParams {
    pub eta: f64,
    pub xi: f64,
    pub a: f64,
}

impl PlebanskiParams {
    pub fn new(eta: f64, xi: f64, a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidParameter { name: "a", reason: format!("must be positive, got {a}") });
        }
        Ok(Self { eta, xi, a })
    }
}
