//! Validated state types: density matrices and population vectors.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{self, re, CMatrix, CVector};

/// Tolerance on Hermiticity, unit trace and positivity of states.
pub const STATE_TOL: f64 = 1e-12;

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity to [`STATE_TOL`].
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Domain("density matrix must be square".into()));
        }
        if !linalg::is_finite(&matrix) {
            return Err(Error::Numerical("density matrix has non-finite entries".into()));
        }
        if !linalg::is_hermitian(&matrix, STATE_TOL) {
            return Err(Error::Domain("density matrix is not Hermitian".into()));
        }
        let tr = matrix.trace();
        if (tr - re(1.0)).norm() > STATE_TOL {
            return Err(Error::Domain(format!("density matrix trace is {tr}, expected 1")));
        }
        let min_eig = linalg::hermitian_eigenvalues(&matrix)[0];
        if min_eig < -STATE_TOL {
            return Err(Error::Domain(format!("density matrix has negative eigenvalue {min_eig:.3e}")));
        }
        Ok(Self { matrix })
    }

    /// Wraps a matrix without validation. Callers guarantee the invariants.
    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: linalg::identity(dim) * re(1.0 / dim as f64) }
    }

    pub fn from_populations(p: &PopulationVector) -> Self {
        let diag = CVector::from_iterator(p.len(), p.as_slice().iter().map(|&x| re(x)));
        Self { matrix: CMatrix::from_diagonal(&diag) }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `ρ − 𝟙/n`.
    pub fn deviation(&self) -> CMatrix {
        &self.matrix - linalg::identity(self.dim()) * re(1.0 / self.dim() as f64)
    }

    /// Diagonal in the computational basis.
    pub fn populations(&self) -> PopulationVector {
        PopulationVector { values: (0..self.dim()).map(|k| self.matrix[(k, k)].re).collect() }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.matrix)[0]
    }
}

/// Diagonal probabilities of a density matrix, `(p00, p01, p10, p11)` for
/// two spins.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationVector {
    values: Vec<f64>,
}

impl PopulationVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("empty population vector".into()));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical("non-finite population".into()));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > STATE_TOL {
            return Err(Error::Domain(format!("populations sum to {sum}, expected 1")));
        }
        if values.iter().any(|&x| !(-STATE_TOL..=1.0 + STATE_TOL).contains(&x)) {
            return Err(Error::Domain("population outside [0, 1]".into()));
        }
        Ok(Self { values })
    }

    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn to_cvector(&self) -> CVector {
        CVector::from_iterator(self.len(), self.values.iter().map(|&x| re(x)))
    }
}

impl fmt::Display for PopulationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|x| format!("{x:.17e}")).collect();
        write!(f, "({})", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_states() {
        let m = linalg::identity(2);
        assert!(matches!(DensityMatrix::new(m), Err(Error::Domain(_))));
        let mut neg = CMatrix::zeros(2, 2);
        neg[(0, 0)] = re(1.5);
        neg[(1, 1)] = re(-0.5);
        assert!(DensityMatrix::new(neg).is_err());
        let mut nonherm = linalg::identity(2) * re(0.5);
        nonherm[(0, 1)] = re(0.1);
        assert!(DensityMatrix::new(nonherm).is_err());
        assert!(DensityMatrix::new(DensityMatrix::maximally_mixed(4).into_matrix()).is_ok());
    }

    #[test]
    fn population_validation() {
        assert!(PopulationVector::new(vec![0.25; 4]).is_ok());
        assert!(PopulationVector::new(vec![0.5, 0.6]).is_err());
        assert!(PopulationVector::new(vec![1.2, -0.2]).is_err());
        assert!(PopulationVector::new(vec![]).is_err());
    }
}
