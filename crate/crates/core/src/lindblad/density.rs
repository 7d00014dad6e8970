//! Density matrix with validity checks.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// A density matrix over the chosen basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub matrix: DMatrix<Complex64>,
}

/// Violations reported by [`DensityMatrix::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityDiagnostics {
    pub hermiticity: f64,
    pub trace_deviation: f64,
    pub min_eigenvalue: f64,
}

impl DensityMatrix {
    pub fn new(matrix: DMatrix<Complex64>) -> Self {
        DensityMatrix { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Pure state |i><i|.
    pub fn pure(dim: usize, i: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        m[(i, i)] = Complex64::new(1.0, 0.0);
        DensityMatrix::new(m)
    }

    /// Maximally mixed state I/N.
    pub fn mixed(dim: usize) -> Self {
        DensityMatrix::new(DMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn population(&self, i: usize) -> f64 {
        self.matrix[(i, i)].re
    }

    /// Column-major vectorisation (the project-wide convention).
    pub fn vectorise(&self) -> nalgebra::DVector<Complex64> {
        nalgebra::DVector::from_column_slice(self.matrix.as_slice())
    }

    pub fn from_vector(v: &nalgebra::DVector<Complex64>) -> Self {
        let n = (v.len() as f64).sqrt().round() as usize;
        assert_eq!(n * n, v.len(), "vector length must be a perfect square");
        DensityMatrix::new(DMatrix::from_column_slice(n, n, v.as_slice()))
    }

    /// Hermiticity defect, trace deviation and smallest eigenvalue of the
    /// Hermitian part.
    pub fn diagnostics(&self) -> DensityDiagnostics {
        let adj = self.matrix.adjoint();
        let hermiticity = (&self.matrix - &adj).camax();
        let trace_deviation = (self.trace() - Complex64::new(1.0, 0.0)).norm();
        let herm = (&self.matrix + adj).map(|z| z * 0.5);
        let eig = herm.symmetric_eigenvalues();
        let min_eigenvalue = eig.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        DensityDiagnostics { hermiticity, trace_deviation, min_eigenvalue }
    }

    /// True when Hermitian to 1e-12, unit trace to 1e-10 and positive
    /// semidefinite to -1e-10.
    pub fn validate(&self) -> Result<DensityDiagnostics, DensityDiagnostics> {
        let d = self.diagnostics();
        if d.hermiticity < 1e-12 && d.trace_deviation < 1e-10 && d.min_eigenvalue > -1e-10 {
            Ok(d)
        } else {
            Err(d)
        }
    }

    /// Enforce exact Hermiticity and unit trace (numerical cleanup after a
    /// linear solve; does not mask genuine violations, which `validate`
    /// reports on the raw matrix).
    pub fn symmetrised(&self) -> Self {
        let herm = (&self.matrix + self.matrix.adjoint()).map(|z| z * 0.5);
        let tr = herm.trace();
        DensityMatrix::new(herm.map(|z| z / tr))
    }
}
