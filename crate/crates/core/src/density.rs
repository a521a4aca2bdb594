use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{check_same, FockSpace, Operator, StateVector};

/// Density matrix on a truncated Fock space.
///
/// Construction only checks shape; use [`DensityMatrix::physicality`] to
/// measure how far a matrix is from a valid state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: FockSpace,
    elements: DMatrix<C64>,
}

/// Deviations of a matrix from a physical state.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Physicality {
    /// |tr ρ − 1|
    pub trace_deviation: f64,
    /// max |ρ − ρ†| entry
    pub hermiticity: f64,
    /// smallest eigenvalue of the Hermitian part
    pub min_eigenvalue: f64,
}

impl DensityMatrix {
    pub fn from_matrix(space: FockSpace, elements: DMatrix<C64>) -> Result<Self> {
        Operator::from_matrix(space, elements).map(|op| Self { space, elements: op.into_matrix() })
    }

    pub(crate) fn from_matrix_unchecked(space: FockSpace, elements: DMatrix<C64>) -> Self {
        debug_assert_eq!(elements.nrows(), space.dim());
        Self { space, elements }
    }

    pub fn pure(state: &StateVector) -> Self {
        let v = state.amplitudes();
        Self { space: state.space(), elements: v * v.adjoint() }
    }

    /// |n⟩⟨n|
    pub fn fock(space: FockSpace, n: usize) -> Result<Self> {
        StateVector::fock(space, n).map(|s| Self::pure(&s))
    }

    pub fn vacuum(space: FockSpace) -> Self {
        let mut m = DMatrix::zeros(space.dim(), space.dim());
        m[(0, 0)] = C64::new(1.0, 0.0);
        Self { space, elements: m }
    }

    /// Diagonal mixed state with the given populations.
    pub fn diagonal(space: FockSpace, populations: &[f64]) -> Result<Self> {
        if populations.len() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), got: populations.len() });
        }
        let mut m = DMatrix::zeros(space.dim(), space.dim());
        for (n, &p) in populations.iter().enumerate() {
            m[(n, n)] = C64::new(p, 0.0);
        }
        Ok(Self { space, elements: m })
    }

    pub fn maximally_mixed(space: FockSpace) -> Self {
        let p = 1.0 / space.dim() as f64;
        Self { space, elements: DMatrix::identity(space.dim(), space.dim()) * C64::new(p, 0.0) }
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.elements
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.elements
    }

    pub fn trace(&self) -> C64 {
        self.elements.trace()
    }

    pub fn population(&self, n: usize) -> f64 {
        self.elements[(n, n)].re
    }

    pub fn top_population(&self) -> f64 {
        self.population(self.dim() - 1)
    }

    /// tr(X ρ), or an error if the spaces differ.
    pub fn expect(&self, op: &Operator) -> Result<C64> {
        check_same(self.space, op.space())?;
        Ok(trace_of_product(op.matrix(), &self.elements))
    }

    pub fn hermiticity_residual(&self) -> f64 {
        hermiticity_residual(&self.elements)
    }

    /// Smallest eigenvalue of (ρ + ρ†)/2.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = hermitian_part(&self.elements);
        h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn physicality(&self) -> Physicality {
        Physicality {
            trace_deviation: (self.trace() - C64::new(1.0, 0.0)).norm(),
            hermiticity: self.hermiticity_residual(),
            min_eigenvalue: self.min_eigenvalue(),
        }
    }

    /// ½ ‖ρ − σ‖₁ computed from the eigenvalues of the Hermitian difference.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        check_same(self.space, other.space)?;
        Ok(trace_distance(&self.elements, &other.elements))
    }

    /// Replaces ρ by (ρ + ρ†)/2 and rescales to unit trace.
    pub fn hermitize_and_normalize(&mut self) {
        let h = hermitian_part(&self.elements);
        let tr = h.trace().re;
        self.elements = h / C64::new(tr, 0.0);
    }

    pub fn adjoint(&self) -> Self {
        Self { space: self.space, elements: self.elements.adjoint() }
    }
}

pub(crate) fn trace_of_product(a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
    // tr(AB) = Σ_ij A_ij B_ji
    let d = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub(crate) fn hermiticity_residual(m: &DMatrix<C64>) -> f64 {
    let d = m.nrows();
    let mut worst = 0.0f64;
    for r in 0..d {
        for c in r..d {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

pub(crate) fn trace_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let diff = hermitian_part(&(a - b));
    0.5 * diff.symmetric_eigenvalues().iter().map(|e| e.abs()).sum::<f64>()
}
