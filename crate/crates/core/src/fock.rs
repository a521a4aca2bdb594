//! Single-mode operator algebra on a truncated Fock space.
//!
//! The space holds the states |0⟩ … |dim−1⟩. The top level is a hard wall:
//! `a†` maps |dim−1⟩ to zero, so `[a, a†] = 1` only holds on the subspace
//! spanned by |0⟩ … |dim−2⟩.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Truncated bosonic Fock space of dimension `dim` (so `n_max = dim - 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockSpace {
    dim: usize,
}

impl FockSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidSpace(dim));
        }
        Ok(Self { dim })
    }

    pub fn with_n_max(n_max: usize) -> Result<Self> {
        Self::new(n_max + 1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_max(&self) -> usize {
        self.dim - 1
    }
}

/// Dense complex operator acting on a [`FockSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: FockSpace,
    elements: DMatrix<C64>,
}

impl Operator {
    pub fn from_matrix(space: FockSpace, elements: DMatrix<C64>) -> Result<Self> {
        if elements.nrows() != space.dim() || elements.ncols() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: elements.nrows().max(elements.ncols()),
            });
        }
        if elements.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParams("operator has non-finite entries".into()));
        }
        Ok(Self { space, elements })
    }

    pub fn zeros(space: FockSpace) -> Self {
        Self { space, elements: DMatrix::zeros(space.dim(), space.dim()) }
    }

    pub fn identity(space: FockSpace) -> Self {
        Self { space, elements: DMatrix::identity(space.dim(), space.dim()) }
    }

    /// Diagonal operator with the given real entries.
    pub fn diagonal(space: FockSpace, diag: impl Fn(usize) -> f64) -> Self {
        let d = space.dim();
        Self {
            space,
            elements: DMatrix::from_fn(d, d, |r, c| if r == c { C64::new(diag(r), 0.0) } else { C64::new(0.0, 0.0) }),
        }
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

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.elements[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self { space: self.space, elements: self.elements.adjoint() }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { space: self.space, elements: &self.elements * factor }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.elements.trace()
    }

    /// Largest |X − X†| entry.
    pub fn hermiticity_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in r..d {
                let diff = self.elements[(r, c)] - self.elements[(c, r)].conj();
                worst = worst.max(diff.norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    /// Largest |r − c| over nonzero entries.
    pub fn bandwidth(&self) -> usize {
        let d = self.dim();
        let mut band = 0;
        for c in 0..d {
            for r in 0..d {
                let z = self.elements[(r, c)];
                if z.re != 0.0 || z.im != 0.0 {
                    band = band.max(r.abs_diff(c));
                }
            }
        }
        band
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        check_same(self.space, state.space)?;
        Ok(StateVector { space: self.space, amplitudes: &self.elements * &state.amplitudes })
    }

    /// ⟨ψ|X|ψ⟩.
    pub fn expect_pure(&self, state: &StateVector) -> Result<C64> {
        check_same(self.space, state.space)?;
        Ok(state.amplitudes.dotc(&(&self.elements * &state.amplitudes)))
    }
}

pub(crate) fn check_same(a: FockSpace, b: FockSpace) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    Ok(())
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Operator> for &Operator {
            type Output = Operator;

            /// Panics if the operands live on different spaces.
            fn $method(self, rhs: &Operator) -> Operator {
                assert_eq!(self.space, rhs.space, "operator space mismatch");
                Operator { space: self.space, elements: &self.elements $op &rhs.elements }
            }
        }

        impl $trait<Operator> for Operator {
            type Output = Operator;

            fn $method(self, rhs: Operator) -> Operator {
                (&self).$method(&rhs)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Neg for &Operator {
    type Output = Operator;

    fn neg(self) -> Operator {
        Operator { space: self.space, elements: -&self.elements }
    }
}

/// Lowering operator: ⟨n|a|n+1⟩ = √(n+1).
pub fn annihilation(space: FockSpace) -> Operator {
    let d = space.dim();
    let elements = DMatrix::from_fn(d, d, |r, c| {
        if c == r + 1 {
            C64::new((c as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Operator { space, elements }
}

pub fn creation(space: FockSpace) -> Operator {
    annihilation(space).adjoint()
}

/// diag(0, 1, …, dim−1).
pub fn number(space: FockSpace) -> Operator {
    Operator::diagonal(space, |n| n as f64)
}

/// Normalized state vector on a [`FockSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: FockSpace,
    amplitudes: DVector<C64>,
}

impl StateVector {
    /// Builds a state from raw amplitudes, renormalizing to unit norm.
    pub fn from_amplitudes(space: FockSpace, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), got: amplitudes.len() });
        }
        let norm = amplitudes.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidParams("state vector has zero or non-finite norm".into()));
        }
        Ok(Self { space, amplitudes: amplitudes / C64::new(norm, 0.0) })
    }

    pub fn fock(space: FockSpace, n: usize) -> Result<Self> {
        if n >= space.dim() {
            return Err(Error::OccupationOutOfRange { occupation: n as f64, n_max: space.n_max() });
        }
        let mut amps = DVector::zeros(space.dim());
        amps[n] = C64::new(1.0, 0.0);
        Ok(Self { space, amplitudes: amps })
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }
}

/// Coherent state |α⟩ truncated to the space and renormalized.
///
/// Fails when |α|² > (dim − 1)/2, where the truncated tail stops being
/// negligible.
pub fn coherent_state(alpha: C64, space: FockSpace) -> Result<StateVector> {
    let limit = 0.5 * space.n_max() as f64;
    let norm_sqr = alpha.norm_sqr();
    if norm_sqr > limit {
        return Err(Error::TruncationRisk { norm_sqr, limit, dim: space.dim() });
    }
    let mut amps = DVector::zeros(space.dim());
    // α^n / √(n!) built incrementally
    let mut term = C64::new(1.0, 0.0);
    for n in 0..space.dim() {
        if n > 0 {
            term = term * alpha / (n as f64).sqrt();
        }
        amps[n] = term;
    }
    StateVector::from_amplitudes(space, amps)
}
