//! Two-sublattice mean-field dynamics.
//!
//! On a bipartite lattice the decoupled master equation reduces to one
//! single-site equation per sublattice, each driven by the mean fields of
//! the other. [`evolve`] integrates the pair, [`classify`] labels the
//! asymptotic regime.
//!
//! The scheme is deterministic: a symmetric seed (ρ_A = ρ_B) stays
//! symmetric forever, so a crystal can only appear from an asymmetric
//! seed such as [`SeedKind::default_sweep`].

mod classify;
mod integrate;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::density::{DensityMatrix, Physicality};
use crate::error::{Error, Result};
use crate::fock::{coherent_state, number, FockSpace};

pub use classify::{classify, ClassifierControls, PhaseKind, PhaseLabel};
pub use integrate::{evolve, evolve_seeded, IntegratorControls, MAX_AUTO_N_MAX};

/// Pair of sublattice density matrices at time `t` (units of 1/κ).
#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldState {
    pub rho_a: DensityMatrix,
    pub rho_b: DensityMatrix,
    pub t: f64,
}

impl MeanFieldState {
    pub fn new(rho_a: DensityMatrix, rho_b: DensityMatrix) -> Result<Self> {
        if rho_a.space() != rho_b.space() {
            return Err(Error::DimensionMismatch { expected: rho_a.dim(), got: rho_b.dim() });
        }
        Ok(Self { rho_a, rho_b, t: 0.0 })
    }

    pub fn space(&self) -> FockSpace {
        self.rho_a.space()
    }

    /// Exchanges the sublattice labels.
    pub fn swapped(&self) -> Self {
        Self { rho_a: self.rho_b.clone(), rho_b: self.rho_a.clone(), t: self.t }
    }

    /// Worst-case physicality over both sublattices.
    pub fn physicality(&self) -> Physicality {
        let a = self.rho_a.physicality();
        let b = self.rho_b.physicality();
        Physicality {
            trace_deviation: a.trace_deviation.max(b.trace_deviation),
            hermiticity: a.hermiticity.max(b.hermiticity),
            min_eigenvalue: a.min_eigenvalue.min(b.min_eigenvalue),
        }
    }
}

/// Δn = |⟨n_A⟩ − ⟨n_B⟩|.
pub fn order_parameter(state: &MeanFieldState) -> f64 {
    let n = number(state.space());
    let na = state.rho_a.expect(&n).expect("same space").re;
    let nb = state.rho_b.expect(&n).expect("same space").re;
    (na - nb).abs()
}

/// Initial condition for a mean-field run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SeedKind {
    /// ρ_A = ρ_B = |0⟩⟨0|
    SymmetricVacuum,
    /// Coherent states |α_A⟩, |α_B⟩ (JSON amplitudes as `[re, im]`).
    AsymmetricCoherent { alpha_a: C64, alpha_b: C64 },
    /// Diagonal states with mean occupations `n_a`, `n_b`, mixing the two
    /// nearest Fock levels linearly.
    FockOccupation { n_a: f64, n_b: f64 },
}

impl SeedKind {
    /// Seed used by sweeps unless overridden: |0.1⟩ on A, vacuum on B.
    pub fn default_sweep() -> Self {
        SeedKind::AsymmetricCoherent { alpha_a: C64::new(0.1, 0.0), alpha_b: C64::new(0.0, 0.0) }
    }
}

impl Default for SeedKind {
    fn default() -> Self {
        Self::default_sweep()
    }
}

/// Builds the product initial state described by `kind`.
pub fn seed_state(kind: &SeedKind, space: FockSpace) -> Result<MeanFieldState> {
    let (rho_a, rho_b) = match *kind {
        SeedKind::SymmetricVacuum => (DensityMatrix::vacuum(space), DensityMatrix::vacuum(space)),
        SeedKind::AsymmetricCoherent { alpha_a, alpha_b } => (
            DensityMatrix::pure(&coherent_state(alpha_a, space)?),
            DensityMatrix::pure(&coherent_state(alpha_b, space)?),
        ),
        SeedKind::FockOccupation { n_a, n_b } => (occupation_state(n_a, space)?, occupation_state(n_b, space)?),
    };
    MeanFieldState::new(rho_a, rho_b)
}

fn occupation_state(n: f64, space: FockSpace) -> Result<DensityMatrix> {
    let n_max = space.n_max();
    if !(n.is_finite() && n >= 0.0 && n <= n_max as f64) {
        return Err(Error::OccupationOutOfRange { occupation: n, n_max });
    }
    let lower = (n.floor() as usize).min(n_max);
    let frac = n - lower as f64;
    let mut pops = vec![0.0; space.dim()];
    pops[lower] = 1.0 - frac;
    if frac > 0.0 {
        pops[lower + 1] = frac;
    }
    DensityMatrix::diagonal(space, &pops)
}

/// One recorded point of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    /// ⟨a⟩ on sublattice A
    pub alpha_a: C64,
    /// ⟨a⟩ on sublattice B
    pub alpha_b: C64,
    pub n_a: f64,
    pub n_b: f64,
    /// d⟨a_A⟩/dt from the generator
    pub dalpha_a: C64,
    /// d⟨a_B⟩/dt from the generator
    pub dalpha_b: C64,
    /// max(‖ρ̇_A‖_F, ‖ρ̇_B‖_F)
    pub residual: f64,
    /// worst |tr ρ − 1| over both sublattices
    pub trace_deviation: f64,
    /// worst max|ρ − ρ†| over both sublattices
    pub hermiticity: f64,
    /// smallest eigenvalue over both sublattices, where it was computed
    pub min_eigenvalue: Option<f64>,
}

impl Sample {
    pub fn delta_n(&self) -> f64 {
        (self.n_a - self.n_b).abs()
    }
}

/// Sampled mean-field trajectory plus its final state.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub final_state: MeanFieldState,
    /// Largest top-level Fock population seen on either sublattice.
    pub max_top_population: f64,
}

impl Trajectory {
    pub fn n_max(&self) -> usize {
        self.final_state.space().n_max()
    }

    pub fn t_start(&self) -> f64 {
        self.samples.first().map_or(0.0, |s| s.t)
    }

    pub fn t_end(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    /// CSV with one row per sample.
    pub fn write_csv(&self, writer: impl std::io::Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "t", "re_a_A", "im_a_A", "re_a_B", "im_a_B", "n_A", "n_B", "residual",
        ])?;
        for s in &self.samples {
            w.write_record([
                s.t.to_string(),
                s.alpha_a.re.to_string(),
                s.alpha_a.im.to_string(),
                s.alpha_b.re.to_string(),
                s.alpha_b.im.to_string(),
                s.n_a.to_string(),
                s.n_b.to_string(),
                s.residual.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}
