//! Exact steady states of small chains.
//!
//! The full many-body master equation is solved on the tensor-product
//! space of a few sites, which validates the mean-field engine and gives
//! density-density correlations g²(i, j). Couplings here are bare per-bond
//! values ([`LatticeParams`]); convert mean-field parameters with
//! [`LatticeParams::from_mean_field`].
//!
//! Basis index of an occupation pattern (n_0, …, n_{N−1}) is
//! Σ n_k (n_max + 1)^(N−1−k), so site 0 is the most significant digit.

mod liouvillian;
mod solve;

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::density::{self, DensityMatrix, Physicality};
use crate::error::{Error, Result};
use crate::fock::FockSpace;
use crate::model::ModelParams;

pub use liouvillian::{build_lattice_hamiltonian, LatticeHamiltonian};
pub use solve::{steady_state, steady_state_with, SolverOptions, SteadyStateMethod};

pub const DEFAULT_DIM_CAP: usize = 4096;
/// Largest Hilbert-space dimension accepted by [`SteadyStateMethod::NullSpace`].
pub const NULL_SPACE_DIM_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    OpenChain,
    PeriodicChain,
}

impl Geometry {
    /// Bulk coordination number.
    pub fn coordination(self) -> f64 {
        2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub n_sites: usize,
    pub geometry: Geometry,
    pub n_max: usize,
    #[serde(default = "default_cap")]
    pub dim_cap: usize,
}

fn default_cap() -> usize {
    DEFAULT_DIM_CAP
}

impl LatticeSpec {
    pub fn new(n_sites: usize, geometry: Geometry, n_max: usize) -> Self {
        Self { n_sites, geometry, n_max, dim_cap: DEFAULT_DIM_CAP }
    }

    /// (n_max + 1)^n_sites, saturating on overflow.
    pub fn dim(&self) -> usize {
        (self.n_max + 1).checked_pow(self.n_sites as u32).unwrap_or(usize::MAX)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites == 0 || self.n_max == 0 {
            return Err(Error::InvalidParams("lattice needs at least one site and n_max >= 1".into()));
        }
        if self.geometry == Geometry::PeriodicChain && self.n_sites < 3 {
            return Err(Error::InvalidParams("periodic chain needs at least 3 sites".into()));
        }
        if self.dim() > self.dim_cap {
            return Err(Error::DimensionCap { dim: self.dim(), cap: self.dim_cap });
        }
        Ok(())
    }

    /// Nearest-neighbour bonds (i, j), i < j, each listed once.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let mut b: Vec<_> = (0..self.n_sites.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        if self.geometry == Geometry::PeriodicChain {
            b.push((0, self.n_sites - 1));
        }
        b
    }

    pub fn distance(&self, i: usize, j: usize) -> usize {
        let r = i.abs_diff(j);
        match self.geometry {
            Geometry::OpenChain => r,
            Geometry::PeriodicChain => r.min(self.n_sites - r),
        }
    }

    pub fn center(&self) -> usize {
        self.n_sites / 2
    }

    pub fn local_space(&self) -> FockSpace {
        FockSpace::with_n_max(self.n_max).expect("n_max >= 1")
    }
}

/// Bare per-bond couplings of the lattice Hamiltonian, in units of κ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeParams {
    pub delta: f64,
    pub omega: f64,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "U")]
    pub u: f64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(default = "one")]
    pub kappa: f64,
    #[serde(default)]
    pub t_ch: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for LatticeParams {
    fn default() -> Self {
        Self { delta: 0.0, omega: 0.0, j: 0.0, u: 0.0, v: 0.0, kappa: 1.0, t_ch: 0.0 }
    }
}

impl LatticeParams {
    /// Divides zJ, zV and t_ch by the coordination number `z`. Hard-core
    /// parameters map to U = 0, which is exact only with n_max = 1.
    pub fn from_mean_field(params: &ModelParams, z: f64) -> Result<Self> {
        params.validate()?;
        if z.is_nan() || z <= 0.0 {
            return Err(Error::InvalidParams(format!("coordination number must be positive, got {z}")));
        }
        Ok(Self {
            delta: params.delta,
            omega: params.omega,
            j: params.zj / z,
            u: if params.hard_core { 0.0 } else { params.u },
            v: params.zv / z,
            kappa: params.kappa,
            t_ch: params.t_ch / z,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.delta, self.omega, self.j, self.u, self.v, self.kappa, self.t_ch];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("non-finite coupling".into()));
        }
        if self.kappa <= 0.0 {
            return Err(Error::InvalidParams(format!("kappa must be positive, got {}", self.kappa)));
        }
        Ok(())
    }
}

/// Steady state of the full lattice.
#[derive(Debug, Clone)]
pub struct LatticeState {
    spec: LatticeSpec,
    rho: DMatrix<C64>,
    residual: f64,
}

/// One row of a g² table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct G2Entry {
    pub i: usize,
    pub j: usize,
    pub r: usize,
    pub g2: f64,
}

impl LatticeState {
    /// Wraps a many-body density matrix; only the shape is checked.
    pub fn from_matrix(spec: LatticeSpec, rho: DMatrix<C64>) -> Result<Self> {
        spec.validate()?;
        if rho.nrows() != spec.dim() || rho.ncols() != spec.dim() {
            return Err(Error::DimensionMismatch { expected: spec.dim(), got: rho.nrows() });
        }
        Ok(Self { spec, rho, residual: f64::NAN })
    }

    /// Product state ρ_0 ⊗ ρ_1 ⊗ … of single-site states.
    pub fn product(spec: LatticeSpec, sites: &[DensityMatrix]) -> Result<Self> {
        if sites.len() != spec.n_sites {
            return Err(Error::DimensionMismatch { expected: spec.n_sites, got: sites.len() });
        }
        let mut rho = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        for s in sites {
            if s.dim() != spec.n_max + 1 {
                return Err(Error::DimensionMismatch { expected: spec.n_max + 1, got: s.dim() });
            }
            rho = rho.kronecker(s.matrix());
        }
        Self::from_matrix(spec, rho)
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.rho
    }

    /// ‖L ρ‖_F at the returned state (NaN for states built by hand).
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Eigen-decomposes the full matrix; expensive for large lattices.
    pub fn physicality(&self) -> Physicality {
        let h = density::hermitian_part(&self.rho);
        Physicality {
            trace_deviation: (self.rho.trace() - C64::new(1.0, 0.0)).norm(),
            hermiticity: density::hermiticity_residual(&self.rho),
            min_eigenvalue: h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min),
        }
    }

    pub fn trace_distance(&self, other: &LatticeState) -> Result<f64> {
        if self.spec.dim() != other.spec.dim() {
            return Err(Error::DimensionMismatch { expected: self.spec.dim(), got: other.spec.dim() });
        }
        Ok(density::trace_distance(&self.rho, &other.rho))
    }

    /// Sum of diagonal probabilities weighted by `f(occupations)`.
    fn diagonal_average(&self, f: impl Fn(&[usize]) -> f64) -> f64 {
        let mut occ = vec![0; self.spec.n_sites];
        (0..self.spec.dim())
            .map(|r| {
                liouvillian::digits(&self.spec, r, &mut occ);
                self.rho[(r, r)].re * f(&occ)
            })
            .sum()
    }

    pub fn occupation(&self, site: usize) -> f64 {
        self.diagonal_average(|o| o[site] as f64)
    }

    pub fn occupations(&self) -> Vec<f64> {
        (0..self.spec.n_sites).map(|k| self.occupation(k)).collect()
    }

    /// ⟨a_i† a_j† a_j a_i⟩ / (⟨n_i⟩⟨n_j⟩); for i = j the on-site value.
    pub fn g2(&self, i: usize, j: usize) -> Result<f64> {
        let (ni, nj) = (self.occupation(i), self.occupation(j));
        if ni <= 1e-12 || nj <= 1e-12 {
            return Err(Error::UndefinedCorrelator { i, j });
        }
        let num = if i == j {
            self.diagonal_average(|o| (o[i] * o[i].saturating_sub(1)) as f64)
        } else {
            self.diagonal_average(|o| (o[i] * o[j]) as f64)
        };
        Ok(num / (ni * nj))
    }

    /// g²(reference, j) for every site j.
    pub fn g2_row(&self, reference: usize) -> Result<Vec<G2Entry>> {
        (0..self.spec.n_sites)
            .map(|j| {
                Ok(G2Entry { i: reference, j, r: self.spec.distance(reference, j), g2: self.g2(reference, j)? })
            })
            .collect()
    }

    /// g² averaged over all site pairs at each distance r ≥ 1.
    pub fn g2_by_distance(&self) -> Result<Vec<(usize, f64)>> {
        let n = self.spec.n_sites;
        let max_r = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| self.spec.distance(i, j)).max().unwrap_or(0);
        let mut sums = vec![(0.0, 0usize); max_r + 1];
        for i in 0..n {
            for j in i + 1..n {
                let r = self.spec.distance(i, j);
                sums[r].0 += self.g2(i, j)?;
                sums[r].1 += 1;
            }
        }
        Ok(sums.iter().enumerate().skip(1).filter(|(_, s)| s.1 > 0).map(|(r, s)| (r, s.0 / s.1 as f64)).collect())
    }

    /// Partial trace over every site but `site`.
    pub fn reduced_density(&self, site: usize) -> Result<DensityMatrix> {
        if site >= self.spec.n_sites {
            return Err(Error::InvalidParams(format!("site {site} outside chain of {}", self.spec.n_sites)));
        }
        let d = self.spec.n_max + 1;
        let s = liouvillian::stride(&self.spec, site);
        let mut out = DMatrix::zeros(d, d);
        let mut occ = vec![0; self.spec.n_sites];
        for r in 0..self.spec.dim() {
            liouvillian::digits(&self.spec, r, &mut occ);
            let a = occ[site];
            let base = r - a * s;
            for b in 0..d {
                out[(a, b)] += self.rho[(r, base + b * s)];
            }
        }
        DensityMatrix::from_matrix(self.spec.local_space(), out)
    }
}

/// Largest distance r with |g²(r) − 1| > `threshold`, or 0.
pub fn correlation_range(by_distance: &[(usize, f64)], threshold: f64) -> usize {
    by_distance.iter().filter(|(_, g)| (g - 1.0).abs() > threshold).map(|(r, _)| *r).max().unwrap_or(0)
}

/// CSV with header `i,j,r,g2`.
pub fn write_g2_csv(entries: &[G2Entry], writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["i", "j", "r", "g2"])?;
    for e in entries {
        w.write_record([e.i.to_string(), e.j.to_string(), e.r.to_string(), e.g2.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::coherent_state;

    fn chain(n: usize, n_max: usize) -> LatticeSpec {
        LatticeSpec::new(n, Geometry::OpenChain, n_max)
    }

    #[test]
    fn dimension_cap_is_enforced() {
        let spec = LatticeSpec { dim_cap: 100, ..chain(5, 3) };
        assert!(matches!(spec.validate(), Err(Error::DimensionCap { dim: 1024, cap: 100 })));
        assert!(chain(7, 3).validate().is_err());
        assert!(chain(6, 3).validate().is_ok());
    }

    #[test]
    fn bonds_and_distances() {
        assert_eq!(chain(4, 1).bonds(), vec![(0, 1), (1, 2), (2, 3)]);
        let ring = LatticeSpec::new(5, Geometry::PeriodicChain, 1);
        assert_eq!(ring.bonds().len(), 5);
        assert_eq!(ring.distance(0, 4), 1);
        assert_eq!(chain(5, 1).distance(0, 4), 4);
        assert_eq!(chain(5, 1).center(), 2);
    }

    #[test]
    fn mean_field_conversion_divides_by_z() {
        let p = ModelParams { zj: 0.6, zv: 1.2, t_ch: -0.4, u: 0.5, ..ModelParams::default() };
        let l = LatticeParams::from_mean_field(&p, 2.0).unwrap();
        assert_eq!((l.j, l.v, l.t_ch, l.u), (0.3, 0.6, -0.2, 0.5));
        assert!(LatticeParams::from_mean_field(&p, 0.0).is_err());
    }

    #[test]
    fn product_of_coherent_states_is_uncorrelated() {
        let spec = chain(2, 12);
        let s = spec.local_space();
        let a = DensityMatrix::pure(&coherent_state(C64::new(0.4, 0.2), s).unwrap());
        let b = DensityMatrix::pure(&coherent_state(C64::new(-0.3, 0.5), s).unwrap());
        let state = LatticeState::product(spec, &[a.clone(), b.clone()]).unwrap();
        assert!((state.g2(0, 1).unwrap() - 1.0).abs() < 1e-10);
        assert!((state.g2(0, 0).unwrap() - 1.0).abs() < 1e-6);
        assert!(state.reduced_density(0).unwrap().trace_distance(&a).unwrap() < 1e-12);
        assert!(state.reduced_density(1).unwrap().trace_distance(&b).unwrap() < 1e-12);
    }

    #[test]
    fn single_photon_is_antibunched() {
        let spec = chain(2, 2);
        let s = spec.local_space();
        let state = LatticeState::product(spec, &[DensityMatrix::fock(s, 1).unwrap(), DensityMatrix::vacuum(s)]).unwrap();
        assert_eq!(state.g2(0, 0).unwrap(), 0.0);
        assert!(matches!(state.g2(0, 1), Err(Error::UndefinedCorrelator { .. })));
    }

    #[test]
    fn partial_traces_of_simple_states() {
        let spec = chain(2, 1);
        let mixed = LatticeState::from_matrix(spec.clone(), DMatrix::identity(4, 4) * C64::new(0.25, 0.0)).unwrap();
        let expected = DensityMatrix::maximally_mixed(spec.local_space());
        assert!(mixed.reduced_density(1).unwrap().trace_distance(&expected).unwrap() < 1e-15);
        // (|01⟩ + |10⟩)/√2
        let mut bell = DMatrix::zeros(4, 4);
        for (r, c) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            bell[(r, c)] = C64::new(0.5, 0.0);
        }
        let bell = LatticeState::from_matrix(spec, bell).unwrap();
        for site in 0..2 {
            assert!(bell.reduced_density(site).unwrap().trace_distance(&expected).unwrap() < 1e-15);
        }
    }

    #[test]
    fn undriven_lattice_relaxes_to_vacuum() {
        let spec = chain(2, 2);
        let p = LatticeParams { j: 0.5, u: 1.0, v: 0.7, ..LatticeParams::default() };
        for method in [SteadyStateMethod::NullSpace, SteadyStateMethod::Iterative] {
            let s = steady_state(&spec, &p, method).unwrap();
            assert!((s.matrix()[(0, 0)].re - 1.0).abs() < 1e-10, "{method:?}");
        }
    }

    #[test]
    fn linear_cavity_steady_state_is_coherent() {
        let spec = chain(1, 20);
        let p = LatticeParams { delta: 0.5, omega: 0.6, ..LatticeParams::default() };
        let alpha = C64::new(0.6, 0.0) / C64::new(0.5, 0.5);
        let expected = DensityMatrix::pure(&coherent_state(alpha, spec.local_space()).unwrap());
        for method in [SteadyStateMethod::NullSpace, SteadyStateMethod::LongTime, SteadyStateMethod::Iterative] {
            let s = steady_state(&spec, &p, method).unwrap();
            let d = s.reduced_density(0).unwrap().trace_distance(&expected).unwrap();
            assert!(d < 1e-7, "{method:?}: {d}");
        }
    }

    #[test]
    fn methods_agree_on_interacting_chain() {
        let spec = chain(3, 2);
        let p = LatticeParams { delta: 0.2, omega: 0.5, j: 0.3, u: 0.8, v: 0.6, kappa: 1.0, t_ch: -0.2 };
        let a = steady_state(&spec, &p, SteadyStateMethod::NullSpace).unwrap();
        let b = steady_state(&spec, &p, SteadyStateMethod::LongTime).unwrap();
        let c = steady_state(&spec, &p, SteadyStateMethod::Iterative).unwrap();
        assert!(a.trace_distance(&b).unwrap() < 1e-6);
        assert!(a.trace_distance(&c).unwrap() < 1e-6);
        let phys = c.physicality();
        assert!(phys.trace_deviation < 1e-8 && phys.hermiticity < 1e-12 && phys.min_eigenvalue > -1e-8);
    }

    #[test]
    fn decoupled_sites_give_product_state() {
        let spec = chain(2, 3);
        let p = LatticeParams { delta: -0.4, omega: 0.5, u: 0.5, ..LatticeParams::default() };
        let full = steady_state(&spec, &p, SteadyStateMethod::NullSpace).unwrap();
        let single = steady_state(&chain(1, 3), &p, SteadyStateMethod::NullSpace).unwrap();
        let site = single.reduced_density(0).unwrap();
        let product = LatticeState::product(spec, &[site.clone(), site]).unwrap();
        assert!(full.trace_distance(&product).unwrap() < 1e-8);
    }

    #[test]
    fn null_space_refuses_large_lattices() {
        let spec = chain(4, 2);
        let r = steady_state(&spec, &LatticeParams::default(), SteadyStateMethod::NullSpace);
        assert!(matches!(r, Err(Error::DimensionCap { dim: 81, cap: 64 })));
    }

    #[test]
    fn periodic_chain_is_translation_invariant() {
        let spec = LatticeSpec::new(4, Geometry::PeriodicChain, 2);
        let p = LatticeParams { omega: 0.5, j: 0.4, u: 0.5, v: 0.8, ..LatticeParams::default() };
        let s = steady_state(&spec, &p, SteadyStateMethod::Iterative).unwrap();
        let n = s.occupations();
        assert!(n.iter().all(|x| (x - n[0]).abs() < 1e-8), "{n:?}");
    }

    #[test]
    fn g2_csv_layout() {
        let rows = [G2Entry { i: 2, j: 0, r: 2, g2: 1.5 }];
        let mut buf = Vec::new();
        write_g2_csv(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "i,j,r,g2\n2,0,2,1.5\n");
    }

    #[test]
    fn correlation_range_picks_last_deviation() {
        assert_eq!(correlation_range(&[(1, 1.2), (2, 0.995), (3, 1.02), (4, 1.001)], 0.01), 3);
        assert_eq!(correlation_range(&[(1, 1.0)], 0.01), 0);
    }
}
