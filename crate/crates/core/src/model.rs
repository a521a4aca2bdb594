//! Physical generators: the mean-field decoupled single-site Hamiltonian,
//! the correlated-hopping mean-field terms, the photon-loss Lindbladian and
//! the analytic uniform/crystal thresholds.
//!
//! All couplings are in units of the loss rate κ. Hopping, cross-Kerr and
//! correlated hopping enter the mean-field generator already multiplied by
//! the coordination number `z`; [`ModelParams`] stores `zJ` and `zV`, not
//! bare per-bond values.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{annihilation, creation, FockSpace, Operator};

/// First truncation tried when `n_max` is left automatic.
pub const AUTO_N_MAX_START: usize = 10;

/// Physical couplings of the array, in units of κ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Cavity–drive detuning δ.
    pub delta: f64,
    /// Coherent drive amplitude Ω.
    pub omega: f64,
    /// Coordination-scaled hopping zJ.
    #[serde(rename = "zJ")]
    pub zj: f64,
    /// On-site Kerr U (ignored in hard-core mode).
    #[serde(rename = "U")]
    pub u: f64,
    /// Coordination-scaled cross-Kerr zV.
    #[serde(rename = "zV")]
    pub zv: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    /// Coordination-scaled correlated-hopping amplitude.
    #[serde(default)]
    pub t_ch: f64,
    /// U → ∞: two-level sites, no on-site Kerr term.
    #[serde(default)]
    pub hard_core: bool,
    /// Fock truncation; `None` lets the integrator choose.
    #[serde(default)]
    pub n_max: Option<usize>,
}

fn default_kappa() -> f64 {
    1.0
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            delta: 0.0,
            omega: 0.0,
            zj: 0.0,
            u: 0.0,
            zv: 0.0,
            kappa: 1.0,
            t_ch: 0.0,
            hard_core: false,
            n_max: None,
        }
    }
}

impl ModelParams {
    pub fn hard_core(delta: f64, omega: f64, zj: f64, zv: f64) -> Self {
        Self { delta, omega, zj, zv, hard_core: true, n_max: Some(1), ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.delta, self.omega, self.zj, self.u, self.zv, self.kappa, self.t_ch];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("non-finite coupling".into()));
        }
        if self.kappa <= 0.0 {
            return Err(Error::InvalidParams(format!("kappa must be positive, got {}", self.kappa)));
        }
        match self.n_max {
            Some(0) => return Err(Error::InvalidParams("n_max must be at least 1".into())),
            Some(n) if self.hard_core && n != 1 => {
                return Err(Error::InvalidParams(format!("hard_core requires n_max = 1, got {n}")))
            }
            _ => {}
        }
        Ok(())
    }

    /// Truncation to start from: 1 for hard-core, the explicit value, or
    /// [`AUTO_N_MAX_START`].
    pub fn initial_n_max(&self) -> usize {
        if self.hard_core {
            1
        } else {
            self.n_max.unwrap_or(AUTO_N_MAX_START)
        }
    }

    pub fn is_auto_truncated(&self) -> bool {
        !self.hard_core && self.n_max.is_none()
    }

    pub fn space(&self) -> Result<FockSpace> {
        FockSpace::with_n_max(self.initial_n_max())
    }

    fn check_space(&self, space: FockSpace) -> Result<()> {
        let required = if self.hard_core { Some(1) } else { self.n_max };
        match required {
            Some(n) if space.n_max() != n => {
                Err(Error::DimensionMismatch { expected: n + 1, got: space.dim() })
            }
            _ => Ok(()),
        }
    }
}

/// Single-site moments needed by the correlated-hopping decoupling.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct CorrelatedFields {
    /// ⟨a†a†a⟩
    pub adag_adag_a: C64,
    /// ⟨a⟩
    pub a: C64,
    /// ⟨aa⟩
    pub a_a: C64,
}

/// Expectation values of the opposite sublattice seen by one site.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct MeanFields {
    pub a_other: C64,
    pub n_other: f64,
    pub ch: CorrelatedFields,
}

impl MeanFields {
    pub fn zero() -> Self {
        Self::default()
    }
}

/// Mean-field Hamiltonian for one site of a sublattice:
///
/// `H = −δn + Ω(a† + a) − zJ(⟨a⟩* a + ⟨a⟩ a†) + U n(n−1) + zV⟨n⟩ n + H_ch`
///
/// where the expectation values belong to the opposite sublattice.
pub fn build_mf_hamiltonian(params: &ModelParams, mf: &MeanFields, space: FockSpace) -> Result<Operator> {
    params.validate()?;
    params.check_space(space)?;
    let gen = MeanFieldGenerator::new(params, space);
    let mut h = DMatrix::zeros(space.dim(), space.dim());
    gen.hamiltonian_into(mf, &mut h);
    Operator::from_matrix(space, h)
}

/// Mean-field reduction of the correlated-hopping bond terms
/// `t (a_i a_j†a_j†a_j + a_i†a_i†a_i a_j − ½ a_i†a_i†a_j a_j) + h.c.`:
/// each two-site product is replaced by the local operator times the
/// opposite-sublattice expectation of its partner.
pub fn build_ch_mf(t_ch: f64, mf: &MeanFields, space: FockSpace) -> Operator {
    let ops = LadderOps::new(space);
    let mut h = DMatrix::zeros(space.dim(), space.dim());
    add_ch_terms(&ops, t_ch, &mf.ch, &mut h);
    Operator::from_matrix(space, h).expect("finite by construction")
}

/// ρ̇ = −i[H, ρ] + (κ/2)(2aρa† − nρ − ρn).
pub fn lindblad_rhs(rho: &DMatrix<C64>, h: &Operator, kappa: f64) -> Result<DMatrix<C64>> {
    let d = h.dim();
    if rho.nrows() != d || rho.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: rho.nrows() });
    }
    let mut out = DMatrix::zeros(d, d);
    lindblad_rhs_into(h.matrix(), h.bandwidth(), rho, kappa, &mut out);
    Ok(out)
}

/// Banded evaluation of the single-site Lindbladian.
///
/// `band` must bound |r − c| over the nonzero entries of `h`.
pub(crate) fn lindblad_rhs_into(h: &DMatrix<C64>, band: usize, rho: &DMatrix<C64>, kappa: f64, out: &mut DMatrix<C64>) {
    let d = h.nrows();
    let hs = h.as_slice();
    let rs = rho.as_slice();
    let os = out.as_mut_slice();
    let idx = |r: usize, c: usize| r + c * d;
    let minus_i = C64::new(0.0, -1.0);
    let sqrt: Vec<f64> = (0..=d).map(|n| (n as f64).sqrt()).collect();
    for c in 0..d {
        let kc_lo = c.saturating_sub(band);
        let kc_hi = (c + band).min(d - 1);
        for r in 0..d {
            let mut comm = C64::new(0.0, 0.0);
            let kr_lo = r.saturating_sub(band);
            let kr_hi = (r + band).min(d - 1);
            for k in kr_lo..=kr_hi {
                comm += hs[idx(r, k)] * rs[idx(k, c)];
            }
            for k in kc_lo..=kc_hi {
                comm -= rs[idx(r, k)] * hs[idx(k, c)];
            }
            let mut v = minus_i * comm - rs[idx(r, c)] * (0.5 * kappa * (r + c) as f64);
            if r + 1 < d && c + 1 < d {
                v += rs[idx(r + 1, c + 1)] * (kappa * sqrt[r + 1] * sqrt[c + 1]);
            }
            os[idx(r, c)] = v;
        }
    }
}

/// Which limiting on-site interaction the analytic threshold refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KerrLimit {
    /// U → ∞
    HardCore,
    /// U = 0
    FreeU0,
}

/// Caveat attached to every analytic threshold in output metadata.
pub const ANALYTIC_THRESHOLD_CAVEAT: &str =
    "closed form valid for small detunings; treated as exact only at delta = 0";

/// Analytic uniform→crystal threshold at zero hopping:
/// `zV_c = γ(−2δ + √γ) / (4Ω²)` with `γ = 4δ² + 8Ω² + 1` (hard core)
/// or `γ = 4δ² + 1` (U = 0).
pub fn critical_v_analytic(delta: f64, omega: f64, limit: KerrLimit) -> Result<f64> {
    if omega == 0.0 {
        return Err(Error::ZeroDrive);
    }
    let gamma = match limit {
        KerrLimit::HardCore => 4.0 * delta * delta + 8.0 * omega * omega + 1.0,
        KerrLimit::FreeU0 => 4.0 * delta * delta + 1.0,
    };
    Ok(gamma * (-2.0 * delta + gamma.sqrt()) / (4.0 * omega * omega))
}

/// Precomputed single-site ladder operators.
#[derive(Debug, Clone)]
pub(crate) struct LadderOps {
    pub a: DMatrix<C64>,
    pub adag: DMatrix<C64>,
    /// a†a†a
    pub adag_adag_a: DMatrix<C64>,
    /// a†a†
    pub adag_adag: DMatrix<C64>,
}

impl LadderOps {
    pub fn new(space: FockSpace) -> Self {
        let a = annihilation(space).into_matrix();
        let adag = creation(space).into_matrix();
        let adag_adag = &adag * &adag;
        let adag_adag_a = &adag_adag * &a;
        Self { a, adag, adag_adag_a, adag_adag }
    }
}

fn add_ch_terms(ops: &LadderOps, t_ch: f64, f: &CorrelatedFields, h: &mut DMatrix<C64>) {
    if t_ch == 0.0 {
        return;
    }
    // T = t[a⟨a†a†a⟩ + a†a†a⟨a⟩ − ½ a†a†⟨aa⟩], H_ch = T + T†
    let t = C64::new(t_ch, 0.0);
    let d = h.nrows();
    for c in 0..d {
        for r in 0..d {
            let term = ops.a[(r, c)] * f.adag_adag_a + ops.adag_adag_a[(r, c)] * f.a
                - ops.adag_adag[(r, c)] * f.a_a * 0.5;
            let term_t = ops.a[(c, r)] * f.adag_adag_a + ops.adag_adag_a[(c, r)] * f.a
                - ops.adag_adag[(c, r)] * f.a_a * 0.5;
            h[(r, c)] += t * term + t * term_t.conj();
        }
    }
}

/// Mean-field generator with the mean-field-independent part cached.
#[derive(Debug, Clone)]
pub(crate) struct MeanFieldGenerator {
    pub ops: LadderOps,
    static_h: DMatrix<C64>,
    zj: f64,
    zv: f64,
    t_ch: f64,
    pub kappa: f64,
    pub band: usize,
}

impl MeanFieldGenerator {
    pub fn new(params: &ModelParams, space: FockSpace) -> Self {
        let ops = LadderOps::new(space);
        let d = space.dim();
        let mut static_h = DMatrix::zeros(d, d);
        for k in 0..d {
            let n = k as f64;
            let mut diag = -params.delta * n;
            if !params.hard_core {
                diag += params.u * n * (n - 1.0);
            }
            static_h[(k, k)] = C64::new(diag, 0.0);
        }
        static_h += (&ops.a + &ops.adag) * C64::new(params.omega, 0.0);
        let band = if params.t_ch != 0.0 { 2 } else { 1 };
        Self {
            ops,
            static_h,
            zj: params.zj,
            zv: params.zv,
            t_ch: params.t_ch,
            kappa: params.kappa,
            band,
        }
    }

    pub fn dim(&self) -> usize {
        self.static_h.nrows()
    }

    pub fn hamiltonian_into(&self, mf: &MeanFields, out: &mut DMatrix<C64>) {
        out.copy_from(&self.static_h);
        let d = self.dim();
        let hop = -self.zj * mf.a_other.conj();
        let shift = self.zv * mf.n_other;
        for k in 0..d {
            out[(k, k)] += C64::new(shift * k as f64, 0.0);
            if k + 1 < d {
                let amp = ((k + 1) as f64).sqrt();
                // a at (k, k+1), a† at (k+1, k)
                out[(k, k + 1)] += hop * amp;
                out[(k + 1, k)] += hop.conj() * amp;
            }
        }
        add_ch_terms(&self.ops, self.t_ch, &mf.ch, out);
    }
}
