use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{seed_state, MeanFieldState, Sample, SeedKind, Trajectory};
use crate::density::{hermitian_part, hermiticity_residual, DensityMatrix};
use crate::error::{Error, Result};
use crate::fock::FockSpace;
use crate::model::{lindblad_rhs_into, MeanFieldGenerator, ModelParams};
use crate::observables::moments;

/// Largest truncation the automatic `n_max` search will try.
pub const MAX_AUTO_N_MAX: usize = 40;

/// Fixed-step RK4 settings and the per-sample physicality tolerances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorControls {
    /// Nominal step (1/κ).
    pub dt: f64,
    /// Spacing of recorded samples; rounded to a whole number of steps.
    pub sample_interval: f64,
    /// Eigenvalue positivity is checked every this many samples (and at the
    /// last one); a failing segment is redone with halved steps.
    pub positivity_every: usize,
    pub max_halvings: u32,
    pub trace_tol: f64,
    pub hermiticity_tol: f64,
    pub positivity_tol: f64,
    /// Top Fock level population allowed when `n_max` is automatic.
    pub truncation_tol: f64,
}

impl Default for IntegratorControls {
    fn default() -> Self {
        Self {
            dt: 1e-2,
            sample_interval: 5e-2,
            positivity_every: 20,
            max_halvings: 4,
            trace_tol: 1e-8,
            hermiticity_tol: 1e-10,
            positivity_tol: 1e-8,
            truncation_tol: 1e-6,
        }
    }
}

impl IntegratorControls {
    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.sample_interval > 0.0 && self.dt.is_finite() && self.sample_interval.is_finite()) {
            return Err(Error::InvalidParams("dt and sample_interval must be positive".into()));
        }
        if self.positivity_every == 0 {
            return Err(Error::InvalidParams("positivity_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// Integrates the coupled sublattice equations for a time span `t_final`
/// starting at `initial.t`.
///
/// At every RK4 stage the generator of A is built from the moments of the
/// current ρ_B and vice versa. With automatic truncation
/// (`params.n_max == None`) the run aborts with
/// [`Error::TruncationExceeded`] as soon as the top Fock level gets
/// populated beyond `controls.truncation_tol`.
pub fn evolve(
    initial: &MeanFieldState,
    params: &ModelParams,
    t_final: f64,
    controls: &IntegratorControls,
) -> Result<Trajectory> {
    params.validate()?;
    controls.validate()?;
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidParams(format!("t_final must be positive, got {t_final}")));
    }
    let space = initial.space();
    let required = if params.hard_core { Some(1) } else { params.n_max };
    if let Some(n) = required {
        if space.n_max() != n {
            return Err(Error::DimensionMismatch { expected: n + 1, got: space.dim() });
        }
    }
    let abort_on_truncation = params.is_auto_truncated();
    let check_truncation = !params.hard_core;

    let mut stepper = Stepper::new(params, space);
    let mut ra = initial.rho_a.matrix().clone();
    let mut rb = initial.rho_b.matrix().clone();

    let h = controls.sample_interval;
    let base_steps = ((h / controls.dt).round() as usize).max(1);
    let n_samples = ((t_final / h) - 1e-9).ceil().max(1.0) as usize;
    let t0 = initial.t;

    let mut samples = Vec::with_capacity(n_samples + 1);
    let (first, top) = stepper.sample(t0, &ra, &rb, true);
    samples.push(first);
    let mut max_top = if check_truncation { top } else { 0.0 };

    let mut done = 0;
    while done < n_samples {
        let seg_len = controls.positivity_every.min(n_samples - done);
        let checkpoint = (ra.clone(), rb.clone());
        let mut halvings = 0u32;
        loop {
            let substeps = base_steps << halvings;
            let dt = h / substeps as f64;
            let mut seg = Vec::with_capacity(seg_len);
            let mut failure = None;
            for j in 0..seg_len {
                for _ in 0..substeps {
                    stepper.step(&mut ra, &mut rb, dt);
                }
                let idx = done + j + 1;
                let t = t0 + idx as f64 * h;
                let last = j + 1 == seg_len;
                let (s, top) = stepper.sample(t, &ra, &rb, last);
                if let Some(f) = violation(&s, controls) {
                    failure = Some((t, f));
                    break;
                }
                if check_truncation {
                    max_top = max_top.max(top);
                    if abort_on_truncation && top > controls.truncation_tol {
                        return Err(Error::TruncationExceeded { population: top, n_max: space.n_max() });
                    }
                }
                seg.push(s);
            }
            match failure {
                None => {
                    samples.extend(seg);
                    break;
                }
                Some((t, failure)) => {
                    if halvings >= controls.max_halvings {
                        return Err(match failure {
                            Violation::Positivity(msg) => Error::IntegrationFailure { t, diagnostic: msg },
                            Violation::Blowup(msg) => Error::Stiffness { t, dt, diagnostic: msg },
                        });
                    }
                    halvings += 1;
                    ra.copy_from(&checkpoint.0);
                    rb.copy_from(&checkpoint.1);
                }
            }
        }
        done += seg_len;
    }

    let t_end = t0 + n_samples as f64 * h;
    let final_state = MeanFieldState {
        rho_a: DensityMatrix::from_matrix_unchecked(space, ra),
        rho_b: DensityMatrix::from_matrix_unchecked(space, rb),
        t: t_end,
    };
    Ok(Trajectory { samples, final_state, max_top_population: max_top })
}

/// Seeds and evolves, growing the truncation by 5 from
/// [`crate::model::AUTO_N_MAX_START`] while the top level stays populated
/// (only when `params.n_max` is automatic).
pub fn evolve_seeded(
    seed: &SeedKind,
    params: &ModelParams,
    t_final: f64,
    controls: &IntegratorControls,
) -> Result<Trajectory> {
    let mut n_max = params.initial_n_max();
    loop {
        let initial = seed_state(seed, FockSpace::with_n_max(n_max)?)?;
        match evolve(&initial, params, t_final, controls) {
            Err(Error::TruncationExceeded { .. }) if params.is_auto_truncated() && n_max + 5 <= MAX_AUTO_N_MAX => {
                n_max += 5;
            }
            other => return other,
        }
    }
}

enum Violation {
    Positivity(String),
    Blowup(String),
}

fn violation(s: &Sample, c: &IntegratorControls) -> Option<Violation> {
    let finite = s.residual.is_finite() && s.n_a.is_finite() && s.n_b.is_finite();
    if !finite {
        return Some(Violation::Blowup("non-finite state".into()));
    }
    if s.trace_deviation > c.trace_tol {
        return Some(Violation::Blowup(format!("trace deviation {:.3e}", s.trace_deviation)));
    }
    if s.hermiticity > c.hermiticity_tol {
        return Some(Violation::Blowup(format!("hermiticity residual {:.3e}", s.hermiticity)));
    }
    match s.min_eigenvalue {
        Some(e) if !e.is_finite() => Some(Violation::Blowup("non-finite eigenvalue".into())),
        Some(e) if e < -c.positivity_tol => Some(Violation::Positivity(format!("min eigenvalue {e:.3e}"))),
        _ => None,
    }
}

/// RK4 buffers for the coupled pair.
struct Stepper {
    gen: MeanFieldGenerator,
    h_a: DMatrix<C64>,
    h_b: DMatrix<C64>,
    k: [(DMatrix<C64>, DMatrix<C64>); 4],
    y: (DMatrix<C64>, DMatrix<C64>),
}

impl Stepper {
    fn new(params: &ModelParams, space: FockSpace) -> Self {
        let d = space.dim();
        let z = || DMatrix::zeros(d, d);
        Self {
            gen: MeanFieldGenerator::new(params, space),
            h_a: z(),
            h_b: z(),
            k: [(z(), z()), (z(), z()), (z(), z()), (z(), z())],
            y: (z(), z()),
        }
    }

    fn eval(&mut self, ra: &DMatrix<C64>, rb: &DMatrix<C64>, slot: usize) {
        let ma = moments(ra);
        let mb = moments(rb);
        let gen = &self.gen;
        gen.hamiltonian_into(&mb.as_mean_fields(), &mut self.h_a);
        gen.hamiltonian_into(&ma.as_mean_fields(), &mut self.h_b);
        let (ka, kb) = &mut self.k[slot];
        lindblad_rhs_into(&self.h_a, gen.band, ra, gen.kappa, ka);
        lindblad_rhs_into(&self.h_b, gen.band, rb, gen.kappa, kb);
    }

    fn step(&mut self, ra: &mut DMatrix<C64>, rb: &mut DMatrix<C64>, dt: f64) {
        self.eval(ra, rb, 0);
        for (slot, frac) in [(0usize, 0.5), (1, 0.5), (2, 1.0)] {
            let (ya, yb) = &mut self.y;
            let (ka, kb) = &self.k[slot];
            axpy_into(ya, ra, ka, frac * dt);
            axpy_into(yb, rb, kb, frac * dt);
            let (ya, yb) = std::mem::replace(&mut self.y, (DMatrix::zeros(0, 0), DMatrix::zeros(0, 0)));
            self.eval(&ya, &yb, slot + 1);
            self.y = (ya, yb);
        }
        let w = dt / 6.0;
        for (target, side) in [(ra, 0usize), (rb, 1)] {
            let ks: Vec<&[C64]> = self.k.iter().map(|k| if side == 0 { k.0.as_slice() } else { k.1.as_slice() }).collect();
            for (i, v) in target.as_mut_slice().iter_mut().enumerate() {
                *v += (ks[0][i] + (ks[1][i] + ks[2][i]) * 2.0 + ks[3][i]) * w;
            }
        }
    }

    /// Records observables at the current state; returns the sample and the
    /// top-level population.
    fn sample(&mut self, t: f64, ra: &DMatrix<C64>, rb: &DMatrix<C64>, with_eig: bool) -> (Sample, f64) {
        self.eval(ra, rb, 0);
        let (ka, kb) = &self.k[0];
        let ma = moments(ra);
        let mb = moments(rb);
        let one = C64::new(1.0, 0.0);
        let trace_deviation = (ra.trace() - one).norm().max((rb.trace() - one).norm());
        let hermiticity = hermiticity_residual(ra).max(hermiticity_residual(rb));
        let min_eigenvalue = with_eig.then(|| min_eig(ra).min(min_eig(rb)));
        let top = ra[(ra.nrows() - 1, ra.nrows() - 1)].re.max(rb[(rb.nrows() - 1, rb.nrows() - 1)].re);
        let s = Sample {
            t,
            alpha_a: ma.a,
            alpha_b: mb.a,
            n_a: ma.n,
            n_b: mb.n,
            dalpha_a: moments(ka).a,
            dalpha_b: moments(kb).a,
            residual: ka.norm().max(kb.norm()),
            trace_deviation,
            hermiticity,
            min_eigenvalue,
        };
        (s, top)
    }
}

fn axpy_into(out: &mut DMatrix<C64>, base: &DMatrix<C64>, dir: &DMatrix<C64>, scale: f64) {
    for ((o, b), k) in out.as_mut_slice().iter_mut().zip(base.as_slice()).zip(dir.as_slice()) {
        *o = b + k * scale;
    }
}

fn min_eig(m: &DMatrix<C64>) -> f64 {
    hermitian_part(m).symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}
