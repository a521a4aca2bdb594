use serde::{Deserialize, Serialize};

use super::{Sample, Trajectory};
use crate::error::{Error, Result};

/// Thresholds for labelling a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierControls {
    /// Time discarded before the analysis window.
    pub t_transient: f64,
    /// Length of the analysis window at the end of the trajectory.
    pub t_window: f64,
    /// Window-maximum ‖ρ̇‖_F below which the state counts as stationary.
    pub eps_stationary: f64,
    /// Δn above which a stationary state is a crystal.
    pub eps_crystal: f64,
    /// Largest max-norm mismatch of (⟨a_A⟩, ⟨a_B⟩) after one period.
    pub recurrence_tol: f64,
    /// Smallest fraction of the window two shifted copies must share.
    pub min_overlap: f64,
    /// Autocorrelation a candidate lag must reach.
    pub min_correlation: f64,
    /// Smallest ratio of late to early window-half residual for a
    /// non-stationary window to count as a sustained oscillation.
    pub min_amplitude_ratio: f64,
}

impl Default for ClassifierControls {
    fn default() -> Self {
        Self {
            t_transient: 200.0,
            t_window: 100.0,
            eps_stationary: 1e-6,
            eps_crystal: 1e-3,
            recurrence_tol: 1e-4,
            min_overlap: 0.35,
            min_correlation: 0.5,
            min_amplitude_ratio: 0.9,
        }
    }
}

impl ClassifierControls {
    /// Total time a trajectory must span.
    pub fn t_total(&self) -> f64 {
        self.t_transient + self.t_window
    }

    /// Same thresholds with transient and window doubled.
    pub fn doubled(&self) -> Self {
        Self { t_transient: 2.0 * self.t_transient, t_window: 2.0 * self.t_window, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKind {
    Uniform,
    Crystal,
    Oscillating,
}

impl PhaseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseKind::Uniform => "uniform",
            PhaseKind::Crystal => "crystal",
            PhaseKind::Oscillating => "oscillating",
        }
    }
}

impl std::fmt::Display for PhaseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseLabel {
    pub kind: PhaseKind,
    /// Δn averaged over the analysis window.
    pub delta_n: f64,
    pub period: Option<f64>,
    /// Largest ‖ρ̇‖_F over the analysis window.
    pub residual: f64,
    pub recurrence_distance: Option<f64>,
}

/// Labels the asymptotic regime of `traj`.
///
/// Stationary trajectories are split on the window-averaged Δn. A window
/// whose residual is still shrinking is not labelled. Otherwise the period
/// is searched among autocorrelation peaks of Re⟨a_A⟩, shortest lag first,
/// and each candidate is refined until the shifted trajectory matches
/// itself within `recurrence_tol`. Anything else is
/// [`Error::Inconclusive`].
pub fn classify(traj: &Trajectory, controls: &ClassifierControls) -> Result<PhaseLabel> {
    let span = traj.t_end() - traj.t_start();
    if traj.samples.len() < 3 || span + 1e-9 < controls.t_total() {
        return Err(Error::TrajectoryTooShort { t_end: span, needed: controls.t_total() });
    }
    let window_start = traj.t_end() - controls.t_window;
    let first = traj.samples.partition_point(|s| s.t < window_start - 1e-9);
    let window = &traj.samples[first..];
    let residual = window.iter().map(|s| s.residual).fold(0.0, f64::max);
    let delta_n = window.iter().map(Sample::delta_n).sum::<f64>() / window.len() as f64;
    if residual < controls.eps_stationary {
        let kind = if delta_n > controls.eps_crystal { PhaseKind::Crystal } else { PhaseKind::Uniform };
        return Ok(PhaseLabel { kind, delta_n, period: None, residual, recurrence_distance: None });
    }

    let (early, late) = window.split_at(window.len() / 2);
    let half_max = |w: &[Sample]| w.iter().map(|s| s.residual).fold(0.0, f64::max);
    let ratio = half_max(late) / half_max(early);
    if ratio < controls.min_amplitude_ratio {
        return Err(Error::Inconclusive(format!(
            "residual {residual:.3e} above stationary tolerance and still decaying (late/early ratio {ratio:.3})"
        )));
    }

    let series = Series::new(&traj.samples);
    let signal = recurrence_signal(window);
    let max_lag = ((1.0 - controls.min_overlap) * (window.len() - 1) as f64).floor() as usize;
    let corr: Vec<f64> = (0..=max_lag + 1).map(|k| autocorrelation(&signal, k)).collect();

    let mut best: Option<f64> = None;
    for k in 2..=max_lag {
        let is_peak = corr[k] >= corr[k - 1] && corr[k] >= corr[k + 1] && corr[k] >= controls.min_correlation;
        if !is_peak {
            continue;
        }
        let lo = (k - 1) as f64 * series.h;
        let hi = (k + 1) as f64 * series.h;
        let (period, dist) = golden_min(|p| series.recurrence_distance(window, p), lo, hi, 1e-7);
        best = Some(best.map_or(dist, |b: f64| b.min(dist)));
        if dist < controls.recurrence_tol {
            return Ok(PhaseLabel {
                kind: PhaseKind::Oscillating,
                delta_n,
                period: Some(period),
                residual,
                recurrence_distance: Some(dist),
            });
        }
    }
    Err(Error::Inconclusive(match best {
        Some(d) => format!("residual {residual:.3e} above stationary tolerance; best recurrence mismatch {d:.3e}"),
        None => format!("residual {residual:.3e} above stationary tolerance; no periodic candidate"),
    }))
}

/// Uniformly sampled (⟨a_A⟩, ⟨a_B⟩) with derivatives for Hermite
/// interpolation.
struct Series<'a> {
    samples: &'a [Sample],
    t0: f64,
    h: f64,
}

impl<'a> Series<'a> {
    fn new(samples: &'a [Sample]) -> Self {
        let t0 = samples[0].t;
        let h = (samples[samples.len() - 1].t - t0) / (samples.len() - 1) as f64;
        Self { samples, t0, h }
    }

    fn at(&self, t: f64) -> [f64; 4] {
        let x = ((t - self.t0) / self.h).max(0.0);
        let i = (x.floor() as usize).min(self.samples.len() - 2);
        let s = x - i as f64;
        let (p, q) = (&self.samples[i], &self.samples[i + 1]);
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let v = |a: f64, da: f64, b: f64, db: f64| h00 * a + h10 * self.h * da + h01 * b + h11 * self.h * db;
        [
            v(p.alpha_a.re, p.dalpha_a.re, q.alpha_a.re, q.dalpha_a.re),
            v(p.alpha_a.im, p.dalpha_a.im, q.alpha_a.im, q.dalpha_a.im),
            v(p.alpha_b.re, p.dalpha_b.re, q.alpha_b.re, q.dalpha_b.re),
            v(p.alpha_b.im, p.dalpha_b.im, q.alpha_b.im, q.dalpha_b.im),
        ]
    }

    /// max over window samples of ‖z(t) − z(t − period)‖_∞
    fn recurrence_distance(&self, window: &[Sample], period: f64) -> f64 {
        let mut worst = 0.0f64;
        for s in window {
            let back = s.t - period;
            if back < self.t0 {
                continue;
            }
            let z = components(s);
            let w = self.at(back);
            for c in 0..4 {
                worst = worst.max((z[c] - w[c]).abs());
            }
        }
        worst
    }
}

fn components(s: &Sample) -> [f64; 4] {
    [s.alpha_a.re, s.alpha_a.im, s.alpha_b.re, s.alpha_b.im]
}

/// Re⟨a_A⟩, or the component with the largest variance when that one is
/// flat.
fn recurrence_signal(window: &[Sample]) -> Vec<f64> {
    let n = window.len() as f64;
    let mut best = (0, -1.0);
    for c in 0..4 {
        let mean = window.iter().map(|s| components(s)[c]).sum::<f64>() / n;
        let var = window.iter().map(|s| (components(s)[c] - mean).powi(2)).sum::<f64>() / n;
        if var > best.1 {
            best = (c, var);
        }
    }
    let re_a = window.iter().map(|s| s.alpha_a.re).collect::<Vec<_>>();
    let mean = re_a.iter().sum::<f64>() / n;
    if re_a.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n > 1e-6 * best.1 {
        return re_a;
    }
    window.iter().map(|s| components(s)[best.0]).collect()
}

/// Pearson correlation between x[..n−k] and x[k..].
fn autocorrelation(x: &[f64], k: usize) -> f64 {
    if k >= x.len() - 1 {
        return 0.0;
    }
    let a = &x[..x.len() - k];
    let b = &x[k..];
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (u, v) in a.iter().zip(b) {
        let (du, dv) = (u - ma, v - mb);
        sab += du * dv;
        saa += du * du;
        sbb += dv * dv;
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return 0.0;
    }
    sab / (saa * sbb).sqrt()
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd { (c, fc) } else { (d, fd) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::DensityMatrix;
    use crate::dynamics::{evolve_seeded, IntegratorControls, MeanFieldState, SeedKind};
    use crate::fock::FockSpace;
    use crate::model::ModelParams;
    use num_complex::Complex64 as C64;

    fn synthetic(f: impl Fn(f64) -> (C64, C64), df: impl Fn(f64) -> (C64, C64), t_end: f64, h: f64) -> Trajectory {
        let n = (t_end / h).round() as usize;
        let samples = (0..=n)
            .map(|i| {
                let t = i as f64 * h;
                let (a, b) = f(t);
                let (da, db) = df(t);
                Sample {
                    t,
                    alpha_a: a,
                    alpha_b: b,
                    n_a: a.norm_sqr(),
                    n_b: b.norm_sqr(),
                    dalpha_a: da,
                    dalpha_b: db,
                    residual: 1e-2,
                    trace_deviation: 0.0,
                    hermiticity: 0.0,
                    min_eigenvalue: None,
                }
            })
            .collect();
        let s = FockSpace::new(2).unwrap();
        let final_state = MeanFieldState::new(DensityMatrix::vacuum(s), DensityMatrix::vacuum(s)).unwrap();
        Trajectory { samples, final_state, max_top_population: 0.0 }
    }

    #[test]
    fn finds_fundamental_period_not_subharmonic() {
        // Signal with a strong component at 3× the fundamental frequency:
        // the first autocorrelation peak sits near T/3 but does not recur.
        let w = 2.0 * std::f64::consts::PI / 17.3;
        let f = |t: f64| (C64::new(0.2 * (w * t).cos() + (3.0 * w * t).cos(), 0.0), C64::new(0.0, 0.1 * (w * t).sin()));
        let df = |t: f64| {
            (C64::new(-0.2 * w * (w * t).sin() - 3.0 * w * (3.0 * w * t).sin(), 0.0), C64::new(0.0, 0.1 * w * (w * t).cos()))
        };
        let traj = synthetic(f, df, 300.0, 0.05);
        let label = classify(&traj, &ClassifierControls::default()).unwrap();
        assert_eq!(label.kind, PhaseKind::Oscillating);
        assert!((label.period.unwrap() - 17.3).abs() < 1e-4, "{:?}", label.period);
    }

    #[test]
    fn decaying_spiral_is_not_oscillating() {
        let (w, g) = (2.0, 0.02);
        let f = |t: f64| (C64::new(0.0, w * t).exp() * (1e-3 * (-g * t).exp()), C64::new(0.1, 0.0));
        let df = |t: f64| (C64::new(-g, w) * f(t).0, C64::new(0.0, 0.0));
        let mut traj = synthetic(f, df, 300.0, 0.05);
        for s in &mut traj.samples {
            s.residual = s.dalpha_a.norm();
        }
        let r = classify(&traj, &ClassifierControls::default());
        assert!(matches!(r, Err(Error::Inconclusive(ref m)) if m.contains("decaying")), "{r:?}");
    }

    #[test]
    fn aperiodic_signal_is_inconclusive() {
        let f = |t: f64| (C64::new((t).cos() + (t * 2f64.sqrt()).cos(), 0.0), C64::new(0.0, 0.0));
        let df = |t: f64| (C64::new(-(t).sin() - 2f64.sqrt() * (t * 2f64.sqrt()).sin(), 0.0), C64::new(0.0, 0.0));
        let traj = synthetic(f, df, 300.0, 0.05);
        assert!(matches!(classify(&traj, &ClassifierControls::default()), Err(Error::Inconclusive(_))));
    }

    #[test]
    fn short_trajectory_is_rejected() {
        let traj = synthetic(|_| (C64::new(0.0, 0.0), C64::new(0.0, 0.0)), |_| (C64::new(0.0, 0.0), C64::new(0.0, 0.0)), 100.0, 0.05);
        assert!(matches!(classify(&traj, &ClassifierControls::default()), Err(Error::TrajectoryTooShort { .. })));
    }

    #[test]
    fn golden_section_finds_minimum() {
        let (x, fx) = golden_min(|x| (x - 1.234).abs(), 0.0, 3.0, 1e-9);
        assert!((x - 1.234).abs() < 1e-8 && fx < 1e-8);
    }

    #[test]
    fn hard_core_uniform_and_crystal() {
        let c = IntegratorControls::default();
        let cc = ClassifierControls::default();
        let low = ModelParams::hard_core(0.0, 0.75, 0.0, 4.0);
        let t = evolve_seeded(&SeedKind::default_sweep(), &low, cc.t_total(), &c).unwrap();
        let label = classify(&t, &cc).unwrap();
        assert_eq!(label.kind, PhaseKind::Uniform);
        let high = ModelParams::hard_core(0.0, 0.75, 0.0, 8.0);
        let t = evolve_seeded(&SeedKind::default_sweep(), &high, cc.t_total(), &c).unwrap();
        let label = classify(&t, &cc).unwrap();
        assert_eq!(label.kind, PhaseKind::Crystal);
        assert!(label.delta_n > 0.1);
    }

    #[test]
    fn symmetric_seed_never_crystallizes() {
        let p = ModelParams::hard_core(0.0, 0.75, 0.0, 8.0);
        let cc = ClassifierControls::default();
        let t = evolve_seeded(&SeedKind::SymmetricVacuum, &p, cc.t_total(), &IntegratorControls::default()).unwrap();
        let label = classify(&t, &cc).unwrap();
        assert_eq!(label.kind, PhaseKind::Uniform);
        assert_eq!(label.delta_n, 0.0);
    }
}
