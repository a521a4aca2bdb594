//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary so a failing criterion is reported without
//! aborting the rest; the process exits 0 either way. Set
//! `ACCEPTANCE_STRICT=1` to exit 1 when anything fails.

use std::time::Instant;

use kerr_array::circuit::{derive, solve_cancellation, CancellationTarget};
use kerr_array::dynamics::{
    evolve, seed_state, ClassifierControls, IntegratorControls, PhaseKind, SeedKind,
};
use kerr_array::model::{critical_v_analytic, KerrLimit};
use kerr_array::observables::{linspace, wigner, SiteMoments};
use kerr_array::oracle::{
    correlation_range, steady_state, Geometry, LatticeParams, LatticeSpec, SteadyStateMethod,
};
use kerr_array::sweep::{run_point, run_sweep, Axis, SweepParam, SweepSpec};
use kerr_array::{ModelParams, Result};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    summary: String,
    details: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, summary: impl Into<String>) -> Self {
        Self { pass, summary: summary.into(), details: Vec::new() }
    }

    fn detail(mut self, line: impl Into<String>) -> Self {
        self.details.push(line.into());
        self
    }
}

type Criterion = (&'static str, fn() -> Result<Outcome>);

fn within(x: f64, target: f64, rel: f64) -> bool {
    (x - target).abs() <= rel * target.abs()
}

fn hard_core_threshold() -> Result<Outcome> {
    let spec = SweepSpec::new(
        ModelParams::hard_core(0.0, 0.75, 0.0, 0.0),
        Axis::new(SweepParam::ZV, 4.0, 8.0, 81),
        None,
    );
    let table = run_sweep(&spec, None)?;
    let Some((lo, hi)) = table.transition_bracket(PhaseKind::Uniform, PhaseKind::Crystal) else {
        return Ok(Outcome::new(false, "no uniform -> crystal transition in zV ∈ [4, 8]"));
    };
    let mid = 0.5 * (lo + hi);
    Ok(Outcome::new(within(mid, 5.73, 0.05), format!("zV_c ≈ {mid:.3} (bracket [{lo:.2}, {hi:.2}]), target 5.73 ± 5%"))
        .detail(format!("{} of 81 nodes inconclusive after one retry", table.count(None))))
}

fn free_threshold() -> Result<Outcome> {
    let spec = SweepSpec::new(
        ModelParams { omega: 0.75, ..Default::default() },
        Axis::new(SweepParam::ZV, 0.2, 0.8, 61),
        None,
    );
    let table = run_sweep(&spec, None)?;
    let hc = critical_v_analytic(0.0, 0.75, KerrLimit::HardCore)?;
    let free = critical_v_analytic(0.0, 0.75, KerrLimit::FreeU0)?;
    let analytic_ok = (hc - 5.733).abs() < 1e-3 && (free - 0.444).abs() < 1e-3;
    let Some((lo, hi)) = table.transition_bracket(PhaseKind::Uniform, PhaseKind::Crystal) else {
        return Ok(Outcome::new(false, "no uniform -> crystal transition in zV ∈ [0.2, 0.8]"));
    };
    let mid = 0.5 * (lo + hi);
    Ok(Outcome::new(
        within(mid, 0.44, 0.05) && analytic_ok,
        format!("zV_c ≈ {mid:.3} (bracket [{lo:.2}, {hi:.2}]), target 0.44 ± 5%"),
    )
    .detail(format!("analytic thresholds {hc:.4} (hard-core), {free:.4} (U=0)"))
    .detail(format!("{} of 61 nodes inconclusive after one retry", table.count(None))))
}

fn oscillating_phase() -> Result<Outcome> {
    let params = ModelParams { delta: 0.9, omega: 0.75, zj: 0.2, zv: 0.6, n_max: Some(15), ..Default::default() };
    let controls = IntegratorControls::default();
    let classifier = ClassifierControls::default();
    let point = run_point(&params, &SeedKind::default_sweep(), &classifier, &controls, 1)?;
    let label = point.label;
    let (PhaseKind::Oscillating, Some(period)) = (label.kind, label.period) else {
        return Ok(Outcome::new(false, format!("classified {} (Δn̄ = {:.4})", label.kind, label.delta_n)));
    };
    let t_end = point.trajectory.t_end();
    let gap = point
        .trajectory
        .samples
        .iter()
        .filter(|s| s.t >= t_end - period)
        .map(|s| (s.alpha_a - s.alpha_b).norm())
        .fold(0.0, f64::max);

    let xs = linspace(-6.0, 6.0, 121);
    let snapshots = 8;
    let mut state = point.trajectory.final_state;
    let mut worst = f64::INFINITY;
    for k in 0..snapshots {
        for rho in [&state.rho_a, &state.rho_b] {
            let w = wigner(rho, &xs, &xs)?;
            worst = worst.min(w.min() / w.max());
        }
        if k + 1 < snapshots {
            state = evolve(&state, &params, period / snapshots as f64, &controls)?.final_state;
        }
    }
    let pass = gap > classifier.eps_crystal && label.delta_n > classifier.eps_crystal && worst > -1e-3;
    Ok(Outcome::new(pass, format!("oscillating, Δn̄ = {:.4}, max|⟨a_A⟩−⟨a_B⟩| = {gap:.3}, min W/max W = {worst:.2e}", label.delta_n))
        .detail(format!("period {period:.4} (reported only), recurrence mismatch {:.1e}", label.recurrence_distance.unwrap_or(f64::NAN))))
}

fn bistability() -> Result<Outcome> {
    let params = ModelParams::hard_core(0.8, 2.0, 6.2, 0.0);
    let classifier = ClassifierControls::default();
    let controls = IntegratorControls::default();
    let retries = 2;
    let crystal = run_point(&params, &SeedKind::FockOccupation { n_a: 1.0, n_b: 0.0 }, &classifier, &controls, retries)?.label;
    let other = run_point(&params, &SeedKind::FockOccupation { n_a: 0.8, n_b: 0.1 }, &classifier, &controls, retries)?.label;
    let vacuum = run_point(&params, &SeedKind::SymmetricVacuum, &classifier, &controls, retries)?.label;
    let pass = crystal.kind == PhaseKind::Crystal
        && within(crystal.delta_n, 0.1027, 0.02)
        && vacuum.kind == PhaseKind::Uniform
        && other.kind == PhaseKind::Crystal
        && (other.delta_n - crystal.delta_n).abs() < 1e-3;
    Ok(Outcome::new(pass, format!("seed (1,0): {} Δn = {:.5}; vacuum: {}", crystal.kind, crystal.delta_n, vacuum.kind))
        .detail(format!("seed (0.8,0.1): {} Δn = {:.5}", other.kind, other.delta_n)))
}

fn oracle_correlations() -> Result<Outcome> {
    let spec = LatticeSpec::new(5, Geometry::OpenChain, 3);
    let base = LatticeParams { omega: 0.4, ..Default::default() };
    let mut out = Vec::new();

    let start = Instant::now();
    let s = steady_state(&spec, &LatticeParams { u: 0.5, ..base.clone() }, SteadyStateMethod::Iterative)?;
    let mut dev = 0.0f64;
    for i in 0..5 {
        for j in 0..5 {
            if i != j {
                dev = dev.max((s.g2(i, j)? - 1.0).abs());
            }
        }
    }
    let factorizes = dev < 1e-6;
    out.push(format!("V=0: max|g²−1| = {dev:.1e} ({:.0?})", start.elapsed()));

    let mut staggered = true;
    for v in [0.5, 1.0] {
        let start = Instant::now();
        let s = steady_state(&spec, &LatticeParams { u: 0.5, v, ..base.clone() }, SteadyStateMethod::Iterative)?;
        let g2 = s.g2_by_distance()?;
        let signs: Vec<f64> = g2.iter().filter(|(r, _)| (1..=3).contains(r)).map(|&(r, g)| (-1f64).powi(r as i32) * (g - 1.0)).collect();
        let ok = signs.iter().all(|x| *x > 0.0) || signs.iter().all(|x| *x < 0.0);
        staggered &= ok;
        out.push(format!("V={v}: g²(r) = {:?}, staggered {ok} ({:.0?})", fmt_g2(&g2), start.elapsed()));
    }

    let mut ranges = Vec::new();
    for j in [0.0, 0.3, 1.0] {
        let start = Instant::now();
        let s = steady_state(&spec, &LatticeParams { u: 1.0, v: 1.0, j, ..base.clone() }, SteadyStateMethod::Iterative)?;
        let g2 = s.g2_by_distance()?;
        let range = correlation_range(&g2, 0.01);
        ranges.push(range);
        out.push(format!("U=1 V=1 J={j}: g²(r) = {:?}, range {range} ({:.0?})", fmt_g2(&g2), start.elapsed()));
    }
    let shrinking = ranges.windows(2).all(|w| w[1] <= w[0]);

    let mut o = Outcome::new(
        factorizes && staggered && shrinking,
        format!("factorization {factorizes}, staggering {staggered}, range non-increasing in J {shrinking} (ranges {ranges:?})"),
    );
    for line in out {
        o = o.detail(line);
    }
    Ok(o)
}

fn fmt_g2(g2: &[(usize, f64)]) -> Vec<String> {
    g2.iter().map(|(r, g)| format!("{r}:{g:.4}")).collect()
}

fn mean_field_exactness() -> Result<Outcome> {
    let mut worst_distance = 0.0f64;
    let mut worst_linear = 0.0f64;
    for (u, n_max) in [(0.5, 20), (0.0, 30)] {
        for delta in [-1.0, 0.0, 1.0] {
            for omega in [0.25, 0.75, 1.25] {
                let params = ModelParams { delta, omega, u, n_max: Some(n_max), ..Default::default() };
                let seed = seed_state(&SeedKind::SymmetricVacuum, params.space()?)?;
                let traj = evolve(&seed, &params, 150.0, &IntegratorControls::default())?;
                let spec = LatticeSpec::new(1, Geometry::OpenChain, n_max);
                let bond = LatticeParams { delta, omega, u, ..Default::default() };
                let exact = steady_state(&spec, &bond, SteadyStateMethod::NullSpace)?.reduced_density(0)?;
                for rho in [&traj.final_state.rho_a, &traj.final_state.rho_b] {
                    worst_distance = worst_distance.max(rho.trace_distance(&exact)?);
                }
                if u == 0.0 {
                    let a = SiteMoments::of(&traj.final_state.rho_a).a;
                    worst_linear = worst_linear.max((a - omega / C64::new(delta, 0.5)).norm());
                }
            }
        }
    }
    Ok(Outcome::new(
        worst_distance < 1e-8 && worst_linear < 1e-8,
        format!("max trace distance {worst_distance:.1e}, max |⟨a⟩ − Ω/(δ+iκ/2)| = {worst_linear:.1e} over 2 × 3×3 grids"),
    ))
}

fn crystal_threshold(u: f64, t_ch: f64) -> Result<Option<(f64, f64)>> {
    let is_crystal = |zv: f64| -> Result<bool> {
        let p = ModelParams { omega: 0.75, u, zv, t_ch, n_max: Some(12), ..Default::default() };
        match run_point(&p, &SeedKind::default_sweep(), &ClassifierControls::default(), &IntegratorControls::default(), 1) {
            Ok(r) => Ok(r.label.kind == PhaseKind::Crystal),
            Err(e) if e.kind() == "inconclusive" => Ok(false),
            Err(e) => Err(e),
        }
    };
    let (mut lo, mut hi) = (1.0, 9.0);
    if is_crystal(lo)? || !is_crystal(hi)? {
        return Ok(None);
    }
    while hi - lo > 0.05 {
        let mid = 0.5 * (lo + hi);
        if is_crystal(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some((lo, hi)))
}

fn correlated_hopping() -> Result<Outcome> {
    let mut pass = true;
    let mut details = Vec::new();
    for u in [0.5, 1.0, 2.0] {
        let plain = crystal_threshold(u, 0.0)?;
        let ch = crystal_threshold(u, -u)?;
        match (plain, ch) {
            (Some((a0, a1)), Some((b0, b1))) => {
                let shifted = b0 > a1 || a0 > b1;
                pass &= shifted;
                details.push(format!("U={u}: t_ch=0 in [{a0:.3}, {a1:.3}], t_ch=−U in [{b0:.3}, {b1:.3}], displaced {shifted}"));
            }
            _ => {
                pass = false;
                details.push(format!("U={u}: transition missing (t_ch=0 {plain:?}, t_ch=−U {ch:?})"));
            }
        }
    }
    let mut o = Outcome::new(pass, "crystal boundary exists and moves with t_ch = −U for U ∈ {0.5, 1, 2}");
    for d in details {
        o = o.detail(d);
    }
    Ok(o)
}

fn circuit_identity() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut worst_x, mut worst_ratio) = (0.0f64, 0.0f64);
    for k in 0..100 {
        let c = rng.gen_range(100e-15..2e-12);
        let l = rng.gen_range(0.3e-9..10e-9);
        let z = [2.0, 3.0, 4.0, 6.0][rng.gen_range(0..4)];
        let target = if k % 2 == 0 {
            CancellationTarget::EJ { c_j: c * rng.gen_range(0.005..0.3) }
        } else {
            let l_j = l * rng.gen_range(2.5..200.0);
            CancellationTarget::CJ { e_j: kerr_array::circuit::PHI_0.powi(2) / l_j }
        };
        let d = derive(&solve_cancellation(c, l, z, target)?)?;
        worst_x = worst_x.max(d.x_minus.abs());
        worst_ratio = worst_ratio.max((z * d.v_hz / d.u_hz - 4.0).abs());
    }
    Ok(Outcome::new(
        worst_x < 1e-12 && worst_ratio < 1e-12,
        format!("100 circuits: max |X₋| = {worst_x:.1e}, max |zV/U − 4| = {worst_ratio:.1e}"),
    ))
}

fn physicality() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let controls = IntegratorControls { positivity_every: 1, ..Default::default() };
    let (mut trace, mut herm, mut eig) = (0.0f64, 0.0f64, f64::INFINITY);
    let mut samples = 0;
    for k in 0..20 {
        let hard = k % 4 == 0;
        let params = ModelParams {
            delta: rng.gen_range(-2.0..2.0),
            omega: rng.gen_range(0.2..2.0),
            zj: rng.gen_range(0.0..1.0),
            u: if hard { 0.0 } else { rng.gen_range(0.0..2.0) },
            zv: rng.gen_range(0.0..if hard { 8.0 } else { 3.0 }),
            t_ch: if k % 3 == 0 { -rng.gen_range(0.0..1.0) } else { 0.0 },
            hard_core: hard,
            n_max: Some(if hard { 1 } else { 8 }),
            ..Default::default()
        };
        let seed = SeedKind::FockOccupation { n_a: rng.gen_range(0.0..1.0), n_b: 0.0 };
        let traj = evolve(&seed_state(&seed, params.space()?)?, &params, 60.0, &controls)?;
        for s in &traj.samples {
            trace = trace.max(s.trace_deviation);
            herm = herm.max(s.hermiticity);
            eig = eig.min(s.min_eigenvalue.unwrap_or(f64::NEG_INFINITY));
            samples += 1;
        }
    }
    Ok(Outcome::new(
        trace < 1e-8 && herm < 1e-10 && eig > -1e-8,
        format!("{samples} samples over 20 runs: max trace deviation {trace:.1e}, max Hermiticity residual {herm:.1e}, min eigenvalue {eig:.1e}"),
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("hard-core threshold", hard_core_threshold),
        ("U=0 threshold", free_threshold),
        ("oscillating phase", oscillating_phase),
        ("V=0 bistability", bistability),
        ("oracle correlations", oracle_correlations),
        ("mean-field exactness", mean_field_exactness),
        ("correlated-hopping shift", correlated_hopping),
        ("circuit identity", circuit_identity),
        ("physicality", physicality),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = f().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{tag} {name}: {} [{:.1?}]", outcome.summary, start.elapsed());
        for d in &outcome.details {
            println!("     {d}");
        }
        failed += usize::from(!outcome.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 && std::env::var_os("ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
