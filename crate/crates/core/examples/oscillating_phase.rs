//! Limit-cycle phase of the U = 0 array: period, sublattice asymmetry and
//! Wigner snapshots of one sublattice across a cycle.

use kerr_array::dynamics::{evolve, IntegratorControls, PhaseKind, SeedKind};
use kerr_array::observables::{linspace, wigner};
use kerr_array::sweep::run_point;
use kerr_array::ModelParams;

fn main() -> kerr_array::Result<()> {
    let params = ModelParams { delta: 0.9, omega: 0.75, zj: 0.2, u: 0.0, zv: 0.6, n_max: Some(15), ..Default::default() };
    let controls = IntegratorControls::default();
    let point = run_point(&params, &SeedKind::default_sweep(), &Default::default(), &controls, 1)?;
    let label = point.label;
    println!("{} Δn̄={:.4} period={:?}", label.kind, label.delta_n, label.period);
    let Some(period) = label.period.filter(|_| label.kind == PhaseKind::Oscillating) else {
        return Ok(());
    };

    let cycle: Vec<_> = point.trajectory.samples.iter().filter(|s| s.t > point.trajectory.t_end() - period).collect();
    let gap = cycle.iter().map(|s| (s.alpha_a - s.alpha_b).norm()).fold(0.0, f64::max);
    println!("max |⟨a_A⟩ − ⟨a_B⟩| over the last cycle: {gap:.4}");

    let xs = linspace(-4.0, 4.0, 81);
    let mut state = point.trajectory.final_state;
    let snapshots = 6;
    for k in 0..snapshots {
        let w = wigner(&state.rho_a, &xs, &xs)?;
        let (x, p) = w.argmax();
        println!("t={:8.3}  W_A peak at ({x:+.2}, {p:+.2})  min/max = {:+.2e}", state.t, w.min() / w.max());
        if k + 1 < snapshots {
            state = evolve(&state, &params, period / snapshots as f64, &controls)?.final_state;
        }
    }
    Ok(())
}
