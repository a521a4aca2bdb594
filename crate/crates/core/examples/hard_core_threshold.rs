//! Uniform → crystal transition of hard-core cavities as zV is swept.

use kerr_array::dynamics::PhaseKind;
use kerr_array::model::{critical_v_analytic, KerrLimit};
use kerr_array::sweep::{run_sweep, Axis, SweepParam, SweepSpec};
use kerr_array::ModelParams;

fn main() -> kerr_array::Result<()> {
    let (delta, omega) = (0.0, 0.75);
    let spec = SweepSpec::new(
        ModelParams::hard_core(delta, omega, 0.0, 0.0),
        Axis::new(SweepParam::ZV, 4.0, 8.0, 81),
        None,
    );
    let table = run_sweep(&spec, None)?;
    for row in table.rows.iter().step_by(8) {
        println!("zV={:.2}  {:<11} Δn={:.4}", row.axis1, row.phase_str(), row.delta_n.unwrap_or(f64::NAN));
    }
    let analytic = critical_v_analytic(delta, omega, KerrLimit::HardCore)?;
    match table.transition_bracket(PhaseKind::Uniform, PhaseKind::Crystal) {
        Some((lo, hi)) => println!("transition in [{lo:.2}, {hi:.2}], analytic zV_c = {analytic:.4}"),
        None => println!("no transition found; analytic zV_c = {analytic:.4}"),
    }

    let out = std::env::temp_dir().join("hard_core_threshold.csv");
    let sidecar = table.save(&spec, &out)?;
    println!("wrote {} and {}", out.display(), sidecar.display());
    Ok(())
}
