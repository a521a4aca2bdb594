//! Coarse (δ, zV) phase diagram of hard-core cavities with contour
//! extraction of the crystal boundary.

use kerr_array::dynamics::PhaseKind;
use kerr_array::sweep::{extract_boundary, run_sweep, Axis, SweepParam, SweepSpec};
use kerr_array::ModelParams;

fn main() -> kerr_array::Result<()> {
    let spec = SweepSpec::new(
        ModelParams::hard_core(0.0, 0.75, 0.0, 0.0),
        Axis::new(SweepParam::Delta, -2.0, 2.0, 17),
        Some(Axis::new(SweepParam::ZV, 0.0, 10.0, 21)),
    );
    let table = run_sweep(&spec, std::env::var("WORKERS").ok().and_then(|w| w.parse().ok()))?;

    // rows are δ, columns zV; '.' uniform, '#' crystal, '~' oscillating
    for (i, delta) in table.axis1.iter().enumerate() {
        let line: String = (0..table.axis2.len())
            .map(|j| match table.row(i, j).phase {
                Some(PhaseKind::Uniform) => '.',
                Some(PhaseKind::Crystal) => '#',
                Some(PhaseKind::Oscillating) => '~',
                None => '?',
            })
            .collect();
        println!("δ={delta:+.2} {line}");
    }

    let boundary = extract_boundary(&table, spec.classifier.eps_crystal);
    for (k, line) in boundary.delta_n.iter().enumerate() {
        let (a, b) = (line[0], line[line.len() - 1]);
        println!("contour {k}: {} points from ({:.2}, {:.2}) to ({:.2}, {:.2})", line.len(), a.0, a.1, b.0, b.1);
    }
    Ok(())
}
