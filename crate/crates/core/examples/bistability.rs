//! Hard-core array without cross-Kerr coupling: the symmetric and the
//! staggered initial conditions settle into different steady states.

use kerr_array::dynamics::SeedKind;
use kerr_array::sweep::run_point;
use kerr_array::ModelParams;
use num_complex::Complex64 as C64;

fn main() -> kerr_array::Result<()> {
    let params = ModelParams::hard_core(0.8, 2.0, 6.2, 0.0);
    let seeds = [
        SeedKind::SymmetricVacuum,
        SeedKind::FockOccupation { n_a: 1.0, n_b: 0.0 },
        SeedKind::FockOccupation { n_a: 0.8, n_b: 0.1 },
        SeedKind::AsymmetricCoherent { alpha_a: C64::new(0.5, 0.3), alpha_b: C64::new(0.0, 0.0) },
    ];
    for seed in seeds {
        match run_point(&params, &seed, &Default::default(), &Default::default(), 2) {
            Ok(p) => println!("{seed:?}\n    {} Δn={:.6} residual={:.1e}", p.label.kind, p.label.delta_n, p.label.residual),
            Err(e) => println!("{seed:?}\n    {e}"),
        }
    }
    Ok(())
}
