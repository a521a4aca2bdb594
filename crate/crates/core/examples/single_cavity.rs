//! Uncoupled cavities: mean-field evolution against the closed-form linear
//! response and the exact single-site steady state.

use kerr_array::dynamics::{evolve, seed_state, IntegratorControls, SeedKind};
use kerr_array::observables::SiteMoments;
use kerr_array::oracle::{steady_state, Geometry, LatticeParams, LatticeSpec, SteadyStateMethod};
use kerr_array::ModelParams;
use num_complex::Complex64 as C64;

fn main() -> kerr_array::Result<()> {
    let n_max = 20;
    for (delta, omega, u) in [(0.0, 0.75, 0.0), (1.0, 0.5, 0.0), (0.0, 0.75, 0.5), (-1.0, 1.0, 1.0)] {
        let params = ModelParams { delta, omega, u, n_max: Some(n_max), ..Default::default() };
        let seed = seed_state(&SeedKind::SymmetricVacuum, params.space()?)?;
        let traj = evolve(&seed, &params, 80.0, &IntegratorControls::default())?;
        let rho = &traj.final_state.rho_a;
        let m = SiteMoments::of(rho);

        let spec = LatticeSpec::new(1, Geometry::OpenChain, n_max);
        let bond = LatticeParams { delta, omega, u, ..Default::default() };
        let exact = steady_state(&spec, &bond, SteadyStateMethod::NullSpace)?;
        let distance = rho.trace_distance(&exact.reduced_density(0)?)?;

        print!("δ={delta:+.2} Ω={omega:.2} U={u:.2}  ⟨a⟩={:.6}  ⟨n⟩={:.6}  trace distance to exact {distance:.2e}", m.a, m.n);
        if u == 0.0 {
            let linear = omega / C64::new(delta, 0.5);
            print!("  |⟨a⟩ − Ω/(δ+i/2)| = {:.2e}", (m.a - linear).norm());
        }
        println!();
    }
    Ok(())
}
