//! From circuit elements to model couplings, including the choice of
//! junction that cancels linear hopping.

use kerr_array::circuit::{derive, solve_cancellation, CancellationTarget, CircuitParams, SignConvention};

fn main() -> kerr_array::Result<()> {
    let (c, l, z) = (400e-15, 2e-9, 2.0);

    let generic = CircuitParams { c, l, c_j: 20e-15, e_j: 2e-23, z };
    let d = derive(&generic)?;
    println!("generic junction: f={:.3} GHz  X₋={:+.4}  J/h={:+.3} MHz", d.frequency_hz / 1e9, d.x_minus, d.j_hz / 1e6);

    let tuned = solve_cancellation(c, l, z, CancellationTarget::EJ { c_j: 20e-15 })?;
    let d = derive(&tuned)?;
    println!("cancelling E_J = {:.4e} J  (L_J = {:.3} nH)", tuned.e_j, d.l_j * 1e9);
    println!("    X₋ = {:.1e}, X₊ = {:.4}", d.x_minus, d.x_plus);
    println!("    U/h = {:.3} MHz, V/h = {:.3} MHz, t_ch/h = {:.3} MHz", d.u_hz / 1e6, d.v_hz / 1e6, d.t_ch_hz / 1e6);
    println!("    zV/U = {}", z * d.v_hz / d.u_hz);
    for w in &d.warnings {
        println!("    warning: {w}");
    }

    let kappa_hz = 1e6;
    let model = d.to_model_params(SignConvention::FlipToPositive, kappa_hz, 0.0, 0.75)?;
    println!("in units of κ/h = 1 MHz: U={:.3} zV={:.3} t_ch={:.3} zJ={:.1e}", model.u, model.zv, model.t_ch, model.zj);
    Ok(())
}
