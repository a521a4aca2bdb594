//! Lumped-element circuit → effective cavity-array couplings.
//!
//! Resonators (C, L) on a lattice with coordination `z`, neighbours joined
//! by capacitively shunted junctions (C_J, E_J). Inputs are SI; derived
//! frequencies and energies are reported in Hz (energies divided by h).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

pub const HBAR: f64 = 1.054_571_817e-34;
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Reduced flux quantum ħ/2e in Wb.
pub const PHI_0: f64 = HBAR / (2.0 * ELEMENTARY_CHARGE);

/// Above this C_J/C the first-order capacitance inversion is questionable.
pub const CJ_RATIO_WARNING: f64 = 0.1;
/// Above this X₊ the counter-rotating pair terms are no longer negligible.
pub const X_PLUS_WARNING: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitParams {
    /// Resonator capacitance (F).
    #[serde(rename = "C")]
    pub c: f64,
    /// Resonator inductance (H).
    #[serde(rename = "L")]
    pub l: f64,
    /// Junction capacitance (F).
    #[serde(rename = "C_J")]
    pub c_j: f64,
    /// Josephson energy (J).
    #[serde(rename = "E_J")]
    pub e_j: f64,
    /// Coordination number.
    pub z: f64,
}

impl CircuitParams {
    pub fn validate(&self) -> Result<()> {
        let named = [("C", self.c), ("L", self.l), ("C_J", self.c_j), ("E_J", self.e_j), ("z", self.z)];
        for (name, v) in named {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitDerived {
    /// C + 2C_J (F)
    pub c_tilde: f64,
    /// (1/(2L) + 1/L_J)⁻¹ (H)
    pub l_tilde: f64,
    /// φ₀²/E_J (H)
    pub l_j: f64,
    /// ω/2π (Hz)
    pub frequency_hz: f64,
    /// C_J/(C + 2C_J)
    pub alpha: f64,
    /// 2L/(2L + L_J)
    pub beta: f64,
    pub x_plus: f64,
    pub x_minus: f64,
    pub e_c_hz: f64,
    pub u_hz: f64,
    pub v_hz: f64,
    pub t_ch_hz: f64,
    /// Residual linear hopping −(ω/2π)·X₋ (Hz).
    pub j_hz: f64,
    pub z: f64,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
}

pub const SIGN_NOTE: &str = "U and V are negative for this circuit; the phase diagrams are computed for \
positive U and V, so mapping into the dynamics requires an explicit sign convention";
pub const CHARGING_ENERGY_NOTE: &str = "charging energy uses E_C = e^2/(2 C_tilde)";

/// Maps circuit elements to the effective Hamiltonian couplings.
pub fn derive(circuit: &CircuitParams) -> Result<CircuitDerived> {
    circuit.validate()?;
    let CircuitParams { c, l, c_j, e_j, z } = *circuit;
    let l_j = PHI_0 * PHI_0 / e_j;
    let c_tilde = c + 2.0 * c_j;
    let l_tilde = 1.0 / (1.0 / (2.0 * l) + 1.0 / l_j);
    let omega = 1.0 / (l_tilde * c_tilde).sqrt();
    let frequency_hz = omega / (2.0 * std::f64::consts::PI);
    let alpha = c_j / c_tilde;
    let beta = 2.0 * l / (2.0 * l + l_j);
    let x_plus = beta + alpha;
    let x_minus = beta - alpha;
    let e_c_hz = ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (2.0 * c_tilde) / PLANCK;
    let p = alpha * e_c_hz;
    // scalings by powers of two keep zV/U = 4 exact in floating point
    let u_hz = -(z * p) / 2.0;
    let v_hz = -2.0 * p;

    let mut warnings = Vec::new();
    if c_j / c >= CJ_RATIO_WARNING {
        warnings.push(format!("C_J/C = {:.3} is not small; first-order capacitance inversion may be inaccurate", c_j / c));
    }
    if x_plus > X_PLUS_WARNING {
        warnings.push(format!("X_plus = {x_plus:.3} is not small compared to 2; rotating-wave approximation questionable"));
    }
    if x_minus.abs() > 1e-12 {
        warnings.push(format!("X_minus = {x_minus:.3e}: linear hopping is not cancelled"));
    }
    Ok(CircuitDerived {
        c_tilde,
        l_tilde,
        l_j,
        frequency_hz,
        alpha,
        beta,
        x_plus,
        x_minus,
        e_c_hz,
        u_hz,
        v_hz,
        t_ch_hz: p,
        j_hz: -frequency_hz * x_minus,
        z,
        warnings,
        notes: vec![SIGN_NOTE.to_string(), CHARGING_ENERGY_NOTE.to_string()],
    })
}

/// Which element [`solve_cancellation`] chooses, with the other one fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "solve_for", rename_all = "snake_case", deny_unknown_fields)]
pub enum CancellationTarget {
    /// Fix C_J, choose E_J.
    EJ {
        #[serde(rename = "C_J")]
        c_j: f64,
    },
    /// Fix E_J, choose C_J.
    CJ {
        #[serde(rename = "E_J")]
        e_j: f64,
    },
}

/// Picks the free element so that C_J/(C + 2C_J) = 2L/(2L + L_J), which
/// removes linear hopping (X₋ = 0).
pub fn solve_cancellation(c: f64, l: f64, z: f64, target: CancellationTarget) -> Result<CircuitParams> {
    for (name, v) in [("C", c), ("L", l), ("z", z)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidParams(format!("{name} must be positive and finite, got {v}")));
        }
    }
    let params = match target {
        CancellationTarget::EJ { c_j } => {
            if !(c_j.is_finite() && c_j > 0.0) {
                return Err(Error::NoSolution(format!("C_J must be positive, got {c_j}")));
            }
            let alpha = c_j / (c + 2.0 * c_j);
            let l_j = 2.0 * l * (1.0 - alpha) / alpha;
            CircuitParams { c, l, c_j, e_j: PHI_0 * PHI_0 / l_j, z }
        }
        CancellationTarget::CJ { e_j } => {
            if !(e_j.is_finite() && e_j > 0.0) {
                return Err(Error::NoSolution(format!("E_J must be positive, got {e_j}")));
            }
            let l_j = PHI_0 * PHI_0 / e_j;
            if l_j <= 2.0 * l {
                return Err(Error::NoSolution(format!(
                    "2L/(2L + L_J) = {:.3} >= 1/2 cannot equal C_J/(C + 2C_J) for any positive C_J",
                    2.0 * l / (2.0 * l + l_j)
                )));
            }
            let beta = 2.0 * l / (2.0 * l + l_j);
            CircuitParams { c, l, c_j: beta * c / (1.0 - 2.0 * beta), e_j, z }
        }
    };
    params.validate()?;
    Ok(params)
}

/// How derived couplings are signed when handed to the dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    /// Keep the circuit's signs (U, V < 0).
    AsDerived,
    /// Flip every coupling so U, V > 0, matching the phase diagrams.
    FlipToPositive,
}

impl CircuitDerived {
    /// Model parameters in units of `kappa_hz`, with detuning and drive
    /// supplied by the caller.
    pub fn to_model_params(
        &self,
        convention: SignConvention,
        kappa_hz: f64,
        delta: f64,
        omega: f64,
    ) -> Result<ModelParams> {
        if !(kappa_hz.is_finite() && kappa_hz > 0.0) {
            return Err(Error::InvalidParams(format!("kappa_hz must be positive, got {kappa_hz}")));
        }
        let s = match convention {
            SignConvention::AsDerived => 1.0,
            SignConvention::FlipToPositive => -1.0,
        };
        let p = ModelParams {
            delta,
            omega,
            zj: s * self.z * self.j_hz / kappa_hz,
            u: s * self.u_hz / kappa_hz,
            zv: s * self.z * self.v_hz / kappa_hz,
            t_ch: s * self.z * self.t_ch_hz / kappa_hz,
            ..ModelParams::default()
        };
        p.validate()?;
        Ok(p)
    }
}
