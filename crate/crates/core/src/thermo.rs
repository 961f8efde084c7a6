//! State quantities derived from a Massieu-Planck potential.
//!
//! For a potential `φ(T, v)` and gas constant `R`:
//!
//! | quantity | formula |
//! |---|---|
//! | pressure | `p = R T φ_v` |
//! | inner energy | `ε = R T² φ_T` |
//! | entropy | `σ = R (φ + T φ_T)` (additive constant 0) |
//! | Gibbs energy | `γ = R T (v φ_v − φ)` |
//! | enthalpy | `η = R T (T φ_T + v φ_v)` |
//!
//! A state is applicable when the quadratic form
//! `κ = −R (φ_TT + 2 φ_T / T) dT² + R φ_vv dv²` is negative definite.

use crate::error::{Error, Result};
use crate::models::{GasModel, PhiDerivs};

/// Absolute band around zero that classifies a point onto a singular set.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Below this magnitude `φ_vv` (resp. `2φ_T + Tφ_TT`) is treated as zero and
/// `C_p` (resp. `C_s`) is reported as singular.
pub const SINGULAR_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Applicability {
    Applicable,
    /// On the spinodal `φ_vv = 0`.
    SigmaI,
    /// On `T φ_TT + 2 φ_T = 0`.
    SigmaE,
    NonApplicable,
}

impl Applicability {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Applicable => "applicable",
            Self::SigmaI => "sigma_i",
            Self::SigmaE => "sigma_e",
            Self::NonApplicable => "non_applicable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoState {
    pub t: f64,
    pub v: f64,
    pub p: f64,
    pub eps: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub eta: f64,
    pub applicability: Applicability,
}

/// Diagonal coefficients of the fundamental quadratic form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaForm {
    pub coeff_tt: f64,
    pub coeff_vv: f64,
}

impl KappaForm {
    pub fn is_negative_definite(&self) -> bool {
        self.coeff_tt < 0.0 && self.coeff_vv < 0.0
    }
}

fn classify(t: f64, d: &PhiDerivs) -> Applicability {
    let vv = d.vv;
    let e = t * d.tt + 2.0 * d.t;
    if vv.abs() <= BOUNDARY_TOL {
        Applicability::SigmaI
    } else if e.abs() <= BOUNDARY_TOL {
        Applicability::SigmaE
    } else if vv < 0.0 && e > 0.0 {
        Applicability::Applicable
    } else {
        Applicability::NonApplicable
    }
}

pub fn evaluate_state(model: &GasModel, t: f64, v: f64) -> Result<ThermoState> {
    let d = model.potential(t, v)?;
    let r = model.r_eff();
    Ok(ThermoState {
        t,
        v,
        p: r * t * d.v,
        eps: r * t * t * d.t,
        sigma: r * (d.phi + t * d.t),
        gamma: r * t * (v * d.v - d.phi),
        eta: r * t * (t * d.t + v * d.v),
        applicability: classify(t, &d),
    })
}

pub fn pressure(model: &GasModel, t: f64, v: f64) -> Result<f64> {
    Ok(model.r_eff() * t * model.potential(t, v)?.v)
}

/// `∂p/∂T = R (φ_v + T φ_Tv)`.
pub fn pressure_dt(model: &GasModel, t: f64, v: f64) -> Result<f64> {
    let d = model.potential(t, v)?;
    Ok(model.r_eff() * (d.v + t * d.tv))
}

/// `∂p/∂v = R T φ_vv`.
pub fn pressure_dv(model: &GasModel, t: f64, v: f64) -> Result<f64> {
    Ok(model.r_eff() * t * model.potential(t, v)?.vv)
}

/// `C_v = R T (2 φ_T + T φ_TT) = ε_T`.
pub fn heat_capacity_v(model: &GasModel, t: f64, v: f64) -> Result<f64> {
    let d = model.potential(t, v)?;
    Ok(model.r_eff() * t * (2.0 * d.t + t * d.tt))
}

// T²(φ_Tv² − φ_TT φ_vv) + 2T(φ_v φ_vT − φ_T φ_vv) + φ_v²
fn sound_bracket(t: f64, d: &PhiDerivs) -> f64 {
    t * t * (d.tv * d.tv - d.tt * d.vv) + 2.0 * t * (d.v * d.tv - d.t * d.vv) + d.v * d.v
}

/// `C_p = −R · bracket / φ_vv`; singular on the spinodal.
pub fn heat_capacity_p(model: &GasModel, t: f64, v: f64) -> Result<f64> {
    let d = model.potential(t, v)?;
    if d.vv.abs() <= SINGULAR_TOL {
        return Err(Error::Singular { t, v, what: "phi_vv = 0, C_p diverges" });
    }
    Ok(-model.r_eff() * sound_bracket(t, &d) / d.vv)
}

/// Squared sound speed `C_s = R v² · bracket / (2 φ_T + T φ_TT)`.
///
/// Negative values are returned as-is: they mark states where the pressure
/// increases along an isentrope.
pub fn sound_speed_sq(model: &GasModel, t: f64, v: f64) -> Result<f64> {
    let d = model.potential(t, v)?;
    let denom = 2.0 * d.t + t * d.tt;
    if denom.abs() <= SINGULAR_TOL {
        return Err(Error::Singular { t, v, what: "2 phi_T + T phi_TT = 0, C_s undefined" });
    }
    Ok(model.r_eff() * v * v * sound_bracket(t, &d) / denom)
}

pub fn kappa_form(model: &GasModel, t: f64, v: f64) -> Result<KappaForm> {
    let d = model.potential(t, v)?;
    let r = model.r_eff();
    Ok(KappaForm {
        coeff_tt: -r * (d.tt + 2.0 * d.t / t),
        coeff_vv: r * d.vv,
    })
}

/// Residual of the Monge-Ampère equation satisfied by `φ` when the sound
/// speed is prescribed as `c² = R F(T, v) v²`.
pub fn monge_ampere_residual<F>(model: &GasModel, f: F, t: f64, v: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let d = model.potential(t, v)?;
    Ok(sound_bracket(t, &d) - f(t, v) * (2.0 * d.t + t * d.tt))
}
