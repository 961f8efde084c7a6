//! Isentropes `T = τ(v)` solving `φ + T φ_T = σ₀ / R`.
//!
//! For the ideal, van der Waals and Peng-Robinson potentials the solution is
//! a power law `T = c · w(v)^{−2/n}` with `w = v`, `3v − 1` and `v − 1`
//! respectively, and `σ₀ = R (n/2)(1 + ln c)` in the entropy convention of
//! [`crate::thermo`].

use crate::error::{Error, Result};
use crate::models::{GasModel, ModelKind};
use crate::numeric::roots::newton_bracketed;
use crate::thermo::{self, SINGULAR_TOL};

const LN_T_MIN: f64 = -13.815_510_557_964_274; // ln 1e-6
const LN_T_MAX: f64 = 13.815_510_557_964_274;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedForm {
    IdealPower { c: f64, exponent: f64 },
    VdwPower { c: f64, exponent: f64 },
    PrPower { c: f64, exponent: f64 },
    Numeric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Isentrope {
    model: GasModel,
    sigma0: f64,
    closed: ClosedForm,
}

/// Isentrope at entropy level `sigma0` (convention `σ = R(φ + Tφ_T)`).
pub fn make_isentrope(model: &GasModel, sigma0: f64) -> Result<Isentrope> {
    Isentrope::new(model.clone(), sigma0)
}

impl Isentrope {
    pub fn new(model: GasModel, sigma0: f64) -> Result<Self> {
        if !sigma0.is_finite() {
            return Err(Error::Param(format!("entropy level must be finite, got {sigma0}")));
        }
        let n = model.n();
        let c = (2.0 * sigma0 / (model.r_eff() * n) - 1.0).exp();
        let exponent = -2.0 / n;
        let closed = match model.kind() {
            ModelKind::Ideal => ClosedForm::IdealPower { c, exponent },
            ModelKind::VanDerWaals => ClosedForm::VdwPower { c, exponent },
            ModelKind::PengRobinson => ClosedForm::PrPower { c, exponent },
            ModelKind::Virial(_) => ClosedForm::Numeric,
        };
        Ok(Self { model, sigma0, closed })
    }

    /// Isentrope through the power law `T = c · w(v)^{−2/n}`.
    pub fn from_power_constant(model: GasModel, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Param(format!("power-law constant must be positive, got {c}")));
        }
        let sigma0 = model.r_eff() * 0.5 * model.n() * (1.0 + c.ln());
        Self::new(model, sigma0)
    }

    pub fn model(&self) -> &GasModel {
        &self.model
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }

    pub fn closed_form(&self) -> ClosedForm {
        self.closed
    }

    /// Power-law constant `c`, when the isentrope has a closed form.
    pub fn power_constant(&self) -> Option<f64> {
        match self.closed {
            ClosedForm::IdealPower { c, .. } | ClosedForm::VdwPower { c, .. } | ClosedForm::PrPower { c, .. } => {
                Some(c)
            }
            ClosedForm::Numeric => None,
        }
    }

    /// `φ + T φ_T − σ₀/R` at `(t, v)`.
    pub fn entropy_residual(&self, t: f64, v: f64) -> f64 {
        let d = self.model.derivs(t, v);
        d.phi + t * d.t - self.sigma0 / self.model.r_eff()
    }

    pub fn tau(&self, v: f64) -> Result<f64> {
        self.model.check_domain(1.0, v)?;
        let t = match self.closed {
            ClosedForm::IdealPower { c, exponent } => c * v.powf(exponent),
            ClosedForm::VdwPower { c, exponent } => c * (3.0 * v - 1.0).powf(exponent),
            ClosedForm::PrPower { c, exponent } => c * (v - 1.0).powf(exponent),
            ClosedForm::Numeric => return self.tau_numeric(v),
        };
        if t > 0.0 && t.is_finite() {
            Ok(t)
        } else {
            Err(Error::NoRoot(format!("isentrope temperature not representable at v = {v}")))
        }
    }

    /// Root of the entropy equation by Newton iteration in `ln T` on
    /// `T ∈ [1e-6, 1e6]`, ignoring any closed form.
    pub fn tau_numeric(&self, v: f64) -> Result<f64> {
        self.model.check_domain(1.0, v)?;
        let fdf = |x: f64| {
            let t = x.exp();
            let d = self.model.derivs(t, v);
            let g = d.phi + t * d.t - self.sigma0 / self.model.r_eff();
            (g, t * (2.0 * d.t + t * d.tt))
        };
        let (lo, hi) = (fdf(LN_T_MIN).0, fdf(LN_T_MAX).0);
        if !(lo < 0.0 && hi > 0.0) {
            return Err(Error::NoRoot(format!(
                "entropy level {} not attainable at v = {v}",
                self.sigma0
            )));
        }
        let x = newton_bracketed(fdf, LN_T_MIN, LN_T_MAX, 1e-15, 1e-13)?;
        let t = x.exp();
        let d = self.model.derivs(t, v);
        if 2.0 * d.t + t * d.tt <= SINGULAR_TOL {
            return Err(Error::NoRoot(format!("isentrope folds (eps_T <= 0) at v = {v}")));
        }
        Ok(t)
    }

    /// `dτ/dv = −(φ_v + T φ_Tv) / (2 φ_T + T φ_TT)`.
    pub fn tau_dv(&self, v: f64) -> Result<f64> {
        let t = self.tau(v)?;
        let d = self.model.derivs(t, v);
        Ok(-(d.v + t * d.tv) / (2.0 * d.t + t * d.tt))
    }

    pub fn pressure(&self, v: f64) -> Result<f64> {
        let t = self.tau(v)?;
        thermo::pressure(&self.model, t, v)
    }

    pub fn sound_speed_sq(&self, v: f64) -> Result<f64> {
        let t = self.tau(v)?;
        thermo::sound_speed_sq(&self.model, t, v)
    }
}

pub fn pressure_on_isentrope(iso: &Isentrope, v: f64) -> Result<f64> {
    iso.pressure(v)
}

pub fn sound_speed_on_isentrope(iso: &Isentrope, v: f64) -> Result<f64> {
    iso.sound_speed_sq(v)
}
