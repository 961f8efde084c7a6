//! Spinodal and coexistence (binodal) curves.
//!
//! Two states `(v₁, T)` and `(v₂, T)` coexist when
//!
//! ```text
//! φ_v(v₂, T) − φ_v(v₁, T) = 0
//! φ(v₂, T) − φ(v₁, T) − v₂ φ_v(v₂, T) + v₁ φ_v(v₁, T) = 0
//! ```
//!
//! i.e. equal pressure and equal Gibbs energy. The system is solved for
//! `(v₁, v₂)` at fixed `T` by damped Newton iteration; the pressure and the
//! transition jumps are recovered afterwards.

use crate::error::{Error, Result};
use crate::models::GasModel;
use crate::numeric::roots::{bisect, golden_max, sign_changes};
use crate::thermo::evaluate_state;

/// Coexistence residual tolerance (both equations, absolute).
pub const RESIDUAL_TOL: f64 = 1e-10;
const MAX_NEWTON: usize = 100;
/// Pairs with a volume this close to a spinodal volume are rejected.
const SPINODAL_EXCLUSION: f64 = 1e-6;
/// Below this distance to `T*` the initial pair comes from the symmetric ansatz.
const NEAR_CRITICAL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoexistencePoint {
    pub t: f64,
    /// Liquid volume.
    pub v1: f64,
    /// Gas volume.
    pub v2: f64,
    pub p: f64,
    pub dq: f64,
    pub dw: f64,
    pub deps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinodalPoint {
    pub v: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub t: f64,
    pub v: f64,
    pub p: f64,
}

/// Heat, work and inner-energy jumps across a transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jumps {
    pub dq: f64,
    pub dw: f64,
    pub deps: f64,
}

fn t_scan() -> impl Iterator<Item = f64> {
    (0..=240).map(|i| 10f64.powf(-6.0 + 12.0 * i as f64 / 240.0))
}

/// Geometric grid of volumes inside the model domain.
fn v_scan(model: &GasModel, points: usize) -> Vec<f64> {
    let v_min = model.v_min();
    let scale = v_min.max(1.0);
    (0..points)
        .map(|i| {
            let s = -6.0 + 10.0 * i as f64 / (points - 1) as f64;
            v_min + scale * 10f64.powf(s)
        })
        .collect()
}

/// Temperature `T` with `φ_vv(v, T) = 0`.
///
/// Closed forms are used for van der Waals and Peng-Robinson; other models
/// are solved by bisection on `T ∈ [1e-6, 1e6]`.
pub fn spinodal_t(model: &GasModel, v: f64) -> Result<f64> {
    model.check_domain(1.0, v)?;
    if let Some(t) = model.closed_form_spinodal_t(v) {
        return if t > 0.0 {
            Ok(t)
        } else {
            Err(Error::NoRoot(format!("no spinodal temperature at v = {v}")))
        };
    }
    let g = |t: f64| model.derivs(t, v).vv;
    let ts: Vec<f64> = t_scan().collect();
    let vals: Vec<f64> = ts.iter().map(|&t| g(t)).collect();
    let i = *sign_changes(&vals)
        .first()
        .ok_or_else(|| Error::NoRoot(format!("phi_vv has constant sign in T at v = {v}")))?;
    bisect(g, ts[i], ts[i + 1], 1e-15 * ts[i + 1])
}

/// The two spinodal volumes `(v_left, v_right)` at temperature `t`.
pub fn spinodal_volumes(model: &GasModel, t: f64) -> Result<(f64, f64)> {
    model.check_domain(t, model.v_min() + 1.0)?;
    let vs = v_scan(model, 4000);
    let vals: Vec<f64> = vs.iter().map(|&v| model.derivs(t, v).vv).collect();
    let changes = sign_changes(&vals);
    if changes.len() < 2 {
        return Err(Error::NoRoot(format!("no spinodal pair at T = {t}")));
    }
    let f = |v: f64| model.derivs(t, v).vv;
    let (i, j) = (changes[0], changes[1]);
    let vl = bisect(f, vs[i], vs[i + 1], 1e-15 * vs[i + 1])?;
    let vr = bisect(f, vs[j], vs[j + 1], 1e-15 * vs[j + 1])?;
    Ok((vl, vr))
}

/// Maximum of the spinodal curve `T = spinodal_t(v)`.
pub fn critical_point(model: &GasModel) -> Result<CriticalPoint> {
    let vs = v_scan(model, 600);
    let ts: Vec<Option<f64>> = vs.iter().map(|&v| spinodal_t(model, v).ok()).collect();
    let (imax, _) = ts
        .iter()
        .enumerate()
        .filter_map(|(i, t)| t.map(|t| (i, t)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::NoRoot(format!("model '{}' has no spinodal", model.name())))?;
    if imax == 0 || imax + 1 == vs.len() || ts[imax - 1].is_none() || ts[imax + 1].is_none() {
        return Err(Error::NoRoot("spinodal temperature has no interior maximum".into()));
    }
    let s = |v: f64| spinodal_t(model, v).unwrap_or(f64::NEG_INFINITY);
    let (a, b) = (vs[imax - 1], vs[imax + 1]);
    let v_gold = golden_max(s, a, b, 1e-9 * b);
    // polish on the sign of the central-difference slope
    let slope = |v: f64| {
        let h = 1e-6 * v.abs().max(1.0);
        (s(v + h) - s(v - h)) / (2.0 * h)
    };
    let w = 1e-6 * v_gold.abs().max(1.0);
    let (mut lo, mut hi) = ((v_gold - w).max(a), (v_gold + w).min(b));
    while slope(lo) < 0.0 && lo > a {
        lo = (lo - 10.0 * w).max(a);
    }
    while slope(hi) > 0.0 && hi < b {
        hi = (hi + 10.0 * w).min(b);
    }
    let v = bisect(slope, lo, hi, 1e-14 * hi).unwrap_or(v_gold);
    let t = s(v);
    let p = evaluate_state(model, t, v)?.p;
    Ok(CriticalPoint { t, v, p })
}

/// Residuals of the phase-equivalence system at `(v1, v2)`.
pub fn coexistence_residuals(model: &GasModel, t: f64, v1: f64, v2: f64) -> [f64; 2] {
    let a = model.derivs(t, v1);
    let b = model.derivs(t, v2);
    [b.v - a.v, b.phi - a.phi - v2 * b.v + v1 * a.v]
}

/// Jumps of heat, work and inner energy from phase `v1` to phase `v2`.
pub fn transition_jumps(model: &GasModel, cp: &CoexistencePoint) -> Jumps {
    let r = model.r_eff();
    let t = cp.t;
    let a = model.derivs(t, cp.v1);
    let b = model.derivs(t, cp.v2);
    let dphi = b.phi - a.phi;
    let dphi_t = b.t - a.t;
    Jumps {
        dq: r * t * (dphi + t * dphi_t),
        dw: -r * t * dphi,
        deps: r * t * t * dphi_t,
    }
}

/// Coexistence solver bound to one model and its critical point.
#[derive(Debug, Clone)]
pub struct CoexistenceSolver<'a> {
    model: &'a GasModel,
    critical: CriticalPoint,
}

impl<'a> CoexistenceSolver<'a> {
    pub fn new(model: &'a GasModel) -> Result<Self> {
        let critical = critical_point(model)?;
        Ok(Self { model, critical })
    }

    pub fn critical(&self) -> CriticalPoint {
        self.critical
    }

    pub fn model(&self) -> &GasModel {
        self.model
    }

    fn check_subcritical(&self, t: f64) -> Result<()> {
        if !(t > 0.0) {
            return Err(Error::Domain { t, v: self.critical.v });
        }
        // the located maximum carries rounding error of a few ulps
        if t >= self.critical.t * (1.0 - 1e-12) {
            return Err(Error::Supercritical { t, t_crit: self.critical.t });
        }
        Ok(())
    }

    /// Solves the coexistence pair at `t` from scratch.
    pub fn at_t(&self, t: f64) -> Result<CoexistencePoint> {
        self.check_subcritical(t)?;
        let (vl, vr) = spinodal_volumes(self.model, t)?;
        let guess = if self.critical.t - t < NEAR_CRITICAL {
            self.symmetric_guess(t, vl, vr)?
        } else {
            self.pressure_guess(t, vl, vr)?
        };
        self.finish(t, guess, (vl, vr))
    }

    /// Solves the coexistence pair at `t` starting from `guess`. The guess
    /// may be given in either order; it is replaced by the standard initial
    /// pair when it does not straddle the spinodal region.
    pub fn at_t_from(&self, t: f64, guess: (f64, f64)) -> Result<CoexistencePoint> {
        self.check_subcritical(t)?;
        let (vl, vr) = spinodal_volumes(self.model, t)?;
        let (a, b) = if guess.0 <= guess.1 { guess } else { (guess.1, guess.0) };
        if a > self.model.v_min() && a < vl && b > vr {
            self.finish(t, (a, b), (vl, vr))
        } else {
            self.at_t(t)
        }
    }

    /// Raw Newton solve keeping the order of `guess`: returns `(v_a, v_b)`
    /// with `v_a` the volume that started from `guess.0`.
    pub fn solve_pair(&self, t: f64, guess: (f64, f64)) -> Result<(f64, f64)> {
        self.check_subcritical(t)?;
        let (vl, vr) = spinodal_volumes(self.model, t)?;
        self.newton(t, guess, (vl, vr))
    }

    /// Continuation along `t_grid`, each solve seeded by the previous one.
    pub fn curve(&self, t_grid: &[f64]) -> Result<Vec<CoexistencePoint>> {
        let mut out: Vec<CoexistencePoint> = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            let point = match out.last() {
                Some(prev) => self.at_t_from(t, (prev.v1, prev.v2)),
                None => self.at_t(t),
            };
            out.push(point.map_err(|e| match e {
                Error::Convergence { what, iterations, trace } => Error::Convergence {
                    what: format!("binodal at T = {t}: {what}"),
                    iterations,
                    trace,
                },
                other => other,
            })?);
        }
        Ok(out)
    }

    fn pressure(&self, t: f64, v: f64) -> f64 {
        self.model.r_eff() * t * self.model.derivs(t, v).v
    }

    // Liquid and gas volumes with a common pressure between the spinodal
    // pressures.
    fn pressure_guess(&self, t: f64, vl: f64, vr: f64) -> Result<(f64, f64)> {
        let p_lo = self.pressure(t, vl).max(0.0);
        let p_hi = self.pressure(t, vr);
        if !(p_hi > p_lo) {
            return Err(Error::NoRoot(format!("no positive pressure window at T = {t}")));
        }
        let target = 0.5 * (p_lo + p_hi);
        let f = |v: f64| self.pressure(t, v) - target;
        let v_min = self.model.v_min();
        let mut lo = v_min + 1e-12 * v_min.max(1.0);
        while !(f(lo) > 0.0) {
            lo = 0.5 * (lo + vl);
            if vl - lo < 1e-14 {
                return Err(Error::NoRoot(format!("liquid branch not bracketed at T = {t}")));
            }
        }
        let v1 = bisect(f, lo, vl, 1e-14 * vl)?;
        let mut far = 2.0 * vr;
        while f(far) > 0.0 {
            far *= 2.0;
            if far > 1e300 {
                return Err(Error::NoRoot(format!("gas branch not bracketed at T = {t}")));
            }
        }
        let v2 = bisect(f, vr, far, 1e-14 * far)?;
        Ok((v1, v2))
    }

    // v = v* ± δ with δ solving the equal-pressure equation.
    fn symmetric_guess(&self, t: f64, vl: f64, vr: f64) -> Result<(f64, f64)> {
        let c = 0.5 * (vl + vr);
        let f = |d: f64| self.model.derivs(t, c + d).v - self.model.derivs(t, c - d).v;
        let d_lo = 0.5 * (vr - vl);
        let d_max = c - self.model.v_min();
        let mut d_hi = 2.0 * d_lo;
        while f(d_hi) > 0.0 {
            d_hi = (2.0 * d_hi).min(0.5 * (d_hi + d_max));
            if d_max - d_hi < 1e-14 {
                return Err(Error::NoRoot(format!("symmetric ansatz failed at T = {t}")));
            }
        }
        let d = bisect(f, d_lo, d_hi, 1e-15)?;
        Ok((c - d, c + d))
    }

    fn newton(&self, t: f64, guess: (f64, f64), spin: (f64, f64)) -> Result<(f64, f64)> {
        let (vl, vr) = spin;
        let v_min = self.model.v_min();
        let m = self.model;
        // each unknown must stay on the stable side it started on
        let side = |v: f64| if v < vl { -1 } else if v > vr { 1 } else { 0 };
        let (sa, sb) = (side(guess.0), side(guess.1));
        if sa == 0 || sb == 0 || sa == sb {
            return Err(Error::Param(format!(
                "initial pair ({}, {}) must straddle the spinodal region ({vl}, {vr})",
                guess.0, guess.1
            )));
        }
        let feasible = |a: f64, b: f64| a > v_min && b > v_min && side(a) == sa && side(b) == sb;
        let norm = |r: [f64; 2]| r[0].hypot(r[1]);

        let (mut a, mut b) = guess;
        let mut res = coexistence_residuals(m, t, a, b);
        let mut trace = vec![norm(res)];
        for _ in 0..MAX_NEWTON {
            if res[0].abs() <= RESIDUAL_TOL && res[1].abs() <= RESIDUAL_TOL {
                return Ok((a, b));
            }
            let da = m.derivs(t, a);
            let db = m.derivs(t, b);
            // J = [[−φ_vv(a), φ_vv(b)], [a φ_vv(a), −b φ_vv(b)]]
            let (j11, j12, j21, j22) = (-da.vv, db.vv, a * da.vv, -b * db.vv);
            let det = j11 * j22 - j12 * j21;
            if det == 0.0 || !det.is_finite() {
                break;
            }
            let sa_step = -(j22 * res[0] - j12 * res[1]) / det;
            let sb_step = -(-j21 * res[0] + j11 * res[1]) / det;
            let current = norm(res);
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let (na, nb) = (a + lambda * sa_step, b + lambda * sb_step);
                if feasible(na, nb) {
                    let nres = coexistence_residuals(m, t, na, nb);
                    if norm(nres) < current {
                        a = na;
                        b = nb;
                        res = nres;
                        accepted = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            trace.push(norm(res));
            if !accepted {
                break;
            }
        }
        if res[0].abs() <= RESIDUAL_TOL && res[1].abs() <= RESIDUAL_TOL {
            return Ok((a, b));
        }
        Err(Error::Convergence {
            what: format!("coexistence Newton at T = {t}"),
            iterations: trace.len() - 1,
            trace,
        })
    }

    fn finish(&self, t: f64, guess: (f64, f64), spin: (f64, f64)) -> Result<CoexistencePoint> {
        let (vl, vr) = spin;
        let (a, b) = self.newton(t, guess, spin)?;
        let (v1, v2) = if a <= b { (a, b) } else { (b, a) };
        if (v1 - vl).abs() < SPINODAL_EXCLUSION || (v2 - vr).abs() < SPINODAL_EXCLUSION {
            return Err(Error::Convergence {
                what: format!("spurious near-spinodal pair ({v1}, {v2}) at T = {t}"),
                iterations: 0,
                trace: vec![],
            });
        }
        // strict sign test rather than the reporting band of `evaluate_state`:
        // far on the gas side φ_vv ~ −1/v² is legitimately below 1e-12
        for v in [v1, v2] {
            let d = self.model.potential(t, v)?;
            if !(d.vv < 0.0 && t * d.tt + 2.0 * d.t > 0.0) {
                return Err(Error::Convergence {
                    what: format!("coexistence volume {v} at T = {t} is not an applicable state"),
                    iterations: 0,
                    trace: vec![],
                });
            }
        }
        let p = self.pressure(t, v2);
        let mut cp = CoexistencePoint { t, v1, v2, p, dq: 0.0, dw: 0.0, deps: 0.0 };
        let j = transition_jumps(self.model, &cp);
        cp.dq = j.dq;
        cp.dw = j.dw;
        cp.deps = j.deps;
        Ok(cp)
    }
}

pub fn coexistence_at_t(model: &GasModel, t: f64) -> Result<CoexistencePoint> {
    CoexistenceSolver::new(model)?.at_t(t)
}

pub fn binodal_curve(model: &GasModel, t_grid: &[f64]) -> Result<Vec<CoexistencePoint>> {
    CoexistenceSolver::new(model)?.curve(t_grid)
}

/// Spinodal curve sampled at the given volumes (volumes without a spinodal
/// temperature are skipped).
pub fn spinodal_curve(model: &GasModel, volumes: &[f64]) -> Vec<SpinodalPoint> {
    volumes
        .iter()
        .filter_map(|&v| spinodal_t(model, v).ok().map(|t| SpinodalPoint { v, t }))
        .collect()
}
