//! Concrete Massieu-Planck potentials.
//!
//! Van der Waals and Peng-Robinson gases are expressed in their reduced
//! (dimensionless) coordinates. In those coordinates the state relations keep
//! the form `p = R T φ_v`, `ε = R T² φ_T` with a model constant `R_eff`
//! (8/3 for reduced van der Waals, 1 for reduced Peng-Robinson).

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};

/// Value of `φ` and its partial derivatives at one `(T, v)` point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiDerivs {
    pub phi: f64,
    pub t: f64,
    pub v: f64,
    pub tt: f64,
    pub tv: f64,
    pub vv: f64,
}

/// A temperature-dependent virial coefficient `A(T) = Σ_j a_j T^{-j}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InversePowerSeries {
    /// `a_0, a_1, ...`
    pub terms: Vec<f64>,
}

impl InversePowerSeries {
    pub fn new(terms: Vec<f64>) -> Self {
        Self { terms }
    }

    pub fn constant(a: f64) -> Self {
        Self { terms: vec![a] }
    }

    /// `(A, A', A'')` at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let inv = 1.0 / t;
        let mut a = 0.0;
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        let mut pow = 1.0; // t^{-j}
        for (j, &c) in self.terms.iter().enumerate() {
            let jf = j as f64;
            a += c * pow;
            d1 -= jf * c * pow * inv;
            d2 += jf * (jf + 1.0) * c * pow * inv * inv;
            pow *= inv;
        }
        (a, d1, d2)
    }

    fn magnitude_bound(&self) -> f64 {
        self.terms.iter().map(|c| c.abs()).sum()
    }
}

/// Truncated virial potential `φ = (n/2) ln T + ln v − Σ_k A_k(T) v^{-k} / k`.
#[derive(Debug, Clone, PartialEq)]
pub struct VirialSpec {
    pub n: f64,
    /// `A_1, A_2, ...`
    pub coefficients: Vec<InversePowerSeries>,
}

impl VirialSpec {
    /// Heuristic lower volume bound for the truncated series:
    /// `2 max_k |A_k|^{1/k}`, with `|A_k|` bounded by the sum of absolute term
    /// coefficients.
    pub fn default_v_min(&self) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| 2.0 * c.magnitude_bound().powf(1.0 / (i as f64 + 1.0)))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Ideal,
    VanDerWaals,
    PengRobinson,
    Virial(VirialSpec),
}

/// A gas described by a Massieu-Planck potential on the open domain
/// `T > 0, v > v_min`.
#[derive(Debug, Clone, PartialEq)]
pub struct GasModel {
    kind: ModelKind,
    n: f64,
    r_eff: f64,
    v_min: f64,
}

fn check_n(n: f64) -> Result<()> {
    if n.is_finite() && n > 0.0 {
        Ok(())
    } else {
        Err(Error::Param(format!("degrees of freedom must be positive, got {n}")))
    }
}

impl GasModel {
    /// Ideal gas `φ = ln(T^{n/2} v)` with `R = 1`.
    pub fn ideal(n: f64) -> Result<Self> {
        Self::ideal_with_r(n, 1.0)
    }

    pub fn ideal_with_r(n: f64, r: f64) -> Result<Self> {
        check_n(n)?;
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::Param(format!("gas constant must be positive, got {r}")));
        }
        Ok(Self { kind: ModelKind::Ideal, n, r_eff: r, v_min: 0.0 })
    }

    /// Reduced van der Waals gas, `φ = ln(T^{n/2}(3v − 1)) + 9/(8 v T)`.
    pub fn vdw_reduced(n: f64) -> Result<Self> {
        check_n(n)?;
        Ok(Self { kind: ModelKind::VanDerWaals, n, r_eff: 8.0 / 3.0, v_min: 1.0 / 3.0 })
    }

    /// Reduced Peng-Robinson gas,
    /// `φ = ln(T^{n/2}(v − 1)) + arctanh((v + 1)/√2) / (√2 T)`.
    ///
    /// On `v > 1` the arctanh argument exceeds one; it is evaluated as the
    /// real function `½ ln((x + 1)/(x − 1))`.
    pub fn pr_reduced(n: f64) -> Result<Self> {
        check_n(n)?;
        Ok(Self { kind: ModelKind::PengRobinson, n, r_eff: 1.0, v_min: 1.0 })
    }

    /// Truncated virial model with the default volume cutoff.
    pub fn virial(spec: VirialSpec) -> Result<Self> {
        let v_min = spec.default_v_min();
        Self::virial_with_cutoff(spec, v_min)
    }

    pub fn virial_with_cutoff(spec: VirialSpec, v_min: f64) -> Result<Self> {
        check_n(spec.n)?;
        if !(v_min.is_finite() && v_min >= 0.0) {
            return Err(Error::Param(format!("volume cutoff must be non-negative, got {v_min}")));
        }
        Ok(Self { n: spec.n, kind: ModelKind::Virial(spec), r_eff: 1.0, v_min })
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn r_eff(&self) -> f64 {
        self.r_eff
    }

    /// Exclusive lower bound of the volume domain.
    pub fn v_min(&self) -> f64 {
        self.v_min
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ModelKind::Ideal => "ideal",
            ModelKind::VanDerWaals => "vdw",
            ModelKind::PengRobinson => "pr",
            ModelKind::Virial(_) => "virial",
        }
    }

    pub fn contains(&self, t: f64, v: f64) -> bool {
        t.is_finite() && v.is_finite() && t > 0.0 && v > self.v_min
    }

    pub fn check_domain(&self, t: f64, v: f64) -> Result<()> {
        if self.contains(t, v) {
            Ok(())
        } else {
            Err(Error::Domain { t, v })
        }
    }

    /// Potential and derivatives, after a domain check.
    pub fn potential(&self, t: f64, v: f64) -> Result<PhiDerivs> {
        self.check_domain(t, v)?;
        Ok(self.derivs(t, v))
    }

    /// Potential and derivatives without a domain check.
    pub fn derivs(&self, t: f64, v: f64) -> PhiDerivs {
        let half_n = 0.5 * self.n;
        let base = PhiDerivs {
            phi: half_n * t.ln(),
            t: half_n / t,
            v: 0.0,
            tt: -half_n / (t * t),
            tv: 0.0,
            vv: 0.0,
        };
        match &self.kind {
            ModelKind::Ideal => PhiDerivs {
                phi: base.phi + v.ln(),
                v: 1.0 / v,
                vv: -1.0 / (v * v),
                ..base
            },
            ModelKind::VanDerWaals => {
                let w = 3.0 * v - 1.0;
                let c = 9.0 / 8.0;
                PhiDerivs {
                    phi: base.phi + w.ln() + c / (v * t),
                    t: base.t - c / (v * t * t),
                    v: 3.0 / w - c / (v * v * t),
                    tt: base.tt + 2.0 * c / (v * t * t * t),
                    tv: c / (v * v * t * t),
                    vv: -9.0 / (w * w) + 2.0 * c / (v * v * v * t),
                }
            }
            ModelKind::PengRobinson => {
                let (a, a1, a2) = pr_attraction(v);
                PhiDerivs {
                    phi: base.phi + (v - 1.0).ln() + a / t,
                    t: base.t - a / (t * t),
                    v: 1.0 / (v - 1.0) + a1 / t,
                    tt: base.tt + 2.0 * a / (t * t * t),
                    tv: -a1 / (t * t),
                    vv: -1.0 / ((v - 1.0) * (v - 1.0)) + a2 / t,
                }
            }
            ModelKind::Virial(spec) => {
                let mut d = PhiDerivs {
                    phi: base.phi + v.ln(),
                    v: 1.0 / v,
                    vv: -1.0 / (v * v),
                    ..base
                };
                let inv = 1.0 / v;
                let mut pow = inv; // v^{-k}
                for (i, coeff) in spec.coefficients.iter().enumerate() {
                    let k = (i + 1) as f64;
                    let (a, a1, a2) = coeff.eval(t);
                    d.phi -= a * pow / k;
                    d.t -= a1 * pow / k;
                    d.tt -= a2 * pow / k;
                    d.v += a * pow * inv;
                    d.tv += a1 * pow * inv;
                    d.vv -= (k + 1.0) * a * pow * inv * inv;
                    pow *= inv;
                }
                d
            }
        }
    }

    /// Closed-form temperature of the spinodal `φ_vv = 0` at volume `v`,
    /// where the model has one.
    pub fn closed_form_spinodal_t(&self, v: f64) -> Option<f64> {
        match self.kind {
            ModelKind::VanDerWaals => {
                let w = 3.0 * v - 1.0;
                Some(w * w / (4.0 * v * v * v))
            }
            ModelKind::PengRobinson => {
                let q = v * v + 2.0 * v - 1.0;
                Some(2.0 * (v + 1.0) * (v - 1.0) * (v - 1.0) / (q * q))
            }
            _ => None,
        }
    }

    /// The model's own state equations `(p(T, v), ε(T, v))`.
    pub fn state_equations(&self) -> (impl Fn(f64, f64) -> f64 + '_, impl Fn(f64, f64) -> f64 + '_) {
        let r = self.r_eff;
        (
            move |t: f64, v: f64| r * t * self.derivs(t, v).v,
            move |t: f64, v: f64| r * t * t * self.derivs(t, v).t,
        )
    }
}

/// `A(v) = arccoth((v+1)/√2)/√2` and its first two derivatives.
fn pr_attraction(v: f64) -> (f64, f64, f64) {
    let q = v * v + 2.0 * v - 1.0; // (v+1)² − 2
    let a = ((v + 1.0 + SQRT_2) / (v + 1.0 - SQRT_2)).ln() / (2.0 * SQRT_2);
    (a, -1.0 / q, 2.0 * (v + 1.0) / (q * q))
}

/// Real continuation of `arctanh` used by the Peng-Robinson formulas:
/// `½ ln |(1 + x)/(1 − x)|`, i.e. `arccoth(x)` for `|x| > 1`.
pub fn arctanh_real(x: f64) -> f64 {
    0.5 * ((1.0 + x) / (1.0 - x)).abs().ln()
}

/// `(T⁻² B)_v − (T⁻¹ A)_T` by central differences (relative step 1e-5).
///
/// `A(T, v)` and `B(T, v)` are candidate pressure and inner-energy state
/// equations; they come from a common potential iff the residual vanishes.
pub fn compatibility_residual<A, B>(a: A, b: B, t: f64, v: f64) -> f64
where
    A: Fn(f64, f64) -> f64,
    B: Fn(f64, f64) -> f64,
{
    let hv = 1e-5 * if v != 0.0 { v.abs() } else { 1.0 };
    let ht = 1e-5 * if t != 0.0 { t.abs() } else { 1.0 };
    let bv = (b(t, v + hv) - b(t, v - hv)) / (2.0 * hv) / (t * t);
    let at = (a(t + ht, v) / (t + ht) - a(t - ht, v) / (t - ht)) / (2.0 * ht);
    bv - at
}

/// Physical state tuple `(T, v, p, ε, σ)` in either coordinate system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateTuple {
    pub t: f64,
    pub v: f64,
    pub p: f64,
    pub eps: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhysicalParams {
    VanDerWaals { a: f64, b: f64, r: f64 },
    PengRobinson { alpha: f64, b: f64, r: f64 },
}

/// Scale map between physical and reduced coordinates; reduced = physical / scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionMap {
    pub params: PhysicalParams,
    pub scales: StateTuple,
}

impl ReductionMap {
    /// Critical-point scaling of a van der Waals gas.
    pub fn vdw(a: f64, b: f64, r: f64) -> Result<Self> {
        positive(&[a, b, r])?;
        Ok(Self {
            params: PhysicalParams::VanDerWaals { a, b, r },
            scales: StateTuple {
                t: 8.0 * a / (27.0 * r * b),
                v: 3.0 * b,
                p: a / (27.0 * b * b),
                eps: a / (9.0 * b),
                sigma: 3.0 * r / 8.0,
            },
        })
    }

    pub fn pr(alpha: f64, b: f64, r: f64) -> Result<Self> {
        positive(&[alpha, b, r])?;
        Ok(Self {
            params: PhysicalParams::PengRobinson { alpha, b, r },
            scales: StateTuple {
                t: alpha / (b * r),
                v: b,
                p: alpha / (b * b),
                eps: alpha / b,
                sigma: r,
            },
        })
    }

    pub fn to_reduced(&self, s: StateTuple) -> StateTuple {
        let k = self.scales;
        StateTuple { t: s.t / k.t, v: s.v / k.v, p: s.p / k.p, eps: s.eps / k.eps, sigma: s.sigma / k.sigma }
    }

    pub fn to_physical(&self, s: StateTuple) -> StateTuple {
        let k = self.scales;
        StateTuple { t: s.t * k.t, v: s.v * k.v, p: s.p * k.p, eps: s.eps * k.eps, sigma: s.sigma * k.sigma }
    }

    /// The reduced model matching these physical parameters.
    pub fn reduced_model(&self, n: f64) -> Result<GasModel> {
        match self.params {
            PhysicalParams::VanDerWaals { .. } => GasModel::vdw_reduced(n),
            PhysicalParams::PengRobinson { .. } => GasModel::pr_reduced(n),
        }
    }

    /// Physical state equations `(p(T, v), ε(T, v))`.
    pub fn physical_state_equations(&self, n: f64) -> (Box<dyn Fn(f64, f64) -> f64>, Box<dyn Fn(f64, f64) -> f64>) {
        match self.params {
            PhysicalParams::VanDerWaals { a, b, r } => (
                Box::new(move |t, v| (r * t * v * v - a * (v - b)) / (v * v * (v - b))),
                Box::new(move |t, v| 0.5 * n * r * t - a / v),
            ),
            PhysicalParams::PengRobinson { alpha, b, r } => (
                Box::new(move |t, v| r * t / (v - b) - alpha / ((v + b) * (v + b) - 2.0 * b * b)),
                Box::new(move |t, v| {
                    0.5 * n * r * t - alpha * arctanh_real((v + b) / (SQRT_2 * b)) / (SQRT_2 * b)
                }),
            ),
        }
    }
}

fn positive(xs: &[f64]) -> Result<()> {
    if xs.iter().all(|x| x.is_finite() && *x > 0.0) {
        Ok(())
    } else {
        Err(Error::Param(format!("physical parameters must be positive, got {xs:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::evaluate_state;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn ideal_potential_values() {
        let m = GasModel::ideal(3.0).unwrap();
        assert_eq!(m.derivs(1.0, 1.0).phi, 0.0);
        assert!((m.derivs(2f64.exp(), 1.0).phi - 3.0).abs() < 1e-14);
        // σ = R ln(T^{n/2} v) up to the constant R n/2
        let s = evaluate_state(&m, 2.0, 5.0).unwrap();
        assert!((s.sigma - ((2f64.powf(1.5) * 5.0).ln() + 1.5)).abs() < 1e-14);
    }

    #[test]
    fn vdw_reproduces_reduced_state_equations() {
        let m = GasModel::vdw_reduced(3.0).unwrap();
        for &(t, v) in &[(1.0, 1.0), (0.7, 2.3), (1.4, 0.5)] {
            let s = evaluate_state(&m, t, v).unwrap();
            assert!(rel(s.p, 8.0 * t / (3.0 * v - 1.0) - 3.0 / (v * v)) < 1e-14);
            assert!(rel(s.eps, 4.0 * t - 3.0 / v) < 1e-14);
        }
        let s = evaluate_state(&m, 1.0, 1.0).unwrap();
        assert!((s.p - 1.0).abs() < 1e-15 && (s.eps - 1.0).abs() < 1e-15);
    }

    #[test]
    fn vdw_spinodal_closed_form() {
        let m = GasModel::vdw_reduced(3.0).unwrap();
        for &v in &[0.5, 1.0, 2.0, 7.5] {
            let t = m.closed_form_spinodal_t(v).unwrap();
            assert!(m.derivs(t, v).vv.abs() < 1e-12);
        }
        assert_eq!(m.closed_form_spinodal_t(2.0), Some(25.0 / 32.0));
    }

    #[test]
    fn pr_reproduces_reduced_state_equations() {
        let m = GasModel::pr_reduced(3.0).unwrap();
        let s = evaluate_state(&m, 1.0, 2.0).unwrap();
        assert!(rel(s.p, 6.0 / 7.0) < 1e-14);
        for &(t, v) in &[(0.2, 3.0), (1.0, 1.5), (0.05, 10.0)] {
            let s = evaluate_state(&m, t, v).unwrap();
            let x = (v + 1.0) / SQRT_2;
            assert!(rel(s.p, t / (v - 1.0) - 1.0 / ((v + 1.0).powi(2) - 2.0)) < 1e-13);
            assert!(rel(s.eps, 1.5 * t - arctanh_real(x) / SQRT_2) < 1e-12);
        }
    }

    #[test]
    fn pr_spinodal_closed_form() {
        let m = GasModel::pr_reduced(3.0).unwrap();
        let t = m.closed_form_spinodal_t(3.0).unwrap();
        assert!((t - 8.0 / 49.0).abs() < 1e-15);
        for &v in &[1.2, 3.0, 15.0] {
            let t = m.closed_form_spinodal_t(v).unwrap();
            assert!(m.derivs(t, v).vv.abs() < 1e-12);
        }
    }

    #[test]
    fn pr_kappa_polynomial() {
        // φ_vv = −poly / (T (v−1)² (v²+2v−1)²)
        let m = GasModel::pr_reduced(3.0).unwrap();
        let (t, v) = (1.0f64, 2.0f64);
        let poly = t * v.powi(4) + (4.0 * t - 2.0) * v.powi(3) + (2.0 * t + 2.0) * v * v + (2.0 - 4.0 * t) * v + t - 2.0;
        let expected = -poly / (t * (v - 1.0).powi(2) * (v * v + 2.0 * v - 1.0).powi(2));
        assert!(rel(m.derivs(t, v).vv, expected) < 1e-14);
    }

    #[test]
    fn virial_reduces_to_ideal() {
        let ideal = GasModel::ideal(3.0).unwrap();
        let vir = GasModel::virial(VirialSpec { n: 3.0, coefficients: vec![] }).unwrap();
        for &(t, v) in &[(0.3, 0.2), (2.0, 4.0), (50.0, 1e3)] {
            assert_eq!(ideal.derivs(t, v), vir.derivs(t, v));
        }
        let vir0 = GasModel::virial(VirialSpec {
            n: 3.0,
            coefficients: vec![InversePowerSeries::constant(0.0), InversePowerSeries::new(vec![0.0, 0.0])],
        })
        .unwrap();
        assert_eq!(vir0.v_min(), 0.0);
        assert_eq!(ideal.derivs(2.0, 4.0), vir0.derivs(2.0, 4.0));
    }

    #[test]
    fn virial_compressibility() {
        let b = 0.4;
        let m = GasModel::virial(VirialSpec { n: 3.0, coefficients: vec![InversePowerSeries::constant(b)] }).unwrap();
        assert!((m.v_min() - 0.8).abs() < 1e-15);
        for &v in &[1.0, 3.0, 10.0] {
            let z = v * m.derivs(1.3, v).v;
            assert!(rel(z, 1.0 + b / v) < 1e-14);
        }
    }

    #[test]
    fn virial_energy_expansion() {
        // A₁ = −1/T: ε = RT(n/2 − T A₁'/v) = RT(3/2 − 1/(T v))
        let m = GasModel::virial(VirialSpec { n: 3.0, coefficients: vec![InversePowerSeries::new(vec![0.0, -1.0])] })
            .unwrap();
        for &(t, v) in &[(1.0, 5.0), (2.5, 40.0)] {
            let s = evaluate_state(&m, t, v).unwrap();
            assert!(rel(s.eps, t * (1.5 - 1.0 / (t * v))) < 1e-13);
        }
    }

    #[test]
    fn bad_parameters_rejected() {
        assert!(matches!(GasModel::ideal(0.0), Err(Error::Param(_))));
        assert!(matches!(GasModel::vdw_reduced(-1.0), Err(Error::Param(_))));
        assert!(matches!(GasModel::pr_reduced(f64::NAN), Err(Error::Param(_))));
        assert!(ReductionMap::vdw(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn compatibility_of_physical_pairs() {
        let vdw = ReductionMap::vdw(1.36, 0.0318, 8.314).unwrap();
        let (a, b) = vdw.physical_state_equations(3.0);
        for &(t, v) in &[(300.0, 0.1), (150.0, 0.05), (500.0, 2.0)] {
            let r = compatibility_residual(&a, &b, t, v);
            assert!(r.abs() <= 1e-6, "vdw residual {r}");
        }
        let pr = ReductionMap::pr(2.0, 0.5, 1.0).unwrap();
        let (a, b) = pr.physical_state_equations(3.0);
        for &(t, v) in &[(1.0, 1.5), (3.0, 4.0), (0.5, 20.0)] {
            let r = compatibility_residual(&a, &b, t, v);
            assert!(r.abs() <= 1e-6, "pr residual {r}");
        }
        let bad = compatibility_residual(|t, v| t / v, |t, v| t * v, 1.0, 1.0);
        assert!(bad.abs() > 1e-3);
    }

    #[test]
    fn reduction_matches_reduced_equations() {
        let map = ReductionMap::vdw(1.36, 0.0318, 8.314).unwrap();
        let (p, e) = map.physical_state_equations(3.0);
        let model = map.reduced_model(3.0).unwrap();
        let (t_phys, v_phys) = (120.0, 0.2);
        let phys = StateTuple { t: t_phys, v: v_phys, p: p(t_phys, v_phys), eps: e(t_phys, v_phys), sigma: 0.0 };
        let red = map.to_reduced(phys);
        let s = evaluate_state(&model, red.t, red.v).unwrap();
        assert!(rel(s.p, red.p) < 1e-12);
        assert!(rel(s.eps, red.eps) < 1e-12);

        let map = ReductionMap::pr(2.0, 0.5, 1.3).unwrap();
        let (p, e) = map.physical_state_equations(3.0);
        let model = map.reduced_model(3.0).unwrap();
        let (t_phys, v_phys) = (0.8, 1.7);
        let phys = StateTuple { t: t_phys, v: v_phys, p: p(t_phys, v_phys), eps: e(t_phys, v_phys), sigma: 0.0 };
        let red = map.to_reduced(phys);
        let s = evaluate_state(&model, red.t, red.v).unwrap();
        assert!(rel(s.p, red.p) < 1e-12);
        assert!(rel(s.eps, red.eps) < 1e-12);
    }
}
