//! Filtration potential `Q(v)` along an isentrope and its inversion.
//!
//! On an isentrope the steady adiabatic filtration equations reduce to
//! Laplace's equation for `Q(v(x))` with
//!
//! ```text
//! Q'(v) = C_s(v) k / (v³ μ)
//! ```
//!
//! (`k` replaced by 1 for homogeneous anisotropic media, where the
//! anisotropy is moved into the coordinates). Where the isentrope enters the
//! region `C_s < 0`, `Q` folds and the inverse `v = Q⁻¹(u)` is multivalued;
//! [`QProfile`] keeps track of the maximal monotone branches.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::isentrope::Isentrope;
use crate::numeric::quad::{integrate, QuadOptions};
use crate::numeric::roots::{bisect, newton_bracketed, sign_changes};

/// Target accuracy of `Q` inversion, `|Q(v) − u|`.
pub const INVERSION_TOL: f64 = 1e-10;

const PANEL_OPTS: QuadOptions = QuadOptions { abs_tol: 1e-12, rel_tol: 1e-13, max_panels: 4000 };

#[derive(Debug, Clone, PartialEq)]
pub enum Permeability {
    Isotropic(f64),
    /// Eigenvalues `k₁, k₂, k₃` with the eigenvectors as rows of `frame`.
    HomogeneousAnisotropic { eigs: [f64; 3], frame: [[f64; 3]; 3] },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MediumSpec {
    pub mu: f64,
    pub permeability: Permeability,
}

impl MediumSpec {
    pub fn isotropic(mu: f64, k: f64) -> Result<Self> {
        let m = Self { mu, permeability: Permeability::Isotropic(k) };
        m.validate()?;
        Ok(m)
    }

    pub fn anisotropic(mu: f64, eigs: [f64; 3], frame: [[f64; 3]; 3]) -> Result<Self> {
        let m = Self { mu, permeability: Permeability::HomogeneousAnisotropic { eigs, frame } };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::Param(format!("viscosity must be positive, got {}", self.mu)));
        }
        match &self.permeability {
            Permeability::Isotropic(k) if k.is_finite() && *k > 0.0 => Ok(()),
            Permeability::Isotropic(k) => Err(Error::Param(format!("permeability must be positive, got {k}"))),
            Permeability::HomogeneousAnisotropic { eigs, frame } => AnisotropicMap::new(*eigs, *frame).map(|_| ()),
        }
    }

    /// Factor in front of `C_s / v³` in `Q'`.
    pub fn q_factor(&self) -> f64 {
        match self.permeability {
            Permeability::Isotropic(k) => k / self.mu,
            Permeability::HomogeneousAnisotropic { .. } => 1.0 / self.mu,
        }
    }

    /// Coordinate map making the filtration equation isotropic, if needed.
    pub fn coordinate_map(&self) -> Result<Option<AnisotropicMap>> {
        match &self.permeability {
            Permeability::Isotropic(_) => Ok(None),
            Permeability::HomogeneousAnisotropic { eigs, frame } => AnisotropicMap::new(*eigs, *frame).map(Some),
        }
    }
}

/// `y_i = (e_i · x) / √k_i`: turns `Σ k_i ∂²q/∂ξ_i²` into the Laplacian in `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnisotropicMap {
    sqrt_k: [f64; 3],
    frame: [[f64; 3]; 3],
}

impl AnisotropicMap {
    pub fn new(eigs: [f64; 3], frame: [[f64; 3]; 3]) -> Result<Self> {
        if eigs.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
            return Err(Error::Param(format!("permeability eigenvalues must be positive, got {eigs:?}")));
        }
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|c| frame[i][c] * frame[j][c]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (dot - want).abs() > 1e-12 {
                    return Err(Error::Param("permeability eigenframe is not orthonormal".into()));
                }
            }
        }
        Ok(Self { sqrt_k: eigs.map(f64::sqrt), frame })
    }

    pub fn forward(&self, x: [f64; 3]) -> [f64; 3] {
        std::array::from_fn(|i| (0..3).map(|c| self.frame[i][c] * x[c]).sum::<f64>() / self.sqrt_k[i])
    }

    pub fn inverse(&self, y: [f64; 3]) -> [f64; 3] {
        std::array::from_fn(|c| (0..3).map(|i| self.sqrt_k[i] * y[i] * self.frame[i][c]).sum())
    }
}

pub fn anisotropic_to_isotropic(medium: &MediumSpec, x: [f64; 3]) -> Result<[f64; 3]> {
    match medium.coordinate_map()? {
        Some(map) => Ok(map.forward(x)),
        None => Err(Error::Param("medium is isotropic".into())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QSample {
    pub v: f64,
    pub q: f64,
    pub dq: f64,
}

/// Maximal interval on which `Q` is strictly monotone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub id: usize,
    pub v_lo: f64,
    pub v_hi: f64,
    pub q_lo: f64,
    pub q_hi: f64,
    pub increasing: bool,
    /// Whether the lower (upper) end is a fold point `Q' = 0`; fold ends are
    /// excluded from inversion.
    pub lo_is_fold: bool,
    pub hi_is_fold: bool,
}

impl Branch {
    pub fn q_min(&self) -> f64 {
        self.q_lo.min(self.q_hi)
    }

    pub fn q_max(&self) -> f64 {
        self.q_lo.max(self.q_hi)
    }

    pub fn contains_v(&self, v: f64) -> bool {
        let above = if self.lo_is_fold { v > self.v_lo } else { v >= self.v_lo };
        let below = if self.hi_is_fold { v < self.v_hi } else { v <= self.v_hi };
        above && below
    }

    fn q_at_min_is_fold(&self) -> bool {
        if self.increasing { self.lo_is_fold } else { self.hi_is_fold }
    }

    fn q_at_max_is_fold(&self) -> bool {
        if self.increasing { self.hi_is_fold } else { self.lo_is_fold }
    }

    pub fn contains_u(&self, u: f64) -> bool {
        let above = if self.q_at_min_is_fold() { u > self.q_min() } else { u >= self.q_min() };
        let below = if self.q_at_max_is_fold() { u < self.q_max() } else { u <= self.q_max() };
        above && below
    }
}

/// One solution of `Q(v) = u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inverse {
    pub v: f64,
    pub branch: usize,
}

/// A volume/temperature pair on one branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchState {
    pub v: f64,
    pub t: f64,
    pub branch: usize,
}

#[derive(Debug, Clone)]
pub struct QProfile {
    iso: Isentrope,
    medium: MediumSpec,
    v_ref: f64,
    samples: Vec<QSample>,
    branches: Vec<Branch>,
}

/// Tabulates `Q` on a geometric grid over `v_range`, normalised by
/// `Q(v_range.1) = 0`, and splits it into monotone branches.
pub fn build_q_profile(iso: &Isentrope, medium: &MediumSpec, v_range: (f64, f64), samples: usize) -> Result<QProfile> {
    QProfile::build(iso.clone(), medium.clone(), v_range, samples)
}

impl QProfile {
    pub fn build(iso: Isentrope, medium: MediumSpec, v_range: (f64, f64), samples: usize) -> Result<Self> {
        medium.validate()?;
        let (a, b) = v_range;
        if samples < 64 {
            return Err(Error::Param(format!("at least 64 samples required, got {samples}")));
        }
        if !(a.is_finite() && b.is_finite() && a > 0.0 && b > a) {
            return Err(Error::Param(format!("invalid volume range [{a}, {b}]")));
        }
        iso.model().check_domain(1.0, a)?;
        let factor = medium.q_factor();
        let dq = |v: f64| -> Result<f64> { Ok(factor * iso.sound_speed_sq(v)? / (v * v * v)) };

        let ratio = b / a;
        let grid: Vec<f64> = (0..samples)
            .map(|i| match i {
                0 => a,
                i if i + 1 == samples => b,
                i => a * ratio.powf(i as f64 / (samples - 1) as f64),
            })
            .collect();
        let dqs = grid.iter().map(|&v| dq(v)).collect::<Result<Vec<_>>>()?;

        let mut qs = vec![0.0; samples];
        for i in (0..samples - 1).rev() {
            let panel = integrate_dq(&iso, factor, grid[i], grid[i + 1])?;
            qs[i] = qs[i + 1] - panel;
        }
        let sample_table: Vec<QSample> =
            (0..samples).map(|i| QSample { v: grid[i], q: qs[i], dq: dqs[i] }).collect();

        let mut folds = Vec::new();
        for i in sign_changes(&dqs) {
            let z = bisect(|v| dq(v).unwrap_or(f64::NAN), grid[i], grid[i + 1], 1e-14 * grid[i + 1])?;
            folds.push(z);
        }
        let mut ends = vec![a];
        ends.extend(&folds);
        ends.push(b);
        let rising = ends.windows(2).map(|w| Ok(dq(0.5 * (w[0] + w[1]))? > 0.0)).collect::<Result<Vec<_>>>()?;

        let mut profile = Self { iso, medium, v_ref: b, samples: sample_table, branches: vec![] };
        for (id, w) in ends.windows(2).enumerate() {
            let (lo, hi) = (w[0], w[1]);
            profile.branches.push(Branch {
                id,
                v_lo: lo,
                v_hi: hi,
                q_lo: profile.q_at(lo)?,
                q_hi: profile.q_at(hi)?,
                increasing: rising[id],
                lo_is_fold: id > 0,
                hi_is_fold: id + 1 < ends.len() - 1,
            });
        }
        Ok(profile)
    }

    pub fn isentrope(&self) -> &Isentrope {
        &self.iso
    }

    pub fn medium(&self) -> &MediumSpec {
        &self.medium
    }

    pub fn v_ref(&self) -> f64 {
        self.v_ref
    }

    pub fn v_range(&self) -> (f64, f64) {
        (self.samples[0].v, self.v_ref)
    }

    pub fn samples(&self) -> &[QSample] {
        &self.samples
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// Fold points `Q'(v) = 0` inside the range.
    pub fn folds(&self) -> Vec<f64> {
        self.branches.iter().skip(1).map(|b| b.v_lo).collect()
    }

    /// `Q'(v) = factor · C_s(v) / v³`.
    pub fn dq(&self, v: f64) -> Result<f64> {
        Ok(self.medium.q_factor() * self.iso.sound_speed_sq(v)? / (v * v * v))
    }

    /// `Q(v)` from the nearest tabulated node plus an adaptive panel.
    pub fn q_at(&self, v: f64) -> Result<f64> {
        let (a, b) = self.v_range();
        if !(v >= a && v <= b) {
            return Err(Error::Param(format!("v = {v} outside the tabulated range [{a}, {b}]")));
        }
        let i = self.samples.partition_point(|s| s.v <= v).saturating_sub(1);
        let node = self.samples[i];
        if node.v == v {
            return Ok(node.q);
        }
        Ok(node.q + integrate_dq(&self.iso, self.medium.q_factor(), node.v, v)?)
    }

    /// The branch whose closed/open interval contains `v`.
    pub fn branch_of(&self, v: f64) -> Option<&Branch> {
        self.branches.iter().find(|b| b.contains_v(v))
    }

    /// All solutions of `Q(v) = u`, ordered by `v`.
    pub fn invert(&self, u: f64) -> Vec<Inverse> {
        let mut out = Vec::new();
        for br in &self.branches {
            if !br.contains_u(u) {
                continue;
            }
            if let Ok(v) = self.solve_on_branch(br, u) {
                out.push(Inverse { v, branch: br.id });
            }
        }
        out
    }

    fn solve_on_branch(&self, br: &Branch, u: f64) -> Result<f64> {
        if u == br.q_lo && !br.lo_is_fold {
            return Ok(br.v_lo);
        }
        if u == br.q_hi && !br.hi_is_fold {
            return Ok(br.v_hi);
        }
        // narrow the bracket with the table, then polish
        let sign = if br.increasing { 1.0 } else { -1.0 };
        let mut lo = br.v_lo;
        let mut hi = br.v_hi;
        for s in &self.samples {
            if s.v <= br.v_lo || s.v >= br.v_hi {
                continue;
            }
            if sign * (s.q - u) < 0.0 {
                lo = s.v;
            } else {
                hi = s.v;
                break;
            }
        }
        let fdf = |v: f64| match (self.q_at(v), self.dq(v)) {
            (Ok(q), Ok(d)) => (q - u, d),
            _ => (f64::NAN, f64::NAN),
        };
        let f_tol = 1e-3 * INVERSION_TOL;
        let v = newton_bracketed(fdf, lo, hi, 1e-15 * hi, f_tol)?;
        Ok(v)
    }

    /// Solutions of `Q(v) = u` with the isentrope temperature attached.
    pub fn states(&self, u: f64) -> Result<Vec<BranchState>> {
        self.invert(u)
            .into_iter()
            .map(|inv| Ok(BranchState { v: inv.v, t: self.iso.tau(inv.v)?, branch: inv.branch }))
            .collect()
    }
}

fn integrate_dq(iso: &Isentrope, factor: f64, a: f64, b: f64) -> Result<f64> {
    let f = |v: f64| match iso.sound_speed_sq(v) {
        Ok(cs) => factor * cs / (v * v * v),
        Err(_) => f64::NAN,
    };
    integrate(f, a, b, PANEL_OPTS)
}

pub fn invert_q(profile: &QProfile, u: f64) -> Vec<Inverse> {
    profile.invert(u)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceSpec {
    pub position: [f64; 3],
    /// Coefficient of the kernel `1/(4π|x − a|)`.
    pub intensity: f64,
}

pub fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// `I / (4π |x − a|)`.
pub fn source_potential(src: &SourceSpec, x: [f64; 3]) -> Result<f64> {
    let r = distance(x, src.position);
    if r == 0.0 {
        return Err(Error::SingularPoint(x));
    }
    Ok(src.intensity / (4.0 * PI * r))
}

/// `v(x) = Q⁻¹(I / (4π|x − a|))` on every branch, with `T = τ(v)`.
pub fn point_source_field(profile: &QProfile, src: &SourceSpec, x: [f64; 3]) -> Result<Vec<BranchState>> {
    let u = source_potential(src, x)?;
    profile.states(u)
}

pub fn check_sources(sources: &[SourceSpec]) -> Result<()> {
    for (i, a) in sources.iter().enumerate() {
        if a.position.iter().chain([a.intensity].iter()).any(|x| !x.is_finite()) {
            return Err(Error::Param(format!("source {i} is not finite")));
        }
        for b in &sources[i + 1..] {
            if a.position == b.position {
                return Err(Error::Param(format!("duplicate source position {:?}", a.position)));
            }
        }
    }
    Ok(())
}

fn alpha_of(n: f64) -> f64 {
    1.0 + 2.0 / n
}

/// Power-law constant above which the van der Waals `Q` is invertible:
/// `(1/(4α)) (1+α)^{1+α} (2−α)^{2−α}` with `α = 1 + 2/n`.
pub fn vdw_invertibility_threshold(n: f64) -> Result<f64> {
    if !(n.is_finite() && n > 2.0) {
        return Err(Error::Param(format!("threshold requires n > 2, got {n}")));
    }
    let a = alpha_of(n);
    Ok((1.0 + a).powf(1.0 + a) * (2.0 - a).powf(2.0 - a) / (4.0 * a))
}

/// Root `v₀ > 1` of `(α−2)v³ + 3αv² + (α+2)v − α + 4 = 0`.
pub fn pr_threshold_volume(n: f64) -> Result<f64> {
    if !(n.is_finite() && n > 2.0) {
        return Err(Error::NoRoot(format!("no root with v0 > 1 for n = {n} (requires n > 2)")));
    }
    let a = alpha_of(n);
    let cubic = |v: f64| (((a - 2.0) * v + 3.0 * a) * v + (a + 2.0)) * v - a + 4.0;
    let mut hi = 2.0;
    while cubic(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e15 {
            return Err(Error::NoRoot(format!("no root with v0 > 1 for n = {n}")));
        }
    }
    bisect(cubic, 1.0, hi, 1e-15 * hi)
}

/// Power-law constant above which the Peng-Robinson `Q` is invertible:
/// `(2/α)(v₀+1)(v₀−1)^{α+1} / (v₀²+2v₀−1)²`.
pub fn pr_invertibility_threshold(n: f64) -> Result<f64> {
    let v0 = pr_threshold_volume(n)?;
    let a = alpha_of(n);
    let q = v0 * v0 + 2.0 * v0 - 1.0;
    Ok(2.0 / a * (v0 + 1.0) * (v0 - 1.0).powf(a + 1.0) / (q * q))
}
