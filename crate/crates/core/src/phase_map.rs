//! Phase labels for points of a filtration solution.
//!
//! A point `(v, T)` below the critical temperature is liquid left of the
//! binodal, gas right of it and intermediate (condensing) inside. The binodal
//! is tabulated once and interpolated monotonically in `T`.

use std::collections::BTreeMap;
use std::fmt;

use crate::equilibrium::{CoexistencePoint, CoexistenceSolver, CriticalPoint};
use crate::error::{Error, Result};
use crate::filtration::{distance, BranchState, QProfile};
use crate::laplace::HarmonicField;
use crate::models::GasModel;
use crate::numeric::interp::Pchip;

/// Width of the tie band around the binodal, resolved toward `Intermediate`.
pub const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Liquid,
    Intermediate,
    Gas,
    Supercritical,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Liquid => "liquid",
            Phase::Intermediate => "intermediate",
            Phase::Gas => "gas",
            Phase::Supercritical => "supercritical",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseLabel {
    pub phase: Phase,
    pub branch: usize,
    pub v: f64,
    pub t: f64,
}

/// Coexistence volumes `v₁(T) ≤ v₂(T)` on `[T_min, T*]`.
#[derive(Debug, Clone)]
pub struct BinodalTable {
    critical: CriticalPoint,
    liquid: Pchip,
    gas: Pchip,
    points: Vec<CoexistencePoint>,
}

impl BinodalTable {
    /// Tabulates the binodal on `steps` temperatures clustered toward `T*`
    /// (the volumes have a square-root singularity there).
    pub fn build(model: &GasModel, t_min: f64, steps: usize) -> Result<Self> {
        let solver = CoexistenceSolver::new(model)?;
        let tc = solver.critical().t;
        if !(t_min > 0.0 && t_min < tc) {
            return Err(Error::Param(format!("binodal table needs 0 < T_min < T* = {tc}, got {t_min}")));
        }
        if steps < 4 {
            return Err(Error::Param(format!("binodal table needs at least 4 steps, got {steps}")));
        }
        let span = tc - t_min;
        let grid: Vec<f64> = (0..steps)
            .map(|i| {
                let s = 1.0 - i as f64 / steps as f64;
                tc - span * s * s
            })
            .collect();
        let points = solver.curve(&grid)?;
        Self::from_points(solver.critical(), points)
    }

    /// Builds the table from solved points (any order) plus the critical point.
    pub fn from_points(critical: CriticalPoint, mut points: Vec<CoexistencePoint>) -> Result<Self> {
        points.retain(|p| p.t < critical.t);
        points.sort_by(|a, b| a.t.total_cmp(&b.t));
        points.dedup_by(|a, b| a.t == b.t);
        if points.len() < 2 {
            return Err(Error::Param("binodal table needs at least two subcritical points".into()));
        }
        let mut ts: Vec<f64> = points.iter().map(|p| p.t).collect();
        let mut v1: Vec<f64> = points.iter().map(|p| p.v1).collect();
        let mut v2: Vec<f64> = points.iter().map(|p| p.v2).collect();
        ts.push(critical.t);
        v1.push(critical.v);
        v2.push(critical.v);
        Ok(Self { critical, liquid: Pchip::new(ts.clone(), v1)?, gas: Pchip::new(ts, v2)?, points })
    }

    pub fn critical(&self) -> CriticalPoint {
        self.critical
    }

    pub fn t_min(&self) -> f64 {
        self.liquid.x_min()
    }

    pub fn points(&self) -> &[CoexistencePoint] {
        &self.points
    }

    /// `(v₁(T), v₂(T))`.
    pub fn volumes(&self, t: f64) -> Result<(f64, f64)> {
        if t < self.t_min() {
            return Err(Error::Extrapolation { t, t_min: self.t_min() });
        }
        let t = t.min(self.critical.t);
        Ok((self.liquid.eval(t), self.gas.eval(t)))
    }

    pub fn classify(&self, v: f64, t: f64) -> Result<Phase> {
        if t >= self.critical.t {
            return Ok(Phase::Supercritical);
        }
        let (v1, v2) = self.volumes(t)?;
        Ok(if v < v1 - TIE_TOL {
            Phase::Liquid
        } else if v > v2 + TIE_TOL {
            Phase::Gas
        } else {
            Phase::Intermediate
        })
    }
}

pub fn classify(model: &GasModel, binodal: &BinodalTable, v: f64, t: f64) -> Result<Phase> {
    model.check_domain(t, v)?;
    binodal.classify(v, t)
}

fn label_states(binodal: &BinodalTable, states: &[BranchState]) -> Result<Vec<PhaseLabel>> {
    states
        .iter()
        .map(|s| Ok(PhaseLabel { phase: binodal.classify(s.v, s.t)?, branch: s.branch, v: s.v, t: s.t }))
        .collect()
}

/// Regular sampling lattice, endpoints included, in the field's reduced
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingGrid {
    pub lower: [f64; 3],
    pub upper: [f64; 3],
    pub points: [usize; 3],
}

impl SamplingGrid {
    /// The nodes of the field's own finite-difference grid.
    pub fn of_field(hf: &HarmonicField) -> Self {
        let d = hf.domain();
        Self { lower: d.lower(), upper: d.upper(), points: d.nodes() }
    }

    fn validate(&self) -> Result<()> {
        for a in 0..3 {
            if self.points[a] < 2 || !(self.upper[a] > self.lower[a]) {
                return Err(Error::Param(format!("invalid sampling grid {self:?}")));
            }
        }
        Ok(())
    }

    pub fn point(&self, idx: [usize; 3]) -> [f64; 3] {
        std::array::from_fn(|a| {
            let s = idx[a] as f64 / (self.points[a] - 1) as f64;
            if idx[a] + 1 == self.points[a] {
                self.upper[a]
            } else {
                self.lower[a] + s * (self.upper[a] - self.lower[a])
            }
        })
    }

    fn flat(&self, idx: [usize; 3]) -> usize {
        (idx[0] * self.points[1] + idx[1]) * self.points[2] + idx[2]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPoint {
    /// Physical coordinates.
    pub x: [f64; 3],
    pub u: f64,
    /// One label per branch solving `Q(v) = u`; empty if no branch does or
    /// the point coincides with a source.
    pub labels: Vec<PhaseLabel>,
}

/// Location where the label on `branch` changes along a grid line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interface {
    pub branch: usize,
    pub from: Phase,
    pub to: Phase,
    /// Physical coordinates.
    pub x: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledGrid {
    pub grid: SamplingGrid,
    pub points: Vec<LabeledPoint>,
    pub interfaces: Vec<Interface>,
}

/// Distance statistics of one family of interfaces from a centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusSummary {
    pub branch: usize,
    pub inner: Phase,
    pub outer: Phase,
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl LabeledGrid {
    /// Groups interfaces by branch and phase pair (ordered inner → outer
    /// with respect to `centre`) and reports their distances from it.
    pub fn interface_radii(&self, centre: [f64; 3]) -> Vec<RadiusSummary> {
        let mut groups: BTreeMap<(usize, Phase, Phase), Vec<f64>> = BTreeMap::new();
        for itf in &self.interfaces {
            let key = if itf.from <= itf.to {
                (itf.branch, itf.from, itf.to)
            } else {
                (itf.branch, itf.to, itf.from)
            };
            groups.entry(key).or_default().push(distance(itf.x, centre));
        }
        groups
            .into_iter()
            .map(|((branch, a, b), rs)| {
                let count = rs.len();
                let mean = rs.iter().sum::<f64>() / count as f64;
                let min = rs.iter().copied().fold(f64::INFINITY, f64::min);
                let max = rs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let (inner, outer) = self.radial_order(branch, a, b, centre);
                RadiusSummary { branch, inner, outer, count, mean, min, max }
            })
            .collect()
    }

    fn radial_order(&self, branch: usize, a: Phase, b: Phase, centre: [f64; 3]) -> (Phase, Phase) {
        let mut ra = (0.0, 0usize);
        let mut rb = (0.0, 0usize);
        for p in &self.points {
            for l in p.labels.iter().filter(|l| l.branch == branch) {
                let r = distance(p.x, centre);
                if l.phase == a {
                    ra = (ra.0 + r, ra.1 + 1);
                } else if l.phase == b {
                    rb = (rb.0 + r, rb.1 + 1);
                }
            }
        }
        let mean = |s: (f64, usize)| if s.1 == 0 { f64::NAN } else { s.0 / s.1 as f64 };
        if mean(rb) < mean(ra) {
            (b, a)
        } else {
            (a, b)
        }
    }
}

/// Labels `(v, T)` on every branch at each lattice point and locates label
/// changes between neighbouring points by bisection along the grid line.
pub fn map_field(hf: &HarmonicField, profile: &QProfile, binodal: &BinodalTable, grid: &SamplingGrid) -> Result<LabeledGrid> {
    grid.validate()?;
    let label_at = |y: [f64; 3]| -> Result<Option<(f64, Vec<PhaseLabel>)>> {
        match hf.u_reduced(y) {
            Ok(u) => Ok(Some((u, label_states(binodal, &profile.states(u)?)?))),
            Err(Error::SingularPoint(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };

    let [nx, ny, nz] = grid.points;
    let mut points = Vec::with_capacity(nx * ny * nz);
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                let y = grid.point([i, j, k]);
                let (u, labels) = label_at(y)?.unwrap_or((f64::NAN, Vec::new()));
                points.push(LabeledPoint { x: hf.to_physical(y), u, labels });
            }
        }
    }

    let mut interfaces = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                let idx = [i, j, k];
                for axis in 0..3 {
                    if idx[axis] + 1 >= grid.points[axis] {
                        continue;
                    }
                    let mut nb = idx;
                    nb[axis] += 1;
                    let (pa, pb) = (&points[grid.flat(idx)], &points[grid.flat(nb)]);
                    for la in &pa.labels {
                        let Some(lb) = pb.labels.iter().find(|l| l.branch == la.branch) else { continue };
                        if la.phase == lb.phase {
                            continue;
                        }
                        let ya = grid.point(idx);
                        let yb = grid.point(nb);
                        if let Some(y) = refine(&label_at, ya, yb, la.branch, la.phase)? {
                            interfaces.push(Interface { branch: la.branch, from: la.phase, to: lb.phase, x: hf.to_physical(y) });
                        }
                    }
                }
            }
        }
    }
    Ok(LabeledGrid { grid: *grid, points, interfaces })
}

type LabelFn<'a> = dyn Fn([f64; 3]) -> Result<Option<(f64, Vec<PhaseLabel>)>> + 'a;

// Bisection on the segment for the last point still carrying `phase_a`.
fn refine(label_at: &LabelFn<'_>, ya: [f64; 3], yb: [f64; 3], branch: usize, phase_a: Phase) -> Result<Option<[f64; 3]>> {
    let lerp = |s: f64| -> [f64; 3] { std::array::from_fn(|c| ya[c] + s * (yb[c] - ya[c])) };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..52 {
        let mid = 0.5 * (lo + hi);
        let Some((_, labels)) = label_at(lerp(mid))? else { return Ok(None) };
        match labels.iter().find(|l| l.branch == branch) {
            Some(l) if l.phase == phase_a => lo = mid,
            Some(_) => hi = mid,
            None => return Ok(None),
        }
    }
    Ok(Some(lerp(0.5 * (lo + hi))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vdw_table() -> BinodalTable {
        BinodalTable::build(&GasModel::vdw_reduced(3.0).unwrap(), 0.5, 120).unwrap()
    }

    #[test]
    fn classification_fixtures() {
        let m = GasModel::vdw_reduced(3.0).unwrap();
        let b = vdw_table();
        assert_eq!(classify(&m, &b, 0.8, 1.1).unwrap(), Phase::Supercritical);
        assert_eq!(classify(&m, &b, 1.0, 0.9).unwrap(), Phase::Intermediate);
        assert_eq!(classify(&m, &b, 5.0, 0.9).unwrap(), Phase::Gas);
        assert_eq!(classify(&m, &b, 0.5, 0.9).unwrap(), Phase::Liquid);
        assert!(matches!(classify(&m, &b, 1.0, 0.3), Err(Error::Extrapolation { .. })));
    }

    #[test]
    fn interpolated_volumes_match_direct_solves() {
        let m = GasModel::vdw_reduced(3.0).unwrap();
        let b = vdw_table();
        let solver = CoexistenceSolver::new(&m).unwrap();
        for t in [0.55, 0.71, 0.85, 0.93, 0.99] {
            let cp = solver.at_t(t).unwrap();
            let (v1, v2) = b.volumes(t).unwrap();
            assert!((v1 - cp.v1).abs() < 1e-4 * cp.v1, "T={t}: {v1} vs {}", cp.v1);
            assert!((v2 - cp.v2).abs() < 1e-4 * cp.v2, "T={t}: {v2} vs {}", cp.v2);
        }
    }

    #[test]
    fn ties_go_to_intermediate() {
        let b = vdw_table();
        let (v1, v2) = b.volumes(0.9).unwrap();
        assert_eq!(b.classify(v1, 0.9).unwrap(), Phase::Intermediate);
        assert_eq!(b.classify(v2 + 0.5e-9, 0.9).unwrap(), Phase::Intermediate);
        assert_eq!(b.classify(v2 + 1e-8, 0.9).unwrap(), Phase::Gas);
    }
}
