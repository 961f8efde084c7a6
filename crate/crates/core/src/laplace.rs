//! Dirichlet problem for the harmonic field `u = Σ Iᵢ/(4π|x − aᵢ|) + u₀` on a box.
//!
//! Sources are kept analytic; only the smooth correction `u₀` lives on the
//! grid. `u₀` solves the 7-point discrete Laplace equation with Dirichlet data
//! by conjugate gradients in a fixed sequential order, so results are
//! bit-reproducible.

use crate::error::{Error, Result};
use crate::filtration::{distance, AnisotropicMap, BranchState, QProfile, SourceSpec};

pub const CG_TOL: f64 = 1e-12;
pub const CG_MAX_ITER: usize = 100_000;

/// Axis-aligned box with `n[i]` interior nodes per axis. Node `0` and
/// `n[i] + 1` sit on the faces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxDomain {
    lower: [f64; 3],
    upper: [f64; 3],
    n: [usize; 3],
}

impl BoxDomain {
    pub fn new(lower: [f64; 3], upper: [f64; 3], n: [usize; 3]) -> Result<Self> {
        for i in 0..3 {
            if !(lower[i].is_finite() && upper[i].is_finite() && upper[i] > lower[i]) {
                return Err(Error::Param(format!("box corners must satisfy lower < upper, got {lower:?} / {upper:?}")));
            }
            if n[i] < 8 {
                return Err(Error::Param(format!("grid resolution must be at least 8 per axis, got {n:?}")));
            }
        }
        Ok(Self { lower, upper, n })
    }

    pub fn cube(half_width: f64, n: usize) -> Result<Self> {
        Self::new([-half_width; 3], [half_width; 3], [n; 3])
    }

    pub fn lower(&self) -> [f64; 3] {
        self.lower
    }

    pub fn upper(&self) -> [f64; 3] {
        self.upper
    }

    pub fn resolution(&self) -> [usize; 3] {
        self.n
    }

    pub fn spacing(&self) -> [f64; 3] {
        std::array::from_fn(|i| (self.upper[i] - self.lower[i]) / (self.n[i] + 1) as f64)
    }

    /// Nodes per axis including both faces.
    pub fn nodes(&self) -> [usize; 3] {
        self.n.map(|k| k + 2)
    }

    pub fn node_count(&self) -> usize {
        self.nodes().iter().product()
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        let [_, ny, nz] = self.nodes();
        (i * ny + j) * nz + k
    }

    pub fn node(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        let h = self.spacing();
        let idx = [i, j, k];
        std::array::from_fn(|a| {
            if idx[a] == self.n[a] + 1 {
                self.upper[a]
            } else {
                self.lower[a] + idx[a] as f64 * h[a]
            }
        })
    }

    pub fn is_boundary(&self, i: usize, j: usize, k: usize) -> bool {
        let idx = [i, j, k];
        (0..3).any(|a| idx[a] == 0 || idx[a] == self.n[a] + 1)
    }

    pub fn contains(&self, x: [f64; 3]) -> bool {
        (0..3).all(|a| x[a] >= self.lower[a] && x[a] <= self.upper[a])
    }

    /// Sources must be interior and at least `2h` away from every face.
    pub fn check_source(&self, x: [f64; 3]) -> Result<()> {
        let h = self.spacing();
        for a in 0..3 {
            if !(x[a] - self.lower[a] >= 2.0 * h[a] && self.upper[a] - x[a] >= 2.0 * h[a]) {
                return Err(Error::Param(format!("source at {x:?} is not at least 2h inside the box")));
            }
        }
        Ok(())
    }
}

/// Node values on a [`BoxDomain`], boundary nodes included.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    domain: BoxDomain,
    values: Vec<f64>,
    residual: f64,
    iterations: usize,
}

impl GridField {
    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.domain.index(i, j, k)]
    }

    /// Final relative residual `‖b − Au‖ / ‖b‖` of the linear solve.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Trilinear interpolation; points outside the box are an error.
    pub fn interpolate(&self, x: [f64; 3]) -> Result<f64> {
        let d = &self.domain;
        if !d.contains(x) {
            return Err(Error::Param(format!("point {x:?} lies outside the box")));
        }
        let h = d.spacing();
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..3 {
            let s = (x[a] - d.lower[a]) / h[a];
            let cell = (s.floor() as usize).min(d.n[a]);
            base[a] = cell;
            frac[a] = (s - cell as f64).clamp(0.0, 1.0);
        }
        let mut acc = 0.0;
        for corner in 0..8 {
            let off = [corner >> 2 & 1, corner >> 1 & 1, corner & 1];
            let w: f64 = (0..3).map(|a| if off[a] == 1 { frac[a] } else { 1.0 - frac[a] }).product();
            if w != 0.0 {
                acc += w * self.at(base[0] + off[0], base[1] + off[1], base[2] + off[2]);
            }
        }
        Ok(acc)
    }
}

/// Harmonic interpolant of `boundary_values` on the box (7-point stencil).
pub fn solve_u0(domain: &BoxDomain, boundary_values: impl Fn([f64; 3]) -> f64) -> Result<GridField> {
    solve_u0_with(domain, |x| Ok(boundary_values(x)), CG_TOL, CG_MAX_ITER)
}

pub fn solve_u0_with(
    domain: &BoxDomain,
    boundary_values: impl Fn([f64; 3]) -> Result<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<GridField> {
    let [nx, ny, nz] = domain.nodes();
    let mut values = vec![0.0; domain.node_count()];
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                if domain.is_boundary(i, j, k) {
                    let x = domain.node(i, j, k);
                    let b = boundary_values(x)?;
                    if !b.is_finite() {
                        return Err(Error::Param(format!("boundary value at {x:?} is not finite")));
                    }
                    values[domain.index(i, j, k)] = b;
                }
            }
        }
    }
    let op = Stencil::new(domain);
    let rhs = op.boundary_rhs(&values);
    let (sol, residual, iterations) = conjugate_gradient(&op, &rhs, tol, max_iter)?;
    op.scatter(&sol, &mut values);
    Ok(GridField { domain: *domain, values, residual, iterations })
}

/// Interior-only 7-point operator `Σ_a (2u − u₋ − u₊)/h_a²`.
struct Stencil {
    n: [usize; 3],
    w: [f64; 3],
}

impl Stencil {
    fn new(d: &BoxDomain) -> Self {
        Self { n: d.n, w: d.spacing().map(|h| 1.0 / (h * h)) }
    }

    fn len(&self) -> usize {
        self.n.iter().product()
    }

    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n[1] + j) * self.n[2] + k
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let [nx, ny, nz] = self.n;
        let [wx, wy, wz] = self.w;
        let diag = 2.0 * (wx + wy + wz);
        for i in 0..nx {
            for j in 0..ny {
                for k in 0..nz {
                    let c = self.idx(i, j, k);
                    let mut s = diag * x[c];
                    if i > 0 {
                        s -= wx * x[c - ny * nz];
                    }
                    if i + 1 < nx {
                        s -= wx * x[c + ny * nz];
                    }
                    if j > 0 {
                        s -= wy * x[c - nz];
                    }
                    if j + 1 < ny {
                        s -= wy * x[c + nz];
                    }
                    if k > 0 {
                        s -= wz * x[c - 1];
                    }
                    if k + 1 < nz {
                        s -= wz * x[c + 1];
                    }
                    out[c] = s;
                }
            }
        }
    }

    /// Contribution of the Dirichlet nodes moved to the right-hand side.
    fn boundary_rhs(&self, full: &[f64]) -> Vec<f64> {
        let [nx, ny, nz] = self.n;
        let (fy, fz) = (ny + 2, nz + 2);
        let at = |i: usize, j: usize, k: usize| full[(i * fy + j) * fz + k];
        let mut b = vec![0.0; self.len()];
        for i in 1..=nx {
            for j in 1..=ny {
                for k in 1..=nz {
                    let mut s = 0.0;
                    if i == 1 {
                        s += self.w[0] * at(0, j, k);
                    }
                    if i == nx {
                        s += self.w[0] * at(nx + 1, j, k);
                    }
                    if j == 1 {
                        s += self.w[1] * at(i, 0, k);
                    }
                    if j == ny {
                        s += self.w[1] * at(i, ny + 1, k);
                    }
                    if k == 1 {
                        s += self.w[2] * at(i, j, 0);
                    }
                    if k == nz {
                        s += self.w[2] * at(i, j, nz + 1);
                    }
                    b[self.idx(i - 1, j - 1, k - 1)] = s;
                }
            }
        }
        b
    }

    fn scatter(&self, interior: &[f64], full: &mut [f64]) {
        let [nx, ny, nz] = self.n;
        let (fy, fz) = (ny + 2, nz + 2);
        for i in 0..nx {
            for j in 0..ny {
                for k in 0..nz {
                    full[((i + 1) * fy + j + 1) * fz + k + 1] = interior[self.idx(i, j, k)];
                }
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn conjugate_gradient(op: &Stencil, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, f64, usize)> {
    let n = op.len();
    let mut x = vec![0.0; n];
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok((x, 0.0, 0));
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let mut history = Vec::new();
    for it in 1..=max_iter {
        op.apply(&p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let rel = rr_new.sqrt() / b_norm;
        history.push(rel);
        if rel <= tol {
            // recompute the true residual to guard against drift
            op.apply(&x, &mut ap);
            let true_rel = b.iter().zip(&ap).map(|(bi, ai)| (bi - ai).powi(2)).sum::<f64>().sqrt() / b_norm;
            return Ok((x, true_rel, it));
        }
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    Err(Error::Convergence { what: "conjugate gradient Laplace solve".into(), iterations: max_iter, trace: history })
}

/// `u = Σ Iᵢ/(4π|y − aᵢ|) + u₀(y)` in (possibly anisotropy-reduced)
/// coordinates `y`. Query points are given in physical coordinates.
#[derive(Debug, Clone)]
pub struct HarmonicField {
    sources: Vec<SourceSpec>,
    u0: GridField,
    map: Option<AnisotropicMap>,
    boundary_branch: usize,
}

impl HarmonicField {
    /// Sources in reduced coordinates.
    pub fn sources(&self) -> &[SourceSpec] {
        &self.sources
    }

    pub fn u0(&self) -> &GridField {
        &self.u0
    }

    pub fn domain(&self) -> &BoxDomain {
        self.u0.domain()
    }

    pub fn residual(&self) -> f64 {
        self.u0.residual()
    }

    pub fn coordinate_map(&self) -> Option<&AnisotropicMap> {
        self.map.as_ref()
    }

    /// Branch of `Q` that the boundary volumes belong to.
    pub fn boundary_branch(&self) -> usize {
        self.boundary_branch
    }

    pub fn to_reduced(&self, x: [f64; 3]) -> [f64; 3] {
        self.map.map_or(x, |m| m.forward(x))
    }

    pub fn to_physical(&self, y: [f64; 3]) -> [f64; 3] {
        self.map.map_or(y, |m| m.inverse(y))
    }

    /// `u` at a point given in reduced coordinates.
    pub fn u_reduced(&self, y: [f64; 3]) -> Result<f64> {
        let mut s = 0.0;
        for src in &self.sources {
            let r = distance(y, src.position);
            if r == 0.0 {
                return Err(Error::SingularPoint(self.to_physical(y)));
            }
            s += src.intensity / (4.0 * std::f64::consts::PI * r);
        }
        Ok(s + self.u0.interpolate(y)?)
    }

    pub fn u(&self, x: [f64; 3]) -> Result<f64> {
        self.u_reduced(self.to_reduced(x))
    }

    fn source_sum(sources: &[SourceSpec], y: [f64; 3]) -> f64 {
        sources
            .iter()
            .map(|s| s.intensity / (4.0 * std::f64::consts::PI * distance(y, s.position)))
            .sum()
    }
}

/// Builds `u` with `u₀|∂D = Q(v₀) − Σ Iᵢ/(4π|x − aᵢ|)`.
///
/// The box is given in reduced coordinates; `sources` and the argument of
/// `v0_boundary` are physical. All boundary volumes must fall on one branch
/// of the profile.
pub fn assemble_dirichlet_field(
    domain: &BoxDomain,
    profile: &QProfile,
    sources: &[SourceSpec],
    v0_boundary: impl Fn([f64; 3]) -> f64,
) -> Result<HarmonicField> {
    crate::filtration::check_sources(sources)?;
    let map = profile.medium().coordinate_map()?;
    let to_reduced = |x: [f64; 3]| map.map_or(x, |m| m.forward(x));
    let to_physical = |y: [f64; 3]| map.map_or(y, |m| m.inverse(y));
    let reduced: Vec<SourceSpec> = sources
        .iter()
        .map(|s| SourceSpec { position: to_reduced(s.position), intensity: s.intensity })
        .collect();
    for s in &reduced {
        domain.check_source(s.position)?;
    }

    let branch = std::cell::Cell::new(None::<usize>);
    let memo = std::cell::Cell::new((f64::NAN, f64::NAN));
    let boundary = |y: [f64; 3]| -> Result<f64> {
        let v0 = v0_boundary(to_physical(y));
        let id = profile
            .branch_of(v0)
            .map(|b| b.id)
            .ok_or_else(|| Error::BranchAmbiguity(format!("boundary volume {v0} is not inside any monotone branch")))?;
        match branch.get() {
            None => branch.set(Some(id)),
            Some(prev) if prev != id => {
                return Err(Error::BranchAmbiguity(format!(
                    "boundary volumes span branches {prev} and {id}"
                )))
            }
            _ => {}
        }
        let (v_last, q_last) = memo.get();
        let q = if v_last == v0 {
            q_last
        } else {
            let q = profile.q_at(v0)?;
            memo.set((v0, q));
            q
        };
        Ok(q - HarmonicField::source_sum(&reduced, y))
    };
    let u0 = solve_u0_with(domain, boundary, CG_TOL, CG_MAX_ITER)?;
    Ok(HarmonicField { sources: reduced, u0, map, boundary_branch: branch.get().unwrap_or(0) })
}

/// All `(v, T, branch)` with `Q(v) = u(x)`.
pub fn field_value(hf: &HarmonicField, profile: &QProfile, x: [f64; 3]) -> Result<Vec<BranchState>> {
    profile.states(hf.u(x)?)
}
