use std::f64::consts::PI;
use std::path::Path;

use serde_json::{json, Value};

use realgas::equilibrium::{critical_point, spinodal_curve, spinodal_volumes, CoexistenceSolver};
use realgas::filtration::{point_source_field, BranchState, MediumSpec, QProfile, SourceSpec};
use realgas::isentrope::Isentrope;
use realgas::laplace::{assemble_dirichlet_field, BoxDomain, HarmonicField};
use realgas::models::{InversePowerSeries, ModelKind, VirialSpec};
use realgas::phase_map::{map_field, BinodalTable, SamplingGrid};
use realgas::thermo::{evaluate_state, heat_capacity_p, heat_capacity_v, pressure, sound_speed_sq};
use realgas::{Error, GasModel};

use crate::error::CliError;
use crate::output::{Cell, Report, Table};
use crate::scenario::{Permeability, Scenario, V0Spec};

/// Settings shared by every command, after merging flags over the scenario.
pub struct Context {
    pub model: GasModel,
    pub scenario: Scenario,
    pub sigma0: Option<f64>,
    pub power_constant: Option<f64>,
}

pub fn parse_model(spec: &str, n: f64) -> Result<GasModel, CliError> {
    let model = match spec {
        "ideal" => GasModel::ideal(n)?,
        "vdw" => GasModel::vdw_reduced(n)?,
        "pr" => GasModel::pr_reduced(n)?,
        other => match other.strip_prefix("virial:") {
            Some(file) => GasModel::virial(load_virial(Path::new(file), n)?)?,
            None => {
                return Err(CliError::Input(format!(
                    "unknown model '{other}' (expected ideal, vdw, pr or virial:<file>)"
                )))
            }
        },
    };
    Ok(model)
}

/// A virial file is a JSON list: entry `k` holds the coefficients
/// `[a₀, a₁, ...]` of `A_{k+1}(T) = Σ a_j T^{-j}`.
fn load_virial(path: &Path, n: f64) -> Result<VirialSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let terms: Vec<Vec<f64>> =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    if terms.is_empty() {
        return Err(CliError::Input(format!("{}: no virial coefficients", path.display())));
    }
    Ok(VirialSpec { n, coefficients: terms.into_iter().map(InversePowerSeries::new).collect() })
}

impl Context {
    fn isentrope(&self) -> Result<Isentrope, CliError> {
        let model = self.model.clone();
        match (self.sigma0, self.power_constant) {
            (Some(s), None) => Ok(Isentrope::new(model, s)?),
            (None, Some(c)) => Ok(Isentrope::from_power_constant(model, c)?),
            (Some(_), Some(_)) => Err(CliError::Input("give either sigma0 or the power constant, not both".into())),
            (None, None) => Err(CliError::Input("an isentrope needs --sigma0 or --c (or the scenario equivalents)".into())),
        }
    }

    fn medium(&self, mu: Option<f64>, k: Option<f64>) -> Result<MediumSpec, CliError> {
        let mu = mu.or(self.scenario.mu).unwrap_or(1.0);
        let medium = match (k, &self.scenario.permeability) {
            (Some(k), _) => MediumSpec::isotropic(mu, k)?,
            (None, Some(Permeability::Isotropic { isotropic })) => MediumSpec::isotropic(mu, *isotropic)?,
            (None, Some(Permeability::Anisotropic { eigs, frame })) => MediumSpec::anisotropic(mu, *eigs, *frame)?,
            (None, None) => MediumSpec::isotropic(mu, 1.0)?,
        };
        Ok(medium)
    }

    fn profile(&self, args: &ProfileArgs) -> Result<QProfile, CliError> {
        let range = match (args.v_min, args.v_max, self.scenario.v_range) {
            (Some(a), Some(b), _) => (a, b),
            (None, None, Some([a, b])) => (a, b),
            (None, None, None) => {
                return Err(CliError::Input("the Q profile needs --v-min/--v-max or a scenario v_range".into()))
            }
            _ => return Err(CliError::Input("give both --v-min and --v-max".into())),
        };
        let samples = args.samples.or(self.scenario.samples).unwrap_or(512);
        let medium = self.medium(args.mu, args.k)?;
        Ok(QProfile::build(self.isentrope()?, medium, range, samples)?)
    }

    /// Binodal lookup for labelling; `None` for models without a phase
    /// transition (the ideal gas), whose states are all labelled gas.
    fn binodal(&self, t_min: Option<f64>, steps: Option<usize>) -> Result<Option<BinodalTable>, CliError> {
        if matches!(self.model.kind(), ModelKind::Ideal) {
            return Ok(None);
        }
        let spec = self.scenario.binodal.as_ref();
        let tc = critical_point(&self.model)?.t;
        let t_min = t_min.or(spec.map(|b| b.t_min)).unwrap_or(0.2 * tc);
        let steps = steps.or(spec.map(|b| b.steps)).unwrap_or(300);
        Ok(Some(BinodalTable::build(&self.model, t_min, steps)?))
    }

    fn sources(&self) -> Vec<SourceSpec> {
        self.scenario
            .sources
            .iter()
            .map(|s| SourceSpec { position: s.pos, intensity: s.intensity })
            .collect()
    }

    fn harmonic_field(&self, profile: &QProfile) -> Result<HarmonicField, CliError> {
        let b = self
            .scenario
            .domain
            .as_ref()
            .ok_or_else(|| CliError::Input("the scenario needs a \"box\"".into()))?;
        let domain = BoxDomain::new(b.lower, b.upper, b.n)?;
        let sources = self.sources();
        let hf = match self.scenario.v0.as_ref() {
            Some(V0Spec::Constant(v0)) => {
                let v0 = *v0;
                assemble_dirichlet_field(&domain, profile, &sources, |_| v0)?
            }
            Some(V0Spec::Table(t)) => {
                let table = load_v0_table(&t.file)?;
                assemble_dirichlet_field(&domain, profile, &sources, |x| nearest(&table, x))?
            }
            None => return Err(CliError::Input("the scenario needs \"v0\"".into())),
        };
        Ok(hf)
    }
}

fn load_v0_table(path: &Path) -> Result<Vec<([f64; 3], f64)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with(|c: char| c.is_ascii_alphabetic())) {
            continue;
        }
        let fields: Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        match fields {
            Ok(f) if f.len() == 4 => rows.push(([f[0], f[1], f[2]], f[3])),
            _ => {
                return Err(CliError::Input(format!(
                    "{}:{}: expected four numbers x1,x2,x3,v0",
                    path.display(),
                    lineno + 1
                )))
            }
        }
    }
    if rows.is_empty() {
        return Err(CliError::Input(format!("{}: empty v0 table", path.display())));
    }
    Ok(rows)
}

fn nearest(table: &[([f64; 3], f64)], x: [f64; 3]) -> f64 {
    let d2 = |p: [f64; 3]| (0..3).map(|a| (p[a] - x[a]).powi(2)).sum::<f64>();
    table
        .iter()
        .min_by(|a, b| d2(a.0).total_cmp(&d2(b.0)))
        .map(|r| r.1)
        .expect("non-empty table")
}

/// Singular quantities (e.g. `C_p` on the spinodal) are reported as NaN
/// instead of failing the whole command.
fn or_nan(r: realgas::Result<f64>) -> Result<f64, CliError> {
    match r {
        Ok(x) => Ok(x),
        Err(Error::Singular { .. }) => Ok(f64::NAN),
        Err(e) => Err(e.into()),
    }
}

fn grid(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if steps < 1 || !(hi > lo) {
        return Err(CliError::Input(format!("invalid range [{lo}, {hi}] with {steps} steps")));
    }
    Ok((0..=steps).map(|i| lo + (hi - lo) * i as f64 / steps as f64).collect())
}

pub fn state(ctx: &Context, t: f64, v: f64) -> Result<Report, CliError> {
    let s = evaluate_state(&ctx.model, t, v)?;
    let mut table = Table::new(&["T", "v", "p", "eps", "sigma", "gamma", "eta", "Cv", "Cp", "Cs", "applicability"]);
    table.push(vec![
        t.into(),
        v.into(),
        s.p.into(),
        s.eps.into(),
        s.sigma.into(),
        s.gamma.into(),
        s.eta.into(),
        or_nan(heat_capacity_v(&ctx.model, t, v))?.into(),
        or_nan(heat_capacity_p(&ctx.model, t, v))?.into(),
        or_nan(sound_speed_sq(&ctx.model, t, v))?.into(),
        s.applicability.as_str().into(),
    ]);
    Ok(Report::table(table))
}

pub fn binodal(ctx: &Context, t_min: f64, t_max: Option<f64>, steps: usize, with_spinodal: bool) -> Result<Report, CliError> {
    let solver = CoexistenceSolver::new(&ctx.model)?;
    let cp = solver.critical();
    let t_max = t_max.unwrap_or(cp.t).min(cp.t);
    let mut ts = grid(t_min, t_max, steps)?;
    // the critical point itself is appended as the endpoint below
    ts.retain(|&t| t < cp.t * (1.0 - 1e-12));
    let curve = solver.curve(&ts)?;

    let mut cols = vec!["T", "v1", "v2", "p", "dQ", "dW", "dEps"];
    if with_spinodal {
        cols.extend(["vs1", "vs2"]);
    }
    let mut table = Table::new(&cols);
    for c in &curve {
        let mut row: Vec<Cell> = vec![c.t.into(), c.v1.into(), c.v2.into(), c.p.into(), c.dq.into(), c.dw.into(), c.deps.into()];
        if with_spinodal {
            let (a, b) = spinodal_volumes(&ctx.model, c.t)?;
            row.extend([a.into(), b.into()]);
        }
        table.push(row);
    }
    let mut row: Vec<Cell> = vec![cp.t.into(), cp.v.into(), cp.v.into(), cp.p.into(), 0.0.into(), 0.0.into(), 0.0.into()];
    if with_spinodal {
        row.extend([cp.v.into(), cp.v.into()]);
    }
    table.push(row);
    let summary = json!({ "critical": { "T": cp.t, "v": cp.v, "p": cp.p }, "points": table.rows.len() });
    Ok(Report { table, summary: Some(summary) })
}

pub fn spinodal(ctx: &Context, v_min: f64, v_max: f64, steps: usize) -> Result<Report, CliError> {
    let vs = grid(v_min, v_max, steps)?;
    let mut table = Table::new(&["v", "T", "p"]);
    for s in spinodal_curve(&ctx.model, &vs) {
        table.push(vec![s.v.into(), s.t.into(), pressure(&ctx.model, s.t, s.v)?.into()]);
    }
    Ok(Report::table(table))
}

pub fn isentrope(ctx: &Context, v_min: f64, v_max: f64, steps: usize) -> Result<Report, CliError> {
    let iso = ctx.isentrope()?;
    let mut table = Table::new(&["v", "T", "p", "Cs"]);
    for v in grid(v_min, v_max, steps)? {
        let t = iso.tau(v)?;
        table.push(vec![v.into(), t.into(), pressure(&ctx.model, t, v)?.into(), or_nan(sound_speed_sq(&ctx.model, t, v))?.into()]);
    }
    let summary = json!({ "sigma0": iso.sigma0(), "power_constant": iso.power_constant() });
    Ok(Report { table, summary: Some(summary) })
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct ProfileArgs {
    /// Lower end of the volume range.
    #[arg(long)]
    pub v_min: Option<f64>,
    /// Upper end of the volume range; Q vanishes there.
    #[arg(long)]
    pub v_max: Option<f64>,
    /// Number of tabulation samples.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Dynamic viscosity.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Isotropic permeability.
    #[arg(long)]
    pub k: Option<f64>,
}

fn branches_json(profile: &QProfile) -> Value {
    json!({
        "v_ref": profile.v_ref(),
        "folds": profile.folds(),
        "branches": profile.branches().iter().map(|b| json!({
            "id": b.id, "v_lo": b.v_lo, "v_hi": b.v_hi, "q_lo": b.q_lo, "q_hi": b.q_hi, "increasing": b.increasing,
        })).collect::<Vec<_>>(),
    })
}

pub fn qprofile(ctx: &Context, args: &ProfileArgs) -> Result<Report, CliError> {
    let profile = ctx.profile(args)?;
    let mut table = Table::new(&["v", "Q", "dQ", "branch_id"]);
    for s in profile.samples() {
        let branch = profile.branch_of(s.v).map_or(Cell::Text(String::new()), |b| b.id.into());
        table.push(vec![s.v.into(), s.q.into(), s.dq.into(), branch]);
    }
    Ok(Report { table, summary: Some(branches_json(&profile)) })
}

fn label(binodal: Option<&BinodalTable>, s: &BranchState) -> Result<String, CliError> {
    Ok(match binodal {
        Some(b) => b.classify(s.v, s.t)?.as_str().to_string(),
        None => "gas".to_string(),
    })
}

/// Row tail for points where no branch solves `Q(v) = u`.
fn no_state() -> Vec<Cell> {
    vec![Cell::Text(String::new()), f64::NAN.into(), f64::NAN.into(), "none".into()]
}

const STATE_COLUMNS: [&str; 4] = ["branch_id", "v", "T", "label"];

fn state_cells(binodal: Option<&BinodalTable>, states: &[BranchState]) -> Result<Vec<Vec<Cell>>, CliError> {
    if states.is_empty() {
        return Ok(vec![no_state()]);
    }
    states
        .iter()
        .map(|s| Ok(vec![s.branch.into(), s.v.into(), s.t.into(), label(binodal, s)?.into()]))
        .collect()
}

#[derive(Debug, Clone, clap::Args)]
pub struct RadialArgs {
    #[arg(long)]
    pub r_min: Option<f64>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Source intensity when the scenario lists no source.
    #[arg(long, allow_hyphen_values = true)]
    pub intensity: Option<f64>,
    /// Lowest temperature of the binodal lookup table.
    #[arg(long)]
    pub t_min: Option<f64>,
}

pub fn source(ctx: &Context, args: &ProfileArgs, radial: &RadialArgs) -> Result<Report, CliError> {
    let src = match (ctx.sources().as_slice(), radial.intensity) {
        (_, Some(i)) => SourceSpec { position: [0.0; 3], intensity: i },
        ([s], None) => *s,
        ([], None) => return Err(CliError::Input("give --intensity or one scenario source".into())),
        (_, None) => return Err(CliError::Input("the radial profile takes exactly one source".into())),
    };
    let spec = ctx.scenario.radial.as_ref();
    let r_min = radial.r_min.or(spec.map(|r| r.r_min)).unwrap_or(0.1);
    let r_max = radial.r_max.or(spec.map(|r| r.r_max)).unwrap_or(10.0);
    let steps = radial.steps.or(spec.map(|r| r.steps)).unwrap_or(100);
    if !(r_min > 0.0) {
        return Err(CliError::Input("r_min must be positive".into()));
    }
    let profile = ctx.profile(args)?;
    let binodal = ctx.binodal(radial.t_min, None)?;

    let mut cols = vec!["r", "u"];
    cols.extend(STATE_COLUMNS);
    let mut table = Table::new(&cols);
    for r in grid(r_min, r_max, steps)? {
        let x = [src.position[0] + r, src.position[1], src.position[2]];
        let u = src.intensity / (4.0 * PI * r);
        for cells in state_cells(binodal.as_ref(), &point_source_field(&profile, &src, x)?)? {
            let mut row: Vec<Cell> = vec![r.into(), u.into()];
            row.extend(cells);
            table.push(row);
        }
    }
    Ok(Report { table, summary: Some(branches_json(&profile)) })
}

pub fn dirichlet(ctx: &Context, args: &ProfileArgs) -> Result<Report, CliError> {
    let profile = ctx.profile(args)?;
    let hf = ctx.harmonic_field(&profile)?;
    let d = hf.domain();
    let [nx, ny, nz] = d.nodes();
    let mut table = Table::new(&["x1", "x2", "x3", "u"]);
    let (mut u_min, mut u_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                let y = d.node(i, j, k);
                let x = hf.to_physical(y);
                let u = match hf.u_reduced(y) {
                    Ok(u) => u,
                    Err(Error::SingularPoint(_)) => f64::NAN,
                    Err(e) => return Err(e.into()),
                };
                if u.is_finite() {
                    u_min = u_min.min(u);
                    u_max = u_max.max(u);
                }
                table.push(vec![x[0].into(), x[1].into(), x[2].into(), u.into()]);
            }
        }
    }
    let summary = json!({
        "nodes": [nx, ny, nz],
        "cg_iterations": hf.u0().iterations(),
        "cg_residual": hf.residual(),
        "boundary_branch": hf.boundary_branch(),
        "u_min": u_min,
        "u_max": u_max,
        "q_profile": branches_json(&profile),
    });
    Ok(Report { table, summary: Some(summary) })
}

pub fn phasemap(ctx: &Context, args: &ProfileArgs, t_min: Option<f64>, steps: Option<usize>) -> Result<Report, CliError> {
    let profile = ctx.profile(args)?;
    let hf = ctx.harmonic_field(&profile)?;
    let binodal = ctx
        .binodal(t_min, steps)?
        .ok_or_else(|| CliError::Input("phase maps need a model with a critical point".into()))?;
    let sampling = match &ctx.scenario.sampling {
        Some(s) => SamplingGrid { lower: s.lower, upper: s.upper, points: s.points },
        None => SamplingGrid::of_field(&hf),
    };
    let labeled = map_field(&hf, &profile, &binodal, &sampling)?;

    let mut cols = vec!["x1", "x2", "x3"];
    cols.extend(STATE_COLUMNS);
    let mut table = Table::new(&cols);
    for p in &labeled.points {
        let head: Vec<Cell> = vec![p.x[0].into(), p.x[1].into(), p.x[2].into()];
        if p.labels.is_empty() {
            let mut row = head.clone();
            row.extend(no_state());
            table.push(row);
        }
        for l in &p.labels {
            let mut row = head.clone();
            row.extend([l.branch.into(), l.v.into(), l.t.into(), l.phase.as_str().into()]);
            table.push(row);
        }
    }

    let centre = ctx.sources().first().map_or_else(
        || {
            let (lo, hi) = (hf.to_physical(sampling.lower), hf.to_physical(sampling.upper));
            std::array::from_fn(|a| 0.5 * (lo[a] + hi[a]))
        },
        |s| s.position,
    );
    let radii: Vec<Value> = labeled
        .interface_radii(centre)
        .iter()
        .map(|r| {
            json!({
                "branch": r.branch, "inner": r.inner.as_str(), "outer": r.outer.as_str(),
                "count": r.count, "mean": r.mean, "min": r.min, "max": r.max,
            })
        })
        .collect();
    let summary = json!({
        "centre": centre,
        "interfaces": labeled.interfaces.len(),
        "radii": radii,
        "critical": { "T": binodal.critical().t, "v": binodal.critical().v },
    });
    Ok(Report { table, summary: Some(summary) })
}
