//! `realgas`: thermodynamic tables, isentropic filtration profiles and
//! phase maps of point-source flows from the command line.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod error;
mod output;
mod scenario;

use commands::{Context, ProfileArgs, RadialArgs};
use error::CliError;
use output::{Format, Report};
use scenario::Scenario;

#[derive(Parser)]
#[command(author, version, about)]
struct Args {
    #[command(subcommand)]
    command: Commands,

    /// Gas model: ideal, vdw, pr or virial:<file.json> (reduced units for vdw/pr).
    #[arg(long, global = true)]
    model: Option<String>,

    /// Number of excited degrees of freedom.
    #[arg(long, global = true)]
    n: Option<f64>,

    /// Entropy level of the isentrope.
    #[arg(long, global = true, allow_hyphen_values = true)]
    sigma0: Option<f64>,

    /// Power constant c of the isentrope T = c·w(v)^(-2/n) (alternative to --sigma0).
    #[arg(long, global = true)]
    c: Option<f64>,

    /// Write the result here instead of stdout. In CSV mode a JSON summary,
    /// when the command has one, goes next to it as <out>.summary.json.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// JSON scenario file; command-line flags take precedence over it.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,

    /// Not supported: every computation is deterministic.
    #[arg(long, global = true, hide = true)]
    seed: Option<String>,
}

#[derive(Subcommand)]
enum Commands {
    /// Thermodynamic state at one (T, v).
    State {
        #[arg(long = "T", allow_hyphen_values = true)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        v: f64,
    },
    /// Coexistence curve from t-min up to the critical point.
    Binodal {
        #[arg(long)]
        t_min: f64,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// Add the spinodal volumes at each temperature.
        #[arg(long)]
        with_spinodal: bool,
    },
    /// Spinodal temperature and pressure over a volume range.
    Spinodal {
        #[arg(long)]
        v_min: f64,
        #[arg(long)]
        v_max: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// Temperature, pressure and sound speed along an isentrope.
    Isentrope {
        #[arg(long)]
        v_min: f64,
        #[arg(long)]
        v_max: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// Tabulated Q(v) with its monotone branches.
    Qprofile {
        #[command(flatten)]
        profile: ProfileArgs,
    },
    /// Radial profile of a single point source in unbounded space.
    Source {
        #[command(flatten)]
        profile: ProfileArgs,
        #[command(flatten)]
        radial: RadialArgs,
    },
    /// Harmonic field in a box with sources and Dirichlet boundary volumes.
    Dirichlet {
        #[command(flatten)]
        profile: ProfileArgs,
    },
    /// Phase labels of the Dirichlet field and interface radii.
    Phasemap {
        #[command(flatten)]
        profile: ProfileArgs,
        /// Lowest temperature of the binodal lookup table.
        #[arg(long)]
        t_min: Option<f64>,
        /// Number of binodal table nodes.
        #[arg(long)]
        binodal_steps: Option<usize>,
    },
}

fn run(args: Args) -> Result<(), CliError> {
    if args.seed.is_some() {
        return Err(CliError::Input("--seed is not supported: no computation here is random".into()));
    }
    let scenario = match &args.scenario {
        Some(p) => Scenario::load(p)?,
        None => Scenario::default(),
    };
    let n = args.n.or(scenario.n).unwrap_or(3.0);
    let model_spec = args.model.clone().or_else(|| scenario.model.clone()).unwrap_or_else(|| "vdw".into());
    let model = commands::parse_model(&model_spec, n)?;
    // an explicit flag for one isentrope parametrisation overrides both scenario keys
    let (sigma0, power_constant) = if args.sigma0.is_some() || args.c.is_some() {
        (args.sigma0, args.c)
    } else {
        (scenario.sigma0, scenario.power_constant)
    };
    let output = scenario.output.clone();
    let format = args.format.or(output.as_ref().and_then(|o| o.format)).unwrap_or(Format::Csv);
    let out = args.out.clone().or(output.and_then(|o| o.path));
    let ctx = Context { model, scenario, sigma0, power_constant };

    let report = match &args.command {
        Commands::State { t, v } => commands::state(&ctx, *t, *v)?,
        Commands::Binodal { t_min, t_max, steps, with_spinodal } => {
            commands::binodal(&ctx, *t_min, *t_max, *steps, *with_spinodal)?
        }
        Commands::Spinodal { v_min, v_max, steps } => commands::spinodal(&ctx, *v_min, *v_max, *steps)?,
        Commands::Isentrope { v_min, v_max, steps } => commands::isentrope(&ctx, *v_min, *v_max, *steps)?,
        Commands::Qprofile { profile } => commands::qprofile(&ctx, profile)?,
        Commands::Source { profile, radial } => commands::source(&ctx, profile, radial)?,
        Commands::Dirichlet { profile } => commands::dirichlet(&ctx, profile)?,
        Commands::Phasemap { profile, t_min, binodal_steps } => {
            commands::phasemap(&ctx, profile, *t_min, *binodal_steps)?
        }
    };
    emit(&report, format, out.as_deref())
}

fn emit(report: &Report, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let io = |p: &Path, e: std::io::Error| CliError::Io(format!("{}: {e}", p.display()));
    let body = report.render(format);
    match out {
        Some(path) => {
            std::fs::write(path, &body).map_err(|e| io(path, e))?;
            if let (Format::Csv, Some(summary)) = (format, report.render_summary()) {
                let mut p = path.as_os_str().to_owned();
                p.push(".summary.json");
                let p = PathBuf::from(p);
                std::fs::write(&p, summary).map_err(|e| io(&p, e))?;
            }
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(&body).map_err(|e| io(Path::new("<stdout>"), e))?;
            if let (Format::Csv, Some(summary)) = (format, report.render_summary()) {
                std::io::stderr().write_all(&summary).map_err(|e| io(Path::new("<stderr>"), e))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
