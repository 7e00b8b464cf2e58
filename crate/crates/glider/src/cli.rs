//! Configuration and dispatch behind the `glider` binary.
//!
//! Every analysis is a subcommand that loads a profile, runs the
//! computation, and writes CSV artifacts plus a JSON summary into the output
//! directory. Each run also records a `manifest.json` with the fully
//! resolved configuration; `glider rerun manifest.json` reproduces the
//! outputs byte for byte. Angles at this boundary are degrees.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use serde_json::json;

use crate::dynamics::{self, IntegrateOptions, PitchAngle, VelocityState};
use crate::equilibria::{self, StepControl};
use crate::export::{self, RunMeta};
use crate::manifold::{self, TraceStrategy, TvmOptions};
use crate::profiles::{self, CoefficientProfile, SymmetryClass};
use crate::repulsion::{self, GridSpec};
use crate::scenarios::{self, PitchSchedule};
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "glider",
    version,
    about = "Phase-space structures of a 2D passive-descent glider model"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Acceleration field on a grid plus sample trajectories at fixed pitch
    PhasePortrait(AnalysisArgs),
    /// Find and classify the equilibrium glides at one pitch
    Equilibria(AnalysisArgs),
    /// Continue equilibrium branches over a pitch range
    Bifurcation(AnalysisArgs),
    /// Sample the vertical-acceleration nullcline
    Nullcline(AnalysisArgs),
    /// Trace the terminal velocity manifold by backward-time bisection
    Tvm(AnalysisArgs),
    /// Backward-time trajectory-normal repulsion field and its ridge
    Repulsion(AnalysisArgs),
    /// Stack TVM slices over a pitch range into the extended surface
    TvmSurface(AnalysisArgs),
    /// Simulate prescribed pitch kinematics (constant, ramp, or sinusoid)
    Simulate(SimulateArgs),
    /// Re-run a recorded manifest
    Rerun(RerunArgs),
}

#[derive(Args, Debug, Clone)]
pub struct AnalysisArgs {
    /// Built-in profile: flat-plate, high-lift, cambered, or bluff
    #[arg(long, default_value = "flat-plate")]
    pub profile: String,

    /// Coefficient table CSV (header `alpha_deg,cl,cd`), overrides --profile
    #[arg(long)]
    pub table: Option<PathBuf>,

    /// Declare 180-degree rotational symmetry for --table
    #[arg(long)]
    pub sym_rot180: bool,

    /// Declare top-bottom symmetry for --table
    #[arg(long)]
    pub sym_topbottom: bool,

    /// Declare left-right symmetry for --table
    #[arg(long)]
    pub sym_leftright: bool,

    /// Pitch angle in degrees
    #[arg(long, default_value_t = -5.0, allow_negative_numbers = true)]
    pub theta: f64,

    /// Pitch sweep: start stop count (degrees)
    #[arg(long, num_args = 3, value_names = ["A", "B", "N"], allow_negative_numbers = true)]
    pub theta_range: Option<Vec<f64>>,

    /// State-space box `vx0 vx1 vz0 vz1`, or just the `vx0 vx1` range
    #[arg(long, num_args = 2..=4, value_names = ["VX0", "VX1", "VZ0", "VZ1"], allow_negative_numbers = true)]
    pub domain: Option<Vec<f64>>,

    /// Grid resolution: columns rows
    #[arg(long, num_args = 2, value_names = ["N", "M"])]
    pub grid: Option<Vec<usize>>,

    /// Signed repulsion window (negative = backward time)
    #[arg(long = "T", default_value_t = repulsion::DEFAULT_WINDOW, allow_negative_numbers = true)]
    pub window: f64,

    /// Bisection tolerance for manifold tracing
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,

    /// TVM tracing strategy
    #[arg(long, value_parser = ["sweep", "slices"], default_value = "sweep")]
    pub strategy: String,

    /// Points on traced curves
    #[arg(long, default_value_t = 400)]
    pub points: usize,

    /// Vertical slices for the per-slice strategy
    #[arg(long, default_value_t = 61)]
    pub slices: usize,

    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,

    /// Worker threads (0 = all cores); outputs are identical either way
    #[arg(long, default_value_t = 0)]
    pub workers: usize,

    /// Seed for randomized test-point selection
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: AnalysisArgs,

    /// Pitch schedule shape
    #[arg(long, value_parser = ["constant", "ramp", "sinusoid"], default_value = "sinusoid")]
    pub schedule: String,

    /// Ramp start pitch (degrees)
    #[arg(long, allow_negative_numbers = true)]
    pub theta_start: Option<f64>,

    /// Ramp end pitch (degrees)
    #[arg(long, allow_negative_numbers = true)]
    pub theta_end: Option<f64>,

    /// Ramp duration (nondimensional time)
    #[arg(long)]
    pub duration: Option<f64>,

    /// Sinusoid amplitude (degrees)
    #[arg(long)]
    pub amplitude: Option<f64>,

    /// Sinusoid angular frequency (nondimensional)
    #[arg(long)]
    pub omega: Option<f64>,

    /// Sinusoid phase (radians)
    #[arg(long, allow_negative_numbers = true)]
    pub phase: Option<f64>,

    /// Sinusoid mean pitch (degrees)
    #[arg(long, allow_negative_numbers = true)]
    pub theta_mean: Option<f64>,

    /// Initial velocity: vx vz
    #[arg(long, num_args = 2, value_names = ["VX", "VZ"], allow_negative_numbers = true)]
    pub initial: Option<Vec<f64>>,

    /// Simulation end time
    #[arg(long)]
    pub t_end: Option<f64>,

    /// JSON config file; explicit flags win over file values
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct RerunArgs {
    /// Path to a manifest.json written by a previous run
    pub manifest: PathBuf,

    /// Redirect outputs (defaults to the manifest's directory)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Where the coefficient profile comes from.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum ProfileSource {
    Builtin {
        name: String,
    },
    Table {
        path: PathBuf,
        #[serde(default)]
        symmetry: Option<SymmetryClass>,
    },
}

impl ProfileSource {
    pub fn load(&self) -> Result<CoefficientProfile> {
        match self {
            ProfileSource::Builtin { name } => {
                profiles::builtin(name).ok_or_else(|| Error::Config {
                    field: "profile".to_string(),
                    message: format!(
                        "unknown builtin profile `{name}` (available: {})",
                        profiles::BUILTIN_NAMES.join(", ")
                    ),
                })
            }
            ProfileSource::Table { path, symmetry } => profiles::load_table_csv(path, *symmetry),
        }
    }
}

/// Pitch schedule in boundary (degree) units.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScheduleConfig {
    Constant {
        theta0_deg: f64,
    },
    Ramp {
        theta_start_deg: f64,
        theta_end_deg: f64,
        duration: f64,
    },
    Sinusoid {
        theta_mean_deg: f64,
        amplitude_deg: f64,
        omega: f64,
        phase: f64,
    },
}

impl ScheduleConfig {
    pub fn default_flutter() -> Self {
        ScheduleConfig::Sinusoid {
            theta_mean_deg: 0.0,
            amplitude_deg: 10.0,
            omega: 0.5,
            phase: 0.0,
        }
    }

    pub fn default_ramp() -> Self {
        ScheduleConfig::Ramp {
            theta_start_deg: -20.0,
            theta_end_deg: 20.0,
            duration: 30.0,
        }
    }

    pub fn to_schedule(&self) -> PitchSchedule {
        match *self {
            ScheduleConfig::Constant { theta0_deg } => PitchSchedule::Constant {
                theta0: PitchAngle::from_degrees(theta0_deg),
            },
            ScheduleConfig::Ramp {
                theta_start_deg,
                theta_end_deg,
                duration,
            } => PitchSchedule::LinearRamp {
                theta_start: PitchAngle::from_degrees(theta_start_deg),
                theta_end: PitchAngle::from_degrees(theta_end_deg),
                duration,
            },
            ScheduleConfig::Sinusoid {
                theta_mean_deg,
                amplitude_deg,
                omega,
                phase,
            } => PitchSchedule::Sinusoid {
                theta_mean: PitchAngle::from_degrees(theta_mean_deg),
                amplitude: amplitude_deg.to_radians(),
                omega,
                phase,
            },
        }
    }

    /// Pitch interval the schedule visits over `[0, t_end]`, in degrees.
    fn theta_span_deg(&self, _t_end: f64) -> (f64, f64) {
        match *self {
            ScheduleConfig::Constant { theta0_deg } => (theta0_deg, theta0_deg),
            ScheduleConfig::Ramp {
                theta_start_deg,
                theta_end_deg,
                ..
            } => (
                theta_start_deg.min(theta_end_deg),
                theta_start_deg.max(theta_end_deg),
            ),
            ScheduleConfig::Sinusoid {
                theta_mean_deg,
                amplitude_deg,
                ..
            } => (theta_mean_deg - amplitude_deg, theta_mean_deg + amplitude_deg),
        }
    }
}

/// Fully resolved run parameters; everything a rerun needs.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct RunConfig {
    pub profile: ProfileSource,
    pub theta_deg: f64,
    pub theta_range_deg: Option<(f64, f64, usize)>,
    /// `[vx0, vx1, vz0, vz1]`.
    pub domain: [f64; 4],
    /// `[columns, rows]`.
    pub grid: [usize; 2],
    pub window: f64,
    pub tol: f64,
    pub strategy: String,
    pub points: usize,
    pub slices: usize,
    pub out: PathBuf,
    pub workers: usize,
    pub seed: u64,
    #[serde(default)]
    pub schedule: Option<ScheduleConfig>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_initial")]
    pub initial: [f64; 2],
}

fn default_t_end() -> f64 {
    15.0
}

fn default_initial() -> [f64; 2] {
    [0.2, 0.0]
}

impl RunConfig {
    fn validate(&self) -> Result<()> {
        if self.domain.iter().any(|v| !v.is_finite()) {
            return Err(config_err("domain", "bounds must be finite"));
        }
        if self.domain[0] >= self.domain[1] {
            return Err(config_err("domain", "vx bounds must satisfy vx0 < vx1"));
        }
        if self.domain[2] >= self.domain[3] {
            return Err(config_err("domain", "vz bounds must satisfy vz0 < vz1"));
        }
        if self.grid[0] == 0 || self.grid[1] == 0 {
            return Err(config_err("grid", "grid must have at least one node per axis"));
        }
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return Err(config_err("tol", "tolerance must be positive"));
        }
        if self.points < 2 {
            return Err(config_err("points", "need at least two curve points"));
        }
        if let Some((a, b, n)) = self.theta_range_deg {
            if n < 2 {
                return Err(config_err("theta-range", "need at least two samples"));
            }
            if !a.is_finite() || !b.is_finite() || a >= b {
                return Err(config_err("theta-range", "range must satisfy a < b"));
            }
        }
        if !self.t_end.is_finite() || self.t_end <= 0.0 {
            return Err(config_err("t-end", "simulation end time must be positive"));
        }
        Ok(())
    }

    fn trace_strategy(&self) -> Result<TraceStrategy> {
        match self.strategy.as_str() {
            "sweep" => Ok(TraceStrategy::OutsideInSweep),
            "slices" => Ok(TraceStrategy::PerSliceBisection),
            other => Err(config_err(
                "strategy",
                &format!("unknown strategy `{other}` (sweep or slices)"),
            )),
        }
    }

    fn tvm_options(&self) -> TvmOptions {
        TvmOptions {
            tol: self.tol,
            points: self.points,
            slices: self.slices,
            vz_bracket: (self.domain[2].min(-4.0), self.domain[3].max(1.0)),
            ..TvmOptions::default()
        }
    }

    fn theta_grid(&self, default: (f64, f64, usize)) -> Vec<PitchAngle> {
        let (a, b, n) = self.theta_range_deg.unwrap_or(default);
        (0..n)
            .map(|i| PitchAngle::from_degrees(a + (b - a) * i as f64 / (n - 1) as f64))
            .collect()
    }
}

fn config_err(field: &str, message: &str) -> Error {
    Error::Config {
        field: field.to_string(),
        message: message.to_string(),
    }
}

/// Run record: configuration, provenance, and timings.
#[derive(Debug, serde::Serialize, serde::Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub profile_name: String,
    pub profile_fingerprint: String,
    pub config: RunConfig,
    #[serde(default)]
    pub timings_ms: Vec<(String, f64)>,
}

/// Entry point used by the binary.
pub fn execute(cli: Cli) -> Result<()> {
    let (name, config) = match cli.command {
        Command::PhasePortrait(args) => ("phase-portrait", resolve_analysis(&args)?),
        Command::Equilibria(args) => ("equilibria", resolve_analysis(&args)?),
        Command::Bifurcation(args) => ("bifurcation", resolve_analysis(&args)?),
        Command::Nullcline(args) => ("nullcline", resolve_analysis(&args)?),
        Command::Tvm(args) => ("tvm", resolve_analysis(&args)?),
        Command::Repulsion(args) => ("repulsion", resolve_analysis(&args)?),
        Command::TvmSurface(args) => ("tvm-surface", resolve_analysis(&args)?),
        Command::Simulate(args) => ("simulate", resolve_simulate(&args)?),
        Command::Rerun(args) => {
            let text = std::fs::read_to_string(&args.manifest)?;
            let manifest: Manifest =
                serde_json::from_str(&text).map_err(|e| Error::Config {
                    field: "manifest".to_string(),
                    message: format!("could not parse manifest: {e}"),
                })?;
            let mut config = manifest.config;
            if let Some(out) = args.out {
                config.out = out;
            }
            run(&manifest.subcommand, config)?;
            return Ok(());
        }
    };
    run(name, config)?;
    Ok(())
}

fn resolve_analysis(args: &AnalysisArgs) -> Result<RunConfig> {
    let profile = match &args.table {
        Some(path) => ProfileSource::Table {
            path: path.clone(),
            symmetry: if args.sym_rot180 || args.sym_topbottom || args.sym_leftright {
                Some(SymmetryClass {
                    rotational_180: args.sym_rot180,
                    top_bottom: args.sym_topbottom,
                    left_right: args.sym_leftright,
                })
            } else {
                None
            },
        },
        None => ProfileSource::Builtin {
            name: args.profile.clone(),
        },
    };
    let theta_range_deg = match &args.theta_range {
        Some(v) if v.len() == 3 => {
            let n = v[2] as usize;
            Some((v[0], v[1], n))
        }
        Some(_) => return Err(config_err("theta-range", "expected three values: a b n")),
        None => None,
    };
    let domain = match &args.domain {
        Some(v) if v.len() == 4 => [v[0], v[1], v[2], v[3]],
        Some(v) if v.len() == 2 => [v[0], v[1], -2.0, 0.5],
        Some(_) => {
            return Err(config_err(
                "domain",
                "expected `vx0 vx1 vz0 vz1` or `vx0 vx1`",
            ))
        }
        None => [-1.5, 1.5, -2.0, 0.5],
    };
    let grid = match &args.grid {
        Some(v) if v.len() == 2 => [v[0], v[1]],
        Some(_) => return Err(config_err("grid", "expected two values: n m")),
        None => [301, 301],
    };
    Ok(RunConfig {
        profile,
        theta_deg: args.theta,
        theta_range_deg,
        domain,
        grid,
        window: args.window,
        tol: args.tol,
        strategy: args.strategy.clone(),
        points: args.points,
        slices: args.slices,
        out: args.out.clone(),
        workers: args.workers,
        seed: args.seed,
        schedule: None,
        t_end: default_t_end(),
        initial: default_initial(),
    })
}

fn resolve_simulate(args: &SimulateArgs) -> Result<RunConfig> {
    let mut config = resolve_analysis(&args.common)?;

    #[derive(Default, serde::Deserialize)]
    struct FileConfig {
        schedule: Option<ScheduleConfig>,
        initial: Option<[f64; 2]>,
        t_end: Option<f64>,
    }
    let file: FileConfig = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text).map_err(|e| Error::Config {
                field: "config".to_string(),
                message: format!("could not parse config file: {e}"),
            })?
        }
        None => FileConfig::default(),
    };

    let schedule = match args.schedule.as_str() {
        "constant" => ScheduleConfig::Constant {
            theta0_deg: args.theta_mean.unwrap_or(args.common.theta),
        },
        "ramp" => {
            let base = match file.schedule.clone() {
                Some(s @ ScheduleConfig::Ramp { .. }) => s,
                _ => ScheduleConfig::default_ramp(),
            };
            if let ScheduleConfig::Ramp {
                theta_start_deg,
                theta_end_deg,
                duration,
            } = base
            {
                ScheduleConfig::Ramp {
                    theta_start_deg: args.theta_start.unwrap_or(theta_start_deg),
                    theta_end_deg: args.theta_end.unwrap_or(theta_end_deg),
                    duration: args.duration.unwrap_or(duration),
                }
            } else {
                unreachable!()
            }
        }
        "sinusoid" => {
            let base = match file.schedule.clone() {
                Some(s @ ScheduleConfig::Sinusoid { .. }) => s,
                _ => ScheduleConfig::default_flutter(),
            };
            if let ScheduleConfig::Sinusoid {
                theta_mean_deg,
                amplitude_deg,
                omega,
                phase,
            } = base
            {
                ScheduleConfig::Sinusoid {
                    theta_mean_deg: args.theta_mean.unwrap_or(theta_mean_deg),
                    amplitude_deg: args.amplitude.unwrap_or(amplitude_deg),
                    omega: args.omega.unwrap_or(omega),
                    phase: args.phase.unwrap_or(phase),
                }
            } else {
                unreachable!()
            }
        }
        other => {
            return Err(config_err(
                "schedule",
                &format!("unknown schedule `{other}`"),
            ))
        }
    };

    let default_t = match &schedule {
        ScheduleConfig::Constant { .. } => 15.0,
        ScheduleConfig::Ramp { duration, .. } => *duration,
        ScheduleConfig::Sinusoid { omega, .. } => 12.0 * std::f64::consts::TAU / omega,
    };
    config.t_end = args.t_end.or(file.t_end).unwrap_or(default_t);
    config.initial = match &args.initial {
        Some(v) if v.len() == 2 => [v[0], v[1]],
        Some(_) => return Err(config_err("initial", "expected two values: vx vz")),
        None => file.initial.unwrap_or(default_initial()),
    };
    config.schedule = Some(schedule);
    Ok(config)
}

/// Executes a resolved run: computes, writes artifacts, and records the
/// manifest. Returns the manifest.
pub fn run(name: &str, config: RunConfig) -> Result<Manifest> {
    config.validate()?;
    std::fs::create_dir_all(&config.out)?;
    let profile = config.profile.load()?;

    let started = Instant::now();
    let mut summary = in_pool(config.workers, || dispatch(name, &config, &profile))??;
    let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
    if let Some(map) = summary.as_object_mut() {
        let ode = IntegrateOptions::default().ode;
        map.insert(
            "provenance".to_string(),
            json!({
                "tool": "glider",
                "version": env!("CARGO_PKG_VERSION"),
                "profile": profile.name(),
                "profile_fingerprint": format!("{:016x}", profile.fingerprint()),
                "tol": config.tol,
                "ode_rel_tol": ode.rel_tol,
                "ode_abs_tol": ode.abs_tol,
                "elapsed_ms": elapsed_ms,
            }),
        );
    }

    let manifest = Manifest {
        tool: "glider".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        subcommand: name.to_string(),
        profile_name: profile.name().to_string(),
        profile_fingerprint: format!("{:016x}", profile.fingerprint()),
        config,
        timings_ms: vec![(name.to_string(), elapsed_ms)],
    };
    let out = &manifest.config.out;
    write_json(&out.join("summary.json"), &summary)?;
    write_json(&out.join("manifest.json"), &serde_json::to_value(&manifest).unwrap())?;
    Ok(manifest)
}

fn in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config {
            field: "workers".to_string(),
            message: e.to_string(),
        })?;
    Ok(pool.install(f))
}

fn dispatch(
    name: &str,
    config: &RunConfig,
    profile: &CoefficientProfile,
) -> Result<serde_json::Value> {
    match name {
        "phase-portrait" => run_phase_portrait(config, profile),
        "equilibria" => run_equilibria(config, profile),
        "bifurcation" => run_bifurcation(config, profile),
        "nullcline" => run_nullcline(config, profile),
        "tvm" => run_tvm(config, profile),
        "repulsion" => run_repulsion(config, profile),
        "tvm-surface" => run_tvm_surface(config, profile),
        "simulate" => run_simulate(config, profile),
        other => Err(config_err(
            "subcommand",
            &format!("unknown subcommand `{other}`"),
        )),
    }
}

fn meta(profile: &CoefficientProfile, config: &RunConfig, termination: &str) -> RunMeta {
    let ode = IntegrateOptions::default().ode;
    RunMeta {
        profile: profile.name().to_string(),
        theta_deg: config.theta_deg,
        rel_tol: ode.rel_tol,
        abs_tol: ode.abs_tol,
        termination: termination.to_string(),
    }
}

fn run_phase_portrait(
    config: &RunConfig,
    profile: &CoefficientProfile,
) -> Result<serde_json::Value> {
    let theta = PitchAngle::from_degrees(config.theta_deg);
    let [vx0, vx1, vz0, vz1] = config.domain;
    let [nx, nz] = config.grid;

    let mut field_rows = Vec::with_capacity(nx * nz);
    for i in 0..nx {
        for j in 0..nz {
            let vx = vx0 + (vx1 - vx0) * i as f64 / (nx.max(2) - 1) as f64;
            let vz = vz0 + (vz1 - vz0) * j as f64 / (nz.max(2) - 1) as f64;
            let (ax, az) = dynamics::acceleration(VelocityState::new(vx, vz), theta, profile);
            field_rows.push((vx, vz, ax, az));
        }
    }
    export::write_vector_field_csv(&config.out.join("vector_field.csv"), &field_rows)?;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(config.seed);
    let options = IntegrateOptions::default();
    let mut written = Vec::new();
    for k in 0..16 {
        let initial = VelocityState::new(rng.gen_range(vx0..vx1), rng.gen_range(vz0..vz1));
        let trajectory = dynamics::integrate_with_position(
            initial,
            (0.0, 0.0),
            theta,
            profile,
            (0.0, config.t_end),
            &options,
        );
        let path = config.out.join(format!("trajectory_{k:03}.csv"));
        let mut m = meta(profile, config, "");
        m.termination = format!("{:?}", trajectory.termination).to_lowercase();
        export::write_trajectory_csv(&path, &trajectory, &m)?;
        written.push(path.file_name().unwrap().to_string_lossy().to_string());
    }

    let eqs = equilibria::find_equilibria(theta, profile);
    Ok(json!({
        "field_nodes": field_rows.len(),
        "trajectories": written,
        "equilibria": eqs.iter().map(|e| json!({
            "gamma_deg": e.gamma_star.to_degrees(),
            "v_star": e.v_star,
            "kind": e.kind.as_str(),
        })).collect::<Vec<_>>(),
    }))
}

fn run_equilibria(config: &RunConfig, profile: &CoefficientProfile) -> Result<serde_json::Value> {
    let theta = PitchAngle::from_degrees(config.theta_deg);
    let eqs = equilibria::find_equilibria(theta, profile);
    export::write_equilibria_csv(&config.out.join("equilibria.csv"), config.theta_deg, &eqs)?;
    Ok(json!({
        "theta_deg": config.theta_deg,
        "count": eqs.len(),
        "equilibria": eqs.iter().map(|e| json!({
            "gamma_star_deg": e.gamma_star.to_degrees(),
            "v_star": e.v_star,
            "vx_star": e.state.vx,
            "vz_star": e.state.vz,
            "delta": e.delta,
            "tau": e.tau,
            "kind": e.kind.as_str(),
            "tangent": e.tangent,
        })).collect::<Vec<_>>(),
    }))
}

fn run_bifurcation(config: &RunConfig, profile: &CoefficientProfile) -> Result<serde_json::Value> {
    let grid = config.theta_grid((-45.0, 45.0, 181));
    let diagram = equilibria::bifurcation_diagram(profile, &grid, &StepControl::default());
    export::write_bifurcation_csv(&config.out.join("bifurcation.csv"), &diagram)?;
    Ok(json!({
        "theta_samples": grid.len(),
        "branches": diagram.branches.iter().map(|b| json!({
            "points": b.points.len(),
            "folds": b.fold_indices().len(),
            "truncated": b.truncated,
        })).collect::<Vec<_>>(),
        "max_roots_per_theta": diagram.per_theta.iter().map(|(_, e)| e.len()).max(),
    }))
}

fn run_nullcline(config: &RunConfig, profile: &CoefficientProfile) -> Result<serde_json::Value> {
    let theta = PitchAngle::from_degrees(config.theta_deg);
    let margin = 1e-3;
    let curve = manifold::vz_nullcline(
        theta,
        profile,
        (margin, std::f64::consts::PI - margin),
        720,
    )?;
    export::write_nullcline_csv(&config.out.join("nullcline.csv"), &curve)?;
    Ok(json!({
        "theta_deg": config.theta_deg,
        "samples": curve.samples.len(),
        "singular_gamma_deg": curve.singular_angles.iter()
            .map(|g| g.to_degrees()).collect::<Vec<_>>(),
    }))
}

fn run_tvm(config: &RunConfig, profile: &CoefficientProfile) -> Result<serde_json::Value> {
    let theta = PitchAngle::from_degrees(config.theta_deg);
    let strategy = config.trace_strategy()?;
    let curve = manifold::trace_tvm(
        theta,
        profile,
        (config.domain[0], config.domain[1]),
        strategy,
        &config.tvm_options(),
    )?;
    export::write_tvm_csv(&config.out.join("tvm.csv"), &curve)?;
    Ok(json!({
        "theta_deg": config.theta_deg,
        "strategy": config.strategy,
        "points": curve.points.len(),
        "spacing": curve.spacing(),
    }))
}

fn run_repulsion(config: &RunConfig, profile: &CoefficientProfile) -> Result<serde_json::Value> {
    let theta = PitchAngle::from_degrees(config.theta_deg);
    let grid = GridSpec {
        vx_range: (config.domain[0], config.domain[1]),
        vz_range: (config.domain[2], config.domain[3]),
        nx: config.grid[0],
        nz: config.grid[1],
    };
    let field = repulsion::repulsion_field(
        grid,
        theta,
        profile,
        config.window,
        dynamics::GradientMethod::Variational,
        &IntegrateOptions::default().ode,
    );
    export::write_field_csv(&config.out.join("repulsion.csv"), &field)?;
    let ridge = repulsion::ridge_extract(&field)?;
    export::write_ridge_csv(&config.out.join("ridge.csv"), &ridge)?;
    Ok(json!({
        "theta_deg": config.theta_deg,
        "window": config.window,
        "nodes": field.values.len(),
        "masked": field.masked_count(),
        "ridge_gaps": ridge.iter().filter(|p| p.is_none()).count(),
    }))
}

fn run_tvm_surface(config: &RunConfig, profile: &CoefficientProfile) -> Result<serde_json::Value> {
    let grid = config.theta_grid((-45.0, 45.0, 19));
    let strategy = config.trace_strategy()?;
    let surface = manifold::extended_tvm_surface(
        profile,
        &grid,
        (config.domain[0], config.domain[1]),
        strategy,
        &config.tvm_options(),
    );
    export::write_surface_csv(&config.out.join("tvm_surface.csv"), &surface)?;
    Ok(json!({
        "slices": surface.slices.len(),
        "gaps": surface.gaps.iter().map(|(t, reason)| json!({
            "theta_deg": t.degrees(),
            "reason": reason,
        })).collect::<Vec<_>>(),
    }))
}

fn run_simulate(config: &RunConfig, profile: &CoefficientProfile) -> Result<serde_json::Value> {
    let schedule_config = config
        .schedule
        .clone()
        .unwrap_or_else(ScheduleConfig::default_flutter);
    let schedule = schedule_config.to_schedule();
    let initial = VelocityState::new(config.initial[0], config.initial[1]);
    let result = scenarios::simulate_controlled(
        initial,
        schedule,
        profile,
        (0.0, config.t_end),
        &scenarios::scenario_options(),
    )?;

    // Extended TVM over the visited pitch interval, for the distance column.
    let (lo_deg, hi_deg) = schedule_config.theta_span_deg(config.t_end);
    let pad = 1.5;
    let n_slices = 21;
    let theta_grid: Vec<PitchAngle> = (0..n_slices)
        .map(|i| {
            PitchAngle::from_degrees(
                lo_deg - pad + (hi_deg - lo_deg + 2.0 * pad) * i as f64 / (n_slices - 1) as f64,
            )
        })
        .collect();
    let surface = manifold::extended_tvm_surface(
        profile,
        &theta_grid,
        (config.domain[0], config.domain[1]),
        TraceStrategy::OutsideInSweep,
        &config.tvm_options(),
    );

    let n_rows = 1501;
    let rows = result.resample(n_rows);
    let adherence = scenarios::tvm_adherence(&result, &surface, n_rows)?;
    let dist: Vec<f64> = adherence.distances.iter().map(|(_, d)| *d).collect();
    let mut m = meta(profile, config, "");
    m.termination = format!("{:?}", result.termination).to_lowercase();
    export::write_simulation_csv(&config.out.join("simulation.csv"), &rows, &dist, &m)?;

    let limit_cycle = match &schedule {
        PitchSchedule::Sinusoid { .. } => scenarios::limit_cycle_check(&result, &schedule)
            .ok()
            .map(|c| {
                json!({
                    "converged": c.converged,
                    "return_distance": c.return_distance,
                    "loop_points": c.loop_points.len(),
                })
            }),
        _ => None,
    };
    Ok(json!({
        "schedule": schedule_config,
        "t_end": config.t_end,
        "termination": format!("{:?}", result.termination).to_lowercase(),
        "adherence": {
            "transient_end": adherence.transient_end,
            "post_transient_max": adherence.post_transient_max,
            "post_transient_mean": adherence.post_transient_mean,
        },
        "surface_gaps": surface.gaps.len(),
        "limit_cycle": limit_cycle,
    }))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Machine-readable error payload printed by the binary on failure.
pub fn error_json(err: &Error) -> serde_json::Value {
    let kind = match err {
        Error::NonPositiveDrag { .. } => "non-positive-drag",
        Error::NonMonotoneAlpha { .. } => "non-monotone-alpha",
        Error::InsufficientRows { .. } => "insufficient-rows",
        Error::OutOfMeasuredRange { .. } => "out-of-measured-range",
        Error::SingularAtZeroSpeed { .. } => "singular-at-zero-speed",
        Error::NonPositiveParam { .. } => "non-positive-param",
        Error::EscapeDuringWindow { .. } => "escape-during-window",
        Error::GammaOutOfDomain { .. } => "gamma-out-of-domain",
        Error::EmptyBranch => "empty-branch",
        Error::InvalidBracket { .. } => "invalid-bracket",
        Error::IndeterminateEndpoint => "indeterminate-endpoint",
        Error::SeedNotFound { .. } => "seed-not-found",
        Error::NotASaddle => "not-a-saddle",
        Error::DegenerateTangent { .. } => "degenerate-tangent",
        Error::EmptyField => "empty-field",
        Error::NotPeriodicSchedule => "not-periodic-schedule",
        Error::ThetaOutOfSurfaceRange { .. } => "theta-out-of-surface-range",
        Error::Config { .. } => "config",
        Error::TableParse { .. } => "table-parse",
        Error::Io(_) => "io",
    };
    let field = match err {
        Error::Config { field, .. } => Some(field.clone()),
        Error::TableParse { .. } => Some("table".to_string()),
        _ => None,
    };
    json!({
        "error": {
            "kind": kind,
            "field": field,
            "message": err.to_string(),
        }
    })
}
