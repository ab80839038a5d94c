//! `viacontrol` command line. Every subcommand prints a one-line JSON verdict
//! and exits 0 on pass, 2 when a checked inequality fails, 1 on usage or
//! runtime errors. Settings resolve as defaults < `--config` file < flags.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{
    decay_check, emit_report, lipschitz_profile, relaxation_gap, relaxation_study, time_lipschitz_check, AnalysisResult,
};
use crate::error::{Error, Result};
use crate::geometry::{active_set, distance_to_omega, DEFAULT_BUDGET, TOL_BOUNDARY};
use crate::io::{parse_config, read_field, read_trajectory_csv, write_field, write_json, write_series_csv, write_trajectory_csv};
use crate::ipc::{verify_ipc, IpcCertificate, IpcOutcome, IpcSampling};
use crate::linalg::{axpy, dist, sub};
use crate::problem::{get_problem, verify_data_assumptions, ProblemDefinition, SamplingSpec};
use crate::trajectory::{
    derive_nft_constants, nft_correct, track_feasible, tracking_constants, viable_trajectory, violating_references,
    Trajectory, ViableOptions,
};
use crate::value::{solve_value, GridSpec, Horizon, Scheme, SolveOptions, ValueField};

#[derive(Parser, Debug)]
#[command(name = "viacontrol", version, about = "Discounted optimal control under moving state constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// Registered benchmark name.
    #[arg(long, global = true)]
    problem: Option<String>,
    /// Parameter override `key=value`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Value grid spacing `dx,dt`.
    #[arg(long, global = true, value_name = "DX,DT")]
    grid: Option<String>,
    /// Value horizon: a number or `auto`.
    #[arg(long, global = true, value_name = "T|auto")]
    horizon: Option<String>,
    /// Truncation tolerance for the automatic horizon.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Flat `key = value` file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Constraint-set geometry queries.
    #[command(subcommand)]
    Geom(GeomCmd),
    /// Inward-pointing condition.
    #[command(subcommand)]
    Ipc(IpcCmd),
    /// Neighboring feasible trajectories.
    #[command(subcommand)]
    Nft(NftCmd),
    /// Exponential tracking of feasible references.
    #[command(subcommand)]
    Track(TrackCmd),
    /// Value-function grid solver.
    #[command(subcommand)]
    Value(ValueCmd),
    /// Sampled checks on computed fields.
    #[command(subcommand)]
    Analyze(AnalyzeCmd),
    /// Assumptions, certificate, constants, fields and every analysis.
    Pipeline,
}

#[derive(Subcommand, Debug)]
enum GeomCmd {
    /// Distance from a point to the constraint set.
    Dist(PointArgs),
    /// Near-active constraints at a point.
    Active {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long)]
        delta: Option<f64>,
    },
}

#[derive(Args, Debug)]
struct PointArgs {
    #[arg(long, default_value_t = 0.0)]
    t: f64,
    /// Comma-separated coordinates.
    #[arg(long, allow_hyphen_values = true)]
    x: String,
}

#[derive(Subcommand, Debug)]
enum IpcCmd {
    Verify(IpcArgs),
}

#[derive(Args, Debug, Clone)]
struct IpcArgs {
    #[arg(long)]
    delta: Option<f64>,
    /// Smallest accepted margin.
    #[arg(long, default_value_t = 0.1)]
    r_min: f64,
    /// Time samples on `[0, 2π]`; 1D problems give two boundary points per time.
    #[arg(long, default_value_t = 100)]
    n_times: usize,
    #[arg(long, default_value_t = 16)]
    n_rays: usize,
    #[arg(long, default_value_t = 0)]
    level: usize,
}

impl Default for IpcArgs {
    fn default() -> Self {
        Self { delta: None, r_min: 0.1, n_times: 100, n_rays: 16, level: 0 }
    }
}

#[derive(Subcommand, Debug)]
enum NftCmd {
    /// Corrects seeded constraint-violating references.
    Run {
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(long, default_value_t = 1.0)]
        duration: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
    },
}

#[derive(Subcommand, Debug)]
enum TrackCmd {
    /// Tracks a viable reference from a perturbed start.
    Run {
        /// Reference start; defaults to the problem's start state.
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
        /// Initial offset, taken toward the interior anchor.
        #[arg(long, default_value_t = 0.1)]
        offset: f64,
        #[arg(long, default_value_t = 5.0)]
        duration: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
    },
}

#[derive(Subcommand, Debug)]
enum ValueCmd {
    Solve {
        #[arg(long, value_enum, default_value_t = SchemeArg::Relaxed)]
        scheme: SchemeArg,
        /// Chatter sub-steps (ordinary) or mixture-weight grid (relaxed).
        #[arg(long, default_value_t = 4)]
        resolution: usize,
    },
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum SchemeArg {
    Ordinary,
    Relaxed,
}

#[derive(Subcommand, Debug)]
enum AnalyzeCmd {
    /// Spatial Lipschitz profile against `b e^{−(λ−K)t}`.
    Lipschitz {
        #[arg(long, value_name = "DIR")]
        field: Option<PathBuf>,
        #[arg(long, default_value_t = 2000)]
        pairs: usize,
    },
    /// Decay of the value along a feasible trajectory.
    Decay {
        #[arg(long, value_name = "DIR")]
        field: Option<PathBuf>,
        /// Trajectory CSV; defaults to the viable trajectory from the start state.
        #[arg(long, value_name = "FILE")]
        trajectory: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-2)]
        tol_decay: f64,
    },
    /// Ordinary against relaxed value.
    Relax {
        #[arg(long, value_name = "DIR")]
        field: Option<PathBuf>,
        #[arg(long, value_name = "DIR")]
        star: Option<PathBuf>,
        /// Largest accepted gap.
        #[arg(long, default_value_t = f64::INFINITY)]
        gap_tol: f64,
        /// Gap at each resolution, e.g. `1,2,4`, instead of a single comparison.
        #[arg(long, value_name = "G,G,..")]
        study: Option<String>,
    },
    /// Lipschitz continuity in time at fixed probes.
    TimeLip {
        #[arg(long, value_name = "DIR")]
        field: Option<PathBuf>,
        /// Global bound on `|f| + |L|`; defaults to the sampled sup.
        #[arg(long)]
        n_bound: Option<f64>,
        /// Probe points `x;x;..` with comma-separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        probes: Option<String>,
    },
}

/// Resolved settings of a run, serialized next to its artifacts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub problem: String,
    pub overrides: Vec<(String, f64)>,
    pub lambda: Option<f64>,
    pub grid: Option<(f64, f64)>,
    /// `None` selects the automatic horizon.
    pub horizon: Option<f64>,
    pub tol: f64,
    pub seed: u64,
    /// Left out of `run.json` so that runs into different directories match byte for byte.
    #[serde(skip)]
    pub out: PathBuf,
}

impl RunConfig {
    fn resolve(common: &CommonArgs) -> Result<Self> {
        let file = match &common.config {
            Some(path) => parse_config(&std::fs::read_to_string(path)?)?,
            None => Default::default(),
        };
        for key in file.keys() {
            let known = ["problem", "set", "lambda", "grid", "horizon", "tol", "seed", "out"];
            if !known.contains(&key.as_str()) && !key.starts_with("set.") {
                return Err(Error::Usage(format!("unknown config key `{key}`")));
            }
        }
        let pick = |flag: Option<String>, key: &str| flag.or_else(|| file.get(key).cloned());

        let mut overrides = Vec::new();
        if let Some(list) = file.get("set") {
            for kv in list.split(',').filter(|s| !s.trim().is_empty()) {
                overrides.push(parse_override(kv)?);
            }
        }
        for (k, v) in file.iter().filter(|(k, _)| k.starts_with("set.")) {
            overrides.push((k["set.".len()..].to_string(), parse_f64(v, k)?));
        }
        for kv in &common.set {
            overrides.push(parse_override(kv)?);
        }
        let lambda = pick(common.lambda.map(|v| v.to_string()), "lambda").map(|s| parse_f64(&s, "lambda")).transpose()?;
        let grid = pick(common.grid.clone(), "grid")
            .map(|s| {
                let parts: Vec<&str> = s.split(',').collect();
                match parts.as_slice() {
                    [dx, dt] => {
                        let (dx, dt) = (parse_f64(dx, "grid")?, parse_f64(dt, "grid")?);
                        if dx > 0.0 && dt > 0.0 {
                            Ok((dx, dt))
                        } else {
                            Err(Error::Usage("grid spacings must be positive".into()))
                        }
                    }
                    _ => Err(Error::Usage(format!("--grid expects `dx,dt`, got `{s}`"))),
                }
            })
            .transpose()?;
        let horizon = match pick(common.horizon.clone(), "horizon") {
            None => None,
            Some(s) if s.trim() == "auto" => None,
            Some(s) => Some(parse_f64(&s, "horizon")?),
        };
        Ok(Self {
            problem: pick(common.problem.clone(), "problem").unwrap_or_else(|| "moving-wall-1d".into()),
            overrides,
            lambda,
            grid,
            horizon,
            tol: pick(common.tol.map(|v| v.to_string()), "tol").map(|s| parse_f64(&s, "tol")).transpose()?.unwrap_or(1e-3),
            seed: pick(common.seed.map(|v| v.to_string()), "seed")
                .map(|s| s.trim().parse::<u64>().map_err(|_| Error::Usage(format!("seed must be an integer, got `{s}`"))))
                .transpose()?
                .unwrap_or(0),
            out: pick(common.out.as_ref().map(|p| p.display().to_string()), "out")
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("viacontrol-out")),
        })
    }
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Usage(format!("{what}: not a number: `{s}`")))
}

fn parse_override(kv: &str) -> Result<(String, f64)> {
    let (k, v) = kv.split_once('=').ok_or_else(|| Error::Usage(format!("override `{kv}` is not `key=value`")))?;
    Ok((k.trim().to_string(), parse_f64(v, k.trim())?))
}

fn parse_point(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|c| parse_f64(c, "point")).collect()
}

/// Parses `args` (program name first), runs the subcommand, returns the exit code.
pub fn run<I: IntoIterator<Item = String>>(args: I) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let name = command_name(&cli.command);
    let outcome = RunConfig::resolve(&cli.common).and_then(|cfg| {
        let p = problem_for(&cfg)?;
        dispatch(&cli.command, &cfg, &p)
    });
    match outcome {
        Ok((pass, mut verdict)) => {
            verdict["command"] = json!(name);
            println!("{}", serde_json::to_string(&verdict).unwrap_or_default());
            if pass {
                0
            } else {
                2
            }
        }
        Err(e) => {
            println!("{}", json!({ "command": name, "error": e.to_string() }));
            1
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Geom(GeomCmd::Dist(_)) => "geom dist",
        Command::Geom(GeomCmd::Active { .. }) => "geom active",
        Command::Ipc(_) => "ipc verify",
        Command::Nft(_) => "nft run",
        Command::Track(_) => "track run",
        Command::Value(_) => "value solve",
        Command::Analyze(AnalyzeCmd::Lipschitz { .. }) => "analyze lipschitz",
        Command::Analyze(AnalyzeCmd::Decay { .. }) => "analyze decay",
        Command::Analyze(AnalyzeCmd::Relax { .. }) => "analyze relax",
        Command::Analyze(AnalyzeCmd::TimeLip { .. }) => "analyze time-lip",
        Command::Pipeline => "pipeline",
    }
}

fn problem_for(cfg: &RunConfig) -> Result<ProblemDefinition> {
    let mut overrides = cfg.overrides.clone();
    if let Some(l) = cfg.lambda {
        overrides.push(("lambda".into(), l));
    }
    get_problem(&cfg.problem, &overrides)
}

fn dispatch(cmd: &Command, cfg: &RunConfig, p: &ProblemDefinition) -> Result<(bool, Value)> {
    match cmd {
        Command::Geom(GeomCmd::Dist(pt)) => {
            let x = parse_point(&pt.x)?;
            let d = distance_to_omega(p, pt.t, &x, DEFAULT_BUDGET)?;
            Ok((true, json!({ "t": pt.t, "x": x, "distance": d.distance, "witness": d.witness, "certified": d.certified })))
        }
        Command::Geom(GeomCmd::Active { point, delta }) => {
            let x = parse_point(&point.x)?;
            let r = active_set(p, point.t, &x, delta.unwrap_or(p.ipc_delta), TOL_BOUNDARY);
            Ok((true, json!({ "t": point.t, "x": x, "active": r.indices, "delta": r.radius_delta, "conservative": r.conservative })))
        }
        Command::Ipc(IpcCmd::Verify(a)) => {
            std::fs::create_dir_all(&cfg.out)?;
            let outcome = ipc_outcome(p, a)?;
            let summary = certificate_json(&outcome);
            write_json(&cfg.out.join("certificate.json"), &summary)?;
            Ok((matches!(outcome, IpcOutcome::Pass(_)), summary))
        }
        Command::Nft(NftCmd::Run { count, duration, dt }) => nft_run(p, cfg, *count, *duration, *dt),
        Command::Track(TrackCmd::Run { x0, offset, duration, dt }) => {
            let x0 = x0.as_deref().map(parse_point).transpose()?;
            track_run(p, cfg, x0, *offset, *duration, *dt)
        }
        Command::Value(ValueCmd::Solve { scheme, resolution }) => {
            let scheme = match scheme {
                SchemeArg::Ordinary => Scheme::Ordinary { chatter: *resolution },
                SchemeArg::Relaxed => Scheme::Relaxed { mixture_grid: *resolution },
            };
            let field = solve(p, cfg, scheme)?;
            write_field(&field, &cfg.out)?;
            Ok((true, field_summary(&field)))
        }
        Command::Analyze(a) => analyze(p, cfg, a),
        Command::Pipeline => pipeline(p, cfg),
    }
}

fn ipc_outcome(p: &ProblemDefinition, a: &IpcArgs) -> Result<IpcOutcome> {
    let sampling = IpcSampling { n_times: a.n_times, n_rays: a.n_rays, level: a.level, ..Default::default() };
    verify_ipc(p, &sampling, a.delta.unwrap_or(p.ipc_delta), a.r_min)
}

fn certificate(p: &ProblemDefinition) -> Result<IpcCertificate> {
    match ipc_outcome(p, &IpcArgs::default())? {
        IpcOutcome::Pass(c) => Ok(c),
        IpcOutcome::Fail(f) => Err(Error::ConstantsInfeasible(format!(
            "inward-pointing check failed: margin {} at t={}, x={:?}",
            f.worst_witness.r, f.worst_witness.t, f.worst_witness.x
        ))),
    }
}

fn certificate_json(outcome: &IpcOutcome) -> Value {
    match outcome {
        IpcOutcome::Pass(c) => {
            let worst = c.witnesses.iter().min_by(|a, b| a.r.total_cmp(&b.r));
            json!({
                "pass": true, "r": c.r, "delta": c.delta, "eps": c.eps, "eta": c.eta,
                "n_samples": c.n_samples, "level": c.level, "sampled": c.sampled, "worst_witness": worst,
            })
        }
        IpcOutcome::Fail(f) => json!({
            "pass": false, "r": f.worst_witness.r, "r_min": f.r_min,
            "n_samples": f.n_samples, "worst_witness": f.worst_witness,
        }),
    }
}

fn nft_run(p: &ProblemDefinition, cfg: &RunConfig, count: usize, duration: f64, dt: f64) -> Result<(bool, Value)> {
    std::fs::create_dir_all(&cfg.out)?;
    let cert = certificate(p)?;
    let refs = violating_references(p, count, duration, dt, cfg.seed)?;
    let mut runs = Vec::new();
    let mut pass = true;
    for (i, r) in refs.iter().enumerate() {
        let res = nft_correct(p, &cert, r)?;
        let anchored = dist(&res.corrected.states[0], &r.states[0]) == 0.0;
        let ok = anchored && res.within_bound && res.interior_clearance > 0.0;
        pass &= ok;
        write_trajectory_csv(p, r, &cfg.out.join(format!("reference_{i}.csv")))?;
        write_trajectory_csv(p, &res.corrected, &cfg.out.join(format!("corrected_{i}.csv")))?;
        runs.push(json!({
            "t0": r.t0(), "rho": res.rho_in, "sup_dist": res.sup_dist, "beta": res.beta_used,
            "interior_clearance": res.interior_clearance, "anchored": anchored,
            "within_bound": res.within_bound, "pass": ok,
        }));
    }
    let constants = derive_nft_constants(p, &cert, duration)?;
    let summary = json!({ "pass": pass, "count": refs.len(), "constants": constants, "runs": runs });
    write_json(&cfg.out.join("nft.json"), &summary)?;
    Ok((pass, json!({ "pass": pass, "count": refs.len(), "ln_beta": constants.ln_beta })))
}

fn track_run(
    p: &ProblemDefinition,
    cfg: &RunConfig,
    x0: Option<Vec<f64>>,
    offset: f64,
    duration: f64,
    dt: f64,
) -> Result<(bool, Value)> {
    std::fs::create_dir_all(&cfg.out)?;
    let cert = certificate(p)?;
    let x0 = x0.unwrap_or_else(|| p.start.clone());
    let reference = viable_trajectory(p, &cert, 0.0, &x0, duration, dt, &ViableOptions::default())?;
    let toward = sub(&(p.anchor)(0.0), &x0);
    let len = crate::linalg::norm(&toward);
    let x1 = if len > 0.0 { axpy(&x0, offset / len, &toward) } else { x0.clone() };
    let r = track_feasible(p, &cert, &reference, &x1)?;
    write_trajectory_csv(p, &reference, &cfg.out.join("reference.csv"))?;
    write_trajectory_csv(p, &r.trajectory, &cfg.out.join("tracked.csv"))?;
    let rows: Vec<Vec<f64>> =
        (0..r.deviations.len()).map(|i| vec![r.trajectory.times[i], r.deviations[i], r.bounds[i]]).collect();
    write_series_csv(&cfg.out.join("tracking.csv"), &["t", "deviation", "bound"], &rows)?;
    let pass = r.violations == 0;
    let summary = json!({
        "pass": pass, "violations": r.violations, "offset": dist(&x0, &x1), "constants": r.constants,
        "max_deviation": r.deviations.iter().copied().fold(0.0, f64::max),
    });
    write_json(&cfg.out.join("tracking.json"), &summary)?;
    Ok((pass, summary))
}

fn default_spacing(p: &ProblemDefinition) -> (f64, f64) {
    if p.n == 1 {
        (0.01, 0.02)
    } else {
        (0.05, 0.05)
    }
}

fn grid_spec(p: &ProblemDefinition, cfg: &RunConfig) -> GridSpec {
    let (dx, dt) = cfg.grid.unwrap_or_else(|| default_spacing(p));
    let horizon = match cfg.horizon {
        Some(t) => Horizon::Fixed(t),
        None => {
            let x0_bound = p.sample_box.iter().map(|&(lo, hi)| lo.abs().max(hi.abs()).powi(2)).sum::<f64>().sqrt();
            Horizon::Auto { tol: cfg.tol, x0_bound }
        }
    };
    GridSpec::around(p, dx, dt, horizon)
}

fn solve(p: &ProblemDefinition, cfg: &RunConfig, scheme: Scheme) -> Result<ValueField> {
    solve_value(p, &grid_spec(p, cfg), &SolveOptions { lambda: p.lambda, scheme, level: 0 })
}

fn field_summary(f: &ValueField) -> Value {
    json!({
        "pass": true, "lambda": f.lambda, "T": f.horizon,
        "tail_bound": if f.tail_bound.is_finite() { json!(f.tail_bound) } else { Value::Null },
        "scheme": f.scheme, "nodes": f.nodes, "time_nodes": f.time_nodes(),
    })
}

fn load_or_solve(p: &ProblemDefinition, cfg: &RunConfig, dir: Option<&Path>, scheme: Scheme) -> Result<ValueField> {
    match dir {
        Some(d) => read_field(d),
        None => solve(p, cfg, scheme),
    }
}

const STAR: Scheme = Scheme::Relaxed { mixture_grid: 4 };
const ORDINARY: Scheme = Scheme::Ordinary { chatter: 1 };

fn default_probes(p: &ProblemDefinition) -> Vec<Vec<f64>> {
    let a = (p.anchor)(0.0);
    let d = sub(&p.start, &a);
    (0..5).map(|i| axpy(&a, i as f64 / 4.0, &d)).collect()
}

fn viable_for(p: &ProblemDefinition, cert: &IpcCertificate, field: &ValueField) -> Result<Trajectory> {
    viable_trajectory(p, cert, field.t0, &p.start, field.horizon, field.dt, &ViableOptions::default())
}

fn analyze(p: &ProblemDefinition, cfg: &RunConfig, cmd: &AnalyzeCmd) -> Result<(bool, Value)> {
    let result = match cmd {
        AnalyzeCmd::Lipschitz { field, pairs } => {
            let f = load_or_solve(p, cfg, field.as_deref(), STAR)?;
            let c = tracking_constants(p, &certificate(p)?, f.horizon)?;
            AnalysisResult::Lipschitz(lipschitz_profile(&f, &c, p.data.a1, *pairs, cfg.seed)?)
        }
        AnalyzeCmd::Decay { field, trajectory, tol_decay } => {
            let f = load_or_solve(p, cfg, field.as_deref(), STAR)?;
            let traj = match trajectory {
                Some(path) => read_trajectory_csv(path)?.trajectory,
                None => viable_for(p, &certificate(p)?, &f)?,
            };
            AnalysisResult::Decay(decay_check(p, &f, &traj, *tol_decay)?)
        }
        AnalyzeCmd::Relax { field, star, gap_tol, study } => match study {
            Some(list) => {
                let gs = list
                    .split(',')
                    .map(|g| g.trim().parse::<usize>().map_err(|_| Error::Usage(format!("bad resolution `{g}`"))))
                    .collect::<Result<Vec<_>>>()?;
                AnalysisResult::RelaxationStudy(relaxation_study(p, &grid_spec(p, cfg), p.lambda, 0, &gs)?)
            }
            None => {
                let v = load_or_solve(p, cfg, field.as_deref(), ORDINARY)?;
                let vs = load_or_solve(p, cfg, star.as_deref(), STAR)?;
                AnalysisResult::Relaxation(relaxation_gap(&v, &vs, *gap_tol)?)
            }
        },
        AnalyzeCmd::TimeLip { field, n_bound, probes } => {
            let f = load_or_solve(p, cfg, field.as_deref(), STAR)?;
            let c = tracking_constants(p, &certificate(p)?, f.horizon)?;
            let probes = match probes {
                Some(s) => s.split(';').map(parse_point).collect::<Result<Vec<_>>>()?,
                None => default_probes(p),
            };
            let n = match n_bound {
                Some(n) => *n,
                None => time_lipschitz_check(&f, p, &c, f64::INFINITY, &[], 0)?.sampled_sup,
            };
            AnalysisResult::TimeLip(time_lipschitz_check(&f, p, &c, n, &probes, 0)?)
        }
    };
    emit_report(std::slice::from_ref(&result), &cfg.out)?;
    Ok((result.pass() != Some(false), result.verdict()))
}

fn pipeline(p: &ProblemDefinition, cfg: &RunConfig) -> Result<(bool, Value)> {
    let out = &cfg.out;
    std::fs::create_dir_all(out)?;
    write_json(&out.join("run.json"), cfg)?;
    let mut pass = true;
    let mut stages = serde_json::Map::new();

    let assumptions = verify_data_assumptions(p, &SamplingSpec::default(), cfg.seed);
    write_json(&out.join("assumptions.json"), &assumptions)?;
    pass &= assumptions.all_pass();
    stages.insert("assumptions".into(), json!(assumptions.all_pass()));

    let outcome = ipc_outcome(p, &IpcArgs::default())?;
    write_json(&out.join("certificate.json"), &certificate_json(&outcome))?;
    let cert = match outcome {
        IpcOutcome::Pass(c) => c,
        IpcOutcome::Fail(_) => {
            stages.insert("ipc".into(), json!(false));
            let verdict = json!({ "pass": false, "stages": stages });
            write_json(&out.join("verdict.json"), &verdict)?;
            return Ok((false, verdict));
        }
    };
    stages.insert("ipc".into(), json!(true));

    let v = solve(p, cfg, ORDINARY)?;
    let vstar = solve(p, cfg, STAR)?;
    write_field(&v, &out.join("field_V"))?;
    write_field(&vstar, &out.join("field_Vstar"))?;

    let nft = derive_nft_constants(p, &cert, 1.0)?;
    let tracking = tracking_constants(p, &cert, vstar.horizon)?;
    write_json(&out.join("constants.json"), &json!({ "nft_unit": nft, "tracking": tracking }))?;

    let traj = viable_for(p, &cert, &vstar)?;
    write_trajectory_csv(p, &traj, &out.join("trajectory.csv"))?;

    let mut results = Vec::new();
    let mut skipped = Vec::new();
    match lipschitz_profile(&vstar, &tracking, p.data.a1, 2000, cfg.seed) {
        Ok(r) => results.push(AnalysisResult::Lipschitz(r)),
        Err(e @ Error::DiscountBelowThreshold { .. }) => skipped.push(json!({ "kind": "profile", "reason": e.to_string() })),
        Err(e) => return Err(e),
    }
    results.push(AnalysisResult::Decay(decay_check(p, &vstar, &traj, 1e-2)?));
    results.push(AnalysisResult::Relaxation(relaxation_gap(&v, &vstar, f64::INFINITY)?));
    let probes = default_probes(p);
    match time_lipschitz_check(&vstar, p, &tracking, f64::INFINITY, &[], 0) {
        Ok(pre) => results.push(AnalysisResult::TimeLip(time_lipschitz_check(&vstar, p, &tracking, pre.sampled_sup, &probes, 0)?)),
        Err(e @ Error::DiscountBelowThreshold { .. }) => skipped.push(json!({ "kind": "timelip", "reason": e.to_string() })),
        Err(e) => return Err(e),
    }
    emit_report(&results, &out.join("analysis"))?;
    for r in &results {
        pass &= r.pass() != Some(false);
        stages.insert(r.kind().into(), json!(r.pass()));
    }
    let verdict = json!({ "pass": pass, "problem": p.name, "lambda": p.lambda, "stages": stages, "skipped": skipped });
    write_json(&out.join("verdict.json"), &verdict)?;
    Ok((pass, verdict))
}
