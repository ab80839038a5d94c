//! Problem definitions, the benchmark registry, and sampled checks of the
//! standing data assumptions.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dist, norm};
use crate::modulus::Modulus;

pub type ScalarField = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;
pub type GradientField = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;
pub type Dynamics = Arc<dyn Fn(f64, &[f64], &[f64]) -> Vec<f64> + Send + Sync>;
pub type Lagrangian = Arc<dyn Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync>;
pub type ControlSampler = Arc<dyn Fn(f64, usize) -> Vec<Vec<f64>> + Send + Sync>;
pub type PointMap = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// One constraint `h(t, x) ≤ 0` with a Hölder-continuous, bounded spatial gradient.
#[derive(Clone)]
pub struct ConstraintFunction {
    pub h: ScalarField,
    pub grad: GradientField,
    pub holder_theta: f64,
    pub holder_const: f64,
    pub grad_bound: f64,
    /// `h(t, ·)` is convex, so `Ω(t)` is convex when every constraint is.
    pub convex: bool,
}

impl fmt::Debug for ConstraintFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConstraintFunction")
            .field("holder_theta", &self.holder_theta)
            .field("holder_const", &self.holder_const)
            .field("grad_bound", &self.grad_bound)
            .field("convex", &self.convex)
            .finish_non_exhaustive()
    }
}

impl ConstraintFunction {
    pub fn new(
        h: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
        grad: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
        holder_theta: f64,
        holder_const: f64,
        grad_bound: f64,
    ) -> Self {
        Self { h: Arc::new(h), grad: Arc::new(grad), holder_theta, holder_const, grad_bound, convex: false }
    }

    /// Affine constraint `⟨a, x⟩ + b(t) ≤ 0`.
    pub fn affine(a: Vec<f64>, b: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let bound = norm(&a);
        let a2 = a.clone();
        let mut c = Self::new(
            move |t, x| crate::linalg::dot(&a, x) + b(t),
            move |_, _| a2.clone(),
            0.5,
            0.0,
            bound,
        );
        c.convex = true;
        c
    }

    /// Worst relative mismatch between `grad` and central differences with `step`.
    pub fn gradient_mismatch(&self, t: f64, x: &[f64], step: f64) -> f64 {
        let g = (self.grad)(t, x);
        let mut worst: f64 = 0.0;
        let mut xp = x.to_vec();
        for i in 0..x.len() {
            xp[i] = x[i] + step;
            let hp = (self.h)(t, &xp);
            xp[i] = x[i] - step;
            let hm = (self.h)(t, &xp);
            xp[i] = x[i];
            let fd = (hp - hm) / (2.0 * step);
            worst = worst.max((fd - g[i]).abs() / g[i].abs().max(1.0));
        }
        worst
    }

    /// `|∇h(t,x) − ∇h(t,y)| / |x − y|^θ`.
    pub fn holder_ratio(&self, t: f64, x: &[f64], y: &[f64]) -> f64 {
        let d = dist(x, y);
        if d == 0.0 {
            return 0.0;
        }
        dist(&(self.grad)(t, x), &(self.grad)(t, y)) / d.powf(self.holder_theta)
    }
}

/// Finite, nested control samples `U_ℓ(t)`.
#[derive(Clone)]
pub struct ControlSamples {
    pub dim: usize,
    pub sampler: ControlSampler,
}

impl fmt::Debug for ControlSamples {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ControlSamples").field("dim", &self.dim).finish_non_exhaustive()
    }
}

impl ControlSamples {
    pub fn new(dim: usize, sampler: impl Fn(f64, usize) -> Vec<Vec<f64>> + Send + Sync + 'static) -> Self {
        Self { dim, sampler: Arc::new(sampler) }
    }

    pub fn fixed(dim: usize, controls: Vec<Vec<f64>>) -> Self {
        Self::new(dim, move |_, _| controls.clone())
    }

    pub fn at(&self, t: f64, level: usize) -> Result<Vec<Vec<f64>>> {
        let us = (self.sampler)(t, level);
        if us.is_empty() {
            return Err(Error::EmptyControlSet { t });
        }
        Ok(us)
    }

    /// Level `level` samples are contained in level `level + 1` samples.
    pub fn is_nested(&self, t: f64, level: usize) -> bool {
        let coarse = (self.sampler)(t, level);
        let fine = (self.sampler)(t, level + 1);
        coarse.iter().all(|u| fine.iter().any(|v| dist(u, v) < 1e-12))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemData {
    /// Velocity bound on the boundary tube.
    pub m: f64,
    /// Radius of the boundary tube on which `m` holds.
    pub alpha: f64,
    /// Lipschitz modulus of the velocity set in the state.
    pub phi: Modulus,
    /// Left-absolute-continuity modulus of the velocity/cost set in time.
    pub gamma: Modulus,
    /// Sub-linear growth modulus of `(f, L)`.
    pub c: Modulus,
    /// State-Lipschitz modulus of `(f, L)`.
    pub k: Modulus,
    pub a1: f64,
    pub a2: f64,
    /// Lipschitz constant of `t ↦ Ω(t)`.
    pub omega_lip: f64,
    pub eta_tilde: f64,
}

/// A discounted, state-constrained control problem.
#[derive(Clone)]
pub struct ProblemDefinition {
    pub name: String,
    pub n: usize,
    pub f: Dynamics,
    pub running_cost: Lagrangian,
    pub lambda: f64,
    pub controls: ControlSamples,
    pub constraints: Vec<ConstraintFunction>,
    pub data: ProblemData,
    /// Interior point used to cast rays toward `∂Ω(t)`.
    pub anchor: PointMap,
    /// Control held away from the boundary tube.
    pub default_control: Vec<f64>,
    /// Radius of the near-active constraint ball for inward-pointing checks.
    pub ipc_delta: f64,
    /// Box used for sampling and as the default value-function grid.
    pub sample_box: Vec<(f64, f64)>,
    /// Default initial state for tracking/correction runs.
    pub start: Vec<f64>,
    /// Resolved parameters (builder parameters followed by data overrides).
    pub params: BTreeMap<String, f64>,
}

impl fmt::Debug for ProblemDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemDefinition")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("lambda", &self.lambda)
            .field("constraints", &self.constraints.len())
            .field("data", &self.data)
            .finish_non_exhaustive()
    }
}

impl ProblemDefinition {
    /// A bare definition with permissive defaults; callers fill in the rest.
    pub fn new(
        name: &str,
        n: usize,
        controls: ControlSamples,
        f: impl Fn(f64, &[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
        running_cost: impl Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let d = controls.dim;
        Self {
            name: name.to_string(),
            n,
            f: Arc::new(f),
            running_cost: Arc::new(running_cost),
            lambda: 1.0,
            controls,
            constraints: Vec::new(),
            data: ProblemData {
                m: 1.0,
                alpha: 0.5,
                phi: Modulus::constant(0.0),
                gamma: Modulus::constant(0.0),
                c: Modulus::constant(1.0),
                k: Modulus::constant(0.0),
                a1: 1.0,
                a2: 0.0,
                omega_lip: 0.0,
                eta_tilde: 0.5,
            },
            anchor: Arc::new(move |_| vec![0.0; n]),
            default_control: vec![0.0; d],
            ipc_delta: 0.5,
            sample_box: vec![(-1.0, 1.0); n],
            start: vec![0.0; n],
            params: BTreeMap::new(),
        }
    }

    pub fn velocity(&self, t: f64, x: &[f64], u: &[f64]) -> Vec<f64> {
        (self.f)(t, x, u)
    }

    pub fn cost(&self, t: f64, x: &[f64], u: &[f64]) -> f64 {
        (self.running_cost)(t, x, u)
    }

    pub fn controls_at(&self, t: f64, level: usize) -> Result<Vec<Vec<f64>>> {
        self.controls.at(t, level)
    }

    /// `max_i h_i(t, x)`, or `-∞` without constraints.
    pub fn max_h(&self, t: f64, x: &[f64]) -> f64 {
        self.constraints.iter().map(|c| (c.h)(t, x)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Lower bound on the distance from a feasible `x` to `∂Ω(t)`,
    /// `min_i (−h_i)/L_i`, from the gradient bounds. Negative when infeasible.
    pub fn clearance_lb(&self, t: f64, x: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|c| {
                let h = (c.h)(t, x);
                if c.grad_bound > 0.0 {
                    -h / c.grad_bound
                } else if h <= 0.0 {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn grad_bound_max(&self) -> f64 {
        self.constraints.iter().map(|c| c.grad_bound).fold(0.0, f64::max)
    }

    pub fn holder_const_max(&self) -> f64 {
        self.constraints.iter().map(|c| c.holder_const).fold(0.0, f64::max)
    }
}

// ---------------------------------------------------------------------------
// Registry

type Builder = fn(&BTreeMap<String, f64>) -> Result<ProblemDefinition>;

struct Entry {
    name: &'static str,
    defaults: &'static [(&'static str, f64)],
    build: Builder,
}

const DATA_KEYS: &[&str] = &["M", "alpha", "phi", "gamma", "c", "k", "a1", "a2", "omega_lip", "eta_tilde"];

const REGISTRY: &[Entry] = &[
    Entry {
        name: "moving-wall-1d",
        defaults: &[
            ("lambda", 2.0),
            ("base", 1.0),
            ("amp", 0.4),
            ("freq", 1.0),
            ("lower", -2.0),
            ("cost_u", 1.0),
            ("delta", 0.5),
        ],
        build: build_moving_wall,
    },
    Entry {
        name: "corridor-2d",
        defaults: &[
            ("lambda", 2.0),
            ("width", 1.0),
            ("amp", 0.1),
            ("freq", 1.0),
            ("cost_u", 1.0),
            ("delta", 0.5),
        ],
        build: build_corridor,
    },
    Entry {
        name: "quadratic-cost-1d",
        defaults: &[
            ("lambda", 1.0),
            ("q", 1.0),
            ("r", 1.0),
            ("c0", 0.0),
            ("wall", 5.0),
            ("lower", -5.0),
            ("binary_controls", 0.0),
            ("delta", 0.5),
        ],
        build: build_quadratic,
    },
];

/// Names of the built-in benchmark problems.
pub fn registered_problems() -> Vec<&'static str> {
    REGISTRY.iter().map(|e| e.name).collect()
}

/// Looks up a benchmark and applies `key = value` overrides. Builder parameters
/// are applied first; data keys (`M`, `alpha`, `phi`, `gamma`, `c`, `k`, `a1`,
/// `a2`, `omega_lip`, `eta_tilde`) then overwrite the derived assumption data.
pub fn get_problem(name: &str, overrides: &[(String, f64)]) -> Result<ProblemDefinition> {
    let entry = REGISTRY
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::UnknownProblem(name.to_string()))?;
    let mut params: BTreeMap<String, f64> =
        entry.defaults.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    let mut data_overrides = Vec::new();
    for (key, value) in overrides {
        if !value.is_finite() {
            return Err(Error::InvalidOverrideValue { key: key.clone(), reason: "must be finite".into() });
        }
        if params.contains_key(key) {
            params.insert(key.clone(), *value);
        } else if DATA_KEYS.contains(&key.as_str()) {
            data_overrides.push((key.clone(), *value));
        } else {
            return Err(Error::UnknownOverrideKey { problem: name.into(), key: key.clone() });
        }
    }
    if params["lambda"] <= 0.0 {
        return Err(Error::InvalidOverrideValue { key: "lambda".into(), reason: "must be > 0".into() });
    }
    if params["delta"] <= 0.0 {
        return Err(Error::InvalidOverrideValue { key: "delta".into(), reason: "must be > 0".into() });
    }
    let mut p = (entry.build)(&params)?;
    for (key, value) in &data_overrides {
        if *value < 0.0 {
            return Err(Error::InvalidOverrideValue { key: key.clone(), reason: "must be >= 0".into() });
        }
        let d = &mut p.data;
        match key.as_str() {
            "M" => d.m = *value,
            "alpha" => d.alpha = *value,
            "phi" => d.phi = Modulus::constant(*value),
            "gamma" => d.gamma = Modulus::constant(*value),
            "c" => d.c = Modulus::constant(*value),
            "k" => d.k = Modulus::constant(*value),
            "a1" => d.a1 = *value,
            "a2" => d.a2 = *value,
            "omega_lip" => d.omega_lip = *value,
            "eta_tilde" => d.eta_tilde = *value,
            _ => unreachable!(),
        }
        params.insert(key.clone(), *value);
    }
    p.params = params;
    Ok(p)
}

/// Uniform grid of `2^(level+1) + 1` points on `[-1, 1]`; nested across levels.
fn interval_controls(level: usize) -> Vec<Vec<f64>> {
    let n = 1usize << (level + 1).min(20);
    (0..=n).map(|i| vec![-1.0 + 2.0 * i as f64 / n as f64]).collect()
}

fn build_moving_wall(p: &BTreeMap<String, f64>) -> Result<ProblemDefinition> {
    let (base, amp, freq, lower, cost_u) = (p["base"], p["amp"], p["freq"], p["lower"], p["cost_u"]);
    if base - amp.abs() <= lower {
        return Err(Error::InvalidOverrideValue {
            key: "amp".into(),
            reason: "upper wall must stay above the lower wall".into(),
        });
    }
    let controls = ControlSamples::new(1, |_, level| interval_controls(level));
    let mut def = ProblemDefinition::new(
        "moving-wall-1d",
        1,
        controls,
        |_, _, u| vec![u[0]],
        move |_, _, u| cost_u * u[0] * u[0],
    );
    def.lambda = p["lambda"];
    def.constraints = vec![
        ConstraintFunction::affine(vec![1.0], move |t| -(base + amp * (freq * t).sin())),
        ConstraintFunction::affine(vec![-1.0], move |_| lower),
    ];
    let speed = (amp * freq).abs();
    let c = 1.0 + cost_u.abs();
    def.data = ProblemData {
        m: 1.0,
        alpha: 0.5,
        phi: Modulus::constant(0.0),
        gamma: Modulus::constant(speed),
        c: Modulus::constant(c),
        k: Modulus::constant(0.0),
        a1: c,
        a2: 0.0,
        omega_lip: speed,
        eta_tilde: 0.5,
    };
    let mid = 0.5 * (lower + base - amp.abs());
    def.anchor = Arc::new(move |_| vec![mid]);
    def.default_control = vec![0.0];
    def.ipc_delta = p["delta"];
    def.sample_box = vec![(lower, base + amp.abs())];
    def.start = vec![base - amp.abs() - 0.1f64.min(0.5 * (base - amp.abs() - lower))];
    Ok(def)
}

/// Origin plus `4·2^level` equally spaced unit directions.
fn disk_controls(level: usize) -> Vec<Vec<f64>> {
    let n = 4usize << level.min(16);
    let mut us = vec![vec![0.0, 0.0]];
    for k in 0..n {
        let a = 2.0 * PI * k as f64 / n as f64;
        let (s, c) = a.sin_cos();
        // exact axis values keep the coarse set reproducible at every level
        let snap = |v: f64| if v.abs() < 1e-15 { 0.0 } else if (v.abs() - 1.0).abs() < 1e-15 { v.signum() } else { v };
        us.push(vec![snap(c), snap(s)]);
    }
    us
}

fn build_corridor(p: &BTreeMap<String, f64>) -> Result<ProblemDefinition> {
    let (width, amp, freq, cost_u) = (p["width"], p["amp"], p["freq"], p["cost_u"]);
    if width <= 0.0 {
        return Err(Error::InvalidOverrideValue { key: "width".into(), reason: "must be > 0".into() });
    }
    let controls = ControlSamples::new(2, |_, level| disk_controls(level));
    let mut def = ProblemDefinition::new(
        "corridor-2d",
        2,
        controls,
        |_, _, u| vec![u[0], u[1]],
        move |_, _, u| cost_u * (u[0] * u[0] + u[1] * u[1]),
    );
    def.lambda = p["lambda"];
    let half = 0.5 * width;
    def.constraints = vec![
        ConstraintFunction::affine(vec![0.0, 1.0], move |t| -half - amp * (freq * t).sin()),
        ConstraintFunction::affine(vec![0.0, -1.0], move |t| -half + amp * (freq * t).sin()),
    ];
    let speed = (amp * freq).abs();
    let c = 1.0 + cost_u.abs();
    def.data = ProblemData {
        m: 1.0,
        alpha: 0.5,
        phi: Modulus::constant(0.0),
        gamma: Modulus::constant(speed),
        c: Modulus::constant(c),
        k: Modulus::constant(0.0),
        a1: c,
        a2: 0.0,
        omega_lip: speed,
        eta_tilde: 0.5,
    };
    def.anchor = Arc::new(move |t| vec![0.0, amp * (freq * t).sin()]);
    def.default_control = vec![0.0, 0.0];
    def.ipc_delta = p["delta"];
    def.sample_box = vec![(-2.0, 2.0), (-half - amp.abs(), half + amp.abs())];
    def.start = vec![0.0, half - amp.abs() - 0.1f64.min(0.5 * (half - amp.abs()).max(0.0))];
    Ok(def)
}

fn build_quadratic(p: &BTreeMap<String, f64>) -> Result<ProblemDefinition> {
    let (q, r, c0, wall, lower) = (p["q"], p["r"], p["c0"], p["wall"], p["lower"]);
    if wall <= lower {
        return Err(Error::InvalidOverrideValue { key: "wall".into(), reason: "must exceed `lower`".into() });
    }
    if q < 0.0 || r < 0.0 || c0 < 0.0 {
        return Err(Error::InvalidOverrideValue {
            key: "q/r/c0".into(),
            reason: "cost weights must be nonnegative".into(),
        });
    }
    let binary = p["binary_controls"] != 0.0;
    let controls = if binary {
        ControlSamples::fixed(1, vec![vec![-1.0], vec![1.0]])
    } else {
        ControlSamples::new(1, |_, level| interval_controls(level))
    };
    let mut def = ProblemDefinition::new(
        "quadratic-cost-1d",
        1,
        controls,
        |_, _, u| vec![u[0]],
        move |_, x, u| c0 + q * x[0] * x[0] + r * u[0] * u[0],
    );
    def.lambda = p["lambda"];
    def.constraints = vec![
        ConstraintFunction::affine(vec![1.0], move |_| -wall),
        ConstraintFunction::affine(vec![-1.0], move |_| lower),
    ];
    let radius = wall.abs().max(lower.abs());
    let c = (1.0 + c0 + r).max(q * radius);
    def.data = ProblemData {
        m: 1.0,
        alpha: 0.5,
        phi: Modulus::constant(0.0),
        gamma: Modulus::constant(0.0),
        c: Modulus::constant(c),
        k: Modulus::constant(2.0 * q * (radius + 0.5)),
        a1: c,
        a2: 0.0,
        omega_lip: 0.0,
        eta_tilde: 0.5,
    };
    let mid = 0.5 * (wall + lower);
    def.anchor = Arc::new(move |_| vec![mid]);
    def.default_control = if binary { vec![1.0] } else { vec![0.0] };
    def.ipc_delta = p["delta"];
    def.sample_box = vec![(lower, wall)];
    def.start = vec![mid];
    Ok(def)
}

// ---------------------------------------------------------------------------
// Assumption checks

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplingSpec {
    pub horizon: f64,
    pub n_times: usize,
    pub n_points: usize,
    /// Density level: point counts are multiplied by `2^level`; samples are nested.
    pub level: usize,
    pub control_level: usize,
    /// Sampling box; defaults to the problem's `sample_box`.
    pub bounds: Option<Vec<(f64, f64)>>,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        Self { horizon: 2.0 * PI, n_times: 16, n_points: 64, level: 0, control_level: 0, bounds: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    VacuousPass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionEntry {
    pub assumption_id: String,
    pub status: CheckStatus,
    pub worst_witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub problem: String,
    pub entries: Vec<AssumptionEntry>,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.status != CheckStatus::Fail)
    }

    pub fn entry(&self, id: &str) -> Option<&AssumptionEntry> {
        self.entries.iter().find(|e| e.assumption_id == id)
    }
}

fn finite_or_max(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::MAX
    }
}

/// Tracks the sample with the largest `value − bound` excess.
struct Worst {
    best: Option<(f64, Witness)>,
    failed: bool,
}

impl Worst {
    fn new() -> Self {
        Self { best: None, failed: false }
    }

    fn push(&mut self, w: Witness) {
        let excess = if w.value.is_finite() { w.value - w.bound } else { f64::INFINITY };
        let violated = !(w.value <= w.bound * (1.0 + 1e-9) + 1e-12);
        self.failed |= violated;
        if self.best.as_ref().map_or(true, |(e, _)| excess > *e) {
            self.best = Some((excess, w));
        }
    }

    fn finish(self, id: &str) -> AssumptionEntry {
        let status = match (&self.best, self.failed) {
            (None, _) => CheckStatus::VacuousPass,
            (_, true) => CheckStatus::Fail,
            _ => CheckStatus::Pass,
        };
        AssumptionEntry {
            assumption_id: id.to_string(),
            status,
            worst_witness: self.best.map(|(_, mut w)| {
                w.value = finite_or_max(w.value);
                w.bound = finite_or_max(w.bound);
                w
            }),
        }
    }
}

/// Sampled falsification of the data assumptions: boundedness of `(f, L)` on
/// the `α`-tube, the state-Lipschitz bound `k(t)`, sub-linear growth `c(t)`,
/// the bounded long-run average of `c + k`, and the affine majorant `a1 t + a2`
/// of `∫ c`. Samples at level `ℓ+1` contain those at level `ℓ`.
pub fn verify_data_assumptions(p: &ProblemDefinition, spec: &SamplingSpec, seed: u64) -> AssumptionReport {
    let bounds = spec.bounds.clone().unwrap_or_else(|| p.sample_box.clone());
    let scale = 1usize << spec.level.min(16);
    let n_points = spec.n_points.max(1) * scale;
    let n_times = spec.n_times.max(1) * scale;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<(f64, Vec<f64>, Vec<f64>)> = (0..n_points)
        .map(|_| {
            let t = rng.gen::<f64>() * spec.horizon;
            let x: Vec<f64> = bounds.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.gen::<f64>()).collect();
            let y: Vec<f64> = bounds.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.gen::<f64>()).collect();
            (t, x, y)
        })
        .collect();

    let mut entries = Vec::new();

    // tube boundedness
    let mut tube = Worst::new();
    if !p.constraints.is_empty() {
        let mut trng = ChaCha8Rng::seed_from_u64(seed ^ 0x7475_6265);
        for j in 0..n_times {
            let t = spec.horizon * j as f64 / n_times as f64;
            let Ok(us) = p.controls_at(t, spec.control_level) else { continue };
            let bps = crate::geometry::sample_boundary_points(p, t, 16).unwrap_or_default();
            for b in bps {
                let offset: Vec<f64> = b.iter().map(|_| 2.0 * trng.gen::<f64>() - 1.0).collect();
                let on = norm(&offset).max(1e-12);
                let r = p.data.alpha * trng.gen::<f64>();
                let x: Vec<f64> = b.iter().zip(&offset).map(|(bi, oi)| bi + r * oi / on).collect();
                for u in &us {
                    let v = norm(&p.velocity(t, &x, u));
                    let l = p.cost(t, &x, u);
                    let value = if l.is_finite() { v } else { f64::INFINITY };
                    tube.push(Witness { t, x: x.clone(), u: u.clone(), value, bound: p.data.m });
                }
            }
        }
    }
    entries.push(tube.finish("tube_bound"));

    let mut lip = Worst::new();
    let mut growth = Worst::new();
    for (t, x, y) in &points {
        let Ok(us) = p.controls_at(*t, spec.control_level) else { continue };
        for u in &us {
            let fx = p.velocity(*t, x, u);
            let fy = p.velocity(*t, y, u);
            let lx = p.cost(*t, x, u);
            let ly = p.cost(*t, y, u);
            let d = dist(x, y);
            if d > 0.0 {
                let ratio = (dist(&fx, &fy) + (lx - ly).abs()) / d;
                lip.push(Witness { t: *t, x: x.clone(), u: u.clone(), value: ratio, bound: p.data.k.value_at(*t) });
            }
            growth.push(Witness {
                t: *t,
                x: x.clone(),
                u: u.clone(),
                value: norm(&fx) + lx.abs(),
                bound: p.data.c.value_at(*t) * (1.0 + norm(x)),
            });
        }
    }
    entries.push(lip.finish("state_lipschitz"));
    entries.push(growth.finish("sublinear_growth"));

    let mut avg = Worst::new();
    let mut majorant = Worst::new();
    let cap = p.data.c.limsup_average() + p.data.k.limsup_average();
    let sup = p.data.c.sup() + p.data.k.sup();
    for j in 1..=n_times {
        let t = spec.horizon * j as f64 / n_times as f64;
        let int_c = p.data.c.integral(0.0, t);
        let a = (int_c + p.data.k.integral(0.0, t)) / t;
        avg.push(Witness { t, x: vec![], u: vec![], value: a, bound: if cap.is_finite() { sup } else { cap } });
        majorant.push(Witness { t, x: vec![], u: vec![], value: int_c, bound: p.data.a1 * t + p.data.a2 });
    }
    entries.push(avg.finish("average_modulus"));
    entries.push(majorant.finish("affine_cost_majorant"));

    AssumptionReport { problem: p.name.clone(), entries }
}
