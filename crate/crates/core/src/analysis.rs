//! Sampled checks of the value-function conclusions on computed fields:
//! spatial Lipschitz envelope, decay along feasible trajectories, the
//! relaxation gap, and Lipschitz continuity in time.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::TOL_FEAS;
use crate::linalg::{dist, norm};
use crate::problem::ProblemDefinition;
use crate::trajectory::{TrackingConstants, Trajectory};
use crate::value::{solve_value, GridSpec, Scheme, SolveOptions, ValueField, TOL_DP};

/// `2·(dx + dt)` with `dx` the largest spacing.
pub fn scheme_tolerance(field: &ValueField) -> f64 {
    let dx = field.spacing().into_iter().fold(0.0, f64::max);
    2.0 * (dx + field.dt)
}

/// Envelope `b e^{−(λ−K)t}` with `b = λC/(λ−K) + 1`, `K = max(K_track, a₁)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzEnvelope {
    pub lambda: f64,
    pub k: f64,
    pub ln_c: f64,
    pub ln_b: f64,
}

impl LipschitzEnvelope {
    pub fn new(lambda: f64, constants: &TrackingConstants, a1: f64) -> Result<Self> {
        let k = constants.k.max(a1);
        if !(lambda > k) {
            return Err(Error::DiscountBelowThreshold { lambda, k });
        }
        // ln(λC/(λ−K) + 1) = ln(λC/(λ−K)) + ln(1 + (λ−K)/(λC))
        let ln_main = lambda.ln() + constants.ln_c - (lambda - k).ln();
        let ln_b = ln_main + (-ln_main).exp().ln_1p();
        Ok(Self { lambda, k, ln_c: constants.ln_c, ln_b })
    }

    pub fn b(&self) -> f64 {
        self.ln_b.exp()
    }

    pub fn at(&self, t: f64) -> f64 {
        (self.ln_b - (self.lambda - self.k) * t).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairWitness {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub quotient: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzProfile {
    pub times: Vec<f64>,
    pub empirical: Vec<f64>,
    pub bound: Vec<f64>,
    pub envelope: LipschitzEnvelope,
    pub tol: f64,
    pub pass: bool,
    pub worst_witness: Option<PairWitness>,
}

/// Node pairs: axis neighbours first, then seeded random pairs, `budget` in total.
fn node_pairs(field: &ValueField, budget: usize, seed: u64) -> Vec<(usize, usize)> {
    let space = field.space_len();
    let mut pairs = Vec::new();
    let mut stride = 1;
    for &n in &field.nodes {
        for f in 0..space {
            if (f / stride) % n + 1 < n {
                pairs.push((f, f + stride));
            }
        }
        stride *= n;
    }
    pairs.truncate(budget);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while pairs.len() < budget && space > 1 {
        let a = rng.gen_range(0..space);
        let b = rng.gen_range(0..space);
        if a != b {
            pairs.push((a, b));
        }
    }
    pairs
}

/// Per-slice maximal difference quotient over feasible node pairs, against
/// the envelope `b e^{−(λ−K)t}` inflated by the scheme tolerance.
pub fn lipschitz_profile(
    field: &ValueField,
    constants: &TrackingConstants,
    a1: f64,
    pair_budget: usize,
    seed: u64,
) -> Result<LipschitzProfile> {
    let envelope = LipschitzEnvelope::new(field.lambda, constants, a1)?;
    let tol = scheme_tolerance(field);
    let pairs = node_pairs(field, pair_budget, seed);
    let coords: Vec<Vec<f64>> = (0..field.space_len()).map(|f| field.node(f)).collect();
    let mut times = Vec::new();
    let mut empirical = Vec::new();
    let mut bound = Vec::new();
    let mut pass = true;
    let mut worst: Option<(f64, PairWitness)> = None;
    for j in 0..field.time_nodes() {
        let t = field.time(j);
        let slice = field.slice(j);
        let b = envelope.at(t);
        let mut best = 0.0f64;
        let mut arg = None;
        for &(a, c) in &pairs {
            let (va, vc) = (slice[a], slice[c]);
            if !(va.is_finite() && vc.is_finite()) {
                continue;
            }
            let q = (va - vc).abs() / dist(&coords[a], &coords[c]);
            if q > best {
                best = q;
                arg = Some((a, c));
            }
        }
        let ok = best <= b * (1.0 + tol);
        pass &= ok;
        if let Some((a, c)) = arg {
            let ratio = best / b;
            if worst.as_ref().map_or(true, |(r, _)| ratio > *r) {
                worst = Some((
                    ratio,
                    PairWitness { t, x: coords[a].clone(), y: coords[c].clone(), quotient: best, bound: b },
                ));
            }
        }
        times.push(t);
        empirical.push(best);
        bound.push(b);
    }
    Ok(LipschitzProfile { times, empirical, bound, envelope, tol, pass, worst_witness: worst.map(|w| w.1) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub times: Vec<f64>,
    pub series: Vec<f64>,
    pub envelope: Vec<f64>,
    pub tail_bound: f64,
    pub tol: f64,
    pub x0_bound: f64,
    pub final_value: f64,
    pub tol_decay: f64,
    pub pass: bool,
}

/// `(1+|x₀|)e^{a₂}(a₁t + a₁/(λ−a₁) + a₂)e^{−(λ−a₁)t}`.
pub fn decay_envelope(a1: f64, a2: f64, lambda: f64, x0_bound: f64, t: f64) -> f64 {
    (1.0 + x0_bound) * a2.exp() * (a1 * t + a1 / (lambda - a1) + a2) * (-(lambda - a1) * t).exp()
}

/// Samples `|V(t, x(t))|` along a feasible trajectory, up to the field horizon,
/// against the envelope with `|x₀|` the norm of the first state.
pub fn decay_check(p: &ProblemDefinition, field: &ValueField, traj: &Trajectory, tol_decay: f64) -> Result<DecayReport> {
    let (a1, a2) = (p.data.a1, p.data.a2);
    if !(field.lambda > a1) {
        return Err(Error::DiscountTooSmall { lambda: field.lambda, a1 });
    }
    let tol = scheme_tolerance(field);
    let x0_bound = traj.states.first().map_or(0.0, |x| norm(x));
    let mut times = Vec::new();
    let mut series = Vec::new();
    let mut envelope = Vec::new();
    let mut pass = true;
    for (t, x) in traj.times.iter().zip(&traj.states) {
        if *t > field.horizon + 1e-9 * field.dt {
            break;
        }
        let v = field.evaluate(*t, x).map_err(|_| Error::TrajectoryOutOfGrid { t: *t })?.abs();
        let e = decay_envelope(a1, a2, field.lambda, x0_bound, *t);
        pass &= v <= e + field.tail_bound + tol;
        times.push(*t);
        series.push(v);
        envelope.push(e);
    }
    let final_value = *series.last().unwrap_or(&0.0);
    pass &= final_value < tol_decay;
    Ok(DecayReport { times, series, envelope, tail_bound: field.tail_bound, tol, x0_bound, final_value, tol_decay, pass })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub max_gap: f64,
    pub mean_gap: f64,
    pub min_gap: f64,
    pub count: usize,
    /// Largest allowed gap.
    pub gap_tol: f64,
    pub pass: bool,
}

/// Statistics of `V − V★` over nodes where both are finite.
pub fn relaxation_gap(v: &ValueField, vstar: &ValueField, gap_tol: f64) -> Result<GapReport> {
    if !v.same_grid(vstar) || v.lambda != vstar.lambda {
        return Err(Error::GridMismatch);
    }
    let (mut max_gap, mut min_gap, mut sum, mut count) = (0.0f64, 0.0f64, 0.0, 0usize);
    for (a, b) in v.values.iter().zip(&vstar.values) {
        if a.is_finite() && b.is_finite() {
            let g = a - b;
            max_gap = max_gap.max(g);
            min_gap = min_gap.min(g);
            sum += g;
            count += 1;
        }
    }
    let mean_gap = if count > 0 { sum / count as f64 } else { 0.0 };
    let pass = min_gap >= -TOL_DP && max_gap <= gap_tol + TOL_DP;
    Ok(GapReport { max_gap, mean_gap, min_gap, count, gap_tol, pass })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxationStudy {
    pub resolutions: Vec<usize>,
    pub gaps: Vec<f64>,
    pub reports: Vec<GapReport>,
    pub nonincreasing: bool,
    pub halved: bool,
    pub pass: bool,
}

/// Gap between ordinary fields with `g` chattered sub-steps and the relaxed
/// field at the finest resolution, for each `g` in `resolutions`.
pub fn relaxation_study(p: &ProblemDefinition, grid: &GridSpec, lambda: f64, level: usize, resolutions: &[usize]) -> Result<RelaxationStudy> {
    let finest = resolutions.iter().copied().max().unwrap_or(1);
    let vstar = solve_value(p, grid, &SolveOptions { lambda, scheme: Scheme::Relaxed { mixture_grid: finest }, level })?;
    let mut gaps = Vec::new();
    let mut reports = Vec::new();
    for &g in resolutions {
        let v = solve_value(p, grid, &SolveOptions { lambda, scheme: Scheme::Ordinary { chatter: g }, level })?;
        let r = relaxation_gap(&v, &vstar, f64::INFINITY)?;
        gaps.push(r.max_gap);
        reports.push(r);
    }
    let nonincreasing = gaps.windows(2).all(|w| w[1] <= w[0] + TOL_DP);
    let halved = match (gaps.first(), gaps.last()) {
        (Some(first), Some(last)) if gaps.len() > 1 => *last <= first / 2.0 + TOL_DP,
        _ => true,
    };
    let sound = reports.iter().all(|r| r.min_gap >= -TOL_DP);
    Ok(RelaxationStudy { resolutions: resolutions.to_vec(), gaps, reports, nonincreasing, halved, pass: nonincreasing && halved && sound })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeLipWitness {
    pub x: Vec<f64>,
    pub s: f64,
    pub s_tilde: f64,
    pub difference: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeLipStatus {
    Pass,
    Fail,
    /// `N` is below the sampled sup of `|f| + |L|`; the check does not apply.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeLipSample {
    pub probe: usize,
    pub s: f64,
    pub s_tilde: f64,
    pub difference: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeLipReport {
    pub status: TimeLipStatus,
    pub n_bound: f64,
    pub sampled_sup: f64,
    pub tol: f64,
    pub checks: usize,
    pub violations: usize,
    pub envelope: LipschitzEnvelope,
    pub worst_witness: Option<TimeLipWitness>,
    pub samples: Vec<TimeLipSample>,
}

/// `|V(s,x) − V(s̃,x)| / |s − s̃| ≤ (L(t) + 2e^{−λt}) N + tol` with
/// `L(t) = b e^{−(λ−K)t}` and `t = min(s, s̃)`, over consecutive time nodes.
pub fn time_lipschitz_check(
    field: &ValueField,
    p: &ProblemDefinition,
    constants: &TrackingConstants,
    n_bound: f64,
    probes: &[Vec<f64>],
    level: usize,
) -> Result<TimeLipReport> {
    let envelope = LipschitzEnvelope::new(field.lambda, constants, p.data.a1)?;
    let tol = scheme_tolerance(field);
    let nt = field.time_nodes();
    let mut sampled_sup = 0.0f64;
    for j in (0..nt).step_by((nt / 16).max(1)) {
        let t = field.time(j);
        let controls = p.controls_at(t, level)?;
        for f in 0..field.space_len() {
            let x = field.node(f);
            if p.max_h(t, &x) > TOL_FEAS {
                continue;
            }
            for u in &controls {
                sampled_sup = sampled_sup.max(norm(&p.velocity(t, &x, u)) + p.cost(t, &x, u).abs());
            }
        }
    }
    for x in probes {
        for j in 0..nt {
            let t = field.time(j);
            if p.max_h(t, x) > TOL_FEAS {
                return Err(Error::ProbeInfeasible { t, x: x.clone() });
            }
        }
    }
    if n_bound < sampled_sup {
        return Ok(TimeLipReport {
            status: TimeLipStatus::Skipped,
            n_bound,
            sampled_sup,
            tol,
            checks: 0,
            violations: 0,
            envelope,
            worst_witness: None,
            samples: Vec::new(),
        });
    }
    let mut checks = 0;
    let mut violations = 0;
    let mut worst: Option<(f64, TimeLipWitness)> = None;
    let mut samples = Vec::new();
    for (probe, x) in probes.iter().enumerate() {
        for j in 0..nt - 1 {
            let (s, st) = (field.time(j), field.time(j + 1));
            let a = field.evaluate(s, x)?;
            let b = field.evaluate(st, x)?;
            let difference = (a - b).abs() / (st - s);
            let t = s.min(st);
            let bound = (envelope.at(t) + 2.0 * (-field.lambda * t).exp()) * n_bound + tol;
            checks += 1;
            samples.push(TimeLipSample { probe, s, s_tilde: st, difference, bound });
            let excess = difference - bound;
            if !(difference <= bound) {
                violations += 1;
            }
            if worst.as_ref().map_or(true, |(e, _)| excess > *e) {
                worst = Some((excess, TimeLipWitness { x: x.clone(), s, s_tilde: st, difference, bound }));
            }
        }
    }
    Ok(TimeLipReport {
        status: if violations == 0 { TimeLipStatus::Pass } else { TimeLipStatus::Fail },
        n_bound,
        sampled_sup,
        tol,
        checks,
        violations,
        envelope,
        worst_witness: worst.map(|w| w.1),
        samples,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnalysisResult {
    Lipschitz(LipschitzProfile),
    Decay(DecayReport),
    Relaxation(GapReport),
    RelaxationStudy(RelaxationStudy),
    TimeLip(TimeLipReport),
}

impl AnalysisResult {
    pub fn kind(&self) -> &'static str {
        match self {
            AnalysisResult::Lipschitz(_) => "profile",
            AnalysisResult::Decay(_) => "decay",
            AnalysisResult::Relaxation(_) => "relax",
            AnalysisResult::RelaxationStudy(_) => "relax_study",
            AnalysisResult::TimeLip(_) => "timelip",
        }
    }

    /// `None` when the check was skipped.
    pub fn pass(&self) -> Option<bool> {
        match self {
            AnalysisResult::Lipschitz(r) => Some(r.pass),
            AnalysisResult::Decay(r) => Some(r.pass),
            AnalysisResult::Relaxation(r) => Some(r.pass),
            AnalysisResult::RelaxationStudy(r) => Some(r.pass),
            AnalysisResult::TimeLip(r) => match r.status {
                TimeLipStatus::Pass => Some(true),
                TimeLipStatus::Fail => Some(false),
                TimeLipStatus::Skipped => None,
            },
        }
    }

    /// One-line verdict: `{kind, pass, worst_witness, envelope_params}`.
    pub fn verdict(&self) -> serde_json::Value {
        use serde_json::json;
        let (witness, params) = match self {
            AnalysisResult::Lipschitz(r) => (json!(r.worst_witness), json!({
                "lambda": r.envelope.lambda, "k": r.envelope.k, "ln_c": r.envelope.ln_c,
                "ln_b": r.envelope.ln_b, "tol_scheme": r.tol,
            })),
            AnalysisResult::Decay(r) => {
                let worst = r.series.iter().zip(&r.envelope).zip(&r.times)
                    .map(|((v, e), t)| (v - e, *t, *v, *e))
                    .fold(None, |acc: Option<(f64, f64, f64, f64)>, c| match acc {
                        Some(a) if a.0 >= c.0 => Some(a),
                        _ => Some(c),
                    });
                (json!(worst.map(|(_, t, v, e)| json!({"t": t, "value": v, "envelope": e}))), json!({
                    "tail_bound": r.tail_bound, "tol_scheme": r.tol, "x0_bound": r.x0_bound,
                    "final_value": r.final_value, "tol_decay": r.tol_decay,
                }))
            }
            AnalysisResult::Relaxation(r) => (json!(null), json!({
                "max_gap": r.max_gap, "mean_gap": r.mean_gap, "min_gap": r.min_gap,
                "count": r.count, "gap_tol": r.gap_tol, "tol_dp": TOL_DP,
            })),
            AnalysisResult::RelaxationStudy(r) => (json!(null), json!({
                "resolutions": r.resolutions, "gaps": r.gaps, "nonincreasing": r.nonincreasing,
                "halved": r.halved, "tol_dp": TOL_DP,
            })),
            AnalysisResult::TimeLip(r) => (json!(r.worst_witness), json!({
                "status": r.status, "n_bound": r.n_bound, "sampled_sup": r.sampled_sup,
                "lambda": r.envelope.lambda, "k": r.envelope.k, "ln_b": r.envelope.ln_b,
                "tol_scheme": r.tol, "checks": r.checks, "violations": r.violations,
            })),
        };
        json!({ "kind": self.kind(), "pass": self.pass(), "worst_witness": witness, "envelope_params": params })
    }

    fn table(&self) -> (Vec<&'static str>, Vec<Vec<f64>>) {
        match self {
            AnalysisResult::Lipschitz(r) => (
                vec!["t", "empirical", "bound"],
                (0..r.times.len()).map(|i| vec![r.times[i], r.empirical[i], r.bound[i]]).collect(),
            ),
            AnalysisResult::Decay(r) => (
                vec!["t", "value", "envelope"],
                (0..r.times.len()).map(|i| vec![r.times[i], r.series[i], r.envelope[i]]).collect(),
            ),
            AnalysisResult::Relaxation(r) => (
                vec!["max_gap", "mean_gap", "min_gap", "gap_tol"],
                vec![vec![r.max_gap, r.mean_gap, r.min_gap, r.gap_tol]],
            ),
            AnalysisResult::RelaxationStudy(r) => (
                vec!["resolution", "max_gap", "min_gap"],
                r.resolutions.iter().zip(&r.reports).map(|(&g, rep)| vec![g as f64, rep.max_gap, rep.min_gap]).collect(),
            ),
            AnalysisResult::TimeLip(r) => (
                vec!["probe", "s", "s_tilde", "difference", "bound"],
                r.samples.iter().map(|c| vec![c.probe as f64, c.s, c.s_tilde, c.difference, c.bound]).collect(),
            ),
        }
    }
}

/// Writes `summary.json`, one CSV table per result, and two-column plot-data
/// files `<name>.<column>.dat` for every non-abscissa column.
pub fn emit_report(results: &[AnalysisResult], dir: &std::path::Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut seen = std::collections::BTreeMap::<&str, usize>::new();
    let mut entries = Vec::new();
    for r in results {
        let count = seen.entry(r.kind()).or_insert(0);
        let name = if *count == 0 { r.kind().to_string() } else { format!("{}_{}", r.kind(), count) };
        *count += 1;
        let mut files = Vec::new();
        let (cols, rows) = r.table();
        let path = dir.join(format!("{name}.csv"));
        crate::io::write_series_csv(&path, &cols, &rows)?;
        files.push(format!("{name}.csv"));
        written.push(path);
        if rows.len() > 1 {
            for (c, col) in cols.iter().enumerate().skip(1) {
                let mut text = String::new();
                for row in &rows {
                    text.push_str(&format!("{} {}\n", crate::io::fmt_num(row[0]), crate::io::fmt_num(row[c])));
                }
                let path = dir.join(format!("{name}.{col}.dat"));
                std::fs::write(&path, text)?;
                files.push(format!("{name}.{col}.dat"));
                written.push(path);
            }
        }
        let mut v = r.verdict();
        v["name"] = serde_json::json!(name);
        v["files"] = serde_json::json!(files);
        entries.push(v);
    }
    let path = dir.join("summary.json");
    crate::io::write_json(&path, &serde_json::json!({ "entries": entries }))?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::get_problem;
    use crate::value::Horizon;

    fn constants(ln_beta: f64) -> TrackingConstants {
        TrackingConstants::derive(ln_beta, &crate::modulus::Modulus::constant(0.0), 5.0).unwrap()
    }

    fn quad_field(c0: f64, lambda: f64) -> (ProblemDefinition, ValueField) {
        let p = get_problem("quadratic-cost-1d", &[("q".into(), 0.0), ("r".into(), 0.0), ("c0".into(), c0)]).unwrap();
        let g = GridSpec { bounds: vec![(-5.5, 5.5)], nodes: vec![111], dt: 0.1, t0: 0.0, horizon: Horizon::Fixed(3.0) };
        let f = solve_value(&p, &g, &SolveOptions { lambda, scheme: Scheme::Ordinary { chatter: 1 }, level: 0 }).unwrap();
        (p, f)
    }

    #[test]
    fn zero_cost_profile_is_flat() {
        let (_, f) = quad_field(0.0, 4.0);
        let prof = lipschitz_profile(&f, &constants(1.0), 2.0, 1000, 1).unwrap();
        assert!(prof.pass && prof.empirical.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn threshold_gate_and_blowup() {
        let (_, f) = quad_field(1.0, 4.0);
        let c = constants(1.0);
        let mut low = f.clone();
        low.lambda = c.k * 0.5;
        assert!(matches!(lipschitz_profile(&low, &c, 0.0, 10, 1), Err(Error::DiscountBelowThreshold { .. })));
        let near = LipschitzEnvelope::new(c.k + 1e-6, &c, 0.0).unwrap();
        assert!(near.b() > 1e6);
    }

    #[test]
    fn budget_is_monotone() {
        let (_, f) = quad_field(1.0, 4.0);
        let c = constants(1.0);
        let a = lipschitz_profile(&f, &c, 2.0, 50, 3).unwrap();
        let b = lipschitz_profile(&f, &c, 2.0, 500, 3).unwrap();
        assert!(a.empirical.iter().zip(&b.empirical).all(|(x, y)| x <= y));
    }

    #[test]
    fn identical_fields_have_zero_gap() {
        let (_, f) = quad_field(1.0, 4.0);
        let r = relaxation_gap(&f, &f, 0.0).unwrap();
        assert_eq!((r.max_gap, r.min_gap), (0.0, 0.0));
        assert!(r.pass);
        let mut other = f.clone();
        other.dt *= 2.0;
        assert!(matches!(relaxation_gap(&f, &other, 0.0), Err(Error::GridMismatch)));
    }

    #[test]
    fn constant_cost_time_quotients() {
        let (p, f) = quad_field(1.0, 4.0);
        let probes = vec![vec![0.0], vec![1.0]];
        let r = time_lipschitz_check(&f, &p, &constants(0.5), 3.0, &probes, 0).unwrap();
        assert_eq!(r.status, TimeLipStatus::Pass);
        let r = time_lipschitz_check(&f, &p, &constants(0.5), 0.5, &probes, 0).unwrap();
        assert_eq!(r.status, TimeLipStatus::Skipped);
        assert!(matches!(
            time_lipschitz_check(&f, &p, &constants(0.5), 3.0, &[vec![7.0]], 0),
            Err(Error::ProbeInfeasible { .. })
        ));
    }

    #[test]
    fn report_files() {
        let dir = tempfile::tempdir().unwrap();
        emit_report(&[], dir.path()).unwrap();
        let s: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
        assert_eq!(s["entries"].as_array().unwrap().len(), 0);

        let (_, f) = quad_field(1.0, 4.0);
        let prof = lipschitz_profile(&f, &constants(1.0), 2.0, 200, 1).unwrap();
        let results = [AnalysisResult::Lipschitz(prof.clone())];
        emit_report(&results, dir.path()).unwrap();
        let first = std::fs::read(dir.path().join("profile.csv")).unwrap();
        let (cols, rows) = crate::io::read_series_csv(&dir.path().join("profile.csv")).unwrap();
        assert_eq!(cols, ["t", "empirical", "bound"]);
        assert_eq!(rows.len(), prof.times.len());
        emit_report(&results, dir.path()).unwrap();
        assert_eq!(first, std::fs::read(dir.path().join("profile.csv")).unwrap());
    }

    #[test]
    fn zero_cost_decay() {
        let (p, f) = quad_field(0.0, 4.0);
        let tr = Trajectory::from_states(0.0, 0.1, vec![vec![0.5]; 31]);
        let r = decay_check(&p, &f, &tr, 1e-2).unwrap();
        assert!(r.pass && r.series.iter().all(|&v| v == 0.0));
    }
}
