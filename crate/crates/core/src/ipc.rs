//! Inward-pointing condition: per-point margins as matrix games, sampled
//! verification along `∂Ω(t)`, and the tube constants `(ε, η)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{active_set, sample_boundary_points, TOL_BOUNDARY};
use crate::linalg::dot;
use crate::lp::matrix_game;
use crate::problem::ProblemDefinition;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InwardMargin {
    /// Game value; `+∞` when no constraint is near-active.
    pub r: f64,
    /// Weights over `controls`.
    pub alpha: Vec<f64>,
    pub controls: Vec<Vec<f64>>,
    pub v: Vec<f64>,
}

impl InwardMargin {
    /// Controls with positive weight, paired with their weights.
    pub fn support(&self) -> Vec<(f64, Vec<f64>)> {
        self.alpha
            .iter()
            .zip(&self.controls)
            .filter(|(a, _)| **a > 1e-12)
            .map(|(a, u)| (*a, u.clone()))
            .collect()
    }
}

/// Best mixture of sampled velocities against the `delta`-active constraint
/// gradients: `max_α min_i −⟨∇h_i, Σ α_j f(t,x,u_j)⟩`.
pub fn inward_margin(p: &ProblemDefinition, t: f64, x: &[f64], delta: f64, level: usize) -> Result<InwardMargin> {
    let controls = p.controls_at(t, level)?;
    let vels: Vec<Vec<f64>> = controls.iter().map(|u| p.velocity(t, x, u)).collect();
    let active = active_set(p, t, x, delta, TOL_BOUNDARY).indices;
    if active.is_empty() {
        let mut alpha = vec![0.0; controls.len()];
        alpha[0] = 1.0;
        return Ok(InwardMargin { r: f64::INFINITY, alpha, v: vels[0].clone(), controls });
    }
    let grads: Vec<Vec<f64>> = active.iter().map(|&i| (p.constraints[i].grad)(t, x)).collect();
    let payoff: Vec<Vec<f64>> = grads.iter().map(|g| vels.iter().map(|v| -dot(g, v)).collect()).collect();
    let game = matrix_game(&payoff)?;
    let mut v = vec![0.0; p.n];
    for (a, f) in game.col_strategy.iter().zip(&vels) {
        for (vi, fi) in v.iter_mut().zip(f) {
            *vi += a * fi;
        }
    }
    Ok(InwardMargin { r: game.value, alpha: game.col_strategy, controls, v })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IpcWitness {
    pub t: f64,
    pub x: Vec<f64>,
    pub r: f64,
    /// Support of the optimal mixture: `(weight, control)`.
    pub mixture: Vec<(f64, Vec<f64>)>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IpcCertificate {
    pub r: f64,
    pub delta: f64,
    pub eps: f64,
    pub eta: f64,
    pub n_samples: usize,
    /// Control refinement level used for the margins.
    pub level: usize,
    /// Verification is by sampling, not proof.
    pub sampled: bool,
    pub witnesses: Vec<IpcWitness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IpcFailure {
    pub r_min: f64,
    pub n_samples: usize,
    pub worst_witness: IpcWitness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum IpcOutcome {
    Pass(IpcCertificate),
    Fail(IpcFailure),
}

impl IpcOutcome {
    pub fn certificate(self) -> Option<IpcCertificate> {
        match self {
            IpcOutcome::Pass(c) => Some(c),
            IpcOutcome::Fail(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IpcSampling {
    pub t0: f64,
    pub t1: f64,
    pub n_times: usize,
    /// Rays per time node (2D and up; 1D always casts two).
    pub n_rays: usize,
    pub level: usize,
}

impl Default for IpcSampling {
    fn default() -> Self {
        Self { t0: 0.0, t1: 2.0 * std::f64::consts::PI, n_times: 100, n_rays: 16, level: 0 }
    }
}

/// Evaluates the margin at sampled boundary points. Passes iff every margin
/// is at least `r_min`; the certificate then carries `r = min margin`.
pub fn verify_ipc(p: &ProblemDefinition, sampling: &IpcSampling, delta: f64, r_min: f64) -> Result<IpcOutcome> {
    let mut witnesses = Vec::new();
    let nt = sampling.n_times.max(1);
    for j in 0..nt {
        let t = if nt == 1 {
            sampling.t0
        } else {
            sampling.t0 + (sampling.t1 - sampling.t0) * j as f64 / (nt - 1) as f64
        };
        for x in sample_boundary_points(p, t, sampling.n_rays)? {
            let m = inward_margin(p, t, &x, delta, sampling.level)?;
            witnesses.push(IpcWitness { t, mixture: m.support(), r: m.r, v: m.v, x });
        }
    }
    let n_samples = witnesses.len();
    let worst = witnesses
        .iter()
        .min_by(|a, b| a.r.total_cmp(&b.r))
        .cloned()
        .ok_or(Error::BoundarySamplingFailed { t: sampling.t0 })?;
    if !(worst.r >= r_min) {
        return Ok(IpcOutcome::Fail(IpcFailure { r_min, n_samples, worst_witness: worst }));
    }
    let (eps, eta) = synthesize_ipc_constants(p, worst.r, delta)?;
    Ok(IpcOutcome::Pass(IpcCertificate {
        r: worst.r,
        delta,
        eps,
        eta,
        n_samples,
        level: sampling.level,
        sampled: true,
        witnesses,
    }))
}

/// Data entering the tube-constant inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TubeData {
    pub m: f64,
    /// Supremum of the state modulus `φ`.
    pub phi: f64,
    /// Largest gradient bound.
    pub l: f64,
    /// Largest Hölder constant.
    pub k: f64,
}

impl TubeData {
    pub fn of(p: &ProblemDefinition) -> Self {
        Self { m: p.data.m, phi: p.data.phi.sup(), l: p.grad_bound_max(), k: p.holder_const_max() }
    }
}

fn positive_or_inf(den: f64, num: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        f64::INFINITY
    }
}

/// `η′ = min{ r/(4φL), min_i (r/(4 k_i M))^{1/θ_i} }`, zero-modulus terms dropped.
pub fn eta_prime(p: &ProblemDefinition, r: f64) -> f64 {
    let d = TubeData::of(p);
    let mut out = positive_or_inf(4.0 * d.phi * d.l, r);
    for c in &p.constraints {
        let base = positive_or_inf(4.0 * c.holder_const * d.m, r);
        out = out.min(base.powf(1.0 / c.holder_theta));
    }
    out
}

/// `ε′ = min{ k⁻¹(M + r/2L)⁻¹ r/8, r/(8L) }`.
pub fn eps_prime(d: &TubeData, r: f64) -> f64 {
    let a = positive_or_inf(d.k * (d.m + r / (2.0 * d.l)), r / 8.0);
    let b = positive_or_inf(8.0 * d.l, r);
    a.min(b)
}

/// `k⁻¹(M + r/4L + ε′)⁻² r/4`.
pub fn eps_holder_cap(d: &TubeData, r: f64, eps_p: f64) -> f64 {
    let s = d.m + r / (4.0 * d.l) + eps_p;
    positive_or_inf(d.k * s * s, r / 4.0)
}

/// Largest `(ε, η)` satisfying the four tube inequalities for margin `r` and
/// ball radius `delta`.
pub fn synthesize_ipc_constants(p: &ProblemDefinition, r: f64, delta: f64) -> Result<(f64, f64)> {
    if !(r > 0.0) || !(delta > 0.0) {
        return Err(Error::NoFeasibleConstants(format!("need r > 0 and delta > 0 (r={r}, delta={delta})")));
    }
    let d = TubeData::of(p);
    if !(d.l > 0.0) {
        return Err(Error::NoFeasibleConstants("no constraint with a positive gradient bound".into()));
    }
    let ep = eps_prime(&d, r);
    let etap = eta_prime(p, r);
    let mut eps = ep.min(eps_holder_cap(&d, r, ep));
    let spend = |e: f64| e * (d.m + r / (4.0 * d.l) + e);
    let slack = delta - spend(eps);
    let eta = if slack > 0.0 {
        etap.min(slack)
    } else {
        let (mut lo, mut hi) = (0.0, eps);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if spend(mid) <= 0.5 * delta {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        eps = lo;
        etap.min(delta - spend(eps))
    };
    if !(eps > 1e-12 && eta > 1e-12) {
        return Err(Error::NoFeasibleConstants(format!("eps={eps:e}, eta={eta:e}")));
    }
    Ok((eps, eta))
}
