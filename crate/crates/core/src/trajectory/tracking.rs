use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::TOL_FEAS;
use crate::ipc::IpcCertificate;
use crate::modulus::Modulus;
use crate::problem::ProblemDefinition;

use super::nft::node_deviation;
use super::{derive_nft_constants, filippov_project, nft_correct, reference_velocities, FilippovOptions, Trajectory};

/// Constants of the exponential tracking bound `C e^{K(t−t₀)} |x¹ − x⁰|`.
/// `C` itself may overflow, so `ln C` is kept alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingConstants {
    pub beta: f64,
    pub ln_beta: f64,
    pub k1: f64,
    pub k2: f64,
    pub k_tilde: f64,
    pub k: f64,
    pub c: f64,
    pub ln_c: f64,
}

impl TrackingConstants {
    /// Rejects `k1` unless `2β + 1 < e^{k1}`.
    pub fn new(ln_beta: f64, k1: f64, k2: f64, k_tilde: f64) -> Result<Self> {
        let ln_2b1 = ln_two_beta_plus_one(ln_beta);
        if !(ln_2b1 < k1) {
            return Err(Error::InvalidConstants(format!("2β+1 = e^{ln_2b1} is not below e^K1 = e^{k1}")));
        }
        if !(k2 >= 0.0 && k_tilde >= 0.0) {
            return Err(Error::InvalidConstants("K2 and k̃ must be nonnegative".into()));
        }
        let ln_c = k_tilde + ln_2b1;
        Ok(Self { beta: ln_beta.exp(), ln_beta, k1, k2, k_tilde, k: k1 + k2, c: ln_c.exp(), ln_c })
    }

    /// Picks `K1` just above `ln(2β+1)` and fits `(K2, k̃)` so that
    /// `∫₀^{t+1} φ ≤ K2 t + k̃` on `[0, horizon]`.
    pub fn derive(ln_beta: f64, phi: &Modulus, horizon: f64) -> Result<Self> {
        let k1 = ln_two_beta_plus_one(ln_beta) * (1.0 + 1e-12) + 1e-12;
        let (k2, k_tilde) = affine_majorant(|t| phi.integral(0.0, t + 1.0), horizon);
        Self::new(ln_beta, k1, k2, k_tilde)
    }

    /// `C e^{K s} d`.
    pub fn bound(&self, elapsed: f64, d: f64) -> f64 {
        if d == 0.0 {
            return 0.0;
        }
        (self.ln_c + self.k * elapsed + d.ln()).exp()
    }
}

/// Tracking constants for a horizon, built on the unit-interval correction constants.
pub fn tracking_constants(p: &ProblemDefinition, cert: &IpcCertificate, horizon: f64) -> Result<TrackingConstants> {
    let nft_unit = derive_nft_constants(p, cert, 1.0)?;
    TrackingConstants::derive(nft_unit.ln_beta, &p.data.phi, horizon)
}

fn ln_two_beta_plus_one(ln_beta: f64) -> f64 {
    // ln(2β + 1) = ln 2 + ln β + ln(1 + 1/(2β))
    std::f64::consts::LN_2 + ln_beta + (-std::f64::consts::LN_2 - ln_beta).exp().ln_1p()
}

/// Least-squares line through samples of `g` on `[0, horizon]`, with the
/// intercept raised until the line dominates every sample.
fn affine_majorant(g: impl Fn(f64) -> f64, horizon: f64) -> (f64, f64) {
    let n = 256usize;
    let ts: Vec<f64> = (0..=n).map(|i| horizon.max(1.0) * i as f64 / n as f64).collect();
    let ys: Vec<f64> = ts.iter().map(|&t| g(t)).collect();
    let mt = ts.iter().sum::<f64>() / ts.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxx: f64 = ts.iter().map(|t| (t - mt) * (t - mt)).sum();
    let sxy: f64 = ts.iter().zip(&ys).map(|(t, y)| (t - mt) * (y - my)).sum();
    let slope = if sxx > 0.0 { (sxy / sxx).max(0.0) } else { 0.0 };
    let intercept = ts.iter().zip(&ys).map(|(t, y)| y - slope * t).fold(0.0, f64::max);
    (slope, intercept * (1.0 + 1e-12))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingResult {
    pub trajectory: Trajectory,
    pub constants: TrackingConstants,
    pub deviations: Vec<f64>,
    pub bounds: Vec<f64>,
    pub violations: usize,
}

/// Builds a feasible trajectory from `x1` that shadows the feasible
/// `reference` (from `x⁰`) over unit intervals: each interval replays the
/// reference velocities from the current state and then restores strict
/// feasibility with the neighboring-trajectory correction.
pub fn track_feasible(
    p: &ProblemDefinition,
    cert: &IpcCertificate,
    reference: &Trajectory,
    x1: &[f64],
) -> Result<TrackingResult> {
    let t0 = reference.t0();
    let dt = reference.dt;
    let max_h = p.max_h(t0, x1);
    if max_h > TOL_FEAS {
        return Err(Error::InfeasibleStart { max_h });
    }
    let constants = tracking_constants(p, cert, reference.t1() - t0)?;

    let n = reference.steps();
    let per_unit = ((1.0 / dt).round() as usize).max(1);
    let ref_vel = reference_velocities(p, reference);
    let ref_ctl = reference.controls.clone();
    let mut states = vec![x1.to_vec()];
    let mut controls = Vec::with_capacity(n);
    let mut a = 0;
    while a < n {
        let b = (a + per_unit).min(n);
        let ta = t0 + dt * a as f64;
        let extra = ref_ctl.as_ref().map(|c| &c[a..b]);
        let shadow = filippov_project(
            p,
            ta,
            states.last().unwrap(),
            &ref_vel[a..b],
            dt,
            &FilippovOptions { level: cert.level, extra, reference_path: Some(&reference.states[a..=b]) },
        )?;
        let fixed = nft_correct(p, cert, &shadow)?;
        states.extend(fixed.corrected.states[1..].iter().cloned());
        controls.extend(fixed.corrected.controls.unwrap_or_default());
        a = b;
    }
    let mut trajectory = Trajectory::from_states(t0, dt, states);
    trajectory.controls = Some(controls);

    let d0 = crate::linalg::dist(x1, &reference.states[0]);
    let deviations = node_deviation(&trajectory.states, &reference.states);
    let bounds: Vec<f64> = trajectory.times.iter().map(|t| constants.bound(t - t0, d0)).collect();
    let violations = deviations.iter().zip(&bounds).filter(|(d, b)| **d > **b + super::TOL_ODE).count();
    Ok(TrackingResult { trajectory, constants, deviations, bounds, violations })
}
