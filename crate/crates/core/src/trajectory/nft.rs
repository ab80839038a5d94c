use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance_to_omega, DEFAULT_BUDGET, TOL_FEAS};
use crate::ipc::{inward_margin, IpcCertificate};
use crate::linalg::dist;
use crate::modulus::theta_modulus;
use crate::problem::ProblemDefinition;

use super::{
    chatter, chatter_substeps, filippov_project, reference_velocities, viable_trajectory, FilippovOptions, StepControl,
    Trajectory, ViableOptions,
};

/// Smallest violation used to size the inward push.
const RHO_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NftConstants {
    pub eps: f64,
    pub k_shift: f64,
    pub delta: f64,
    pub rho_bar: f64,
    pub m: usize,
    pub eta_hat: f64,
    pub beta_1: f64,
    pub beta_2: f64,
    pub beta_tilde: f64,
    /// `e^{θ_φ(δ)}`.
    pub k_growth: f64,
    pub beta_3: f64,
    pub beta: f64,
    pub ln_beta: f64,
    pub interval: f64,
    pub m_bound: f64,
    pub theta_phi: f64,
    pub theta_gamma: f64,
}

impl NftConstants {
    fn drift(&self) -> f64 {
        self.theta_phi.exp() * (self.theta_gamma + self.theta_phi * self.m_bound)
    }

    /// Whether every defining inequality holds as stated.
    pub fn conditions_hold(&self) -> bool {
        let (e, k, d, rb, mb) = (self.eps, self.k_shift, self.delta, self.rho_bar, self.m_bound);
        let g = self.drift();
        d <= e
            && rb + mb * d < e
            && k * rb < e
            && k > 1.0 / e
            && 4.0 * d * mb <= self.eta_hat
            && g < e
            && 2.0 * g * k < k * e - 1.0
            && self.interval / self.m as f64 <= d
            && self.beta >= self.beta_tilde
    }
}

/// Constants of the neighboring-trajectory construction for intervals of
/// length `interval`.
pub fn derive_nft_constants(p: &ProblemDefinition, cert: &IpcCertificate, interval: f64) -> Result<NftConstants> {
    let eps = cert.eps;
    if !(eps > 0.0) {
        return Err(Error::ConstantsInfeasible(format!("certificate eps must be positive, got {eps}")));
    }
    if !(interval > 0.0) {
        return Err(Error::ConstantsInfeasible(format!("interval must be positive, got {interval}")));
    }
    let mb = p.data.m;
    let k = 2.0 / eps;
    let eta_hat = cert.eta.min(p.data.eta_tilde);
    let drift = |d: f64| -> Result<f64> {
        let tp = theta_modulus(&p.data.phi, d)?;
        let tg = theta_modulus(&p.data.gamma, d)?;
        Ok(tp.exp() * (tg + tp * mb))
    };
    let ok = |d: f64| -> Result<bool> {
        let g = drift(d)?;
        Ok(d <= eps && mb * d < eps && 4.0 * d * mb <= eta_hat && g < eps && 2.0 * g * k < k * eps - 1.0)
    };
    let mut hi = eps;
    if mb > 0.0 {
        hi = hi.min(eta_hat / (4.0 * mb));
        // keep M·Δ strictly below ε so that ρ̄ > 0
        hi = hi.min(eps / mb * (1.0 - 1e-12));
    }
    let delta = if ok(hi)? {
        hi
    } else {
        let (mut lo, mut up) = (0.0, hi);
        for _ in 0..200 {
            let mid = 0.5 * (lo + up);
            if ok(mid)? {
                lo = mid;
            } else {
                up = mid;
            }
        }
        lo
    };
    if !(delta > 1e-15) {
        return Err(Error::ConstantsInfeasible("no positive interval cap satisfies the conditions".into()));
    }
    let rho_bar = (0.5 * (eps - mb * delta)).min(eps / (2.0 * k));
    let m = ((interval / delta).ceil() as usize).max(1);
    let g = drift(delta)?;
    let beta_1 = 2.0 * (mb + g) * k;
    let beta_2 = 2.0 * mb * delta / rho_bar;
    let beta_tilde = beta_1.max(beta_2);
    let k_growth = theta_modulus(&p.data.phi, interval)?.exp();
    let base = k_growth * beta_tilde;
    let ln_beta_3 = m as f64 * base.ln_1p() + (-(-(m as f64) * base.ln_1p()).exp()).ln_1p();
    let beta_3 = ln_beta_3.exp();
    let (beta, ln_beta) = if beta_3 >= beta_tilde { (beta_3, ln_beta_3) } else { (beta_tilde, beta_tilde.ln()) };
    Ok(NftConstants {
        eps,
        k_shift: k,
        delta,
        rho_bar,
        m,
        eta_hat,
        beta_1,
        beta_2,
        beta_tilde,
        k_growth,
        beta_3,
        beta,
        ln_beta,
        interval,
        m_bound: mb,
        theta_phi: theta_modulus(&p.data.phi, delta)?,
        theta_gamma: theta_modulus(&p.data.gamma, delta)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NftResult {
    pub corrected: Trajectory,
    pub rho_in: f64,
    pub sup_dist: f64,
    pub beta_used: f64,
    /// Lower bound (from the gradient bounds) on the distance to `∂Ω(t)`,
    /// minimized over nodes after the first.
    pub interior_clearance: f64,
    pub within_bound: bool,
    pub constants: NftConstants,
}

struct Working {
    states: Vec<Vec<f64>>,
    controls: Vec<StepControl>,
}

fn strictly_feasible(p: &ProblemDefinition, t0: f64, dt: f64, states: &[Vec<f64>], from: usize, to: usize) -> bool {
    (from..=to).all(|j| p.max_h(t0 + dt * j as f64, &states[j]) < 0.0)
}

/// Replays `vel`/`ctl` shifted by `shift` steps after pushing along the inward
/// mixture at `start`, then projects onto admissible velocities.
#[allow(clippy::too_many_arguments)]
fn push_and_replay(
    p: &ProblemDefinition,
    cert: &IpcCertificate,
    k_shift: f64,
    rho: f64,
    t0: f64,
    dt: f64,
    start: &[f64],
    vel: &[Vec<f64>],
    ctl: &[StepControl],
) -> Result<Trajectory> {
    let steps = vel.len();
    let mut margin = inward_margin(p, t0, start, cert.delta, cert.level)?;
    if !margin.r.is_finite() {
        let wider = cert.delta + p.clearance_lb(t0, start).max(0.0);
        margin = inward_margin(p, t0, start, wider, cert.level)?;
    }
    let push = chatter(&margin.support(), chatter_substeps(p.n));
    let push_v = margin.v.clone();
    let shift = ((k_shift * rho / dt).ceil() as usize).clamp(1, steps.max(1));
    let mut ref_vel = Vec::with_capacity(steps);
    let mut extra = Vec::with_capacity(steps);
    for j in 0..steps {
        if j < shift {
            ref_vel.push(push_v.clone());
            extra.push(push.clone());
        } else {
            ref_vel.push(vel[j - shift].clone());
            extra.push(ctl[j - shift].clone());
        }
    }
    filippov_project(p, t0, start, &ref_vel, dt, &FilippovOptions { level: cert.level, extra: Some(&extra), reference_path: None })
}

/// Corrects a reference trajectory that may leave `Ω` into a nearby
/// trajectory that starts at the same point and stays in the interior of
/// `Ω(t)` after the initial time.
pub fn nft_correct(p: &ProblemDefinition, cert: &IpcCertificate, xhat: &Trajectory) -> Result<NftResult> {
    let t0 = xhat.t0();
    let dt = xhat.dt;
    let n_steps = xhat.steps();
    let max_h0 = p.max_h(t0, &xhat.states[0]);
    if max_h0 > TOL_FEAS {
        return Err(Error::InfeasibleStart { max_h: max_h0 });
    }
    let constants = derive_nft_constants(p, cert, (xhat.t1() - t0).max(dt))?;
    let node_dist = |j: usize, x: &[f64]| -> Result<f64> {
        Ok(distance_to_omega(p, t0 + dt * j as f64, x, DEFAULT_BUDGET)?.distance)
    };
    let mut rho = 0.0f64;
    for (j, x) in xhat.states.iter().enumerate() {
        rho = rho.max(node_dist(j, x)?);
    }

    let ref_controls: Vec<StepControl> = match &xhat.controls {
        Some(c) => c.clone(),
        None => vec![StepControl::Plain(p.default_control.clone()); n_steps],
    };
    let mut cur = Working { states: xhat.states.clone(), controls: ref_controls };
    let mut cur_vel = reference_velocities(p, xhat);

    let m = constants.m.min(n_steps.max(1));
    let bounds: Vec<usize> = (0..=m).map(|i| (i * n_steps + m / 2) / m).map(|b| b.min(n_steps)).collect();
    let narrow = 1.25 * (p.data.m + p.data.omega_lip) * dt;

    for w in bounds.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b == a {
            continue;
        }
        if strictly_feasible(p, t0, dt, &cur.states, a + 1, b) {
            continue;
        }
        let mut rho_i = rho;
        for j in a..=n_steps {
            rho_i = rho_i.max(node_dist(j, &cur.states[j])?);
        }
        let rho_i = rho_i.max(RHO_FLOOR);
        let ta = t0 + dt * a as f64;
        let start = cur.states[a].clone();
        let piece_vel = &cur_vel[a..b];
        let piece_ctl = &cur.controls[a..b];

        let mut piece: Option<Trajectory> = None;
        if rho_i <= constants.rho_bar {
            let y = push_and_replay(p, cert, constants.k_shift, rho_i, ta, dt, &start, piece_vel, piece_ctl)?;
            if strictly_feasible(p, ta, dt, &y.states, 1, b - a) {
                piece = Some(y);
            }
        }
        if piece.is_none() {
            let tb = t0 + dt * b as f64;
            let opts = ViableOptions { tube: Some(narrow), nominal: Some(piece_ctl) };
            let viable = viable_trajectory(p, cert, ta, &start, tb, dt, &opts)?;
            let v_vel = reference_velocities(p, &viable);
            let v_ctl = viable.controls.clone().unwrap_or_default();
            let y = push_and_replay(p, cert, constants.k_shift, RHO_FLOOR, ta, dt, &start, &v_vel, &v_ctl)?;
            if strictly_feasible(p, ta, dt, &y.states, 1, b - a) {
                piece = Some(y);
            }
        }
        let Some(piece) = piece else {
            return Err(Error::CorrectionFailed(format!(
                "piece starting at t={ta} is not strictly feasible after correction"
            )));
        };

        let mut states = cur.states[..a].to_vec();
        states.extend(piece.states.iter().cloned());
        let mut controls = cur.controls[..a].to_vec();
        controls.extend(piece.controls.clone().unwrap_or_default());
        let mut vel = cur_vel[..a].to_vec();
        vel.extend(reference_velocities(p, &piece));

        if b < n_steps {
            let tb = t0 + dt * b as f64;
            let suffix_ctl = &cur.controls[b..];
            let suffix = filippov_project(
                p,
                tb,
                &piece.states[b - a],
                &cur_vel[b..],
                dt,
                &FilippovOptions { level: cert.level, extra: Some(suffix_ctl), reference_path: None },
            )?;
            states.extend(suffix.states[1..].iter().cloned());
            controls.extend(suffix.controls.clone().unwrap_or_default());
            vel.extend(reference_velocities(p, &suffix));
        }
        cur = Working { states, controls };
        cur_vel = vel;
    }

    let corrected = Trajectory {
        times: xhat.times.clone(),
        states: cur.states,
        controls: Some(cur.controls),
        dt,
    };
    if !strictly_feasible(p, t0, dt, &corrected.states, 1, n_steps) {
        return Err(Error::CorrectionFailed("corrected trajectory touches the boundary".into()));
    }
    let sup_dist = corrected.sup_dist(xhat);
    let interior_clearance = (1..=n_steps)
        .map(|j| p.clearance_lb(corrected.times[j], &corrected.states[j]))
        .fold(f64::INFINITY, f64::min);
    let within_bound = sup_dist <= constants.beta * rho.max(RHO_FLOOR);
    Ok(NftResult {
        corrected,
        rho_in: rho,
        sup_dist,
        beta_used: constants.beta,
        interior_clearance,
        within_bound,
        constants,
    })
}

/// Largest node deviation between two trajectories on a common grid.
pub(super) fn node_deviation(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| dist(x, y)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ipc::{verify_ipc, IpcSampling};
    use crate::problem::get_problem;
    use crate::trajectory::integrate;
    use std::f64::consts::PI;

    fn setup() -> (ProblemDefinition, IpcCertificate) {
        let p = get_problem("moving-wall-1d", &[]).unwrap();
        let c = verify_ipc(&p, &IpcSampling { n_times: 32, ..Default::default() }, 0.5, 0.5)
            .unwrap()
            .certificate()
            .unwrap();
        (p, c)
    }

    #[test]
    fn wall_constants() {
        let (p, c) = setup();
        let k = derive_nft_constants(&p, &c, 1.0).unwrap();
        assert_eq!(k.k_shift, 16.0);
        assert!(k.delta < 0.078125 && k.delta > 0.0781);
        assert_eq!(k.m, 13);
        assert!((k.beta_1 - 2.0 * (1.0 + 0.4 * k.delta) * 16.0).abs() < 1e-12);
        assert!(k.conditions_hold());
        assert!((k.ln_beta - 13.0 * (1.0 + k.beta_tilde).ln()).abs() < 1e-6);
    }

    #[test]
    fn invalid_certificate() {
        let (p, mut c) = setup();
        c.eps = 0.0;
        assert!(matches!(derive_nft_constants(&p, &c, 1.0), Err(Error::ConstantsInfeasible(_))));
    }

    #[test]
    fn interior_reference_is_kept() {
        let (p, c) = setup();
        let xhat = integrate(&p, 0.0, &[0.0], &vec![StepControl::Plain(vec![0.0]); 1000], 1e-3).unwrap();
        let r = nft_correct(&p, &c, &xhat).unwrap();
        assert_eq!(r.sup_dist, 0.0);
        assert_eq!(r.corrected.states, xhat.states);
    }

    #[test]
    fn dipping_wall_is_avoided() {
        let (p, c) = setup();
        // wall 1 + 0.4 sin t reaches 0.9 at sin t = −1/4
        let t_dip = PI + (0.25f64).asin();
        let t0 = t_dip - 0.5;
        let xhat = integrate(&p, t0, &[0.95], &vec![StepControl::Plain(vec![0.0]); 1000], 1e-3).unwrap();
        let r = nft_correct(&p, &c, &xhat).unwrap();
        assert!(r.rho_in > 0.04);
        assert_eq!(r.corrected.states[0], xhat.states[0]);
        assert!(r.interior_clearance > 0.0);
        assert!(r.within_bound);
        assert!(r.corrected.max_h(&p)[1..].iter().all(|&h| h < 0.0));
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let (p, c) = setup();
        let xhat = integrate(&p, 0.0, &[1.5], &vec![StepControl::Plain(vec![0.0]); 10], 1e-2).unwrap();
        assert!(matches!(nft_correct(&p, &c, &xhat), Err(Error::InfeasibleStart { .. })));
    }
}
