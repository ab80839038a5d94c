//! Trajectories on uniform grids: fixed-step integration, nearest-velocity
//! (Filippov) projection, viable trajectories, neighboring feasible
//! trajectories and exponential tracking.

mod nft;
mod scenarios;
mod tracking;
mod viable;

pub use nft::{derive_nft_constants, nft_correct, NftConstants, NftResult};
pub use scenarios::violating_references;
pub use tracking::{track_feasible, tracking_constants, TrackingConstants, TrackingResult};
pub use viable::{viable_trajectory, ViableOptions};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{all_finite, axpy, dist};
use crate::problem::ProblemDefinition;

pub const TOL_ODE: f64 = 1e-10;

/// Control applied over one step: a single control, or equal sub-steps of
/// several (a discrete realization of a mixture).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepControl {
    Plain(Vec<f64>),
    Chattered(Vec<Vec<f64>>),
}

impl StepControl {
    pub fn substeps(&self) -> &[Vec<f64>] {
        match self {
            StepControl::Plain(u) => std::slice::from_ref(u),
            StepControl::Chattered(us) => us,
        }
    }

    /// Time-average of the applied controls.
    pub fn mean(&self) -> Vec<f64> {
        let subs = self.substeps();
        let mut out = vec![0.0; subs[0].len()];
        for u in subs {
            for (o, v) in out.iter_mut().zip(u) {
                *o += v / subs.len() as f64;
            }
        }
        out
    }

    /// Average velocity of the sub-step controls, frozen at `(t, x)`.
    pub fn velocity(&self, p: &ProblemDefinition, t: f64, x: &[f64]) -> Vec<f64> {
        let subs = self.substeps();
        let mut out = vec![0.0; x.len()];
        for u in subs {
            for (o, v) in out.iter_mut().zip(p.velocity(t, x, u)) {
                *o += v / subs.len() as f64;
            }
        }
        out
    }

    /// Average running cost of the sub-step controls, frozen at `(t, x)`.
    pub fn cost(&self, p: &ProblemDefinition, t: f64, x: &[f64]) -> f64 {
        let subs = self.substeps();
        subs.iter().map(|u| p.cost(t, x, u)).sum::<f64>() / subs.len() as f64
    }
}

/// Splits a step into `substeps` slots distributed over a mixture's support
/// by largest-remainder rounding, interleaved so partial sums track the weights.
pub fn chatter(support: &[(f64, Vec<f64>)], substeps: usize) -> StepControl {
    if support.len() == 1 {
        return StepControl::Plain(support[0].1.clone());
    }
    let total: f64 = support.iter().map(|s| s.0).sum();
    let exact: Vec<f64> = support.iter().map(|s| s.0 / total * substeps as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..support.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    let mut left = substeps - counts.iter().sum::<usize>();
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    let mut used = vec![0usize; support.len()];
    let mut seq = Vec::with_capacity(substeps);
    for s in 1..=substeps {
        let pick = (0..support.len())
            .filter(|&i| used[i] < counts[i])
            .max_by(|&a, &b| {
                let da = counts[a] as f64 * s as f64 / substeps as f64 - used[a] as f64;
                let db = counts[b] as f64 * s as f64 / substeps as f64 - used[b] as f64;
                da.total_cmp(&db).then(b.cmp(&a))
            })
            .expect("counts sum to substeps");
        used[pick] += 1;
        seq.push(support[pick].1.clone());
    }
    StepControl::Chattered(seq)
}

/// Number of sub-steps used to realize mixtures: `4(n+1)`.
pub fn chatter_substeps(n: usize) -> usize {
    4 * (n + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// One entry per step; absent for raw reference paths.
    pub controls: Option<Vec<StepControl>>,
    pub dt: f64,
}

impl Trajectory {
    pub fn from_states(t0: f64, dt: f64, states: Vec<Vec<f64>>) -> Self {
        let times = (0..states.len()).map(|j| t0 + dt * j as f64).collect();
        Self { times, states, controls: None, dt }
    }

    pub fn t0(&self) -> f64 {
        self.times[0]
    }

    pub fn t1(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    /// Difference-quotient velocity of step `j`.
    pub fn step_velocity(&self, j: usize) -> Vec<f64> {
        self.states[j + 1].iter().zip(&self.states[j]).map(|(b, a)| (b - a) / self.dt).collect()
    }

    pub fn velocities(&self) -> Vec<Vec<f64>> {
        (0..self.steps()).map(|j| self.step_velocity(j)).collect()
    }

    pub fn max_h(&self, p: &ProblemDefinition) -> Vec<f64> {
        self.times.iter().zip(&self.states).map(|(t, x)| p.max_h(*t, x)).collect()
    }

    /// `max_j |self_j − other_j|` over common nodes.
    pub fn sup_dist(&self, other: &Trajectory) -> f64 {
        self.states.iter().zip(&other.states).map(|(a, b)| dist(a, b)).fold(0.0, f64::max)
    }

    /// Sub-trajectory on nodes `a..=b`.
    pub fn slice(&self, a: usize, b: usize) -> Trajectory {
        Trajectory {
            times: self.times[a..=b].to_vec(),
            states: self.states[a..=b].to_vec(),
            controls: self.controls.as_ref().map(|c| c[a..b].to_vec()),
            dt: self.dt,
        }
    }
}

fn rk4(p: &ProblemDefinition, t: f64, x: &[f64], u: &[f64], h: f64) -> Vec<f64> {
    let k1 = p.velocity(t, x, u);
    let k2 = p.velocity(t + 0.5 * h, &axpy(x, 0.5 * h, &k1), u);
    let k3 = p.velocity(t + 0.5 * h, &axpy(x, 0.5 * h, &k2), u);
    let k4 = p.velocity(t + h, &axpy(x, h, &k3), u);
    x.iter()
        .enumerate()
        .map(|(i, xi)| xi + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// One step of length `dt` under `control`, RK4 on each sub-step.
pub fn step(p: &ProblemDefinition, t: f64, x: &[f64], control: &StepControl, dt: f64) -> Vec<f64> {
    let subs = control.substeps();
    let h = dt / subs.len() as f64;
    let mut y = x.to_vec();
    for (k, u) in subs.iter().enumerate() {
        y = rk4(p, t + h * k as f64, &y, u, h);
    }
    y
}

/// Integrates `schedule` (one control per step) from `(t0, x0)`.
pub fn integrate(p: &ProblemDefinition, t0: f64, x0: &[f64], schedule: &[StepControl], dt: f64) -> Result<Trajectory> {
    let mut states = Vec::with_capacity(schedule.len() + 1);
    states.push(x0.to_vec());
    for (j, c) in schedule.iter().enumerate() {
        let next = step(p, t0 + dt * j as f64, &states[j], c, dt);
        if !all_finite(&next) {
            return Err(Error::NonFiniteState { step: j + 1 });
        }
        states.push(next);
    }
    let mut traj = Trajectory::from_states(t0, dt, states);
    traj.controls = Some(schedule.to_vec());
    Ok(traj)
}

#[derive(Debug, Clone, Default)]
pub struct FilippovOptions<'a> {
    pub level: usize,
    /// Additional per-step candidates (e.g. the reference's own controls).
    pub extra: Option<&'a [StepControl]>,
    /// Path used to break velocity ties; defaults to integrating the
    /// reference velocities from `x0`.
    pub reference_path: Option<&'a [Vec<f64>]>,
}

/// Forward sweep choosing, at each step, the candidate control whose velocity
/// at the current state is nearest to `ref_velocity[j]`. Ties are broken by
/// the distance of the next state to the reference path.
pub fn filippov_project(
    p: &ProblemDefinition,
    t0: f64,
    x0: &[f64],
    ref_velocity: &[Vec<f64>],
    dt: f64,
    opts: &FilippovOptions,
) -> Result<Trajectory> {
    let implicit: Vec<Vec<f64>>;
    let path = match opts.reference_path {
        Some(path) => path,
        None => {
            let mut y = vec![x0.to_vec()];
            for v in ref_velocity {
                let next = axpy(y.last().unwrap(), dt, v);
                y.push(next);
            }
            implicit = y;
            &implicit
        }
    };
    let mut schedule = Vec::with_capacity(ref_velocity.len());
    let mut states = vec![x0.to_vec()];
    for (j, target) in ref_velocity.iter().enumerate() {
        let t = t0 + dt * j as f64;
        let x = &states[j];
        let mut candidates: Vec<StepControl> = p.controls_at(t, opts.level)?.into_iter().map(StepControl::Plain).collect();
        if let Some(extra) = opts.extra {
            if let Some(c) = extra.get(j) {
                candidates.push(c.clone());
            }
        }
        let mut best: Option<(f64, f64, StepControl)> = None;
        for c in candidates {
            let v = c.velocity(p, t, x);
            let mismatch = dist(&v, target);
            let better = match &best {
                None => true,
                Some((bm, btie, _)) => {
                    if mismatch < bm - 1e-12 {
                        true
                    } else if mismatch <= bm + 1e-12 {
                        let tie = path.get(j + 1).map_or(0.0, |y| dist(&axpy(x, dt, &v), y));
                        tie < btie - 1e-15
                    } else {
                        false
                    }
                }
            };
            if better {
                let tie = path.get(j + 1).map_or(0.0, |y| dist(&axpy(x, dt, &v), y));
                best = Some((mismatch, tie, c));
            }
        }
        let (_, _, c) = best.expect("control set is nonempty");
        let next = step(p, t, x, &c, dt);
        if !all_finite(&next) {
            return Err(Error::NonFiniteState { step: j + 1 });
        }
        states.push(next);
        schedule.push(c);
    }
    let mut traj = Trajectory::from_states(t0, dt, states);
    traj.controls = Some(schedule);
    Ok(traj)
}

/// Velocities of `traj`'s steps: the control velocity when controls are
/// present, otherwise difference quotients.
pub fn reference_velocities(p: &ProblemDefinition, traj: &Trajectory) -> Vec<Vec<f64>> {
    match &traj.controls {
        Some(cs) => cs.iter().enumerate().map(|(j, c)| c.velocity(p, traj.times[j], &traj.states[j])).collect(),
        None => traj.velocities(),
    }
}
