use crate::error::{Error, Result};
use crate::geometry::TOL_FEAS;
use crate::ipc::{inward_margin, IpcCertificate};
use crate::linalg::all_finite;
use crate::problem::ProblemDefinition;

use super::{chatter, chatter_substeps, step, StepControl, Trajectory};

#[derive(Debug, Clone, Default)]
pub struct ViableOptions<'a> {
    /// Clearance below which the inward mixture is applied; defaults to `cert.eta`.
    pub tube: Option<f64>,
    /// Controls applied outside the tube; defaults to the problem's default control.
    pub nominal: Option<&'a [StepControl]>,
}

/// Feasible trajectory on `[t0, t1]`: inside the boundary tube the certified
/// inward mixture is applied (chattered over sub-steps), elsewhere the
/// nominal control.
pub fn viable_trajectory(
    p: &ProblemDefinition,
    cert: &IpcCertificate,
    t0: f64,
    x0: &[f64],
    t1: f64,
    dt: f64,
    opts: &ViableOptions,
) -> Result<Trajectory> {
    let max_h = p.max_h(t0, x0);
    if max_h > TOL_FEAS {
        return Err(Error::InfeasibleInput { t: t0, max_h });
    }
    let tube = opts.tube.unwrap_or(cert.eta);
    let steps = ((t1 - t0) / dt).round().max(0.0) as usize;
    let substeps = chatter_substeps(p.n);
    let mut states = vec![x0.to_vec()];
    let mut schedule = Vec::with_capacity(steps);
    for j in 0..steps {
        let t = t0 + dt * j as f64;
        let x = &states[j];
        let nominal = || {
            opts.nominal
                .and_then(|n| n.get(j).cloned())
                .unwrap_or_else(|| StepControl::Plain(p.default_control.clone()))
        };
        let control = if p.clearance_lb(t, x) <= tube {
            let m = inward_margin(p, t, x, cert.delta.max(tube), cert.level)?;
            if m.r.is_finite() {
                chatter(&m.support(), substeps)
            } else {
                nominal()
            }
        } else {
            nominal()
        };
        let next = step(p, t, x, &control, dt);
        if !all_finite(&next) {
            return Err(Error::NonFiniteState { step: j + 1 });
        }
        let h = p.max_h(t + dt, &next);
        if h > TOL_FEAS {
            return Err(Error::ViabilityLost { t: t + dt, max_h: h });
        }
        states.push(next);
        schedule.push(control);
    }
    let mut traj = Trajectory::from_states(t0, dt, states);
    traj.controls = Some(schedule);
    Ok(traj)
}
