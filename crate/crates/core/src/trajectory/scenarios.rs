use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{sample_boundary_points, TOL_FEAS};
use crate::linalg::{axpy, sub};
use crate::problem::ProblemDefinition;

use super::{integrate, StepControl, Trajectory};

/// Seeded references of length `duration` that start in `Ω(t₀)` (between the
/// anchor and a boundary point) and leave `Ω` at some later node. Controls are
/// piecewise constant with up to three switches, drawn from the level-0 samples.
pub fn violating_references(
    p: &ProblemDefinition,
    count: usize,
    duration: f64,
    dt: f64,
    seed: u64,
) -> Result<Vec<Trajectory>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = (duration / dt).round() as usize;
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > 200 * count.max(1) {
            return Err(Error::CorrectionFailed(format!(
                "found only {} violating references in {attempts} attempts",
                out.len()
            )));
        }
        let t0 = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
        let bps = sample_boundary_points(p, t0, 16)?;
        let b = &bps[rng.gen_range(0..bps.len())];
        let a = (p.anchor)(t0);
        let s = 0.75 + 0.23 * rng.gen::<f64>();
        let x0 = axpy(&a, s, &sub(b, &a));
        if p.max_h(t0, &x0) > -TOL_FEAS {
            continue;
        }
        let controls = p.controls_at(t0, 0)?;
        let switches = rng.gen_range(0..=3usize);
        let mut cuts: Vec<usize> = (0..switches).map(|_| rng.gen_range(1..steps.max(2))).collect();
        cuts.sort_unstable();
        let mut schedule = Vec::with_capacity(steps);
        let mut u = controls[rng.gen_range(0..controls.len())].clone();
        let mut next_cut = 0;
        for j in 0..steps {
            while next_cut < cuts.len() && cuts[next_cut] == j {
                u = controls[rng.gen_range(0..controls.len())].clone();
                next_cut += 1;
            }
            schedule.push(StepControl::Plain(u.clone()));
        }
        let tr = integrate(p, t0, &x0, &schedule, dt)?;
        let worst = tr.max_h(p).into_iter().fold(f64::NEG_INFINITY, f64::max);
        if worst > 1e-6 && worst < 0.5 {
            out.push(tr);
        }
    }
    Ok(out)
}
