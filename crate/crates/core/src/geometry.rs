//! Constraint evaluation, active sets, distances to `Ω(t)` and its boundary,
//! excess, and a sampled estimate of the Lipschitz constant of `t ↦ Ω(t)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dist, norm, ray_directions, scale, sub};
use crate::problem::ProblemDefinition;

pub const TOL_FEAS: f64 = 1e-9;
pub const TOL_BOUNDARY: f64 = 1e-8;
pub const DEFAULT_BUDGET: usize = 200;

const N_STARTS: usize = 8;

/// Constraint values `h_i(t, x)`.
pub fn eval_constraints(p: &ProblemDefinition, t: f64, x: &[f64]) -> Result<Vec<f64>> {
    p.constraints
        .iter()
        .enumerate()
        .map(|(index, c)| {
            let v = (c.h)(t, x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFiniteConstraint { index, t })
            }
        })
        .collect()
}

pub fn is_feasible(p: &ProblemDefinition, t: f64, x: &[f64]) -> bool {
    p.max_h(t, x) <= TOL_FEAS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveSetReport {
    /// Zero-based constraint indices.
    pub indices: Vec<usize>,
    pub radius_delta: f64,
    pub conservative: bool,
}

/// Indices that may be active somewhere in `B(x, delta)`: `h_i + delta·L_i ≥ −tol`.
pub fn active_set(p: &ProblemDefinition, t: f64, x: &[f64], delta: f64, tol_boundary: f64) -> ActiveSetReport {
    let indices = p
        .constraints
        .iter()
        .enumerate()
        .filter(|(_, c)| (c.h)(t, x) + delta * c.grad_bound >= -tol_boundary)
        .map(|(i, _)| i)
        .collect();
    ActiveSetReport { indices, radius_delta: delta, conservative: true }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceResult {
    pub distance: f64,
    pub witness: Vec<f64>,
    pub certified: bool,
}

fn start_offsets(n: usize, scale_len: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6469_7374);
    let mut out = vec![vec![0.0; n]];
    while out.len() < N_STARTS {
        let d: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        out.push(scale(&d, scale_len));
    }
    out
}

/// Polyak steps on the most violated constraint until `max h ≤ -tol/2`.
fn polyak_descend(p: &ProblemDefinition, t: f64, mut y: Vec<f64>, budget: usize) -> Option<Vec<f64>> {
    for _ in 0..budget {
        let (idx, hv) = p
            .constraints
            .iter()
            .enumerate()
            .map(|(i, c)| (i, (c.h)(t, &y)))
            .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        if hv <= 0.0 {
            return Some(y);
        }
        if !hv.is_finite() {
            return None;
        }
        let g = (p.constraints[idx].grad)(t, &y);
        let g2 = crate::linalg::dot(&g, &g);
        if g2 < 1e-24 {
            return None;
        }
        y = axpy(&y, -(hv + 0.5 * TOL_FEAS) / g2, &g);
    }
    (p.max_h(t, &y) <= TOL_FEAS).then_some(y)
}

/// Pulls a feasible `w` toward `x` along the segment, then slides along the
/// boundary while the distance keeps shrinking.
fn refine(p: &ProblemDefinition, t: f64, x: &[f64], mut w: Vec<f64>, budget: usize) -> Vec<f64> {
    let along = |w: &[f64]| {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let y = axpy(w, mid, &sub(x, w));
            if p.max_h(t, &y) <= TOL_FEAS {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        axpy(w, lo, &sub(x, w))
    };
    w = along(&w);
    if is_kkt_point(p, t, x, &w) {
        return w;
    }
    let mut best = dist(x, &w);
    let mut step = 0.5 * best;
    for _ in 0..budget {
        if step < 1e-13 || best == 0.0 {
            break;
        }
        let toward = sub(x, &w);
        let probe = axpy(&w, step / best.max(1e-300), &toward);
        let improved = polyak_descend(p, t, probe, budget)
            .map(|c| along(&c))
            .filter(|c| dist(x, c) < best - 1e-15);
        match improved {
            Some(c) => {
                best = dist(x, &c);
                w = c;
            }
            None => step *= 0.5,
        }
    }
    w
}

/// `x − w` is normal to the single constraint active at `w`.
fn is_kkt_point(p: &ProblemDefinition, t: f64, x: &[f64], w: &[f64]) -> bool {
    let active: Vec<_> = p.constraints.iter().filter(|c| (c.h)(t, w) >= -1e-7 * c.grad_bound.max(1.0)).collect();
    if active.len() != 1 {
        return false;
    }
    let g = (active[0].grad)(t, w);
    let d = sub(x, w);
    let (nd, ng) = (norm(&d), norm(&g));
    nd > 0.0 && ng > 0.0 && crate::linalg::dot(&d, &g) >= (1.0 - 1e-10) * nd * ng
}

/// Upper bound on `d_{Ω(t)}(x)` with a feasible witness.
pub fn distance_to_omega(p: &ProblemDefinition, t: f64, x: &[f64], budget: usize) -> Result<DistanceResult> {
    let h = eval_constraints(p, t, x)?;
    if h.iter().all(|&v| v <= TOL_FEAS) {
        return Ok(DistanceResult { distance: 0.0, witness: x.to_vec(), certified: false });
    }
    let violation = h.iter().cloned().fold(0.0, f64::max);
    let lscale = violation / p.grad_bound_max().max(1e-12);
    // On a convex set a KKT point is the projection itself.
    let convex = p.constraints.iter().all(|c| c.convex);
    let mut best: Option<Vec<f64>> = None;
    for off in start_offsets(p.n, lscale.min(1.0)) {
        let start: Vec<f64> = x.iter().zip(&off).map(|(a, b)| a + b).collect();
        let Some(w) = polyak_descend(p, t, start, budget) else { continue };
        let w = refine(p, t, x, w, budget);
        let done = convex && is_kkt_point(p, t, x, &w);
        if best.as_ref().map_or(true, |b| dist(x, &w) < dist(x, b)) {
            best = Some(w);
        }
        if done {
            break;
        }
    }
    let witness = best.ok_or(Error::ProjectionFailed { budget })?;
    Ok(DistanceResult { distance: dist(x, &witness), witness, certified: false })
}

/// Brute-force distance over a uniform grid of `bounds` with spacing `step`.
pub fn grid_distance(p: &ProblemDefinition, t: f64, x: &[f64], bounds: &[(f64, f64)], step: f64) -> Option<(f64, Vec<f64>)> {
    let counts: Vec<usize> = bounds.iter().map(|(lo, hi)| ((hi - lo) / step).ceil() as usize + 1).collect();
    let total: usize = counts.iter().product();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut y = vec![0.0; bounds.len()];
    for flat in 0..total {
        let mut r = flat;
        for (k, (&(lo, hi), &c)) in bounds.iter().zip(&counts).enumerate() {
            y[k] = (lo + step * (r % c) as f64).min(hi);
            r /= c;
        }
        if p.max_h(t, &y) <= TOL_FEAS {
            let d = dist(x, &y);
            if best.as_ref().map_or(true, |b| d < b.0) {
                best = Some((d, y.clone()));
            }
        }
    }
    best
}

/// As [`distance_to_omega`], confirmed against a dense grid of spacing `step`.
/// `certified` is set when the two agree within `step·√n`.
pub fn distance_to_omega_certified(
    p: &ProblemDefinition,
    t: f64,
    x: &[f64],
    budget: usize,
    bounds: &[(f64, f64)],
    step: f64,
) -> Result<DistanceResult> {
    let mut r = distance_to_omega(p, t, x, budget)?;
    if let Some((g, _)) = grid_distance(p, t, x, bounds, step) {
        r.certified = (r.distance - g).abs() <= step * (p.n as f64).sqrt() + 1e-9;
    }
    Ok(r)
}

fn first_exit(p: &ProblemDefinition, t: f64, x: &[f64], d: &[f64], max_len: f64) -> Option<f64> {
    let mut s = 1e-6;
    let mut prev = 0.0;
    while s <= max_len {
        if p.max_h(t, &axpy(x, s, d)) > 0.0 {
            let (mut lo, mut hi) = (prev, s);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if p.max_h(t, &axpy(x, mid, d)) > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Some(lo);
        }
        prev = s;
        s *= 2.0;
    }
    None
}

/// Distance from a feasible `x` to the zero level set of `max_i h_i`, via
/// sign changes along sampled directions and the constraint normals.
pub fn boundary_distance(p: &ProblemDefinition, t: f64, x: &[f64]) -> f64 {
    if p.max_h(t, x) >= -TOL_FEAS {
        return 0.0;
    }
    let mut dirs = ray_directions(p.n, 64);
    for c in &p.constraints {
        let g = (c.grad)(t, x);
        let ng = norm(&g);
        if ng > 0.0 {
            dirs.push(scale(&g, 1.0 / ng));
        }
    }
    dirs.iter()
        .filter_map(|d| first_exit(p, t, x, d, 1e6))
        .fold(f64::INFINITY, f64::min)
}

/// Whether a feasible `x` lies within `eta` of `∂Ω(t)`.
pub fn boundary_tube_membership(p: &ProblemDefinition, t: f64, x: &[f64], eta: f64) -> Result<bool> {
    let max_h = p.max_h(t, x);
    if max_h > TOL_FEAS {
        return Err(Error::InfeasibleInput { t, max_h });
    }
    Ok(boundary_distance(p, t, x) <= eta)
}

/// Points of `∂Ω(t)` (on the feasible side) hit by rays cast from the anchor.
pub fn sample_boundary_points(p: &ProblemDefinition, t: f64, count: usize) -> Result<Vec<Vec<f64>>> {
    if p.constraints.is_empty() {
        return Ok(Vec::new());
    }
    let a = (p.anchor)(t);
    if p.max_h(t, &a) > 0.0 {
        return Err(Error::BoundarySamplingFailed { t });
    }
    let pts: Vec<Vec<f64>> = ray_directions(p.n, count)
        .iter()
        .filter_map(|d| first_exit(p, t, &a, d, 1e6).map(|s| axpy(&a, s, d)))
        .collect();
    if pts.is_empty() {
        return Err(Error::BoundarySamplingFailed { t });
    }
    Ok(pts)
}

pub enum ExcessTarget<'a> {
    Points(&'a [Vec<f64>]),
    Region { problem: &'a ProblemDefinition, t: f64 },
}

/// `exc(A|B) = sup_{a∈A} d_B(a)`.
pub fn excess(a: &[Vec<f64>], b: &ExcessTarget) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::EmptySourceSet);
    }
    let mut worst: f64 = 0.0;
    for pt in a {
        let d = match b {
            ExcessTarget::Points(bs) => bs.iter().map(|q| dist(pt, q)).fold(f64::INFINITY, f64::min),
            ExcessTarget::Region { problem, t } => distance_to_omega(problem, *t, pt, DEFAULT_BUDGET)?.distance,
        };
        worst = worst.max(d);
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaLipEstimate {
    pub estimate: f64,
    pub bound: f64,
    pub pass: bool,
    /// `(s, t, x)` attaining the estimate.
    pub witness: Option<(f64, f64, Vec<f64>)>,
}

/// `L̂ = max d_{Ω(t)}(x) / |s − t|` over consecutive time nodes, with `x` taken
/// from boundary samples and seeded feasible points of `Ω(s)`.
pub fn omega_lipschitz_estimate(
    p: &ProblemDefinition,
    horizon: (f64, f64),
    n_times: usize,
    n_points: usize,
    seed: u64,
) -> Result<OmegaLipEstimate> {
    let n_times = n_times.max(2);
    let h = (horizon.1 - horizon.0) / n_times as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0;
    let mut witness = None;
    for j in 0..n_times {
        let t0 = horizon.0 + h * j as f64;
        let t1 = t0 + h;
        for (s, t) in [(t0, t1), (t1, t0)] {
            let mut xs = sample_boundary_points(p, s, 16).unwrap_or_default();
            for _ in 0..n_points {
                let x: Vec<f64> = p.sample_box.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.gen::<f64>()).collect();
                if is_feasible(p, s, &x) {
                    xs.push(x);
                }
            }
            for x in xs {
                let d = distance_to_omega(p, t, &x, DEFAULT_BUDGET)?.distance;
                let q = d / h;
                if q > best {
                    best = q;
                    witness = Some((s, t, x));
                }
            }
        }
    }
    let bound = p.data.omega_lip;
    Ok(OmegaLipEstimate { estimate: best, bound, pass: best <= bound * (1.0 + 1e-6) + 1e-12, witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::get_problem;
    use std::f64::consts::PI;

    fn wall() -> ProblemDefinition {
        get_problem("moving-wall-1d", &[]).unwrap()
    }

    #[test]
    fn constraint_values() {
        let p = wall();
        assert_eq!(eval_constraints(&p, 0.0, &[0.0]).unwrap(), vec![-1.0, -2.0]);
        assert_eq!(eval_constraints(&p, 0.0, &[1.0]).unwrap(), vec![0.0, -3.0]);
    }

    #[test]
    fn active_sets() {
        let p = wall();
        assert_eq!(active_set(&p, 0.0, &[1.0], 0.1, TOL_BOUNDARY).indices, vec![0]);
        assert!(active_set(&p, 0.0, &[0.0], 0.1, TOL_BOUNDARY).indices.is_empty());
        assert_eq!(active_set(&p, 0.0, &[0.0], 10.0, TOL_BOUNDARY).indices, vec![0, 1]);
        for k in 0..20 {
            let d1 = 0.2 * k as f64;
            let a = active_set(&p, 0.7, &[0.3], d1, TOL_BOUNDARY).indices;
            let b = active_set(&p, 0.7, &[0.3], d1 + 0.2, TOL_BOUNDARY).indices;
            assert!(a.iter().all(|i| b.contains(i)));
        }
    }

    #[test]
    fn distances() {
        let p = wall();
        let r = distance_to_omega(&p, 0.0, &[0.5], 100).unwrap();
        assert_eq!((r.distance, r.witness.clone()), (0.0, vec![0.5]));
        let r = distance_to_omega(&p, 0.0, &[1.3], 100).unwrap();
        assert!((r.distance - 0.3).abs() < 1e-8 && (r.witness[0] - 1.0).abs() < 1e-8);
        let r = distance_to_omega(&p, PI / 2.0, &[1.5], 100).unwrap();
        assert!((r.distance - 0.1).abs() < 1e-8 && (r.witness[0] - 1.4).abs() < 1e-8);
        assert!(p.max_h(PI / 2.0, &r.witness) <= TOL_FEAS);
    }

    #[test]
    fn certified_distance_in_corridor() {
        let p = get_problem("corridor-2d", &[]).unwrap();
        let bounds = [(-1.0, 1.0), (-1.0, 1.0)];
        let r = distance_to_omega_certified(&p, 0.3, &[0.2, 0.9], 100, &bounds, 0.01).unwrap();
        assert!(r.certified);
        let wall = 0.5 + 0.1 * 0.3f64.sin();
        assert!((r.distance - (0.9 - wall)).abs() < 1e-8);
    }

    #[test]
    fn tube_membership() {
        let p = wall();
        assert!(boundary_tube_membership(&p, 0.0, &[0.95], 0.1).unwrap());
        assert!(!boundary_tube_membership(&p, 0.0, &[0.0], 0.1).unwrap());
        assert!(boundary_tube_membership(&p, 0.0, &[1.0], 1e-6).unwrap());
        assert!(matches!(boundary_tube_membership(&p, 0.0, &[1.5], 0.1), Err(Error::InfeasibleInput { .. })));
    }

    #[test]
    fn excess_examples() {
        let p = wall();
        let region = ExcessTarget::Region { problem: &p, t: 0.0 };
        assert_eq!(excess(&[vec![0.5]], &region).unwrap(), 0.0);
        assert!((excess(&[vec![1.3], vec![0.0]], &region).unwrap() - 0.3).abs() < 1e-8);
        let pts = [vec![0.2, 0.1]];
        assert_eq!(excess(&pts, &ExcessTarget::Points(&pts)).unwrap(), 0.0);
        assert!(matches!(excess(&[], &region), Err(Error::EmptySourceSet)));
    }

    #[test]
    fn omega_lipschitz() {
        let p = wall();
        let est = omega_lipschitz_estimate(&p, (0.0, 2.0 * PI), 64, 8, 1).unwrap();
        assert!(est.pass && est.estimate <= 0.4 + 1e-9 && est.estimate > 0.39);
        let q = get_problem("quadratic-cost-1d", &[]).unwrap();
        assert_eq!(omega_lipschitz_estimate(&q, (0.0, 1.0), 8, 8, 1).unwrap().estimate, 0.0);
        let tight = get_problem("moving-wall-1d", &[("omega_lip".into(), 0.1)]).unwrap();
        let est = omega_lipschitz_estimate(&tight, (0.0, 2.0 * PI), 64, 8, 1).unwrap();
        assert!(!est.pass);
        let (s, t, _) = est.witness.unwrap();
        assert!((0.5 * (s + t)).cos().abs() > 0.9);
    }

    proptest::proptest! {
        #[test]
        fn distance_is_one_lipschitz(x in -4.0f64..4.0, y in -4.0f64..4.0, t in 0.0f64..6.0) {
            let p = wall();
            let dx = distance_to_omega(&p, t, &[x], 100).unwrap().distance;
            let dy = distance_to_omega(&p, t, &[y], 100).unwrap().distance;
            proptest::prop_assert!((dx - dy).abs() <= (x - y).abs() + 1e-8);
            proptest::prop_assert_eq!(dx == 0.0, p.max_h(t, &[x]) <= TOL_FEAS);
        }
    }
}
