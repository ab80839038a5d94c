//! Truncated-horizon semi-Lagrangian dynamic programming for the discounted
//! value functions `V` (sampled controls) and `V★` (relaxed mixtures).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::TOL_FEAS;
use crate::problem::ProblemDefinition;

pub const TOL_DP: f64 = 1e-9;
const SNAP: f64 = 1e-9;

/// Tail envelope `(n+1)(1+|x₀|)e^{a₂}(a₁T + a₁/(λ−a₁) + a₂)e^{−(λ−a₁)T}`.
pub fn tail_envelope(p: &ProblemDefinition, lambda: f64, x0_bound: f64, t: f64) -> f64 {
    let (a1, a2) = (p.data.a1, p.data.a2);
    if lambda <= a1 {
        return f64::INFINITY;
    }
    (p.n as f64 + 1.0) * (1.0 + x0_bound) * a2.exp() * (a1 * t + a1 / (lambda - a1) + a2) * (-(lambda - a1) * t).exp()
}

/// Smallest `T = t0 + k·dt` whose tail envelope is at most `tol`.
pub fn truncation_horizon(p: &ProblemDefinition, lambda: f64, x0_bound: f64, tol: f64, t0: f64, dt: f64) -> Result<(f64, f64)> {
    if lambda <= p.data.a1 {
        return Err(Error::DiscountTooSmall { lambda, a1: p.data.a1 });
    }
    let mut k = 0usize;
    loop {
        let t = t0 + dt * k as f64;
        let bound = tail_envelope(p, lambda, x0_bound, t);
        if bound <= tol {
            return Ok((t, bound));
        }
        k += 1;
        if k > 100_000_000 {
            return Err(Error::DiscountTooSmall { lambda, a1: p.data.a1 });
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scheme {
    /// Averages of `chatter` sub-step controls (`chatter = 1`: plain samples).
    Ordinary { chatter: usize },
    /// Mixtures of `n+1` controls with weights on a barycentric grid.
    Relaxed { mixture_grid: usize },
}

impl Scheme {
    pub fn is_relaxed(&self) -> bool {
        matches!(self, Scheme::Relaxed { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Horizon {
    Fixed(f64),
    /// Truncation by the tail envelope with tolerance `tol` and `|x₀| ≤ x0_bound`.
    Auto { tol: f64, x0_bound: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub bounds: Vec<(f64, f64)>,
    /// Nodes per dimension (≥ 2).
    pub nodes: Vec<usize>,
    pub dt: f64,
    pub t0: f64,
    pub horizon: Horizon,
}

impl GridSpec {
    pub fn spacing(&self) -> Vec<f64> {
        self.bounds.iter().zip(&self.nodes).map(|(&(lo, hi), &n)| (hi - lo) / (n - 1) as f64).collect()
    }
}

impl GridSpec {
    /// The problem's sampling box widened by `M·dt + 2dx` on each side, with
    /// spacing exactly `dx`.
    pub fn around(p: &ProblemDefinition, dx: f64, dt: f64, horizon: Horizon) -> Self {
        let margin = p.data.m * dt + 2.0 * dx;
        let mut bounds = Vec::with_capacity(p.n);
        let mut nodes = Vec::with_capacity(p.n);
        for &(lo, hi) in &p.sample_box {
            let lo = lo - margin;
            let n = ((hi + margin - lo) / dx - 1e-9).ceil() as usize + 1;
            bounds.push((lo, lo + dx * (n - 1) as f64));
            nodes.push(n.max(2));
        }
        Self { bounds, nodes, dt, t0: 0.0, horizon }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub lambda: f64,
    pub scheme: Scheme,
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueField {
    pub relaxed: bool,
    pub scheme: Scheme,
    pub lambda: f64,
    pub t0: f64,
    pub dt: f64,
    pub horizon: f64,
    pub tail_bound: f64,
    pub bounds: Vec<(f64, f64)>,
    pub nodes: Vec<usize>,
    /// Time-major: `values[j * space_len + flat]`; `+∞` off `Ω`.
    pub values: Vec<f64>,
}

impl ValueField {
    pub fn time_nodes(&self) -> usize {
        self.values.len() / self.space_len()
    }

    pub fn space_len(&self) -> usize {
        self.nodes.iter().product()
    }

    pub fn time(&self, j: usize) -> f64 {
        self.t0 + self.dt * j as f64
    }

    pub fn spacing(&self) -> Vec<f64> {
        self.bounds.iter().zip(&self.nodes).map(|(&(lo, hi), &n)| (hi - lo) / (n - 1) as f64).collect()
    }

    pub fn slice(&self, j: usize) -> &[f64] {
        let s = self.space_len();
        &self.values[j * s..(j + 1) * s]
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        node_coords(&self.bounds, &self.nodes, flat)
    }

    pub fn same_grid(&self, other: &ValueField) -> bool {
        self.t0 == other.t0
            && self.dt == other.dt
            && self.bounds == other.bounds
            && self.nodes == other.nodes
            && self.values.len() == other.values.len()
    }

    /// Multilinear in space on the bracketing slices, linear in time; `+∞`
    /// when a contributing corner is infeasible.
    pub fn evaluate(&self, t: f64, x: &[f64]) -> Result<f64> {
        let nt = self.time_nodes();
        let tol = 1e-9 * self.dt.max(1.0);
        let last = self.time(nt - 1);
        if !(t >= self.t0 - tol && t <= last + tol) || x.len() != self.nodes.len() {
            return Err(Error::OutOfGrid { t, x: x.to_vec() });
        }
        let s = ((t - self.t0) / self.dt).clamp(0.0, (nt - 1) as f64);
        let mut j = s.floor() as usize;
        let mut w = s - j as f64;
        if j >= nt - 1 {
            j = nt - 1;
            w = 0.0;
        }
        if w < SNAP {
            w = 0.0;
        } else if w > 1.0 - SNAP {
            j += 1;
            w = 0.0;
        }
        let stencil = Stencil::new(&self.bounds, &self.nodes, x).ok_or_else(|| Error::OutOfGrid { t, x: x.to_vec() })?;
        let a = stencil.apply(self.slice(j));
        if w == 0.0 {
            return Ok(a);
        }
        let b = stencil.apply(self.slice(j + 1));
        Ok((1.0 - w) * a + w * b)
    }
}

pub fn node_coords(bounds: &[(f64, f64)], nodes: &[usize], mut flat: usize) -> Vec<f64> {
    bounds
        .iter()
        .zip(nodes)
        .map(|(&(lo, hi), &n)| {
            let i = flat % n;
            flat /= n;
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        })
        .collect()
}

/// Multilinear interpolation weights at a point.
struct Stencil {
    corners: Vec<(usize, f64)>,
}

impl Stencil {
    fn new(bounds: &[(f64, f64)], nodes: &[usize], x: &[f64]) -> Option<Stencil> {
        let mut corners = vec![(0usize, 1.0f64)];
        let mut stride = 1usize;
        for (d, (&(lo, hi), &n)) in bounds.iter().zip(nodes).enumerate() {
            let h = (hi - lo) / (n - 1) as f64;
            let s = (x[d] - lo) / h;
            if !(s >= -SNAP && s <= (n - 1) as f64 + SNAP) {
                return None;
            }
            let s = s.clamp(0.0, (n - 1) as f64);
            let mut i = s.floor() as usize;
            let mut w = s - i as f64;
            if i >= n - 1 {
                i = n - 1;
                w = 0.0;
            }
            if w < SNAP {
                w = 0.0;
            } else if w > 1.0 - SNAP {
                i += 1;
                w = 0.0;
            }
            let mut next = Vec::with_capacity(corners.len() * 2);
            for &(c, cw) in &corners {
                next.push((c + i * stride, cw * (1.0 - w)));
                if w > 0.0 {
                    next.push((c + (i + 1) * stride, cw * w));
                }
            }
            corners = next;
            stride *= n;
        }
        Some(Stencil { corners })
    }

    fn apply(&self, slice: &[f64]) -> f64 {
        let mut acc = 0.0;
        for &(c, w) in &self.corners {
            let v = slice[c];
            if !v.is_finite() {
                return f64::INFINITY;
            }
            acc += w * v;
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxedVelocity {
    pub controls: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub f_star: Vec<f64>,
    pub l_star: f64,
}

/// Index tuples and weights of the velocity combinations used by `scheme`.
fn combinations(count: usize, n: usize, scheme: Scheme) -> Vec<Vec<(usize, f64)>> {
    match scheme {
        Scheme::Ordinary { chatter } => {
            let g = chatter.max(1);
            let mut out = Vec::new();
            let mut idx = vec![0usize; g];
            loop {
                let mut combo: Vec<(usize, f64)> = Vec::new();
                for &i in &idx {
                    match combo.iter_mut().find(|(c, _)| *c == i) {
                        Some(e) => e.1 += 1.0 / g as f64,
                        None => combo.push((i, 1.0 / g as f64)),
                    }
                }
                out.push(combo);
                // next nondecreasing index tuple
                let mut k = g;
                while k > 0 && idx[k - 1] == count - 1 {
                    k -= 1;
                }
                if k == 0 {
                    break;
                }
                idx[k - 1] += 1;
                let v = idx[k - 1];
                for item in idx.iter_mut().skip(k) {
                    *item = v;
                }
            }
            out
        }
        Scheme::Relaxed { mixture_grid } => {
            let g = mixture_grid.max(1);
            let size = (n + 1).min(count);
            let mut out = Vec::new();
            let mut seen = std::collections::BTreeSet::new();
            for subset in subsets(count, size) {
                for parts in compositions(g, size) {
                    let combo: Vec<(usize, f64)> = subset
                        .iter()
                        .zip(&parts)
                        .filter(|(_, &k)| k > 0)
                        .map(|(&i, &k)| (i, k as f64 / g as f64))
                        .collect();
                    let key: Vec<(usize, usize)> =
                        subset.iter().zip(&parts).filter(|(_, &k)| k > 0).map(|(&i, &k)| (i, k * 1_000_000 / g)).collect();
                    if seen.insert(key) {
                        out.push(combo);
                    }
                }
            }
            out
        }
    }
}

fn subsets(count: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, count: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..count {
            cur.push(i);
            rec(i + 1, count, size, cur, out);
            cur.pop();
        }
    }
    rec(0, count, size, &mut cur, &mut out);
    out
}

/// All ways to write `total` as an ordered sum of `parts` nonnegative integers.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Mixtures of `n+1` sampled controls with barycentric weights of resolution
/// `mixture_grid`, deduplicated on `(f★, L★)`.
pub fn relaxed_velocity_set(p: &ProblemDefinition, t: f64, x: &[f64], level: usize, mixture_grid: usize) -> Result<Vec<RelaxedVelocity>> {
    let controls = p.controls_at(t, level)?;
    let fs: Vec<Vec<f64>> = controls.iter().map(|u| p.velocity(t, x, u)).collect();
    let ls: Vec<f64> = controls.iter().map(|u| p.cost(t, x, u)).collect();
    let mut out: Vec<RelaxedVelocity> = Vec::new();
    for combo in combinations(controls.len(), p.n, Scheme::Relaxed { mixture_grid }) {
        let mut f_star = vec![0.0; p.n];
        let mut l_star = 0.0;
        for &(i, a) in &combo {
            for (o, v) in f_star.iter_mut().zip(&fs[i]) {
                *o += a * v;
            }
            l_star += a * ls[i];
        }
        let dup = out.iter().any(|r| {
            (r.l_star - l_star).abs() <= 1e-12 && r.f_star.iter().zip(&f_star).all(|(a, b)| (a - b).abs() <= 1e-12)
        });
        if !dup {
            out.push(RelaxedVelocity {
                controls: combo.iter().map(|&(i, _)| controls[i].clone()).collect(),
                weights: combo.iter().map(|&(_, a)| a).collect(),
                f_star,
                l_star,
            });
        }
    }
    Ok(out)
}

fn check_coverage(p: &ProblemDefinition, grid: &GridSpec, times: &[f64]) -> Result<()> {
    let margin = p.data.m * grid.dt;
    for &t in times {
        let anchor = (p.anchor)(t);
        for (d, &(lo, hi)) in grid.bounds.iter().enumerate() {
            for (face, inward) in [(lo, 1.0), (hi, -1.0)] {
                let mut dir = vec![0.0; p.n];
                dir[d] = -inward;
                let bounded = !p.constraints.is_empty() && ray_exits(p, t, &anchor, &dir);
                if !bounded {
                    continue;
                }
                // the face shifted inward by M·dt must be outside Ω(t)
                let others: Vec<(f64, f64)> =
                    grid.bounds.iter().enumerate().filter(|(k, _)| *k != d).map(|(_, b)| *b).collect();
                let other_nodes: Vec<usize> =
                    grid.nodes.iter().enumerate().filter(|(k, _)| *k != d).map(|(_, n)| *n).collect();
                let count: usize = other_nodes.iter().product();
                for flat in 0..count.max(1) {
                    let rest = if others.is_empty() { vec![] } else { node_coords(&others, &other_nodes, flat) };
                    let mut y = Vec::with_capacity(p.n);
                    let mut it = rest.into_iter();
                    for k in 0..p.n {
                        y.push(if k == d { face + inward * margin } else { it.next().unwrap() });
                    }
                    if p.max_h(t, &y) <= TOL_FEAS {
                        return Err(Error::GridCoverage(format!(
                            "Ω({t}) reaches within M·dt of the face x_{} = {face}",
                            d + 1
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

fn ray_exits(p: &ProblemDefinition, t: f64, a: &[f64], dir: &[f64]) -> bool {
    let mut s = 1e-3;
    while s < 1e6 {
        if p.max_h(t, &crate::linalg::axpy(a, s, dir)) > 0.0 {
            return true;
        }
        s *= 2.0;
    }
    false
}

/// Backward sweep from the truncation horizon with terminal value 0.
pub fn solve_value(p: &ProblemDefinition, grid: &GridSpec, opts: &SolveOptions) -> Result<ValueField> {
    if grid.bounds.len() != p.n || grid.nodes.len() != p.n || grid.nodes.iter().any(|&n| n < 2) {
        return Err(Error::GridCoverage("grid dimension mismatch or fewer than 2 nodes per axis".into()));
    }
    if !(grid.dt > 0.0) {
        return Err(Error::GridCoverage("dt must be positive".into()));
    }
    let (horizon, tail_bound) = match grid.horizon {
        Horizon::Fixed(t) => {
            let k = ((t - grid.t0) / grid.dt).round().max(0.0);
            let t = grid.t0 + k * grid.dt;
            (t, tail_envelope(p, opts.lambda, 0.0, t))
        }
        Horizon::Auto { tol, x0_bound } => truncation_horizon(p, opts.lambda, x0_bound, tol, grid.t0, grid.dt)?,
    };
    let nt = ((horizon - grid.t0) / grid.dt).round() as usize + 1;
    let times: Vec<f64> = (0..nt).map(|j| grid.t0 + grid.dt * j as f64).collect();
    check_coverage(p, grid, &times)?;

    let space: usize = grid.nodes.iter().product();
    let coords: Vec<Vec<f64>> = (0..space).map(|f| node_coords(&grid.bounds, &grid.nodes, f)).collect();
    let mut values = vec![f64::INFINITY; nt * space];
    let last = nt - 1;
    for (f, x) in coords.iter().enumerate() {
        if p.max_h(times[last], x) <= TOL_FEAS {
            values[last * space + f] = 0.0;
        }
    }
    for j in (0..last).rev() {
        let t = times[j];
        let controls = p.controls_at(t, opts.level)?;
        let combos = combinations(controls.len(), p.n, opts.scheme);
        let discount = (-opts.lambda * t).exp() * grid.dt;
        let (before, after) = values.split_at_mut((j + 1) * space);
        let next = &after[..space];
        let cur = &mut before[j * space..];
        for (f, x) in coords.iter().enumerate() {
            if p.max_h(t, x) > TOL_FEAS {
                continue;
            }
            let fs: Vec<Vec<f64>> = controls.iter().map(|u| p.velocity(t, x, u)).collect();
            let ls: Vec<f64> = controls.iter().map(|u| p.cost(t, x, u)).collect();
            let mut best = f64::INFINITY;
            let mut y = vec![0.0; p.n];
            for combo in &combos {
                let mut l = 0.0;
                y.copy_from_slice(x);
                for &(i, a) in combo {
                    l += a * ls[i];
                    for (yk, fk) in y.iter_mut().zip(&fs[i]) {
                        *yk += a * fk * grid.dt;
                    }
                }
                let Some(st) = Stencil::new(&grid.bounds, &grid.nodes, &y) else { continue };
                let v = discount * l + st.apply(next);
                if v < best {
                    best = v;
                }
            }
            if !best.is_finite() {
                return Err(Error::GridTooCoarse { t, x: x.clone() });
            }
            cur[f] = best;
        }
    }
    Ok(ValueField {
        relaxed: opts.scheme.is_relaxed(),
        scheme: opts.scheme,
        lambda: opts.lambda,
        t0: grid.t0,
        dt: grid.dt,
        horizon,
        tail_bound,
        bounds: grid.bounds.clone(),
        nodes: grid.nodes.clone(),
        values,
    })
}

/// Largest change from re-applying one backward step at slice `j`.
pub fn bellman_residual(p: &ProblemDefinition, field: &ValueField, j: usize, level: usize) -> Result<f64> {
    let space = field.space_len();
    let t = field.time(j);
    let controls = p.controls_at(t, level)?;
    let combos = combinations(controls.len(), p.n, field.scheme);
    let next = field.slice(j + 1);
    let discount = (-field.lambda * t).exp() * field.dt;
    let mut worst: f64 = 0.0;
    for f in 0..space {
        let x = field.node(f);
        let old = field.slice(j)[f];
        if !old.is_finite() {
            continue;
        }
        let mut best = f64::INFINITY;
        for combo in &combos {
            let mut l = 0.0;
            let mut y = x.clone();
            for &(i, a) in combo {
                l += a * p.cost(t, &x, &controls[i]);
                for (yk, fk) in y.iter_mut().zip(p.velocity(t, &x, &controls[i])) {
                    *yk += a * fk * field.dt;
                }
            }
            if let Some(st) = Stencil::new(&field.bounds, &field.nodes, &y) {
                best = best.min(discount * l + st.apply(next));
            }
        }
        worst = worst.max((best - old).abs());
    }
    Ok(worst)
}
