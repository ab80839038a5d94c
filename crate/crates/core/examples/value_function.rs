//! Solves the discounted value function on the moving wall with the ordinary
//! and relaxed schemes and prints a few slices.
//!
//! ```bash
//! cargo run --release --example value_function
//! ```

use viacontrol::problem::get_problem;
use viacontrol::value::{solve_value, GridSpec, Horizon, Scheme, SolveOptions};

fn main() -> viacontrol::Result<()> {
    let p = get_problem("moving-wall-1d", &[("lambda".into(), 3.0)])?;
    let grid = GridSpec::around(&p, 0.01, 0.02, Horizon::Auto { tol: 1e-3, x0_bound: 2.0 });
    let ordinary = solve_value(&p, &grid, &SolveOptions { lambda: 3.0, scheme: Scheme::Ordinary { chatter: 1 }, level: 0 })?;
    let relaxed = solve_value(&p, &grid, &SolveOptions { lambda: 3.0, scheme: Scheme::Relaxed { mixture_grid: 4 }, level: 0 })?;
    println!("horizon {:.2}, tail bound {:.2e}, {} time nodes", relaxed.horizon, relaxed.tail_bound, relaxed.time_nodes());
    // Values carry the factor e^{-λt}; undo it to compare across times. Holding
    // still is free away from the wall, while above 0.6 the falling wall
    // forces a costly descent.
    for t in [0.0f64, 3.5] {
        let scale = (3.0 * t).exp();
        for x in [0.0, 0.8, 0.85] {
            let (v, vs) = (ordinary.evaluate(t, &[x])?, relaxed.evaluate(t, &[x])?);
            println!("t={t} x={x}: e^(λt)V = {:.5}  e^(λt)V* = {:.5}", scale * v, scale * vs);
        }
    }
    Ok(())
}
