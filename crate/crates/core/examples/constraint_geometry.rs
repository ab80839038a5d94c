//! Distance queries, active sets and boundary sampling on the moving wall
//! `x ≤ 1 + 0.4 sin t`, `x ≥ −2`.
//!
//! ```bash
//! cargo run --example constraint_geometry
//! ```

use viacontrol::geometry::{
    active_set, distance_to_omega, omega_lipschitz_estimate, sample_boundary_points, DEFAULT_BUDGET, TOL_BOUNDARY,
};
use viacontrol::problem::get_problem;

fn main() -> viacontrol::Result<()> {
    let p = get_problem("moving-wall-1d", &[])?;
    for t in [0.0, std::f64::consts::FRAC_PI_2, 3.0 * std::f64::consts::FRAC_PI_2] {
        let d = distance_to_omega(&p, t, &[1.5], DEFAULT_BUDGET)?;
        let boundary = sample_boundary_points(&p, t, 2)?;
        println!("t={t:.3}  dist(1.5)={:.6}  boundary={boundary:?}", d.distance);
    }

    let near_top = active_set(&p, 0.0, &[0.9], 0.5, TOL_BOUNDARY);
    println!("active at x=0.9 (delta 0.5): {:?}", near_top.indices);

    // The wall moves at speed 0.4, so the set-valued map is 0.4-Lipschitz.
    let est = omega_lipschitz_estimate(&p, (0.0, 2.0 * std::f64::consts::PI), 64, 32, 1)?;
    println!("Omega Lipschitz estimate {:.4} (bound {:.4}, pass {})", est.estimate, est.bound, est.pass);
    Ok(())
}
