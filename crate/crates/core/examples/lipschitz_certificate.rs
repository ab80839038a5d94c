//! Runs every field analysis on the moving wall with a discount above the
//! tracking rate and writes the report to `target/lipschitz_certificate`.
//!
//! ```bash
//! cargo run --release --example lipschitz_certificate
//! ```

use viacontrol::analysis::{
    decay_check, emit_report, lipschitz_profile, relaxation_gap, time_lipschitz_check, AnalysisResult,
};
use viacontrol::ipc::{verify_ipc, IpcSampling};
use viacontrol::problem::get_problem;
use viacontrol::trajectory::{tracking_constants, viable_trajectory, ViableOptions};
use viacontrol::value::{solve_value, GridSpec, Horizon, Scheme, SolveOptions};

fn main() -> viacontrol::Result<()> {
    let p = get_problem("moving-wall-1d", &[])?;
    let cert = verify_ipc(&p, &IpcSampling::default(), 0.5, 0.5)?.certificate().expect("wall certificate");
    let horizon = 2.0 * std::f64::consts::PI;
    let c = tracking_constants(&p, &cert, horizon)?;
    let lambda = 2.0 * c.k.max(p.data.a1) + 1.0;
    println!("K = {:.3}, lambda = {lambda:.3}", c.k);

    let grid = GridSpec::around(&p, 0.01, horizon / 400.0, Horizon::Fixed(horizon));
    let star = solve_value(&p, &grid, &SolveOptions { lambda, scheme: Scheme::Relaxed { mixture_grid: 4 }, level: 0 })?;
    let plain = solve_value(&p, &grid, &SolveOptions { lambda, scheme: Scheme::Ordinary { chatter: 1 }, level: 0 })?;
    let path = viable_trajectory(&p, &cert, 0.0, &p.start, horizon, grid.dt, &ViableOptions::default())?;
    let probes: Vec<Vec<f64>> = [-1.5, -1.0, -0.5, 0.0, 0.5].iter().map(|&x| vec![x]).collect();

    let results = vec![
        AnalysisResult::Lipschitz(lipschitz_profile(&star, &c, p.data.a1, 2000, 3)?),
        AnalysisResult::Decay(decay_check(&p, &star, &path, 1e-2)?),
        AnalysisResult::Relaxation(relaxation_gap(&plain, &star, f64::INFINITY)?),
        AnalysisResult::TimeLip(time_lipschitz_check(&star, &p, &c, 3.0, &probes, 0)?),
    ];
    for r in &results {
        println!("{:<8} pass={:?}", r.kind(), r.pass());
    }
    let dir = std::path::Path::new("target/lipschitz_certificate");
    emit_report(&results, dir)?;
    println!("report written to {}", dir.display());
    Ok(())
}
