//! Follows a viable reference from a shifted start and compares the
//! deviation with `C e^{K t} |x¹ − x⁰|`.
//!
//! ```bash
//! cargo run --release --example exponential_tracking
//! ```

use viacontrol::ipc::{verify_ipc, IpcSampling};
use viacontrol::problem::get_problem;
use viacontrol::trajectory::{track_feasible, viable_trajectory, ViableOptions};

fn main() -> viacontrol::Result<()> {
    let p = get_problem("moving-wall-1d", &[])?;
    let cert = verify_ipc(&p, &IpcSampling::default(), 0.5, 0.5)?.certificate().expect("wall certificate");
    let reference = viable_trajectory(&p, &cert, 0.0, &[0.5], 5.0, 1e-3, &ViableOptions::default())?;
    for offset in [0.01, 0.1] {
        let r = track_feasible(&p, &cert, &reference, &[0.5 - offset])?;
        let worst = r.deviations.iter().copied().fold(0.0, f64::max);
        println!(
            "offset {offset}: max deviation {worst:.4}, ln C={:.2}, K={:.2}, violations {}",
            r.constants.ln_c, r.constants.k, r.violations
        );
    }
    Ok(())
}
