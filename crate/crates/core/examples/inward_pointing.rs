//! Checks the inward-pointing condition on two benchmarks. The moving wall
//! passes with margin exactly 1; a corridor pinched to width 0.01 fails,
//! since no control points into both walls at once.
//!
//! ```bash
//! cargo run --example inward_pointing
//! ```

use viacontrol::ipc::{inward_margin, verify_ipc, IpcOutcome, IpcSampling};
use viacontrol::problem::get_problem;

fn main() -> viacontrol::Result<()> {
    let wall = get_problem("moving-wall-1d", &[])?;
    let m = inward_margin(&wall, 0.0, &[1.0], 0.5, 0)?;
    println!("margin at the top wall: r={} mixture={:?}", m.r, m.support());

    match verify_ipc(&wall, &IpcSampling::default(), 0.5, 0.5)? {
        IpcOutcome::Pass(c) => {
            println!("wall: r={} over {} samples, eps={:.4}, eta={:.4}", c.r, c.n_samples, c.eps, c.eta)
        }
        IpcOutcome::Fail(f) => println!("wall failed: {:?}", f.worst_witness),
    }

    let pinched = get_problem("corridor-2d", &[("width".into(), 0.01)])?;
    let sampling = IpcSampling { n_times: 8, ..Default::default() };
    if let IpcOutcome::Fail(f) = verify_ipc(&pinched, &sampling, 0.5, 0.1)? {
        let w = f.worst_witness;
        println!("pinched corridor: r={} at t={} x={:?}", w.r, w.t, w.x);
    }
    Ok(())
}
