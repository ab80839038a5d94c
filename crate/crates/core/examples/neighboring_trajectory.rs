//! Corrects seeded references that cross the moving wall. Each corrected
//! path starts where the reference does, is strictly feasible afterwards,
//! and stays within `β·ρ` of it.
//!
//! ```bash
//! cargo run --release --example neighboring_trajectory
//! ```

use viacontrol::ipc::{verify_ipc, IpcSampling};
use viacontrol::problem::get_problem;
use viacontrol::trajectory::{nft_correct, violating_references};

fn main() -> viacontrol::Result<()> {
    let p = get_problem("moving-wall-1d", &[])?;
    let cert = verify_ipc(&p, &IpcSampling::default(), 0.5, 0.5)?.certificate().expect("wall certificate");
    for (i, r) in violating_references(&p, 5, 1.0, 1e-3, 11)?.iter().enumerate() {
        let fixed = nft_correct(&p, &cert, r)?;
        println!(
            "#{i} t0={:.3} rho={:.2e} sup_dist={:.2e} ratio={:.2} clearance={:.2e} within={}",
            r.t0(),
            fixed.rho_in,
            fixed.sup_dist,
            fixed.sup_dist / fixed.rho_in,
            fixed.interior_clearance,
            fixed.within_bound,
        );
    }
    Ok(())
}
