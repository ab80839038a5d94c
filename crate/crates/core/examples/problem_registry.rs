//! Lists the registered benchmarks and runs the sampled data-assumption
//! checks on each, plus one with an override applied.
//!
//! ```bash
//! cargo run --example problem_registry
//! ```

use viacontrol::problem::{get_problem, registered_problems, verify_data_assumptions, SamplingSpec};

fn main() -> viacontrol::Result<()> {
    for name in registered_problems() {
        let p = get_problem(name, &[])?;
        let report = verify_data_assumptions(&p, &SamplingSpec::default(), 7);
        println!("{name}: n={} lambda={} a1={} a2={}", p.n, p.lambda, p.data.a1, p.data.a2);
        for e in &report.entries {
            println!("  {:<22} {:?}", e.assumption_id, e.status);
        }
    }

    // Overrides are plain key/value pairs, as with `--set` on the command line.
    let fast = get_problem("moving-wall-1d", &[("freq".into(), 3.0), ("amp".into(), 0.2)])?;
    println!("faster wall: gamma sup = {}", fast.data.gamma.sup());
    Ok(())
}
