//! Sampled verification of the structural hypotheses a potential declares:
//! wells are critical zeros, the growth sandwich, the convex split and the
//! perturbation Hessian bound. User potentials are opaque callables, so
//! these are checked, never assumed.
//!
//! ```
//! cargo run --release --example hypothesis_checks
//! ```

use mcfpf::potential::{verify_hypotheses, DoubleWell, Potential, TripleWell, UnitWell01};

fn main() {
    for pot in [
        Box::new(DoubleWell::new()) as Box<dyn Potential>,
        Box::new(UnitWell01::new()),
        Box::new(TripleWell::new()),
    ] {
        let report = verify_hypotheses(pot.as_ref(), 2000, 42);
        println!("{} ({} samples per check):", pot.name(), 2000);
        for check in &report.checks {
            println!(
                "  [{}] {} -- {}",
                if check.passed { "ok" } else { "VIOLATED" },
                check.name,
                check.detail
            );
        }
        assert!(report.all_passed());
    }
}
