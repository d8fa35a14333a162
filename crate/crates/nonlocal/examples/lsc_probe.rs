//! Lower semi-continuity probes: evaluate J along a sequence plan and
//! compare the tail against J at the declared limit.
//!
//! Run: `cargo run --example lsc_probe`

use nonlocal::grid::{Domain, Exponent, Grid, GridFunction};
use nonlocal::integrand::builtin;
use nonlocal::witness::{lsc_probe, LscVerdict, SequencePlan};

fn main() -> nonlocal::Result<()> {
    let grid = Grid::build(Domain::unit_interval(), &[1024])?;
    let p = Exponent::Finite(2.0);

    // The paired-indicator integrand: J(u) = -|u⁻¹((0,1])|. Along u_k ≡ 1/k
    // every J(u_k) is -1, yet the uniform limit 0 has J(0) = 0.
    let f = builtin("example-4-nonlsc")?;
    let plan = SequencePlan::scalar_shrink(grid.clone(), p)?;
    let report = lsc_probe(&f, &plan, 16)?;
    println!("uniformly shrinking constants against the gated -1/z pair:");
    for (i, j) in report.j_values.iter().enumerate() {
        println!("  J(u_{:<2}) = {j:+.5}", i + 1);
    }
    println!("  J(limit) = {:+.5}", report.j_limit);
    match report.verdict {
        LscVerdict::Violated { margin } => {
            println!("  verdict: violated with margin {margin:.4}")
        }
        LscVerdict::Holds => println!("  verdict: holds"),
    }

    // Oscillation dichotomy for ±(w - z)².
    let grid = Grid::build(Domain::unit_interval(), &[256])?;
    let plus = GridFunction::constant(grid.clone(), &[1.0], p)?;
    let minus = GridFunction::constant(grid, &[-1.0], p)?;
    let plan = SequencePlan::oscillation(0.5, plus, minus)?;
    for name in ["neg-square-difference", "square-difference"] {
        let f = builtin(name)?;
        let report = lsc_probe(&f, &plan, 16)?;
        println!(
            "\n{name}: J(u_k) → {:+.4}, J(weak-star limit) = {:+.4}, {:?}",
            report.liminf_estimate, report.j_limit, report.verdict
        );
    }
    Ok(())
}
