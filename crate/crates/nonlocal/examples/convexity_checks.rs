//! Sampled convexity checkers: separate convexity per argument slot and
//! convexity of the profile functions Φ_{x,ψ}.
//!
//! Run: `cargo run --example convexity_checks`

use nonlocal::analysis::{
    check_phi_convex, check_separately_convex, phi_convex_suite, SampleBudget,
};
use nonlocal::grid::{Domain, Exponent, Grid};
use nonlocal::integrand::builtin;
use nonlocal::verdict::{Witness, DEFAULT_SEED};

fn main() -> nonlocal::Result<()> {
    let dom = Domain::unit_interval();
    let budget = SampleBudget::default();

    for name in ["square-difference", "product", "neg-square-difference"] {
        let f = builtin(name)?;
        let v = check_separately_convex(&f, &dom, budget)?;
        print!("{name:<24} separate convexity: {:?}", v.status);
        if let Some(Witness::SeparateConvexity { slot, theta, lhs, rhs, .. }) = &v.witness {
            print!("  (slot {slot}, θ = {theta:.3}: {lhs:.4} < {rhs:.4})");
        }
        println!();
    }

    // Profile convexity on a seeded random suite of ψ functions.
    let grid = Grid::build(dom, &[64])?;
    let (suite, xs, triples) =
        phi_convex_suite(&grid, 1, Exponent::Finite(2.0), 6, 6, 24, 3.0, DEFAULT_SEED)?;
    for name in ["square-difference", "neg-square-difference"] {
        let f = builtin(name)?;
        let v = check_phi_convex(&f, &suite, &xs, &triples, 1e-9)?;
        println!("{name:<24} profile convexity:  {:?}", v.status);
    }

    // The vector-valued example is NOT separately convex, yet its profile
    // functions are convex — the two checkers genuinely differ.
    let dom2 = Domain::interval(-1.0, 1.0)?;
    let grid2 = Grid::build(dom2.clone(), &[64])?;
    let f = builtin("example-n2-vector")?;
    let sep = check_separately_convex(&f, &dom2, SampleBudget::new(600, DEFAULT_SEED))?;
    let (suite, xs, triples) =
        phi_convex_suite(&grid2, 2, Exponent::Finite(2.0), 6, 6, 24, 3.0, DEFAULT_SEED)?;
    let phi = check_phi_convex(&f, &suite, &xs, &triples, 1e-9)?;
    println!(
        "example-n2-vector        separate: {:?}, profile: {:?}",
        sep.status, phi.status
    );
    Ok(())
}
