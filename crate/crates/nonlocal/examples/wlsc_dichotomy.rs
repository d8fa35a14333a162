//! Weak lower semi-continuity verdicts: the aggregate of separate
//! convexity (sufficient) and profile convexity (characterizing).
//!
//! Run: `cargo run --example wlsc_dichotomy`

use nonlocal::analysis::{phi_convex_suite, wlsc_verdict, SampleBudget, WlscVerdict};
use nonlocal::grid::{Domain, Exponent, Grid};
use nonlocal::integrand::builtin;
use nonlocal::verdict::DEFAULT_SEED;

fn main() -> nonlocal::Result<()> {
    let p = Exponent::Finite(2.0);
    let budget = SampleBudget::default();

    let grid = Grid::build(Domain::unit_interval(), &[48])?;
    let (suite, _, _) = phi_convex_suite(&grid, 1, p, 8, 1, 1, 3.0, DEFAULT_SEED)?;
    for name in ["square-difference", "product", "neg-square-difference"] {
        let f = builtin(name)?;
        let r = wlsc_verdict(&f, p, &suite, budget)?;
        match &r.verdict {
            WlscVerdict::WlscEvidence { via } => println!("{name:<24} evidence (via {via})"),
            WlscVerdict::WlscRefuted => println!("{name:<24} refuted"),
            WlscVerdict::Inconclusive { reason } => println!("{name:<24} inconclusive: {reason}"),
        }
    }

    // The vector-valued example: the separate-convexity criterion fails but
    // the profile criterion carries the verdict.
    let grid = Grid::build(Domain::interval(-1.0, 1.0)?, &[48])?;
    let (suite, _, _) = phi_convex_suite(&grid, 2, p, 8, 1, 1, 3.0, DEFAULT_SEED)?;
    let f = builtin("example-n2-vector")?;
    let r = wlsc_verdict(&f, p, &suite, SampleBudget::new(500, DEFAULT_SEED))?;
    match &r.verdict {
        WlscVerdict::WlscEvidence { via } => {
            println!(
                "example-n2-vector        evidence via {via} (separate convexity refuted: {})",
                r.separately_convex.is_refuted()
            );
        }
        other => println!("example-n2-vector        {other:?}"),
    }
    Ok(())
}
