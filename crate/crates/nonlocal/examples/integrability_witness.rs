//! Divergence witnesses: gluing two functions along a half-split or a
//! checkerboard so that the functional blows up.
//!
//! Run: `cargo run --example integrability_witness`

use nonlocal::functional::evaluate;
use nonlocal::grid::{Domain, Exponent, Grid, GridFunction};
use nonlocal::integrand::{builtin, Integrand};
use nonlocal::witness::{integrability_witness, IntegrabilityOutcome, WitnessBudget};

fn main() -> nonlocal::Result<()> {
    let grid = Grid::build(Domain::unit_interval(), &[64])?;
    let p = Exponent::Finite(2.0);
    let phi = GridFunction::constant(grid.clone(), &[1.0], p)?;
    let psi = GridFunction::constant(grid.clone(), &[2.0], p)?;
    let budget = WitnessBudget::default();

    // Bounded integrand: the probe refines twice, sees no growth, reports
    // no witness.
    let f = builtin("square-difference")?;
    match integrability_witness(&f, &phi, &psi, budget)? {
        IntegrabilityOutcome::NoWitness { estimates } => {
            println!("(w - z)²: no witness, refinement probes {estimates:?}");
        }
        _ => unreachable!(),
    }

    // 1/x² has a divergent edge: the half-split branch fires.
    let f = Integrand::parse("1 / x1^2", 1, 1)?;
    if let IntegrabilityOutcome::Witness(w) = integrability_witness(&f, &phi, &psi, budget)? {
        println!("\n1/x²: branch {:?}", w.branch);
        println!("  refinement probes: {:?}", w.estimates);
        println!("  certified lower bound: {:.3}", w.lower_bound);
        println!("  evaluate(f, u) = {:.3}", evaluate(&f, &w.u)?.to_f64());
    }

    // χ_{y ≤ x}/x³ diverges only on the diagonal: every half-split has
    // finite off-diagonal mass, so the nested-shell checkerboard gluing
    // carries the construction.
    let f = Integrand::parse("step(x1 - y1) / x1^3", 1, 1)?;
    if let IntegrabilityOutcome::Witness(w) = integrability_witness(&f, &phi, &psi, budget)? {
        println!("\nχ(y ≤ x)/x³: branch with shells:");
        if let nonlocal::witness::WitnessBranch::Checkerboard { shells } = &w.branch {
            for s in shells {
                println!(
                    "  level {:>2}: {:>3} cells, diagonal mass {:.3}, δ = {:.4}, layered bound {:.3}",
                    s.level, s.cells, s.diagonal_mass, s.delta, s.layered_bound
                );
            }
        }
        println!("  certified lower bound: {:.3}", w.lower_bound);
        println!("  evaluate(f, u) = {:.3}", evaluate(&f, &w.u)?.to_f64());
    }
    Ok(())
}
