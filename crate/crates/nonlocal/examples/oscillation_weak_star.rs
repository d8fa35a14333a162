//! Oscillating stripe sequences and their weak-star convergence, measured
//! by pairings against a dictionary of test functions.
//!
//! Run: `cargo run --example oscillation_weak_star`

use nonlocal::grid::{Domain, Exponent, Grid, GridFunction};
use nonlocal::witness::{oscillation_sequence, pairing};

fn main() -> nonlocal::Result<()> {
    let grid = Grid::build(Domain::unit_interval(), &[512])?;
    let p = Exponent::Finite(2.0);
    let plus = GridFunction::constant(grid.clone(), &[1.0], p)?;
    let minus = GridFunction::constant(grid.clone(), &[-1.0], p)?;
    let theta = 0.5;

    // u_k oscillates between ±1 on stripes of width 1/(2k); it converges
    // weakly-star to θ·1 + (1-θ)·(-1) = 0 although |u_k| ≡ 1 pointwise.
    println!("pairings ⟨u_k, h⟩ for stripe oscillations (limit 0):");
    println!("  {:>4} {:>12} {:>12} {:>12}", "k", "h = 1", "h = x", "h = x²");
    for k in [1u32, 2, 4, 8, 16, 32, 64] {
        let u = oscillation_sequence(theta, &plus, &minus, k)?;
        println!(
            "  {k:>4} {:>12.6} {:>12.6} {:>12.6}",
            pairing(&u, |_| 1.0),
            pairing(&u, |x| x[0]),
            pairing(&u, |x| x[0] * x[0]),
        );
    }

    // Non-half θ mixes the weak-star limit accordingly.
    let theta = 0.25;
    println!("\nθ = 0.25 against h = 1 (limit 2θ - 1 = -0.5):");
    for k in [4u32, 16, 64] {
        let u = oscillation_sequence(theta, &plus, &minus, k)?;
        println!("  k = {k:>3}: {:+.6}", pairing(&u, |_| 1.0));
    }
    Ok(())
}
