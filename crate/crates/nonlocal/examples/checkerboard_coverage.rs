//! Checkerboard patterns S_δ and the quarter-coverage law: the product
//! S_δ × S_δᶜ covers close to 1/4 of any planar cell set as δ → 0.
//!
//! Run: `cargo run --example checkerboard_coverage`

use nonlocal::witness::{checkerboard_membership, coverage_fraction, ProductCellSet};

fn main() -> nonlocal::Result<()> {
    // Membership by lattice-cube parity.
    println!("membership of S_0.5 on the line:");
    for x in [0.0, 0.3, 0.5, 0.8, 1.0] {
        match checkerboard_membership(0.5, &[x]) {
            Ok(m) => println!("  x = {x:>4}: {}", if m { "in S" } else { "in Sᶜ" }),
            Err(e) => println!("  x = {x:>4}: {e}"),
        }
    }

    // Coverage of the unit square for shrinking δ.
    let e = ProductCellSet::unit_square();
    println!("\ncoverage of (0,1)² by S_δ × S_δᶜ:");
    println!("  {:<10} {:>10}", "delta", "fraction");
    for exp in 2..=10 {
        let delta = 2f64.powi(-exp);
        let frac = coverage_fraction(&e, delta, 2048)?;
        println!("  2^-{exp:<7} {frac:>10.5}");
    }

    // The same law holds on unions of boxes.
    let e = ProductCellSet::from_boxes(
        1,
        vec![
            vec![(0.0, 0.3), (0.1, 0.9)],
            vec![(0.5, 1.0), (0.0, 0.5)],
        ],
    )?;
    let frac = coverage_fraction(&e, 2f64.powi(-9), 2048)?;
    println!("\nbox union at δ = 2⁻⁹: fraction {frac:.5} (measure {:.3})", e.measure());
    Ok(())
}
