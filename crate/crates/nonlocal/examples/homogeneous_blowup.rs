//! Blowup functions for homogeneous integrands that outgrow every product
//! bound: stripes of geometrically shrinking measure carry growing values
//! while the norm stays below |X|^(1/p).
//!
//! Run: `cargo run --example homogeneous_blowup`

use nonlocal::analysis::SampleBudget;
use nonlocal::grid::{Domain, Exponent, Grid};
use nonlocal::integrand::Integrand;
use nonlocal::witness::{homogeneous_witness, HomogeneousOutcome};

fn main() -> nonlocal::Result<()> {
    let f = Integrand::parse("exp(w1 * z1)", 1, 1)?;
    let grid = Grid::build(Domain::unit_interval(), &[4096])?;
    let outcome = homogeneous_witness(
        &f,
        Exponent::Finite(1.0),
        1.0,
        &grid,
        8,
        SampleBudget::default(),
    )?;
    match outcome {
        HomogeneousOutcome::Witness(w) => {
            println!("blocks of the blowup function for exp(wz), p = 1:");
            println!(
                "  {:>2} {:>8} {:>8} {:>12} {:>8} {:>8} {:>12}",
                "k", "w_k", "z_k", "ratio", "|E_k|", "|F_k|", "partial J"
            );
            for (k, (b, s)) in w.blocks.iter().zip(&w.block_partial_sums).enumerate() {
                println!(
                    "  {:>2} {:>8.3} {:>8.3} {:>12.3e} {:>8} {:>8} {:>12.4}",
                    k + 1,
                    b.w,
                    b.z,
                    b.ratio,
                    b.e_cells,
                    b.f_cells,
                    s
                );
            }
            println!(
                "\n‖u‖₁ = {:.4} ≤ bound {:.4}; truncated J keeps growing with the block count.",
                w.u.lp_norm().to_f64(),
                w.norm_bound
            );
        }
        HomogeneousOutcome::NoWitness { verdict } => {
            println!("no witness: growth check returned {:?}", verdict.status);
        }
    }

    // A bounded-product integrand admits no blowup.
    let f = Integrand::parse("w1^2 * z1^2", 1, 1)?;
    let grid = Grid::build(Domain::unit_interval(), &[256])?;
    match homogeneous_witness(&f, Exponent::Finite(2.0), 1.0, &grid, 4, SampleBudget::default())? {
        HomogeneousOutcome::NoWitness { verdict } => {
            println!("\nw²z²: no witness ({})", verdict.detail.unwrap_or_default());
        }
        _ => unreachable!(),
    }
    Ok(())
}
