//! Constructive decomposition f = f̃ + g(x,y,w) + g(y,x,z) with a
//! separately convex remainder f̃, for scalar integrands.
//!
//! Run: `cargo run --example decomposition`

use nonlocal::analysis::{decompose, default_m_ladder, uniform_w_grid};
use nonlocal::error::Error;
use nonlocal::grid::{Domain, Grid};
use nonlocal::integrand::{builtin, Integrand};

fn main() -> nonlocal::Result<()> {
    // f = w²(y - ¼) + z²(x - ¼): not separately convex (the w-coefficient
    // changes sign in y), but its y-mean curvature is positive, so the
    // zero-functional part g = (y - ½)w² can be split off.
    let f = builtin("xy-weighted-quadratic")?;
    let grid = Grid::build(Domain::unit_interval(), &[32])?;
    let w_grid = uniform_w_grid(-2.0, 2.0, 33)?;
    let d = decompose(&f, &grid, &w_grid, &default_m_ladder())?;

    println!("gamma ladder rungs: {:?}", d.m_ladder);
    println!("non-stabilized entries: {}", d.unstable.len());
    println!("min_y-mean of gamma: {:.6}", d.min_gamma_mean);
    println!("max |Σ_y weight·g|:  {:.3e}", d.g_mean_residual);
    println!("remainder separately convex: {:?}", d.f_tilde_convex.status);

    println!("\ng(x, y, w) against the closed form (y - ½)w²:");
    let i = 10;
    for j in [3usize, 16, 28] {
        let y = grid.node(j)[0];
        let k = 24; // w = 1.0 on this grid
        println!(
            "  y = {y:.4}, w = {}: table {:+.6}, closed form {:+.6}",
            d.w_grid[k],
            d.g.at(i, j, k),
            (y - 0.5) * d.w_grid[k] * d.w_grid[k]
        );
    }

    println!("\nf̃ at grid nodes against w²/4 + z²/4:");
    let (x, y) = (grid.node(5).to_vec(), grid.node(20).to_vec());
    for (w, z) in [(1.0, -1.0), (2.0, 0.5)] {
        println!(
            "  w = {w:+.2}, z = {z:+.2}: f̃ = {:.6}, closed form {:.6}",
            d.f_tilde(&x, &y, &[w], &[z]),
            0.25 * w * w + 0.25 * z * z
        );
    }

    // When the y-mean of the minimized curvature is negative, the profile
    // functions are not convex and no such decomposition exists.
    let concave = Integrand::parse("neg(w1^2) - z1^2", 1, 1)?.declare_symmetric();
    match decompose(&concave, &grid, &w_grid, &default_m_ladder()) {
        Err(Error::PhiNonConvex { mean, .. }) => {
            println!("\n-w² - z² rejected: y-mean of gamma = {mean:.3}");
        }
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
