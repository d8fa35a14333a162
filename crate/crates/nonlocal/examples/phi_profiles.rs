//! Profile functions Φ_{x,ψ}(w) = ∫ f(x, y, w, ψ(y)) dy by quadrature.
//!
//! Run: `cargo run --example phi_profiles`

use nonlocal::functional::phi_profile;
use nonlocal::grid::{Domain, Exponent, Grid, GridFunction};
use nonlocal::integrand::builtin;

fn main() -> nonlocal::Result<()> {
    let grid = Grid::build(Domain::unit_interval(), &[128])?;
    let psi = GridFunction::scalar(grid.clone(), Exponent::Finite(2.0), |x| x[0])?;
    let ws: Vec<Vec<f64>> = (-8..=8).map(|k| vec![k as f64 * 0.25]).collect();

    // Φ of (w - z)² against ψ(y) = y is a shifted parabola.
    let f = builtin("square-difference")?;
    let profile = phi_profile(&f, &[0.5], &psi, &ws)?;
    println!("Φ_(x=0.5,ψ=y)(w) for (w - z)²:");
    for (w, v) in profile.w_samples.iter().zip(&profile.values) {
        let bar = "#".repeat((v * 8.0).min(60.0) as usize);
        println!("  w = {:>5.2}  Φ = {v:>8.4}  {bar}", w[0]);
    }

    // A w-free integrand has a constant profile.
    let f = builtin("example-3-divergent")?;
    let psi = GridFunction::constant(grid, &[0.5], Exponent::Finite(2.0))?;
    let profile = phi_profile(&f, &[0.25], &psi, &ws)?;
    let (lo, hi) = profile
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    println!("\nw-free integrand: Φ ranges over [{lo:.6}, {hi:.6}] (constant 2 = 1/ψ)");
    Ok(())
}
