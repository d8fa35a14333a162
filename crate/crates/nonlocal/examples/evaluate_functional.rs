//! Evaluate the double-integral functional J(u) on a midpoint grid.
//!
//! Run: `cargo run --example evaluate_functional`

use nonlocal::functional::evaluate;
use nonlocal::grid::{Domain, Exponent, Grid, GridFunction};
use nonlocal::integrand::{builtin, Integrand};

fn main() -> nonlocal::Result<()> {
    let grid = Grid::build(Domain::unit_interval(), &[256])?;

    // J(u) = ∬ (u(x) - u(y))² dx dy for u(x) = x: variance-style value.
    let f = builtin("square-difference")?;
    let u = GridFunction::scalar(grid.clone(), Exponent::Finite(2.0), |x| x[0])?;
    let j = evaluate(&f, &u)?;
    println!("∬ (u(x) - u(y))² dx dy with u(x) = x  →  {:.6}", j.to_f64());
    println!("  positive part {:.6}, negative part {:.6}", j.pos_part, j.neg_part);

    // The same machinery accepts any expression over x1, y1, w1, z1.
    let f = Integrand::parse("w1 * z1 + 0.25 * (x1 - y1)^2", 1, 1)?;
    let j = evaluate(&f, &u)?;
    println!("custom integrand                       →  {:.6}", j.to_f64());

    // A gated reciprocal: the indicator step(z1 - x1) * step(1 - z1) keeps
    // the 1/z factor away from its pole, so constants evaluate cleanly.
    let f = builtin("example-3-divergent")?;
    for c in [0.25, 0.5, 1.0, 2.0] {
        let u = GridFunction::constant(grid.clone(), &[c], Exponent::Finite(2.0))?;
        let j = evaluate(&f, &u)?;
        println!("gated 1/z integrand at u ≡ {c:<4}        →  {:.6}", j.to_f64());
    }

    // Grid functions serialize to CSV (header x_1..x_m,u_1..u_n).
    let mut csv = Vec::new();
    u.write_csv(&mut csv)?;
    println!("\nfirst CSV rows of u:");
    for line in String::from_utf8_lossy(&csv).lines().take(4) {
        println!("  {line}");
    }
    Ok(())
}
