//! Integrability growth checks: the product bound for homogeneous
//! integrands and tabulated dominating-bound certificates.
//!
//! Run: `cargo run --example growth_bounds`

use nonlocal::analysis::{
    check_homogeneous_bound, validate_p_bound_certificate, BoundCertificate, SampleBudget,
};
use nonlocal::grid::{Domain, Exponent, Grid};
use nonlocal::integrand::{builtin, Integrand};
use nonlocal::verdict::Witness;

fn main() -> nonlocal::Result<()> {
    let p = Exponent::Finite(2.0);
    let budget = SampleBudget::default();

    // w²z² / ((1 + w²)(1 + z²)) stays below 1: evidence with C ≈ 1.
    let f = Integrand::parse("w1^2 * z1^2", 1, 1)?;
    let v = check_homogeneous_bound(&f, p, 1.0, budget)?;
    println!("w²z²: {:?} ({})", v.status, v.detail.unwrap_or_default());

    // exp(wz) outgrows every product bound; the sup ratio trend doubles.
    let f = Integrand::parse("exp(w1 * z1)", 1, 1)?;
    let v = check_homogeneous_bound(&f, Exponent::Finite(1.0), 1.0, budget)?;
    if let Some(Witness::HomogeneousGrowth { ratio, trend, .. }) = &v.witness {
        println!("exp(wz): refuted, ratio {ratio:.3e}, trend over doubling boxes:");
        for (t, s) in trend.iter().enumerate() {
            println!("  box half-width 2^{t}: sup ratio {s:.3e}");
        }
    }

    // A certificate |f| ≤ α + β|z|² + β|w|² + C|w|²|z|² for (w - z)².
    let grid = Grid::build(Domain::unit_interval(), &[32])?;
    let f = builtin("square-difference")?;
    let cert = BoundCertificate::constant(grid.clone(), p, 1.0, 2.0, 2.0, 0.0)?;
    let v = validate_p_bound_certificate(&f, &cert, budget)?;
    println!("(w - z)² under α=β=2, C=0: {:?}", v.status);

    // No finite tables dominate the gated 1/z integrand: its envelope in x
    // is 1/x, which blows up near the left edge.
    let grid = Grid::build(Domain::unit_interval(), &[64])?;
    let f = builtin("example-3-divergent")?;
    let cert = BoundCertificate::constant(grid, p, 1.0, 10.0, 10.0, 10.0)?;
    let v = validate_p_bound_certificate(&f, &cert, SampleBudget::new(2000, budget.seed))?;
    if let Some(Witness::PBound { x, value, bound, .. }) = &v.witness {
        println!(
            "gated 1/z: refuted at x = {:.4} where f = {value:.2} > bound {bound:.2}",
            x[0]
        );
    }
    Ok(())
}
