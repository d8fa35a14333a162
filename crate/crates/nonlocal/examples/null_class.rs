//! The null class: integrands g(x,y,w) + g(y,x,z) + h(x,y) with vanishing
//! means define the identically-zero functional.
//!
//! Run: `cargo run --example null_class`

use nonlocal::analysis::{check_null_class, uniform_w_grid, GTable, HTable};
use nonlocal::grid::{Domain, Grid};
use nonlocal::verdict::{Witness, DEFAULT_SEED};

fn main() -> nonlocal::Result<()> {
    let grid = Grid::build(Domain::unit_interval(), &[64])?;
    let w_grid = uniform_w_grid(-2.0, 2.0, 33)?;

    // g = (y - ½)w² has zero y-mean on (0,1); J of the assembled integrand
    // vanishes on every u.
    let g = GTable::from_fn(grid.clone(), w_grid.clone(), |_x, y, w| {
        (y[0] - 0.5) * w * w
    })?;
    let h = HTable::zero(grid.clone());
    let v = check_null_class(&g, &h, 20, DEFAULT_SEED)?;
    println!(
        "g = (y - ½)w², h = 0:      {:?} ({})",
        v.status,
        v.detail.unwrap_or_default()
    );

    // h(x,y) = x + y - 1 is symmetric with zero double mean; constant in
    // (w, z), it contributes nothing to J either.
    let g0 = GTable::from_fn(grid.clone(), w_grid.clone(), |_, _, _| 0.0)?;
    let h = HTable::from_fn(grid.clone(), |x, y| x[0] + y[0] - 1.0)?;
    let v = check_null_class(&g0, &h, 20, DEFAULT_SEED)?;
    println!(
        "g = 0, h = x + y - 1:      {:?} ({})",
        v.status,
        v.detail.unwrap_or_default()
    );

    // A y-independent g fails the zero-mean condition immediately.
    let g_bad = GTable::from_fn(grid.clone(), w_grid, |_x, _y, w| w * w)?;
    let v = check_null_class(&g_bad, &HTable::zero(grid), 5, DEFAULT_SEED)?;
    if let Some(Witness::NullClass { condition, at, value }) = &v.witness {
        println!("g = w²:                    refuted ({condition} at {at:?} = {value:.4})");
    }
    Ok(())
}
