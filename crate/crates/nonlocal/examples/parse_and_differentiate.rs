//! Parse integrand expressions and take symbolic w-derivatives.
//!
//! Run: `cargo run --example parse_and_differentiate`

use nonlocal::integrand::Integrand;

fn main() -> nonlocal::Result<()> {
    let f = Integrand::parse("w1^2 * (y1 - 0.25) + z1^2 * (x1 - 0.25)", 1, 1)?;
    println!("f       = {}", f.expr());
    println!("smooth in w: {}", f.is_smooth_in_w());

    let d = f.differentiate()?;
    println!("∂w f    = {}", d.grad_expr(0));
    println!("∂²w f   = {}", d.hess_expr(0, 0));

    // Symbolic derivatives agree with central differences.
    let (x, y, w, z) = ([0.3], [0.7], [1.5], [-0.5]);
    let h = 1e-5;
    let fd = (f.eval(&x, &y, &[w[0] + h], &z)? - f.eval(&x, &y, &[w[0] - h], &z)?) / (2.0 * h);
    println!(
        "at w = {}: symbolic {:.8}, finite difference {:.8}",
        w[0],
        d.grad_eval(0, &x, &y, &w, &z),
        fd
    );

    // Non-smooth occurrences of w are rejected with a typed error.
    let g = Integrand::parse("abs(w1) + z1^2", 1, 1)?;
    match g.differentiate() {
        Err(e) => println!("abs(w1) rejected as expected: {e}"),
        Ok(_) => unreachable!(),
    }

    // Parse errors carry byte offsets.
    match Integrand::parse("(w1 +", 1, 1) {
        Err(e) => println!("parse error surfaces the offset: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
