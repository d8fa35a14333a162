//! Pairwise symmetry: checking it and enforcing it by symmetrization.
//!
//! Run: `cargo run --example symmetrize_integrands`

use nonlocal::grid::Domain;
use nonlocal::integrand::{builtin, Integrand};
use nonlocal::verdict::{Witness, DEFAULT_SEED};

fn main() -> nonlocal::Result<()> {
    let dom = Domain::unit_interval();

    // w1 is visibly not pairwise symmetric; the checker returns a witness.
    let mut f = Integrand::parse("w1", 1, 1)?;
    let v = f.check_pairwise_symmetry(&dom, 200, DEFAULT_SEED)?;
    if let Some(Witness::Symmetry { forward, swapped, .. }) = &v.witness {
        println!("w1 refuted: f = {forward}, swapped = {swapped}");
    }

    // Its symmetrization ½(f(x,y,w,z) + f(y,x,z,w)) = ½(w1 + z1) passes.
    let mut s = f.symmetrize();
    println!("symmetrization: {}", s.expr());
    let v = s.check_pairwise_symmetry(&dom, 200, DEFAULT_SEED)?;
    println!("symmetrized verdict: {:?} after {} samples", v.status, v.samples);

    // The paired-indicator example is symmetric by construction.
    let mut g = builtin("example-4-nonlsc")?;
    let v = g.check_pairwise_symmetry(&dom, 500, DEFAULT_SEED)?;
    println!("example-4-nonlsc: {:?}", v.status);

    // The vector-valued registry example deliberately is not.
    let dom2 = Domain::interval(-1.0, 1.0)?;
    let mut h = builtin("example-n2-vector")?;
    let v = h.check_pairwise_symmetry(&dom2, 500, DEFAULT_SEED)?;
    println!("example-n2-vector: {:?}", v.status);
    Ok(())
}
