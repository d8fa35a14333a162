//! Integrands `f(x, y, w, z)`: parsing, evaluation, symmetrization,
//! differentiation in `w`, and the registry of named example integrands.

use crate::error::{Error, Result};
use crate::expr::{self, Compiled, Expr, Slot};
use crate::grid::Domain;
use crate::verdict::{PropertyVerdict, Witness};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Pairwise-symmetry knowledge about an integrand.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryStatus {
    /// Nothing known yet.
    Unknown,
    /// Asserted by the caller or by construction.
    Declared,
    /// `check_pairwise_symmetry` passed.
    Verified,
    /// A concrete counterexample exists.
    Refuted,
}

impl SymmetryStatus {
    /// Symmetric enough for operations that require it.
    pub fn is_symmetric(self) -> bool {
        matches!(self, SymmetryStatus::Declared | SymmetryStatus::Verified)
    }
}

/// A parsed integrand with its argument dimensions and analysis flags.
#[derive(Clone, Debug)]
pub struct Integrand {
    name: Option<String>,
    expr: Expr,
    compiled: Compiled,
    dim_m: usize,
    dim_n: usize,
    symmetry: SymmetryStatus,
    smooth_w: bool,
}

impl Integrand {
    /// Parses `text` over `x1..xm, y1..ym, w1..wn, z1..zn`.
    pub fn parse(text: &str, dim_m: usize, dim_n: usize) -> Result<Integrand> {
        let expr = expr::parse(text, dim_m, dim_n)?;
        Ok(Self::from_expr(expr, dim_m, dim_n))
    }

    pub fn from_expr(expr: Expr, dim_m: usize, dim_n: usize) -> Integrand {
        let smooth_w = !expr.nonsmooth_touches_w();
        let compiled = expr.compile();
        Integrand {
            name: None,
            expr,
            compiled,
            dim_m,
            dim_n,
            symmetry: SymmetryStatus::Unknown,
            smooth_w,
        }
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn dim_m(&self) -> usize {
        self.dim_m
    }

    pub fn dim_n(&self) -> usize {
        self.dim_n
    }

    pub fn symmetry(&self) -> SymmetryStatus {
        self.symmetry
    }

    /// `true` when no `abs`/`step`/`min`/`max` node touches a `w` variable,
    /// so `∇_w f` exists as an expression.
    pub fn is_smooth_in_w(&self) -> bool {
        self.smooth_w
    }

    /// True if neither `x` nor `y` occurs: `f = f(w, z)`.
    pub fn is_homogeneous(&self) -> bool {
        !self.expr.uses_slot(Slot::X) && !self.expr.uses_slot(Slot::Y)
    }

    pub fn declare_symmetric(mut self) -> Self {
        self.symmetry = SymmetryStatus::Declared;
        self
    }

    fn check_dims(&self, x: &[f64], y: &[f64], w: &[f64], z: &[f64]) -> Result<()> {
        if x.len() != self.dim_m || y.len() != self.dim_m {
            return Err(Error::DimensionMismatch(format!(
                "x, y must have {} components",
                self.dim_m
            )));
        }
        if w.len() != self.dim_n || z.len() != self.dim_n {
            return Err(Error::DimensionMismatch(format!(
                "w, z must have {} components",
                self.dim_n
            )));
        }
        Ok(())
    }

    /// Pointwise value; poles and domain violations are errors.
    pub fn eval(&self, x: &[f64], y: &[f64], w: &[f64], z: &[f64]) -> Result<f64> {
        self.check_dims(x, y, w, z)?;
        self.compiled.eval_checked(x, y, w, z)
    }

    /// Unchecked fast path: non-finite output marks a pole.
    #[inline]
    pub fn eval_raw(&self, x: &[f64], y: &[f64], w: &[f64], z: &[f64]) -> f64 {
        self.compiled.eval(x, y, w, z)
    }

    /// The symmetrization `½(f(x,y,w,z) + f(y,x,z,w))`.
    ///
    /// Idempotent pointwise, and the result is pairwise symmetric by
    /// construction (float addition commutes bitwise).
    pub fn symmetrize(&self) -> Integrand {
        let sym = Expr::Mul(
            Expr::Const(0.5).into(),
            Expr::Add(self.expr.clone().into(), self.expr.swap_pairs().into()).into(),
        );
        let mut out = Integrand::from_expr(sym, self.dim_m, self.dim_n);
        out.symmetry = SymmetryStatus::Declared;
        out.name = self.name.as_ref().map(|n| format!("sym({n})"));
        out
    }

    /// Samples `f(x,y,w,z) = f(y,x,z,w)` at seeded random tuples; `x, y` are
    /// drawn from `domain`, `w, z` from boxes of cycling scale. Updates the
    /// symmetry status. Samples that hit poles in both orientations are
    /// skipped and counted.
    pub fn check_pairwise_symmetry(
        &mut self,
        domain: &Domain,
        samples: usize,
        seed: u64,
    ) -> Result<PropertyVerdict> {
        if samples == 0 {
            return Err(Error::InvalidArgument("samples must be ≥ 1".into()));
        }
        if domain.dim() != self.dim_m {
            return Err(Error::DimensionMismatch(format!(
                "domain dimension {} vs integrand m = {}",
                domain.dim(),
                self.dim_m
            )));
        }
        const REL_TOL: f64 = 1e-9;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut skipped = 0usize;
        for s in 0..samples {
            let scale = [1.0, 4.0, 16.0][s % 3];
            let x = sample_box(&mut rng, domain.bounds());
            let y = sample_box(&mut rng, domain.bounds());
            let w = sample_cube(&mut rng, self.dim_n, scale);
            let z = sample_cube(&mut rng, self.dim_n, scale);
            let forward = self.eval_raw(&x, &y, &w, &z);
            let swapped = self.eval_raw(&y, &x, &z, &w);
            if !forward.is_finite() || !swapped.is_finite() {
                skipped += 1;
                continue;
            }
            let tol = REL_TOL * (1.0 + forward.abs().max(swapped.abs()));
            if (forward - swapped).abs() > tol {
                self.symmetry = SymmetryStatus::Refuted;
                return Ok(PropertyVerdict::refuted(
                    Witness::Symmetry {
                        x,
                        y,
                        w,
                        z,
                        forward,
                        swapped,
                    },
                    samples,
                    REL_TOL,
                    seed,
                ));
            }
        }
        if skipped == samples {
            return Err(Error::Pole(
                "every symmetry sample hit a pole; cannot assess symmetry".into(),
            ));
        }
        self.symmetry = SymmetryStatus::Verified;
        let mut verdict = PropertyVerdict::passed(samples, REL_TOL, seed);
        if skipped > 0 {
            verdict = verdict.with_detail(format!("{skipped} pole samples skipped"));
        }
        Ok(verdict)
    }

    /// Symbolic `∇_w f` and `∂²_w f`.
    pub fn differentiate(&self) -> Result<IntegrandDeriv> {
        if !self.smooth_w {
            return Err(Error::NonSmoothInW(format!(
                "integrand {} contains abs/step/min/max touching w",
                self.name.as_deref().unwrap_or("<expr>")
            )));
        }
        let n = self.dim_n;
        let mut grad = Vec::with_capacity(n);
        for i in 0..n {
            let g = self.expr.diff_w(i)?;
            let c = g.compile();
            grad.push((g, c));
        }
        let mut hess = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                // ∂_{w_i}∂_{w_j} f computed as ∂_{w_i}(grad_j).
                let h = grad[j].0.diff_w(i)?;
                let c = h.compile();
                hess.push((h, c));
            }
        }
        Ok(IntegrandDeriv {
            base: self.clone(),
            grad,
            hess,
        })
    }
}

impl std::fmt::Display for Integrand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.name {
            Some(n) => write!(f, "{n}"),
            None => write!(f, "{}", self.expr),
        }
    }
}

fn sample_box(rng: &mut ChaCha8Rng, bounds: &[(f64, f64)]) -> Vec<f64> {
    bounds
        .iter()
        .map(|&(lo, hi)| rng.gen_range(lo..hi))
        .collect()
}

fn sample_cube(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}

/// An integrand together with its first and second `w`-derivatives.
#[derive(Clone, Debug)]
pub struct IntegrandDeriv {
    base: Integrand,
    grad: Vec<(Expr, Compiled)>,
    hess: Vec<(Expr, Compiled)>,
}

impl IntegrandDeriv {
    pub fn base(&self) -> &Integrand {
        &self.base
    }

    pub fn grad_expr(&self, c: usize) -> &Expr {
        &self.grad[c].0
    }

    pub fn hess_expr(&self, r: usize, c: usize) -> &Expr {
        &self.hess[r * self.base.dim_n + c].0
    }

    /// `∂_{w_c} f` at a point (NaN marks a pole).
    #[inline]
    pub fn grad_eval(&self, c: usize, x: &[f64], y: &[f64], w: &[f64], z: &[f64]) -> f64 {
        self.grad[c].1.eval(x, y, w, z)
    }

    /// `∂_{w_r}∂_{w_c} f` at a point (NaN marks a pole).
    #[inline]
    pub fn hess_eval(&self, r: usize, c: usize, x: &[f64], y: &[f64], w: &[f64], z: &[f64]) -> f64 {
        self.hess[r * self.base.dim_n + c].1.eval(x, y, w, z)
    }
}

// ---------------------------------------------------------------------------
// Registry of named integrands
// ---------------------------------------------------------------------------

/// The `C²` bridge used on `(-2, 2)` by `example-n2-vector`'s coefficient
/// `a`: matches `|ζ| - 1` in value, slope and curvature at `±2`, is even,
/// convex, nonnegative and dominates `|ζ| - 1` everywhere. One admissible
/// choice; values strictly inside `(-2, 2)` depend on it.
const A_BRIDGE: &str = "0.1875 * z1^2 + 0.03125 * z1^4 - 0.00390625 * z1^6";

struct BuiltinDef {
    name: &'static str,
    dim_m: usize,
    dim_n: usize,
    text: &'static str,
    symmetric: bool,
    describe: &'static str,
}

fn builtin_table() -> Vec<BuiltinDef> {
    let n2 = format!(
        "step(y1) * 0.5 * ((step(z1) * (1 + z1 + 0.5 * z1^2) + (1 - step(z1)) / (1 - z1 + 0.5 * z1^2)) * w1^2 \
         + (step(neg(z1)) * (1 - z1 + 0.5 * z1^2) + (1 - step(neg(z1))) / (1 + z1 + 0.5 * z1^2)) * w2^2) \
         + (1 - step(y1)) * (0.5 * (step(abs(z1) - 2) * (abs(z1) - 1) + (1 - step(abs(z1) - 2)) * ({A_BRIDGE})) * (w1^2 + w2^2) \
         + z1 * w1 * w2)"
    );
    let n2: &'static str = Box::leak(n2.into_boxed_str());
    vec![
        BuiltinDef {
            name: "example-3-divergent",
            dim_m: 1,
            dim_n: 1,
            text: "step(z1 - x1) * step(1 - z1) / z1",
            symmetric: false,
            describe: "1/z on z ∈ [x, 1], 0 otherwise; finite functional on X = (0,1) \
                       but no integrable envelope near x = 0",
        },
        BuiltinDef {
            name: "example-4-nonlsc",
            dim_m: 1,
            dim_n: 1,
            text: "neg(0.5 * (step(z1 - x1) * step(1 - z1) / z1 + step(w1 - y1) * step(1 - w1) / w1))",
            symmetric: true,
            describe: "pairwise-symmetric gluing of -1/z on z ∈ [x, 1]; the functional equals \
                       -|u⁻¹((0,1])| and is not lower semi-continuous at 0",
        },
        BuiltinDef {
            name: "example-n2-vector",
            dim_m: 1,
            dim_n: 2,
            text: n2,
            symmetric: false,
            describe: "vector-valued (n = 2) integrand on X = [-1, 1] with convex profile \
                       functions but no separately convex representative; the C² bridge of the \
                       coefficient a on (-2, 2) is one admissible choice",
        },
        BuiltinDef {
            name: "square-difference",
            dim_m: 1,
            dim_n: 1,
            text: "(w1 - z1)^2",
            symmetric: true,
            describe: "smooth, separately convex pair interaction",
        },
        BuiltinDef {
            name: "neg-square-difference",
            dim_m: 1,
            dim_n: 1,
            text: "neg((w1 - z1)^2)",
            symmetric: true,
            describe: "smooth concave pair interaction; weakly lsc fails",
        },
        BuiltinDef {
            name: "product",
            dim_m: 1,
            dim_n: 1,
            text: "w1 * z1",
            symmetric: true,
            describe: "bilinear interaction, affine in each slot",
        },
        BuiltinDef {
            name: "separable-quadratic",
            dim_m: 1,
            dim_n: 1,
            text: "w1^2 + z1^2",
            symmetric: true,
            describe: "decoupled quadratic",
        },
        BuiltinDef {
            name: "shifted-quadratic",
            dim_m: 1,
            dim_n: 1,
            text: "(w1 - 1)^2 + (z1 - 1)^2",
            symmetric: true,
            describe: "decoupled quadratic with minimizer u ≡ 1",
        },
        BuiltinDef {
            name: "gaussian-pair",
            dim_m: 1,
            dim_n: 1,
            text: "exp(neg((w1 - z1)^2))",
            symmetric: true,
            describe: "smooth bounded non-convex pair interaction",
        },
        BuiltinDef {
            name: "xy-weighted-quadratic",
            dim_m: 1,
            dim_n: 1,
            text: "w1^2 * (y1 - 0.25) + z1^2 * (x1 - 0.25)",
            symmetric: true,
            describe: "x,y-dependent quadratic with a nonzero null-class component on X = (0,1)",
        },
    ]
}

/// Names of all registered integrands.
pub fn builtin_names() -> Vec<&'static str> {
    builtin_table().iter().map(|d| d.name).collect()
}

/// Human-readable one-line description of a builtin.
pub fn builtin_description(name: &str) -> Result<&'static str> {
    builtin_table()
        .iter()
        .find(|d| d.name == name)
        .map(|d| d.describe)
        .ok_or_else(|| Error::UnknownBuiltin(name.into()))
}

/// Constructs a named integrand from the registry.
pub fn builtin(name: &str) -> Result<Integrand> {
    let table = builtin_table();
    let def = table
        .iter()
        .find(|d| d.name == name)
        .ok_or_else(|| Error::UnknownBuiltin(name.into()))?;
    let mut f = Integrand::parse(def.text, def.dim_m, def.dim_n)?;
    f.name = Some(def.name.to_string());
    f.symmetry = if def.symmetric {
        SymmetryStatus::Declared
    } else {
        SymmetryStatus::Unknown
    };
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verdict::{VerdictStatus, DEFAULT_SEED};

    #[test]
    fn parse_flags() {
        let f = Integrand::parse("(w1 - z1)^2", 1, 1).unwrap();
        assert!(f.is_smooth_in_w());
        let g = Integrand::parse("step(z1 - x1) * step(1 - z1) / z1", 1, 1).unwrap();
        assert!(g.is_smooth_in_w(), "no w occurrence at all");
        let h = Integrand::parse("abs(w1) + z1", 1, 1).unwrap();
        assert!(!h.is_smooth_in_w());
    }

    #[test]
    fn eval_example_3_branches() {
        let f = builtin("example-3-divergent").unwrap();
        // z < x fails the indicator.
        assert_eq!(f.eval(&[0.5], &[0.0], &[0.0], &[0.25]).unwrap(), 0.0);
        // z ∈ [x, 1] gives 1/z.
        assert_eq!(f.eval(&[0.25], &[0.0], &[0.0], &[0.5]).unwrap(), 2.0);
        // z = 0 is gated by the indicator, not a pole.
        assert_eq!(f.eval(&[0.25], &[0.0], &[0.0], &[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn eval_example_4_branches() {
        let f = builtin("example-4-nonlsc").unwrap();
        // Both indicator branches fire: ½(-2 + -2) = -2.
        let both = f.eval(&[0.1], &[0.3], &[0.5], &[0.5]).unwrap();
        assert_eq!(both, -2.0);
        // Only the (x, z) branch fires (0.5 ∉ [0.9, 1]): ½(-2 + 0) = -1.
        let one = f.eval(&[0.1], &[0.9], &[0.5], &[0.5]).unwrap();
        assert_eq!(one, -1.0);
        // At the zero function the indicators gate both reciprocals.
        assert_eq!(f.eval(&[0.1], &[0.9], &[0.0], &[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn n2_coefficients_match_closed_forms() {
        let f = builtin("example-n2-vector").unwrap();
        // b(0) = 1 via f(x, y>0, w=(1,0), z=(0,·)): f = ½ b(z1) w1².
        let b = |zeta: f64| 2.0 * f.eval(&[0.0], &[0.5], &[1.0, 0.0], &[zeta, 0.0]).unwrap();
        assert_eq!(b(0.0), 1.0);
        assert!((b(1.0) - 2.5).abs() < 1e-12);
        assert!((b(-1.0) - 1.0 / 2.5).abs() < 1e-12);
        // a(3) = 2 via the y < 0 branch with w = (1,0): f = ½ a(z1).
        let a = |zeta: f64| 2.0 * f.eval(&[0.0], &[-0.5], &[1.0, 0.0], &[zeta, 0.0]).unwrap();
        assert_eq!(a(3.0), 2.0);
        assert_eq!(a(-3.0), 2.0);
        assert_eq!(a(2.0), 1.0);
        assert_eq!(a(0.0), 0.0);
    }

    #[test]
    fn n2_bridge_dominates_and_is_convex() {
        let f = builtin("example-n2-vector").unwrap();
        let a = |zeta: f64| 2.0 * f.eval(&[0.0], &[-0.5], &[1.0, 0.0], &[zeta, 0.0]).unwrap();
        let b = |zeta: f64| 2.0 * f.eval(&[0.0], &[0.5], &[1.0, 0.0], &[zeta, 0.0]).unwrap();
        let mut zeta = -4.0;
        while zeta <= 4.0 {
            let av = a(zeta);
            assert!(av >= 0.0, "a({zeta}) = {av} < 0");
            assert!(av >= zeta.abs() - 1.0 - 1e-12, "a({zeta}) below |ζ|-1");
            // b(ζ)·b(-ζ) ≥ 1, hence (a+1)² - ζ² ≥ 0 is what the Hessian
            // determinant argument needs; check both literally.
            assert!(b(zeta) * b(-zeta) >= 1.0 - 1e-12);
            assert!((av + 1.0).powi(2) - zeta * zeta >= -1e-12);
            // Convexity by second differences.
            let h = 1e-3;
            let dd = a(zeta + h) - 2.0 * av + a(zeta - h);
            assert!(dd >= -1e-9, "a''({zeta}) ≈ {} < 0", dd / (h * h));
            zeta += 0.125;
        }
    }

    #[test]
    fn symmetrize_formula_and_idempotence() {
        let f = Integrand::parse("w1", 1, 1).unwrap();
        let s = f.symmetrize();
        // ½(w1 + z1)
        assert_eq!(s.eval(&[0.0], &[0.0], &[3.0], &[1.0]).unwrap(), 2.0);
        let ss = s.symmetrize();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let (x, y, w, z) = (
                [rng.gen_range(0.0..1.0)],
                [rng.gen_range(0.0..1.0)],
                [rng.gen_range(-4.0..4.0)],
                [rng.gen_range(-4.0..4.0)],
            );
            let a = s.eval_raw(&x, &y, &w, &z);
            let b = ss.eval_raw(&x, &y, &w, &z);
            assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn symmetrizing_the_one_sided_indicator_gives_the_paired_builtin() {
        // Start from the (x, z)-only gated -1/z and symmetrize; the result
        // must agree pointwise with the registered paired integrand.
        let base = Integrand::parse("neg(step(z1 - x1) * step(1 - z1) / z1)", 1, 1).unwrap();
        let sym = base.symmetrize();
        let reference = builtin("example-4-nonlsc").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let x = [rng.gen_range(0.0..1.0)];
            let y = [rng.gen_range(0.0..1.0)];
            let w = [rng.gen_range(-1.5..1.5)];
            let z = [rng.gen_range(-1.5..1.5)];
            let a = sym.eval_raw(&x, &y, &w, &z);
            let b = reference.eval_raw(&x, &y, &w, &z);
            assert!(
                (a.is_nan() && b.is_nan()) || (a - b).abs() <= 1e-15,
                "at {x:?},{y:?},{w:?},{z:?}: {a} vs {b}"
            );
        }
    }

    #[test]
    fn symmetrize_idempotent_on_already_symmetric() {
        let f = Integrand::parse("w1 * z1", 1, 1).unwrap();
        let s = f.symmetrize();
        assert_eq!(s.eval(&[0.0], &[0.0], &[3.0], &[2.0]).unwrap(), 6.0);
    }

    #[test]
    fn symmetry_check_verdicts() {
        let dom = Domain::unit_interval();
        let mut sym = Integrand::parse("w1 * z1", 1, 1).unwrap();
        let v = sym.check_pairwise_symmetry(&dom, 200, DEFAULT_SEED).unwrap();
        assert_eq!(v.status, VerdictStatus::EvidencePassed);
        assert_eq!(sym.symmetry(), SymmetryStatus::Verified);

        let mut asym = Integrand::parse("w1", 1, 1).unwrap();
        let v = asym.check_pairwise_symmetry(&dom, 200, DEFAULT_SEED).unwrap();
        assert!(v.is_refuted());
        let w = v.witness.unwrap();
        match w {
            Witness::Symmetry { forward, swapped, .. } => assert!(forward != swapped),
            other => panic!("wrong witness {other:?}"),
        }
    }

    #[test]
    fn n2_symmetry_refuted() {
        let dom = Domain::interval(-1.0, 1.0).unwrap();
        let mut f = builtin("example-n2-vector").unwrap();
        let v = f.check_pairwise_symmetry(&dom, 500, DEFAULT_SEED).unwrap();
        assert!(v.is_refuted());
    }

    #[test]
    fn example_4_symmetry_verified() {
        let dom = Domain::unit_interval();
        let mut f = builtin("example-4-nonlsc").unwrap();
        let v = f.check_pairwise_symmetry(&dom, 500, DEFAULT_SEED).unwrap();
        assert_eq!(v.status, VerdictStatus::EvidencePassed);
    }

    #[test]
    fn differentiate_quadratic() {
        let f = Integrand::parse("(w1 - z1)^2", 1, 1).unwrap();
        let d = f.differentiate().unwrap();
        let pt = (&[0.0][..], &[0.0][..], &[3.0][..], &[1.0][..]);
        assert_eq!(d.grad_eval(0, pt.0, pt.1, pt.2, pt.3), 4.0);
        assert_eq!(d.hess_eval(0, 0, pt.0, pt.1, pt.2, pt.3), 2.0);
    }

    #[test]
    fn differentiate_xy_weighted() {
        let f = builtin("xy-weighted-quadratic").unwrap();
        let d = f.differentiate().unwrap();
        for (x, y, w) in [(0.2, 0.7, 1.5), (0.9, 0.1, -2.0)] {
            let h = d.hess_eval(0, 0, &[x], &[y], &[w], &[0.3]);
            assert!((h - 2.0 * (y - 0.25)).abs() < 1e-12);
        }
    }

    #[test]
    fn differentiate_rejects_nonsmooth() {
        let f = Integrand::parse("abs(w1)", 1, 1).unwrap();
        assert!(matches!(f.differentiate(), Err(Error::NonSmoothInW(_))));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        // Every smooth builtin: symbolic grad/hess vs central differences.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for name in builtin_names() {
            let f = builtin(name).unwrap();
            if !f.is_smooth_in_w() {
                continue;
            }
            let d = f.differentiate().unwrap();
            let n = f.dim_n();
            for _ in 0..100 {
                let x = [rng.gen_range(0.05..0.95)];
                let y = [rng.gen_range(0.05..0.95)];
                let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let z: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
                for c in 0..n {
                    let h = 1e-5;
                    let mut wp = w.clone();
                    let mut wm = w.clone();
                    wp[c] += h;
                    wm[c] -= h;
                    let fd =
                        (f.eval_raw(&x, &y, &wp, &z) - f.eval_raw(&x, &y, &wm, &z)) / (2.0 * h);
                    let an = d.grad_eval(c, &x, &y, &w, &z);
                    if fd.is_finite() && an.is_finite() {
                        assert!(
                            (fd - an).abs() <= 1e-6 * (1.0 + an.abs()),
                            "{name} ∂w{c}: fd {fd} vs {an}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn hessian_symmetric_under_evaluation() {
        let f = builtin("example-n2-vector").unwrap();
        let d = f.differentiate().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x = [rng.gen_range(-1.0..1.0)];
            let y = [rng.gen_range(-1.0..1.0)];
            let w = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let z = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let h01 = d.hess_eval(0, 1, &x, &y, &w, &z);
            let h10 = d.hess_eval(1, 0, &x, &y, &w, &z);
            assert!((h01 - h10).abs() <= 1e-10 * (1.0 + h01.abs()));
        }
    }

    #[test]
    fn unknown_builtin_errors() {
        assert!(matches!(
            builtin("no-such-integrand"),
            Err(Error::UnknownBuiltin(_))
        ));
    }
}
