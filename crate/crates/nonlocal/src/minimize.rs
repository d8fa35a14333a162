//! Direct-method minimizer: projected gradient descent with Armijo
//! backtracking on the discretized functional.

use crate::error::{Error, Result};
use crate::functional::{evaluate, gradient_from_deriv};
use crate::grid::GridFunction;
use crate::integrand::Integrand;
use crate::sum::dot;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Minimizer configuration. Defaults: `step0 = 1`, `armijo_c = 1e-4`,
/// `shrink = 0.5`, `grad_tol = 1e-7`, 500 iterations, no box.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MinimizeConfig {
    pub max_iters: usize,
    pub step0: f64,
    pub armijo_c: f64,
    pub shrink: f64,
    pub grad_tol: f64,
    /// Componentwise bounds `[-M, M]`, realizing `‖u‖_∞ ≤ M`.
    pub box_bound: Option<f64>,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        MinimizeConfig {
            max_iters: 500,
            step0: 1.0,
            armijo_c: 1e-4,
            shrink: 0.5,
            grad_tol: 1e-7,
            box_bound: None,
        }
    }
}

impl MinimizeConfig {
    fn validate(&self) -> Result<()> {
        let ok = self.max_iters > 0
            && self.step0 > 0.0
            && self.armijo_c > 0.0
            && self.armijo_c < 1.0
            && self.shrink > 0.0
            && self.shrink < 1.0
            && self.grad_tol > 0.0
            && self.box_bound.is_none_or(|m| m > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument("invalid minimizer configuration".into()))
        }
    }
}

/// One line of the iteration trace.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TraceEntry {
    pub iter: usize,
    pub j: f64,
    pub step: f64,
    pub grad_norm: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimizeResult {
    #[serde(skip)]
    pub u_star: GridFunction,
    pub j_star: f64,
    pub iters: usize,
    pub grad_norm: f64,
    pub converged: bool,
    pub trace: Vec<TraceEntry>,
}

fn project(values: &mut [f64], bound: Option<f64>) {
    if let Some(m) = bound {
        for v in values {
            *v = v.clamp(-m, m);
        }
    }
}

/// Euclidean norm of the projected gradient: components pressing against an
/// active bound are zeroed.
fn projected_grad_norm(u: &[f64], g: &[f64], bound: Option<f64>) -> f64 {
    let mut sq = 0.0;
    for (ui, gi) in u.iter().zip(g) {
        let blocked = match bound {
            Some(m) => (*ui >= m && *gi < 0.0) || (*ui <= -m && *gi > 0.0),
            None => false,
        };
        if !blocked {
            sq += gi * gi;
        }
    }
    sq.sqrt()
}

/// Projected gradient descent with Armijo backtracking.
///
/// Accepts a step when `J(u⁺) ≤ J(u) − c · step · ‖∇J‖²` (projected
/// gradient norm when the box is active); the trace of `J` is monotone.
/// A line search that shrinks 60 times without acceptance stalls the run
/// with `converged = false`.
pub fn minimize(f: &Integrand, u0: &GridFunction, cfg: &MinimizeConfig) -> Result<MinimizeResult> {
    cfg.validate()?;
    if !f.symmetry().is_symmetric() {
        return Err(Error::AsymmetricIntegrand);
    }
    let fd = f.differentiate()?;
    let grid = u0.grid().clone();
    let n = u0.codomain_dim();

    let mut u_values = u0.values().to_vec();
    project(&mut u_values, cfg.box_bound);
    let mut u = GridFunction::from_values(grid.clone(), n, u0.exponent(), u_values)?;
    let mut j = evaluate(f, &u)?.to_f64();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut grad_norm = f64::NAN;
    let mut iters = 0;

    for iter in 0..cfg.max_iters {
        iters = iter;
        let g = gradient_from_deriv(&fd, &u)?;
        grad_norm = projected_grad_norm(u.values(), g.values(), cfg.box_bound);
        if grad_norm <= cfg.grad_tol {
            converged = true;
            trace.push(TraceEntry {
                iter,
                j,
                step: 0.0,
                grad_norm,
            });
            break;
        }
        let mut step = cfg.step0;
        let mut accepted = false;
        for _ in 0..60 {
            let mut candidate = u.values().to_vec();
            for (c, gi) in candidate.iter_mut().zip(g.values()) {
                *c -= step * gi;
            }
            project(&mut candidate, cfg.box_bound);
            let u_next = GridFunction::from_values(grid.clone(), n, u.exponent(), candidate)?;
            let j_next = evaluate(f, &u_next)?.to_f64();
            if j_next <= j - cfg.armijo_c * step * grad_norm * grad_norm {
                u = u_next;
                j = j_next;
                accepted = true;
                break;
            }
            step *= cfg.shrink;
        }
        trace.push(TraceEntry {
            iter,
            j,
            step: if accepted { step } else { 0.0 },
            grad_norm,
        });
        if !accepted {
            // Line search stalled.
            return Ok(MinimizeResult {
                u_star: u,
                j_star: j,
                iters: iter + 1,
                grad_norm,
                converged: false,
                trace,
            });
        }
    }
    Ok(MinimizeResult {
        u_star: u,
        j_star: j,
        iters: iters + 1,
        grad_norm,
        converged,
        trace,
    })
}

/// Maximum over 32 seeded random directions `v` of the relative mismatch
/// between `⟨∇J, v⟩` and the central difference `(J(u+hv) − J(u−hv))/2h`.
pub fn grad_check(f: &Integrand, u: &GridFunction, h: f64) -> Result<f64> {
    if h <= 0.0 {
        return Err(Error::InvalidArgument("h must be positive".into()));
    }
    let fd = f.differentiate()?;
    let g = gradient_from_deriv(&fd, u)?;
    let grid = u.grid().clone();
    let n = u.codomain_dim();
    let len = grid.node_count() * n;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let mut worst = 0.0f64;
    for _ in 0..32 {
        let v: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let analytic = dot(g.values(), &v);
        let mut up = u.values().to_vec();
        let mut dn = u.values().to_vec();
        for i in 0..len {
            up[i] += h * v[i];
            dn[i] -= h * v[i];
        }
        let up = GridFunction::from_values(grid.clone(), n, u.exponent(), up)?;
        let dn = GridFunction::from_values(grid.clone(), n, u.exponent(), dn)?;
        let fd_value =
            (evaluate(f, &up)?.to_f64() - evaluate(f, &dn)?.to_f64()) / (2.0 * h);
        let err = (analytic - fd_value).abs() / (1.0 + analytic.abs());
        worst = worst.max(err);
    }
    Ok(worst)
}
