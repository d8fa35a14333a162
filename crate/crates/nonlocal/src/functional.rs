//! The discretized non-local functional and its derived quantities.
//!
//! `J(u) = Σ_i Σ_j weight² · f(x_i, x_j, u_i, u_j)` over all node pairs of
//! the grid, diagonal included. Positive and negative parts accumulate in
//! separate compensated sums; rows parallelize over the outer index and the
//! per-row partials merge in ascending row order, so the value is identical
//! for any thread count.

use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::grid::{Grid, GridFunction};
use crate::integrand::{Integrand, IntegrandDeriv};
use crate::sum::NeumaierSum;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

/// Value of the discretized functional with its sign decomposition.
#[derive(Clone, Debug, Serialize)]
pub struct FunctionalValue {
    pub value: ExtReal,
    /// Quadrature of `f⁻ ≥ 0`.
    pub neg_part: f64,
    pub pos_part: ExtReal,
    pub nodes: usize,
    pub integrand: String,
    #[serde(skip)]
    pub grid: Arc<Grid>,
}

impl FunctionalValue {
    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

fn check_dims(f: &Integrand, u: &GridFunction) -> Result<()> {
    if f.dim_m() != u.grid().dim() {
        return Err(Error::DimensionMismatch(format!(
            "integrand m = {} vs grid dimension {}",
            f.dim_m(),
            u.grid().dim()
        )));
    }
    if f.dim_n() != u.codomain_dim() {
        return Err(Error::DimensionMismatch(format!(
            "integrand n = {} vs grid function n = {}",
            f.dim_n(),
            u.codomain_dim()
        )));
    }
    Ok(())
}

struct RowSum {
    pos: NeumaierSum,
    neg: NeumaierSum,
    poles: Vec<(usize, usize)>,
    pole_count: usize,
}

/// Double-quadrature value of `J(u)`.
///
/// Pole hits are collected and reported as an error rather than skipped.
pub fn evaluate(f: &Integrand, u: &GridFunction) -> Result<FunctionalValue> {
    check_dims(f, u)?;
    evaluate_with(|x, y, w, z| f.eval_raw(x, y, w, z), u, f.to_string())
}

/// [`evaluate`] over an arbitrary pointwise integrand (NaN marks a pole).
/// Used for table-backed integrands that are not expression trees.
pub fn evaluate_with<F>(f: F, u: &GridFunction, label: String) -> Result<FunctionalValue>
where
    F: Fn(&[f64], &[f64], &[f64], &[f64]) -> f64 + Sync,
{
    let grid = u.grid().clone();
    let count = grid.node_count();
    let rows: Vec<RowSum> = (0..count)
        .into_par_iter()
        .map(|i| {
            let xi = grid.node(i);
            let ui = u.value(i);
            let mut row = RowSum {
                pos: NeumaierSum::new(),
                neg: NeumaierSum::new(),
                poles: Vec::new(),
                pole_count: 0,
            };
            for j in 0..count {
                let v = f(xi, grid.node(j), ui, u.value(j));
                if !v.is_finite() {
                    row.pole_count += 1;
                    if row.poles.len() < 16 {
                        row.poles.push((i, j));
                    }
                } else if v > 0.0 {
                    row.pos.add(v);
                } else if v < 0.0 {
                    row.neg.add(-v);
                }
            }
            row
        })
        .collect();

    let mut pos = NeumaierSum::new();
    let mut neg = NeumaierSum::new();
    let mut poles = Vec::new();
    let mut pole_count = 0usize;
    for row in rows {
        pos.merge(row.pos);
        neg.merge(row.neg);
        pole_count += row.pole_count;
        if poles.len() < 16 {
            poles.extend(row.poles.into_iter().take(16 - poles.len()));
        }
    }
    if pole_count > 0 {
        return Err(Error::PolesInQuadrature {
            pairs: poles,
            total: pole_count,
        });
    }
    let w2 = grid.weight() * grid.weight();
    let pos_part = pos.value() * w2;
    let neg_part = neg.value() * w2;
    Ok(FunctionalValue {
        value: ExtReal::finite(pos_part - neg_part),
        neg_part,
        pos_part: ExtReal::finite(pos_part),
        nodes: count,
        integrand: label,
        grid,
    })
}

/// Profile function values `Φ_{x,ψ}(w_k) = Σ_j weight · f(x, x_j, w_k, ψ_j)`.
#[derive(Clone, Debug)]
pub struct PhiProfile {
    pub x: Vec<f64>,
    pub psi: GridFunction,
    pub w_samples: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

pub fn phi_profile(
    f: &Integrand,
    x: &[f64],
    psi: &GridFunction,
    w_samples: &[Vec<f64>],
) -> Result<PhiProfile> {
    check_dims(f, psi)?;
    if x.len() != f.dim_m() {
        return Err(Error::DimensionMismatch(format!(
            "profile point has {} components, expected {}",
            x.len(),
            f.dim_m()
        )));
    }
    let mut values = Vec::with_capacity(w_samples.len());
    for w in w_samples {
        values.push(phi_value(f, x, psi, w)?);
    }
    Ok(PhiProfile {
        x: x.to_vec(),
        psi: psi.clone(),
        w_samples: w_samples.to_vec(),
        values,
    })
}

/// Single profile value `Φ_{x,ψ}(w)`.
pub fn phi_value(f: &Integrand, x: &[f64], psi: &GridFunction, w: &[f64]) -> Result<f64> {
    let grid = psi.grid();
    let mut acc = NeumaierSum::new();
    for j in 0..grid.node_count() {
        let v = f.eval_raw(x, grid.node(j), w, psi.value(j));
        if !v.is_finite() {
            return Err(Error::Pole(format!(
                "profile integrand is {v} at x={x:?}, y={:?}, w={w:?}",
                grid.node(j)
            )));
        }
        acc.add(v);
    }
    Ok(acc.value() * grid.weight())
}

/// Hessian of the profile: `HΦ_{x,ψ}(w) = Σ_j weight · ∂²_w f(x, x_j, w, ψ_j)`,
/// row-major `n × n`.
pub fn phi_hessian(
    fd: &IntegrandDeriv,
    x: &[f64],
    psi: &GridFunction,
    w: &[f64],
) -> Result<Vec<f64>> {
    let n = fd.base().dim_n();
    let grid = psi.grid();
    let mut out = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            let mut acc = NeumaierSum::new();
            for j in 0..grid.node_count() {
                let v = fd.hess_eval(r, c, x, grid.node(j), w, psi.value(j));
                if !v.is_finite() {
                    return Err(Error::Pole(format!(
                        "profile Hessian is {v} at x={x:?}, w={w:?}"
                    )));
                }
                acc.add(v);
            }
            out[r * n + c] = acc.value() * grid.weight();
        }
    }
    Ok(out)
}

/// Discrete variational gradient, requiring pairwise symmetry:
/// `(∇J)_{i,c} = 2 · weight² · Σ_j ∂_{w_c} f(x_i, x_j, u_i, u_j)`.
pub fn gradient(f: &Integrand, u: &GridFunction) -> Result<GridFunction> {
    if !f.symmetry().is_symmetric() {
        return Err(Error::AsymmetricIntegrand);
    }
    let fd = f.differentiate()?;
    gradient_from_deriv(&fd, u)
}

/// [`gradient`] with a precomputed derivative bundle (hot loops).
pub fn gradient_from_deriv(fd: &IntegrandDeriv, u: &GridFunction) -> Result<GridFunction> {
    let f = fd.base();
    if !f.symmetry().is_symmetric() {
        return Err(Error::AsymmetricIntegrand);
    }
    check_dims(f, u)?;
    let grid = u.grid().clone();
    let count = grid.node_count();
    let n = u.codomain_dim();
    let scale = 2.0 * grid.weight() * grid.weight();
    let rows: Vec<std::result::Result<Vec<f64>, (usize, usize)>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let xi = grid.node(i);
            let ui = u.value(i);
            let mut out = vec![0.0; n];
            for c in 0..n {
                let mut acc = NeumaierSum::new();
                for j in 0..count {
                    let v = fd.grad_eval(c, xi, grid.node(j), ui, u.value(j));
                    if !v.is_finite() {
                        return Err((i, j));
                    }
                    acc.add(v);
                }
                out[c] = acc.value() * scale;
            }
            Ok(out)
        })
        .collect();
    let mut values = Vec::with_capacity(count * n);
    for row in rows {
        match row {
            Ok(r) => values.extend_from_slice(&r),
            Err((i, j)) => {
                return Err(Error::PolesInQuadrature {
                    pairs: vec![(i, j)],
                    total: 1,
                })
            }
        }
    }
    GridFunction::from_values(grid, n, u.exponent(), values)
}
