//! Criteria checkers and the constructive separately-convex decomposition.
//!
//! Everything here is sampled evidence, not proof: a check either refutes a
//! property with a concrete replayable witness or reports that a seeded
//! sample budget found no violation.

use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::functional::{evaluate_with, phi_value};
use crate::grid::{p_function, Domain, Exponent, Grid, GridFunction};
use crate::integrand::Integrand;
use crate::sum::NeumaierSum;
use crate::verdict::{PropertyVerdict, Witness, DEFAULT_SEED};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

/// Seeded sample budget for the checkers.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SampleBudget {
    pub samples: usize,
    pub seed: u64,
}

impl Default for SampleBudget {
    fn default() -> Self {
        SampleBudget {
            samples: 200,
            seed: DEFAULT_SEED,
        }
    }
}

impl SampleBudget {
    pub fn new(samples: usize, seed: u64) -> Self {
        SampleBudget { samples, seed }
    }
}

fn sample_point(rng: &mut ChaCha8Rng, bounds: &[(f64, f64)]) -> Vec<f64> {
    bounds
        .iter()
        .map(|&(lo, hi)| rng.gen_range(lo..hi))
        .collect()
}

fn sample_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

// ---------------------------------------------------------------------------
// Homogeneous growth bound
// ---------------------------------------------------------------------------

/// Searches for unbounded growth of
/// `f(w, z) / ((1 + p^p_M(w)) (1 + p^p_M(z)))` over boxes of doubling
/// half-width. Refuted when the per-box supremum exceeds `10⁶` while
/// increasing across three consecutive doublings; otherwise the best
/// supremum found is the evidence constant `C_M`.
pub fn check_homogeneous_bound(
    f: &Integrand,
    p: Exponent,
    m_cap: f64,
    budget: SampleBudget,
) -> Result<PropertyVerdict> {
    if !f.is_homogeneous() {
        return Err(Error::NonHomogeneous);
    }
    if m_cap <= 0.0 {
        return Err(Error::InvalidArgument("M must be positive".into()));
    }
    const RUNGS: usize = 12;
    const BLOWUP: f64 = 1e6;
    let n = f.dim_n();
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let per_rung = (budget.samples / RUNGS).max(8);
    let ratio_at = |w: &[f64], z: &[f64]| -> Result<Option<f64>> {
        let dw = ExtReal::finite(1.0) + p_function(w, p, m_cap);
        let dz = ExtReal::finite(1.0) + p_function(z, p, m_cap);
        let v = f.eval_raw(&[], &[], w, z);
        if v.is_nan() {
            return Ok(None);
        }
        if v < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "homogeneous-growth check requires f ≥ 0; f({w:?}, {z:?}) = {v}"
            )));
        }
        Ok(match (dw, dz) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => Some(v / (a * b)),
            // Denominator ∞ (p = ∞ beyond the cap): ratio 0.
            _ => Some(0.0),
        })
    };
    let mut sups: Vec<f64> = Vec::with_capacity(RUNGS);
    let mut best_points: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(RUNGS);
    for t in 0..RUNGS {
        let r = m_cap * (1u64 << t) as f64;
        let mut sup = f64::NEG_INFINITY;
        let mut arg = (vec![0.0; n], vec![0.0; n]);
        let mut probes: Vec<(Vec<f64>, Vec<f64>)> = vec![
            (vec![0.0; n], vec![0.0; n]),
            (vec![r; n], vec![r; n]),
            (vec![-r; n], vec![r; n]),
        ];
        for _ in 0..per_rung {
            probes.push((sample_vec(&mut rng, n, -r, r), sample_vec(&mut rng, n, -r, r)));
        }
        for (w, z) in probes {
            if let Some(ratio) = ratio_at(&w, &z)? {
                if ratio > sup {
                    sup = ratio;
                    arg = (w, z);
                }
            }
        }
        sups.push(sup);
        best_points.push(arg);
        if t >= 2 {
            let (s0, s1, s2) = (sups[t - 2], sups[t - 1], sups[t]);
            if s2 > BLOWUP && s2 > s1 && s1 > s0 {
                let (w, z) = best_points[t].clone();
                return Ok(PropertyVerdict::refuted(
                    Witness::HomogeneousGrowth {
                        w,
                        z,
                        ratio: s2,
                        trend: sups.clone(),
                    },
                    budget.samples,
                    BLOWUP,
                    budget.seed,
                ));
            }
        }
    }
    let best = sups.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(
        PropertyVerdict::passed(budget.samples, BLOWUP, budget.seed)
            .with_detail(format!("best C_M ≈ {best:.6e}")),
    )
}

// ---------------------------------------------------------------------------
// p-bound certificate
// ---------------------------------------------------------------------------

/// Tabulated candidate for the dominating bound
/// `|f(x,y,w,z)| ≤ α_M(x,y) + β_M(x) p^p_M(z) + β_M(y) p^p_M(w) + C p^p_M(w) p^p_M(z)`.
#[derive(Clone, Debug)]
pub struct BoundCertificate {
    pub m_cap: f64,
    pub p: Exponent,
    pub grid: Arc<Grid>,
    /// `α_M(x_i, y_j)`, row-major over node pairs.
    pub alpha: Vec<f64>,
    /// `β_M(x_i)` per node.
    pub beta: Vec<f64>,
    pub c: f64,
    /// Hölder conjugate of `p` (`∞` for `p = 1`).
    pub pstar: f64,
}

impl BoundCertificate {
    pub fn new(
        grid: Arc<Grid>,
        p: Exponent,
        m_cap: f64,
        alpha: Vec<f64>,
        beta: Vec<f64>,
        c: f64,
    ) -> Result<Self> {
        let count = grid.node_count();
        if alpha.len() != count * count || beta.len() != count {
            return Err(Error::DimensionMismatch(
                "certificate tables must match the grid".into(),
            ));
        }
        if alpha.iter().chain(&beta).any(|v| *v < 0.0) || c < 0.0 {
            return Err(Error::InvalidArgument(
                "certificate entries must be nonnegative".into(),
            ));
        }
        let pstar = match p {
            Exponent::Infinity => 1.0,
            Exponent::Finite(q) if q == 1.0 => f64::INFINITY,
            Exponent::Finite(q) => q / (q - 1.0),
        };
        Ok(BoundCertificate {
            m_cap,
            p,
            grid,
            alpha,
            beta,
            c,
            pstar,
        })
    }

    /// Constant-valued certificate tables.
    pub fn constant(
        grid: Arc<Grid>,
        p: Exponent,
        m_cap: f64,
        alpha: f64,
        beta: f64,
        c: f64,
    ) -> Result<Self> {
        let count = grid.node_count();
        Self::new(
            grid,
            p,
            m_cap,
            vec![alpha; count * count],
            vec![beta; count],
            c,
        )
    }

    fn bound_at(&self, i: usize, j: usize, w: &[f64], z: &[f64]) -> ExtReal {
        let pw = p_function(w, self.p, self.m_cap);
        let pz = p_function(z, self.p, self.m_cap);
        ExtReal::finite(self.alpha[i * self.grid.node_count() + j])
            + pz * self.beta[i]
            + pw * self.beta[j]
            + pw * pz * self.c
    }
}

/// Samples `|f| ≤ α + β·p + β·p + C·p·p` at node pairs of the certificate
/// grid, with random `(w, z)` plus targeted probes `z = x_i`, `w = y_j`
/// (the sweep that exposes non-integrable envelopes).
pub fn validate_p_bound_certificate(
    f: &Integrand,
    cert: &BoundCertificate,
    budget: SampleBudget,
) -> Result<PropertyVerdict> {
    if f.dim_m() != cert.grid.dim() {
        return Err(Error::DimensionMismatch(
            "certificate grid dimension must match the integrand".into(),
        ));
    }
    const SLACK: f64 = 1e-12;
    let n = f.dim_n();
    let m = f.dim_m();
    let count = cert.grid.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let mut skipped = 0usize;
    for s in 0..budget.samples {
        let i = rng.gen_range(0..count);
        let j = rng.gen_range(0..count);
        let scale = [1.0, 2.0 * cert.m_cap.max(1.0), 8.0 * cert.m_cap.max(1.0)][s % 3];
        let (w, z) = if n == m && s % 4 == 3 {
            // Targeted probe along the diagonal of the argument blocks.
            (cert.grid.node(j).to_vec(), cert.grid.node(i).to_vec())
        } else {
            (
                sample_vec(&mut rng, n, -scale, scale),
                sample_vec(&mut rng, n, -scale, scale),
            )
        };
        let x = cert.grid.node(i);
        let y = cert.grid.node(j);
        let v = f.eval_raw(x, y, &w, &z);
        if !v.is_finite() {
            skipped += 1;
            continue;
        }
        if let ExtReal::Finite(bound) = cert.bound_at(i, j, &w, &z) {
            if v.abs() > bound + SLACK * (1.0 + v.abs()) {
                return Ok(PropertyVerdict::refuted(
                    Witness::PBound {
                        x: x.to_vec(),
                        y: y.to_vec(),
                        w,
                        z,
                        value: v,
                        bound,
                    },
                    budget.samples,
                    SLACK,
                    budget.seed,
                ));
            }
        }
    }
    let mut verdict = PropertyVerdict::passed(budget.samples, SLACK, budget.seed);
    if skipped > 0 {
        verdict = verdict.with_detail(format!("{skipped} pole samples skipped"));
    }
    Ok(verdict)
}

// ---------------------------------------------------------------------------
// Separate convexity
// ---------------------------------------------------------------------------

/// Convexity test data: endpoints and the mixing weight.
#[derive(Clone, Debug, Serialize)]
pub struct WTriple {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub theta: f64,
}

impl WTriple {
    pub fn midpoint(&self) -> Vec<f64> {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(a, b)| self.theta * a + (1.0 - self.theta) * b)
            .collect()
    }
}

const CONVEXITY_REL_TOL: f64 = 1e-9;

/// Samples the convexity inequality in the `w` slot and in the `z` slot
/// separately, at seeded `(x, y)` from `domain` and arguments from boxes of
/// cycling scale 1×, 4×, 16×.
pub fn check_separately_convex(
    f: &Integrand,
    domain: &Domain,
    budget: SampleBudget,
) -> Result<PropertyVerdict> {
    check_separately_convex_fn(
        &|x, y, w, z| f.eval_raw(x, y, w, z),
        f.dim_n(),
        domain,
        (-1.0, 1.0),
        true,
        budget,
    )
}

/// Generic core of [`check_separately_convex`], also used for table-backed
/// remainders. `w_range` bounds the sampled argument box; with
/// `scale_ladder` the box is additionally scaled by 1, 4, 16 cyclically.
pub fn check_separately_convex_fn(
    eval: &(dyn Fn(&[f64], &[f64], &[f64], &[f64]) -> f64 + Sync),
    dim_n: usize,
    domain: &Domain,
    w_range: (f64, f64),
    scale_ladder: bool,
    budget: SampleBudget,
) -> Result<PropertyVerdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let mut skipped = 0usize;
    for s in 0..budget.samples {
        let scale = if scale_ladder {
            [1.0, 4.0, 16.0][s % 3]
        } else {
            1.0
        };
        let (lo, hi) = (w_range.0 * scale, w_range.1 * scale);
        let x = sample_point(&mut rng, domain.bounds());
        let y = sample_point(&mut rng, domain.bounds());
        let fixed = sample_vec(&mut rng, dim_n, lo, hi);
        let a = sample_vec(&mut rng, dim_n, lo, hi);
        let b = sample_vec(&mut rng, dim_n, lo, hi);
        let theta = if s % 5 == 0 {
            0.5
        } else {
            rng.gen_range(0.0..1.0)
        };
        let mid: Vec<f64> = a
            .iter()
            .zip(&b)
            .map(|(p, q)| theta * p + (1.0 - theta) * q)
            .collect();
        for slot in ['w', 'z'] {
            let (fa, fb, fm) = match slot {
                'w' => (
                    eval(&x, &y, &a, &fixed),
                    eval(&x, &y, &b, &fixed),
                    eval(&x, &y, &mid, &fixed),
                ),
                _ => (
                    eval(&x, &y, &fixed, &a),
                    eval(&x, &y, &fixed, &b),
                    eval(&x, &y, &fixed, &mid),
                ),
            };
            if !(fa.is_finite() && fb.is_finite() && fm.is_finite()) {
                skipped += 1;
                continue;
            }
            let lhs = theta * fa + (1.0 - theta) * fb;
            let tol = CONVEXITY_REL_TOL * (1.0 + fa.abs().max(fb.abs()).max(fm.abs()));
            if lhs < fm - tol {
                return Ok(PropertyVerdict::refuted(
                    Witness::SeparateConvexity {
                        slot,
                        x,
                        y,
                        fixed,
                        a,
                        b,
                        theta,
                        lhs,
                        rhs: fm,
                    },
                    budget.samples,
                    CONVEXITY_REL_TOL,
                    budget.seed,
                ));
            }
        }
    }
    let mut verdict = PropertyVerdict::passed(budget.samples, CONVEXITY_REL_TOL, budget.seed);
    if skipped > 0 {
        verdict = verdict.with_detail(format!("{skipped} pole samples skipped"));
    }
    Ok(verdict)
}

// ---------------------------------------------------------------------------
// Profile convexity
// ---------------------------------------------------------------------------

/// Tests convexity of the profile functions `Φ_{x,ψ}` by quadrature for
/// every `ψ` in the suite, every sampled `x`, and every triple.
///
/// The tolerance is `τ_quad + tol_rel · (1 + max |Φ|)`, where `τ_quad`
/// accounts for the midpoint-rule error of the three profile values.
pub fn check_phi_convex(
    f: &Integrand,
    psi_suite: &[GridFunction],
    x_samples: &[Vec<f64>],
    triples: &[WTriple],
    tol_rel: f64,
) -> Result<PropertyVerdict> {
    if psi_suite.is_empty() {
        return Err(Error::InvalidArgument("psi suite must be nonempty".into()));
    }
    let samples = psi_suite.len() * x_samples.len() * triples.len();
    for (pi, psi) in psi_suite.iter().enumerate() {
        let weight = psi.grid().weight();
        for x in x_samples {
            for t in triples {
                let fa = phi_value(f, x, psi, &t.a)?;
                let fb = phi_value(f, x, psi, &t.b)?;
                let fm = phi_value(f, x, psi, &t.midpoint())?;
                let scale = 1.0 + fa.abs().max(fb.abs()).max(fm.abs());
                let tau = 2.0 * weight * scale + tol_rel * scale;
                let lhs = t.theta * fa + (1.0 - t.theta) * fb;
                if lhs < fm - tau {
                    return Ok(PropertyVerdict::refuted(
                        Witness::PhiConvexity {
                            psi_index: pi,
                            x: x.clone(),
                            a: t.a.clone(),
                            b: t.b.clone(),
                            theta: t.theta,
                            lhs,
                            rhs: fm,
                        },
                        samples,
                        tol_rel,
                        DEFAULT_SEED,
                    ));
                }
            }
        }
    }
    Ok(PropertyVerdict::passed(samples, tol_rel, DEFAULT_SEED))
}

/// Seeded random suite for [`check_phi_convex`]: `n_psi` piecewise-constant
/// random functions on `grid`, `n_x` sample points, `n_triples` triples with
/// components in `[-w_scale, w_scale]`.
#[allow(clippy::too_many_arguments)]
pub fn phi_convex_suite(
    grid: &Arc<Grid>,
    dim_n: usize,
    p: Exponent,
    n_psi: usize,
    n_x: usize,
    n_triples: usize,
    w_scale: f64,
    seed: u64,
) -> Result<(Vec<GridFunction>, Vec<Vec<f64>>, Vec<WTriple>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut suite = Vec::with_capacity(n_psi);
    for _ in 0..n_psi {
        let values: Vec<f64> = (0..grid.node_count() * dim_n)
            .map(|_| rng.gen_range(-w_scale..w_scale))
            .collect();
        suite.push(GridFunction::from_values(grid.clone(), dim_n, p, values)?);
    }
    let xs: Vec<Vec<f64>> = (0..n_x)
        .map(|_| sample_point(&mut rng, grid.domain().bounds()))
        .collect();
    let triples: Vec<WTriple> = (0..n_triples)
        .map(|k| WTriple {
            a: sample_vec(&mut rng, dim_n, -w_scale, w_scale),
            b: sample_vec(&mut rng, dim_n, -w_scale, w_scale),
            theta: if k % 5 == 0 {
                0.5
            } else {
                rng.gen_range(0.0..1.0)
            },
        })
        .collect();
    Ok((suite, xs, triples))
}

// ---------------------------------------------------------------------------
// Weak lower semi-continuity verdict
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum WlscVerdict {
    /// No sampled violation; `via` names the criterion that fired.
    WlscEvidence { via: String },
    WlscRefuted,
    Inconclusive { reason: String },
}

/// Aggregate report: separate convexity is sufficient, profile convexity is
/// the characterizing criterion; a profile refutation always decides.
#[derive(Clone, Debug, Serialize)]
pub struct WlscReport {
    pub verdict: WlscVerdict,
    pub separately_convex: PropertyVerdict,
    pub phi_convex: PropertyVerdict,
    pub p: String,
}

pub fn wlsc_verdict(
    f: &Integrand,
    p: Exponent,
    psi_suite: &[GridFunction],
    budget: SampleBudget,
) -> Result<WlscReport> {
    let domain = psi_suite
        .first()
        .map(|psi| psi.grid().domain().clone())
        .ok_or_else(|| Error::InvalidArgument("psi suite must be nonempty".into()))?;
    let sep = check_separately_convex(f, &domain, budget)?;
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed ^ 0x9E37_79B9_7F4A_7C15);
    let n = f.dim_n();
    let n_x = 8usize;
    let n_triples = (budget.samples / 4).clamp(8, 64);
    let xs: Vec<Vec<f64>> = (0..n_x)
        .map(|_| sample_point(&mut rng, domain.bounds()))
        .collect();
    let triples: Vec<WTriple> = (0..n_triples)
        .map(|k| WTriple {
            a: sample_vec(&mut rng, n, -3.0, 3.0),
            b: sample_vec(&mut rng, n, -3.0, 3.0),
            theta: if k % 5 == 0 {
                0.5
            } else {
                rng.gen_range(0.0..1.0)
            },
        })
        .collect();
    let phi = match check_phi_convex(f, psi_suite, &xs, &triples, 1e-9) {
        Ok(v) => v,
        Err(Error::Pole(reason)) => {
            return Ok(WlscReport {
                verdict: WlscVerdict::Inconclusive { reason },
                separately_convex: sep,
                phi_convex: PropertyVerdict::passed(0, 1e-9, budget.seed),
                p: p.to_string(),
            });
        }
        Err(e) => return Err(e),
    };
    let verdict = if phi.is_refuted() {
        WlscVerdict::WlscRefuted
    } else if !sep.is_refuted() {
        WlscVerdict::WlscEvidence {
            via: "separate-convexity".into(),
        }
    } else {
        WlscVerdict::WlscEvidence {
            via: "phi-convexity".into(),
        }
    };
    Ok(WlscReport {
        verdict,
        separately_convex: sep,
        phi_convex: phi,
        p: p.to_string(),
    })
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

/// Table of `g(x_i, y_j, w_k)` on a grid × w-grid, with linear
/// interpolation in `w` and cell lookup in `x`, `y`.
#[derive(Clone, Debug, Serialize)]
pub struct GTable {
    #[serde(skip)]
    pub grid: Arc<Grid>,
    pub w_grid: Vec<f64>,
    /// Row-major `[i][j][k]`.
    pub values: Vec<f64>,
}

impl GTable {
    pub fn from_fn<F: FnMut(&[f64], &[f64], f64) -> f64>(
        grid: Arc<Grid>,
        w_grid: Vec<f64>,
        mut g: F,
    ) -> Result<GTable> {
        validate_w_grid(&w_grid)?;
        let count = grid.node_count();
        let nw = w_grid.len();
        let mut values = Vec::with_capacity(count * count * nw);
        for i in 0..count {
            for j in 0..count {
                for &w in &w_grid {
                    let v = g(grid.node(i), grid.node(j), w);
                    if !v.is_finite() {
                        return Err(Error::Pole(format!(
                            "g table entry is {v} at ({i}, {j}, w={w})"
                        )));
                    }
                    values.push(v);
                }
            }
        }
        Ok(GTable {
            grid,
            w_grid,
            values,
        })
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        let (count, nw) = (self.grid.node_count(), self.w_grid.len());
        debug_assert!(i < count && j < count && k < nw);
        self.values[(i * count + j) * nw + k]
    }

    /// `g(x, y, w)` with cell lookup in `x, y` and linear interpolation
    /// (and extrapolation) in `w`.
    pub fn eval(&self, x: &[f64], y: &[f64], w: f64) -> f64 {
        let (Some(i), Some(j)) = (self.grid.locate(x), self.grid.locate(y)) else {
            return f64::NAN;
        };
        let nw = self.w_grid.len();
        let k = match self.w_grid.iter().position(|&g| g >= w) {
            Some(0) => 1,
            Some(k) => k,
            None => nw - 1,
        };
        let (w0, w1) = (self.w_grid[k - 1], self.w_grid[k]);
        let (v0, v1) = (self.at(i, j, k - 1), self.at(i, j, k));
        v0 + (v1 - v0) * (w - w0) / (w1 - w0)
    }

    /// Largest `|Σ_j weight · g(x_i, ·, w_k)|` over `(i, k)`.
    pub fn max_y_mean_residual(&self) -> f64 {
        let count = self.grid.node_count();
        let mut worst = 0.0f64;
        for i in 0..count {
            for k in 0..self.w_grid.len() {
                let mut acc = NeumaierSum::new();
                for j in 0..count {
                    acc.add(self.at(i, j, k));
                }
                worst = worst.max((acc.value() * self.grid.weight()).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Table of `h(x_i, y_j)`.
#[derive(Clone, Debug, Serialize)]
pub struct HTable {
    #[serde(skip)]
    pub grid: Arc<Grid>,
    /// Row-major `[i][j]`.
    pub values: Vec<f64>,
}

impl HTable {
    pub fn from_fn<F: FnMut(&[f64], &[f64]) -> f64>(grid: Arc<Grid>, mut h: F) -> Result<HTable> {
        let count = grid.node_count();
        let mut values = Vec::with_capacity(count * count);
        for i in 0..count {
            for j in 0..count {
                let v = h(grid.node(i), grid.node(j));
                if !v.is_finite() {
                    return Err(Error::Pole(format!("h table entry is {v} at ({i}, {j})")));
                }
                values.push(v);
            }
        }
        Ok(HTable { grid, values })
    }

    pub fn zero(grid: Arc<Grid>) -> HTable {
        let count = grid.node_count();
        HTable {
            grid,
            values: vec![0.0; count * count],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.node_count() + j]
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match (self.grid.locate(x), self.grid.locate(y)) {
            (Some(i), Some(j)) => self.at(i, j),
            _ => f64::NAN,
        }
    }

    pub fn max_asymmetry(&self) -> f64 {
        let count = self.grid.node_count();
        let mut worst = 0.0f64;
        for i in 0..count {
            for j in (i + 1)..count {
                worst = worst.max((self.at(i, j) - self.at(j, i)).abs());
            }
        }
        worst
    }

    /// `Σ_ij weight² h(x_i, y_j)`.
    pub fn double_mean(&self) -> f64 {
        let mut acc = NeumaierSum::new();
        for v in &self.values {
            acc.add(*v);
        }
        acc.value() * self.grid.weight() * self.grid.weight()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

fn validate_w_grid(w_grid: &[f64]) -> Result<()> {
    if w_grid.len() < 2 {
        return Err(Error::InvalidArgument(
            "w grid needs at least 2 points".into(),
        ));
    }
    if w_grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::InvalidArgument(
            "w grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Uniform w-grid of `count` points on `[lo, hi]`.
pub fn uniform_w_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if count < 2 || !(lo < hi) {
        return Err(Error::InvalidArgument("bad w grid parameters".into()));
    }
    let h = (hi - lo) / (count - 1) as f64;
    Ok((0..count).map(|k| lo + k as f64 * h).collect())
}

// ---------------------------------------------------------------------------
// Constructive decomposition
// ---------------------------------------------------------------------------

/// Output of the constructive decomposition `f = f̃ + g(x,y,w) + g(y,x,z)`
/// with separately convex remainder `f̃` (scalar case `n = 1`).
#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    pub m_ladder: Vec<f64>,
    pub w_grid: Vec<f64>,
    /// One `γ_M` table per ladder rung, each row-major `[i][j][k]`.
    pub gamma_m: Vec<Vec<f64>>,
    /// Stabilized limit table (last rung), row-major `[i][j][k]`.
    pub gamma: Vec<f64>,
    /// Entries whose ladder did not stabilize, capped at 64.
    pub unstable: Vec<(usize, usize, usize)>,
    pub g: GTable,
    pub h: HTable,
    /// Largest `|Σ_j weight·g|` over `(i, k)` (zero-mean construction check).
    pub g_mean_residual: f64,
    /// Smallest `Σ_j weight·γ(x_i, y_j, w_k)` over `(i, k)`.
    pub min_gamma_mean: f64,
    /// Separate-convexity verdict for the remainder `f̃`.
    pub f_tilde_convex: PropertyVerdict,
    #[serde(skip)]
    integrand: Option<Integrand>,
}

impl Decomposition {
    /// The remainder `f̃(x,y,w,z) = f(x,y,w,z) − g(x,y,w) − g(y,x,z)`
    /// as a pointwise function (NaN marks a pole or an out-of-grid point).
    pub fn f_tilde(&self, x: &[f64], y: &[f64], w: &[f64], z: &[f64]) -> f64 {
        let Some(f) = &self.integrand else {
            return f64::NAN;
        };
        f.eval_raw(x, y, w, z) - self.g.eval(x, y, w[0]) - self.g.eval(y, x, z[0])
    }

    pub fn gamma_at(&self, i: usize, j: usize, k: usize) -> f64 {
        let (count, nw) = (self.g.grid.node_count(), self.w_grid.len());
        debug_assert!(i < count && j < count && k < nw);
        self.gamma[(i * count + j) * nw + k]
    }
}

/// Default ladder `M ∈ {1, 2, 4, …, 128}`.
pub fn default_m_ladder() -> Vec<f64> {
    (0..8).map(|t| (1u64 << t) as f64).collect()
}

/// Constructive decomposition on `grid × grid × w_grid`.
///
/// `γ_M(x,y,w) = min_{z ∈ [−M, M]} ∂²_w f(x,y,w,z)` by 257-point scan plus
/// three golden-section refinements (skipped when `∂²_w f` is `z`-free);
/// `γ` is the last ladder rung with non-stabilized entries flagged;
/// `g` integrates `γ` minus its `y`-mean twice from `w = 0` by cumulative
/// trapezoid. Fails with a profile-nonconvexity error when the `y`-mean of
/// `γ` is negative beyond tolerance, since no separately convex
/// decomposition can exist then.
pub fn decompose(
    f: &Integrand,
    grid: &Arc<Grid>,
    w_grid: &[f64],
    m_ladder: &[f64],
) -> Result<Decomposition> {
    if f.dim_n() != 1 {
        return Err(Error::Unsupported(format!(
            "decomposition requires n = 1 (got n = {}); the vector case admits no such construction",
            f.dim_n()
        )));
    }
    if !f.symmetry().is_symmetric() {
        return Err(Error::AsymmetricIntegrand);
    }
    validate_w_grid(w_grid)?;
    if !w_grid.iter().any(|w| w.abs() <= 1e-12) {
        return Err(Error::InvalidArgument(
            "w grid must contain 0 (the double integral is anchored there)".into(),
        ));
    }
    if m_ladder.is_empty() || m_ladder.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::InvalidArgument(
            "M ladder must be nonempty and strictly increasing".into(),
        ));
    }
    let fd = f.differentiate()?;
    let hess_z_free = !fd.hess_expr(0, 0).uses_slot(crate::expr::Slot::Z);
    let count = grid.node_count();
    let nw = w_grid.len();

    // γ_M tables, parallel over x rows, merged in ascending order.
    let mut gamma_m: Vec<Vec<f64>> = Vec::with_capacity(m_ladder.len());
    for &m_cap in m_ladder {
        let rows: Vec<Result<Vec<f64>>> = (0..count)
            .into_par_iter()
            .map(|i| {
                let mut row = Vec::with_capacity(count * nw);
                for j in 0..count {
                    for &w in w_grid {
                        let v =
                            min_hess_over_z(&fd, grid.node(i), grid.node(j), w, m_cap, hess_z_free)?;
                        row.push(v);
                    }
                }
                Ok(row)
            })
            .collect();
        let mut table = Vec::with_capacity(count * count * nw);
        for row in rows {
            table.extend_from_slice(&row?);
        }
        gamma_m.push(table);
    }

    // Stabilization across the last two rungs.
    let gamma = gamma_m.last().unwrap().clone();
    let mut unstable = Vec::new();
    if gamma_m.len() >= 2 {
        let prev = &gamma_m[gamma_m.len() - 2];
        for idx in 0..gamma.len() {
            if (gamma[idx] - prev[idx]).abs() > 1e-6 * (1.0 + prev[idx].abs()) {
                if unstable.len() < 64 {
                    let k = idx % nw;
                    let j = (idx / nw) % count;
                    let i = idx / (nw * count);
                    unstable.push((i, j, k));
                } else {
                    break;
                }
            }
        }
    }

    // Mean of γ over y must be nonnegative, or no decomposition exists.
    let scale = gamma.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-8 * (1.0 + scale);
    let mut min_gamma_mean = f64::INFINITY;
    let mut y_means = vec![0.0; count * nw]; // [i][k]
    for i in 0..count {
        for k in 0..nw {
            let mut acc = NeumaierSum::new();
            for j in 0..count {
                acc.add(gamma[(i * count + j) * nw + k]);
            }
            let mean = acc.value() * grid.weight();
            y_means[i * nw + k] = mean;
            if mean < min_gamma_mean {
                min_gamma_mean = mean;
            }
            if mean < -tol {
                return Err(Error::PhiNonConvex {
                    x_index: i,
                    w_index: k,
                    mean,
                });
            }
        }
    }

    // g(x,y,w) = ∬₀ (γ − y-mean) by cumulative trapezoid, anchored at w = 0.
    let measure = grid.discrete_measure();
    let k0 = w_grid.iter().position(|w| w.abs() <= 1e-12).unwrap();
    let mut g_values = vec![0.0; count * count * nw];
    for i in 0..count {
        for j in 0..count {
            let d: Vec<f64> = (0..nw)
                .map(|k| gamma[(i * count + j) * nw + k] - y_means[i * nw + k] / measure)
                .collect();
            let g1 = cumulative_trapezoid(w_grid, &d, k0);
            let g2 = cumulative_trapezoid(w_grid, &g1, k0);
            g_values[(i * count + j) * nw..(i * count + j + 1) * nw].copy_from_slice(&g2);
        }
    }
    let g = GTable {
        grid: grid.clone(),
        w_grid: w_grid.to_vec(),
        values: g_values,
    };
    let g_mean_residual = g.max_y_mean_residual();

    let h = HTable::from_fn(grid.clone(), |x, y| f.eval_raw(x, y, &[0.0], &[0.0]))?;

    // Separate convexity of the remainder. The table is exact only at grid
    // nodes, so the tuples are node-aligned: (x, y) at grid nodes, convexity
    // triples along w-grid points.
    let f_tilde_convex = remainder_separately_convex(f, &g, SampleBudget::default())?;

    Ok(Decomposition {
        m_ladder: m_ladder.to_vec(),
        w_grid: w_grid.to_vec(),
        gamma_m,
        gamma,
        unstable,
        g,
        h,
        g_mean_residual,
        min_gamma_mean,
        f_tilde_convex,
        integrand: Some(f.clone()),
    })
}

/// Node-aligned separate-convexity check for the remainder
/// `f̃ = f − g(x,y,w) − g(y,x,z)`: samples grid nodes for `(x, y)` and
/// w-grid triples `w_a < w_m < w_b` with the exact mixing weight
/// `θ = (w_b − w_m)/(w_b − w_a)`, in both argument slots.
fn remainder_separately_convex(
    f: &Integrand,
    g: &GTable,
    budget: SampleBudget,
) -> Result<PropertyVerdict> {
    let grid = &g.grid;
    let nw = g.w_grid.len();
    let count = grid.node_count();
    if nw < 3 {
        return Ok(PropertyVerdict::passed(0, CONVEXITY_REL_TOL, budget.seed)
            .with_detail("w grid too coarse for convexity triples".to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let mut skipped = 0usize;
    for _ in 0..budget.samples {
        let i = rng.gen_range(0..count);
        let j = rng.gen_range(0..count);
        let (x, y) = (grid.node(i), grid.node(j));
        let ka = rng.gen_range(0..nw - 2);
        let km = rng.gen_range(ka + 1..nw - 1);
        let kb = rng.gen_range(km + 1..nw);
        let (wa, wm, wb) = (g.w_grid[ka], g.w_grid[km], g.w_grid[kb]);
        let theta = (wb - wm) / (wb - wa);
        let fixed_k = rng.gen_range(0..nw);
        let fixed = g.w_grid[fixed_k];
        for slot in ['w', 'z'] {
            let value = |k: usize| -> f64 {
                let wv = g.w_grid[k];
                match slot {
                    'w' => f.eval_raw(x, y, &[wv], &[fixed]) - g.at(i, j, k) - g.at(j, i, fixed_k),
                    _ => f.eval_raw(x, y, &[fixed], &[wv]) - g.at(i, j, fixed_k) - g.at(j, i, k),
                }
            };
            let (fa, fm, fb) = (value(ka), value(km), value(kb));
            if !(fa.is_finite() && fm.is_finite() && fb.is_finite()) {
                skipped += 1;
                continue;
            }
            let lhs = theta * fa + (1.0 - theta) * fb;
            let tol = CONVEXITY_REL_TOL * (1.0 + fa.abs().max(fb.abs()).max(fm.abs()));
            if lhs < fm - tol {
                return Ok(PropertyVerdict::refuted(
                    Witness::SeparateConvexity {
                        slot,
                        x: x.to_vec(),
                        y: y.to_vec(),
                        fixed: vec![fixed],
                        a: vec![wa],
                        b: vec![wb],
                        theta,
                        lhs,
                        rhs: fm,
                    },
                    budget.samples,
                    CONVEXITY_REL_TOL,
                    budget.seed,
                ));
            }
        }
    }
    let mut verdict = PropertyVerdict::passed(budget.samples, CONVEXITY_REL_TOL, budget.seed);
    if skipped > 0 {
        verdict = verdict.with_detail(format!("{skipped} pole samples skipped"));
    }
    Ok(verdict)
}

/// Cumulative `∫_{w_grid[k0]}^{w_grid[k]}` of tabulated values by trapezoid.
fn cumulative_trapezoid(w_grid: &[f64], values: &[f64], k0: usize) -> Vec<f64> {
    let nw = w_grid.len();
    let mut out = vec![0.0; nw];
    for k in (k0 + 1)..nw {
        out[k] = out[k - 1] + 0.5 * (w_grid[k] - w_grid[k - 1]) * (values[k] + values[k - 1]);
    }
    for k in (0..k0).rev() {
        out[k] = out[k + 1] - 0.5 * (w_grid[k + 1] - w_grid[k]) * (values[k + 1] + values[k]);
    }
    out
}

/// `min_{z ∈ [−M, M]} ∂²_w f(x, y, w, z)`: 257-point scan plus three
/// golden-section refinements on the bracketing interval.
fn min_hess_over_z(
    fd: &crate::integrand::IntegrandDeriv,
    x: &[f64],
    y: &[f64],
    w: f64,
    m_cap: f64,
    z_free: bool,
) -> Result<f64> {
    let eval = |z: f64| -> Result<f64> {
        let v = fd.hess_eval(0, 0, x, y, &[w], &[z]);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Pole(format!(
                "∂²_w f is {v} at x={x:?}, y={y:?}, w={w}, z={z}"
            )))
        }
    };
    if z_free {
        return eval(0.0);
    }
    const SCAN: usize = 257;
    let step = 2.0 * m_cap / (SCAN - 1) as f64;
    let mut best_k = 0usize;
    let mut best = f64::INFINITY;
    for k in 0..SCAN {
        let z = -m_cap + k as f64 * step;
        let v = eval(z)?;
        if v < best {
            best = v;
            best_k = k;
        }
    }
    // Golden-section refinement on the bracketing interval.
    let mut lo = -m_cap + best_k.saturating_sub(1) as f64 * step;
    let mut hi = (-m_cap + (best_k + 1).min(SCAN - 1) as f64 * step).min(m_cap);
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    for _ in 0..3 {
        let a = hi - (hi - lo) * INV_PHI;
        let b = lo + (hi - lo) * INV_PHI;
        let (fa, fb) = (eval(a)?, eval(b)?);
        best = best.min(fa).min(fb);
        if fa <= fb {
            hi = b;
        } else {
            lo = a;
        }
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Null class
// ---------------------------------------------------------------------------

/// Checks membership of `f₀(x,y,w,z) = g(x,y,w) + g(y,x,z) + h(x,y)` in the
/// class of integrands whose functional vanishes identically: verifies the
/// zero-mean conditions on the tables, then evaluates `J(f₀, u)` on seeded
/// random grid functions and requires `|J| ≤ 1e-7 · (1 + ‖u‖₂²) · scale`.
pub fn check_null_class(
    g: &GTable,
    h: &HTable,
    trials: usize,
    seed: u64,
) -> Result<PropertyVerdict> {
    const MEAN_TOL: f64 = 1e-8;
    const J_TOL: f64 = 1e-7;
    let grid = &g.grid;
    if grid.node_count() != h.grid.node_count() {
        return Err(Error::DimensionMismatch(
            "g and h tables use different grids".into(),
        ));
    }
    let scale = 1.0 + g.max_abs().max(h.max_abs());

    let asym = h.max_asymmetry();
    if asym > MEAN_TOL * scale {
        return Ok(PropertyVerdict::refuted(
            Witness::NullClass {
                condition: "h-symmetry".into(),
                at: vec![],
                value: asym,
            },
            trials,
            MEAN_TOL,
            seed,
        ));
    }
    let h_mean = h.double_mean();
    if h_mean.abs() > MEAN_TOL * scale {
        return Ok(PropertyVerdict::refuted(
            Witness::NullClass {
                condition: "h-double-mean".into(),
                at: vec![],
                value: h_mean,
            },
            trials,
            MEAN_TOL,
            seed,
        ));
    }
    // ∫ g(x, y, w) dy = 0 for every tabulated (x, w).
    let count = grid.node_count();
    for i in 0..count {
        for k in 0..g.w_grid.len() {
            let mut acc = NeumaierSum::new();
            for j in 0..count {
                acc.add(g.at(i, j, k));
            }
            let mean = acc.value() * grid.weight();
            if mean.abs() > MEAN_TOL * scale {
                return Ok(PropertyVerdict::refuted(
                    Witness::NullClass {
                        condition: "g-y-mean".into(),
                        at: vec![grid.node(i)[0], g.w_grid[k]],
                        value: mean,
                    },
                    trials,
                    MEAN_TOL,
                    seed,
                ));
            }
        }
    }

    // J(f₀, u) over seeded random u.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w_lo, w_hi) = (g.w_grid[0], g.w_grid[g.w_grid.len() - 1]);
    let mut worst = 0.0f64;
    for t in 0..trials {
        let values: Vec<f64> = (0..count).map(|_| rng.gen_range(w_lo..w_hi)).collect();
        let u = GridFunction::from_values(grid.clone(), 1, Exponent::Finite(2.0), values)?;
        let f0 = |x: &[f64], y: &[f64], w: &[f64], z: &[f64]| {
            g.eval(x, y, w[0]) + g.eval(y, x, z[0]) + h.eval(x, y)
        };
        let j = evaluate_with(f0, &u, "g(x,y,w) + g(y,x,z) + h(x,y)".into())?;
        let norm_sq = u.lp_norm_pow(1.0).to_f64();
        let bound = J_TOL * (1.0 + norm_sq) * scale;
        let jv = j.to_f64();
        worst = worst.max(jv.abs());
        if jv.abs() > bound {
            return Ok(PropertyVerdict::refuted(
                Witness::NullClass {
                    condition: "functional-vanishes".into(),
                    at: vec![t as f64],
                    value: jv,
                },
                trials,
                J_TOL,
                seed,
            ));
        }
    }
    Ok(PropertyVerdict::passed(trials, J_TOL, seed)
        .with_detail(format!("max |J| = {worst:.3e} over {trials} random u")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrand::builtin;
    use crate::verdict::VerdictStatus;

    fn budget() -> SampleBudget {
        SampleBudget::default()
    }

    fn unit_grid(n: usize) -> Arc<Grid> {
        Grid::build(Domain::unit_interval(), &[n]).unwrap()
    }

    // --- homogeneous growth ---

    #[test]
    fn homogeneous_bound_product_squared() {
        let f = Integrand::parse("w1^2 * z1^2", 1, 1).unwrap();
        let v = check_homogeneous_bound(&f, Exponent::Finite(2.0), 1.0, budget()).unwrap();
        assert_eq!(v.status, VerdictStatus::EvidencePassed);
        assert!(v.detail.unwrap().contains("best C_M"));
    }

    #[test]
    fn homogeneous_bound_constant_one() {
        let f = Integrand::parse("1", 1, 1).unwrap();
        let v = check_homogeneous_bound(&f, Exponent::Finite(1.0), 1.0, budget()).unwrap();
        assert_eq!(v.status, VerdictStatus::EvidencePassed);
    }

    #[test]
    fn homogeneous_bound_exp_refuted() {
        let f = Integrand::parse("exp(w1 * z1)", 1, 1).unwrap();
        let v = check_homogeneous_bound(&f, Exponent::Finite(1.0), 1.0, budget()).unwrap();
        assert!(v.is_refuted());
        match v.witness.unwrap() {
            Witness::HomogeneousGrowth { ratio, trend, .. } => {
                assert!(ratio > 1e6);
                assert!(trend.len() >= 3);
            }
            other => panic!("wrong witness {other:?}"),
        }
    }

    #[test]
    fn homogeneous_bound_rejects_xy_dependence() {
        let f = builtin("example-3-divergent").unwrap();
        assert!(matches!(
            check_homogeneous_bound(&f, Exponent::Finite(1.0), 1.0, budget()),
            Err(Error::NonHomogeneous)
        ));
    }

    // --- p-bound certificate ---

    #[test]
    fn p_bound_square_difference_passes() {
        // (w - z)² ≤ 2 + 2w² + 2z² pointwise.
        let f = builtin("square-difference").unwrap();
        let grid = unit_grid(16);
        let cert =
            BoundCertificate::constant(grid, Exponent::Finite(2.0), 1.0, 2.0, 2.0, 0.0).unwrap();
        let v = validate_p_bound_certificate(&f, &cert, budget()).unwrap();
        assert_eq!(v.status, VerdictStatus::EvidencePassed);
    }

    #[test]
    fn p_bound_example_3_refuted_near_zero() {
        let f = builtin("example-3-divergent").unwrap();
        let grid = unit_grid(64);
        let cert =
            BoundCertificate::constant(grid, Exponent::Finite(2.0), 1.0, 10.0, 10.0, 10.0)
                .unwrap();
        let v =
            validate_p_bound_certificate(&f, &cert, SampleBudget::new(2000, DEFAULT_SEED)).unwrap();
        assert!(v.is_refuted());
        match v.witness.unwrap() {
            Witness::PBound { x, value, bound, .. } => {
                assert!(value > bound);
                assert!(x[0] < 0.1, "violation should sit near x = 0, got {}", x[0]);
            }
            other => panic!("wrong witness {other:?}"),
        }
    }

    #[test]
    fn p_bound_zero_function_zero_certificate() {
        let f = Integrand::parse("0", 1, 1).unwrap();
        let grid = unit_grid(8);
        let cert =
            BoundCertificate::constant(grid, Exponent::Finite(2.0), 1.0, 0.0, 0.0, 0.0).unwrap();
        let v = validate_p_bound_certificate(&f, &cert, budget()).unwrap();
        assert_eq!(v.status, VerdictStatus::EvidencePassed);
    }

    // --- separate convexity ---

    #[test]
    fn separately_convex_verdicts() {
        let dom = Domain::unit_interval();
        for name in ["square-difference", "product", "separable-quadratic"] {
            let f = builtin(name).unwrap();
            let v = check_separately_convex(&f, &dom, budget()).unwrap();
            assert_eq!(v.status, VerdictStatus::EvidencePassed, "{name}");
        }
        let f = Integrand::parse("neg(w1^2)", 1, 1).unwrap();
        let v = check_separately_convex(&f, &dom, budget()).unwrap();
        assert!(v.is_refuted());
        // Replay the witness.
        match v.witness.unwrap() {
            Witness::SeparateConvexity {
                slot,
                x,
                y,
                fixed,
                a,
                b,
                theta,
                lhs,
                rhs,
            } => {
                assert_eq!(slot, 'w');
                let ev = |w: &[f64]| f.eval_raw(&x, &y, w, &fixed);
                let mid: Vec<f64> = a
                    .iter()
                    .zip(&b)
                    .map(|(p, q)| theta * p + (1.0 - theta) * q)
                    .collect();
                let lhs2 = theta * ev(&a) + (1.0 - theta) * ev(&b);
                assert_eq!(lhs, lhs2);
                assert_eq!(rhs, ev(&mid));
                assert!(lhs2 < ev(&mid));
            }
            other => panic!("wrong witness {other:?}"),
        }
    }

    #[test]
    fn n2_example_not_separately_convex() {
        // The y < 0 branch has Hessian [[a(z), z], [z, a(z)]], indefinite
        // for |z| > a(z), e.g. z = 3, a(3) = 2.
        let dom = Domain::interval(-1.0, 1.0).unwrap();
        let f = builtin("example-n2-vector").unwrap();
        let v = check_separately_convex(&f, &dom, SampleBudget::new(600, DEFAULT_SEED)).unwrap();
        assert!(v.is_refuted());
    }

    // --- profile convexity ---

    #[test]
    fn phi_convex_separable_quadratic() {
        let f = builtin("separable-quadratic").unwrap();
        let grid = unit_grid(32);
        let (suite, xs, triples) =
            phi_convex_suite(&grid, 1, Exponent::Finite(2.0), 4, 4, 16, 3.0, DEFAULT_SEED)
                .unwrap();
        let v = check_phi_convex(&f, &suite, &xs, &triples, 1e-9).unwrap();
        assert_eq!(v.status, VerdictStatus::EvidencePassed);
    }

    #[test]
    fn phi_convex_refutes_concave_pair() {
        let f = builtin("neg-square-difference").unwrap();
        let grid = unit_grid(32);
        let (suite, xs, triples) =
            phi_convex_suite(&grid, 1, Exponent::Finite(2.0), 4, 4, 16, 3.0, DEFAULT_SEED)
                .unwrap();
        let v = check_phi_convex(&f, &suite, &xs, &triples, 1e-9).unwrap();
        assert!(v.is_refuted());
        match v.witness.unwrap() {
            Witness::PhiConvexity {
                psi_index,
                x,
                a,
                b,
                theta,
                lhs,
                rhs,
            } => {
                // Replay through the profile quadrature.
                let psi = &suite[psi_index];
                let fa = phi_value(&f, &x, psi, &a).unwrap();
                let fb = phi_value(&f, &x, psi, &b).unwrap();
                let mid: Vec<f64> = a
                    .iter()
                    .zip(&b)
                    .map(|(p, q)| theta * p + (1.0 - theta) * q)
                    .collect();
                let fm = phi_value(&f, &x, psi, &mid).unwrap();
                assert_eq!(lhs, theta * fa + (1.0 - theta) * fb);
                assert_eq!(rhs, fm);
                assert!(lhs < fm);
            }
            other => panic!("wrong witness {other:?}"),
        }
    }

    #[test]
    fn phi_convex_n2_example_passes() {
        let dom = Domain::interval(-1.0, 1.0).unwrap();
        let grid = Grid::build(dom, &[32]).unwrap();
        let f = builtin("example-n2-vector").unwrap();
        let (suite, xs, triples) =
            phi_convex_suite(&grid, 2, Exponent::Finite(2.0), 4, 4, 20, 3.0, DEFAULT_SEED)
                .unwrap();
        let v = check_phi_convex(&f, &suite, &xs, &triples, 1e-9).unwrap();
        assert_eq!(v.status, VerdictStatus::EvidencePassed);
    }

    #[test]
    fn separate_convexity_implies_phi_convexity_on_suite() {
        // Discrete shadow of the sufficiency direction.
        let grid = unit_grid(24);
        let dom = Domain::unit_interval();
        for name in [
            "square-difference",
            "product",
            "separable-quadratic",
            "gaussian-pair",
        ] {
            let f = builtin(name).unwrap();
            let sep = check_separately_convex(&f, &dom, budget()).unwrap();
            if sep.is_refuted() {
                continue;
            }
            let (suite, xs, triples) =
                phi_convex_suite(&grid, 1, Exponent::Finite(2.0), 4, 4, 16, 3.0, DEFAULT_SEED)
                    .unwrap();
            let phi = check_phi_convex(&f, &suite, &xs, &triples, 1e-9).unwrap();
            assert_eq!(phi.status, VerdictStatus::EvidencePassed, "{name}");
        }
    }

    // --- wlsc verdict ---

    #[test]
    fn wlsc_dichotomy() {
        let grid = unit_grid(32);
        let (suite, _, _) =
            phi_convex_suite(&grid, 1, Exponent::Finite(2.0), 6, 1, 1, 3.0, DEFAULT_SEED).unwrap();

        let f = builtin("square-difference").unwrap();
        let r = wlsc_verdict(&f, Exponent::Finite(2.0), &suite, budget()).unwrap();
        match r.verdict {
            WlscVerdict::WlscEvidence { ref via } => assert_eq!(via, "separate-convexity"),
            ref other => panic!("expected evidence, got {other:?}"),
        }

        let f = builtin("neg-square-difference").unwrap();
        let r = wlsc_verdict(&f, Exponent::Finite(2.0), &suite, budget()).unwrap();
        assert!(matches!(r.verdict, WlscVerdict::WlscRefuted));
        assert!(r.phi_convex.witness.is_some());
    }

    #[test]
    fn wlsc_n2_fires_phi_criterion() {
        let dom = Domain::interval(-1.0, 1.0).unwrap();
        let grid = Grid::build(dom, &[32]).unwrap();
        let (suite, _, _) =
            phi_convex_suite(&grid, 2, Exponent::Finite(2.0), 6, 1, 1, 3.0, DEFAULT_SEED).unwrap();
        let f = builtin("example-n2-vector").unwrap();
        let r = wlsc_verdict(
            &f,
            Exponent::Finite(2.0),
            &suite,
            SampleBudget::new(400, DEFAULT_SEED),
        )
        .unwrap();
        match r.verdict {
            WlscVerdict::WlscEvidence { ref via } => assert_eq!(via, "phi-convexity"),
            ref other => panic!("expected phi evidence, got {other:?}"),
        }
        assert!(r.separately_convex.is_refuted());
    }

    // --- decomposition ---

    #[test]
    fn decompose_square_difference_trivial() {
        let f = builtin("square-difference").unwrap();
        let grid = unit_grid(16);
        let w_grid = uniform_w_grid(-2.0, 2.0, 17).unwrap();
        let d = decompose(&f, &grid, &w_grid, &default_m_ladder()).unwrap();
        // ∂²_w f ≡ 2: γ ≡ 2, y-mean ≡ 2, g ≡ 0, f̃ = f.
        for idx in 0..d.gamma.len() {
            assert!((d.gamma[idx] - 2.0).abs() < 1e-12);
        }
        assert!(d.g.max_abs() < 1e-12);
        assert!(d.unstable.is_empty());
        for (w, z) in [(0.5, -1.0), (1.5, 2.0)] {
            let ft = d.f_tilde(&[0.53], &[0.22], &[w], &[z]);
            assert!((ft - (w - z) * (w - z)).abs() < 1e-12);
        }
        assert_eq!(d.f_tilde_convex.status, VerdictStatus::EvidencePassed);
    }

    #[test]
    fn decompose_xy_weighted_quadratic() {
        // γ(x,y,w) = 2(y - ¼), y-mean = ½, g = (y - ½)w², f̃ = w²/4 + z²/4.
        let f = builtin("xy-weighted-quadratic").unwrap();
        let grid = unit_grid(32);
        let w_grid = uniform_w_grid(-2.0, 2.0, 33).unwrap();
        let d = decompose(&f, &grid, &w_grid, &default_m_ladder()).unwrap();
        for i in [0usize, 7, 21] {
            for j in [2usize, 15, 30] {
                let y = grid.node(j)[0];
                for (k, &w) in w_grid.iter().enumerate() {
                    let expected = (y - 0.5) * w * w;
                    assert!(
                        (d.g.at(i, j, k) - expected).abs() <= 1e-10,
                        "g({i},{j},{k}) = {} vs {expected}",
                        d.g.at(i, j, k)
                    );
                }
            }
        }
        assert!(d.g_mean_residual <= 1e-10);
        // The table is exact at grid nodes; evaluate f̃ there.
        let (x, y) = (grid.node(12).to_vec(), grid.node(20).to_vec());
        for (w, z) in [(0.5, -1.0), (1.5, 0.25), (-2.0, 2.0)] {
            let ft = d.f_tilde(&x, &y, &[w], &[z]);
            let expected = 0.25 * w * w + 0.25 * z * z;
            assert!((ft - expected).abs() <= 1e-10, "f̃ = {ft} vs {expected}");
        }
        assert_eq!(d.f_tilde_convex.status, VerdictStatus::EvidencePassed);
        // h = f(x, y, 0, 0) = 0 here.
        assert!(d.h.max_abs() < 1e-15);
    }

    #[test]
    fn decompose_rejects_concave() {
        let f = Integrand::parse("neg(w1^2) - z1^2", 1, 1)
            .unwrap()
            .declare_symmetric();
        let grid = unit_grid(8);
        let w_grid = uniform_w_grid(-1.0, 1.0, 9).unwrap();
        match decompose(&f, &grid, &w_grid, &default_m_ladder()) {
            Err(Error::PhiNonConvex { mean, .. }) => assert!(mean < -1.0),
            other => panic!("expected profile-nonconvexity error, got {other:?}"),
        }
    }

    #[test]
    fn decompose_requires_anchored_w_grid() {
        let f = builtin("square-difference").unwrap();
        let grid = unit_grid(4);
        // 0 is not on this grid; the double integral has nowhere to anchor.
        let w_grid = uniform_w_grid(0.1, 2.0, 5).unwrap();
        assert!(matches!(
            decompose(&f, &grid, &w_grid, &default_m_ladder()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn decompose_rejects_vector_case() {
        let f = builtin("example-n2-vector").unwrap();
        let grid = unit_grid(4);
        let w_grid = uniform_w_grid(-1.0, 1.0, 5).unwrap();
        assert!(matches!(
            decompose(&f, &grid, &w_grid, &default_m_ladder()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn gamma_ladder_monotone_entrywise_with_flagging() {
        // ∂²_w f = 2(y1 + c·z1) with c small: γ_M = 2y − 2cM decreases
        // strictly with M (so stabilization flags fire), yet its y-mean
        // 1 − 2cM stays positive through M = 128.
        let f = Integrand::parse(
            "w1^2 * (y1 + 0.003 * z1) + z1^2 * (x1 + 0.003 * w1)",
            1,
            1,
        )
        .unwrap()
        .declare_symmetric();
        let grid = unit_grid(8);
        let w_grid = uniform_w_grid(-2.0, 2.0, 9).unwrap();
        let d = decompose(&f, &grid, &w_grid, &default_m_ladder()).unwrap();
        for pair in d.gamma_m.windows(2) {
            for (small_m, large_m) in pair[0].iter().zip(&pair[1]) {
                assert!(large_m <= &(small_m + 1e-9), "{large_m} > {small_m}");
            }
        }
        // The ladder never stabilizes for this integrand.
        assert!(!d.unstable.is_empty());
        // γ at the last rung is 2y − 2·0.003·128, independent of (x, w).
        for j in 0..grid.node_count() {
            let y = grid.node(j)[0];
            let expected = 2.0 * y - 2.0 * 0.003 * 128.0;
            let got = d.gamma_at(3, j, 4);
            assert!((got - expected).abs() <= 1e-5, "{got} vs {expected}");
        }
        // And g still matches (y − ½)w² since the y-mean removes the shift.
        for j in [0usize, 5] {
            let y = grid.node(j)[0];
            for (k, &w) in d.w_grid.iter().enumerate() {
                let expected = (y - 0.5) * w * w;
                assert!((d.g.at(2, j, k) - expected).abs() <= 1e-5);
            }
        }
        assert_eq!(d.f_tilde_convex.status, VerdictStatus::EvidencePassed);
    }

    #[test]
    fn z_minimum_scan_tracks_ladder() {
        // ∂²_w f = 2 z1: the minimum over [−M, M] is −2M, monotone in M.
        let f = Integrand::parse("w1^2 * z1 + z1^2 * w1", 1, 1)
            .unwrap()
            .declare_symmetric();
        let fd = f.differentiate().unwrap();
        let mut prev = f64::INFINITY;
        for m_cap in [1.0, 2.0, 4.0, 8.0] {
            let v = super::min_hess_over_z(&fd, &[0.5], &[0.5], 0.3, m_cap, false).unwrap();
            assert!(v <= prev + 1e-12);
            assert!(
                (v - (-2.0 * m_cap)).abs() <= 1e-6 * m_cap,
                "min {v} at M={m_cap}"
            );
            prev = v;
        }
        // And decompose rejects it: the y-mean of γ is negative.
        let grid = unit_grid(4);
        let w_grid = uniform_w_grid(-1.0, 1.0, 5).unwrap();
        assert!(matches!(
            decompose(&f, &grid, &w_grid, &[1.0, 2.0, 4.0]),
            Err(Error::PhiNonConvex { .. })
        ));
    }

    // --- null class ---

    #[test]
    fn null_class_y_mean_zero_passes() {
        let grid = unit_grid(64);
        let w_grid = uniform_w_grid(-2.0, 2.0, 33).unwrap();
        let g = GTable::from_fn(grid.clone(), w_grid, |_x, y, w| (y[0] - 0.5) * w * w).unwrap();
        let h = HTable::zero(grid);
        let v = check_null_class(&g, &h, 20, DEFAULT_SEED).unwrap();
        assert_eq!(v.status, VerdictStatus::EvidencePassed, "{:?}", v.witness);
    }

    #[test]
    fn null_class_y_independent_g_refuted() {
        let grid = unit_grid(16);
        let w_grid = uniform_w_grid(-2.0, 2.0, 9).unwrap();
        let g = GTable::from_fn(grid.clone(), w_grid, |_x, _y, w| w * w).unwrap();
        let h = HTable::zero(grid);
        let v = check_null_class(&g, &h, 5, DEFAULT_SEED).unwrap();
        assert!(v.is_refuted());
        match v.witness.unwrap() {
            Witness::NullClass { condition, .. } => assert_eq!(condition, "g-y-mean"),
            other => panic!("wrong witness {other:?}"),
        }
    }

    #[test]
    fn null_class_symmetric_h_with_zero_double_mean() {
        let grid = unit_grid(32);
        let w_grid = uniform_w_grid(-1.0, 1.0, 5).unwrap();
        let g = GTable::from_fn(grid.clone(), w_grid, |_, _, _| 0.0).unwrap();
        let h = HTable::from_fn(grid, |x, y| x[0] + y[0] - 1.0).unwrap();
        let v = check_null_class(&g, &h, 10, DEFAULT_SEED).unwrap();
        assert_eq!(v.status, VerdictStatus::EvidencePassed, "{:?}", v.witness);
    }

    #[test]
    fn null_class_asymmetric_h_refuted() {
        let grid = unit_grid(8);
        let w_grid = uniform_w_grid(-1.0, 1.0, 5).unwrap();
        let g = GTable::from_fn(grid.clone(), w_grid, |_, _, _| 0.0).unwrap();
        let h = HTable::from_fn(grid, |x, y| x[0] - y[0]).unwrap();
        let v = check_null_class(&g, &h, 5, DEFAULT_SEED).unwrap();
        assert!(v.is_refuted());
    }

    #[test]
    fn decomposition_null_component_is_in_null_class() {
        // The g produced by decompose, with h ≡ 0, always passes.
        let f = builtin("xy-weighted-quadratic").unwrap();
        let grid = unit_grid(24);
        let w_grid = uniform_w_grid(-2.0, 2.0, 17).unwrap();
        let d = decompose(&f, &grid, &w_grid, &default_m_ladder()).unwrap();
        let h = HTable::zero(grid);
        let v = check_null_class(&d.g, &h, 10, DEFAULT_SEED).unwrap();
        assert_eq!(v.status, VerdictStatus::EvidencePassed, "{:?}", v.witness);
    }
}
