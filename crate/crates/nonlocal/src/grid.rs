//! Bounded box domains, uniform midpoint-rule grids and grid functions.
//!
//! The domain model is deliberately narrow: an axis-aligned box in `R^m`,
//! optionally restricted by a membership predicate evaluated per grid cell.
//! Quadrature weights stay uniform (one cell volume) and every reduction is
//! a compensated sum in row-major node order, so values are reproducible
//! bit-for-bit.

use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::sum::NeumaierSum;
use rayon::prelude::*;
use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

/// Integrability exponent `p ∈ [1, ∞]` (and `q ∈ [0, ∞]` for `p^q_M`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn is_finite(self) -> bool {
        matches!(self, Exponent::Finite(_))
    }

    /// Parses `"1"`, `"2.5"`, `"inf"`.
    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "inf" | "Inf" | "INF" | "∞" => Ok(Exponent::Infinity),
            t => {
                let v: f64 = t
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad exponent '{t}'")))?;
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidArgument(format!("bad exponent '{t}'")));
                }
                Ok(Exponent::Finite(v))
            }
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

/// Euclidean norm.
pub fn euclid(w: &[f64]) -> f64 {
    match w.len() {
        1 => w[0].abs(),
        _ => w.iter().map(|v| v * v).sum::<f64>().sqrt(),
    }
}

/// The function `p^p_M`: `|w|^p` for finite `p`; for `p = ∞` the indicator
/// that is `0` on `|w| ≤ M` and `+∞` strictly beyond `M`.
pub fn p_function(w: &[f64], p: Exponent, m_cap: f64) -> ExtReal {
    debug_assert!(m_cap > 0.0);
    let norm = euclid(w);
    match p {
        Exponent::Finite(q) => ExtReal::finite(norm.powf(q)),
        Exponent::Infinity => {
            if norm > m_cap {
                ExtReal::PosInf
            } else {
                ExtReal::Finite(0.0)
            }
        }
    }
}

/// Scalar convenience wrapper around [`p_function`].
pub fn p_function_scalar(w: f64, p: Exponent, m_cap: f64) -> ExtReal {
    p_function(&[w], p, m_cap)
}

type MaskFn = dyn Fn(&[f64]) -> bool + Send + Sync;

/// A bounded box `∏ (lo_j, hi_j) ⊂ R^m`, optionally restricted by a predicate.
#[derive(Clone)]
pub struct Domain {
    bounds: Vec<(f64, f64)>,
    mask: Option<Arc<MaskFn>>,
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Domain")
            .field("bounds", &self.bounds)
            .field("masked", &self.mask.is_some())
            .finish()
    }
}

impl Domain {
    pub fn box_nd(bounds: &[(f64, f64)]) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::InvalidDomain("zero-dimensional box".into()));
        }
        for &(lo, hi) in bounds {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidDomain(format!(
                    "degenerate axis bounds ({lo}, {hi})"
                )));
            }
        }
        Ok(Domain {
            bounds: bounds.to_vec(),
            mask: None,
        })
    }

    /// One-dimensional interval `(lo, hi)`.
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::box_nd(&[(lo, hi)])
    }

    pub fn unit_interval() -> Self {
        Self::interval(0.0, 1.0).expect("unit interval is valid")
    }

    /// Restricts the box by a membership predicate, tested at cell midpoints.
    pub fn with_mask<F: Fn(&[f64]) -> bool + Send + Sync + 'static>(mut self, mask: F) -> Self {
        self.mask = Some(Arc::new(mask));
        self
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn is_masked(&self) -> bool {
        self.mask.is_some()
    }

    pub fn box_volume(&self) -> f64 {
        self.bounds.iter().map(|(lo, hi)| hi - lo).product()
    }

    fn mask_allows(&self, point: &[f64]) -> bool {
        self.mask.as_ref().is_none_or(|m| m(point))
    }

    /// Lebesgue measure of the (masked) domain.
    ///
    /// Exact for unmasked boxes. For masked domains it is the fraction of
    /// fine-grid cell midpoints passing the mask, `resolution` cells per
    /// axis, times the box volume.
    pub fn measure(&self, resolution: usize) -> Result<f64> {
        if resolution == 0 {
            return Err(Error::InvalidArgument("resolution must be ≥ 1".into()));
        }
        if self.mask.is_none() {
            return Ok(self.box_volume());
        }
        let m = self.dim();
        let steps: Vec<f64> = self
            .bounds
            .iter()
            .map(|(lo, hi)| (hi - lo) / resolution as f64)
            .collect();
        let total: u64 = (resolution as u64).pow(m as u32 - 1);
        let hits: u64 = (0..resolution)
            .into_par_iter()
            .map(|i0| {
                let mut point = vec![0.0; m];
                let mut count = 0u64;
                point[0] = self.bounds[0].0 + (i0 as f64 + 0.5) * steps[0];
                for rest in 0..total {
                    let mut r = rest;
                    for j in (1..m).rev() {
                        let idx = r % resolution as u64;
                        r /= resolution as u64;
                        point[j] = self.bounds[j].0 + (idx as f64 + 0.5) * steps[j];
                    }
                    if self.mask_allows(&point) {
                        count += 1;
                    }
                }
                count
            })
            .sum();
        let frac = hits as f64 / (resolution as f64).powi(m as i32);
        Ok(frac * self.box_volume())
    }
}

/// Uniform midpoint-rule tensor grid over a [`Domain`].
#[derive(Clone, Debug)]
pub struct Grid {
    domain: Domain,
    nodes_per_axis: Vec<usize>,
    /// Flattened midpoint coordinates of unmasked cells, `node_count × m`.
    coords: Vec<f64>,
    /// Flat tensor index of each kept node.
    tensor_index: Vec<usize>,
    /// Tensor index → kept index, `u32::MAX` for masked-out cells.
    lookup: Vec<u32>,
    /// Per-axis cell sizes.
    cell: Vec<f64>,
    /// Uniform quadrature weight (cell volume).
    weight: f64,
}

impl Grid {
    pub fn build(domain: Domain, nodes_per_axis: &[usize]) -> Result<Arc<Grid>> {
        let m = domain.dim();
        if nodes_per_axis.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "{} node counts for a {m}-dimensional domain",
                nodes_per_axis.len()
            )));
        }
        if nodes_per_axis.contains(&0) {
            return Err(Error::InvalidArgument(
                "nodes_per_axis must be ≥ 1 on every axis".into(),
            ));
        }
        let cell: Vec<f64> = domain
            .bounds
            .iter()
            .zip(nodes_per_axis)
            .map(|((lo, hi), &n)| (hi - lo) / n as f64)
            .collect();
        let weight: f64 = cell.iter().product();
        let total: usize = nodes_per_axis.iter().product();
        let mut coords = Vec::new();
        let mut tensor_index = Vec::new();
        let mut lookup = vec![u32::MAX; total];
        let mut point = vec![0.0; m];
        for flat in 0..total {
            let mut r = flat;
            for j in (0..m).rev() {
                let idx = r % nodes_per_axis[j];
                r /= nodes_per_axis[j];
                point[j] = domain.bounds[j].0 + (idx as f64 + 0.5) * cell[j];
            }
            if domain.mask_allows(&point) {
                lookup[flat] = tensor_index.len() as u32;
                tensor_index.push(flat);
                coords.extend_from_slice(&point);
            }
        }
        if tensor_index.is_empty() {
            return Err(Error::InvalidDomain(
                "mask removes every grid cell; masked measure must be positive".into(),
            ));
        }
        Ok(Arc::new(Grid {
            domain,
            nodes_per_axis: nodes_per_axis.to_vec(),
            coords,
            tensor_index,
            lookup,
            cell,
            weight,
        }))
    }

    /// Unmasked uniform grid on a box.
    pub fn uniform(domain: Domain, nodes_per_axis: &[usize]) -> Result<Arc<Grid>> {
        Self::build(domain, nodes_per_axis)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn nodes_per_axis(&self) -> &[usize] {
        &self.nodes_per_axis
    }

    pub fn node_count(&self) -> usize {
        self.tensor_index.len()
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn cell_sizes(&self) -> &[f64] {
        &self.cell
    }

    /// Midpoint coordinates of kept node `i`.
    pub fn node(&self, i: usize) -> &[f64] {
        let m = self.dim();
        &self.coords[i * m..(i + 1) * m]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks(self.dim())
    }

    /// Kept index of the cell containing `point`, if that cell exists and is
    /// unmasked.
    pub fn locate(&self, point: &[f64]) -> Option<usize> {
        let m = self.dim();
        if point.len() != m {
            return None;
        }
        let mut flat = 0usize;
        for j in 0..m {
            let (lo, hi) = self.domain.bounds[j];
            if point[j] < lo || point[j] > hi {
                return None;
            }
            let mut idx = ((point[j] - lo) / self.cell[j]).floor() as usize;
            if idx >= self.nodes_per_axis[j] {
                idx = self.nodes_per_axis[j] - 1;
            }
            flat = flat * self.nodes_per_axis[j] + idx;
        }
        match self.lookup[flat] {
            u32::MAX => None,
            k => Some(k as usize),
        }
    }

    /// Same domain, `factor ×` nodes on every axis.
    pub fn refine(&self, factor: usize) -> Result<Arc<Grid>> {
        let nodes: Vec<usize> = self.nodes_per_axis.iter().map(|&n| n * factor).collect();
        Grid::build(self.domain.clone(), &nodes)
    }

    /// Sum of quadrature weights = discrete measure of the domain.
    pub fn discrete_measure(&self) -> f64 {
        self.weight * self.node_count() as f64
    }
}

/// A sampled function `u : grid → R^n` carrying its Lebesgue exponent.
#[derive(Clone, Debug)]
pub struct GridFunction {
    grid: Arc<Grid>,
    n: usize,
    values: Vec<f64>,
    p: Exponent,
}

impl GridFunction {
    pub fn from_values(grid: Arc<Grid>, n: usize, p: Exponent, values: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("codomain dimension must be ≥ 1".into()));
        }
        if values.len() != grid.node_count() * n {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} nodes × n={n}",
                values.len(),
                grid.node_count()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "grid function entries must be finite (found {bad})"
            )));
        }
        if let Exponent::Finite(q) = p {
            if q < 1.0 {
                return Err(Error::InvalidArgument(format!("exponent p={q} < 1")));
            }
        }
        Ok(GridFunction { grid, n, values, p })
    }

    pub fn from_fn<F: FnMut(&[f64]) -> Vec<f64>>(
        grid: Arc<Grid>,
        n: usize,
        p: Exponent,
        mut f: F,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.node_count() * n);
        for i in 0..grid.node_count() {
            let v = f(grid.node(i));
            if v.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "sampler returned {} components, expected {n}",
                    v.len()
                )));
            }
            values.extend_from_slice(&v);
        }
        Self::from_values(grid, n, p, values)
    }

    /// Scalar function from a closure of the node coordinates.
    pub fn scalar<F: FnMut(&[f64]) -> f64>(grid: Arc<Grid>, p: Exponent, mut f: F) -> Result<Self> {
        Self::from_fn(grid, 1, p, |x| vec![f(x)])
    }

    pub fn constant(grid: Arc<Grid>, value: &[f64], p: Exponent) -> Result<Self> {
        let n = value.len();
        let mut values = Vec::with_capacity(grid.node_count() * n);
        for _ in 0..grid.node_count() {
            values.extend_from_slice(value);
        }
        Self::from_values(grid, n, p, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn codomain_dim(&self) -> usize {
        self.n
    }

    pub fn exponent(&self) -> Exponent {
        self.p
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value vector at node `i`.
    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    /// `Σ_i weight · p^p_M(u_i)`, the discrete `∫_X p^p_M(u(x)) dx`.
    ///
    /// This is the exact summation path underlying [`Self::lp_norm`]; the two
    /// agree through `p^p_M(‖u‖_p) = lp_norm_pow` by construction.
    pub fn lp_norm_pow(&self, m_cap: f64) -> ExtReal {
        match self.p {
            Exponent::Finite(_) => {
                let mut acc = NeumaierSum::new();
                for i in 0..self.grid.node_count() {
                    match p_function(self.value(i), self.p, m_cap) {
                        ExtReal::Finite(v) => acc.add(self.grid.weight() * v),
                        ExtReal::PosInf => return ExtReal::PosInf,
                    }
                }
                ExtReal::finite(acc.value())
            }
            Exponent::Infinity => {
                // p^∞_M of the essential sup: 0 or ∞, matching the sum of
                // per-node indicators under saturating arithmetic.
                let sup = self.sup_norm();
                if sup > m_cap {
                    ExtReal::PosInf
                } else {
                    ExtReal::Finite(0.0)
                }
            }
        }
    }

    /// Exact max of per-node Euclidean norms.
    pub fn sup_norm(&self) -> f64 {
        (0..self.grid.node_count())
            .map(|i| euclid(self.value(i)))
            .fold(0.0, f64::max)
    }

    /// Discrete `L^p` norm: `(Σ weight · |u_i|^p)^{1/p}` for finite `p`,
    /// `max_i |u_i|` for `p = ∞`.
    pub fn lp_norm(&self) -> ExtReal {
        match self.p {
            Exponent::Finite(q) => self.lp_norm_pow(1.0).powf(1.0 / q),
            Exponent::Infinity => ExtReal::finite(self.sup_norm()),
        }
    }

    /// Piecewise-constant resampling onto another grid over the same domain.
    pub fn resample(&self, target: &Arc<Grid>) -> Result<GridFunction> {
        let mut values = Vec::with_capacity(target.node_count() * self.n);
        for i in 0..target.node_count() {
            let idx = self.grid.locate(target.node(i)).ok_or_else(|| {
                Error::InvalidArgument("resample target node outside source grid".into())
            })?;
            values.extend_from_slice(self.value(idx));
        }
        GridFunction::from_values(target.clone(), self.n, self.p, values)
    }

    /// CSV with a mandatory header `x_1..x_m,u_1..u_n`, one row per node.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        let m = self.grid.dim();
        let mut header = Vec::new();
        for j in 1..=m {
            header.push(format!("x_{j}"));
        }
        for c in 1..=self.n {
            header.push(format!("u_{c}"));
        }
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.grid.node_count() {
            let mut row = Vec::with_capacity(m + self.n);
            for v in self.grid.node(i) {
                row.push(format!("{v:?}"));
            }
            for v in self.value(i) {
                row.push(format!("{v:?}"));
            }
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Reads the CSV format written by [`Self::write_csv`]; node coordinates
    /// must match the grid's nodes in order.
    pub fn read_csv<R: BufRead>(grid: Arc<Grid>, p: Exponent, reader: R) -> Result<GridFunction> {
        let m = grid.dim();
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Csv("missing header row".into()))??;
        let cols: Vec<&str> = header.trim().split(',').collect();
        if cols.len() <= m || !cols[0].starts_with("x_") {
            return Err(Error::Csv(format!("bad header '{header}'")));
        }
        let n = cols.len() - m;
        let mut values = Vec::with_capacity(grid.node_count() * n);
        let mut row_idx = 0usize;
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != m + n {
                return Err(Error::Csv(format!(
                    "row {row_idx} has {} fields, expected {}",
                    fields.len(),
                    m + n
                )));
            }
            if row_idx >= grid.node_count() {
                return Err(Error::Csv("more rows than grid nodes".into()));
            }
            let node = grid.node(row_idx);
            for (j, field) in fields[..m].iter().enumerate() {
                let x: f64 = field
                    .parse()
                    .map_err(|_| Error::Csv(format!("bad coordinate '{field}'")))?;
                if (x - node[j]).abs() > 1e-9 * (1.0 + node[j].abs()) {
                    return Err(Error::Csv(format!(
                        "row {row_idx} coordinate {x} does not match grid node {}",
                        node[j]
                    )));
                }
            }
            for field in &fields[m..] {
                let v: f64 = field
                    .parse()
                    .map_err(|_| Error::Csv(format!("bad value '{field}'")))?;
                values.push(v);
            }
            row_idx += 1;
        }
        if row_idx != grid.node_count() {
            return Err(Error::Csv(format!(
                "{row_idx} rows for {} grid nodes",
                grid.node_count()
            )));
        }
        GridFunction::from_values(grid, n, p, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_nodes_unit_interval() {
        let grid = Grid::build(Domain::unit_interval(), &[4]).unwrap();
        let xs: Vec<f64> = grid.nodes().map(|x| x[0]).collect();
        assert_eq!(xs, vec![0.125, 0.375, 0.625, 0.875]);
        assert_eq!(grid.weight(), 0.25);
    }

    #[test]
    fn square_grid_two_by_two() {
        let dom = Domain::box_nd(&[(0.0, 1.0), (0.0, 1.0)]).unwrap();
        let grid = Grid::build(dom, &[2, 2]).unwrap();
        assert_eq!(grid.node_count(), 4);
        assert_eq!(grid.weight(), 0.25);
        assert_eq!(grid.node(0), &[0.25, 0.25]);
        assert_eq!(grid.node(3), &[0.75, 0.75]);
    }

    #[test]
    fn zero_nodes_rejected() {
        let err = Grid::build(Domain::unit_interval(), &[0]);
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn degenerate_box_rejected() {
        assert!(matches!(
            Domain::interval(1.0, 1.0),
            Err(Error::InvalidDomain(_))
        ));
        assert!(matches!(
            Domain::interval(2.0, 1.0),
            Err(Error::InvalidDomain(_))
        ));
    }

    #[test]
    fn every_node_lies_inside_its_cell() {
        let dom = Domain::box_nd(&[(0.0, 2.0), (-1.0, 1.0)]).unwrap();
        let grid = Grid::build(dom, &[5, 9]).unwrap();
        for i in 0..grid.node_count() {
            assert_eq!(grid.locate(grid.node(i)), Some(i));
        }
    }

    #[test]
    fn exponents_below_one_rejected() {
        let grid = Grid::build(Domain::unit_interval(), &[4]).unwrap();
        let err = GridFunction::constant(grid, &[1.0], Exponent::Finite(0.5));
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn measure_unmasked_boxes_exact() {
        assert_eq!(Domain::unit_interval().measure(1).unwrap(), 1.0);
        let square = Domain::box_nd(&[(-1.0, 1.0), (-1.0, 1.0)]).unwrap();
        assert_eq!(square.measure(1).unwrap(), 4.0);
    }

    #[test]
    fn measure_masked_halfline() {
        let dom = Domain::unit_interval().with_mask(|x| x[0] < 0.5);
        let measured = dom.measure(10_000).unwrap();
        assert!((measured - 0.5).abs() <= 1e-4, "got {measured}");
    }

    #[test]
    fn masked_measure_refinement_consistency() {
        // Quadrature consistency: a masked half-space measured at r and 2r
        // differs by at most ~1/r.
        let dom = Domain::box_nd(&[(0.0, 1.0), (0.0, 1.0)]).unwrap()
            .with_mask(|x| x[0] + x[1] < 1.0);
        for r in [64usize, 128, 256] {
            let a = dom.measure(r).unwrap();
            let b = dom.measure(2 * r).unwrap();
            assert!((a - b).abs() <= 4.0 / r as f64, "r={r}: {a} vs {b}");
        }
    }

    #[test]
    fn weights_sum_to_measure() {
        let dom = Domain::box_nd(&[(0.0, 2.0), (-1.0, 1.0)]).unwrap();
        let grid = Grid::build(dom.clone(), &[7, 13]).unwrap();
        let total = grid.discrete_measure();
        assert!((total - dom.box_volume()).abs() <= 1e-12 * dom.box_volume());
    }

    #[test]
    fn p_function_values() {
        assert_eq!(
            p_function(&[3.0, 4.0], Exponent::Finite(2.0), 1.0),
            ExtReal::Finite(25.0)
        );
        assert_eq!(
            p_function(&[0.5], Exponent::Infinity, 1.0),
            ExtReal::Finite(0.0)
        );
        assert_eq!(p_function(&[2.0], Exponent::Infinity, 1.0), ExtReal::PosInf);
        // Strict comparison at the cap.
        assert_eq!(
            p_function(&[1.0], Exponent::Infinity, 1.0),
            ExtReal::Finite(0.0)
        );
    }

    #[test]
    fn lp_norm_constants() {
        let grid = Grid::build(Domain::unit_interval(), &[16]).unwrap();
        let one = GridFunction::constant(grid.clone(), &[1.0], Exponent::Finite(2.0)).unwrap();
        assert!((one.lp_norm().to_f64() - 1.0).abs() < 1e-14);
        let c = GridFunction::constant(grid, &[-3.5], Exponent::Infinity).unwrap();
        assert_eq!(c.lp_norm(), ExtReal::Finite(3.5));
    }

    #[test]
    fn lp_norm_linear_function() {
        let grid = Grid::build(Domain::unit_interval(), &[10_000]).unwrap();
        let u = GridFunction::scalar(grid, Exponent::Finite(2.0), |x| x[0]).unwrap();
        let expected = 1.0 / 3.0_f64.sqrt();
        assert!((u.lp_norm().to_f64() - expected).abs() <= 1e-6);
    }

    #[test]
    fn discrete_p_identity_exact() {
        // Σ weight · p^p_M(u_i) equals the summation path under lp_norm
        // bit-for-bit (same order, same accumulator).
        let grid = Grid::build(Domain::unit_interval(), &[37]).unwrap();
        let u = GridFunction::scalar(grid.clone(), Exponent::Finite(3.0), |x| {
            (7.3 * x[0]).sin() + 0.2
        })
        .unwrap();
        let mut acc = NeumaierSum::new();
        for i in 0..grid.node_count() {
            acc.add(grid.weight() * p_function(u.value(i), u.exponent(), 1.0).to_f64());
        }
        assert_eq!(ExtReal::finite(acc.value()), u.lp_norm_pow(1.0));
    }

    #[test]
    fn csv_roundtrip() {
        let grid = Grid::build(Domain::unit_interval(), &[8]).unwrap();
        let u = GridFunction::from_fn(grid.clone(), 2, Exponent::Finite(2.0), |x| {
            vec![x[0], 1.0 - x[0]]
        })
        .unwrap();
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x_1,u_1,u_2\n"));
        let back = GridFunction::read_csv(grid, Exponent::Finite(2.0), buf.as_slice()).unwrap();
        assert_eq!(back.values(), u.values());
    }

    #[test]
    fn resample_piecewise_constant() {
        let grid = Grid::build(Domain::unit_interval(), &[4]).unwrap();
        let u = GridFunction::scalar(grid.clone(), Exponent::Finite(1.0), |x| x[0]).unwrap();
        let fine = grid.refine(2).unwrap();
        let v = u.resample(&fine).unwrap();
        // Both fine cells inside a coarse cell inherit its midpoint value.
        assert_eq!(v.value(0)[0], 0.125);
        assert_eq!(v.value(1)[0], 0.125);
        assert_eq!(v.value(2)[0], 0.375);
    }
}
