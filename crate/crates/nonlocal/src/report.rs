//! Run reports and JSON/CSV/SVG artifact writers.
//!
//! Reports are deterministic: replaying the same command with the same seed
//! reproduces every numeric field byte-for-byte; only `wall_time_ms` may
//! differ between runs.

use crate::analysis::{Decomposition, GTable, HTable};
use crate::error::Result;
use crate::grid::Grid;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write;
use std::path::Path;

#[derive(Clone, Debug, Serialize)]
pub struct RunReport<T: Serialize> {
    pub command: String,
    pub inputs_digest: String,
    pub seed: u64,
    pub tool_version: String,
    pub outcome: T,
    /// Excluded from determinism comparisons.
    pub wall_time_ms: u128,
}

impl<T: Serialize> RunReport<T> {
    pub fn new(command: String, inputs_digest: String, seed: u64, outcome: T) -> Self {
        RunReport {
            command,
            inputs_digest,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outcome,
            wall_time_ms: 0,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// SHA-256 hex digest of the argument list plus any input file contents.
pub fn inputs_digest(args: &[String], files: &[&Path]) -> String {
    let mut hasher = Sha256::new();
    for a in args {
        hasher.update(a.as_bytes());
        hasher.update([0u8]);
    }
    for f in files {
        if let Ok(bytes) = fs::read(f) {
            hasher.update(&bytes);
        }
    }
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = fs::File::create(path)?;
    let text = serde_json::to_string_pretty(value)?;
    out.write_all(text.as_bytes())?;
    out.write_all(b"\n")?;
    Ok(())
}

/// CSV with a header row; one row per record, shortest-roundtrip floats.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = fs::File::create(path)?;
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

/// `g(x, y, w)` table as CSV with axis headers.
pub fn write_g_table_csv(path: &Path, g: &GTable) -> Result<()> {
    let grid = &g.grid;
    let count = grid.node_count();
    let mut rows = Vec::with_capacity(count * count * g.w_grid.len());
    for i in 0..count {
        for j in 0..count {
            for (k, &w) in g.w_grid.iter().enumerate() {
                rows.push(vec![grid.node(i)[0], grid.node(j)[0], w, g.at(i, j, k)]);
            }
        }
    }
    write_csv(path, &["x", "y", "w", "g"], &rows)
}

/// `h(x, y)` table as CSV with axis headers.
pub fn write_h_table_csv(path: &Path, h: &HTable) -> Result<()> {
    let grid = &h.grid;
    let count = grid.node_count();
    let mut rows = Vec::with_capacity(count * count);
    for i in 0..count {
        for j in 0..count {
            rows.push(vec![grid.node(i)[0], grid.node(j)[0], h.at(i, j)]);
        }
    }
    write_csv(path, &["x", "y", "h"], &rows)
}

/// Final `γ` table and the whole ladder as CSV with axis headers.
pub fn write_gamma_csv(path: &Path, grid: &Grid, d: &Decomposition) -> Result<()> {
    let count = grid.node_count();
    let nw = d.w_grid.len();
    let mut header: Vec<String> = vec!["x".into(), "y".into(), "w".into(), "gamma".into()];
    for m in &d.m_ladder {
        header.push(format!("gamma_M{m}"));
    }
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut rows = Vec::with_capacity(count * count * nw);
    for i in 0..count {
        for j in 0..count {
            for (k, &w) in d.w_grid.iter().enumerate() {
                let idx = (i * count + j) * nw + k;
                let mut row = vec![grid.node(i)[0], grid.node(j)[0], w, d.gamma[idx]];
                for rung in &d.gamma_m {
                    row.push(rung[idx]);
                }
                rows.push(row);
            }
        }
    }
    write_csv(path, &header_refs, &rows)
}

/// Minimal static SVG line/scatter plot of one or more series.
pub fn render_svg(title: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const MARGIN: f64 = 48.0;
    let mut min_x = f64::INFINITY;
    let mut max_x = f64::NEG_INFINITY;
    let mut min_y = f64::INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    for (_, pts) in series {
        for &(x, y) in pts {
            min_x = min_x.min(x);
            max_x = max_x.max(x);
            min_y = min_y.min(y);
            max_y = max_y.max(y);
        }
    }
    if !min_x.is_finite() {
        min_x = 0.0;
        max_x = 1.0;
        min_y = 0.0;
        max_y = 1.0;
    }
    if max_x - min_x < 1e-300 {
        max_x = min_x + 1.0;
    }
    if max_y - min_y < 1e-300 {
        max_y = min_y + 1.0;
    }
    let sx = |x: f64| MARGIN + (x - min_x) / (max_x - min_x) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - min_y) / (max_y - min_y) * (H - 2.0 * MARGIN);
    const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
        W / 2.0,
        title
    ));
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n<line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN,
        t = MARGIN
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\">{:.4}</text>\n",
        MARGIN,
        H - MARGIN + 14.0,
        min_x
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{:.4}</text>\n",
        W - MARGIN,
        H - MARGIN + 14.0,
        max_x
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{:.4}</text>\n",
        MARGIN - 4.0,
        H - MARGIN,
        min_y
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{:.4}</text>\n",
        MARGIN - 4.0,
        MARGIN + 4.0,
        max_y
    ));
    for (s, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[s % COLORS.len()];
        if pts.len() > 1 {
            let path: Vec<String> = pts
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            svg.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                path.join(" ")
            ));
        }
        for &(x, y) in pts {
            svg.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\"/>\n",
                sx(x),
                sy(y)
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"{color}\">{name}</text>\n",
            W - MARGIN + 4.0,
            MARGIN + 16.0 * s as f64
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn write_svg(path: &Path, title: &str, series: &[(String, Vec<(f64, f64)>)]) -> Result<()> {
    let mut out = fs::File::create(path)?;
    out.write_all(render_svg(title, series).as_bytes())?;
    Ok(())
}
