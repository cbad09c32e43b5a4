//! Empirical linearly controlled dimension of a finite metric sample.
//!
//! At each scale `λ` a greedy `3λ`-separated net is chosen (points scanned in a
//! seeded random order), every point joins the cell of its nearest center (ties
//! to the lower index), and each cell is thickened to the open `λ`-neighbourhood
//! of itself in the sample. A point of a cell is then at distance `>= λ` from
//! the complement of its thickened cell, so the Lebesgue number is at least `λ`
//! on the sample, and cells have diameter `< 8λ`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Net separation in units of `λ`.
pub const NET_SEPARATION: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleRow {
    pub lambda: f64,
    pub order: usize,
    pub mesh: f64,
    /// `None` if the cover is a single set holding the whole sample.
    pub lebesgue: Option<f64>,
    pub bound_mesh: f64,
    pub bound_lebesgue: f64,
    pub pass: bool,
    pub sets: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllDimReport {
    pub c: f64,
    pub rows: Vec<ScaleRow>,
    /// Largest order over the scales, minus one.
    pub estimate: usize,
    pub all_pass: bool,
}

impl EllDimReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(super::stats_csv_header());
        for r in &self.rows {
            let leb = r.lebesgue.map_or("inf".to_string(), crate::fmt_real);
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                crate::fmt_real(r.lambda),
                r.order,
                crate::fmt_real(r.mesh),
                leb,
                crate::fmt_real(r.bound_mesh),
                crate::fmt_real(r.bound_lebesgue),
                r.pass
            ));
        }
        out
    }
}

/// Cover the sample with distance matrix `dist` at every scale and report orders.
pub fn ell_dim_estimate(dist: &[Vec<f64>], scales: &[f64], c: f64, seed: u64) -> Result<EllDimReport> {
    if !(c >= 1.0) {
        return Err(invalid("c", format!("must be at least 1, got {c}")));
    }
    let n = dist.len();
    if n == 0 {
        return Err(invalid("points", "sample is empty"));
    }
    if dist.iter().any(|row| row.len() != n) {
        return Err(invalid("dist", "matrix is not square"));
    }
    if let Some(bad) = scales.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
        return Err(invalid("scales", format!("must be positive, got {bad}")));
    }
    let mut order_scan: Vec<usize> = (0..n).collect();
    order_scan.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut rows = Vec::with_capacity(scales.len());
    for &lambda in scales {
        let sep = NET_SEPARATION * lambda;
        let mut centers: Vec<usize> = Vec::new();
        for &i in &order_scan {
            if centers.iter().all(|&c| dist[c][i] >= sep) {
                centers.push(i);
            }
        }
        centers.sort_unstable();
        let cell: Vec<usize> = (0..n)
            .map(|i| {
                let mut best = 0;
                for (k, &c) in centers.iter().enumerate() {
                    if dist[i][c] < dist[i][centers[best]] {
                        best = k;
                    }
                }
                best
            })
            .collect();
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); centers.len()];
        let mut inside = vec![vec![false; n]; centers.len()];
        let mut cells_of: Vec<Vec<usize>> = Vec::with_capacity(n);
        for y in 0..n {
            let mut cells: Vec<usize> = (0..n).filter(|&x| dist[y][x] < lambda).map(|x| cell[x]).collect();
            cells.push(cell[y]);
            cells.sort_unstable();
            cells.dedup();
            for &k in &cells {
                members[k].push(y);
                inside[k][y] = true;
            }
            cells_of.push(cells);
        }
        let order = cells_of.iter().map(Vec::len).max().unwrap_or(0);
        let mut mesh: f64 = 0.0;
        for m in &members {
            for (a, &i) in m.iter().enumerate() {
                for &j in &m[..a] {
                    mesh = mesh.max(dist[i][j]);
                }
            }
        }
        // Depth of each point in its best set; infinite depths don't lower the minimum.
        let mut lebesgue: Option<f64> = None;
        for x in 0..n {
            let depth = cells_of[x]
                .iter()
                .map(|&k| {
                    (0..n)
                        .filter(|&y| !inside[k][y])
                        .map(|y| dist[x][y])
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max);
            if depth.is_finite() {
                lebesgue = Some(lebesgue.map_or(depth, |l: f64| l.min(depth)));
            }
        }
        let bound_mesh = c * lambda;
        let pass = mesh <= bound_mesh * (1.0 + 1e-9) && lebesgue.is_none_or(|l| l >= lambda * (1.0 - 1e-9));
        rows.push(ScaleRow {
            lambda,
            order,
            mesh,
            lebesgue,
            bound_mesh,
            bound_lebesgue: lambda,
            pass,
            sets: centers.len(),
        });
    }
    let estimate = rows.iter().map(|r| r.order).max().unwrap_or(1).saturating_sub(1);
    let all_pass = rows.iter().all(|r| r.pass);
    Ok(EllDimReport {
        c,
        rows,
        estimate,
        all_pass,
    })
}
