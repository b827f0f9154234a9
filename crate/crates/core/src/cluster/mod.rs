//! Cluster location: grid aggregation, pattern comparison, local hotspot
//! Z-scores and the space-time scan statistic.

mod geometry;
mod scan;

pub use geometry::disc_rect_area;
pub use scan::{
    llr_poisson, space_time_scan, Baseline, Cylinder, ScanConfig, ScanResult, MIN_SCAN_SIMULATIONS,
};

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::types::{CountGrid, GridSpec, SpatialPattern};

/// Conventional two-sided 5% cut-off for hotspot flags.
pub const DEFAULT_HOT_THRESHOLD: f64 = 1.96;

/// Points per cell on `spec`; any point outside the grid region is an error
/// that lists the offending indices.
pub fn aggregate_to_grid(pattern: &SpatialPattern, spec: &GridSpec) -> Result<CountGrid> {
    CountGrid::from_points(*spec, pattern.points())
}

/// Residual sum of squares between two count grids on the same spec.
pub fn rss(a: &CountGrid, b: &CountGrid) -> Result<f64> {
    if a.spec() != b.spec() {
        return Err(Error::Shape);
    }
    Ok(a.counts()
        .iter()
        .zip(b.counts())
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZScoreGrid {
    pub spec: GridSpec,
    pub z: Vec<f64>,
}

impl ZScoreGrid {
    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.z[self.spec.index(ix, iy)]
    }

    /// Cells with `z >= threshold`.
    pub fn hot_cells(&self, threshold: f64) -> Vec<(usize, usize)> {
        self.z
            .iter()
            .enumerate()
            .filter(|(_, &z)| z >= threshold)
            .map(|(i, _)| self.spec.coords(i))
            .collect()
    }

    /// Cells with `z <= -threshold`.
    pub fn cold_cells(&self, threshold: f64) -> Vec<(usize, usize)> {
        self.z
            .iter()
            .enumerate()
            .filter(|(_, &z)| z <= -threshold)
            .map(|(i, _)| self.spec.coords(i))
            .collect()
    }
}

/// Getis-Ord Gi* with binary distance weights (self included).
///
/// A cell `j` neighbours `i` when their centres are within `radius`. With
/// `W_i = sum_j w_ij`, global mean `xbar` and population standard deviation
/// `s` over `n` cells:
///
/// ```text
/// Gi* = (sum_j w_ij x_j - xbar W_i) / (s sqrt((n W_i - W_i^2) / (n - 1)))
/// ```
pub fn gi_star(counts: &CountGrid, radius: f64) -> Result<ZScoreGrid> {
    ensure(radius.is_finite() && radius >= 0.0, || {
        format!("neighbourhood radius must be non-negative, got {radius}")
    })?;
    let spec = *counts.spec();
    let n = spec.n_cells();
    if n < 2 {
        return Err(Error::Degenerate("Gi* needs at least two cells".into()));
    }
    let x: Vec<f64> = counts.counts().iter().map(|&c| c as f64).collect();
    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / nf;
    if !(var > 0.0) {
        return Err(Error::Degenerate("all cells hold the same count".into()));
    }
    let s = var.sqrt();

    // centre spacing is exact multiples of the cell size up to rounding
    let reach = radius * (1.0 + 1e-9);
    let (cw, ch) = (spec.cell_width(), spec.cell_height());
    let kx = (reach / cw).floor() as usize;
    let ky = (reach / ch).floor() as usize;

    let mut z = vec![0.0; n];
    for iy in 0..spec.ny {
        for ix in 0..spec.nx {
            let mut w = 0usize;
            let mut sum = 0.0;
            for jy in iy.saturating_sub(ky)..=(iy + ky).min(spec.ny - 1) {
                for jx in ix.saturating_sub(kx)..=(ix + kx).min(spec.nx - 1) {
                    let dx = (jx as f64 - ix as f64) * cw;
                    let dy = (jy as f64 - iy as f64) * ch;
                    if (dx * dx + dy * dy).sqrt() <= reach {
                        w += 1;
                        sum += x[spec.index(jx, jy)];
                    }
                }
            }
            if w == n {
                return Err(Error::Degenerate(
                    "neighbourhood covers the whole grid, Gi* is undefined".into(),
                ));
            }
            let wf = w as f64;
            let denom = s * ((nf * wf - wf * wf) / (nf - 1.0)).sqrt();
            z[spec.index(ix, iy)] = (sum - mean * wf) / denom;
        }
    }
    Ok(ZScoreGrid { spec, z })
}
