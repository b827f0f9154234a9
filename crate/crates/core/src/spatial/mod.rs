//! Spatial point pattern statistics measured against complete spatial
//! randomness (CSR).

mod envelope;
mod neighbours;

pub use envelope::{csr_envelope, evaluate_statistic, EnvelopeResult, EnvelopeStatistic};
pub use neighbours::{
    empty_space_distances, f_function, g_function, mean_min_distance, nearest_neighbour_distances,
    nni, ripleys_k, EdgeCorrection, PointIndex,
};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::rng::RngStream;
use crate::stats::chi_square_sf;
use crate::types::{CountGrid, GridSpec, Point, Region, SpatialPattern};

/// Homogeneous Poisson pattern: `N ~ Poisson(rate * area)` points placed
/// uniformly on the region.
pub fn simulate_csr(rate: f64, region: &Region, rng: &mut RngStream) -> Result<SpatialPattern> {
    ensure(rate.is_finite() && rate > 0.0, || {
        format!("rate must be positive, got {rate}")
    })?;
    let n = rng.poisson(rate * region.area())? as usize;
    Ok(uniform_points(n, region, rng))
}

/// `n` independent uniform points on the region (a binomial pattern).
pub fn uniform_points(n: usize, region: &Region, rng: &mut RngStream) -> SpatialPattern {
    let points = (0..n)
        .map(|_| {
            let x = rng.uniform_in(region.xmin, region.xmax);
            let y = rng.uniform_in(region.ymin, region.ymax);
            Point::new(x, y)
        })
        .collect();
    SpatialPattern::new(points, *region).expect("uniform draws lie inside the region")
}

/// Grid of intensity estimates, events per unit area, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySurface {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl DensitySurface {
    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[self.spec.index(ix, iy)]
    }
}

/// Naive kernel density: for each cell, the number of events within
/// `bandwidth` of the cell centre divided by the disc area. No edge
/// correction is applied.
pub fn kde_surface(pattern: &SpatialPattern, spec: &GridSpec, bandwidth: f64) -> Result<DensitySurface> {
    ensure(bandwidth.is_finite() && bandwidth > 0.0, || {
        format!("bandwidth must be positive, got {bandwidth}")
    })?;
    let index = PointIndex::new(pattern.points());
    let disc = PI * bandwidth * bandwidth;
    let values = spec
        .centers()
        .into_iter()
        .map(|c| index.count_within(c, bandwidth) as f64 / disc)
        .collect();
    Ok(DensitySurface { spec: *spec, values })
}

/// Quadrat counts with the chi-square dispersion test against CSR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratTest {
    pub grid: CountGrid,
    /// `sum (c_i - mean)^2 / mean`
    pub chi_square: f64,
    pub df: usize,
    pub p_value: f64,
}

pub fn quadrat_counts(pattern: &SpatialPattern, spec: &GridSpec) -> Result<QuadratTest> {
    ensure(spec.region.covers(pattern.region()), || {
        "quadrat grid must cover the pattern region".into()
    })?;
    let cells = spec.n_cells();
    if cells < 2 {
        return Err(Error::Degenerate("quadrat test needs at least two cells".into()));
    }
    let grid = CountGrid::from_points(*spec, pattern.points())?;
    let mean = grid.total() as f64 / cells as f64;
    if mean == 0.0 {
        return Err(Error::Degenerate("quadrat test on an empty pattern".into()));
    }
    let chi_square = grid
        .counts()
        .iter()
        .map(|&c| (c as f64 - mean).powi(2))
        .sum::<f64>()
        / mean;
    let df = cells - 1;
    let p_value = chi_square_sf(chi_square, df as f64)?;
    Ok(QuadratTest {
        grid,
        chi_square,
        df,
        p_value,
    })
}

/// Variance-to-mean ratio of quadrat counts after merging `block` by `block`
/// quadrats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockDispersion {
    pub block: usize,
    pub index: f64,
}

pub fn dispersion_by_block(
    pattern: &SpatialPattern,
    base_spec: &GridSpec,
    block_sizes: &[usize],
) -> Result<Vec<BlockDispersion>> {
    for &b in block_sizes {
        ensure(b >= 1 && base_spec.nx % b == 0 && base_spec.ny % b == 0, || {
            format!(
                "block size {b} must divide the {} x {} base grid",
                base_spec.nx, base_spec.ny
            )
        })?;
    }
    let base = CountGrid::from_points(*base_spec, pattern.points())?;
    let mut sizes = block_sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    sizes
        .into_iter()
        .map(|b| {
            let (mx, my) = (base_spec.nx / b, base_spec.ny / b);
            if mx * my < 2 {
                return Err(Error::Degenerate(format!(
                    "block size {b} leaves fewer than two blocks"
                )));
            }
            let mut merged = vec![0.0; mx * my];
            for iy in 0..base_spec.ny {
                for ix in 0..base_spec.nx {
                    merged[(iy / b) * mx + ix / b] += base.get(ix, iy) as f64;
                }
            }
            let mean = crate::stats::mean(&merged);
            if mean == 0.0 {
                return Err(Error::Degenerate("dispersion index of an empty pattern".into()));
            }
            Ok(BlockDispersion {
                block: b,
                index: crate::stats::sample_variance(&merged) / mean,
            })
        })
        .collect()
}
