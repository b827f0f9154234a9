//! Shared domain types: temporal realizations, planar patterns and grids.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// A realization of a temporal point process on `(0, horizon]`.
///
/// Times are strictly increasing; simultaneous events are not representable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventTimes {
    times: Vec<f64>,
    horizon: f64,
}

impl EventTimes {
    pub fn new(times: Vec<f64>, horizon: f64) -> Result<Self> {
        ensure(horizon.is_finite() && horizon > 0.0, || {
            format!("horizon must be positive and finite, got {horizon}")
        })?;
        for (i, &t) in times.iter().enumerate() {
            if !(t > 0.0 && t <= horizon) {
                return Err(Error::Invalid(format!(
                    "event {i} at t = {t} lies outside (0, {horizon}]"
                )));
            }
            if i > 0 && times[i - 1] >= t {
                return Err(Error::Invalid(format!(
                    "event times must be strictly increasing (index {i})"
                )));
            }
        }
        Ok(Self { times, horizon })
    }

    /// Rebuilds event times by cumulative summation of inter-arrival gaps.
    pub fn from_inter_arrivals(gaps: &[f64], horizon: f64) -> Result<Self> {
        let mut t = 0.0;
        let times = gaps
            .iter()
            .map(|q| {
                t += q;
                t
            })
            .collect();
        Self::new(times, horizon)
    }

    pub(crate) fn from_sorted_unchecked(times: Vec<f64>, horizon: f64) -> Self {
        debug_assert!(times.windows(2).all(|w| w[0] < w[1]));
        Self { times, horizon }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Counting process `N_t = #{i : T_i <= t}`.
    pub fn count(&self, t: f64) -> usize {
        self.times.partition_point(|&ti| ti <= t)
    }

    /// Number of events in the half-open interval `(a, b]`.
    pub fn count_between(&self, a: f64, b: f64) -> usize {
        self.count(b).saturating_sub(self.count(a))
    }

    pub fn inter_arrival_times(&self) -> Vec<f64> {
        inter_arrival_times(self)
    }
}

/// Gaps `Q_1 = T_1`, `Q_k = T_k - T_{k-1}`.
pub fn inter_arrival_times(ev: &EventTimes) -> Vec<f64> {
    let mut prev = 0.0;
    ev.times
        .iter()
        .map(|&t| {
            let q = t - prev;
            prev = t;
            q
        })
        .collect()
}

/// Axis-aligned rectangular study region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Region {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self> {
        let finite = [xmin, xmax, ymin, ymax].iter().all(|v| v.is_finite());
        ensure(finite && xmin < xmax && ymin < ymax, || {
            format!("region requires xmin < xmax and ymin < ymax, got [{xmin}, {xmax}] x [{ymin}, {ymax}]")
        })?;
        Ok(Self {
            xmin,
            xmax,
            ymin,
            ymax,
        })
    }

    pub fn unit_square() -> Self {
        Self {
            xmin: 0.0,
            xmax: 1.0,
            ymin: 0.0,
            ymax: 1.0,
        }
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.xmin && p.x <= self.xmax && p.y >= self.ymin && p.y <= self.ymax
    }

    /// Distance from an interior point to the nearest edge.
    pub fn distance_to_boundary(&self, p: Point) -> f64 {
        (p.x - self.xmin)
            .min(self.xmax - p.x)
            .min(p.y - self.ymin)
            .min(self.ymax - p.y)
    }

    pub fn covers(&self, other: &Region) -> bool {
        self.xmin <= other.xmin
            && self.xmax >= other.xmax
            && self.ymin <= other.ymin
            && self.ymax >= other.ymax
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Euclidean distance. Symmetric bit-for-bit in its arguments.
    #[inline]
    pub fn distance(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }
}

/// A finite planar point set inside a rectangular region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialPattern {
    points: Vec<Point>,
    region: Region,
}

impl SpatialPattern {
    pub fn new(points: Vec<Point>, region: Region) -> Result<Self> {
        let outside: Vec<usize> = points
            .iter()
            .enumerate()
            .filter(|(_, p)| !region.contains(**p))
            .map(|(i, _)| i)
            .collect();
        if !outside.is_empty() {
            return Err(Error::OutOfBounds { indices: outside });
        }
        Ok(Self { points, region })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `n / area`.
    pub fn intensity(&self) -> f64 {
        self.points.len() as f64 / self.region.area()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeEvent {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl SpaceTimeEvent {
    pub fn location(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

/// Events located in space and time: `(s_i, t_i)` with `s_i` in a region and
/// `t_i` in `[0, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeEvents {
    events: Vec<SpaceTimeEvent>,
    region: Region,
    horizon: f64,
}

impl SpaceTimeEvents {
    pub fn new(events: Vec<SpaceTimeEvent>, region: Region, horizon: f64) -> Result<Self> {
        ensure(horizon.is_finite() && horizon > 0.0, || {
            format!("horizon must be positive, got {horizon}")
        })?;
        let outside: Vec<usize> = events
            .iter()
            .enumerate()
            .filter(|(_, e)| !region.contains(e.location()) || !(e.t >= 0.0 && e.t <= horizon))
            .map(|(i, _)| i)
            .collect();
        if !outside.is_empty() {
            return Err(Error::OutOfBounds { indices: outside });
        }
        Ok(Self {
            events,
            region,
            horizon,
        })
    }

    pub fn events(&self) -> &[SpaceTimeEvent] {
        &self.events
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// A regular `nx` by `ny` dissection of a region.
///
/// Cells are half-open `[x0, x1) x [y0, y1)` except the last column and row,
/// which are closed so the region's upper edges map to a cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub region: Region,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(region: Region, nx: usize, ny: usize) -> Result<Self> {
        ensure(nx >= 1 && ny >= 1, || {
            format!("grid needs nx >= 1 and ny >= 1, got {nx} x {ny}")
        })?;
        Ok(Self { region, nx, ny })
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell_width(&self) -> f64 {
        self.region.width() / self.nx as f64
    }

    pub fn cell_height(&self) -> f64 {
        self.region.height() / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.cell_width() * self.cell_height()
    }

    /// Row-major linear index, `iy * nx + ix`.
    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    #[inline]
    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.nx, index / self.nx)
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> Point {
        Point::new(
            self.region.xmin + (ix as f64 + 0.5) * self.cell_width(),
            self.region.ymin + (iy as f64 + 0.5) * self.cell_height(),
        )
    }

    pub fn cell_bounds(&self, ix: usize, iy: usize) -> Region {
        let w = self.cell_width();
        let h = self.cell_height();
        Region {
            xmin: self.region.xmin + ix as f64 * w,
            xmax: if ix + 1 == self.nx {
                self.region.xmax
            } else {
                self.region.xmin + (ix + 1) as f64 * w
            },
            ymin: self.region.ymin + iy as f64 * h,
            ymax: if iy + 1 == self.ny {
                self.region.ymax
            } else {
                self.region.ymin + (iy + 1) as f64 * h
            },
        }
    }

    pub fn centers(&self) -> Vec<Point> {
        (0..self.ny)
            .flat_map(|iy| (0..self.nx).map(move |ix| (ix, iy)))
            .map(|(ix, iy)| self.cell_center(ix, iy))
            .collect()
    }

    /// Cell `(ix, iy)` containing `p`, or `None` outside the region.
    pub fn cell_of(&self, p: Point) -> Option<(usize, usize)> {
        if !self.region.contains(p) {
            return None;
        }
        let ix = axis_cell(p.x, self.region.xmin, self.cell_width(), self.nx);
        let iy = axis_cell(p.y, self.region.ymin, self.cell_height(), self.ny);
        Some((ix, iy))
    }
}

fn axis_cell(v: f64, origin: f64, step: f64, n: usize) -> usize {
    let i = ((v - origin) / step).floor();
    if i < 0.0 {
        0
    } else {
        (i as usize).min(n - 1)
    }
}

/// Per-cell counts on a [`GridSpec`], row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountGrid {
    spec: GridSpec,
    counts: Vec<u64>,
}

impl CountGrid {
    pub fn new(spec: GridSpec, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != spec.n_cells() {
            return Err(Error::Shape);
        }
        Ok(Self { spec, counts })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            spec,
            counts: vec![0; spec.n_cells()],
        }
    }

    /// Counts points per cell. Points outside the grid region are an error.
    pub fn from_points(spec: GridSpec, points: &[Point]) -> Result<Self> {
        let mut grid = Self::zeros(spec);
        let mut outside = Vec::new();
        for (i, &p) in points.iter().enumerate() {
            match spec.cell_of(p) {
                Some((ix, iy)) => grid.counts[spec.index(ix, iy)] += 1,
                None => outside.push(i),
            }
        }
        if outside.is_empty() {
            Ok(grid)
        } else {
            Err(Error::OutOfBounds { indices: outside })
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn get(&self, ix: usize, iy: usize) -> u64 {
        self.counts[self.spec.index(ix, iy)]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}
