//! Space-time scan statistic with a Poisson null.
//!
//! Candidate windows are cylinders: a disc around a lattice centre crossed
//! with a time interval that starts on a slice boundary. Each cylinder gets
//! the Poisson log-likelihood ratio of its observed count against the count
//! expected from the baseline population, and significance comes from the
//! rank of that ratio among the maxima of datasets redrawn under the null.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::geometry::disc_rect_area;
use crate::error::{ensure, Error, Result};
use crate::rng::RngStream;
use crate::types::{CountGrid, GridSpec, Point, Region, SpaceTimeEvent, SpaceTimeEvents};

/// Minimum Monte Carlo replicate count for scan p-values.
pub const MIN_SCAN_SIMULATIONS: usize = 99;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub cx: f64,
    pub cy: f64,
    pub radius: f64,
    pub t_start: f64,
    pub t_end: f64,
}

impl Cylinder {
    pub fn new(cx: f64, cy: f64, radius: f64, t_start: f64, t_end: f64) -> Result<Self> {
        ensure(radius > 0.0, || format!("cylinder radius must be positive, got {radius}"))?;
        if !(t_start < t_end) {
            return Err(Error::Interval {
                start: t_start,
                end: t_end,
            });
        }
        Ok(Self {
            cx,
            cy,
            radius,
            t_start,
            t_end,
        })
    }

    pub fn center(&self) -> Point {
        Point::new(self.cx, self.cy)
    }

    /// Disc is closed; the time interval is `[t_start, t_end)`, closed at the
    /// study horizon.
    pub fn contains(&self, e: &SpaceTimeEvent, horizon: f64) -> bool {
        let in_time = e.t >= self.t_start && (e.t < self.t_end || (e.t == self.t_end && self.t_end == horizon));
        in_time && self.center().distance(e.location()) <= self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub cylinder: Cylinder,
    pub observed: u64,
    pub expected: f64,
    pub llr: f64,
    pub p_value: f64,
}

/// Population at risk.
#[derive(Debug, Clone, PartialEq)]
pub enum Baseline {
    /// Constant density over the region and time span.
    Uniform,
    /// Per-cell masses on `spec`, one vector per equal-width time slice of
    /// `[0, horizon]`. Mass is spread uniformly within each cell and slice.
    Grid { spec: GridSpec, slices: Vec<Vec<f64>> },
}

impl Baseline {
    pub fn grid(spec: GridSpec, slices: Vec<Vec<f64>>) -> Result<Self> {
        if slices.is_empty() {
            return Err(Error::Baseline("at least one time slice is required".into()));
        }
        for (k, s) in slices.iter().enumerate() {
            if s.len() != spec.n_cells() {
                return Err(Error::Baseline(format!(
                    "slice {k} has {} cells, grid has {}",
                    s.len(),
                    spec.n_cells()
                )));
            }
            if s.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::Baseline(format!(
                    "slice {k} has a negative or non-finite mass"
                )));
            }
        }
        Ok(Self::Grid { spec, slices })
    }

    /// One count grid per time slice, all on the same spec.
    pub fn from_count_grids(grids: &[CountGrid]) -> Result<Self> {
        let spec = *grids
            .first()
            .ok_or_else(|| Error::Baseline("no baseline grids given".into()))?
            .spec();
        if grids.iter().any(|g| *g.spec() != spec) {
            return Err(Error::Baseline("baseline slices use different grids".into()));
        }
        Self::grid(
            spec,
            grids
                .iter()
                .map(|g| g.counts().iter().map(|&c| c as f64).collect())
                .collect(),
        )
    }

    fn total(&self) -> f64 {
        match self {
            Baseline::Uniform => 1.0,
            Baseline::Grid { slices, .. } => slices.iter().flatten().sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Cylinder centres are the cell centres of this grid.
    pub centres: GridSpec,
    pub radii: Vec<f64>,
    pub durations: Vec<f64>,
    /// Start times are `k * horizon / time_slices`.
    pub time_slices: usize,
    pub nsim: usize,
}

/// Poisson log-likelihood ratio for `observed` events where `expected` were
/// due, out of `total`. Only excess counts score; a positive count where
/// nothing was expected is infinite.
pub fn llr_poisson(observed: u64, expected: f64, total: u64) -> f64 {
    let n = observed as f64;
    if n <= expected {
        return 0.0;
    }
    if expected <= 0.0 {
        return f64::INFINITY;
    }
    let big_n = total as f64;
    let inside = n * (n / expected).ln();
    let outside = if big_n > n {
        (big_n - n) * ((big_n - n) / (big_n - expected)).ln()
    } else {
        0.0
    };
    (inside + outside).max(0.0)
}

struct Candidates {
    centres: Vec<Point>,
    radii: Vec<f64>,
    windows: Vec<(f64, f64)>,
    horizon: f64,
    /// Baseline share of each cylinder, indexed `(c * R + r) * W + w`.
    share: Vec<f64>,
}

impl Candidates {
    fn len(&self) -> usize {
        self.share.len()
    }

    fn cylinder(&self, idx: usize) -> Cylinder {
        let w = self.windows.len();
        let r = self.radii.len();
        let (cr, wi) = (idx / w, idx % w);
        let (ci, ri) = (cr / r, cr % r);
        let c = self.centres[ci];
        let (t_start, t_end) = self.windows[wi];
        Cylinder {
            cx: c.x,
            cy: c.y,
            radius: self.radii[ri],
            t_start,
            t_end,
        }
    }

    /// Events per cylinder, in candidate order.
    fn counts(&self, events: &[SpaceTimeEvent]) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.len());
        let mut by_dist: Vec<(f64, f64)> = Vec::with_capacity(events.len());
        let mut times: Vec<f64> = Vec::with_capacity(events.len());
        for &c in &self.centres {
            by_dist.clear();
            by_dist.extend(events.iter().map(|e| (c.distance(e.location()), e.t)));
            by_dist.sort_by(|a, b| a.0.total_cmp(&b.0));
            for &r in &self.radii {
                let k = by_dist.partition_point(|&(d, _)| d <= r);
                times.clear();
                times.extend(by_dist[..k].iter().map(|&(_, t)| t));
                times.sort_by(f64::total_cmp);
                for &(start, end) in &self.windows {
                    let lo = times.partition_point(|&t| t < start);
                    let hi = if end == self.horizon {
                        times.partition_point(|&t| t <= end)
                    } else {
                        times.partition_point(|&t| t < end)
                    };
                    out.push(hi.saturating_sub(lo) as u64);
                }
            }
        }
        out
    }

    fn llrs(&self, counts: &[u64], total: u64) -> Vec<f64> {
        counts
            .iter()
            .zip(&self.share)
            .map(|(&n, &s)| llr_poisson(n, total as f64 * s, total))
            .collect()
    }
}

fn dedup_sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn build_candidates(region: &Region, horizon: f64, baseline: &Baseline, config: &ScanConfig) -> Result<Candidates> {
    let radii = dedup_sorted(&config.radii);
    let durations = dedup_sorted(&config.durations);
    ensure(!radii.is_empty() && radii.iter().all(|r| r.is_finite() && *r > 0.0), || {
        "scan radii must be non-empty and positive".into()
    })?;
    ensure(
        !durations.is_empty() && durations.iter().all(|d| d.is_finite() && *d > 0.0),
        || "scan durations must be non-empty and positive".into(),
    )?;
    ensure(config.time_slices >= 1, || "need at least one time slice".into())?;

    let slice = horizon / config.time_slices as f64;
    let mut seen = HashSet::new();
    let mut windows = Vec::new();
    for k in 0..config.time_slices {
        let start = k as f64 * slice;
        for &d in &durations {
            let mut end = start + d;
            if (end - horizon).abs() <= 1e-12 * horizon {
                end = horizon;
            }
            if end > horizon {
                continue;
            }
            if seen.insert((start.to_bits(), end.to_bits())) {
                windows.push((start, end));
            }
        }
    }
    if windows.is_empty() {
        return Err(Error::Parameter(
            "every duration exceeds the study horizon".into(),
        ));
    }

    let centres = config.centres.centers();
    let total = baseline.total();
    if !(total > 0.0) {
        return Err(Error::Baseline("total baseline mass is zero".into()));
    }

    let mut share = Vec::with_capacity(centres.len() * radii.len() * windows.len());
    match baseline {
        Baseline::Uniform => {
            let area = region.area();
            for &c in &centres {
                for &r in &radii {
                    let space = disc_rect_area(c, r, region) / area;
                    for &(s, e) in &windows {
                        share.push(space * (e - s) / horizon);
                    }
                }
            }
        }
        Baseline::Grid { spec, slices } => {
            if spec.region != *region {
                return Err(Error::Baseline(
                    "baseline grid region must equal the event region".into(),
                ));
            }
            let n_slices = slices.len();
            let slice_len = horizon / n_slices as f64;
            let cell_area = spec.cell_area();
            let mut per_slice = vec![0.0; n_slices];
            for &c in &centres {
                for &r in &radii {
                    per_slice.iter_mut().for_each(|v| *v = 0.0);
                    for iy in 0..spec.ny {
                        for ix in 0..spec.nx {
                            let frac = disc_rect_area(c, r, &spec.cell_bounds(ix, iy)) / cell_area;
                            if frac == 0.0 {
                                continue;
                            }
                            let idx = spec.index(ix, iy);
                            for (k, s) in slices.iter().enumerate() {
                                per_slice[k] += frac * s[idx];
                            }
                        }
                    }
                    for &(s, e) in &windows {
                        let mass: f64 = per_slice
                            .iter()
                            .enumerate()
                            .map(|(k, &m)| {
                                let a = k as f64 * slice_len;
                                let b = a + slice_len;
                                let overlap = (e.min(b) - s.max(a)).max(0.0);
                                m * overlap / slice_len
                            })
                            .sum();
                        share.push(mass / total);
                    }
                }
            }
        }
    }

    Ok(Candidates {
        centres,
        radii,
        windows,
        horizon,
        share,
    })
}

/// Draws `n` events from the baseline density.
fn draw_null(
    baseline: &Baseline,
    cumulative: &[f64],
    region: &Region,
    horizon: f64,
    n: usize,
    rng: &mut RngStream,
) -> Vec<SpaceTimeEvent> {
    match baseline {
        Baseline::Uniform => (0..n)
            .map(|_| SpaceTimeEvent {
                x: rng.uniform_in(region.xmin, region.xmax),
                y: rng.uniform_in(region.ymin, region.ymax),
                t: rng.uniform_in(0.0, horizon),
            })
            .collect(),
        Baseline::Grid { spec, slices } => {
            let total = *cumulative.last().unwrap();
            let cells = spec.n_cells();
            let slice_len = horizon / slices.len() as f64;
            (0..n)
                .map(|_| {
                    let u = rng.uniform() * total;
                    let k = cumulative
                        .partition_point(|&c| c <= u)
                        .min(cumulative.len() - 1);
                    let (slice, cell) = (k / cells, k % cells);
                    let (ix, iy) = spec.coords(cell);
                    let b = spec.cell_bounds(ix, iy);
                    let t0 = slice as f64 * slice_len;
                    SpaceTimeEvent {
                        x: rng.uniform_in(b.xmin, b.xmax),
                        y: rng.uniform_in(b.ymin, b.ymax),
                        t: rng.uniform_in(t0, t0 + slice_len),
                    }
                })
                .collect()
        }
    }
}

/// Runs the scan and returns every candidate cylinder ranked by LLR,
/// highest first. Ties keep candidate order (centre, radius, window).
pub fn space_time_scan(
    events: &SpaceTimeEvents,
    baseline: &Baseline,
    config: &ScanConfig,
    rng: &mut RngStream,
) -> Result<Vec<ScanResult>> {
    if events.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    ensure(config.nsim >= MIN_SCAN_SIMULATIONS, || {
        format!(
            "scan needs nsim >= {MIN_SCAN_SIMULATIONS}, got {}",
            config.nsim
        )
    })?;
    let region = *events.region();
    let horizon = events.horizon();
    let candidates = build_candidates(&region, horizon, baseline, config)?;

    let n = events.len();
    let total = n as u64;
    let observed = candidates.counts(events.events());
    let llr = candidates.llrs(&observed, total);

    // skip the cumulative table entirely for a uniform baseline
    let cumulative: Vec<f64> = match baseline {
        Baseline::Uniform => Vec::new(),
        Baseline::Grid { slices, .. } => slices
            .iter()
            .flatten()
            .scan(0.0, |acc, &m| {
                *acc += m;
                Some(*acc)
            })
            .collect(),
    };

    let null_max: Vec<f64> = rng
        .split(config.nsim)
        .into_par_iter()
        .map(|mut stream| {
            let sim = draw_null(baseline, &cumulative, &region, horizon, n, &mut stream);
            let counts = candidates.counts(&sim);
            candidates
                .llrs(&counts, total)
                .into_iter()
                .fold(0.0, f64::max)
        })
        .collect();

    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| llr[b].total_cmp(&llr[a]));

    Ok(order
        .into_iter()
        .map(|i| {
            let exceed = null_max.iter().filter(|&&m| m >= llr[i]).count();
            ScanResult {
                cylinder: candidates.cylinder(i),
                observed: observed[i],
                expected: total as f64 * candidates.share[i],
                llr: llr[i],
                p_value: (1 + exceed) as f64 / (config.nsim + 1) as f64,
            }
        })
        .collect())
}
