//! Distance-based pattern statistics backed by a bucket grid.
//!
//! Every distance is computed by [`Point::distance`], and minima and counts do
//! not depend on visiting order, so results match a brute-force double loop
//! bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::types::{GridSpec, Point, SpatialPattern};

/// Uniform bucket grid over a point set for nearest-neighbour and fixed-radius
/// queries.
#[derive(Debug, Clone)]
pub struct PointIndex<'a> {
    points: &'a [Point],
    x0: f64,
    y0: f64,
    cell: f64,
    nx: usize,
    ny: usize,
    // bucket b holds order[start[b]..start[b + 1]]
    start: Vec<usize>,
    order: Vec<usize>,
}

impl<'a> PointIndex<'a> {
    pub fn new(points: &'a [Point]) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in points {
            x0 = x0.min(p.x);
            x1 = x1.max(p.x);
            y0 = y0.min(p.y);
            y1 = y1.max(p.y);
        }
        if points.is_empty() {
            (x0, x1, y0, y1) = (0.0, 0.0, 0.0, 0.0);
        }
        let w = (x1 - x0).max(f64::MIN_POSITIVE);
        let h = (y1 - y0).max(f64::MIN_POSITIVE);
        // about two points per bucket, capped so degenerate spreads stay small
        let target = (points.len() as f64 / 2.0).max(1.0);
        let mut cell = (w * h / target).sqrt();
        if !(cell > 0.0) || !cell.is_finite() {
            cell = w.max(h);
        }
        let nx = ((w / cell).ceil() as usize).clamp(1, 4096);
        let ny = ((h / cell).ceil() as usize).clamp(1, 4096);
        let cell = (w / nx as f64).max(h / ny as f64);

        let mut index = Self {
            points,
            x0,
            y0,
            cell,
            nx,
            ny,
            start: vec![0; nx * ny + 1],
            order: vec![0; points.len()],
        };
        let buckets: Vec<usize> = points.iter().map(|&p| index.bucket_of(p)).collect();
        for &b in &buckets {
            index.start[b + 1] += 1;
        }
        for b in 0..nx * ny {
            index.start[b + 1] += index.start[b];
        }
        let mut fill = index.start.clone();
        for (i, &b) in buckets.iter().enumerate() {
            index.order[fill[b]] = i;
            fill[b] += 1;
        }
        index
    }

    fn axis(&self, v: f64, origin: f64, n: usize) -> isize {
        let i = ((v - origin) / self.cell).floor();
        if i.is_nan() {
            0
        } else {
            (i.max(-1.0).min(n as f64)) as isize
        }
    }

    fn bucket_of(&self, p: Point) -> usize {
        let ix = self.axis(p.x, self.x0, self.nx).clamp(0, self.nx as isize - 1) as usize;
        let iy = self.axis(p.y, self.y0, self.ny).clamp(0, self.ny as isize - 1) as usize;
        iy * self.nx + ix
    }

    fn bucket(&self, ix: usize, iy: usize) -> &[usize] {
        let b = iy * self.nx + ix;
        &self.order[self.start[b]..self.start[b + 1]]
    }

    /// Distance from `q` to the nearest indexed point other than `exclude`,
    /// or `None` when no such point exists.
    pub fn nearest(&self, q: Point, exclude: Option<usize>) -> Option<f64> {
        let available = self.points.len() - usize::from(exclude.is_some());
        if available == 0 {
            return None;
        }
        let qx = self.axis(q.x, self.x0, self.nx);
        let qy = self.axis(q.y, self.y0, self.ny);
        let max_ring = (self.nx.max(self.ny) as isize) + 2;
        let mut best = f64::INFINITY;
        for ring in 0..=max_ring {
            for (ix, iy) in ring_cells(qx, qy, ring) {
                if ix < 0 || iy < 0 || ix >= self.nx as isize || iy >= self.ny as isize {
                    continue;
                }
                for &j in self.bucket(ix as usize, iy as usize) {
                    if Some(j) == exclude {
                        continue;
                    }
                    let d = q.distance(self.points[j]);
                    if d < best {
                        best = d;
                    }
                }
            }
            // every bucket in ring + 1 or beyond is at least ring cells away
            if best <= ring as f64 * self.cell {
                break;
            }
        }
        Some(best)
    }

    /// Distances from `q` to every indexed point (except `exclude`) within
    /// `radius`, unsorted.
    pub fn within(&self, q: Point, radius: f64, exclude: Option<usize>, out: &mut Vec<f64>) {
        if self.points.is_empty() {
            return;
        }
        let lo_x = self.axis(q.x - radius, self.x0, self.nx).max(0);
        let hi_x = self.axis(q.x + radius, self.x0, self.nx).min(self.nx as isize - 1);
        let lo_y = self.axis(q.y - radius, self.y0, self.ny).max(0);
        let hi_y = self.axis(q.y + radius, self.y0, self.ny).min(self.ny as isize - 1);
        for iy in lo_y..=hi_y {
            for ix in lo_x..=hi_x {
                for &j in self.bucket(ix as usize, iy as usize) {
                    if Some(j) == exclude {
                        continue;
                    }
                    let d = q.distance(self.points[j]);
                    if d <= radius {
                        out.push(d);
                    }
                }
            }
        }
    }

    pub fn count_within(&self, q: Point, radius: f64) -> usize {
        let mut buf = Vec::new();
        self.within(q, radius, None, &mut buf);
        buf.len()
    }
}

fn ring_cells(cx: isize, cy: isize, ring: isize) -> impl Iterator<Item = (isize, isize)> {
    let r = ring;
    let (top_bottom, sides): (Vec<_>, Vec<_>) = if r == 0 {
        (vec![(cx, cy)], vec![])
    } else {
        let tb = (-r..=r).flat_map(move |dx| [(cx + dx, cy - r), (cx + dx, cy + r)]);
        let sd = (-r + 1..r).flat_map(move |dy| [(cx - r, cy + dy), (cx + r, cy + dy)]);
        (tb.collect(), sd.collect())
    };
    top_bottom.into_iter().chain(sides)
}

pub(crate) fn check_radii(radii: &[f64]) -> Result<()> {
    ensure(!radii.is_empty(), || "at least one radius is required".into())?;
    ensure(radii.iter().all(|r| r.is_finite() && *r >= 0.0), || {
        "radii must be finite and non-negative".into()
    })?;
    ensure(radii.windows(2).all(|w| w[0] <= w[1]), || {
        "radii must be ascending".into()
    })
}

fn require_points(pattern: &SpatialPattern, needed: usize) -> Result<()> {
    if pattern.len() < needed {
        return Err(Error::InsufficientData {
            needed,
            got: pattern.len(),
        });
    }
    Ok(())
}

/// Distance from each event to its nearest other event, in input order.
pub fn nearest_neighbour_distances(pattern: &SpatialPattern) -> Result<Vec<f64>> {
    require_points(pattern, 2)?;
    let pts = pattern.points();
    let index = PointIndex::new(pts);
    Ok(pts
        .iter()
        .enumerate()
        .map(|(i, &p)| index.nearest(p, Some(i)).expect("at least two points"))
        .collect())
}

fn ecdf_at(sorted: &[f64], radii: &[f64]) -> Vec<f64> {
    let n = sorted.len() as f64;
    radii
        .iter()
        .map(|&r| sorted.partition_point(|&d| d <= r) as f64 / n)
        .collect()
}

/// Event-to-nearest-event distance CDF.
pub fn g_function(pattern: &SpatialPattern, radii: &[f64]) -> Result<Vec<f64>> {
    check_radii(radii)?;
    let mut nn = nearest_neighbour_distances(pattern)?;
    nn.sort_by(f64::total_cmp);
    Ok(ecdf_at(&nn, radii))
}

/// Distance from each probe (cell centre of `probe_spec`) to its nearest event.
pub fn empty_space_distances(pattern: &SpatialPattern, probe_spec: &GridSpec) -> Result<Vec<f64>> {
    require_points(pattern, 1)?;
    let index = PointIndex::new(pattern.points());
    Ok(probe_spec
        .centers()
        .into_iter()
        .map(|q| index.nearest(q, None).expect("non-empty pattern"))
        .collect())
}

/// Empty-space CDF over a deterministic probe grid.
pub fn f_function(pattern: &SpatialPattern, probe_spec: &GridSpec, radii: &[f64]) -> Result<Vec<f64>> {
    check_radii(radii)?;
    let mut d = empty_space_distances(pattern, probe_spec)?;
    d.sort_by(f64::total_cmp);
    Ok(ecdf_at(&d, radii))
}

/// Mean distance from each event to its nearest neighbour.
pub fn mean_min_distance(pattern: &SpatialPattern) -> Result<f64> {
    let nn = nearest_neighbour_distances(pattern)?;
    Ok(nn.iter().sum::<f64>() / nn.len() as f64)
}

/// Nearest-neighbour index: observed mean nearest-neighbour distance over the
/// CSR expectation `1 / (2 sqrt(n / area))`. 0 when all points coincide, about
/// 2.149 for a hexagonal lattice.
pub fn nni(pattern: &SpatialPattern) -> Result<f64> {
    let d = mean_min_distance(pattern)?;
    Ok(d * 2.0 * pattern.intensity().sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeCorrection {
    #[default]
    None,
    /// Average only over events farther than `d` from the region boundary.
    Border,
}

impl std::str::FromStr for EdgeCorrection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "border" => Ok(Self::Border),
            other => Err(Error::Parameter(format!(
                "unknown edge correction '{other}' (expected none|border)"
            ))),
        }
    }
}

/// Ripley's K: mean number of other events within `d` of an event, divided by
/// `n / area`. With border correction a radius with no qualifying events is
/// `None`.
pub fn ripleys_k(pattern: &SpatialPattern, radii: &[f64], correction: EdgeCorrection) -> Result<Vec<Option<f64>>> {
    check_radii(radii)?;
    require_points(pattern, 2)?;
    let pts = pattern.points();
    let region = pattern.region();
    let lambda = pattern.intensity();
    let r_max = *radii.last().unwrap();
    let index = PointIndex::new(pts);

    let mut per_point: Vec<Vec<f64>> = Vec::with_capacity(pts.len());
    let mut buf = Vec::new();
    for (i, &p) in pts.iter().enumerate() {
        buf.clear();
        index.within(p, r_max, Some(i), &mut buf);
        buf.sort_by(f64::total_cmp);
        per_point.push(buf.clone());
    }
    let edge: Vec<f64> = pts.iter().map(|&p| region.distance_to_boundary(p)).collect();

    Ok(radii
        .iter()
        .map(|&r| {
            let mut total = 0usize;
            let mut used = 0usize;
            for (i, near) in per_point.iter().enumerate() {
                if correction == EdgeCorrection::Border && !(edge[i] > r) {
                    continue;
                }
                total += near.partition_point(|&d| d <= r);
                used += 1;
            }
            (used > 0).then(|| total as f64 / used as f64 / lambda)
        })
        .collect())
}
