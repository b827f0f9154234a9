use crate::types::{Point, Region};

/// Exact area of the intersection of a disc with an axis-aligned rectangle.
///
/// The chord height is integrated across x in closed form. Between the
/// abscissae where the circle crosses `y = ymin` or `y = ymax`, the clipped
/// top and bottom edges are each either a rectangle side or an arc, so every
/// piece has an exact antiderivative.
pub fn disc_rect_area(center: Point, radius: f64, rect: &Region) -> f64 {
    if !(radius > 0.0) {
        return 0.0;
    }
    let r = radius;
    let (x0, x1) = (rect.xmin - center.x, rect.xmax - center.x);
    let (y0, y1) = (rect.ymin - center.y, rect.ymax - center.y);
    let a = x0.max(-r);
    let b = x1.min(r);
    if a >= b || y0 >= r || y1 <= -r {
        return 0.0;
    }

    let r2 = r * r;
    // (r - x)(r + x) keeps the chord accurate near tangency
    let arc = |x: f64| ((r - x) * (r + x)).max(0.0).sqrt();
    // antiderivative of sqrt(r^2 - x^2); atan2 stays well conditioned at |x| = r
    let prim = |x: f64| {
        let xc = x.clamp(-r, r);
        let h = arc(xc);
        0.5 * (xc * h + r2 * xc.atan2(h))
    };

    let mut cuts = vec![a, b];
    for y in [y0, y1] {
        if y.abs() < r {
            let c = arc(y);
            for x in [-c, c] {
                if x > a && x < b {
                    cuts.push(x);
                }
            }
        }
    }
    cuts.sort_by(f64::total_cmp);

    let mut area = 0.0;
    for w in cuts.windows(2) {
        let (u, v) = (w[0], w[1]);
        if v <= u {
            continue;
        }
        let h = arc(0.5 * (u + v));
        let top_is_side = y1 < h;
        let bottom_is_side = y0 > -h;
        let top = if top_is_side { y1 } else { h };
        let bottom = if bottom_is_side { y0 } else { -h };
        if top <= bottom {
            continue;
        }
        let arc_int = prim(v) - prim(u);
        let top_int = if top_is_side { y1 * (v - u) } else { arc_int };
        let bottom_int = if bottom_is_side { y0 * (v - u) } else { -arc_int };
        area += top_int - bottom_int;
    }
    area.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    // midpoint-rule chord integration, independent of the closed form
    fn numeric(center: Point, r: f64, rect: &Region) -> f64 {
        let steps = 200_000;
        let dx = (rect.xmax - rect.xmin) / steps as f64;
        (0..steps)
            .map(|i| {
                let x = rect.xmin + (i as f64 + 0.5) * dx - center.x;
                if x.abs() >= r {
                    return 0.0;
                }
                let h = (r * r - x * x).sqrt();
                let top = (center.y + h).min(rect.ymax);
                let bot = (center.y - h).max(rect.ymin);
                (top - bot).max(0.0) * dx
            })
            .sum()
    }

    #[test]
    fn full_disc_inside() {
        let a = disc_rect_area(Point::new(0.5, 0.5), 0.2, &Region::unit_square());
        assert!((a - PI * 0.04).abs() < 1e-14);
    }

    #[test]
    fn half_and_quarter_discs() {
        let sq = Region::unit_square();
        let half = disc_rect_area(Point::new(0.0, 0.5), 0.2, &sq);
        assert!((half - PI * 0.02).abs() < 1e-14);
        let quarter = disc_rect_area(Point::new(0.0, 0.0), 0.2, &sq);
        assert!((quarter - PI * 0.01).abs() < 1e-14);
    }

    #[test]
    fn rectangle_inside_disc() {
        let a = disc_rect_area(Point::new(0.5, 0.5), 10.0, &Region::unit_square());
        assert!((a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_is_zero() {
        assert_eq!(disc_rect_area(Point::new(3.0, 3.0), 0.5, &Region::unit_square()), 0.0);
        assert_eq!(disc_rect_area(Point::new(0.5, 0.5), 0.0, &Region::unit_square()), 0.0);
    }

    #[test]
    fn matches_numeric_integration() {
        let cases = [
            (Point::new(0.1, 0.9), 0.3, Region::unit_square()),
            (Point::new(0.5, -0.1), 0.35, Region::new(0.2, 0.6, 0.0, 0.1).unwrap()),
            (Point::new(1.05, 0.5), 0.2, Region::new(0.9, 1.0, 0.45, 0.52).unwrap()),
            (Point::new(0.37, 0.62), 0.15, Region::new(0.3, 0.4, 0.6, 0.7).unwrap()),
            (Point::new(0.0, 0.0), 1.3, Region::new(-0.5, 1.5, 0.2, 0.9).unwrap()),
        ];
        for (c, r, rect) in cases {
            let exact = disc_rect_area(c, r, &rect);
            let approx = numeric(c, r, &rect);
            assert!((exact - approx).abs() < 1e-8, "{c:?} {r} {rect:?}: {exact} vs {approx}");
        }
    }

    #[test]
    fn partition_of_region_sums_to_whole() {
        let sq = Region::unit_square();
        let spec = crate::types::GridSpec::new(sq, 7, 5).unwrap();
        let c = Point::new(0.33, 0.71);
        let total: f64 = (0..5)
            .flat_map(|iy| (0..7).map(move |ix| (ix, iy)))
            .map(|(ix, iy)| disc_rect_area(c, 0.4, &spec.cell_bounds(ix, iy)))
            .sum();
        assert!((total - disc_rect_area(c, 0.4, &sq)).abs() < 1e-12);
    }

    #[test]
    fn near_tangent_cells_keep_precision() {
        // the disc touches cell edges up to one ulp of rounding
        let spec = crate::types::GridSpec::new(Region::unit_square(), 4, 4).unwrap();
        let c = Point::new(0.1 + 0.2, 0.1 + 0.2);
        let total: f64 = (0..16)
            .map(|i| {
                let (ix, iy) = spec.coords(i);
                disc_rect_area(c, 0.2, &spec.cell_bounds(ix, iy))
            })
            .sum();
        assert!((total - PI * 0.04).abs() < 1e-15);
    }
}
