//! Distance-only statistics under rigid motions and scaling.

use pointproc::spatial::{g_function, mean_min_distance, nni, ripleys_k, EdgeCorrection};
use pointproc::{Point, Region, SpatialPattern};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * (1.0 + a.abs().max(b.abs()))
}

// points in a disc of radius 1 about the origin, region [-2, 2]^2
fn disc_points() -> impl Strategy<Value = Vec<(f64, f64)>> {
    proptest::collection::vec((0.0f64..1.0, 0.0f64..std::f64::consts::TAU), 2..150).prop_map(|v| {
        v.into_iter()
            .map(|(r, a)| (r.sqrt() * a.cos(), r.sqrt() * a.sin()))
            .collect()
    })
}

fn make(pts: &[(f64, f64)], region: Region) -> SpatialPattern {
    SpatialPattern::new(pts.iter().map(|&(x, y)| Point::new(x, y)).collect(), region).unwrap()
}

fn base_region() -> Region {
    Region::new(-2.0, 2.0, -2.0, 2.0).unwrap()
}

// no g/k radius within TOL of an observed distance, so ties cannot flip
fn radii_away_from(pts: &[(f64, f64)]) -> Vec<f64> {
    let mut d = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            d.push(((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2)).sqrt());
        }
    }
    (1..40)
        .map(|i| i as f64 * 0.025)
        .filter(|r| d.iter().all(|x| (x - r).abs() > 1e-7))
        .collect()
}

fn curves_close(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| close(*x, *y))
}

fn k_none(p: &SpatialPattern, radii: &[f64]) -> Vec<f64> {
    ripleys_k(p, radii, EdgeCorrection::None)
        .unwrap()
        .into_iter()
        .map(Option::unwrap)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn translation(pts in disc_points(), dx in -50.0f64..50.0, dy in -50.0f64..50.0) {
        let radii = radii_away_from(&pts);
        prop_assume!(!radii.is_empty());
        let a = make(&pts, base_region());
        let moved: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x + dx, y + dy)).collect();
        let r = base_region();
        let b = make(&moved, Region::new(r.xmin + dx, r.xmax + dx, r.ymin + dy, r.ymax + dy).unwrap());
        prop_assert!(close(mean_min_distance(&a).unwrap(), mean_min_distance(&b).unwrap()));
        prop_assert!(close(nni(&a).unwrap(), nni(&b).unwrap()));
        prop_assert!(curves_close(&g_function(&a, &radii).unwrap(), &g_function(&b, &radii).unwrap()));
        prop_assert!(curves_close(&k_none(&a, &radii), &k_none(&b, &radii)));
    }

    #[test]
    fn rotation(pts in disc_points(), theta in 0.0f64..std::f64::consts::TAU) {
        let radii = radii_away_from(&pts);
        prop_assume!(!radii.is_empty());
        let (s, c) = theta.sin_cos();
        let a = make(&pts, base_region());
        let rotated: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (c * x - s * y, s * x + c * y)).collect();
        let b = make(&rotated, base_region());
        prop_assert!(close(mean_min_distance(&a).unwrap(), mean_min_distance(&b).unwrap()));
        prop_assert!(close(nni(&a).unwrap(), nni(&b).unwrap()));
        prop_assert!(curves_close(&g_function(&a, &radii).unwrap(), &g_function(&b, &radii).unwrap()));
        prop_assert!(curves_close(&k_none(&a, &radii), &k_none(&b, &radii)));
    }

    #[test]
    fn scaling(pts in disc_points(), factor in 0.01f64..100.0) {
        let a = make(&pts, base_region());
        let scaled: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x * factor, y * factor)).collect();
        let r = base_region();
        let b = make(
            &scaled,
            Region::new(r.xmin * factor, r.xmax * factor, r.ymin * factor, r.ymax * factor).unwrap(),
        );
        let da = mean_min_distance(&a).unwrap();
        prop_assert!(close(mean_min_distance(&b).unwrap(), factor * da));
        prop_assert!(close(nni(&a).unwrap(), nni(&b).unwrap()));
    }
}
