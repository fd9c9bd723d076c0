use std::f64::consts::PI;
use std::sync::Arc;

use isoconf::field::{FnField, FnGradientField};
use isoconf::flow::{hitting_point, trace_to_level, FlowOptions, FlowStatus};
use isoconf::geometry::{directed_hausdorff, extract_contour, hausdorff, resample, Contour, GridSpec, Polyline};
use isoconf::models::TrueModel;
use isoconf::regions::{lebesgue_volume, membership_mask, Region};

fn circle(r: f64, n: usize) -> Contour {
    let pts = (0..n).map(|k| {
        let t = 2.0 * PI * k as f64 / n as f64;
        [r * t.cos(), r * t.sin()]
    });
    Contour::from_polylines(0.0, vec![Polyline::new(pts.collect(), true)])
}

#[test]
fn marching_squares_circle_length() {
    let field = FnField::new(2, |x: &[f64]| -(x[0] * x[0] + x[1] * x[1]));
    let grid = GridSpec::uniform(2, -2.0, 2.0, 256).unwrap();
    let ct = extract_contour(&field, &grid, -1.0).unwrap();
    assert_eq!(ct.polylines().len(), 1);
    assert!(ct.polylines()[0].closed);
    assert!((ct.total_length() - 2.0 * PI).abs() < 1e-3);
    for v in ct.vertices() {
        assert!((v[0].hypot(v[1]) - 1.0).abs() < 2e-4);
    }
}

#[test]
fn two_bumps_give_two_curves() {
    let field = FnField::new(2, |x: &[f64]| {
        let b = |cx: f64| (-((x[0] - cx).powi(2) + x[1] * x[1]) * 4.0).exp();
        b(-1.0) + b(1.0)
    });
    let grid = GridSpec::uniform(2, -2.5, 2.5, 200).unwrap();
    let ct = extract_contour(&field, &grid, 0.5).unwrap();
    assert_eq!(ct.polylines().len(), 2);
    assert!(ct.polylines().iter().all(|l| l.closed));
}

#[test]
fn resample_bounds_spacing() {
    let ct = resample(&circle(1.0, 12), 0.05, None);
    let line = &ct.polylines()[0];
    for k in 0..line.segment_count() {
        let (a, b) = line.segment(k);
        assert!((b[0] - a[0]).hypot(b[1] - a[1]) <= 0.05 + 1e-12);
    }
}

#[test]
fn concentric_circle_distances() {
    let (a, b) = (circle(1.0, 4096), circle(1.2, 4096));
    assert!((hausdorff(&a, &b).unwrap() - 0.2).abs() < 0.002);
    assert!((directed_hausdorff(&a, &b).unwrap() - 0.2).abs() < 0.002);
    let shifted = a.translated(&[0.3, 0.0]);
    assert!((hausdorff(&a, &shifted).unwrap() - 0.3).abs() < 1e-3);
}

#[test]
fn annulus_tube_volume() {
    let region = Region::tube(Arc::new(circle(2.0, 4096)), 0.5).unwrap();
    let grid = GridSpec::uniform(2, -3.0, 3.0, 512).unwrap();
    let want = PI * (2.5f64.powi(2) - 1.5f64.powi(2));
    let got = lebesgue_volume(&region, &grid).unwrap();
    assert!((got / want - 1.0).abs() < 0.02, "{got} vs {want}");
    let mask = membership_mask(&region, &grid).unwrap();
    assert!(!mask.touches_boundary());
}

#[allow(clippy::type_complexity)]
fn paraboloid() -> FnGradientField<impl Fn(&[f64]) -> f64 + Sync, impl Fn(&[f64], &mut [f64]) + Sync> {
    FnGradientField::new(
        2,
        |x: &[f64]| 1.0 - x[0] * x[0] - x[1] * x[1],
        |x: &[f64], g: &mut [f64]| {
            g[0] = -2.0 * x[0];
            g[1] = -2.0 * x[1];
        },
    )
}

#[test]
fn rk4_is_fourth_order_on_paraboloid() {
    let f = paraboloid();
    let x0 = [1.2, 0.5];
    let r0_sq = 1.69;
    let c = 0.95;
    let error_at_half = |frac: f64| {
        let opts = FlowOptions {
            step_frac: frac,
            level_tol: 1e-13,
            ..FlowOptions::default()
        };
        let tr = trace_to_level(&f, &x0, c, &opts).unwrap();
        assert_eq!(tr.status, FlowStatus::Hit);
        let mid = (tr.times.len() - 1) / 2;
        let t = tr.times[mid];
        let want = (r0_sq - t).sqrt();
        let p = &tr.positions[mid];
        (p[0].hypot(p[1]) - want).abs()
    };
    let errs: Vec<f64> = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0]
        .iter()
        .map(|&s| error_at_half(s))
        .collect();
    for w in errs.windows(2) {
        assert!(w[0] / w[1] >= 8.0, "{errs:?}");
    }
}

#[test]
fn hitting_time_equals_height_gap() {
    let f = paraboloid();
    for (x0, c) in [([1.0, 1.0], 0.5), ([0.6, -0.3], -2.0), ([-1.5, 0.3], 0.9)] {
        let tr = trace_to_level(&f, &x0, c, &FlowOptions::default()).unwrap();
        assert_eq!(tr.status, FlowStatus::Hit);
        let f0 = 1.0 - x0[0] * x0[0] - x0[1] * x0[1];
        assert!((tr.theta - (c - f0)).abs() < 1e-15);
        for (t, v) in tr.times.iter().zip(&tr.values) {
            assert!((v - f0 - t).abs() <= 1e-6 * tr.theta.abs(), "t={t} v={v}");
        }
        let hit = hitting_point(&tr).unwrap();
        assert!(!hit.fallback);
        assert!((1.0 - hit.point[0].powi(2) - hit.point[1].powi(2) - c).abs() < 1e-8);
    }
}

#[test]
fn flow_stops_at_critical_point() {
    let f = paraboloid();
    let tr = trace_to_level(&f, &[0.5, 0.0], 1.5, &FlowOptions::default()).unwrap();
    assert_ne!(tr.status, FlowStatus::Hit);
    let hit = hitting_point(&tr).unwrap();
    assert!(hit.fallback);
}

#[test]
fn elliptic_truth_matches_level() {
    let m = TrueModel::Elliptic { a: 2.0 };
    let c = m.level_of_probability(0.5).unwrap();
    let ct = m.true_contour(c, 512).unwrap();
    for v in ct.vertices() {
        assert!((m.pdf(&v) - c).abs() < 1e-14);
    }
    let grid = GridSpec::uniform(2, -4.0, 4.0, 400).unwrap();
    let traced = extract_contour(&FnField::new(2, move |x: &[f64]| m.pdf(x)), &grid, c).unwrap();
    assert!(hausdorff(&ct, &traced).unwrap() < 5e-3);
}
