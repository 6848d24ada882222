//! Planar convex hulls (Andrew's monotone chain) and point-to-hull distance.

use alloc::vec::Vec;

pub type Point = [f64; 2];

#[inline]
fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Hull vertices in counter-clockwise order, collinear points dropped.
/// Degenerate inputs give one vertex (all points equal) or two (all collinear).
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }

    let mut hull: Vec<Point> = Vec::with_capacity(pts.len() + 1);
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    // last point repeats the first
    hull.pop();
    hull
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (ex, ey) = (p[0] - (a[0] + t * dx), p[1] - (a[1] + t * dy));
    libm::sqrt(ex * ex + ey * ey)
}

/// Euclidean distance from `p` to the convex polygon `hull` (as returned by
/// [`convex_hull`]); 0 inside. Empty hulls give infinity.
pub fn distance_to_hull(hull: &[Point], p: Point) -> f64 {
    match hull {
        [] => f64::INFINITY,
        [a] => segment_distance(p, *a, *a),
        [a, b] => segment_distance(p, *a, *b),
        _ => {
            let n = hull.len();
            let inside = (0..n).all(|i| cross(hull[i], hull[(i + 1) % n], p) >= 0.0);
            if inside {
                return 0.0;
            }
            (0..n)
                .map(|i| segment_distance(p, hull[i], hull[(i + 1) % n]))
                .fold(f64::INFINITY, f64::min)
        }
    }
}

/// Distance from `p` to the interval `[min, max]` of `values`.
pub fn distance_to_interval(values: impl IntoIterator<Item = f64>, p: f64) -> f64 {
    let (lo, hi) = values
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if p < lo {
        lo - p
    } else if p > hi {
        p - hi
    } else {
        0.0
    }
}
