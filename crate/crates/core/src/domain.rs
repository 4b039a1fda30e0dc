//! Compact convex state spaces: closed intervals and convex polygons.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Interval { lo: f64, hi: f64 },
    /// Counter-clockwise vertex list of a convex polygon.
    Polygon { vertices: Vec<[f64; 2]> },
}

impl Domain {
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::NonFinite("interval end points".into()));
        }
        if lo >= hi {
            return Err(Error::EmptyInterior);
        }
        Ok(Domain::Interval { lo, hi })
    }

    /// Convex hull of `points`; fails if the hull has no interior.
    pub fn polygon_hull(points: &[[f64; 2]]) -> Result<Self> {
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("polygon points".into()));
        }
        let hull = convex_hull(points);
        if hull.len() < 3 || polygon_area(&hull) <= 1e-14 {
            return Err(Error::EmptyInterior);
        }
        Ok(Domain::Polygon { vertices: hull })
    }

    pub fn rectangle(lo: [f64; 2], hi: [f64; 2]) -> Result<Self> {
        Self::polygon_hull(&[lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]])
    }

    /// Re-validates a deserialized domain, normalizing polygon orientation.
    pub fn validated(self) -> Result<Self> {
        match self {
            Domain::Interval { lo, hi } => Self::interval(lo, hi),
            Domain::Polygon { vertices } => Self::polygon_hull(&vertices),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Polygon { .. } => 2,
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        match self {
            Domain::Interval { lo, hi } => x[0] >= lo - tol && x[0] <= hi + tol,
            Domain::Polygon { vertices } => edges(vertices).all(|(a, b)| {
                let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
                let len = (ex * ex + ey * ey).sqrt();
                let cross = ex * (x[1] - a[1]) - ey * (x[0] - a[0]);
                cross >= -tol * len
            }),
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Domain::Interval { lo, hi } => (vec![*lo], vec![*hi]),
            Domain::Polygon { vertices } => {
                let mut lo = vec![f64::INFINITY; 2];
                let mut hi = vec![f64::NEG_INFINITY; 2];
                for v in vertices {
                    for k in 0..2 {
                        lo[k] = lo[k].min(v[k]);
                        hi[k] = hi[k].max(v[k]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Euclidean projection onto the domain.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Domain::Interval { lo, hi } => vec![x[0].clamp(*lo, *hi)],
            Domain::Polygon { vertices } => {
                if self.contains(x, 0.0) {
                    return x.to_vec();
                }
                let mut best = vec![x[0], x[1]];
                let mut best_d = f64::INFINITY;
                for (a, b) in edges(vertices) {
                    let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
                    let t = (((x[0] - a[0]) * ex + (x[1] - a[1]) * ey) / (ex * ex + ey * ey))
                        .clamp(0.0, 1.0);
                    let p = [a[0] + t * ex, a[1] + t * ey];
                    let dist = (p[0] - x[0]).powi(2) + (p[1] - x[1]).powi(2);
                    if dist < best_d {
                        best_d = dist;
                        best = p.to_vec();
                    }
                }
                best
            }
        }
    }

    /// Distance from `x` (inside) to the boundary.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        match self {
            Domain::Interval { lo, hi } => (x[0] - lo).min(hi - x[0]),
            Domain::Polygon { vertices } => edges(vertices)
                .map(|(a, b)| {
                    let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
                    let len = (ex * ex + ey * ey).sqrt();
                    (ex * (x[1] - a[1]) - ey * (x[0] - a[0])) / len
                })
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// `sup { |w| : w ∈ W }`
    pub fn max_norm(&self) -> f64 {
        match self {
            Domain::Interval { lo, hi } => lo.abs().max(hi.abs()),
            Domain::Polygon { vertices } => vertices
                .iter()
                .map(|v| v[0].hypot(v[1]))
                .fold(0.0, f64::max),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Domain::Interval { lo, hi } => hi - lo,
            Domain::Polygon { vertices } => {
                let mut d = 0.0_f64;
                for a in vertices {
                    for b in vertices {
                        d = d.max((a[0] - b[0]).hypot(a[1] - b[1]));
                    }
                }
                d
            }
        }
    }
}

fn edges(v: &[[f64; 2]]) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
    (0..v.len()).map(move |i| (v[i], v[(i + 1) % v.len()]))
}

fn polygon_area(v: &[[f64; 2]]) -> f64 {
    0.5 * edges(v)
        .map(|(a, b)| a[0] * b[1] - a[1] * b[0])
        .sum::<f64>()
}

/// Andrew's monotone chain; counter-clockwise, collinear points dropped.
pub fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14);
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 1e-14 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 1e-14 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}
