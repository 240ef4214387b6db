use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn cross(o: &[f64; 2], a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// A simple polygon stored as its vertex ring (not closed: the last vertex
/// connects back to the first).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub vertices: Vec<[f64; 2]>,
}

impl Polygon {
    /// Signed shoelace area; positive for counterclockwise rings.
    pub fn signed_area(&self) -> f64 {
        let v = &self.vertices;
        let n = v.len();
        if n < 3 {
            return 0.0;
        }
        let mut s = 0.0;
        for i in 0..n {
            let (a, b) = (v[i], v[(i + 1) % n]);
            s += a[0] * b[1] - b[0] * a[1];
        }
        0.5 * s
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn edges(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Inside-or-on test for a convex ring of either orientation, with a
    /// boundary tolerance in length units.
    pub fn contains(&self, p: &[f64; 2], tol: f64) -> bool {
        let n = self.vertices.len();
        match n {
            0 => false,
            1 => dist(p, &self.vertices[0]) <= tol,
            2 => segment_distance(p, &self.vertices[0], &self.vertices[1]) <= tol,
            _ => {
                let area = self.signed_area();
                let perimeter: f64 = self.edges().map(|(a, b)| dist(&a, &b)).sum();
                if area.abs() <= 1e-12 * perimeter * perimeter {
                    return self.edges().any(|(a, b)| segment_distance(p, &a, &b) <= tol);
                }
                let sign = area.signum();
                self.edges().all(|(a, b)| {
                    let len = dist(&a, &b);
                    len == 0.0 || sign * cross(&a, &b, p) / len >= -tol
                })
            }
        }
    }

    /// Euclidean distance from `p` to the polygon region (zero inside).
    pub fn distance_to_point(&self, p: &[f64; 2]) -> f64 {
        if self.vertices.len() >= 3 && self.contains(p, 0.0) {
            return 0.0;
        }
        match self.vertices.len() {
            0 => f64::INFINITY,
            1 => dist(p, &self.vertices[0]),
            _ => self
                .edges()
                .map(|(a, b)| segment_distance(p, &a, &b))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Distance between two convex polygons (zero when they overlap).
    /// Degenerate rings (points, segments) are allowed on either side.
    pub fn distance_to(&self, other: &Polygon) -> f64 {
        if self.vertices.is_empty() || other.vertices.is_empty() {
            return f64::INFINITY;
        }
        if other.vertices.iter().any(|p| self.vertices.len() >= 3 && self.contains(p, 0.0))
            || self.vertices.iter().any(|p| other.vertices.len() >= 3 && other.contains(p, 0.0))
        {
            return 0.0;
        }
        let ring = |poly: &Polygon| -> Vec<([f64; 2], [f64; 2])> {
            if poly.vertices.len() == 1 {
                vec![(poly.vertices[0], poly.vertices[0])]
            } else {
                poly.edges().collect()
            }
        };
        let (ea, eb) = (ring(self), ring(other));
        let mut best = f64::INFINITY;
        for (a0, a1) in &ea {
            for (b0, b1) in &eb {
                best = best.min(segment_segment_distance(a0, a1, b0, b1));
            }
        }
        best
    }
}

fn dist(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

pub(crate) fn segment_distance(p: &[f64; 2], a: &[f64; 2], b: &[f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0);
    dist(p, &[a[0] + t * ab[0], a[1] + t * ab[1]])
}

fn segments_intersect(a0: &[f64; 2], a1: &[f64; 2], b0: &[f64; 2], b1: &[f64; 2]) -> bool {
    let d1 = cross(b0, b1, a0);
    let d2 = cross(b0, b1, a1);
    let d3 = cross(a0, a1, b0);
    let d4 = cross(a0, a1, b1);
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}

fn segment_segment_distance(a0: &[f64; 2], a1: &[f64; 2], b0: &[f64; 2], b1: &[f64; 2]) -> f64 {
    if segments_intersect(a0, a1, b0, b1) {
        return 0.0;
    }
    segment_distance(a0, b0, b1)
        .min(segment_distance(a1, b0, b1))
        .min(segment_distance(b0, a0, a1))
        .min(segment_distance(b1, a0, a1))
}

/// Convex hull by monotone chain: counterclockwise, starting at the
/// lexicographically smallest point, with collinear vertices removed.
pub fn convex_hull(points: &[[f64; 2]]) -> Result<Polygon> {
    if points.len() < 3 {
        return Err(Error::Degenerate(format!(
            "convex hull needs at least 3 points, got {}",
            points.len()
        )));
    }
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for p in iter {
            while hull.len() >= start + 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(*p);
        }
        hull.pop();
    }
    let poly = Polygon { vertices: hull };
    if poly.vertices.len() < 3 || !(poly.area() > 0.0) {
        return Err(Error::Degenerate("convex hull of collinear points".into()));
    }
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::oracle::oracle_hull_area;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn square_with_center() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]];
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.vertices.len(), 4);
        assert!((h.area() - 1.0).abs() < 1e-15);
        assert!(h.signed_area() > 0.0);
    }

    #[test]
    fn hexagon_kept() {
        let pts: Vec<[f64; 2]> = (0..6)
            .map(|k| {
                let a = k as f64 * std::f64::consts::PI / 3.0;
                [a.cos(), a.sin()]
            })
            .collect();
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.vertices.len(), 6);
        assert!((h.area() - 1.5 * 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn collinear_rejected() {
        let pts = [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]];
        assert!(matches!(convex_hull(&pts), Err(Error::Degenerate(_))));
        assert!(convex_hull(&[[0.0, 0.0], [1.0, 0.0]]).is_err());
    }

    #[test]
    fn collinear_boundary_points_removed() {
        let pts = [[0.0, 0.0], [0.5, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.5]];
        assert_eq!(convex_hull(&pts).unwrap().vertices.len(), 4);
    }

    #[test]
    fn disk_area_bounds_and_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut pts = Vec::new();
        while pts.len() < 1000 {
            let (x, y): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            if x * x + y * y <= 1.0 {
                pts.push([x, y]);
            }
        }
        let area = convex_hull(&pts).unwrap().area();
        let pi = std::f64::consts::PI;
        assert!(area <= pi && area >= pi * (1.0 - 10.0 / 1000.0 * 1000f64.ln()));
        let sample = &pts[..200];
        assert!((convex_hull(sample).unwrap().area() - oracle_hull_area(sample)).abs() < 1e-9);
    }

    #[test]
    fn polygon_distances() {
        let sq = Polygon {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        };
        let seg = Polygon {
            vertices: vec![[2.0, 0.0], [2.0, 1.0]],
        };
        assert!((sq.distance_to(&seg) - 1.0).abs() < 1e-12);
        let flat = Polygon {
            vertices: vec![[2.0, 0.0], [3.0, 0.0], [3.0, 0.0], [2.0, 0.0]],
        };
        assert!(!flat.contains(&[2.5, 1.0], 0.0));
        assert!((sq.distance_to(&flat) - 1.0).abs() < 1e-12);
        let crossing = Polygon {
            vertices: vec![[-1.0, 0.5], [2.0, 0.5]],
        };
        assert_eq!(sq.distance_to(&crossing), 0.0);
        assert_eq!(sq.distance_to_point(&[0.5, 0.5]), 0.0);
        assert!((sq.distance_to_point(&[0.5, 3.0]) - 2.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn hull_is_convex_ccw_and_encloses(coords in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..80)) {
            let pts: Vec<[f64; 2]> = coords.iter().map(|&(x, y)| [x, y]).collect();
            if let Ok(h) = convex_hull(&pts) {
                let n = h.vertices.len();
                for i in 0..n {
                    let c = cross(&h.vertices[i], &h.vertices[(i + 1) % n], &h.vertices[(i + 2) % n]);
                    prop_assert!(c > 0.0);
                }
                for p in &pts {
                    prop_assert!(h.contains(p, 1e-9));
                }
                prop_assert!((h.area() - oracle_hull_area(&pts)).abs() < 1e-9 * (1.0 + h.area()));
            }
        }
    }
}
