//! Slow, independent reimplementations used to cross-check the fast paths.

use std::collections::{BTreeMap, BTreeSet};

use crate::pointcloud::Point3;

fn cross(o: &[f64; 2], a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Convex hull area by exhaustive edge testing: a directed pair `(i, j)` is a
/// counterclockwise hull edge when no point lies to its right and every
/// point on its line lies between `i` and `j`. O(n³). Zero for degenerate
/// input.
pub fn oracle_hull_area(points: &[[f64; 2]]) -> f64 {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    let n = pts.len();
    let mut twice_area = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (a, b) = (pts[i], pts[j]);
            let len2 = (b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2);
            let is_edge = pts.iter().all(|p| {
                let c = cross(&a, &b, p);
                if c < 0.0 {
                    return false;
                }
                if c > 0.0 {
                    return true;
                }
                let t = ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) / len2;
                (0.0..=1.0).contains(&t)
            });
            if is_edge {
                twice_area += a[0] * b[1] - b[0] * a[1];
            }
        }
    }
    // A fully collinear set yields both directions of the same edge.
    (0.5 * twice_area).abs()
}

/// Population standard deviation by the two-pass formula.
pub fn oracle_sigma(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

/// Band index for each axis coordinate by scanning the half-open intervals
/// `[s0 + k w, s0 + (k + 1) w)`; values at or past the end go to the last
/// band, values before `s0` get `None`.
pub fn oracle_partition(s: &[f64], s0: f64, width: f64, bands: usize) -> Vec<Option<usize>> {
    s.iter()
        .map(|&x| {
            if x < s0 {
                return None;
            }
            for k in 0..bands {
                let lo = s0 + k as f64 * width;
                let hi = s0 + (k + 1) as f64 * width;
                if lo <= x && x < hi {
                    return Some(k);
                }
            }
            Some(bands - 1)
        })
        .collect()
}

/// Brute-force scene membership over labeled points. For each street label,
/// the facade labels whose centroid z is at least the street centroid z and
/// whose closest plan-view point pair is within `radius`.
pub fn oracle_adjacency(
    points: &[Point3],
    labels: &[i32],
    streets: &[i32],
    facades: &[i32],
    radius: f64,
) -> BTreeMap<i32, BTreeSet<i32>> {
    let members = |label: i32| -> Vec<Point3> {
        points
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == label)
            .map(|(p, _)| *p)
            .collect()
    };
    let mean_z = |pts: &[Point3]| pts.iter().map(|p| p.z).sum::<f64>() / pts.len() as f64;
    let facade_points: Vec<(i32, Vec<Point3>)> = facades.iter().map(|&f| (f, members(f))).collect();
    let mut out = BTreeMap::new();
    for &s in streets {
        let sp = members(s);
        let sz = mean_z(&sp);
        let r2 = radius * radius;
        let adjacent: BTreeSet<i32> = facade_points
            .iter()
            .filter(|(_, fp)| !fp.is_empty() && mean_z(fp) >= sz)
            .filter(|(_, fp)| {
                fp.iter()
                    .any(|a| sp.iter().any(|b| (a.x - b.x).powi(2) + (a.y - b.y).powi(2) <= r2))
            })
            .map(|(f, _)| *f)
            .collect();
        out.insert(s, adjacent);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_area_of_square_with_interior_and_edge_points() {
        let pts = [[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0], [1.0, 1.0], [1.0, 0.0]];
        assert_eq!(oracle_hull_area(&pts), 4.0);
        assert_eq!(oracle_hull_area(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]), 0.0);
    }

    #[test]
    fn sigma_closed_form() {
        assert_eq!(oracle_sigma(&[2.0, 4.0]), 1.0);
        assert_eq!(oracle_sigma(&[6.0, 6.0, 6.0]), 0.0);
    }

    #[test]
    fn partition_edges() {
        let got = oracle_partition(&[-0.1, 0.0, 0.49, 0.5, 1.0, 1.2], 0.0, 0.5, 2);
        assert_eq!(got, vec![None, Some(0), Some(0), Some(1), Some(1), Some(1)]);
    }
}
