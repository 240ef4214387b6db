use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{KdTree, PointCloud, Vector3};
use crate::error::{Error, Result};
use crate::linalg::principal_axes;
use crate::par;

/// Estimates a unit normal per point from the covariance of its `k` nearest
/// neighbours (plus itself), then orients normals consistently by propagating
/// signs along a minimum spanning tree of the kNN graph.
///
/// Each connected component is seeded at its lowest valid index, whose normal
/// is flipped to point up (or +x/+y for horizontal normals). Points whose
/// neighbourhood is collinear get an invalid normal.
pub fn estimate_normals(cloud: &PointCloud, k: usize) -> Result<PointCloud> {
    if k < 3 {
        return Err(Error::Precondition(format!("normal estimation needs k >= 3, got {k}")));
    }
    if cloud.len() < k + 1 {
        return Err(Error::Precondition(format!(
            "normal estimation with k = {k} needs at least {} points, cloud has {}",
            k + 1,
            cloud.len()
        )));
    }
    let pts = cloud.points();
    let tree = KdTree::new(pts);

    let local: Vec<(Vec<usize>, Option<Vector3>)> = par::map_range(pts.len(), |i| {
        let nn = tree.nearest(&pts[i], k + 1);
        let idx: Vec<usize> = nn.iter().map(|&(j, _)| j).collect();
        let axes = principal_axes(idx.iter().map(|&j| &pts[j]).collect::<Vec<_>>());
        let normal = axes.filter(|a| !a.is_degenerate()).map(|a| a.normal());
        (idx, normal)
    });

    let mut normals: Vec<Vector3> = local.iter().map(|(_, n)| n.unwrap_or(Vector3::z())).collect();
    let valid: Vec<bool> = local.iter().map(|(_, n)| n.is_some()).collect();

    // Symmetric adjacency over valid points.
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); pts.len()];
    for (i, (nbrs, _)) in local.iter().enumerate() {
        if !valid[i] {
            continue;
        }
        for &j in nbrs {
            if j != i && valid[j] {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }

    orient_by_mst(&mut normals, &valid, &adj);
    Ok(cloud.clone().with_normals_and_validity(normals, valid))
}

#[derive(PartialEq)]
struct Edge {
    weight: f64,
    to: usize,
    from: usize,
}

impl Eq for Edge {}

impl Ord for Edge {
    // Min-heap on (weight, to, from).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .weight
            .total_cmp(&self.weight)
            .then(other.to.cmp(&self.to))
            .then(other.from.cmp(&self.from))
    }
}

impl PartialOrd for Edge {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn orient_seed(n: &mut Vector3) {
    const TOL: f64 = 1e-9;
    let flip = if n.z.abs() > TOL {
        n.z < 0.0
    } else if n.x.abs() > TOL {
        n.x < 0.0
    } else {
        n.y < 0.0
    };
    if flip {
        *n = -*n;
    }
}

fn orient_by_mst(normals: &mut [Vector3], valid: &[bool], adj: &[Vec<usize>]) {
    let mut visited = vec![false; normals.len()];
    let mut heap = BinaryHeap::new();
    for seed in 0..normals.len() {
        if visited[seed] || !valid[seed] {
            continue;
        }
        orient_seed(&mut normals[seed]);
        visited[seed] = true;
        let push = |heap: &mut BinaryHeap<Edge>, normals: &[Vector3], visited: &[bool], from: usize| {
            for &to in &adj[from] {
                if !visited[to] {
                    heap.push(Edge {
                        weight: 1.0 - normals[from].dot(&normals[to]).abs(),
                        to,
                        from,
                    });
                }
            }
        };
        push(&mut heap, normals, &visited, seed);
        while let Some(e) = heap.pop() {
            if visited[e.to] {
                continue;
            }
            visited[e.to] = true;
            if normals[e.from].dot(&normals[e.to]) < 0.0 {
                normals[e.to] = -normals[e.to];
            }
            push(&mut heap, normals, &visited, e.to);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointcloud::Point3;

    fn grid(f: impl Fn(f64, f64) -> Point3, n: usize, pitch: f64) -> Vec<Point3> {
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| f(i as f64 * pitch, j as f64 * pitch))
            .collect()
    }

    fn angle_deg(a: &Vector3, b: &Vector3) -> f64 {
        a.dot(b).abs().min(1.0).acos().to_degrees()
    }

    #[test]
    fn horizontal_plane() {
        let c = PointCloud::new(grid(|a, b| Point3::new(a, b, 0.0), 30, 0.05)).unwrap();
        let c = estimate_normals(&c, 8).unwrap();
        for i in 0..c.len() {
            assert!(angle_deg(c.normal(i).unwrap(), &Vector3::z()) < 1.0);
        }
    }

    #[test]
    fn vertical_plane_oriented_consistently() {
        let c = PointCloud::new(grid(|a, b| Point3::new(2.0, a, b), 30, 0.05)).unwrap();
        let c = estimate_normals(&c, 8).unwrap();
        let first = *c.normal(0).unwrap();
        for i in 0..c.len() {
            let n = c.normal(i).unwrap();
            assert!(angle_deg(n, &Vector3::x()) < 1.0);
            assert!(n.dot(&first) > 0.0);
        }
    }

    #[test]
    fn collinear_neighbourhood_flagged() {
        let pts: Vec<Point3> = (0..20).map(|i| Point3::new(i as f64 * 0.1, 0.0, 0.0)).collect();
        let c = estimate_normals(&PointCloud::new(pts).unwrap(), 4).unwrap();
        assert_eq!(c.invalid_normal_count(), 20);
    }

    #[test]
    fn preconditions() {
        let c = PointCloud::new(vec![Point3::origin(); 5]).unwrap();
        assert!(estimate_normals(&c, 2).is_err());
        assert!(estimate_normals(&c, 8).is_err());
    }
}
