use std::collections::HashMap;

use crate::pointcloud::{PointCloud, Vector3};

/// An orthonormal pair spanning the plane with normal `n`.
pub fn plane_basis(n: &Vector3) -> (Vector3, Vector3) {
    let helper = if n.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let u = n.cross(&helper).normalize();
    let v = n.cross(&u);
    (u, v)
}

struct DisjointSet {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a as usize] < self.size[b as usize] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b as usize] = a;
        self.size[a as usize] += self.size[b as usize];
    }
}

/// Positions (into `coords`) of the largest set in which points are chained
/// by neighbours at most `radius` apart. Ties go to the component containing
/// the lowest position. Output is ascending.
pub fn largest_component_2d(coords: &[[f64; 2]], radius: f64) -> Vec<usize> {
    if coords.is_empty() {
        return Vec::new();
    }
    let cell = |p: &[f64; 2]| ((p[0] / radius).floor() as i64, (p[1] / radius).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<u32>> = HashMap::new();
    for (i, p) in coords.iter().enumerate() {
        grid.entry(cell(p)).or_default().push(i as u32);
    }
    let r2 = radius * radius;
    let mut ds = DisjointSet::new(coords.len());
    for (i, p) in coords.iter().enumerate() {
        let (cx, cy) = cell(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(bucket) = grid.get(&(cx + dx, cy + dy)) {
                    for &j in bucket {
                        if (j as usize) > i {
                            let q = &coords[j as usize];
                            let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
                            if d2 <= r2 {
                                ds.union(i as u32, j);
                            }
                        }
                    }
                }
            }
        }
    }
    // Roots in first-seen order; the first root to reach the max size wins.
    let mut best_root = ds.find(0);
    let mut best_size = ds.size[best_root as usize];
    for i in 1..coords.len() as u32 {
        let r = ds.find(i);
        let s = ds.size[r as usize];
        if s > best_size {
            best_root = r;
            best_size = s;
        }
    }
    (0..coords.len()).filter(|&i| ds.find(i as u32) == best_root).collect()
}

/// Largest connected subset of `inliers` after projection onto the plane
/// with normal `normal`, using neighbour radius `radius`. Returns cloud
/// indices in ascending order.
pub fn connected_component(cloud: &PointCloud, inliers: &[usize], normal: &Vector3, radius: f64) -> Vec<usize> {
    let (u, v) = plane_basis(normal);
    let coords: Vec<[f64; 2]> = inliers
        .iter()
        .map(|&i| {
            let p = cloud.point(i).coords;
            [p.dot(&u), p.dot(&v)]
        })
        .collect();
    let mut out: Vec<usize> = largest_component_2d(&coords, radius)
        .into_iter()
        .map(|k| inliers[k])
        .collect();
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointcloud::Point3;
    use proptest::prelude::*;

    /// Brute-force union-find on all pairwise distances.
    fn oracle_components(coords: &[[f64; 2]], radius: f64) -> Vec<Vec<usize>> {
        let n = coords.len();
        let mut label: Vec<usize> = (0..n).collect();
        loop {
            let mut changed = false;
            for i in 0..n {
                for j in 0..n {
                    let d2 = (coords[i][0] - coords[j][0]).powi(2) + (coords[i][1] - coords[j][1]).powi(2);
                    if d2 <= radius * radius && label[j] < label[i] {
                        label[i] = label[j];
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for (i, l) in label.into_iter().enumerate() {
            groups.entry(l).or_default().push(i);
        }
        groups.into_values().collect()
    }

    fn square(x0: f64, n: usize, pitch: f64) -> Vec<[f64; 2]> {
        (0..n)
            .flat_map(|i| (0..n).map(move |j| [x0 + i as f64 * pitch, j as f64 * pitch]))
            .collect()
    }

    #[test]
    fn far_patches_keep_larger() {
        let mut pts = square(0.0, 10, 0.05);
        let big = square(10.0, 20, 0.05);
        pts.extend(&big);
        let comp = largest_component_2d(&pts, 0.15);
        assert_eq!(comp.len(), 400);
        assert!(comp.iter().all(|&i| i >= 100));
    }

    #[test]
    fn single_patch_whole() {
        let pts = square(0.0, 15, 0.05);
        assert_eq!(largest_component_2d(&pts, 0.15).len(), 225);
    }

    #[test]
    fn l_shape_is_one_component() {
        // L-shaped patch at 0.04 m pitch, r = 0.05, c = 3.
        let mut pts = Vec::new();
        for i in 0..50 {
            for j in 0..10 {
                pts.push([i as f64 * 0.04, j as f64 * 0.04]);
            }
        }
        for i in 0..10 {
            for j in 10..50 {
                pts.push([i as f64 * 0.04, j as f64 * 0.04]);
            }
        }
        let oracle = oracle_components(&pts, 0.15);
        assert_eq!(oracle.len(), 1);
        assert_eq!(largest_component_2d(&pts, 0.15).len(), pts.len());
    }

    #[test]
    fn projects_through_cloud() {
        let pts: Vec<Point3> = square(0.0, 10, 0.05)
            .into_iter()
            .chain(square(5.0, 5, 0.05))
            .map(|p| Point3::new(p[0], 3.0, p[1]))
            .collect();
        let cloud = PointCloud::new(pts).unwrap();
        let all: Vec<usize> = (0..cloud.len()).collect();
        let comp = connected_component(&cloud, &all, &Vector3::y(), 0.15);
        assert_eq!(comp, (0..100).collect::<Vec<_>>());
    }

    proptest! {
        #[test]
        fn matches_brute_force(coords in proptest::collection::vec((0.0f64..3.0, 0.0f64..3.0), 1..120), radius in 0.05f64..0.6) {
            let pts: Vec<[f64; 2]> = coords.iter().map(|&(x, y)| [x, y]).collect();
            let groups = oracle_components(&pts, radius);
            let max = groups.iter().map(Vec::len).max().unwrap();
            let expected = groups.into_iter().find(|g| g.len() == max).unwrap();
            prop_assert_eq!(largest_component_2d(&pts, radius), expected);
        }
    }
}
