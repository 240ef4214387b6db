use serde::{Deserialize, Serialize};

use super::{classify_orientation, convex_hull, fit_plane, project_to_2d, Orientation, PlaneBasis, PlaneModel, Polygon};
use crate::detection::Fragment;
use crate::error::Result;
use crate::linalg::centroid;
use crate::par;
use crate::pointcloud::{Point3, PointCloud};
use crate::rng;

/// A fitted planar primitive with its measured properties.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneEntity {
    pub id: usize,
    /// Fragment indices into the source cloud, ascending.
    pub indices: Vec<usize>,
    pub model: PlaneModel,
    pub basis: PlaneBasis,
    /// Convex hull in `(u, v)` coordinates, counterclockwise.
    pub hull: Polygon,
    pub orientation: Orientation,
    pub centroid: Point3,
    /// World z extent of the fragment (z_max - z_min), meters.
    pub height_extent: f64,
    /// Hull area, m².
    pub area: f64,
    /// Points per m² of hull area.
    pub density: f64,
}

impl PlaneEntity {
    pub fn point_count(&self) -> usize {
        self.indices.len()
    }

    /// Hull vertices lifted back to world coordinates.
    pub fn hull_3d(&self) -> Vec<Point3> {
        self.hull.vertices.iter().map(|q| self.basis.to_3d(q)).collect()
    }

    /// Hull projected onto the ground plane (x, y).
    pub fn plan_footprint(&self) -> Polygon {
        Polygon {
            vertices: self.hull_3d().iter().map(|p| [p.x, p.y]).collect(),
        }
    }
}

/// Builds an entity from fragment indices and a fitted model.
pub fn make_entity(cloud: &PointCloud, id: usize, indices: Vec<usize>, model: PlaneModel) -> Result<PlaneEntity> {
    let pts: Vec<Point3> = indices.iter().map(|&i| *cloud.point(i)).collect();
    let (basis, coords) = project_to_2d(&pts, &model);
    let hull = convex_hull(&coords)?;
    let area = hull.area();
    let (zmin, zmax) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.z), hi.max(p.z)));
    Ok(PlaneEntity {
        id,
        model,
        basis,
        hull,
        orientation: classify_orientation(&model),
        centroid: centroid(&pts).expect("non-empty hull input"),
        height_extent: zmax - zmin,
        area,
        density: pts.len() as f64 / area,
        indices,
    })
}

/// Fits and measures every fragment in parallel. Fragment `k` becomes entity
/// `k`; degenerate fragments are skipped with a warning, so ids may have gaps.
pub fn build_entities(cloud: &PointCloud, fragments: &[Fragment], inlier_tol: f64, seed: u64) -> Vec<PlaneEntity> {
    let built: Vec<Result<PlaneEntity>> = par::map_range(fragments.len(), |k| {
        let frag = &fragments[k];
        let pts: Vec<Point3> = frag.indices.iter().map(|&i| *cloud.point(i)).collect();
        let model = fit_plane(&pts, inlier_tol, rng::derive(seed, &[0x_e47, k as u64]))?;
        make_entity(cloud, k, frag.indices.clone(), model)
    });
    built
        .into_iter()
        .enumerate()
        .filter_map(|(k, r)| match r {
            Ok(e) => Some(e),
            Err(e) => {
                tracing::warn!(fragment = k, error = %e, "skipping degenerate fragment");
                None
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointcloud::Vector3;

    fn wall(width: f64, height: f64, pitch: f64) -> PointCloud {
        let nu = (width / pitch).round() as usize;
        let nv = (height / pitch).round() as usize;
        let pts = (0..=nu)
            .flat_map(|i| (0..=nv).map(move |j| Point3::new(i as f64 * pitch, 5.0, j as f64 * pitch)))
            .collect();
        PointCloud::new(pts).unwrap()
    }

    #[test]
    fn wall_measurements() {
        let c = wall(4.0, 6.0, 0.05);
        let idx: Vec<usize> = (0..c.len()).collect();
        let model = fit_plane(c.points(), 0.05, 0).unwrap();
        let e = make_entity(&c, 0, idx, model).unwrap();
        assert_eq!(e.orientation, Orientation::Vertical);
        assert!((e.height_extent - 6.0).abs() <= 0.05);
        assert!((e.area - 24.0).abs() <= 0.5);
        assert_eq!(e.density, c.len() as f64 / e.area);
        for p in c.points() {
            assert!(e.hull.contains(&e.basis.to_2d(p), 1e-6));
        }
    }

    #[test]
    fn floor_has_no_height() {
        let pts: Vec<Point3> = (0..=100)
            .flat_map(|i| (0..=100).map(move |j| Point3::new(i as f64 * 0.05, j as f64 * 0.05, 1.0)))
            .collect();
        let c = PointCloud::new(pts).unwrap();
        let model = fit_plane(c.points(), 0.05, 0).unwrap();
        let e = make_entity(&c, 3, (0..c.len()).collect(), model).unwrap();
        assert_eq!(e.orientation, Orientation::Horizontal);
        assert!(e.height_extent <= 2.0 * 0.15);
        assert_eq!(e.id, 3);
    }

    #[test]
    fn grid_patch_density_by_count() {
        // p x q grid over (p-1) x (q-1) cells of 0.1 m.
        let (p, q) = (21usize, 11usize);
        let pts: Vec<Point3> = (0..p)
            .flat_map(|i| (0..q).map(move |j| Point3::new(i as f64 * 0.1, j as f64 * 0.1, 0.0)))
            .collect();
        let c = PointCloud::new(pts).unwrap();
        let model = PlaneModel::through(&Point3::origin(), &Vector3::z());
        let e = make_entity(&c, 0, (0..c.len()).collect(), model).unwrap();
        let area = 2.0 * 1.0;
        assert!((e.area - area).abs() < 1e-9);
        assert!((e.density - (p * q) as f64 / area).abs() < 1e-6);
    }

    #[test]
    fn hull_area_independent_of_basis_rotation() {
        let c = wall(3.0, 2.0, 0.1);
        let model = fit_plane(c.points(), 0.05, 0).unwrap();
        let e = make_entity(&c, 0, (0..c.len()).collect(), model).unwrap();
        let theta: f64 = 0.7;
        let rot = |q: &[f64; 2]| [q[0] * theta.cos() - q[1] * theta.sin(), q[0] * theta.sin() + q[1] * theta.cos()];
        let rotated: Vec<[f64; 2]> = c.points().iter().map(|p| rot(&e.basis.to_2d(p))).collect();
        assert!((convex_hull(&rotated).unwrap().area() - e.area).abs() < 1e-9);
    }
}
