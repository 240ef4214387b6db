//! Point clouds: storage, validation, I/O, voxel downsampling, spatial index
//! and normal estimation.

mod io;
mod kdtree;
mod normals;
mod voxel;

pub use io::{load, read_from, save, write_to, Format};
pub use kdtree::KdTree;
pub use normals::estimate_normals;
pub use voxel::{downsample, Reduction, VoxelGrid};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scan-local coordinates in meters, z up.
pub type Point3 = nalgebra::Point3<f64>;
pub type Vector3 = nalgebra::Vector3<f64>;

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub fn from_points(points: &[Point3]) -> Option<Aabb> {
        let first = *points.first()?;
        let mut bb = Aabb {
            min: first,
            max: first,
        };
        for p in &points[1..] {
            bb.min = bb.min.inf(p);
            bb.max = bb.max.sup(p);
        }
        Some(bb)
    }

    pub fn extent(&self) -> Vector3 {
        self.max - self.min
    }

    /// Largest side length.
    pub fn width(&self) -> f64 {
        self.extent().max()
    }

    pub fn contains(&self, p: &Point3) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }
}

/// Per-point attributes carried through processing but not interpreted.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Attributes {
    pub colors: Option<Vec<[u8; 3]>>,
    pub intensity: Option<Vec<f32>>,
    /// Generator labels (plane index, or -1 for clutter) in synthetic clouds.
    pub labels: Option<Vec<i32>>,
}

impl Attributes {
    fn subset(&self, indices: &[usize]) -> Attributes {
        fn pick<T: Copy>(v: &Option<Vec<T>>, idx: &[usize]) -> Option<Vec<T>> {
            v.as_ref().map(|v| idx.iter().map(|&i| v[i]).collect())
        }
        Attributes {
            colors: pick(&self.colors, indices),
            intensity: pick(&self.intensity, indices),
            labels: pick(&self.labels, indices),
        }
    }

    fn check_len(&self, n: usize) -> Result<()> {
        let lens = [
            ("colors", self.colors.as_ref().map(Vec::len)),
            ("intensity", self.intensity.as_ref().map(Vec::len)),
            ("labels", self.labels.as_ref().map(Vec::len)),
        ];
        for (name, len) in lens {
            if let Some(len) = len {
                if len != n {
                    return Err(Error::Precondition(format!(
                        "{name} count {len} does not match point count {n}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// An immutable set of 3D points with optional unit normals.
///
/// A normal slot may be flagged invalid (degenerate neighbourhood during
/// estimation, or a zero vector in the input file); such points are skipped by
/// plane detection.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    points: Vec<Point3>,
    normals: Option<Vec<Vector3>>,
    normal_valid: Option<Vec<bool>>,
    attributes: Attributes,
    bbox: Option<Aabb>,
}

impl PointCloud {
    /// Validates that all coordinates are finite.
    pub fn new(points: Vec<Point3>) -> Result<PointCloud> {
        if let Some(i) = points.iter().position(|p| !p.coords.iter().all(|c| c.is_finite())) {
            return Err(Error::parse(format!("point {i}"), "non-finite coordinate"));
        }
        let bbox = Aabb::from_points(&points);
        Ok(PointCloud {
            points,
            normals: None,
            normal_valid: None,
            attributes: Attributes::default(),
            bbox,
        })
    }

    pub fn empty() -> PointCloud {
        PointCloud::new(Vec::new()).expect("empty cloud is valid")
    }

    /// Attaches normals. Non-zero vectors are rescaled to unit length; zero or
    /// non-finite vectors mark the slot invalid.
    pub fn with_normals(mut self, normals: Vec<Vector3>) -> Result<PointCloud> {
        if normals.len() != self.points.len() {
            return Err(Error::Precondition(format!(
                "normal count {} does not match point count {}",
                normals.len(),
                self.points.len()
            )));
        }
        let mut valid = vec![true; normals.len()];
        let normals = normals
            .into_iter()
            .enumerate()
            .map(|(i, n)| {
                let len = n.norm();
                if len.is_finite() && len > 1e-12 {
                    n / len
                } else {
                    valid[i] = false;
                    Vector3::z()
                }
            })
            .collect();
        self.normals = Some(normals);
        self.normal_valid = valid.iter().any(|v| !v).then_some(valid);
        Ok(self)
    }

    pub(crate) fn with_normals_and_validity(
        mut self,
        normals: Vec<Vector3>,
        valid: Vec<bool>,
    ) -> PointCloud {
        debug_assert_eq!(normals.len(), self.points.len());
        debug_assert_eq!(valid.len(), self.points.len());
        self.normals = Some(normals);
        self.normal_valid = valid.iter().any(|v| !v).then_some(valid);
        self
    }

    pub fn with_attributes(mut self, attributes: Attributes) -> Result<PointCloud> {
        attributes.check_len(self.points.len())?;
        self.attributes = attributes;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &Point3 {
        &self.points[i]
    }

    pub fn has_normals(&self) -> bool {
        self.normals.is_some()
    }

    /// Raw normal slots, including invalid ones.
    pub fn normals(&self) -> Option<&[Vector3]> {
        self.normals.as_deref()
    }

    /// The normal of point `i`, if present and valid.
    pub fn normal(&self, i: usize) -> Option<&Vector3> {
        let n = self.normals.as_ref()?.get(i)?;
        self.normal_is_valid(i).then_some(n)
    }

    pub fn normal_is_valid(&self, i: usize) -> bool {
        self.normals.is_some() && self.normal_valid.as_ref().is_none_or(|v| v[i])
    }

    pub fn invalid_normal_count(&self) -> usize {
        match (&self.normals, &self.normal_valid) {
            (None, _) => 0,
            (Some(_), None) => 0,
            (Some(_), Some(v)) => v.iter().filter(|x| !**x).count(),
        }
    }

    pub fn attributes(&self) -> &Attributes {
        &self.attributes
    }

    pub fn labels(&self) -> Option<&[i32]> {
        self.attributes.labels.as_deref()
    }

    /// `None` for an empty cloud.
    pub fn bbox(&self) -> Option<Aabb> {
        self.bbox
    }

    /// A new cloud holding the listed points (in the given order) with their
    /// normals and attributes.
    pub fn subset(&self, indices: &[usize]) -> PointCloud {
        let points: Vec<Point3> = indices.iter().map(|&i| self.points[i]).collect();
        let bbox = Aabb::from_points(&points);
        PointCloud {
            points,
            normals: self
                .normals
                .as_ref()
                .map(|n| indices.iter().map(|&i| n[i]).collect()),
            normal_valid: self
                .normal_valid
                .as_ref()
                .map(|v| indices.iter().map(|&i| v[i]).collect::<Vec<_>>())
                .filter(|v| v.iter().any(|x| !x)),
            attributes: self.attributes.subset(indices),
            bbox,
        }
    }

    /// Applies `p -> scale * R p + t` to points and `R n` to normals.
    pub fn transformed(&self, rotation: &nalgebra::Rotation3<f64>, scale: f64, translation: Vector3) -> PointCloud {
        let points: Vec<Point3> = self
            .points
            .iter()
            .map(|p| Point3::from(rotation * p.coords * scale + translation))
            .collect();
        let bbox = Aabb::from_points(&points);
        PointCloud {
            points,
            normals: self
                .normals
                .as_ref()
                .map(|ns| ns.iter().map(|n| rotation * n).collect()),
            normal_valid: self.normal_valid.clone(),
            attributes: self.attributes.clone(),
            bbox,
        }
    }

    /// Concatenates clouds. Normals are kept only if every part has them.
    pub fn concat(parts: &[PointCloud]) -> PointCloud {
        let points: Vec<Point3> = parts.iter().flat_map(|c| c.points.iter().copied()).collect();
        let all_normals = parts.iter().all(|c| c.has_normals());
        let mut cloud = PointCloud::new(points).expect("finite parts");
        if all_normals {
            let normals = parts
                .iter()
                .flat_map(|c| c.normals.as_ref().unwrap().iter().copied())
                .collect();
            let valid = parts
                .iter()
                .flat_map(|c| (0..c.len()).map(move |i| c.normal_is_valid(i)))
                .collect();
            cloud = cloud.with_normals_and_validity(normals, valid);
        }
        if parts.iter().all(|c| c.labels().is_some()) {
            cloud.attributes.labels =
                Some(parts.iter().flat_map(|c| c.labels().unwrap().iter().copied()).collect());
        }
        cloud
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bbox_encloses_points() {
        let c = PointCloud::new(vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ])
        .unwrap();
        let bb = c.bbox().unwrap();
        assert_eq!(bb.min, Point3::new(0.0, 0.0, 0.0));
        assert_eq!(bb.max, Point3::new(1.0, 1.0, 0.0));
        assert!(PointCloud::empty().bbox().is_none());
    }

    #[test]
    fn rejects_non_finite() {
        let err = PointCloud::new(vec![Point3::new(0.0, f64::NAN, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn normals_are_unit_and_counted() {
        let c = PointCloud::new(vec![Point3::origin(); 2]).unwrap();
        assert!(c.clone().with_normals(vec![Vector3::z()]).is_err());
        let c = c
            .with_normals(vec![Vector3::new(0.0, 0.0, 2.0), Vector3::zeros()])
            .unwrap();
        assert!((c.normal(0).unwrap().norm() - 1.0).abs() < 1e-12);
        assert!(c.normal(1).is_none());
        assert_eq!(c.invalid_normal_count(), 1);
    }

    #[test]
    fn subset_keeps_validity() {
        let c = PointCloud::new(vec![Point3::origin(), Point3::new(1.0, 0.0, 0.0)])
            .unwrap()
            .with_normals(vec![Vector3::zeros(), Vector3::x()])
            .unwrap();
        let s = c.subset(&[1, 0]);
        assert!(s.normal(0).is_some());
        assert!(s.normal(1).is_none());
    }
}
