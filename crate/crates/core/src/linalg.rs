//! Small dense helpers: centroids, covariance and principal axes.

use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector2};

use crate::pointcloud::{Point3, Vector3};

/// Centroid, eigenvalues (ascending) and matching unit eigenvectors of the
/// covariance of a point set.
#[derive(Clone, Debug)]
pub struct PrincipalAxes {
    pub centroid: Point3,
    pub eigenvalues: [f64; 3],
    pub axes: [Vector3; 3],
}

impl PrincipalAxes {
    /// Eigenvector of the smallest eigenvalue (plane normal for planar sets).
    pub fn normal(&self) -> Vector3 {
        self.axes[0]
    }

    /// True when the point set spans less than two dimensions.
    pub fn is_degenerate(&self) -> bool {
        let [_, mid, max] = self.eigenvalues;
        !(max > 0.0) || mid <= 1e-10 * max
    }
}

pub fn centroid<'a>(points: impl IntoIterator<Item = &'a Point3>) -> Option<Point3> {
    let mut sum = Vector3::zeros();
    let mut n = 0usize;
    for p in points {
        sum += p.coords;
        n += 1;
    }
    (n > 0).then(|| Point3::from(sum / n as f64))
}

pub fn principal_axes<'a, I>(points: I) -> Option<PrincipalAxes>
where
    I: IntoIterator<Item = &'a Point3>,
    I::IntoIter: Clone,
{
    let iter = points.into_iter();
    let c = centroid(iter.clone())?;
    let mut cov = Matrix3::zeros();
    let mut n = 0usize;
    for p in iter {
        let d = p - c;
        cov += d * d.transpose();
        n += 1;
    }
    cov /= n as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.map(|i| eig.eigenvalues[i].max(0.0));
    let axes = order.map(|i| eig.eigenvectors.column(i).into_owned().normalize());
    Some(PrincipalAxes {
        centroid: c,
        eigenvalues,
        axes,
    })
}

/// Dominant direction of a 2D point set (unit, sign unspecified).
pub fn dominant_direction_2d(points: &[[f64; 2]]) -> Option<[f64; 2]> {
    if points.is_empty() {
        return None;
    }
    let n = points.len() as f64;
    let (mx, my) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), p| (a + p[0], b + p[1]));
    let (mx, my) = (mx / n, my / n);
    let mut cov = Matrix2::zeros();
    for p in points {
        let d = Vector2::new(p[0] - mx, p[1] - my);
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov / n);
    let i = if eig.eigenvalues[0] >= eig.eigenvalues[1] { 0 } else { 1 };
    let v = eig.eigenvectors.column(i);
    let len = v.norm();
    (len > 0.0).then(|| [v[0] / len, v[1] / len])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_normal_from_covariance() {
        let pts: Vec<Point3> = (0..10)
            .flat_map(|i| (0..10).map(move |j| Point3::new(i as f64, j as f64, 2.0)))
            .collect();
        let pa = principal_axes(&pts).unwrap();
        assert!((pa.normal().z.abs() - 1.0).abs() < 1e-12);
        assert!(!pa.is_degenerate());
        assert!((pa.centroid.z - 2.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_is_degenerate() {
        let pts: Vec<Point3> = (0..10).map(|i| Point3::new(i as f64, 2.0 * i as f64, 0.0)).collect();
        assert!(principal_axes(&pts).unwrap().is_degenerate());
    }

    #[test]
    fn dominant_direction() {
        let pts: Vec<[f64; 2]> = (0..20).map(|i| [i as f64, 0.1 * (i % 2) as f64]).collect();
        let d = dominant_direction_2d(&pts).unwrap();
        assert!(d[0].abs() > 0.99);
    }
}
