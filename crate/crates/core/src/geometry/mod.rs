//! Per-fragment plane regression, projection into the plane, convex hulls and
//! orientation classes.

mod entity;
mod hull;

pub use entity::{build_entities, make_entity, PlaneEntity};
pub use hull::{convex_hull, Polygon};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::principal_axes;
use crate::pointcloud::{Point3, Vector3};
use crate::rng;

/// Components smaller than this are treated as zero when fixing the sign of
/// a normal.
const SIGN_TOL: f64 = 1e-9;

/// Plane `{p : normal · p + offset = 0}` with a unit normal in canonical
/// sign: `n_z >= 0`, ties broken by `n_x >= 0`, then `n_y >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneModel {
    pub normal: Vector3,
    pub offset: f64,
}

impl PlaneModel {
    /// Canonical plane through `point` with (not necessarily unit) normal.
    pub fn through(point: &Point3, normal: &Vector3) -> PlaneModel {
        let n = normal.normalize();
        PlaneModel {
            normal: n,
            offset: -n.dot(&point.coords),
        }
        .canonical()
    }

    pub fn canonical(self) -> PlaneModel {
        let n = self.normal;
        let flip = if n.z.abs() > SIGN_TOL {
            n.z < 0.0
        } else if n.x.abs() > SIGN_TOL {
            n.x < 0.0
        } else {
            n.y < 0.0
        };
        if flip {
            PlaneModel {
                normal: -n,
                offset: -self.offset,
            }
        } else {
            self
        }
    }

    pub fn signed_distance(&self, p: &Point3) -> f64 {
        self.normal.dot(&p.coords) + self.offset
    }

    pub fn distance(&self, p: &Point3) -> f64 {
        self.signed_distance(p).abs()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Horizontal,
    Vertical,
    Oblique,
}

impl Orientation {
    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Horizontal => "horizontal",
            Orientation::Vertical => "vertical",
            Orientation::Oblique => "oblique",
        }
    }
}

/// `|n·z| > 0.95` is horizontal, `|n·z| < 0.05` vertical, anything between
/// oblique. Sign-agnostic.
pub fn classify_orientation(model: &PlaneModel) -> Orientation {
    let nz = model.normal.z.abs();
    if nz > 0.95 {
        Orientation::Horizontal
    } else if nz < 0.05 {
        Orientation::Vertical
    } else {
        Orientation::Oblique
    }
}

fn least_squares(points: &[Point3], indices: &[usize]) -> Result<PlaneModel> {
    let axes = principal_axes(indices.iter().map(|&i| &points[i]).collect::<Vec<_>>())
        .ok_or_else(|| Error::Degenerate("empty point set".into()))?;
    if axes.is_degenerate() {
        return Err(Error::Degenerate("all points collinear".into()));
    }
    Ok(PlaneModel::through(&axes.centroid, &axes.normal()))
}

/// Robust plane regression: RANSAC over three-point samples maximizing the
/// inliers within `inlier_tol`, then a least-squares refit on the consensus
/// set. Returns a canonical model.
pub fn fit_plane(points: &[Point3], inlier_tol: f64, seed: u64) -> Result<PlaneModel> {
    const MAX_ITER: usize = 1000;
    const MIN_ITER: usize = 16;
    const CONFIDENCE: f64 = 0.999;

    let n = points.len();
    if n < 3 {
        return Err(Error::Degenerate(format!("plane fit needs 3 points, got {n}")));
    }
    let all: Vec<usize> = (0..n).collect();
    // Also rejects collinear input up front.
    let global = least_squares(points, &all)?;

    let mut rng = rng::stream(seed, &[0x_f17]);
    let mut best: Option<(usize, PlaneModel)> = Some((
        points.iter().filter(|p| global.distance(p) <= inlier_tol).count(),
        global,
    ));
    let mut needed = MAX_ITER;
    let mut iter = 0;
    while iter < needed.clamp(MIN_ITER, MAX_ITER) {
        iter += 1;
        let idx = rand::seq::index::sample(&mut rng, n, 3);
        let (a, b, c) = (points[idx.index(0)], points[idx.index(1)], points[idx.index(2)]);
        let cr = (b - a).cross(&(c - a));
        if !(cr.norm() > 1e-12) {
            continue;
        }
        let model = PlaneModel::through(&a, &cr);
        let count = points.iter().filter(|p| model.distance(p) <= inlier_tol).count();
        if best.as_ref().is_none_or(|(bc, _)| count > *bc) {
            best = Some((count, model));
            let w = count as f64 / n as f64;
            let denom = (1.0 - w.powi(3)).ln();
            needed = if denom < 0.0 {
                ((1.0 - CONFIDENCE).ln() / denom).ceil().min(MAX_ITER as f64) as usize
            } else {
                MAX_ITER
            };
        }
    }
    let (_, model) = best.expect("initialised with global fit");
    let inliers: Vec<usize> = (0..n).filter(|&i| model.distance(&points[i]) <= inlier_tol).collect();
    if inliers.len() >= 3 {
        if let Ok(refit) = least_squares(points, &inliers) {
            return Ok(refit);
        }
    }
    Ok(model)
}

/// Orthonormal in-plane axes anchored at `origin`, with `u × v = n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneBasis {
    pub origin: Point3,
    pub u: Vector3,
    pub v: Vector3,
}

impl PlaneBasis {
    /// Vertical and oblique planes use `v` = world up projected into the
    /// plane (so hull `v` is height) and `u` horizontal; horizontal planes use
    /// `u` = world x projected into the plane.
    pub fn for_plane(model: &PlaneModel, origin: Point3) -> PlaneBasis {
        let n = model.normal;
        let project = |w: Vector3| w - n * n.dot(&w);
        let (u, v) = if classify_orientation(model) == Orientation::Horizontal {
            let mut u = project(Vector3::x());
            if u.norm() < 1e-6 {
                u = project(Vector3::y());
            }
            let u = u.normalize();
            (u, n.cross(&u))
        } else {
            let v = project(Vector3::z()).normalize();
            (v.cross(&n), v)
        };
        PlaneBasis { origin, u, v }
    }

    pub fn to_2d(&self, p: &Point3) -> [f64; 2] {
        let d = p - self.origin;
        [d.dot(&self.u), d.dot(&self.v)]
    }

    pub fn to_3d(&self, q: &[f64; 2]) -> Point3 {
        self.origin + self.u * q[0] + self.v * q[1]
    }
}

/// Projects `points` into the plane's 2D frame, anchored at their centroid.
pub fn project_to_2d(points: &[Point3], model: &PlaneModel) -> (PlaneBasis, Vec<[f64; 2]>) {
    let origin = crate::linalg::centroid(points).unwrap_or_else(Point3::origin);
    let basis = PlaneBasis::for_plane(model, origin);
    let coords = points.iter().map(|p| basis.to_2d(p)).collect();
    (basis, coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_distr::{Distribution, Normal};

    fn grid(f: impl Fn(f64, f64) -> Point3, n: usize, pitch: f64) -> Vec<Point3> {
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| f(i as f64 * pitch, j as f64 * pitch))
            .collect()
    }

    #[test]
    fn axis_plane() {
        let pts = grid(|a, b| Point3::new(a, b, 2.0), 10, 0.1);
        let m = fit_plane(&pts, 0.01, 1).unwrap();
        assert!((m.normal - Vector3::z()).norm() < 1e-12);
        assert!((m.offset + 2.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_vertical_plane_canonical_sign() {
        let pts = grid(|a, b| Point3::new(a, -a, b), 10, 0.1);
        let m = fit_plane(&pts, 0.01, 1).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!((m.normal - Vector3::new(s, s, 0.0)).norm() < 1e-9, "{:?}", m.normal);
        assert_eq!(classify_orientation(&m), Orientation::Vertical);
    }

    #[test]
    fn noisy_sloped_plane() {
        // z = 0.5 x, sigma = 0.01, 10,000 points.
        let noise = Normal::new(0.0, 0.01).unwrap();
        let mut rng = rng::stream(5, &[]);
        let truth = Vector3::new(-0.5, 0.0, 1.0).normalize();
        let pts: Vec<Point3> = grid(|a, b| Point3::new(a, b, 0.5 * a), 100, 0.05)
            .into_iter()
            .map(|p| p + truth * noise.sample(&mut rng))
            .collect();
        let m = fit_plane(&pts, 0.05, 3).unwrap();
        let angle = m.normal.dot(&truth).clamp(-1.0, 1.0).acos().to_degrees();
        assert!(angle < 0.5, "{angle}");
        // Noise-free generator agrees with the plain least-squares oracle.
        let clean = grid(|a, b| Point3::new(a, b, 0.5 * a), 30, 0.05);
        let oracle = principal_axes(&clean).unwrap().normal();
        let fit = fit_plane(&clean, 0.01, 3).unwrap();
        assert!(fit.normal.dot(&oracle).abs() > 1.0 - 1e-12);
    }

    #[test]
    fn collinear_is_degenerate() {
        let pts: Vec<Point3> = (0..10).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect();
        assert!(matches!(fit_plane(&pts, 0.01, 0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn orientation_thresholds() {
        let m = |n: Vector3| PlaneModel { normal: n.normalize(), offset: 0.0 };
        assert_eq!(classify_orientation(&m(Vector3::z())), Orientation::Horizontal);
        assert_eq!(classify_orientation(&m(Vector3::x())), Orientation::Vertical);
        let tilted = Vector3::new(3f64.sqrt() / 2.0, 0.0, 0.5);
        assert_eq!(classify_orientation(&m(tilted)), Orientation::Oblique);
        assert_eq!(classify_orientation(&m(-Vector3::z())), Orientation::Horizontal);
    }

    #[test]
    fn projection_is_isometric() {
        let pts = grid(|a, b| Point3::new(0.0, 2.0 * a, 3.0 * b), 2, 1.0);
        let m = fit_plane(&pts, 0.01, 0).unwrap();
        let (_, q) = project_to_2d(&pts, &m);
        let ext = |k: usize| {
            let (lo, hi) = q.iter().fold((f64::MAX, f64::MIN), |(l, h), p| (l.min(p[k]), h.max(p[k])));
            hi - lo
        };
        let mut e = [ext(0), ext(1)];
        e.sort_by(f64::total_cmp);
        assert!((e[0] - 2.0).abs() < 1e-12 && (e[1] - 3.0).abs() < 1e-12);
        // v is height for vertical planes.
        assert!((ext(1) - 3.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn translation_along_plane_keeps_model(dx in -50.0f64..50.0, dy in -50.0f64..50.0) {
            let pts = grid(|a, b| Point3::new(a, b, 0.2 * a + 1.0), 12, 0.1);
            let n = Vector3::new(-0.2, 0.0, 1.0).normalize();
            let mut t = Vector3::new(dx, dy, 0.0);
            t -= n * n.dot(&t);
            let moved: Vec<Point3> = pts.iter().map(|p| p + t).collect();
            let a = fit_plane(&pts, 0.01, 4).unwrap();
            let b = fit_plane(&moved, 0.01, 4).unwrap();
            prop_assert!((a.normal - b.normal).norm() < 1e-6);
            prop_assert!((a.offset - b.offset).abs() < 1e-6);
        }

        #[test]
        fn orientation_ignores_sign(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
            let n = Vector3::new(x, y, z);
            prop_assume!(n.norm() > 1e-3);
            let a = PlaneModel { normal: n.normalize(), offset: 0.0 };
            let b = PlaneModel { normal: -n.normalize(), offset: 0.0 };
            prop_assert_eq!(classify_orientation(&a), classify_orientation(&b));
        }

        #[test]
        fn noisy_pairwise_distances_preserved(seed in 0u64..1000) {
            let noise = Normal::new(0.0, 0.005).unwrap();
            let mut rng = rng::stream(seed, &[]);
            let pts: Vec<Point3> = grid(|a, b| Point3::new(a, 1.0, b), 8, 0.2)
                .into_iter()
                .map(|p| p + Vector3::y() * noise.sample(&mut rng))
                .collect();
            let tol = 0.02;
            let m = fit_plane(&pts, tol, seed).unwrap();
            let (_, q) = project_to_2d(&pts, &m);
            for i in 0..pts.len() {
                for j in (i + 1)..pts.len() {
                    let d3 = (pts[i] - pts[j]).norm();
                    let d2 = ((q[i][0] - q[j][0]).powi(2) + (q[i][1] - q[j][1]).powi(2)).sqrt();
                    prop_assert!((d3 - d2).abs() <= 2.0 * tol);
                }
            }
        }
    }
}
