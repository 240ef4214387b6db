//! Synthetic labeled scenes with closed-form ground truth.
//!
//! A [`SceneSpec`] is a list of parallelogram planes plus clutter boxes.
//! Planes are grid-sampled at their pitch with Gaussian noise along the plane
//! normal; each point carries the generating plane's index as its label
//! (clutter is `-1`) and the generator normal. Ground truth is computed from
//! the exact parallelograms, never from samples.

pub mod oracle;

use nalgebra::Rotation3;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{make_entity, PlaneEntity, PlaneModel, Polygon};
use crate::par;
use crate::pointcloud::{Attributes, Point3, PointCloud, Vector3};
use crate::rng;
use crate::scene::Side;

pub const CLUTTER_LABEL: i32 = -1;

/// What a plane stands for in the generator's layout.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Street,
    FacadeA,
    FacadeB,
    Facade,
    #[default]
    Other,
}

impl Role {
    pub fn is_facade(self) -> bool {
        matches!(self, Role::FacadeA | Role::FacadeB | Role::Facade)
    }

    pub fn side(self) -> Side {
        match self {
            Role::FacadeA => Side::A,
            Role::FacadeB => Side::B,
            _ => Side::Unknown,
        }
    }
}

/// Parallelogram `origin + a·û + b·v̂`, `a ∈ [0, extent_u]`, `b ∈ [0, extent_v]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneSpec {
    pub origin: Point3,
    pub axis_u: Vector3,
    pub axis_v: Vector3,
    pub extent_u: f64,
    pub extent_v: f64,
    pub pitch: f64,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub role: Role,
}

impl PlaneSpec {
    fn u(&self) -> Vector3 {
        self.axis_u.normalize()
    }

    fn v(&self) -> Vector3 {
        self.axis_v.normalize()
    }

    pub fn normal(&self) -> Vector3 {
        self.u().cross(&self.v()).normalize()
    }

    pub fn corners(&self) -> [Point3; 4] {
        let (du, dv) = (self.u() * self.extent_u, self.v() * self.extent_v);
        [self.origin, self.origin + du, self.origin + du + dv, self.origin + dv]
    }

    pub fn centroid(&self) -> Point3 {
        self.origin + (self.u() * self.extent_u + self.v() * self.extent_v) * 0.5
    }

    pub fn area(&self) -> f64 {
        self.extent_u * self.extent_v * self.u().cross(&self.v()).norm()
    }

    /// Vertical extent of the parallelogram.
    pub fn height(&self) -> f64 {
        let zs = self.corners().map(|p| p.z);
        zs.iter().copied().fold(f64::NEG_INFINITY, f64::max) - zs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn plan_footprint(&self) -> Polygon {
        Polygon {
            vertices: self.corners().iter().map(|p| [p.x, p.y]).collect(),
        }
    }

    /// Grid samples per axis.
    pub fn grid_counts(&self) -> (usize, usize) {
        let count = |extent: f64| (extent / self.pitch + 1e-9).floor() as usize + 1;
        (count(self.extent_u), count(self.extent_v))
    }

    fn rotated(&self, rot: &Rotation3<f64>, shift: &Vector3) -> PlaneSpec {
        PlaneSpec {
            origin: Point3::from(rot * self.origin.coords + shift),
            axis_u: rot * self.axis_u,
            axis_v: rot * self.axis_v,
            ..self.clone()
        }
    }

    fn problems(&self, k: usize) -> Vec<String> {
        let mut out = Vec::new();
        let finite = self.origin.iter().chain(self.axis_u.iter()).chain(self.axis_v.iter()).all(|x| x.is_finite());
        if !finite {
            out.push(format!("plane {k}: non-finite geometry"));
        }
        if !(self.extent_u > 0.0 && self.extent_v > 0.0) {
            out.push(format!("plane {k}: extents must be > 0"));
        }
        if !(self.pitch > 0.0) {
            out.push(format!("plane {k}: pitch must be > 0"));
        }
        if !(self.noise_sigma >= 0.0) {
            out.push(format!("plane {k}: noise_sigma must be >= 0"));
        }
        let (nu, nv) = (self.axis_u.norm(), self.axis_v.norm());
        if !(nu > 0.0 && nv > 0.0) || !(self.axis_u.cross(&self.axis_v).norm() > 1e-9 * nu * nv) {
            out.push(format!("plane {k}: axes must be non-zero and not parallel"));
        }
        out
    }
}

/// Uniform outlier points in a box rotated by `yaw_deg` about its center.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClutterBox {
    pub center: Point3,
    pub half_extent: Vector3,
    #[serde(default)]
    pub yaw_deg: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub planes: Vec<PlaneSpec>,
    #[serde(default)]
    pub clutter: Vec<ClutterBox>,
    #[serde(default)]
    pub seed: u64,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        let mut problems: Vec<String> = self.planes.iter().enumerate().flat_map(|(k, p)| p.problems(k)).collect();
        for (k, c) in self.clutter.iter().enumerate() {
            if !c.half_extent.iter().all(|h| *h >= 0.0 && h.is_finite()) || !c.center.iter().all(|x| x.is_finite()) {
                problems.push(format!("clutter {k}: box must be finite with non-negative half extents"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }

    /// Rotates the whole layout about the z axis, then translates it.
    pub fn transformed(&self, yaw_deg: f64, shift: Vector3) -> SceneSpec {
        let rot = Rotation3::from_axis_angle(&Vector3::z_axis(), yaw_deg.to_radians());
        SceneSpec {
            planes: self.planes.iter().map(|p| p.rotated(&rot, &shift)).collect(),
            clutter: self
                .clutter
                .iter()
                .map(|c| ClutterBox {
                    center: Point3::from(rot * c.center.coords + shift),
                    yaw_deg: c.yaw_deg + yaw_deg,
                    ..c.clone()
                })
                .collect(),
            seed: self.seed,
        }
    }

    pub fn point_count(&self) -> usize {
        let planes: usize = self.planes.iter().map(|p| {
            let (a, b) = p.grid_counts();
            a * b
        }).sum();
        planes + self.clutter.iter().map(|c| c.count).sum::<usize>()
    }
}

fn sample_plane(spec: &PlaneSpec, seed: u64) -> (Vec<Point3>, Vector3) {
    let (u, v, n) = (spec.u(), spec.v(), spec.normal());
    let (nu, nv) = spec.grid_counts();
    let mut rng = rng::stream(seed, &[]);
    let noise = Normal::new(0.0, spec.noise_sigma).expect("validated sigma");
    let mut pts = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            let mut p = spec.origin + u * (i as f64 * spec.pitch) + v * (j as f64 * spec.pitch);
            if spec.noise_sigma > 0.0 {
                p += n * noise.sample(&mut rng);
            }
            pts.push(p);
        }
    }
    (pts, n)
}

fn sample_clutter(c: &ClutterBox, seed: u64) -> Vec<(Point3, Vector3)> {
    let rot = Rotation3::from_axis_angle(&Vector3::z_axis(), c.yaw_deg.to_radians());
    let mut rng = rng::stream(seed, &[]);
    (0..c.count)
        .map(|_| {
            let local = Vector3::from_fn(|k, _| c.half_extent[k] * rng.random_range(-1.0..=1.0));
            let mut n = Vector3::from_fn(|_, _| StandardNormal.sample(&mut rng));
            while !(n.norm() > 1e-12) {
                n = Vector3::from_fn(|_, _| StandardNormal.sample(&mut rng));
            }
            (c.center + rot * local, n.normalize())
        })
        .collect()
}

/// Samples the scene: plane points first (in plane order), then clutter.
/// The cloud carries generator normals and labels.
pub fn generate(spec: &SceneSpec) -> Result<PointCloud> {
    spec.validate()?;
    let planes = par::map_range(spec.planes.len(), |k| sample_plane(&spec.planes[k], rng::derive(spec.seed, &[1, k as u64])));
    let clutter = par::map_range(spec.clutter.len(), |k| sample_clutter(&spec.clutter[k], rng::derive(spec.seed, &[2, k as u64])));
    let total = spec.point_count();
    let mut points = Vec::with_capacity(total);
    let mut normals = Vec::with_capacity(total);
    let mut labels = Vec::with_capacity(total);
    for (k, (pts, n)) in planes.into_iter().enumerate() {
        labels.extend(std::iter::repeat_n(k as i32, pts.len()));
        normals.extend(std::iter::repeat_n(n, pts.len()));
        points.extend(pts);
    }
    for (p, n) in clutter.into_iter().flatten() {
        points.push(p);
        normals.push(n);
        labels.push(CLUTTER_LABEL);
    }
    PointCloud::new(points)?.with_normals(normals)?.with_attributes(Attributes {
        labels: Some(labels),
        ..Attributes::default()
    })
}

/// Entities built directly from generator labels and exact plane models,
/// bypassing detection. Entity `k` is plane `k`.
pub fn labeled_entities(cloud: &PointCloud, spec: &SceneSpec) -> Result<Vec<PlaneEntity>> {
    let labels = cloud
        .labels()
        .ok_or_else(|| Error::Precondition("cloud has no generator labels".into()))?;
    (0..spec.planes.len())
        .map(|k| {
            let idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == k as i32).collect();
            let p = &spec.planes[k];
            make_entity(cloud, k, idx, PlaneModel::through(&p.origin, &p.normal()))
        })
        .collect()
}

/// A street scene computed from the exact generator geometry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthScene {
    pub id: usize,
    pub street: usize,
    pub facades: Vec<usize>,
    pub sides: Vec<Side>,
    pub width: Option<f64>,
    pub elevation: f64,
    pub heterogeneity: f64,
    pub density: f64,
    pub canyon: Option<f64>,
    pub max_height: f64,
}

/// Ground-truth scenes: every `Street` plane with the facade-role planes
/// at or above its centroid and within `adjacency_radius` in plan view.
/// Sides come from the roles. Scenes without facades are dropped; ids follow
/// descending street elevation.
pub fn analytic_truth(spec: &SceneSpec, adjacency_radius: f64) -> Vec<TruthScene> {
    let mut streets: Vec<usize> = (0..spec.planes.len()).filter(|&k| spec.planes[k].role == Role::Street).collect();
    streets.sort_by(|&a, &b| {
        spec.planes[b].centroid().z.total_cmp(&spec.planes[a].centroid().z).then(a.cmp(&b))
    });
    let mut out = Vec::new();
    for s in streets {
        let street = &spec.planes[s];
        let c = street.centroid();
        let footprint = street.plan_footprint();
        let facades: Vec<usize> = (0..spec.planes.len())
            .filter(|&k| {
                let f = &spec.planes[k];
                f.role.is_facade()
                    && f.centroid().z >= c.z
                    && footprint.distance_to(&f.plan_footprint()) <= adjacency_radius
            })
            .collect();
        if facades.is_empty() {
            continue;
        }
        let sides: Vec<Side> = facades.iter().map(|&k| spec.planes[k].role.side()).collect();
        let heights: Vec<f64> = facades.iter().map(|&k| spec.planes[k].height()).collect();
        let max_height = heights.iter().copied().fold(0.0, f64::max);
        let width = truth_width(spec, &c, &facades, &sides);
        out.push(TruthScene {
            id: out.len() + 1,
            street: s,
            elevation: c.z,
            heterogeneity: oracle::oracle_sigma(&heights),
            density: facades.len() as f64 / street.area(),
            canyon: width.map(|w| max_height / w),
            width,
            max_height,
            facades,
            sides,
        });
    }
    out
}

/// Mean over A/B facade pairs within 15° that straddle `c` of the gap
/// between the two planes along their averaged normal through `c`.
fn truth_width(spec: &SceneSpec, c: &Point3, facades: &[usize], sides: &[Side]) -> Option<f64> {
    let cos_max = 15f64.to_radians().cos();
    let mut gaps = Vec::new();
    for (i, &f) in facades.iter().enumerate() {
        for (j, &g) in facades.iter().enumerate() {
            if !(sides[i] == Side::A && sides[j] == Side::B) {
                continue;
            }
            let (pf, pg) = (&spec.planes[f], &spec.planes[g]);
            let nf = pf.normal();
            let mut ng = pg.normal();
            if nf.dot(&ng) < 0.0 {
                ng = -ng;
            }
            if nf.dot(&ng) < cos_max {
                continue;
            }
            // Offsets of c from each plane along its own normal.
            let (sf, sg) = (nf.dot(&(c - pf.origin)), ng.dot(&(c - pg.origin)));
            if sf * sg >= 0.0 {
                continue;
            }
            let m = (nf + ng).normalize();
            // c + t m hits plane f at t = -sf / (nf·m).
            let (tf, tg) = (-sf / nf.dot(&m), -sg / ng.dot(&m));
            gaps.push((tf - tg).abs());
        }
    }
    (!gaps.is_empty()).then(|| gaps.iter().sum::<f64>() / gaps.len() as f64)
}

/// A run of facade along one side of a corridor, measured along the street.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WallSegment {
    pub start: f64,
    pub length: f64,
    pub height: f64,
}

/// A straight street of constant width along local +x, optionally sloped,
/// with facade segments standing on its two long edges. The left edge
/// (local +y) is side A.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorridorSpec {
    pub length: f64,
    pub width: f64,
    pub elevation: f64,
    /// Rise per meter along the street.
    #[serde(default)]
    pub slope: f64,
    pub left: Vec<WallSegment>,
    pub right: Vec<WallSegment>,
    pub pitch: f64,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub yaw_deg: f64,
    #[serde(default)]
    pub offset: [f64; 2],
    /// Clutter points as a fraction of plane points, in a box above the
    /// middle of the street.
    #[serde(default)]
    pub clutter_fraction: f64,
    #[serde(default)]
    pub seed: u64,
}

impl CorridorSpec {
    /// Full-length walls of equal height on both sides.
    pub fn uniform(length: f64, width: f64, height: f64) -> CorridorSpec {
        let wall = WallSegment {
            start: 0.0,
            length,
            height,
        };
        CorridorSpec {
            length,
            width,
            elevation: 0.0,
            slope: 0.0,
            left: vec![wall],
            right: vec![wall],
            pitch: 0.05,
            noise_sigma: 0.0,
            yaw_deg: 0.0,
            offset: [0.0, 0.0],
            clutter_fraction: 0.0,
            seed: 0,
        }
    }

    pub fn build(&self) -> SceneSpec {
        let run = (1.0 + self.slope * self.slope).sqrt();
        let along = Vector3::new(1.0, 0.0, self.slope);
        let mut planes = vec![PlaneSpec {
            origin: Point3::new(0.0, -self.width / 2.0, self.elevation),
            axis_u: along,
            axis_v: Vector3::y(),
            extent_u: self.length * run,
            extent_v: self.width,
            pitch: self.pitch,
            noise_sigma: self.noise_sigma,
            role: Role::Street,
        }];
        for (segments, y, role) in [
            (&self.left, self.width / 2.0, Role::FacadeA),
            (&self.right, -self.width / 2.0, Role::FacadeB),
        ] {
            for w in segments {
                planes.push(PlaneSpec {
                    origin: Point3::new(w.start, y, self.elevation + self.slope * w.start),
                    axis_u: along,
                    axis_v: Vector3::z(),
                    extent_u: w.length * run,
                    extent_v: w.height,
                    pitch: self.pitch,
                    noise_sigma: self.noise_sigma,
                    role,
                });
            }
        }
        let plane_points: usize = planes.iter().map(|p| {
            let (a, b) = p.grid_counts();
            a * b
        }).sum();
        let count = (self.clutter_fraction * plane_points as f64).round() as usize;
        let clutter = if count > 0 {
            let x = 0.4 * self.length;
            vec![ClutterBox {
                center: Point3::new(x, 0.0, self.elevation + self.slope * x + 1.0),
                half_extent: Vector3::new(0.05 * self.length, self.width / 4.0, 0.5),
                yaw_deg: 0.0,
                count,
            }]
        } else {
            Vec::new()
        };
        SceneSpec {
            planes,
            clutter,
            seed: self.seed,
        }
        .transformed(self.yaw_deg, Vector3::new(self.offset[0], self.offset[1], 0.0))
    }
}

fn quantize(x: f64, step: f64) -> f64 {
    (x / step).round() * step
}

/// Splits `length` into `k` equal segments separated by `gap`.
fn segments(length: f64, k: usize, gap: f64, heights: &[f64]) -> Vec<WallSegment> {
    let seg = (length - gap * (k as f64 - 1.0)) / k as f64;
    (0..k)
        .map(|i| WallSegment {
            start: i as f64 * (seg + gap),
            length: seg,
            height: heights[i],
        })
        .collect()
}

/// A random corridor with 3 to 7 planes, well separated, with up to 10%
/// clutter. Dimensions are multiples of the 0.05 m pitch so grid samples
/// reach the exact extents.
pub fn random_corridor(seed: u64) -> CorridorSpec {
    let mut rng = rng::stream(seed, &[0x5c]);
    let pitch = 0.05;
    let length = quantize(rng.random_range(8.0..14.0), pitch);
    let width = quantize(rng.random_range(2.0..6.0), pitch);
    let side = |rng: &mut rand_chacha::ChaCha8Rng| {
        let k = rng.random_range(1..=3usize);
        let heights: Vec<f64> = (0..k).map(|_| quantize(rng.random_range(2.5..8.0), pitch)).collect();
        segments(length, k, 1.6, &heights)
    };
    let left = side(&mut rng);
    let right = side(&mut rng);
    CorridorSpec {
        length,
        width,
        elevation: quantize(rng.random_range(2.0..30.0), pitch),
        slope: 0.0,
        left,
        right,
        pitch,
        noise_sigma: rng.random_range(0.0..0.01),
        yaw_deg: rng.random_range(0.0..360.0),
        offset: [rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0)],
        clutter_fraction: rng.random_range(0.0..0.1),
        seed,
    }
}

/// Three terraces stepping up a slope (z = 0, 1.8, 3.6) with seven walls:
/// an outer wall on each end terrace, two walls shared by neighbouring
/// terraces, and one end wall per terrace.
pub fn hillside(pitch: f64, seed: u64) -> SceneSpec {
    let terrace = |y: f64, z: f64| PlaneSpec {
        origin: Point3::new(0.0, y, z),
        axis_u: Vector3::x(),
        axis_v: Vector3::y(),
        extent_u: 12.0,
        extent_v: 4.0,
        pitch,
        noise_sigma: 0.0,
        role: Role::Street,
    };
    let long_wall = |y: f64, z: f64, h: f64, role: Role| PlaneSpec {
        origin: Point3::new(0.0, y, z),
        axis_u: Vector3::x(),
        axis_v: Vector3::z(),
        extent_u: 12.0,
        extent_v: h,
        pitch,
        noise_sigma: 0.0,
        role,
    };
    let end_wall = |x: f64, y: f64, z: f64, h: f64| PlaneSpec {
        origin: Point3::new(x, y, z),
        axis_u: Vector3::y(),
        axis_v: Vector3::z(),
        extent_u: 3.0,
        extent_v: h,
        pitch,
        noise_sigma: 0.0,
        role: Role::Facade,
    };
    SceneSpec {
        planes: vec![
            terrace(0.0, 0.0),
            terrace(5.0, 1.8),
            terrace(10.0, 3.6),
            long_wall(-0.5, 0.0, 3.0, Role::FacadeB),
            long_wall(4.5, 0.0, 5.0, Role::Facade),
            long_wall(9.5, 1.8, 7.0, Role::Facade),
            long_wall(14.5, 3.6, 4.0, Role::FacadeA),
            end_wall(12.5, 0.5, 0.0, 3.0),
            end_wall(-0.5, 5.5, 1.8, 4.0),
            end_wall(12.5, 10.5, 3.6, 3.0),
        ],
        clutter: Vec::new(),
        seed,
    }
}

/// Reference values for one validation scene.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub scene: usize,
    pub width: f64,
    pub elevation: f64,
    pub max_height: f64,
    pub facades: usize,
    pub corridor: CorridorSpec,
}

/// Ground-truth scene values `(width, elevation, max facade height, facade
/// count)` of the ten validation scenes.
pub const FIXTURE_VALUES: [(f64, f64, f64, usize); 10] = [
    (6.21, 177.0, 18.23, 12),
    (5.78, 172.0, 8.71, 3),
    (3.29, 193.0, 10.28, 6),
    (2.67, 198.0, 2.62, 2),
    (3.41, 187.0, 3.61, 2),
    (0.81, 189.0, 9.42, 2),
    (1.94, 190.0, 6.03, 2),
    (1.73, 181.0, 6.35, 2),
    (2.29, 182.0, 5.21, 2),
    (2.10, 177.0, 3.86, 3),
];

/// Corridors reproducing the validation values: facades split between the
/// two sides with 0.3 m gaps between segments, the first left segment at
/// the maximum height and the rest between 55% and 95% of it.
pub fn validation_fixtures() -> Vec<Fixture> {
    FIXTURE_VALUES
        .iter()
        .enumerate()
        .map(|(k, &(width, elevation, max_height, facades))| {
            let length = if facades > 4 { 12.0 } else { 10.0 };
            let n_left = facades.div_ceil(2);
            let n_right = facades - n_left;
            let heights: Vec<f64> = (0..facades)
                .map(|i| {
                    if i == 0 {
                        max_height
                    } else {
                        max_height * (0.55 + 0.4 * ((i * 7) % 5) as f64 / 4.0).min(0.95)
                    }
                })
                .collect();
            let mut corridor = CorridorSpec::uniform(length, width, max_height);
            corridor.elevation = elevation;
            corridor.left = segments(length, n_left, 0.3, &heights[..n_left]);
            corridor.right = if n_right > 0 {
                segments(length, n_right, 0.3, &heights[n_left..])
            } else {
                Vec::new()
            };
            corridor.seed = k as u64 + 1;
            Fixture {
                scene: k + 1,
                width,
                elevation,
                max_height,
                facades,
                corridor,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_count_is_closed_form() {
        let floor = PlaneSpec {
            origin: Point3::origin(),
            axis_u: Vector3::x(),
            axis_v: Vector3::y(),
            extent_u: 10.0,
            extent_v: 10.0,
            pitch: 0.05,
            noise_sigma: 0.0,
            role: Role::Street,
        };
        let cloud = generate(&SceneSpec {
            planes: vec![floor],
            clutter: vec![],
            seed: 0,
        })
        .unwrap();
        assert_eq!(cloud.len(), 201 * 201);
        let bb = cloud.bbox().unwrap();
        assert!((bb.max.x - 10.0).abs() < 1e-9 && (bb.max.y - 10.0).abs() < 1e-9);
    }

    #[test]
    fn corridor_truth() {
        let spec = CorridorSpec {
            elevation: 2.5,
            ..CorridorSpec::uniform(10.0, 3.0, 6.0)
        }
        .build();
        let truth = analytic_truth(&spec, 1.0);
        assert_eq!(truth.len(), 1);
        let t = &truth[0];
        assert_eq!(t.facades.len(), 2);
        assert_eq!(t.sides, vec![Side::A, Side::B]);
        assert!((t.width.unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(t.heterogeneity, 0.0);
        assert!((t.density - 2.0 / 30.0).abs() < 1e-12);
        assert!((t.canyon.unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(t.elevation, 2.5);
    }

    #[test]
    fn one_sided_truth_has_no_width() {
        let mut c = CorridorSpec::uniform(10.0, 3.0, 6.0);
        c.right.clear();
        let t = &analytic_truth(&c.build(), 1.0)[0];
        assert_eq!(t.width, None);
        assert_eq!(t.canyon, None);
    }

    #[test]
    fn labels_partition_points() {
        let mut c = random_corridor(3);
        c.clutter_fraction = 0.05;
        let spec = c.build();
        let cloud = generate(&spec).unwrap();
        let labels = cloud.labels().unwrap();
        assert_eq!(labels.len(), cloud.len());
        for (k, p) in spec.planes.iter().enumerate() {
            let (a, b) = p.grid_counts();
            assert_eq!(labels.iter().filter(|&&l| l == k as i32).count(), a * b);
        }
        let clutter = labels.iter().filter(|&&l| l == CLUTTER_LABEL).count();
        assert_eq!(clutter, spec.clutter.iter().map(|b| b.count).sum::<usize>());
    }

    #[test]
    fn deterministic_under_seed() {
        let spec = random_corridor(9).build();
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
    }

    #[test]
    fn zero_extent_is_spec_error() {
        let mut spec = CorridorSpec::uniform(10.0, 3.0, 6.0).build();
        spec.planes[1].extent_v = 0.0;
        assert!(matches!(generate(&spec), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn hillside_terraces_and_shared_walls() {
        let truth = analytic_truth(&hillside(0.1, 0), 1.0);
        assert_eq!(truth.len(), 3);
        let elev: Vec<f64> = truth.iter().map(|t| t.elevation).collect();
        assert_eq!(elev, vec![3.6, 1.8, 0.0]);
        // Wall 5 sits between the upper two terraces, wall 4 between the lower two.
        assert!(truth[0].facades.contains(&5) && truth[1].facades.contains(&5));
        assert!(truth[1].facades.contains(&4) && truth[2].facades.contains(&4));
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = random_corridor(1).build();
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<SceneSpec>(&json).unwrap(), spec);
    }

    #[test]
    fn fixtures_match_reference_values() {
        let fx = validation_fixtures();
        assert_eq!(fx.len(), 10);
        for f in &fx {
            let t = &analytic_truth(&f.corridor.build(), 1.0)[0];
            assert_eq!(t.facades.len(), f.facades);
            assert!((t.max_height - f.max_height).abs() < 1e-9);
            assert!((t.width.unwrap() - f.width).abs() < 1e-9);
            assert!((t.elevation - f.elevation).abs() < 1e-9);
        }
    }
}
