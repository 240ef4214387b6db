use serde::{Deserialize, Serialize};

use super::global::width_between;
use crate::detection::{detect_planes, DetectionParams, EpsilonMode};
use crate::error::{Error, Result};
use crate::geometry::{build_entities, Orientation, PlaneEntity, PlaneModel};
use crate::linalg::centroid;
use crate::par;
use crate::pointcloud::{Point3, PointCloud};
use crate::rng;
use crate::scene::{Side, StreetScene};

/// Lengths within this of a band boundary count as on it.
const LENGTH_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalParams {
    pub band_width: f64,
    /// Scene-level detection parameters; per-band support is derived from
    /// `min_support` by [`band_support`].
    pub detection: DetectionParams,
    /// Floor for the per-band minimum support.
    pub min_band_support: usize,
}

impl Default for LocalParams {
    fn default() -> Self {
        LocalParams {
            band_width: 0.5,
            detection: DetectionParams::hillside(),
            min_band_support: 50,
        }
    }
}

/// Per-band minimum support: the scene's `tau` scaled by the band's share of
/// the street length, floored at `floor` and never above `tau`.
pub fn band_support(tau: usize, band_width: f64, scene_length: f64, floor: usize) -> usize {
    let scaled = if scene_length > 0.0 {
        (tau as f64 * band_width / scene_length).round() as usize
    } else {
        tau
    };
    scaled.max(floor).min(tau)
}

/// Coordinates along a scene's primary axis: `s = axis · (p - c)` in plan
/// view, with `c` the street centroid. Bands start at the smallest street
/// coordinate `s0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandLayout {
    pub axis: [f64; 2],
    pub center: [f64; 2],
    pub s0: f64,
    /// Street extent along the axis.
    pub length: f64,
    pub band_width: f64,
    pub count: usize,
}

impl BandLayout {
    pub fn coordinate(&self, p: &Point3) -> f64 {
        self.axis[0] * (p.x - self.center[0]) + self.axis[1] * (p.y - self.center[1])
    }

    /// Band holding axis coordinate `s`: half-open intervals from `s0`, with
    /// the street's far end folded into the last band. `None` outside the
    /// street span.
    pub fn band_of(&self, s: f64) -> Option<usize> {
        if s < self.s0 {
            return None;
        }
        let w = self.band_width;
        let mut k = ((s - self.s0) / w).floor() as usize;
        if k > 0 && s < self.s0 + k as f64 * w {
            k -= 1;
        } else if s >= self.s0 + (k + 1) as f64 * w {
            k += 1;
        }
        if k < self.count {
            Some(k)
        } else if s <= self.s0 + self.length + LENGTH_TOL {
            Some(self.count - 1)
        } else {
            None
        }
    }

    /// Like [`band_of`](Self::band_of), but coordinates before the street
    /// start or past its end go to the first or last band.
    pub fn band_clamped(&self, s: f64) -> usize {
        if s < self.s0 {
            0
        } else {
            self.band_of(s).unwrap_or(self.count - 1)
        }
    }

    /// `(start, end)` of band `k` measured from the street start.
    pub fn span(&self, k: usize) -> (f64, f64) {
        let start = k as f64 * self.band_width;
        (start, ((k + 1) as f64 * self.band_width).min(self.length))
    }

    /// Centerline point at axis coordinate `s` (relative to `s0`).
    pub fn centerline(&self, s: f64, z: f64) -> Point3 {
        let t = self.s0 + s;
        Point3::new(self.center[0] + self.axis[0] * t, self.center[1] + self.axis[1] * t, z)
    }
}

pub fn band_layout(cloud: &PointCloud, scene: &StreetScene, band_width: f64) -> Result<BandLayout> {
    if !(band_width > 0.0) {
        return Err(Error::InvalidConfig(vec![format!("band_width must be > 0, got {band_width}")]));
    }
    let c = scene.street.centroid;
    let mut layout = BandLayout {
        axis: scene.primary_axis,
        center: [c.x, c.y],
        s0: 0.0,
        length: 0.0,
        band_width,
        count: 1,
    };
    let (lo, hi) = scene
        .street
        .indices
        .iter()
        .map(|&i| layout.coordinate(cloud.point(i)))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s), hi.max(s)));
    if !lo.is_finite() {
        return Err(Error::Degenerate(format!("scene {}: street has no points", scene.id)));
    }
    layout.s0 = lo;
    layout.length = hi - lo;
    layout.count = (((layout.length - LENGTH_TOL) / band_width).ceil().max(1.0)) as usize;
    Ok(layout)
}

/// One slice of a scene; `indices` are ascending cloud indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Band {
    pub index: usize,
    pub s_start: f64,
    pub s_end: f64,
    pub partial: bool,
    pub indices: Vec<usize>,
}

/// Partitions the scene's points (street and facades) into bands along the
/// primary axis. Facade points beyond either end of the street join the
/// terminal band on that end.
pub fn slice_bands(cloud: &PointCloud, scene: &StreetScene, band_width: f64) -> Result<Vec<Band>> {
    let layout = band_layout(cloud, scene, band_width)?;
    let mut bands: Vec<Band> = (0..layout.count)
        .map(|k| {
            let (s_start, s_end) = layout.span(k);
            Band {
                index: k,
                s_start,
                s_end,
                partial: s_end - s_start < band_width - LENGTH_TOL,
                indices: Vec::new(),
            }
        })
        .collect();
    for i in scene.point_indices() {
        bands[layout.band_clamped(layout.coordinate(cloud.point(i)))].indices.push(i);
    }
    Ok(bands)
}

/// Plane entities detected in one band, with indices into `cloud`.
pub fn band_planes(
    cloud: &PointCloud,
    band: &Band,
    params: &DetectionParams,
    tau: usize,
    seed: u64,
) -> Result<Vec<PlaneEntity>> {
    if band.indices.len() < 3 {
        return Ok(Vec::new());
    }
    let sub = cloud.subset(&band.indices);
    let p = DetectionParams {
        min_support: tau,
        seed,
        ..params.clone()
    };
    let res = detect_planes(&sub, &p)?;
    let mut entities = build_entities(&sub, &res.fragments, res.epsilon / 2.0, seed);
    for e in &mut entities {
        for i in &mut e.indices {
            *i = band.indices[*i];
        }
    }
    Ok(entities)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandRecord {
    pub scene_id: usize,
    pub band_index: usize,
    /// Meters from the street start along the primary axis.
    pub s_start: f64,
    pub s_end: f64,
    pub partial: bool,
    /// Centroid of the band's street points (centerline point when the band
    /// holds none).
    pub anchor: Point3,
    pub width: Option<f64>,
    pub elevation: Option<f64>,
    pub facade_height: Option<f64>,
    pub canyon: Option<f64>,
}

impl BandRecord {
    pub fn s_mid(&self) -> f64 {
        0.5 * (self.s_start + self.s_end)
    }
}

/// Which scene plane a point came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Parent {
    Street,
    Facade(usize),
}

fn parent_of(scene: &StreetScene, i: usize) -> Option<Parent> {
    if scene.street.indices.binary_search(&i).is_ok() {
        return Some(Parent::Street);
    }
    scene
        .facades
        .iter()
        .position(|f| f.entity.indices.binary_search(&i).is_ok())
        .map(Parent::Facade)
}

/// Most common parent among an entity's points; ties go to the street, then
/// to the lower facade.
fn majority_parent(scene: &StreetScene, entity: &PlaneEntity) -> Option<Parent> {
    let mut counts = std::collections::BTreeMap::new();
    for &i in &entity.indices {
        if let Some(p) = parent_of(scene, i) {
            *counts.entry(p).or_insert(0usize) += 1;
        }
    }
    let mut best: Option<(Parent, usize)> = None;
    for (p, c) in counts {
        if best.is_none_or(|(_, bc)| c > bc) {
            best = Some((p, c));
        }
    }
    best.map(|(p, _)| p)
}

/// Local metrics for one band. Band entities are attributed to the scene
/// plane most of their points came from; the band street is the largest
/// horizontal entity from the scene street, and band facades are vertical
/// entities from scene facades at or above it, keeping the parent's side.
pub fn band_metrics(
    cloud: &PointCloud,
    scene: &StreetScene,
    layout: &BandLayout,
    band: &Band,
    entities: &[PlaneEntity],
) -> BandRecord {
    let street_points: Vec<&Point3> = band
        .indices
        .iter()
        .filter(|&&i| parent_of(scene, i) == Some(Parent::Street))
        .map(|&i| cloud.point(i))
        .collect();
    let anchor = centroid(street_points.iter().copied())
        .unwrap_or_else(|| layout.centerline(0.5 * (band.s_start + band.s_end), scene.street.centroid.z));

    let parents: Vec<Option<Parent>> = entities.iter().map(|e| majority_parent(scene, e)).collect();
    let street = entities
        .iter()
        .zip(&parents)
        .filter(|(e, p)| e.orientation == Orientation::Horizontal && **p == Some(Parent::Street))
        .map(|(e, _)| e)
        .max_by(|a, b| a.point_count().cmp(&b.point_count()).then(b.id.cmp(&a.id)));

    let mut record = BandRecord {
        scene_id: scene.id,
        band_index: band.index,
        s_start: band.s_start,
        s_end: band.s_end,
        partial: band.partial,
        anchor,
        width: None,
        elevation: None,
        facade_height: None,
        canyon: None,
    };
    let Some(street) = street else {
        return record;
    };
    let facades: Vec<(PlaneModel, Side, f64)> = entities
        .iter()
        .zip(&parents)
        .filter(|(e, _)| e.orientation == Orientation::Vertical && e.centroid.z >= street.centroid.z)
        .filter_map(|(e, p)| match p {
            Some(Parent::Facade(k)) => Some((e.model, scene.facades[*k].side, e.height_extent)),
            _ => None,
        })
        .collect();
    let side_max = |side: Side| {
        facades
            .iter()
            .filter(|f| f.1 == side)
            .map(|f| f.2)
            .reduce(f64::max)
    };
    let pairs: Vec<(PlaneModel, Side)> = facades.iter().map(|f| (f.0, f.1)).collect();
    record.elevation = Some(street.centroid.z);
    record.width = width_between(&street.centroid, &pairs);
    record.facade_height = match (side_max(Side::A), side_max(Side::B)) {
        (Some(a), Some(b)) => Some(0.5 * (a + b)),
        (a, b) => a.or(b),
    };
    record.canyon = match (record.width, record.facade_height) {
        (Some(w), Some(h)) => Some(h / w),
        _ => None,
    };
    record
}

/// Slices one scene, re-detects planes per band and measures every band.
/// Each band draws from its own stream keyed by `(seed, scene, band)`.
pub fn compute_local(cloud: &PointCloud, scene: &StreetScene, params: &LocalParams) -> Result<Vec<BandRecord>> {
    let layout = band_layout(cloud, scene, params.band_width)?;
    let bands = slice_bands(cloud, scene, params.band_width)?;
    let detection = DetectionParams {
        epsilon: params.detection.effective_epsilon(cloud.bbox().as_ref()),
        epsilon_mode: EpsilonMode::Absolute,
        ..params.detection.clone()
    };
    let tau = band_support(
        params.detection.min_support,
        params.band_width,
        layout.length,
        params.min_band_support,
    );
    let records: Vec<Result<BandRecord>> = par::map(&bands, |band| {
        let seed = rng::derive(params.detection.seed, &[scene.id as u64, band.index as u64]);
        let entities = band_planes(cloud, band, &detection, tau, seed)?;
        Ok(band_metrics(cloud, scene, &layout, band, &entities))
    });
    records.into_iter().collect()
}

/// Band records for all scenes, scene by scene.
pub fn compute_local_all(cloud: &PointCloud, scenes: &[StreetScene], params: &LocalParams) -> Result<Vec<BandRecord>> {
    let mut out = Vec::new();
    for s in scenes {
        out.extend(compute_local(cloud, s, params)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{build_scenes, SceneParams};
    use crate::synth::oracle::oracle_partition;
    use crate::synth::{generate, labeled_entities, CorridorSpec};

    fn corridor_scene(c: &CorridorSpec) -> (PointCloud, StreetScene) {
        let spec = c.build();
        let cloud = generate(&spec).unwrap();
        let ents = labeled_entities(&cloud, &spec).unwrap();
        let scene = build_scenes(&cloud, &ents, &SceneParams::default()).remove(0);
        (cloud, scene)
    }

    #[test]
    fn band_counts() {
        for (length, width, bands) in [(10.0, 3.0, 20), (3.5, 3.0, 7), (0.3, 0.2, 1)] {
            let (cloud, scene) = corridor_scene(&CorridorSpec::uniform(length, width, 4.0));
            let b = slice_bands(&cloud, &scene, 0.5).unwrap();
            assert_eq!(b.len(), bands, "length {length}");
            assert_eq!(b.last().unwrap().partial, length == 0.3);
        }
    }

    #[test]
    fn partition_matches_interval_oracle() {
        let mut c = CorridorSpec::uniform(7.3, 2.0, 3.0);
        c.yaw_deg = 33.0;
        c.noise_sigma = 0.01;
        let (cloud, scene) = corridor_scene(&c);
        let layout = band_layout(&cloud, &scene, 0.5).unwrap();
        let bands = slice_bands(&cloud, &scene, 0.5).unwrap();
        let idx = scene.point_indices();
        let s: Vec<f64> = idx.iter().map(|&i| layout.coordinate(cloud.point(i))).collect();
        let oracle = oracle_partition(&s, layout.s0, 0.5, layout.count);
        let mut fast = vec![None; idx.len()];
        for b in &bands {
            for i in &b.indices {
                fast[idx.binary_search(i).unwrap()] = Some(b.index);
            }
        }
        let end = (layout.s0 + layout.length).max(layout.s0 + layout.count as f64 * 0.5);
        for ((f, o), s) in fast.iter().zip(&oracle).zip(&s) {
            if *s < end || *s <= layout.s0 + layout.length {
                assert_eq!(f, o);
            } else {
                assert_eq!(*f, None);
            }
        }
        // Walls match the street span here, so nothing is dropped.
        let total: usize = bands.iter().map(|b| b.indices.len()).sum();
        assert_eq!(total, idx.len());
    }

    #[test]
    fn support_scaling() {
        assert_eq!(band_support(750, 0.5, 10.0, 50), 50);
        assert_eq!(band_support(750, 0.5, 3.0, 50), 125);
        assert_eq!(band_support(750, 0.5, 0.2, 50), 750);
    }

    #[test]
    fn uniform_corridor_bands_match_global() {
        let (cloud, scene) = corridor_scene(&CorridorSpec::uniform(4.0, 3.0, 6.0));
        let recs = compute_local(&cloud, &scene, &LocalParams::default()).unwrap();
        assert_eq!(recs.len(), 8);
        for r in &recs {
            assert!((r.width.unwrap() - 3.0).abs() < 0.15, "{r:?}");
            assert!((r.facade_height.unwrap() - 6.0).abs() < 0.3, "{r:?}");
            assert!((r.canyon.unwrap() - r.facade_height.unwrap() / r.width.unwrap()).abs() < 1e-9);
            assert!(r.elevation.unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn one_sided_bands_keep_height() {
        let mut c = CorridorSpec::uniform(3.0, 2.0, 4.0);
        c.right.clear();
        let (cloud, scene) = corridor_scene(&c);
        for r in compute_local(&cloud, &scene, &LocalParams::default()).unwrap() {
            assert_eq!(r.width, None);
            assert_eq!(r.canyon, None);
            assert!((r.facade_height.unwrap() - 4.0).abs() < 0.2);
        }
    }

    #[test]
    fn anchor_is_band_street_centroid() {
        let (cloud, scene) = corridor_scene(&CorridorSpec::uniform(2.0, 3.0, 4.0));
        let bands = slice_bands(&cloud, &scene, 0.5).unwrap();
        let layout = band_layout(&cloud, &scene, 0.5).unwrap();
        let rec = band_metrics(&cloud, &scene, &layout, &bands[1], &[]);
        let pts: Vec<Point3> = bands[1]
            .indices
            .iter()
            .filter(|i| scene.street.indices.contains(i))
            .map(|&i| *cloud.point(i))
            .collect();
        let n = pts.len() as f64;
        let (x, y) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.x, b + p.y));
        assert!((rec.anchor.x - x / n).abs() < 1e-9 && (rec.anchor.y - y / n).abs() < 1e-9);
        assert_eq!(rec.width, None);
    }
}
