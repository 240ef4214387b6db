use serde::{Deserialize, Serialize};

use super::normalize;
use crate::error::{Error, Result};
use crate::geometry::PlaneModel;
use crate::par;
use crate::pointcloud::Point3;
use crate::scene::{Side, StreetScene};

/// Facade pairs further apart in angle than this are not parallel.
pub const MAX_PAIR_ANGLE_DEG: f64 = 15.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalMetrics {
    pub scene_id: usize,
    /// Meters; absent without an opposite parallel facade pair.
    pub street_width: Option<f64>,
    /// z of the street centroid, meters.
    pub street_elevation: f64,
    /// Population standard deviation of facade heights, meters.
    pub facade_heterogeneity: f64,
    /// Facades per m² of street hull area.
    pub facade_density: f64,
    /// Max facade height over street width.
    pub street_canyon: Option<f64>,
}

impl GlobalMetrics {
    pub const NAMES: [&'static str; 5] = ["width", "elevation", "heterogeneity", "density", "canyon"];

    pub fn values(&self) -> [Option<f64>; 5] {
        [
            self.street_width,
            Some(self.street_elevation),
            Some(self.facade_heterogeneity),
            Some(self.facade_density),
            self.street_canyon,
        ]
    }
}

/// Mean plane-to-plane distance through `center` over facade pairs on
/// opposite sides (one `A`, one `B`) that are parallel within 15° and lie on
/// opposite sides of `center`. Each distance is taken along the average of
/// the two consistently oriented normals.
pub fn width_between(center: &Point3, facades: &[(PlaneModel, Side)]) -> Option<f64> {
    let cos_max = MAX_PAIR_ANGLE_DEG.to_radians().cos();
    let mut sum = 0.0;
    let mut count = 0usize;
    for (f, _) in facades.iter().filter(|(_, s)| *s == Side::A) {
        for (g, _) in facades.iter().filter(|(_, s)| *s == Side::B) {
            let (nf, df) = (f.normal, f.offset);
            let (ng, dg) = if nf.dot(&g.normal) < 0.0 {
                (-g.normal, -g.offset)
            } else {
                (g.normal, g.offset)
            };
            if nf.dot(&ng) < cos_max {
                continue;
            }
            let sf = nf.dot(&center.coords) + df;
            let sg = ng.dot(&center.coords) + dg;
            if sf * sg >= 0.0 {
                continue;
            }
            let m = (nf + ng).normalize();
            let tf = -sf / nf.dot(&m);
            let tg = -sg / ng.dot(&m);
            sum += (tf - tg).abs();
            count += 1;
        }
    }
    (count > 0).then(|| sum / count as f64)
}

pub fn street_width(scene: &StreetScene) -> Option<f64> {
    let facades: Vec<(PlaneModel, Side)> = scene.facades.iter().map(|f| (f.entity.model, f.side)).collect();
    width_between(&scene.street.centroid, &facades)
}

pub fn street_elevation(scene: &StreetScene) -> f64 {
    scene.street.centroid.z
}

/// Population standard deviation (Welford's update). Zero for fewer than
/// two values.
pub fn population_sigma(values: &[f64]) -> f64 {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (k, &x) in values.iter().enumerate() {
        let d = x - mean;
        mean += d / (k + 1) as f64;
        m2 += d * (x - mean);
    }
    if values.is_empty() {
        0.0
    } else {
        (m2 / values.len() as f64).max(0.0).sqrt()
    }
}

pub fn facade_heterogeneity(scene: &StreetScene) -> f64 {
    let heights: Vec<f64> = scene.facades.iter().map(|f| f.entity.height_extent).collect();
    population_sigma(&heights)
}

pub fn facade_density(scene: &StreetScene) -> Result<f64> {
    let area = scene.street.area;
    if !(area > 0.0) {
        return Err(Error::Degenerate(format!("scene {}: street hull has zero area", scene.id)));
    }
    Ok(scene.facades.len() as f64 / area)
}

fn max_facade_height(scene: &StreetScene) -> f64 {
    scene
        .facades
        .iter()
        .map(|f| f.entity.height_extent)
        .fold(0.0, f64::max)
}

pub fn street_canyon(scene: &StreetScene) -> Option<f64> {
    street_width(scene).map(|w| max_facade_height(scene) / w)
}

pub fn global_metrics(scene: &StreetScene) -> Result<GlobalMetrics> {
    let width = street_width(scene);
    Ok(GlobalMetrics {
        scene_id: scene.id,
        street_width: width,
        street_elevation: street_elevation(scene),
        facade_heterogeneity: facade_heterogeneity(scene),
        facade_density: facade_density(scene)?,
        street_canyon: width.map(|w| max_facade_height(scene) / w),
    })
}

/// Metrics for every scene, in scene order.
pub fn compute_global(scenes: &[StreetScene]) -> Result<Vec<GlobalMetrics>> {
    par::map(scenes, global_metrics).into_iter().collect()
}

/// Per-metric maxima over a scene set and each scene's normalized values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricProfile {
    /// In [`GlobalMetrics::NAMES`] order; absent when a metric is absent
    /// for every scene.
    pub maxima: [Option<f64>; 5],
    pub shifted: [bool; 5],
    /// `(scene_id, normalized values)`.
    pub rows: Vec<(usize, [Option<f64>; 5])>,
}

pub fn normalize_profiles(metrics: &[GlobalMetrics]) -> Result<MetricProfile> {
    if metrics.is_empty() {
        return Err(Error::Precondition("normalization needs at least one scene".into()));
    }
    let mut maxima = [None; 5];
    let mut shifted = [false; 5];
    let mut rows: Vec<(usize, [Option<f64>; 5])> = metrics.iter().map(|m| (m.scene_id, [None; 5])).collect();
    for k in 0..5 {
        let column: Vec<Option<f64>> = metrics.iter().map(|m| m.values()[k]).collect();
        let n = normalize(&column);
        if n.shifted {
            tracing::warn!(metric = GlobalMetrics::NAMES[k], "negative values; using min-max normalization");
        }
        maxima[k] = n.max;
        shifted[k] = n.shifted;
        for (row, v) in rows.iter_mut().zip(n.values) {
            row.1[k] = v;
        }
    }
    Ok(MetricProfile { maxima, shifted, rows })
}
