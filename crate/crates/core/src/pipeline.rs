//! End-to-end composition of the stages with one configuration.

use serde::{Deserialize, Serialize};

use crate::detection::{detect_planes, DetectionParams, DetectionResult};
use crate::error::{Error, Result};
use crate::geometry::{build_entities, PlaneEntity};
use crate::metrics::{compute_global, compute_local_all, normalize_profiles, BandRecord, GlobalMetrics, LocalParams, MetricProfile};
use crate::pointcloud::{estimate_normals, PointCloud};
use crate::rng;
use crate::scene::{build_scenes, filter_noise, SceneParams, StreetScene};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Voxel edge for downsampling; 0 keeps every point.
    pub cell_size: f64,
    pub detection: DetectionParams,
    pub scene: SceneParams,
    pub band_width: f64,
    pub min_band_support: usize,
    /// Neighbours used when normals have to be estimated.
    pub normal_neighbors: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            cell_size: 0.05,
            detection: DetectionParams::hillside(),
            scene: SceneParams::default(),
            band_width: 0.5,
            min_band_support: 50,
            normal_neighbors: 12,
        }
    }
}

impl PipelineConfig {
    pub fn preset(name: &str) -> Result<PipelineConfig> {
        Ok(PipelineConfig {
            detection: DetectionParams::preset(name)?,
            ..PipelineConfig::default()
        })
    }

    /// Sets one key; detection keys are delegated to [`DetectionParams::set`].
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(vec![format!("{key}: cannot parse '{v}'")]))
        }
        match key {
            "cell_m" => self.cell_size = num(key, value)?,
            "min_density" => self.scene.min_density = num(key, value)?,
            "adjacency_radius" => self.scene.adjacency_radius = num(key, value)?,
            "side_offset" => self.scene.side_offset = num(key, value)?,
            "band_width" => self.band_width = num(key, value)?,
            "min_band_support" => self.min_band_support = num(key, value)?,
            "normal_k" => self.normal_neighbors = num(key, value)?,
            _ => self.detection.set(key, value)?,
        }
        Ok(())
    }

    /// Lists every violated constraint across all stages.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for r in [self.detection.validate(), self.scene.validate()] {
            if let Err(Error::InvalidConfig(p)) = r {
                problems.extend(p);
            }
        }
        if !(self.cell_size >= 0.0 && self.cell_size.is_finite()) {
            problems.push(format!("cell_m must be >= 0, got {}", self.cell_size));
        }
        if !(self.band_width > 0.0 && self.band_width.is_finite()) {
            problems.push(format!("band_width must be > 0, got {}", self.band_width));
        }
        if self.min_band_support < 3 {
            problems.push(format!("min_band_support must be >= 3, got {}", self.min_band_support));
        }
        if self.normal_neighbors < 3 {
            problems.push(format!("normal_k must be >= 3, got {}", self.normal_neighbors));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }

    pub fn local_params(&self) -> LocalParams {
        LocalParams {
            band_width: self.band_width,
            detection: self.detection.clone(),
            min_band_support: self.min_band_support,
        }
    }
}

/// The cloud itself when it carries normals, otherwise a copy with
/// estimated normals. Fails when no point has a usable normal.
pub fn with_normals(cloud: PointCloud, k: usize) -> Result<PointCloud> {
    let cloud = if cloud.has_normals() { cloud } else { estimate_normals(&cloud, k)? };
    if !cloud.is_empty() && cloud.invalid_normal_count() == cloud.len() {
        return Err(Error::Degenerate(format!(
            "none of the {} points has a well-defined normal",
            cloud.len()
        )));
    }
    Ok(cloud)
}

/// Detection followed by per-fragment regression.
pub fn detect_entities(cloud: &PointCloud, params: &DetectionParams) -> Result<(DetectionResult, Vec<PlaneEntity>)> {
    let res = detect_planes(cloud, params)?;
    let entities = build_entities(cloud, &res.fragments, res.epsilon / 2.0, rng::derive(params.seed, &[0x_e4]));
    Ok((res, entities))
}

/// Noise filter followed by grouping.
pub fn scenes_from_entities(cloud: &PointCloud, entities: &[PlaneEntity], params: &SceneParams) -> Vec<StreetScene> {
    let (kept, noise) = filter_noise(entities, params.min_density);
    tracing::info!(kept = kept.len(), noise = noise.len(), "noise filter");
    build_scenes(cloud, &kept, params)
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub detection: DetectionResult,
    pub entities: Vec<PlaneEntity>,
    pub scenes: Vec<StreetScene>,
    pub global: Vec<GlobalMetrics>,
    pub profile: Option<MetricProfile>,
    pub local: Vec<BandRecord>,
}

/// Runs every stage on a cloud with normals. Local metrics are skipped
/// unless `local` is set.
pub fn run(cloud: &PointCloud, config: &PipelineConfig, local: bool) -> Result<PipelineOutput> {
    config.validate()?;
    let (detection, entities) = detect_entities(cloud, &config.detection)?;
    let scenes = scenes_from_entities(cloud, &entities, &config.scene);
    let global = compute_global(&scenes)?;
    let profile = if global.is_empty() {
        None
    } else {
        Some(normalize_profiles(&global)?)
    };
    let local = if local {
        compute_local_all(cloud, &scenes, &config.local_params())?
    } else {
        Vec::new()
    };
    Ok(PipelineOutput {
        detection,
        entities,
        scenes,
        global,
        profile,
        local,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, CorridorSpec};

    #[test]
    fn corridor_end_to_end() {
        let cloud = generate(&CorridorSpec::uniform(6.0, 3.0, 6.0).build()).unwrap();
        let out = run(&cloud, &PipelineConfig::default(), true).unwrap();
        assert_eq!(out.entities.len(), 3);
        assert_eq!(out.scenes.len(), 1);
        let g = &out.global[0];
        assert!((g.street_width.unwrap() - 3.0).abs() < 0.01);
        assert!((g.street_canyon.unwrap() - 2.0).abs() < 0.02);
        assert_eq!(out.local.len(), 12);
    }

    #[test]
    fn config_errors_are_collected() {
        let mut c = PipelineConfig::default();
        c.set("epsilon_m", "-1").unwrap();
        c.set("band_width", "0").unwrap();
        match c.validate() {
            Err(Error::InvalidConfig(p)) => assert_eq!(p.len(), 2, "{p:?}"),
            other => panic!("{other:?}"),
        }
        assert!(c.set("nonsense", "1").is_err());
    }

    #[test]
    fn collinear_cloud_is_degenerate() {
        let pts = (0..40).map(|i| crate::Point3::new(i as f64, 0.0, 0.0)).collect();
        let cloud = PointCloud::new(pts).unwrap();
        assert!(matches!(with_normals(cloud, 12), Err(Error::Degenerate(_))));
    }

    #[test]
    fn partial_json_keeps_defaults() {
        let c: PipelineConfig = serde_json::from_str(r#"{"band_width": 1.0, "detection": {"epsilon": 0.3}}"#).unwrap();
        assert_eq!(c.band_width, 1.0);
        assert_eq!(c.detection.epsilon, 0.3);
        assert_eq!(c.detection.min_support, 750);
        assert_eq!(c.scene, SceneParams::default());
    }
}
