//! One function per pipeline stage. Each reads the previous stage's files
//! from the output directory, writes its own artifacts and a manifest under
//! `manifests/`.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Instant;

use morphoscan::export::{entities_geojson, write_global_csv, write_json, write_local_csv};
use morphoscan::geometry::{PlaneEntity, Polygon};
use morphoscan::map::{build_layers, layer_geojson, layer_meta, render_svg, MapStyle};
use morphoscan::metrics::{compute_global, compute_local_all, normalize_profiles, BandRecord, GlobalMetrics, MetricProfile};
use morphoscan::pipeline::{self, PipelineConfig};
use morphoscan::pointcloud::{downsample, read_from, write_to, Format, PointCloud};
use morphoscan::scene::{filter_noise, SceneRoster, StreetScene};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::manifest::{FileDigest, Manifest};
use crate::CliError;

pub const CLOUD: &str = "cloud.ply";
pub const FRAGMENTS: &str = "fragments.json";
pub const ENTITIES: &str = "entities.json";
pub const ENTITIES_GEOJSON: &str = "entities.geojson";
pub const SCENES: &str = "scenes.json";
pub const GLOBAL_CSV: &str = "global.csv";
pub const GLOBAL_JSON: &str = "global.json";
pub const LOCAL_CSV: &str = "local.csv";
pub const LOCAL_JSON: &str = "local.json";

/// Where a stage reads and writes, and how it is configured.
pub struct Context<'a> {
    pub out: &'a Path,
    pub config: &'a PipelineConfig,
    pub threads: Option<usize>,
}

/// Point cloud source for the first stage.
pub enum Input {
    Path(PathBuf),
    Stdin,
}

impl Input {
    pub fn parse(arg: &str) -> Input {
        if arg == "-" {
            Input::Stdin
        } else {
            Input::Path(PathBuf::from(arg))
        }
    }

    pub fn name(&self) -> String {
        match self {
            Input::Path(p) => p.display().to_string(),
            Input::Stdin => "-".to_string(),
        }
    }

    /// File stem used to label map layers.
    pub fn scan_name(&self) -> String {
        match self {
            Input::Path(p) => p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "scan".into()),
            Input::Stdin => "stdin".to_string(),
        }
    }

    fn read(&self) -> Result<Vec<u8>, CliError> {
        match self {
            Input::Path(p) => fs::read(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
            Input::Stdin => {
                let mut buf = Vec::new();
                std::io::stdin()
                    .read_to_end(&mut buf)
                    .map_err(|e| CliError::Input(format!("stdin: {e}")))?;
                Ok(buf)
            }
        }
    }
}

struct Run<'a> {
    ctx: &'a Context<'a>,
    manifest: Manifest,
    start: Instant,
}

impl<'a> Run<'a> {
    fn begin(ctx: &'a Context<'a>, stage: &str) -> Result<Run<'a>, CliError> {
        fs::create_dir_all(ctx.out.join("manifests")).map_err(|e| CliError::Input(format!("{}: {e}", ctx.out.display())))?;
        tracing::info!(stage, out = %ctx.out.display(), "stage start");
        Ok(Run {
            ctx,
            manifest: Manifest::new(stage, ctx.config, ctx.threads),
            start: Instant::now(),
        })
    }

    /// Reads an artifact produced by `stage`.
    fn read(&mut self, name: &str, stage: &str) -> Result<Vec<u8>, CliError> {
        let path = self.ctx.out.join(name);
        if !path.exists() {
            return Err(CliError::Missing {
                path: path.display().to_string(),
                stage: stage.to_string(),
            });
        }
        let bytes = fs::read(&path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        self.manifest.inputs.push(FileDigest::of_bytes(name, &bytes));
        Ok(bytes)
    }

    fn read_json<T: DeserializeOwned>(&mut self, name: &str, stage: &str) -> Result<T, CliError> {
        let bytes = self.read(name, stage)?;
        serde_json::from_slice(&bytes).map_err(|e| CliError::Input(format!("{name}: {e}")))
    }

    fn read_cloud(&mut self) -> Result<PointCloud, CliError> {
        let bytes = self.read(CLOUD, "downsample")?;
        Ok(read_from(&bytes, Some(Format::PlyBinaryLe))?)
    }

    fn read_scenes(&mut self) -> Result<(Vec<PlaneEntity>, Vec<StreetScene>), CliError> {
        let entities: Vec<PlaneEntity> = self.read_json(ENTITIES, "detect")?;
        let rosters: Vec<SceneRoster> = self.read_json(SCENES, "scenes")?;
        let scenes = rosters
            .iter()
            .map(|r| StreetScene::from_roster(r, &entities))
            .collect::<morphoscan::Result<Vec<_>>>()?;
        Ok((entities, scenes))
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.ctx.out.join(name);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
        }
        fs::write(&path, bytes).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        self.manifest.outputs.push(FileDigest::of_bytes(name, bytes));
        Ok(())
    }

    fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut buf = Vec::new();
        write_json(value, &mut buf)?;
        self.write(name, &buf)
    }

    fn count(&mut self, key: &str, value: f64) {
        self.manifest.count(key, value);
    }

    fn finish(mut self) -> Result<Manifest, CliError> {
        self.manifest.wall_time_s = self.start.elapsed().as_secs_f64();
        let mut buf = Vec::new();
        write_json(&self.manifest, &mut buf)?;
        let path = self.ctx.out.join("manifests").join(format!("{}.json", self.manifest.stage));
        fs::write(&path, &buf).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        tracing::info!(stage = %self.manifest.stage, seconds = self.manifest.wall_time_s, "stage done");
        Ok(self.manifest)
    }
}

/// Loads the input, voxel-downsamples it and estimates missing normals.
pub fn downsample_stage(ctx: &Context, input: &Input) -> Result<Manifest, CliError> {
    let mut run = Run::begin(ctx, "downsample")?;
    let bytes = input.read()?;
    run.manifest.inputs.push(FileDigest::of_bytes(input.name(), &bytes));
    let cloud = read_from(&bytes, None)?;
    drop(bytes);
    run.count("input_points", cloud.len() as f64);
    let reduced = if ctx.config.cell_size > 0.0 {
        downsample(&cloud, ctx.config.cell_size)?
    } else {
        cloud
    };
    let had_normals = reduced.has_normals();
    let cloud = pipeline::with_normals(reduced, ctx.config.normal_neighbors)?;
    run.count("output_points", cloud.len() as f64);
    run.count("normals_estimated", if had_normals { 0.0 } else { 1.0 });
    run.count("invalid_normals", cloud.invalid_normal_count() as f64);
    let mut buf = Vec::new();
    write_to(&cloud, &mut buf, Format::PlyBinaryLe)?;
    run.write(CLOUD, &buf)?;
    run.finish()
}

pub fn detect_stage(ctx: &Context) -> Result<Manifest, CliError> {
    let mut run = Run::begin(ctx, "detect")?;
    let cloud = run.read_cloud()?;
    let (result, entities) = pipeline::detect_entities(&cloud, &ctx.config.detection)?;
    run.count("points", cloud.len() as f64);
    run.count("fragments", result.fragments.len() as f64);
    run.count("residual_points", result.residual.len() as f64);
    run.count("rounds", result.rounds as f64);
    run.count("candidates", result.candidates_drawn as f64);
    run.count("epsilon_m", result.epsilon);
    run.count("entities", entities.len() as f64);
    run.write_json(FRAGMENTS, &result)?;
    run.write_json(ENTITIES, &entities)?;
    run.write_json(ENTITIES_GEOJSON, &entities_geojson(&entities))?;
    run.finish()
}

pub fn scenes_stage(ctx: &Context) -> Result<Manifest, CliError> {
    let mut run = Run::begin(ctx, "scenes")?;
    let cloud = run.read_cloud()?;
    let entities: Vec<PlaneEntity> = run.read_json(ENTITIES, "detect")?;
    let (kept, noise) = filter_noise(&entities, ctx.config.scene.min_density);
    let scenes = pipeline::scenes_from_entities(&cloud, &entities, &ctx.config.scene);
    let planes: Vec<usize> = scenes.iter().map(|s| s.facades.len() + 1).collect();
    tracing::info!(scenes = scenes.len(), planes_per_scene = ?planes, "street scenes");
    run.count("entities_kept", kept.len() as f64);
    run.count("entities_noise", noise.len() as f64);
    run.count("scenes", scenes.len() as f64);
    let rosters: Vec<SceneRoster> = scenes.iter().map(StreetScene::roster).collect();
    run.write_json(SCENES, &rosters)?;
    run.finish()
}

#[derive(Serialize, Deserialize)]
struct GlobalFile {
    metrics: Vec<GlobalMetrics>,
    profile: Option<MetricProfile>,
}

pub fn global_stage(ctx: &Context) -> Result<Manifest, CliError> {
    let mut run = Run::begin(ctx, "global")?;
    let (_, scenes) = run.read_scenes()?;
    let metrics = compute_global(&scenes)?;
    let profile = if metrics.is_empty() {
        None
    } else {
        Some(normalize_profiles(&metrics)?)
    };
    run.count("scenes", metrics.len() as f64);
    run.count("scenes_with_width", metrics.iter().filter(|m| m.street_width.is_some()).count() as f64);
    let mut csv = Vec::new();
    write_global_csv(&metrics, profile.as_ref(), &mut csv)?;
    run.write(GLOBAL_CSV, &csv)?;
    run.write_json(GLOBAL_JSON, &GlobalFile { metrics, profile })?;
    run.finish()
}

pub fn local_stage(ctx: &Context) -> Result<Manifest, CliError> {
    let mut run = Run::begin(ctx, "local")?;
    let cloud = run.read_cloud()?;
    let (_, scenes) = run.read_scenes()?;
    let records = compute_local_all(&cloud, &scenes, &ctx.config.local_params())?;
    run.count("bands", records.len() as f64);
    run.count("bands_with_width", records.iter().filter(|r| r.width.is_some()).count() as f64);
    run.count("partial_bands", records.iter().filter(|r| r.partial).count() as f64);
    let mut csv = Vec::new();
    write_local_csv(&records, &mut csv)?;
    run.write(LOCAL_CSV, &csv)?;
    run.write_json(LOCAL_JSON, &records)?;
    run.finish()
}

/// Scan label recorded by the downsample stage, if any.
pub fn recorded_scan_name(out: &Path) -> Option<String> {
    let bytes = fs::read(out.join("manifests").join("downsample.json")).ok()?;
    let m: Manifest = serde_json::from_slice(&bytes).ok()?;
    let input = &m.inputs.first()?.path;
    if input == "-" {
        Some("stdin".to_string())
    } else {
        Path::new(input).file_stem().map(|s| s.to_string_lossy().into_owned())
    }
}

pub fn map_stage(ctx: &Context, scan: &str) -> Result<Manifest, CliError> {
    let mut run = Run::begin(ctx, "map")?;
    let records: Vec<BandRecord> = run.read_json(LOCAL_JSON, "local")?;
    let (_, scenes) = run.read_scenes()?;
    let outlines: Vec<Polygon> = scenes.iter().map(|s| s.street.plan_footprint()).collect();
    let style = MapStyle {
        outlines,
        ..MapStyle::default()
    };
    let layers = build_layers(&[(scan.to_string(), records)]);
    let mut glyphs = 0;
    for layer in &layers {
        let stem = format!("maps/{}_{}", layer.scan, layer.metric.as_str());
        run.write(&format!("{stem}.svg"), render_svg(layer, &style).as_bytes())?;
        run.write_json(&format!("{stem}.json"), &layer_meta(layer))?;
        run.write_json(&format!("{stem}.geojson"), &layer_geojson(layer))?;
        glyphs += layer.pixels.len();
    }
    run.count("layers", layers.len() as f64);
    run.count("glyphs", glyphs as f64);
    run.finish()
}

/// Every stage in order, writing the same files the stages write one by one.
pub fn all_stages(ctx: &Context, input: &Input, scan: &str) -> Result<Vec<Manifest>, CliError> {
    Ok(vec![
        downsample_stage(ctx, input)?,
        detect_stage(ctx)?,
        scenes_stage(ctx)?,
        global_stage(ctx)?,
        local_stage(ctx)?,
        map_stage(ctx, scan)?,
    ])
}
