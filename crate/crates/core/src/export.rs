//! File formats for pipeline artifacts: JSON, GeoJSON and CSV.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Result;
use crate::geometry::PlaneEntity;
use crate::metrics::{BandRecord, GlobalMetrics, MetricProfile};

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized, W: Write>(value: &T, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn save_json<T: Serialize + ?Sized>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_json(value, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let mut buf = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut buf)?;
    Ok(serde_json::from_slice(&buf)?)
}

/// Entity hulls as 3D polygons with their measurements.
pub fn entities_geojson(entities: &[PlaneEntity]) -> Value {
    let features: Vec<Value> = entities
        .iter()
        .map(|e| {
            let mut ring: Vec<[f64; 3]> = e.hull_3d().iter().map(|p| [p.x, p.y, p.z]).collect();
            if let Some(first) = ring.first().copied() {
                ring.push(first);
            }
            json!({
                "type": "Feature",
                "id": e.id,
                "geometry": {"type": "Polygon", "coordinates": [ring]},
                "properties": {
                    "orientation": e.orientation.as_str(),
                    "area_m2": e.area,
                    "height_m": e.height_extent,
                    "density_ppm2": e.density,
                    "point_count": e.point_count(),
                },
            })
        })
        .collect();
    json!({"type": "FeatureCollection", "features": features})
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per scene: raw metrics, then their normalized values. Absent
/// values are empty fields.
pub fn write_global_csv<W: Write>(metrics: &[GlobalMetrics], profile: Option<&MetricProfile>, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "scene_id",
        "width_m",
        "elevation_m",
        "heterogeneity_m",
        "density_per_m2",
        "canyon",
        "normalized_width",
        "normalized_elevation",
        "normalized_heterogeneity",
        "normalized_density",
        "normalized_canyon",
    ])?;
    for (k, m) in metrics.iter().enumerate() {
        let mut row = vec![m.scene_id.to_string()];
        row.extend(m.values().iter().map(|v| cell(*v)));
        let norm = profile.and_then(|p| p.rows.get(k)).map(|r| r.1).unwrap_or([None; 5]);
        row.extend(norm.iter().map(|v| cell(*v)));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_local_csv<W: Write>(records: &[BandRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "scene_id",
        "band_index",
        "s_mid_m",
        "width_m",
        "elevation_m",
        "facade_height_m",
        "canyon",
        "partial_flag",
    ])?;
    for r in records {
        out.write_record([
            r.scene_id.to_string(),
            r.band_index.to_string(),
            r.s_mid().to_string(),
            cell(r.width),
            cell(r.elevation),
            cell(r.facade_height),
            cell(r.canyon),
            (r.partial as u8).to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads the raw columns of a global metrics CSV back.
pub fn read_global_csv<R: Read>(r: R) -> Result<Vec<GlobalMetrics>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |k: usize| -> Result<Option<f64>> {
            let s = rec.get(k).unwrap_or("");
            if s.is_empty() {
                return Ok(None);
            }
            s.parse()
                .map(Some)
                .map_err(|_| crate::Error::parse(format!("line {}", line + 2), format!("bad number '{s}'")))
        };
        let required = |k: usize| -> Result<f64> {
            field(k)?.ok_or_else(|| crate::Error::parse(format!("line {}", line + 2), format!("column {k} is empty")))
        };
        out.push(GlobalMetrics {
            scene_id: required(0)? as usize,
            street_width: field(1)?,
            street_elevation: required(2)?,
            facade_heterogeneity: required(3)?,
            facade_density: required(4)?,
            street_canyon: field(5)?,
        });
    }
    Ok(out)
}
