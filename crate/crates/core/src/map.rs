//! Morphological maps: one square glyph per band at its centerline anchor,
//! shaded by the band's metric normalized within its scan.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::geometry::Polygon;
use crate::metrics::{normalize, BandRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapMetric {
    Width,
    Elevation,
    FacadeHeight,
    Canyon,
}

impl MapMetric {
    pub const ALL: [MapMetric; 4] = [
        MapMetric::Width,
        MapMetric::Elevation,
        MapMetric::FacadeHeight,
        MapMetric::Canyon,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MapMetric::Width => "width",
            MapMetric::Elevation => "elevation",
            MapMetric::FacadeHeight => "facade_height",
            MapMetric::Canyon => "canyon",
        }
    }

    pub fn units(self) -> &'static str {
        match self {
            MapMetric::Canyon => "ratio",
            _ => "m",
        }
    }

    pub fn value(self, r: &BandRecord) -> Option<f64> {
        match self {
            MapMetric::Width => r.width,
            MapMetric::Elevation => r.elevation,
            MapMetric::FacadeHeight => r.facade_height,
            MapMetric::Canyon => r.canyon,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pixel {
    pub scene_id: usize,
    pub band_index: usize,
    pub x: f64,
    pub y: f64,
    /// Normalized value in `[0, 1]`.
    pub value: f64,
    pub raw: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapLayer {
    pub metric: MapMetric,
    pub scan: String,
    /// Largest raw value in the scan, absent for an empty layer.
    pub max_raw: Option<f64>,
    /// Min-max rescaled because of negative raw values.
    pub shifted: bool,
    pub pixels: Vec<Pixel>,
}

/// One pixel per band with a present value, normalized by the scan maximum.
pub fn build_layer(metric: MapMetric, scan: &str, records: &[BandRecord]) -> MapLayer {
    let raw: Vec<Option<f64>> = records.iter().map(|r| metric.value(r)).collect();
    let norm = normalize(&raw);
    if norm.max.is_none() {
        tracing::warn!(metric = metric.as_str(), scan, "metric absent in every band; empty layer");
    }
    let pixels = records
        .iter()
        .zip(raw.iter().zip(&norm.values))
        .filter_map(|(r, (raw, v))| {
            Some(Pixel {
                scene_id: r.scene_id,
                band_index: r.band_index,
                x: r.anchor.x,
                y: r.anchor.y,
                value: (*v)?,
                raw: (*raw)?,
            })
        })
        .collect();
    MapLayer {
        metric,
        scan: scan.to_string(),
        max_raw: norm.max,
        shifted: norm.shifted,
        pixels,
    }
}

/// Layers for every `(scan, metric)`, scans in input order. Each scan is
/// normalized on its own.
pub fn build_layers(scans: &[(String, Vec<BandRecord>)]) -> Vec<MapLayer> {
    scans
        .iter()
        .flat_map(|(scan, records)| MapMetric::ALL.iter().map(move |&m| build_layer(m, scan, records)))
        .collect()
}

/// Fill opacity for a normalized value: linear, never fully transparent.
pub fn darkness(value: f64) -> f64 {
    0.1 + 0.9 * value.clamp(0.0, 1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MapStyle {
    /// Glyph edge length in map meters.
    pub glyph_size: f64,
    /// Blank border around the content, meters.
    pub margin: f64,
    /// Output pixels per map meter.
    pub scale: f64,
    /// Optional plan-view outlines drawn under the glyphs.
    pub outlines: Vec<Polygon>,
}

impl Default for MapStyle {
    fn default() -> Self {
        MapStyle {
            glyph_size: 0.5,
            margin: 2.0,
            scale: 20.0,
            outlines: Vec::new(),
        }
    }
}

const LEGEND_HEIGHT: f64 = 2.0;

/// SVG 1.1 document for a layer. Map y points up, so SVG y is flipped.
/// Output is a pure function of its inputs.
pub fn render_svg(layer: &MapLayer, style: &MapStyle) -> String {
    let pts = layer
        .pixels
        .iter()
        .map(|p| [p.x, p.y])
        .chain(style.outlines.iter().flat_map(|o| o.vertices.iter().copied()));
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in pts {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    if !lo[0].is_finite() {
        (lo, hi) = ([0.0, 0.0], [8.0, 0.0]);
    }
    let half = style.glyph_size / 2.0;
    let (x0, x1) = (lo[0] - half - style.margin, hi[0] + half + style.margin);
    let (y0, y1) = (lo[1] - half - style.margin, hi[1] + half + style.margin);
    let (w, h) = (x1 - x0, y1 - y0 + LEGEND_HEIGHT);
    let sy = |y: f64| y1 - y + LEGEND_HEIGHT;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{:.0}" height="{:.0}" viewBox="{:.3} 0 {:.3} {:.3}">"#,
        w * style.scale,
        h * style.scale,
        x0,
        w,
        h
    );
    let _ = writeln!(s, r##"<rect x="{x0:.3}" y="0" width="{w:.3}" height="{h:.3}" fill="#fff"/>"##);
    for o in &style.outlines {
        let ring: Vec<String> = o.vertices.iter().map(|v| format!("{:.3},{:.3}", v[0], sy(v[1]))).collect();
        let _ = writeln!(
            s,
            r##"<polygon class="outline" points="{}" fill="none" stroke="#999" stroke-width="0.05"/>"##,
            ring.join(" ")
        );
    }
    for p in &layer.pixels {
        let _ = writeln!(
            s,
            r##"<rect class="px" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="#000" fill-opacity="{:.3}"/>"##,
            p.x - half,
            sy(p.y) - half,
            style.glyph_size,
            style.glyph_size,
            darkness(p.value)
        );
    }
    // Legend: a five-step ramp labeled with the raw maximum.
    let label = match layer.max_raw {
        Some(m) => format!("{} ({}) max {:.3} {}", layer.metric.as_str(), layer.scan, m, layer.metric.units()),
        None => format!("{} ({}) no data", layer.metric.as_str(), layer.scan),
    };
    let _ = writeln!(s, r#"<g class="legend" font-family="sans-serif" font-size="0.4">"#);
    for k in 0..5 {
        let v = k as f64 / 4.0;
        let _ = writeln!(
            s,
            r##"<rect x="{:.3}" y="0.300" width="0.400" height="0.400" fill="#000" fill-opacity="{:.3}" stroke="#000" stroke-width="0.02"/>"##,
            x0 + 0.3 + 0.5 * k as f64,
            darkness(v)
        );
    }
    let _ = writeln!(s, r#"<text x="{:.3}" y="1.300">{}</text>"#, x0 + 0.3, escape(&label));
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerMeta {
    pub metric: MapMetric,
    pub scan: String,
    pub max_raw: Option<f64>,
    pub units: String,
    pub pixel_count: usize,
}

pub fn layer_meta(layer: &MapLayer) -> LayerMeta {
    LayerMeta {
        metric: layer.metric,
        scan: layer.scan.clone(),
        max_raw: layer.max_raw,
        units: layer.metric.units().to_string(),
        pixel_count: layer.pixels.len(),
    }
}

/// Pixels as GeoJSON point features in the scan's local frame.
pub fn layer_geojson(layer: &MapLayer) -> Value {
    let features: Vec<Value> = layer
        .pixels
        .iter()
        .map(|p| {
            json!({
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": [p.x, p.y]},
                "properties": {
                    "metric": layer.metric.as_str(),
                    "scene_id": p.scene_id,
                    "band_index": p.band_index,
                    "value": p.value,
                    "raw": p.raw,
                },
            })
        })
        .collect();
    json!({"type": "FeatureCollection", "features": features})
}
