//! PLY (ASCII and binary little-endian) and whitespace-delimited XYZ text.
//!
//! Recognised vertex properties: `x y z` (required), `nx ny nz`, `red green
//! blue`, `intensity` and `label`. Any other scalar property is skipped.
//! Binary output stores coordinates and normals as `double`, so a binary
//! round trip is bit-exact.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use super::{Attributes, Point3, PointCloud, Vector3};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    PlyAscii,
    PlyBinaryLe,
    XyzText,
}

impl Format {
    /// Guesses from the leading bytes: PLY files announce their encoding in
    /// the header, anything else is treated as XYZ text.
    pub fn sniff(bytes: &[u8]) -> Format {
        if bytes.starts_with(b"ply") {
            let head = &bytes[..bytes.len().min(256)];
            let head = String::from_utf8_lossy(head);
            if head.contains("binary_little_endian") {
                Format::PlyBinaryLe
            } else {
                Format::PlyAscii
            }
        } else {
            Format::XyzText
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Format> {
        match s {
            "ply-ascii" => Ok(Format::PlyAscii),
            "ply-binary-le" | "ply" => Ok(Format::PlyBinaryLe),
            "xyz-text" | "xyz" => Ok(Format::XyzText),
            other => Err(Error::InvalidConfig(vec![format!("unknown point cloud format '{other}'")])),
        }
    }
}

/// Loads a cloud. With `format = None` the encoding is sniffed from the
/// file contents.
pub fn load(path: impl AsRef<Path>, format: Option<Format>) -> Result<PointCloud> {
    let bytes = fs::read(path.as_ref())?;
    read_from(&bytes, format)
}

pub fn read_from(bytes: &[u8], format: Option<Format>) -> Result<PointCloud> {
    match format.unwrap_or_else(|| Format::sniff(bytes)) {
        Format::XyzText => read_xyz(bytes),
        f @ (Format::PlyAscii | Format::PlyBinaryLe) => read_ply(bytes, f),
    }
}

pub fn save(cloud: &PointCloud, path: impl AsRef<Path>, format: Format) -> Result<()> {
    let mut buf = Vec::new();
    write_to(cloud, &mut buf, format)?;
    fs::write(path.as_ref(), buf)?;
    Ok(())
}

pub fn write_to<W: Write>(cloud: &PointCloud, w: &mut W, format: Format) -> Result<()> {
    match format {
        Format::XyzText => write_xyz(cloud, w),
        Format::PlyAscii | Format::PlyBinaryLe => write_ply(cloud, w, format),
    }
}

// --- XYZ ---------------------------------------------------------------

fn read_xyz(bytes: &[u8]) -> Result<PointCloud> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::parse("xyz input", e.to_string()))?;
    let mut points = Vec::new();
    let mut normals = Vec::new();
    let mut columns: Option<usize> = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("//") {
            continue;
        }
        let loc = || format!("line {}", lineno + 1);
        let vals: Vec<f64> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>().map_err(|e| Error::parse(loc(), format!("'{t}': {e}"))))
            .collect::<Result<_>>()?;
        if vals.len() != 3 && vals.len() != 6 {
            return Err(Error::parse(loc(), format!("expected 3 or 6 columns, found {}", vals.len())));
        }
        match columns {
            None => columns = Some(vals.len()),
            Some(c) if c != vals.len() => {
                return Err(Error::parse(
                    loc(),
                    format!("normal-count mismatch: {} columns after {c}-column rows", vals.len()),
                ))
            }
            _ => {}
        }
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::parse(loc(), "non-finite value"));
        }
        points.push(Point3::new(vals[0], vals[1], vals[2]));
        if vals.len() == 6 {
            normals.push(Vector3::new(vals[3], vals[4], vals[5]));
        }
    }
    let cloud = PointCloud::new(points)?;
    if columns == Some(6) {
        cloud.with_normals(normals)
    } else {
        Ok(cloud)
    }
}

fn write_xyz<W: Write>(cloud: &PointCloud, w: &mut W) -> Result<()> {
    let normals = cloud.normals();
    for (i, p) in cloud.points().iter().enumerate() {
        match normals {
            Some(ns) => {
                let n = if cloud.normal_is_valid(i) { ns[i] } else { Vector3::zeros() };
                writeln!(w, "{} {} {} {} {} {}", p.x, p.y, p.z, n.x, n.y, n.z)?
            }
            None => writeln!(w, "{} {} {}", p.x, p.y, p.z)?,
        }
    }
    Ok(())
}

// --- PLY ---------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Scalar> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }

    fn is_float(self) -> bool {
        matches!(self, Scalar::F32 | Scalar::F64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Role {
    X,
    Y,
    Z,
    Nx,
    Ny,
    Nz,
    Red,
    Green,
    Blue,
    Intensity,
    Label,
    Ignored,
}

impl Role {
    fn from_name(name: &str) -> Role {
        match name {
            "x" => Role::X,
            "y" => Role::Y,
            "z" => Role::Z,
            "nx" | "normal_x" => Role::Nx,
            "ny" | "normal_y" => Role::Ny,
            "nz" | "normal_z" => Role::Nz,
            "red" | "r" | "diffuse_red" => Role::Red,
            "green" | "g" | "diffuse_green" => Role::Green,
            "blue" | "b" | "diffuse_blue" => Role::Blue,
            "intensity" | "scalar_intensity" => Role::Intensity,
            "label" => Role::Label,
            _ => Role::Ignored,
        }
    }
}

#[derive(Debug)]
struct Property {
    scalar: Scalar,
    role: Role,
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
    has_list: bool,
}

struct Header {
    format: Format,
    elements: Vec<Element>,
    body_offset: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    let mut offset = 0;
    let mut lineno = 0;
    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        lineno += 1;
        let end = bytes[offset..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::parse(format!("header line {lineno}"), "missing end_header"))?;
        let line = String::from_utf8_lossy(&bytes[offset..offset + end]);
        let line = line.trim_end_matches('\r').trim();
        offset += end + 1;
        let loc = || format!("header line {lineno}");
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("ply") if lineno == 1 => {}
            _ if lineno == 1 => return Err(Error::parse(loc(), "missing 'ply' magic")),
            Some("format") => {
                format = Some(match tok.next() {
                    Some("ascii") => Format::PlyAscii,
                    Some("binary_little_endian") => Format::PlyBinaryLe,
                    Some(other) => return Err(Error::parse(loc(), format!("unsupported encoding '{other}'"))),
                    None => return Err(Error::parse(loc(), "format line without encoding")),
                });
            }
            Some("comment") | Some("obj_info") | None => {}
            Some("element") => {
                let name = tok.next().ok_or_else(|| Error::parse(loc(), "element without name"))?;
                let count = tok
                    .next()
                    .and_then(|c| c.parse::<usize>().ok())
                    .ok_or_else(|| Error::parse(loc(), "element without valid count"))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                    has_list: false,
                });
            }
            Some("property") => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| Error::parse(loc(), "property before any element"))?;
                let ty = tok.next().ok_or_else(|| Error::parse(loc(), "property without type"))?;
                if ty == "list" {
                    el.has_list = true;
                    continue;
                }
                let scalar =
                    Scalar::parse(ty).ok_or_else(|| Error::parse(loc(), format!("unknown property type '{ty}'")))?;
                let name = tok.next().ok_or_else(|| Error::parse(loc(), "property without name"))?;
                el.properties.push(Property {
                    scalar,
                    role: Role::from_name(name),
                });
            }
            Some("end_header") => break,
            Some(other) => return Err(Error::parse(loc(), format!("unexpected header keyword '{other}'"))),
        }
    }
    let format = format.ok_or_else(|| Error::parse("header", "missing format line"))?;
    Ok(Header {
        format,
        elements,
        body_offset: offset,
    })
}

#[derive(Default)]
struct VertexSink {
    points: Vec<Point3>,
    normals: Vec<Vector3>,
    colors: Vec<[u8; 3]>,
    intensity: Vec<f32>,
    labels: Vec<i32>,
}

struct Layout {
    has_normals: bool,
    has_colors: bool,
    has_intensity: bool,
    has_label: bool,
    color_is_float: bool,
}

impl Layout {
    fn of(el: &Element) -> Result<Layout> {
        let has = |r: Role| el.properties.iter().any(|p| p.role == r);
        for (r, name) in [(Role::X, "x"), (Role::Y, "y"), (Role::Z, "z")] {
            if !has(r) {
                return Err(Error::parse("header", format!("vertex element lacks '{name}' property")));
            }
        }
        let normal_roles = [Role::Nx, Role::Ny, Role::Nz].map(has);
        if normal_roles.iter().any(|&b| b) && !normal_roles.iter().all(|&b| b) {
            return Err(Error::parse("header", "normal-count mismatch: partial nx/ny/nz properties"));
        }
        if el.has_list {
            return Err(Error::parse("header", "list properties on vertex element are not supported"));
        }
        Ok(Layout {
            has_normals: normal_roles[0],
            has_colors: has(Role::Red) && has(Role::Green) && has(Role::Blue),
            has_intensity: has(Role::Intensity),
            has_label: has(Role::Label),
            color_is_float: el
                .properties
                .iter()
                .any(|p| p.role == Role::Red && p.scalar.is_float()),
        })
    }
}

impl VertexSink {
    fn push(&mut self, props: &[Property], vals: &[f64], layout: &Layout, loc: &dyn Fn() -> String) -> Result<()> {
        let mut p = [0.0; 3];
        let mut n = [0.0; 3];
        let mut c = [0u8; 3];
        let mut inten = 0.0f32;
        let mut label = 0i32;
        let to_u8 = |v: f64| -> u8 {
            if layout.color_is_float {
                (v * 255.0).round().clamp(0.0, 255.0) as u8
            } else {
                v.clamp(0.0, 255.0) as u8
            }
        };
        for (prop, &v) in props.iter().zip(vals) {
            match prop.role {
                Role::X => p[0] = v,
                Role::Y => p[1] = v,
                Role::Z => p[2] = v,
                Role::Nx => n[0] = v,
                Role::Ny => n[1] = v,
                Role::Nz => n[2] = v,
                Role::Red => c[0] = to_u8(v),
                Role::Green => c[1] = to_u8(v),
                Role::Blue => c[2] = to_u8(v),
                Role::Intensity => inten = v as f32,
                Role::Label => label = v as i32,
                Role::Ignored => {}
            }
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::parse(loc(), "non-finite coordinate"));
        }
        if layout.has_normals && n.iter().any(|v| !v.is_finite()) {
            return Err(Error::parse(loc(), "non-finite normal"));
        }
        self.points.push(Point3::new(p[0], p[1], p[2]));
        if layout.has_normals {
            self.normals.push(Vector3::new(n[0], n[1], n[2]));
        }
        if layout.has_colors {
            self.colors.push(c);
        }
        if layout.has_intensity {
            self.intensity.push(inten);
        }
        if layout.has_label {
            self.labels.push(label);
        }
        Ok(())
    }

    fn finish(self, layout: &Layout) -> Result<PointCloud> {
        let mut cloud = PointCloud::new(self.points)?;
        if layout.has_normals {
            cloud = cloud.with_normals(self.normals)?;
        }
        cloud.with_attributes(Attributes {
            colors: layout.has_colors.then_some(self.colors),
            intensity: layout.has_intensity.then_some(self.intensity),
            labels: layout.has_label.then_some(self.labels),
        })
    }
}

fn read_ply(bytes: &[u8], expected: Format) -> Result<PointCloud> {
    let header = parse_header(bytes)?;
    if header.format != expected {
        return Err(Error::parse(
            "header",
            format!("file encoding {:?} does not match requested {:?}", header.format, expected),
        ));
    }
    let body = &bytes[header.body_offset..];
    let vi = header
        .elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| Error::parse("header", "no vertex element"))?;
    let vertex = &header.elements[vi];
    let layout = Layout::of(vertex)?;
    let mut sink = VertexSink::default();

    match header.format {
        Format::PlyAscii => {
            let text = std::str::from_utf8(body).map_err(|e| Error::parse("body", e.to_string()))?;
            let header_lines = bytes[..header.body_offset].iter().filter(|&&b| b == b'\n').count();
            let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
            for el in &header.elements[..vi] {
                for _ in 0..el.count {
                    lines.next().ok_or_else(|| Error::parse("body", format!("truncated '{}' element", el.name)))?;
                }
            }
            let mut vals = Vec::with_capacity(vertex.properties.len());
            for rec in 0..vertex.count {
                let (lineno, line) = lines.next().ok_or_else(|| {
                    Error::parse(format!("vertex record {rec}"), "unexpected end of file")
                })?;
                let lineno = header_lines + lineno + 1;
                let loc = || format!("line {lineno} (vertex record {rec})");
                vals.clear();
                for t in line.split_whitespace() {
                    vals.push(t.parse::<f64>().map_err(|e| Error::parse(loc(), format!("'{t}': {e}")))?);
                }
                if vals.len() != vertex.properties.len() {
                    return Err(Error::parse(
                        loc(),
                        format!("expected {} values, found {}", vertex.properties.len(), vals.len()),
                    ));
                }
                sink.push(&vertex.properties, &vals, &layout, &loc)?;
            }
        }
        Format::PlyBinaryLe => {
            let mut offset = 0usize;
            for el in &header.elements[..vi] {
                if el.has_list {
                    return Err(Error::parse(
                        "header",
                        format!("cannot skip list element '{}' preceding vertices", el.name),
                    ));
                }
                offset += el.count * el.properties.iter().map(|p| p.scalar.size()).sum::<usize>();
            }
            let stride: usize = vertex.properties.iter().map(|p| p.scalar.size()).sum();
            let needed = offset + stride * vertex.count;
            if body.len() < needed {
                let rec = (body.len().saturating_sub(offset)) / stride.max(1);
                return Err(Error::parse(format!("vertex record {rec}"), "unexpected end of file"));
            }
            let mut vals = vec![0.0; vertex.properties.len()];
            for rec in 0..vertex.count {
                let mut o = offset + rec * stride;
                for (k, prop) in vertex.properties.iter().enumerate() {
                    vals[k] = prop.scalar.read_le(&body[o..]);
                    o += prop.scalar.size();
                }
                let loc = || format!("vertex record {rec}");
                sink.push(&vertex.properties, &vals, &layout, &loc)?;
            }
        }
        Format::XyzText => unreachable!(),
    }
    sink.finish(&layout)
}

fn write_ply<W: Write>(cloud: &PointCloud, w: &mut W, format: Format) -> Result<()> {
    let normals = cloud.normals();
    let attrs = cloud.attributes();
    let enc = if format == Format::PlyAscii { "ascii" } else { "binary_little_endian" };
    let mut header = format!("ply\nformat {enc} 1.0\nelement vertex {}\n", cloud.len());
    header.push_str("property double x\nproperty double y\nproperty double z\n");
    if normals.is_some() {
        header.push_str("property double nx\nproperty double ny\nproperty double nz\n");
    }
    if attrs.colors.is_some() {
        header.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    }
    if attrs.intensity.is_some() {
        header.push_str("property float intensity\n");
    }
    if attrs.labels.is_some() {
        header.push_str("property int label\n");
    }
    header.push_str("end_header\n");
    w.write_all(header.as_bytes())?;

    let normal_at = |i: usize| -> Option<Vector3> {
        normals.map(|ns| if cloud.normal_is_valid(i) { ns[i] } else { Vector3::zeros() })
    };
    let mut buf = Vec::with_capacity(64);
    for (i, p) in cloud.points().iter().enumerate() {
        buf.clear();
        if format == Format::PlyAscii {
            let mut line = format!("{} {} {}", p.x, p.y, p.z);
            if let Some(n) = normal_at(i) {
                line.push_str(&format!(" {} {} {}", n.x, n.y, n.z));
            }
            if let Some(c) = &attrs.colors {
                line.push_str(&format!(" {} {} {}", c[i][0], c[i][1], c[i][2]));
            }
            if let Some(v) = &attrs.intensity {
                line.push_str(&format!(" {}", v[i]));
            }
            if let Some(l) = &attrs.labels {
                line.push_str(&format!(" {}", l[i]));
            }
            line.push('\n');
            buf.extend_from_slice(line.as_bytes());
        } else {
            for c in p.coords.iter() {
                buf.extend_from_slice(&c.to_le_bytes());
            }
            if let Some(n) = normal_at(i) {
                for c in n.iter() {
                    buf.extend_from_slice(&c.to_le_bytes());
                }
            }
            if let Some(c) = &attrs.colors {
                buf.extend_from_slice(&c[i]);
            }
            if let Some(v) = &attrs.intensity {
                buf.extend_from_slice(&v[i].to_le_bytes());
            }
            if let Some(l) = &attrs.labels {
                buf.extend_from_slice(&l[i].to_le_bytes());
            }
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn xyz_three_points() {
        let c = read_from(b"0 0 0\n1 0 0\n0 1 0\n", Some(Format::XyzText)).unwrap();
        assert_eq!(c.len(), 3);
        let bb = c.bbox().unwrap();
        assert_eq!(bb.min, Point3::new(0.0, 0.0, 0.0));
        assert_eq!(bb.max, Point3::new(1.0, 1.0, 0.0));
        assert!(!c.has_normals());
    }

    #[test]
    fn xyz_with_normals_and_mismatch() {
        let c = read_from(b"0 0 0 0 0 1\n1 0 0 0 0 1\n", None).unwrap();
        assert!(c.has_normals());
        let err = read_from(b"0 0 0 0 0 1\n1 0 0\n", None).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn xyz_non_finite_names_line() {
        let err = read_from(b"0 0 0\n1 nan 0\n", None).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn ply_ascii_with_normals() {
        let src = "ply\nformat ascii 1.0\ncomment test\nelement vertex 4\n\
                   property float x\nproperty float y\nproperty float z\n\
                   property float nx\nproperty float ny\nproperty float nz\n\
                   property uchar red\nproperty uchar green\nproperty uchar blue\n\
                   property float intensity\nelement face 0\nproperty list uchar int vertex_indices\nend_header\n\
                   0 0 0 0 0 1 10 20 30 0.5\n1 0 0 0 0 1 10 20 30 0.5\n0 1 0 0 0 1 10 20 30 0.5\n1 1 0 0 0 1 10 20 30 0.5\n";
        let c = read_from(src.as_bytes(), None).unwrap();
        assert_eq!(c.len(), 4);
        assert_eq!(c.normals().unwrap().len(), 4);
        assert_eq!(c.attributes().colors.as_ref().unwrap()[2], [10, 20, 30]);
        assert_eq!(c.attributes().intensity.as_ref().unwrap()[0], 0.5);
    }

    #[test]
    fn ply_errors_name_location() {
        let bad_header = b"ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nend_header\n0\n";
        assert!(read_from(bad_header, None).unwrap_err().to_string().contains("'y'"));
        let short = b"ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 0 0\n0 0\n";
        let err = read_from(short, None).unwrap_err().to_string();
        assert!(err.contains("line 9"), "{err}");
        let partial = b"ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nproperty float nx\nend_header\n0 0 0 1\n";
        assert!(read_from(partial, None).unwrap_err().to_string().contains("normal-count"));
        let truncated = b"ply\nformat binary_little_endian 1.0\nelement vertex 2\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
        assert!(read_from(truncated, None).unwrap_err().to_string().contains("vertex record 0"));
        assert!(read_from(b"plx\n", Some(Format::PlyAscii)).is_err());
    }

    #[test]
    fn binary_float32_input() {
        let mut bytes = b"ply\nformat binary_little_endian 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nproperty uchar label_ignored\nend_header\n".to_vec();
        for v in [1.5f32, -2.0, 3.25] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        bytes.push(7);
        let c = read_from(&bytes, None).unwrap();
        assert_eq!(*c.point(0), Point3::new(1.5, -2.0, 3.25));
    }

    #[test]
    fn ascii_round_trip_exact() {
        let c = PointCloud::new(vec![Point3::new(0.1, 1.0 / 3.0, -7.25e-9)])
            .unwrap()
            .with_normals(vec![Vector3::new(0.6, 0.0, 0.8)])
            .unwrap();
        let mut buf = Vec::new();
        write_to(&c, &mut buf, Format::PlyAscii).unwrap();
        assert_eq!(read_from(&buf, None).unwrap(), c);
    }

    proptest! {
        #[test]
        fn binary_round_trip_is_bit_exact(
            coords in proptest::collection::vec((-1e6f64..1e6, -1e6f64..1e6, -1e6f64..1e6), 0..64),
            labels in proptest::collection::vec(-1i32..100, 64),
        ) {
            let pts: Vec<Point3> = coords.iter().map(|&(x, y, z)| Point3::new(x, y, z)).collect();
            let n = pts.len();
            let normals: Vec<Vector3> = coords.iter().map(|&(x, y, z)| Vector3::new(x, y, z + 1e7).normalize()).collect();
            let c = PointCloud::new(pts).unwrap().with_normals(normals).unwrap()
                .with_attributes(Attributes { labels: Some(labels[..n].to_vec()), ..Default::default() }).unwrap();
            let mut buf = Vec::new();
            write_to(&c, &mut buf, Format::PlyBinaryLe).unwrap();
            let back = read_from(&buf, Some(Format::PlyBinaryLe)).unwrap();
            for (a, b) in c.points().iter().zip(back.points()) {
                for k in 0..3 {
                    prop_assert_eq!(a[k].to_bits(), b[k].to_bits());
                }
            }
            prop_assert_eq!(back.labels(), c.labels());
        }
    }
}
