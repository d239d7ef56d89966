//! Plain-text geometry formats: XYZ point lists, ASCII PLY, OFF meshes.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::{PointCloud, Vec3};
use crate::mesh::Mesh;

use super::umef::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Xyz,
    PlyAscii,
    Off,
}

impl Format {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .unwrap_or_default();
        match ext.as_str() {
            "xyz" | "txt" => Ok(Self::Xyz),
            "ply" => Ok(Self::PlyAscii),
            "off" => Ok(Self::Off),
            _ => Err(Error::invalid(format!("cannot infer geometry format of '{}'", path.display()))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Cloud(PointCloud),
    Mesh(Mesh),
}

impl Geometry {
    /// Vertices of a mesh, or the cloud itself.
    pub fn into_cloud(self) -> PointCloud {
        match self {
            Self::Cloud(c) => c,
            Self::Mesh(m) => PointCloud::from_parts(m.vertices, None),
        }
    }
}

/// Non-empty lines with comments stripped, numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn parse_f64(token: &str, line: usize) -> Result<f64> {
    let v: f64 = token
        .parse()
        .map_err(|e| Error::parse(line, format!("bad number '{token}': {e}")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("non-finite value '{token}'")));
    }
    Ok(v)
}

fn parse_usize(token: &str, line: usize) -> Result<usize> {
    token
        .parse()
        .map_err(|e| Error::parse(line, format!("bad count '{token}': {e}")))
}

pub fn parse_xyz(text: &str) -> Result<PointCloud> {
    let mut points = Vec::new();
    for (no, line) in content_lines(text) {
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 3 {
            return Err(Error::parse(no, format!("expected 3 coordinates, found {}", t.len())));
        }
        points.push(Vec3::new(parse_f64(t[0], no)?, parse_f64(t[1], no)?, parse_f64(t[2], no)?));
    }
    if points.is_empty() {
        return Err(Error::parse(1, "no points"));
    }
    PointCloud::new(points)
}

pub fn format_xyz(cloud: &PointCloud) -> String {
    let mut out = String::new();
    for p in cloud.points() {
        let _ = writeln!(out, "{} {} {}", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(p.z));
    }
    out
}

struct PlyElement {
    name: String,
    count: usize,
    /// Property names; list properties are recorded with a `list:` prefix.
    properties: Vec<String>,
}

pub fn parse_ply(text: &str) -> Result<PointCloud> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, "ply")) => {}
        Some((no, l)) => return Err(Error::parse(no, format!("expected 'ply', found '{l}'"))),
        None => return Err(Error::parse(1, "empty PLY file")),
    }
    let mut elements: Vec<PlyElement> = Vec::new();
    let mut last = 1;
    let mut ended = false;
    for (no, line) in lines.by_ref() {
        last = no;
        let t: Vec<&str> = line.split_whitespace().collect();
        match t.as_slice() {
            [] | ["comment", ..] | ["obj_info", ..] => {}
            ["format", "ascii", _] => {}
            ["format", f, ..] => return Err(Error::parse(no, format!("unsupported PLY format '{f}' (ASCII only)"))),
            ["element", name, count] => elements.push(PlyElement {
                name: name.to_string(),
                count: parse_usize(count, no)?,
                properties: Vec::new(),
            }),
            ["property", "list", _, _, name] => elements
                .last_mut()
                .ok_or_else(|| Error::parse(no, "property before any element"))?
                .properties
                .push(format!("list:{name}")),
            ["property", _, name] => elements
                .last_mut()
                .ok_or_else(|| Error::parse(no, "property before any element"))?
                .properties
                .push(name.to_string()),
            ["end_header"] => {
                ended = true;
                break;
            }
            _ => return Err(Error::parse(no, format!("unrecognized header line '{line}'"))),
        }
    }
    if !ended {
        return Err(Error::parse(last, "missing end_header"));
    }

    let mut body = lines.filter(|(_, l)| !l.is_empty());
    let mut points = Vec::new();
    for el in &elements {
        let is_vertex = el.name == "vertex";
        let axes: Option<[usize; 3]> = if is_vertex {
            let find = |n: &str| el.properties.iter().position(|p| p == n);
            match (find("x"), find("y"), find("z")) {
                (Some(x), Some(y), Some(z)) => Some([x, y, z]),
                _ => return Err(Error::parse(last, "vertex element lacks x, y, z properties")),
            }
        } else {
            None
        };
        for _ in 0..el.count {
            let (no, line) = body
                .next()
                .ok_or_else(|| Error::parse(last + 1, format!("file ends inside '{}' element data", el.name)))?;
            last = no;
            if let Some([x, y, z]) = axes {
                let t: Vec<&str> = line.split_whitespace().collect();
                if el.properties.iter().any(|p| p.starts_with("list:")) {
                    return Err(Error::parse(no, "list properties on vertices are not supported"));
                }
                if t.len() != el.properties.len() {
                    return Err(Error::parse(
                        no,
                        format!("expected {} vertex values, found {}", el.properties.len(), t.len()),
                    ));
                }
                points.push(Vec3::new(parse_f64(t[x], no)?, parse_f64(t[y], no)?, parse_f64(t[z], no)?));
            }
        }
    }
    if points.is_empty() {
        return Err(Error::parse(last, "no vertices"));
    }
    PointCloud::new(points)
}

pub fn parse_off(text: &str) -> Result<Mesh> {
    let mut lines = content_lines(text);
    let (no, first) = lines.next().ok_or_else(|| Error::parse(1, "empty OFF file"))?;
    let rest = first
        .strip_prefix("OFF")
        .ok_or_else(|| Error::parse(no, format!("expected 'OFF', found '{first}'")))?
        .trim();
    let (no, counts) = if rest.is_empty() {
        lines.next().ok_or_else(|| Error::parse(no + 1, "missing OFF counts"))?
    } else {
        (no, rest)
    };
    let c: Vec<&str> = counts.split_whitespace().collect();
    if c.len() < 2 {
        return Err(Error::parse(no, "expected vertex and face counts"));
    }
    let nv = parse_usize(c[0], no)?;
    let nf = parse_usize(c[1], no)?;
    let mut last = no;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (no, line) = lines
            .next()
            .ok_or_else(|| Error::parse(last + 1, format!("expected {nv} vertices, found {}", vertices.len())))?;
        last = no;
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() < 3 {
            return Err(Error::parse(no, "vertex needs 3 coordinates"));
        }
        vertices.push(Vec3::new(parse_f64(t[0], no)?, parse_f64(t[1], no)?, parse_f64(t[2], no)?));
    }
    let mut faces = Vec::with_capacity(nf);
    for read in 0..nf {
        let (no, line) = lines
            .next()
            .ok_or_else(|| Error::parse(last + 1, format!("expected {nf} faces, found {read}")))?;
        last = no;
        let t: Vec<&str> = line.split_whitespace().collect();
        let k = parse_usize(t[0], no)?;
        if k < 3 || t.len() < k + 1 {
            return Err(Error::parse(no, format!("face needs at least 3 indices and {k} listed")));
        }
        let idx = t[1..=k]
            .iter()
            .map(|s| {
                let i = parse_usize(s, no)?;
                if i >= nv {
                    return Err(Error::parse(no, format!("vertex index {i} out of range")));
                }
                Ok(i)
            })
            .collect::<Result<Vec<usize>>>()?;
        // polygons are fanned from their first vertex
        for j in 1..k - 1 {
            faces.push([idx[0], idx[j], idx[j + 1]]);
        }
    }
    if let Some((no, _)) = lines.next() {
        return Err(Error::parse(no, "trailing data after faces"));
    }
    Mesh::new(vertices, faces)
}

pub fn format_off(mesh: &Mesh) -> String {
    let mut out = format!("OFF\n{} {} 0\n", mesh.vertices.len(), mesh.faces.len());
    for v in &mesh.vertices {
        let _ = writeln!(out, "{} {} {}", fmt_f64(v.x), fmt_f64(v.y), fmt_f64(v.z));
    }
    for f in &mesh.faces {
        let _ = writeln!(out, "3 {} {} {}", f[0], f[1], f[2]);
    }
    out
}

pub fn load_geometry(path: impl AsRef<Path>, format: Format) -> Result<Geometry> {
    let text = std::fs::read_to_string(path)?;
    Ok(match format {
        Format::Xyz => Geometry::Cloud(parse_xyz(&text)?),
        Format::PlyAscii => Geometry::Cloud(parse_ply(&text)?),
        Format::Off => Geometry::Mesh(parse_off(&text)?),
    })
}

/// Loads a point cloud, inferring the format from the extension.
/// Meshes contribute their vertices.
pub fn load_cloud(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    Ok(load_geometry(path, Format::from_path(path)?)?.into_cloud())
}

pub fn write_xyz(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_xyz(cloud))?;
    Ok(())
}
