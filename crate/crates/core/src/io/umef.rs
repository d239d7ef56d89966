//! UMEF: canonical-frame coordinates plus invariant feature channels per point.
//!
//! ```text
//! UMEF 1
//! points N
//! features K
//! x y z f_1 ... f_K      (N rows)
//! ```
//!
//! Values are written with 17 significant digits, which round-trips every
//! `f64` exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::{PointCloud, Vec3};
use crate::ume::FeatureValues;

pub const UMEF_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct UmefBundle {
    pub coords: PointCloud,
    pub features: FeatureValues,
}

impl UmefBundle {
    pub fn new(coords: PointCloud, features: FeatureValues) -> Result<Self> {
        if coords.len() != features.rows() {
            return Err(Error::invalid(format!(
                "bundle has {} coordinates but {} feature rows",
                coords.len(),
                features.rows()
            )));
        }
        Ok(Self { coords, features })
    }

    pub fn n_points(&self) -> usize {
        self.coords.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.channels()
    }

    /// Rows reordered as `order`.
    pub fn select(&self, order: &[usize]) -> Self {
        Self {
            coords: self.coords.select(order),
            features: self.features.select_rows(order),
        }
    }
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn format_umef(bundle: &UmefBundle) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "UMEF {UMEF_VERSION}");
    let _ = writeln!(out, "points {}", bundle.n_points());
    let _ = writeln!(out, "features {}", bundle.n_features());
    for (i, p) in bundle.coords.points().iter().enumerate() {
        let row: Vec<String> = p
            .iter()
            .copied()
            .chain(bundle.features.row(i).iter().copied())
            .map(fmt_f64)
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

fn header_value(line: Option<(usize, &str)>, key: &str, expected_line: usize) -> Result<usize> {
    let (no, text) = line.ok_or_else(|| Error::parse(expected_line, format!("missing '{key}' header")))?;
    let mut parts = text.split_whitespace();
    if parts.next() != Some(key) {
        return Err(Error::parse(no, format!("expected '{key} <count>', found '{text}'")));
    }
    let value = parts
        .next()
        .ok_or_else(|| Error::parse(no, format!("'{key}' header has no value")))?
        .parse::<usize>()
        .map_err(|e| Error::parse(no, format!("bad {key} count: {e}")))?;
    if parts.next().is_some() {
        return Err(Error::parse(no, format!("trailing tokens after '{key}' header")));
    }
    Ok(value)
}

pub fn parse_umef(text: &str) -> Result<UmefBundle> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    match lines.next() {
        Some((_, l)) if l.split_whitespace().eq(["UMEF", "1"]) => {}
        Some((no, l)) => return Err(Error::parse(no, format!("expected 'UMEF 1', found '{l}'"))),
        None => return Err(Error::parse(1, "empty UMEF file")),
    }
    let n = header_value(lines.next(), "points", 2)?;
    let k = header_value(lines.next(), "features", 3)?;
    if k == 0 {
        return Err(Error::parse(3, "UMEF bundles need at least one feature channel"));
    }

    let mut coords = Vec::with_capacity(n);
    let mut features = Vec::with_capacity(n * k);
    let mut last_line = 3;
    for (no, line) in lines {
        last_line = no;
        if coords.len() == n {
            return Err(Error::parse(no, format!("more than the declared {n} rows")));
        }
        let values = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| Error::parse(no, format!("bad value '{t}': {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != 3 + k {
            return Err(Error::parse(no, format!("expected {} values, found {}", 3 + k, values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::parse(no, "non-finite value"));
        }
        coords.push(Vec3::new(values[0], values[1], values[2]));
        features.extend_from_slice(&values[3..]);
    }
    if coords.len() != n {
        return Err(Error::parse(
            last_line,
            format!("declared {n} rows but found {}", coords.len()),
        ));
    }
    UmefBundle::new(PointCloud::new(coords)?, FeatureValues::new(features, k)?)
}

pub fn read_umef(path: impl AsRef<Path>) -> Result<UmefBundle> {
    parse_umef(&std::fs::read_to_string(path)?)
}

pub fn write_umef(bundle: &UmefBundle, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_umef(bundle))?;
    Ok(())
}
