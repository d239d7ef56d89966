//! Rigid transforms as JSON: `{"rotation": [9 row-major], "translation": [3]}`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::{check_rotation, Mat3, RigidTransform, Vec3};

use super::umef::fmt_f64;

/// Tolerance accepted when reading rotations back from text.
pub const READ_ROTATION_TOL: f64 = 1e-9;

pub fn format_transform(t: &RigidTransform) -> String {
    let r: Vec<String> = (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .map(|(i, j)| fmt_f64(t.rotation[(i, j)]))
        .collect();
    let tr: Vec<String> = t.translation.iter().copied().map(fmt_f64).collect();
    format!(
        "{{\n  \"rotation\": [{}],\n  \"translation\": [{}]\n}}\n",
        r.join(", "),
        tr.join(", ")
    )
}

fn numbers(value: &serde_json::Value, key: &str, n: usize) -> Result<Vec<f64>> {
    let arr = value
        .get(key)
        .and_then(|v| v.as_array())
        .ok_or_else(|| Error::invalid(format!("transform JSON lacks a '{key}' array")))?;
    if arr.len() != n {
        return Err(Error::invalid(format!("'{key}' needs {n} entries, found {}", arr.len())));
    }
    arr.iter()
        .map(|v| v.as_f64().ok_or_else(|| Error::invalid(format!("non-numeric entry in '{key}'"))))
        .collect()
}

pub fn parse_transform(text: &str) -> Result<RigidTransform> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))?;
    let r = numbers(&value, "rotation", 9)?;
    let t = numbers(&value, "translation", 3)?;
    let rotation = Mat3::from_row_slice(&r);
    let translation = Vec3::new(t[0], t[1], t[2]);
    check_rotation(&rotation, READ_ROTATION_TOL)?;
    Ok(RigidTransform { rotation, translation })
}

pub fn read_transform(path: impl AsRef<Path>) -> Result<RigidTransform> {
    parse_transform(&std::fs::read_to_string(path)?)
}

pub fn write_transform(t: &RigidTransform, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_transform(t))?;
    Ok(())
}
