//! Field serialization: CSV for radial fields, raw little-endian `f64` plus
//! a JSON sidecar for box fields.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{BoxField, BoxGrid, Field, RadialField, RadialGrid};
use crate::{Error, Result};

/// Grid metadata stored next to a binary box field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSidecar {
    pub kind: String,
    pub n_per_axis: usize,
    pub half_width: f64,
    pub spacing: f64,
    pub dtype: String,
    pub order: String,
    /// Free-form tags such as the producing run's config hash.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub provenance: BTreeMap<String, String>,
}

/// `r,value` rows with round-trip precision, after `# `-prefixed comment lines.
pub fn radial_csv(field: &RadialField, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        writeln!(out, "# {c}").expect("writing to a String");
    }
    out.push_str("r,value\n");
    for (r, v) in field.grid().nodes().iter().zip(field.values()) {
        writeln!(out, "{r:e},{v:e}").expect("writing to a String");
    }
    out
}

pub fn write_radial_csv(field: &RadialField, path: &Path) -> Result<()> {
    fs::write(path, radial_csv(field, &[]))?;
    Ok(())
}

/// Reads a CSV written by [`write_radial_csv`]; the nodes must match `grid`.
pub fn read_radial_csv(grid: Arc<RadialGrid>, path: &Path) -> Result<RadialField> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.starts_with('#'));
    match lines.next() {
        Some((_, h)) if h.trim() == "r,value" => {}
        _ => return Err(Error::Format(format!("{}: expected header `r,value`", path.display()))),
    }
    let mut values = Vec::with_capacity(grid.nodes().len());
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = || Error::Format(format!("{}:{}: malformed row `{line}`", path.display(), lineno + 1));
        let (r, v) = line.split_once(',').ok_or_else(bad)?;
        let r: f64 = r.trim().parse().map_err(|_| bad())?;
        let v: f64 = v.trim().parse().map_err(|_| bad())?;
        let i = values.len();
        let expect = *grid.nodes().get(i).ok_or_else(|| {
            Error::GridMismatch(format!("{}: more rows than grid nodes", path.display()))
        })?;
        if (r - expect).abs() > 1e-12 * expect.max(1.0) {
            return Err(Error::GridMismatch(format!(
                "{}:{}: node {r} does not match grid node {expect}",
                path.display(),
                lineno + 1
            )));
        }
        values.push(v);
    }
    Field::new(grid, values)
}

/// Raw little-endian samples of a box field.
pub fn box_field_bytes(field: &BoxField) -> Vec<u8> {
    field.values().iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn box_sidecar(field: &BoxField, provenance: BTreeMap<String, String>) -> BoxSidecar {
    let g = field.grid();
    BoxSidecar {
        kind: "box".into(),
        n_per_axis: g.n_per_axis(),
        half_width: g.half_width(),
        spacing: g.spacing(),
        dtype: "f64le".into(),
        order: "row-major x,y,z".into(),
        provenance,
    }
}

/// Writes `<stem>.bin` and `<stem>.json`.
pub fn write_box_field(field: &BoxField, stem: &Path) -> Result<()> {
    fs::write(stem.with_extension("bin"), box_field_bytes(field))?;
    let meta = box_sidecar(field, BTreeMap::new());
    let json = serde_json::to_string_pretty(&meta).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(stem.with_extension("json"), json)?;
    Ok(())
}

/// Reads a box field and rebuilds its grid from the sidecar.
pub fn read_box_field(stem: &Path) -> Result<BoxField> {
    let meta: BoxSidecar = serde_json::from_str(&fs::read_to_string(stem.with_extension("json"))?)
        .map_err(|e| Error::Format(e.to_string()))?;
    if meta.dtype != "f64le" {
        return Err(Error::Format(format!("unsupported dtype {}", meta.dtype)));
    }
    let grid = Arc::new(BoxGrid::new(meta.n_per_axis, meta.half_width)?);
    let bytes = fs::read(stem.with_extension("bin"))?;
    if bytes.len() != 8 * grid.n_per_axis().pow(3) {
        return Err(Error::GridMismatch(format!(
            "{} bytes for a {}³ box",
            bytes.len(),
            grid.n_per_axis()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Field::new(grid, values)
}
