//! Map files: a `key = value` header, a bare `data` line, then one cell per
//! line in row-major order. Real cells are one decimal, complex cells are
//! `re im`. Values are written in shortest round-trip form, so write-read
//! is lossless.

use super::kv::{parse_f64, KvDoc};
use crate::error::Error;
use crate::forward::{ComplexMap, Provenance};
use crate::mapops::{magnitude, MapUnit, RealMap};
use crate::scene::GridMeta;
use crate::Result;
use num_complex::Complex64;
use std::path::Path;

const FORMAT_VERSION: usize = 1;

const HEADER_KEYS: [&str; 9] = [
    "format_version",
    "kind",
    "unit",
    "n_u",
    "n_v",
    "step_u",
    "step_v",
    "frequency_hz",
    "provenance",
];

/// A map read from disk, either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum MapData {
    Real(RealMap),
    Complex(ComplexMap),
}

impl MapData {
    pub fn meta(&self) -> GridMeta {
        match self {
            MapData::Real(m) => m.meta,
            MapData::Complex(m) => m.meta,
        }
    }

    /// Magnitude view for operations that consume linear magnitudes.
    /// Decibel maps are rejected: their cells are ratios, not magnitudes.
    pub fn into_magnitude(self) -> Result<RealMap> {
        match self {
            MapData::Real(m) => {
                if m.unit == MapUnit::Decibels {
                    return Err(Error::InvalidMap(
                        "decibel map has no linear magnitude".into(),
                    ));
                }
                Ok(m)
            }
            MapData::Complex(m) => Ok(magnitude(&m)),
        }
    }
}

struct Header {
    kind_complex: bool,
    unit: MapUnit,
    meta: GridMeta,
    frequency_hz: f64,
    provenance: Provenance,
}

fn parse_header(doc: &KvDoc) -> Result<Header> {
    doc.expect_only(&HEADER_KEYS)?;
    let perr = |key: &str, message: String| -> Error {
        let line = doc.get(key).map(|e| e.line).unwrap_or(0);
        Error::Parse {
            path: doc.path().to_string(),
            line,
            message,
        }
    };

    let version = doc.get_usize("format_version")?;
    if version != FORMAT_VERSION {
        return Err(perr(
            "format_version",
            format!("unsupported format_version `{version}`"),
        ));
    }
    let kind = doc.get_string("kind")?;
    let kind_complex = match kind.as_str() {
        "complex" => true,
        "real" => false,
        other => return Err(perr("kind", format!("unknown kind `{other}`"))),
    };
    let unit_name = doc.get_string("unit")?;
    let unit = MapUnit::from_name(&unit_name)
        .ok_or_else(|| perr("unit", format!("unknown unit `{unit_name}`")))?;
    if kind_complex && unit != MapUnit::LinearMagnitude {
        return Err(perr("unit", "complex maps are linear-valued".into()));
    }
    let n_u = doc.get_usize("n_u")?;
    let n_v = doc.get_usize("n_v")?;
    if n_u == 0 || n_v == 0 {
        return Err(perr("n_u", "grid counts must be positive".into()));
    }
    let step_u = doc.get_f64("step_u")?;
    let step_v = doc.get_f64("step_v")?;
    if !(step_u > 0.0 && step_v > 0.0 && step_u.is_finite() && step_v.is_finite()) {
        return Err(perr("step_u", "grid steps must be positive".into()));
    }
    let frequency_hz = doc.get_f64("frequency_hz")?;
    if !(frequency_hz > 0.0 && frequency_hz.is_finite()) {
        return Err(perr("frequency_hz", "frequency_hz must be positive".into()));
    }
    let prov_name = doc.get_string("provenance")?;
    let provenance = Provenance::from_name(&prov_name)
        .ok_or_else(|| perr("provenance", format!("unknown provenance `{prov_name}`")))?;

    Ok(Header {
        kind_complex,
        unit,
        meta: GridMeta {
            n_u,
            n_v,
            step_u,
            step_v,
        },
        frequency_hz,
        provenance,
    })
}

pub fn read_map(path: &Path) -> Result<MapData> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let pstr = path.display().to_string();
    let err = |line: usize, message: String| Error::Parse {
        path: pstr.clone(),
        line,
        message,
    };

    let lines: Vec<&str> = text.lines().collect();
    let data_at = lines
        .iter()
        .position(|l| l.trim() == "data")
        .ok_or_else(|| err(lines.len(), "missing `data` line".into()))?;

    let header_text = lines[..data_at].join("\n");
    let doc = KvDoc::parse(&pstr, &header_text)?;
    let header = parse_header(&doc)?;
    let expected = header.meta.cells();

    let mut real_cells: Vec<f64> = Vec::new();
    let mut complex_cells: Vec<Complex64> = Vec::new();
    let mut found = 0usize;
    for (idx, raw) in lines.iter().enumerate().skip(data_at + 1) {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if found == expected {
            return Err(err(
                line,
                format!("dimension mismatch at line {line}: expected {expected} cells"),
            ));
        }
        if header.kind_complex {
            let parts: Vec<&str> = trimmed.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(err(line, format!("expected `re im`, got `{trimmed}`")));
            }
            let re = parse_f64(parts[0]).map_err(|m| err(line, m))?;
            let im = parse_f64(parts[1]).map_err(|m| err(line, m))?;
            if !(re.is_finite() && im.is_finite()) {
                return Err(err(line, "non-finite value".into()));
            }
            complex_cells.push(Complex64::new(re, im));
        } else {
            let v = parse_f64(trimmed).map_err(|m| err(line, m))?;
            if !v.is_finite() {
                return Err(err(line, "non-finite value".into()));
            }
            real_cells.push(v);
        }
        found += 1;
    }
    if found < expected {
        return Err(err(
            lines.len(),
            format!("dimension mismatch: expected {expected} cells, found {found}"),
        ));
    }

    if header.kind_complex {
        Ok(MapData::Complex(ComplexMap::new(
            complex_cells,
            header.meta,
            header.frequency_hz,
            header.provenance,
        )?))
    } else {
        Ok(MapData::Real(RealMap::new(
            real_cells,
            header.meta,
            header.unit,
            header.frequency_hz,
            header.provenance,
        )?))
    }
}

fn header_string(
    kind: &str,
    unit: MapUnit,
    meta: GridMeta,
    frequency_hz: f64,
    provenance: Provenance,
) -> String {
    format!(
        "format_version = {FORMAT_VERSION}\n\
         kind = {kind}\n\
         unit = {}\n\
         n_u = {}\n\
         n_v = {}\n\
         step_u = {}\n\
         step_v = {}\n\
         frequency_hz = {}\n\
         provenance = {}\n\
         data\n",
        unit.name(),
        meta.n_u,
        meta.n_v,
        meta.step_u,
        meta.step_v,
        frequency_hz,
        provenance.name()
    )
}

pub fn write_real_map(map: &RealMap, path: &Path) -> Result<()> {
    let mut out = header_string("real", map.unit, map.meta, map.frequency_hz, map.provenance);
    for v in &map.data {
        out.push_str(&format!("{v}\n"));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn write_complex_map(map: &ComplexMap, path: &Path) -> Result<()> {
    let mut out = header_string(
        "complex",
        MapUnit::LinearMagnitude,
        map.meta,
        map.frequency_hz,
        map.provenance,
    );
    for z in &map.data {
        out.push_str(&format!("{} {}\n", z.re, z.im));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Gnuplot-style triplets `u v value`, one scanline per block separated by a
/// blank line, with `u`/`v` in grid-local meters.
pub fn write_plot_data(map: &RealMap, path: &Path) -> Result<()> {
    let mut out = String::new();
    for j in 0..map.meta.n_v {
        for i in 0..map.meta.n_u {
            let u = i as f64 * map.meta.step_u;
            let v = j as f64 * map.meta.step_v;
            out.push_str(&format!("{u} {v} {}\n", map.data[map.meta.idx(i, j)]));
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
