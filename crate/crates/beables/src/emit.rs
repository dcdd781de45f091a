//! Field, ray and report files.
//!
//! CSV fields have the header `t,x,rho` and one row per grid point, t outer
//! and x inner; every number is written with 17 significant digits so the
//! file round-trips exactly. JSON fields carry the grid and a flat value
//! array in the same order.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use beables_core::field::{BeableField, GridSpec};
use beables_core::relmodels::{NatureChoice, RayPolyline};
use serde::{Deserialize, Serialize};

use crate::config::Format;
use crate::error::{Result, RunError};

/// Text form of an f64 with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRecord {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub nt: usize,
}

impl From<&GridSpec> for GridRecord {
    fn from(g: &GridSpec) -> Self {
        Self { x_min: g.x_min, x_max: g.x_max, nx: g.nx, t_min: g.t_min, t_max: g.t_max, nt: g.nt }
    }
}

impl GridRecord {
    pub fn to_spec(self) -> Result<GridSpec> {
        Ok(GridSpec::new(self.x_min, self.x_max, self.nx, self.t_min, self.t_max, self.nt)?)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldDocument {
    grid: GridRecord,
    values: Vec<f64>,
}

/// A field as read back from disk: coordinates and values per row.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldTable {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub rho: Vec<f64>,
}

impl FieldTable {
    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// Rows grouped by time, preserving order.
    pub fn slices(&self) -> Vec<(f64, Vec<(f64, f64)>)> {
        let mut out: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
        for k in 0..self.len() {
            match out.last_mut() {
                Some((t, row)) if *t == self.t[k] => row.push((self.x[k], self.rho[k])),
                _ => out.push((self.t[k], vec![(self.x[k], self.rho[k])])),
            }
        }
        out
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| RunError::io(path, e))?))
}

fn csv_err(path: &Path, e: csv::Error) -> RunError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => RunError::io(path, io),
        other => RunError::Invariant(format!("{}: malformed CSV: {other:?}", path.display())),
    }
}

pub fn write_field(path: &Path, field: &BeableField, format: Format) -> Result<()> {
    let grid = field.grid();
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(create(path)?);
            w.write_record(["t", "x", "rho"]).map_err(|e| csv_err(path, e))?;
            for j in 0..grid.nt {
                let t = fmt_f64(grid.t(j));
                for i in 0..grid.nx {
                    w.write_record([t.as_str(), &fmt_f64(grid.x(i)), &fmt_f64(field.value(j, i))])
                        .map_err(|e| csv_err(path, e))?;
                }
            }
            w.flush().map_err(|e| RunError::io(path, e))
        }
        Format::Json => {
            let doc = FieldDocument { grid: grid.into(), values: field.values().to_vec() };
            write_json(path, &doc)
        }
    }
}

/// Reads a field written by [`write_field`].
pub fn read_field(path: &Path, format: Format) -> Result<FieldTable> {
    match format {
        Format::Csv => {
            let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
            let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
            if header.iter().collect::<Vec<_>>() != ["t", "x", "rho"] {
                return Err(RunError::Invariant(format!("{}: unexpected header", path.display())));
            }
            let mut table = FieldTable { t: Vec::new(), x: Vec::new(), rho: Vec::new() };
            for rec in r.records() {
                let rec = rec.map_err(|e| csv_err(path, e))?;
                let num = |k: usize| -> Result<f64> {
                    rec.get(k)
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| RunError::Invariant(format!("{}: bad number in row", path.display())))
                };
                table.t.push(num(0)?);
                table.x.push(num(1)?);
                table.rho.push(num(2)?);
            }
            Ok(table)
        }
        Format::Json => {
            let doc: FieldDocument = read_json(path)?;
            let grid = doc.grid.to_spec()?;
            if doc.values.len() != grid.len() {
                return Err(RunError::Invariant(format!("{}: value count does not match grid", path.display())));
            }
            let mut table = FieldTable { t: Vec::new(), x: Vec::new(), rho: doc.values };
            for j in 0..grid.nt {
                for i in 0..grid.nx {
                    table.t.push(grid.t(j));
                    table.x.push(grid.x(i));
                }
            }
            Ok(table)
        }
    }
}

/// Reads a JSON field back into a [`BeableField`].
pub fn read_field_json(path: &Path) -> Result<BeableField> {
    let doc: FieldDocument = read_json(path)?;
    Ok(BeableField::new(doc.grid.to_spec()?, doc.values)?)
}

pub fn branch_name(choice: NatureChoice) -> &'static str {
    match choice {
        NatureChoice::Cloud1 => "cloud1",
        NatureChoice::Cloud2 => "cloud2",
    }
}

/// Photon worldlines as `branch,photon,t,x` rows, one per polyline vertex.
pub fn write_rays(path: &Path, lines: &[RayPolyline]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["branch", "photon", "t", "x"]).map_err(|e| csv_err(path, e))?;
    for line in lines {
        for v in &line.vertices {
            w.write_record([branch_name(line.branch), &line.photon.to_string(), &fmt_f64(v.t), &fmt_f64(v.x)])
                .map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| RunError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| RunError::io(path, e.into()))?;
    w.write_all(b"\n").map_err(|e| RunError::io(path, e))?;
    w.flush().map_err(|e| RunError::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| RunError::Invariant(format!("{}: {e}", path.display())))
}

/// Writes `rows` of already-formatted cells under `header`.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| RunError::io(path, e))
}

/// Reads a CSV written by [`write_table`] as header plus string rows.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.iter().map(str::to_owned).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(str::to_owned).collect()).map_err(|e| csv_err(path, e)))
        .collect::<Result<Vec<_>>>()?;
    Ok((header, rows))
}
