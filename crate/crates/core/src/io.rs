//! CSV and JSON artifacts.
//!
//! Floats are written with 17 significant digits (`{:.16e}`) so every value
//! re-parses to the same `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{bail, Result};
use crate::fdsolver::Field;
use crate::geometry::Point;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Render a header and numeric rows as CSV text.
pub fn csv_string<R: AsRef<[f64]>>(header: &[&str], rows: impl IntoIterator<Item = R>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let mut first = true;
        for &v in row.as_ref() {
            if !first {
                out.push(',');
            }
            first = false;
            let _ = write!(out, "{}", fmt_f64(v));
        }
        out.push('\n');
    }
    out
}

pub fn write_csv<R: AsRef<[f64]>>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<()> {
    fs::write(path, csv_string(header, rows))?;
    Ok(())
}

/// A parsed numeric CSV table.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

pub fn parse_csv(text: &str) -> Result<CsvTable> {
    const OP: &str = "parse_csv";
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let Some(head) = lines.next() else {
        bail!(Format, OP, "empty input");
    };
    let header: Vec<String> = head.split(',').map(|s| s.trim().to_string()).collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>();
        match row {
            Ok(r) if r.len() == header.len() => rows.push(r),
            Ok(r) => bail!(Format, OP, "row {} has {} columns, expected {}", i + 1, r.len(), header.len()),
            Err(e) => bail!(Format, OP, "row {}: {e}", i + 1),
        }
    }
    Ok(CsvTable { header, rows })
}

pub fn read_csv(path: &Path) -> Result<CsvTable> {
    parse_csv(&fs::read_to_string(path)?)
}

/// Field as CSV with columns `x, y, value`, row-major by `(iy, ix)`.
pub fn field_csv(field: &Field) -> String {
    let g = field.grid();
    csv_string(
        &["x", "y", "value"],
        field.values().iter().enumerate().map(|(k, &v)| {
            let p = g.position(k);
            [p.x, p.y, v]
        }),
    )
}

pub fn write_field_csv(field: &Field, path: &Path) -> Result<()> {
    fs::write(path, field_csv(field))?;
    Ok(())
}

/// Scattered nodal samples as read from a field CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSamples {
    pub points: Vec<Point>,
    pub values: Vec<f64>,
}

pub fn parse_field_csv(text: &str) -> Result<FieldSamples> {
    let t = parse_csv(text)?;
    if t.header != ["x", "y", "value"] {
        bail!(Format, "parse_field_csv", "expected header x,y,value, got {}", t.header.join(","));
    }
    Ok(FieldSamples {
        points: t.rows.iter().map(|r| Point::new(r[0], r[1])).collect(),
        values: t.rows.iter().map(|r| r[2]).collect(),
    })
}

pub fn read_field_csv(path: &Path) -> Result<FieldSamples> {
    parse_field_csv(&fs::read_to_string(path)?)
}

/// Pretty printer that writes floats with [`fmt_f64`].
struct FixedFloats(PrettyFormatter<'static>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(fn $name<W: ?Sized + std::io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> std::io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for FixedFloats {
    delegate! {
        begin_array(), end_array(), begin_array_value(first: bool), end_array_value(),
        begin_object(), end_object(), begin_object_key(first: bool), begin_object_value(),
        end_object_value(),
    }

    fn write_f64<W: ?Sized + std::io::Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }
}

/// Pretty JSON with a trailing newline; floats use [`fmt_f64`].
pub fn json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloats(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, json_string(value)?)?;
    Ok(())
}
