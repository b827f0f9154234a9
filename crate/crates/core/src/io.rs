//! CSV and GeoJSON ingestion, CSV emission.
//!
//! Reals are written as `{:.16e}` (17 significant digits) so every value
//! round-trips exactly and text diffs are stable.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use serde_json::Value;

use crate::cluster::{ScanResult, ZScoreGrid};
use crate::error::{Error, Result};
use crate::spatial::{DensitySurface, EnvelopeResult};
use crate::types::{CountGrid, EventTimes, GridSpec, Point, SpaceTimeEvent};

pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_err(row: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        row,
        message: message.into(),
    }
}

/// Reads the named columns as reals. `row` in errors is the 1-based line
/// number, the header being line 1. A zero-byte input is an empty table.
fn read_columns<R: Read>(reader: R, names: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() {
        return Ok(Vec::new());
    }
    let cols: Vec<usize> = names
        .iter()
        .map(|n| {
            headers
                .iter()
                .position(|h| h == *n)
                .ok_or_else(|| parse_err(1, format!("missing column `{n}`")))
        })
        .collect::<Result<_>>()?;

    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| parse_err(row, e.to_string()))?;
        let vals = cols
            .iter()
            .zip(names)
            .map(|(&c, n)| {
                let field = rec.get(c).ok_or_else(|| parse_err(row, format!("missing `{n}`")))?;
                let v: f64 = field
                    .parse()
                    .map_err(|_| parse_err(row, format!("`{n}` is not a number: {field:?}")))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(parse_err(row, format!("`{n}` is not finite")))
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        out.push(vals);
    }
    Ok(out)
}

pub fn read_times<R: Read>(reader: R) -> Result<Vec<f64>> {
    Ok(read_columns(reader, &["t"])?.into_iter().map(|r| r[0]).collect())
}

pub fn read_points_csv<R: Read>(reader: R) -> Result<Vec<Point>> {
    Ok(read_columns(reader, &["x", "y"])?
        .into_iter()
        .map(|r| Point::new(r[0], r[1]))
        .collect())
}

pub fn read_space_time_csv<R: Read>(reader: R) -> Result<Vec<SpaceTimeEvent>> {
    Ok(read_columns(reader, &["x", "y", "t"])?
        .into_iter()
        .map(|r| SpaceTimeEvent {
            x: r[0],
            y: r[1],
            t: r[2],
        })
        .collect())
}

/// Point features of a FeatureCollection as `(x, y, t)`. `row` in errors is
/// the 1-based feature index.
fn read_geojson_features<R: Read>(reader: R, need_t: bool) -> Result<Vec<(f64, f64, Option<f64>)>> {
    let doc: Value = serde_json::from_reader(reader)?;
    if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(Error::Invalid("GeoJSON input must be a FeatureCollection".into()));
    }
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Invalid("FeatureCollection has no `features` array".into()))?;
    features
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let row = i + 1;
            let geom = f
                .get("geometry")
                .ok_or_else(|| parse_err(row, "feature has no geometry"))?;
            if geom.get("type").and_then(Value::as_str) != Some("Point") {
                return Err(parse_err(row, "geometry is not a Point"));
            }
            let coords = geom
                .get("coordinates")
                .and_then(Value::as_array)
                .filter(|c| c.len() >= 2)
                .ok_or_else(|| parse_err(row, "Point needs two coordinates"))?;
            let x = coords[0].as_f64().ok_or_else(|| parse_err(row, "x is not a number"))?;
            let y = coords[1].as_f64().ok_or_else(|| parse_err(row, "y is not a number"))?;
            let t = match f.get("properties").and_then(|p| p.get("t")) {
                None | Some(Value::Null) => None,
                Some(v) => Some(v.as_f64().ok_or_else(|| parse_err(row, "`t` is not a number"))?),
            };
            if need_t && t.is_none() {
                return Err(parse_err(row, "feature has no `t` property"));
            }
            Ok((x, y, t))
        })
        .collect()
}

fn is_geojson(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
        Some("geojson" | "json")
    )
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

pub fn read_times_file(path: &Path) -> Result<Vec<f64>> {
    read_times(open(path)?)
}

/// `x,y` CSV, or GeoJSON when the extension is `.geojson` or `.json`.
pub fn read_points_file(path: &Path) -> Result<Vec<Point>> {
    if is_geojson(path) {
        Ok(read_geojson_features(open(path)?, false)?
            .into_iter()
            .map(|(x, y, _)| Point::new(x, y))
            .collect())
    } else {
        read_points_csv(open(path)?)
    }
}

/// `x,y,t` CSV, or GeoJSON with a `t` property on every feature.
pub fn read_space_time_file(path: &Path) -> Result<Vec<SpaceTimeEvent>> {
    if is_geojson(path) {
        Ok(read_geojson_features(open(path)?, true)?
            .into_iter()
            .map(|(x, y, t)| SpaceTimeEvent {
                x,
                y,
                t: t.expect("checked above"),
            })
            .collect())
    } else {
        read_space_time_csv(open(path)?)
    }
}

/// Baseline population CSV `slice,cell_x,cell_y,value` on `spec`, one
/// vector per time slice. Cells not listed hold zero; repeated cells add up.
pub fn read_baseline<R: Read>(reader: R, spec: &GridSpec) -> Result<Vec<Vec<f64>>> {
    let rows = read_columns(reader, &["slice", "cell_x", "cell_y", "value"])?;
    let mut slices: Vec<Vec<f64>> = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let row = i + 2;
        let index = |v: f64, name: &str| {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(parse_err(row, format!("`{name}` must be a non-negative integer")))
            }
        };
        let (k, ix, iy) = (index(r[0], "slice")?, index(r[1], "cell_x")?, index(r[2], "cell_y")?);
        if ix >= spec.nx || iy >= spec.ny {
            return Err(parse_err(row, format!("cell ({ix}, {iy}) outside the {} x {} grid", spec.nx, spec.ny)));
        }
        if slices.len() <= k {
            slices.resize(k + 1, vec![0.0; spec.n_cells()]);
        }
        slices[k][spec.index(ix, iy)] += r[3];
    }
    Ok(slices)
}

pub fn read_baseline_file(path: &Path, spec: &GridSpec) -> Result<Vec<Vec<f64>>> {
    read_baseline(open(path)?, spec)
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().from_writer(w)
}

pub fn write_event_times<W: Write>(w: W, events: &EventTimes) -> Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(["t"])?;
    for &t in events.times() {
        wtr.write_record([fmt_num(t)])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_points<W: Write>(w: W, points: &[Point]) -> Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(["x", "y"])?;
    for p in points {
        wtr.write_record([fmt_num(p.x), fmt_num(p.y)])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_space_time<W: Write>(w: W, events: &[SpaceTimeEvent]) -> Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(["x", "y", "t"])?;
    for e in events {
        wtr.write_record([fmt_num(e.x), fmt_num(e.y), fmt_num(e.t)])?;
    }
    wtr.flush()?;
    Ok(())
}

fn write_cells<W: Write>(w: W, spec: &GridSpec, column: &str, values: impl Iterator<Item = String>) -> Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(["cell_x", "cell_y", column])?;
    for (i, v) in values.enumerate() {
        let (ix, iy) = spec.coords(i);
        wtr.write_record([ix.to_string(), iy.to_string(), v])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_count_grid<W: Write>(w: W, grid: &CountGrid) -> Result<()> {
    write_cells(w, grid.spec(), "value", grid.counts().iter().map(u64::to_string))
}

pub fn write_density<W: Write>(w: W, surface: &DensitySurface) -> Result<()> {
    write_cells(w, &surface.spec, "value", surface.values.iter().map(|&v| fmt_num(v)))
}

pub fn write_zscores<W: Write>(w: W, z: &ZScoreGrid) -> Result<()> {
    write_cells(w, &z.spec, "z", z.z.iter().map(|&v| fmt_num(v)))
}

/// `r,observed` curve.
pub fn write_curve<W: Write>(w: W, radii: &[f64], observed: &[f64]) -> Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(["r", "observed"])?;
    for (&r, &o) in radii.iter().zip(observed) {
        wtr.write_record([fmt_num(r), fmt_num(o)])?;
    }
    wtr.flush()?;
    Ok(())
}

/// `r,observed,lower,upper` curve with its envelope.
pub fn write_envelope<W: Write>(w: W, env: &EnvelopeResult) -> Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(["r", "observed", "lower", "upper"])?;
    for k in 0..env.distances.len() {
        wtr.write_record([
            fmt_num(env.distances[k]),
            fmt_num(env.observed[k]),
            fmt_num(env.lower[k]),
            fmt_num(env.upper[k]),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_scan<W: Write>(w: W, results: &[ScanResult]) -> Result<()> {
    let mut wtr = writer(w);
    wtr.write_record([
        "cx", "cy", "radius", "t_start", "t_end", "observed", "expected", "llr", "p_value",
    ])?;
    for r in results {
        let c = &r.cylinder;
        wtr.write_record([
            fmt_num(c.cx),
            fmt_num(c.cy),
            fmt_num(c.radius),
            fmt_num(c.t_start),
            fmt_num(c.t_end),
            r.observed.to_string(),
            fmt_num(r.expected),
            fmt_num(r.llr),
            fmt_num(r.p_value),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
