//! File formats for metric spaces and point clouds.
//!
//! CSV matrix: first line `n`, then `n` comma-separated rows.
//! JSON space: `{"labels": [...], "dist": [[...]], "points": [[...]]?}`.
//! JSON cloud: `{"metric": "euclidean"|"chebyshev", "points": [[...]]}`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{FiniteMetricSpace, Metric, MetricError, PointCloud};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed file at line {line}{}: {message}", field.map(|f| format!(", field {f}")).unwrap_or_default())]
    MalformedFile {
        line: usize,
        field: Option<usize>,
        message: String,
    },
    #[error(transparent)]
    Invalid(#[from] MetricError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl FormatError {
    fn malformed(line: usize, field: Option<usize>, message: impl Into<String>) -> Self {
        FormatError::MalformedFile { line, field, message: message.into() }
    }
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            return FormatError::Io(e.into());
        }
        FormatError::MalformedFile {
            line: e.line(),
            field: Some(e.column()),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct SpaceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    dist: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    points: Option<Vec<Vec<f64>>>,
}

pub fn read_space_csv<R: Read>(reader: R) -> Result<FiniteMetricSpace, FormatError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();
    let first = match records.next() {
        Some(r) => r.map_err(|e| csv_error(&e))?,
        None => return Err(FormatError::malformed(1, None, "empty file")),
    };
    if first.len() != 1 {
        return Err(FormatError::malformed(1, None, "first line must hold the point count"));
    }
    let n: usize = first[0]
        .parse()
        .map_err(|_| FormatError::malformed(1, Some(1), format!("invalid point count {:?}", &first[0])))?;
    let mut rows = Vec::with_capacity(n);
    for rec in records {
        let rec = rec.map_err(|e| csv_error(&e))?;
        let line = rec.position().map_or(rows.len() + 2, |p| p.line() as usize);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rows.len() == n {
            return Err(FormatError::malformed(line, None, format!("more than {n} matrix rows")));
        }
        if rec.len() != n {
            return Err(FormatError::malformed(line, None, format!("expected {n} fields, found {}", rec.len())));
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(f, cell)| {
                cell.parse::<f64>()
                    .map_err(|_| FormatError::malformed(line, Some(f + 1), format!("not a number: {cell:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    if rows.len() != n {
        return Err(FormatError::malformed(
            rows.len() + 2,
            None,
            format!("expected {n} matrix rows, found {}", rows.len()),
        ));
    }
    Ok(FiniteMetricSpace::validate(rows, None)?)
}

fn csv_error(e: &csv::Error) -> FormatError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    FormatError::malformed(line, None, e.to_string())
}

pub fn write_space_csv<W: Write>(space: &FiniteMetricSpace, writer: W) -> Result<(), FormatError> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(writer);
    w.write_record([space.len().to_string()]).map_err(csv_io)?;
    for i in 0..space.len() {
        w.write_record(space.row(i).iter().map(|d| format_f64(*d))).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> FormatError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => FormatError::Io(io),
        other => FormatError::malformed(0, None, format!("{other:?}")),
    }
}

/// Shortest decimal that round-trips, independent of locale.
pub fn format_f64(x: f64) -> String {
    let s = format!("{x:?}");
    s.strip_suffix(".0").map(str::to_string).unwrap_or(s)
}

pub fn read_space_json<R: Read>(reader: R) -> Result<FiniteMetricSpace, FormatError> {
    let file: SpaceFile = serde_json::from_reader(reader)?;
    let space = FiniteMetricSpace::validate(file.dist, file.labels)?;
    match file.points {
        Some(points) => Ok(space.with_points(points)?),
        None => Ok(space),
    }
}

pub fn space_to_json(space: &FiniteMetricSpace) -> serde_json::Value {
    let file = SpaceFile {
        labels: Some(space.labels().to_vec()),
        dist: space.to_rows(),
        points: space.points().map(<[_]>::to_vec),
    };
    serde_json::to_value(file).expect("space serializes")
}

pub fn write_space_json<W: Write>(space: &FiniteMetricSpace, writer: W) -> Result<(), FormatError> {
    serde_json::to_writer_pretty(writer, &space_to_json(space))?;
    Ok(())
}

pub fn read_cloud_json<R: Read>(reader: R) -> Result<PointCloud, FormatError> {
    let cloud: PointCloud = serde_json::from_reader(reader)?;
    Ok(PointCloud::new(cloud.points, cloud.metric)?)
}

pub fn write_cloud_json<W: Write>(cloud: &PointCloud, writer: W) -> Result<(), FormatError> {
    serde_json::to_writer_pretty(writer, cloud)?;
    Ok(())
}

/// Either kind of input a subcommand may receive.
#[derive(Debug, Clone)]
pub enum SpaceInput {
    Matrix(FiniteMetricSpace),
    Cloud(PointCloud),
}

impl SpaceInput {
    pub fn metric(&self) -> &dyn Metric {
        match self {
            SpaceInput::Matrix(m) => m,
            SpaceInput::Cloud(c) => c,
        }
    }

    /// Dense form; clouds are converted (and checked for duplicates).
    pub fn to_space(&self) -> Result<FiniteMetricSpace, MetricError> {
        match self {
            SpaceInput::Matrix(m) => Ok(m.clone()),
            SpaceInput::Cloud(c) => FiniteMetricSpace::from_points(c),
        }
    }
}

/// Reads JSON (space or cloud, told apart by the `dist` key) or CSV by sniffing
/// the first non-blank byte.
pub fn read_any<R: Read>(mut reader: R) -> Result<SpaceInput, FormatError> {
    let mut buf = Vec::new();
    reader.read_to_end(&mut buf)?;
    let first = buf.iter().find(|b| !b.is_ascii_whitespace());
    if first == Some(&b'{') {
        let value: serde_json::Value = serde_json::from_slice(&buf)?;
        let has_dist = value.get("dist").is_some();
        let is_cloud = !has_dist && value.get("metric").is_some();
        if is_cloud {
            Ok(SpaceInput::Cloud(read_cloud_json(buf.as_slice())?))
        } else {
            Ok(SpaceInput::Matrix(read_space_json(buf.as_slice())?))
        }
    } else {
        Ok(SpaceInput::Matrix(read_space_csv(buf.as_slice())?))
    }
}
