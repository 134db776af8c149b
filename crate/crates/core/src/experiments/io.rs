use super::{CurvePoint, Field, FitResult, SampleFailure, SampleRecord};
use crate::{Error, Result};
use std::path::Path;
use std::str::FromStr;

pub const RECORDS_HEADER: [&str; 12] = [
    "N",
    "gamma",
    "c",
    "sigma",
    "eps",
    "sample_id",
    "stream_id",
    "tau_l2",
    "tau_w",
    "kappa",
    "lambda_min",
    "lambda_max",
];
pub const CURVES_HEADER: [&str; 5] = ["N", "field", "mean", "stderr", "count"];
pub const FAILURES_HEADER: [&str; 4] = ["N", "sample_id", "stream_id", "error"];

/// 17 significant digits; round-trips every finite f64.
fn fl(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io.to_string()),
        kind => Error::Parse {
            line,
            message: format!("{kind:?}"),
        },
    }
}

fn write_rows<W: std::io::Write>(w: W, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(header).map_err(csv_err)?;
    for row in rows {
        wr.write_record(&row).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads a CSV with exactly `header`; calls `row` with the 1-based line number.
fn read_rows<R: std::io::Read, T>(
    r: R,
    header: &[&str],
    mut row: impl FnMut(&csv::StringRecord, usize) -> Result<T>,
) -> Result<Vec<T>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let got = rd.headers().map_err(csv_err)?.clone();
    if got.iter().ne(header.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header '{}', got '{}'", header.join(","), got.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        out.push(row(&rec, line)?);
    }
    Ok(out)
}

fn field<T: FromStr>(rec: &csv::StringRecord, i: usize, name: &str, line: usize) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    raw.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("column {name}: cannot parse '{raw}'"),
    })
}

pub fn write_records<W: std::io::Write>(w: W, records: &[SampleRecord]) -> Result<()> {
    write_rows(
        w,
        &RECORDS_HEADER,
        records.iter().map(|r| {
            vec![
                r.n.to_string(),
                fl(r.gamma),
                fl(r.c),
                fl(r.sigma),
                fl(r.eps),
                r.sample_id.to_string(),
                r.stream_id.to_string(),
                r.tau_l2.to_string(),
                r.tau_w.to_string(),
                fl(r.kappa),
                fl(r.lambda_min),
                fl(r.lambda_max),
            ]
        }),
    )
}

pub fn read_records<R: std::io::Read>(r: R) -> Result<Vec<SampleRecord>> {
    read_rows(r, &RECORDS_HEADER, |rec, line| {
        let h = &RECORDS_HEADER;
        Ok(SampleRecord {
            n: field(rec, 0, h[0], line)?,
            gamma: field(rec, 1, h[1], line)?,
            c: field(rec, 2, h[2], line)?,
            sigma: field(rec, 3, h[3], line)?,
            eps: field(rec, 4, h[4], line)?,
            sample_id: field(rec, 5, h[5], line)?,
            stream_id: field(rec, 6, h[6], line)?,
            tau_l2: field(rec, 7, h[7], line)?,
            tau_w: field(rec, 8, h[8], line)?,
            kappa: field(rec, 9, h[9], line)?,
            lambda_min: field(rec, 10, h[10], line)?,
            lambda_max: field(rec, 11, h[11], line)?,
        })
    })
}

pub fn write_curves<W: std::io::Write>(w: W, curve: &[CurvePoint]) -> Result<()> {
    write_rows(
        w,
        &CURVES_HEADER,
        curve.iter().map(|c| {
            vec![
                c.n.to_string(),
                c.field.to_string(),
                fl(c.mean),
                fl(c.stderr),
                c.count.to_string(),
            ]
        }),
    )
}

pub fn read_curves<R: std::io::Read>(r: R) -> Result<Vec<CurvePoint>> {
    read_rows(r, &CURVES_HEADER, |rec, line| {
        let h = &CURVES_HEADER;
        Ok(CurvePoint {
            n: field(rec, 0, h[0], line)?,
            field: field::<Field>(rec, 1, h[1], line)?,
            mean: field(rec, 2, h[2], line)?,
            stderr: field(rec, 3, h[3], line)?,
            count: field(rec, 4, h[4], line)?,
        })
    })
}

pub fn write_failures<W: std::io::Write>(w: W, failures: &[SampleFailure]) -> Result<()> {
    write_rows(
        w,
        &FAILURES_HEADER,
        failures.iter().map(|f| {
            vec![
                f.n.to_string(),
                f.sample_id.to_string(),
                f.stream_id.to_string(),
                f.error.clone(),
            ]
        }),
    )
}

pub fn read_failures<R: std::io::Read>(r: R) -> Result<Vec<SampleFailure>> {
    read_rows(r, &FAILURES_HEADER, |rec, line| {
        Ok(SampleFailure {
            n: field(rec, 0, "N", line)?,
            sample_id: field(rec, 1, "sample_id", line)?,
            stream_id: field(rec, 2, "stream_id", line)?,
            error: rec.get(3).unwrap_or("").to_string(),
        })
    })
}

pub fn write_fit(path: &Path, fit: &FitResult) -> Result<()> {
    let text = serde_json::to_string_pretty(fit).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

pub fn read_fit(path: &Path) -> Result<FitResult> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })
}
