//! CSV ingestion onto the controller grid.
//!
//! Weather files have columns `timestamp,t_amb_c,h_glo_w_m2` and are
//! interpolated linearly. Price files have columns `timestamp,price` (per
//! kWh) and are held constant until the next row; the last row is held for
//! one more spacing.

use std::io::Read;

use chrono::{Duration, NaiveDateTime};

use super::store::TimeSeriesStore;
use super::{ForecastError, H_GLO, PRICE, T_AMB};
use crate::thermal::celsius_to_kelvin;

const FORMATS: [&str; 4] = [
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%d %H:%M",
    "%Y-%m-%dT%H:%M",
];

pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s.trim(), f).ok())
}

/// Rows of `(timestamp, values)` with strictly increasing timestamps.
fn read_rows<R: Read>(r: R, columns: &[&str]) -> Result<Vec<(NaiveDateTime, Vec<f64>)>, ForecastError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(r);
    let headers = rdr
        .headers()
        .map_err(|e| ForecastError::Csv {
            line: 1,
            msg: e.to_string(),
        })?
        .clone();
    let mut idx = Vec::new();
    for c in std::iter::once(&"timestamp").chain(columns) {
        let i = headers.iter().position(|h| h == *c).ok_or_else(|| ForecastError::Csv {
            line: 1,
            msg: format!("missing column '{c}'"),
        })?;
        idx.push(i);
    }
    let mut rows: Vec<(NaiveDateTime, Vec<f64>)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| ForecastError::Csv {
            line: e.position().map_or(0, |p| p.line() as usize),
            msg: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| rec.get(i).unwrap_or("");
        let t = parse_timestamp(field(idx[0])).ok_or_else(|| ForecastError::Csv {
            line,
            msg: format!("bad timestamp '{}'", field(idx[0])),
        })?;
        let vals = idx[1..]
            .iter()
            .zip(columns)
            .map(|(i, c)| {
                field(*i)
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| ForecastError::Csv {
                        line,
                        msg: format!("bad {c} '{}'", field(*i)),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if rows.last().is_some_and(|(p, _)| t <= *p) {
            return Err(ForecastError::Csv {
                line,
                msg: format!("timestamp {t} is not after the previous row"),
            });
        }
        rows.push((t, vals));
    }
    if rows.len() < 2 {
        return Err(ForecastError::Csv {
            line: 0,
            msg: "need at least two data rows".into(),
        });
    }
    Ok(rows)
}

/// Grid points `first, first + step, …` up to and including `last`.
fn grid(first: NaiveDateTime, last: NaiveDateTime, step: i64) -> impl Iterator<Item = NaiveDateTime> {
    let n = (last - first).num_seconds() / step;
    (0..=n).map(move |k| first + Duration::seconds(k * step))
}

/// Linear interpolation of `rows[..].1[col]` at `t` (inside the rows' span).
fn lerp(rows: &[(NaiveDateTime, Vec<f64>)], col: usize, t: NaiveDateTime) -> f64 {
    let j = rows.partition_point(|(rt, _)| *rt <= t);
    if j == 0 {
        return rows[0].1[col];
    }
    if j == rows.len() {
        return rows[j - 1].1[col];
    }
    let (t0, v0) = (&rows[j - 1].0, rows[j - 1].1[col]);
    let (t1, v1) = (&rows[j].0, rows[j].1[col]);
    let w = (t - *t0).num_milliseconds() as f64 / (*t1 - *t0).num_milliseconds() as f64;
    v0 + w * (v1 - v0)
}

fn ensure(store: &mut TimeSeriesStore, id: &str, unit: &str, step: i64) -> Result<(), ForecastError> {
    if store.get(id).is_err() {
        store.create(id, unit, step)?;
    }
    Ok(())
}

/// Loads a weather CSV into the `T_AMB` (K) and `H_GLO` (W/m²) series.
pub fn ingest_weather<R: Read>(r: R, store: &mut TimeSeriesStore, step: i64) -> Result<usize, ForecastError> {
    let rows = read_rows(r, &["t_amb_c", "h_glo_w_m2"])?;
    if let Some((t, _)) = rows.iter().find(|(_, v)| v[1] < 0.0) {
        return Err(ForecastError::Csv {
            line: 0,
            msg: format!("negative irradiance at {t}"),
        });
    }
    let (first, last) = (rows[0].0, rows[rows.len() - 1].0);
    let ts: Vec<_> = grid(first, last, step).collect();
    ensure(store, T_AMB, "K", step)?;
    ensure(store, H_GLO, "W/m2", step)?;
    let temp: Vec<_> = ts.iter().map(|t| (*t, celsius_to_kelvin(lerp(&rows, 0, *t)))).collect();
    let irr: Vec<_> = ts.iter().map(|t| (*t, lerp(&rows, 1, *t).max(0.0))).collect();
    store.write(T_AMB, &temp)?;
    store.write(H_GLO, &irr)?;
    Ok(ts.len())
}

/// Loads a day-ahead price CSV into the `PRICE` series (currency/kWh).
pub fn ingest_price<R: Read>(r: R, store: &mut TimeSeriesStore, step: i64) -> Result<usize, ForecastError> {
    let rows = read_rows(r, &["price"])?;
    let n = rows.len();
    let spacing = rows[n - 1].0 - rows[n - 2].0;
    let end = rows[n - 1].0 + spacing - Duration::seconds(1);
    let samples: Vec<_> = grid(rows[0].0, end, step)
        .map(|t| {
            let j = rows.partition_point(|(rt, _)| *rt <= t);
            (t, rows[j - 1].1[0])
        })
        .collect();
    ensure(store, PRICE, "per_kWh", step)?;
    store.write(PRICE, &samples)?;
    Ok(samples.len())
}
