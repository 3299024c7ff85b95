//! Uniformly sampled time-series store.

use std::collections::BTreeMap;
use std::io::Write;

use chrono::{DateTime, NaiveDateTime};

use super::ForecastError;

pub const TIME_FORMAT: &str = "%Y-%m-%d %H:%M:%S";

fn secs(t: NaiveDateTime) -> i64 {
    t.and_utc().timestamp()
}

fn from_secs(s: i64) -> NaiveDateTime {
    DateTime::from_timestamp(s, 0).expect("timestamp in range").naive_utc()
}

/// One series on a fixed grid. Missing grid points hold NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub unit: String,
    step: i64,
    start: Option<i64>,
    values: Vec<f64>,
}

impl Series {
    pub fn step_seconds(&self) -> i64 {
        self.step
    }

    pub fn start(&self) -> Option<NaiveDateTime> {
        self.start.map(from_secs)
    }

    /// End of the stored extent (exclusive).
    pub fn end(&self) -> Option<NaiveDateTime> {
        self.start.map(|s| from_secs(s + self.step * self.values.len() as i64))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct TimeSeriesStore {
    series: BTreeMap<String, Series>,
}

impl TimeSeriesStore {
    pub fn new() -> Self {
        TimeSeriesStore::default()
    }

    pub fn create(&mut self, id: &str, unit: &str, step_seconds: i64) -> Result<(), ForecastError> {
        if step_seconds <= 0 {
            return Err(ForecastError::InvalidStep(step_seconds));
        }
        if self.series.contains_key(id) {
            return Err(ForecastError::DuplicateSeries(id.to_string()));
        }
        self.series.insert(
            id.to_string(),
            Series {
                unit: unit.to_string(),
                step: step_seconds,
                start: None,
                values: Vec::new(),
            },
        );
        Ok(())
    }

    pub fn get(&self, id: &str) -> Result<&Series, ForecastError> {
        self.series
            .get(id)
            .ok_or_else(|| ForecastError::UnknownSeries(id.to_string()))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.series.keys().map(String::as_str)
    }

    /// Appends samples. Timestamps must increase strictly past everything
    /// already stored and lie on the series grid; skipped grid points stay
    /// missing.
    pub fn write(&mut self, id: &str, samples: &[(NaiveDateTime, f64)]) -> Result<(), ForecastError> {
        let s = self
            .series
            .get_mut(id)
            .ok_or_else(|| ForecastError::UnknownSeries(id.to_string()))?;
        // Validate everything before touching the series.
        let mut last = s.start.map(|st| st + s.step * (s.values.len() as i64 - 1));
        let origin = s.start.or_else(|| samples.first().map(|(t, _)| secs(*t)));
        for (t, v) in samples {
            let ts = secs(*t);
            if last.is_some_and(|l| ts <= l) {
                return Err(ForecastError::NonMonotone {
                    series: id.to_string(),
                    at: *t,
                });
            }
            if (ts - origin.unwrap()).rem_euclid(s.step) != 0 {
                return Err(ForecastError::OffGrid {
                    series: id.to_string(),
                    at: *t,
                });
            }
            if !v.is_finite() {
                return Err(ForecastError::NonFinite {
                    series: id.to_string(),
                    at: *t,
                });
            }
            last = Some(ts);
        }
        for (t, v) in samples {
            let start = *s.start.get_or_insert(secs(*t));
            let idx = ((secs(*t) - start) / s.step) as usize;
            s.values.resize(idx, f64::NAN);
            s.values.push(*v);
        }
        Ok(())
    }

    /// `n` consecutive values starting at `from`.
    pub fn values(&self, id: &str, from: NaiveDateTime, n: usize) -> Result<Vec<f64>, ForecastError> {
        let s = self.get(id)?;
        let gap = |a: i64, b: i64| ForecastError::RangeGap {
            series: id.to_string(),
            from: from_secs(a),
            to: from_secs(b),
        };
        let f = secs(from);
        let Some(start) = s.start else {
            return if n == 0 {
                Ok(Vec::new())
            } else {
                Err(gap(f, f + s.step * n as i64))
            };
        };
        if (f - start).rem_euclid(s.step) != 0 {
            return Err(ForecastError::OffGrid {
                series: id.to_string(),
                at: from,
            });
        }
        let first = (f - start).div_euclid(s.step);
        let mut out = Vec::with_capacity(n);
        let mut missing: Option<(i64, i64)> = None;
        for k in first..first + n as i64 {
            let v = if k >= 0 {
                s.values.get(k as usize).copied()
            } else {
                None
            };
            match v {
                Some(v) if !v.is_nan() => out.push(v),
                _ => {
                    let t = start + k * s.step;
                    missing = Some(missing.map_or((t, t + s.step), |(a, _)| (a, t + s.step)));
                }
            }
        }
        match missing {
            Some((a, b)) => Err(gap(a, b)),
            None => Ok(out),
        }
    }

    /// Samples with `from <= t < to`; every grid point must be present.
    pub fn read(
        &self,
        id: &str,
        from: NaiveDateTime,
        to: NaiveDateTime,
    ) -> Result<Vec<(NaiveDateTime, f64)>, ForecastError> {
        let s = self.get(id)?;
        if to <= from {
            return Ok(Vec::new());
        }
        let n = ((secs(to) - secs(from)) + s.step - 1) / s.step;
        let vals = self.values(id, from, n as usize)?;
        Ok(vals
            .into_iter()
            .enumerate()
            .map(|(k, v)| (from_secs(secs(from) + k as i64 * s.step), v))
            .collect())
    }

    /// Writes `timestamp,value` rows for the whole series; missing points
    /// are skipped.
    pub fn export_csv<W: Write>(&self, id: &str, w: W) -> Result<(), ForecastError> {
        let s = self.get(id)?;
        let mut wtr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| ForecastError::Io(e.to_string());
        wtr.write_record(["timestamp", &format!("value_{}", s.unit)])
            .map_err(io)?;
        if let Some(start) = s.start {
            for (k, v) in s.values.iter().enumerate() {
                if v.is_nan() {
                    continue;
                }
                let t = from_secs(start + k as i64 * s.step).format(TIME_FORMAT).to_string();
                wtr.write_record([t, v.to_string()]).map_err(io)?;
            }
        }
        wtr.flush().map_err(|e| ForecastError::Io(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{Duration, NaiveDate};
    use proptest::prelude::*;

    fn t0() -> NaiveDateTime {
        NaiveDate::from_ymd_opt(2018, 7, 1)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap()
    }

    fn at(k: i64) -> NaiveDateTime {
        t0() + Duration::seconds(300 * k)
    }

    #[test]
    fn write_then_read() {
        let mut s = TimeSeriesStore::new();
        s.create("x", "K", 300).unwrap();
        let samples: Vec<_> = (0..10).map(|k| (at(k), k as f64)).collect();
        s.write("x", &samples).unwrap();
        assert_eq!(s.read("x", at(2), at(5)).unwrap(), samples[2..5].to_vec());
        assert!(s.read("x", at(3), at(3)).unwrap().is_empty());
        assert_eq!(s.get("x").unwrap().end(), Some(at(10)));
    }

    #[test]
    fn non_monotone_rejected_atomically() {
        let mut s = TimeSeriesStore::new();
        s.create("x", "K", 300).unwrap();
        s.write("x", &[(at(0), 1.0), (at(1), 2.0)]).unwrap();
        let e = s.write("x", &[(at(2), 3.0), (at(1), 4.0)]).unwrap_err();
        assert_eq!(
            e,
            ForecastError::NonMonotone {
                series: "x".into(),
                at: at(1)
            }
        );
        assert_eq!(s.get("x").unwrap().len(), 2);
        assert!(s.write("x", &[(at(1), 9.0)]).is_err());
        assert!(matches!(
            s.write("x", &[(at(3) + Duration::seconds(7), 1.0)]),
            Err(ForecastError::OffGrid { .. })
        ));
    }

    #[test]
    fn gaps_are_named() {
        let mut s = TimeSeriesStore::new();
        s.create("x", "K", 300).unwrap();
        s.write("x", &[(at(0), 1.0), (at(1), 1.0), (at(4), 1.0)]).unwrap();
        assert_eq!(
            s.read("x", at(0), at(5)).unwrap_err(),
            ForecastError::RangeGap {
                series: "x".into(),
                from: at(2),
                to: at(4)
            }
        );
        assert_eq!(
            s.read("x", at(4), at(7)).unwrap_err(),
            ForecastError::RangeGap {
                series: "x".into(),
                from: at(5),
                to: at(7)
            }
        );
        assert_eq!(
            s.read("x", at(-2), at(1)).unwrap_err(),
            ForecastError::RangeGap {
                series: "x".into(),
                from: at(-2),
                to: at(0)
            }
        );
        assert!(matches!(
            s.read("y", at(0), at(1)),
            Err(ForecastError::UnknownSeries(_))
        ));
    }

    #[test]
    fn export() {
        let mut s = TimeSeriesStore::new();
        s.create("x", "K", 300).unwrap();
        s.write("x", &[(at(0), 1.5), (at(2), 2.0)]).unwrap();
        let mut buf = Vec::new();
        s.export_csv("x", &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "timestamp,value_K\n2018-07-01 00:00:00,1.5\n2018-07-01 00:10:00,2\n"
        );
    }

    proptest! {
        #[test]
        fn read_returns_what_was_written(
            vals in prop::collection::vec(-100.0..100.0f64, 1..60),
            a in 0usize..60, b in 0usize..60,
        ) {
            let mut s = TimeSeriesStore::new();
            s.create("x", "K", 300).unwrap();
            let samples: Vec<_> = vals.iter().enumerate().map(|(k, v)| (at(k as i64), *v)).collect();
            s.write("x", &samples).unwrap();
            let (lo, hi) = (a.min(b).min(vals.len()), a.max(b).min(vals.len()));
            prop_assert_eq!(s.read("x", at(lo as i64), at(hi as i64)).unwrap(), samples[lo..hi].to_vec());
        }
    }
}
