//! Disturbance forecasts: a time-series store fed from CSV or synthetic
//! generators, an occupancy profile, and perfect-foresight horizon bundles.

pub mod ingest;
pub mod store;
pub mod synthetic;

use chrono::{Duration, NaiveDateTime};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::thermal::{ComfortSchedule, Disturbance};
pub use store::TimeSeriesStore;

pub const T_AMB: &str = "weather/t_amb";
pub const H_GLO: &str = "weather/h_glo";
pub const PRICE: &str = "price/day_ahead";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForecastError {
    #[error("unknown series '{0}'")]
    UnknownSeries(String),
    #[error("series '{0}' already exists")]
    DuplicateSeries(String),
    #[error("series step must be positive, got {0} s")]
    InvalidStep(i64),
    #[error("series '{series}': sample at {at} is not after the last stored sample")]
    NonMonotone { series: String, at: NaiveDateTime },
    #[error("series '{series}': {at} is off the sampling grid")]
    OffGrid { series: String, at: NaiveDateTime },
    #[error("series '{series}': non-finite sample at {at}")]
    NonFinite { series: String, at: NaiveDateTime },
    #[error("series '{series}' has no data for [{from}, {to})")]
    RangeGap {
        series: String,
        from: NaiveDateTime,
        to: NaiveDateTime,
    },
    #[error("line {line}: {msg}")]
    Csv { line: usize, msg: String },
    #[error("io: {0}")]
    Io(String),
}

/// Internal gains following the comfort schedule's occupied window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OccupancyProfile {
    /// W/m² while occupied.
    pub q_occupied: f64,
    /// W/m² otherwise.
    pub q_unoccupied: f64,
}

impl Default for OccupancyProfile {
    fn default() -> Self {
        OccupancyProfile {
            q_occupied: 10.0,
            q_unoccupied: 1.0,
        }
    }
}

impl OccupancyProfile {
    /// Occupancy flag and internal gain density at `t`.
    pub fn at(&self, t: NaiveDateTime, sched: &ComfortSchedule) -> (bool, f64) {
        let occ = sched.is_occupied(t);
        (occ, if occ { self.q_occupied } else { self.q_unoccupied })
    }
}

/// Serves disturbance bundles from stored series. Forecasts equal the
/// realized values (perfect foresight).
#[derive(Debug, Clone)]
pub struct ForecastService {
    pub store: TimeSeriesStore,
    pub occupancy: OccupancyProfile,
    pub schedule: ComfortSchedule,
    /// s
    pub dt: i64,
}

impl ForecastService {
    pub fn new(store: TimeSeriesStore, occupancy: OccupancyProfile, schedule: ComfortSchedule, dt: i64) -> Self {
        ForecastService {
            store,
            occupancy,
            schedule,
            dt,
        }
    }

    /// Disturbances for the `n` steps starting at `t`.
    pub fn get_forecast(&self, t: NaiveDateTime, n: usize) -> Result<Vec<Disturbance>, ForecastError> {
        let t_amb = self.store.values(T_AMB, t, n)?;
        let h_glo = self.store.values(H_GLO, t, n)?;
        let price = self.store.values(PRICE, t, n)?;
        Ok((0..n)
            .map(|i| {
                let ti = t + Duration::seconds(self.dt * i as i64);
                let (occupied, q_int) = self.occupancy.at(ti, &self.schedule);
                Disturbance {
                    t_amb: t_amb[i],
                    h_glo: h_glo[i],
                    q_int,
                    price: price[i],
                    occupied,
                }
            })
            .collect())
    }

    /// The disturbance actually applied over the step starting at `t`.
    pub fn realized(&self, t: NaiveDateTime) -> Result<Disturbance, ForecastError> {
        Ok(self.get_forecast(t, 1)?[0])
    }

    /// Largest price in the store, for penalty sanity checks.
    pub fn max_price(&self) -> Option<f64> {
        let s = self.store.get(PRICE).ok()?;
        let start = s.start()?;
        let v = self.store.values(PRICE, start, s.len()).ok()?;
        v.into_iter().reduce(f64::max)
    }
}

/// Fills a store with synthetic weather and prices covering `n` steps.
pub fn synthetic_store(
    weather: &synthetic::SyntheticWeather,
    price: &synthetic::SyntheticPrice,
    start: NaiveDateTime,
    n: usize,
    step: i64,
) -> Result<TimeSeriesStore, ForecastError> {
    let mut s = TimeSeriesStore::new();
    s.create(T_AMB, "K", step)?;
    s.create(H_GLO, "W/m2", step)?;
    s.create(PRICE, "per_kWh", step)?;
    let w = weather.series(start, n, step);
    s.write(T_AMB, &w.iter().map(|(t, a, _)| (*t, *a)).collect::<Vec<_>>())?;
    s.write(H_GLO, &w.iter().map(|(t, _, h)| (*t, *h)).collect::<Vec<_>>())?;
    s.write(PRICE, &price.series(start, n, step))?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::synthetic::{SyntheticPrice, SyntheticWeather};
    use super::*;
    use chrono::NaiveDate;

    fn start() -> NaiveDateTime {
        NaiveDate::from_ymd_opt(2018, 7, 2)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap()
    }

    fn service(n: usize) -> ForecastService {
        let store = synthetic_store(
            &SyntheticWeather::default(),
            &SyntheticPrice::default(),
            start(),
            n,
            300,
        )
        .unwrap();
        ForecastService::new(
            store,
            OccupancyProfile::default(),
            ComfortSchedule::office_default(),
            300,
        )
    }

    #[test]
    fn bundle_matches_realized() {
        let f = service(400);
        let t = start() + Duration::hours(7);
        let b = f.get_forecast(t, 96).unwrap();
        assert_eq!(b.len(), 96);
        for (i, e) in b.iter().enumerate() {
            assert_eq!(*e, f.realized(t + Duration::seconds(300 * i as i64)).unwrap());
        }
        // 07:00 + 12 steps = 08:00, first occupied step on a Monday.
        assert!(!b[11].occupied && b[12].occupied);
        assert_eq!(b[12].q_int, 10.0);
    }

    #[test]
    fn horizon_past_data_is_a_gap() {
        let f = service(100);
        let e = f.get_forecast(start() + Duration::seconds(300 * 90), 20).unwrap_err();
        assert!(matches!(e, ForecastError::RangeGap { .. }), "{e}");
    }

    #[test]
    fn max_price_positive() {
        assert!(service(288).max_price().unwrap() > 0.2);
    }
}
