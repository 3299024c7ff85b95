//! Seeded synthetic weather and day-ahead prices.

use chrono::{Datelike, Duration, NaiveDateTime, Timelike};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::thermal::{celsius_to_kelvin, is_weekday};

fn hour_of_day(t: NaiveDateTime) -> f64 {
    t.num_seconds_from_midnight() as f64 / 3600.0
}

/// Days since the common era; a stable per-day index for seeding.
fn day_index(t: NaiveDateTime) -> i64 {
    t.date().num_days_from_ce() as i64
}

fn day_rng(seed: u64, day: i64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed ^ (day as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    r.set_stream(stream);
    r
}

/// Summer weather with a diurnal cycle, a multi-day swing and seeded daily
/// cloudiness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticWeather {
    /// °C
    pub mean_c: f64,
    /// Half peak-to-peak of the diurnal cycle, K.
    pub daily_amplitude_c: f64,
    /// Hour of the temperature maximum.
    pub peak_hour: f64,
    /// Amplitude of the multi-day swing, K.
    pub synoptic_amplitude_c: f64,
    pub synoptic_period_days: f64,
    /// Clear-sky irradiance at solar noon, W/m².
    pub irradiance_peak: f64,
    pub sunrise_hour: f64,
    pub sunset_hour: f64,
    /// Daily clearness is uniform in `[1 − cloudiness, 1]`.
    pub cloudiness: f64,
    pub seed: u64,
}

impl Default for SyntheticWeather {
    fn default() -> Self {
        SyntheticWeather {
            mean_c: 19.5,
            daily_amplitude_c: 6.0,
            peak_hour: 15.0,
            synoptic_amplitude_c: 3.0,
            synoptic_period_days: 7.0,
            irradiance_peak: 750.0,
            sunrise_hour: 5.5,
            sunset_hour: 21.5,
            cloudiness: 0.6,
            seed: 7,
        }
    }
}

impl SyntheticWeather {
    fn clearness(&self, day: i64) -> f64 {
        1.0 - self.cloudiness * day_rng(self.seed, day, 1).gen::<f64>()
    }

    /// Ambient temperature (K) and global horizontal irradiance (W/m²).
    pub fn at(&self, t: NaiveDateTime) -> (f64, f64) {
        let h = hour_of_day(t);
        let day = day_index(t);
        let clear = self.clearness(day);
        let days = day as f64 + h / 24.0;
        let synoptic =
            self.synoptic_amplitude_c * (2.0 * std::f64::consts::PI * days / self.synoptic_period_days).sin();
        let diurnal = self.daily_amplitude_c * (2.0 * std::f64::consts::PI * (h - self.peak_hour) / 24.0).cos();
        // Cloudy days run cooler and flatter.
        let temp = self.mean_c + synoptic + diurnal * (0.5 + 0.5 * clear) + 3.0 * (clear - 0.7);
        let span = self.sunset_hour - self.sunrise_hour;
        let x = (h - self.sunrise_hour) / span;
        let irr = if (0.0..=1.0).contains(&x) {
            self.irradiance_peak * clear * (std::f64::consts::PI * x).sin().powf(1.3)
        } else {
            0.0
        };
        (celsius_to_kelvin(temp), irr.max(0.0))
    }

    pub fn series(&self, start: NaiveDateTime, n: usize, step: i64) -> Vec<(NaiveDateTime, f64, f64)> {
        (0..n)
            .map(|k| {
                let t = start + Duration::seconds(step * k as i64);
                let (ta, h) = self.at(t);
                (t, ta, h)
            })
            .collect()
    }
}

/// Hourly day-ahead price with morning and evening peaks, a midday dip and
/// seeded hourly noise. Currency per kWh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticPrice {
    pub base: f64,
    pub morning_peak: f64,
    pub evening_peak: f64,
    pub midday_dip: f64,
    pub weekend_discount: f64,
    pub noise: f64,
    pub seed: u64,
}

impl Default for SyntheticPrice {
    fn default() -> Self {
        SyntheticPrice {
            base: 0.22,
            morning_peak: 0.08,
            evening_peak: 0.12,
            midday_dip: 0.05,
            weekend_discount: 0.03,
            noise: 0.02,
            seed: 11,
        }
    }
}

impl SyntheticPrice {
    pub fn at(&self, t: NaiveDateTime) -> f64 {
        let hour = t.hour() as f64 + 0.5;
        let bump = |center: f64, width: f64| (-((hour - center) / width).powi(2)).exp();
        let mut p = self.base + self.morning_peak * bump(8.0, 1.5) + self.evening_peak * bump(19.0, 2.0)
            - self.midday_dip * bump(13.5, 2.0);
        if !is_weekday(t) {
            p -= self.weekend_discount;
        }
        let mut r = day_rng(self.seed, day_index(t), 2);
        let noise: Vec<f64> = (0..24).map(|_| r.gen_range(-1.0..1.0)).collect();
        p += self.noise * noise[t.hour() as usize];
        p.max(0.0)
    }

    pub fn series(&self, start: NaiveDateTime, n: usize, step: i64) -> Vec<(NaiveDateTime, f64)> {
        (0..n)
            .map(|k| {
                let t = start + Duration::seconds(step * k as i64);
                (t, self.at(t))
            })
            .collect()
    }
}
