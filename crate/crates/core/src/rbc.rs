//! Staged proportional thermostat used as the comparison baseline.
//!
//! Heating demand ramps from 0 at `t_min + deadband` and each stage in
//! `heating_order` takes one deadband's worth of demand before the next one
//! engages. The cooling coil ramps from 0 at `t_max − deadband` to full at
//! `t_max`. On weekends the plant is switched off entirely when
//! `unoccupied_off_weekends` is set.

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::thermal::{comfort_bounds, is_weekday, ComfortSchedule, ControlVector, Device};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RbcError {
    #[error("invalid RBC config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RbcConfig {
    /// K
    pub deadband: f64,
    pub heating_order: [Device; 3],
    pub unoccupied_off_weekends: bool,
    /// Switch off on weekday nights instead of holding the relaxed band.
    pub weekday_night_off: bool,
}

impl Default for RbcConfig {
    fn default() -> Self {
        RbcConfig {
            deadband: 0.5,
            heating_order: [Device::Radiator, Device::HeatingCoil, Device::ReheatCoil],
            unoccupied_off_weekends: true,
            weekday_night_off: false,
        }
    }
}

impl RbcConfig {
    pub fn validate(&self, sched: &ComfortSchedule) -> Result<(), RbcError> {
        if !(self.deadband.is_finite() && self.deadband > 0.0) {
            return Err(RbcError::InvalidConfig(format!("deadband {}", self.deadband)));
        }
        for band in [sched.occupied, sched.unoccupied] {
            if 2.0 * self.deadband >= band.t_max - band.t_min {
                return Err(RbcError::InvalidConfig(format!(
                    "deadband {} too wide for band [{}, {}]",
                    self.deadband, band.t_min, band.t_max
                )));
            }
        }
        let mut seen = self.heating_order.to_vec();
        seen.sort_by_key(|d| d.index());
        seen.dedup();
        if seen.len() != 3 || seen.contains(&Device::CoolingCoil) {
            return Err(RbcError::InvalidConfig(format!(
                "heating order {:?} must list each heating device once",
                self.heating_order
            )));
        }
        Ok(())
    }
}

/// Baseline command for zone temperature `t_zone` at time `t`.
pub fn rbc_step(t_zone: f64, t: NaiveDateTime, sched: &ComfortSchedule, cfg: &RbcConfig) -> ControlVector {
    let occupied = sched.is_occupied(t);
    if !is_weekday(t) && cfg.unoccupied_off_weekends {
        return ControlVector::zero();
    }
    if is_weekday(t) && !occupied && cfg.weekday_night_off {
        return ControlVector::zero();
    }
    let band = comfort_bounds(t, sched);
    let db = cfg.deadband;
    let mut u = [0.0; 4];
    let heat_demand = (band.t_min + db - t_zone) / db;
    let cool_demand = (t_zone - (band.t_max - db)) / db;
    if heat_demand > 0.0 {
        for (k, d) in cfg.heating_order.iter().enumerate() {
            u[d.index()] = (heat_demand - k as f64).clamp(0.0, 1.0);
        }
    } else if cool_demand > 0.0 {
        u[Device::CoolingCoil.index()] = cool_demand.min(1.0);
    }
    ControlVector(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermal::celsius_to_kelvin;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn at(d: u32, h: u32) -> NaiveDateTime {
        NaiveDate::from_ymd_opt(2018, 7, d)
            .unwrap()
            .and_hms_opt(h, 0, 0)
            .unwrap()
    }

    #[test]
    fn weekend_off() {
        let s = ComfortSchedule::office_default();
        let cfg = RbcConfig::default();
        // 2018-07-07 is a Saturday.
        for c in [16.0, 20.0, 25.0, 31.9, 35.0] {
            assert_eq!(
                rbc_step(celsius_to_kelvin(c), at(7, 10), &s, &cfg),
                ControlVector::zero()
            );
        }
    }

    #[test]
    fn staged_heating() {
        let s = ComfortSchedule::office_default();
        let cfg = RbcConfig::default();
        let u = rbc_step(celsius_to_kelvin(20.0), at(3, 10), &s, &cfg);
        assert_eq!(u.get(Device::Radiator), 1.0);
        assert!(u.get(Device::HeatingCoil) > 0.0);
        assert_eq!(u.get(Device::CoolingCoil), 0.0);
        // Inside the first deadband only the radiator modulates.
        let u = rbc_step(celsius_to_kelvin(21.25), at(3, 10), &s, &cfg);
        assert!((u.get(Device::Radiator) - 0.5).abs() < 1e-9);
        assert_eq!(u.get(Device::HeatingCoil), 0.0);
    }

    #[test]
    fn mid_band_idle_and_cooling_ramp() {
        let s = ComfortSchedule::office_default();
        let cfg = RbcConfig::default();
        assert_eq!(
            rbc_step(celsius_to_kelvin(24.0), at(3, 10), &s, &cfg),
            ControlVector::zero()
        );
        let u = rbc_step(celsius_to_kelvin(26.75), at(3, 10), &s, &cfg);
        assert!((u.get(Device::CoolingCoil) - 0.5).abs() < 1e-9);
        let u = rbc_step(celsius_to_kelvin(29.0), at(3, 10), &s, &cfg);
        assert_eq!(u.get(Device::CoolingCoil), 1.0);
    }

    #[test]
    fn weekday_night_uses_relaxed_band() {
        let s = ComfortSchedule::office_default();
        let cfg = RbcConfig::default();
        assert_eq!(
            rbc_step(celsius_to_kelvin(29.0), at(3, 22), &s, &cfg),
            ControlVector::zero()
        );
        assert!(rbc_step(celsius_to_kelvin(32.0), at(3, 22), &s, &cfg).get(Device::CoolingCoil) > 0.0);
        let off = RbcConfig {
            weekday_night_off: true,
            ..cfg
        };
        assert_eq!(
            rbc_step(celsius_to_kelvin(35.0), at(3, 22), &s, &off),
            ControlVector::zero()
        );
    }

    #[test]
    fn config_validation() {
        let s = ComfortSchedule::office_default();
        assert!(RbcConfig::default().validate(&s).is_ok());
        assert!(RbcConfig {
            deadband: 4.0,
            ..Default::default()
        }
        .validate(&s)
        .is_err());
        let dup = RbcConfig {
            heating_order: [Device::Radiator, Device::Radiator, Device::ReheatCoil],
            ..Default::default()
        };
        assert!(dup.validate(&s).is_err());
    }

    proptest! {
        #[test]
        fn never_heats_and_cools(c in 10.0..40.0f64, day in 1u32..31, h in 0u32..24) {
            let s = ComfortSchedule::office_default();
            let u = rbc_step(celsius_to_kelvin(c), at(day, h), &s, &RbcConfig::default());
            let heating = u.0[1..].iter().any(|v| *v > 0.0);
            prop_assert!(!(heating && u.0[0] > 0.0));
            prop_assert!(ControlVector::new(u.0).is_ok());
        }

        #[test]
        fn bounded_slope(c in 10.0..40.0f64, dc in -0.25..0.25f64, day in 1u32..31, h in 0u32..24) {
            // A temperature move below half a deadband changes any command by
            // at most half its range: no bang-bang chattering.
            let s = ComfortSchedule::office_default();
            let cfg = RbcConfig::default();
            let a = rbc_step(celsius_to_kelvin(c), at(day, h), &s, &cfg);
            let b = rbc_step(celsius_to_kelvin(c + dc), at(day, h), &s, &cfg);
            for j in 0..4 {
                prop_assert!((a.0[j] - b.0[j]).abs() <= dc.abs() / cfg.deadband + 1e-9);
            }
        }

        #[test]
        fn weekends_silent(c in 10.0..40.0f64, day in prop::sample::select(vec![1u32, 7, 8, 14, 15]), h in 0u32..24) {
            let s = ComfortSchedule::office_default();
            prop_assert_eq!(rbc_step(celsius_to_kelvin(c), at(day, h), &s, &RbcConfig::default()), ControlVector::zero());
        }
    }
}
