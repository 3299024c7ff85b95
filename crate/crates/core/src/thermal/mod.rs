//! Physical types, the HVAC power map, the 1R1C zone model and the
//! comfort schedule. Temperatures are Kelvin throughout; Celsius appears
//! only at I/O boundaries.

mod plant;

pub use plant::{plant_step, PlantConfig, PlantMode, PlantState, R3c2Params, ReferencePlant};

use chrono::{Datelike, NaiveDateTime, NaiveTime, Weekday};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Offset between the Celsius and Kelvin scales.
pub const KELVIN_OFFSET: f64 = 273.15;

pub fn celsius_to_kelvin(c: f64) -> f64 {
    c + KELVIN_OFFSET
}

pub fn kelvin_to_celsius(k: f64) -> f64 {
    k - KELVIN_OFFSET
}

/// Number of actuated HVAC devices.
pub const N_DEVICES: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThermalError {
    #[error("invalid RC parameters: {0}")]
    InvalidParams(String),
    #[error("invalid parameter bounds: {0}")]
    InvalidBounds(String),
    #[error("invalid HVAC configuration: {0}")]
    InvalidHvac(String),
    #[error("control command out of range: {0}")]
    InvalidControl(String),
    #[error("invalid disturbance: {0}")]
    InvalidDisturbance(String),
    #[error("invalid zone geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid comfort schedule: {0}")]
    InvalidSchedule(String),
    #[error("time step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("dynamics produced a non-finite temperature (degenerate parameters {0:?})")]
    Dynamics(RcParams),
    #[error("simulation fault: {0}")]
    SimulationFault(String),
}

/// HVAC devices in canonical command order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Device {
    CoolingCoil,
    HeatingCoil,
    ReheatCoil,
    Radiator,
}

impl Device {
    pub const ALL: [Device; N_DEVICES] = [
        Device::CoolingCoil,
        Device::HeatingCoil,
        Device::ReheatCoil,
        Device::Radiator,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_heating(self) -> bool {
        !matches!(self, Device::CoolingCoil)
    }

    pub fn name(self) -> &'static str {
        match self {
            Device::CoolingCoil => "cooling_coil",
            Device::HeatingCoil => "heating_coil",
            Device::ReheatCoil => "reheat_coil",
            Device::Radiator => "radiator",
        }
    }
}

/// Grey-box 1R1C parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RcParams {
    /// Thermal capacitance, J/K.
    pub c_z: f64,
    /// Envelope thermal resistance, K/W.
    pub r_w: f64,
    /// Effective solar aperture, m².
    pub alpha: f64,
}

impl RcParams {
    pub fn new(c_z: f64, r_w: f64, alpha: f64) -> Result<Self, ThermalError> {
        let p = RcParams { c_z, r_w, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ThermalError> {
        for (name, v) in [("c_z", self.c_z), ("r_w", self.r_w), ("alpha", self.alpha)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ThermalError::InvalidParams(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// `[c_z, r_w, alpha]`
    pub fn to_array(&self) -> [f64; 3] {
        [self.c_z, self.r_w, self.alpha]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        RcParams {
            c_z: v[0],
            r_w: v[1],
            alpha: v[2],
        }
    }

    /// Time constant `r_w·c_z`, s.
    pub fn time_constant(&self) -> f64 {
        self.r_w * self.c_z
    }

    pub fn scaled(&self, factor: f64) -> Self {
        RcParams {
            c_z: self.c_z * factor,
            r_w: self.r_w * factor,
            alpha: self.alpha * factor,
        }
    }
}

/// Box `[lower, upper]` for the identified parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamBounds {
    pub lower: RcParams,
    pub upper: RcParams,
}

impl ParamBounds {
    pub fn new(lower: RcParams, upper: RcParams) -> Result<Self, ThermalError> {
        let b = ParamBounds { lower, upper };
        b.validate()?;
        Ok(b)
    }

    /// `[lo·theta0, hi·theta0]` componentwise.
    pub fn around(theta0: &RcParams, lo: f64, hi: f64) -> Result<Self, ThermalError> {
        Self::new(theta0.scaled(lo), theta0.scaled(hi))
    }

    pub fn validate(&self) -> Result<(), ThermalError> {
        self.lower
            .validate()
            .and_then(|_| self.upper.validate())
            .map_err(|e| ThermalError::InvalidBounds(e.to_string()))?;
        let lo = self.lower.to_array();
        let hi = self.upper.to_array();
        if lo.iter().zip(&hi).any(|(l, h)| l >= h) {
            return Err(ThermalError::InvalidBounds(format!(
                "lower {lo:?} must be componentwise below upper {hi:?}"
            )));
        }
        Ok(())
    }

    pub fn contains(&self, p: &RcParams) -> bool {
        let v = p.to_array();
        let lo = self.lower.to_array();
        let hi = self.upper.to_array();
        (0..3).all(|i| v[i] >= lo[i] && v[i] <= hi[i])
    }

    pub fn clamp(&self, p: &RcParams) -> RcParams {
        let v = p.to_array();
        let lo = self.lower.to_array();
        let hi = self.upper.to_array();
        RcParams::from_array([0, 1, 2].map(|i| v[i].clamp(lo[i], hi[i])))
    }
}

/// Nominal signed thermal powers and efficiencies, in [`Device`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HvacConfig {
    /// Nominal thermal power, W. Cooling is negative.
    pub q_max: [f64; N_DEVICES],
    /// Efficiency or COP, dimensionless.
    pub gamma: [f64; N_DEVICES],
}

impl HvacConfig {
    pub fn new(q_max: [f64; N_DEVICES], gamma: [f64; N_DEVICES]) -> Result<Self, ThermalError> {
        let c = HvacConfig { q_max, gamma };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ThermalError> {
        if !(self.q_max[0].is_finite() && self.q_max[0] < 0.0) {
            return Err(ThermalError::InvalidHvac(format!(
                "cooling coil power must be negative, got {}",
                self.q_max[0]
            )));
        }
        for d in &Device::ALL[1..] {
            let q = self.q_max[d.index()];
            if !(q.is_finite() && q > 0.0) {
                return Err(ThermalError::InvalidHvac(format!(
                    "{} power must be positive, got {q}",
                    d.name()
                )));
            }
        }
        for d in Device::ALL {
            let g = self.gamma[d.index()];
            if !(g.is_finite() && g > 0.0) {
                return Err(ThermalError::InvalidHvac(format!(
                    "{} efficiency must be positive, got {g}",
                    d.name()
                )));
            }
        }
        Ok(())
    }

    /// Signed delivered thermal power per unit command, `gamma[j]·q_max[j]`, W.
    pub fn effective_power(&self) -> [f64; N_DEVICES] {
        [0, 1, 2, 3].map(|j| self.gamma[j] * self.q_max[j])
    }

    /// Maximum achievable heating and cooling magnitudes, W.
    pub fn capacity(&self) -> (f64, f64) {
        let eff = self.effective_power();
        let heat = eff[1..].iter().sum();
        (heat, -eff[0])
    }
}

/// Normalized device commands in `[0, 1]`, [`Device`] order.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlVector(pub [f64; N_DEVICES]);

impl ControlVector {
    pub fn new(u: [f64; N_DEVICES]) -> Result<Self, ThermalError> {
        if let Some((j, v)) = u
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && (0.0..=1.0).contains(*v)))
        {
            return Err(ThermalError::InvalidControl(format!(
                "{} = {v} outside [0, 1]",
                Device::ALL[j].name()
            )));
        }
        Ok(ControlVector(u))
    }

    pub fn zero() -> Self {
        ControlVector([0.0; N_DEVICES])
    }

    /// Clamps each component into `[0, 1]`; used on solver output to shed
    /// round-off outside the box.
    pub fn saturating(u: [f64; N_DEVICES]) -> Self {
        ControlVector(u.map(|v| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) }))
    }

    pub fn get(&self, d: Device) -> f64 {
        self.0[d.index()]
    }

    pub fn as_array(&self) -> [f64; N_DEVICES] {
        self.0
    }
}

/// Exogenous signals held over one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disturbance {
    /// Ambient temperature, K.
    pub t_amb: f64,
    /// Global horizontal irradiation, W/m².
    pub h_glo: f64,
    /// Internal gain density, W/m².
    pub q_int: f64,
    /// Energy price, currency/kWh.
    pub price: f64,
    pub occupied: bool,
}

impl Disturbance {
    pub fn validate(&self) -> Result<(), ThermalError> {
        if !self.t_amb.is_finite() {
            return Err(ThermalError::InvalidDisturbance(format!("t_amb = {}", self.t_amb)));
        }
        if !(self.h_glo.is_finite() && self.h_glo >= 0.0) {
            return Err(ThermalError::InvalidDisturbance(format!("h_glo = {}", self.h_glo)));
        }
        if !(self.q_int.is_finite() && self.q_int >= 0.0) {
            return Err(ThermalError::InvalidDisturbance(format!("q_int = {}", self.q_int)));
        }
        if !self.price.is_finite() {
            return Err(ThermalError::InvalidDisturbance(format!("price = {}", self.price)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneGeometry {
    /// Floor area, m².
    pub area: f64,
    /// Air volume, m³.
    pub volume: f64,
}

impl ZoneGeometry {
    pub fn new(area: f64, volume: f64) -> Result<Self, ThermalError> {
        if !(area.is_finite() && area > 0.0 && volume.is_finite() && volume > 0.0) {
            return Err(ThermalError::InvalidGeometry(format!(
                "area {area} and volume {volume} must be positive"
            )));
        }
        Ok(ZoneGeometry { area, volume })
    }
}

/// Admissible zone temperature band, K.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TempBand {
    pub t_min: f64,
    pub t_max: f64,
}

impl TempBand {
    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_min && t <= self.t_max
    }

    /// Distance outside the band, K; zero inside.
    pub fn violation(&self, t: f64) -> f64 {
        (self.t_min - t).max(0.0) + (t - self.t_max).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComfortSchedule {
    pub occupied: TempBand,
    pub unoccupied: TempBand,
    /// Weekday occupied window `[start, end)`.
    pub occupied_start: NaiveTime,
    pub occupied_end: NaiveTime,
}

impl ComfortSchedule {
    pub fn new(
        occupied: TempBand,
        unoccupied: TempBand,
        occupied_start: NaiveTime,
        occupied_end: NaiveTime,
    ) -> Result<Self, ThermalError> {
        let s = ComfortSchedule {
            occupied,
            unoccupied,
            occupied_start,
            occupied_end,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ThermalError> {
        for (mode, b) in [("occupied", self.occupied), ("unoccupied", self.unoccupied)] {
            if !(b.t_min.is_finite() && b.t_max.is_finite() && b.t_min < b.t_max) {
                return Err(ThermalError::InvalidSchedule(format!(
                    "{mode} band [{}, {}] is empty",
                    b.t_min, b.t_max
                )));
            }
        }
        if self.occupied.t_min < self.unoccupied.t_min || self.occupied.t_max > self.unoccupied.t_max {
            return Err(ThermalError::InvalidSchedule(
                "occupied band must lie inside the unoccupied band".into(),
            ));
        }
        if self.occupied_start >= self.occupied_end {
            return Err(ThermalError::InvalidSchedule(format!(
                "occupied window {}..{} is empty",
                self.occupied_start, self.occupied_end
            )));
        }
        Ok(())
    }

    /// Office schedule: weekdays 08:00–18:00 at 21–27 °C, otherwise 17–32 °C.
    pub fn office_default() -> Self {
        ComfortSchedule {
            occupied: TempBand {
                t_min: celsius_to_kelvin(21.0),
                t_max: celsius_to_kelvin(27.0),
            },
            unoccupied: TempBand {
                t_min: celsius_to_kelvin(17.0),
                t_max: celsius_to_kelvin(32.0),
            },
            occupied_start: NaiveTime::from_hms_opt(8, 0, 0).unwrap(),
            occupied_end: NaiveTime::from_hms_opt(18, 0, 0).unwrap(),
        }
    }

    pub fn is_occupied(&self, t: NaiveDateTime) -> bool {
        is_weekday(t) && {
            let clock = t.time();
            clock >= self.occupied_start && clock < self.occupied_end
        }
    }
}

pub fn is_weekday(t: NaiveDateTime) -> bool {
    !matches!(t.weekday(), Weekday::Sat | Weekday::Sun)
}

/// Thermal power delivered to the zone, W. Positive heats.
pub fn hvac_power(u: &ControlVector, cfg: &HvacConfig) -> f64 {
    (0..N_DEVICES).map(|j| cfg.gamma[j] * cfg.q_max[j] * u.0[j]).sum()
}

/// Operating cost rate, currency/h, billed on `|gamma·q_max|` so cooling
/// costs money like heating does.
pub fn electrical_cost_rate(u: &ControlVector, cfg: &HvacConfig, price: f64) -> f64 {
    let kw: f64 = (0..N_DEVICES)
        .map(|j| (cfg.gamma[j] * cfg.q_max[j]).abs() * u.0[j])
        .sum::<f64>()
        / 1000.0;
    price * kw
}

/// Decay factor `exp(-dt / (r_w·c_z))` of the exact discretization.
pub fn rc_decay(theta: &RcParams, dt: f64) -> f64 {
    (-dt / theta.time_constant()).exp()
}

/// Heat input to the zone other than envelope conduction, W.
pub fn zone_heat_input(
    u: &ControlVector,
    e: &Disturbance,
    theta: &RcParams,
    geom: &ZoneGeometry,
    cfg: &HvacConfig,
) -> f64 {
    hvac_power(u, cfg) + e.q_int * geom.area + theta.alpha * e.h_glo
}

/// Advances the 1R1C zone model by `dt` seconds with inputs held constant,
/// using the exact solution of the scalar linear ODE.
pub fn step_rc(
    t_zone: f64,
    u: &ControlVector,
    e: &Disturbance,
    theta: &RcParams,
    geom: &ZoneGeometry,
    cfg: &HvacConfig,
    dt: f64,
) -> Result<f64, ThermalError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(ThermalError::InvalidStep(dt));
    }
    let a = rc_decay(theta, dt);
    let q = zone_heat_input(u, e, theta, geom, cfg);
    let next = a * t_zone + (1.0 - a) * (e.t_amb + theta.r_w * q);
    if next.is_finite() {
        Ok(next)
    } else {
        Err(ThermalError::Dynamics(*theta))
    }
}

/// Active comfort band at `t`.
pub fn comfort_bounds(t: NaiveDateTime, sched: &ComfortSchedule) -> TempBand {
    if sched.is_occupied(t) {
        sched.occupied
    } else {
        sched.unoccupied
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn hvac() -> HvacConfig {
        HvacConfig::new([-1814.0, 1477.0, 261.0, 2787.0], [2.7, 0.8, 0.8, 0.9]).unwrap()
    }

    pub fn theta0() -> RcParams {
        RcParams::new(6.6e6, 0.017, 4.2).unwrap()
    }

    pub fn geom() -> ZoneGeometry {
        ZoneGeometry::new(48.0, 129.6).unwrap()
    }

    pub fn calm(t_amb: f64) -> Disturbance {
        Disturbance {
            t_amb,
            h_glo: 0.0,
            q_int: 0.0,
            price: 0.2,
            occupied: false,
        }
    }
}
