//! Scenario files (TOML).

use std::path::{Path, PathBuf};

use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::forecast::synthetic::{SyntheticPrice, SyntheticWeather};
use crate::forecast::OccupancyProfile;
use crate::rbc::RbcConfig;
use crate::thermal::{R3c2Params, RcParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    Mpc,
    Rbc,
}

impl std::fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ControllerKind::Mpc => "mpc",
            ControllerKind::Rbc => "rbc",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlantKind {
    R3c2,
    Perfect1r1c,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantSpec {
    pub kind: PlantKind,
    /// Sensor noise standard deviation, K.
    pub noise_sigma: f64,
    pub r3c2: R3c2Params,
    /// True parameters of a perfect 1R1C plant; the graph prior if unset.
    pub theta: Option<RcParams>,
    /// Initial zone (and mass) temperature, °C.
    pub initial_temperature_c: f64,
}

impl Default for PlantSpec {
    fn default() -> Self {
        PlantSpec {
            kind: PlantKind::R3c2,
            noise_sigma: 0.05,
            r3c2: R3c2Params::default(),
            theta: None,
            initial_temperature_c: 24.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeatherSpec {
    /// CSV with `timestamp,t_amb_c,h_glo_w_m2`; synthetic weather if unset.
    pub csv: Option<PathBuf>,
    pub synthetic: SyntheticWeather,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriceSpec {
    /// CSV with `timestamp,price`; synthetic prices if unset.
    pub csv: Option<PathBuf>,
    pub synthetic: SyntheticPrice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaInit {
    /// The graph-derived prior.
    Derived,
    /// The true parameters of a perfect 1R1C plant.
    Plant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SysIdSpec {
    pub enabled: bool,
    pub initial_theta: ThetaInit,
    pub forgetting: f64,
    pub multistart: usize,
    pub max_iterations: usize,
}

impl Default for SysIdSpec {
    fn default() -> Self {
        SysIdSpec {
            enabled: true,
            initial_theta: ThetaInit::Derived,
            forgetting: 1.0,
            multistart: 2,
            max_iterations: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MpcSpec {
    pub mu_upper: f64,
    pub mu_lower: f64,
}

impl Default for MpcSpec {
    fn default() -> Self {
        MpcSpec {
            mu_upper: 1000.0,
            mu_lower: 1000.0,
        }
    }
}

/// Replacements for graph-derived hyper-parameters.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Overrides {
    pub rho: Option<f64>,
    pub n_t: Option<usize>,
    pub n_s: Option<usize>,
    pub n_c: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub start: NaiveDateTime,
    pub days: u32,
    /// Seeds sensor noise and identification multistarts.
    pub seed: u64,
    pub controller: ControllerKind,
    /// Instance graph; the bundled BESTEST case 600 model if unset.
    pub graph: Option<PathBuf>,
    /// Zone IRI; the graph's only zone if unset.
    pub zone: Option<String>,
    pub plant: PlantSpec,
    pub weather: WeatherSpec,
    pub price: PriceSpec,
    pub occupancy: OccupancyProfile,
    pub mpc: MpcSpec,
    pub sysid: SysIdSpec,
    pub rbc: RbcConfig,
    pub overrides: Overrides,
}

impl Default for Scenario {
    /// One July month on the two-node plant.
    fn default() -> Self {
        Scenario {
            name: "july-2018".into(),
            start: NaiveDate::from_ymd_opt(2018, 7, 1)
                .unwrap()
                .and_hms_opt(0, 0, 0)
                .unwrap(),
            days: 31,
            seed: 42,
            controller: ControllerKind::Mpc,
            graph: None,
            zone: None,
            plant: PlantSpec::default(),
            weather: WeatherSpec::default(),
            price: PriceSpec::default(),
            occupancy: OccupancyProfile::default(),
            mpc: MpcSpec::default(),
            sysid: SysIdSpec::default(),
            rbc: RbcConfig::default(),
            overrides: Overrides::default(),
        }
    }
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let s: Scenario = toml::from_str(text).map_err(|e| HarnessError::Scenario(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| HarnessError::Input(format!("{}: {e}", path.display())))?;
        Scenario::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Scenario(m));
        if self.days == 0 {
            return bad("days must be >= 1".into());
        }
        if !(self.plant.noise_sigma.is_finite() && self.plant.noise_sigma >= 0.0) {
            return bad(format!("noise_sigma {}", self.plant.noise_sigma));
        }
        if !self.plant.initial_temperature_c.is_finite() {
            return bad("initial temperature must be finite".into());
        }
        if self.sysid.initial_theta == ThetaInit::Plant && self.plant.kind != PlantKind::Perfect1r1c {
            return bad("initial_theta = \"plant\" needs a perfect_1r1c plant".into());
        }
        if self.sysid.multistart == 0 || self.sysid.max_iterations == 0 {
            return bad("sysid multistart and max_iterations must be >= 1".into());
        }
        Ok(())
    }

    /// Hash of everything except the controller choice, so runs of both
    /// controllers on the same scenario share it.
    pub fn fingerprint(&self) -> String {
        let mut s = self.clone();
        s.controller = ControllerKind::Mpc;
        let json = serde_json::to_string(&s).expect("scenario serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let s = Scenario::default();
        assert_eq!(Scenario::from_toml(&s.to_toml()).unwrap(), s);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let s = Scenario::from_toml("days = 3\ncontroller = \"rbc\"\n[plant]\nnoise_sigma = 0.0\n").unwrap();
        assert_eq!(s.days, 3);
        assert_eq!(s.controller, ControllerKind::Rbc);
        assert_eq!(s.plant.kind, PlantKind::R3c2);
        assert_eq!(s.plant.noise_sigma, 0.0);
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(Scenario::from_toml("dayz = 3").is_err());
        assert!(Scenario::from_toml("days = 0").is_err());
        assert!(Scenario::from_toml("[sysid]\ninitial_theta = \"plant\"").is_err());
    }

    #[test]
    fn fingerprint_ignores_controller() {
        let a = Scenario::default();
        let b = Scenario {
            controller: ControllerKind::Rbc,
            ..a.clone()
        };
        let c = Scenario { seed: 1, ..a.clone() };
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_ne!(a.fingerprint(), c.fingerprint());
        assert_eq!(a.fingerprint().len(), 64);
    }
}
