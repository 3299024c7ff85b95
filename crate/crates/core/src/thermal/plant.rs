//! Reference plant standing in for a detailed building simulation.
//!
//! Two modes: a perfect 1R1C plant that is exactly [`step_rc`], and a
//! two-node R3C2 network (zone air + envelope mass) that gives the
//! identified 1R1C model a realistic structural mismatch.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{hvac_power, step_rc, ControlVector, Disturbance, HvacConfig, RcParams, ThermalError, ZoneGeometry};

/// Sanity range for plant temperatures, K.
pub const PLAUSIBLE_RANGE: (f64, f64) = (243.0, 333.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantState {
    /// Zone air temperature, K.
    pub t_zone: f64,
    /// Lumped envelope mass temperature, K. Tracks `t_zone` in 1R1C mode.
    pub t_mass: f64,
}

impl PlantState {
    pub fn uniform(t: f64) -> Self {
        PlantState { t_zone: t, t_mass: t }
    }
}

/// True parameters of the two-node network.
///
/// ```text
///   t_amb --r_zone_amb-- zone(c_zone) --r_zone_mass-- mass(c_mass) --r_mass_amb-- t_amb
/// ```
/// HVAC power and internal gains enter the zone node; solar gains are split
/// between the nodes by `solar_to_mass`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct R3c2Params {
    /// J/K
    pub c_zone: f64,
    /// J/K
    pub c_mass: f64,
    /// K/W, direct conduction through glazing and light elements.
    pub r_zone_amb: f64,
    /// K/W, interior surface film.
    pub r_zone_mass: f64,
    /// K/W, mass node to outside.
    pub r_mass_amb: f64,
    /// m²
    pub solar_aperture: f64,
    /// Fraction of solar gain absorbed by the mass node.
    pub solar_to_mass: f64,
}

impl Default for R3c2Params {
    /// Built from the office test zone's envelope by element class. The
    /// zone node holds the air plus the lightweight walls and roof, which
    /// also carry the direct conduction path together with the window. The
    /// mass node is the floor slab behind its interior film (0.17 m²K/W),
    /// losing to the ground through the floor U-value. Total conductance
    /// 58.82 W/K and capacitance 6.6 MJ/K match the 1R1C fixture. The
    /// solar aperture is about 0.64 of the window's g·A, the ratio of July
    /// irradiance on south-facing vertical glazing to global horizontal.
    fn default() -> Self {
        R3c2Params {
            c_zone: 1_994_697.6,
            c_mass: 4_608_000.0,
            r_zone_amb: 0.017_575,
            r_zone_mass: 0.003_542,
            r_mass_amb: 0.517_29,
            solar_aperture: 2.7,
            solar_to_mass: 0.6,
        }
    }
}

impl R3c2Params {
    pub fn validate(&self) -> Result<(), ThermalError> {
        let positive = [
            ("c_zone", self.c_zone),
            ("c_mass", self.c_mass),
            ("r_zone_amb", self.r_zone_amb),
            ("r_zone_mass", self.r_zone_mass),
            ("r_mass_amb", self.r_mass_amb),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ThermalError::InvalidParams(format!("plant {name} = {v}")));
            }
        }
        if !(self.solar_aperture.is_finite() && self.solar_aperture >= 0.0) {
            return Err(ThermalError::InvalidParams(format!(
                "plant solar_aperture = {}",
                self.solar_aperture
            )));
        }
        if !(0.0..=1.0).contains(&self.solar_to_mass) {
            return Err(ThermalError::InvalidParams(format!(
                "plant solar_to_mass = {}",
                self.solar_to_mass
            )));
        }
        Ok(())
    }

    /// Steady-state zone-to-ambient conductance, W/K.
    pub fn total_conductance(&self) -> f64 {
        1.0 / self.r_zone_amb + 1.0 / (self.r_zone_mass + self.r_mass_amb)
    }

    /// Continuous-time system matrix and forcing vector of `x' = A x + b`.
    fn system(&self, q_zone: f64, q_mass: f64, t_amb: f64) -> ([[f64; 2]; 2], [f64; 2]) {
        let g_zm = 1.0 / self.r_zone_mass;
        let g_za = 1.0 / self.r_zone_amb;
        let g_ma = 1.0 / self.r_mass_amb;
        let a = [
            [-(g_zm + g_za) / self.c_zone, g_zm / self.c_zone],
            [g_zm / self.c_mass, -(g_zm + g_ma) / self.c_mass],
        ];
        let b = [
            (g_za * t_amb + q_zone) / self.c_zone,
            (g_ma * t_amb + q_mass) / self.c_mass,
        ];
        (a, b)
    }

    /// Heat flows into the zone and mass nodes, W.
    fn node_inputs(&self, u: &ControlVector, e: &Disturbance, geom: &ZoneGeometry, hvac: &HvacConfig) -> (f64, f64) {
        let solar = self.solar_aperture * e.h_glo;
        let q_zone = hvac_power(u, hvac) + e.q_int * geom.area + (1.0 - self.solar_to_mass) * solar;
        (q_zone, self.solar_to_mass * solar)
    }

    /// Time derivative of the state; exposed for fine-step reference integrators.
    pub fn derivative(
        &self,
        x: [f64; 2],
        u: &ControlVector,
        e: &Disturbance,
        geom: &ZoneGeometry,
        hvac: &HvacConfig,
    ) -> [f64; 2] {
        let (qz, qm) = self.node_inputs(u, e, geom, hvac);
        let (a, b) = self.system(qz, qm, e.t_amb);
        [
            a[0][0] * x[0] + a[0][1] * x[1] + b[0],
            a[1][0] * x[0] + a[1][1] * x[1] + b[1],
        ]
    }

    /// Exact zero-order-hold step: `x' = x* + exp(A·dt)(x − x*)`.
    fn step_exact(
        &self,
        x: [f64; 2],
        u: &ControlVector,
        e: &Disturbance,
        geom: &ZoneGeometry,
        hvac: &HvacConfig,
        dt: f64,
    ) -> [f64; 2] {
        let (qz, qm) = self.node_inputs(u, e, geom, hvac);
        let (a, b) = self.system(qz, qm, e.t_amb);
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        // x* = -A⁻¹ b
        let fixed = [
            -(a[1][1] * b[0] - a[0][1] * b[1]) / det,
            -(-a[1][0] * b[0] + a[0][0] * b[1]) / det,
        ];
        let phi = expm2(a, dt);
        let d = [x[0] - fixed[0], x[1] - fixed[1]];
        [
            fixed[0] + phi[0][0] * d[0] + phi[0][1] * d[1],
            fixed[1] + phi[1][0] * d[0] + phi[1][1] * d[1],
        ]
    }
}

/// `exp(A·t)` for a 2×2 matrix with real distinct eigenvalues, which every
/// passive two-node RC network has (off-diagonal product is positive).
fn expm2(a: [[f64; 2]; 2], t: f64) -> [[f64; 2]; 2] {
    let tr = a[0][0] + a[1][1];
    let diff = a[0][0] - a[1][1];
    let disc = (diff * diff + 4.0 * a[0][1] * a[1][0]).sqrt();
    let l1 = 0.5 * (tr + disc);
    let l2 = 0.5 * (tr - disc);
    let e1 = (l1 * t).exp();
    let e2 = (l2 * t).exp();
    // Sylvester: (e1 (A − l2 I) − e2 (A − l1 I)) / (l1 − l2)
    let k = 1.0 / (l1 - l2);
    [
        [k * (e1 * (a[0][0] - l2) - e2 * (a[0][0] - l1)), k * (e1 - e2) * a[0][1]],
        [k * (e1 - e2) * a[1][0], k * (e1 * (a[1][1] - l2) - e2 * (a[1][1] - l1))],
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlantMode {
    /// The plant is the 1R1C model itself with the given true parameters.
    Perfect1r1c {
        theta: RcParams,
    },
    R3c2(R3c2Params),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantConfig {
    pub mode: PlantMode,
    pub geom: ZoneGeometry,
    pub hvac: HvacConfig,
    /// Standard deviation of the zone temperature sensor noise, K.
    pub noise_sigma: f64,
}

impl PlantConfig {
    pub fn validate(&self) -> Result<(), ThermalError> {
        match &self.mode {
            PlantMode::Perfect1r1c { theta } => theta.validate()?,
            PlantMode::R3c2(p) => p.validate()?,
        }
        self.hvac.validate()?;
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(ThermalError::InvalidParams(format!(
                "noise sigma = {}",
                self.noise_sigma
            )));
        }
        Ok(())
    }
}

/// Advances the plant by `dt` seconds with inputs held constant.
pub fn plant_step(
    s: &PlantState,
    u: &ControlVector,
    e: &Disturbance,
    cfg: &PlantConfig,
    dt: f64,
) -> Result<PlantState, ThermalError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(ThermalError::InvalidStep(dt));
    }
    let next = match &cfg.mode {
        PlantMode::Perfect1r1c { theta } => {
            let t = step_rc(s.t_zone, u, e, theta, &cfg.geom, &cfg.hvac, dt)?;
            PlantState::uniform(t)
        }
        PlantMode::R3c2(p) => {
            let x = p.step_exact([s.t_zone, s.t_mass], u, e, &cfg.geom, &cfg.hvac, dt);
            PlantState {
                t_zone: x[0],
                t_mass: x[1],
            }
        }
    };
    let (lo, hi) = PLAUSIBLE_RANGE;
    for (node, t) in [("zone", next.t_zone), ("mass", next.t_mass)] {
        if !(t.is_finite() && (lo..=hi).contains(&t)) {
            return Err(ThermalError::SimulationFault(format!(
                "{node} temperature {t} K outside [{lo}, {hi}] K"
            )));
        }
    }
    Ok(next)
}

/// Stateful plant with a seeded noisy zone temperature sensor.
#[derive(Debug, Clone)]
pub struct ReferencePlant {
    cfg: PlantConfig,
    state: PlantState,
    rng: ChaCha8Rng,
    noise: Option<Normal<f64>>,
}

impl ReferencePlant {
    pub fn new(cfg: PlantConfig, initial: PlantState, seed: u64) -> Result<Self, ThermalError> {
        cfg.validate()?;
        let noise = if cfg.noise_sigma > 0.0 {
            Some(
                Normal::new(0.0, cfg.noise_sigma)
                    .map_err(|e| ThermalError::InvalidParams(format!("noise sigma: {e}")))?,
            )
        } else {
            None
        };
        Ok(ReferencePlant {
            cfg,
            state: initial,
            rng: ChaCha8Rng::seed_from_u64(seed),
            noise,
        })
    }

    pub fn state(&self) -> PlantState {
        self.state
    }

    pub fn config(&self) -> &PlantConfig {
        &self.cfg
    }

    /// Zone temperature as seen by the sensor.
    pub fn measure(&mut self) -> f64 {
        match &self.noise {
            Some(n) => self.state.t_zone + n.sample(&mut self.rng),
            None => self.state.t_zone,
        }
    }

    pub fn step(&mut self, u: &ControlVector, e: &Disturbance, dt: f64) -> Result<PlantState, ThermalError> {
        self.state = plant_step(&self.state, u, e, &self.cfg, dt)?;
        Ok(self.state)
    }
}
