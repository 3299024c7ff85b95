//! Controller configuration derived from the zone's instance graph.
//!
//! Literal arithmetic is done in exact decimal and rounded to `f64` once per
//! derived quantity, so e.g. `0.7 × 6` yields exactly `4.2`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::str::FromStr;

use chrono::NaiveTime;
use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{
    parse_query, Graph, GraphError, Term, BOT, BRICK, FSO, PROPS, RDF_TYPE, SEAS, SOSA, SSN, STANDARD_PREFIXES, TIME,
    UNIT, XSD,
};
use crate::thermal::{
    celsius_to_kelvin, ComfortSchedule, Device, HvacConfig, ParamBounds, RcParams, TempBand, ThermalError,
    ZoneGeometry, N_DEVICES,
};

/// Volumetric heat capacity of air, ρ·c_p in J/(m³·K) as `1.2 × 1005`.
pub const AIR_DENSITY: &str = "1.2";
pub const AIR_HEAT_CAPACITY: &str = "1005";
/// Identification bounds as multiples of the prior.
pub const BOUND_FACTORS: (f64, f64) = (0.1, 10.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeriveError {
    #[error("{subject}: missing {predicate}")]
    MissingProperty { subject: String, predicate: String },
    #[error("{subject}: {predicate} has {count} values, expected one")]
    MultipleValues {
        subject: String,
        predicate: String,
        count: usize,
    },
    #[error("{subject}: {predicate} value {found} is not a number")]
    NotNumeric {
        subject: String,
        predicate: String,
        found: String,
    },
    #[error("{subject}: {predicate} given in {found}, expected {expected}")]
    UnitMismatch {
        subject: String,
        predicate: String,
        found: String,
        expected: String,
    },
    #[error("graph has no bot:Zone")]
    NoZone,
    #[error("graph has several zones, pick one of {0:?}")]
    MultipleZones(Vec<String>),
    #[error("{zone} has no adjacent envelope elements")]
    NoSurfaces { zone: String },
    #[error("no HVAC device serves {zone}")]
    NoDevices { zone: String },
    #[error("{zone}: no {device} found among the devices serving it")]
    MissingDevice { zone: String, device: String },
    #[error("{what} is ambiguous: {subjects:?}")]
    Ambiguous { what: String, subjects: Vec<String> },
    #[error("{subject}: {msg}")]
    Invalid { subject: String, msg: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Thermal(#[from] ThermalError),
}

type Result<T> = std::result::Result<T, DeriveError>;

fn iri(ns: &str, local: &str) -> Term {
    Term::iri(format!("{ns}{local}"))
}

/// Reads a decimal literal, falling back to scientific notation.
fn parse_decimal(s: &str) -> Option<Decimal> {
    let s = s.trim();
    Decimal::from_str_exact(s).or_else(|_| Decimal::from_scientific(s)).ok()
}

fn to_f64(d: Decimal) -> f64 {
    // `to_f64` rounds the exact decimal to the nearest double.
    d.to_f64().unwrap_or(f64::NAN)
}

struct Reader<'g> {
    g: &'g Graph,
}

impl<'g> Reader<'g> {
    fn name(&self, t: &Term) -> String {
        self.g.display_term(t)
    }

    fn objects(&self, s: &Term, p: &Term) -> Vec<&'g Term> {
        self.g.matching(Some(s), Some(p), None).map(|t| &t.o).collect()
    }

    fn single(&self, s: &Term, p: &Term) -> Result<&'g Term> {
        let found = self.objects(s, p);
        match found.len() {
            1 => Ok(found[0]),
            0 => Err(DeriveError::MissingProperty {
                subject: self.name(s),
                predicate: self.name(p),
            }),
            n => Err(DeriveError::MultipleValues {
                subject: self.name(s),
                predicate: self.name(p),
                count: n,
            }),
        }
    }

    fn optional(&self, s: &Term, p: &Term) -> Result<Option<&'g Term>> {
        match self.single(s, p) {
            Ok(t) => Ok(Some(t)),
            Err(DeriveError::MissingProperty { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Numeric literal whose datatype is one of `units`; an empty entry
    /// admits untyped literals.
    fn decimal_of(&self, s: &Term, p: &Term, o: &Term, units: &[&str]) -> Result<Decimal> {
        let lit = o.as_literal().ok_or_else(|| DeriveError::NotNumeric {
            subject: self.name(s),
            predicate: self.name(p),
            found: self.name(o),
        })?;
        let dt = lit.datatype.as_deref().unwrap_or("");
        if !units.contains(&dt) {
            let expected: Vec<String> = units
                .iter()
                .map(|u| {
                    if u.is_empty() {
                        "no datatype".to_string()
                    } else {
                        self.g.compact(u)
                    }
                })
                .collect();
            return Err(DeriveError::UnitMismatch {
                subject: self.name(s),
                predicate: self.name(p),
                found: if dt.is_empty() {
                    "no datatype".into()
                } else {
                    self.g.compact(dt)
                },
                expected: expected.join(" or "),
            });
        }
        parse_decimal(&lit.lexical).ok_or_else(|| DeriveError::NotNumeric {
            subject: self.name(s),
            predicate: self.name(p),
            found: lit.lexical.clone(),
        })
    }

    fn decimal(&self, s: &Term, p: &Term, units: &[&str]) -> Result<Decimal> {
        let o = self.single(s, p)?;
        self.decimal_of(s, p, o, units)
    }

    fn types(&self, s: &Term) -> BTreeSet<String> {
        self.objects(s, &Term::iri(RDF_TYPE))
            .into_iter()
            .filter_map(|t| t.as_iri().map(String::from))
            .collect()
    }
}

fn unit(local: &str) -> String {
    format!("{UNIT}{local}")
}

fn unitless() -> [String; 3] {
    [unit("UNITLESS"), format!("{XSD}decimal"), String::new()]
}

/// The single `bot:Zone` in the graph.
pub fn find_zone(g: &Graph) -> Result<String> {
    let zones: Vec<String> = g
        .subjects(&Term::iri(RDF_TYPE), &iri(BOT, "Zone"))
        .filter_map(|t| t.as_iri().map(String::from))
        .collect();
    match zones.len() {
        0 => Err(DeriveError::NoZone),
        1 => Ok(zones[0].clone()),
        _ => Err(DeriveError::MultipleZones(zones)),
    }
}

pub fn derive_geometry(g: &Graph, zone: &str) -> Result<ZoneGeometry> {
    let r = Reader { g };
    let z = Term::iri(zone);
    let area = r.decimal(&z, &iri(PROPS, "area"), &[&unit("M2")])?;
    let volume = r.decimal(&z, &iri(PROPS, "volume"), &[&unit("M3")])?;
    Ok(ZoneGeometry::new(to_f64(area), to_f64(volume))?)
}

/// Prior 1R1C parameters and the identification box around them.
///
/// `α = Σ g·A` over glazing, `C = Σ κ·A + ρ c V`, `R = 1 / Σ U·A`.
pub fn derive_theta0(g: &Graph, zone: &str) -> Result<(RcParams, ParamBounds)> {
    let r = Reader { g };
    let z = Term::iri(zone);
    let elements = r.objects(&z, &iri(BOT, "adjacentElement"));
    if elements.is_empty() {
        return Err(DeriveError::NoSurfaces { zone: r.name(&z) });
    }
    let (area_p, u_p, g_p, k_p) = (
        iri(PROPS, "area"),
        iri(PROPS, "thermalTransmittance"),
        iri(PROPS, "solarTransmittance"),
        iri(PROPS, "arealHeatCapacity"),
    );
    let unitless = unitless();
    let unitless: Vec<&str> = unitless.iter().map(String::as_str).collect();
    let mut ua = Decimal::ZERO;
    let mut alpha = Decimal::ZERO;
    let mut cap = Decimal::ZERO;
    for e in elements {
        let a = r.decimal(e, &area_p, &[&unit("M2")])?;
        let u = r.decimal(e, &u_p, &[&unit("W-PER-M2-K")])?;
        if a < Decimal::ZERO || u < Decimal::ZERO {
            return Err(DeriveError::Invalid {
                subject: r.name(e),
                msg: "negative area or U-value".into(),
            });
        }
        ua += a * u;
        let g_value = match r.optional(e, &g_p)? {
            Some(o) => Some(r.decimal_of(e, &g_p, o, &unitless)?),
            None => None,
        };
        match (g_value, r.optional(e, &k_p)?) {
            (Some(gv), k) => {
                alpha += gv * a;
                // Glazing capacitance is negligible but counted if given.
                if let Some(o) = k {
                    cap += r.decimal_of(e, &k_p, o, &[&unit("J-PER-M2-K")])? * a;
                }
            }
            (None, Some(o)) => cap += r.decimal_of(e, &k_p, o, &[&unit("J-PER-M2-K")])? * a,
            (None, None) => {
                return Err(DeriveError::MissingProperty {
                    subject: r.name(e),
                    predicate: r.name(&k_p),
                });
            }
        }
    }
    if ua <= Decimal::ZERO {
        return Err(DeriveError::Invalid {
            subject: r.name(&z),
            msg: "envelope conductance Σ U·A is zero".into(),
        });
    }
    let volume = r.decimal(&z, &iri(PROPS, "volume"), &[&unit("M3")])?;
    let air = Decimal::from_str(AIR_DENSITY).unwrap() * Decimal::from_str(AIR_HEAT_CAPACITY).unwrap();
    cap += air * volume;
    let theta = RcParams::new(to_f64(cap), 1.0 / to_f64(ua), to_f64(alpha))?;
    let bounds = ParamBounds::around(&theta, BOUND_FACTORS.0, BOUND_FACTORS.1)?;
    Ok((theta, bounds))
}

fn device_class(d: Device) -> &'static str {
    match d {
        Device::CoolingCoil => "Cooling_Coil",
        Device::HeatingCoil => "Heating_Coil",
        Device::ReheatCoil => "Reheat_Coil",
        Device::Radiator => "Radiator",
    }
}

/// Devices reaching the zone: direct heat transfer plus everything upstream
/// of it on the supply-air chain. Returned in device order.
pub fn find_devices(g: &Graph, zone: &str) -> Result<[String; N_DEVICES]> {
    let r = Reader { g };
    let z = Term::iri(zone);
    let mut reach: BTreeSet<Term> = g.subjects(&iri(FSO, "transfersHeatTo"), &z).cloned().collect();
    let supplies = iri(FSO, "suppliesFluidTo");
    let mut queue = VecDeque::from([z.clone()]);
    let mut seen = BTreeSet::from([z.clone()]);
    while let Some(n) = queue.pop_front() {
        for up in g.subjects(&supplies, &n) {
            if seen.insert(up.clone()) {
                reach.insert(up.clone());
                queue.push_back(up.clone());
            }
        }
    }
    let mut found: BTreeMap<Device, Vec<String>> = BTreeMap::new();
    for node in &reach {
        let types = r.types(node);
        for d in Device::ALL {
            if types.contains(&format!("{BRICK}{}", device_class(d))) {
                found
                    .entry(d)
                    .or_default()
                    .push(node.as_iri().unwrap_or_default().to_string());
            }
        }
    }
    if found.is_empty() {
        return Err(DeriveError::NoDevices { zone: r.name(&z) });
    }
    let mut out: [String; N_DEVICES] = Default::default();
    for d in Device::ALL {
        match found.get(&d).map(Vec::as_slice) {
            Some([one]) => out[d.index()] = one.clone(),
            Some(many) => {
                return Err(DeriveError::Ambiguous {
                    what: format!("{} serving {}", d.name(), r.name(&z)),
                    subjects: many.iter().map(|s| g.compact(s)).collect(),
                })
            }
            None => {
                return Err(DeriveError::MissingDevice {
                    zone: r.name(&z),
                    device: format!("brick:{}", device_class(d)),
                })
            }
        }
    }
    Ok(out)
}

/// Property of `device` typed `class`, read through `seas:simpleValue`.
fn device_property(r: &Reader, device: &Term, class: &str, units: &[&str]) -> Result<Decimal> {
    let has = iri(SSN, "hasProperty");
    let props: Vec<&Term> = r
        .objects(device, &has)
        .into_iter()
        .filter(|p| r.types(p).contains(&format!("{SEAS}{class}")))
        .collect();
    match props.as_slice() {
        [p] => r.decimal(p, &iri(SEAS, "simpleValue"), units),
        [] => Err(DeriveError::MissingProperty {
            subject: r.name(device),
            predicate: format!("ssn:hasProperty of type seas:{class}"),
        }),
        many => Err(DeriveError::Ambiguous {
            what: format!("{} seas:{class}", r.name(device)),
            subjects: many.iter().map(|t| r.name(t)).collect(),
        }),
    }
}

pub fn derive_hvac(g: &Graph, zone: &str) -> Result<HvacConfig> {
    let r = Reader { g };
    let devices = find_devices(g, zone)?;
    let unitless = unitless();
    let unitless: Vec<&str> = unitless.iter().map(String::as_str).collect();
    let mut q_max = [0.0; N_DEVICES];
    let mut gamma = [0.0; N_DEVICES];
    for d in Device::ALL {
        let dev = Term::iri(&devices[d.index()]);
        q_max[d.index()] = to_f64(device_property(&r, &dev, "NominalPowerProperty", &[&unit("W")])?);
        gamma[d.index()] = to_f64(device_property(&r, &dev, "EfficiencyProperty", &unitless)?);
    }
    HvacConfig::new(q_max, gamma).map_err(|e| DeriveError::Invalid {
        subject: r.name(&Term::iri(zone)),
        msg: e.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorRole {
    ZoneTemperature,
    CoolingSetpoint,
    HeatingSetpoint,
    OccupancyCount,
}

impl SensorRole {
    pub const ALL: [SensorRole; 4] = [
        SensorRole::ZoneTemperature,
        SensorRole::CoolingSetpoint,
        SensorRole::HeatingSetpoint,
        SensorRole::OccupancyCount,
    ];

    /// Brick point class of this role.
    pub fn point_class(self) -> &'static str {
        match self {
            SensorRole::ZoneTemperature => "Zone_Air_Temperature_Sensor",
            SensorRole::CoolingSetpoint => "Zone_Air_Cooling_Temperature_Setpoint",
            SensorRole::HeatingSetpoint => "Zone_Air_Heating_Temperature_Setpoint",
            SensorRole::OccupancyCount => "Occupancy_Count_Sensor",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensorBinding {
    pub role: SensorRole,
    pub property: String,
    pub quantity: String,
    pub timeseries_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForecastKind {
    Weather,
    ElectricityPrice,
    Occupancy,
}

impl ForecastKind {
    pub const ALL: [ForecastKind; 3] = [
        ForecastKind::Weather,
        ForecastKind::ElectricityPrice,
        ForecastKind::Occupancy,
    ];

    pub fn class(self) -> &'static str {
        match self {
            ForecastKind::Weather => "WeatherForecast",
            ForecastKind::ElectricityPrice => "ElectricityPriceForecast",
            ForecastKind::Occupancy => "OccupancyForecast",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForecastBinding {
    pub kind: ForecastKind,
    pub forecast: String,
    pub file: String,
}

fn prefix_block() -> String {
    STANDARD_PREFIXES
        .iter()
        .map(|(p, i)| format!("PREFIX {p}: <{i}>\n"))
        .collect()
}

/// Zone properties with their quantity and the time-series ID of the point
/// observing them.
pub fn zone_sensor_query(zone: &str) -> String {
    format!(
        "{}SELECT ?property ?quantity ?id WHERE {{\n  <{zone}> ssn:hasProperty ?property .\n  ?property brick:hasQuantity ?quantity .\n  ?point sosa:observes ?property .\n  ?point brick:hasTimeseriesID ?id .\n}}\n",
        prefix_block()
    )
}

/// Forecast services for the zone and the file backing each.
pub fn forecast_query(zone: &str) -> String {
    format!(
        "{}SELECT ?forecast ?file WHERE {{\n  ?forecast seas:forecastFor <{zone}> .\n  ?forecast seas:hasFilePath ?file .\n}}\n",
        prefix_block()
    )
}

fn literal_text(r: &Reader, s: &Term, p: &Term, t: &Term) -> Result<String> {
    t.as_literal()
        .map(|l| l.lexical.clone())
        .ok_or_else(|| DeriveError::Invalid {
            subject: r.name(s),
            msg: format!("{} must be a literal, found {}", r.name(p), r.name(t)),
        })
}

fn unique<T: Clone>(what: String, items: Vec<(T, String)>) -> Result<Option<T>> {
    match items.len() {
        0 => Ok(None),
        1 => Ok(Some(items[0].0.clone())),
        _ => Err(DeriveError::Ambiguous {
            what,
            subjects: items.into_iter().map(|(_, s)| s).collect(),
        }),
    }
}

pub fn derive_sensors(g: &Graph, zone: &str) -> Result<Vec<SensorBinding>> {
    let r = Reader { g };
    let q = parse_query(&zone_sensor_query(zone), g.prefixes())?;
    // The query projects away the point; rerun it unprojected to see classes.
    let q = crate::graph::Query { select: None, ..q };
    let rows = g.query(&q)?;
    let mut out = Vec::new();
    for role in SensorRole::ALL {
        let class = format!("{BRICK}{}", role.point_class());
        let matches: Vec<(SensorBinding, String)> = rows
            .iter()
            .filter(|b| r.types(&b["point"]).contains(&class))
            .map(|b| {
                let id = literal_text(&r, &b["point"], &iri(BRICK, "hasTimeseriesID"), &b["id"])?;
                Ok((
                    SensorBinding {
                        role,
                        property: b["property"].as_iri().unwrap_or_default().to_string(),
                        quantity: b["quantity"].as_iri().unwrap_or_default().to_string(),
                        timeseries_id: id,
                    },
                    r.name(&b["point"]),
                ))
            })
            .collect::<Result<_>>()?;
        if let Some(b) = unique(format!("{role:?} sensor of {}", r.name(&Term::iri(zone))), matches)? {
            out.push(b);
        }
    }
    if !out.iter().any(|b| b.role == SensorRole::ZoneTemperature) {
        return Err(DeriveError::MissingProperty {
            subject: r.name(&Term::iri(zone)),
            predicate: format!(
                "ssn:hasProperty observed by a brick:{}",
                SensorRole::ZoneTemperature.point_class()
            ),
        });
    }
    Ok(out)
}

pub fn derive_forecasts(g: &Graph, zone: &str) -> Result<Vec<ForecastBinding>> {
    let r = Reader { g };
    let q = parse_query(&forecast_query(zone), g.prefixes())?;
    let rows = g.query(&q)?;
    let mut out = Vec::new();
    for kind in ForecastKind::ALL {
        let class = format!("{SEAS}{}", kind.class());
        let matches: Vec<(ForecastBinding, String)> = rows
            .iter()
            .filter(|b| r.types(&b["forecast"]).contains(&class))
            .map(|b| {
                let file = literal_text(&r, &b["forecast"], &iri(SEAS, "hasFilePath"), &b["file"])?;
                let forecast = b["forecast"].as_iri().unwrap_or_default().to_string();
                Ok((ForecastBinding { kind, forecast, file }, r.name(&b["forecast"])))
            })
            .collect::<Result<_>>()?;
        match unique(
            format!("seas:{} for {}", kind.class(), r.name(&Term::iri(zone))),
            matches,
        )? {
            Some(b) => out.push(b),
            None => {
                return Err(DeriveError::MissingProperty {
                    subject: r.name(&Term::iri(zone)),
                    predicate: format!("seas:forecastFor from a seas:{}", kind.class()),
                })
            }
        }
    }
    Ok(out)
}

/// Controller hyper-parameters, all horizons in steps of `dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyper {
    /// s
    pub dt: f64,
    pub n_c: usize,
    pub n_t: usize,
    pub n_s: usize,
    /// Trigger threshold, K.
    pub rho: f64,
}

fn duration_seconds(r: &Reader, owner: &Term, pred: &Term) -> Result<Decimal> {
    let node = r.single(owner, pred)?;
    let value = r.decimal(node, &iri(TIME, "numericDuration"), &[&format!("{XSD}decimal"), ""])?;
    let ut = r.single(node, &iri(TIME, "unitType"))?;
    let scale = match ut.as_iri().and_then(|s| s.strip_prefix(TIME)) {
        Some("unitSecond") => 1,
        Some("unitMinute") => 60,
        Some("unitHour") => 3600,
        Some("unitDay") => 86_400,
        _ => {
            return Err(DeriveError::UnitMismatch {
                subject: r.name(node),
                predicate: "time:unitType".into(),
                found: r.name(ut),
                expected: "time:unitSecond, unitMinute, unitHour or unitDay".into(),
            })
        }
    };
    let secs = value * Decimal::from(scale);
    if secs <= Decimal::ZERO {
        return Err(DeriveError::Invalid {
            subject: r.name(node),
            msg: "duration must be positive".into(),
        });
    }
    Ok(secs)
}

fn temperature(r: &Reader, s: &Term, p: &Term) -> Result<f64> {
    let o = r.single(s, p)?;
    let v = r.decimal_of(s, p, o, &[&unit("DEG_C"), &unit("K")])?;
    let is_celsius = o.as_literal().and_then(|l| l.datatype.as_deref()) == Some(unit("DEG_C").as_str());
    Ok(if is_celsius {
        celsius_to_kelvin(to_f64(v))
    } else {
        to_f64(v)
    })
}

fn clock(r: &Reader, s: &Term, p: &Term) -> Result<NaiveTime> {
    let o = r.single(s, p)?;
    let text = literal_text(r, s, p, o)?;
    NaiveTime::parse_from_str(&text, "%H:%M:%S").map_err(|_| DeriveError::Invalid {
        subject: r.name(s),
        msg: format!("{} value '{text}' is not HH:MM:SS", r.name(p)),
    })
}

/// The controller node governing `zone`.
pub fn find_controller(g: &Graph, zone: &str) -> Result<Term> {
    let r = Reader { g };
    let ctrls: Vec<Term> = g.subjects(&iri(SEAS, "controls"), &Term::iri(zone)).cloned().collect();
    match ctrls.as_slice() {
        [c] => Ok(c.clone()),
        [] => Err(DeriveError::MissingProperty {
            subject: r.name(&Term::iri(zone)),
            predicate: "controller (seas:controls)".into(),
        }),
        many => Err(DeriveError::Ambiguous {
            what: format!("controller of {}", r.name(&Term::iri(zone))),
            subjects: many.iter().map(|t| r.name(t)).collect(),
        }),
    }
}

pub fn derive_hyper(g: &Graph, zone: &str) -> Result<Hyper> {
    let r = Reader { g };
    let c = find_controller(g, zone)?;
    let dt = duration_seconds(&r, &c, &iri(SEAS, "samplingPeriod"))?;
    let steps = |pred: &str| -> Result<usize> {
        let p = iri(SEAS, pred);
        let secs = duration_seconds(&r, &c, &p)?;
        let n = secs / dt;
        if n.fract() != Decimal::ZERO || n < Decimal::ONE {
            return Err(DeriveError::Invalid {
                subject: r.name(&c),
                msg: format!("{} of {secs} s is not a whole number of {dt} s steps", r.name(&p)),
            });
        }
        n.to_usize().ok_or_else(|| DeriveError::Invalid {
            subject: r.name(&c),
            msg: format!("{} too long", r.name(&p)),
        })
    };
    let (n_c, n_t, n_s) = (
        steps("predictionHorizon")?,
        steps("triggerHorizon")?,
        steps("identificationHorizon")?,
    );
    let rho_p = iri(SEAS, "triggerThreshold");
    let rho = to_f64(r.decimal(&c, &rho_p, &[&unit("K")])?);
    if rho <= 0.0 {
        return Err(DeriveError::Invalid {
            subject: r.name(&c),
            msg: "trigger threshold must be positive".into(),
        });
    }
    if n_s < 2 || n_t > n_s {
        return Err(DeriveError::Invalid {
            subject: r.name(&c),
            msg: format!("need 2 <= trigger horizon {n_t} <= identification horizon {n_s}"),
        });
    }
    Ok(Hyper {
        dt: to_f64(dt),
        n_c,
        n_t,
        n_s,
        rho,
    })
}

pub fn derive_schedule(g: &Graph, zone: &str) -> Result<ComfortSchedule> {
    let r = Reader { g };
    let c = find_controller(g, zone)?;
    let t = |p: &str| temperature(&r, &c, &iri(SEAS, p));
    let occupied = TempBand {
        t_min: t("occupiedLowerBound")?,
        t_max: t("occupiedUpperBound")?,
    };
    let unoccupied = TempBand {
        t_min: t("unoccupiedLowerBound")?,
        t_max: t("unoccupiedUpperBound")?,
    };
    let from = clock(&r, &c, &iri(SEAS, "occupiedFrom"))?;
    let until = clock(&r, &c, &iri(SEAS, "occupiedUntil"))?;
    ComfortSchedule::new(occupied, unoccupied, from, until).map_err(|e| DeriveError::Invalid {
        subject: r.name(&c),
        msg: e.to_string(),
    })
}

/// Everything the controller needs, read from one zone's instance model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerSetup {
    pub zone: String,
    pub geom: ZoneGeometry,
    pub theta0: RcParams,
    pub bounds: ParamBounds,
    pub hvac: HvacConfig,
    pub schedule: ComfortSchedule,
    pub hyper: Hyper,
    pub sensors: Vec<SensorBinding>,
    pub forecasts: Vec<ForecastBinding>,
}

/// Derives the setup for `zone`, or for the graph's only zone.
pub fn derive_setup(g: &Graph, zone: Option<&str>) -> Result<ControllerSetup> {
    let zone = match zone {
        Some(z) => z.to_string(),
        None => find_zone(g)?,
    };
    let (theta0, bounds) = derive_theta0(g, &zone)?;
    Ok(ControllerSetup {
        geom: derive_geometry(g, &zone)?,
        theta0,
        bounds,
        hvac: derive_hvac(g, &zone)?,
        schedule: derive_schedule(g, &zone)?,
        hyper: derive_hyper(g, &zone)?,
        sensors: derive_sensors(g, &zone)?,
        forecasts: derive_forecasts(g, &zone)?,
        zone,
    })
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

impl ControllerSetup {
    /// Equality with relative tolerance `rel` on every real-valued field.
    pub fn approx_eq(&self, other: &ControllerSetup, rel: f64) -> bool {
        let reals = |s: &ControllerSetup| -> Vec<f64> {
            let mut v = vec![s.geom.area, s.geom.volume, s.hyper.dt, s.hyper.rho];
            for p in [s.theta0, s.bounds.lower, s.bounds.upper] {
                v.extend(p.to_array());
            }
            v.extend(s.hvac.q_max);
            v.extend(s.hvac.gamma);
            for b in [s.schedule.occupied, s.schedule.unoccupied] {
                v.extend([b.t_min, b.t_max]);
            }
            v
        };
        let exact = |s: &ControllerSetup| {
            (
                s.zone.clone(),
                (s.hyper.n_c, s.hyper.n_t, s.hyper.n_s),
                (s.schedule.occupied_start, s.schedule.occupied_end),
                s.sensors.clone(),
                s.forecasts.clone(),
            )
        };
        exact(self) == exact(other) && reals(self).iter().zip(reals(other)).all(|(a, b)| close(*a, b, rel))
    }

    /// Minimal instance model from which [`derive_setup`] recovers `self`.
    pub fn to_graph(&self) -> Result<Graph> {
        let mut g = Graph::with_standard_prefixes();
        let z = Term::iri(&self.zone);
        let node = |name: &str| Term::iri(format!("{}_{name}", self.zone));
        let num = |v: f64, dt: &str| Term::typed(format!("{v}"), dt);
        let ty = Term::iri(RDF_TYPE);
        let mut add = |s: &Term, p: Term, o: Term| g.add(s.clone(), p, o).map(|_| ());

        add(&z, ty.clone(), iri(BOT, "Zone"))?;
        add(&z, iri(PROPS, "area"), num(self.geom.area, &unit("M2")))?;
        add(&z, iri(PROPS, "volume"), num(self.geom.volume, &unit("M3")))?;

        let air = to_f64(Decimal::from_str(AIR_DENSITY).unwrap() * Decimal::from_str(AIR_HEAT_CAPACITY).unwrap())
            * self.geom.volume;
        let kappa = self.theta0.c_z - air;
        if kappa < 0.0 {
            return Err(DeriveError::Invalid {
                subject: self.zone.clone(),
                msg: format!("capacitance {} is below the air capacitance {air}", self.theta0.c_z),
            });
        }
        let (opaque, glazing) = (node("Envelope"), node("Glazing"));
        add(&z, iri(BOT, "adjacentElement"), opaque.clone())?;
        add(&z, iri(BOT, "adjacentElement"), glazing.clone())?;
        for e in [&opaque, &glazing] {
            add(e, ty.clone(), iri(BOT, "Element"))?;
            add(e, iri(PROPS, "area"), num(1.0, &unit("M2")))?;
        }
        add(
            &opaque,
            iri(PROPS, "thermalTransmittance"),
            num(1.0 / self.theta0.r_w, &unit("W-PER-M2-K")),
        )?;
        add(
            &opaque,
            iri(PROPS, "arealHeatCapacity"),
            num(kappa, &unit("J-PER-M2-K")),
        )?;
        add(
            &glazing,
            iri(PROPS, "thermalTransmittance"),
            num(0.0, &unit("W-PER-M2-K")),
        )?;
        add(
            &glazing,
            iri(PROPS, "solarTransmittance"),
            num(self.theta0.alpha, &unit("UNITLESS")),
        )?;

        // Coils in series on the supply side, radiator direct.
        let mut downstream = z.clone();
        for d in [
            Device::ReheatCoil,
            Device::HeatingCoil,
            Device::CoolingCoil,
            Device::Radiator,
        ] {
            let dev = node(device_class(d));
            add(&dev, ty.clone(), iri(BRICK, device_class(d)))?;
            if d == Device::Radiator {
                add(&dev, iri(FSO, "transfersHeatTo"), z.clone())?;
            } else {
                add(&dev, iri(FSO, "suppliesFluidTo"), downstream.clone())?;
                downstream = dev.clone();
            }
            for (class, value, dt) in [
                ("NominalPowerProperty", self.hvac.q_max[d.index()], unit("W")),
                ("EfficiencyProperty", self.hvac.gamma[d.index()], unit("UNITLESS")),
            ] {
                let p = node(&format!("{}_{class}", device_class(d)));
                add(&dev, iri(SSN, "hasProperty"), p.clone())?;
                add(&p, ty.clone(), iri(SEAS, class))?;
                add(&p, iri(SEAS, "simpleValue"), num(value, &dt))?;
            }
        }

        for (k, s) in self.sensors.iter().enumerate() {
            let prop = Term::iri(&s.property);
            let point = node(&format!("point_{k}"));
            add(&z, iri(SSN, "hasProperty"), prop.clone())?;
            add(&prop, iri(BRICK, "hasQuantity"), Term::iri(&s.quantity))?;
            add(&point, ty.clone(), iri(BRICK, s.role.point_class()))?;
            add(&point, iri(SOSA, "observes"), prop)?;
            add(&point, iri(BRICK, "hasTimeseriesID"), Term::plain(&s.timeseries_id))?;
        }
        for f in &self.forecasts {
            let fc = Term::iri(&f.forecast);
            add(&fc, ty.clone(), iri(SEAS, f.kind.class()))?;
            add(&fc, iri(SEAS, "forecastFor"), z.clone())?;
            add(&fc, iri(SEAS, "hasFilePath"), Term::plain(&f.file))?;
        }

        let c = node("Controller");
        add(&c, iri(SEAS, "controls"), z.clone())?;
        let h = &self.hyper;
        for (pred, secs) in [
            ("samplingPeriod", h.dt),
            ("predictionHorizon", h.n_c as f64 * h.dt),
            ("triggerHorizon", h.n_t as f64 * h.dt),
            ("identificationHorizon", h.n_s as f64 * h.dt),
        ] {
            let d = node(pred);
            add(&c, iri(SEAS, pred), d.clone())?;
            add(&d, iri(TIME, "numericDuration"), num(secs, &format!("{XSD}decimal")))?;
            add(&d, iri(TIME, "unitType"), iri(TIME, "unitSecond"))?;
        }
        add(&c, iri(SEAS, "triggerThreshold"), num(h.rho, &unit("K")))?;
        let s = &self.schedule;
        for (pred, v) in [
            ("occupiedLowerBound", s.occupied.t_min),
            ("occupiedUpperBound", s.occupied.t_max),
            ("unoccupiedLowerBound", s.unoccupied.t_min),
            ("unoccupiedUpperBound", s.unoccupied.t_max),
        ] {
            add(&c, iri(SEAS, pred), num(v, &unit("K")))?;
        }
        let time = format!("{XSD}time");
        add(
            &c,
            iri(SEAS, "occupiedFrom"),
            Term::typed(s.occupied_start.format("%H:%M:%S").to_string(), &time),
        )?;
        add(
            &c,
            iri(SEAS, "occupiedUntil"),
            Term::typed(s.occupied_end.format("%H:%M:%S").to_string(), &time),
        )?;
        Ok(g)
    }
}

/// The bundled BESTEST case 600 instance model.
pub const BESTEST_CASE600: &str = include_str!("../fixtures/bestest_case600.ttl");

pub fn bestest_graph() -> Graph {
    Graph::parse(BESTEST_CASE600).expect("bundled fixture parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    const ZONE: &str = "https://example.org/bestest#BESTEST_case600";

    /// The fixture minus triples on `subject` whose predicate ends in `pred`.
    fn without(subject: &str, pred: &str) -> Graph {
        let g = bestest_graph();
        let s = Term::iri(format!("https://example.org/bestest#{subject}"));
        let drop: Vec<_> = g
            .iter()
            .filter(|t| t.s == s && t.p.as_iri().unwrap().ends_with(pred))
            .cloned()
            .collect();
        assert!(!drop.is_empty());
        let mut out = Graph::new();
        for (p, i) in g.prefixes().clone() {
            out.add_prefix(&p, &i);
        }
        for t in g.iter() {
            if !drop.contains(t) {
                out.insert(t.clone());
            }
        }
        out
    }

    #[test]
    fn fixture_derives() {
        let g = bestest_graph();
        assert_eq!(find_zone(&g).unwrap(), ZONE);
        let s = derive_setup(&g, None).unwrap();
        assert_eq!(s.theta0.alpha, 4.2);
        assert_eq!(s.hvac.q_max, [-1814.0, 1477.0, 261.0, 2787.0]);
        assert_eq!(s.hvac.gamma, [2.7, 0.8, 0.8, 0.9]);
        assert_eq!((s.hyper.n_c, s.hyper.n_t, s.hyper.n_s), (96, 288, 2016));
        assert_eq!(s.hyper.dt, 300.0);
        assert_eq!(s.hyper.rho, 0.1);
        assert_eq!(s.schedule, ComfortSchedule::office_default());
        assert_eq!(s.sensors.len(), 4);
        assert_eq!(s.forecasts.len(), 3);
    }

    #[test]
    fn envelope_oracle() {
        // Hand sums over the seven elements.
        let ua = 0.56 * (21.6 + 15.6 + 16.2 + 16.2) + 0.04 * 48.0 + 0.3484 * 48.0 + 0.2 * 6.0;
        let cap = 14000.0 * (21.6 + 15.6 + 16.2 + 16.2) + 96000.0 * 48.0 + 18000.0 * 48.0 + 1206.0 * 129.6;
        let (t, b) = derive_theta0(&bestest_graph(), ZONE).unwrap();
        assert!((t.r_w - 1.0 / ua).abs() < 1e-15);
        assert!((t.c_z - cap).abs() < 1e-6);
        assert_eq!(b.lower.alpha, 0.1 * t.alpha);
        assert_eq!(b.upper.c_z, 10.0 * t.c_z);
    }

    #[test]
    fn missing_radiator_efficiency_names_radiator() {
        let g = without("Radiator_eta", "#type");
        let e = derive_hvac(&g, ZONE).unwrap_err();
        assert!(
            matches!(&e, DeriveError::MissingProperty { subject, .. } if subject == ":Radiator"),
            "{e}"
        );
    }

    #[test]
    fn missing_surface_property_names_element() {
        let g = without("Floor", "arealHeatCapacity");
        let e = derive_theta0(&g, ZONE).unwrap_err();
        assert_eq!(
            e,
            DeriveError::MissingProperty {
                subject: ":Floor".into(),
                predicate: "props:arealHeatCapacity".into()
            }
        );
    }

    #[test]
    fn unit_mismatch() {
        let text = BESTEST_CASE600.replace("\"21.6\"^^unit:M2", "\"21.6\"^^unit:M3");
        let e = derive_theta0(&Graph::parse(&text).unwrap(), ZONE).unwrap_err();
        assert!(
            matches!(e, DeriveError::UnitMismatch { ref subject, .. } if subject == ":Wall_North"),
            "{e}"
        );
    }

    #[test]
    fn no_devices() {
        let mut g = Graph::new();
        for t in bestest_graph().iter() {
            let p = t.p.as_iri().unwrap();
            let into_zone = t.o == Term::iri(ZONE);
            if !(into_zone && (p.ends_with("transfersHeatTo") || p.ends_with("suppliesFluidTo"))) {
                g.insert(t.clone());
            }
        }
        assert_eq!(
            derive_hvac(&g, ZONE).unwrap_err(),
            DeriveError::NoDevices {
                zone: format!("<{ZONE}>")
            }
        );
    }

    #[test]
    fn duplicate_sensor_role_is_ambiguous() {
        let extra = "\n:Point_TR99 a brick:Zone_Air_Temperature_Sensor ;\n    sosa:observes :Temperature ;\n    brick:hasTimeseriesID \"LR101.TR99\" .\n";
        let g = Graph::parse(&format!("{BESTEST_CASE600}{extra}")).unwrap();
        assert!(matches!(derive_sensors(&g, ZONE), Err(DeriveError::Ambiguous { .. })));
    }

    #[test]
    fn horizons_must_divide() {
        let text = BESTEST_CASE600.replace(
            "time:numericDuration \"8\"^^xsd:decimal",
            "time:numericDuration \"8.01\"^^xsd:decimal",
        );
        assert!(matches!(
            derive_hyper(&Graph::parse(&text).unwrap(), ZONE),
            Err(DeriveError::Invalid { .. })
        ));
    }

    #[test]
    fn setup_round_trip() {
        let s = derive_setup(&bestest_graph(), None).unwrap();
        let g = s.to_graph().unwrap();
        let back = derive_setup(&Graph::parse(&g.to_document()).unwrap(), Some(ZONE)).unwrap();
        assert!(s.approx_eq(&back, 1e-12), "{s:#?}\n{back:#?}");
    }
}
