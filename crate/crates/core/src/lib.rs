//! Knowledge-graph configured economic MPC for a single HVAC zone.
//!
//! The pieces, bottom up:
//!
//! * [`thermal`]: HVAC power map, 1R1C zone model, comfort schedule and a
//!   reference plant.
//! * [`sysid`]: box-constrained weighted least-squares fit of the 1R1C
//!   parameters from closed-loop data.
//! * [`trigger`]: windowed-RMSE event trigger deciding when to re-identify.
//! * [`mpc`]: economic MPC posed and solved as a linear program.
//! * [`rbc`]: staged hysteresis thermostat used as the baseline.
//! * [`graph`]: in-memory triple store with basic graph pattern queries.
//! * [`derive`]: compiles a building graph into a controller setup.
//! * [`forecast`]: time-series store, CSV ingestion and forecast bundles.
//! * [`harness`]: closed-loop experiment runner and reporting.

pub mod derive;
pub mod forecast;
pub mod graph;
pub mod harness;
pub mod mpc;
pub mod rbc;
pub mod sysid;
pub mod thermal;
pub mod trigger;
