//! Discrete-event simulation of BSM broadcast to a roadside unit.
//!
//! Vehicles drive a single-lane ring road. Those inside the RSU's coverage broadcast
//! Basic Safety Messages through a shared CSMA/CA channel; the RSU processes them through
//! a FIFO server and tracks age of information. An optional attack event puts one vehicle
//! into hard braking with 10 Hz emergency BSMs, and every covered vehicle that hears an
//! emergency BSM follows with reactive braking and its own emergency flood.
//!
//! Simulated time is kept in integer nanoseconds so event ordering is exact.

mod aoi;
mod config;
mod mac;
mod mobility;
mod sim;

pub use aoi::{nearest_rank, paoi_stats, paoi_summary, AoiTracker};
pub use config::{AttackConfig, MacConfig, RsuConfig, ScenarioConfig};
pub use mac::{airtime_ns, Channel, MacAccess, TxId};
pub use mobility::{DriveMode, VehicleState};
pub use sim::{run, run_traced, sweep, BsmPacket, Priority, SimReport, SweepAxis, TraceRecord};

use alloc::string::String;

/// Speed of light, m/s.
pub const PROPAGATION_MPS: f64 = 299_792_458.0;
pub const NS_PER_S: f64 = 1e9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VanetError {
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
    #[error("NoSamples: no peak ages were recorded")]
    NoSamples,
    #[error("sweep needs at least one value")]
    EmptySweep,
}

/// Seconds to whole nanoseconds, rounded.
pub fn secs_to_ns(s: f64) -> u64 {
    crate::math::round(s * NS_PER_S) as u64
}

pub fn ns_to_ms(ns: u64) -> f64 {
    ns as f64 / 1e6
}
