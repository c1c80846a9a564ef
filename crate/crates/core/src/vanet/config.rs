use alloc::format;

use serde::{Deserialize, Serialize};

use super::VanetError;

/// The attack event: one vehicle sees a phantom obstacle at `trigger_time_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackConfig {
    pub enabled: bool,
    pub trigger_time_s: f64,
    pub trigger_vehicle: usize,
    pub emergency_duration_s: f64,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self { enabled: false, trigger_time_s: 1.0, trigger_vehicle: 0, emergency_duration_s: 10.0 }
    }
}

/// CSMA/CA parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MacConfig {
    pub slot_s: f64,
    pub cw_min: u32,
    pub cw_max: u32,
    /// Retries after the first collided attempt before the packet is dropped.
    pub retry_limit: u32,
}

impl Default for MacConfig {
    fn default() -> Self {
        Self { slot_s: 13e-6, cw_min: 15, cw_max: 1023, retry_limit: 4 }
    }
}

/// RSU processing: a single FIFO server followed by a fixed pipeline delay.
///
/// Service time is `service_base_s + service_per_bit_s * size + service_per_neighbor_s * n`
/// where `n` counts senders heard within the last `neighbor_expiry_s`: each BSM is checked
/// against the RSU's neighbor table. Zero service time and zero latency make the RSU
/// transparent, so a received packet updates the age tracker at the instant its frame ends
/// (plus propagation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RsuConfig {
    pub service_base_s: f64,
    pub service_per_bit_s: f64,
    pub service_per_neighbor_s: f64,
    pub neighbor_expiry_s: f64,
    /// Packets allowed to wait behind the one in service; `None` is unbounded.
    pub queue_limit: Option<usize>,
    pub latency_s: f64,
}

impl Default for RsuConfig {
    fn default() -> Self {
        Self {
            service_base_s: 0.0,
            service_per_bit_s: 0.0,
            service_per_neighbor_s: 0.0,
            neighbor_expiry_s: 2.0,
            queue_limit: None,
            latency_s: 0.0,
        }
    }
}

impl RsuConfig {
    pub fn service_s(&self, size_bits: u32, neighbors: usize) -> f64 {
        self.service_base_s
            + self.service_per_bit_s * size_bits as f64
            + self.service_per_neighbor_s * neighbors as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_vehicles: usize,
    /// Circumference of the ring road.
    pub road_length_m: f64,
    pub rsu_position_m: f64,
    pub rsu_range_m: f64,
    pub packet_size_bits: u32,
    pub data_rate_bps: f64,
    pub benign_bsm_hz: f64,
    pub emergency_bsm_hz: f64,
    pub attack: AttackConfig,
    pub duration_s: f64,
    pub rng_seed: u64,
    pub speed_mps: f64,
    pub hard_brake_mps2: f64,
    pub reactive_brake_mps2: f64,
    pub mac: MacConfig,
    pub rsu: RsuConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_vehicles: 0,
            road_length_m: 600.0,
            rsu_position_m: 300.0,
            rsu_range_m: 300.0,
            packet_size_bits: 1000,
            data_rate_bps: 6e6,
            benign_bsm_hz: 1.0,
            emergency_bsm_hz: 10.0,
            attack: AttackConfig::default(),
            duration_s: 10.0,
            rng_seed: 0,
            speed_mps: 13.4,
            hard_brake_mps2: 6.0,
            reactive_brake_mps2: 3.0,
            mac: MacConfig::default(),
            rsu: RsuConfig::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), VanetError> {
        let bad = |what: &str| Err(VanetError::InvalidConfig(what.into()));
        let pos = |x: f64| x.is_finite() && x > 0.0;
        let nonneg = |x: f64| x.is_finite() && x >= 0.0;
        if !pos(self.road_length_m) {
            return bad("road_length_m must be > 0");
        }
        if !nonneg(self.rsu_position_m) || self.rsu_position_m >= self.road_length_m {
            return bad("rsu_position_m must lie in [0, road_length_m)");
        }
        if !pos(self.rsu_range_m) {
            return bad("rsu_range_m must be > 0");
        }
        if self.packet_size_bits == 0 {
            return bad("packet_size_bits must be > 0");
        }
        if !pos(self.data_rate_bps) || !pos(self.benign_bsm_hz) || !pos(self.emergency_bsm_hz) {
            return bad("rates must be > 0");
        }
        if !nonneg(self.duration_s) || !nonneg(self.speed_mps) {
            return bad("duration_s and speed_mps must be >= 0");
        }
        if !pos(self.hard_brake_mps2) || !pos(self.reactive_brake_mps2) {
            return bad("braking decelerations must be > 0");
        }
        if !pos(self.mac.slot_s) || self.mac.cw_max < self.mac.cw_min {
            return bad("mac: slot_s must be > 0 and cw_max >= cw_min");
        }
        let rsu = &self.rsu;
        let timings = [
            rsu.service_base_s,
            rsu.service_per_bit_s,
            rsu.service_per_neighbor_s,
            rsu.neighbor_expiry_s,
            rsu.latency_s,
        ];
        if !timings.into_iter().all(nonneg) {
            return bad("rsu timings must be >= 0");
        }
        let a = &self.attack;
        if a.enabled {
            if !nonneg(a.trigger_time_s) || !pos(a.emergency_duration_s) {
                return bad("attack: trigger_time_s >= 0 and emergency_duration_s > 0 required");
            }
            if self.n_vehicles > 0 && a.trigger_vehicle >= self.n_vehicles {
                return Err(VanetError::InvalidConfig(format!(
                    "attack.trigger_vehicle {} out of range for {} vehicles",
                    a.trigger_vehicle, self.n_vehicles
                )));
            }
        }
        Ok(())
    }
}
