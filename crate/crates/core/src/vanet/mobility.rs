//! One-dimensional ring-road kinematics with constant-deceleration braking.

use serde::{Deserialize, Serialize};

use super::NS_PER_S;
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveMode {
    Normal,
    HardBrake,
    ReactiveBrake,
}

/// Snapshot of a vehicle at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub id: u32,
    pub position_m: f64,
    pub speed_mps: f64,
    pub mode: DriveMode,
    pub next_bsm_time_s: f64,
}

/// Piecewise motion: from `t0` the vehicle starts at `x0` with speed `v0` and slows at
/// `decel` until it stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Motion {
    t0_ns: u64,
    x0: f64,
    v0: f64,
    decel: f64,
}

impl Motion {
    pub fn cruising(x0: f64, v0: f64) -> Self {
        Self { t0_ns: 0, x0, v0, decel: 0.0 }
    }

    /// Unwrapped position and speed at `t_ns >= t0`.
    fn at(&self, t_ns: u64) -> (f64, f64) {
        let tau = t_ns.saturating_sub(self.t0_ns) as f64 / NS_PER_S;
        if self.decel <= 0.0 {
            return (self.x0 + self.v0 * tau, self.v0);
        }
        let stop = self.v0 / self.decel;
        let t = tau.min(stop);
        (self.x0 + self.v0 * t - 0.5 * self.decel * t * t, self.v0 - self.decel * t)
    }

    pub fn position(&self, t_ns: u64, road_length_m: f64) -> f64 {
        math::rem_euclid(self.at(t_ns).0, road_length_m)
    }

    pub fn speed(&self, t_ns: u64) -> f64 {
        self.at(t_ns).1.max(0.0)
    }

    /// Changes deceleration from `t_ns` on; `0` holds the current speed.
    pub fn set_decel(&mut self, t_ns: u64, decel: f64, road_length_m: f64) {
        let x = self.position(t_ns, road_length_m);
        let v = self.speed(t_ns);
        *self = Self { t0_ns: t_ns, x0: x, v0: v, decel };
    }
}

/// Distance along the ring between two positions.
pub(crate) fn ring_distance(a: f64, b: f64, road_length_m: f64) -> f64 {
    let d = math::rem_euclid(libm::fabs(a - b), road_length_m);
    d.min(road_length_m - d)
}

#[cfg(test)]
mod tests {
    use super::*;

    const S: u64 = 1_000_000_000;

    #[test]
    fn cruise_wraps() {
        let m = Motion::cruising(590.0, 10.0);
        assert!((m.position(2 * S, 600.0) - 10.0).abs() < 1e-9);
    }

    #[test]
    fn braking_stops_at_v2_over_2a() {
        let mut m = Motion::cruising(0.0, 12.0);
        m.set_decel(S, 6.0, 1000.0);
        assert!((m.position(S, 1000.0) - 12.0).abs() < 1e-9);
        assert_eq!(m.speed(10 * S), 0.0);
        assert!((m.position(10 * S, 1000.0) - 24.0).abs() < 1e-9);
        assert!((m.speed(S + S / 2) - 9.0).abs() < 1e-9);
    }

    #[test]
    fn ring_distance_takes_short_way() {
        assert_eq!(ring_distance(10.0, 590.0, 600.0), 20.0);
        assert_eq!(ring_distance(0.0, 300.0, 600.0), 300.0);
    }
}
