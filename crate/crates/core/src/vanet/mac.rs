//! Single collision domain with slotted carrier sense.
//!
//! A transmission is audible one slot after it starts. A sender that finds the medium busy
//! defers; two transmissions starting less than a slot apart cannot hear each other and
//! both collide.

use alloc::vec::Vec;

use super::NS_PER_S;
use crate::math;

pub type TxId = u64;

/// Frame airtime in nanoseconds.
pub fn airtime_ns(size_bits: u32, data_rate_bps: f64) -> u64 {
    math::round(size_bits as f64 / data_rate_bps * NS_PER_S) as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacAccess {
    /// Medium sensed busy until `until_ns`; the caller backs off past it.
    Busy { until_ns: u64 },
    /// Frame is on air; its fate is known at `end_ns`.
    Started { tx: TxId, end_ns: u64 },
}

#[derive(Debug, Clone)]
struct OnAir {
    id: TxId,
    sender: u32,
    start_ns: u64,
    end_ns: u64,
    collided: bool,
}

#[derive(Debug, Clone)]
pub struct Channel {
    slot_ns: u64,
    data_rate_bps: f64,
    on_air: Vec<OnAir>,
    next_id: TxId,
    collisions: u64,
    started: u64,
}

impl Channel {
    pub fn new(slot_ns: u64, data_rate_bps: f64) -> Self {
        Self { slot_ns: slot_ns.max(1), data_rate_bps, on_air: Vec::new(), next_id: 0, collisions: 0, started: 0 }
    }

    /// Carrier sense and, if the medium is idle, start the frame.
    pub fn mac_transmit(&mut self, sender: u32, size_bits: u32, now_ns: u64) -> MacAccess {
        let audible_until = self
            .on_air
            .iter()
            .filter(|t| t.end_ns > now_ns && t.start_ns + self.slot_ns <= now_ns)
            .map(|t| t.end_ns)
            .max();
        if let Some(until_ns) = audible_until {
            return MacAccess::Busy { until_ns };
        }
        let end_ns = now_ns + airtime_ns(size_bits, self.data_rate_bps).max(1);
        let id = self.next_id;
        self.next_id += 1;
        self.started += 1;
        let mut collided = false;
        // nothing is audible, so anything still on air started within the last slot
        for t in self.on_air.iter_mut().filter(|t| t.end_ns > now_ns) {
            t.collided = true;
            collided = true;
        }
        self.on_air.push(OnAir { id, sender, start_ns: now_ns, end_ns, collided });
        MacAccess::Started { tx: id, end_ns }
    }

    /// Removes a finished frame. Returns `true` if it was received cleanly; an unknown id
    /// counts as clean.
    pub fn complete(&mut self, tx: TxId) -> bool {
        match self.on_air.iter().position(|t| t.id == tx) {
            Some(i) => {
                let t = self.on_air.swap_remove(i);
                if t.collided {
                    self.collisions += 1;
                }
                !t.collided
            }
            None => true,
        }
    }

    /// Frames that ended collided so far.
    pub fn collisions(&self) -> u64 {
        self.collisions
    }

    /// Frames put on air so far, retries included.
    pub fn transmissions(&self) -> u64 {
        self.started
    }

    pub fn sender_of(&self, tx: TxId) -> Option<u32> {
        self.on_air.iter().find(|t| t.id == tx).map(|t| t.sender)
    }
}
