use alloc::collections::{BinaryHeap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::aoi::{paoi_stats, AoiTracker};
use super::config::ScenarioConfig;
use super::mac::{Channel, MacAccess, TxId};
use super::mobility::{ring_distance, DriveMode, Motion, VehicleState};
use super::{secs_to_ns, VanetError, NS_PER_S, PROPAGATION_MPS};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Priority {
    Normal,
    Emergency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BsmPacket {
    pub sender_id: u32,
    pub generation_ns: u64,
    pub size_bits: u32,
    pub priority: Priority,
}

impl BsmPacket {
    pub fn generation_time_s(&self) -> f64 {
        self.generation_ns as f64 / NS_PER_S
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub n_vehicles: usize,
    /// Network-level peak age at the RSU; `None` when nothing was recorded.
    pub mean_paoi_ms: Option<f64>,
    pub p95_paoi_ms: Option<f64>,
    pub max_paoi_ms: Option<f64>,
    pub peak_count: usize,
    /// Mean of each vehicle's own peak ages at the RSU.
    pub per_vehicle_paoi_ms: Vec<Option<f64>>,
    /// Tracked BSMs: those generated while the sender was inside RSU coverage.
    pub generated: u64,
    pub delivered: u64,
    pub dropped: u64,
    pub mac_drops: u64,
    pub queue_drops: u64,
    pub in_flight: u64,
    /// Frames that ended collided, retries included.
    pub collisions: u64,
    pub transmissions: u64,
    pub emergency_generated: u64,
    /// Vehicles that entered emergency mode, in order.
    pub affected_vehicles: Vec<u32>,
    /// Tracked BSMs generated in each one-second bin.
    pub load_pps: Vec<u64>,
    /// Vehicle states at the end of the run.
    pub final_vehicles: Vec<VehicleState>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    Generate,
    TxStart,
    TxClean,
    TxCollided,
    MacDrop,
    QueueDrop,
    Update,
    EmergencyStart,
    EmergencyEnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t_ns: u64,
    pub kind: TraceKind,
    pub vehicle: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Event {
    Trigger,
    Bsm { v: u32, epoch: u32 },
    Attempt { v: u32 },
    TxEnd { v: u32, tx: TxId },
    RsuArrive(BsmPacket),
    ServiceDone,
    Update(BsmPacket),
    EmergencyEnd { v: u32 },
}

struct Vehicle {
    motion: Motion,
    mode: DriveMode,
    emergency: bool,
    latched: bool,
    epoch: u32,
    next_bsm_ns: u64,
    queue: VecDeque<BsmPacket>,
    mac_busy: bool,
    cw: u32,
    retries: u32,
}

struct Sim<'a> {
    cfg: &'a ScenarioConfig,
    rng: ChaCha8Rng,
    heap: BinaryHeap<Reverse<(u64, u64, Event)>>,
    seq: u64,
    now: u64,
    slot_ns: u64,
    vehicles: Vec<Vehicle>,
    channel: Channel,
    rsu_queue: VecDeque<BsmPacket>,
    serving: Option<BsmPacket>,
    last_heard_ns: Vec<Option<u64>>,
    tracker: AoiTracker,
    report: SimReport,
    sink: &'a mut dyn FnMut(&TraceRecord),
}

/// Runs one scenario to `duration_s`.
pub fn run(cfg: &ScenarioConfig) -> Result<SimReport, VanetError> {
    run_traced(cfg, &mut |_| {})
}

/// Like [`run`], handing every traced event to `sink` in simulation order.
pub fn run_traced(
    cfg: &ScenarioConfig,
    sink: &mut dyn FnMut(&TraceRecord),
) -> Result<SimReport, VanetError> {
    cfg.validate()?;
    let n = cfg.n_vehicles;
    let bins = math::ceil(cfg.duration_s) as usize;
    let mut sim = Sim {
        cfg,
        rng: ChaCha8Rng::seed_from_u64(cfg.rng_seed),
        heap: BinaryHeap::new(),
        seq: 0,
        now: 0,
        slot_ns: secs_to_ns(cfg.mac.slot_s).max(1),
        vehicles: Vec::with_capacity(n),
        channel: Channel::new(secs_to_ns(cfg.mac.slot_s), cfg.data_rate_bps),
        rsu_queue: VecDeque::new(),
        serving: None,
        last_heard_ns: vec![None; n],
        tracker: AoiTracker::new(n),
        report: SimReport {
            n_vehicles: n,
            mean_paoi_ms: None,
            p95_paoi_ms: None,
            max_paoi_ms: None,
            peak_count: 0,
            per_vehicle_paoi_ms: vec![None; n],
            generated: 0,
            delivered: 0,
            dropped: 0,
            mac_drops: 0,
            queue_drops: 0,
            in_flight: 0,
            collisions: 0,
            transmissions: 0,
            emergency_generated: 0,
            affected_vehicles: Vec::new(),
            load_pps: vec![0; bins],
            final_vehicles: Vec::new(),
        },
        sink,
    };
    sim.start();
    let end = secs_to_ns(cfg.duration_s);
    sim.run_until(end);
    sim.now = end;
    Ok(sim.finish())
}

/// Which scenario field a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    NVehicles,
    PacketSizeBits,
}

impl SweepAxis {
    /// The config for the `index`-th sweep point: `value` on the axis, seed offset by `index`.
    pub fn apply(self, base: &ScenarioConfig, value: u64, index: usize) -> ScenarioConfig {
        let mut cfg = base.clone();
        match self {
            Self::NVehicles => cfg.n_vehicles = value as usize,
            Self::PacketSizeBits => cfg.packet_size_bits = value as u32,
        }
        cfg.rng_seed = base.rng_seed.wrapping_add(index as u64);
        cfg
    }
}

/// Independent runs, one per value.
pub fn sweep(base: &ScenarioConfig, axis: SweepAxis, values: &[u64]) -> Result<Vec<SimReport>, VanetError> {
    if values.is_empty() {
        return Err(VanetError::EmptySweep);
    }
    values.iter().enumerate().map(|(i, &v)| run(&axis.apply(base, v, i))).collect()
}

impl Sim<'_> {
    fn push(&mut self, t: u64, e: Event) {
        self.heap.push(Reverse((t, self.seq, e)));
        self.seq += 1;
    }

    fn trace(&mut self, kind: TraceKind, vehicle: u32) {
        (self.sink)(&TraceRecord { t_ns: self.now, kind, vehicle });
    }

    fn period_ns(&self, emergency: bool) -> u64 {
        let hz = if emergency { self.cfg.emergency_bsm_hz } else { self.cfg.benign_bsm_hz };
        secs_to_ns(1.0 / hz).max(1)
    }

    fn start(&mut self) {
        let n = self.cfg.n_vehicles;
        let road = self.cfg.road_length_m;
        let period = self.period_ns(false);
        for i in 0..n {
            let x0 = road * i as f64 / n as f64;
            let first = self.rng.gen_range(0..period);
            self.vehicles.push(Vehicle {
                motion: Motion::cruising(x0, self.cfg.speed_mps),
                mode: DriveMode::Normal,
                emergency: false,
                latched: false,
                epoch: 0,
                next_bsm_ns: first,
                queue: VecDeque::new(),
                mac_busy: false,
                cw: self.cfg.mac.cw_min,
                retries: 0,
            });
            self.push(first, Event::Bsm { v: i as u32, epoch: 0 });
        }
        if self.cfg.attack.enabled && n > 0 {
            self.push(secs_to_ns(self.cfg.attack.trigger_time_s), Event::Trigger);
        }
    }

    fn run_until(&mut self, end_ns: u64) {
        while let Some(Reverse((t, _, _))) = self.heap.peek() {
            if *t > end_ns {
                break;
            }
            let Reverse((t, _, e)) = self.heap.pop().unwrap();
            self.now = t;
            self.handle(e);
        }
    }

    fn handle(&mut self, e: Event) {
        match e {
            Event::Trigger => {
                let v = self.cfg.attack.trigger_vehicle as u32;
                if !self.vehicles[v as usize].latched {
                    self.enter_emergency(v, DriveMode::HardBrake, self.now);
                }
            }
            Event::Bsm { v, epoch } => self.on_bsm(v, epoch),
            Event::Attempt { v } => self.attempt(v),
            Event::TxEnd { v, tx } => self.on_tx_end(v, tx),
            Event::RsuArrive(p) => self.on_rsu_arrive(p),
            Event::ServiceDone => self.on_service_done(),
            Event::Update(p) => {
                self.report.delivered += 1;
                self.tracker.record(p.sender_id as usize, p.generation_ns, self.now);
                self.trace(TraceKind::Update, p.sender_id);
            }
            Event::EmergencyEnd { v } => {
                let road = self.cfg.road_length_m;
                let now = self.now;
                let veh = &mut self.vehicles[v as usize];
                veh.emergency = false;
                veh.mode = DriveMode::Normal;
                veh.motion.set_decel(now, 0.0, road);
                veh.epoch += 1;
                let epoch = veh.epoch;
                let next = now + self.rng.gen_range(0..self.period_ns(false));
                self.vehicles[v as usize].next_bsm_ns = next;
                self.push(next, Event::Bsm { v, epoch });
                self.trace(TraceKind::EmergencyEnd, v);
            }
        }
    }

    fn position(&self, v: u32) -> f64 {
        self.vehicles[v as usize].motion.position(self.now, self.cfg.road_length_m)
    }

    fn covered(&self, v: u32) -> bool {
        ring_distance(self.position(v), self.cfg.rsu_position_m, self.cfg.road_length_m) <= self.cfg.rsu_range_m
    }

    fn on_bsm(&mut self, v: u32, epoch: u32) {
        if self.vehicles[v as usize].epoch != epoch {
            return;
        }
        let emergency = self.vehicles[v as usize].emergency;
        if self.covered(v) {
            let p = BsmPacket {
                sender_id: v,
                generation_ns: self.now,
                size_bits: self.cfg.packet_size_bits,
                priority: if emergency { Priority::Emergency } else { Priority::Normal },
            };
            self.report.generated += 1;
            if emergency {
                self.report.emergency_generated += 1;
            }
            let bin = (self.now / 1_000_000_000) as usize;
            if let Some(c) = self.report.load_pps.get_mut(bin) {
                *c += 1;
            }
            self.trace(TraceKind::Generate, v);
            let veh = &mut self.vehicles[v as usize];
            veh.queue.push_back(p);
            if !veh.mac_busy {
                veh.mac_busy = true;
                self.attempt(v);
            }
        }
        let next = self.now + self.period_ns(emergency);
        self.vehicles[v as usize].next_bsm_ns = next;
        self.push(next, Event::Bsm { v, epoch });
    }

    fn attempt(&mut self, v: u32) {
        let Some(&head) = self.vehicles[v as usize].queue.front() else {
            self.vehicles[v as usize].mac_busy = false;
            return;
        };
        match self.channel.mac_transmit(v, head.size_bits, self.now) {
            MacAccess::Busy { until_ns } => {
                let k = self.rng.gen_range(0..=self.vehicles[v as usize].cw) as u64;
                self.push(until_ns + k * self.slot_ns, Event::Attempt { v });
            }
            MacAccess::Started { tx, end_ns } => {
                self.trace(TraceKind::TxStart, v);
                self.push(end_ns, Event::TxEnd { v, tx });
            }
        }
    }

    fn backoff_then_attempt(&mut self, v: u32) {
        let cw = self.vehicles[v as usize].cw;
        let k = self.rng.gen_range(0..=cw) as u64;
        self.push(self.now + k * self.slot_ns, Event::Attempt { v });
    }

    fn on_tx_end(&mut self, v: u32, tx: TxId) {
        let clean = self.channel.complete(tx);
        let mac = &self.cfg.mac;
        if !clean {
            self.trace(TraceKind::TxCollided, v);
            let veh = &mut self.vehicles[v as usize];
            veh.retries += 1;
            if veh.retries <= mac.retry_limit {
                veh.cw = (2 * veh.cw + 1).min(mac.cw_max);
                self.backoff_then_attempt(v);
                return;
            }
            veh.queue.pop_front();
            veh.cw = mac.cw_min;
            veh.retries = 0;
            self.report.mac_drops += 1;
            self.trace(TraceKind::MacDrop, v);
        } else {
            self.trace(TraceKind::TxClean, v);
            let veh = &mut self.vehicles[v as usize];
            let p = veh.queue.pop_front().expect("transmitting vehicle has a head packet");
            veh.cw = mac.cw_min;
            veh.retries = 0;
            let dist = ring_distance(self.position(v), self.cfg.rsu_position_m, self.cfg.road_length_m);
            let prop = math::round(dist / PROPAGATION_MPS * NS_PER_S) as u64;
            self.push(self.now + prop, Event::RsuArrive(p));
            if p.priority == Priority::Emergency {
                self.spread_emergency(v);
            }
        }
        if self.vehicles[v as usize].queue.is_empty() {
            self.vehicles[v as usize].mac_busy = false;
        } else {
            self.backoff_then_attempt(v);
        }
    }

    /// Covered vehicles within range of `sender` that have not reacted yet start reactive
    /// braking and their own emergency broadcast.
    fn spread_emergency(&mut self, sender: u32) {
        let from = self.position(sender);
        let road = self.cfg.road_length_m;
        for u in 0..self.vehicles.len() as u32 {
            if u == sender || self.vehicles[u as usize].latched {
                continue;
            }
            if self.covered(u) && ring_distance(self.position(u), from, road) <= self.cfg.rsu_range_m {
                let first = self.now + self.rng.gen_range(0..self.period_ns(true));
                self.enter_emergency(u, DriveMode::ReactiveBrake, first);
            }
        }
    }

    fn enter_emergency(&mut self, v: u32, mode: DriveMode, first_bsm_ns: u64) {
        let decel = match mode {
            DriveMode::HardBrake => self.cfg.hard_brake_mps2,
            _ => self.cfg.reactive_brake_mps2,
        };
        let (now, road) = (self.now, self.cfg.road_length_m);
        let veh = &mut self.vehicles[v as usize];
        veh.latched = true;
        veh.emergency = true;
        veh.mode = mode;
        veh.motion.set_decel(now, decel, road);
        veh.epoch += 1;
        veh.next_bsm_ns = first_bsm_ns;
        let epoch = veh.epoch;
        self.report.affected_vehicles.push(v);
        self.push(first_bsm_ns, Event::Bsm { v, epoch });
        self.push(now + secs_to_ns(self.cfg.attack.emergency_duration_s), Event::EmergencyEnd { v });
        self.trace(TraceKind::EmergencyStart, v);
    }

    fn on_rsu_arrive(&mut self, p: BsmPacket) {
        self.last_heard_ns[p.sender_id as usize] = Some(self.now);
        if self.serving.is_none() {
            self.begin_service(p);
        } else if self.cfg.rsu.queue_limit.is_some_and(|k| self.rsu_queue.len() >= k) {
            self.report.queue_drops += 1;
            self.trace(TraceKind::QueueDrop, p.sender_id);
        } else {
            self.rsu_queue.push_back(p);
        }
    }

    fn begin_service(&mut self, p: BsmPacket) {
        self.serving = Some(p);
        let expiry = secs_to_ns(self.cfg.rsu.neighbor_expiry_s);
        let since = self.now.saturating_sub(expiry);
        let neighbors = self.last_heard_ns.iter().filter(|t| t.is_some_and(|t| t >= since)).count();
        let s = secs_to_ns(self.cfg.rsu.service_s(p.size_bits, neighbors));
        self.push(self.now + s, Event::ServiceDone);
    }

    fn on_service_done(&mut self) {
        let p = self.serving.take().expect("service completion without a packet");
        self.push(self.now + secs_to_ns(self.cfg.rsu.latency_s), Event::Update(p));
        if let Some(next) = self.rsu_queue.pop_front() {
            self.begin_service(next);
        }
    }

    /// Vehicle snapshots at the current simulation time.
    fn snapshot(&self) -> Vec<VehicleState> {
        (0..self.vehicles.len() as u32)
            .map(|v| {
                let veh = &self.vehicles[v as usize];
                VehicleState {
                    id: v,
                    position_m: self.position(v),
                    speed_mps: veh.motion.speed(self.now),
                    mode: veh.mode,
                    next_bsm_time_s: veh.next_bsm_ns as f64 / NS_PER_S,
                }
            })
            .collect()
    }

    fn finish(self) -> SimReport {
        let final_vehicles = self.snapshot();
        let mut r = self.report;
        r.final_vehicles = final_vehicles;
        let queued: u64 = self.vehicles.iter().map(|v| v.queue.len() as u64).sum();
        let pending = self
            .heap
            .iter()
            .filter(|Reverse((_, _, e))| matches!(e, Event::RsuArrive(_) | Event::Update(_)))
            .count() as u64;
        r.in_flight = queued + pending + self.rsu_queue.len() as u64 + self.serving.is_some() as u64;
        r.dropped = r.mac_drops + r.queue_drops;
        r.collisions = self.channel.collisions();
        r.transmissions = self.channel.transmissions();
        let peaks = self.tracker.peaks_ms();
        if let Ok((mean, p95)) = paoi_stats(peaks) {
            r.mean_paoi_ms = Some(mean);
            r.p95_paoi_ms = Some(p95);
            r.max_paoi_ms = peaks.iter().copied().reduce(f64::max);
        }
        r.peak_count = peaks.len();
        r.per_vehicle_paoi_ms = self.tracker.per_sender_mean_ms();
        r
    }
}
