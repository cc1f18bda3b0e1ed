//! Deterministic slot-level simulation of one link (transmitter and receiver
//! mote) with one allocated cell per slotframe.
//!
//! Time is kept as integer microseconds; slotframe `f` has its allocated cell
//! at `f * T_sf + offset * T_slot`. A packet released at or before the start
//! of a cell is eligible for it. Traffic and channel draws come from two
//! independent ChaCha streams derived from the scenario seed, so changing a
//! loss probability never moves a release time.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::Serialize;
use thiserror::Error;

use crate::error::ConfigError;
use crate::lse::{
    compute_strategy_params, AckDecision, LinkSnapshot, RetryOutcome, RxLsState, Side,
    StrategyParams, TxLsState, TxQueue, DEFAULT_QUEUE_CAPACITY,
};
use crate::model::{
    frame_rx_energy, frame_tx_energy, micros_to_secs, secs_to_micros, slotframes_ceil, EnergyModel,
    FrameSpec, SleepCommand, SlotframeConfig, StrategyKind, TrafficKind, TrafficSpec,
};

const TRAFFIC_STREAM: u64 = 0;
const CHANNEL_STREAM: u64 = 1;

/// Default simulated length.
pub const DEFAULT_HORIZON_SLOTFRAMES: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelSpec {
    pub data_loss_prob: f64,
    pub ack_loss_prob: f64,
    pub seed: u64,
}

impl Default for ChannelSpec {
    fn default() -> Self {
        Self {
            data_loss_prob: 0.0,
            ack_loss_prob: 0.0,
            seed: 1,
        }
    }
}

impl ChannelSpec {
    pub fn lossless(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, value) in [
            ("data_loss_prob", self.data_loss_prob),
            ("ack_loss_prob", self.ack_loss_prob),
        ] {
            if !(0.0..1.0).contains(&value) {
                return Err(ConfigError::Probability { name, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub cfg: SlotframeConfig,
    pub energy: EnergyModel,
    pub frames: FrameSpec,
    pub traffic: TrafficSpec,
    pub strategy: StrategyKind,
    pub channel: ChannelSpec,
    pub horizon_slotframes: u64,
    pub allocated_slot_offset: u32,
    pub queue_capacity: usize,
    /// When false the receiver ignores sleep commands.
    pub receiver_ls_enabled: bool,
    pub n_snz_override: Option<u16>,
    /// Release time of the first periodic packet, seconds.
    pub first_release: f64,
}

impl Scenario {
    /// Default link parameters for `strategy` carrying `traffic`.
    pub fn new(strategy: StrategyKind, traffic: TrafficSpec) -> Self {
        Self {
            cfg: SlotframeConfig::default(),
            energy: EnergyModel::default(),
            frames: FrameSpec::default(),
            traffic,
            strategy,
            channel: ChannelSpec::default(),
            horizon_slotframes: DEFAULT_HORIZON_SLOTFRAMES,
            allocated_slot_offset: 0,
            queue_capacity: DEFAULT_QUEUE_CAPACITY,
            receiver_ls_enabled: true,
            n_snz_override: None,
            first_release: 0.0,
        }
    }

    pub fn with_horizon(mut self, slotframes: u64) -> Self {
        self.horizon_slotframes = slotframes;
        self
    }

    pub fn with_channel(mut self, channel: ChannelSpec) -> Self {
        self.channel = channel;
        self
    }

    /// Slotframes excluded from the report: one traffic period.
    pub fn warmup_slotframes(&self) -> u64 {
        let period = match self.traffic.kind {
            TrafficKind::Periodic | TrafficKind::QuasiPeriodic => self.traffic.period,
            TrafficKind::Sporadic => self.traffic.period.or(self.traffic.mean_interarrival),
        };
        period.map_or(0, |p| slotframes_ceil(p, &self.cfg))
    }

    pub fn strategy_params(&self) -> Result<StrategyParams, ConfigError> {
        let params = compute_strategy_params(self.strategy, &self.traffic, &self.cfg)?;
        match self.n_snz_override {
            Some(n_snz) => params.with_snooze_override(n_snz),
            None => Ok(params),
        }
    }

    pub fn validate(&self) -> Result<StrategyParams, ConfigError> {
        self.cfg.validate()?;
        self.energy.validate()?;
        self.frames.validate()?;
        self.traffic.validate()?;
        self.channel.validate()?;
        if self.cfg.retry_limit == 0 {
            return Err(ConfigError::ZeroRetryLimit);
        }
        if self.allocated_slot_offset >= self.cfg.slots_per_slotframe {
            return Err(ConfigError::SlotOffset {
                offset: self.allocated_slot_offset,
                slots: self.cfg.slots_per_slotframe,
            });
        }
        if self.queue_capacity == 0 {
            return Err(ConfigError::ZeroQueueCapacity);
        }
        if self.first_release.is_nan() || self.first_release < 0.0 {
            return Err(ConfigError::Negative {
                name: "first_release",
                value: self.first_release,
            });
        }
        let warmup = self.warmup_slotframes();
        if self.horizon_slotframes <= warmup {
            return Err(ConfigError::HorizonTooShort {
                horizon: self.horizon_slotframes,
                warmup,
            });
        }
        self.strategy_params()
    }
}

/// Release time of the packet following one released at `previous` seconds.
pub fn next_release<R: Rng + ?Sized>(traffic: &TrafficSpec, rng: &mut R, previous: f64) -> f64 {
    micros_to_secs(next_release_us(traffic, rng, secs_to_micros(previous)))
}

fn next_release_us<R: Rng + ?Sized>(traffic: &TrafficSpec, rng: &mut R, previous_us: u64) -> u64 {
    match traffic.kind {
        TrafficKind::Periodic => previous_us + secs_to_micros(traffic.period.unwrap_or(0.0)),
        TrafficKind::QuasiPeriodic => {
            let period = traffic.period.unwrap_or(0.0);
            let j = traffic.jitter_fraction;
            let offset = if j > 0.0 {
                rng.random_range(-j..j) * period
            } else {
                0.0
            };
            // j < 1 keeps the gap positive
            previous_us + secs_to_micros((period + offset).max(0.0))
        }
        TrafficKind::Sporadic => {
            let mean = traffic.mean_interarrival.unwrap_or(1.0);
            let exp = Exp::new(1.0 / mean).expect("positive rate");
            let gap = exp.sample(rng).max(traffic.min_interarrival);
            previous_us + secs_to_micros(gap)
        }
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Release,
    DataTx,
    DataRx,
    AckTx,
    AckRx,
    AckTimeout,
    IdleListen,
    EmptyTx,
    EmptyRx,
    Drop,
    QueueOverflow,
}

/// One line of the per-slot trace. Counters are those in force when the
/// event happened (after loads, before the slot-end decrement).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEvent {
    pub slot: u64,
    pub event: EventKind,
    pub side: Side,
    pub energy_uj: f64,
    pub c_tx: u32,
    pub c_rx: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AttemptKind {
    Data,
    EmptySleep,
}

/// Everything that happened in one allocated cell, for observers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlotRecord {
    pub slotframe: u64,
    /// Counters at the start of the cell.
    pub before: LinkSnapshot,
    /// Counters after the slot-end decrements.
    pub after: LinkSnapshot,
    pub tx_enabled: bool,
    pub rx_listening: bool,
    pub attempt: Option<AttemptKind>,
    pub command: Option<SleepCommand>,
    pub data_lost: bool,
    pub ack_lost: bool,
    pub delivered: bool,
    pub acked: bool,
    pub queue_depth: usize,
    /// Serial number of the last command applied by each side.
    pub tx_command_serial: u64,
    pub rx_command_serial: u64,
    pub events: Vec<TraceEvent>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SideTotals {
    pub energy_uj: f64,
    pub power_uw: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EventCounts {
    pub packets_released: u64,
    pub data_tx_attempts: u64,
    pub data_rx: u64,
    pub duplicate_rx: u64,
    pub ack_tx: u64,
    pub ack_rx: u64,
    pub ack_timeouts: u64,
    pub idle_listens: u64,
    pub empty_tx: u64,
    pub empty_rx: u64,
    pub drops: u64,
    pub queue_overflows: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PacketLatency {
    pub packet_id: u64,
    pub release_us: u64,
    pub first_attempt_us: u64,
    pub ack_us: u64,
}

impl PacketLatency {
    pub fn access_delay(&self) -> f64 {
        micros_to_secs(self.first_attempt_us - self.release_us)
    }

    pub fn latency(&self) -> f64 {
        micros_to_secs(self.ack_us - self.release_us)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub strategy: StrategyKind,
    pub horizon_slotframes: u64,
    pub warmup_slotframes: u64,
    pub window_seconds: f64,
    pub tx: SideTotals,
    pub rx: SideTotals,
    pub counts: EventCounts,
    /// Frames put on air by the transmitter, by length in bytes.
    pub tx_frames_by_length: BTreeMap<u32, u64>,
    /// Frames decoded by the receiver, by length in bytes.
    pub rx_frames_by_length: BTreeMap<u32, u64>,
    /// Acknowledged packets released after warm-up.
    pub latencies: Vec<PacketLatency>,
    /// Access delays binned by whole slotframes.
    pub access_delay_histogram: Vec<u64>,
    pub mean_queue_depth: f64,
    pub max_queue_depth: usize,
}

impl SimReport {
    /// Energy recomputed from the event counts: `(tx, rx)` in µJ.
    pub fn energy_from_counts(&self, energy: &EnergyModel) -> (f64, f64) {
        let c = &self.counts;
        let tx = self
            .tx_frames_by_length
            .iter()
            .map(|(&len, &n)| n as f64 * frame_tx_energy(energy, len))
            .sum::<f64>()
            + (c.ack_rx + c.ack_timeouts) as f64 * energy.e_ack_rx;
        let rx = self
            .rx_frames_by_length
            .iter()
            .map(|(&len, &n)| n as f64 * frame_rx_energy(energy, len))
            .sum::<f64>()
            + c.ack_tx as f64 * energy.e_ack_tx
            + c.idle_listens as f64 * energy.e_idle_listen;
        (tx, rx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatencySummary {
    pub packets: usize,
    pub mean_access_delay: f64,
    pub max_access_delay: f64,
    pub mean_latency: f64,
    pub max_latency: f64,
}

/// Access-delay and latency statistics; transmission time inside the slot
/// is not included.
pub fn measure_latency(report: &SimReport) -> LatencySummary {
    let n = report.latencies.len();
    if n == 0 {
        return LatencySummary {
            packets: 0,
            mean_access_delay: 0.0,
            max_access_delay: 0.0,
            mean_latency: 0.0,
            max_latency: 0.0,
        };
    }
    let (mut sum_d, mut max_d, mut sum_l, mut max_l) = (0.0, 0.0f64, 0.0, 0.0f64);
    for p in &report.latencies {
        let d = p.access_delay();
        let l = p.latency();
        sum_d += d;
        sum_l += l;
        max_d = max_d.max(d);
        max_l = max_l.max(l);
    }
    LatencySummary {
        packets: n,
        mean_access_delay: sum_d / n as f64,
        max_access_delay: max_d,
        mean_latency: sum_l / n as f64,
        max_latency: max_l,
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("writing trace: {0}")]
    Io(#[from] io::Error),
}

pub fn run(scenario: &Scenario) -> Result<SimReport, ConfigError> {
    Engine::new(scenario, None)?.run()
}

/// Runs the scenario and hands every allocated cell to `observer`.
pub fn run_observed(
    scenario: &Scenario,
    observer: &mut dyn FnMut(&SlotRecord),
) -> Result<SimReport, ConfigError> {
    Engine::new(scenario, Some(observer))?.run()
}

/// Runs the scenario and writes one JSON line per trace event.
pub fn run_traced(scenario: &Scenario, out: &mut dyn Write) -> Result<SimReport, SimError> {
    let mut io_result = Ok(());
    let report = {
        let mut write_events = |rec: &SlotRecord| {
            if io_result.is_err() {
                return;
            }
            for ev in &rec.events {
                let line = serde_json::to_string(ev).expect("trace event serializes");
                if let Err(e) = writeln!(out, "{line}") {
                    io_result = Err(e);
                    return;
                }
            }
        };
        run_observed(scenario, &mut write_events)?
    };
    io_result?;
    Ok(report)
}

struct PendingPacket {
    packet_id: u64,
    release_us: u64,
    first_attempt_us: Option<u64>,
}

struct Engine<'a> {
    sc: &'a Scenario,
    params: StrategyParams,
    observer: Option<&'a mut dyn FnMut(&SlotRecord)>,
    traffic_rng: ChaCha8Rng,
    channel_rng: ChaCha8Rng,
    tx: TxLsState,
    rx: RxLsState,
    queue: TxQueue,
    pending: BTreeMap<u64, PendingPacket>,
    next_release_us: u64,
    next_packet_id: u64,
    last_delivered_id: u64,
    command_serial: u64,
    tx_command_serial: u64,
    rx_command_serial: u64,
    warmup_start_us: u64,
    report: SimReport,
    depth_sum: u64,
    events: Vec<TraceEvent>,
}

impl<'a> Engine<'a> {
    fn new(
        sc: &'a Scenario,
        observer: Option<&'a mut dyn FnMut(&SlotRecord)>,
    ) -> Result<Self, ConfigError> {
        let params = sc.validate()?;
        let mut traffic_rng = stream(sc.channel.seed, TRAFFIC_STREAM);
        let first_release_us = match sc.traffic.kind {
            TrafficKind::Periodic | TrafficKind::QuasiPeriodic => secs_to_micros(sc.first_release),
            TrafficKind::Sporadic => next_release_us(
                &sc.traffic,
                &mut traffic_rng,
                secs_to_micros(sc.first_release),
            ),
        };
        let warmup = sc.warmup_slotframes();
        Ok(Self {
            sc,
            params,
            observer,
            traffic_rng,
            channel_rng: stream(sc.channel.seed, CHANNEL_STREAM),
            tx: TxLsState::new(sc.strategy),
            rx: RxLsState::new(sc.receiver_ls_enabled),
            queue: TxQueue::with_capacity(sc.queue_capacity),
            pending: BTreeMap::new(),
            next_release_us: first_release_us,
            next_packet_id: 1,
            last_delivered_id: 0,
            command_serial: 0,
            tx_command_serial: 0,
            rx_command_serial: 0,
            warmup_start_us: warmup * sc.cfg.slotframe_micros(),
            report: SimReport {
                strategy: sc.strategy,
                horizon_slotframes: sc.horizon_slotframes,
                warmup_slotframes: warmup,
                window_seconds: micros_to_secs(
                    (sc.horizon_slotframes - warmup) * sc.cfg.slotframe_micros(),
                ),
                tx: SideTotals::default(),
                rx: SideTotals::default(),
                counts: EventCounts::default(),
                tx_frames_by_length: BTreeMap::new(),
                rx_frames_by_length: BTreeMap::new(),
                latencies: Vec::new(),
                access_delay_histogram: Vec::new(),
                mean_queue_depth: 0.0,
                max_queue_depth: 0,
            },
            depth_sum: 0,
            events: Vec::new(),
        })
    }

    fn emit(&mut self, slot: u64, event: EventKind, side: Side, energy_uj: f64) {
        if self.observer.is_some() {
            self.events.push(TraceEvent {
                slot,
                event,
                side,
                energy_uj,
                c_tx: self.tx.c_tx(),
                c_rx: self.rx.c_rx(),
            });
        }
    }

    fn charge(&mut self, counting: bool, side: Side, energy_uj: f64) {
        if counting {
            match side {
                Side::Tx => self.report.tx.energy_uj += energy_uj,
                Side::Rx => self.report.rx.energy_uj += energy_uj,
            }
        }
    }

    fn release_until(&mut self, slot: u64, slot_start_us: u64, counting: bool) {
        while self.next_release_us <= slot_start_us {
            let packet_id = self.next_packet_id;
            self.next_packet_id += 1;
            let release_us = self.next_release_us;
            if counting {
                self.report.counts.packets_released += 1;
            }
            self.emit(slot, EventKind::Release, Side::Tx, 0.0);
            match self.tx.on_transmission_request(
                &mut self.queue,
                &self.params,
                packet_id,
                release_us,
            ) {
                Ok(()) => {
                    self.pending.insert(
                        packet_id,
                        PendingPacket {
                            packet_id,
                            release_us,
                            first_attempt_us: None,
                        },
                    );
                }
                Err(_) => {
                    if counting {
                        self.report.counts.queue_overflows += 1;
                    }
                    self.emit(slot, EventKind::QueueOverflow, Side::Tx, 0.0);
                }
            }
            self.next_release_us =
                next_release_us(&self.sc.traffic, &mut self.traffic_rng, release_us);
        }
    }

    fn run(mut self) -> Result<SimReport, ConfigError> {
        let sc = self.sc;
        let sf_us = sc.cfg.slotframe_micros();
        let slot_us = sc.cfg.slot_micros();
        let energy = sc.energy;
        let oracle = sc.strategy == StrategyKind::Oracle;

        for f in 0..sc.horizon_slotframes {
            let counting = f >= self.report.warmup_slotframes;
            let slot =
                f * u64::from(sc.cfg.slots_per_slotframe) + u64::from(sc.allocated_slot_offset);
            let slot_start_us = f * sf_us + u64::from(sc.allocated_slot_offset) * slot_us;
            self.events.clear();

            self.release_until(slot, slot_start_us, counting);
            self.queue.slot_begin();

            let before = LinkSnapshot::of(&self.tx, &self.rx);
            let queue_depth = self.queue.len();
            if counting {
                self.depth_sum += queue_depth as u64;
                self.report.max_queue_depth = self.report.max_queue_depth.max(queue_depth);
            }
            let tx_enabled = self.tx.transmission_enabled();
            let selection = self.tx.select_frame(&self.queue, &self.params);
            let rx_listening = if oracle {
                selection.is_some()
            } else {
                self.rx.listening()
            };

            let mut record_flags = (false, false, false, false);
            let mut attempt = None;
            let mut command = None;

            if let Some(sel) = selection {
                // two draws per attempt keep the channel stream aligned
                let data_lost = self.channel_rng.random::<f64>() < sc.channel.data_loss_prob;
                let ack_lost = self.channel_rng.random::<f64>() < sc.channel.ack_loss_prob;
                let empty = sel.is_empty_sleep_frame();
                command = sel.command;
                attempt = Some(if empty {
                    AttemptKind::EmptySleep
                } else {
                    AttemptKind::Data
                });
                if command.is_some() {
                    self.command_serial += 1;
                }
                let len = if empty {
                    sc.frames.empty_sleep_frame_bytes
                } else {
                    sc.frames.payload_frame_bytes + sc.frames.ie_bytes(sel.command.as_ref())
                };

                let e = frame_tx_energy(&energy, len);
                self.charge(counting, Side::Tx, e);
                if counting {
                    *self.report.tx_frames_by_length.entry(len).or_default() += 1;
                    if empty {
                        self.report.counts.empty_tx += 1;
                    } else {
                        self.report.counts.data_tx_attempts += 1;
                    }
                }
                self.emit(
                    slot,
                    if empty {
                        EventKind::EmptyTx
                    } else {
                        EventKind::DataTx
                    },
                    Side::Tx,
                    e,
                );
                if !empty {
                    if let Some(p) = self.pending.get_mut(&sel.frame.packet_id) {
                        p.first_attempt_us.get_or_insert(slot_start_us);
                    }
                }

                let delivered = rx_listening && !data_lost;
                let mut acked = false;
                if delivered {
                    if command.is_some() && sc.receiver_ls_enabled {
                        self.rx_command_serial = self.command_serial;
                    }
                    let decision = self.rx.on_frame(sel.command.as_ref(), empty);
                    let e = frame_rx_energy(&energy, len);
                    self.charge(counting, Side::Rx, e);
                    if counting {
                        *self.report.rx_frames_by_length.entry(len).or_default() += 1;
                        if empty {
                            self.report.counts.empty_rx += 1;
                        } else {
                            self.report.counts.data_rx += 1;
                            if sel.frame.packet_id <= self.last_delivered_id {
                                self.report.counts.duplicate_rx += 1;
                            }
                        }
                    }
                    if !empty {
                        self.last_delivered_id = self.last_delivered_id.max(sel.frame.packet_id);
                    }
                    self.emit(
                        slot,
                        if empty {
                            EventKind::EmptyRx
                        } else {
                            EventKind::DataRx
                        },
                        Side::Rx,
                        e,
                    );
                    if decision == AckDecision::Ack {
                        self.charge(counting, Side::Rx, energy.e_ack_tx);
                        if counting {
                            self.report.counts.ack_tx += 1;
                        }
                        self.emit(slot, EventKind::AckTx, Side::Rx, energy.e_ack_tx);
                    }
                } else if rx_listening {
                    self.idle_listen(slot, counting);
                }

                if empty {
                    self.tx.on_empty_sent(&sel);
                    if command.is_some() {
                        self.tx_command_serial = self.command_serial;
                    }
                } else if delivered && !ack_lost {
                    acked = true;
                    self.charge(counting, Side::Tx, energy.e_ack_rx);
                    if counting {
                        self.report.counts.ack_rx += 1;
                    }
                    self.emit(slot, EventKind::AckRx, Side::Tx, energy.e_ack_rx);
                    let frame = self.tx.on_ack(&mut self.queue, &sel);
                    if command.is_some() {
                        self.tx_command_serial = self.command_serial;
                    }
                    self.complete_packet(frame.packet_id, slot_start_us);
                } else {
                    // the ack window is listened to whether or not an ack arrives
                    self.charge(counting, Side::Tx, energy.e_ack_rx);
                    if counting {
                        self.report.counts.ack_timeouts += 1;
                    }
                    self.emit(slot, EventKind::AckTimeout, Side::Tx, energy.e_ack_rx);
                    if let RetryOutcome::Dropped(frame) = self
                        .tx
                        .on_attempt_failed(&mut self.queue, sc.cfg.retry_limit)
                    {
                        if counting {
                            self.report.counts.drops += 1;
                        }
                        self.emit(slot, EventKind::Drop, Side::Tx, 0.0);
                        self.pending.remove(&frame.packet_id);
                    }
                }
                record_flags = (data_lost, !empty && ack_lost, delivered, acked);
            } else if rx_listening {
                self.idle_listen(slot, counting);
            }

            self.tx.slot_end();
            self.rx.slot_end();

            if let Some(observer) = self.observer.as_mut() {
                let (data_lost, ack_lost, delivered, acked) = record_flags;
                let rec = SlotRecord {
                    slotframe: f,
                    before,
                    after: LinkSnapshot::of(&self.tx, &self.rx),
                    tx_enabled,
                    rx_listening,
                    attempt,
                    command,
                    data_lost,
                    ack_lost,
                    delivered,
                    acked,
                    queue_depth,
                    tx_command_serial: self.tx_command_serial,
                    rx_command_serial: self.rx_command_serial,
                    events: std::mem::take(&mut self.events),
                };
                observer(&rec);
                self.events = rec.events;
            }
        }
        Ok(self.finish())
    }

    fn idle_listen(&mut self, slot: u64, counting: bool) {
        let e = self.sc.energy.e_idle_listen;
        self.charge(counting, Side::Rx, e);
        if counting {
            self.report.counts.idle_listens += 1;
        }
        self.emit(slot, EventKind::IdleListen, Side::Rx, e);
    }

    fn complete_packet(&mut self, packet_id: u64, ack_us: u64) {
        let Some(p) = self.pending.remove(&packet_id) else {
            return;
        };
        if p.release_us < self.warmup_start_us {
            return;
        }
        let first_attempt_us = p.first_attempt_us.unwrap_or(ack_us);
        let bin = ((first_attempt_us - p.release_us) / self.sc.cfg.slotframe_micros()) as usize;
        let hist = &mut self.report.access_delay_histogram;
        if hist.len() <= bin {
            hist.resize(bin + 1, 0);
        }
        hist[bin] += 1;
        self.report.latencies.push(PacketLatency {
            packet_id: p.packet_id,
            release_us: p.release_us,
            first_attempt_us,
            ack_us,
        });
    }

    fn finish(mut self) -> SimReport {
        let window = self.report.window_seconds;
        self.report.tx.power_uw = self.report.tx.energy_uj / window;
        self.report.rx.power_uw = self.report.rx.energy_uj / window;
        let counted = self.report.horizon_slotframes - self.report.warmup_slotframes;
        self.report.mean_queue_depth = self.depth_sum as f64 / counted as f64;
        self.report
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_release_is_exact() {
        let mut rng = stream(1, TRAFFIC_STREAM);
        let t = TrafficSpec::periodic(30.0);
        assert_eq!(next_release(&t, &mut rng, 60.0), 90.0);
    }

    #[test]
    fn zero_jitter_degenerates_to_periodic() {
        let mut rng = stream(1, TRAFFIC_STREAM);
        let t = TrafficSpec::quasi_periodic(30.0, 0.0);
        let mut prev = 0.0;
        for k in 1..100 {
            prev = next_release(&t, &mut rng, prev);
            assert_eq!(prev, 30.0 * k as f64);
        }
    }

    #[test]
    fn jittered_gaps_stay_in_band() {
        let mut rng = stream(3, TRAFFIC_STREAM);
        let t = TrafficSpec::quasi_periodic(30.0, 0.2);
        let mut prev = 0.0;
        for _ in 0..10_000 {
            let next = next_release(&t, &mut rng, prev);
            let gap = next - prev;
            assert!((24.0..=36.0).contains(&gap), "gap {gap}");
            prev = next;
        }
    }

    #[test]
    fn sporadic_gaps_respect_minimum_and_mean() {
        let mut rng = stream(7, TRAFFIC_STREAM);
        let t = TrafficSpec::sporadic(120.0, 10.0);
        let mut prev = 0.0;
        let n = 10_000;
        for _ in 0..n {
            let next = next_release(&t, &mut rng, prev);
            assert!(next - prev >= 10.0 - 1e-6);
            prev = next;
        }
        // E[max(10, Exp(mean 120))] = 10 + 120 e^{-10/120} ≈ 120.4
        let mean = prev / n as f64;
        assert!((mean - 120.4).abs() / 120.4 < 0.05, "mean {mean}");
    }

    #[test]
    fn invalid_scenarios_are_rejected() {
        let mut sc = Scenario::new(StrategyKind::ConventionalTsch, TrafficSpec::periodic(30.0));
        sc.channel.data_loss_prob = 1.0;
        assert!(matches!(run(&sc), Err(ConfigError::Probability { .. })));

        let mut sc = Scenario::new(StrategyKind::ConventionalTsch, TrafficSpec::periodic(30.0));
        sc.allocated_slot_offset = 101;
        assert!(matches!(run(&sc), Err(ConfigError::SlotOffset { .. })));

        let sc = Scenario::new(StrategyKind::ConventionalTsch, TrafficSpec::periodic(30.0))
            .with_horizon(10);
        assert!(matches!(run(&sc), Err(ConfigError::HorizonTooShort { .. })));

        let sc = Scenario::new(StrategyKind::PeriodicLs, TrafficSpec::periodic(600.0));
        assert!(matches!(
            run(&sc),
            Err(ConfigError::BasicRangeExceeded { .. })
        ));
    }

    #[test]
    fn oracle_never_idles_without_loss() {
        let sc =
            Scenario::new(StrategyKind::Oracle, TrafficSpec::periodic(30.0)).with_horizon(5_000);
        let r = run(&sc).unwrap();
        assert_eq!(r.counts.idle_listens, 0);
        assert!(r.counts.data_rx > 0);
    }

    #[test]
    fn periodic_timeline_thirty_seconds() {
        // command slotframe, then 13 suspended, then listening
        let sc =
            Scenario::new(StrategyKind::PeriodicLs, TrafficSpec::periodic(30.0)).with_horizon(40);
        let mut listening = Vec::new();
        run_observed(&sc, &mut |rec: &SlotRecord| {
            listening.push(rec.rx_listening)
        })
        .unwrap();
        assert!(listening[0]);
        assert!(listening[1..14].iter().all(|l| !l));
        assert!(listening[14]);
    }

    #[test]
    fn energy_totals_close_over_event_counts() {
        let mut sc = Scenario::new(
            StrategyKind::SlowPeriodicLs,
            TrafficSpec::quasi_periodic(600.0, 0.1),
        )
        .with_horizon(20_000);
        sc.channel = ChannelSpec {
            data_loss_prob: 0.1,
            ack_loss_prob: 0.05,
            seed: 9,
        };
        let r = run(&sc).unwrap();
        let (tx, rx) = r.energy_from_counts(&sc.energy);
        assert!((tx - r.tx.energy_uj).abs() <= 1e-9 * tx.max(1.0));
        assert!((rx - r.rx.energy_uj).abs() <= 1e-9 * rx.max(1.0));
    }

    #[test]
    fn trace_lines_are_json() {
        let sc =
            Scenario::new(StrategyKind::PeriodicLs, TrafficSpec::periodic(30.0)).with_horizon(60);
        let mut out = Vec::new();
        run_traced(&sc, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let first = text.lines().next().unwrap();
        assert_eq!(
            first,
            r#"{"slot":0,"event":"release","side":"tx","energy_uj":0.0,"c_tx":0,"c_rx":0}"#
        );
        assert!(text.lines().any(|l| l.contains(r#""event":"ack_rx""#)));
    }
}
