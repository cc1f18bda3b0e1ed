//! Listening Suspension Entity: per-link sleep counters on both sides, the
//! transmit queue with per-frame sleep counters, and the strategy rules that
//! decide which command a frame carries.
//!
//! Within the cell allocated to a link the pipeline order is fixed:
//!
//! 1. [`TxQueue::slot_begin`] decrements every queued frame's `c_fr`;
//! 2. the exchange happens and counters are (re)loaded;
//! 3. [`TxLsState::slot_end`] / [`RxLsState::slot_end`] decrement `c_tx` and
//!    `c_rx`, except for a counter loaded in this same slot.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{CommandError, ConfigError};
use crate::model::{
    secs_to_micros, SleepCommand, SlotframeConfig, StrategyKind, TrafficSpec, BASIC_MAX_SLEEP,
    EXTENDED_MAX_SLEEP, EXTENDED_MAX_SNOOZE,
};

/// Longest nominal period (in slotframes) an xsleep command can cover.
pub const EXTENDED_MAX_PERIOD_SLOTFRAMES: u64 = EXTENDED_MAX_SLEEP as u64 + 1;
const SLOW_CHUNK: u32 = BASIC_MAX_SLEEP as u32 + 1;

pub const DEFAULT_QUEUE_CAPACITY: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Tx,
    Rx,
}

/// A link-side sleep counter (`C_tx` or `C_rx`) together with the snooze
/// modulus `N_snz + 1` of the command that loaded it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SleepCounter {
    value: u32,
    modulus: u32,
    set_this_slot: bool,
}

impl Default for SleepCounter {
    fn default() -> Self {
        Self {
            value: 0,
            modulus: 1,
            set_this_slot: false,
        }
    }
}

impl SleepCounter {
    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn set_this_slot(&self) -> bool {
        self.set_this_slot
    }

    /// The side is enabled iff `value mod modulus == 0`.
    pub fn enabled(&self) -> bool {
        self.value.is_multiple_of(self.modulus)
    }

    /// No suspension in progress.
    pub fn is_conventional(&self) -> bool {
        self.value == 0
    }

    pub fn load(&mut self, cmd: &SleepCommand) {
        self.value = u32::from(cmd.n_slp());
        self.modulus = if self.value == 0 {
            1
        } else {
            cmd.snooze_modulus()
        };
        self.set_this_slot = true;
    }

    pub fn slot_end(&mut self) {
        if !self.set_this_slot && self.value > 0 {
            self.value -= 1;
        }
        if self.value == 0 {
            self.modulus = 1;
        }
        self.set_this_slot = false;
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }
}

/// A data frame waiting in the transmit queue of one link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QueuedFrame {
    pub packet_id: u64,
    /// Release time in microseconds.
    pub release_us: u64,
    /// Frame sleep counter `C_fr`.
    pub c_fr: u32,
    /// Failed attempts so far.
    pub retries_used: u32,
    pub is_empty_sleep_frame: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("transmit queue full ({capacity} frames); frame dropped")]
pub struct QueueOverflow {
    pub capacity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TxQueue {
    frames: VecDeque<QueuedFrame>,
    capacity: usize,
    overflows: u64,
}

impl Default for TxQueue {
    fn default() -> Self {
        Self::with_capacity(DEFAULT_QUEUE_CAPACITY)
    }
}

impl TxQueue {
    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            frames: VecDeque::with_capacity(capacity),
            capacity,
            overflows: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn front(&self) -> Option<&QueuedFrame> {
        self.frames.front()
    }

    pub fn iter(&self) -> impl Iterator<Item = &QueuedFrame> {
        self.frames.iter()
    }

    pub fn overflows(&self) -> u64 {
        self.overflows
    }

    fn push(&mut self, frame: QueuedFrame) -> Result<(), QueueOverflow> {
        if self.frames.len() >= self.capacity {
            self.overflows += 1;
            return Err(QueueOverflow {
                capacity: self.capacity,
            });
        }
        self.frames.push_back(frame);
        Ok(())
    }

    /// Start of the allocated cell: every `c_fr` above zero drops by one.
    /// Retries use later cells, so this also covers the per-retry decrement.
    pub fn slot_begin(&mut self) {
        for frame in &mut self.frames {
            frame.c_fr = frame.c_fr.saturating_sub(1);
        }
    }

    fn pop_front(&mut self) -> Option<QueuedFrame> {
        self.frames.pop_front()
    }
}

/// Strategy parameters derived from the traffic description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StrategyParams {
    pub strategy: StrategyKind,
    /// `C_fr` loaded on a transmission request: `⌊τ_c⌋`, or 0 without LS.
    pub frame_sleep_init: u32,
    /// Nominal sleep time `⌊τ_c⌋ - 1`.
    pub n_slp: Option<u32>,
    pub n_snz: Option<u16>,
    /// Empty sleep frames sent after each data frame (slow strategy).
    pub n_emp: Option<u32>,
    /// Commands of one slow sequence, data frame first.
    pub slow_sequence: Vec<u16>,
}

impl StrategyParams {
    pub fn conventional(strategy: StrategyKind) -> Self {
        Self {
            strategy,
            frame_sleep_init: 0,
            n_slp: None,
            n_snz: None,
            n_emp: None,
            slow_sequence: Vec::new(),
        }
    }

    /// Replaces the deadline-derived snooze time of the extended strategy.
    pub fn with_snooze_override(mut self, n_snz: u16) -> Result<Self, ConfigError> {
        if self.strategy != StrategyKind::ExtendedPeriodicLs {
            return Ok(self);
        }
        let n_slp = self.n_slp.unwrap_or(0);
        if u32::from(n_snz) >= n_slp || n_snz > EXTENDED_MAX_SNOOZE {
            return Err(ConfigError::SnoozeNotBelowSleep {
                n_slp: u64::from(n_slp),
                n_snz: u64::from(n_snz),
            });
        }
        self.n_snz = Some(n_snz);
        Ok(self)
    }
}

/// Commands of a slow sequence that keeps the receiver asleep for `n_slp`
/// slotframes using 6-bit sleep times: `63` for all but the last frame, which
/// carries `n_slp mod 64`. The re-enable offset `Σ (1 + N_i)` equals
/// `n_slp + 1`, the same as a single command of `n_slp`.
pub fn slow_sequence_for(n_slp: u32) -> Vec<u16> {
    let len = (n_slp + 1).div_ceil(SLOW_CHUNK) as usize;
    let mut seq = vec![BASIC_MAX_SLEEP; len - 1];
    seq.push((n_slp % SLOW_CHUNK) as u16);
    seq
}

fn required_period(strategy: StrategyKind, traffic: &TrafficSpec) -> Result<f64, ConfigError> {
    traffic
        .period
        .ok_or(ConfigError::MissingPeriod { strategy })
}

/// Derives sleep/snooze parameters for `strategy` from the traffic period and
/// deadline.
pub fn compute_strategy_params(
    strategy: StrategyKind,
    traffic: &TrafficSpec,
    cfg: &SlotframeConfig,
) -> Result<StrategyParams, ConfigError> {
    cfg.validate()?;
    if !strategy.suspends() {
        return Ok(StrategyParams::conventional(strategy));
    }
    let period = required_period(strategy, traffic)?;
    let sf_us = cfg.slotframe_micros();
    let period_us = secs_to_micros(period);
    if period_us <= sf_us {
        return Err(ConfigError::PeriodTooShort {
            period,
            slotframe: cfg.slotframe_duration(),
        });
    }
    let whole = period_us / sf_us;
    let n_slp = whole - 1;

    let mut params = StrategyParams {
        strategy,
        frame_sleep_init: whole as u32,
        n_slp: Some(n_slp as u32),
        n_snz: None,
        n_emp: None,
        slow_sequence: Vec::new(),
    };
    match strategy {
        StrategyKind::PeriodicLs => {
            if n_slp > u64::from(BASIC_MAX_SLEEP) {
                return Err(ConfigError::BasicRangeExceeded { n_slp });
            }
        }
        StrategyKind::SlowPeriodicLs => {
            if whole > u64::from(u32::MAX / 2) {
                return Err(ConfigError::PeriodTooLong { slotframes: whole });
            }
            let seq = slow_sequence_for(n_slp as u32);
            params.n_emp = Some(seq.len() as u32 - 1);
            params.slow_sequence = seq;
        }
        StrategyKind::ExtendedPeriodicLs => {
            if whole > EXTENDED_MAX_PERIOD_SLOTFRAMES {
                return Err(ConfigError::PeriodTooLong { slotframes: whole });
            }
            let deadline = traffic
                .relative_deadline
                .ok_or(ConfigError::MissingDeadline { strategy })?;
            let deadline_us = secs_to_micros(deadline);
            if deadline_us <= sf_us {
                return Err(ConfigError::DeadlineTooShort {
                    deadline,
                    slotframe: cfg.slotframe_duration(),
                });
            }
            let n_snz = (deadline_us / sf_us - 1).min(u64::from(EXTENDED_MAX_SNOOZE));
            if n_snz >= n_slp {
                return Err(ConfigError::SnoozeNotBelowSleep { n_slp, n_snz });
            }
            params.n_snz = Some(n_snz as u16);
        }
        StrategyKind::Oracle | StrategyKind::ConventionalTsch => unreachable!(),
    }
    Ok(params)
}

/// Slotframe offsets after the command slotframe at which an xsleep-suspended
/// link is enabled: the temporary wakes in `[1, n_slp]` plus the full
/// re-enable at `n_slp + 1`.
pub fn wake_slotframes(n_slp: u16, n_snz: u16) -> Result<BTreeSet<u32>, CommandError> {
    SleepCommand::extended(n_slp, n_snz)?;
    if n_slp == 0 {
        return Err(CommandError::OutOfRange {
            field: "n_slp",
            value: 0,
            max: EXTENDED_MAX_SLEEP,
        });
    }
    let n_slp = u32::from(n_slp);
    let modulus = u32::from(n_snz) + 1;
    let mut set: BTreeSet<u32> = (1..=n_slp)
        .filter(|k| (n_slp - k + 1) % modulus == 0)
        .collect();
    set.insert(n_slp + 1);
    Ok(set)
}

/// Number of temporary wake-ups during one xsleep suspension:
/// `⌈(n_slp + 1) / (n_snz + 1)⌉ - 1`.
pub fn n_wup(n_slp: u32, n_snz: u32) -> u32 {
    (n_slp + 1).div_ceil(n_snz + 1) - 1
}

/// What the transmitter puts on air in the current cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub frame: QueuedFrame,
    pub command: Option<SleepCommand>,
    /// Remainder of a slow sequence, installed once the data frame is acked.
    pub follow_up: Vec<u16>,
}

impl Selection {
    pub fn is_empty_sleep_frame(&self) -> bool {
        self.frame.is_empty_sleep_frame
    }
}

/// Outcome of a failed data attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RetryOutcome {
    WillRetry,
    Dropped(QueuedFrame),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TxLsState {
    strategy: StrategyKind,
    counter: SleepCounter,
    slow_sequence_remaining: VecDeque<u16>,
}

impl TxLsState {
    pub fn new(strategy: StrategyKind) -> Self {
        Self {
            strategy,
            counter: SleepCounter::default(),
            slow_sequence_remaining: VecDeque::new(),
        }
    }

    pub fn strategy(&self) -> StrategyKind {
        self.strategy
    }

    pub fn counter(&self) -> &SleepCounter {
        &self.counter
    }

    pub fn c_tx(&self) -> u32 {
        self.counter.value
    }

    pub fn slow_sequence_remaining(&self) -> impl Iterator<Item = u16> + '_ {
        self.slow_sequence_remaining.iter().copied()
    }

    pub fn transmission_enabled(&self) -> bool {
        self.counter.enabled()
    }

    /// Queues a new data frame with its frame sleep counter. Any pending slow
    /// sequence is abandoned.
    pub fn on_transmission_request(
        &mut self,
        queue: &mut TxQueue,
        params: &StrategyParams,
        packet_id: u64,
        release_us: u64,
    ) -> Result<(), QueueOverflow> {
        self.slow_sequence_remaining.clear();
        queue.push(QueuedFrame {
            packet_id,
            release_us,
            c_fr: params.frame_sleep_init,
            retries_used: 0,
            is_empty_sleep_frame: false,
        })
    }

    /// Picks the frame (and command) to send in this cell, if any.
    pub fn select_frame(&self, queue: &TxQueue, params: &StrategyParams) -> Option<Selection> {
        if !self.transmission_enabled() {
            return None;
        }
        if let Some(head) = queue.front() {
            let single = queue.len() == 1 && head.c_fr > 0;
            let mut follow_up = Vec::new();
            let command = match self.strategy {
                StrategyKind::Oracle | StrategyKind::ConventionalTsch => None,
                StrategyKind::PeriodicLs => single.then(|| SleepCommand::Basic {
                    n_slp: head.c_fr.min(u32::from(BASIC_MAX_SLEEP)) as u16,
                }),
                StrategyKind::SlowPeriodicLs => single.then(|| {
                    let seq = slow_sequence_for(head.c_fr);
                    follow_up = seq[1..].to_vec();
                    SleepCommand::Basic { n_slp: seq[0] }
                }),
                StrategyKind::ExtendedPeriodicLs => {
                    if single {
                        let n_slp = head.c_fr.min(u32::from(EXTENDED_MAX_SLEEP)) as u16;
                        let n_snz = params.n_snz.unwrap_or(0).min(n_slp - 1);
                        Some(SleepCommand::Extended { n_slp, n_snz })
                    } else if !self.counter.is_conventional() {
                        Some(SleepCommand::RESET)
                    } else {
                        None
                    }
                }
            };
            return Some(Selection {
                frame: *head,
                command,
                follow_up,
            });
        }
        if self.strategy == StrategyKind::SlowPeriodicLs && self.counter.value == 0 {
            if let Some(&n_slp) = self.slow_sequence_remaining.front() {
                return Some(Selection {
                    frame: QueuedFrame {
                        packet_id: 0,
                        release_us: 0,
                        c_fr: u32::from(n_slp),
                        retries_used: 0,
                        is_empty_sleep_frame: true,
                    },
                    command: Some(SleepCommand::Basic { n_slp }),
                    follow_up: Vec::new(),
                });
            }
        }
        None
    }

    /// Ack received for the data frame at the head of the queue.
    pub fn on_ack(&mut self, queue: &mut TxQueue, sent: &Selection) -> QueuedFrame {
        debug_assert!(!sent.is_empty_sleep_frame());
        let frame = queue.pop_front().expect("ack for a frame not in the queue");
        debug_assert_eq!(frame.packet_id, sent.frame.packet_id);
        if let Some(cmd) = &sent.command {
            self.counter.load(cmd);
        }
        self.slow_sequence_remaining = sent.follow_up.iter().copied().collect();
        frame
    }

    /// Empty sleep frames are unacknowledged: the counter loads at send time.
    pub fn on_empty_sent(&mut self, sent: &Selection) {
        debug_assert!(sent.is_empty_sleep_frame());
        if let Some(cmd) = &sent.command {
            self.counter.load(cmd);
        }
        self.slow_sequence_remaining.pop_front();
    }

    /// No ack for the head frame; drops it once `retry_limit` attempts failed.
    pub fn on_attempt_failed(&mut self, queue: &mut TxQueue, retry_limit: u32) -> RetryOutcome {
        let head = queue
            .frames
            .front_mut()
            .expect("failed attempt for an empty queue");
        head.retries_used += 1;
        if head.retries_used >= retry_limit {
            RetryOutcome::Dropped(queue.pop_front().unwrap())
        } else {
            RetryOutcome::WillRetry
        }
    }

    pub fn slot_end(&mut self) {
        self.counter.slot_end();
    }

    /// Loss of synchronization: back to conventional TSCH.
    pub fn on_desync(&mut self) {
        self.counter.reset();
        self.slow_sequence_remaining.clear();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AckDecision {
    Ack,
    NoAck,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RxLsState {
    counter: SleepCounter,
    honors_commands: bool,
}

impl Default for RxLsState {
    fn default() -> Self {
        Self::new(true)
    }
}

impl RxLsState {
    /// `honors_commands = false` models a receiver that keeps listening
    /// regardless of what the transmitter requests.
    pub fn new(honors_commands: bool) -> Self {
        Self {
            counter: SleepCounter::default(),
            honors_commands,
        }
    }

    pub fn counter(&self) -> &SleepCounter {
        &self.counter
    }

    pub fn c_rx(&self) -> u32 {
        self.counter.value
    }

    pub fn listening(&self) -> bool {
        self.counter.enabled()
    }

    pub fn on_frame(
        &mut self,
        command: Option<&SleepCommand>,
        empty_sleep_frame: bool,
    ) -> AckDecision {
        if let (true, Some(cmd)) = (self.honors_commands, command) {
            self.counter.load(cmd);
        }
        if empty_sleep_frame {
            AckDecision::NoAck
        } else {
            AckDecision::Ack
        }
    }

    pub fn slot_end(&mut self) {
        self.counter.slot_end();
    }

    pub fn on_desync(&mut self) {
        self.counter.reset();
    }
}

/// Counter values on both sides of a link, for tracing and coherence checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LinkSnapshot {
    pub c_tx: u32,
    pub m_tx: u32,
    pub c_rx: u32,
    pub m_rx: u32,
}

impl LinkSnapshot {
    pub fn of(tx: &TxLsState, rx: &RxLsState) -> Self {
        Self {
            c_tx: tx.counter.value,
            m_tx: tx.counter.modulus,
            c_rx: rx.counter.value,
            m_rx: rx.counter.modulus,
        }
    }

    pub fn coherent(&self) -> bool {
        self.c_tx == self.c_rx && self.m_tx == self.m_rx
    }
}
