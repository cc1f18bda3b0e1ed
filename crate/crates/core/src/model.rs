//! Shared domain types: slotframe timing, the per-event energy model, frame
//! sizes, sleep commands, traffic descriptions and strategy labels.
//!
//! Energies are in µJ, powers in µW, times in seconds at the API surface.
//! Internally all time arithmetic is done on integer microseconds so that
//! floors and ceilings of normalized periods are exact at period multiples.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{CommandError, ConfigError};

/// Largest sleep time a basic sleep command can carry (6-bit field).
pub const BASIC_MAX_SLEEP: u16 = 63;
/// Largest sleep time an xsleep command can carry (12-bit field).
pub const EXTENDED_MAX_SLEEP: u16 = 4095;
/// Largest snooze time an xsleep command can carry (6-bit field).
pub const EXTENDED_MAX_SNOOZE: u16 = 63;

const MICROS_PER_SECOND: f64 = 1e6;

/// Converts seconds to whole microseconds, rounding to nearest.
pub fn secs_to_micros(secs: f64) -> u64 {
    (secs * MICROS_PER_SECOND).round() as u64
}

pub fn micros_to_secs(micros: u64) -> f64 {
    micros as f64 / MICROS_PER_SECOND
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotframeConfig {
    /// Slot duration in seconds.
    pub slot_duration: f64,
    pub slots_per_slotframe: u32,
    /// Maximum number of transmission attempts per data frame.
    pub retry_limit: u32,
}

impl Default for SlotframeConfig {
    fn default() -> Self {
        Self {
            slot_duration: 0.020,
            slots_per_slotframe: 101,
            retry_limit: 15,
        }
    }
}

impl SlotframeConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.slot_duration.is_nan()
            || self.slot_duration <= 0.0
            || secs_to_micros(self.slot_duration) == 0
        {
            return Err(ConfigError::NonPositive {
                name: "slot_duration",
                value: self.slot_duration,
            });
        }
        if self.slots_per_slotframe == 0 {
            return Err(ConfigError::EmptySlotframe);
        }
        Ok(())
    }

    pub fn slot_micros(&self) -> u64 {
        secs_to_micros(self.slot_duration)
    }

    pub fn slotframe_micros(&self) -> u64 {
        self.slot_micros() * u64::from(self.slots_per_slotframe)
    }

    /// Slotframe duration `T_sf` in seconds.
    pub fn slotframe_duration(&self) -> f64 {
        micros_to_secs(self.slotframe_micros())
    }

    /// Slotframe repetition rate in 1/s.
    pub fn slotframe_rate(&self) -> f64 {
        1.0 / self.slotframe_duration()
    }
}

/// Per-event energy constants. Frame energies grow linearly with the number
/// of bytes sent on air.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyModel {
    pub e_tx0: f64,
    pub e_tx_per_byte: f64,
    pub e_rx0: f64,
    pub e_rx_per_byte: f64,
    pub e_ack_tx: f64,
    pub e_ack_rx: f64,
    pub e_idle_listen: f64,
    /// Platform drain in µW; never part of link power figures unless
    /// explicitly requested.
    pub baseline_power: f64,
}

impl Default for EnergyModel {
    fn default() -> Self {
        Self {
            e_tx0: 7.0,
            e_tx_per_byte: 2.0,
            e_rx0: 65.0,
            e_rx_per_byte: 1.3,
            e_ack_tx: 106.0,
            e_ack_rx: 79.0,
            e_idle_listen: 138.0,
            baseline_power: 31_400.0,
        }
    }
}

impl EnergyModel {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fields = [
            ("e_tx0", self.e_tx0),
            ("e_tx_per_byte", self.e_tx_per_byte),
            ("e_rx0", self.e_rx0),
            ("e_rx_per_byte", self.e_rx_per_byte),
            ("e_ack_tx", self.e_ack_tx),
            ("e_ack_rx", self.e_ack_rx),
            ("e_idle_listen", self.e_idle_listen),
            ("baseline_power", self.baseline_power),
        ];
        for (name, value) in fields {
            if !value.is_finite() || value < 0.0 {
                return Err(ConfigError::Negative { name, value });
            }
        }
        Ok(())
    }
}

/// Energy in µJ to transmit a frame of `length_bytes` bytes.
pub fn frame_tx_energy(model: &EnergyModel, length_bytes: u32) -> f64 {
    model.e_tx0 + model.e_tx_per_byte * f64::from(length_bytes)
}

/// Energy in µJ to receive a frame of `length_bytes` bytes.
pub fn frame_rx_energy(model: &EnergyModel, length_bytes: u32) -> f64 {
    model.e_rx0 + model.e_rx_per_byte * f64::from(length_bytes)
}

/// Frame sizes in bytes as sent by the physical layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameSpec {
    pub payload_frame_bytes: u32,
    pub sleep_ie_bytes: u32,
    pub xsleep_ie_bytes: u32,
    /// Total size of a frame that carries nothing but a sleep IE.
    pub empty_sleep_frame_bytes: u32,
}

impl Default for FrameSpec {
    fn default() -> Self {
        Self {
            payload_frame_bytes: 90,
            sleep_ie_bytes: 3,
            xsleep_ie_bytes: 5,
            empty_sleep_frame_bytes: 40,
        }
    }
}

impl FrameSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.xsleep_ie_bytes <= self.sleep_ie_bytes {
            return Err(ConfigError::IeSizes {
                sleep: self.sleep_ie_bytes,
                xsleep: self.xsleep_ie_bytes,
            });
        }
        Ok(())
    }

    /// Bytes added to a data frame by `command`.
    pub fn ie_bytes(&self, command: Option<&SleepCommand>) -> u32 {
        match command {
            None => 0,
            Some(SleepCommand::Basic { .. }) => self.sleep_ie_bytes,
            Some(SleepCommand::Extended { .. }) => self.xsleep_ie_bytes,
        }
    }
}

/// Decoded content of a sleep or xsleep information element.
///
/// Use [`SleepCommand::basic`] and [`SleepCommand::extended`] to build values
/// that respect the field ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SleepCommand {
    Basic { n_slp: u16 },
    Extended { n_slp: u16, n_snz: u16 },
}

impl SleepCommand {
    /// The xsleep command that reverts a link to conventional TSCH.
    pub const RESET: SleepCommand = SleepCommand::Extended { n_slp: 0, n_snz: 0 };

    pub fn basic(n_slp: u16) -> Result<Self, CommandError> {
        let cmd = SleepCommand::Basic { n_slp };
        cmd.validate()?;
        Ok(cmd)
    }

    pub fn extended(n_slp: u16, n_snz: u16) -> Result<Self, CommandError> {
        let cmd = SleepCommand::Extended { n_slp, n_snz };
        cmd.validate()?;
        Ok(cmd)
    }

    pub fn validate(&self) -> Result<(), CommandError> {
        match *self {
            SleepCommand::Basic { n_slp } => {
                if n_slp > BASIC_MAX_SLEEP {
                    return Err(CommandError::OutOfRange {
                        field: "n_slp",
                        value: n_slp,
                        max: BASIC_MAX_SLEEP,
                    });
                }
            }
            SleepCommand::Extended { n_slp, n_snz } => {
                if n_slp > EXTENDED_MAX_SLEEP {
                    return Err(CommandError::OutOfRange {
                        field: "n_slp",
                        value: n_slp,
                        max: EXTENDED_MAX_SLEEP,
                    });
                }
                if n_snz > EXTENDED_MAX_SNOOZE {
                    return Err(CommandError::OutOfRange {
                        field: "n_snz",
                        value: n_snz,
                        max: EXTENDED_MAX_SNOOZE,
                    });
                }
                if n_snz >= n_slp && !(n_slp == 0 && n_snz == 0) {
                    return Err(CommandError::SnoozeNotBelowSleep { n_slp, n_snz });
                }
            }
        }
        Ok(())
    }

    pub fn n_slp(&self) -> u16 {
        match *self {
            SleepCommand::Basic { n_slp } | SleepCommand::Extended { n_slp, .. } => n_slp,
        }
    }

    /// Snooze time; always 0 for basic commands.
    pub fn n_snz(&self) -> u16 {
        match *self {
            SleepCommand::Basic { .. } => 0,
            SleepCommand::Extended { n_snz, .. } => n_snz,
        }
    }

    /// A counter value enables the link iff it is a multiple of this: `n_snz + 1`,
    /// or `n_slp + 1` for a basic command, which never wakes early.
    pub fn snooze_modulus(&self) -> u32 {
        match *self {
            SleepCommand::Basic { n_slp } => u32::from(n_slp) + 1,
            SleepCommand::Extended { n_snz, .. } => u32::from(n_snz) + 1,
        }
    }

    pub fn is_reset(&self) -> bool {
        *self == Self::RESET
    }
}

impl fmt::Display for SleepCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SleepCommand::Basic { n_slp } => write!(f, "sleep({n_slp})"),
            SleepCommand::Extended { n_slp, n_snz } => write!(f, "xsleep({n_slp},{n_snz})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrafficKind {
    Periodic,
    QuasiPeriodic,
    Sporadic,
}

/// Packet generation pattern on the link.
///
/// `period` is the (nominal) generation period `T_c`. For sporadic traffic it
/// is optional and, when present, is the period the suspension strategies
/// plan their sleep times around.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficSpec {
    pub kind: TrafficKind,
    pub period: Option<f64>,
    pub jitter_fraction: f64,
    pub mean_interarrival: Option<f64>,
    pub min_interarrival: f64,
    pub relative_deadline: Option<f64>,
}

impl TrafficSpec {
    pub fn periodic(period: f64) -> Self {
        Self {
            kind: TrafficKind::Periodic,
            period: Some(period),
            jitter_fraction: 0.0,
            mean_interarrival: None,
            min_interarrival: 0.0,
            relative_deadline: None,
        }
    }

    pub fn quasi_periodic(period: f64, jitter_fraction: f64) -> Self {
        Self {
            kind: TrafficKind::QuasiPeriodic,
            jitter_fraction,
            ..Self::periodic(period)
        }
    }

    pub fn sporadic(mean_interarrival: f64, min_interarrival: f64) -> Self {
        Self {
            kind: TrafficKind::Sporadic,
            period: None,
            jitter_fraction: 0.0,
            mean_interarrival: Some(mean_interarrival),
            min_interarrival,
            relative_deadline: None,
        }
    }

    pub fn with_deadline(mut self, deadline: f64) -> Self {
        self.relative_deadline = Some(deadline);
        self
    }

    /// Nominal period used by suspension strategies.
    pub fn with_period(mut self, period: f64) -> Self {
        self.period = Some(period);
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(period) = self.period {
            if period.is_nan() || period <= 0.0 {
                return Err(ConfigError::NonPositive {
                    name: "period",
                    value: period,
                });
            }
        }
        if let Some(deadline) = self.relative_deadline {
            if deadline.is_nan() || deadline <= 0.0 {
                return Err(ConfigError::NonPositive {
                    name: "relative_deadline",
                    value: deadline,
                });
            }
        }
        match self.kind {
            TrafficKind::Periodic | TrafficKind::QuasiPeriodic => {
                if self.period.is_none() {
                    return Err(ConfigError::MissingField("period"));
                }
                if !(0.0..1.0).contains(&self.jitter_fraction) {
                    return Err(ConfigError::JitterOutOfRange(self.jitter_fraction));
                }
            }
            TrafficKind::Sporadic => {
                let mean = self
                    .mean_interarrival
                    .ok_or(ConfigError::MissingField("mean_interarrival"))?;
                if mean.is_nan() || mean <= 0.0 {
                    return Err(ConfigError::NonPositive {
                        name: "mean_interarrival",
                        value: mean,
                    });
                }
                if self.min_interarrival.is_nan()
                    || self.min_interarrival < 0.0
                    || self.min_interarrival > mean
                {
                    return Err(ConfigError::MinInterarrival {
                        min: self.min_interarrival,
                        mean,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Listening-suspension strategy applied to a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    /// Idealized reference: the receiver listens exactly when a frame is sent.
    Oracle,
    ConventionalTsch,
    PeriodicLs,
    SlowPeriodicLs,
    ExtendedPeriodicLs,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::Oracle,
        StrategyKind::ConventionalTsch,
        StrategyKind::PeriodicLs,
        StrategyKind::SlowPeriodicLs,
        StrategyKind::ExtendedPeriodicLs,
    ];

    /// True for the strategies that send sleep commands.
    pub fn suspends(&self) -> bool {
        matches!(
            self,
            StrategyKind::PeriodicLs
                | StrategyKind::SlowPeriodicLs
                | StrategyKind::ExtendedPeriodicLs
        )
    }

    /// Short label used in result tables.
    pub fn label(&self) -> &'static str {
        match self {
            StrategyKind::Oracle => "Oracle",
            StrategyKind::ConventionalTsch => "TSCH",
            StrategyKind::PeriodicLs => "Basic",
            StrategyKind::SlowPeriodicLs => "Basic (slow)",
            StrategyKind::ExtendedPeriodicLs => "eXtended",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// `T / T_sf`.
pub fn normalized_period(period: f64, cfg: &SlotframeConfig) -> Result<f64, ConfigError> {
    if period.is_nan() || period <= 0.0 {
        return Err(ConfigError::NonPositive {
            name: "period",
            value: period,
        });
    }
    cfg.validate()?;
    Ok(secs_to_micros(period) as f64 / cfg.slotframe_micros() as f64)
}

/// `⌊T / T_sf⌋` computed on integer microseconds.
pub fn whole_slotframes(period: f64, cfg: &SlotframeConfig) -> u64 {
    secs_to_micros(period) / cfg.slotframe_micros()
}

/// `⌈T / T_sf⌉` computed on integer microseconds.
pub fn slotframes_ceil(period: f64, cfg: &SlotframeConfig) -> u64 {
    secs_to_micros(period).div_ceil(cfg.slotframe_micros())
}
