use thiserror::Error;

use crate::model::StrategyKind;

/// Invalid configuration: slotframe, energy, traffic, strategy or scenario.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be a non-negative finite value, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("slotframe must contain at least one slot")]
    EmptySlotframe,
    #[error("xsleep IE ({xsleep} B) must be larger than the sleep IE ({sleep} B)")]
    IeSizes { sleep: u32, xsleep: u32 },
    #[error("missing required field `{0}`")]
    MissingField(&'static str),
    #[error("jitter fraction must lie in [0, 1), got {0}")]
    JitterOutOfRange(f64),
    #[error("minimum interarrival {min} s must lie in [0, mean = {mean} s]")]
    MinInterarrival { min: f64, mean: f64 },
    #[error("{strategy} needs a traffic period")]
    MissingPeriod { strategy: StrategyKind },
    #[error("period {period} s must exceed the slotframe duration {slotframe} s")]
    PeriodTooShort { period: f64, slotframe: f64 },
    #[error("period spans {slotframes} slotframes, more than the 4096 an xsleep command covers")]
    PeriodTooLong { slotframes: u64 },
    #[error(
        "sleep time {n_slp} exceeds the basic command range (63); use the slow periodic strategy"
    )]
    BasicRangeExceeded { n_slp: u64 },
    #[error("{strategy} needs a relative deadline")]
    MissingDeadline { strategy: StrategyKind },
    #[error("deadline {deadline} s must exceed the slotframe duration {slotframe} s")]
    DeadlineTooShort { deadline: f64, slotframe: f64 },
    #[error("snooze time {n_snz} must be below the sleep time {n_slp}")]
    SnoozeNotBelowSleep { n_slp: u64, n_snz: u64 },
    #[error("period {period} s is not a whole number of slotframes")]
    NotSlotframeMultiple { period: f64 },
    #[error("probability `{name}` must lie in [0, 1), got {value}")]
    Probability { name: &'static str, value: f64 },
    #[error("allocated slot offset {offset} is outside the slotframe of {slots} slots")]
    SlotOffset { offset: u32, slots: u32 },
    #[error("horizon of {horizon} slotframes does not exceed the warm-up of {warmup}")]
    HorizonTooShort { horizon: u64, warmup: u64 },
    #[error("queue capacity must be at least 1")]
    ZeroQueueCapacity,
    #[error("retry limit must be at least 1")]
    ZeroRetryLimit,
    #[error("analytic model needs periodic traffic, got {0:?}")]
    NotPeriodic(crate::model::TrafficKind),
}

/// A sleep command whose fields violate the IE ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum CommandError {
    #[error("{field} = {value} exceeds the maximum {max}")]
    OutOfRange {
        field: &'static str,
        value: u16,
        max: u16,
    },
    #[error("snooze time {n_snz} must be strictly below the sleep time {n_slp}")]
    SnoozeNotBelowSleep { n_slp: u16, n_snz: u16 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("truncated input: need {needed} bytes, got {got}")]
    Truncated { needed: usize, got: usize },
    #[error("not a header IE (type bit set)")]
    NotHeaderIe,
    #[error("unknown element identifier {0:#04x}")]
    UnknownElementId(u8),
    #[error("length mismatch for element {element_id:#04x}: expected {expected}, found {found}")]
    LengthMismatch {
        element_id: u8,
        expected: usize,
        found: usize,
    },
    #[error("decoded command is invalid: {0}")]
    InvalidCommand(#[from] CommandError),
}
