//! Listening suspension for TSCH links: sleep-IE codec, per-link suspension
//! state machines, a slot-level link simulator and the closed-form power
//! model.

pub mod analytic;
pub mod error;
pub mod ie;
pub mod lse;
pub mod model;
pub mod sim;

pub use analytic::{
    analytic_power, analytic_power_with, deadline_max_nslp, oracle_gap_periodic, PowerFigures,
};
pub use error::{CommandError, ConfigError, DecodeError};
pub use ie::{decode_ie, encode, encode_sleep, encode_xsleep, EncodedIe};
pub use lse::{
    compute_strategy_params, n_wup, slow_sequence_for, wake_slotframes, LinkSnapshot, RxLsState,
    Side, StrategyParams, TxLsState, TxQueue,
};
pub use model::{
    normalized_period, EnergyModel, FrameSpec, SleepCommand, SlotframeConfig, StrategyKind,
    TrafficKind, TrafficSpec,
};
pub use sim::{measure_latency, next_release, run, ChannelSpec, Scenario, SimReport};
