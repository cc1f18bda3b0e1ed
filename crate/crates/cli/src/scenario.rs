//! TOML scenario files.
//!
//! ```toml
//! schema_version = 1
//! horizon_slotframes = 100000
//!
//! [traffic]
//! kind = "periodic"
//! period_s = 120.0
//! deadline_s = 30.0
//!
//! [strategy]
//! kind = "extended_periodic_ls"
//!
//! [channel]
//! data_loss = 0.05
//! seed = 7
//! ```
//!
//! Every key except `schema_version` is optional and defaults to the OpenMote
//! B figures. Unknown keys are rejected.

use std::path::Path;

use serde::Deserialize;
use tsch_ls_core::sim::{ChannelSpec, Scenario, DEFAULT_HORIZON_SLOTFRAMES};
use tsch_ls_core::{
    EnergyModel, FrameSpec, SlotframeConfig, StrategyKind, TrafficKind, TrafficSpec,
};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub horizon_slotframes: Option<u64>,
    #[serde(default)]
    pub slotframe: SlotframeSection,
    #[serde(default)]
    pub energy: EnergySection,
    #[serde(default)]
    pub frames: FramesSection,
    pub traffic: TrafficSection,
    pub strategy: StrategySection,
    #[serde(default)]
    pub channel: ChannelSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlotframeSection {
    pub slot_ms: Option<f64>,
    pub slots: Option<u32>,
    pub retry_limit: Option<u32>,
    pub allocated_slot: Option<u32>,
    pub queue_capacity: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergySection {
    pub e_tx0: Option<f64>,
    pub e_tx_per_byte: Option<f64>,
    pub e_rx0: Option<f64>,
    pub e_rx_per_byte: Option<f64>,
    pub e_ack_tx: Option<f64>,
    pub e_ack_rx: Option<f64>,
    pub e_idle_listen: Option<f64>,
    pub baseline_power: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FramesSection {
    pub payload_frame_bytes: Option<u32>,
    pub sleep_ie_bytes: Option<u32>,
    pub xsleep_ie_bytes: Option<u32>,
    pub empty_sleep_frame_bytes: Option<u32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficSection {
    pub kind: TrafficKind,
    pub period_s: Option<f64>,
    pub deadline_s: Option<f64>,
    pub jitter: Option<f64>,
    pub mean_s: Option<f64>,
    pub min_s: Option<f64>,
    pub first_release_s: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySection {
    pub kind: StrategyKind,
    pub n_snz_override: Option<u16>,
    pub receiver_honors_commands: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub data_loss: Option<f64>,
    pub ack_loss: Option<f64>,
    pub seed: Option<u64>,
}

impl ScenarioFile {
    pub fn into_scenario(self) -> Result<Scenario, CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Schema(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let cfg_default = SlotframeConfig::default();
        let cfg = SlotframeConfig {
            slot_duration: self
                .slotframe
                .slot_ms
                .map_or(cfg_default.slot_duration, |ms| ms / 1000.0),
            slots_per_slotframe: self
                .slotframe
                .slots
                .unwrap_or(cfg_default.slots_per_slotframe),
            retry_limit: self
                .slotframe
                .retry_limit
                .unwrap_or(cfg_default.retry_limit),
        };

        let e = EnergyModel::default();
        let s = &self.energy;
        let energy = EnergyModel {
            e_tx0: s.e_tx0.unwrap_or(e.e_tx0),
            e_tx_per_byte: s.e_tx_per_byte.unwrap_or(e.e_tx_per_byte),
            e_rx0: s.e_rx0.unwrap_or(e.e_rx0),
            e_rx_per_byte: s.e_rx_per_byte.unwrap_or(e.e_rx_per_byte),
            e_ack_tx: s.e_ack_tx.unwrap_or(e.e_ack_tx),
            e_ack_rx: s.e_ack_rx.unwrap_or(e.e_ack_rx),
            e_idle_listen: s.e_idle_listen.unwrap_or(e.e_idle_listen),
            baseline_power: s.baseline_power.unwrap_or(e.baseline_power),
        };

        let f = FrameSpec::default();
        let s = &self.frames;
        let frames = FrameSpec {
            payload_frame_bytes: s.payload_frame_bytes.unwrap_or(f.payload_frame_bytes),
            sleep_ie_bytes: s.sleep_ie_bytes.unwrap_or(f.sleep_ie_bytes),
            xsleep_ie_bytes: s.xsleep_ie_bytes.unwrap_or(f.xsleep_ie_bytes),
            empty_sleep_frame_bytes: s
                .empty_sleep_frame_bytes
                .unwrap_or(f.empty_sleep_frame_bytes),
        };

        let t = &self.traffic;
        let traffic = TrafficSpec {
            kind: t.kind,
            period: t.period_s,
            jitter_fraction: t.jitter.unwrap_or(0.0),
            mean_interarrival: t.mean_s,
            min_interarrival: t.min_s.unwrap_or(0.0),
            relative_deadline: t.deadline_s,
        };

        let c = ChannelSpec::default();
        let channel = ChannelSpec {
            data_loss_prob: self.channel.data_loss.unwrap_or(c.data_loss_prob),
            ack_loss_prob: self.channel.ack_loss.unwrap_or(c.ack_loss_prob),
            seed: self.channel.seed.unwrap_or(c.seed),
        };

        let mut scenario = Scenario::new(self.strategy.kind, traffic);
        scenario.cfg = cfg;
        scenario.energy = energy;
        scenario.frames = frames;
        scenario.channel = channel;
        scenario.horizon_slotframes = self
            .horizon_slotframes
            .unwrap_or(DEFAULT_HORIZON_SLOTFRAMES);
        scenario.n_snz_override = self.strategy.n_snz_override;
        if let Some(honors) = self.strategy.receiver_honors_commands {
            scenario.receiver_ls_enabled = honors;
        }
        if let Some(slot) = self.slotframe.allocated_slot {
            scenario.allocated_slot_offset = slot;
        }
        if let Some(cap) = self.slotframe.queue_capacity {
            scenario.queue_capacity = cap;
        }
        if let Some(first) = t.first_release_s {
            scenario.first_release = first;
        }
        scenario.validate()?;
        Ok(scenario)
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
    file.into_scenario()
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text).map_err(|e| match e {
        CliError::Schema(msg) => CliError::Schema(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = 1

[traffic]
kind = "periodic"
period_s = 30.0

[strategy]
kind = "periodic_ls"
"#;

    #[test]
    fn missing_keys_take_defaults() {
        let sc = parse_scenario(MINIMAL).unwrap();
        assert_eq!(sc.cfg, SlotframeConfig::default());
        assert_eq!(sc.energy, EnergyModel::default());
        assert_eq!(sc.frames, FrameSpec::default());
        assert_eq!(sc.horizon_slotframes, DEFAULT_HORIZON_SLOTFRAMES);
        assert_eq!(sc.traffic, TrafficSpec::periodic(30.0));
    }

    #[test]
    fn unknown_key_is_named() {
        let text = MINIMAL.replace("period_s", "perod_s");
        let err = parse_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("perod_s"), "{err}");
    }

    #[test]
    fn schema_version_is_mandatory() {
        let text = MINIMAL.replace("schema_version = 1", "");
        let err = parse_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("schema_version"), "{err}");
        let text = MINIMAL.replace("schema_version = 1", "schema_version = 2");
        assert!(parse_scenario(&text).is_err());
    }

    #[test]
    fn validation_errors_surface() {
        let text = MINIMAL.replace("30.0", "600.0");
        assert!(matches!(parse_scenario(&text), Err(CliError::Config(_))));
    }
}
