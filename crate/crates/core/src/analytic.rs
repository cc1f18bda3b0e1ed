//! Closed-form per-side power and worst-case latency of each strategy on an
//! error-free link carrying a periodic stream.
//!
//! With `Λ_sf = 1/T_sf`, `Λ_c = 1/T_c`, `F = ⌊τ_c⌋` and the data-frame
//! energies `E_txd`, `E_rxd`:
//!
//! | strategy | transmitter | receiver |
//! |----------|-------------|----------|
//! | Oracle   | `(E_txd + E_rx^a) Λ_c` | `(E_rxd + E_tx^a) Λ_c` |
//! | TSCH     | as Oracle | Oracle `+ E_il (Λ_sf − Λ_c)` |
//! | Basic    | TSCH `+ L_slp e_txB Λ_c` | Oracle `+ L_slp e_rxB Λ_c + E_il (Λ_sf − F Λ_c)` |
//! | slow     | Basic `+ E_tx^e n_emp Λ_c` | Basic `+ E_rx^e n_emp Λ_c` |
//! | xsleep   | TSCH `+ L_xslp e_txB Λ_c` | Oracle `+ L_xslp e_rxB Λ_c + E_il (Λ_sf − (F − n_wup) Λ_c)` |

use serde::Serialize;

use crate::error::ConfigError;
use crate::lse::{compute_strategy_params, n_wup};
use crate::model::{
    frame_rx_energy, frame_tx_energy, secs_to_micros, EnergyModel, FrameSpec, SlotframeConfig,
    StrategyKind, TrafficKind, TrafficSpec,
};

/// Upper bound on the slow strategy's worst-case latency, in slotframes.
pub const SLOW_LATENCY_BOUND_SLOTFRAMES: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFigures {
    pub strategy: StrategyKind,
    /// Transmitter power, µW.
    pub p_tx: f64,
    /// Receiver power, µW.
    pub p_rx: f64,
    /// Oracle receiver power for the same stream, µW.
    pub p_rz_oracle: f64,
    /// Worst-case transmission latency, s.
    pub t_wc: f64,
    pub n_slp: Option<u32>,
    pub n_snz: Option<u16>,
    pub n_emp: Option<u32>,
    pub n_wup: Option<u32>,
}

pub fn analytic_power(
    strategy: StrategyKind,
    traffic: &TrafficSpec,
    cfg: &SlotframeConfig,
    energy: &EnergyModel,
    frames: &FrameSpec,
) -> Result<PowerFigures, ConfigError> {
    analytic_power_with(strategy, traffic, cfg, energy, frames, None)
}

/// As [`analytic_power`], optionally forcing the xsleep snooze time.
pub fn analytic_power_with(
    strategy: StrategyKind,
    traffic: &TrafficSpec,
    cfg: &SlotframeConfig,
    energy: &EnergyModel,
    frames: &FrameSpec,
    n_snz_override: Option<u16>,
) -> Result<PowerFigures, ConfigError> {
    cfg.validate()?;
    energy.validate()?;
    frames.validate()?;
    traffic.validate()?;
    if traffic.kind == TrafficKind::Sporadic {
        return Err(ConfigError::NotPeriodic(traffic.kind));
    }
    let period = traffic
        .period
        .ok_or(ConfigError::MissingPeriod { strategy })?;
    let sf_us = cfg.slotframe_micros();
    let period_us = secs_to_micros(period);
    if period_us <= sf_us {
        return Err(ConfigError::PeriodTooShort {
            period,
            slotframe: cfg.slotframe_duration(),
        });
    }
    let mut params = compute_strategy_params(strategy, traffic, cfg)?;
    if let Some(n_snz) = n_snz_override {
        params = params.with_snooze_override(n_snz)?;
    }

    let t_sf = cfg.slotframe_duration();
    let lambda_sf = 1.0 / t_sf;
    let lambda_c = 1.0 / period;
    let whole = (period_us / sf_us) as f64;

    let e_txd = frame_tx_energy(energy, frames.payload_frame_bytes);
    let e_rxd = frame_rx_energy(energy, frames.payload_frame_bytes);
    let e_txe = frame_tx_energy(energy, frames.empty_sleep_frame_bytes);
    let e_rxe = frame_rx_energy(energy, frames.empty_sleep_frame_bytes);
    let l_slp = f64::from(frames.sleep_ie_bytes);
    let l_xslp = f64::from(frames.xsleep_ie_bytes);

    let p_tx_tsch = (e_txd + energy.e_ack_rx) * lambda_c;
    let p_rz = (e_rxd + energy.e_ack_tx) * lambda_c;
    let basic_tx = p_tx_tsch + l_slp * energy.e_tx_per_byte * lambda_c;
    let basic_rx = p_rz
        + l_slp * energy.e_rx_per_byte * lambda_c
        + energy.e_idle_listen * (lambda_sf - whole * lambda_c);

    let mut figures = PowerFigures {
        strategy,
        p_tx: p_tx_tsch,
        p_rx: p_rz,
        p_rz_oracle: p_rz,
        t_wc: t_sf,
        n_slp: params.n_slp,
        n_snz: params.n_snz,
        n_emp: params.n_emp,
        n_wup: None,
    };
    match strategy {
        StrategyKind::Oracle => {}
        StrategyKind::ConventionalTsch => {
            figures.p_rx = p_rz + energy.e_idle_listen * (lambda_sf - lambda_c);
        }
        StrategyKind::PeriodicLs => {
            figures.p_tx = basic_tx;
            figures.p_rx = basic_rx;
            figures.t_wc = whole * t_sf;
        }
        StrategyKind::SlowPeriodicLs => {
            let n_emp = f64::from(params.n_emp.unwrap_or(0));
            figures.p_tx = basic_tx + e_txe * n_emp * lambda_c;
            figures.p_rx = basic_rx + e_rxe * n_emp * lambda_c;
            figures.t_wc = f64::from(SLOW_LATENCY_BOUND_SLOTFRAMES) * t_sf;
        }
        StrategyKind::ExtendedPeriodicLs => {
            let n_slp = params.n_slp.unwrap_or(0);
            let n_snz = params.n_snz.unwrap_or(0);
            let wakes = n_wup(n_slp, u32::from(n_snz));
            figures.n_wup = Some(wakes);
            figures.p_tx = p_tx_tsch + l_xslp * energy.e_tx_per_byte * lambda_c;
            figures.p_rx = p_rz
                + l_xslp * energy.e_rx_per_byte * lambda_c
                + energy.e_idle_listen * (lambda_sf - (whole - f64::from(wakes)) * lambda_c);
            figures.t_wc = f64::from(n_snz + 1) * t_sf;
        }
    }
    Ok(figures)
}

/// Total excess power of the basic periodic strategy over the oracle when the
/// period is a whole number of slotframes: `L_slp (e_txB + e_rxB) Λ_c`.
pub fn oracle_gap_periodic(
    traffic: &TrafficSpec,
    cfg: &SlotframeConfig,
    energy: &EnergyModel,
    frames: &FrameSpec,
) -> Result<f64, ConfigError> {
    cfg.validate()?;
    let period = traffic.period.ok_or(ConfigError::MissingField("period"))?;
    let period_us = secs_to_micros(period);
    if period_us == 0 {
        return Err(ConfigError::NonPositive {
            name: "period",
            value: period,
        });
    }
    if !period_us.is_multiple_of(cfg.slotframe_micros()) {
        return Err(ConfigError::NotSlotframeMultiple { period });
    }
    Ok(f64::from(frames.sleep_ie_bytes) * (energy.e_tx_per_byte + energy.e_rx_per_byte) / period)
}

/// Largest sleep time that still meets `deadline` on an error-free link:
/// `⌊τ_d⌋ − 1`.
pub fn deadline_max_nslp(deadline: f64, cfg: &SlotframeConfig) -> Result<u32, ConfigError> {
    cfg.validate()?;
    let deadline_us = secs_to_micros(deadline);
    let sf_us = cfg.slotframe_micros();
    if deadline_us <= sf_us {
        return Err(ConfigError::DeadlineTooShort {
            deadline,
            slotframe: cfg.slotframe_duration(),
        });
    }
    Ok((deadline_us / sf_us - 1) as u32)
}
