//! Summary of one simulation run.

use std::io::Write;

use tsch_ls_core::sim::{measure_latency, run, run_traced, Scenario, SimReport};
use tsch_ls_core::{analytic_power_with, PowerFigures};

use crate::format::{secs, uw, Format, Table};
use crate::CliError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub compare: bool,
    pub include_baseline: bool,
    pub format: Format,
}

/// Analytic prediction for the scenario, if its traffic has a closed form.
pub fn prediction(sc: &Scenario) -> Option<PowerFigures> {
    analytic_power_with(
        sc.strategy,
        &sc.traffic,
        &sc.cfg,
        &sc.energy,
        &sc.frames,
        sc.n_snz_override,
    )
    .ok()
}

pub fn simulate(sc: &Scenario, trace: Option<&mut dyn Write>) -> Result<SimReport, CliError> {
    Ok(match trace {
        Some(out) => run_traced(sc, out)?,
        None => run(sc)?,
    })
}

fn relative_error(sim: f64, analytic: f64) -> String {
    format!("{:.6}", (sim - analytic).abs() / analytic)
}

pub fn render(sc: &Scenario, report: &SimReport, opts: &RunOptions) -> String {
    let baseline = if opts.include_baseline {
        sc.energy.baseline_power
    } else {
        0.0
    };
    let c = &report.counts;
    let lat = measure_latency(report);
    let mut rows: Vec<(&str, String)> = vec![
        ("strategy", report.strategy.label().to_string()),
        ("seed", sc.channel.seed.to_string()),
        ("horizon_slotframes", report.horizon_slotframes.to_string()),
        ("warmup_slotframes", report.warmup_slotframes.to_string()),
        ("window_s", secs(report.window_seconds)),
        ("p_tx_uw", uw(report.tx.power_uw + baseline)),
        ("p_rx_uw", uw(report.rx.power_uw + baseline)),
    ];
    if opts.include_baseline {
        rows.push(("baseline_uw", uw(baseline)));
    }
    rows.extend([
        ("packets_released", c.packets_released.to_string()),
        ("data_tx_attempts", c.data_tx_attempts.to_string()),
        ("data_rx", c.data_rx.to_string()),
        ("duplicate_rx", c.duplicate_rx.to_string()),
        ("ack_tx", c.ack_tx.to_string()),
        ("ack_rx", c.ack_rx.to_string()),
        ("ack_timeouts", c.ack_timeouts.to_string()),
        ("idle_listens", c.idle_listens.to_string()),
        ("empty_tx", c.empty_tx.to_string()),
        ("empty_rx", c.empty_rx.to_string()),
        ("drops", c.drops.to_string()),
        ("queue_overflows", c.queue_overflows.to_string()),
        (
            "mean_queue_depth",
            format!("{:.4}", report.mean_queue_depth),
        ),
        ("max_queue_depth", report.max_queue_depth.to_string()),
        ("packets_measured", lat.packets.to_string()),
        ("mean_access_delay_s", secs(lat.mean_access_delay)),
        ("max_access_delay_s", secs(lat.max_access_delay)),
        ("mean_latency_s", secs(lat.mean_latency)),
        ("max_latency_s", secs(lat.max_latency)),
    ]);
    if opts.compare {
        match prediction(sc) {
            Some(f) => rows.extend([
                ("p_tx_analytic_uw", uw(f.p_tx + baseline)),
                ("p_rx_analytic_uw", uw(f.p_rx + baseline)),
                ("rel_err_tx", relative_error(report.tx.power_uw, f.p_tx)),
                ("rel_err_rx", relative_error(report.rx.power_uw, f.p_rx)),
                ("t_wc_analytic_s", secs(f.t_wc)),
            ]),
            None => rows.push(("analytic", "-".to_string())),
        }
    }

    let mut table = Table::new(&["metric", "value"]);
    for (k, v) in rows {
        table.push(vec![k.to_string(), v]);
    }
    table.render(opts.format)
}
