//! Reference power/latency table for the default OpenMote B parameters.

use tsch_ls_core::{
    analytic_power, EnergyModel, FrameSpec, SlotframeConfig, StrategyKind, TrafficSpec,
};

use crate::format::{opt_int, secs, uw, Format, Table};
use crate::CliError;

use StrategyKind::{
    ConventionalTsch as Tsch, ExtendedPeriodicLs as Ext, Oracle, PeriodicLs as Basic,
    SlowPeriodicLs as Slow,
};

pub const POWER_TOLERANCE: f64 = 0.0005;
pub const TIME_TOLERANCE: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenRow {
    pub period: f64,
    pub deadline: Option<f64>,
    pub strategy: StrategyKind,
    pub n_slp: Option<u32>,
    pub n_snz: Option<u16>,
    pub t_wc: f64,
    pub p_tx: f64,
    pub p_rx: f64,
}

#[allow(clippy::too_many_arguments)]
const fn row(
    period: f64,
    deadline: Option<f64>,
    strategy: StrategyKind,
    n_slp: Option<u32>,
    n_snz: Option<u16>,
    t_wc: f64,
    p_tx: f64,
    p_rx: f64,
) -> GoldenRow {
    GoldenRow {
        period,
        deadline,
        strategy,
        n_slp,
        n_snz,
        t_wc,
        p_tx,
        p_rx,
    }
}

pub const GOLDEN: [GoldenRow; 14] = [
    row(30.0, None, Oracle, None, None, 2.02, 8.8667, 9.6000),
    row(30.0, None, Tsch, None, None, 2.02, 8.8667, 73.3168),
    row(30.0, None, Basic, Some(13), None, 28.28, 9.0667, 13.6468),
    row(120.0, None, Oracle, None, None, 2.02, 2.2167, 2.4000),
    row(120.0, None, Tsch, None, None, 2.02, 2.2167, 69.5668),
    row(120.0, None, Basic, Some(58), None, 119.18, 2.2667, 2.8993),
    row(
        120.0,
        Some(10.0),
        Ext,
        Some(58),
        Some(3),
        8.08,
        2.3000,
        19.0210,
    ),
    row(
        120.0,
        Some(30.0),
        Ext,
        Some(58),
        Some(13),
        28.28,
        2.3000,
        7.5210,
    ),
    row(600.0, None, Oracle, None, None, 2.02, 0.4433, 0.4800),
    row(600.0, None, Tsch, None, None, 2.02, 0.4433, 68.5668),
    row(600.0, None, Slow, Some(296), None, 129.28, 1.0333, 1.2733),
    row(
        600.0,
        Some(10.0),
        Ext,
        Some(296),
        Some(3),
        8.08,
        0.4600,
        17.5177,
    ),
    row(
        600.0,
        Some(30.0),
        Ext,
        Some(296),
        Some(13),
        28.28,
        0.4600,
        5.3277,
    ),
    row(
        600.0,
        Some(120.0),
        Ext,
        Some(296),
        Some(58),
        119.18,
        0.4600,
        1.6477,
    ),
];

impl GoldenRow {
    pub fn traffic(&self) -> TrafficSpec {
        let t = TrafficSpec::periodic(self.period);
        match self.deadline {
            Some(d) => t.with_deadline(d),
            None => t,
        }
    }
}

/// Evaluates every reference configuration with the default parameters.
pub fn compute() -> Result<Vec<GoldenRow>, CliError> {
    let cfg = SlotframeConfig::default();
    let energy = EnergyModel::default();
    let frames = FrameSpec::default();
    GOLDEN
        .iter()
        .map(|g| {
            let f = analytic_power(g.strategy, &g.traffic(), &cfg, &energy, &frames)?;
            Ok(GoldenRow {
                n_slp: f.n_slp,
                n_snz: f.n_snz,
                t_wc: f.t_wc,
                p_tx: f.p_tx,
                p_rx: f.p_rx,
                ..*g
            })
        })
        .collect()
}

/// Cells that differ from the reference beyond tolerance, one message each.
pub fn mismatches(rows: &[GoldenRow]) -> Vec<String> {
    let mut out = Vec::new();
    for (got, want) in rows.iter().zip(GOLDEN.iter()) {
        let label = format!(
            "{} T_c={} T_d={}",
            want.strategy.label(),
            want.period,
            want.deadline.map_or("-".to_string(), |d| d.to_string())
        );
        if got.n_slp != want.n_slp {
            out.push(format!(
                "{label}: N_slp {:?} != {:?}",
                got.n_slp, want.n_slp
            ));
        }
        if got.n_snz != want.n_snz {
            out.push(format!(
                "{label}: N_snz {:?} != {:?}",
                got.n_snz, want.n_snz
            ));
        }
        for (name, g, w, tol) in [
            ("T_wc", got.t_wc, want.t_wc, TIME_TOLERANCE),
            ("P_tx", got.p_tx, want.p_tx, POWER_TOLERANCE),
            ("P_rx", got.p_rx, want.p_rx, POWER_TOLERANCE),
        ] {
            if (g - w).abs() > tol {
                out.push(format!("{label}: {name} {g:.6} != {w}"));
            }
        }
    }
    if rows.len() != GOLDEN.len() {
        out.push(format!(
            "expected {} rows, got {}",
            GOLDEN.len(),
            rows.len()
        ));
    }
    out
}

pub fn render(rows: &[GoldenRow], format: Format) -> String {
    let mut table = Table::new(&[
        "T_c", "T_d", "strategy", "N_slp", "N_snz", "T_wc", "P_tx", "P_rx",
    ]);
    for r in rows {
        table.push(vec![
            format!("{}", r.period),
            r.deadline.map_or("-".to_string(), |d| d.to_string()),
            r.strategy.label().to_string(),
            opt_int(r.n_slp),
            opt_int(r.n_snz),
            secs(r.t_wc),
            uw(r.p_tx),
            uw(r.p_rx),
        ]);
    }
    table.render(format)
}
