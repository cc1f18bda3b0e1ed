//! One-parameter sweeps over a base scenario, simulated in parallel.

use clap::ValueEnum;
use rayon::prelude::*;
use tsch_ls_core::sim::Scenario;

use crate::format::{opt_int, uw, Format, Table};
use crate::report::{prediction, simulate};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum SweepParam {
    PeriodS,
    DeadlineS,
    DataLoss,
    NSnzOverride,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::PeriodS => "period_s",
            SweepParam::DeadlineS => "deadline_s",
            SweepParam::DataLoss => "data_loss",
            SweepParam::NSnzOverride => "n_snz_override",
        }
    }

    fn apply(&self, base: &Scenario, value: f64) -> Result<Scenario, CliError> {
        let mut sc = base.clone();
        match self {
            SweepParam::PeriodS => sc.traffic.period = Some(value),
            SweepParam::DeadlineS => sc.traffic.relative_deadline = Some(value),
            SweepParam::DataLoss => sc.channel.data_loss_prob = value,
            SweepParam::NSnzOverride => {
                if value.fract() != 0.0 || !(0.0..=f64::from(u16::MAX)).contains(&value) {
                    return Err(CliError::BadValue(format!(
                        "n_snz_override must be an integer, got {value}"
                    )));
                }
                sc.n_snz_override = Some(value as u16);
            }
        }
        sc.validate()?;
        Ok(sc)
    }
}

/// Parses a comma-separated list; blanks are skipped.
pub fn parse_values(list: &str) -> Result<Vec<f64>, CliError> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::BadValue(format!("not a number: {s:?}")))
        })
        .collect()
}

pub fn sweep(
    base: &Scenario,
    param: SweepParam,
    values: &[f64],
    format: Format,
) -> Result<String, CliError> {
    let scenarios = values
        .iter()
        .map(|&v| param.apply(base, v))
        .collect::<Result<Vec<_>, _>>()?;
    let results = scenarios
        .par_iter()
        .map(|sc| simulate(sc, None).map(|r| (prediction(sc), r)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut table = Table::new(&[
        param.name(),
        "strategy",
        "N_slp",
        "N_snz",
        "P_tx_analytic",
        "P_rx_analytic",
        "P_tx_sim",
        "P_rx_sim",
        "idle_listens",
        "drops",
    ]);
    for ((value, sc), (analytic, report)) in values.iter().zip(&scenarios).zip(&results) {
        let params = sc.strategy_params()?;
        table.push(vec![
            value.to_string(),
            sc.strategy.label().to_string(),
            opt_int(params.n_slp),
            opt_int(params.n_snz),
            analytic.map_or("-".to_string(), |f| uw(f.p_tx)),
            analytic.map_or("-".to_string(), |f| uw(f.p_rx)),
            uw(report.tx.power_uw),
            uw(report.rx.power_uw),
            report.counts.idle_listens.to_string(),
            report.counts.drops.to_string(),
        ]);
    }
    Ok(table.render(format))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tsch_ls_core::{StrategyKind, TrafficSpec};

    fn base() -> Scenario {
        Scenario::new(
            StrategyKind::ExtendedPeriodicLs,
            TrafficSpec::periodic(600.0).with_deadline(30.0),
        )
        .with_horizon(2_000)
    }

    #[test]
    fn empty_value_list_gives_header_only() {
        let out = sweep(
            &base(),
            SweepParam::DeadlineS,
            &parse_values("").unwrap(),
            Format::Csv,
        )
        .unwrap();
        assert_eq!(out.lines().count(), 1);
        assert!(out.starts_with("deadline_s,strategy,"));
    }

    #[test]
    fn deadline_sweep_keeps_input_order() {
        let values = parse_values("120, 10,30").unwrap();
        let out = sweep(&base(), SweepParam::DeadlineS, &values, Format::Csv).unwrap();
        let rows: Vec<&str> = out.lines().skip(1).collect();
        assert!(rows[0].starts_with("120,eXtended,296,58,0.4600,1.6477,"));
        assert!(rows[1].starts_with("10,eXtended,296,3,0.4600,17.5177,"));
        assert!(rows[2].starts_with("30,eXtended,296,13,0.4600,5.3277,"));
    }

    #[test]
    fn bad_values_are_rejected() {
        assert!(parse_values("1,x").is_err());
        assert!(sweep(&base(), SweepParam::NSnzOverride, &[2.5], Format::Csv).is_err());
        assert!(sweep(&base(), SweepParam::DataLoss, &[1.5], Format::Csv).is_err());
    }
}
