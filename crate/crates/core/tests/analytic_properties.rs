use proptest::prelude::*;
use tsch_ls_core::lse::wake_slotframes;
use tsch_ls_core::{
    analytic_power, analytic_power_with, EnergyModel, FrameSpec, SlotframeConfig, StrategyKind,
    TrafficSpec,
};

fn eval(strategy: StrategyKind, traffic: &TrafficSpec) -> tsch_ls_core::PowerFigures {
    analytic_power(
        strategy,
        traffic,
        &SlotframeConfig::default(),
        &EnergyModel::default(),
        &FrameSpec::default(),
    )
    .unwrap()
}

proptest! {
    #[test]
    fn oracle_bounds_every_strategy(t_c in 4.1f64..8000.0, d_frac in 0.0f64..1.0) {
        let t_d = 2.03 + d_frac * (t_c - 2.03);
        prop_assume!(t_d < t_c);
        let traffic = TrafficSpec::periodic(t_c).with_deadline(t_d);
        let oracle = eval(StrategyKind::Oracle, &traffic).p_rx;
        let tsch = eval(StrategyKind::ConventionalTsch, &traffic).p_rx;
        let slack = 1e-9 * tsch;
        let basic = if t_c < 64.0 * 2.02 { StrategyKind::PeriodicLs } else { StrategyKind::SlowPeriodicLs };
        let b = eval(basic, &traffic);
        prop_assert!(oracle <= b.p_rx + slack && b.p_rx <= tsch + slack);
        prop_assert!(b.p_rx >= b.p_rz_oracle);
        // with a zero snooze the receiver wakes every slotframe and the xsleep
        // IE is pure overhead, so the upper bound needs n_snz >= 1
        if let (true, Ok(x)) = (t_d >= 4.04, analytic_power(
            StrategyKind::ExtendedPeriodicLs,
            &traffic,
            &SlotframeConfig::default(),
            &EnergyModel::default(),
            &FrameSpec::default(),
        )) {
            prop_assert!(oracle <= x.p_rx + slack && x.p_rx <= tsch + slack);
        }
    }

    #[test]
    fn extended_power_falls_with_snooze(t_c in 5.0f64..8000.0) {
        let traffic = TrafficSpec::periodic(t_c).with_deadline(t_c / 2.0);
        let n_slp = (t_c / 2.02).floor() as u16 - 1;
        let mut last = f64::INFINITY;
        for z in 0..n_slp.min(64) {
            let f = analytic_power_with(
                StrategyKind::ExtendedPeriodicLs,
                &traffic,
                &SlotframeConfig::default(),
                &EnergyModel::default(),
                &FrameSpec::default(),
                Some(z),
            )
            .unwrap();
            prop_assert!(f.p_rx <= last + 1e-12);
            prop_assert_eq!(f.n_wup.unwrap() as usize + 1, wake_slotframes(n_slp, z).unwrap().len());
            last = f.p_rx;
        }
    }

    #[test]
    fn free_commands_at_exact_multiples_match_the_oracle(k in 2u32..64) {
        let frames = FrameSpec { sleep_ie_bytes: 0, ..FrameSpec::default() };
        let traffic = TrafficSpec::periodic(2.02 * f64::from(k));
        let f = analytic_power(
            StrategyKind::PeriodicLs,
            &traffic,
            &SlotframeConfig::default(),
            &EnergyModel::default(),
            &frames,
        )
        .unwrap();
        prop_assert!((f.p_rx - f.p_rz_oracle).abs() <= 1e-12 * f.p_rx);
    }
}

#[test]
fn zero_snooze_costs_more_than_tsch() {
    let traffic = TrafficSpec::periodic(4.1).with_deadline(2.03);
    let x = eval(StrategyKind::ExtendedPeriodicLs, &traffic);
    let tsch = eval(StrategyKind::ConventionalTsch, &traffic);
    assert_eq!(x.n_snz, Some(0));
    assert!(x.p_rx > tsch.p_rx);
}
