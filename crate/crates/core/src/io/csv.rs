//! Round-level and per-run summary CSV output.

use std::io::{self, Write};

use thiserror::Error;

use crate::engine::{RoundReport, SimulationResult};
use crate::metrics::{
    distribution_stats, lifetime_stats, overhead_stats, DistributionStats, LifetimeStats,
    Milestone, OverheadStats,
};
use crate::protocols::ProtocolKind;

pub const ROUND_CSV_HEADER: &str = "round,alive_before,alive_after,packets_delivered,packets_lost,\
data_msgs,ctrl_msgs,hypothetical_sync_msgs,energy_tx_j,energy_rx_j,energy_ctrl_j,\
residual_mean_j,residual_min_j,residual_max_j,residual_stddev_j,deaths";

pub const SUMMARY_CSV_HEADER: &str = "protocol,seed,rounds_run,\
first_death_round,first_death_censored,rounds_to_10pct_dead,pct10_censored,\
rounds_to_50pct_dead,pct50_censored,last_death_round,last_death_censored,usable_capacity,\
death_round_mean,death_round_stddev,death_round_min,death_round_max,death_round_cv,\
residual_mean_j,residual_stddev_j,residual_min_j,residual_max_j,residual_cv,\
total_ctrl_msgs,total_data_msgs,ctrl_per_node_round,ctrl_energy_fraction,\
total_hypothetical_sync_msgs";

#[derive(Debug, Error)]
#[error("{context}")]
pub struct OutputError {
    pub context: String,
    #[source]
    pub source: io::Error,
}

/// `printf("%.9g")`-style rendering: nine significant digits, trailing
/// zeros dropped, exponent form outside `[1e-4, 1e9)`.
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..9).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    } else {
        let decimals = (8 - exp) as usize;
        trim(&format!("{v:.decimals$}"))
    }
}

fn round_row(r: &RoundReport) -> String {
    let deaths = r
        .deaths
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join(";");
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.round,
        r.alive_before,
        r.alive_after,
        r.packets_delivered,
        r.packets_lost,
        r.data_msgs,
        r.ctrl_msgs,
        r.hypothetical_sync_msgs,
        format_sig9(r.energy_tx_j),
        format_sig9(r.energy_rx_j),
        format_sig9(r.energy_ctrl_j),
        format_sig9(r.residual_mean_j),
        format_sig9(r.residual_min_j),
        format_sig9(r.residual_max_j),
        format_sig9(r.residual_stddev_j),
        deaths,
    )
}

/// Header plus one `\n`-terminated row per round.
pub fn write_round_csv<W: Write>(reports: &[RoundReport], mut sink: W) -> Result<(), OutputError> {
    let wrap = |context: String| move |source| OutputError { context, source };
    writeln!(sink, "{ROUND_CSV_HEADER}").map_err(wrap("writing round CSV header".into()))?;
    for r in reports {
        writeln!(sink, "{}", round_row(r))
            .map_err(wrap(format!("writing round CSV row for round {}", r.round)))?;
    }
    sink.flush().map_err(wrap("flushing round CSV".into()))
}

/// One run condensed into the three evaluation axes.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub protocol: ProtocolKind,
    pub seed: u64,
    pub rounds_run: u64,
    pub lifetime: LifetimeStats,
    pub death_rounds: DistributionStats,
    pub final_residuals: DistributionStats,
    pub overhead: OverheadStats,
}

impl RunSummary {
    pub fn from_result(result: &SimulationResult) -> Self {
        let max_rounds = result.config.max_rounds;
        let lifetime = lifetime_stats(&result.death_rounds, max_rounds, &result.alive_series());
        // survivors enter the spread at the horizon
        let deaths: Vec<f64> = result
            .death_rounds
            .iter()
            .map(|d| d.unwrap_or(max_rounds) as f64)
            .collect();
        Self {
            protocol: result.config.protocol,
            seed: result.config.seed,
            rounds_run: result.reports.len() as u64,
            lifetime,
            death_rounds: distribution_stats(&deaths).expect("at least one node"),
            final_residuals: distribution_stats(&result.final_residuals())
                .expect("at least one node"),
            overhead: overhead_stats(&result.reports),
        }
    }
}

fn milestone_cols(m: Milestone) -> String {
    format!("{},{}", m.round, m.censored)
}

fn dist_cols(d: &DistributionStats) -> String {
    [d.mean, d.stddev, d.min, d.max, d.cv]
        .map(format_sig9)
        .join(",")
}

pub fn write_summary_csv<W: Write>(rows: &[RunSummary], mut sink: W) -> Result<(), OutputError> {
    let wrap = |context: &'static str| {
        move |source| OutputError {
            context: context.to_string(),
            source,
        }
    };
    writeln!(sink, "{SUMMARY_CSV_HEADER}").map_err(wrap("writing summary CSV header"))?;
    for s in rows {
        let l = &s.lifetime;
        let o = &s.overhead;
        writeln!(
            sink,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            s.protocol,
            s.seed,
            s.rounds_run,
            milestone_cols(l.first_death),
            milestone_cols(l.pct10_dead),
            milestone_cols(l.pct50_dead),
            milestone_cols(l.last_death),
            format_sig9(l.usable_capacity),
            dist_cols(&s.death_rounds),
            dist_cols(&s.final_residuals),
            o.total_ctrl_msgs,
            o.total_data_msgs,
            format_sig9(o.ctrl_per_node_round),
            format_sig9(o.ctrl_energy_fraction),
            o.total_hypothetical_sync_msgs,
        )
        .map_err(wrap("writing summary CSV row"))?;
    }
    sink.flush().map_err(wrap("flushing summary CSV"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::NodeId;

    fn sample_report() -> RoundReport {
        RoundReport {
            round: 3,
            alive_before: 10,
            alive_after: 8,
            packets_delivered: 9,
            packets_lost: 1,
            data_msgs: 14,
            ctrl_msgs: 2,
            hypothetical_sync_msgs: 0,
            energy_tx_j: 1.045e-4,
            energy_rx_j: 0.0,
            energy_ctrl_j: 3.2e-6,
            residual_mean_j: 0.4998995,
            residual_min_j: 0.123456789123,
            residual_max_j: 0.5,
            residual_stddev_j: 1.0 / 3.0,
            deaths: vec![NodeId(2), NodeId(7)],
        }
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(0.0), "0");
        assert_eq!(format_sig9(0.5), "0.5");
        assert_eq!(format_sig9(1.045e-4), "0.0001045");
        assert_eq!(format_sig9(3.2e-6), "3.2e-06");
        assert_eq!(format_sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(format_sig9(123456789.0), "123456789");
        assert_eq!(format_sig9(1234567890.0), "1.23456789e+09");
        assert_eq!(format_sig9(-2.5), "-2.5");
        assert_eq!(format_sig9(0.999999999999), "1");
        assert_eq!(format_sig9(f64::NAN), "nan");
    }

    #[test]
    fn zero_rounds_is_header_only() {
        let mut buf = Vec::new();
        write_round_csv(&[], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            format!("{ROUND_CSV_HEADER}\n")
        );
    }

    #[test]
    fn hand_built_row() {
        let mut buf = Vec::new();
        write_round_csv(&[sample_report()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let expected = "round,alive_before,alive_after,packets_delivered,packets_lost,data_msgs,ctrl_msgs,hypothetical_sync_msgs,energy_tx_j,energy_rx_j,energy_ctrl_j,residual_mean_j,residual_min_j,residual_max_j,residual_stddev_j,deaths\n\
3,10,8,9,1,14,2,0,0.0001045,0,3.2e-06,0.4998995,0.123456789,0.5,0.333333333,2;7\n";
        assert_eq!(text, expected);
    }

    #[test]
    fn write_failures_carry_context() {
        struct Broken;
        impl Write for Broken {
            fn write(&mut self, _: &[u8]) -> io::Result<usize> {
                Err(io::Error::other("disk full"))
            }
            fn flush(&mut self) -> io::Result<()> {
                Ok(())
            }
        }
        let err = write_round_csv(&[sample_report()], Broken).unwrap_err();
        assert_eq!(err.context, "writing round CSV header");
        assert_eq!(err.source.to_string(), "disk full");
    }
}
