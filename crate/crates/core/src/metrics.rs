//! Reductions of round reports and death logs into lifetime, balance and
//! overhead summaries.

use thiserror::Error;

use crate::engine::RoundReport;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("cannot summarize an empty sample")]
    Empty,
}

/// A lifetime milestone. Censored milestones were not reached before the
/// horizon and are reported at `max_rounds`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Milestone {
    pub round: u64,
    pub censored: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifetimeStats {
    pub first_death: Milestone,
    pub pct10_dead: Milestone,
    pub pct50_dead: Milestone,
    pub last_death: Milestone,
    /// Mean fraction of the population alive over the rounds run.
    pub usable_capacity: f64,
}

/// Death milestones from per-node death rounds (`None` = survived).
///
/// The p-percent milestone is the round of the `ceil(p * N / 100)`-th death in
/// sorted order. `alive_series` holds the alive count at the start of each
/// round run.
pub fn lifetime_stats(
    death_rounds: &[Option<u64>],
    max_rounds: u64,
    alive_series: &[usize],
) -> LifetimeStats {
    let n = death_rounds.len();
    let mut sorted: Vec<u64> = death_rounds.iter().flatten().copied().collect();
    sorted.sort_unstable();

    let milestone = |pct: usize| -> Milestone {
        let k = (pct * n).div_ceil(100).max(1);
        match sorted.get(k - 1) {
            Some(&r) => Milestone {
                round: r.min(max_rounds),
                censored: false,
            },
            None => Milestone {
                round: max_rounds,
                censored: true,
            },
        }
    };

    let usable_capacity = if alive_series.is_empty() || n == 0 {
        0.0
    } else {
        alive_series
            .iter()
            .map(|&a| a as f64 / n as f64)
            .sum::<f64>()
            / alive_series.len() as f64
    };

    LifetimeStats {
        first_death: milestone(0),
        pct10_dead: milestone(10),
        pct50_dead: milestone(50),
        last_death: milestone(100),
        usable_capacity,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionStats {
    pub mean: f64,
    /// Population standard deviation (divides by N).
    pub stddev: f64,
    pub min: f64,
    pub max: f64,
    /// `stddev / mean`, or 0 when the mean is 0.
    pub cv: f64,
}

pub fn distribution_stats(values: &[f64]) -> Result<DistributionStats, MetricsError> {
    let (&first, _) = values.split_first().ok_or(MetricsError::Empty)?;
    let n = values.len() as f64;
    // shifted sums keep constant samples exact
    let mean_offset = values.iter().map(|v| v - first).sum::<f64>() / n;
    let var = values
        .iter()
        .map(|v| {
            let d = (v - first) - mean_offset;
            d * d
        })
        .sum::<f64>()
        / n;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = (first + mean_offset).clamp(min, max);
    let stddev = var.sqrt();
    let cv = if mean == 0.0 { 0.0 } else { stddev / mean };
    Ok(DistributionStats {
        mean,
        stddev,
        min,
        max,
        cv,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverheadStats {
    pub total_ctrl_msgs: u64,
    pub total_data_msgs: u64,
    /// Control messages per alive node per round.
    pub ctrl_per_node_round: f64,
    /// Share of all spent energy that went to control traffic.
    pub ctrl_energy_fraction: f64,
    pub total_hypothetical_sync_msgs: u64,
}

pub fn overhead_stats(reports: &[RoundReport]) -> OverheadStats {
    let total_ctrl_msgs = reports.iter().map(|r| r.ctrl_msgs).sum();
    let total_data_msgs = reports.iter().map(|r| r.data_msgs).sum();
    let total_hypothetical_sync_msgs = reports.iter().map(|r| r.hypothetical_sync_msgs).sum();
    let node_rounds: u64 = reports.iter().map(|r| r.alive_before as u64).sum();
    let ctrl_energy: f64 = reports.iter().map(|r| r.energy_ctrl_j).sum();
    let total_energy: f64 = reports.iter().map(RoundReport::energy_total_j).sum();
    OverheadStats {
        total_ctrl_msgs,
        total_data_msgs,
        ctrl_per_node_round: if node_rounds == 0 {
            0.0
        } else {
            total_ctrl_msgs as f64 / node_rounds as f64
        },
        ctrl_energy_fraction: if total_energy > 0.0 {
            (ctrl_energy / total_energy).clamp(0.0, 1.0)
        } else {
            0.0
        },
        total_hypothetical_sync_msgs,
    }
}

/// Median of a non-empty sample; even-length samples average the middle pair.
pub fn median(values: &[f64]) -> Result<f64, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Ok(if v.len().is_multiple_of(2) {
        (v[mid - 1] + v[mid]) / 2.0
    } else {
        v[mid]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::NodeId;
    use proptest::prelude::*;

    fn report(alive: usize, data: u64, ctrl: u64, sync: u64, tx: f64, ctrl_j: f64) -> RoundReport {
        RoundReport {
            round: 0,
            alive_before: alive,
            alive_after: alive,
            packets_delivered: alive as u64,
            packets_lost: 0,
            data_msgs: data,
            ctrl_msgs: ctrl,
            hypothetical_sync_msgs: sync,
            energy_tx_j: tx,
            energy_rx_j: 0.0,
            energy_ctrl_j: ctrl_j,
            residual_mean_j: 0.0,
            residual_min_j: 0.0,
            residual_max_j: 0.0,
            residual_stddev_j: 0.0,
            deaths: Vec::<NodeId>::new(),
        }
    }

    #[test]
    fn lifetime_direct_readout() {
        let s = lifetime_stats(&[Some(3), Some(5), Some(9)], 100, &[3, 3, 3]);
        assert_eq!(s.first_death.round, 3);
        assert_eq!(s.pct10_dead.round, 3);
        assert_eq!(s.pct50_dead.round, 5);
        assert_eq!(s.last_death.round, 9);
        assert!(!s.last_death.censored);
    }

    #[test]
    fn lifetime_all_survive_is_censored() {
        let s = lifetime_stats(&[None, None], 50, &[2; 50]);
        for m in [s.first_death, s.pct10_dead, s.pct50_dead, s.last_death] {
            assert_eq!(
                m,
                Milestone {
                    round: 50,
                    censored: true
                }
            );
        }
        assert_eq!(s.usable_capacity, 1.0);
    }

    #[test]
    fn lifetime_partial_censoring() {
        let s = lifetime_stats(&[Some(4), None, None, None], 20, &[4, 4, 4, 4, 4, 3]);
        assert_eq!(
            s.first_death,
            Milestone {
                round: 4,
                censored: false
            }
        );
        assert_eq!(s.pct10_dead.round, 4);
        assert!(s.pct50_dead.censored);
        assert!(s.last_death.censored);
        assert!((s.usable_capacity - 23.0 / 24.0).abs() < 1e-12);
    }

    #[test]
    fn lifetime_identical_deaths() {
        let deaths = [Some(10); 4];
        let s = lifetime_stats(&deaths, 100, &[4; 11]);
        assert_eq!(s.first_death.round, 10);
        assert_eq!(s.last_death.round, 10);
        let rounds: Vec<f64> = deaths.iter().map(|d| d.unwrap() as f64).collect();
        assert_eq!(distribution_stats(&rounds).unwrap().stddev, 0.0);
    }

    #[test]
    fn distribution_examples() {
        let s = distribution_stats(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!((s.mean, s.stddev), (1.0, 0.0));
        let s = distribution_stats(&[0.0, 2.0]).unwrap();
        assert_eq!((s.mean, s.stddev, s.min, s.max), (1.0, 1.0, 0.0, 2.0));
        assert_eq!(s.cv, 1.0);
        let s = distribution_stats(&[5.0]).unwrap();
        assert_eq!((s.mean, s.stddev, s.cv), (5.0, 0.0, 0.0));
        assert_eq!(distribution_stats(&[]), Err(MetricsError::Empty));
        assert_eq!(distribution_stats(&[0.0, 0.0]).unwrap().cv, 0.0);
    }

    #[test]
    fn overhead_sums() {
        let direct = [report(3, 3, 0, 0, 1.0, 0.0), report(2, 2, 0, 0, 1.0, 0.0)];
        let o = overhead_stats(&direct);
        assert_eq!((o.total_ctrl_msgs, o.total_data_msgs), (0, 5));
        assert_eq!(o.ctrl_energy_fraction, 0.0);
        assert_eq!(o.ctrl_per_node_round, 0.0);

        // R rounds at constant n alive: R * n * (n - 1)
        let ideal: Vec<RoundReport> = (0..7).map(|_| report(10, 10, 0, 90, 1.0, 0.0)).collect();
        assert_eq!(
            overhead_stats(&ideal).total_hypothetical_sync_msgs,
            7 * 10 * 9
        );

        let mixed = [report(4, 4, 2, 0, 3.0, 1.0)];
        let o = overhead_stats(&mixed);
        assert_eq!(o.ctrl_per_node_round, 0.5);
        assert_eq!(o.ctrl_energy_fraction, 0.25);
        assert_eq!(overhead_stats(&[]).ctrl_per_node_round, 0.0);
    }

    #[test]
    fn median_examples() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Ok(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Ok(2.5));
        assert_eq!(median(&[]), Err(MetricsError::Empty));
    }

    proptest! {
        #[test]
        fn lifetime_permutation_invariant(mut deaths in proptest::collection::vec(proptest::option::of(0u64..500), 1..40), seed in any::<u64>()) {
            let a = lifetime_stats(&deaths, 400, &[]);
            // deterministic shuffle
            let len = deaths.len();
            let mut s = seed;
            for i in (1..len).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                deaths.swap(i, (s >> 33) as usize % (i + 1));
            }
            let b = lifetime_stats(&deaths, 400, &[]);
            prop_assert_eq!(a, b);
            for m in [a.first_death, a.pct10_dead, a.pct50_dead, a.last_death] {
                prop_assert!(m.round <= 400);
            }
            prop_assert!(a.first_death.round <= a.pct10_dead.round);
            prop_assert!(a.pct10_dead.round <= a.pct50_dead.round);
            prop_assert!(a.pct50_dead.round <= a.last_death.round);
        }

        #[test]
        fn constant_sample_has_zero_spread(c in -1e6..1e6f64, n in 1usize..64) {
            let s = distribution_stats(&vec![c; n]).unwrap();
            prop_assert_eq!(s.stddev, 0.0);
            prop_assert_eq!(s.mean, c);
        }

        #[test]
        fn distribution_bounds(values in proptest::collection::vec(-1e3..1e3f64, 1..50)) {
            let s = distribution_stats(&values).unwrap();
            prop_assert!(s.stddev >= 0.0);
            prop_assert!(s.min <= s.mean && s.mean <= s.max);
        }

        #[test]
        fn overhead_counts_are_additive(
            a in proptest::collection::vec((1usize..50, 0u64..50, 0u64..20, 0u64..3000), 0..10),
            b in proptest::collection::vec((1usize..50, 0u64..50, 0u64..20, 0u64..3000), 0..10),
        ) {
            let mk = |v: &Vec<(usize, u64, u64, u64)>| -> Vec<RoundReport> {
                v.iter().map(|&(n, d, c, s)| report(n, d, c, s, 1e-3, 1e-5)).collect()
            };
            let (ra, rb) = (mk(&a), mk(&b));
            let joined: Vec<RoundReport> = ra.iter().chain(rb.iter()).cloned().collect();
            let (oa, ob, oj) = (overhead_stats(&ra), overhead_stats(&rb), overhead_stats(&joined));
            prop_assert_eq!(oj.total_ctrl_msgs, oa.total_ctrl_msgs + ob.total_ctrl_msgs);
            prop_assert_eq!(oj.total_data_msgs, oa.total_data_msgs + ob.total_data_msgs);
            prop_assert_eq!(oj.total_hypothetical_sync_msgs, oa.total_hypothetical_sync_msgs + ob.total_hypothetical_sync_msgs);
            prop_assert!((0.0..=1.0).contains(&oj.ctrl_energy_fraction));
        }
    }
}
