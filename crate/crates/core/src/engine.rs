//! Round loop: plan, charge control traffic, forward one packet per alive
//! node to the base station, record deaths and emit a [`RoundReport`].
//!
//! Rounds are numbered from 0. A node's death round is the index of the round
//! in which it ran out of energy, which is also the number of rounds it
//! completed.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::energy::{Battery, Category, Drain, EnergyError, RadioModel};
use crate::io::{ConfigError, SimConfig};
use crate::protocols::{
    build_protocol, NetworkView, NextHop, ProtocolError, ProtocolKind, RoutingPlan, RoutingProtocol,
};
use crate::topology::{generate_topology, NodeId, Topology, TopologyError};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("energy ledger violation: {0}")]
    Energy(#[from] EnergyError),
    #[error("round {round}: invalid routing plan: {reason}")]
    InvalidPlan { round: u64, reason: String },
    #[error("no alive nodes left to simulate")]
    NoAliveNodes,
    #[error("topology has {got} nodes but the config asks for {expected}")]
    NodeCountMismatch { expected: usize, got: usize },
}

/// Per-round ledger.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundReport {
    pub round: u64,
    pub alive_before: usize,
    pub alive_after: usize,
    pub packets_delivered: u64,
    pub packets_lost: u64,
    pub data_msgs: u64,
    pub ctrl_msgs: u64,
    pub hypothetical_sync_msgs: u64,
    pub energy_tx_j: f64,
    pub energy_rx_j: f64,
    pub energy_ctrl_j: f64,
    /// Residual statistics over every node, dead ones included.
    pub residual_mean_j: f64,
    pub residual_min_j: f64,
    pub residual_max_j: f64,
    pub residual_stddev_j: f64,
    pub deaths: Vec<NodeId>,
}

impl RoundReport {
    pub fn energy_total_j(&self) -> f64 {
        self.energy_tx_j + self.energy_rx_j + self.energy_ctrl_j
    }
}

/// What happened to one data packet originated this round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PacketFate {
    pub origin: NodeId,
    /// Transmissions the packet took part in.
    pub hops: u32,
    pub delivered: bool,
}

/// Everything observable about a single executed round.
#[derive(Debug, Clone)]
pub struct RoundOutcome {
    pub report: RoundReport,
    pub plan: RoutingPlan,
    pub packets: Vec<PacketFate>,
}

/// Final product of [`run_simulation`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub config: SimConfig,
    pub reports: Vec<RoundReport>,
    /// Round index of each node's death; `None` for survivors.
    pub death_rounds: Vec<Option<u64>>,
    pub batteries: Vec<Battery>,
}

impl SimulationResult {
    pub fn final_residuals(&self) -> Vec<f64> {
        self.batteries.iter().map(Battery::residual).collect()
    }

    pub fn total_initial(&self) -> f64 {
        self.batteries.iter().map(Battery::initial).sum()
    }

    /// `|sum initial - sum residual - sum spent| / sum initial` over all nodes.
    pub fn conservation_error(&self) -> f64 {
        let initial = self.total_initial();
        let residual: f64 = self.batteries.iter().map(Battery::residual).sum();
        let spent: f64 = self.batteries.iter().map(Battery::spent_total).sum();
        (initial - residual - spent).abs() / initial
    }

    pub fn alive_series(&self) -> Vec<usize> {
        self.reports.iter().map(|r| r.alive_before).collect()
    }
}

#[derive(Debug, Clone, Copy)]
struct Packet {
    origin: NodeId,
    hops: u32,
}

/// Energy spent in the current round, by category.
#[derive(Debug, Default)]
struct Spent {
    tx: f64,
    rx: f64,
    ctrl: f64,
}

/// A single simulation run, advanced one round at a time.
pub struct Simulation {
    config: SimConfig,
    radio: RadioModel,
    topology: Topology,
    batteries: Vec<Battery>,
    alive: Vec<bool>,
    prev_relay_counts: Vec<u32>,
    protocol: Box<dyn RoutingProtocol>,
    kind: ProtocolKind,
    round: u64,
    death_rounds: Vec<Option<u64>>,
}

impl Simulation {
    /// Validates `config` and places nodes from its seed.
    pub fn new(config: &SimConfig) -> Result<Self, SimError> {
        config.validate()?;
        let topology = generate_topology(&config.field_spec(), config.seed)?;
        Self::with_topology(config, topology)
    }

    /// Runs `config` on a hand-built layout; `node_count`, field and
    /// base-station settings come from `topology`.
    pub fn with_topology(config: &SimConfig, topology: Topology) -> Result<Self, SimError> {
        config.validate()?;
        let n = topology.node_count();
        if n != config.node_count {
            return Err(SimError::NodeCountMismatch {
                expected: config.node_count,
                got: n,
            });
        }
        let protocol = build_protocol(config.protocol, &topology, &config.protocol_params())?;
        Ok(Self {
            radio: config.radio(),
            config: config.clone(),
            batteries: vec![Battery::new(config.initial_energy_j); n],
            alive: vec![true; n],
            prev_relay_counts: vec![0; n],
            protocol,
            kind: config.protocol,
            round: 0,
            death_rounds: vec![None; n],
            topology,
        })
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn batteries(&self) -> &[Battery] {
        &self.batteries
    }

    pub fn alive(&self) -> &[bool] {
        &self.alive
    }

    pub fn alive_count(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }

    pub fn death_rounds(&self) -> &[Option<u64>] {
        &self.death_rounds
    }

    /// True once every node is dead or the round horizon is reached.
    pub fn is_finished(&self) -> bool {
        self.round >= self.config.max_rounds || self.alive_count() == 0
    }

    /// Executes one round.
    pub fn step(&mut self) -> Result<RoundOutcome, SimError> {
        let alive_before = self.alive_count();
        if alive_before == 0 {
            return Err(SimError::NoAliveNodes);
        }
        let residual_before: f64 = self.batteries.iter().map(Battery::residual).sum();
        let participants = self.alive.clone();

        let plan = {
            let view = NetworkView {
                round: self.round,
                topology: &self.topology,
                batteries: &self.batteries,
                alive: &self.alive,
                prev_relay_counts: &self.prev_relay_counts,
            };
            self.protocol.plan(&view)
        };
        self.check_plan(&plan)?;
        let order = self.forwarding_order(&plan)?;

        let mut spent = Spent::default();
        let mut deaths = Vec::new();

        // control traffic: one transmission per message, sized to reach the
        // farthest intended receiver
        let mut ctrl_msgs = 0u64;
        for msg in &plan.control_msgs {
            let sender = msg.sender;
            if !self.alive[sender.index()] {
                continue;
            }
            let reach = msg
                .receivers
                .iter()
                .map(|&r| self.topology.distance(sender, r))
                .fold(0.0, f64::max);
            let cost = self.radio.tx_cost(msg.bits, reach);
            if !self.spend(sender, cost, Category::Ctrl, &mut spent, &mut deaths)? {
                continue;
            }
            ctrl_msgs += 1;
            let rx = self.radio.rx_cost(msg.bits);
            for &r in &msg.receivers {
                if self.alive[r.index()] {
                    self.spend(r, rx, Category::Ctrl, &mut spent, &mut deaths)?;
                }
            }
        }

        // data traffic
        let n = self.topology.node_count();
        let mut held: Vec<Vec<Packet>> = vec![Vec::new(); n];
        for id in self
            .topology
            .node_ids()
            .filter(|id| participants[id.index()])
        {
            held[id.index()].push(Packet {
                origin: id,
                hops: 0,
            });
        }
        let mut relay_counts = vec![0u32; n];
        let mut fates = Vec::with_capacity(alive_before);
        let mut data_msgs = 0u64;
        let data_bits = self.radio.data_bits;

        for sender in order {
            let packets = std::mem::take(&mut held[sender.index()]);
            let lose = |p: Packet, fates: &mut Vec<PacketFate>| {
                fates.push(PacketFate {
                    origin: p.origin,
                    hops: p.hops,
                    delivered: false,
                })
            };
            if !self.alive[sender.index()] {
                packets.into_iter().for_each(|p| lose(p, &mut fates));
                continue;
            }
            let hop = plan.next_hop[&sender];
            let aggregates = self.config.aggregate
                && hop == NextHop::Base
                && plan.cluster_heads.contains(&sender);
            if aggregates {
                let cost = self
                    .radio
                    .tx_cost(data_bits, self.topology.distance_to_base(sender));
                let sent = self.spend(sender, cost, Category::Tx, &mut spent, &mut deaths)?;
                if sent {
                    data_msgs += 1;
                }
                for p in packets {
                    fates.push(PacketFate {
                        origin: p.origin,
                        hops: p.hops + u32::from(sent),
                        delivered: sent,
                    });
                }
                continue;
            }

            let reach = match hop {
                NextHop::Base => self.topology.distance_to_base(sender),
                NextHop::Node(m) => self.topology.distance(sender, m),
            };
            let cost = self.radio.tx_cost(data_bits, reach);
            for mut p in packets {
                if !self.alive[sender.index()]
                    || !self.spend(sender, cost, Category::Tx, &mut spent, &mut deaths)?
                {
                    lose(p, &mut fates);
                    continue;
                }
                data_msgs += 1;
                p.hops += 1;
                match hop {
                    NextHop::Base => fates.push(PacketFate {
                        origin: p.origin,
                        hops: p.hops,
                        delivered: true,
                    }),
                    NextHop::Node(m) => {
                        let accepted = self.alive[m.index()]
                            && self.spend(
                                m,
                                self.radio.rx_cost(data_bits),
                                Category::Rx,
                                &mut spent,
                                &mut deaths,
                            )?;
                        if accepted {
                            relay_counts[m.index()] += 1;
                            held[m.index()].push(p);
                        } else {
                            lose(p, &mut fates);
                        }
                    }
                }
            }
        }
        debug_assert!(held.iter().all(Vec::is_empty));

        self.prev_relay_counts = relay_counts;
        for &d in &deaths {
            self.death_rounds[d.index()] = Some(self.round);
        }
        deaths.sort_unstable();

        let delivered = fates.iter().filter(|f| f.delivered).count() as u64;
        let residuals: Vec<f64> = self.batteries.iter().map(Battery::residual).collect();
        let stats =
            crate::metrics::distribution_stats(&residuals).expect("topology has at least one node");
        let report = RoundReport {
            round: self.round,
            alive_before,
            alive_after: self.alive_count(),
            packets_delivered: delivered,
            packets_lost: fates.len() as u64 - delivered,
            data_msgs,
            ctrl_msgs,
            hypothetical_sync_msgs: plan.hypothetical_sync_count,
            energy_tx_j: spent.tx,
            energy_rx_j: spent.rx,
            energy_ctrl_j: spent.ctrl,
            residual_mean_j: stats.mean,
            residual_min_j: stats.min,
            residual_max_j: stats.max,
            residual_stddev_j: stats.stddev,
            deaths,
        };
        debug_assert_eq!(fates.len(), alive_before);
        debug_assert!({
            let drop = residual_before - residuals.iter().sum::<f64>();
            (drop - report.energy_total_j()).abs() <= 1e-9 * residual_before.max(1.0)
        });
        self.round += 1;
        Ok(RoundOutcome {
            report,
            plan,
            packets: fates,
        })
    }

    /// Drains `node`, books the amount and records a death if it occurs.
    /// Returns whether the action went through.
    fn spend(
        &mut self,
        node: NodeId,
        amount: f64,
        category: Category,
        spent: &mut Spent,
        deaths: &mut Vec<NodeId>,
    ) -> Result<bool, SimError> {
        let outcome = self.batteries[node.index()].drain(amount, category)?;
        if outcome.succeeded() {
            match category {
                Category::Tx => spent.tx += amount,
                Category::Rx => spent.rx += amount,
                Category::Ctrl => spent.ctrl += amount,
            }
        }
        if outcome != Drain::Spent {
            self.alive[node.index()] = false;
            deaths.push(node);
        }
        Ok(outcome.succeeded())
    }

    fn invalid(&self, reason: String) -> SimError {
        SimError::InvalidPlan {
            round: self.round,
            reason,
        }
    }

    /// Totality plus the structural rules of the active protocol family.
    fn check_plan(&self, plan: &RoutingPlan) -> Result<(), SimError> {
        let keys_match = plan.next_hop.len() == self.alive_count()
            && plan
                .next_hop
                .keys()
                .all(|n| n.index() < self.alive.len() && self.alive[n.index()]);
        if !keys_match {
            return Err(self.invalid("next-hop keys differ from the alive set".into()));
        }
        for (&n, &hop) in &plan.next_hop {
            match hop {
                NextHop::Base => {
                    if self.kind.is_clustering()
                        && !plan.cluster_heads.is_empty()
                        && !plan.cluster_heads.contains(&n)
                    {
                        return Err(self.invalid(format!("member {n} bypasses its head")));
                    }
                }
                NextHop::Node(m) => {
                    if m == n || m.index() >= self.alive.len() || !self.alive[m.index()] {
                        return Err(self.invalid(format!("{n} targets invalid relay {m}")));
                    }
                    match self.kind {
                        ProtocolKind::Direct => {
                            return Err(self.invalid(format!("direct plan relays {n} via {m}")))
                        }
                        k if k.is_diffusion() => {
                            if self.topology.distance_to_base(m)
                                >= self.topology.distance_to_base(n)
                            {
                                return Err(self.invalid(format!("{n} -> {m} makes no progress")));
                            }
                        }
                        _ => {
                            if !plan.cluster_heads.contains(&m) || plan.cluster_heads.contains(&n) {
                                return Err(self
                                    .invalid(format!("{n} -> {m} is not a member-to-head link")));
                            }
                        }
                    }
                }
            }
        }
        for msg in &plan.control_msgs {
            let bad = |id: NodeId| id.index() >= self.alive.len();
            if bad(msg.sender) || msg.receivers.iter().any(|&r| bad(r) || r == msg.sender) {
                return Err(self.invalid(format!("malformed control message from {}", msg.sender)));
            }
        }
        Ok(())
    }

    /// Topological order of the forwarding graph, farthest-from-sink first
    /// among ready nodes and lower id on ties. Fails on a cycle.
    fn forwarding_order(&self, plan: &RoutingPlan) -> Result<Vec<NodeId>, SimError> {
        #[derive(PartialEq)]
        struct Key(f64, Reverse<NodeId>);
        impl Eq for Key {}
        impl PartialOrd for Key {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }
        impl Ord for Key {
            fn cmp(&self, other: &Self) -> Ordering {
                self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
            }
        }

        let mut indegree = vec![0usize; self.alive.len()];
        for hop in plan.next_hop.values() {
            if let NextHop::Node(m) = hop {
                indegree[m.index()] += 1;
            }
        }
        let key = |n: NodeId| Key(self.topology.distance_to_base(n), Reverse(n));
        let mut ready: BinaryHeap<Key> = plan
            .next_hop
            .keys()
            .filter(|n| indegree[n.index()] == 0)
            .map(|&n| key(n))
            .collect();
        let mut order = Vec::with_capacity(plan.next_hop.len());
        while let Some(Key(_, Reverse(n))) = ready.pop() {
            order.push(n);
            if let NextHop::Node(m) = plan.next_hop[&n] {
                indegree[m.index()] -= 1;
                if indegree[m.index()] == 0 {
                    ready.push(key(m));
                }
            }
        }
        if order.len() != plan.next_hop.len() {
            return Err(self.invalid("forwarding graph contains a cycle".into()));
        }
        Ok(order)
    }

    pub fn into_result(self, reports: Vec<RoundReport>) -> SimulationResult {
        SimulationResult {
            config: self.config,
            reports,
            death_rounds: self.death_rounds,
            batteries: self.batteries,
        }
    }
}

/// Runs rounds until every node is dead or `max_rounds` rounds have run.
pub fn run_simulation(config: &SimConfig) -> Result<SimulationResult, SimError> {
    let mut sim = Simulation::new(config)?;
    let mut reports = Vec::new();
    while !sim.is_finished() {
        reports.push(sim.step()?.report);
    }
    Ok(sim.into_result(reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::Position;

    fn config(kind: ProtocolKind, nodes: usize) -> SimConfig {
        SimConfig {
            protocol: kind,
            node_count: nodes,
            ..SimConfig::default()
        }
    }

    fn hand_topology(points: &[(f64, f64)], bs: (f64, f64), radius: f64) -> Topology {
        Topology::new(
            points.iter().map(|&(x, y)| Position::new(x, y)).collect(),
            Position::new(bs.0, bs.1),
            100.0,
            100.0,
            radius,
        )
        .unwrap()
    }

    #[test]
    fn single_node_direct_closed_form() {
        // per-round cost: 2000 * 50e-9 + 100e-12 * 2000 * 150^2
        let per_round: f64 = 2000.0 * 50e-9 + 100e-12 * 2000.0 * 150.0 * 150.0;
        assert!((per_round - 4.6e-3).abs() < 1e-15);
        let expected = (0.5 / per_round).floor() as u64;
        assert_eq!(expected, 108);

        let cfg = config(ProtocolKind::Direct, 1);
        let topo = hand_topology(&[(50.0, 50.0)], (50.0, 200.0), 30.0);
        let mut sim = Simulation::with_topology(&cfg, topo).unwrap();
        let mut reports = Vec::new();
        while !sim.is_finished() {
            reports.push(sim.step().unwrap().report);
        }
        let res = sim.into_result(reports);
        assert_eq!(res.death_rounds, vec![Some(expected)]);
        assert_eq!(res.reports.len() as u64, expected + 1);
        let last = res.reports.last().unwrap();
        assert_eq!((last.packets_delivered, last.packets_lost), (0, 1));
        assert_eq!(last.energy_total_j(), 0.0);
        assert!(res.conservation_error() <= 1e-12);
    }

    #[test]
    fn two_node_chain_matches_hand_ledger() {
        // A(50,40) relays through B(50,60) to the sink at (50,200)
        let cfg = SimConfig {
            protocol: ProtocolKind::IdealDiffusion,
            node_count: 2,
            ..SimConfig::default()
        };
        let topo = hand_topology(&[(50.0, 40.0), (50.0, 60.0)], (50.0, 200.0), 30.0);
        let mut sim = Simulation::with_topology(&cfg, topo).unwrap();
        let out = sim.step().unwrap();
        assert_eq!(out.plan.next_hop[&NodeId(0)], NextHop::Node(NodeId(1)));
        assert_eq!(out.plan.next_hop[&NodeId(1)], NextHop::Base);

        let tx = |d: f64| 2000.0 * 50e-9 + 100e-12 * 2000.0 * d * d;
        let rx = 2000.0 * 50e-9;
        let a_cost = tx(20.0);
        let b_cost = rx + 2.0 * tx(140.0);
        let b = sim.batteries();
        assert!((0.5 - b[0].residual() - a_cost).abs() < 1e-15);
        assert!((0.5 - b[1].residual() - b_cost).abs() < 1e-15);
        let r = &out.report;
        assert!((r.energy_tx_j - (a_cost + 2.0 * tx(140.0))).abs() < 1e-15);
        assert!((r.energy_rx_j - rx).abs() < 1e-18);
        assert_eq!(r.energy_ctrl_j, 0.0);
        assert_eq!(
            (r.data_msgs, r.packets_delivered, r.packets_lost),
            (3, 2, 0)
        );
        assert_eq!(r.hypothetical_sync_msgs, 2);
        let hops: Vec<u32> = {
            let mut f = out.packets.clone();
            f.sort_by_key(|p| p.origin);
            f.iter().map(|p| p.hops).collect()
        };
        assert_eq!(hops, vec![2, 1]);
        assert_eq!(sim.prev_relay_counts, vec![0, 1]);
    }

    #[test]
    fn relay_death_drops_held_packets() {
        // B can afford receiving but not forwarding
        let cfg = SimConfig {
            protocol: ProtocolKind::IdealDiffusion,
            node_count: 2,
            initial_energy_j: 1.5e-3,
            ..SimConfig::default()
        };
        let topo = hand_topology(&[(50.0, 40.0), (50.0, 60.0)], (50.0, 200.0), 30.0);
        let mut sim = Simulation::with_topology(&cfg, topo).unwrap();
        let out = sim.step().unwrap();
        let r = out.report;
        assert_eq!(r.deaths, vec![NodeId(1)]);
        assert_eq!((r.packets_delivered, r.packets_lost), (0, 2));
        assert_eq!(r.alive_after, 1);
        assert_eq!(sim.death_rounds(), &[None, Some(0)]);
        assert!((sim.batteries()[1].residual() - (1.5e-3 - 1e-4)).abs() < 1e-15);
    }

    #[test]
    fn aggregation_charges_one_head_transmission() {
        let topo = hand_topology(
            &[(50.0, 60.0), (50.0, 50.0), (60.0, 60.0)],
            (50.0, 200.0),
            30.0,
        );
        let mut cfg = SimConfig {
            protocol: ProtocolKind::IdealClustering,
            node_count: 3,
            cluster_head_prob: 0.0,
            ..SimConfig::default()
        };
        // one head (node 0 wins the id tie-break), two members
        let mut sim = Simulation::with_topology(&cfg, topo.clone()).unwrap();
        let r = sim.step().unwrap().report;
        assert_eq!(r.data_msgs, 3);
        assert_eq!(r.packets_delivered, 3);
        let tx = |d: f64| 2000.0 * 50e-9 + 100e-12 * 2000.0 * d * d;
        let expected_tx = tx(10.0) + tx(10.0) + tx(140.0);
        assert!((r.energy_tx_j - expected_tx).abs() < 1e-15);
        assert!((r.energy_rx_j - 2.0 * 1e-4).abs() < 1e-18);

        cfg.aggregate = false;
        let mut sim = Simulation::with_topology(&cfg, topo).unwrap();
        let r = sim.step().unwrap().report;
        assert_eq!(r.data_msgs, 5);
        assert!((r.energy_tx_j - (expected_tx + 2.0 * tx(140.0))).abs() < 1e-15);
    }

    #[test]
    fn broadcast_charged_once_at_farthest_receiver() {
        // random clustering with every node a head: each advertises once
        let topo = hand_topology(&[(0.0, 0.0), (10.0, 0.0), (0.0, 20.0)], (50.0, 200.0), 30.0);
        let cfg = SimConfig {
            protocol: ProtocolKind::RandomClustering,
            node_count: 3,
            cluster_head_prob: 1.0,
            ..SimConfig::default()
        };
        let mut sim = Simulation::with_topology(&cfg, topo).unwrap();
        let r = sim.step().unwrap().report;
        assert_eq!(r.ctrl_msgs, 3);
        let tx = |d: f64| 64.0 * 50e-9 + 100e-12 * 64.0 * d * d;
        let rx = 64.0 * 50e-9;
        let d12 = (10f64 * 10.0 + 20.0 * 20.0).sqrt();
        let expected = tx(20.0) + tx(d12) + tx(d12) + 6.0 * rx;
        assert!((r.energy_ctrl_j - expected).abs() < 1e-18);
    }

    #[test]
    fn zero_horizon_is_empty() {
        let cfg = SimConfig {
            max_rounds: 0,
            ..config(ProtocolKind::E3d, 10)
        };
        let res = run_simulation(&cfg).unwrap();
        assert!(res.reports.is_empty());
        assert!(res.death_rounds.iter().all(Option::is_none));
    }

    #[test]
    fn replay_is_identical() {
        for kind in ProtocolKind::ALL {
            let cfg = SimConfig {
                max_rounds: 40,
                ..config(kind, 30)
            };
            assert_eq!(run_simulation(&cfg).unwrap(), run_simulation(&cfg).unwrap());
        }
    }

    #[test]
    fn step_after_extinction_is_rejected() {
        let cfg = SimConfig {
            initial_energy_j: 1e-6,
            ..config(ProtocolKind::Direct, 3)
        };
        let mut sim = Simulation::new(&cfg).unwrap();
        sim.step().unwrap();
        assert_eq!(sim.alive_count(), 0);
        assert!(sim.is_finished());
        assert!(matches!(sim.step(), Err(SimError::NoAliveNodes)));
    }

    #[test]
    fn direct_death_order_follows_distance() {
        let cfg = SimConfig {
            protocol: ProtocolKind::Direct,
            node_count: 40,
            seed: 11,
            ..SimConfig::default()
        };
        let res = run_simulation(&cfg).unwrap();
        let topo = generate_topology(&cfg.field_spec(), cfg.seed).unwrap();
        let mut by_distance: Vec<(f64, u64)> = topo
            .node_ids()
            .map(|n| {
                (
                    topo.distance_to_base(n),
                    res.death_rounds[n.index()].unwrap(),
                )
            })
            .collect();
        by_distance.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in by_distance.windows(2) {
            assert!(w[1].1 <= w[0].1, "{w:?}");
        }
    }

    #[test]
    fn mismatched_node_count_rejected() {
        let topo = hand_topology(&[(1.0, 1.0)], (50.0, 200.0), 30.0);
        assert!(matches!(
            Simulation::with_topology(&config(ProtocolKind::Direct, 2), topo),
            Err(SimError::NodeCountMismatch { .. })
        ));
    }
}
