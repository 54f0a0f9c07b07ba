//! Single-hop clustering: members send to a cluster head, heads send to the
//! base station.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    full_sync_count, ControlKind, ControlMessage, NetworkView, NextHop, ProtocolError,
    ProtocolKind, RoutingPlan, RoutingProtocol,
};
use crate::topology::{NodeId, Topology};

fn check_probability(p: f64) -> Result<(), ProtocolError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(ProtocolError::BadProbability(p))
    }
}

/// Maps every alive non-head to its nearest head (ties to the lower head id)
/// and every head to the base station. With no heads, everyone goes direct.
pub fn assign_to_nearest_head(
    topo: &Topology,
    alive: &[bool],
    heads: &BTreeSet<NodeId>,
) -> BTreeMap<NodeId, NextHop> {
    topo.node_ids()
        .filter(|n| alive[n.index()])
        .map(|n| {
            if heads.contains(&n) {
                return (n, NextHop::Base);
            }
            let mut nearest: Option<(NodeId, f64)> = None;
            for &h in heads {
                let d = topo.distance(n, h);
                if nearest.is_none_or(|(_, best)| d < best) {
                    nearest = Some((h, d));
                }
            }
            (n, nearest.map_or(NextHop::Base, |(h, _)| NextHop::Node(h)))
        })
        .collect()
}

/// Randomized head election: each alive node independently becomes a head
/// with probability `p_head` every round.
#[derive(Debug, Clone)]
pub struct RandomClustering {
    p_head: f64,
    seed: u64,
    ctrl_bits: u64,
}

impl RandomClustering {
    pub fn new(p_head: f64, seed: u64, ctrl_bits: u64) -> Result<Self, ProtocolError> {
        check_probability(p_head)?;
        Ok(Self {
            p_head,
            seed,
            ctrl_bits,
        })
    }

    /// Head draw for `node` in `round`. Each (seed, round, node) triple owns a
    /// fixed slot of the ChaCha8 keystream, so the outcome does not depend on
    /// which other nodes are alive.
    pub fn elects(&self, round: u64, node: NodeId) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        // stream 0 is used for node placement
        rng.set_stream(round.wrapping_add(1));
        rng.set_word_pos(2 * node.index() as u128);
        rng.gen::<f64>() < self.p_head
    }

    pub fn plan_for(&self, view: &NetworkView<'_>) -> RoutingPlan {
        let heads: BTreeSet<NodeId> = view
            .alive_ids()
            .filter(|&n| self.elects(view.round, n))
            .collect();
        let next_hop = assign_to_nearest_head(view.topology, view.alive, &heads);

        let mut control_msgs = Vec::new();
        for &h in &heads {
            let receivers: Vec<NodeId> = view
                .alive_ids()
                .filter(|&c| c != h && view.topology.in_range(h, c))
                .collect();
            if !receivers.is_empty() {
                control_msgs.push(ControlMessage {
                    sender: h,
                    receivers,
                    bits: self.ctrl_bits,
                    kind: ControlKind::Advertisement,
                });
            }
        }
        for (&n, hop) in &next_hop {
            if let NextHop::Node(h) = *hop {
                control_msgs.push(ControlMessage {
                    sender: n,
                    receivers: vec![h],
                    bits: self.ctrl_bits,
                    kind: ControlKind::Join,
                });
            }
        }
        RoutingPlan {
            next_hop,
            cluster_heads: heads,
            control_msgs,
            hypothetical_sync_count: 0,
        }
    }
}

impl RoutingProtocol for RandomClustering {
    fn kind(&self) -> ProtocolKind {
        ProtocolKind::RandomClustering
    }

    fn plan(&mut self, view: &NetworkView<'_>) -> RoutingPlan {
        self.plan_for(view)
    }
}

/// Clustering with global knowledge: the `k` most charged nodes lead.
#[derive(Debug, Clone)]
pub struct IdealClustering {
    p_head: f64,
}

impl IdealClustering {
    pub fn new(p_head: f64) -> Result<Self, ProtocolError> {
        check_probability(p_head)?;
        Ok(Self { p_head })
    }

    /// `max(1, round(p_head * alive))` heads by descending residual, ties to
    /// the lower id.
    pub fn choose_heads(&self, view: &NetworkView<'_>) -> BTreeSet<NodeId> {
        let alive: Vec<NodeId> = view.alive_ids().collect();
        if alive.is_empty() {
            return BTreeSet::new();
        }
        let k = ((self.p_head * alive.len() as f64).round() as usize).clamp(1, alive.len());
        let mut ranked = alive;
        ranked.sort_by(|a, b| {
            view.residual(*b)
                .total_cmp(&view.residual(*a))
                .then(a.cmp(b))
        });
        ranked.into_iter().take(k).collect()
    }
}

impl RoutingProtocol for IdealClustering {
    fn kind(&self) -> ProtocolKind {
        ProtocolKind::IdealClustering
    }

    fn plan(&mut self, view: &NetworkView<'_>) -> RoutingPlan {
        let heads = self.choose_heads(view);
        RoutingPlan {
            next_hop: assign_to_nearest_head(view.topology, view.alive, &heads),
            cluster_heads: heads,
            control_msgs: Vec::new(),
            hypothetical_sync_count: full_sync_count(view.alive_count()),
        }
    }
}
