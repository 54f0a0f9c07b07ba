//! Diffusion routing: every node relays through a neighbor strictly closer to
//! the base station, chosen by a score over residual energy, load and relay
//! geometry.
//!
//! [`E3d`] plans from possibly-stale neighbor tables that are refreshed only by
//! threshold-triggered status broadcasts. [`IdealDiffusion`] applies the same
//! rule with exact, globally known energies and loads.

use super::{
    full_sync_count, ControlKind, ControlMessage, DiffusionParams, NetworkView, NextHop,
    ProtocolError, ProtocolKind, RoutingPlan, RoutingProtocol, ScoreWeights,
};
use crate::topology::{NodeId, Position, Topology};

/// What a node knows about one neighbor.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborEntry {
    pub id: NodeId,
    pub position: Position,
    /// Residual carried by the neighbor's most recent status broadcast.
    pub last_known_residual: f64,
    /// Set for the single round following a busy beacon.
    pub busy: bool,
    pub last_broadcast_round: u64,
}

/// Neighbors within communication radius, ascending id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NeighborTable {
    entries: Vec<NeighborEntry>,
}

impl NeighborTable {
    pub fn new(mut entries: Vec<NeighborEntry>) -> Self {
        entries.sort_by_key(|e| e.id);
        Self { entries }
    }

    pub fn entries(&self) -> &[NeighborEntry] {
        &self.entries
    }

    pub fn get(&self, id: NodeId) -> Option<&NeighborEntry> {
        self.entries
            .binary_search_by_key(&id, |e| e.id)
            .ok()
            .map(|i| &self.entries[i])
    }

    fn get_mut(&mut self, id: NodeId) -> Option<&mut NeighborEntry> {
        self.entries
            .binary_search_by_key(&id, |e| e.id)
            .ok()
            .map(move |i| &mut self.entries[i])
    }
}

/// `ceil(10 * residual / initial)`: 10 at full charge, dropping by one each
/// time the residual falls through a tenth of the initial energy.
pub fn decile_level(residual: f64, initial: f64) -> u32 {
    ((residual / initial) * 10.0).ceil().clamp(0.0, 10.0) as u32
}

/// Relay score of candidate `c` for sender `n`; lower is better.
///
/// `load_term` is in `[0, 1]`: the busy flag for e3D, the clamped relay
/// fraction for the ideal variant.
pub fn relay_score(
    n: NodeId,
    c: NodeId,
    residual: f64,
    load_term: f64,
    topo: &Topology,
    weights: &ScoreWeights,
    initial_energy: f64,
) -> f64 {
    let d_nb = topo.distance_to_base(n);
    let d_nc = topo.distance(n, c);
    let d_cb = topo.distance_to_base(c);
    let geometry = (d_nc * d_nc + d_cb * d_cb) / (d_nb * d_nb);
    weights.energy * (1.0 - residual / initial_energy)
        + weights.load * load_term
        + weights.distance * geometry
}

/// e3D score of a neighbor-table entry as seen by `n`.
pub fn e3d_score(
    n: NodeId,
    c: &NeighborEntry,
    topo: &Topology,
    weights: &ScoreWeights,
    initial_energy: f64,
) -> f64 {
    let busy = if c.busy { 1.0 } else { 0.0 };
    relay_score(
        n,
        c.id,
        c.last_known_residual,
        busy,
        topo,
        weights,
        initial_energy,
    )
}

/// Score of transmitting straight to the base station: no battery to drain,
/// no load, and a geometry ratio of exactly one.
pub fn base_score(weights: &ScoreWeights) -> f64 {
    weights.distance
}

/// Lowest-scoring candidate, ties to the lower id; the base station wins
/// unless some relay scores strictly below `base`.
pub fn select_next_hop(scored: impl IntoIterator<Item = (NodeId, f64)>, base: f64) -> NextHop {
    let mut best: Option<(NodeId, f64)> = None;
    for (id, s) in scored {
        match best {
            Some((bid, bs)) if s > bs || (s == bs && id > bid) => {}
            _ => best = Some((id, s)),
        }
    }
    match best {
        Some((id, s)) if s < base => NextHop::Node(id),
        _ => NextHop::Base,
    }
}

/// Realistic diffusion with local, event-refreshed knowledge.
#[derive(Debug, Clone)]
pub struct E3d {
    params: DiffusionParams,
    weights: ScoreWeights,
    tables: Vec<NeighborTable>,
    // decile level each node last advertised
    announced: Vec<u32>,
}

impl E3d {
    /// Seeds every table from the topology with the initial energy.
    pub fn new(topology: &Topology, params: DiffusionParams) -> Result<Self, ProtocolError> {
        if params.load_max == 0 {
            return Err(ProtocolError::BadLoadMax);
        }
        let weights = params.weights.normalized()?;
        let tables = topology
            .node_ids()
            .map(|n| {
                NeighborTable::new(
                    topology
                        .neighbors(n)
                        .into_iter()
                        .map(|c| NeighborEntry {
                            id: c,
                            position: topology.position(c),
                            last_known_residual: params.initial_energy,
                            busy: false,
                            last_broadcast_round: 0,
                        })
                        .collect(),
                )
            })
            .collect();
        Ok(Self {
            params,
            weights,
            tables,
            announced: vec![10; topology.node_count()],
        })
    }

    pub fn table(&self, n: NodeId) -> &NeighborTable {
        &self.tables[n.index()]
    }

    /// Emits this round's status broadcasts and applies them to receivers'
    /// tables. A node broadcasts when its residual has fallen through a decile
    /// boundary since it last advertised, or when it relayed at least
    /// `load_max` packets last round (busy beacon).
    fn exchange_status(&mut self, view: &NetworkView<'_>) -> Vec<ControlMessage> {
        for table in &mut self.tables {
            for e in &mut table.entries {
                e.busy = false;
            }
        }
        let mut msgs = Vec::new();
        for n in view.alive_ids() {
            let residual = view.residual(n);
            let level = decile_level(residual, self.params.initial_energy);
            let busy = view.prev_relay_counts[n.index()] >= self.params.load_max;
            if level >= self.announced[n.index()] && !busy {
                continue;
            }
            let receivers: Vec<NodeId> = self.tables[n.index()]
                .entries
                .iter()
                .map(|e| e.id)
                .filter(|c| view.alive[c.index()])
                .collect();
            if receivers.is_empty() {
                continue;
            }
            for r in &receivers {
                let entry = self.tables[r.index()]
                    .get_mut(n)
                    .expect("neighbor relation is symmetric");
                entry.last_known_residual = residual;
                entry.busy = busy;
                entry.last_broadcast_round = view.round;
            }
            self.announced[n.index()] = level;
            msgs.push(ControlMessage {
                sender: n,
                receivers,
                bits: self.params.ctrl_bits,
                kind: ControlKind::Status,
            });
        }
        msgs
    }

    fn route(&self, view: &NetworkView<'_>) -> RoutingPlan {
        let base = base_score(&self.weights);
        let next_hop = view
            .alive_ids()
            .map(|n| {
                let table = &self.tables[n.index()];
                let scored = view
                    .topology
                    .candidate_next_hops(n, view.alive)
                    .into_iter()
                    .map(|c| {
                        let entry = table.get(c).expect("candidates are within radius");
                        let s = e3d_score(
                            n,
                            entry,
                            view.topology,
                            &self.weights,
                            self.params.initial_energy,
                        );
                        (c, s)
                    });
                (n, select_next_hop(scored, base))
            })
            .collect();
        RoutingPlan {
            next_hop,
            ..RoutingPlan::default()
        }
    }
}

impl RoutingProtocol for E3d {
    fn kind(&self) -> ProtocolKind {
        ProtocolKind::E3d
    }

    fn plan(&mut self, view: &NetworkView<'_>) -> RoutingPlan {
        let control_msgs = self.exchange_status(view);
        RoutingPlan {
            control_msgs,
            ..self.route(view)
        }
    }
}

/// Diffusion with exact global knowledge of energies and loads.
#[derive(Debug, Clone)]
pub struct IdealDiffusion {
    params: DiffusionParams,
    weights: ScoreWeights,
}

impl IdealDiffusion {
    pub fn new(params: DiffusionParams) -> Result<Self, ProtocolError> {
        if params.load_max == 0 {
            return Err(ProtocolError::BadLoadMax);
        }
        Ok(Self {
            weights: params.weights.normalized()?,
            params,
        })
    }
}

impl RoutingProtocol for IdealDiffusion {
    fn kind(&self) -> ProtocolKind {
        ProtocolKind::IdealDiffusion
    }

    fn plan(&mut self, view: &NetworkView<'_>) -> RoutingPlan {
        let base = base_score(&self.weights);
        let load_max = f64::from(self.params.load_max);
        let next_hop = view
            .alive_ids()
            .map(|n| {
                let scored = view
                    .topology
                    .candidate_next_hops(n, view.alive)
                    .into_iter()
                    .map(|c| {
                        let load =
                            (f64::from(view.prev_relay_counts[c.index()]) / load_max).min(1.0);
                        let s = relay_score(
                            n,
                            c,
                            view.residual(c),
                            load,
                            view.topology,
                            &self.weights,
                            self.params.initial_energy,
                        );
                        (c, s)
                    });
                (n, select_next_hop(scored, base))
            })
            .collect();
        RoutingPlan {
            next_hop,
            hypothetical_sync_count: full_sync_count(view.alive_count()),
            ..RoutingPlan::default()
        }
    }
}
