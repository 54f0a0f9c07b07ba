//! Routing policies behind a single planning interface.
//!
//! Every round the engine hands the active protocol a read-only
//! [`NetworkView`] of the state committed at the end of the previous round and
//! receives a [`RoutingPlan`]: one next hop per alive node, the cluster-head
//! set for clustering schemes, and the control traffic to charge.

mod clustering;
mod diffusion;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::energy::Battery;
use crate::topology::{NodeId, Topology};

pub use clustering::{assign_to_nearest_head, IdealClustering, RandomClustering};
pub use diffusion::{
    base_score, decile_level, e3d_score, relay_score, select_next_hop, E3d, IdealDiffusion,
    NeighborEntry, NeighborTable,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProtocolKind {
    Direct,
    E3d,
    IdealDiffusion,
    RandomClustering,
    IdealClustering,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 5] = [
        ProtocolKind::Direct,
        ProtocolKind::E3d,
        ProtocolKind::IdealDiffusion,
        ProtocolKind::RandomClustering,
        ProtocolKind::IdealClustering,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolKind::Direct => "direct",
            ProtocolKind::E3d => "e3d",
            ProtocolKind::IdealDiffusion => "ideal_diffusion",
            ProtocolKind::RandomClustering => "random_clustering",
            ProtocolKind::IdealClustering => "ideal_clustering",
        }
    }

    pub fn is_diffusion(self) -> bool {
        matches!(self, ProtocolKind::E3d | ProtocolKind::IdealDiffusion)
    }

    pub fn is_clustering(self) -> bool {
        matches!(
            self,
            ProtocolKind::RandomClustering | ProtocolKind::IdealClustering
        )
    }

    /// Comma-separated list of accepted names, for error messages.
    pub fn accepted_names() -> String {
        Self::ALL.map(Self::as_str).join(", ")
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown protocol `{0}`")]
pub struct UnknownProtocol(pub String);

impl FromStr for ProtocolKind {
    type Err = UnknownProtocol;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| UnknownProtocol(s.to_string()))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ProtocolError {
    #[error("cluster head probability must lie in [0, 1] (got {0})")]
    BadProbability(f64),
    #[error("score weights must be non-negative with a positive sum")]
    BadWeights,
    #[error("load_max must be at least 1")]
    BadLoadMax,
}

/// Where a node sends its packets this round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NextHop {
    Base,
    Node(NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlKind {
    /// e3D residual/busy status broadcast.
    Status,
    /// Cluster-head advertisement.
    Advertisement,
    /// Member-to-head join request.
    Join,
}

/// One radio transmission of control bits, heard by every listed receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlMessage {
    pub sender: NodeId,
    pub receivers: Vec<NodeId>,
    pub bits: u64,
    pub kind: ControlKind,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoutingPlan {
    pub next_hop: BTreeMap<NodeId, NextHop>,
    pub cluster_heads: BTreeSet<NodeId>,
    pub control_msgs: Vec<ControlMessage>,
    /// Messages a global-knowledge variant would need; counted, never charged.
    pub hypothetical_sync_count: u64,
}

impl RoutingPlan {
    /// Same forwarding structure, ignoring control traffic and sync accounting.
    pub fn same_routes(&self, other: &RoutingPlan) -> bool {
        self.next_hop == other.next_hop && self.cluster_heads == other.cluster_heads
    }
}

/// Committed state a protocol may consult while planning.
#[derive(Debug, Clone, Copy)]
pub struct NetworkView<'a> {
    pub round: u64,
    pub topology: &'a Topology,
    pub batteries: &'a [Battery],
    pub alive: &'a [bool],
    /// Packets each node accepted for relaying during the previous round.
    pub prev_relay_counts: &'a [u32],
}

impl NetworkView<'_> {
    pub fn alive_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.alive
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(i, _)| NodeId(i))
    }

    pub fn alive_count(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }

    pub fn residual(&self, n: NodeId) -> f64 {
        self.batteries[n.index()].residual()
    }
}

/// Relative weights of the energy, load and geometry terms of the relay score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreWeights {
    pub energy: f64,
    pub load: f64,
    pub distance: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        Self {
            energy: 0.4,
            load: 0.2,
            distance: 0.4,
        }
    }
}

impl ScoreWeights {
    /// Rescales the weights to sum to one.
    pub fn normalized(self) -> Result<Self, ProtocolError> {
        let all = [self.energy, self.load, self.distance];
        let sum: f64 = all.iter().sum();
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) || sum <= 0.0 {
            return Err(ProtocolError::BadWeights);
        }
        Ok(Self {
            energy: self.energy / sum,
            load: self.load / sum,
            distance: self.distance / sum,
        })
    }
}

/// Parameters shared by the two diffusion variants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionParams {
    pub weights: ScoreWeights,
    /// Relays per round at which a node counts as busy.
    pub load_max: u32,
    pub ctrl_bits: u64,
    pub initial_energy: f64,
}

pub trait RoutingProtocol: Send {
    fn kind(&self) -> ProtocolKind;

    fn plan(&mut self, view: &NetworkView<'_>) -> RoutingPlan;
}

/// Direct transmission: every alive node sends straight to the base station.
#[derive(Debug, Clone, Copy, Default)]
pub struct Direct;

/// Every alive node maps to the base station; no control traffic.
pub fn plan_direct(alive: &[bool]) -> RoutingPlan {
    let next_hop = alive
        .iter()
        .enumerate()
        .filter(|(_, &a)| a)
        .map(|(i, _)| (NodeId(i), NextHop::Base))
        .collect();
    RoutingPlan {
        next_hop,
        ..RoutingPlan::default()
    }
}

impl RoutingProtocol for Direct {
    fn kind(&self) -> ProtocolKind {
        ProtocolKind::Direct
    }

    fn plan(&mut self, view: &NetworkView<'_>) -> RoutingPlan {
        plan_direct(view.alive)
    }
}

/// Everything needed to instantiate any of the five protocols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    pub diffusion: DiffusionParams,
    pub cluster_head_prob: f64,
    pub seed: u64,
}

pub fn build_protocol(
    kind: ProtocolKind,
    topology: &Topology,
    params: &ProtocolParams,
) -> Result<Box<dyn RoutingProtocol>, ProtocolError> {
    Ok(match kind {
        ProtocolKind::Direct => Box::new(Direct),
        ProtocolKind::E3d => Box::new(E3d::new(topology, params.diffusion)?),
        ProtocolKind::IdealDiffusion => Box::new(IdealDiffusion::new(params.diffusion)?),
        ProtocolKind::RandomClustering => Box::new(RandomClustering::new(
            params.cluster_head_prob,
            params.seed,
            params.diffusion.ctrl_bits,
        )?),
        ProtocolKind::IdealClustering => Box::new(IdealClustering::new(params.cluster_head_prob)?),
    })
}

/// `n * (n - 1)`: pairwise state exchange among `n` alive nodes.
pub(crate) fn full_sync_count(alive: usize) -> u64 {
    let n = alive as u64;
    n * n.saturating_sub(1)
}
