//! Static node layout: positions, base-station placement and the geometric
//! queries every location-aware routing rule needs.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Planar coordinates in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_to(&self, other: &Position) -> f64 {
        distance(*self, *other)
    }
}

/// Euclidean distance in meters.
pub fn distance(a: Position, b: Position) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Dense sensor-node ordinal in `[0, node_count)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("node_count must be at least 1")]
    NoNodes,
    #[error("field dimensions must be positive and finite (got {width} x {height})")]
    BadField { width: f64, height: f64 },
    #[error("comm_radius must be positive and finite (got {0})")]
    BadRadius(f64),
    #[error("node {id} at ({x}, {y}) lies outside the field")]
    OutOfField { id: usize, x: f64, y: f64 },
    #[error("base station position must be finite")]
    BadBaseStation,
}

/// Immutable deployment: node positions plus the off-node sink.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    positions: Vec<Position>,
    base_station: Position,
    field_width: f64,
    field_height: f64,
    comm_radius: f64,
    // cached distance of every node to the base station
    bs_distance: Vec<f64>,
}

/// Parameters for [`generate_topology`]; a subset of the simulation config.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSpec {
    pub width: f64,
    pub height: f64,
    pub node_count: usize,
    pub base_station: Position,
    pub comm_radius: f64,
}

/// Places `node_count` nodes i.i.d. uniformly over the field.
///
/// The generator is ChaCha8 seeded from `seed` on stream 0, so a given
/// `(spec, seed)` pair yields the same layout on every platform.
pub fn generate_topology(spec: &FieldSpec, seed: u64) -> Result<Topology, TopologyError> {
    validate_field(spec.width, spec.height)?;
    if spec.node_count == 0 {
        return Err(TopologyError::NoNodes);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions = (0..spec.node_count)
        .map(|_| {
            let x = rng.gen::<f64>() * spec.width;
            let y = rng.gen::<f64>() * spec.height;
            Position::new(x, y)
        })
        .collect();
    Topology::new(
        positions,
        spec.base_station,
        spec.width,
        spec.height,
        spec.comm_radius,
    )
}

fn validate_field(width: f64, height: f64) -> Result<(), TopologyError> {
    let ok = |v: f64| v.is_finite() && v > 0.0;
    if ok(width) && ok(height) {
        Ok(())
    } else {
        Err(TopologyError::BadField { width, height })
    }
}

impl Topology {
    /// Builds a topology from explicit positions (hand-built scenarios, tests).
    pub fn new(
        positions: Vec<Position>,
        base_station: Position,
        field_width: f64,
        field_height: f64,
        comm_radius: f64,
    ) -> Result<Self, TopologyError> {
        validate_field(field_width, field_height)?;
        if positions.is_empty() {
            return Err(TopologyError::NoNodes);
        }
        if !(comm_radius.is_finite() && comm_radius > 0.0) {
            return Err(TopologyError::BadRadius(comm_radius));
        }
        if !(base_station.x.is_finite() && base_station.y.is_finite()) {
            return Err(TopologyError::BadBaseStation);
        }
        for (id, p) in positions.iter().enumerate() {
            let inside = (0.0..=field_width).contains(&p.x) && (0.0..=field_height).contains(&p.y);
            if !inside {
                return Err(TopologyError::OutOfField { id, x: p.x, y: p.y });
            }
        }
        let bs_distance = positions
            .iter()
            .map(|p| distance(*p, base_station))
            .collect();
        Ok(Self {
            positions,
            base_station,
            field_width,
            field_height,
            comm_radius,
            bs_distance,
        })
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.positions.len()).map(NodeId)
    }

    pub fn position(&self, n: NodeId) -> Position {
        self.positions[n.0]
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    pub fn base_station(&self) -> Position {
        self.base_station
    }

    pub fn field_width(&self) -> f64 {
        self.field_width
    }

    pub fn field_height(&self) -> f64 {
        self.field_height
    }

    pub fn comm_radius(&self) -> f64 {
        self.comm_radius
    }

    pub fn distance(&self, a: NodeId, b: NodeId) -> f64 {
        distance(self.positions[a.0], self.positions[b.0])
    }

    pub fn distance_to_base(&self, n: NodeId) -> f64 {
        self.bs_distance[n.0]
    }

    pub fn in_range(&self, a: NodeId, b: NodeId) -> bool {
        self.distance(a, b) <= self.comm_radius
    }

    /// Nodes other than `n` within `comm_radius` of it, ascending id.
    pub fn neighbors(&self, n: NodeId) -> Vec<NodeId> {
        self.node_ids()
            .filter(|&c| c != n && self.in_range(n, c))
            .collect()
    }

    /// Alive nodes within radius of `n` that are strictly closer to the base
    /// station than `n`, in ascending id order. `alive` is indexed by node.
    pub fn candidate_next_hops(&self, n: NodeId, alive: &[bool]) -> Vec<NodeId> {
        let own = self.distance_to_base(n);
        self.node_ids()
            .filter(|&c| {
                c != n && alive[c.0] && self.in_range(n, c) && self.distance_to_base(c) < own
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(node_count: usize) -> FieldSpec {
        FieldSpec {
            width: 100.0,
            height: 100.0,
            node_count,
            base_station: Position::new(50.0, 200.0),
            comm_radius: 30.0,
        }
    }

    #[test]
    fn single_node_inside_field() {
        let t = generate_topology(&spec(1), 123).unwrap();
        assert_eq!(t.node_count(), 1);
        let p = t.position(NodeId(0));
        assert!((0.0..=100.0).contains(&p.x) && (0.0..=100.0).contains(&p.y));
    }

    #[test]
    fn same_seed_same_layout() {
        let a = generate_topology(&spec(50), 42).unwrap();
        let b = generate_topology(&spec(50), 42).unwrap();
        let bits = |t: &Topology| {
            t.positions()
                .iter()
                .map(|p| (p.x.to_bits(), p.y.to_bits()))
                .collect::<Vec<_>>()
        };
        assert_eq!(bits(&a), bits(&b));
        let c = generate_topology(&spec(50), 43).unwrap();
        assert_ne!(bits(&a), bits(&c));
    }

    #[test]
    fn mean_x_concentrates() {
        let t = generate_topology(&spec(1000), 7).unwrap();
        let mean = t.positions().iter().map(|p| p.x).sum::<f64>() / 1000.0;
        // four standard errors of a U(0,100) sample mean with n = 1000
        let bound = 100.0 / 12f64.sqrt() / 1000f64.sqrt() * 4.0;
        assert!((bound - 3.651).abs() < 1e-3);
        assert!((mean - 50.0).abs() <= bound, "mean x = {mean}");
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut s = spec(0);
        assert_eq!(generate_topology(&s, 1), Err(TopologyError::NoNodes));
        s.node_count = 3;
        s.width = 0.0;
        assert!(matches!(
            generate_topology(&s, 1),
            Err(TopologyError::BadField { .. })
        ));
        s.width = 100.0;
        s.height = -1.0;
        assert!(generate_topology(&s, 1).is_err());
    }

    #[test]
    fn distance_examples() {
        assert_eq!(
            distance(Position::new(0.0, 0.0), Position::new(3.0, 4.0)),
            5.0
        );
        assert_eq!(
            distance(Position::new(7.0, 7.0), Position::new(7.0, 7.0)),
            0.0
        );
    }

    fn line_topology() -> Topology {
        Topology::new(
            vec![
                Position::new(0.0, 50.0),
                Position::new(40.0, 50.0),
                Position::new(80.0, 50.0),
            ],
            Position::new(100.0, 50.0),
            100.0,
            100.0,
            50.0,
        )
        .unwrap()
    }

    #[test]
    fn collinear_candidates() {
        let t = line_topology();
        let alive = [true; 3];
        // brute-force enumeration of (sender, candidate) pairs
        let mut expected = Vec::new();
        for n in 0..3 {
            let mut row = Vec::new();
            for c in 0..3 {
                let pn = t.positions()[n];
                let pc = t.positions()[c];
                let d = ((pn.x - pc.x).powi(2) + (pn.y - pc.y).powi(2)).sqrt();
                let closer = (100.0 - pc.x).abs() < (100.0 - pn.x).abs();
                if c != n && d <= 50.0 && closer {
                    row.push(NodeId(c));
                }
            }
            expected.push(row);
        }
        assert_eq!(expected[0], vec![NodeId(1)]);
        for (n, row) in expected.iter().enumerate() {
            assert_eq!(&t.candidate_next_hops(NodeId(n), &alive), row);
        }
        // C is nearest the sink with no closer peer
        assert!(t.candidate_next_hops(NodeId(2), &alive).is_empty());
    }

    #[test]
    fn dead_nodes_are_not_candidates() {
        let t = line_topology();
        assert!(t
            .candidate_next_hops(NodeId(0), &[true, false, true])
            .is_empty());
        assert!(t
            .candidate_next_hops(NodeId(1), &[true, true, false])
            .is_empty());
    }

    #[test]
    fn hand_built_out_of_field_rejected() {
        let err = Topology::new(
            vec![Position::new(120.0, 5.0)],
            Position::new(0.0, 0.0),
            100.0,
            100.0,
            10.0,
        )
        .unwrap_err();
        assert!(matches!(err, TopologyError::OutOfField { id: 0, .. }));
    }

    proptest! {
        #[test]
        fn distance_symmetric(ax in -1e3..1e3f64, ay in -1e3..1e3f64, bx in -1e3..1e3f64, by in -1e3..1e3f64) {
            let a = Position::new(ax, ay);
            let b = Position::new(bx, by);
            prop_assert_eq!(distance(a, b), distance(b, a));
            prop_assert!(distance(a, b) >= 0.0);
        }

        #[test]
        fn generated_layouts_respect_bounds_and_progress(seed in any::<u64>(), n in 1usize..60) {
            let t = generate_topology(&spec(n), seed).unwrap();
            for p in t.positions() {
                prop_assert!((0.0..=100.0).contains(&p.x) && (0.0..=100.0).contains(&p.y));
            }
            let alive = vec![true; n];
            for id in t.node_ids() {
                for c in t.candidate_next_hops(id, &alive) {
                    prop_assert!(t.distance_to_base(c) < t.distance_to_base(id));
                    prop_assert!(t.distance(id, c) <= t.comm_radius());
                }
            }
        }
    }
}
