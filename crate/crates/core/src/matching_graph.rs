//! The bipartite b-matching view of a market instance.
//!
//! Left side: one node per flight (demand 1) plus a dummy node absorbing
//! the surplus capacity `sum c(s) - |A|`. Right side: one node per slot
//! (demand `c(s)`). A perfect b-matching of minimum weight is an optimal
//! landing schedule.

use crate::model::{FlightId, Money, Schedule, SlotId, ValidatedInstance};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub slot: SlotId,
    pub weight: Money,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeftNode {
    Flight(usize),
    Dummy,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteInstance {
    /// Flight nodes in input order; node `k` has demand 1.
    pub flights: Vec<FlightId>,
    /// Edges of each flight node, ordered by slot index.
    pub flight_edges: Vec<Vec<Edge>>,
    /// Right-side demands, `c(s)` per slot.
    pub slot_capacity: Vec<u32>,
    /// Demand of the dummy node.
    pub dummy_demand: u64,
    /// Weight of every dummy-slot edge.
    pub dummy_weight: Money,
}

impl BipartiteInstance {
    pub fn num_flights(&self) -> usize {
        self.flights.len()
    }

    pub fn num_slots(&self) -> usize {
        self.slot_capacity.len()
    }

    pub fn left_demand(&self, node: LeftNode) -> u64 {
        match node {
            LeftNode::Flight(_) => 1,
            LeftNode::Dummy => self.dummy_demand,
        }
    }

    pub fn total_left_demand(&self) -> u64 {
        self.flights.len() as u64 + self.dummy_demand
    }

    pub fn total_right_demand(&self) -> u64 {
        self.slot_capacity.iter().map(|&c| u64::from(c)).sum()
    }

    pub fn is_balanced(&self) -> bool {
        self.total_left_demand() == self.total_right_demand()
    }

    /// Number of edges, counting one dummy edge per slot.
    pub fn num_edges(&self) -> usize {
        self.flight_edges.iter().map(Vec::len).sum::<usize>() + self.num_slots()
    }

    pub fn edge_weight(&self, flight: usize, slot: SlotId) -> Option<Money> {
        let edges = &self.flight_edges[flight];
        edges.binary_search_by_key(&slot, |e| e.slot).ok().map(|k| edges[k].weight)
    }

    /// Checks that `matching` saturates every demand exactly using only
    /// edges of this graph.
    pub fn is_perfect(&self, matching: &BMatching) -> bool {
        if matching.flight_slots.len() != self.num_flights() || matching.dummy_load.len() != self.num_slots() {
            return false;
        }
        let mut load: Vec<u64> = matching.dummy_load.iter().map(|&d| u64::from(d)).collect();
        for (k, slot) in matching.flight_slots.iter().enumerate() {
            if self.edge_weight(k, *slot).is_none() {
                return false;
            }
            load[slot.index()] += 1;
        }
        let dummy_total: u64 = matching.dummy_load.iter().map(|&d| u64::from(d)).sum();
        dummy_total == self.dummy_demand && load.iter().zip(&self.slot_capacity).all(|(&l, &c)| l == u64::from(c))
    }

    /// Weight of the flight edges of `matching`.
    pub fn flight_weight(&self, matching: &BMatching) -> Money {
        matching
            .flight_slots
            .iter()
            .enumerate()
            .map(|(k, &slot)| self.edge_weight(k, slot).expect("matching uses a non-edge"))
            .sum()
    }

    /// Weight of the dummy edges of `matching`.
    pub fn dummy_weight_total(&self, matching: &BMatching) -> Money {
        let units: u64 = matching.dummy_load.iter().map(|&d| u64::from(d)).sum();
        self.dummy_weight * i64::try_from(units).expect("dummy load fits i64")
    }
}

/// A b-matching: the slot of every flight node and how many units of
/// dummy demand each slot absorbs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BMatching {
    pub flight_slots: Vec<SlotId>,
    pub dummy_load: Vec<u32>,
}

impl BMatching {
    /// The landing schedule formed by the flight edges.
    pub fn schedule(&self, bi: &BipartiteInstance) -> Schedule {
        bi.flights.iter().cloned().zip(self.flight_slots.iter().copied()).collect()
    }
}

pub fn build(inst: &ValidatedInstance) -> BipartiteInstance {
    build_with_dummy_weight(inst, Money::ZERO)
}

/// Like [`build`], with a chosen weight on the dummy edges.
pub fn build_with_dummy_weight(inst: &ValidatedInstance, dummy_weight: Money) -> BipartiteInstance {
    let flight_edges = (0..inst.num_flights())
        .map(|k| {
            inst.window(k)
                .slots
                .iter()
                .zip(inst.window_costs(k))
                .map(|(&slot, &weight)| Edge { slot, weight })
                .collect()
        })
        .collect();
    let dummy_demand = inst.total_capacity() - inst.num_flights() as u64;
    BipartiteInstance {
        flights: inst.flights().iter().map(|f| f.id.clone()).collect(),
        flight_edges,
        slot_capacity: inst.slots().iter().map(|s| s.capacity).collect(),
        dummy_demand,
        dummy_weight,
    }
}
