//! Minimum-weight perfect b-matching by successive shortest paths.
//!
//! The b-matching is solved as a min-cost flow
//! `source -> left nodes -> slots -> sink`. Flights are inserted one at a
//! time in input order; each insertion is a Dijkstra search from the
//! flight node to the sink over reduced costs, so the flow after `k`
//! insertions is a min-cost flow for the first `k` flights. The dummy
//! node's demand costs the same wherever it lands and is routed last in a
//! single batch.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use crate::matching_graph::{BMatching, BipartiteInstance};
use crate::model::{FlightId, Money, Schedule, SlotId};

const UNREACHED: i64 = i64::MAX;
const NO_ARC: usize = usize::MAX;

#[derive(Clone, Debug)]
struct Arc {
    to: usize,
    residual: i64,
    cost: i64,
    /// Index of the paired reverse arc.
    rev: usize,
}

/// Residual network with node potentials.
///
/// Node layout: flights `0..n`, dummy `n`, slots `n+1..n+1+T`, then source
/// and sink. Reduced costs `cost + pi(u) - pi(v)` stay non-negative on
/// every residual arc that does not touch the source.
#[derive(Clone, Debug)]
pub struct FlowNetwork {
    arcs: Vec<Arc>,
    adjacency: Vec<Vec<usize>>,
    potential: Vec<i64>,
    num_flights: usize,
    num_slots: usize,
    /// Arc `source -> flight k`.
    source_arcs: Vec<usize>,
    /// Arcs `flight k -> slot`, parallel to the flight's edge list.
    flight_arcs: Vec<Vec<usize>>,
    dummy_source_arc: usize,
    dummy_arcs: Vec<usize>,
    sink_arcs: Vec<usize>,
}

impl FlowNetwork {
    pub fn new(bi: &BipartiteInstance) -> Self {
        let n = bi.num_flights();
        let t = bi.num_slots();
        let mut net = FlowNetwork {
            arcs: Vec::with_capacity(2 * (bi.num_edges() + n + t + 1)),
            adjacency: vec![Vec::new(); n + t + 3],
            potential: vec![0; n + t + 3],
            num_flights: n,
            num_slots: t,
            source_arcs: Vec::with_capacity(n),
            flight_arcs: Vec::with_capacity(n),
            dummy_source_arc: NO_ARC,
            dummy_arcs: Vec::with_capacity(t),
            sink_arcs: Vec::with_capacity(t),
        };
        let (source, sink, dummy) = (net.source(), net.sink(), net.dummy());
        for (k, edges) in bi.flight_edges.iter().enumerate() {
            let arc = net.add_arc(source, k, 1, 0);
            net.source_arcs.push(arc);
            let arcs =
                edges.iter().map(|e| net.add_arc(k, net.slot_node(e.slot.index()), 1, e.weight.cents())).collect();
            net.flight_arcs.push(arcs);
        }
        let dummy_demand = i64::try_from(bi.dummy_demand).expect("dummy demand fits i64");
        net.dummy_source_arc = net.add_arc(source, dummy, dummy_demand, 0);
        for (s, &capacity) in bi.slot_capacity.iter().enumerate() {
            let slot = net.slot_node(s);
            let arc = net.add_arc(dummy, slot, i64::from(capacity), bi.dummy_weight.cents());
            net.dummy_arcs.push(arc);
            let arc = net.add_arc(slot, sink, i64::from(capacity), 0);
            net.sink_arcs.push(arc);
        }
        net
    }

    fn dummy(&self) -> usize {
        self.num_flights
    }

    fn slot_node(&self, slot: usize) -> usize {
        self.num_flights + 1 + slot
    }

    fn source(&self) -> usize {
        self.num_flights + 1 + self.num_slots
    }

    fn sink(&self) -> usize {
        self.source() + 1
    }

    fn is_slot(&self, node: usize) -> bool {
        node > self.num_flights && node < self.source()
    }

    fn add_arc(&mut self, from: usize, to: usize, capacity: i64, cost: i64) -> usize {
        let forward = self.arcs.len();
        self.arcs.push(Arc { to, residual: capacity, cost, rev: forward + 1 });
        self.arcs.push(Arc { to: from, residual: 0, cost: -cost, rev: forward });
        self.adjacency[from].push(forward);
        self.adjacency[to].push(forward + 1);
        forward
    }

    fn push(&mut self, arc: usize, amount: i64) {
        self.arcs[arc].residual -= amount;
        let rev = self.arcs[arc].rev;
        self.arcs[rev].residual += amount;
    }

    /// Flow currently carried by a forward arc.
    fn flow(&self, arc: usize) -> i64 {
        self.arcs[self.arcs[arc].rev].residual
    }

    /// Flow on each flight's arcs, parallel to the flight's edge list.
    pub fn flight_arc_flows(&self) -> Vec<Vec<i64>> {
        self.flight_arcs.iter().map(|arcs| arcs.iter().map(|&a| self.flow(a)).collect()).collect()
    }

    /// Smallest reduced cost over residual arcs not incident to the source.
    pub fn min_reduced_cost(&self) -> Option<i64> {
        let source = self.source();
        (0..self.adjacency.len())
            .filter(|&u| u != source)
            .flat_map(|u| self.adjacency[u].iter().map(move |&a| (u, a)))
            .filter(|&(_, a)| self.arcs[a].residual > 0 && self.arcs[a].to != source)
            .map(|(u, a)| self.arcs[a].cost + self.potential[u] - self.potential[self.arcs[a].to])
            .min()
    }

    /// Dijkstra from `start` to the sink over reduced costs. On success,
    /// pushes one unit along the path found and updates potentials.
    fn augment_from(&mut self, start: usize) -> bool {
        let (source, sink) = (self.source(), self.sink());
        let nodes = self.adjacency.len();
        let mut dist = vec![UNREACHED; nodes];
        let mut parent = vec![NO_ARC; nodes];
        let mut settled = vec![false; nodes];
        let mut heap = BinaryHeap::new();
        dist[start] = 0;
        heap.push(Reverse((0i64, start)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if settled[u] {
                continue;
            }
            settled[u] = true;
            if u == sink {
                break;
            }
            for &a in &self.adjacency[u] {
                let arc = &self.arcs[a];
                if arc.residual == 0 || arc.to == source {
                    continue;
                }
                let reduced = arc.cost + self.potential[u] - self.potential[arc.to];
                debug_assert!(reduced >= 0, "negative reduced cost {reduced}");
                let next = d + reduced;
                if next < dist[arc.to] {
                    dist[arc.to] = next;
                    parent[arc.to] = a;
                    heap.push(Reverse((next, arc.to)));
                }
            }
        }
        if !settled[sink] {
            return false;
        }
        let to_sink = dist[sink];
        for (pi, &d) in self.potential.iter_mut().zip(&dist) {
            *pi += if d == UNREACHED { to_sink } else { d.min(to_sink) };
        }
        let mut node = sink;
        while node != start {
            let a = parent[node];
            self.push(a, 1);
            node = self.arcs[self.arcs[a].rev].to;
        }
        true
    }

    /// Flights and slots reachable in the residual graph from `roots`
    /// using flight-slot arcs only.
    fn residual_reach(&self, roots: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let (mut flights, mut slots) = (BTreeSet::new(), BTreeSet::new());
        let mut stack: Vec<usize> = roots.to_vec();
        flights.extend(roots.iter().copied());
        while let Some(u) = stack.pop() {
            for &a in &self.adjacency[u] {
                let arc = &self.arcs[a];
                if arc.residual == 0 {
                    continue;
                }
                let v = arc.to;
                let fresh = if v < self.num_flights {
                    flights.insert(v)
                } else if self.is_slot(v) {
                    slots.insert(v - self.num_flights - 1)
                } else {
                    false
                };
                if fresh {
                    stack.push(v);
                }
            }
        }
        (flights.into_iter().collect(), slots.into_iter().collect())
    }
}

/// Hall violation: flights whose windows jointly hold fewer landings than
/// there are flights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfeasibilityCertificate {
    pub deficient_flights: Vec<FlightId>,
    /// Union of the deficient flights' windows.
    pub reachable_slots: Vec<SlotId>,
    pub shortfall: u64,
}

impl InfeasibilityCertificate {
    /// Re-derives the deficiency from the instance; `true` iff the slots
    /// cover every window of the certified flights and their combined
    /// capacity falls short by exactly `shortfall`.
    pub fn recheck(&self, bi: &BipartiteInstance) -> bool {
        let covered: BTreeSet<SlotId> = self.reachable_slots.iter().copied().collect();
        let mut union = BTreeSet::new();
        for id in &self.deficient_flights {
            let Some(k) = bi.flights.iter().position(|f| f == id) else {
                return false;
            };
            union.extend(bi.flight_edges[k].iter().map(|e| e.slot));
        }
        let capacity: u64 = covered.iter().map(|s| u64::from(bi.slot_capacity[s.index()])).sum();
        let flights = self.deficient_flights.len() as u64;
        union == covered && capacity < flights && flights - capacity == self.shortfall
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverPotentials {
    pub flights: Vec<Money>,
    pub slots: Vec<Money>,
    pub sink: Money,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchingResult {
    pub schedule: Schedule,
    pub matching: BMatching,
    /// Weight of the flight edges, i.e. the schedule's delay cost.
    pub flow_cost: Money,
    /// Weight of the dummy edges; constant over perfect b-matchings.
    pub dummy_cost: Money,
    /// Potentials at the end of the flight phase.
    pub potentials: SolverPotentials,
    /// Shortest-path runs, counting the batched dummy phase as one.
    pub augmentations: usize,
}

pub fn solve(bi: &BipartiteInstance) -> Result<MatchingResult, InfeasibilityCertificate> {
    let mut net = FlowNetwork::new(bi);
    solve_network(bi, &mut net)
}

pub(crate) fn solve_network(
    bi: &BipartiteInstance,
    net: &mut FlowNetwork,
) -> Result<MatchingResult, InfeasibilityCertificate> {
    assert!(bi.is_balanced(), "b-matching demands are unbalanced");
    let mut augmentations = 0;
    let mut stranded = Vec::new();
    for k in 0..bi.num_flights() {
        augmentations += 1;
        if net.augment_from(k) {
            net.push(net.source_arcs[k], 1);
        } else {
            stranded.push(k);
        }
    }

    if !stranded.is_empty() {
        let (flights, slots) = net.residual_reach(&stranded);
        let cert = InfeasibilityCertificate {
            deficient_flights: flights.iter().map(|&k| bi.flights[k].clone()).collect(),
            reachable_slots: slots.iter().map(|&s| SlotId::from_index(s)).collect(),
            shortfall: stranded.len() as u64,
        };
        debug_assert!(cert.recheck(bi), "certificate fails its own recheck");
        return Err(cert);
    }

    let potentials = SolverPotentials {
        flights: net.potential[..bi.num_flights()].iter().map(|&p| Money(p)).collect(),
        slots: (0..bi.num_slots()).map(|s| Money(net.potential[net.slot_node(s)])).collect(),
        sink: Money(net.potential[net.sink()]),
    };

    // Leftover capacity goes to the dummy node in one batch.
    let mut dummy_load = vec![0u32; bi.num_slots()];
    if bi.dummy_demand > 0 {
        augmentations += 1;
        for (s, load) in dummy_load.iter_mut().enumerate() {
            let spare = net.arcs[net.sink_arcs[s]].residual;
            if spare > 0 {
                net.push(net.dummy_arcs[s], spare);
                net.push(net.sink_arcs[s], spare);
                *load = u32::try_from(spare).expect("spare capacity fits u32");
            }
        }
        let routed: i64 = dummy_load.iter().map(|&d| i64::from(d)).sum();
        net.push(net.dummy_source_arc, routed);
    }

    let flight_slots: Vec<SlotId> = (0..bi.num_flights())
        .map(|k| {
            let used = net.flight_arcs[k]
                .iter()
                .position(|&a| net.flow(a) == 1)
                .expect("every inserted flight carries one unit");
            bi.flight_edges[k][used].slot
        })
        .collect();
    let matching = BMatching { flight_slots, dummy_load };
    debug_assert!(bi.is_perfect(&matching));
    Ok(MatchingResult {
        schedule: matching.schedule(bi),
        flow_cost: bi.flight_weight(&matching),
        dummy_cost: bi.dummy_weight_total(&matching),
        matching,
        potentials,
        augmentations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delay::DelayProfile;
    use crate::matching_graph::build;
    use crate::model::{validate_instance, Flight, Instance, Slot};

    fn flight(id: &str, scheduled: u32, alpha: i64) -> Flight {
        Flight {
            id: FlightId::new(id),
            airline: "XX".into(),
            scheduled_slot: SlotId(scheduled),
            alpha: Money(alpha),
            profile: DelayProfile::Linear,
        }
    }

    fn empty(slots: Vec<Slot>) -> Instance {
        Instance { slot_minutes: 5, slots, flights: vec![], windows: vec![] }
    }

    #[test]
    fn forced_assignment() {
        let mut raw = empty(Instance::uniform_slots(1, 1));
        raw.push_flight(flight("A", 0, 100), [0]);
        let bi = build(&validate_instance(raw).unwrap());
        let result = solve(&bi).unwrap();
        assert_eq!(result.schedule.slot_of(&FlightId::new("A")), Some(SlotId(0)));
        assert_eq!(result.flow_cost, Money(0));
        assert_eq!(result.augmentations, 1);
    }

    #[test]
    fn higher_alpha_lands_first() {
        // Brute force over the two assignments: 100 (f1 first) vs 200.
        let mut raw = empty(Instance::uniform_slots(2, 1));
        raw.push_flight(flight("f2", 0, 100), [0, 1]);
        raw.push_flight(flight("f1", 0, 200), [0, 1]);
        let bi = build(&validate_instance(raw).unwrap());
        let result = solve(&bi).unwrap();
        assert_eq!(result.schedule.slot_of(&FlightId::new("f1")), Some(SlotId(0)));
        assert_eq!(result.schedule.slot_of(&FlightId::new("f2")), Some(SlotId(1)));
        assert_eq!(result.flow_cost, Money(100));
    }

    #[test]
    fn hall_violation_yields_certificate() {
        let mut raw = empty(Instance::uniform_slots(7, 1));
        raw.push_flight(flight("A", 5, 100), [5]);
        raw.push_flight(flight("B", 5, 100), [5]);
        let bi = build(&validate_instance(raw).unwrap());
        let cert = solve(&bi).unwrap_err();
        assert_eq!(cert.deficient_flights, vec![FlightId::new("A"), FlightId::new("B")]);
        assert_eq!(cert.reachable_slots, vec![SlotId(5)]);
        assert_eq!(cert.shortfall, 1);
        assert!(cert.recheck(&bi));
    }

    #[test]
    fn certificate_collects_the_whole_deficient_set() {
        // A, B, C squeezed into slots {0, 1}; D is free elsewhere.
        let mut raw = empty(Instance::uniform_slots(4, 1));
        raw.push_flight(flight("A", 0, 1), [0, 1]);
        raw.push_flight(flight("B", 0, 1), [0]);
        raw.push_flight(flight("D", 2, 1), [2, 3]);
        raw.push_flight(flight("C", 0, 1), [1]);
        let bi = build(&validate_instance(raw).unwrap());
        let cert = solve(&bi).unwrap_err();
        assert_eq!(cert.deficient_flights.len(), 3);
        assert_eq!(cert.reachable_slots, vec![SlotId(0), SlotId(1)]);
        assert!(cert.recheck(&bi));

        let mut forged = cert.clone();
        forged.shortfall = 2;
        assert!(!forged.recheck(&bi));
    }

    #[test]
    fn rerouting_through_matched_flights() {
        // A takes slot 0 first; B can only use slot 0 and is worth more,
        // so A must be displaced to slot 1.
        let mut raw = empty(Instance::uniform_slots(2, 1));
        raw.push_flight(flight("A", 0, 10), [0, 1]);
        raw.push_flight(flight("B", 0, 1000), [0]);
        let bi = build(&validate_instance(raw).unwrap());
        let result = solve(&bi).unwrap();
        assert_eq!(result.schedule.slot_of(&FlightId::new("A")), Some(SlotId(1)));
        assert_eq!(result.flow_cost, Money(10));
    }

    #[test]
    fn dummy_absorbs_spare_capacity() {
        let mut raw = empty(vec![
            Slot { id: SlotId(0), capacity: 2 },
            Slot { id: SlotId(1), capacity: 0 },
            Slot { id: SlotId(2), capacity: 3 },
        ]);
        raw.push_flight(flight("A", 0, 5), [0, 1, 2]);
        raw.push_flight(flight("B", 0, 7), [0, 1, 2]);
        raw.push_flight(flight("C", 0, 9), [0, 1, 2]);
        let bi = build(&validate_instance(raw).unwrap());
        let result = solve(&bi).unwrap();
        assert_eq!(result.matching.dummy_load, vec![0, 0, 2]);
        assert_eq!(result.flow_cost, Money(10));
        assert_eq!(result.augmentations, 4);
        assert!(bi.is_perfect(&result.matching));
    }

    #[test]
    fn flows_are_integral_and_reduced_costs_nonnegative() {
        let mut raw = empty(Instance::uniform_slots(5, 2));
        for (k, alpha) in [30, 10, 50, 20, 40, 60, 5].iter().enumerate() {
            raw.push_flight(flight(&format!("F{k}"), (k % 3) as u32, *alpha), (k as u32 % 3)..5);
        }
        let bi = build(&validate_instance(raw).unwrap());
        let mut net = FlowNetwork::new(&bi);
        solve_network(&bi, &mut net).unwrap();
        for flows in net.flight_arc_flows() {
            assert!(flows.iter().all(|&f| f == 0 || f == 1));
            assert_eq!(flows.iter().sum::<i64>(), 1);
        }
        // The dummy batch bypasses potentials, so only check arcs among
        // flights and slots.
        let mut net = FlowNetwork::new(&bi);
        for k in 0..bi.num_flights() {
            assert!(net.augment_from(k));
            net.push(net.source_arcs[k], 1);
            assert!(net.min_reduced_cost().unwrap() >= 0);
        }
    }
}
