//! Equilibrium landing prices and their verification.
//!
//! Prices are read off an *exchange graph* over slots: for a flight `i`
//! landing in `s`, the arc `s -> s'` has length `cost_i(s') - cost_i(s)`,
//! the change in delay cost if `i` moved to `s'`. Optimality of the
//! schedule means no cycle of moves (and no chain ending in a slot with
//! spare room) has negative length, so shortest distances exist and give
//! the smallest non-negative prices under which every flight's assigned
//! slot minimizes its total cost.

use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

use crate::delay::{effective_delay, raw_delay};
use crate::model::{
    check_schedule, schedule_cost, FlightId, Money, Schedule, ScheduleError, SlotId, ValidatedInstance,
};
use crate::solver::MatchingResult;

/// Per-slot landing prices and per-flight total costs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PriceSystem {
    /// `prices[s]` is the price of slot `s`.
    pub prices: Vec<Money>,
    pub total_costs: BTreeMap<FlightId, Money>,
}

impl PriceSystem {
    pub fn price(&self, slot: SlotId) -> Money {
        self.prices[slot.index()]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Condition {
    /// The schedule itself breaks window or capacity constraints.
    Schedule,
    /// Every flight pays its minimum total cost.
    MinimumCost,
    /// Slots not filled to capacity are free.
    FreeUnderfilled,
    /// With no underfilled slot, the cheapest slot is free.
    Anchor,
    /// Prices and total costs are non-negative.
    NonNegative,
}

impl Condition {
    pub fn label(self) -> &'static str {
        match self {
            Condition::Schedule => "schedule",
            Condition::MinimumCost => "C1",
            Condition::FreeUnderfilled => "C2",
            Condition::Anchor => "anchor",
            Condition::NonNegative => "C3",
        }
    }
}

/// A failed check, carrying both sides of the broken relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Schedule(ScheduleError),
    PriceVectorLength {
        expected: usize,
        found: usize,
    },
    MissingTotalCost(FlightId),
    /// `t_i` differs from price plus delay cost at the assigned slot.
    TotalCostMismatch {
        flight: FlightId,
        slot: SlotId,
        total_cost: Money,
        price_plus_delay: Money,
    },
    /// Some window slot is strictly cheaper than `t_i`.
    CheaperSlot {
        flight: FlightId,
        slot: SlotId,
        total_cost: Money,
        price_plus_delay: Money,
    },
    PricedUnderfilledSlot {
        slot: SlotId,
        occupancy: u32,
        capacity: u32,
        price: Money,
    },
    NoFreeSlot {
        min_price: Money,
    },
    NegativePrice {
        slot: SlotId,
        price: Money,
    },
    NegativeTotalCost {
        flight: FlightId,
        total_cost: Money,
    },
}

impl Violation {
    pub fn condition(&self) -> Condition {
        match self {
            Violation::Schedule(_) | Violation::PriceVectorLength { .. } | Violation::MissingTotalCost(_) => {
                Condition::Schedule
            }
            Violation::TotalCostMismatch { .. } | Violation::CheaperSlot { .. } => Condition::MinimumCost,
            Violation::PricedUnderfilledSlot { .. } => Condition::FreeUnderfilled,
            Violation::NoFreeSlot { .. } => Condition::Anchor,
            Violation::NegativePrice { .. } | Violation::NegativeTotalCost { .. } => Condition::NonNegative,
        }
    }

    pub fn flight(&self) -> Option<&FlightId> {
        match self {
            Violation::MissingTotalCost(flight)
            | Violation::TotalCostMismatch { flight, .. }
            | Violation::CheaperSlot { flight, .. }
            | Violation::NegativeTotalCost { flight, .. } => Some(flight),
            Violation::Schedule(ScheduleError::Unscheduled(flight))
            | Violation::Schedule(ScheduleError::UnknownFlight(flight))
            | Violation::Schedule(ScheduleError::OutsideWindow { flight, .. }) => Some(flight),
            _ => None,
        }
    }

    pub fn slot(&self) -> Option<SlotId> {
        match self {
            Violation::TotalCostMismatch { slot, .. }
            | Violation::CheaperSlot { slot, .. }
            | Violation::PricedUnderfilledSlot { slot, .. }
            | Violation::NegativePrice { slot, .. }
            | Violation::Schedule(ScheduleError::OutsideWindow { slot, .. })
            | Violation::Schedule(ScheduleError::OverCapacity { slot, .. }) => Some(*slot),
            _ => None,
        }
    }

    /// Left and right side of the failed relation, when it is monetary.
    pub fn sides(&self) -> Option<(Money, Money)> {
        match *self {
            Violation::TotalCostMismatch { total_cost, price_plus_delay, .. } => Some((total_cost, price_plus_delay)),
            Violation::CheaperSlot { total_cost, price_plus_delay, .. } => Some((total_cost, price_plus_delay)),
            Violation::PricedUnderfilledSlot { price, .. } => Some((price, Money::ZERO)),
            Violation::NoFreeSlot { min_price } => Some((min_price, Money::ZERO)),
            Violation::NegativePrice { price, .. } => Some((price, Money::ZERO)),
            Violation::NegativeTotalCost { total_cost, .. } => Some((total_cost, Money::ZERO)),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Violation::Schedule(e) => e.to_string(),
            Violation::PriceVectorLength { expected, found } => {
                format!("{found} prices supplied for {expected} slots")
            }
            Violation::MissingTotalCost(f) => format!("no total cost for flight {f}"),
            Violation::TotalCostMismatch { flight, slot, total_cost, price_plus_delay } => format!(
                "flight {flight}: total cost {total_cost} != price + delay cost {price_plus_delay} at assigned {slot}"
            ),
            Violation::CheaperSlot { flight, slot, total_cost, price_plus_delay } => {
                format!("flight {flight}: total cost {total_cost} > price + delay cost {price_plus_delay} at {slot}")
            }
            Violation::PricedUnderfilledSlot { slot, occupancy, capacity, price } => {
                format!("{slot} holds {occupancy}/{capacity} flights but is priced {price}")
            }
            Violation::NoFreeSlot { min_price } => {
                format!("every slot is full and the cheapest is priced {min_price}, not 0")
            }
            Violation::NegativePrice { slot, price } => format!("{slot} has negative price {price}"),
            Violation::NegativeTotalCost { flight, total_cost } => {
                format!("flight {flight} has negative total cost {total_cost}")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EquilibriumReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl EquilibriumReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        EquilibriumReport { ok: violations.is_empty(), violations }
    }

    pub fn has(&self, condition: Condition) -> bool {
        self.violations.iter().any(|v| v.condition() == condition)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EquilibriumError {
    #[error("exchange graph has a negative cycle; the schedule is not optimal")]
    NegativeCycle,
    #[error("extracted prices fail verification ({} violations)", .0.violations.len())]
    Unverified(EquilibriumReport),
}

/// Smallest non-negative equilibrium prices supporting the solved schedule.
pub fn extract_prices(inst: &ValidatedInstance, result: &MatchingResult) -> Result<PriceSystem, EquilibriumError> {
    let schedule = &result.schedule;
    let num_slots = inst.num_slots();
    let occupancy = schedule.occupancy(num_slots);

    // Node `num_slots` is an anchor at price 0: anchor -> s (length 0)
    // keeps every price non-negative, u -> anchor pins underfilled slots
    // to exactly 0.
    let anchor = num_slots;
    let mut arcs: Vec<(usize, usize, i64)> = Vec::new();
    for (s, slot) in inst.slots().iter().enumerate() {
        arcs.push((anchor, s, 0));
        if occupancy[s] < slot.capacity {
            arcs.push((s, anchor, 0));
        }
    }
    for (k, flight) in inst.flights().iter().enumerate() {
        let assigned = schedule.slot_of(&flight.id).expect("solved schedule covers every flight");
        let here = inst.cost_in_window(k, assigned).expect("solved schedule respects windows");
        for (&slot, &cost) in inst.window(k).slots.iter().zip(inst.window_costs(k)) {
            if slot != assigned {
                arcs.push((assigned.index(), slot.index(), (cost - here).cents()));
            }
        }
    }
    arcs.sort_unstable();
    arcs.dedup_by(|next, kept| next.0 == kept.0 && next.1 == kept.1);

    let distance = shortest_from(anchor, num_slots + 1, &arcs).ok_or(EquilibriumError::NegativeCycle)?;
    let prices: Vec<Money> = distance[..num_slots].iter().map(|&d| Money(-d)).collect();
    let ps = PriceSystem { total_costs: cheapest_totals(inst, &prices), prices };

    let report = verify(inst, schedule, &ps);
    if !report.ok {
        return Err(EquilibriumError::Unverified(report));
    }
    Ok(ps)
}

/// Queue-based Bellman-Ford. `None` on a negative cycle reachable from `root`.
fn shortest_from(root: usize, nodes: usize, arcs: &[(usize, usize, i64)]) -> Option<Vec<i64>> {
    let mut out: Vec<Vec<(usize, i64)>> = vec![Vec::new(); nodes];
    for &(u, v, w) in arcs {
        out[u].push((v, w));
    }
    let mut dist = vec![i64::MAX; nodes];
    let mut queued = vec![false; nodes];
    let mut relaxed = vec![0usize; nodes];
    let mut queue = VecDeque::from([root]);
    dist[root] = 0;
    queued[root] = true;
    while let Some(u) = queue.pop_front() {
        queued[u] = false;
        for &(v, w) in &out[u] {
            let candidate = dist[u] + w;
            if candidate < dist[v] {
                dist[v] = candidate;
                relaxed[v] += 1;
                if relaxed[v] > nodes {
                    return None;
                }
                if !queued[v] {
                    queued[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    Some(dist)
}

/// `t_i = min over the window of price + delay cost`.
fn cheapest_totals(inst: &ValidatedInstance, prices: &[Money]) -> BTreeMap<FlightId, Money> {
    inst.flights()
        .iter()
        .enumerate()
        .map(|(k, flight)| {
            let best = inst
                .window(k)
                .slots
                .iter()
                .zip(inst.window_costs(k))
                .map(|(&slot, &cost)| prices[slot.index()] + cost)
                .min()
                .expect("validated windows are non-empty");
            (flight.id.clone(), best)
        })
        .collect()
}

/// Prices read directly from the solver's node potentials:
/// `p_s = max(0, pi(sink) - pi(s))`, shifted so the cheapest slot is free
/// when every slot is full. An independent route to a valid price system.
pub fn prices_from_potentials(inst: &ValidatedInstance, result: &MatchingResult) -> PriceSystem {
    let pot = &result.potentials;
    let mut prices: Vec<Money> = pot.slots.iter().map(|&pi| (pot.sink - pi).max(Money::ZERO)).collect();
    let occupancy = result.schedule.occupancy(inst.num_slots());
    let any_underfilled = occupancy.iter().zip(inst.slots()).any(|(&o, s)| o < s.capacity);
    if !any_underfilled {
        if let Some(&floor) = prices.iter().min() {
            prices.iter_mut().for_each(|p| *p -= floor);
        }
    }
    PriceSystem { total_costs: cheapest_totals(inst, &prices), prices }
}

/// Checks both equilibrium conditions and sign constraints exactly.
pub fn verify(inst: &ValidatedInstance, sched: &Schedule, ps: &PriceSystem) -> EquilibriumReport {
    let mut violations: Vec<Violation> = check_schedule(inst, sched).into_iter().map(Violation::Schedule).collect();
    if ps.prices.len() != inst.num_slots() {
        violations.push(Violation::PriceVectorLength { expected: inst.num_slots(), found: ps.prices.len() });
        return EquilibriumReport::from_violations(violations);
    }

    for (k, flight) in inst.flights().iter().enumerate() {
        let Some(&total_cost) = ps.total_costs.get(&flight.id) else {
            violations.push(Violation::MissingTotalCost(flight.id.clone()));
            continue;
        };
        if total_cost < Money::ZERO {
            violations.push(Violation::NegativeTotalCost { flight: flight.id.clone(), total_cost });
        }
        if let Some(assigned) = sched.slot_of(&flight.id) {
            if let Some(cost) = inst.cost_in_window(k, assigned) {
                let price_plus_delay = ps.price(assigned) + cost;
                if price_plus_delay != total_cost {
                    violations.push(Violation::TotalCostMismatch {
                        flight: flight.id.clone(),
                        slot: assigned,
                        total_cost,
                        price_plus_delay,
                    });
                }
            }
        }
        for (&slot, &cost) in inst.window(k).slots.iter().zip(inst.window_costs(k)) {
            let price_plus_delay = ps.price(slot) + cost;
            if price_plus_delay < total_cost {
                violations.push(Violation::CheaperSlot {
                    flight: flight.id.clone(),
                    slot,
                    total_cost,
                    price_plus_delay,
                });
            }
        }
    }

    let occupancy = sched.occupancy(inst.num_slots());
    let underfilled: Vec<usize> = (0..inst.num_slots()).filter(|&s| occupancy[s] < inst.slots()[s].capacity).collect();
    for &s in &underfilled {
        let price = ps.prices[s];
        if price != Money::ZERO {
            violations.push(Violation::PricedUnderfilledSlot {
                slot: SlotId::from_index(s),
                occupancy: occupancy[s],
                capacity: inst.slots()[s].capacity,
                price,
            });
        }
    }
    if underfilled.is_empty() {
        if let Some(&min_price) = ps.prices.iter().min() {
            if min_price != Money::ZERO {
                violations.push(Violation::NoFreeSlot { min_price });
            }
        }
    }
    for (s, &price) in ps.prices.iter().enumerate() {
        if price < Money::ZERO {
            violations.push(Violation::NegativePrice { slot: SlotId::from_index(s), price });
        }
    }
    EquilibriumReport::from_violations(violations)
}

/// Dual objective minus primal cost: `sum t_i - sum c(s) p_s - cost`.
///
/// Zero exactly when schedule and prices are an optimal primal-dual
/// pair; negative when the schedule is feasible but suboptimal.
pub fn dual_objective(inst: &ValidatedInstance, ps: &PriceSystem) -> Money {
    let totals: Money =
        inst.flights().iter().map(|f| *ps.total_costs.get(&f.id).expect("total cost for every flight")).sum();
    let charged: Money = inst.slots().iter().zip(&ps.prices).map(|(s, &p)| p * i64::from(s.capacity)).sum();
    totals - charged
}

pub fn strong_duality_check(inst: &ValidatedInstance, sched: &Schedule, ps: &PriceSystem) -> Money {
    dual_objective(inst, ps) - schedule_cost(inst, sched)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphaBoundViolation {
    pub flight: FlightId,
    pub assigned: SlotId,
    pub alternative: SlotId,
    /// Extra effective delay units at the alternative.
    pub extra_delay: u64,
    /// `p(assigned) - p(alternative)`.
    pub price_saving: Money,
    /// `alpha * extra_delay`.
    pub bound: Money,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AlphaBoundReport {
    /// Number of (flight, later-slot) pairs examined.
    pub pairs_checked: usize,
    pub violations: Vec<AlphaBoundViolation>,
}

/// Each flight pays at most `alpha` per unit of delay it avoids: for every
/// window slot costing `k` more effective delay units than the assigned
/// one, `p(assigned) - p(alternative) <= alpha * k`.
pub fn alpha_bound_check(inst: &ValidatedInstance, sched: &Schedule, ps: &PriceSystem) -> AlphaBoundReport {
    let mut report = AlphaBoundReport::default();
    for (k, flight) in inst.flights().iter().enumerate() {
        let Some(assigned) = sched.slot_of(&flight.id) else { continue };
        let here = effective_delay(&flight.profile, raw_delay(flight, assigned));
        for &alternative in &inst.window(k).slots {
            let there = effective_delay(&flight.profile, raw_delay(flight, alternative));
            if there <= here {
                continue;
            }
            report.pairs_checked += 1;
            let extra_delay = there - here;
            let bound = flight.alpha * i64::try_from(extra_delay).expect("delay units fit i64");
            let price_saving = ps.price(assigned) - ps.price(alternative);
            if price_saving > bound {
                report.violations.push(AlphaBoundViolation {
                    flight: flight.id.clone(),
                    assigned,
                    alternative,
                    extra_delay,
                    price_saving,
                    bound,
                });
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delay::DelayProfile;
    use crate::matching_graph::build;
    use crate::model::{validate_instance, Flight, Instance, Slot};
    use crate::solver::solve;

    fn flight(id: &str, scheduled: u32, alpha: i64) -> Flight {
        Flight {
            id: FlightId::new(id),
            airline: "XX".into(),
            scheduled_slot: SlotId(scheduled),
            alpha: Money(alpha),
            profile: DelayProfile::Linear,
        }
    }

    fn solved(raw: Instance) -> (ValidatedInstance, MatchingResult, PriceSystem) {
        let inst = validate_instance(raw).unwrap();
        let result = solve(&build(&inst)).unwrap();
        let ps = extract_prices(&inst, &result).unwrap();
        (inst, result, ps)
    }

    fn two_flights() -> Instance {
        let mut raw =
            Instance { slot_minutes: 5, slots: Instance::uniform_slots(2, 1), flights: vec![], windows: vec![] };
        raw.push_flight(flight("f1", 0, 200), [0, 1]);
        raw.push_flight(flight("f2", 0, 100), [0, 1]);
        raw
    }

    #[test]
    fn single_full_slot_is_free() {
        let mut raw =
            Instance { slot_minutes: 5, slots: Instance::uniform_slots(1, 1), flights: vec![], windows: vec![] };
        raw.push_flight(flight("A", 0, 100), [0]);
        let (inst, result, ps) = solved(raw);
        assert_eq!(ps.prices, vec![Money(0)]);
        assert_eq!(ps.total_costs[&FlightId::new("A")], Money(0));
        assert_eq!(strong_duality_check(&inst, &result.schedule, &ps), Money(0));
    }

    #[test]
    fn underfilled_slots_are_free() {
        let mut raw =
            Instance { slot_minutes: 5, slots: Instance::uniform_slots(3, 1), flights: vec![], windows: vec![] };
        raw.push_flight(flight("A", 0, 100), [0, 1]);
        raw.push_flight(flight("B", 0, 300), [0, 1, 2]);
        let (inst, result, ps) = solved(raw);
        // B takes 0, A takes 1 (cost 100); slot 2 is empty.
        assert_eq!(ps.prices[2], Money(0));
        assert!(verify(&inst, &result.schedule, &ps).ok);
        assert_eq!(strong_duality_check(&inst, &result.schedule, &ps), Money(0));
    }

    #[test]
    fn two_flight_prices_are_minimal_admissible() {
        let (inst, result, ps) = solved(two_flights());
        // Admissible set after normalization: p1 = 0, p0 in [100, 200];
        // the extraction returns the smallest point.
        assert_eq!(ps.prices, vec![Money(100), Money(0)]);
        assert_eq!(ps.total_costs[&FlightId::new("f1")], Money(100));
        assert_eq!(ps.total_costs[&FlightId::new("f2")], Money(100));
        assert_eq!(strong_duality_check(&inst, &result.schedule, &ps), Money(0));
        let bound = alpha_bound_check(&inst, &result.schedule, &ps);
        assert_eq!(bound.pairs_checked, 1);
        assert!(bound.violations.is_empty());
    }

    #[test]
    fn corrupted_price_breaks_minimum_cost() {
        let (inst, result, mut ps) = solved(two_flights());
        ps.prices[0] += Money(1);
        let report = verify(&inst, &result.schedule, &ps);
        assert!(!report.ok);
        assert!(report.has(Condition::MinimumCost));
    }

    #[test]
    fn zero_prices_cannot_support_a_contested_slot() {
        let (inst, result, _) = solved(two_flights());
        let zero = PriceSystem { prices: vec![Money(0); 2], total_costs: cheapest_totals(&inst, &[Money(0); 2]) };
        let report = verify(&inst, &result.schedule, &zero);
        assert!(report.violations.iter().any(|v| matches!(v,
            Violation::TotalCostMismatch { flight, .. } if flight.as_str() == "f2")));
    }

    #[test]
    fn priced_underfilled_slot_breaks_free_disposal() {
        let mut raw =
            Instance { slot_minutes: 5, slots: Instance::uniform_slots(2, 1), flights: vec![], windows: vec![] };
        raw.push_flight(flight("A", 0, 100), [0, 1]);
        let (inst, result, mut ps) = solved(raw);
        ps.prices[1] = Money(5);
        let report = verify(&inst, &result.schedule, &ps);
        assert!(report.has(Condition::FreeUnderfilled));
    }

    #[test]
    fn price_shift_keeps_minimum_cost_but_breaks_anchor() {
        let (inst, result, ps) = solved(two_flights());
        let shifted = PriceSystem {
            prices: ps.prices.iter().map(|&p| p + Money(40)).collect(),
            total_costs: ps.total_costs.iter().map(|(f, &t)| (f.clone(), t + Money(40))).collect(),
        };
        let report = verify(&inst, &result.schedule, &shifted);
        assert!(!report.has(Condition::MinimumCost));
        assert_eq!(report.violations, vec![Violation::NoFreeSlot { min_price: Money(40) }]);
    }

    #[test]
    fn suboptimal_schedule_shows_a_negative_gap() {
        let (inst, result, ps) = solved(two_flights());
        let swapped: Schedule = result.schedule.assignment.iter().map(|(f, s)| (f.clone(), SlotId(1 - s.0))).collect();
        let gap = strong_duality_check(&inst, &swapped, &ps);
        assert!(gap < Money::ZERO, "dual objective must sit below a suboptimal primal, got {gap}");
        assert_eq!(gap, Money(-100));
    }

    #[test]
    fn empty_market() {
        let raw = Instance { slot_minutes: 5, slots: vec![], flights: vec![], windows: vec![] };
        let (inst, result, ps) = solved(raw);
        assert_eq!(strong_duality_check(&inst, &result.schedule, &ps), Money(0));
        assert!(verify(&inst, &result.schedule, &ps).ok);
    }

    #[test]
    fn alone_in_window_is_vacuous() {
        let mut raw =
            Instance { slot_minutes: 5, slots: Instance::uniform_slots(2, 1), flights: vec![], windows: vec![] };
        raw.push_flight(flight("A", 0, 100), [0]);
        let (inst, result, ps) = solved(raw);
        assert_eq!(alpha_bound_check(&inst, &result.schedule, &ps).pairs_checked, 0);
    }

    #[test]
    fn chained_displacement_prices_exceed_single_edge_costs() {
        // C must take 0, B must take 1, A must take 2: prices climb along
        // the chain of forced displacements.
        let mut raw =
            Instance { slot_minutes: 5, slots: Instance::uniform_slots(3, 1), flights: vec![], windows: vec![] };
        raw.push_flight(flight("A", 1, 100), [1, 2]);
        raw.push_flight(flight("B", 0, 100), [0, 1]);
        raw.push_flight(flight("C", 0, 100), [0]);
        let (inst, result, ps) = solved(raw);
        assert_eq!(ps.prices, vec![Money(200), Money(100), Money(0)]);
        assert!(verify(&inst, &result.schedule, &ps).ok);
    }

    #[test]
    fn potential_prices_also_verify() {
        let mut raw = Instance {
            slot_minutes: 5,
            slots: vec![
                Slot { id: SlotId(0), capacity: 1 },
                Slot { id: SlotId(1), capacity: 2 },
                Slot { id: SlotId(2), capacity: 1 },
            ],
            flights: vec![],
            windows: vec![],
        };
        raw.push_flight(flight("A", 0, 100), [0, 1, 2]);
        raw.push_flight(flight("B", 0, 300), [0, 1]);
        raw.push_flight(flight("C", 1, 50), [1, 2]);
        let (inst, result, _) = solved(raw);
        let ps = prices_from_potentials(&inst, &result);
        assert!(verify(&inst, &result.schedule, &ps).ok);
        assert_eq!(strong_duality_check(&inst, &result.schedule, &ps), Money(0));
    }
}
