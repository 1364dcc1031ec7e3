//! Domain types shared by every stage of the market pipeline.
//!
//! Time is measured in whole slots and money in integer minor units, so
//! every cost, price and duality identity in the crate is checked exactly.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::delay::{self, DelayProfile, ProfileError};

/// Largest delay cost a single flight may carry in any slot of its window.
///
/// Keeps every sum over a day's flights (and every dual price, which is
/// bounded by a chain of such costs) comfortably inside `i64`.
pub const MAX_DELAY_COST: Money = Money(1 << 40);

/// Signed amount in minor currency units (cents).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Money(pub i64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub fn cents(self) -> i64 {
        self.0
    }

    pub fn checked_mul(self, rhs: i64) -> Option<Money> {
        self.0.checked_mul(rhs).map(Money)
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}c", self.0)
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl SubAssign for Money {
    fn sub_assign(&mut self, rhs: Money) {
        self.0 -= rhs.0;
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl Mul<i64> for Money {
    type Output = Money;
    fn mul(self, rhs: i64) -> Money {
        Money(self.0 * rhs)
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, Add::add)
    }
}

/// Position of a slot in the day's slot sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SlotId(pub u32);

impl SlotId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(index: usize) -> SlotId {
        SlotId(u32::try_from(index).expect("slot index exceeds u32"))
    }
}

impl fmt::Display for SlotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "slot {}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FlightId(pub String);

impl FlightId {
    pub fn new(id: impl Into<String>) -> Self {
        FlightId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for FlightId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Slot {
    pub id: SlotId,
    /// Landings admitted in this slot. Zero models a closure.
    pub capacity: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flight {
    pub id: FlightId,
    pub airline: String,
    pub scheduled_slot: SlotId,
    /// Criticality factor: money per slot of (effective) delay.
    pub alpha: Money,
    pub profile: DelayProfile,
}

/// Slots a flight may land in, in strictly increasing order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    pub flight: FlightId,
    pub slots: Vec<SlotId>,
}

impl Window {
    pub fn contains(&self, slot: SlotId) -> bool {
        self.slots.binary_search(&slot).is_ok()
    }
}

/// A raw market instance. `windows[k]` belongs to `flights[k]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub slot_minutes: u32,
    pub slots: Vec<Slot>,
    pub flights: Vec<Flight>,
    pub windows: Vec<Window>,
}

impl Instance {
    /// Builds `count` consecutive slots sharing one capacity.
    pub fn uniform_slots(count: usize, capacity: u32) -> Vec<Slot> {
        (0..count).map(|i| Slot { id: SlotId::from_index(i), capacity }).collect()
    }

    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn total_capacity(&self) -> u64 {
        self.slots.iter().map(|s| u64::from(s.capacity)).sum()
    }

    /// Appends a flight together with its window.
    pub fn push_flight(&mut self, flight: Flight, window: impl IntoIterator<Item = u32>) {
        let slots = window.into_iter().map(SlotId).collect();
        self.windows.push(Window { flight: flight.id.clone(), slots });
        self.flights.push(flight);
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("slot_minutes must be positive")]
    ZeroSlotMinutes,
    #[error("slot at position {position} carries id {found}, expected {position}")]
    SlotOutOfSequence { position: usize, found: SlotId },
    #[error("{windows} windows supplied for {flights} flights")]
    WindowCountMismatch { flights: usize, windows: usize },
    #[error("window at position {position} belongs to {found}, expected {expected}")]
    WindowFlightMismatch { position: usize, expected: FlightId, found: FlightId },
    #[error("duplicate flight id {0}")]
    DuplicateFlightId(FlightId),
    #[error("flight {flight} has negative criticality factor {alpha}")]
    NegativeAlpha { flight: FlightId, alpha: Money },
    #[error("flight {flight} references {slot}, which does not exist")]
    BadSlotRef { flight: FlightId, slot: SlotId },
    #[error("flight {flight} has a malformed delay profile: {reason}")]
    BadProfile { flight: FlightId, reason: ProfileError },
    #[error("flight {0} has a decreasing delay profile")]
    NonMonotoneProfile(FlightId),
    #[error("flight {0} has an empty landing window")]
    EmptyWindow(FlightId),
    #[error("window of flight {flight} is not strictly increasing at {slot}")]
    UnorderedWindow { flight: FlightId, slot: SlotId },
    #[error("delay cost of flight {flight} at {slot} exceeds {limit}")]
    CostOverflow { flight: FlightId, slot: SlotId, limit: Money },
    #[error("total capacity {total_capacity} is below the number of flights {num_flights}")]
    CapacityShortfall { total_capacity: u64, num_flights: usize },
}

/// An instance whose invariants have been checked, with delay costs of
/// every window slot precomputed.
#[derive(Clone, Debug)]
pub struct ValidatedInstance {
    inner: Instance,
    index: HashMap<FlightId, usize>,
    window_costs: Vec<Vec<Money>>,
}

impl PartialEq for ValidatedInstance {
    fn eq(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

impl ValidatedInstance {
    pub fn instance(&self) -> &Instance {
        &self.inner
    }

    pub fn into_inner(self) -> Instance {
        self.inner
    }

    pub fn slots(&self) -> &[Slot] {
        &self.inner.slots
    }

    pub fn flights(&self) -> &[Flight] {
        &self.inner.flights
    }

    pub fn num_slots(&self) -> usize {
        self.inner.slots.len()
    }

    pub fn num_flights(&self) -> usize {
        self.inner.flights.len()
    }

    pub fn capacity(&self, slot: SlotId) -> u32 {
        self.inner.slots[slot.index()].capacity
    }

    pub fn total_capacity(&self) -> u64 {
        self.inner.total_capacity()
    }

    pub fn slot_minutes(&self) -> u32 {
        self.inner.slot_minutes
    }

    pub fn window(&self, flight: usize) -> &Window {
        &self.inner.windows[flight]
    }

    /// Delay costs aligned with `window(flight).slots`.
    pub fn window_costs(&self, flight: usize) -> &[Money] {
        &self.window_costs[flight]
    }

    /// Delay cost of `flight` landing in `slot`, if the slot is in its window.
    pub fn cost_in_window(&self, flight: usize, slot: SlotId) -> Option<Money> {
        let window = &self.inner.windows[flight].slots;
        window.binary_search(&slot).ok().map(|k| self.window_costs[flight][k])
    }

    pub fn flight_index(&self, id: &FlightId) -> Option<usize> {
        self.index.get(id).copied()
    }
}

pub fn validate_instance(raw: Instance) -> Result<ValidatedInstance, ValidationError> {
    if raw.slot_minutes == 0 {
        return Err(ValidationError::ZeroSlotMinutes);
    }
    for (position, slot) in raw.slots.iter().enumerate() {
        if slot.id.index() != position {
            return Err(ValidationError::SlotOutOfSequence { position, found: slot.id });
        }
    }
    if raw.windows.len() != raw.flights.len() {
        return Err(ValidationError::WindowCountMismatch { flights: raw.flights.len(), windows: raw.windows.len() });
    }

    let num_slots = raw.slots.len();
    let mut index = HashMap::with_capacity(raw.flights.len());
    let mut window_costs = Vec::with_capacity(raw.flights.len());
    for (position, (flight, window)) in raw.flights.iter().zip(&raw.windows).enumerate() {
        if window.flight != flight.id {
            return Err(ValidationError::WindowFlightMismatch {
                position,
                expected: flight.id.clone(),
                found: window.flight.clone(),
            });
        }
        if index.insert(flight.id.clone(), position).is_some() {
            return Err(ValidationError::DuplicateFlightId(flight.id.clone()));
        }
        if flight.alpha < Money::ZERO {
            return Err(ValidationError::NegativeAlpha { flight: flight.id.clone(), alpha: flight.alpha });
        }
        if flight.scheduled_slot.index() >= num_slots {
            return Err(ValidationError::BadSlotRef { flight: flight.id.clone(), slot: flight.scheduled_slot });
        }
        match flight.profile.check() {
            Ok(()) => {}
            Err(ProfileError::Decreasing { .. }) => return Err(ValidationError::NonMonotoneProfile(flight.id.clone())),
            Err(reason) => return Err(ValidationError::BadProfile { flight: flight.id.clone(), reason }),
        }
        if window.slots.is_empty() {
            return Err(ValidationError::EmptyWindow(flight.id.clone()));
        }
        let mut costs = Vec::with_capacity(window.slots.len());
        for (k, &slot) in window.slots.iter().enumerate() {
            if slot.index() >= num_slots {
                return Err(ValidationError::BadSlotRef { flight: flight.id.clone(), slot });
            }
            if k > 0 && window.slots[k - 1] >= slot {
                return Err(ValidationError::UnorderedWindow { flight: flight.id.clone(), slot });
            }
            let raw_delay = delay::raw_delay(flight, slot);
            let cost =
                delay::checked_delay_cost(flight, raw_delay).filter(|c| *c <= MAX_DELAY_COST).ok_or_else(|| {
                    ValidationError::CostOverflow { flight: flight.id.clone(), slot, limit: MAX_DELAY_COST }
                })?;
            costs.push(cost);
        }
        window_costs.push(costs);
    }

    let total_capacity = raw.total_capacity();
    if total_capacity < raw.flights.len() as u64 {
        return Err(ValidationError::CapacityShortfall { total_capacity, num_flights: raw.flights.len() });
    }

    Ok(ValidatedInstance { inner: raw, index, window_costs })
}

/// An integral assignment of flights to slots.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schedule {
    pub assignment: BTreeMap<FlightId, SlotId>,
}

impl Schedule {
    pub fn slot_of(&self, flight: &FlightId) -> Option<SlotId> {
        self.assignment.get(flight).copied()
    }

    /// Number of flights landing in each slot.
    pub fn occupancy(&self, num_slots: usize) -> Vec<u32> {
        let mut occupancy = vec![0u32; num_slots];
        for slot in self.assignment.values() {
            if let Some(count) = occupancy.get_mut(slot.index()) {
                *count += 1;
            }
        }
        occupancy
    }
}

impl FromIterator<(FlightId, SlotId)> for Schedule {
    fn from_iter<I: IntoIterator<Item = (FlightId, SlotId)>>(iter: I) -> Self {
        Schedule { assignment: iter.into_iter().collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("flight {0} is not scheduled")]
    Unscheduled(FlightId),
    #[error("schedule names unknown flight {0}")]
    UnknownFlight(FlightId),
    #[error("flight {flight} is assigned {slot}, outside its window")]
    OutsideWindow { flight: FlightId, slot: SlotId },
    #[error("{slot} holds {occupancy} flights but has capacity {capacity}")]
    OverCapacity { slot: SlotId, occupancy: u32, capacity: u32 },
}

/// Checks the schedule invariants, reporting every violation found.
pub fn check_schedule(inst: &ValidatedInstance, sched: &Schedule) -> Vec<ScheduleError> {
    let mut errors = Vec::new();
    for id in sched.assignment.keys() {
        if inst.flight_index(id).is_none() {
            errors.push(ScheduleError::UnknownFlight(id.clone()));
        }
    }
    for (k, flight) in inst.flights().iter().enumerate() {
        match sched.slot_of(&flight.id) {
            None => errors.push(ScheduleError::Unscheduled(flight.id.clone())),
            Some(slot) if !inst.window(k).contains(slot) => {
                errors.push(ScheduleError::OutsideWindow { flight: flight.id.clone(), slot })
            }
            Some(_) => {}
        }
    }
    let occupancy = sched.occupancy(inst.num_slots());
    for (slot, (&occ, s)) in occupancy.iter().zip(inst.slots()).enumerate() {
        if occ > s.capacity {
            errors.push(ScheduleError::OverCapacity {
                slot: SlotId::from_index(slot),
                occupancy: occ,
                capacity: s.capacity,
            });
        }
    }
    errors
}

/// Total dollar value of the delays a schedule imposes.
///
/// Panics if a flight is unscheduled or lands outside its window; callers
/// are expected to pass schedules satisfying [`check_schedule`].
pub fn schedule_cost(inst: &ValidatedInstance, sched: &Schedule) -> Money {
    inst.flights()
        .iter()
        .enumerate()
        .map(|(k, flight)| {
            let slot = sched
                .slot_of(&flight.id)
                .unwrap_or_else(|| panic!("contract violation: flight {} unscheduled", flight.id));
            inst.cost_in_window(k, slot).unwrap_or_else(|| {
                panic!("contract violation: flight {} assigned {slot} outside its window", flight.id)
            })
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flight(id: &str, scheduled: u32, alpha: i64) -> Flight {
        Flight {
            id: FlightId::new(id),
            airline: "XX".into(),
            scheduled_slot: SlotId(scheduled),
            alpha: Money(alpha),
            profile: DelayProfile::Linear,
        }
    }

    fn instance(slots: Vec<Slot>) -> Instance {
        Instance { slot_minutes: 5, slots, flights: vec![], windows: vec![] }
    }

    #[test]
    fn smallest_feasible_instance() {
        let mut raw = instance(Instance::uniform_slots(1, 1));
        raw.push_flight(flight("A", 0, 100), [0]);
        let inst = validate_instance(raw).unwrap();
        assert_eq!(inst.num_flights(), 1);
    }

    #[test]
    fn capacity_shortfall() {
        let mut raw = instance(Instance::uniform_slots(1, 1));
        raw.push_flight(flight("A", 0, 100), [0]);
        raw.push_flight(flight("B", 0, 100), [0]);
        assert_eq!(
            validate_instance(raw),
            Err(ValidationError::CapacityShortfall { total_capacity: 1, num_flights: 2 })
        );
    }

    #[test]
    fn empty_window() {
        let mut raw = instance(Instance::uniform_slots(2, 1));
        raw.push_flight(flight("A", 0, 100), []);
        assert_eq!(validate_instance(raw), Err(ValidationError::EmptyWindow(FlightId::new("A"))));
    }

    #[test]
    fn duplicate_ids() {
        let mut raw = instance(Instance::uniform_slots(2, 1));
        raw.push_flight(flight("A", 0, 100), [0]);
        raw.push_flight(flight("A", 1, 100), [1]);
        assert_eq!(validate_instance(raw), Err(ValidationError::DuplicateFlightId(FlightId::new("A"))));
    }

    #[test]
    fn bad_slot_refs() {
        let mut raw = instance(Instance::uniform_slots(2, 1));
        raw.push_flight(flight("A", 0, 100), [0, 2]);
        assert_eq!(
            validate_instance(raw),
            Err(ValidationError::BadSlotRef { flight: FlightId::new("A"), slot: SlotId(2) })
        );

        let mut raw = instance(Instance::uniform_slots(2, 1));
        raw.push_flight(flight("A", 7, 100), [0]);
        assert!(matches!(validate_instance(raw), Err(ValidationError::BadSlotRef { .. })));
    }

    #[test]
    fn non_monotone_profile() {
        let mut raw = instance(Instance::uniform_slots(3, 1));
        let mut f = flight("A", 0, 100);
        f.profile = DelayProfile::piecewise([(0, 0), (1, 5), (2, 3)]);
        raw.push_flight(f, [0, 1, 2]);
        assert_eq!(validate_instance(raw), Err(ValidationError::NonMonotoneProfile(FlightId::new("A"))));
    }

    #[test]
    fn unordered_window() {
        let mut raw = instance(Instance::uniform_slots(3, 1));
        raw.push_flight(flight("A", 0, 100), [1, 1]);
        assert!(matches!(validate_instance(raw), Err(ValidationError::UnorderedWindow { .. })));
    }

    #[test]
    fn negative_alpha_and_overflow() {
        let mut raw = instance(Instance::uniform_slots(2, 1));
        raw.push_flight(flight("A", 0, -1), [0]);
        assert!(matches!(validate_instance(raw), Err(ValidationError::NegativeAlpha { .. })));

        let mut raw = instance(Instance::uniform_slots(2, 1));
        raw.push_flight(flight("A", 0, i64::MAX / 2), [0, 1]);
        assert!(matches!(validate_instance(raw), Err(ValidationError::CostOverflow { .. })));
    }

    #[test]
    fn zero_capacity_slots_are_legal() {
        let mut raw = instance(vec![Slot { id: SlotId(0), capacity: 0 }, Slot { id: SlotId(1), capacity: 1 }]);
        raw.push_flight(flight("A", 0, 100), [0, 1]);
        assert!(validate_instance(raw).is_ok());
    }

    #[test]
    fn validation_is_idempotent() {
        let mut raw = instance(Instance::uniform_slots(3, 2));
        raw.push_flight(flight("A", 0, 100), [0, 1]);
        raw.push_flight(flight("B", 1, 0), [1, 2]);
        let once = validate_instance(raw.clone()).unwrap();
        let twice = validate_instance(once.clone().into_inner()).unwrap();
        assert_eq!(once, twice);
        assert_eq!(twice.into_inner(), raw);
    }

    #[test]
    fn cost_of_schedules() {
        let mut raw = instance(Instance::uniform_slots(4, 1));
        raw.push_flight(flight("A", 0, 300), [0, 1, 2, 3]);
        let inst = validate_instance(raw).unwrap();

        let on_time: Schedule = [(FlightId::new("A"), SlotId(0))].into_iter().collect();
        assert_eq!(schedule_cost(&inst, &on_time), Money(0));
        let late: Schedule = [(FlightId::new("A"), SlotId(2))].into_iter().collect();
        assert_eq!(schedule_cost(&inst, &late), Money(600));
    }

    #[test]
    fn schedule_checks_report_each_violation() {
        let mut raw = instance(Instance::uniform_slots(3, 1));
        raw.push_flight(flight("A", 0, 1), [0]);
        raw.push_flight(flight("B", 0, 1), [0, 1]);
        raw.push_flight(flight("C", 0, 1), [1]);
        let inst = validate_instance(raw).unwrap();
        let sched: Schedule =
            [(FlightId::new("A"), SlotId(1)), (FlightId::new("B"), SlotId(1)), (FlightId::new("Z"), SlotId(0))]
                .into_iter()
                .collect();
        let errors = check_schedule(&inst, &sched);
        assert!(errors.contains(&ScheduleError::UnknownFlight(FlightId::new("Z"))));
        assert!(errors.contains(&ScheduleError::Unscheduled(FlightId::new("C"))));
        assert!(errors.contains(&ScheduleError::OutsideWindow { flight: FlightId::new("A"), slot: SlotId(1) }));
        assert!(errors.contains(&ScheduleError::OverCapacity { slot: SlotId(1), occupancy: 2, capacity: 1 }));
    }
}
