//! Market clearing for airport landing slots.
//!
//! Airlines attach a criticality factor (money per slot of delay) and
//! optionally a delay profile to each flight; the airport publishes slot
//! capacities and landing windows. The engine computes a minimum-cost
//! landing schedule together with per-slot landing prices such that every
//! flight lands in a slot minimizing its price plus delay cost, and slots
//! with spare room are free.
//!
//! ```
//! use slot_market::{model::*, delay::DelayProfile, pipeline::{clear, Outcome}};
//!
//! let mut inst = Instance { slot_minutes: 5, slots: Instance::uniform_slots(2, 1), flights: vec![], windows: vec![] };
//! for (id, alpha) in [("f1", 200), ("f2", 100)] {
//!     let flight = Flight {
//!         id: FlightId::new(id),
//!         airline: "AAL".into(),
//!         scheduled_slot: SlotId(0),
//!         alpha: Money(alpha),
//!         profile: DelayProfile::Linear,
//!     };
//!     inst.push_flight(flight, [0, 1]);
//! }
//! let Outcome::Cleared(cleared) = clear(inst).unwrap() else { panic!() };
//! assert_eq!(cleared.result.flow_cost, Money(100));
//! assert_eq!(cleared.prices.prices, vec![Money(100), Money(0)]);
//! ```

pub mod delay;
pub mod equilibrium;
pub mod generate;
pub mod io;
pub mod matching_graph;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod solver;
pub mod windows;

pub use equilibrium::{alpha_bound_check, extract_prices, strong_duality_check, verify, PriceSystem};
pub use matching_graph::build;
pub use model::{schedule_cost, validate_instance, Instance, Money, Schedule, SlotId, ValidatedInstance};
pub use solver::{solve, InfeasibilityCertificate, MatchingResult};
