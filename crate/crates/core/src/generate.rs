//! Seeded scenario generator.
//!
//! Same configuration, same bytes: all shaping uses integer arithmetic
//! and a ChaCha stream seeded from the configuration.

use std::num::NonZeroU32;
use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::delay::DelayProfile;
use crate::model::{Flight, FlightId, Instance, Money, Slot, SlotId};
use crate::windows::{default_windows, WindowPolicy};

const AIRLINES: [&str; 6] = ["AAL", "DAL", "UAL", "SWA", "JBU", "ASA"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CapacityProfile {
    /// Same capacity in every slot.
    Uniform,
    /// Two arrival banks; capacity follows the banks, smoothed over a
    /// window length, so peaks congest without becoming infeasible.
    Peaked,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenConfig {
    pub seed: u64,
    pub flights: usize,
    pub slots: usize,
    pub capacity_profile: CapacityProfile,
    /// Inclusive range of criticality factors, in cents per slot.
    pub alpha_range: (i64, i64),
    /// Percentage of flights given a piecewise profile.
    pub pct_piecewise: u8,
    pub window: WindowPolicy,
    pub slot_minutes: u32,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            flights: 100,
            slots: 96,
            capacity_profile: CapacityProfile::Uniform,
            alpha_range: (0, 500),
            pct_piecewise: 0,
            window: WindowPolicy::new(NonZeroU32::new(12).unwrap(), 0),
            slot_minutes: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("at least one slot is required")]
    NoSlots,
    #[error("alpha range {0}..{1} is empty or negative")]
    BadAlphaRange(i64, i64),
    #[error("piecewise percentage {0} exceeds 100")]
    BadPercentage(u8),
    #[error("slot_minutes must be positive")]
    ZeroSlotMinutes,
}

/// Relative arrival intensity of slot `s` out of `span`: a flat base plus
/// two triangular banks at 30% and 70% of the span.
fn bank_weight(s: usize, span: usize, profile: CapacityProfile) -> u64 {
    match profile {
        CapacityProfile::Uniform => 1,
        CapacityProfile::Peaked => {
            let width = (span / 10).max(1) as i64;
            let bump = |centre: usize| (width - (s as i64 - centre as i64).abs()).max(0) as u64;
            4 * width as u64 + 12 * (bump(span * 3 / 10) + bump(span * 7 / 10))
        }
    }
}

pub fn generate(cfg: &GenConfig) -> Result<Instance, GenError> {
    let (lo, hi) = cfg.alpha_range;
    if cfg.slots == 0 {
        return Err(GenError::NoSlots);
    }
    if lo < 0 || lo > hi {
        return Err(GenError::BadAlphaRange(lo, hi));
    }
    if cfg.pct_piecewise > 100 {
        return Err(GenError::BadPercentage(cfg.pct_piecewise));
    }
    if cfg.slot_minutes == 0 {
        return Err(GenError::ZeroSlotMinutes);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let window_len = cfg.window.base_length.get() as usize;
    // Scheduled arrivals leave room for a full window before day end.
    let span = cfg.slots.saturating_sub(window_len.saturating_sub(1)).max(1);
    let weights: Vec<u64> = (0..span).map(|s| bank_weight(s, span, cfg.capacity_profile)).collect();
    let weight_total: u64 = weights.iter().sum();

    // Capacity at slot s serves arrivals from the previous window length,
    // so it tracks the mean intensity over that stretch, with 25% headroom.
    let capacity: Vec<u32> = (0..cfg.slots)
        .map(|s| {
            let from = s.saturating_sub(window_len - 1);
            let covered: u64 = weights.iter().take(s + 1).skip(from).sum();
            let numerator = 5 * cfg.flights as u64 * covered;
            let denominator = 4 * weight_total * window_len as u64;
            numerator.div_ceil(denominator) as u32
        })
        .collect();
    let mut slots: Vec<Slot> =
        capacity.iter().enumerate().map(|(s, &c)| Slot { id: SlotId::from_index(s), capacity: c }).collect();
    let mut total: u64 = capacity.iter().map(|&c| u64::from(c)).sum();
    // Top up from the end of the day until total capacity covers demand.
    let mut s = cfg.slots;
    while total < cfg.flights as u64 {
        s = if s == 0 { cfg.slots - 1 } else { s - 1 };
        slots[s].capacity += 1;
        total += 1;
    }

    let width = cfg.flights.max(1).to_string().len().max(4);
    let mut inst = Instance { slot_minutes: cfg.slot_minutes, slots, flights: vec![], windows: vec![] };
    for k in 0..cfg.flights {
        let mut draw = rng.random_range(0..weight_total);
        let scheduled = weights
            .iter()
            .position(|&w| {
                if draw < w {
                    true
                } else {
                    draw -= w;
                    false
                }
            })
            .expect("draw below total weight");
        let airline = AIRLINES[rng.random_range(0..AIRLINES.len())];
        let alpha = rng.random_range(lo..=hi);
        let profile = if rng.random_range(0..100u8) < cfg.pct_piecewise {
            let knee = rng.random_range(1..=(window_len as u32 / 2).max(1));
            let steepness = rng.random_range(2..=10u64);
            DelayProfile::piecewise([(0, 0), (knee, u64::from(knee)), (knee + 1, u64::from(knee) + steepness)])
        } else {
            DelayProfile::Linear
        };
        inst.flights.push(Flight {
            id: FlightId::new(format!("F{k:0width$}")),
            airline: airline.to_string(),
            scheduled_slot: SlotId::from_index(scheduled),
            alpha: Money(alpha),
            profile,
        });
    }
    Ok(default_windows(inst, cfg.window))
}

/// Shape of the small randomized markets used for exhaustive checking.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmallConfig {
    pub flights: RangeInclusive<usize>,
    pub slots: RangeInclusive<usize>,
    pub capacity: RangeInclusive<u32>,
    pub alpha: RangeInclusive<i64>,
    pub pct_piecewise: u8,
    pub window_len: RangeInclusive<u32>,
}

impl Default for SmallConfig {
    fn default() -> Self {
        SmallConfig {
            flights: 3..=8,
            slots: 3..=8,
            capacity: 1..=3,
            alpha: 0..=500,
            pct_piecewise: 25,
            window_len: 1..=4,
        }
    }
}

/// A small random market with explicit windows. The flight count is
/// capped at the drawn total capacity so the instance always validates.
pub fn random_small(seed: u64, cfg: &SmallConfig) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let num_slots = rng.random_range(cfg.slots.clone());
    let slots: Vec<Slot> = (0..num_slots)
        .map(|s| Slot { id: SlotId::from_index(s), capacity: rng.random_range(cfg.capacity.clone()) })
        .collect();
    let total: u64 = slots.iter().map(|s| u64::from(s.capacity)).sum();
    let flights = rng.random_range(cfg.flights.clone()).min(total as usize);
    let mut inst = Instance { slot_minutes: 5, slots, flights: vec![], windows: vec![] };
    for k in 0..flights {
        let scheduled = rng.random_range(0..num_slots as u32);
        let start = scheduled.saturating_sub(rng.random_range(0..=1));
        let len = rng.random_range(cfg.window_len.clone());
        let end = (start + len).min(num_slots as u32);
        let profile = if rng.random_range(0..100u8) < cfg.pct_piecewise {
            random_profile(&mut rng)
        } else {
            DelayProfile::Linear
        };
        let flight = Flight {
            id: FlightId::new(format!("F{k}")),
            airline: AIRLINES[k % AIRLINES.len()].to_string(),
            scheduled_slot: SlotId(scheduled),
            alpha: Money(rng.random_range(cfg.alpha.clone())),
            profile,
        };
        inst.push_flight(flight, start..end.max(start + 1).min(num_slots as u32));
    }
    inst
}

fn random_profile(rng: &mut ChaCha8Rng) -> DelayProfile {
    let mut points = vec![(0u32, 0u64)];
    for _ in 0..rng.random_range(1..=3) {
        let (x, y) = *points.last().expect("origin present");
        points.push((x + rng.random_range(1..=3), y + rng.random_range(0..=12)));
    }
    DelayProfile::piecewise(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_instance;

    #[test]
    fn same_seed_same_instance() {
        let cfg = GenConfig { seed: 7, pct_piecewise: 40, ..GenConfig::default() };
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        let other = GenConfig { seed: 8, ..cfg.clone() };
        assert_ne!(generate(&cfg).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn capacity_covers_flights() {
        for profile in [CapacityProfile::Uniform, CapacityProfile::Peaked] {
            for (flights, slots) in [(3, 3), (8, 3), (50, 5), (1000, 288), (0, 4)] {
                let cfg = GenConfig { flights, slots, capacity_profile: profile, ..GenConfig::default() };
                let inst = generate(&cfg).unwrap();
                assert!(inst.total_capacity() >= flights as u64);
                validate_instance(inst).unwrap();
            }
        }
    }

    #[test]
    fn all_piecewise_profiles_are_valid() {
        let cfg = GenConfig { seed: 3, pct_piecewise: 100, ..GenConfig::default() };
        let inst = generate(&cfg).unwrap();
        assert!(inst.flights.iter().all(|f| matches!(f.profile, DelayProfile::Piecewise(_))));
        assert!(inst.flights.iter().all(|f| f.profile.check().is_ok()));
    }

    #[test]
    fn small_instances_validate() {
        for seed in 0..300 {
            let inst = random_small(seed, &SmallConfig::default());
            assert!((3..=8).contains(&inst.num_slots()));
            assert!(inst.flights.len() >= 3);
            validate_instance(inst).unwrap();
        }
    }

    #[test]
    fn flag_validation() {
        let base = GenConfig::default();
        assert_eq!(generate(&GenConfig { slots: 0, ..base.clone() }), Err(GenError::NoSlots));
        assert_eq!(generate(&GenConfig { alpha_range: (5, 1), ..base.clone() }), Err(GenError::BadAlphaRange(5, 1)));
        assert_eq!(generate(&GenConfig { pct_piecewise: 101, ..base }), Err(GenError::BadPercentage(101)));
    }
}
