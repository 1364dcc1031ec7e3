//! Delay profiles: how many "units" of delay a flight experiences for a
//! given number of slots late. The linear profile counts slots directly;
//! piecewise profiles let an airline make delay beyond some point
//! disproportionately expensive.

use thiserror::Error;

use crate::model::{Flight, Money, SlotId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Breakpoint {
    pub delay_slots: u32,
    pub value: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum DelayProfile {
    #[default]
    Linear,
    /// Starts at `(0, 0)`, strictly increasing in `delay_slots`,
    /// nondecreasing in `value`; at least two breakpoints.
    Piecewise(Vec<Breakpoint>),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ProfileError {
    #[error("piecewise profile needs at least two breakpoints")]
    TooFewBreakpoints,
    #[error("piecewise profile must start at (0, 0)")]
    MissingOrigin,
    #[error("breakpoint delays must strictly increase (at breakpoint {index})")]
    DelaysNotIncreasing { index: usize },
    #[error("profile value decreases at breakpoint {index}")]
    Decreasing { index: usize },
}

impl DelayProfile {
    pub fn piecewise(points: impl IntoIterator<Item = (u32, u64)>) -> Self {
        DelayProfile::Piecewise(
            points.into_iter().map(|(delay_slots, value)| Breakpoint { delay_slots, value }).collect(),
        )
    }

    pub fn check(&self) -> Result<(), ProfileError> {
        let DelayProfile::Piecewise(points) = self else {
            return Ok(());
        };
        if points.len() < 2 {
            return Err(ProfileError::TooFewBreakpoints);
        }
        if points[0] != (Breakpoint { delay_slots: 0, value: 0 }) {
            return Err(ProfileError::MissingOrigin);
        }
        for (index, pair) in points.windows(2).enumerate() {
            if pair[1].delay_slots <= pair[0].delay_slots {
                return Err(ProfileError::DelaysNotIncreasing { index: index + 1 });
            }
            if pair[1].value < pair[0].value {
                return Err(ProfileError::Decreasing { index: index + 1 });
            }
        }
        Ok(())
    }
}

/// Slots late relative to the scheduled arrival; early landings count as zero.
pub fn raw_delay(flight: &Flight, slot: SlotId) -> u32 {
    slot.0.saturating_sub(flight.scheduled_slot.0)
}

/// Effective delay units for `raw` slots late.
///
/// Between breakpoints `(a, va)` and `(b, vb)` the value at `a + k` is
/// `va + floor(k * (vb - va) / (b - a))`; past the last breakpoint the last
/// segment's slope continues. Saturates at `u64::MAX`, which only valid
/// profiles with absurd values can reach.
pub fn effective_delay(profile: &DelayProfile, raw: u32) -> u64 {
    checked_effective_delay(profile, raw).unwrap_or(u64::MAX)
}

fn checked_effective_delay(profile: &DelayProfile, raw: u32) -> Option<u64> {
    let points = match profile {
        DelayProfile::Linear => return Some(u64::from(raw)),
        DelayProfile::Piecewise(points) => points,
    };
    debug_assert!(profile.check().is_ok(), "effective_delay on invalid profile");
    // Segment whose left end is the last breakpoint at or before `raw`,
    // falling back to the final segment for extrapolation.
    let upper = points.partition_point(|p| p.delay_slots <= raw).clamp(1, points.len() - 1);
    let (left, right) = (points[upper - 1], points[upper]);
    let (anchor, offset) =
        if raw >= right.delay_slots { (right, raw - right.delay_slots) } else { (left, raw - left.delay_slots) };
    let rise = u128::from(right.value - left.value);
    let run = u128::from(right.delay_slots - left.delay_slots);
    let step = u128::from(offset) * rise / run;
    u64::try_from(u128::from(anchor.value) + step).ok()
}

/// `alpha * effective_delay`, or `None` when the product leaves `i64`.
pub(crate) fn checked_delay_cost(flight: &Flight, raw: u32) -> Option<Money> {
    let units = i64::try_from(checked_effective_delay(&flight.profile, raw)?).ok()?;
    flight.alpha.checked_mul(units)
}

/// Cost to the airline of `flight` landing in `slot`.
pub fn delay_cost(flight: &Flight, slot: SlotId) -> Money {
    checked_delay_cost(flight, raw_delay(flight, slot))
        .unwrap_or_else(|| panic!("delay cost of flight {} at {slot} overflows", flight.id))
}
