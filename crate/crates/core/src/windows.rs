//! Landing-window policy: default windows from scheduled arrivals, the
//! uniform slide applied when the whole airport is running late, and
//! stretching when capacity drops.
//!
//! All transformations clip to the day `[0, T-1]`. A window clipped to
//! nothing is left empty and rejected later by validation.

use std::num::NonZeroU32;

use crate::model::{Instance, SlotId, Window};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowPolicy {
    pub base_length: NonZeroU32,
    /// Slots before the scheduled arrival that the window admits.
    pub pre_arrival: u32,
}

impl WindowPolicy {
    pub fn new(base_length: NonZeroU32, pre_arrival: u32) -> Self {
        WindowPolicy { base_length, pre_arrival }
    }

    /// Window for a flight scheduled at `scheduled` in a day of `num_slots`.
    ///
    /// The start clips at slot 0 without shortening the window; the end
    /// clips at the last slot of the day.
    pub fn window_for(&self, scheduled: SlotId, num_slots: usize) -> Vec<SlotId> {
        let start = u64::from(scheduled.0.saturating_sub(self.pre_arrival));
        let end = start + u64::from(self.base_length.get());
        (start..end.min(num_slots as u64)).map(|s| SlotId(s as u32)).collect()
    }
}

/// Replaces every flight's window with the policy default.
pub fn default_windows(mut inst: Instance, policy: WindowPolicy) -> Instance {
    let num_slots = inst.num_slots();
    inst.windows = inst
        .flights
        .iter()
        .map(|f| Window { flight: f.id.clone(), slots: policy.window_for(f.scheduled_slot, num_slots) })
        .collect();
    inst
}

/// Shifts every window `delay_slots` later. Scheduled arrivals are left
/// alone, so delay is still measured against the original schedule.
pub fn slide_windows(mut inst: Instance, delay_slots: u32) -> Instance {
    if delay_slots == 0 {
        return inst;
    }
    let num_slots = inst.num_slots() as u64;
    for window in &mut inst.windows {
        window.slots = window
            .slots
            .iter()
            .map(|s| u64::from(s.0) + u64::from(delay_slots))
            .take_while(|&s| s < num_slots)
            .map(|s| SlotId(s as u32))
            .collect();
    }
    inst
}

/// Extends every non-empty window by `extra` slots past its last slot.
pub fn stretch_windows(mut inst: Instance, extra: NonZeroU32) -> Instance {
    let num_slots = inst.num_slots() as u64;
    for window in &mut inst.windows {
        let Some(last) = window.slots.last().copied() else {
            continue;
        };
        let from = u64::from(last.0) + 1;
        let to = (from + u64::from(extra.get())).min(num_slots);
        window.slots.extend((from..to).map(|s| SlotId(s as u32)));
    }
    inst
}
