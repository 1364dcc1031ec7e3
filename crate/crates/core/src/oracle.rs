//! Exhaustive ground truth for small markets.
//!
//! Deliberately naive and independent of the matching graph and solver:
//! it only uses the domain types and delay costs.

use thiserror::Error;

use crate::delay::delay_cost;
use crate::model::{FlightId, Money, Schedule, SlotId, ValidatedInstance};

pub const MAX_ORACLE_FLIGHTS: usize = 10;
pub const MAX_SEARCH_SPACE: u128 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance too large for exhaustive search ({0} candidates)")]
    TooLarge(u128),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BruteForce {
    Optimal { best_cost: Money, schedules: Vec<Schedule> },
    Infeasible,
}

impl BruteForce {
    pub fn best_cost(&self) -> Option<Money> {
        match self {
            BruteForce::Optimal { best_cost, .. } => Some(*best_cost),
            BruteForce::Infeasible => None,
        }
    }
}

struct Search<'a> {
    costs: Vec<Vec<(usize, Money)>>,
    remaining: Vec<u32>,
    current: Vec<usize>,
    best: Option<Money>,
    winners: Vec<Vec<usize>>,
    ids: &'a [FlightId],
}

impl Search<'_> {
    fn descend(&mut self, flight: usize, cost: Money) {
        if flight == self.costs.len() {
            match self.best {
                Some(best) if cost > best => {}
                Some(best) if cost == best => self.winners.push(self.current.clone()),
                _ => {
                    self.best = Some(cost);
                    self.winners = vec![self.current.clone()];
                }
            }
            return;
        }
        for k in 0..self.costs[flight].len() {
            let (slot, c) = self.costs[flight][k];
            if self.remaining[slot] == 0 {
                continue;
            }
            self.remaining[slot] -= 1;
            self.current.push(slot);
            self.descend(flight + 1, cost + c);
            self.current.pop();
            self.remaining[slot] += 1;
        }
    }

    fn schedule(&self, slots: &[usize]) -> Schedule {
        self.ids.iter().cloned().zip(slots.iter().map(|&s| SlotId::from_index(s))).collect()
    }
}

/// Enumerates every capacity-respecting assignment and returns the
/// minimum delay cost with all schedules attaining it.
pub fn brute_force_optimum(inst: &ValidatedInstance) -> Result<BruteForce, OracleError> {
    let space: u128 = (0..inst.num_flights()).map(|k| inst.window(k).slots.len() as u128).product();
    if inst.num_flights() > MAX_ORACLE_FLIGHTS || space > MAX_SEARCH_SPACE {
        return Err(OracleError::TooLarge(space));
    }
    let ids: Vec<FlightId> = inst.flights().iter().map(|f| f.id.clone()).collect();
    let costs = inst
        .flights()
        .iter()
        .enumerate()
        .map(|(k, f)| inst.window(k).slots.iter().map(|&s| (s.index(), delay_cost(f, s))).collect())
        .collect();
    let mut search = Search {
        costs,
        remaining: inst.slots().iter().map(|s| s.capacity).collect(),
        current: Vec::with_capacity(ids.len()),
        best: None,
        winners: Vec::new(),
        ids: &ids,
    };
    search.descend(0, Money::ZERO);
    Ok(match search.best {
        None => BruteForce::Infeasible,
        Some(best_cost) => {
            BruteForce::Optimal { best_cost, schedules: search.winners.iter().map(|w| search.schedule(w)).collect() }
        }
    })
}

/// Every feasible schedule, in enumeration order. Same guard as
/// [`brute_force_optimum`].
pub fn all_schedules(inst: &ValidatedInstance) -> Result<Vec<Schedule>, OracleError> {
    let space: u128 = (0..inst.num_flights()).map(|k| inst.window(k).slots.len() as u128).product();
    if inst.num_flights() > MAX_ORACLE_FLIGHTS || space > MAX_SEARCH_SPACE {
        return Err(OracleError::TooLarge(space));
    }
    fn walk(
        inst: &ValidatedInstance,
        k: usize,
        remaining: &mut [u32],
        current: &mut Vec<SlotId>,
        out: &mut Vec<Schedule>,
    ) {
        if k == inst.num_flights() {
            out.push(inst.flights().iter().map(|f| f.id.clone()).zip(current.iter().copied()).collect());
            return;
        }
        for &slot in &inst.window(k).slots {
            if remaining[slot.index()] > 0 {
                remaining[slot.index()] -= 1;
                current.push(slot);
                walk(inst, k + 1, remaining, current, out);
                current.pop();
                remaining[slot.index()] += 1;
            }
        }
    }
    let mut remaining: Vec<u32> = inst.slots().iter().map(|s| s.capacity).collect();
    let mut out = Vec::new();
    walk(inst, 0, &mut remaining, &mut Vec::new(), &mut out);
    Ok(out)
}

/// Whether `prices` support `sched` as an equilibrium: each flight's
/// assigned slot minimizes price plus delay cost over its window,
/// underfilled slots are free (or, with none, the cheapest slot is), and
/// nothing is negative.
pub fn is_admissible(inst: &ValidatedInstance, sched: &Schedule, prices: &[i64]) -> bool {
    let mut occupancy = vec![0u32; inst.num_slots()];
    for (k, f) in inst.flights().iter().enumerate() {
        let Some(assigned) = sched.slot_of(&f.id) else { return false };
        occupancy[assigned.index()] += 1;
        let at = |s: SlotId| prices[s.index()] + delay_cost(f, s).cents();
        let best = inst.window(k).slots.iter().map(|&s| at(s)).min().unwrap();
        if at(assigned) != best || best < 0 {
            return false;
        }
    }
    if prices.iter().any(|&p| p < 0) {
        return false;
    }
    let mut any_underfilled = false;
    for (s, slot) in inst.slots().iter().enumerate() {
        if occupancy[s] < slot.capacity {
            any_underfilled = true;
            if prices[s] != 0 {
                return false;
            }
        }
    }
    any_underfilled || prices.iter().min().is_none_or(|&m| m == 0)
}

/// Summary of all admissible integer price vectors inside the grid
/// `[0, grid_bound]^slots`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdmissiblePrices {
    pub grid_bound: i64,
    pub count: u64,
    /// Componentwise minimum and maximum over admissible points.
    pub lower: Vec<i64>,
    pub upper: Vec<i64>,
    /// `diff_range[a][b]` is the (min, max) of `p_a - p_b`.
    pub diff_range: Vec<Vec<(i64, i64)>>,
}

impl AdmissiblePrices {
    /// True if some admissible point sits on the grid's upper face, i.e.
    /// the set may continue beyond the grid.
    pub fn touches_bound(&self) -> bool {
        self.count > 0 && self.upper.contains(&self.grid_bound)
    }
}

/// Grid bound for the price enumeration: `(|B| - 1) * max delay cost`,
/// at least one delay cost. Minimal prices arise from chains of at most
/// `|B| - 1` displacements, each worth at most one delay cost.
pub fn price_grid_bound(inst: &ValidatedInstance) -> i64 {
    let max_cost = inst
        .flights()
        .iter()
        .enumerate()
        .flat_map(|(k, f)| inst.window(k).slots.iter().map(move |&s| delay_cost(f, s).cents()))
        .max()
        .unwrap_or(0);
    max_cost * (inst.num_slots().saturating_sub(1).max(1) as i64)
}

/// Enumerates the integer price grid and keeps every admissible point.
pub fn admissible_prices(inst: &ValidatedInstance, sched: &Schedule) -> Result<AdmissiblePrices, OracleError> {
    admissible_prices_within(inst, sched, price_grid_bound(inst))
}

pub fn admissible_prices_within(
    inst: &ValidatedInstance,
    sched: &Schedule,
    grid_bound: i64,
) -> Result<AdmissiblePrices, OracleError> {
    let n = inst.num_slots();
    let space = (grid_bound as u128 + 1).checked_pow(n as u32).unwrap_or(u128::MAX);
    if inst.num_flights() > MAX_ORACLE_FLIGHTS || space > MAX_SEARCH_SPACE {
        return Err(OracleError::TooLarge(space));
    }
    let mut found = AdmissiblePrices {
        grid_bound,
        count: 0,
        lower: vec![i64::MAX; n],
        upper: vec![i64::MIN; n],
        diff_range: vec![vec![(i64::MAX, i64::MIN); n]; n],
    };
    let mut point = vec![0i64; n];
    loop {
        if is_admissible(inst, sched, &point) {
            found.count += 1;
            for a in 0..n {
                found.lower[a] = found.lower[a].min(point[a]);
                found.upper[a] = found.upper[a].max(point[a]);
                for b in 0..n {
                    let d = point[a] - point[b];
                    let r = &mut found.diff_range[a][b];
                    *r = (r.0.min(d), r.1.max(d));
                }
            }
        }
        // odometer step
        let mut digit = 0;
        while digit < n && point[digit] == grid_bound {
            point[digit] = 0;
            digit += 1;
        }
        if digit == n {
            break;
        }
        point[digit] += 1;
    }
    Ok(found)
}
