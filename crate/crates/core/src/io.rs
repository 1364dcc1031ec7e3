//! Instance and report files.
//!
//! Both are JSON. Money is always an integer number of cents in a field
//! ending in `_cents`; minutes appear only as display fields. Instance
//! parsing is strict: unknown fields are rejected.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::delay::{raw_delay, Breakpoint, DelayProfile};
use crate::equilibrium::{EquilibriumReport, PriceSystem, Violation};
use crate::model::{FlightId, Instance, Money, Schedule, Slot, SlotId, ValidatedInstance, Window};
use crate::solver::InfeasibilityCertificate;
use crate::windows::WindowPolicy;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("flight {0} has no window and no window policy was given")]
    MissingWindow(FlightId),
    #[error("report has no {0} section (was it written in summary format?)")]
    MissingSection(&'static str),
    #[error("report has no price for slot {0}")]
    MissingPrice(u32),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub slot_minutes: u32,
    pub slots: Vec<SlotRecord>,
    pub flights: Vec<FlightRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlotRecord {
    pub index: u32,
    pub capacity: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlightRecord {
    pub id: String,
    pub airline: String,
    pub scheduled_slot: u32,
    pub alpha_cents_per_slot: i64,
    #[serde(default = "ProfileRecord::linear")]
    pub profile: ProfileRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Vec<u32>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileName {
    Linear,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseRecord {
    pub breakpoints: Vec<(u32, u64)>,
}

/// `"linear"` or `{"breakpoints": [[delay, value], ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileRecord {
    Named(ProfileName),
    Piecewise(PiecewiseRecord),
}

impl ProfileRecord {
    fn linear() -> Self {
        ProfileRecord::Named(ProfileName::Linear)
    }
}

impl From<&DelayProfile> for ProfileRecord {
    fn from(profile: &DelayProfile) -> Self {
        match profile {
            DelayProfile::Linear => ProfileRecord::linear(),
            DelayProfile::Piecewise(points) => ProfileRecord::Piecewise(PiecewiseRecord {
                breakpoints: points.iter().map(|b| (b.delay_slots, b.value)).collect(),
            }),
        }
    }
}

impl From<&ProfileRecord> for DelayProfile {
    fn from(record: &ProfileRecord) -> Self {
        match record {
            ProfileRecord::Named(ProfileName::Linear) => DelayProfile::Linear,
            ProfileRecord::Piecewise(p) => DelayProfile::Piecewise(
                p.breakpoints.iter().map(|&(delay_slots, value)| Breakpoint { delay_slots, value }).collect(),
            ),
        }
    }
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("instance files always serialize");
        text.push('\n');
        text
    }

    /// Converts to a raw instance. Flights without an explicit window get
    /// one from `policy`.
    pub fn to_instance(&self, policy: Option<WindowPolicy>) -> Result<Instance, FormatError> {
        let num_slots = self.slots.len();
        let mut inst = Instance {
            slot_minutes: self.slot_minutes,
            slots: self.slots.iter().map(|s| Slot { id: SlotId(s.index), capacity: s.capacity }).collect(),
            flights: Vec::with_capacity(self.flights.len()),
            windows: Vec::with_capacity(self.flights.len()),
        };
        for record in &self.flights {
            let id = FlightId::new(record.id.clone());
            let scheduled_slot = SlotId(record.scheduled_slot);
            let slots = match (&record.window, policy) {
                (Some(window), _) => window.iter().map(|&s| SlotId(s)).collect(),
                (None, Some(policy)) => policy.window_for(scheduled_slot, num_slots),
                (None, None) => return Err(FormatError::MissingWindow(id)),
            };
            inst.windows.push(Window { flight: id.clone(), slots });
            inst.flights.push(crate::model::Flight {
                id,
                airline: record.airline.clone(),
                scheduled_slot,
                alpha: Money(record.alpha_cents_per_slot),
                profile: DelayProfile::from(&record.profile),
            });
        }
        Ok(inst)
    }

    pub fn from_instance(inst: &Instance) -> Self {
        InstanceFile {
            slot_minutes: inst.slot_minutes,
            slots: inst.slots.iter().map(|s| SlotRecord { index: s.id.0, capacity: s.capacity }).collect(),
            flights: inst
                .flights
                .iter()
                .zip(&inst.windows)
                .map(|(f, w)| FlightRecord {
                    id: f.id.0.clone(),
                    airline: f.airline.clone(),
                    scheduled_slot: f.scheduled_slot.0,
                    alpha_cents_per_slot: f.alpha.cents(),
                    profile: ProfileRecord::from(&f.profile),
                    window: Some(w.slots.iter().map(|s| s.0).collect()),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ReportFormat {
    #[default]
    Full,
    Summary,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub slot_minutes: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<BTreeMap<String, ScheduleRecord>>,
    /// Slot index to price in cents.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prices: Option<BTreeMap<u32, i64>>,
    pub totals: Totals,
    pub equilibrium: EquilibriumRecord,
    pub airlines: BTreeMap<String, AirlineRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleRecord {
    pub airline: String,
    pub slot: u32,
    pub raw_delay_slots: u32,
    pub delay_minutes: u64,
    pub delay_cost_cents: i64,
    pub price_cents: i64,
    pub total_cost_cents: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Totals {
    pub flights: usize,
    pub slots: usize,
    pub schedule_cost_cents: i64,
    pub dual_objective_cents: i64,
    /// Landing fees collected: the sum of the prices of occupied slots.
    pub revenue_cents: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriumRecord {
    pub ok: bool,
    pub violations: Vec<ViolationRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViolationRecord {
    pub condition: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flight: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lhs_cents: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs_cents: Option<i64>,
    pub message: String,
}

impl From<&Violation> for ViolationRecord {
    fn from(v: &Violation) -> Self {
        let sides = v.sides();
        ViolationRecord {
            condition: v.condition().label().to_string(),
            flight: v.flight().map(|f| f.0.clone()),
            slot: v.slot().map(|s| s.0),
            lhs_cents: sides.map(|(l, _)| l.cents()),
            rhs_cents: sides.map(|(_, r)| r.cents()),
            message: v.describe(),
        }
    }
}

impl From<&EquilibriumReport> for EquilibriumRecord {
    fn from(report: &EquilibriumReport) -> Self {
        EquilibriumRecord { ok: report.ok, violations: report.violations.iter().map(ViolationRecord::from).collect() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AirlineRecord {
    pub flights: usize,
    pub total_paid_cents: i64,
    pub total_delay_slots: u64,
    pub total_delay_minutes: u64,
    pub total_delay_cost_cents: i64,
}

impl ReportFile {
    pub fn build(
        inst: &ValidatedInstance,
        sched: &Schedule,
        ps: &PriceSystem,
        report: &EquilibriumReport,
        dual_objective: Money,
        format: ReportFormat,
    ) -> Self {
        let minutes = u64::from(inst.slot_minutes());
        let mut schedule = BTreeMap::new();
        let mut airlines: BTreeMap<String, AirlineRecord> = BTreeMap::new();
        let mut cost = Money::ZERO;
        let mut revenue = Money::ZERO;
        for (k, flight) in inst.flights().iter().enumerate() {
            let slot = sched.slot_of(&flight.id).expect("reported schedules cover every flight");
            let delay_cost = inst.cost_in_window(k, slot).expect("reported schedules respect windows");
            let raw = raw_delay(flight, slot);
            let price = ps.price(slot);
            cost += delay_cost;
            revenue += price;
            let rollup = airlines.entry(flight.airline.clone()).or_default();
            rollup.flights += 1;
            rollup.total_paid_cents += price.cents();
            rollup.total_delay_slots += u64::from(raw);
            rollup.total_delay_minutes += u64::from(raw) * minutes;
            rollup.total_delay_cost_cents += delay_cost.cents();
            schedule.insert(
                flight.id.0.clone(),
                ScheduleRecord {
                    airline: flight.airline.clone(),
                    slot: slot.0,
                    raw_delay_slots: raw,
                    delay_minutes: u64::from(raw) * minutes,
                    delay_cost_cents: delay_cost.cents(),
                    price_cents: price.cents(),
                    total_cost_cents: ps.total_costs[&flight.id].cents(),
                },
            );
        }
        let prices = ps.prices.iter().enumerate().map(|(s, p)| (s as u32, p.cents())).collect();
        let full = format == ReportFormat::Full;
        ReportFile {
            slot_minutes: inst.slot_minutes(),
            schedule: full.then_some(schedule),
            prices: full.then_some(prices),
            totals: Totals {
                flights: inst.num_flights(),
                slots: inst.num_slots(),
                schedule_cost_cents: cost.cents(),
                dual_objective_cents: dual_objective.cents(),
                revenue_cents: revenue.cents(),
            },
            equilibrium: EquilibriumRecord::from(report),
            airlines,
        }
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("reports always serialize");
        text.push('\n');
        text
    }

    pub fn schedule(&self) -> Result<Schedule, FormatError> {
        let entries = self.schedule.as_ref().ok_or(FormatError::MissingSection("schedule"))?;
        Ok(entries.iter().map(|(id, r)| (FlightId::new(id.clone()), SlotId(r.slot))).collect())
    }

    /// Prices for slots `0..num_slots` and the reported total costs.
    pub fn price_system(&self, num_slots: usize) -> Result<PriceSystem, FormatError> {
        let prices = self.prices.as_ref().ok_or(FormatError::MissingSection("prices"))?;
        let entries = self.schedule.as_ref().ok_or(FormatError::MissingSection("schedule"))?;
        let prices = (0..num_slots as u32)
            .map(|s| prices.get(&s).map(|&p| Money(p)).ok_or(FormatError::MissingPrice(s)))
            .collect::<Result<_, _>>()?;
        let total_costs =
            entries.iter().map(|(id, r)| (FlightId::new(id.clone()), Money(r.total_cost_cents))).collect();
        Ok(PriceSystem { prices, total_costs })
    }
}

/// Rendered form of an infeasibility certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateFile {
    pub deficient_flights: Vec<String>,
    pub reachable_slots: Vec<u32>,
    pub reachable_capacity: u64,
    pub shortfall: u64,
    pub remedies: Vec<String>,
}

impl CertificateFile {
    pub fn new(inst: &ValidatedInstance, cert: &InfeasibilityCertificate) -> Self {
        CertificateFile {
            deficient_flights: cert.deficient_flights.iter().map(|f| f.0.clone()).collect(),
            reachable_slots: cert.reachable_slots.iter().map(|s| s.0).collect(),
            reachable_capacity: cert.reachable_slots.iter().map(|&s| u64::from(inst.capacity(s))).sum(),
            shortfall: cert.shortfall,
            remedies: vec![
                format!("stretch the landing windows of these flights (e.g. --stretch {})", cert.shortfall),
                format!("cancel at least {} of these flights", cert.shortfall),
            ],
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("certificates always serialize");
        text.push('\n');
        text
    }

    pub fn render(&self) -> String {
        format!(
            "market infeasible: {} flights share windows covering slots {:?} with total capacity {} (short by {})\n  flights: {}\n  remedies: {}\n",
            self.deficient_flights.len(),
            self.reachable_slots,
            self.reachable_capacity,
            self.shortfall,
            self.deficient_flights.join(", "),
            self.remedies.join("; or "),
        )
    }
}
