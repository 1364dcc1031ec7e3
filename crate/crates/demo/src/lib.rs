//! Browser bindings for the slot market. Each export takes and returns
//! JSON strings; errors surface as JavaScript exceptions.

use std::num::NonZeroU32;

use serde::Serialize;
use serde_json::Value;
use slot_market::delay::{effective_delay, DelayProfile};
use slot_market::generate::{generate, CapacityProfile, GenConfig};
use slot_market::io::{CertificateFile, InstanceFile, ProfileRecord, ReportFile, ReportFormat};
use slot_market::pipeline::{clear_text, Outcome, PolicyOptions};
use slot_market::windows::WindowPolicy;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
enum Solved {
    Cleared { capacity: Vec<u32>, occupancy: Vec<u32>, augmentations: usize, report: ReportFile },
    Infeasible { message: String, certificate: CertificateFile },
}

/// Clears an instance after sliding and stretching its windows.
pub fn solve_json(instance: &str, slide: u32, stretch: u32) -> Result<String, String> {
    let options = PolicyOptions { policy: None, slide, stretch: NonZeroU32::new(stretch) };
    let solved = match clear_text(instance, &options).map_err(|e| e.to_string())? {
        Outcome::Cleared(cleared) => Solved::Cleared {
            capacity: cleared.instance.slots().iter().map(|s| s.capacity).collect(),
            occupancy: cleared.result.schedule.occupancy(cleared.instance.num_slots()),
            augmentations: cleared.result.augmentations,
            report: cleared.report(ReportFormat::Full),
        },
        outcome @ Outcome::Infeasible { .. } => {
            let certificate = outcome.certificate_file().expect("infeasible outcome has a certificate");
            Solved::Infeasible { message: certificate.render(), certificate }
        }
    };
    serde_json::to_string(&solved).map_err(|e| e.to_string())
}

pub fn generate_json(
    seed: u64,
    flights: usize,
    slots: usize,
    peaked: bool,
    pct_piecewise: u8,
    window: u32,
) -> Result<String, String> {
    let window = NonZeroU32::new(window).ok_or("window length must be positive")?;
    let cfg = GenConfig {
        seed,
        flights,
        slots,
        capacity_profile: if peaked { CapacityProfile::Peaked } else { CapacityProfile::Uniform },
        pct_piecewise,
        window: WindowPolicy::new(window, 0),
        ..GenConfig::default()
    };
    let inst = generate(&cfg).map_err(|e| e.to_string())?;
    Ok(InstanceFile::from_instance(&inst).to_json())
}

/// Delay cost in cents for 0..=max_delay slots of delay, given a profile
/// record (`"linear"` or `{"breakpoints": ...}`) and a criticality factor.
pub fn delay_curve_json(profile: &str, alpha: i64, max_delay: u32) -> Result<String, String> {
    let record: ProfileRecord = serde_json::from_str(profile).map_err(|e| e.to_string())?;
    let profile = match record {
        ProfileRecord::Named(_) => DelayProfile::Linear,
        ProfileRecord::Piecewise(p) => DelayProfile::piecewise(p.breakpoints),
    };
    profile.check().map_err(|e| e.to_string())?;
    let curve: Vec<Value> = (0..=max_delay)
        .map(|d| Value::from(alpha.saturating_mul(effective_delay(&profile, d).min(i64::MAX as u64) as i64)))
        .collect();
    Ok(Value::Array(curve).to_string())
}

#[wasm_bindgen]
pub fn solve(instance: &str, slide: u32, stretch: u32) -> Result<String, JsError> {
    solve_json(instance, slide, stretch).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = generateInstance)]
pub fn generate_instance(
    seed: u32,
    flights: u32,
    slots: u32,
    peaked: bool,
    pct_piecewise: u8,
    window: u32,
) -> Result<String, JsError> {
    generate_json(u64::from(seed), flights as usize, slots as usize, peaked, pct_piecewise, window)
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = delayCurve)]
pub fn delay_curve(profile: &str, alpha: u32, max_delay: u32) -> Result<String, JsError> {
    delay_curve_json(profile, i64::from(alpha), max_delay).map_err(|e| JsError::new(&e))
}
