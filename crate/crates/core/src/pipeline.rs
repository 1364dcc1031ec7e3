//! The end-to-end clearing pipeline shared by the CLI and the web demo:
//! window policy, validation, matching, prices, verification.

use std::num::NonZeroU32;

use thiserror::Error;

use crate::equilibrium::{dual_objective, extract_prices, strong_duality_check, verify, EquilibriumError, PriceSystem};
use crate::io::{CertificateFile, FormatError, InstanceFile, ReportFile, ReportFormat};
use crate::matching_graph::build;
use crate::model::{validate_instance, Instance, Money, ValidatedInstance, ValidationError};
use crate::solver::{solve, InfeasibilityCertificate, MatchingResult};
use crate::windows::{slide_windows, stretch_windows, WindowPolicy};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PolicyOptions {
    /// Fills windows missing from the instance file.
    pub policy: Option<WindowPolicy>,
    pub slide: u32,
    pub stretch: Option<NonZeroU32>,
}

impl PolicyOptions {
    pub fn apply(&self, file: &InstanceFile) -> Result<Instance, FormatError> {
        let mut inst = file.to_instance(self.policy)?;
        inst = slide_windows(inst, self.slide);
        if let Some(extra) = self.stretch {
            inst = stretch_windows(inst, extra);
        }
        Ok(inst)
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("invalid instance: {0}")]
    Validation(#[from] ValidationError),
    #[error("internal error: {0}")]
    Equilibrium(#[from] EquilibriumError),
}

#[derive(Clone, Debug)]
pub struct Cleared {
    pub instance: ValidatedInstance,
    pub result: MatchingResult,
    pub prices: PriceSystem,
    /// Always zero for an equilibrium produced here.
    pub duality_gap: Money,
}

impl Cleared {
    pub fn report(&self, format: ReportFormat) -> ReportFile {
        let check = verify(&self.instance, &self.result.schedule, &self.prices);
        ReportFile::build(
            &self.instance,
            &self.result.schedule,
            &self.prices,
            &check,
            dual_objective(&self.instance, &self.prices),
            format,
        )
    }
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Cleared(Box<Cleared>),
    Infeasible { instance: ValidatedInstance, certificate: InfeasibilityCertificate },
}

impl Outcome {
    pub fn certificate_file(&self) -> Option<CertificateFile> {
        match self {
            Outcome::Infeasible { instance, certificate } => Some(CertificateFile::new(instance, certificate)),
            Outcome::Cleared(_) => None,
        }
    }
}

pub fn clear(inst: Instance) -> Result<Outcome, PipelineError> {
    let instance = validate_instance(inst)?;
    let result = match solve(&build(&instance)) {
        Ok(result) => result,
        Err(certificate) => return Ok(Outcome::Infeasible { instance, certificate }),
    };
    let prices = extract_prices(&instance, &result)?;
    let duality_gap = strong_duality_check(&instance, &result.schedule, &prices);
    assert_eq!(duality_gap, Money::ZERO, "verified equilibrium with a duality gap");
    Ok(Outcome::Cleared(Box::new(Cleared { instance, result, prices, duality_gap })))
}

/// Parses an instance file, applies the window options and clears it.
pub fn clear_text(text: &str, options: &PolicyOptions) -> Result<Outcome, PipelineError> {
    let file = InstanceFile::parse(text)?;
    clear(options.apply(&file)?)
}
