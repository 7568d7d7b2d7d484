//! Guarantee auditing shared by the algorithm verifiers.

use std::fmt;

use crate::algorithm::TraceStep;
use crate::metrics::FairnessReport;
use crate::model::Instance;
use crate::state::AllocationState;

/// One failed check.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub t: usize,
    pub agent: Option<usize>,
    pub check: &'static str,
    pub detail: String,
}

impl Violation {
    pub fn new(t: usize, agent: Option<usize>, check: &'static str, detail: String) -> Self {
        Violation {
            t,
            agent,
            check,
            detail,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.agent {
            Some(a) => write!(
                f,
                "t={} agent={} {}: {}",
                self.t,
                a + 1,
                self.check,
                self.detail
            ),
            None => write!(f, "t={} {}: {}", self.t, self.check, self.detail),
        }
    }
}

/// Per-step observer that collects guarantee violations.
pub trait Auditor {
    fn observe(
        &mut self,
        instance: &Instance,
        state: &AllocationState,
        step: &TraceStep,
        reports: &[FairnessReport],
    );

    /// Called once after the last step.
    fn finish(&mut self, _instance: &Instance, _state: &AllocationState) {}

    fn violations(&self) -> &[Violation];
}
