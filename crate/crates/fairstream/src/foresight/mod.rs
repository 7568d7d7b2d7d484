//! Algorithms that see a few goods ahead.

pub mod assignment;
mod naive;
pub mod patterns;
mod priority;

pub use naive::{check_pair_invariant, NaiveAudit, NaiveMatching, NaiveNote};
pub use priority::{aux_weight, plan_round, PriorityAudit, PriorityMatching, RoundNote, RoundPlan};

use crate::algorithm::TraceStep;
use crate::audit::{Auditor, Violation};
use crate::metrics::FairnessReport;
use crate::model::Instance;
use crate::state::AllocationState;

/// Fairness floors once every agent holds at least `lambda * alpha_i`.
///
/// From then on EF >= lambda/(lambda+2), EF1 >= lambda/(lambda+1), and PROP
/// is at least `prop_floor(lambda)`.
#[derive(Debug, Clone)]
pub struct AsymptoticAudit {
    lambda: f64,
    prop: (f64, f64),
    tol: f64,
    reached_at: Option<usize>,
    violations: Vec<Violation>,
}

impl AsymptoticAudit {
    /// Floors for Priority-Matching: PROP >= lambda/(lambda+2).
    pub fn for_priority(lambda: f64, tol: f64) -> Self {
        Self::with_prop(lambda, (lambda, lambda + 2.0), tol)
    }

    /// Floors for Naive-Matching: PROP >= lambda/(lambda+1).
    pub fn for_naive(lambda: f64, tol: f64) -> Self {
        Self::with_prop(lambda, (lambda, lambda + 1.0), tol)
    }

    fn with_prop(lambda: f64, prop: (f64, f64), tol: f64) -> Self {
        AsymptoticAudit {
            lambda,
            prop,
            tol,
            reached_at: None,
            violations: Vec::new(),
        }
    }

    /// First step at which every agent held `lambda * alpha_i`, if any.
    pub fn reached_at(&self) -> Option<usize> {
        self.reached_at
    }
}

impl Auditor for AsymptoticAudit {
    fn observe(
        &mut self,
        instance: &Instance,
        state: &AllocationState,
        _step: &TraceStep,
        reports: &[FairnessReport],
    ) {
        if self.reached_at.is_none() {
            let all = instance.agents.iter().enumerate().all(|(i, p)| {
                let need = self.lambda * p.alpha;
                state.value_of(i, i) >= need - self.tol * need
            });
            if !all {
                return;
            }
            self.reached_at = Some(state.t);
        }
        let l = self.lambda;
        for r in reports {
            let checks = [
                ("asym-ef", r.ef, (l, l + 2.0)),
                ("asym-ef1", r.ef1, (l, l + 1.0)),
                ("asym-prop", r.prop, self.prop),
            ];
            for (name, ratio, (p, q)) in checks {
                if !ratio.at_least(p, q, self.tol) {
                    self.violations.push(Violation::new(
                        r.t,
                        Some(r.agent),
                        name,
                        format!("ratio {ratio} below {p}/{q} (lambda {l})"),
                    ));
                }
            }
        }
    }

    fn violations(&self) -> &[Violation] {
        &self.violations
    }
}
