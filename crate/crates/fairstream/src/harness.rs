//! Running an algorithm on an instance, auditing it, and writing CSV.

use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::algorithm::{simulate, AlgorithmError, OnlineAlgorithm, StepDetail, Trace};
use crate::audit::{Auditor, Violation};
use crate::baselines::{GreedyWelfare, RoundRobin};
use crate::deferred_priority::{DeferredPriority, DpAudit};
use crate::foresight::{NaiveAudit, NaiveMatching, PriorityAudit, PriorityMatching};
use crate::io::ParseError;
use crate::metrics::{report_all, FairnessReport, MetricError, REL_TOL, REPORT_HEADER};
use crate::model::{Flavor, Instance, ModelError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Algorithm(#[from] AlgorithmError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("{count} guarantee violation(s); first: {first}")]
    Guarantee { count: usize, first: Violation },
}

impl HarnessError {
    /// 2 for failed guarantees, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Guarantee { .. } => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmKind {
    DeferredPriority,
    NaiveMatching,
    PriorityMatching,
    RoundRobin,
    GreedyWelfare,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 5] = [
        AlgorithmKind::DeferredPriority,
        AlgorithmKind::NaiveMatching,
        AlgorithmKind::PriorityMatching,
        AlgorithmKind::RoundRobin,
        AlgorithmKind::GreedyWelfare,
    ];

    pub fn name(self) -> &'static str {
        self.build().name()
    }

    pub fn build(self) -> Box<dyn OnlineAlgorithm> {
        match self {
            AlgorithmKind::DeferredPriority => Box::new(DeferredPriority::new()),
            AlgorithmKind::NaiveMatching => Box::new(NaiveMatching::new()),
            AlgorithmKind::PriorityMatching => Box::new(PriorityMatching::new()),
            AlgorithmKind::RoundRobin => Box::new(RoundRobin),
            AlgorithmKind::GreedyWelfare => Box::new(GreedyWelfare),
        }
    }

    /// Checks agent count, flavor, and foresight before a run.
    pub fn check_instance(self, inst: &Instance) -> Result<(), HarnessError> {
        let alg = self.build();
        let n = inst.n();
        if self == AlgorithmKind::NaiveMatching && n != 2 {
            return Err(HarnessError::Config(format!(
                "{} needs n = 2, got {n}",
                alg.name()
            )));
        }
        let two_value_only = !matches!(
            self,
            AlgorithmKind::RoundRobin | AlgorithmKind::GreedyWelfare
        );
        if two_value_only && inst.flavor != Flavor::TwoValue {
            return Err(HarnessError::Config(format!(
                "{} needs a two-value instance; reduce interval instances first",
                alg.name()
            )));
        }
        let needed = alg.required_foresight(n);
        if inst.foresight < needed {
            return Err(HarnessError::Config(format!(
                "{} needs foresight {needed}, instance has {}",
                alg.name(),
                inst.foresight
            )));
        }
        Ok(())
    }

    /// Verifier for the algorithm's guarantees, if it has any.
    pub fn auditor(self, n: usize, tol: f64) -> Option<Box<dyn Auditor>> {
        match self {
            AlgorithmKind::DeferredPriority => Some(Box::new(DpAudit::new(n, tol))),
            AlgorithmKind::NaiveMatching => Some(Box::new(NaiveAudit::new(tol))),
            AlgorithmKind::PriorityMatching => Some(Box::new(PriorityAudit::new(n, tol))),
            AlgorithmKind::RoundRobin | AlgorithmKind::GreedyWelfare => None,
        }
    }
}

impl FromStr for AlgorithmKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        AlgorithmKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = AlgorithmKind::ALL.iter().map(|k| k.name()).collect();
                format!(
                    "unknown algorithm {s:?}; expected one of {}",
                    names.join(", ")
                )
            })
    }
}

/// Which steps appear in the report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Granularity {
    Every,
    /// Steps that are multiples of n.
    Rounds,
    Final,
}

impl FromStr for Granularity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "every" => Ok(Granularity::Every),
            "rounds" => Ok(Granularity::Rounds),
            "final" => Ok(Granularity::Final),
            _ => Err(format!(
                "unknown granularity {s:?}; expected every, rounds, or final"
            )),
        }
    }
}

/// Zero for two-value instances with integer values, where every ratio
/// comparison is exact; relative 1e-9 otherwise.
pub fn default_tolerance(instance: &Instance) -> f64 {
    let integral = instance
        .agents
        .iter()
        .all(|a| a.alpha.fract() == 0.0 && a.beta.fract() == 0.0);
    if instance.flavor == Flavor::TwoValue && integral {
        0.0
    } else {
        REL_TOL
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    pub algorithm: AlgorithmKind,
    pub granularity: Granularity,
    pub audit: bool,
}

pub struct RunOutcome {
    pub trace: Trace,
    pub reports: Vec<FairnessReport>,
    pub violations: Vec<Violation>,
}

/// Runs, reports, and (if asked) audits one instance.
pub fn run(instance: &Instance, cfg: &RunConfig) -> Result<RunOutcome, HarnessError> {
    cfg.algorithm.check_instance(instance)?;
    let n = instance.n();
    let m = instance.m();
    let tol = default_tolerance(instance);
    let mut auditor = if cfg.audit {
        cfg.algorithm.auditor(n, tol)
    } else {
        None
    };
    let mut alg = cfg.algorithm.build();
    let mut reports = Vec::new();
    let mut metric_err = None;
    let mut last_state = None;
    let trace = simulate(alg.as_mut(), instance, |state, step| {
        let t = state.t;
        let keep = match cfg.granularity {
            Granularity::Every => true,
            Granularity::Rounds => t % n == 0,
            Granularity::Final => t == m,
        };
        if !keep && auditor.is_none() {
            return;
        }
        match report_all(state, instance) {
            Ok(r) => {
                if let Some(a) = auditor.as_mut() {
                    a.observe(instance, state, step, &r);
                }
                if keep {
                    reports.extend(r);
                }
            }
            Err(e) => metric_err = Some(e),
        }
        if t == m {
            last_state = Some(state.clone());
        }
    })?;
    if let Some(e) = metric_err {
        return Err(e.into());
    }
    let mut violations = Vec::new();
    if let Some(mut a) = auditor {
        if let Some(s) = &last_state {
            a.finish(instance, s);
        }
        violations = a.violations().to_vec();
    }
    Ok(RunOutcome {
        trace,
        reports,
        violations,
    })
}

pub fn reports_csv(reports: &[FairnessReport]) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

fn joined<T: ToString>(xs: impl IntoIterator<Item = T>) -> String {
    xs.into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// Trace CSV. Columns after `as_high` depend on the algorithm; vectors are
/// semicolon-joined and agents are 1-based.
pub fn trace_csv(trace: &Trace) -> String {
    let extra = match trace.steps.first().map(|s| &s.detail) {
        Some(StepDetail::Priority(_)) => ",phase,H,L,chi",
        Some(StepDetail::Naive(_)) => ",round,ctr,committed",
        Some(StepDetail::Round(_)) => ",round,pi,committed",
        _ => "",
    };
    let mut out = format!("t,good,allocated_to,as_high{extra}\n");
    for s in &trace.steps {
        let _ = write!(out, "{},{},{},{}", s.t, s.t, s.agent + 1, s.as_high as u8);
        match &s.detail {
            StepDetail::None => {}
            StepDetail::Priority(p) => {
                let _ = write!(
                    out,
                    ",{},{},{},{}",
                    p.outcome.phase,
                    joined(&p.state.h),
                    joined(&p.state.l),
                    joined(p.state.chi.iter().map(|&c| c as u8))
                );
            }
            StepDetail::Naive(nn) => {
                let c = nn
                    .committed
                    .map(|(g, a)| format!("{g}:{}", a + 1))
                    .unwrap_or_default();
                let _ = write!(out, ",{},{},{c}", s.t.div_ceil(2), nn.ctr);
            }
            StepDetail::Round(r) => {
                let (pi, c) = match &r.plan {
                    Some(p) => (
                        joined(p.order.iter().map(|a| a + 1)),
                        joined(
                            p.assignment
                                .iter()
                                .enumerate()
                                .filter_map(|(a, g)| g.map(|g| format!("{g}:{}", a + 1))),
                        ),
                    ),
                    None => (String::new(), String::new()),
                };
                let _ = write!(out, ",{},{pi},{c}", r.round);
            }
        }
        out.push('\n');
    }
    out
}
