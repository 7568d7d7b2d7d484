//! Deferred-Priority: the no-foresight algorithm for personalized two-value
//! instances, with verifiers for its allocation and fairness guarantees.
//!
//! Each agent carries a high-loss tolerance `H` and a low-good priority `L`.
//! High goods go to the interested active agent with the least tolerance
//! left; low goods rotate by `L`. Time is split into phases; within a phase
//! an agent that takes a high good sits out until the phase ends.

use crate::algorithm::{
    AlgorithmError, Decision, OnlineAlgorithm, StepContext, StepDetail, TraceStep,
};
use crate::audit::{Auditor, Violation};
use crate::metrics::FairnessReport;
use crate::model::{is_high, is_low, AgentProfile, AgentType, GoodEvent, Instance};
use crate::state::AllocationState;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriorityState {
    pub n: usize,
    pub h: Vec<i64>,
    pub l: Vec<i64>,
    /// Inactive flags.
    pub chi: Vec<bool>,
    pub phase: u64,
    pub low: usize,
    pub high: usize,
    pub t: usize,
}

impl PriorityState {
    pub fn new(n: usize) -> Self {
        PriorityState {
            n,
            h: vec![n as i64; n],
            l: vec![2 * n as i64 - 1; n],
            chi: vec![false; n],
            phase: 0,
            low: 0,
            high: 0,
            t: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DpOutcome {
    pub agent: usize,
    /// Allocated through the high-good branch.
    pub via_high: bool,
    /// Phase the good was allocated in.
    pub phase: u64,
    pub phase_ended: bool,
}

/// One step of Deferred-Priority on `good`.
pub fn dp_step(
    ps: &mut PriorityState,
    agents: &[AgentProfile],
    good: &GoodEvent,
) -> Result<DpOutcome, AlgorithmError> {
    let n = ps.n;
    ps.t = good.index;
    let high: Vec<bool> = (0..n).map(|i| is_high(&agents[i], good, i)).collect();
    for i in 0..n {
        if high[i] {
            ps.h[i] -= 1;
        } else {
            ps.l[i] -= 1;
        }
    }
    let pick = |key: &[i64], member: &dyn Fn(usize) -> bool| {
        (0..n).filter(|&i| member(i)).min_by_key(|&i| (key[i], i))
    };
    let phase = ps.phase;
    let (agent, via_high) = if let Some(j) = pick(&ps.h, &|i| high[i] && !ps.chi[i]) {
        ps.h[j] += 3 * n as i64 - 2;
        ps.chi[j] = true;
        ps.high += 1;
        (j, true)
    } else if let Some(j) = pick(&ps.l, &|i| is_low(&agents[i], good, i) && !ps.chi[i]) {
        ps.l[j] = (2 * n + ps.t) as i64;
        if ps.phase == 0 {
            ps.chi[j] = true;
        }
        ps.low += 1;
        (j, false)
    } else {
        return Err(AlgorithmError::Invariant {
            t: ps.t,
            what: "no active agent can take the good".into(),
        });
    };
    let phase_ended =
        (ps.phase == 0 && ps.low + ps.high == n) || (ps.phase > 0 && ps.low.max(ps.high) == n);
    if phase_ended {
        ps.phase += 1;
        ps.low = 0;
        ps.high = 0;
        ps.l.iter_mut().for_each(|x| *x = 2 * n as i64 - 1);
        ps.chi.iter_mut().for_each(|x| *x = false);
    }
    Ok(DpOutcome {
        agent,
        via_high,
        phase,
        phase_ended,
    })
}

/// Priority state after a step, recorded in traces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrioritySnapshot {
    pub outcome: DpOutcome,
    pub state: PriorityState,
}

#[derive(Debug, Clone, Default)]
pub struct DeferredPriority {
    state: Option<PriorityState>,
}

impl DeferredPriority {
    pub fn new() -> Self {
        Self::default()
    }
}

impl OnlineAlgorithm for DeferredPriority {
    fn name(&self) -> &'static str {
        "deferred-priority"
    }

    fn decide(&mut self, ctx: &StepContext<'_>) -> Result<Decision, AlgorithmError> {
        if let crate::model::GoodValues::RealVector(_) = ctx.good.values {
            return Err(AlgorithmError::Unsupported {
                alg: self.name(),
                why: "needs a two-value instance".into(),
            });
        }
        let ps = self
            .state
            .get_or_insert_with(|| PriorityState::new(ctx.n()));
        let outcome = dp_step(ps, ctx.agents, ctx.good)?;
        Ok(Decision {
            agent: outcome.agent,
            detail: StepDetail::Priority(PrioritySnapshot {
                outcome,
                state: ps.clone(),
            }),
        })
    }
}

/// Level-set condition: at most k agents have H <= k, for every k in 0..=n.
pub fn check_level_sets(ps: &PriorityState) -> bool {
    (0..=ps.n).all(|k| ps.h.iter().filter(|&&x| x <= k as i64).count() <= k)
}

/// Allocation-count guarantees after a step, for a stream of `m` goods.
pub fn check_allocation_counts(state: &AllocationState, m: usize) -> Vec<Violation> {
    let n = state.n();
    let t = state.t;
    let mut out = Vec::new();
    for i in 0..n {
        let got = state.goods_received[i];
        if t <= n && got > 1 {
            out.push(Violation::new(
                t,
                Some(i),
                "first-goods",
                format!("{got} goods by t={t}"),
            ));
        }
        if t == n.min(m) && m >= n && got != 1 {
            out.push(Violation::new(
                t,
                Some(i),
                "first-goods",
                format!("{got} goods at t=n"),
            ));
        }
        let seen = state.high_seen[i];
        let need = seen / (3 * n - 2);
        let have = state.high_received[i];
        if have < need || (seen >= n && have == 0) {
            out.push(Violation::new(
                t,
                Some(i),
                "high-share",
                format!("{have} high goods after seeing {seen}"),
            ));
        }
        if t >= n {
            let need = (t - n) / (2 * n - 1) + 1;
            if got < need {
                out.push(Violation::new(
                    t,
                    Some(i),
                    "goods-share",
                    format!("{got} goods, need {need}"),
                ));
            }
        }
    }
    out
}

/// Per-type MMS floors and the proportionality floor for agents holding a
/// high good.
pub fn check_fairness_floors(
    instance: &Instance,
    state: &AllocationState,
    reports: &[FairnessReport],
    tol: f64,
) -> Vec<Violation> {
    let n = instance.n() as f64;
    let mut out = Vec::new();
    for r in reports {
        let i = r.agent;
        let kind = instance.agents[i].kind;
        let floor = match kind {
            AgentType::Type2 => Some((1.0, 2.0)),
            AgentType::Type3 => Some((1.0, 3.0)),
            AgentType::Type1 => Some((1.0, 2.0 * n - 1.0)),
            AgentType::Type0 => None,
        };
        if let (Some((p, q)), Some(ratio)) = (floor, r.mms_ratio) {
            if !ratio.at_least(p, q, tol) {
                out.push(Violation::new(
                    r.t,
                    Some(i),
                    "mms-floor",
                    format!("{kind:?} ratio {ratio} below {p}/{q}"),
                ));
            }
        }
        if kind == AgentType::Type1
            && state.high_received[i] >= 1
            && !r.prop.at_least(1.0, 4.0, tol)
        {
            out.push(Violation::new(
                r.t,
                Some(i),
                "prop-floor",
                format!("ratio {} below 1/4", r.prop),
            ));
        }
    }
    out
}

/// Runtime verifier for Deferred-Priority runs.
#[derive(Debug, Clone)]
pub struct DpAudit {
    n: usize,
    tol: f64,
    violations: Vec<Violation>,
    phase_len: usize,
    high_in_phase: Vec<bool>,
    last_low: Vec<Option<usize>>,
}

impl DpAudit {
    pub fn new(n: usize, tol: f64) -> Self {
        DpAudit {
            n,
            tol,
            violations: Vec::new(),
            phase_len: 0,
            high_in_phase: vec![false; n],
            last_low: vec![None; n],
        }
    }

    fn structural(&mut self, snap: &PrioritySnapshot) {
        let t = snap.state.t;
        let o = snap.outcome;
        let j = o.agent;
        let n = self.n;
        let mut push = |agent, check, detail| {
            self.violations
                .push(Violation::new(t, agent, check, detail))
        };
        for (i, &h) in snap.state.h.iter().enumerate() {
            if h < 1 {
                push(Some(i), "h-positive", format!("H = {h}"));
            }
        }
        if !check_level_sets(&snap.state) {
            push(None, "level-sets", format!("H = {:?}", snap.state.h));
        }
        self.phase_len += 1;
        if o.phase > 0 {
            if self.phase_len > 2 * n - 1 {
                push(
                    None,
                    "phase-length",
                    format!("phase {} at {} steps", o.phase, self.phase_len),
                );
            }
            if self.high_in_phase[j] {
                push(
                    Some(j),
                    "inactive-after-high",
                    "served again in the same phase".into(),
                );
            }
            if !o.via_high {
                if let Some(t1) = self.last_low[j] {
                    let waited = (0..n).all(|k| {
                        k == j || self.high_in_phase[k] || self.last_low[k].is_some_and(|s| s > t1)
                    });
                    if !waited {
                        push(
                            Some(j),
                            "low-rotation",
                            format!("second low good since t={t1}"),
                        );
                    }
                }
                self.last_low[j] = Some(t);
            } else {
                self.high_in_phase[j] = true;
            }
        }
        if o.phase_ended {
            if o.phase == 0 && self.phase_len != n {
                push(
                    None,
                    "phase-length",
                    format!("phase 0 lasted {}", self.phase_len),
                );
            }
            self.phase_len = 0;
            self.high_in_phase.iter_mut().for_each(|x| *x = false);
            self.last_low.iter_mut().for_each(|x| *x = None);
        }
    }
}

impl Auditor for DpAudit {
    fn observe(
        &mut self,
        instance: &Instance,
        state: &AllocationState,
        step: &TraceStep,
        reports: &[FairnessReport],
    ) {
        if let StepDetail::Priority(snap) = &step.detail {
            self.structural(snap);
        }
        self.violations
            .extend(check_allocation_counts(state, instance.m()));
        self.violations
            .extend(check_fairness_floors(instance, state, reports, self.tol));
    }

    fn finish(&mut self, instance: &Instance, state: &AllocationState) {
        let m = instance.m();
        if m < self.n && self.phase_len != m {
            self.violations.push(Violation::new(
                state.t,
                None,
                "phase-length",
                format!("phase 0 lasted {} of {m} goods", self.phase_len),
            ));
        }
    }

    fn violations(&self) -> &[Violation] {
        &self.violations
    }
}
