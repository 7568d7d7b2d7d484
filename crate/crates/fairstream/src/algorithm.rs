//! Online algorithm interface and the simulation loop.

use thiserror::Error;

use crate::deferred_priority::PrioritySnapshot;
use crate::foresight::{NaiveNote, RoundNote};
use crate::model::{is_high, AgentProfile, GoodEvent, Instance};
use crate::state::AllocationState;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgorithmError {
    #[error("internal invariant violated at t={t}: {what}")]
    Invariant { t: usize, what: String },
    #[error("no committed recipient for good {t}")]
    MissingCommitment { t: usize },
    #[error("{alg} cannot run here: {why}")]
    Unsupported { alg: &'static str, why: String },
    #[error("{alg} needs foresight {needed}, instance allows {given}")]
    Foresight {
        alg: &'static str,
        needed: usize,
        given: usize,
    },
    #[error("{alg} chose agent {agent}, outside 0..{n}")]
    BadChoice {
        alg: &'static str,
        agent: usize,
        n: usize,
    },
}

/// What an algorithm sees when a good arrives.
pub struct StepContext<'a> {
    pub agents: &'a [AgentProfile],
    pub state: &'a AllocationState,
    pub good: &'a GoodEvent,
    /// The next goods, up to the foresight horizon.
    pub window: &'a [GoodEvent],
}

impl StepContext<'_> {
    pub fn n(&self) -> usize {
        self.agents.len()
    }

    /// 1-based time of the current good.
    pub fn t(&self) -> usize {
        self.good.index
    }
}

/// Algorithm-specific bookkeeping recorded alongside each choice.
#[derive(Debug, Clone, PartialEq)]
pub enum StepDetail {
    None,
    Priority(PrioritySnapshot),
    Naive(NaiveNote),
    Round(RoundNote),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub agent: usize,
    pub detail: StepDetail,
}

impl Decision {
    pub fn plain(agent: usize) -> Self {
        Decision {
            agent,
            detail: StepDetail::None,
        }
    }
}

/// A deterministic online allocation rule.
pub trait OnlineAlgorithm {
    fn name(&self) -> &'static str;

    /// Goods of lookahead the rule needs with `n` agents.
    fn required_foresight(&self, _n: usize) -> usize {
        0
    }

    fn decide(&mut self, ctx: &StepContext<'_>) -> Result<Decision, AlgorithmError>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub t: usize,
    pub agent: usize,
    /// The recipient values the good at alpha.
    pub as_high: bool,
    pub detail: StepDetail,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub algorithm: &'static str,
    pub n: usize,
    pub steps: Vec<TraceStep>,
}

impl Trace {
    pub fn choices(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.agent).collect()
    }
}

/// Asks `alg` for one good's recipient and applies it to `state`.
pub fn step_once(
    alg: &mut dyn OnlineAlgorithm,
    agents: &[AgentProfile],
    state: &mut AllocationState,
    good: &GoodEvent,
    window: &[GoodEvent],
) -> Result<TraceStep, AlgorithmError> {
    let decision = alg.decide(&StepContext {
        agents,
        state,
        good,
        window,
    })?;
    let n = agents.len();
    if decision.agent >= n {
        return Err(AlgorithmError::BadChoice {
            alg: alg.name(),
            agent: decision.agent,
            n,
        });
    }
    state.allocate(agents, good, decision.agent);
    Ok(TraceStep {
        t: good.index,
        agent: decision.agent,
        as_high: is_high(&agents[decision.agent], good, decision.agent),
        detail: decision.detail,
    })
}

/// Runs `alg` over the whole instance, calling `observe` after every step.
pub fn simulate<F>(
    alg: &mut dyn OnlineAlgorithm,
    instance: &Instance,
    mut observe: F,
) -> Result<Trace, AlgorithmError>
where
    F: FnMut(&AllocationState, &TraceStep),
{
    let needed = alg.required_foresight(instance.n());
    if needed > instance.foresight {
        return Err(AlgorithmError::Foresight {
            alg: alg.name(),
            needed,
            given: instance.foresight,
        });
    }
    let mut state = AllocationState::new(instance.n());
    let mut steps = Vec::with_capacity(instance.m());
    for good in &instance.goods {
        let window = instance.window(good.index);
        let step = step_once(alg, &instance.agents, &mut state, good, window)?;
        observe(&state, &step);
        steps.push(step);
    }
    Ok(Trace {
        algorithm: alg.name(),
        n: instance.n(),
        steps,
    })
}

/// Replays fixed recipients on an instance, calling `observe` after each.
pub fn replay<F>(instance: &Instance, choices: &[usize], mut observe: F) -> AllocationState
where
    F: FnMut(&AllocationState),
{
    let mut state = AllocationState::new(instance.n());
    for (good, &agent) in instance.goods.iter().zip(choices) {
        state.allocate(&instance.agents, good, agent);
        observe(&state);
    }
    state
}
