//! Naive-Matching: two agents, one good of lookahead.
//!
//! Goods are taken in pairs. At an odd step the pair (g, g') is classified
//! by both agents' high/low patterns, g is allocated and g' is committed.
//! A counter alternates which agent wins contested pairs.

use super::patterns::{lookup, PairRule, Pattern};
use crate::algorithm::{
    AlgorithmError, Decision, OnlineAlgorithm, StepContext, StepDetail, TraceStep,
};
use crate::audit::{Auditor, Violation};
use crate::metrics::{strictly_greater, FairnessReport};
use crate::model::{is_high, GoodValues, Instance};
use crate::state::AllocationState;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaiveNote {
    /// Counter after the step.
    pub ctr: u8,
    /// (good, agent) promised for the next step.
    pub committed: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Default)]
pub struct NaiveMatching {
    ctr: u8,
    commitment: Option<(usize, usize)>,
}

impl NaiveMatching {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn ctr(&self) -> u8 {
        self.ctr
    }

    /// Bumps the counter and returns the agent that wins the contested good.
    fn contest(&mut self) -> usize {
        self.ctr = (self.ctr + 1) % 2;
        if self.ctr == 1 {
            0
        } else {
            1
        }
    }
}

impl OnlineAlgorithm for NaiveMatching {
    fn name(&self) -> &'static str {
        "naive-matching"
    }

    fn required_foresight(&self, _n: usize) -> usize {
        1
    }

    fn decide(&mut self, ctx: &StepContext<'_>) -> Result<Decision, AlgorithmError> {
        if ctx.n() != 2 {
            return Err(AlgorithmError::Unsupported {
                alg: self.name(),
                why: format!("needs exactly 2 agents, got {}", ctx.n()),
            });
        }
        if let GoodValues::RealVector(_) = ctx.good.values {
            return Err(AlgorithmError::Unsupported {
                alg: self.name(),
                why: "needs a two-value instance".into(),
            });
        }
        let t = ctx.t();
        let note = |ctr, committed| StepDetail::Naive(NaiveNote { ctr, committed });
        if t % 2 == 0 {
            return match self.commitment.take() {
                Some((g, agent)) if g == t => Ok(Decision {
                    agent,
                    detail: note(self.ctr, None),
                }),
                _ => Err(AlgorithmError::MissingCommitment { t }),
            };
        }
        let Some(next) = ctx.window.first() else {
            // Unpaired last good: the agent the counter marks as behind.
            return Ok(Decision {
                agent: self.ctr as usize,
                detail: note(self.ctr, None),
            });
        };
        let view = |i: usize| {
            let p = &ctx.agents[i];
            Pattern::new(is_high(p, ctx.good, i), is_high(p, next, i))
        };
        let gets_g = match lookup(view(0), view(1)) {
            PairRule::FirstTakesG => 0,
            PairRule::FirstTakesNext => 1,
            PairRule::ContestedNext => 1 - self.contest(),
            PairRule::ContestedG => self.contest(),
        };
        let committed = (next.index, 1 - gets_g);
        self.commitment = Some(committed);
        Ok(Decision {
            agent: gets_g,
            detail: note(self.ctr, Some(committed)),
        })
    }
}

/// Runtime verifier for Naive-Matching runs.
#[derive(Debug, Clone)]
pub struct NaiveAudit {
    tol: f64,
    violations: Vec<Violation>,
}

impl NaiveAudit {
    pub fn new(tol: f64) -> Self {
        NaiveAudit {
            tol,
            violations: Vec::new(),
        }
    }
}

/// Even-step invariant: equal sizes, and only the agent the counter marks
/// may envy, by at most its alpha - beta.
pub fn check_pair_invariant(
    instance: &Instance,
    state: &AllocationState,
    ctr: u8,
) -> Vec<Violation> {
    let t = state.t;
    let mut out = Vec::new();
    if state.goods_received[0] != t / 2 || state.goods_received[1] != t / 2 {
        out.push(Violation::new(
            t,
            None,
            "pair-sizes",
            format!("sizes {:?}", state.goods_received),
        ));
    }
    let behind = ctr as usize;
    let ahead = 1 - behind;
    if strictly_greater(state.value_of(ahead, behind), state.value_of(ahead, ahead)) {
        out.push(Violation::new(
            t,
            Some(ahead),
            "pair-envy",
            "favoured agent envies".into(),
        ));
    }
    let p = &instance.agents[behind];
    let envy = state.value_of(behind, behind) + (p.alpha - p.beta);
    if strictly_greater(state.value_of(behind, ahead), envy) {
        out.push(Violation::new(
            t,
            Some(behind),
            "pair-envy",
            format!("envy exceeds {}", p.alpha - p.beta),
        ));
    }
    out
}

impl Auditor for NaiveAudit {
    fn observe(
        &mut self,
        instance: &Instance,
        state: &AllocationState,
        step: &TraceStep,
        reports: &[FairnessReport],
    ) {
        let t = state.t;
        for r in reports {
            if !r.ef2.at_least(1.0, 1.0, self.tol) {
                self.violations.push(Violation::new(
                    t,
                    Some(r.agent),
                    "ef2",
                    format!("ratio {}", r.ef2),
                ));
            }
            if t % 2 == 0 && !r.ef1.at_least(1.0, 1.0, self.tol) {
                self.violations.push(Violation::new(
                    t,
                    Some(r.agent),
                    "ef1-even",
                    format!("ratio {}", r.ef1),
                ));
            }
        }
        if let (0, StepDetail::Naive(note)) = (t % 2, &step.detail) {
            self.violations
                .extend(check_pair_invariant(instance, state, note.ctr));
        }
    }

    fn violations(&self) -> &[Violation] {
        &self.violations
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithm::simulate;
    use crate::model::{Flavor, GoodEvent};

    fn pair(g: [bool; 2], next: [bool; 2]) -> Instance {
        Instance::new(
            &[(5.0, 1.0), (5.0, 1.0)],
            vec![
                GoodEvent::mask(1, g.to_vec()),
                GoodEvent::mask(2, next.to_vec()),
            ],
            Flavor::TwoValue,
            1,
        )
        .unwrap()
    }

    fn run(inst: &Instance) -> (Vec<usize>, u8) {
        let mut alg = NaiveMatching::new();
        let trace = simulate(&mut alg, inst, |_, _| {}).unwrap();
        (trace.choices(), alg.ctr())
    }

    #[test]
    fn contested_next_goes_to_agent_one_first() {
        // g low for both, g' high for both.
        let (choices, ctr) = run(&pair([false, false], [true, true]));
        assert_eq!(ctr, 1);
        assert_eq!(choices, vec![1, 0]);
    }

    #[test]
    fn table_rows() {
        // Agent 1 sees (low, high), agent 2 sees (low, low): agent 1 takes g'.
        assert_eq!(run(&pair([false, false], [true, false])).0, vec![1, 0]);
        assert_eq!(run(&pair([false, false], [false, false])).0, vec![0, 1]);
    }

    #[test]
    fn odd_tail_goes_to_agent_behind() {
        let inst = Instance::new(
            &[(5.0, 1.0), (5.0, 1.0)],
            vec![
                GoodEvent::mask(1, vec![false, false]),
                GoodEvent::mask(2, vec![true, true]),
                GoodEvent::mask(3, vec![true, true]),
            ],
            Flavor::TwoValue,
            1,
        )
        .unwrap();
        // ctr = 1 after the contested pair, so agent 2 is behind.
        assert_eq!(run(&inst).0, vec![1, 0, 1]);
    }

    #[test]
    fn missing_commitment_is_an_error() {
        let inst = pair([false, false], [false, false]);
        let mut alg = NaiveMatching::new();
        let state = AllocationState::new(2);
        let ctx = StepContext {
            agents: &inst.agents,
            state: &state,
            good: &inst.goods[1],
            window: &[],
        };
        assert_eq!(
            alg.decide(&ctx),
            Err(AlgorithmError::MissingCommitment { t: 2 })
        );
    }
}
