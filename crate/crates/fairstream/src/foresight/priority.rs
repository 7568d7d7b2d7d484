//! Priority-Matching: n agents, n-1 goods of lookahead.
//!
//! Goods are handled in rounds of n. At the start of a round the envy graph
//! is topologically sorted; agents earlier in the order get larger weights,
//! doubled for goods they value at alpha. A maximum-weight matching of the
//! round's goods to agents fixes the whole round.

use num_bigint::BigInt;

use super::assignment::{assign_hungarian, narrow};
use crate::algorithm::{
    AlgorithmError, Decision, OnlineAlgorithm, StepContext, StepDetail, TraceStep,
};
use crate::audit::{Auditor, Violation};
use crate::metrics::{build_envy_graph, strictly_greater, topo_sort, FairnessReport};
use crate::model::{is_high, AgentProfile, GoodEvent, GoodValues, Instance};
use crate::state::AllocationState;

/// Weight of a good for the agent at 1-based position `rank`, scaled by
/// `(2n)^(n-1)` so that it is an integer: `(1 + high) (2n+1)^(n-rank) (2n)^(rank-1)`.
pub fn aux_weight(n: usize, rank: usize, high: bool) -> BigInt {
    let up = BigInt::from(2 * n + 1).pow((n - rank) as u32);
    let down = BigInt::from(2 * n).pow((rank - 1) as u32);
    let w = up * down;
    if high {
        w * 2
    } else {
        w
    }
}

/// Matching chosen at the start of a round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundPlan {
    /// Agents in topological order of the envy graph.
    pub order: Vec<usize>,
    /// 1-based times of the round's goods.
    pub goods: Vec<usize>,
    /// Good time per agent; `None` for agents left out of a short round.
    pub assignment: Vec<Option<usize>>,
    /// Scaled weights, agents by goods.
    pub weights: Vec<Vec<BigInt>>,
}

impl RoundPlan {
    /// Total weight of an assignment given as good times per agent.
    pub fn weight_of(&self, assignment: &[Option<usize>]) -> BigInt {
        assignment
            .iter()
            .enumerate()
            .filter_map(|(i, g)| {
                g.map(|g| {
                    let col = self.goods.iter().position(|&x| x == g).expect("round good");
                    self.weights[i][col].clone()
                })
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundNote {
    /// 1-based round number.
    pub round: usize,
    /// Set on the first step of each round.
    pub plan: Option<RoundPlan>,
}

/// Plans one round: `goods` holds the current good and the visible ones.
pub fn plan_round(
    agents: &[AgentProfile],
    state: &AllocationState,
    goods: &[&GoodEvent],
) -> Result<RoundPlan, AlgorithmError> {
    let n = agents.len();
    let order = topo_sort(&build_envy_graph(state)).map_err(|e| AlgorithmError::Invariant {
        t: state.t + 1,
        what: e.to_string(),
    })?;
    let mut rank = vec![0; n];
    for (pos, &a) in order.iter().enumerate() {
        rank[a] = pos + 1;
    }
    let weights: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            goods
                .iter()
                .map(|g| aux_weight(n, rank[i], is_high(&agents[i], g, i)))
                .collect()
        })
        .collect();
    // Pad to a square matrix with zero-weight placeholder goods.
    let square: Vec<Vec<BigInt>> = weights
        .iter()
        .map(|row| {
            let mut r = row.clone();
            r.resize(n, BigInt::from(0));
            r
        })
        .collect();
    let cols = match narrow(&square) {
        Some(small) => assign_hungarian(&small),
        None => assign_hungarian(&square),
    };
    let assignment = cols
        .iter()
        .map(|&c| goods.get(c).map(|g| g.index))
        .collect();
    Ok(RoundPlan {
        order,
        goods: goods.iter().map(|g| g.index).collect(),
        assignment,
        weights,
    })
}

#[derive(Debug, Clone, Default)]
pub struct PriorityMatching {
    round: usize,
    plan: Vec<(usize, usize)>,
}

impl PriorityMatching {
    pub fn new() -> Self {
        Self::default()
    }
}

impl OnlineAlgorithm for PriorityMatching {
    fn name(&self) -> &'static str {
        "priority-matching"
    }

    fn required_foresight(&self, n: usize) -> usize {
        n.saturating_sub(1)
    }

    fn decide(&mut self, ctx: &StepContext<'_>) -> Result<Decision, AlgorithmError> {
        if let GoodValues::RealVector(_) = ctx.good.values {
            return Err(AlgorithmError::Unsupported {
                alg: self.name(),
                why: "needs a two-value instance".into(),
            });
        }
        let n = ctx.n();
        let t = ctx.t();
        let mut note = None;
        if (t - 1) % n == 0 {
            let visible = ctx.window.len().min(n - 1);
            let goods: Vec<&GoodEvent> = std::iter::once(ctx.good)
                .chain(ctx.window[..visible].iter())
                .collect();
            let plan = plan_round(ctx.agents, ctx.state, &goods)?;
            self.round = (t - 1) / n + 1;
            self.plan = plan
                .assignment
                .iter()
                .enumerate()
                .filter_map(|(a, g)| g.map(|g| (g, a)))
                .collect();
            note = Some(plan);
        }
        let agent = self
            .plan
            .iter()
            .find(|(g, _)| *g == t)
            .map(|&(_, a)| a)
            .ok_or(AlgorithmError::Invariant {
                t,
                what: "good missing from the round plan".into(),
            })?;
        Ok(Decision {
            agent,
            detail: StepDetail::Round(RoundNote {
                round: self.round,
                plan: note,
            }),
        })
    }
}

/// Runtime verifier for Priority-Matching runs.
#[derive(Debug, Clone)]
pub struct PriorityAudit {
    n: usize,
    tol: f64,
    violations: Vec<Violation>,
    plan: Option<RoundPlan>,
    /// First step at which each agent fell below 1/2-EF1.
    first_half_failure: Vec<Option<usize>>,
    /// Outcome of the last, partial round (if any), not held to the
    /// round-boundary guarantees.
    pub partial_round: Option<String>,
}

impl PriorityAudit {
    pub fn new(n: usize, tol: f64) -> Self {
        PriorityAudit {
            n,
            tol,
            violations: Vec::new(),
            plan: None,
            first_half_failure: vec![None; n],
            partial_round: None,
        }
    }

    /// Agents that fell below 1/2-EF1 at some step.
    pub fn recovery_triggers(&self) -> usize {
        self.first_half_failure.iter().flatten().count()
    }

    fn boundary(
        &mut self,
        instance: &Instance,
        state: &AllocationState,
        reports: &[FairnessReport],
    ) {
        let t = state.t;
        let n = self.n;
        for r in reports {
            if !r.ef1.at_least(1.0, 1.0, self.tol) {
                self.violations.push(Violation::new(
                    t,
                    Some(r.agent),
                    "ef1-round",
                    format!("ratio {}", r.ef1),
                ));
            }
            if let Some(m) = r.mms_ratio {
                if !m.at_least(1.0, n as f64, self.tol) {
                    self.violations.push(Violation::new(
                        t,
                        Some(r.agent),
                        "mms-round",
                        format!("ratio {m}"),
                    ));
                }
            }
            if state.goods_received[r.agent] != t / n {
                self.violations.push(Violation::new(
                    t,
                    Some(r.agent),
                    "round-sizes",
                    format!("{} goods", state.goods_received[r.agent]),
                ));
            }
        }
        let graph = build_envy_graph(state);
        if let Err(e) = topo_sort(&graph) {
            self.violations
                .push(Violation::new(t, None, "acyclic", e.to_string()));
        }
        for e in &graph.edges {
            let p = &instance.agents[e.from];
            if strictly_greater(e.magnitude, p.alpha - p.beta) {
                self.violations.push(Violation::new(
                    t,
                    Some(e.from),
                    "edge-envy",
                    format!("envy {} toward agent {}", e.magnitude, e.to + 1),
                ));
            }
        }
    }

    /// Swapping the round goods of an envious pair never gains weight.
    fn exchange(&mut self, state: &AllocationState, plan: &RoundPlan) {
        let base = plan.weight_of(&plan.assignment);
        for e in &build_envy_graph(state).edges {
            let mut swapped = plan.assignment.clone();
            swapped.swap(e.from, e.to);
            if plan.weight_of(&swapped) > base {
                self.violations.push(Violation::new(
                    state.t,
                    Some(e.from),
                    "matching-exchange",
                    format!("swap with agent {} gains weight", e.to + 1),
                ));
            }
        }
    }
}

impl Auditor for PriorityAudit {
    fn observe(
        &mut self,
        instance: &Instance,
        state: &AllocationState,
        step: &TraceStep,
        reports: &[FairnessReport],
    ) {
        let t = state.t;
        let n = self.n;
        if let StepDetail::Round(RoundNote { plan: Some(p), .. }) = &step.detail {
            self.plan = Some(p.clone());
        }
        for r in reports {
            let i = r.agent;
            if !r.ef2.at_least(1.0, 1.0, self.tol) {
                self.violations.push(Violation::new(
                    t,
                    Some(i),
                    "ef2",
                    format!("ratio {}", r.ef2),
                ));
            }
            let half = r.ef1.at_least(1.0, 2.0, self.tol);
            match self.first_half_failure[i] {
                None if !half => self.first_half_failure[i] = Some(t),
                Some(t0) if !half && t >= t0.div_ceil(n) * n => {
                    self.violations.push(Violation::new(
                        t,
                        Some(i),
                        "ef1-recovery",
                        format!("ratio {} after failing at t={t0}", r.ef1),
                    ));
                }
                _ => {}
            }
        }
        if let Some(plan) = self.plan.take() {
            if plan.goods.last() == Some(&t) {
                self.exchange(state, &plan);
            } else {
                self.plan = Some(plan);
            }
        }
        if t % n == 0 {
            self.boundary(instance, state, reports);
        } else if t == instance.m() {
            let worst = reports
                .iter()
                .map(|r| r.ef1)
                .fold(crate::metrics::FairRatio::ONE, |a, b| a.min(b));
            self.partial_round = Some(format!(
                "partial last round ends at t={t} with min EF1 ratio {worst}"
            ));
        }
    }

    fn violations(&self) -> &[Violation] {
        &self.violations
    }
}
