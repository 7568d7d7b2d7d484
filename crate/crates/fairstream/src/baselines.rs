//! Reference rules without fairness guarantees.

use crate::algorithm::{AlgorithmError, Decision, OnlineAlgorithm, StepContext};
use crate::model::value;

/// Good t goes to agent (t - 1) mod n.
#[derive(Debug, Clone, Copy, Default)]
pub struct RoundRobin;

impl OnlineAlgorithm for RoundRobin {
    fn name(&self) -> &'static str {
        "round-robin"
    }

    fn decide(&mut self, ctx: &StepContext<'_>) -> Result<Decision, AlgorithmError> {
        Ok(Decision::plain((ctx.t() - 1) % ctx.n()))
    }
}

/// Each good goes to an agent valuing it most, lowest index on ties.
///
/// Unlike the other rules this compares absolute values, so its choices
/// change when one agent's valuation is rescaled.
#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyWelfare;

impl OnlineAlgorithm for GreedyWelfare {
    fn name(&self) -> &'static str {
        "greedy-welfare"
    }

    fn decide(&mut self, ctx: &StepContext<'_>) -> Result<Decision, AlgorithmError> {
        let mut best = 0;
        let mut best_v = f64::NEG_INFINITY;
        for (i, p) in ctx.agents.iter().enumerate() {
            let v = value(p, ctx.good, i);
            if v > best_v {
                best = i;
                best_v = v;
            }
        }
        Ok(Decision::plain(best))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithm::simulate;
    use crate::model::{Flavor, GoodEvent, Instance};

    #[test]
    fn baselines_choose_as_documented() {
        let inst = Instance::new(
            &[(5.0, 1.0), (2.0, 1.0), (5.0, 1.0)],
            vec![
                GoodEvent::mask(1, vec![false, true, false]),
                GoodEvent::mask(2, vec![false, false, true]),
                GoodEvent::mask(3, vec![false, false, false]),
                GoodEvent::mask(4, vec![true, false, true]),
            ],
            Flavor::TwoValue,
            0,
        )
        .unwrap();
        let rr = simulate(&mut RoundRobin, &inst, |_, _| {}).unwrap();
        assert_eq!(rr.choices(), vec![0, 1, 2, 0]);
        let gw = simulate(&mut GreedyWelfare, &inst, |_, _| {}).unwrap();
        assert_eq!(gw.choices(), vec![1, 2, 0, 0]);
    }
}
