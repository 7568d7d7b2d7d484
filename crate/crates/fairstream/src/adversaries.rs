//! Adaptive adversaries that build worst-case streams against a no-foresight
//! algorithm, and a fixed instance that defeats any algorithm.
//!
//! Each adversary picks the next good after seeing every earlier choice, so
//! the resulting stream is specific to the algorithm it ran against. The
//! finished stream is returned as an ordinary instance for replay.

use serde_json::{json, Value};
use thiserror::Error;

use crate::algorithm::{step_once, AlgorithmError, OnlineAlgorithm};
use crate::metrics::{report_all, FairRatio, FairnessReport, MetricError};
use crate::model::{Flavor, GoodEvent, Instance, ModelError};
use crate::state::AllocationState;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdversaryError {
    #[error("adversaries need a no-foresight algorithm; {alg} needs {needed}")]
    Foresight { alg: &'static str, needed: usize },
    #[error("need at least {min} agents, got {n}")]
    TooFewAgents { n: usize, min: usize },
    #[error("alpha must be at least n = {n}, got {alpha}")]
    AlphaTooSmall { n: usize, alpha: f64 },
    #[error("no step reached the bound {bound}")]
    NoWitness { bound: f64 },
    #[error(transparent)]
    Algorithm(#[from] AlgorithmError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// The step and agent at which a guarantee is shown to fail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub t: usize,
    pub agent: usize,
    pub metric: &'static str,
    pub ratio: FairRatio,
    /// The claimed bound as (p, q), meaning p/q.
    pub bound: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdversaryTrace {
    pub algorithm: &'static str,
    /// The stream as built, with foresight 0.
    pub instance: Instance,
    pub choices: Vec<usize>,
    pub reports: Vec<Vec<FairnessReport>>,
    pub witness: Witness,
}

impl AdversaryTrace {
    /// Smallest ratio of `metric` over all steps and agents.
    pub fn min_ratio(&self, metric: &str) -> Option<FairRatio> {
        self.reports
            .iter()
            .flatten()
            .filter_map(|r| pick(r, metric))
            .reduce(FairRatio::min)
    }

    pub fn to_json(&self) -> Value {
        let w = &self.witness;
        json!({
            "algorithm": self.algorithm,
            "n": self.instance.n(),
            "agents": self.instance.agents.iter().map(|a| json!({"alpha": a.alpha, "beta": a.beta})).collect::<Vec<_>>(),
            "choices": self.choices.iter().map(|a| a + 1).collect::<Vec<_>>(),
            "witness": {
                "t": w.t,
                "agent": w.agent + 1,
                "metric": w.metric,
                "ratio": w.ratio.value(),
                "ratio_num": w.ratio.num,
                "ratio_den": w.ratio.den,
                "bound": w.bound.0 / w.bound.1,
            },
            "reports": self.reports.iter().flatten().map(|r| json!({
                "t": r.t,
                "agent": r.agent + 1,
                "ef1": r.ef1.value(),
                "mms_value": r.mms_value,
                "mms_ratio": r.mms_ratio.map(|x| x.value()),
            })).collect::<Vec<_>>(),
        })
    }
}

fn pick(r: &FairnessReport, metric: &str) -> Option<FairRatio> {
    match metric {
        "ef" => Some(r.ef),
        "ef1" => Some(r.ef1),
        "ef2" => Some(r.ef2),
        "prop" => Some(r.prop),
        "mms" => r.mms_ratio,
        _ => None,
    }
}

/// Feeds goods one at a time to an algorithm with no lookahead.
struct Driver<'a> {
    alg: &'a mut dyn OnlineAlgorithm,
    instance: Instance,
    state: AllocationState,
    choices: Vec<usize>,
    reports: Vec<Vec<FairnessReport>>,
}

impl<'a> Driver<'a> {
    fn new(
        alg: &'a mut dyn OnlineAlgorithm,
        profiles: &[(f64, f64)],
    ) -> Result<Self, AdversaryError> {
        let needed = alg.required_foresight(profiles.len());
        if needed > 0 {
            return Err(AdversaryError::Foresight {
                alg: alg.name(),
                needed,
            });
        }
        let instance = Instance::new(profiles, Vec::new(), Flavor::TwoValue, 0)?;
        Ok(Driver {
            alg,
            state: AllocationState::new(instance.n()),
            instance,
            choices: Vec::new(),
            reports: Vec::new(),
        })
    }

    fn t(&self) -> usize {
        self.state.t
    }

    /// Offers a good with the given high flags and returns its recipient.
    fn feed(&mut self, high: Vec<bool>) -> Result<usize, AdversaryError> {
        let good = GoodEvent::mask(self.t() + 1, high);
        let step = step_once(self.alg, &self.instance.agents, &mut self.state, &good, &[])?;
        self.instance.goods.push(good);
        self.choices.push(step.agent);
        self.reports.push(report_all(&self.state, &self.instance)?);
        Ok(step.agent)
    }

    /// Closes the run; the witness is the earliest smallest ratio.
    fn finish(
        self,
        metric: &'static str,
        bound: (f64, f64),
    ) -> Result<AdversaryTrace, AdversaryError> {
        let mut best: Option<(FairRatio, usize, usize)> = None;
        for row in &self.reports {
            for r in row {
                if let Some(x) = pick(r, metric) {
                    if best.is_none_or(|(b, _, _)| x.cmp_ratio(&b).is_lt()) {
                        best = Some((x, r.t, r.agent));
                    }
                }
            }
        }
        let no = AdversaryError::NoWitness {
            bound: bound.0 / bound.1,
        };
        let (ratio, t, agent) = best.ok_or(no.clone())?;
        if !ratio.at_most(bound.0, bound.1, 0.0) {
            return Err(no);
        }
        Ok(AdversaryTrace {
            algorithm: self.alg.name(),
            instance: self.instance,
            choices: self.choices,
            reports: self.reports,
            witness: Witness {
                t,
                agent,
                metric,
                ratio,
                bound,
            },
        })
    }
}

/// Forces EF1 ratio at most 1/2 within five goods, two agents valuing goods
/// at 5 or 1.
pub fn ef1_adversary_two_agents(
    alg: &mut dyn OnlineAlgorithm,
) -> Result<AdversaryTrace, AdversaryError> {
    let mut d = Driver::new(alg, &[(5.0, 1.0), (5.0, 1.0)])?;
    // `a` takes the first good; `b` is the other agent.
    let a = d.feed(vec![false, false])?;
    let b = 1 - a;
    let only = |x: usize| {
        let mut v = vec![false, false];
        v[x] = true;
        v
    };
    if d.feed(only(a))? == b {
        // A low good, then if needed a good only `b` values; once `a` takes
        // either, a universally high good decides it.
        if d.feed(vec![false, false])? == a || d.feed(only(b))? == a {
            d.feed(vec![true, true])?;
        }
    }
    d.finish("ef1", (1.0, 2.0))
}

/// Forces MMS ratio at most 1/(2n-1), with alpha = 2n^2 + 2n and beta = 1.
///
/// Agents are referred to by the order in which they first receive a good
/// during the opening staircase.
pub fn mms_adversary(
    alg: &mut dyn OnlineAlgorithm,
    n: usize,
) -> Result<AdversaryTrace, AdversaryError> {
    if n < 2 {
        return Err(AdversaryError::TooFewAgents { n, min: 2 });
    }
    let alpha = (2 * n * n + 2 * n) as f64;
    let mut d = Driver::new(alg, &vec![(alpha, 1.0); n])?;
    let bound = (1.0, (2 * n - 1) as f64);

    // Staircase: high for agents already holding a good, low for the rest.
    let mut served: Vec<usize> = Vec::new();
    for _ in 0..n {
        let high = (0..n).map(|i| served.contains(&i)).collect();
        let x = d.feed(high)?;
        if !served.contains(&x) {
            served.push(x);
        }
    }
    if served.len() < n {
        // Someone took two goods, so someone holds nothing at t = n.
        return d.finish("mms", bound);
    }
    let ren = |k: usize| served[k - 1];

    let mut got_low = vec![false; n];
    for _ in 0..n - 1 {
        got_low[d.feed(vec![false; n])?] = true;
    }
    let k = (1..=n)
        .rev()
        .find(|&k| !got_low[ren(k)])
        .expect("n-1 goods miss someone");

    // Universal highs meant for agents 1..=count, in order; stops at the
    // first one given elsewhere.
    let universal = |d: &mut Driver, count: usize| -> Result<(), AdversaryError> {
        for i in 1..=count {
            if d.feed(vec![true; n])? != ren(i) {
                break;
            }
        }
        Ok(())
    };

    if k == n {
        universal(&mut d, n - 1)?;
    } else {
        let mut deviated = None;
        for l in 1..=n - k {
            let target = ren(n - l + 1);
            let high = (0..n).map(|i| i == target).collect();
            if d.feed(high)? != target {
                deviated = Some(l);
                break;
            }
        }
        match deviated {
            Some(j) => universal(&mut d, n - j)?,
            None => universal(&mut d, k - 1)?,
        }
    }
    d.finish("mms", bound)
}

/// n goods every agent values at 1, then n-1 goods every agent values at
/// `alpha`. Whoever misses a high good ends at MMS ratio 1/n or worse.
pub fn known_instance_hard(
    n: usize,
    alpha: f64,
    foresight: usize,
) -> Result<Instance, AdversaryError> {
    if n < 1 {
        return Err(AdversaryError::TooFewAgents { n, min: 1 });
    }
    if alpha < n as f64 {
        return Err(AdversaryError::AlphaTooSmall { n, alpha });
    }
    let goods = (1..2 * n)
        .map(|t| GoodEvent::mask(t, vec![t > n; n]))
        .collect();
    Ok(Instance::new(
        &vec![(alpha, 1.0); n],
        goods,
        Flavor::TwoValue,
        foresight,
    )?)
}

/// Compares the no-foresight bound 1/(2n-1) with 1/sqrt(2 alpha) at the
/// adversary's alpha = 2n^2 + 2n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqrtAlphaGap {
    pub n: usize,
    pub alpha: f64,
    pub inv_2n_minus_1: f64,
    pub inv_sqrt_2alpha: f64,
}

impl SqrtAlphaGap {
    pub fn gap(&self) -> f64 {
        self.inv_2n_minus_1 - self.inv_sqrt_2alpha
    }
}

pub fn sqrt_alpha_bound_check(n: usize) -> SqrtAlphaGap {
    let alpha = (2 * n * n + 2 * n) as f64;
    SqrtAlphaGap {
        n,
        alpha,
        inv_2n_minus_1: 1.0 / (2 * n - 1) as f64,
        inv_sqrt_2alpha: 1.0 / (2.0 * alpha).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithm::{Decision, StepContext};
    use crate::baselines::{GreedyWelfare, RoundRobin};
    use crate::deferred_priority::DeferredPriority;

    struct AlwaysFirst;

    impl OnlineAlgorithm for AlwaysFirst {
        fn name(&self) -> &'static str {
            "always-first"
        }

        fn decide(&mut self, _ctx: &StepContext<'_>) -> Result<Decision, AlgorithmError> {
            Ok(Decision::plain(0))
        }
    }

    #[test]
    fn ef1_against_always_first() {
        let tr = ef1_adversary_two_agents(&mut AlwaysFirst).unwrap();
        assert_eq!(tr.witness.t, 2);
        assert_eq!(tr.witness.agent, 1);
        assert_eq!(tr.witness.ratio.value(), 0.0);
    }

    #[test]
    fn ef1_against_deferred_priority_is_exactly_half() {
        let tr = ef1_adversary_two_agents(&mut DeferredPriority::new()).unwrap();
        assert_eq!(tr.witness.ratio.value(), 0.5);
        assert!(tr.witness.t <= 5);
    }

    #[test]
    fn ef1_within_five_for_baselines() {
        for alg in [
            &mut RoundRobin as &mut dyn OnlineAlgorithm,
            &mut GreedyWelfare,
        ] {
            let tr = ef1_adversary_two_agents(alg).unwrap();
            assert!(tr.witness.t <= 5 && tr.witness.ratio.at_most(1.0, 2.0, 0.0));
        }
    }

    #[test]
    fn mms_against_round_robin() {
        let tr = mms_adversary(&mut RoundRobin, 3).unwrap();
        assert!(tr.witness.ratio.at_most(1.0, 6.0, 0.0));
        assert!(tr.instance.m() <= 8);
    }

    #[test]
    fn known_instance_shape() {
        let inst = known_instance_hard(3, 4.0, 0).unwrap();
        assert_eq!(inst.m(), 5);
        assert!(known_instance_hard(3, 2.0, 0).is_err());
        // The starved agent holds one low good against an MMS of 3.
        let mut rr = RoundRobin;
        let mut worst = FairRatio::ONE;
        crate::algorithm::simulate(&mut rr, &inst, |s, _| {
            let r = report_all(s, &inst).unwrap();
            for x in r {
                worst = worst.min(x.mms_ratio.unwrap());
            }
        })
        .unwrap();
        assert_eq!((worst.num, worst.den), (1.0, 3.0));
    }

    #[test]
    fn sqrt_gap_shrinks() {
        let g = sqrt_alpha_bound_check(10);
        assert_eq!(g.inv_2n_minus_1, 1.0 / 19.0);
        assert_eq!(g.inv_sqrt_2alpha, 1.0 / 440f64.sqrt());
        let gaps: Vec<f64> = [10, 100, 1000]
            .iter()
            .map(|&n| sqrt_alpha_bound_check(n).gap())
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));
    }
}
