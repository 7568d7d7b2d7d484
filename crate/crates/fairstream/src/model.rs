//! Agents, goods, and instances.
//!
//! Agents and goods are 0-based in the API. Files and CSV output use 1-based
//! agent numbers; good indices are the 1-based arrival times everywhere.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("agent {agent}: alpha {alpha} is below beta {beta}")]
    AlphaBelowBeta { agent: usize, alpha: f64, beta: f64 },
    #[error("agent {agent}: values must be finite and non-negative (alpha {alpha}, beta {beta})")]
    InvalidValue { agent: usize, alpha: f64, beta: f64 },
    #[error("instance has no agents")]
    NoAgents,
    #[error("good {good}: expected {expected} entries, found {found}")]
    WidthMismatch {
        good: usize,
        expected: usize,
        found: usize,
    },
    #[error("good {good}: {found} entry does not match a {flavor} instance")]
    FlavorMismatch {
        good: usize,
        found: &'static str,
        flavor: &'static str,
    },
    #[error("good {good}: index should be {expected}")]
    IndexMismatch { good: usize, expected: usize },
    #[error("agent {agent}: interval instances need alpha > 1, got {alpha}")]
    IntervalAlpha { agent: usize, alpha: f64 },
    #[error("good {good}, agent {agent}: value {value} lies outside [1, {alpha}]")]
    OutOfRange {
        good: usize,
        agent: usize,
        value: f64,
        alpha: f64,
    },
}

/// Agent class by which of its two values vanish.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgentType {
    /// alpha = beta = 0.
    Type0,
    /// alpha > beta > 0.
    Type1,
    /// alpha = beta > 0.
    Type2,
    /// alpha > beta = 0.
    Type3,
}

pub fn classify_agent(alpha: f64, beta: f64) -> Result<AgentType, ModelError> {
    classify_indexed(0, alpha, beta)
}

fn classify_indexed(agent: usize, alpha: f64, beta: f64) -> Result<AgentType, ModelError> {
    if !alpha.is_finite() || !beta.is_finite() || alpha < 0.0 || beta < 0.0 {
        return Err(ModelError::InvalidValue { agent, alpha, beta });
    }
    if alpha < beta {
        return Err(ModelError::AlphaBelowBeta { agent, alpha, beta });
    }
    Ok(match (alpha == beta, beta == 0.0) {
        (true, true) => AgentType::Type0,
        (true, false) => AgentType::Type2,
        (false, true) => AgentType::Type3,
        (false, false) => AgentType::Type1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentProfile {
    pub alpha: f64,
    pub beta: f64,
    pub kind: AgentType,
}

impl AgentProfile {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, ModelError> {
        Ok(AgentProfile {
            alpha,
            beta,
            kind: classify_agent(alpha, beta)?,
        })
    }

    fn indexed(agent: usize, alpha: f64, beta: f64) -> Result<Self, ModelError> {
        Ok(AgentProfile {
            alpha,
            beta,
            kind: classify_indexed(agent, alpha, beta)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    TwoValue,
    #[serde(rename = "interval")]
    IntervalRestricted,
}

impl Flavor {
    pub fn label(self) -> &'static str {
        match self {
            Flavor::TwoValue => "two_value",
            Flavor::IntervalRestricted => "interval",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GoodValues {
    /// Entry i is true when the good is worth alpha_i to agent i.
    HighLowMask(Vec<bool>),
    RealVector(Vec<f64>),
}

impl GoodValues {
    pub fn len(&self) -> usize {
        match self {
            GoodValues::HighLowMask(m) => m.len(),
            GoodValues::RealVector(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoodEvent {
    /// 1-based arrival time.
    pub index: usize,
    pub values: GoodValues,
}

impl GoodEvent {
    pub fn mask(index: usize, high: Vec<bool>) -> Self {
        GoodEvent {
            index,
            values: GoodValues::HighLowMask(high),
        }
    }

    pub fn real(index: usize, values: Vec<f64>) -> Self {
        GoodEvent {
            index,
            values: GoodValues::RealVector(values),
        }
    }
}

/// Agent's value for a good.
pub fn value(profile: &AgentProfile, good: &GoodEvent, agent: usize) -> f64 {
    match &good.values {
        GoodValues::HighLowMask(mask) => {
            if mask[agent] {
                profile.alpha
            } else {
                profile.beta
            }
        }
        GoodValues::RealVector(v) => v[agent],
    }
}

/// True when the good is worth alpha to the agent and alpha is positive.
///
/// Type-2 agents see every good as high; type-0 agents see none.
pub fn is_high(profile: &AgentProfile, good: &GoodEvent, agent: usize) -> bool {
    profile.alpha > 0.0 && value(profile, good, agent) == profile.alpha
}

/// True when the good is worth beta to the agent.
pub fn is_low(profile: &AgentProfile, good: &GoodEvent, agent: usize) -> bool {
    value(profile, good, agent) == profile.beta
}

/// Sum of the agent's values over a bundle of 1-based good indices.
pub fn bundle_value(instance: &Instance, agent: usize, bundle: &[usize]) -> f64 {
    let profile = &instance.agents[agent];
    bundle
        .iter()
        .map(|&g| value(profile, &instance.goods[g - 1], agent))
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub agents: Vec<AgentProfile>,
    pub goods: Vec<GoodEvent>,
    pub flavor: Flavor,
    pub foresight: usize,
}

impl Instance {
    /// Builds and validates an instance from raw (alpha, beta) pairs.
    pub fn new(
        profiles: &[(f64, f64)],
        goods: Vec<GoodEvent>,
        flavor: Flavor,
        foresight: usize,
    ) -> Result<Self, ModelError> {
        let agents = profiles
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| AgentProfile::indexed(i, a, b))
            .collect::<Result<Vec<_>, _>>()?;
        let inst = Instance {
            agents,
            goods,
            flavor,
            foresight,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn m(&self) -> usize {
        self.goods.len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.agents.is_empty() {
            return Err(ModelError::NoAgents);
        }
        for (i, a) in self.agents.iter().enumerate() {
            AgentProfile::indexed(i, a.alpha, a.beta)?;
            if self.flavor == Flavor::IntervalRestricted && a.alpha <= 1.0 {
                return Err(ModelError::IntervalAlpha {
                    agent: i,
                    alpha: a.alpha,
                });
            }
        }
        for (k, g) in self.goods.iter().enumerate() {
            self.validate_good(g, k + 1)?;
        }
        Ok(())
    }

    /// Checks one good against the agent list, expecting arrival time `t`.
    pub fn validate_good(&self, g: &GoodEvent, t: usize) -> Result<(), ModelError> {
        if g.index != t {
            return Err(ModelError::IndexMismatch {
                good: g.index,
                expected: t,
            });
        }
        if g.values.len() != self.n() {
            return Err(ModelError::WidthMismatch {
                good: t,
                expected: self.n(),
                found: g.values.len(),
            });
        }
        match (&g.values, self.flavor) {
            (GoodValues::HighLowMask(_), Flavor::TwoValue) => Ok(()),
            (GoodValues::RealVector(v), Flavor::IntervalRestricted) => {
                for (i, (&x, a)) in v.iter().zip(&self.agents).enumerate() {
                    if !x.is_finite() || x < 1.0 || x > a.alpha {
                        return Err(ModelError::OutOfRange {
                            good: t,
                            agent: i,
                            value: x,
                            alpha: a.alpha,
                        });
                    }
                }
                Ok(())
            }
            (GoodValues::HighLowMask(_), f) => Err(ModelError::FlavorMismatch {
                good: t,
                found: "high",
                flavor: f.label(),
            }),
            (GoodValues::RealVector(_), f) => Err(ModelError::FlavorMismatch {
                good: t,
                found: "values",
                flavor: f.label(),
            }),
        }
    }

    /// Goods t+1..t+foresight (clipped at m) for 1-based time `t`.
    pub fn window(&self, t: usize) -> &[GoodEvent] {
        let end = (t + self.foresight).min(self.m());
        &self.goods[t.min(end)..end]
    }

    pub fn value(&self, agent: usize, good_index: usize) -> f64 {
        value(&self.agents[agent], &self.goods[good_index - 1], agent)
    }

    /// Copy with one agent's valuation multiplied by `c > 0`.
    pub fn scaled(&self, agent: usize, c: f64) -> Instance {
        let mut out = self.clone();
        let a = &mut out.agents[agent];
        a.alpha *= c;
        a.beta *= c;
        if let Flavor::IntervalRestricted = self.flavor {
            for g in &mut out.goods {
                if let GoodValues::RealVector(v) = &mut g.values {
                    v[agent] *= c;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_agents() -> Instance {
        Instance::new(
            &[(5.0, 1.0), (1.0, 1.0)],
            vec![
                GoodEvent::mask(1, vec![true, false]),
                GoodEvent::mask(2, vec![true, true]),
                GoodEvent::mask(3, vec![false, false]),
                GoodEvent::mask(4, vec![false, true]),
                GoodEvent::mask(5, vec![false, false]),
            ],
            Flavor::TwoValue,
            0,
        )
        .unwrap()
    }

    #[test]
    fn classification() {
        assert_eq!(classify_agent(5.0, 1.0), Ok(AgentType::Type1));
        assert_eq!(classify_agent(0.0, 0.0), Ok(AgentType::Type0));
        assert_eq!(classify_agent(1.0, 0.0), Ok(AgentType::Type3));
        assert_eq!(classify_agent(2.0, 2.0), Ok(AgentType::Type2));
        assert!(matches!(
            classify_agent(1.0, 2.0),
            Err(ModelError::AlphaBelowBeta { .. })
        ));
        assert!(matches!(
            classify_agent(-1.0, -2.0),
            Err(ModelError::InvalidValue { .. })
        ));
    }

    #[test]
    fn values_and_bundles() {
        let inst = two_agents();
        assert_eq!(inst.value(0, 1), 5.0);
        assert_eq!(inst.value(0, 3), 1.0);
        assert_eq!(bundle_value(&inst, 0, &[]), 0.0);
        assert_eq!(bundle_value(&inst, 0, &[1, 2, 3, 4, 5]), 13.0);
        assert_eq!(bundle_value(&inst, 1, &[1, 3, 5]), 3.0);
        let real = GoodEvent::real(1, vec![2.75]);
        let p = AgentProfile::new(3.0, 1.0).unwrap();
        assert_eq!(value(&p, &real, 0), 2.75);
    }

    #[test]
    fn high_membership() {
        let inst = two_agents();
        let g = &inst.goods[2];
        assert!(!is_high(&inst.agents[0], g, 0));
        assert!(is_high(&inst.agents[1], g, 1));
        assert!(is_low(&inst.agents[1], g, 1));
        let zero = AgentProfile::new(0.0, 0.0).unwrap();
        assert!(!is_high(&zero, &GoodEvent::mask(1, vec![true]), 0));
    }

    #[test]
    fn window_is_clipped() {
        let mut inst = two_agents();
        inst.foresight = 2;
        assert_eq!(inst.window(1).len(), 2);
        assert_eq!(inst.window(1)[0].index, 2);
        assert_eq!(inst.window(4).len(), 1);
        assert!(inst.window(5).is_empty());
    }

    #[test]
    fn validation_rejects_bad_goods() {
        let bad = Instance::new(
            &[(5.0, 1.0)],
            vec![GoodEvent::mask(1, vec![true, false])],
            Flavor::TwoValue,
            0,
        );
        assert!(matches!(bad, Err(ModelError::WidthMismatch { .. })));
        let out = Instance::new(
            &[(4.0, 1.0)],
            vec![GoodEvent::real(1, vec![4.5])],
            Flavor::IntervalRestricted,
            0,
        );
        assert!(matches!(out, Err(ModelError::OutOfRange { .. })));
    }
}
