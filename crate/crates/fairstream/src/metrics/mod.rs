//! Fairness measures over an allocation state.
//!
//! Ratios keep their numerator and denominator so that threshold checks can
//! cross-multiply. With integer-valued instances every sum and product here
//! is exact in `f64`.

mod envy;
mod mms;

pub use envy::{build_envy_graph, strictly_greater, topo_sort, CycleError, EnvyEdge, EnvyGraph};
pub use mms::{mms_exhaustive, mms_two_value, mms_two_value_enumerated, EXHAUSTIVE_LIMIT};

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::model::{value, Flavor, Instance};
use crate::state::AllocationState;

/// Relative tolerance for real-valued comparisons.
pub const REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("EFk is defined for k <= 2, got {k}")]
    KTooLarge { k: usize },
    #[error("exhaustive MMS handles at most {limit} goods, got {m}")]
    TooManyGoods { m: usize, limit: usize },
    #[error("MMS needs at least one bundle")]
    NoBundles,
    #[error("values {alpha} and {beta} cannot share an exact integer scale")]
    Unrepresentable { alpha: f64, beta: f64 },
}

/// A ratio `min(1, num / den)`, equal to 1 when `den` is not positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FairRatio {
    pub num: f64,
    pub den: f64,
}

impl FairRatio {
    pub const ONE: FairRatio = FairRatio { num: 1.0, den: 1.0 };

    pub fn new(num: f64, den: f64) -> Self {
        if den <= 0.0 || num >= den {
            FairRatio::ONE
        } else {
            FairRatio { num, den }
        }
    }

    pub fn value(&self) -> f64 {
        self.num / self.den
    }

    /// `self >= p / q`, allowing relative slack `tol`.
    pub fn at_least(&self, p: f64, q: f64, tol: f64) -> bool {
        let lhs = self.num * q;
        let rhs = p * self.den;
        lhs >= rhs - tol * rhs.abs()
    }

    /// `self <= p / q`, allowing relative slack `tol`.
    pub fn at_most(&self, p: f64, q: f64, tol: f64) -> bool {
        let lhs = self.num * q;
        let rhs = p * self.den;
        lhs <= rhs + tol * rhs.abs()
    }

    /// Exact comparison by cross-multiplication.
    pub fn cmp_ratio(&self, other: &FairRatio) -> Ordering {
        (self.num * other.den).total_cmp(&(other.num * self.den))
    }

    pub fn min(self, other: FairRatio) -> FairRatio {
        if other.cmp_ratio(&self) == Ordering::Less {
            other
        } else {
            self
        }
    }
}

impl fmt::Display for FairRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Agent `i`'s EFk ratio toward agent `j`.
pub fn efk_ratio(
    state: &AllocationState,
    i: usize,
    j: usize,
    k: usize,
) -> Result<FairRatio, MetricError> {
    if k > 2 {
        return Err(MetricError::KTooLarge { k });
    }
    Ok(FairRatio::new(
        state.value_of(i, i),
        state.view(i, j).without_top(k),
    ))
}

/// Worst EFk ratio of agent `i` over all other agents.
pub fn efk_agent(state: &AllocationState, i: usize, k: usize) -> Result<FairRatio, MetricError> {
    let mut worst = FairRatio::ONE;
    for j in 0..state.n() {
        if j != i {
            worst = worst.min(efk_ratio(state, i, j, k)?);
        }
    }
    Ok(worst)
}

/// `min(1, n v_i(A_i) / v_i(S))` over the goods seen so far.
pub fn prop_ratio(state: &AllocationState, i: usize) -> FairRatio {
    FairRatio::new(
        state.n() as f64 * state.value_of(i, i),
        state.value_of_all(i),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmsOutcome {
    /// `None` when no oracle covers the instance size.
    pub value: Option<f64>,
    pub ratio: Option<FairRatio>,
}

/// Agent `i`'s MMS over the goods seen so far and its ratio.
///
/// Two-value instances use the exact solver on (high, low) counts. Interval
/// instances use the exhaustive oracle while `t` is within its limit.
pub fn mms_report(
    state: &AllocationState,
    instance: &Instance,
    i: usize,
) -> Result<MmsOutcome, MetricError> {
    let n = state.n();
    let mu = match instance.flavor {
        Flavor::TwoValue => {
            let p = &instance.agents[i];
            let h = state.high_seen[i];
            Some(mms_two_value(h, state.t - h, p.alpha, p.beta, n)?)
        }
        Flavor::IntervalRestricted if state.t <= EXHAUSTIVE_LIMIT => {
            let p = &instance.agents[i];
            let vals: Vec<f64> = instance.goods[..state.t]
                .iter()
                .map(|g| value(p, g, i))
                .collect();
            Some(mms_exhaustive(&vals, n)?)
        }
        Flavor::IntervalRestricted => None,
    };
    Ok(MmsOutcome {
        value: mu,
        ratio: mu.map(|mu| FairRatio::new(state.value_of(i, i), mu)),
    })
}

/// Fairness of one agent after step `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FairnessReport {
    pub t: usize,
    pub agent: usize,
    pub ef: FairRatio,
    pub ef1: FairRatio,
    pub ef2: FairRatio,
    pub prop: FairRatio,
    pub mms_value: Option<f64>,
    pub mms_ratio: Option<FairRatio>,
    pub envy_out_degree: usize,
}

pub const REPORT_HEADER: &str = "t,agent,ef,ef1,ef2,prop,mms_value,mms_ratio,envy_out_degree";

impl FairnessReport {
    /// CSV row with a 1-based agent number and `NA` for missing MMS data.
    pub fn csv_row(&self) -> String {
        let na = |x: Option<String>| x.unwrap_or_else(|| "NA".to_string());
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.t,
            self.agent + 1,
            self.ef,
            self.ef1,
            self.ef2,
            self.prop,
            na(self.mms_value.map(|v| v.to_string())),
            na(self.mms_ratio.map(|r| r.to_string())),
            self.envy_out_degree
        )
    }
}

/// Reports for every agent at the current time.
pub fn report_all(
    state: &AllocationState,
    instance: &Instance,
) -> Result<Vec<FairnessReport>, MetricError> {
    let graph = build_envy_graph(state);
    (0..state.n())
        .map(|i| {
            let mms = mms_report(state, instance, i)?;
            Ok(FairnessReport {
                t: state.t,
                agent: i,
                ef: efk_agent(state, i, 0)?,
                ef1: efk_agent(state, i, 1)?,
                ef2: efk_agent(state, i, 2)?,
                prop: prop_ratio(state, i),
                mms_value: mms.value,
                mms_ratio: mms.ratio,
                envy_out_degree: graph.out_degree(i),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AgentProfile, GoodEvent};

    /// Allocates real-valued goods to the listed recipients.
    fn build(values: &[Vec<f64>], owners: &[usize]) -> AllocationState {
        let n = values[0].len();
        let agents = vec![AgentProfile::new(10.0, 1.0).unwrap(); n];
        let mut s = AllocationState::new(n);
        for (k, (v, &o)) in values.iter().zip(owners).enumerate() {
            s.allocate(&agents, &GoodEvent::real(k + 1, v.clone()), o);
        }
        s
    }

    #[test]
    fn efk_examples() {
        // A_1 = {g1, g3, g4}, A_2 = {g2}; agent 2 values (1, 1, 1, 5).
        let s = build(
            &[
                vec![1.0, 1.0],
                vec![1.0, 1.0],
                vec![1.0, 1.0],
                vec![1.0, 5.0],
            ],
            &[0, 1, 0, 0],
        );
        assert_eq!(efk_ratio(&s, 1, 0, 1).unwrap().value(), 0.5);
        assert!(matches!(
            efk_ratio(&s, 1, 0, 3),
            Err(MetricError::KTooLarge { k: 3 })
        ));
        // A_1 = {g1, g4}, A_2 = {g2, g3, g5}; agent 1 values (1, 5, 1, 1, 5).
        let s = build(
            &[
                vec![1.0, 1.0],
                vec![5.0, 1.0],
                vec![1.0, 1.0],
                vec![1.0, 1.0],
                vec![5.0, 1.0],
            ],
            &[0, 1, 1, 0, 1],
        );
        let r = efk_ratio(&s, 0, 1, 1).unwrap();
        assert!(r.at_least(1.0, 3.0, 0.0) && r.at_most(1.0, 3.0, 0.0));
    }

    #[test]
    fn empty_bundles_are_not_envied() {
        let s = build(&[vec![3.0, 3.0]], &[0]);
        assert_eq!(efk_ratio(&s, 0, 1, 0).unwrap(), FairRatio::ONE);
        assert_eq!(efk_ratio(&s, 1, 0, 1).unwrap(), FairRatio::ONE);
        assert_eq!(efk_ratio(&s, 1, 0, 0).unwrap().value(), 0.0);
    }

    #[test]
    fn prop_examples() {
        let s = build(
            &[
                vec![5.0, 1.0],
                vec![1.0, 1.0],
                vec![5.0, 1.0],
                vec![2.0, 1.0],
            ],
            &[0, 0, 1, 1],
        );
        let r = prop_ratio(&s, 0);
        assert_eq!((r.num, r.den), (12.0, 13.0));
        assert_eq!(prop_ratio(&AllocationState::new(2), 0), FairRatio::ONE);
        let even = build(&[vec![2.0, 2.0], vec![2.0, 2.0]], &[0, 1]);
        assert_eq!(prop_ratio(&even, 0), FairRatio::ONE);
    }

    #[test]
    fn ratio_ordering_is_exact() {
        let a = FairRatio::new(1.0, 3.0);
        let b = FairRatio::new(2.0, 6.0);
        assert_eq!(a.cmp_ratio(&b), Ordering::Equal);
        assert!(a.at_least(1.0, 3.0, 0.0));
        assert!(!a.at_least(1.0, 2.0, 0.0));
        assert_eq!(FairRatio::new(4.0, 2.0), FairRatio::ONE);
    }
}
