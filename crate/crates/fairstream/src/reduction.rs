//! Interval valuations rounded to two values.
//!
//! A value in `[1, alpha_i]` becomes `alpha_i` when it exceeds
//! `sqrt(alpha_i)` and `sqrt(alpha_i)` otherwise. The rounded instance is a
//! two-value instance, so every two-value algorithm runs on it, and each
//! fairness ratio it achieves carries back to the original values divided by
//! at most `sqrt(alpha_i)`.

use serde::Serialize;
use thiserror::Error;

use crate::algorithm::replay;
use crate::audit::Violation;
use crate::metrics::{report_all, FairnessReport, MetricError, REL_TOL};
use crate::model::{Flavor, GoodEvent, GoodValues, Instance, ModelError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error("expected an interval instance")]
    NotInterval,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("trace has {got} steps and {agents} agents, instance has {m} goods and {n} agents")]
    Mismatch {
        got: usize,
        agents: usize,
        m: usize,
        n: usize,
    },
    #[error("proxy instance does not match the original")]
    ProxyMismatch,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Rounds one value: high exactly when `v > sqrt(alpha)` beyond tolerance.
pub fn threshold_round(v: f64, alpha: f64) -> Result<f64, ReductionError> {
    if alpha <= 1.0 {
        return Err(ModelError::IntervalAlpha { agent: 0, alpha }.into());
    }
    if !(1.0..=alpha).contains(&v) {
        return Err(ModelError::OutOfRange {
            good: 0,
            agent: 0,
            value: v,
            alpha,
        }
        .into());
    }
    let root = alpha.sqrt();
    Ok(if v > root + REL_TOL * root {
        alpha
    } else {
        root
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thresholds {
    pub alpha: Vec<f64>,
    pub threshold: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdProxy {
    pub proxy: Instance,
    pub thresholds: Thresholds,
}

/// Two-value proxy with agents `(alpha_i, sqrt(alpha_i))`, same order and
/// foresight.
pub fn threshold_proxy(instance: &Instance) -> Result<ThresholdProxy, ReductionError> {
    if instance.flavor != Flavor::IntervalRestricted {
        return Err(ReductionError::NotInterval);
    }
    instance.validate()?;
    let alpha: Vec<f64> = instance.agents.iter().map(|a| a.alpha).collect();
    let threshold: Vec<f64> = alpha.iter().map(|a| a.sqrt()).collect();
    let goods = instance
        .goods
        .iter()
        .map(|g| {
            let GoodValues::RealVector(v) = &g.values else {
                unreachable!("validated interval good")
            };
            let high = v
                .iter()
                .zip(&alpha)
                .map(|(&x, &a)| Ok(threshold_round(x, a)? == a))
                .collect::<Result<Vec<bool>, ReductionError>>()?;
            Ok(GoodEvent::mask(g.index, high))
        })
        .collect::<Result<Vec<_>, ReductionError>>()?;
    let profiles: Vec<(f64, f64)> = alpha
        .iter()
        .zip(&threshold)
        .map(|(&a, &r)| (a, r))
        .collect();
    Ok(ThresholdProxy {
        proxy: Instance::new(&profiles, goods, Flavor::TwoValue, instance.foresight)?,
        thresholds: Thresholds { alpha, threshold },
    })
}

/// Ratios under the original and the rounded values, step by step.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftReport {
    pub original: Vec<Vec<FairnessReport>>,
    pub proxy: Vec<Vec<FairnessReport>>,
    /// Steps where an original ratio fell below proxy ratio / sqrt(alpha_i).
    pub violations: Vec<Violation>,
}

/// Replays `choices` on both instances and checks that every original ratio
/// is at least the proxy ratio divided by `sqrt(alpha_i)`.
pub fn lift_guarantee(
    original: &Instance,
    proxy: &Instance,
    choices: &[usize],
) -> Result<LiftReport, ReductionError> {
    let (n, m) = (original.n(), original.m());
    if choices.len() != m || proxy.n() != n || proxy.m() != m {
        return Err(ReductionError::Mismatch {
            got: choices.len(),
            agents: proxy.n(),
            m,
            n,
        });
    }
    if original
        .agents
        .iter()
        .zip(&proxy.agents)
        .any(|(o, p)| o.alpha != p.alpha || (o.alpha.sqrt() - p.beta).abs() > REL_TOL * p.beta)
    {
        return Err(ReductionError::ProxyMismatch);
    }
    let mut orig_reports = Vec::with_capacity(m);
    let mut proxy_reports = Vec::with_capacity(m);
    let mut err = None;
    replay(original, choices, |s| match report_all(s, original) {
        Ok(r) => orig_reports.push(r),
        Err(e) => err = Some(e),
    });
    replay(proxy, choices, |s| match report_all(s, proxy) {
        Ok(r) => proxy_reports.push(r),
        Err(e) => err = Some(e),
    });
    if let Some(e) = err {
        return Err(e.into());
    }
    let mut violations = Vec::new();
    for (orow, prow) in orig_reports.iter().zip(&proxy_reports) {
        for (o, p) in orow.iter().zip(prow) {
            let root = original.agents[o.agent].alpha.sqrt();
            let mut check = |name: &'static str,
                             ours: crate::metrics::FairRatio,
                             theirs: crate::metrics::FairRatio| {
                // ours >= theirs / root, cross-multiplied.
                if !ours.at_least(theirs.num, theirs.den * root, REL_TOL) {
                    violations.push(Violation::new(
                        o.t,
                        Some(o.agent),
                        name,
                        format!("original {ours} below proxy {theirs} / {root}"),
                    ));
                }
            };
            check("lift-ef", o.ef, p.ef);
            check("lift-ef1", o.ef1, p.ef1);
            check("lift-ef2", o.ef2, p.ef2);
            check("lift-prop", o.prop, p.prop);
            if let (Some(a), Some(b)) = (o.mms_ratio, p.mms_ratio) {
                check("lift-mms", a, b);
            }
        }
    }
    Ok(LiftReport {
        original: orig_reports,
        proxy: proxy_reports,
        violations,
    })
}
