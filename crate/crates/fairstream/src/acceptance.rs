//! The acceptance suite: eleven end-to-end checks over seeded corpora.
//!
//! Every criterion returns a [`CriterionOutcome`]; nothing here panics on a
//! failed check, so callers can print all results before deciding.

use std::fmt;
use std::time::{Duration, Instant};

use crate::adversaries::{ef1_adversary_two_agents, known_instance_hard, mms_adversary};
use crate::algorithm::{simulate, OnlineAlgorithm};
use crate::audit::{Auditor, Violation};
use crate::baselines::{GreedyWelfare, RoundRobin};
use crate::deferred_priority::{DeferredPriority, DpAudit};
use crate::foresight::{
    AsymptoticAudit, NaiveAudit, NaiveMatching, PriorityAudit, PriorityMatching,
};
use crate::generate::{generate, Generator, ProfileMix};
use crate::harness::AlgorithmKind;
use crate::metrics::{mms_exhaustive, mms_two_value, report_all, FairRatio, REL_TOL};
use crate::model::{GoodValues, Instance};
use crate::reduction::{lift_guarantee, threshold_proxy};
use crate::state::AllocationState;

#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} [{}] {}: {} ({:.2}s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

pub const CRITERIA: [(u8, &str); 11] = [
    (1, "deferred-priority allocation counts"),
    (2, "deferred-priority level sets"),
    (3, "deferred-priority mms and prop floors"),
    (4, "mms adversary meets 1/(2n-1)"),
    (5, "ef1 adversary forces 1/2"),
    (6, "naive-matching with one good of foresight"),
    (7, "priority-matching with n-1 goods of foresight"),
    (8, "full foresight cannot beat 1/n mms"),
    (9, "mms oracles agree"),
    (10, "interval reduction transfers guarantees"),
    (11, "asymptotic floors"),
];

fn name_of(id: u8) -> &'static str {
    CRITERIA[id as usize - 1].1
}

/// Runs one criterion. Criteria 1 to 3 share a corpus, so asking for any of
/// them runs all three and returns the one requested.
pub fn run_criterion(id: u8) -> Option<CriterionOutcome> {
    match id {
        1..=3 => deferred_priority_corpus().into_iter().find(|o| o.id == id),
        4 => Some(timed(4, Some(Duration::from_secs(10)), mms_adversary_meets)),
        5 => Some(timed(5, None, ef1_adversary_forces_half)),
        6 => Some(timed(6, None, naive_corpus)),
        7 => Some(timed(7, None, priority_corpus)),
        8 => Some(timed(8, None, full_foresight_hard)),
        9 => Some(timed(9, Some(Duration::from_secs(30)), mms_oracles_agree)),
        10 => Some(timed(10, None, reduction_corpus)),
        11 => Some(timed(11, None, asymptotic_corpus)),
        _ => None,
    }
}

/// Runs every criterion in order, calling `each` as results arrive.
pub fn run_all(mut each: impl FnMut(&CriterionOutcome)) -> Vec<CriterionOutcome> {
    let mut out = Vec::new();
    for o in deferred_priority_corpus() {
        each(&o);
        out.push(o);
    }
    for id in 4..=11 {
        let o = run_criterion(id).expect("known criterion");
        each(&o);
        out.push(o);
    }
    out
}

fn timed(id: u8, budget: Option<Duration>, f: fn() -> Result<String, String>) -> CriterionOutcome {
    let start = Instant::now();
    let res = f();
    let elapsed = start.elapsed();
    finish(id, res, elapsed, budget)
}

fn finish(
    id: u8,
    res: Result<String, String>,
    elapsed: Duration,
    budget: Option<Duration>,
) -> CriterionOutcome {
    let (mut passed, mut detail) = match res {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    if let Some(b) = budget {
        if elapsed > b {
            passed = false;
            detail = format!("{detail}; over the {}s budget", b.as_secs());
        }
    }
    CriterionOutcome {
        id,
        name: name_of(id),
        passed,
        detail,
        elapsed,
    }
}

/// Simulates `alg` on `inst`, feeding every step's reports to each auditor.
fn audited(
    alg: &mut dyn OnlineAlgorithm,
    inst: &Instance,
    auditors: &mut [&mut dyn Auditor],
) -> Result<(), String> {
    let mut err = None;
    let mut last: Option<AllocationState> = None;
    simulate(alg, inst, |state, step| {
        match report_all(state, inst) {
            Ok(r) => auditors
                .iter_mut()
                .for_each(|a| a.observe(inst, state, step, &r)),
            Err(e) => err = Some(e.to_string()),
        }
        if state.t == inst.m() {
            last = Some(state.clone());
        }
    })
    .map_err(|e| e.to_string())?;
    if let Some(e) = err {
        return Err(e);
    }
    if let Some(s) = &last {
        auditors.iter_mut().for_each(|a| a.finish(inst, s));
    }
    Ok(())
}

fn mixed_stream(n: usize, m: usize, k: u64, foresight: usize) -> Result<Instance, String> {
    // Bias cycles through 0.1, 0.2, ..., 0.9.
    let p_high = 0.1 * (1 + k % 9) as f64;
    let g = Generator::Random2Value {
        n,
        m,
        p_high,
        profiles: ProfileMix::Mixed,
    };
    generate(&g, ((n as u64) << 32) | k, foresight).map_err(|e| e.to_string())
}

fn first(v: &[Violation], seed: impl fmt::Display) -> String {
    format!("{} violation(s), first on stream {seed}: {}", v.len(), v[0])
}

const DP_STREAMS: u64 = 1000;

fn deferred_priority_corpus() -> Vec<CriterionOutcome> {
    const COUNTS: &[&str] = &[
        "first-goods",
        "high-share",
        "goods-share",
        "phase-length",
        "inactive-after-high",
        "low-rotation",
    ];
    const LEVELS: &[&str] = &["level-sets", "h-positive"];
    const FLOORS: &[&str] = &["mms-floor", "prop-floor"];
    let start = Instant::now();
    let mut found: [Option<String>; 3] = [None, None, None];
    let mut error = None;
    let mut steps = 0usize;
    'outer: for n in 2..=6 {
        for k in 0..DP_STREAMS {
            let inst = match mixed_stream(n, 200, k, 0) {
                Ok(i) => i,
                Err(e) => {
                    error = Some(e);
                    break 'outer;
                }
            };
            let mut audit = DpAudit::new(n, 0.0);
            if let Err(e) = audited(&mut DeferredPriority::new(), &inst, &mut [&mut audit]) {
                error = Some(e);
                break 'outer;
            }
            steps += inst.m();
            for (slot, names) in found.iter_mut().zip([COUNTS, LEVELS, FLOORS]) {
                let v: Vec<Violation> = audit
                    .violations()
                    .iter()
                    .filter(|v| names.contains(&v.check))
                    .cloned()
                    .collect();
                if slot.is_none() && !v.is_empty() {
                    *slot = Some(first(&v, format!("n={n} k={k}")));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let ok = format!("{} streams, {steps} steps, no violations", 5 * DP_STREAMS);
    found
        .into_iter()
        .enumerate()
        .map(|(idx, bad)| {
            let res = match (&error, bad) {
                (Some(e), _) => Err(e.clone()),
                (None, Some(b)) => Err(b),
                (None, None) => Ok(ok.clone()),
            };
            let budget = (idx == 0).then(|| Duration::from_secs(60));
            finish(idx as u8 + 1, res, elapsed, budget)
        })
        .collect()
}

fn mms_adversary_meets() -> Result<String, String> {
    let mut seen = Vec::new();
    for n in 2..=5 {
        let tr = mms_adversary(&mut DeferredPriority::new(), n).map_err(|e| e.to_string())?;
        let q = (2 * n - 1) as f64;
        let min = tr.min_ratio("mms").ok_or("no mms ratios")?;
        let w = tr.witness.ratio;
        if min.num * q != min.den || w.num * q != w.den {
            return Err(format!(
                "n={n}: min ratio {min}, witness {w}, expected 1/{q}"
            ));
        }
        seen.push(format!("n={n} at t={}", tr.witness.t));
    }
    Ok(format!(
        "exactly 1/(2n-1) with nothing lower: {}",
        seen.join(", ")
    ))
}

fn ef1_adversary_forces_half() -> Result<String, String> {
    let algs: [&mut dyn OnlineAlgorithm; 3] = [
        &mut DeferredPriority::new(),
        &mut RoundRobin,
        &mut GreedyWelfare,
    ];
    let mut seen = Vec::new();
    for alg in algs {
        let name = alg.name();
        let tr = ef1_adversary_two_agents(alg).map_err(|e| e.to_string())?;
        let w = tr.witness;
        if w.t > 5 || !w.ratio.at_most(1.0, 2.0, 0.0) {
            return Err(format!("{name}: witness ratio {} at t={}", w.ratio, w.t));
        }
        seen.push(format!("{name} {} at t={}", w.ratio, w.t));
    }
    Ok(seen.join(", "))
}

fn naive_corpus() -> Result<String, String> {
    for k in 0..1000 {
        let inst = mixed_stream(2, 200, k, 1)?;
        let mut audit = NaiveAudit::new(0.0);
        audited(&mut NaiveMatching::new(), &inst, &mut [&mut audit])?;
        if !audit.violations().is_empty() {
            return Err(first(audit.violations(), k));
        }
    }
    Ok("1000 streams, no violations".into())
}

fn priority_corpus() -> Result<String, String> {
    let mut triggers = 0;
    let mut partial = 0;
    for n in 2..=6 {
        for k in 0..1000 {
            let inst = mixed_stream(n, 50 * n, k, n - 1)?;
            let mut audit = PriorityAudit::new(n, 0.0);
            audited(&mut PriorityMatching::new(), &inst, &mut [&mut audit])?;
            if !audit.violations().is_empty() {
                return Err(first(audit.violations(), format!("n={n} k={k}")));
            }
            triggers += audit.recovery_triggers();
            partial += audit.partial_round.is_some() as usize;
        }
    }
    Ok(format!(
        "5000 streams, no violations; 1/2-EF1 recovery triggered for {triggers} agent(s){}",
        if partial > 0 {
            format!(", {partial} partial rounds")
        } else {
            String::new()
        }
    ))
}

fn full_foresight_hard() -> Result<String, String> {
    let mut runs = 0;
    for n in 2..=6 {
        let inst = known_instance_hard(n, n as f64, n - 1).map_err(|e| e.to_string())?;
        for kind in AlgorithmKind::ALL {
            if kind.check_instance(&inst).is_err() {
                continue;
            }
            let mut worst = FairRatio::ONE;
            let mut err = None;
            simulate(kind.build().as_mut(), &inst, |s, _| {
                match report_all(s, &inst) {
                    Ok(r) => r
                        .iter()
                        .filter_map(|x| x.mms_ratio)
                        .for_each(|x| worst = worst.min(x)),
                    Err(e) => err = Some(e.to_string()),
                }
            })
            .map_err(|e| e.to_string())?;
            if let Some(e) = err {
                return Err(e);
            }
            if !worst.at_most(1.0, n as f64, 0.0) {
                return Err(format!("{} on n={n}: min mms ratio {worst}", kind.name()));
            }
            runs += 1;
        }
    }
    Ok(format!("{runs} algorithm runs, all at or below 1/n"))
}

fn mms_oracles_agree() -> Result<String, String> {
    let mut cases = 0;
    for (alpha, beta) in [(5.0, 1.0), (2.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
        for n in 1..=4 {
            for total in 0..=12 {
                for h in 0..=total {
                    let l = total - h;
                    let mut vals = vec![alpha; h];
                    vals.extend(std::iter::repeat_n(beta, l));
                    let fast = mms_two_value(h, l, alpha, beta, n).map_err(|e| e.to_string())?;
                    let slow = mms_exhaustive(&vals, n).map_err(|e| e.to_string())?;
                    if fast != slow {
                        return Err(format!(
                            "h={h} l={l} n={n} ({alpha},{beta}): {fast} vs {slow}"
                        ));
                    }
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} cases equal"))
}

fn reduction_corpus() -> Result<String, String> {
    let mut subsets = 0usize;
    for k in 0..200u64 {
        let n = 2 + (k % 3) as usize;
        let m = 1 + (k as usize * 7) % 12;
        let g = Generator::IntervalRandom {
            n,
            m,
            alpha_max: 25.0,
        };
        let inst = generate(&g, 10_000 + k, n - 1).map_err(|e| e.to_string())?;
        let proxy = threshold_proxy(&inst).map_err(|e| e.to_string())?.proxy;
        let tag = format!("instance {k} (n={n}, m={m})");
        let a_star = inst
            .agents
            .iter()
            .map(|a| a.alpha.sqrt())
            .fold(0.0, f64::max);

        for i in 0..n {
            let root = inst.agents[i].alpha.sqrt();
            let v: Vec<f64> = (1..=m).map(|g| inst.value(i, g)).collect();
            let vh: Vec<f64> = (1..=m).map(|g| proxy.value(i, g)).collect();
            for mask in 0u32..(1 << m) {
                let sum = |xs: &[f64]| {
                    (0..m)
                        .filter(|b| mask >> b & 1 == 1)
                        .map(|b| xs[b])
                        .sum::<f64>()
                };
                let (s, sh) = (sum(&v), sum(&vh));
                let slack = REL_TOL * sh;
                if sh / root > s + slack || s > sh + slack {
                    return Err(format!(
                        "{tag}: sandwich fails for agent {} on {mask:b}",
                        i + 1
                    ));
                }
                subsets += 1;
            }
            for t in 1..=m {
                let mu = mms_exhaustive(&v[..t], n).map_err(|e| e.to_string())?;
                let h = proxy.goods[..t]
                    .iter()
                    .filter(|g| matches!(&g.values, GoodValues::HighLowMask(x) if x[i]))
                    .count();
                let p = &proxy.agents[i];
                let mu_hat =
                    mms_two_value(h, t - h, p.alpha, p.beta, n).map_err(|e| e.to_string())?;
                if mu > mu_hat * (1.0 + REL_TOL) {
                    return Err(format!(
                        "{tag}: agent {} mms {mu} above proxy {mu_hat} at t={t}",
                        i + 1
                    ));
                }
            }
        }

        let end_to_end = |alg: &mut dyn OnlineAlgorithm| -> Result<_, String> {
            let tr = simulate(alg, &proxy, |_, _| {}).map_err(|e| e.to_string())?;
            let lift = lift_guarantee(&inst, &proxy, &tr.choices()).map_err(|e| e.to_string())?;
            if let Some(v) = lift.violations.first() {
                return Err(format!("{tag}: {v}"));
            }
            Ok(lift.original)
        };
        let q = a_star * (2 * n - 1) as f64;
        for r in end_to_end(&mut DeferredPriority::new())?.iter().flatten() {
            if let Some(x) = r.mms_ratio {
                if !x.at_least(1.0, q, REL_TOL) {
                    return Err(format!(
                        "{tag}: deferred-priority mms {x} below 1/{q} at t={}",
                        r.t
                    ));
                }
            }
        }
        for r in end_to_end(&mut PriorityMatching::new())?.iter().flatten() {
            if !r.ef2.at_least(1.0, a_star, REL_TOL) {
                return Err(format!(
                    "{tag}: priority-matching ef2 {} below 1/{a_star} at t={}",
                    r.ef2, r.t
                ));
            }
            if r.t % n == 0 && !r.ef1.at_least(1.0, a_star, REL_TOL) {
                return Err(format!(
                    "{tag}: priority-matching ef1 {} below 1/{a_star} at t={}",
                    r.ef1, r.t
                ));
            }
        }
    }
    Ok(format!(
        "200 instances, {subsets} subset sandwiches, all bounds hold"
    ))
}

fn asymptotic_corpus() -> Result<String, String> {
    let lambdas = [1.0, 2.0, 4.0];
    let mut latest = [0usize; 3];
    for k in 0..100u64 {
        let n = 2 + (k % 5) as usize;
        let inst = mixed_stream(n, 2000, 50_000 + k, n - 1)?;
        let mut runs: Vec<(Box<dyn OnlineAlgorithm>, Vec<AsymptoticAudit>)> = vec![(
            Box::new(PriorityMatching::new()),
            lambdas
                .iter()
                .map(|&l| AsymptoticAudit::for_priority(l, REL_TOL))
                .collect(),
        )];
        if n == 2 {
            runs.push((
                Box::new(NaiveMatching::new()),
                lambdas
                    .iter()
                    .map(|&l| AsymptoticAudit::for_naive(l, REL_TOL))
                    .collect(),
            ));
        }
        for (mut alg, mut audits) in runs {
            let name = alg.name();
            let mut refs: Vec<&mut dyn Auditor> =
                audits.iter_mut().map(|a| a as &mut dyn Auditor).collect();
            audited(alg.as_mut(), &inst, &mut refs)?;
            for (idx, a) in audits.iter().enumerate() {
                if let Some(v) = a.violations().first() {
                    return Err(format!("{name} stream {k} lambda {}: {v}", lambdas[idx]));
                }
                let at = a.reached_at().ok_or_else(|| {
                    format!("{name} stream {k}: lambda {} never reached", lambdas[idx])
                })?;
                latest[idx] = latest[idx].max(at);
            }
        }
    }
    Ok(format!(
        "100 streams; floors reached by t = {}, {}, {} for lambda 1, 2, 4 and held",
        latest[0], latest[1], latest[2]
    ))
}
