use fairstream::algorithm::{replay, simulate, OnlineAlgorithm};
use fairstream::audit::Auditor;
use fairstream::baselines::{GreedyWelfare, RoundRobin};
use fairstream::deferred_priority::{DeferredPriority, DpAudit};
use fairstream::foresight::{NaiveAudit, NaiveMatching, PriorityAudit, PriorityMatching};
use fairstream::generate::{generate, Generator, ProfileMix};
use fairstream::harness::AlgorithmKind;
use fairstream::io::{read_instance, write_instance};
use fairstream::metrics::{
    mms_exhaustive, mms_two_value, mms_two_value_enumerated, report_all, FairnessReport,
};
use fairstream::model::{Flavor, GoodEvent, Instance};
use fairstream::reduction::{threshold_proxy, threshold_round};
use fairstream::state::AllocationState;
use proptest::prelude::*;
use proptest::sample::select;

/// Integer profiles of every type, divisible or not.
const PROFILES: [(f64, f64); 9] = [
    (2.0, 1.0),
    (3.0, 2.0),
    (5.0, 3.0),
    (7.0, 1.0),
    (4.0, 4.0),
    (1.0, 1.0),
    (2.0, 0.0),
    (9.0, 0.0),
    (0.0, 0.0),
];

fn two_value(n: impl Strategy<Value = usize>, max_m: usize) -> impl Strategy<Value = Instance> {
    n.prop_flat_map(move |n| {
        (
            prop::collection::vec(select(&PROFILES[..]), n),
            prop::collection::vec(prop::collection::vec(any::<bool>(), n), 0..=max_m),
        )
    })
    .prop_map(|(profiles, masks)| {
        let goods = masks
            .into_iter()
            .enumerate()
            .map(|(t, h)| GoodEvent::mask(t + 1, h))
            .collect();
        Instance::new(&profiles, goods, Flavor::TwoValue, 0).unwrap()
    })
}

/// Per-step reports of a run.
fn reports_of(
    alg: &mut dyn OnlineAlgorithm,
    inst: &Instance,
) -> (Vec<usize>, Vec<Vec<FairnessReport>>) {
    let mut all = Vec::new();
    let tr = simulate(alg, inst, |s, _| all.push(report_all(s, inst).unwrap())).unwrap();
    (tr.choices(), all)
}

fn audit(alg: &mut dyn OnlineAlgorithm, inst: &Instance, a: &mut dyn Auditor) {
    let mut last: Option<AllocationState> = None;
    simulate(alg, inst, |s, step| {
        a.observe(inst, s, step, &report_all(s, inst).unwrap());
        last = Some(s.clone());
    })
    .unwrap();
    if let Some(s) = &last {
        a.finish(inst, s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn deferred_priority_invariants(inst in two_value(1usize..=6, 60)) {
        let mut a = DpAudit::new(inst.n(), 0.0);
        audit(&mut DeferredPriority::new(), &inst, &mut a);
        prop_assert!(a.violations().is_empty(), "{}", a.violations()[0]);
    }

    #[test]
    fn naive_matching_invariants(mut inst in two_value(Just(2usize), 60)) {
        inst.foresight = 1;
        let mut a = NaiveAudit::new(0.0);
        audit(&mut NaiveMatching::new(), &inst, &mut a);
        prop_assert!(a.violations().is_empty(), "{}", a.violations()[0]);
    }

    #[test]
    fn priority_matching_invariants(mut inst in two_value(2usize..=5, 40)) {
        inst.foresight = inst.n() - 1;
        let mut a = PriorityAudit::new(inst.n(), 0.0);
        audit(&mut PriorityMatching::new(), &inst, &mut a);
        prop_assert!(a.violations().is_empty(), "{}", a.violations()[0]);
    }

    #[test]
    fn ratios_are_ordered_and_imply_each_other(
        inst in two_value(1usize..=5, 30),
        picks in prop::collection::vec(any::<prop::sample::Index>(), 30),
    ) {
        let choices: Vec<usize> = picks[..inst.m()].iter().map(|p| p.index(inst.n())).collect();
        replay(&inst, &choices, |s| {
            for r in report_all(s, &inst).unwrap() {
                assert!(r.ef.cmp_ratio(&r.ef1).is_le());
                assert!(r.ef1.cmp_ratio(&r.ef2).is_le());
                if r.ef.value() == 1.0 {
                    assert_eq!(r.prop.value(), 1.0);
                }
                if r.prop.value() == 1.0 {
                    assert_eq!(r.mms_ratio.unwrap().value(), 1.0);
                }
                assert_eq!(r.envy_out_degree == 0, r.ef.value() == 1.0);
            }
        });
    }

    #[test]
    fn scaling_an_agent_changes_nothing(
        mut inst in two_value(2usize..=4, 30),
        who in any::<prop::sample::Index>(),
        c in select(vec![2.0, 3.0, 0.5, 7.0]),
    ) {
        let i = who.index(inst.n());
        inst.foresight = inst.n() - 1;
        let scaled = inst.scaled(i, c);
        let mut pairs: Vec<(Box<dyn OnlineAlgorithm>, Box<dyn OnlineAlgorithm>)> = vec![
            (Box::new(DeferredPriority::new()), Box::new(DeferredPriority::new())),
            (Box::new(PriorityMatching::new()), Box::new(PriorityMatching::new())),
            (Box::new(RoundRobin), Box::new(RoundRobin)),
        ];
        if inst.n() == 2 {
            pairs.push((Box::new(NaiveMatching::new()), Box::new(NaiveMatching::new())));
        }
        for (mut a, mut b) in pairs {
            let (ca, ra) = reports_of(a.as_mut(), &inst);
            let (cb, rb) = reports_of(b.as_mut(), &scaled);
            prop_assert_eq!(ca, cb);
            for (x, y) in ra.iter().flatten().zip(rb.iter().flatten()) {
                prop_assert_eq!(x.ef.value(), y.ef.value());
                prop_assert_eq!(x.ef1.value(), y.ef1.value());
                prop_assert_eq!(x.ef2.value(), y.ef2.value());
                prop_assert_eq!(x.prop.value(), y.prop.value());
                prop_assert_eq!(x.mms_ratio.map(|r| r.value()), y.mms_ratio.map(|r| r.value()));
            }
        }
    }

    #[test]
    fn mms_routes_agree(
        h in 0usize..=6,
        l in 0usize..=6,
        (alpha, beta) in (0u32..=9).prop_flat_map(|a| (Just(a), 0..=a)),
        n in 1usize..=4,
    ) {
        let (a, b) = (alpha as f64, beta as f64);
        let mut vals = vec![a; h];
        vals.extend(std::iter::repeat_n(b, l));
        let fast = mms_two_value(h, l, a, b, n).unwrap();
        prop_assert_eq!(fast, mms_two_value_enumerated(h, l, a, b, n));
        prop_assert_eq!(fast, mms_exhaustive(&vals, n).unwrap());
    }

    #[test]
    fn mms_shrinks_with_more_agents(
        h in 0usize..40,
        l in 0usize..40,
        (alpha, beta) in (1u32..=12).prop_flat_map(|a| (Just(a), 0..=a)),
        n in 1usize..8,
    ) {
        let (a, b) = (alpha as f64, beta as f64);
        prop_assert!(mms_two_value(h, l, a, b, n + 1).unwrap() <= mms_two_value(h, l, a, b, n).unwrap());
    }

    #[test]
    fn exhaustive_mms_shrinks_with_more_agents(
        vals in prop::collection::vec(1.0f64..10.0, 0..=8),
        n in 1usize..5,
    ) {
        prop_assert!(mms_exhaustive(&vals, n + 1).unwrap() <= mms_exhaustive(&vals, n).unwrap());
        let total: f64 = vals.iter().sum();
        prop_assert!(mms_exhaustive(&vals, n).unwrap() <= total / n as f64 + 1e-9);
    }

    #[test]
    fn rounding_sandwiches_every_value(alpha in 1.0001f64..100.0, frac in 0.0f64..=1.0) {
        let v = 1.0 + frac * (alpha - 1.0);
        let r = threshold_round(v, alpha).unwrap();
        let root = alpha.sqrt();
        prop_assert!(r == alpha || r == root);
        prop_assert!(r / root <= v * (1.0 + 1e-9) && v <= r * (1.0 + 1e-9));
    }

    #[test]
    fn proxy_sandwiches_subsets(seed in any::<u64>(), mask in any::<u16>()) {
        let g = Generator::IntervalRandom { n: 3, m: 10, alpha_max: 25.0 };
        let inst = generate(&g, seed, 0).unwrap();
        let proxy = threshold_proxy(&inst).unwrap().proxy;
        for i in 0..3 {
            let root = inst.agents[i].alpha.sqrt();
            let pick = |x: &Instance| (1..=10).filter(|g| mask >> (g - 1) & 1 == 1).map(|g| x.value(i, g)).sum::<f64>();
            let (s, sh) = (pick(&inst), pick(&proxy));
            prop_assert!(sh / root <= s * (1.0 + 1e-9) + 1e-12);
            prop_assert!(s <= sh * (1.0 + 1e-9));
        }
    }

    #[test]
    fn replay_reproduces_runs(seed in any::<u64>(), n in 2usize..=5) {
        let g = Generator::Random2Value { n, m: 50, p_high: 0.4, profiles: ProfileMix::Mixed };
        let inst = generate(&g, seed, n - 1).unwrap();
        for mut alg in [
            Box::new(DeferredPriority::new()) as Box<dyn OnlineAlgorithm>,
            Box::new(PriorityMatching::new()),
            Box::new(GreedyWelfare),
        ] {
            let mut last = None;
            let t1 = simulate(alg.as_mut(), &inst, |s, _| last = Some(s.clone())).unwrap();
            let mut fresh = t1.algorithm.parse::<AlgorithmKind>().unwrap().build();
            let t2 = simulate(fresh.as_mut(), &inst, |_, _| {}).unwrap();
            prop_assert_eq!(&t1, &t2);
            let replayed = replay(&inst, &t1.choices(), |_| {});
            prop_assert_eq!(Some(replayed), last);
        }
    }

    #[test]
    fn files_round_trip(seed in any::<u64>(), interval in any::<bool>()) {
        let g = if interval {
            Generator::IntervalRandom { n: 3, m: 20, alpha_max: 9.0 }
        } else {
            Generator::Random2Value { n: 3, m: 20, p_high: 0.5, profiles: ProfileMix::Mixed }
        };
        let inst = generate(&g, seed, 2).unwrap();
        let text = write_instance(&inst);
        let back = read_instance(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(write_instance(&back), text);
    }
}

/// Each auditor must flag an algorithm that lacks its guarantees.
#[test]
fn auditors_catch_baselines() {
    let caught = |n: usize,
                  foresight: usize,
                  make: &dyn Fn() -> Box<dyn Auditor>,
                  alg: &dyn Fn() -> Box<dyn OnlineAlgorithm>| {
        (0..50).any(|seed| {
            let g = Generator::Random2Value {
                n,
                m: 60,
                p_high: 0.3,
                profiles: ProfileMix::Mixed,
            };
            let inst = generate(&g, seed, foresight).unwrap();
            let mut a = make();
            audit(alg().as_mut(), &inst, a.as_mut());
            !a.violations().is_empty()
        })
    };
    assert!(caught(3, 0, &|| Box::new(DpAudit::new(3, 0.0)), &|| {
        Box::new(GreedyWelfare)
    }));
    assert!(caught(2, 1, &|| Box::new(NaiveAudit::new(0.0)), &|| {
        Box::new(GreedyWelfare)
    }));
    assert!(caught(
        3,
        2,
        &|| Box::new(PriorityAudit::new(3, 0.0)),
        &|| Box::new(RoundRobin)
    ));
}
