//! Seeded instance generators. The same seed always gives the same instance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{Flavor, GoodEvent, Instance, ModelError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerateError {
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Agent profiles drawn by `ProfileMix::Mixed`: types 1, 2, and 3, each
/// with alpha a multiple of beta.
pub const MIXED_PROFILES: [(f64, f64); 8] = [
    (2.0, 1.0),
    (3.0, 1.0),
    (5.0, 1.0),
    (6.0, 2.0),
    (1.0, 1.0),
    (3.0, 3.0),
    (1.0, 0.0),
    (4.0, 0.0),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileMix {
    Fixed { alpha: f64, beta: f64 },
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Generator {
    /// Each good is high for each agent independently with probability `p_high`.
    Random2Value {
        n: usize,
        m: usize,
        p_high: f64,
        profiles: ProfileMix,
    },
    /// n goods, agents `(alpha, 1)`; good r is low for agents i >= r.
    Staircase { n: usize, alpha: f64 },
    /// n goods low for all, then n-1 goods high for all.
    LowThenHigh { n: usize, alpha: f64 },
    /// alpha_i uniform in (1, alpha_max], values uniform in [1, alpha_i].
    IntervalRandom { n: usize, m: usize, alpha_max: f64 },
}

impl Generator {
    pub fn check(&self) -> Result<(), GenerateError> {
        let bad = |m: String| Err(GenerateError::Param(m));
        let n = match *self {
            Generator::Random2Value { n, p_high, .. } => {
                if !(0.0..=1.0).contains(&p_high) {
                    return bad(format!("p_high {p_high} outside [0, 1]"));
                }
                n
            }
            Generator::Staircase { n, alpha } | Generator::LowThenHigh { n, alpha } => {
                if !(alpha >= 1.0 && alpha.is_finite()) {
                    return bad(format!("alpha {alpha} below 1"));
                }
                n
            }
            Generator::IntervalRandom { n, alpha_max, .. } => {
                if !(alpha_max > 1.0 && alpha_max.is_finite()) {
                    return bad(format!("alpha_max {alpha_max} must exceed 1"));
                }
                n
            }
        };
        if n == 0 {
            return bad("n must be at least 1".into());
        }
        Ok(())
    }
}

pub fn generate(g: &Generator, seed: u64, foresight: usize) -> Result<Instance, GenerateError> {
    g.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *g {
        Generator::Random2Value {
            n,
            m,
            p_high,
            profiles,
        } => {
            let agents: Vec<(f64, f64)> = (0..n)
                .map(|_| match profiles {
                    ProfileMix::Fixed { alpha, beta } => (alpha, beta),
                    ProfileMix::Mixed => MIXED_PROFILES[rng.gen_range(0..MIXED_PROFILES.len())],
                })
                .collect();
            let goods = (1..=m)
                .map(|t| GoodEvent::mask(t, (0..n).map(|_| rng.gen_bool(p_high)).collect()))
                .collect();
            Ok(Instance::new(&agents, goods, Flavor::TwoValue, foresight)?)
        }
        Generator::Staircase { n, alpha } => {
            let goods = (1..=n)
                .map(|r| GoodEvent::mask(r, (1..=n).map(|i| i < r).collect()))
                .collect();
            Ok(Instance::new(
                &vec![(alpha, 1.0); n],
                goods,
                Flavor::TwoValue,
                foresight,
            )?)
        }
        Generator::LowThenHigh { n, alpha } => {
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
        Generator::IntervalRandom { n, m, alpha_max } => {
            let alphas: Vec<(f64, f64)> = (0..n)
                .map(|_| (1.0 + (alpha_max - 1.0) * (1.0 - rng.gen::<f64>()), 1.0))
                .collect();
            let goods = (1..=m)
                .map(|t| {
                    let v = alphas
                        .iter()
                        .map(|&(a, _)| 1.0 + (a - 1.0) * rng.gen::<f64>())
                        .collect();
                    GoodEvent::real(t, v)
                })
                .collect();
            Ok(Instance::new(
                &alphas,
                goods,
                Flavor::IntervalRestricted,
                foresight,
            )?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::write_instance;
    use crate::model::GoodValues;

    #[test]
    fn same_seed_same_bytes() {
        let g = Generator::Random2Value {
            n: 4,
            m: 50,
            p_high: 0.4,
            profiles: ProfileMix::Mixed,
        };
        let a = write_instance(&generate(&g, 7, 0).unwrap());
        let b = write_instance(&generate(&g, 7, 0).unwrap());
        let c = write_instance(&generate(&g, 8, 0).unwrap());
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn staircase_shape() {
        let inst = generate(&Generator::Staircase { n: 4, alpha: 40.0 }, 0, 0).unwrap();
        // Agent i (1-based) sees good r as low exactly when r <= i.
        for r in 1..=4 {
            let GoodValues::HighLowMask(h) = &inst.goods[r - 1].values else {
                panic!()
            };
            for i in 1..=4 {
                assert_eq!(h[i - 1], r > i);
            }
        }
    }

    #[test]
    fn bad_params_rejected() {
        let g = Generator::Random2Value {
            n: 2,
            m: 3,
            p_high: 1.5,
            profiles: ProfileMix::Mixed,
        };
        assert!(matches!(generate(&g, 0, 0), Err(GenerateError::Param(_))));
        let g = Generator::IntervalRandom {
            n: 2,
            m: 3,
            alpha_max: 1.0,
        };
        assert!(generate(&g, 0, 0).is_err());
        assert!(generate(&Generator::Staircase { n: 0, alpha: 4.0 }, 0, 0).is_err());
        let g = Generator::Random2Value {
            n: 2,
            m: 3,
            p_high: 0.5,
            profiles: ProfileMix::Fixed {
                alpha: 1.0,
                beta: 2.0,
            },
        };
        assert!(matches!(generate(&g, 0, 0), Err(GenerateError::Model(_))));
    }

    #[test]
    fn interval_values_in_range() {
        let inst = generate(
            &Generator::IntervalRandom {
                n: 3,
                m: 40,
                alpha_max: 25.0,
            },
            3,
            0,
        )
        .unwrap();
        assert!(inst.validate().is_ok());
        assert!(inst.agents.iter().all(|a| a.alpha > 1.0 && a.alpha <= 25.0));
    }
}
