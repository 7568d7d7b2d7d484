//! Maximin share oracles.
//!
//! `mms_exhaustive` searches partitions of an explicit value list.
//! `mms_two_value` solves the two-value case exactly: both values are scaled to
//! integers, then the largest integer level every bundle can reach is found
//! by binary search over a covering test.

use super::MetricError;

/// Largest number of goods the exhaustive oracle accepts.
pub const EXHAUSTIVE_LIMIT: usize = 12;

/// Exact MMS of `values` split into `n` bundles.
pub fn mms_exhaustive(values: &[f64], n: usize) -> Result<f64, MetricError> {
    if n == 0 {
        return Err(MetricError::NoBundles);
    }
    if values.len() > EXHAUSTIVE_LIMIT {
        return Err(MetricError::TooManyGoods {
            m: values.len(),
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    if values.len() < n {
        return Ok(0.0);
    }
    let mut items = values.to_vec();
    items.sort_by(|a, b| b.total_cmp(a));
    let mut suffix = vec![0.0; items.len() + 1];
    for k in (0..items.len()).rev() {
        suffix[k] = suffix[k + 1] + items[k];
    }
    let mut search = Search {
        items: &items,
        suffix: &suffix,
        best: greedy_min(&items, n),
        cap: suffix[0] / n as f64,
    };
    let mut loads = vec![0.0; n];
    search.dfs(0, &mut loads);
    Ok(search.best)
}

/// Largest-first greedy, a starting lower bound.
fn greedy_min(items: &[f64], n: usize) -> f64 {
    let mut loads = vec![0.0; n];
    for &v in items {
        let k = argmin(&loads);
        loads[k] += v;
    }
    loads[argmin(&loads)]
}

fn argmin(xs: &[f64]) -> usize {
    let mut best = 0;
    for (k, x) in xs.iter().enumerate() {
        if *x < xs[best] {
            best = k;
        }
    }
    best
}

struct Search<'a> {
    items: &'a [f64],
    suffix: &'a [f64],
    best: f64,
    cap: f64,
}

impl Search<'_> {
    fn dfs(&mut self, k: usize, loads: &mut [f64]) {
        if self.best >= self.cap {
            return;
        }
        if k == self.items.len() {
            let low = loads.iter().cloned().fold(f64::INFINITY, f64::min);
            if low > self.best {
                self.best = low;
            }
            return;
        }
        if water_level(loads, self.suffix[k]) <= self.best {
            return;
        }
        for b in 0..loads.len() {
            // Bundles with equal loads lead to the same subproblem.
            if loads[..b].contains(&loads[b]) {
                continue;
            }
            loads[b] += self.items[k];
            self.dfs(k + 1, loads);
            loads[b] -= self.items[k];
        }
    }
}

/// Highest minimum reachable if `extra` were divisible.
fn water_level(loads: &[f64], extra: f64) -> f64 {
    let mut sorted = loads.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mut rem = extra;
    let mut level = sorted[0];
    for k in 1..=sorted.len() {
        let next = if k < sorted.len() {
            sorted[k]
        } else {
            f64::INFINITY
        };
        let need = (next - level) * k as f64;
        if need >= rem {
            return level + rem / k as f64;
        }
        rem -= need;
        level = next;
    }
    level
}

/// Exact MMS with `h` goods worth `alpha` and `l` goods worth `beta`.
pub fn mms_two_value(
    h: usize,
    l: usize,
    alpha: f64,
    beta: f64,
    n: usize,
) -> Result<f64, MetricError> {
    if n == 0 {
        return Err(MetricError::NoBundles);
    }
    let units = Units::new(alpha, beta).ok_or(MetricError::Unrepresentable { alpha, beta })?;
    let (h, l, n) = (h as u128, l as u128, n as u128);
    let level = if units.a == 0 {
        0
    } else if units.b == 0 {
        (h / n) * units.a
    } else if units.a == units.b {
        ((h + l) / n) * units.a
    } else {
        let total = h
            .checked_mul(units.a)
            .and_then(|x| l.checked_mul(units.b).and_then(|y| x.checked_add(y)))
            .ok_or(MetricError::Unrepresentable { alpha, beta })?;
        let cover = Cover {
            h,
            l,
            n,
            a: units.a,
            b: units.b,
        };
        let (mut lo, mut hi) = (0u128, total / n);
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            if cover.feasible(mid) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    };
    Ok(units.to_f64(level))
}

/// alpha and beta as integers `a`, `b` times a shared power of two.
struct Units {
    a: u128,
    b: u128,
    exp: i32,
}

impl Units {
    fn new(alpha: f64, beta: f64) -> Option<Units> {
        if !(alpha >= beta && beta >= 0.0 && alpha.is_finite()) {
            return None;
        }
        let (ma, ea) = dyadic(alpha);
        let (mb, eb) = dyadic(beta);
        let exp = if ma == 0 {
            eb
        } else if mb == 0 {
            ea
        } else {
            ea.min(eb)
        };
        let shift = |m: u64, e: i32| -> Option<u128> {
            let s = (e - exp) as u32;
            if m == 0 {
                Some(0)
            } else if s > 64 {
                None
            } else {
                Some((m as u128) << s)
            }
        };
        Some(Units {
            a: shift(ma, ea)?,
            b: shift(mb, eb)?,
            exp,
        })
    }

    fn to_f64(&self, level: u128) -> f64 {
        level as f64 * 2f64.powi(self.exp)
    }
}

/// Splits a finite non-negative float into an odd mantissa and exponent.
fn dyadic(x: f64) -> (u64, i32) {
    if x == 0.0 {
        return (0, 0);
    }
    let bits = x.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut m, mut e) = if raw_exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), raw_exp - 1075)
    };
    let tz = m.trailing_zeros();
    m >>= tz;
    e += tz as i32;
    (m, e)
}

/// Covering test for integer item sizes `a > b > 0`.
struct Cover {
    h: u128,
    l: u128,
    n: u128,
    a: u128,
    b: u128,
}

impl Cover {
    /// Can `n` bundles each reach at least `level`?
    fn feasible(&self, level: u128) -> bool {
        if level == 0 {
            return true;
        }
        let c = level.div_ceil(self.a);
        if self.a % self.b == 0 {
            self.feasible_divisible(level, c)
        } else {
            self.feasible_dp(level, c)
        }
    }

    /// `a` is a multiple of `b`: bundles with `k` high-only members, the rest
    /// mixed. Mixed bundles take as many highs as they can use.
    fn feasible_divisible(&self, level: u128, c: u128) -> bool {
        let s = self.a / self.b;
        let lows_alone = level.div_ceil(self.b);
        let mut k = 0;
        while k <= self.n && k * c <= self.h {
            let mixed = self.n - k;
            if mixed == 0 {
                return true;
            }
            let highs = (self.h - k * c).min(mixed * (c - 1));
            if mixed * lows_alone - s * highs <= self.l {
                return true;
            }
            k += 1;
        }
        false
    }

    /// General sizes: dynamic program over bundles on highs used.
    fn feasible_dp(&self, level: u128, c: u128) -> bool {
        let cap = self.h.min(self.n * c) as usize;
        let c = c as usize;
        let need: Vec<u128> = (0..=c)
            .map(|x| {
                let got = x as u128 * self.a;
                if got >= level {
                    0
                } else {
                    (level - got).div_ceil(self.b)
                }
            })
            .collect();
        let mut best = vec![u128::MAX; cap + 1];
        best[0] = 0;
        for _ in 0..self.n {
            let mut next = vec![u128::MAX; cap + 1];
            for used in 0..=cap {
                if best[used] == u128::MAX {
                    continue;
                }
                for (x, &lows) in need.iter().enumerate() {
                    let u = used + x;
                    if u > cap {
                        break;
                    }
                    let v = best[used] + lows;
                    if v < next[u] {
                        next[u] = v;
                    }
                }
            }
            best = next;
        }
        best.iter().any(|&v| v <= self.l)
    }
}

/// Two-value MMS by enumerating weakly decreasing high distributions and
/// water-filling the low goods onto the lowest-index minimum bundle.
///
/// Exponential in `n`; kept as an independent second route for small cases.
pub fn mms_two_value_enumerated(h: usize, l: usize, alpha: f64, beta: f64, n: usize) -> f64 {
    fn rec(
        slot: usize,
        left: usize,
        max_part: usize,
        parts: &mut Vec<usize>,
        eval: &mut dyn FnMut(&[usize]),
    ) {
        if slot + 1 == parts.len() {
            if left <= max_part {
                parts[slot] = left;
                eval(parts);
            }
            return;
        }
        for x in (0..=left.min(max_part)).rev() {
            parts[slot] = x;
            rec(slot + 1, left - x, x, parts, eval);
        }
    }
    assert!(n > 0, "need at least one bundle");
    let mut best = 0.0f64;
    let mut parts = vec![0; n];
    rec(0, h, h, &mut parts, &mut |dist| {
        let mut loads: Vec<f64> = dist.iter().map(|&x| x as f64 * alpha).collect();
        for _ in 0..l {
            let k = argmin(&loads);
            loads[k] += beta;
        }
        let low = loads.iter().cloned().fold(f64::INFINITY, f64::min);
        best = best.max(low);
    });
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Plain n^m enumeration, no pruning.
    fn brute(values: &[f64], n: usize) -> f64 {
        let m = values.len();
        let mut best = 0.0f64;
        let mut code = vec![0usize; m];
        loop {
            let mut loads = vec![0.0; n];
            for (k, &b) in code.iter().enumerate() {
                loads[b] += values[k];
            }
            best = best.max(loads.iter().cloned().fold(f64::INFINITY, f64::min));
            let mut pos = 0;
            loop {
                if pos == m {
                    return best;
                }
                code[pos] += 1;
                if code[pos] < n {
                    break;
                }
                code[pos] = 0;
                pos += 1;
            }
        }
    }

    #[test]
    fn exhaustive_examples() {
        assert_eq!(mms_exhaustive(&[5.0, 5.0, 1.0, 1.0, 1.0], 2).unwrap(), 6.0);
        assert_eq!(mms_exhaustive(&[1.0; 7], 3).unwrap(), 2.0);
        assert_eq!(mms_exhaustive(&[1.0, 1.0, 1.0, 4.0, 4.0], 3).unwrap(), 3.0);
        assert!(matches!(
            mms_exhaustive(&[1.0; 13], 2),
            Err(MetricError::TooManyGoods { .. })
        ));
        assert_eq!(mms_exhaustive(&[3.0], 2).unwrap(), 0.0);
    }

    #[test]
    fn exhaustive_matches_brute_force() {
        let sets: &[&[f64]] = &[
            &[7.0, 3.0, 3.0, 2.0, 2.0, 2.0, 1.0],
            &[2.5, 1.25, 4.0, 3.5, 1.0, 1.0],
            &[9.0, 1.0, 1.0, 1.0, 8.0, 2.0, 2.0, 5.0],
        ];
        for vals in sets {
            for n in 1..=4 {
                assert_eq!(
                    mms_exhaustive(vals, n).unwrap(),
                    brute(vals, n),
                    "{vals:?} n={n}"
                );
            }
        }
    }

    #[test]
    fn two_value_examples() {
        assert_eq!(mms_two_value(2, 3, 5.0, 1.0, 2).unwrap(), 6.0);
        for n in 2..=6 {
            assert_eq!(mms_two_value(n - 1, n, n as f64, 1.0, n).unwrap(), n as f64);
        }
        for t in 0..20 {
            assert_eq!(mms_two_value(0, t, 5.0, 1.0, 3).unwrap(), (t / 3) as f64);
        }
        // Uneven high distributions can win: {3,3} against {2,2,2}.
        assert_eq!(mms_two_value(2, 3, 3.0, 2.0, 2).unwrap(), 6.0);
    }

    #[test]
    fn two_value_routes_agree() {
        for &(alpha, beta) in &[(5.0, 1.0), (3.0, 2.0), (2.5, 1.0), (1.0, 0.0), (2.0, 2.0)] {
            for n in 1..=4 {
                for h in 0..=8 {
                    for l in 0..=8 {
                        let fast = mms_two_value(h, l, alpha, beta, n).unwrap();
                        let slow = mms_two_value_enumerated(h, l, alpha, beta, n);
                        assert_eq!(fast, slow, "h={h} l={l} a={alpha} b={beta} n={n}");
                    }
                }
            }
        }
    }

    #[test]
    fn dyadic_round_trip() {
        for x in [1.0, 5.0, 0.75, 2.0f64.sqrt(), 1e-10] {
            let (m, e) = dyadic(x);
            assert_eq!(m as f64 * 2f64.powi(e), x);
            assert_eq!(m % 2, 1);
        }
    }
}
