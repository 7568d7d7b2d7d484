//! Exact maximum-weight assignment with a lexicographic tie-break.
//!
//! Among all maximum-weight assignments the one returned has the
//! lexicographically smallest column vector (column of row 0, then row 1,
//! ...). The Hungarian solver gets this by scaling weights by `n^n` and
//! subtracting `col * n^(n-1-row)`, which makes the optimum unique.

use num_bigint::BigInt;
use num_traits::{Num, One, Zero};

/// Weight types usable by the solvers.
pub trait Weight: Clone + Ord + Num {}

impl<T: Clone + Ord + Num> Weight for T {}

/// Column per row for a square matrix, by trying every permutation.
pub fn assign_exhaustive<W: Weight>(weights: &[Vec<W>]) -> Vec<usize> {
    let n = weights.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let total = |p: &[usize]| {
        p.iter()
            .enumerate()
            .fold(W::zero(), |acc, (r, &c)| acc + weights[r][c].clone())
    };
    let mut best = perm.clone();
    let mut best_w = total(&perm);
    // Permutations in lexicographic order; strict improvement keeps the first.
    while next_permutation(&mut perm) {
        let w = total(&perm);
        if w > best_w {
            best_w = w;
            best = perm.clone();
        }
    }
    best
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Column per row for a square matrix, in O(n^3).
pub fn assign_hungarian<W: Weight>(weights: &[Vec<W>]) -> Vec<usize> {
    let n = weights.len();
    if n == 0 {
        return Vec::new();
    }
    let nw = W::from_str_radix(&n.to_string(), 10)
        .ok()
        .expect("small integer");
    let pow = |e: usize| (0..e).fold(W::one(), |acc, _| acc * nw.clone());
    let scale = pow(n);
    let mut cost = vec![vec![W::zero(); n]; n];
    for r in 0..n {
        let step = pow(n - 1 - r);
        let mut pen = W::zero();
        for c in 0..n {
            // Minimize the negated, perturbed weight.
            cost[r][c] = pen.clone() - weights[r][c].clone() * scale.clone();
            pen = pen + step.clone();
        }
    }
    min_cost_assignment(&cost)
}

/// Shortest augmenting path Hungarian algorithm on a square cost matrix.
fn min_cost_assignment<W: Weight>(cost: &[Vec<W>]) -> Vec<usize> {
    let n = cost.len();
    let mut u = vec![W::zero(); n + 1];
    let mut v = vec![W::zero(); n + 1];
    // owner[c] is the 1-based row matched to 1-based column c.
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut col = 0usize;
        let mut minv: Vec<Option<W>> = vec![None; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col] = true;
            let r = owner[col];
            let mut delta: Option<W> = None;
            let mut next = 0usize;
            for c in 1..=n {
                if used[c] {
                    continue;
                }
                let cur = cost[r - 1][c - 1].clone() - u[r].clone() - v[c].clone();
                if minv[c].as_ref().is_none_or(|m| cur < *m) {
                    minv[c] = Some(cur);
                    way[c] = col;
                }
                let m = minv[c].as_ref().expect("just set");
                if delta.as_ref().is_none_or(|d| m < d) {
                    delta = Some(m.clone());
                    next = c;
                }
            }
            let delta = delta.expect("an unused column remains");
            for c in 0..=n {
                if used[c] {
                    let o = owner[c];
                    u[o] = u[o].clone() + delta.clone();
                    v[c] = v[c].clone() - delta.clone();
                } else if let Some(m) = minv[c].as_mut() {
                    *m = m.clone() - delta.clone();
                }
            }
            col = next;
            if owner[col] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col];
            owner[col] = owner[prev];
            col = prev;
            if col == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; n];
    for c in 1..=n {
        out[owner[c] - 1] = c - 1;
    }
    out
}

/// Converts a big-integer matrix to `i128` if the Hungarian perturbation
/// cannot overflow.
pub fn narrow(weights: &[Vec<BigInt>]) -> Option<Vec<Vec<i128>>> {
    let n = weights.len();
    let max = weights
        .iter()
        .flatten()
        .map(|w| {
            if w < &BigInt::zero() {
                -w.clone()
            } else {
                w.clone()
            }
        })
        .max()
        .unwrap_or_else(BigInt::zero);
    let nn = BigInt::from(n.max(1));
    let scale = (0..n).fold(BigInt::one(), |acc, _| acc * &nn);
    // Costs, potentials, and path sums stay within a few multiples of this.
    let bound = (max + BigInt::one()) * scale * BigInt::from(8 * (n + 1) * (n + 1));
    if bound > BigInt::from(i128::MAX) {
        return None;
    }
    Some(
        weights
            .iter()
            .map(|row| {
                row.iter()
                    .map(|w| i128::try_from(w).expect("bounded"))
                    .collect()
            })
            .collect(),
    )
}
