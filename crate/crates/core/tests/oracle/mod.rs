//! Brute-force reference implementations. Nothing here calls into the
//! library's metric, ranking or statistics code; the tests compare the two.

#![allow(dead_code)]

use std::collections::VecDeque;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[derive(Debug, Clone, Copy)]
pub struct OracleBudget {
    /// Largest state space or input size an oracle may enumerate.
    pub max_space: u64,
    pub seed: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_space: 1_000_000,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    OverBudget { needed: u64, max_space: u64 },
    TooLong { len: usize, max: usize },
    TooFewResamples(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TierRule {
    /// Guessed symbols may be rearranged for free.
    Pool,
    /// Every guessed symbol stays where it was observed.
    Position,
}

fn checked_space(p: usize, len: usize, budget: &OracleBudget) -> Result<u64, OracleError> {
    let needed = (p as u64).checked_pow(len as u32).unwrap_or(u64::MAX);
    if needed > budget.max_space {
        return Err(OracleError::OverBudget {
            needed,
            max_space: budget.max_space,
        });
    }
    Ok(needed)
}

fn encode(seq: &[usize], p: usize) -> usize {
    seq.iter().fold(0, |acc, &d| acc * p + d)
}

fn decode(mut code: usize, p: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = code % p;
        code /= p;
    }
    out
}

/// Can the symbols of `x` be placed on distinct positions of `o` holding the
/// same symbols? Tried by exhaustive backtracking.
fn fits_into(x: &[usize], o: &[usize], used: &mut Vec<bool>) -> bool {
    let Some((&first, rest)) = x.split_first() else {
        return true;
    };
    for i in 0..o.len() {
        if !used[i] && o[i] == first {
            used[i] = true;
            let ok = fits_into(rest, o, used);
            used[i] = false;
            if ok {
                return true;
            }
        }
    }
    false
}

/// Fewest single-symbol substitutions that turn the observed part of `g`
/// into something consistent with `o`. Symbols are `0..p`. Under the pool
/// rule adjacent swaps cost nothing. Searched with a 0-1 BFS over every
/// sequence of the observed length.
pub fn brute_tier_index(
    o: &[usize],
    g: &[usize],
    p: usize,
    rule: TierRule,
    budget: &OracleBudget,
) -> Result<usize, OracleError> {
    let observed = &g[..g.len().min(o.len())];
    let len = observed.len();
    let states = checked_space(p, len, budget)? as usize;
    let is_goal = |code: usize| {
        let x = decode(code, p, len);
        match rule {
            TierRule::Position => x[..] == o[..len],
            TierRule::Pool => fits_into(&x, o, &mut vec![false; o.len()]),
        }
    };
    let mut dist = vec![usize::MAX; states];
    let start = encode(observed, p);
    dist[start] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(code) = queue.pop_front() {
        let d = dist[code];
        if is_goal(code) {
            return Ok(d);
        }
        let x = decode(code, p, len);
        if rule == TierRule::Pool {
            for i in 0..len.saturating_sub(1) {
                let mut y = x.clone();
                y.swap(i, i + 1);
                let c = encode(&y, p);
                if dist[c] > d {
                    dist[c] = d;
                    queue.push_front(c);
                }
            }
        }
        for i in 0..len {
            for s in 0..p {
                if s == x[i] {
                    continue;
                }
                let mut y = x.clone();
                y[i] = s;
                let c = encode(&y, p);
                if dist[c] > d + 1 {
                    dist[c] = d + 1;
                    queue.push_back(c);
                }
            }
        }
    }
    unreachable!("the original's own prefix is always reachable")
}

const MAX_RECURSION_LEN: usize = 7;

fn check_len(len: usize) -> Result<(), OracleError> {
    if len > MAX_RECURSION_LEN {
        Err(OracleError::TooLong {
            len,
            max: MAX_RECURSION_LEN,
        })
    } else {
        Ok(())
    }
}

pub fn brute_lcs<T: PartialEq>(o: &[T], g: &[T]) -> Result<usize, OracleError> {
    check_len(o.len())?;
    check_len(g.len())?;
    fn go<T: PartialEq>(a: &[T], b: &[T]) -> usize {
        match (a.split_first(), b.split_first()) {
            (Some((x, ra)), Some((y, rb))) => {
                if x == y {
                    1 + go(ra, rb)
                } else {
                    go(ra, b).max(go(a, rb))
                }
            }
            _ => 0,
        }
    }
    Ok(go(o, g))
}

pub fn brute_levenshtein<T: PartialEq>(o: &[T], g: &[T]) -> Result<usize, OracleError> {
    check_len(o.len())?;
    check_len(g.len())?;
    fn go<T: PartialEq>(a: &[T], b: &[T]) -> usize {
        match (a.split_first(), b.split_first()) {
            (None, _) => b.len(),
            (_, None) => a.len(),
            (Some((x, ra)), Some((y, rb))) => {
                let replace = go(ra, rb) + usize::from(x != y);
                let delete = go(ra, b) + 1;
                let insert = go(a, rb) + 1;
                replace.min(delete).min(insert)
            }
        }
    }
    Ok(go(o, g))
}

/// Monte-Carlo two-sided p-value of the Mann-Whitney U statistic under random
/// relabelling. Ties share the average of their ranks.
pub fn permutation_mwu(
    a: &[f64],
    b: &[f64],
    resamples: usize,
    budget: &OracleBudget,
) -> Result<f64, OracleError> {
    if resamples < 10_000 {
        return Err(OracleError::TooFewResamples(resamples));
    }
    if resamples as u64 > budget.max_space {
        return Err(OracleError::OverBudget {
            needed: resamples as u64,
            max_space: budget.max_space,
        });
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks: Vec<f64> = pooled
        .iter()
        .map(|&x| {
            let below = pooled.iter().filter(|&&y| y < x).count() as f64;
            let equal = pooled.iter().filter(|&&y| y == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect();
    let n1 = a.len();
    let centre = (n1 * b.len()) as f64 / 2.0;
    let u_of = |rank_sum: f64| rank_sum - (n1 * (n1 + 1)) as f64 / 2.0;
    let observed = (u_of(ranks[..n1].iter().sum()) - centre).abs();

    let mut rng = StdRng::seed_from_u64(budget.seed);
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    let mut extreme = 0usize;
    for _ in 0..resamples {
        for i in (1..order.len()).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let sum: f64 = order[..n1].iter().map(|&i| ranks[i]).sum();
        if (u_of(sum) - centre).abs() >= observed - 1e-9 {
            extreme += 1;
        }
    }
    Ok(extreme as f64 / resamples as f64)
}

/// Every sequence over `0..p` of exactly `len` symbols.
pub fn all_sequences(p: usize, len: usize) -> Vec<Vec<usize>> {
    let count = p.pow(len as u32);
    (0..count).map(|c| decode(c, p, len)).collect()
}

/// Every sequence over `0..p` of length at most `max_len`.
pub fn sequences_up_to(p: usize, max_len: usize) -> Vec<Vec<usize>> {
    (0..=max_len).flat_map(|l| all_sequences(p, l)).collect()
}
