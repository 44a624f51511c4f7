//! Guessing-order scores: how much of the brute-force search space an
//! observer's guess saves when candidates are enumerated in guess-first order.
//!
//! Candidates are grouped in tiers by how many guessed symbols were
//! substituted. Tier `j` of a guess with `m` known (non-wildcard) positions
//! holds `C(m, j) * (P - 1)^j` candidates; every trailing wildcard position
//! multiplies the work by `P`. The original's expected rank is the size of all
//! tiers below its own plus the midpoint of its tier. The score compares that
//! rank with the full space `P^n`: 0 means the guess found the password
//! immediately, 1 means it saved nothing.

use std::collections::HashMap;
use std::hash::Hash;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::metrics::MetricError;
use crate::scheme::{DecodeError, EntropyMode, PasswordSeq, Scheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Trusts the multiset of guessed symbols, not their positions.
    Pool,
    /// Trusts each guessed symbol at its guessed position.
    Position,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankVariant {
    /// `log2(rank) / log2(space)`.
    #[default]
    Log,
    /// `rank / space`.
    Linear,
}

impl std::str::FromStr for RankVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "log" => Ok(RankVariant::Log),
            "linear" => Ok(RankVariant::Linear),
            other => Err(format!(
                "unknown rank variant `{other}` (expected log or linear)"
            )),
        }
    }
}

impl std::fmt::Display for RankVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RankVariant::Log => "log",
            RankVariant::Linear => "linear",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GuessOrderError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

/// Tier structure of one (original, guess) pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankModel {
    pub strategy: Strategy,
    /// Original length `n`.
    pub length: usize,
    /// Unobserved trailing positions, `max(0, n - |g|)`.
    pub wildcards: usize,
    /// Observed positions, `n - wildcards`.
    pub known: usize,
    /// Tier that contains the original.
    pub target_tier: usize,
    pub pool: u64,
}

impl RankModel {
    pub fn new<T: Eq + Hash>(
        strategy: Strategy,
        original: &[T],
        guess: &[T],
        pool: u64,
    ) -> Result<Self, MetricError> {
        if original.is_empty() {
            return Err(MetricError::EmptyOriginal);
        }
        assert!(pool >= 2, "pool size must be at least 2");
        let length = original.len();
        let truncated = &guess[..guess.len().min(length)];
        let known = truncated.len();
        let wildcards = length - known;
        let target_tier = match strategy {
            Strategy::Pool => {
                let mut have: HashMap<&T, usize> = HashMap::new();
                for x in original {
                    *have.entry(x).or_insert(0) += 1;
                }
                let mut shared = 0;
                for x in truncated {
                    if let Some(n) = have.get_mut(x) {
                        if *n > 0 {
                            *n -= 1;
                            shared += 1;
                        }
                    }
                }
                known - shared
            }
            Strategy::Position => original
                .iter()
                .zip(truncated)
                .filter(|(a, b)| a != b)
                .count(),
        };
        let model = RankModel {
            strategy,
            length,
            wildcards,
            known,
            target_tier,
            pool,
        };
        debug_assert_eq!(
            model.tier_sizes().iter().sum::<BigUint>(),
            BigUint::from(pool).pow(known as u32)
        );
        Ok(model)
    }

    /// `C(known, j) * (P - 1)^j`.
    pub fn tier_size(&self, j: usize) -> BigUint {
        if j > self.known {
            return BigUint::zero();
        }
        binomial(self.known, j) * BigUint::from(self.pool - 1).pow(j as u32)
    }

    pub fn tier_sizes(&self) -> Vec<BigUint> {
        (0..=self.known).map(|j| self.tier_size(j)).collect()
    }

    /// Twice the expected rank, kept integral:
    /// `P^w * (2 * sum_{j < t} T(j) + T(t) + 1)`.
    pub fn doubled_rank(&self) -> BigUint {
        let below: BigUint = (0..self.target_tier).map(|j| self.tier_size(j)).sum();
        let inner = below * 2u32 + self.tier_size(self.target_tier) + 1u32;
        BigUint::from(self.pool).pow(self.wildcards as u32) * inner
    }

    /// `P^n`.
    pub fn search_space(&self) -> BigUint {
        BigUint::from(self.pool).pow(self.length as u32)
    }

    pub fn score(&self, variant: RankVariant) -> f64 {
        let doubled = self.doubled_rank();
        let space = self.search_space();
        let doubled_space = &space * 2u32;
        if doubled == doubled_space {
            return 1.0;
        }
        if doubled == BigUint::from(2u32) {
            return match variant {
                RankVariant::Log => 0.0,
                RankVariant::Linear => 1.0 / big_to_f64(&space),
            };
        }
        let log_rank = log2_half(&doubled);
        let log_space = log2_big(&space);
        let score = match variant {
            RankVariant::Log => log_rank / log_space,
            RankVariant::Linear => (log_rank - log_space).exp2(),
        };
        score.clamp(0.0, 1.0)
    }
}

/// Exact binomial coefficient.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

pub fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        big_to_f64(x).log2()
    } else {
        let shift = bits - 64;
        big_to_f64(&(x >> shift)).log2() + shift as f64
    }
}

fn big_to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// `log2(x / 2)` without losing the halving to rounding when `x` is even.
fn log2_half(x: &BigUint) -> f64 {
    if !x.bit(0) {
        log2_big(&(x >> 1u32))
    } else {
        log2_big(x) - 1.0
    }
}

fn checked(scheme: &Scheme, o: &PasswordSeq, g: &PasswordSeq) -> Result<(), GuessOrderError> {
    scheme.check_seq(o)?;
    scheme.check_seq(g)?;
    Ok(())
}

pub fn pool_guess_score(
    o: &PasswordSeq,
    g: &PasswordSeq,
    scheme: &Scheme,
    variant: RankVariant,
) -> Result<f64, GuessOrderError> {
    checked(scheme, o, g)?;
    let model = RankModel::new(Strategy::Pool, &o.symbols, &g.symbols, scheme.pool_size)?;
    Ok(model.score(variant))
}

pub fn position_guess_score(
    o: &PasswordSeq,
    g: &PasswordSeq,
    scheme: &Scheme,
    variant: RankVariant,
) -> Result<f64, GuessOrderError> {
    checked(scheme, o, g)?;
    let model = RankModel::new(Strategy::Position, &o.symbols, &g.symbols, scheme.pool_size)?;
    Ok(model.score(variant))
}

/// Relative entropy difference between original and guess, clamped to `[0, 1]`.
///
/// The original is credited with the full pool. The guess loses the
/// categories that the original uses and the guess leaves out, so a guess
/// identical to the original always scores 0.
pub fn entropy_drop_score(
    o: &PasswordSeq,
    g: &PasswordSeq,
    scheme: &Scheme,
) -> Result<f64, GuessOrderError> {
    checked(scheme, o, g)?;
    if o.is_empty() {
        return Err(MetricError::EmptyOriginal.into());
    }
    let pool_o = scheme.entropy_pool(o, EntropyMode::Original);
    let pool_g = scheme.guess_pool_against(o, g);
    let drop = if g.is_empty() {
        1.0
    } else if pool_o == pool_g {
        // log terms cancel; keep the ratio exact
        o.len().abs_diff(g.len()) as f64 / o.len() as f64
    } else {
        let e_o = scheme.entropy_bits(o, EntropyMode::Original);
        let e_g = g.len() as f64 * (pool_g as f64).log2();
        (e_o - e_g).abs() / e_o
    };
    Ok(drop.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn score(strategy: Strategy, o: &str, g: &str, pool: u64) -> f64 {
        let o: Vec<char> = o.chars().collect();
        let g: Vec<char> = g.chars().collect();
        RankModel::new(strategy, &o, &g, pool)
            .unwrap()
            .score(RankVariant::Log)
    }

    #[test]
    fn pool_examples() {
        assert_eq!(score(Strategy::Pool, "ab", "ba", 3), 0.0);
        let cc = score(Strategy::Pool, "ab", "cc", 3);
        assert!((cc - 7.5f64.log2() / 9f64.log2()).abs() < 1e-12);
        assert!((cc - 0.9170).abs() < 5e-5);
        let a = score(Strategy::Pool, "ab", "a", 3);
        assert!((a - 0.5).abs() < 1e-12, "{a}");
    }

    #[test]
    fn position_examples() {
        assert_eq!(score(Strategy::Position, "ab", "ab", 3), 0.0);
        let ba = score(Strategy::Position, "ab", "ba", 3);
        assert!((ba - 0.9170).abs() < 5e-5);
        // tier 1 holds C(2,1) * 2 = 4 candidates, so R = 1 + (4 + 1) / 2
        let ac = score(Strategy::Position, "ab", "ac", 3);
        assert!((ac - 3.5f64.log2() / 9f64.log2()).abs() < 1e-12);
        assert!((ac - 0.5702).abs() < 5e-5);
    }

    #[test]
    fn doubled_rank_values() {
        let o: Vec<u8> = b"ab".to_vec();
        let m = RankModel::new(Strategy::Pool, &o, b"cc", 3).unwrap();
        assert_eq!(m.target_tier, 2);
        assert_eq!(m.doubled_rank(), BigUint::from(15u32));
        let m = RankModel::new(Strategy::Pool, &o, b"a", 3).unwrap();
        assert_eq!((m.wildcards, m.known, m.target_tier), (1, 1, 0));
        assert_eq!(m.doubled_rank(), BigUint::from(6u32));
    }

    #[test]
    fn empty_and_long_guesses() {
        assert_eq!(score(Strategy::Pool, "abc", "", 5), 1.0);
        assert_eq!(score(Strategy::Position, "abc", "", 5), 1.0);
        let lin = RankModel::new(Strategy::Pool, b"abc", b"", 5)
            .unwrap()
            .score(RankVariant::Linear);
        assert_eq!(lin, 1.0);
        // tail beyond the original length is ignored
        assert_eq!(score(Strategy::Position, "ab", "abzz", 3), 0.0);
        assert!(RankModel::new::<u8>(Strategy::Pool, b"", b"a", 3).is_err());
    }

    #[test]
    fn linear_variant() {
        let m = RankModel::new(Strategy::Pool, b"ab", b"cc", 3).unwrap();
        assert!((m.score(RankVariant::Linear) - 7.5 / 9.0).abs() < 1e-12);
        let m = RankModel::new(Strategy::Pool, b"ab", b"ab", 3).unwrap();
        assert!((m.score(RankVariant::Linear) - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), BigUint::from(10u32));
        assert_eq!(binomial(21, 10), BigUint::from(352_716u32));
        assert_eq!(binomial(3, 4), BigUint::zero());
        assert_eq!(binomial(0, 0), BigUint::one());
    }

    #[test]
    fn capacity_beyond_u64() {
        let o = vec![0u32; 11];
        let g = vec![1u32; 11];
        let m = RankModel::new(Strategy::Position, &o, &g, 95).unwrap();
        assert!(m.search_space() > BigUint::from(10u32).pow(21));
        let s = m.score(RankVariant::Log);
        assert!(s > 0.98 && s < 1.0, "{s}");
    }

    #[test]
    fn entropy_drop_examples() {
        let t = Scheme::preset("textual").unwrap();
        let o = t.decode("Tr0ub4dor&3").unwrap();
        let g = t.decode("password").unwrap();
        let d = entropy_drop_score(&o, &g, &t).unwrap();
        assert!((d - 0.4797).abs() < 5e-5, "{d}");
        assert_eq!(entropy_drop_score(&o, &o, &t).unwrap(), 0.0);
        let short = t.decode("Ab1").unwrap();
        assert_eq!(entropy_drop_score(&short, &short, &t).unwrap(), 0.0);

        let c = Scheme::preset("gcps").unwrap();
        let o = c
            .decode("W:N:f3 B:P:a1 W:K:e1 B:Q:d8 W:R:h1 B:B:c8 W:P:e4")
            .unwrap();
        let g = c.decode("W:N:f3 B:P:a1 W:K:e1 B:Q:d8 W:R:h1").unwrap();
        let d = entropy_drop_score(&o, &g, &c).unwrap();
        assert_eq!(d, 2.0 / 7.0);
        assert_eq!(
            d,
            crate::metrics::length_dif(&o.symbols, &g.symbols).unwrap()
        );
    }

    #[test]
    fn mismatched_scheme_is_rejected() {
        let t = Scheme::preset("textual").unwrap();
        let c = Scheme::preset("gcps").unwrap();
        let o = c.decode("W:N:f3").unwrap();
        assert!(pool_guess_score(&o, &o, &t, RankVariant::Log).is_err());
    }
}
