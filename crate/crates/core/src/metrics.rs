//! Password characteristics and distance metrics over component sequences.
//!
//! Every function compares an original `o` against a guess `g` and returns a
//! score in `[0, 1]`. The original must be non-empty; the guess may be empty.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum MetricError {
    #[error("original password is empty")]
    EmptyOriginal,
}

/// Identifier of one of the fourteen individual metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MetricId {
    L1,
    C1,
    C2,
    C3,
    C4,
    C5,
    D1,
    D2,
    D3,
    D4,
    D5,
    G1,
    G2,
    G3,
}

impl MetricId {
    pub const ALL: [MetricId; 14] = [
        MetricId::L1,
        MetricId::C1,
        MetricId::C2,
        MetricId::C3,
        MetricId::C4,
        MetricId::C5,
        MetricId::D1,
        MetricId::D2,
        MetricId::D3,
        MetricId::D4,
        MetricId::D5,
        MetricId::G1,
        MetricId::G2,
        MetricId::G3,
    ];

    pub const CHARACTERISTICS: [MetricId; 5] = [
        MetricId::C1,
        MetricId::C2,
        MetricId::C3,
        MetricId::C4,
        MetricId::C5,
    ];

    pub const DISTANCE: [MetricId; 5] = [
        MetricId::D1,
        MetricId::D2,
        MetricId::D3,
        MetricId::D4,
        MetricId::D5,
    ];

    pub const GUESSING: [MetricId; 3] = [MetricId::G1, MetricId::G2, MetricId::G3];

    /// Higher values mean more dissimilar (more resistant).
    pub fn complementary(self) -> bool {
        matches!(
            self,
            MetricId::L1 | MetricId::C5 | MetricId::G1 | MetricId::G2 | MetricId::G3
        )
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn code(self) -> &'static str {
        match self {
            MetricId::L1 => "L1",
            MetricId::C1 => "C1",
            MetricId::C2 => "C2",
            MetricId::C3 => "C3",
            MetricId::C4 => "C4",
            MetricId::C5 => "C5",
            MetricId::D1 => "D1",
            MetricId::D2 => "D2",
            MetricId::D3 => "D3",
            MetricId::D4 => "D4",
            MetricId::D5 => "D5",
            MetricId::G1 => "G1",
            MetricId::G2 => "G2",
            MetricId::G3 => "G3",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricId::L1 => "Length Dif",
            MetricId::C1 => "Same Chars",
            MetricId::C2 => "Correct First",
            MetricId::C3 => "Right Spot",
            MetricId::C4 => "LCS",
            MetricId::C5 => "Dif in Guess",
            MetricId::D1 => "Jaccard",
            MetricId::D2 => "Jaro-Winkler",
            MetricId::D3 => "Cosine",
            MetricId::D4 => "Levenshtein",
            MetricId::D5 => "N-grams",
            MetricId::G1 => "Pool Guess",
            MetricId::G2 => "Position Guess",
            MetricId::G3 => "Entropy",
        }
    }

    /// True for the metrics that can be computed per match group.
    pub fn group_adjustable(self) -> bool {
        Self::CHARACTERISTICS.contains(&self) || Self::DISTANCE.contains(&self)
    }

    /// Evaluates a characteristics or distance metric on plain sequences.
    /// Guessing-order metrics need a scheme and are not handled here.
    pub fn evaluate<T: Eq + Hash>(self, o: &[T], g: &[T]) -> Option<Result<f64, MetricError>> {
        Some(match self {
            MetricId::L1 => length_dif(o, g),
            MetricId::C1 => same_chars(o, g),
            MetricId::C2 => correct_first(o, g),
            MetricId::C3 => right_spot(o, g),
            MetricId::C4 => lcs_ratio(o, g),
            MetricId::C5 => Ok(dif_in_guess(o, g)),
            MetricId::D1 => jaccard(o, g),
            MetricId::D2 => jaro_winkler(o, g),
            MetricId::D3 => cosine(o, g),
            MetricId::D4 => levenshtein_sim(o, g),
            MetricId::D5 => ngram_dice(o, g, 2),
            MetricId::G1 | MetricId::G2 | MetricId::G3 => return None,
        })
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricScore {
    pub metric_id: MetricId,
    pub value: f64,
    pub complementary: bool,
}

impl MetricScore {
    pub fn new(metric_id: MetricId, value: f64) -> Self {
        Self {
            metric_id,
            value,
            complementary: metric_id.complementary(),
        }
    }
}

fn require_original<T>(o: &[T]) -> Result<(), MetricError> {
    if o.is_empty() {
        Err(MetricError::EmptyOriginal)
    } else {
        Ok(())
    }
}

fn counts<T: Eq + Hash>(xs: &[T]) -> HashMap<&T, usize> {
    let mut m = HashMap::with_capacity(xs.len());
    for x in xs {
        *m.entry(x).or_insert(0) += 1;
    }
    m
}

fn multiset_intersection<K: Eq + Hash>(a: &HashMap<K, usize>, b: &HashMap<K, usize>) -> usize {
    a.iter()
        .map(|(k, &n)| n.min(b.get(k).copied().unwrap_or(0)))
        .sum()
}

/// Share of the original's symbols (with multiplicity) present in the guess.
pub fn same_chars<T: Eq + Hash>(o: &[T], g: &[T]) -> Result<f64, MetricError> {
    require_original(o)?;
    let shared = multiset_intersection(&counts(o), &counts(g));
    Ok(shared as f64 / o.len() as f64)
}

/// Length of the common prefix over `|o|`.
pub fn correct_first<T: Eq>(o: &[T], g: &[T]) -> Result<f64, MetricError> {
    require_original(o)?;
    let prefix = o.iter().zip(g).take_while(|(a, b)| a == b).count();
    Ok(prefix as f64 / o.len() as f64)
}

/// Positions where both sequences hold the same symbol, over `|o|`.
pub fn right_spot<T: Eq>(o: &[T], g: &[T]) -> Result<f64, MetricError> {
    require_original(o)?;
    let hits = o.iter().zip(g).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / o.len() as f64)
}

pub fn lcs_len<T: Eq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn lcs_ratio<T: Eq>(o: &[T], g: &[T]) -> Result<f64, MetricError> {
    require_original(o)?;
    Ok(lcs_len(o, g) as f64 / o.len() as f64)
}

/// Share of the guess's symbols that the original does not account for.
/// An empty guess scores 1.
pub fn dif_in_guess<T: Eq + Hash>(o: &[T], g: &[T]) -> f64 {
    if g.is_empty() {
        return 1.0;
    }
    let shared = multiset_intersection(&counts(g), &counts(o));
    (g.len() - shared) as f64 / g.len() as f64
}

/// `| |g| - |o| | / |o|`, clamped to 1.
pub fn length_dif<T>(o: &[T], g: &[T]) -> Result<f64, MetricError> {
    require_original(o)?;
    let diff = o.len().abs_diff(g.len());
    Ok((diff as f64 / o.len() as f64).min(1.0))
}

/// Intersection over union of the distinct symbols.
pub fn jaccard<T: Eq + Hash>(o: &[T], g: &[T]) -> Result<f64, MetricError> {
    require_original(o)?;
    if g.is_empty() {
        return Ok(0.0);
    }
    let a: std::collections::HashSet<&T> = o.iter().collect();
    let b: std::collections::HashSet<&T> = g.iter().collect();
    let inter = a.intersection(&b).count();
    let union = a.len() + b.len() - inter;
    Ok(inter as f64 / union as f64)
}

pub fn jaro<T: Eq>(o: &[T], g: &[T]) -> f64 {
    if o.is_empty() || g.is_empty() {
        return 0.0;
    }
    let window = (o.len().max(g.len()) / 2).saturating_sub(1);
    let mut o_matched = vec![false; o.len()];
    let mut g_matched = vec![false; g.len()];
    let mut matches = 0usize;
    for (i, x) in o.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(g.len());
        for j in lo..hi {
            if !g_matched[j] && g[j] == *x {
                o_matched[i] = true;
                g_matched[j] = true;
                matches += 1;
                break;
            }
        }
    }
    if matches == 0 {
        return 0.0;
    }
    let o_seq = o.iter().zip(&o_matched).filter(|(_, &m)| m).map(|(x, _)| x);
    let g_seq = g.iter().zip(&g_matched).filter(|(_, &m)| m).map(|(x, _)| x);
    let half_transpositions = o_seq.zip(g_seq).filter(|(a, b)| a != b).count();
    let m = matches as f64;
    let t = half_transpositions as f64 / 2.0;
    (m / o.len() as f64 + m / g.len() as f64 + (m - t) / m) / 3.0
}

pub const WINKLER_SCALING: f64 = 0.1;
pub const WINKLER_PREFIX_CAP: usize = 4;

/// Jaro similarity with Winkler's common-prefix boost.
pub fn jaro_winkler<T: Eq>(o: &[T], g: &[T]) -> Result<f64, MetricError> {
    require_original(o)?;
    let j = jaro(o, g);
    let prefix = o
        .iter()
        .zip(g)
        .take(WINKLER_PREFIX_CAP)
        .take_while(|(a, b)| a == b)
        .count();
    Ok((j + prefix as f64 * WINKLER_SCALING * (1.0 - j)).min(1.0))
}

/// Cosine similarity of the symbol count vectors.
pub fn cosine<T: Eq + Hash>(o: &[T], g: &[T]) -> Result<f64, MetricError> {
    require_original(o)?;
    if g.is_empty() {
        return Ok(0.0);
    }
    let a = counts(o);
    let b = counts(g);
    let dot: usize = a
        .iter()
        .map(|(k, &n)| n * b.get(k).copied().unwrap_or(0))
        .sum();
    if dot == 0 {
        return Ok(0.0);
    }
    let sq = |m: &HashMap<&T, usize>| m.values().map(|&n| n * n).sum::<usize>();
    // one square root of the integer product keeps parallel vectors at exactly 1
    let denom = ((sq(&a) as f64) * (sq(&b) as f64)).sqrt();
    Ok((dot as f64 / denom).min(1.0))
}

pub fn levenshtein<T: Eq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, x) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let subst = diag + usize::from(x != y);
            diag = row[j + 1];
            row[j + 1] = subst.min(row[j] + 1).min(diag + 1);
        }
    }
    row[b.len()]
}

/// `1 - edit_distance / max(|o|, |g|)`.
pub fn levenshtein_sim<T: Eq>(o: &[T], g: &[T]) -> Result<f64, MetricError> {
    require_original(o)?;
    let longest = o.len().max(g.len());
    Ok(1.0 - levenshtein(o, g) as f64 / longest as f64)
}

fn ngram_counts<T: Eq + Hash>(xs: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut m = HashMap::new();
    for w in xs.windows(n) {
        *m.entry(w).or_insert(0) += 1;
    }
    m
}

/// Dice coefficient over the multisets of contiguous `n`-grams.
pub fn ngram_dice<T: Eq + Hash>(o: &[T], g: &[T], n: usize) -> Result<f64, MetricError> {
    require_original(o)?;
    assert!(n >= 1, "n-gram length must be positive");
    if o.len() < n || g.len() < n {
        return Ok(0.0);
    }
    let a = ngram_counts(o, n);
    let b = ngram_counts(g, n);
    let shared = multiset_intersection(&a, &b);
    let total = (o.len() + 1 - n) + (g.len() + 1 - n);
    Ok(2.0 * shared as f64 / total as f64)
}
