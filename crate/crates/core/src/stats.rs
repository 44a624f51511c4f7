//! Nonparametric comparison of score distributions: Kruskal-Wallis H,
//! Mann-Whitney U with Bonferroni adjustment and rank-biserial style effect
//! sizes `r = |z| / sqrt(N)`, plus descriptive summaries for tables and box
//! plots.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("Kruskal-Wallis needs at least 3 groups, got {0}")]
    TooFewGroups(usize),
    #[error("group {group} has {n} values, at least {min} required")]
    GroupTooSmall { group: usize, n: usize, min: usize },
    #[error("empty sample")]
    EmptySample,
    #[error("non-finite value {0} in sample")]
    NonFinite(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    KruskalWallis,
    MannWhitney,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PMethod {
    NormalApprox,
    Exact,
    ChiSquare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EffectLabel {
    Negligible,
    Small,
    Medium,
    Large,
}

impl std::fmt::Display for EffectLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EffectLabel::Negligible => "negligible",
            EffectLabel::Small => "small",
            EffectLabel::Medium => "medium",
            EffectLabel::Large => "large",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MwuMode {
    /// Exact when the smaller sample has at most 8 values and there are no ties.
    Auto,
    Exact,
    Normal,
}

/// Samples this small (and tie-free) get an exact Mann-Whitney p-value.
pub const EXACT_MAX_SMALLER_SAMPLE: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub test: TestKind,
    /// H for Kruskal-Wallis, `min(U_a, U_b)` for Mann-Whitney.
    pub statistic: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub df: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    pub p_raw: f64,
    pub p_adjusted: f64,
    /// Number of comparisons in the Bonferroni family.
    pub m: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effect_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effect_label: Option<EffectLabel>,
    pub method: PMethod,
    /// Total number of observations.
    pub n: usize,
}

impl TestResult {
    /// Re-adjusts `p_adjusted` for a family of `m` comparisons.
    pub fn with_family(mut self, m: usize) -> Self {
        self.m = m;
        self.p_adjusted = bonferroni(self.p_raw, m);
        self
    }

    pub fn significant(&self, alpha: f64) -> bool {
        self.p_adjusted < alpha
    }
}

pub fn bonferroni(p: f64, m: usize) -> f64 {
    (p * m as f64).min(1.0)
}

/// `r = |z| / sqrt(N)` with Cohen's bands 0.1 / 0.3 / 0.5. Boundaries belong
/// to the higher band.
pub fn effect_size(z: f64, n: usize) -> (f64, EffectLabel) {
    assert!(n >= 1, "effect size needs at least one observation");
    let r = z.abs() / (n as f64).sqrt();
    let label = if r < 0.1 {
        EffectLabel::Negligible
    } else if r < 0.3 {
        EffectLabel::Small
    } else if r < 0.5 {
        EffectLabel::Medium
    } else {
        EffectLabel::Large
    };
    (r, label)
}

fn check_finite(xs: &[f64]) -> Result<(), StatsError> {
    match xs.iter().find(|x| !x.is_finite()) {
        Some(&x) => Err(StatsError::NonFinite(x)),
        None => Ok(()),
    }
}

/// Average ranks (1-based) of `values` and the tie term `sum(t^3 - t)`.
pub fn rank_with_ties(values: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = avg;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    (ranks, tie_term)
}

/// Tie-corrected H statistic for any number of non-empty groups. Returns
/// `(H, df)`; H is 0 when every value is identical.
pub fn kruskal_wallis_h(groups: &[Vec<f64>]) -> Result<(f64, usize), StatsError> {
    if groups.iter().any(|g| g.is_empty()) {
        return Err(StatsError::EmptySample);
    }
    let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
    check_finite(&pooled)?;
    let n = pooled.len() as f64;
    let (ranks, tie_term) = rank_with_ties(&pooled);
    let mut offset = 0;
    let mut sum = 0.0;
    for g in groups {
        let r: f64 = ranks[offset..offset + g.len()].iter().sum();
        sum += r * r / g.len() as f64;
        offset += g.len();
    }
    let h = 12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0);
    let correction = 1.0 - tie_term / (n * n * n - n);
    let df = groups.len().saturating_sub(1);
    if correction <= 0.0 {
        return Ok((0.0, df));
    }
    Ok(((h / correction).max(0.0), df))
}

/// Upper tail of the chi-square distribution.
pub fn chi_square_sf(x: f64, df: usize) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let dist = ChiSquared::new(df as f64).expect("positive degrees of freedom");
    dist.sf(x).clamp(0.0, 1.0)
}

/// Two-sided standard normal tail `P(|Z| >= |z|)`.
pub fn normal_two_sided(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0)
}

pub fn kruskal_wallis(groups: &[Vec<f64>]) -> Result<TestResult, StatsError> {
    if groups.len() < 3 {
        return Err(StatsError::TooFewGroups(groups.len()));
    }
    if let Some((i, g)) = groups.iter().enumerate().find(|(_, g)| g.len() < 2) {
        return Err(StatsError::GroupTooSmall {
            group: i,
            n: g.len(),
            min: 2,
        });
    }
    let (h, df) = kruskal_wallis_h(groups)?;
    let p = if h == 0.0 { 1.0 } else { chi_square_sf(h, df) };
    Ok(TestResult {
        test: TestKind::KruskalWallis,
        statistic: h,
        df: Some(df),
        z: None,
        p_raw: p,
        p_adjusted: p,
        m: 1,
        effect_r: None,
        effect_label: None,
        method: PMethod::ChiSquare,
        n: groups.iter().map(Vec::len).sum(),
    })
}

struct UStats {
    u_a: f64,
    n_a: usize,
    n_b: usize,
    tie_term: f64,
}

fn u_statistics(a: &[f64], b: &[f64]) -> Result<UStats, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    check_finite(a)?;
    check_finite(b)?;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, tie_term) = rank_with_ties(&pooled);
    let r_a: f64 = ranks[..a.len()].iter().sum();
    let n_a = a.len();
    Ok(UStats {
        u_a: r_a - (n_a * (n_a + 1)) as f64 / 2.0,
        n_a,
        n_b: b.len(),
        tie_term,
    })
}

/// Normal-approximation z of `U_a` with tie-corrected variance, optionally
/// with a 0.5 continuity correction toward the mean. Zero when the variance
/// vanishes.
pub fn mann_whitney_z(a: &[f64], b: &[f64], continuity: bool) -> Result<f64, StatsError> {
    let u = u_statistics(a, b)?;
    Ok(z_from(&u, continuity))
}

fn z_from(u: &UStats, continuity: bool) -> f64 {
    let (n1, n2) = (u.n_a as f64, u.n_b as f64);
    let n = n1 + n2;
    let mean = n1 * n2 / 2.0;
    let variance = n1 * n2 / 12.0 * ((n + 1.0) - u.tie_term / (n * (n - 1.0)));
    if variance.is_nan() || variance <= 0.0 {
        return 0.0;
    }
    let diff = u.u_a - mean;
    let magnitude = if continuity {
        (diff.abs() - 0.5).max(0.0)
    } else {
        diff.abs()
    };
    diff.signum() * magnitude / variance.sqrt()
}

/// Number of `k`-subsets of ranks `1..=n` for every rank sum, indexed by sum.
fn rank_sum_counts(n: usize, k: usize) -> Vec<u128> {
    let max_sum = k * (2 * n - k + 1) / 2;
    // dp[j][s]: subsets of size j with sum s over the ranks seen so far
    let mut dp = vec![vec![0u128; max_sum + 1]; k + 1];
    dp[0][0] = 1;
    for rank in 1..=n {
        for j in (1..=k.min(rank)).rev() {
            let (lower, upper) = dp.split_at_mut(j);
            let prev = &lower[j - 1];
            let cur = &mut upper[0];
            for s in (rank..=max_sum).rev() {
                cur[s] += prev[s - rank];
            }
        }
    }
    dp.swap_remove(k)
}

/// Exact two-sided p of `min(U_a, U_b)` for tie-free samples.
fn exact_p(u: &UStats) -> f64 {
    let (small, large) = if u.n_a <= u.n_b {
        (u.n_a, u.n_b)
    } else {
        (u.n_b, u.n_a)
    };
    let counts = rank_sum_counts(small + large, small);
    let total: u128 = counts.iter().sum();
    let u_min = u.u_a.min((u.n_a * u.n_b) as f64 - u.u_a);
    let offset = small * (small + 1) / 2;
    let limit = offset + u_min.round() as usize;
    let tail: u128 = counts[..=limit.min(counts.len() - 1)].iter().sum();
    (2.0 * tail as f64 / total as f64).min(1.0)
}

pub fn mann_whitney(a: &[f64], b: &[f64], mode: MwuMode) -> Result<TestResult, StatsError> {
    let u = u_statistics(a, b)?;
    let n = u.n_a + u.n_b;
    let u_min = u.u_a.min((u.n_a * u.n_b) as f64 - u.u_a);
    let z = z_from(&u, true);
    let exact_ok = u.tie_term == 0.0;
    let use_exact = match mode {
        MwuMode::Auto => exact_ok && u.n_a.min(u.n_b) <= EXACT_MAX_SMALLER_SAMPLE,
        MwuMode::Exact => exact_ok,
        MwuMode::Normal => false,
    };
    let (p, method) = if use_exact {
        (exact_p(&u), PMethod::Exact)
    } else {
        (normal_two_sided(z), PMethod::NormalApprox)
    };
    let (r, label) = effect_size(z, n);
    Ok(TestResult {
        test: TestKind::MannWhitney,
        statistic: u_min,
        df: None,
        z: Some(z),
        p_raw: p,
        p_adjusted: p,
        m: 1,
        effect_r: Some(r),
        effect_label: Some(label),
        method,
        n,
    })
}

/// Monte-Carlo two-sided p of the U statistic from `resamples` random
/// relabellings.
pub fn permutation_p(a: &[f64], b: &[f64], resamples: usize, seed: u64) -> Result<f64, StatsError> {
    let u = u_statistics(a, b)?;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, _) = rank_with_ties(&pooled);
    let mean = (u.n_a * u.n_b) as f64 / 2.0;
    let observed = (u.u_a - mean).abs();
    let offset = (u.n_a * (u.n_a + 1)) as f64 / 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shuffled = ranks;
    let mut extreme = 0usize;
    for _ in 0..resamples {
        shuffled.shuffle(&mut rng);
        let r: f64 = shuffled[..u.n_a].iter().sum();
        if ((r - offset) - mean).abs() >= observed - 1e-9 {
            extreme += 1;
        }
    }
    Ok(extreme as f64 / resamples as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescriptiveStats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation, `n - 1` denominator; 0 for a single value.
    pub sd: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
}

/// Type-7 (linear interpolation) quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn describe(values: &[f64]) -> Result<DescriptiveStats, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptySample);
    }
    check_finite(values)?;
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(DescriptiveStats {
        n,
        mean,
        sd,
        median: quantile_sorted(&sorted, 0.5),
        q1: quantile_sorted(&sorted, 0.25),
        q3: quantile_sorted(&sorted, 0.75),
        min: sorted[0],
        max: sorted[n - 1],
    })
}

/// Box-plot data: quartiles, Tukey whiskers (1.5 IQR) and the points beyond them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxSummary {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub lower_whisker: f64,
    pub upper_whisker: f64,
    pub outliers: Vec<f64>,
}

pub fn box_summary(values: &[f64]) -> Result<BoxSummary, StatsError> {
    let d = describe(values)?;
    let iqr = d.q3 - d.q1;
    let (lo_fence, hi_fence) = (d.q1 - 1.5 * iqr, d.q3 + 1.5 * iqr);
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let inside: Vec<f64> = sorted
        .iter()
        .copied()
        .filter(|&x| x >= lo_fence && x <= hi_fence)
        .collect();
    let outliers = sorted
        .iter()
        .copied()
        .filter(|&x| x < lo_fence || x > hi_fence)
        .collect();
    Ok(BoxSummary {
        n: d.n,
        min: d.min,
        q1: d.q1,
        median: d.median,
        q3: d.q3,
        max: d.max,
        lower_whisker: inside.first().copied().unwrap_or(d.min),
        upper_whisker: inside.last().copied().unwrap_or(d.max),
        outliers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kw_textbook() {
        let groups = vec![
            vec![1.0, 2.0, 3.0],
            vec![4.0, 5.0, 6.0],
            vec![7.0, 8.0, 9.0],
        ];
        let r = kruskal_wallis(&groups).unwrap();
        assert!((r.statistic - 7.2).abs() < 1e-12);
        assert_eq!(r.df, Some(2));
        assert!((r.p_raw - (-3.6f64).exp()).abs() < 1e-12);
        assert!((r.p_raw - 0.0273).abs() < 5e-5);
    }

    #[test]
    fn kw_degenerate_and_errors() {
        let same = vec![vec![0.5, 0.5], vec![0.5, 0.5], vec![0.5, 0.5]];
        let r = kruskal_wallis(&same).unwrap();
        assert_eq!((r.statistic, r.p_raw), (0.0, 1.0));
        let identical = vec![vec![1.0, 2.0, 3.0]; 3];
        let r = kruskal_wallis(&identical).unwrap();
        assert!(r.statistic.abs() < 1e-12 && (r.p_raw - 1.0).abs() < 1e-12);
        assert_eq!(
            kruskal_wallis(&[vec![1.0, 2.0], vec![3.0, 4.0]]),
            Err(StatsError::TooFewGroups(2))
        );
        assert!(matches!(
            kruskal_wallis(&[vec![1.0, 2.0], vec![3.0], vec![4.0, 5.0]]),
            Err(StatsError::GroupTooSmall { group: 1, .. })
        ));
    }

    #[test]
    fn kw_tie_correction() {
        let groups = vec![vec![1.0, 1.0], vec![2.0, 3.0], vec![3.0, 4.0]];
        let (h, _) = kruskal_wallis_h(&groups).unwrap();
        // ranks: 1.5 1.5 | 3 4.5 | 4.5 6 ; sums 3, 7.5, 10.5
        let raw = 12.0 / 42.0 * (9.0 / 2.0 + 56.25 / 2.0 + 110.25 / 2.0) - 21.0;
        let corrected = raw / (1.0 - 12.0 / 210.0);
        assert!((h - corrected).abs() < 1e-12, "{h} vs {corrected}");
    }

    #[test]
    fn mwu_exact_small() {
        let r = mann_whitney(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], MwuMode::Auto).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.method, PMethod::Exact);
        assert!((r.p_raw - 0.1).abs() < 1e-15);
        let r = mann_whitney(&[4.0, 5.0, 6.0], &[1.0, 2.0, 3.0], MwuMode::Auto).unwrap();
        assert!((r.p_raw - 0.1).abs() < 1e-15);
    }

    #[test]
    fn mwu_exact_matches_enumeration() {
        // U over all C(7,3) splits of 1..7; count how many have U <= 2
        let a = [1.0, 3.0, 4.0];
        let b = [2.0, 5.0, 6.0, 7.0];
        let r = mann_whitney(&a, &b, MwuMode::Exact).unwrap();
        let mut extreme = 0;
        let mut total = 0;
        for i in 1..=7 {
            for j in i + 1..=7 {
                for k in j + 1..=7 {
                    total += 1;
                    let u = (i + j + k - 6) as f64;
                    if u.min(12.0 - u) <= r.statistic {
                        extreme += 1;
                    }
                }
            }
        }
        assert_eq!(total, 35);
        assert!((r.p_raw - extreme as f64 / 35.0).abs() < 1e-12);
    }

    #[test]
    fn mwu_identical_samples() {
        let a = [0.1, 0.4, 0.2, 0.9, 0.5, 0.3, 0.7, 0.8, 0.6, 0.05];
        let r = mann_whitney(&a, &a, MwuMode::Auto).unwrap();
        assert_eq!(r.method, PMethod::NormalApprox);
        assert!(r.z.unwrap().abs() < 1e-12);
        assert!((r.p_raw - 1.0).abs() < 1e-12);
        assert_eq!(r.effect_label, Some(EffectLabel::Negligible));
    }

    #[test]
    fn mwu_all_tied_is_uninformative() {
        let r = mann_whitney(&[1.0; 12], &[1.0; 12], MwuMode::Auto).unwrap();
        assert_eq!(r.p_raw, 1.0);
        assert_eq!(r.z, Some(0.0));
    }

    #[test]
    fn mwu_empty() {
        assert_eq!(
            mann_whitney(&[], &[1.0], MwuMode::Auto),
            Err(StatsError::EmptySample)
        );
    }

    #[test]
    fn bonferroni_examples() {
        assert!((bonferroni(0.02, 6) - 0.12).abs() < 1e-15);
        assert_eq!(bonferroni(0.5, 4), 1.0);
        assert_eq!(bonferroni(0.0, 9), 0.0);
        assert_eq!(bonferroni(1.0, 1), 1.0);
    }

    #[test]
    fn effect_examples() {
        assert_eq!(effect_size(3.0, 100), (0.3, EffectLabel::Medium));
        assert_eq!(effect_size(0.0, 10), (0.0, EffectLabel::Negligible));
        assert_eq!(effect_size(-5.0, 100), (0.5, EffectLabel::Large));
        assert_eq!(effect_size(1.0, 100).1, EffectLabel::Small);
    }

    #[test]
    fn describe_examples() {
        let d = describe(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!((d.mean, d.median), (2.5, 2.5));
        assert!((d.sd - 1.2910).abs() < 5e-5);
        assert_eq!((d.q1, d.q3), (1.75, 3.25));
        let d = describe(&[5.0]).unwrap();
        assert_eq!((d.mean, d.median, d.sd), (5.0, 5.0, 0.0));
        assert_eq!(describe(&[]), Err(StatsError::EmptySample));
    }

    #[test]
    fn box_summary_flags_outliers() {
        let b = box_summary(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
        assert_eq!(b.outliers, vec![100.0]);
        assert_eq!(b.upper_whisker, 4.0);
        assert_eq!(b.lower_whisker, 1.0);
    }

    #[test]
    fn chi_square_closed_forms() {
        for &x in &[0.1, 1.0, 3.7, 7.2, 12.5, 30.0, 50.0] {
            assert!(
                (chi_square_sf(x, 2) - (-x / 2.0).exp()).abs() < 1e-12,
                "df2 {x}"
            );
            let df4 = (1.0 + x / 2.0) * (-x / 2.0).exp();
            assert!((chi_square_sf(x, 4) - df4).abs() < 1e-10, "df4 {x}");
            let df1 = erfc((x / 2.0).sqrt());
            assert!((chi_square_sf(x, 1) - df1).abs() < 1e-10, "df1 {x}");
        }
    }

    #[test]
    fn permutation_reproducible() {
        let a = [1.0, 2.0, 3.0];
        let b = [4.0, 5.0, 6.0];
        let p1 = permutation_p(&a, &b, 20_000, 7).unwrap();
        let p2 = permutation_p(&a, &b, 20_000, 7).unwrap();
        assert_eq!(p1, p2);
        assert!((p1 - 0.1).abs() < 0.02, "{p1}");
    }
}
