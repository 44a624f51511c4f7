mod oracle;

use oracle::{
    brute_lcs, brute_levenshtein, brute_tier_index, permutation_mwu, sequences_up_to, OracleBudget,
    OracleError, TierRule,
};
use surfbench::guess_order::RankModel;
use surfbench::metrics::{lcs_len, lcs_ratio, levenshtein, levenshtein_sim};
use surfbench::stats::{mann_whitney, MwuMode};
use surfbench::Strategy;

fn analytic_tier(o: &[usize], g: &[usize], p: usize, rule: TierRule) -> usize {
    let strategy = match rule {
        TierRule::Pool => Strategy::Pool,
        TierRule::Position => Strategy::Position,
    };
    RankModel::new(strategy, o, g, p as u64)
        .unwrap()
        .target_tier
}

#[test]
fn tier_oracle_examples() {
    let b = OracleBudget::default();
    let (a, bb) = (0, 1);
    assert_eq!(
        brute_tier_index(&[a, bb], &[bb, a], 3, TierRule::Pool, &b),
        Ok(0)
    );
    assert_eq!(
        brute_tier_index(&[a, bb], &[bb, a], 3, TierRule::Position, &b),
        Ok(2)
    );
    for rule in [TierRule::Pool, TierRule::Position] {
        assert_eq!(brute_tier_index(&[2, 0, 1], &[2, 0, 1], 3, rule, &b), Ok(0));
    }
}

#[test]
fn tier_oracle_refuses_large_spaces() {
    let b = OracleBudget {
        max_space: 1000,
        ..OracleBudget::default()
    };
    let o = vec![1; 11];
    let err = brute_tier_index(&o, &o, 95, TierRule::Position, &b).unwrap_err();
    assert!(
        matches!(
            err,
            OracleError::OverBudget {
                max_space: 1000,
                ..
            }
        ),
        "{err:?}"
    );
}

#[test]
fn tier_index_matches_oracle_small() {
    let b = OracleBudget::default();
    for p in 2..=3 {
        let seqs = sequences_up_to(p, 3);
        for o in seqs.iter().filter(|s| !s.is_empty()) {
            for g in &seqs {
                for rule in [TierRule::Pool, TierRule::Position] {
                    let brute = brute_tier_index(o, g, p, rule, &b).unwrap();
                    assert_eq!(
                        analytic_tier(o, g, p, rule),
                        brute,
                        "P={p} o={o:?} g={g:?} {rule:?}"
                    );
                }
            }
        }
    }
}

#[test]
fn recursion_oracle_examples() {
    assert_eq!(brute_lcs(b"abcd", b"acd"), Ok(3));
    assert_eq!(brute_levenshtein(b"kitten", b"sitting"), Ok(3));
    assert_eq!(brute_lcs(b"abc", b"abc"), Ok(3));
    assert_eq!(brute_levenshtein(b"abc", b"abc"), Ok(0));
    assert!(matches!(
        brute_lcs(b"abcdefgh", b"a"),
        Err(OracleError::TooLong { len: 8, .. })
    ));
}

#[test]
fn dp_metrics_match_recursions() {
    let seqs = sequences_up_to(3, 4);
    for o in seqs.iter().filter(|s| !s.is_empty()) {
        for g in &seqs {
            let lcs = brute_lcs(o, g).unwrap();
            let dist = brute_levenshtein(o, g).unwrap();
            assert_eq!(lcs_len(o, g), lcs);
            assert_eq!(levenshtein(o, g), dist);
            assert_eq!(lcs_ratio(o, g).unwrap(), lcs as f64 / o.len() as f64);
            let longest = o.len().max(g.len()) as f64;
            assert_eq!(levenshtein_sim(o, g).unwrap(), 1.0 - dist as f64 / longest);
        }
    }
}

#[test]
fn permutation_oracle_examples() {
    let b = OracleBudget::default();
    let p = permutation_mwu(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], 100_000, &b).unwrap();
    assert!((0.08..=0.12).contains(&p), "{p}");

    let same: Vec<f64> = (0..10).map(f64::from).collect();
    let p = permutation_mwu(&same, &same, 10_000, &b).unwrap();
    assert!(p > 0.99, "{p}");

    let lo: Vec<f64> = (0..20).map(f64::from).collect();
    let hi: Vec<f64> = (0..20).map(|x| f64::from(x) + 100.0).collect();
    let p = permutation_mwu(&lo, &hi, 10_000, &b).unwrap();
    assert!(p < 0.001, "{p}");

    assert_eq!(
        permutation_mwu(&lo, &hi, 100, &b),
        Err(OracleError::TooFewResamples(100))
    );
}

#[test]
fn permutation_oracle_is_seeded() {
    let a = [1.3, 2.2, 5.1, 0.4, 3.3];
    let c = [2.9, 4.4, 6.0, 5.5, 3.9, 7.1];
    let b = OracleBudget::default();
    let p1 = permutation_mwu(&a, &c, 20_000, &b).unwrap();
    let p2 = permutation_mwu(&a, &c, 20_000, &b).unwrap();
    assert_eq!(p1, p2);
    let exact = mann_whitney(&a, &c, MwuMode::Exact).unwrap().p_raw;
    assert!((p1 - exact).abs() < 0.02, "{p1} vs {exact}");
}
