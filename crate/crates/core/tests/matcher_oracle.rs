//! The chain search against brute-force enumeration on small pairs.

use icmaus::matcher::{find_hits, k_best_chains, DrivingView};
use icmaus::*;
use proptest::prelude::*;

/// Gains differ per symbol so that ties are rare but possible.
struct Table;

impl ChainScorer for Table {
    fn symbol_gain(&self, s: SymbolId) -> f64 {
        2.0 + 0.75 * s.0 as f64
    }
    fn gap_cost(&self, run: usize) -> f64 {
        (1.0 + run as f64).log2()
    }
}

fn gain(s: usize) -> f64 {
    2.0 + 0.75 * s as f64
}

/// Best score over every chain of equal pairs increasing in both sequences.
fn brute_force(a: &[usize], b: &[usize]) -> Option<f64> {
    fn extend(a: &[usize], b: &[usize], last: (usize, usize), score: f64, best: &mut f64) {
        *best = best.max(score);
        for i in last.0 + 1..a.len() {
            for j in last.1 + 1..b.len() {
                if a[i] == b[j] {
                    let gaps = ((i - last.0) as f64).log2() + ((j - last.1) as f64).log2();
                    extend(a, b, (i, j), score + gain(a[i]) - gaps, best);
                }
            }
        }
    }
    let mut best = f64::NEG_INFINITY;
    for i in 0..a.len() {
        for j in 0..b.len() {
            if a[i] == b[j] {
                extend(a, b, (i, j), gain(a[i]), &mut best);
            }
        }
    }
    best.is_finite().then_some(best)
}

fn top_score(a: &[usize], b: &[usize], beam: usize) -> Option<f64> {
    let mut c = Corpus::new();
    let alphabet: Vec<String> = (0..8).map(|i| format!("s{i}")).collect();
    // Intern in index order so symbol ids equal the generated values.
    c.intern_all(&alphabet).unwrap();
    let tb: Vec<&str> = b.iter().map(|&s| alphabet[s].as_str()).collect();
    c.add_pattern(&tb, 0, 0, 1).unwrap();
    let ta: Vec<&str> = a.iter().map(|&s| alphabet[s].as_str()).collect();
    let new = c.intern_all(&ta).unwrap();
    let view = DrivingView::new(&Alignment::singleton(&new));
    let params = MatchParams {
        beam,
        k_best: 1,
        ..Default::default()
    };
    let hits = find_hits(&view, &c.patterns()[0], &params);
    k_best_chains(&view, &hits, &params, &Table)
        .first()
        .map(|ch| ch.score)
}

fn pair() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (3usize..=6).prop_flat_map(|k| {
        (
            prop::collection::vec(0..k, 1..=12),
            prop::collection::vec(0..k, 1..=12),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn top_chain_is_optimal((a, b) in pair()) {
        let want = brute_force(&a, &b);
        let got = top_score(&a, &b, 50);
        match (want, got) {
            (Some(w), Some(g)) => prop_assert!((w - g).abs() < 1e-9, "want {w} got {g}"),
            (w, g) => prop_assert_eq!(w.is_some(), g.is_some()),
        }
    }

    #[test]
    fn wider_beams_never_score_lower((a, b) in pair()) {
        let scores: Vec<f64> = [1, 2, 4, 16, 50]
            .iter()
            .map(|&w| top_score(&a, &b, w).unwrap_or(f64::NEG_INFINITY))
            .collect();
        for w in scores.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-9);
        }
    }
}
