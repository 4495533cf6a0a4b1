//! Sequential against data-parallel search on the same workloads.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use icmaus::engine::{run, EngineParams};
use icmaus::io::parse_corpus;
use icmaus::{Corpus, CostConfig, CostModel, SymbolId};

fn english() -> (Corpus, Vec<SymbolId>) {
    let text = include_str!("../../cli/corpora/english.sp");
    let mut corpus = parse_corpus(text).unwrap().corpus;
    let new = corpus
        .intern_all(
            &"s i x o f t h e m d o"
                .split_whitespace()
                .collect::<Vec<_>>(),
        )
        .unwrap();
    (corpus, new)
}

/// Random patterns over a small alphabet; New is stitched from pieces of them.
fn synthetic(patterns: usize, len: usize, seed: u64) -> (Corpus, Vec<SymbolId>) {
    let mut rng = StdRng::seed_from_u64(seed);
    let alphabet: Vec<String> = (0..12).map(|i| format!("s{i}")).collect();
    let mut corpus = Corpus::new();
    let mut rows = Vec::new();
    while rows.len() < patterns {
        let p: Vec<&str> = (0..len)
            .map(|_| alphabet[rng.gen_range(0..alphabet.len())].as_str())
            .collect();
        if corpus.add_pattern(&p, 0, 0, 1).is_ok() {
            rows.push(p);
        }
    }
    let mut new = Vec::new();
    for _ in 0..3 {
        let p = &rows[rng.gen_range(0..rows.len())];
        let start = rng.gen_range(0..len / 2);
        new.extend_from_slice(&p[start..start + len / 2]);
    }
    let new = corpus.intern_all(&new).unwrap();
    (corpus, new)
}

fn bench(c: &mut Criterion) {
    let workloads = [
        ("english", english()),
        ("synthetic-40x12", synthetic(40, 12, 7)),
    ];
    let mut group = c.benchmark_group("search");
    group.sample_size(10);
    for (name, (corpus, new)) in &workloads {
        let model = CostModel::build(corpus, CostConfig::default());
        for (label, workers) in [("sequential", 1), ("parallel", 0)] {
            let params = EngineParams {
                workers,
                ..Default::default()
            };
            group.bench_with_input(BenchmarkId::new(label, name), &params, |b, p| {
                b.iter(|| run(corpus, new, &model, p))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
