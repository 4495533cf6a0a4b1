//! Hand-built alignments for the worked examples, checked against what the
//! search finds.

use icmaus::engine::run;
use icmaus::io::parse_corpus;
use icmaus::*;

struct Fixture {
    corpus: Corpus,
    new: Vec<SymbolId>,
    model: CostModel,
    params: EngineParams,
}

fn fixture(file: &str, new: &str) -> Fixture {
    let text = std::fs::read_to_string(format!(
        "{}/../cli/corpora/{file}",
        env!("CARGO_MANIFEST_DIR")
    ))
    .unwrap();
    let parsed = parse_corpus(&text).unwrap();
    let mut corpus = parsed.corpus;
    let tokens: Vec<&str> = new.split_whitespace().collect();
    let new = corpus.intern_all(&tokens).unwrap();
    let model = CostModel::build(&corpus, CostConfig::default());
    let mut params = EngineParams::default();
    if let Some(dk) = parsed.params.get("driving_keep") {
        params.driving_keep = dk.parse().unwrap();
    }
    Fixture {
        corpus,
        new,
        model,
        params,
    }
}

/// Rows are New followed by the listed patterns; columns are `(row, pos)` lists.
fn build(f: &Fixture, pats: &[usize], cols: &[&[(usize, usize)]]) -> Alignment {
    let mut rows = vec![Row::new_pattern(&f.new)];
    rows.extend(pats.iter().map(|&p| Row::old(&f.corpus.patterns()[p], 0)));
    let cols = cols
        .iter()
        .map(|v| v.iter().map(|&(row, pos)| Cell { row, pos }).collect())
        .collect();
    Alignment::from_parts(rows, cols).unwrap()
}

fn names(f: &Fixture, s: &[SymbolId]) -> String {
    f.corpus.render(s)
}

// Rows 1..=8 are the english patterns in file order.
const PARSE_STRUCTURE: &[&[(usize, usize)]] = &[
    &[(1, 0), (2, 3)],
    &[(1, 7), (2, 4)],
    &[(2, 1), (3, 0)],
    &[(2, 2), (3, 4)],
    &[(4, 0), (5, 1)],
    &[(4, 6), (5, 2)],
    &[(5, 3), (2, 0), (8, 4)],
    &[(5, 4), (2, 5)],
    &[(5, 0), (7, 1), (8, 2)],
    &[(5, 5), (7, 2)],
    &[(6, 0), (7, 3)],
    &[(6, 5), (7, 4)],
    &[(7, 0), (8, 0)],
    &[(7, 5), (8, 6)],
    &[(4, 1), (8, 3)],
    &[(6, 1), (8, 5)],
];

#[test]
fn parse_is_the_best_alignment() {
    let f = fixture("english.sp", "s i x o f t h e m d o");
    let mut cols: Vec<&[(usize, usize)]> = vec![
        &[(0, 0), (4, 3)],
        &[(0, 1), (4, 4)],
        &[(0, 2), (4, 5)],
        &[(0, 3), (3, 2)],
        &[(0, 4), (3, 3)],
        &[(0, 5), (1, 3)],
        &[(0, 6), (1, 4)],
        &[(0, 7), (1, 5)],
        &[(0, 8), (1, 6)],
        &[(0, 9), (6, 3)],
        &[(0, 10), (6, 4)],
    ];
    cols.extend_from_slice(PARSE_STRUCTURE);
    let a = build(&f, &[0, 1, 2, 3, 4, 5, 6, 7], &cols);
    assert_eq!(names(&f, &a.derive_code()), "PL 1 2 Np 0 2");
    assert!(a.residue().is_empty());

    let r = run(&f.corpus, &f.new, &f.model, &f.params);
    assert_eq!(r.all[0].key, a.canonical_key());
    let s = f.model.compression_score(&a);
    assert!((s.cs - r.all[0].score.cs).abs() < 1e-9);
    assert!(s.cs > 0.0);
}

#[test]
fn production_reads_back_the_sentence() {
    let f = fixture("english.sp", "PL 1 2 Np 0 2");
    let mut cols: Vec<&[(usize, usize)]> = vec![
        &[(0, 0), (8, 1)],
        &[(0, 1), (4, 2)],
        &[(0, 2), (3, 1)],
        &[(0, 3), (1, 1)],
        &[(0, 4), (1, 2)],
        &[(0, 5), (6, 2)],
    ];
    cols.extend_from_slice(PARSE_STRUCTURE);
    let a = build(&f, &[0, 1, 2, 3, 4, 5, 6, 7], &cols);
    assert_eq!(
        names(&f, &a.unify().contents(&f.corpus)),
        "s i x o f t h e m d o"
    );
    assert!(a.covers_all_new());
}

#[test]
fn chained_functions_are_found() {
    let f = fixture("notxor.sp", "NOTXOR 0 1 A #NX");
    let a = build(
        &f,
        &[6, 2, 4],
        &[
            &[(0, 0), (1, 0)],
            &[(1, 1), (2, 0)],
            &[(0, 1), (2, 1)],
            &[(0, 2), (2, 2)],
            &[(0, 3), (2, 3), (3, 0)],
            &[(2, 4), (3, 1)],
            &[(2, 5), (3, 2)],
            &[(1, 2), (3, 3)],
            &[(1, 3), (3, 4)],
            &[(1, 4), (3, 6)],
            &[(0, 4), (1, 5)],
        ],
    );
    let r = run(&f.corpus, &f.new, &f.model, &f.params);
    assert_eq!(r.all[0].key, a.canonical_key());
    assert_eq!(
        names(&f, &r.all[0].alignment.extract_inferences()),
        "XOR 1 #A NOT R 0 #R"
    );
}
