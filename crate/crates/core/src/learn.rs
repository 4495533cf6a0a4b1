//! Deriving grammar from a two-row alignment, and ranking grammars by G + E.
//!
//! Matched runs stay in an unsegmented abstract pattern; each stretch of
//! unmatched material becomes a slot, referenced from the abstract pattern
//! by a class symbol pair `%k #k`, with one disjunct pattern per row:
//!
//! ```text
//! i t s %1 #1 t i m e n o w
//! %1 2 : p l a y : #1
//! %1 3 : b e d : #1
//! ```

use std::collections::HashSet;

use crate::alignment::Alignment;
use crate::corpus::{Corpus, SymbolId};
use crate::engine::{self, EngineParams};
use crate::error::{Error, Result};
use crate::io::PatternLine;
use crate::matcher::{match_pair, DrivingView};
use crate::scoring::{CostConfig, CostModel};

/// Hands out `%k`/`#k` class pairs and bare `k` discrimination symbols,
/// skipping any spelling already taken.
#[derive(Debug, Clone)]
pub struct SymbolGen {
    next: usize,
    taken: HashSet<String>,
}

impl SymbolGen {
    pub fn new<S: AsRef<str>>(taken: impl IntoIterator<Item = S>) -> Self {
        Self {
            next: 1,
            taken: taken.into_iter().map(|s| s.as_ref().to_string()).collect(),
        }
    }

    pub fn for_corpus(corpus: &Corpus) -> Self {
        let t = corpus.symbols();
        Self::new((0..t.len()).map(|i| t.name(SymbolId(i as u32))))
    }

    fn free(&self, names: &[String]) -> bool {
        names.iter().all(|n| !self.taken.contains(n))
    }

    fn claim(&mut self, names: Vec<String>) -> Vec<String> {
        self.taken.extend(names.iter().cloned());
        self.next += 1;
        names
    }

    /// A fresh `(%k, #k)` pair.
    pub fn class(&mut self) -> (String, String) {
        loop {
            let names = vec![format!("%{}", self.next), format!("#{}", self.next)];
            if self.free(&names) {
                let mut n = self.claim(names);
                let close = n.pop().unwrap();
                return (n.pop().unwrap(), close);
            }
            self.next += 1;
        }
    }

    pub fn discriminator(&mut self) -> String {
        loop {
            let names = vec![self.next.to_string()];
            if self.free(&names) {
                return self.claim(names).pop().unwrap();
            }
            self.next += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub open: String,
    pub close: String,
    /// One disjunct per source row; an empty body means the row has
    /// nothing at this point.
    pub disjuncts: [PatternLine; 2],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Element {
    Shared(Vec<String>),
    Slot(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedGrammar {
    pub elements: Vec<Element>,
    pub slots: Vec<Slot>,
    /// The two sequences the grammar was derived from.
    pub sources: [Vec<String>; 2],
}

impl DerivedGrammar {
    pub fn abstract_pattern(&self) -> PatternLine {
        let body = self
            .elements
            .iter()
            .flat_map(|e| match e {
                Element::Shared(run) => run.clone(),
                Element::Slot(k) => vec![self.slots[*k].open.clone(), self.slots[*k].close.clone()],
            })
            .collect();
        PatternLine {
            prefix: Vec::new(),
            body,
            suffix: Vec::new(),
            frequency: 1,
        }
    }

    /// Disjunct patterns, slot by slot.
    pub fn segment_patterns(&self) -> Vec<PatternLine> {
        self.slots
            .iter()
            .flat_map(|s| s.disjuncts.iter().cloned())
            .collect()
    }

    /// Maximal runs shared by both rows.
    pub fn shared_runs(&self) -> Vec<&[String]> {
        self.elements
            .iter()
            .filter_map(|e| match e {
                Element::Shared(run) => Some(run.as_slice()),
                Element::Slot(_) => None,
            })
            .collect()
    }

    pub fn grammar(&self) -> Grammar {
        let mut patterns = vec![self.abstract_pattern()];
        patterns.extend(self.segment_patterns());
        Grammar {
            name: "factored".into(),
            patterns,
        }
    }

    /// The contents generated by taking every slot's disjunct for `row`.
    pub fn expand(&self, row: usize) -> Vec<String> {
        self.elements
            .iter()
            .flat_map(|e| match e {
                Element::Shared(run) => run.clone(),
                Element::Slot(k) => self.slots[*k].disjuncts[row].body.clone(),
            })
            .collect()
    }

    /// Discrimination symbols selecting `row`'s disjuncts, i.e. its code.
    pub fn code(&self, row: usize) -> Vec<String> {
        self.slots
            .iter()
            .map(|s| s.disjuncts[row].prefix[1].clone())
            .collect()
    }
}

fn disjunct(
    open: &str,
    close: &str,
    disc: String,
    body: &[SymbolId],
    corpus: &Corpus,
) -> PatternLine {
    PatternLine {
        prefix: vec![open.to_string(), disc],
        body: body.iter().map(|&s| corpus.name(s).to_string()).collect(),
        suffix: vec![close.to_string()],
        frequency: 1,
    }
}

/// Factors a two-row alignment into an abstract pattern plus disjuncts.
pub fn derive_patterns(
    a: &Alignment,
    corpus: &Corpus,
    gen: &mut SymbolGen,
) -> Result<DerivedGrammar> {
    let rows = a.rows();
    if rows.len() != 2 {
        return Err(Error::Invalid(format!(
            "expected a two-row alignment, got {} rows",
            rows.len()
        )));
    }
    if a.columns().is_empty() {
        return Err(Error::NothingShared);
    }
    let mut pairs: Vec<[usize; 2]> = a
        .columns()
        .iter()
        .map(|c| {
            let mut p = [0; 2];
            for cell in &c.cells {
                p[cell.row] = cell.pos;
            }
            p
        })
        .collect();
    pairs.sort_unstable();
    let name = |s: &SymbolId| corpus.name(*s).to_string();

    let mut elements = Vec::new();
    let mut slots = Vec::new();
    let mut cursor = [0usize; 2];
    let mut i = 0;
    while i <= pairs.len() {
        // The stretch up to the next matched run, or to the row ends.
        let stop = pairs
            .get(i)
            .copied()
            .unwrap_or([rows[0].len(), rows[1].len()]);
        let gap: [&[SymbolId]; 2] = [
            &rows[0].symbols[cursor[0]..stop[0]],
            &rows[1].symbols[cursor[1]..stop[1]],
        ];
        if !gap[0].is_empty() || !gap[1].is_empty() {
            let (open, close) = gen.class();
            let d0 = disjunct(&open, &close, gen.discriminator(), gap[0], corpus);
            let d1 = disjunct(&open, &close, gen.discriminator(), gap[1], corpus);
            elements.push(Element::Slot(slots.len()));
            slots.push(Slot {
                open,
                close,
                disjuncts: [d0, d1],
            });
        }
        if i == pairs.len() {
            break;
        }
        let mut j = i + 1;
        while j < pairs.len() && pairs[j] == [pairs[j - 1][0] + 1, pairs[j - 1][1] + 1] {
            j += 1;
        }
        elements.push(Element::Shared(
            rows[0].symbols[pairs[i][0]..=pairs[j - 1][0]]
                .iter()
                .map(name)
                .collect(),
        ));
        cursor = [pairs[j - 1][0] + 1, pairs[j - 1][1] + 1];
        i = j;
    }

    let sources = [
        rows[0].symbols.iter().map(name).collect(),
        rows[1].symbols.iter().map(name).collect(),
    ];
    let g = DerivedGrammar {
        elements,
        slots,
        sources,
    };
    for r in 0..2 {
        if g.expand(r) != g.sources[r] {
            return Err(Error::Invalid(format!(
                "derived grammar does not regenerate row {r}"
            )));
        }
    }
    Ok(g)
}

/// The best two-row alignment of `first` (as New) against `second`.
pub fn align_pair(
    first: &[&str],
    second: &[&str],
    params: &EngineParams,
) -> Result<(Corpus, Alignment)> {
    let mut corpus = Corpus::new();
    corpus.add_pattern(second, 0, 0, 1)?;
    let new = corpus.intern_all(first)?;
    let model = CostModel::build(&corpus, CostConfig::default());
    let driving = Alignment::singleton(&new);
    let view = DrivingView::for_params(&driving, &params.matching);
    let best = match_pair(
        &driving,
        &view,
        &corpus.patterns()[0],
        &params.matching,
        &model,
    )
    .into_iter()
    .map(|a| (model.compression_score(&a).cs, a))
    .max_by(|x, y| {
        x.0.total_cmp(&y.0)
            .then(x.1.columns().len().cmp(&y.1.columns().len()))
    })
    .map(|(_, a)| a)
    .ok_or(Error::NothingShared)?;
    Ok((corpus, best))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    pub name: String,
    pub patterns: Vec<PatternLine>,
}

impl Grammar {
    /// Every datum stored as it is.
    pub fn rote(data: &[Vec<String>]) -> Self {
        Grammar {
            name: "rote".into(),
            patterns: data
                .iter()
                .map(|d| PatternLine {
                    prefix: Vec::new(),
                    body: d.clone(),
                    suffix: Vec::new(),
                    frequency: 1,
                })
                .collect(),
        }
    }

    fn tokens(&self) -> impl Iterator<Item = &String> {
        self.patterns
            .iter()
            .flat_map(|p| p.prefix.iter().chain(&p.body).chain(&p.suffix))
    }

    fn to_corpus(&self, base: &Corpus) -> Result<Corpus> {
        let mut c = base.clone();
        for p in &self.patterns {
            let tokens: Vec<&String> = p.prefix.iter().chain(&p.body).chain(&p.suffix).collect();
            c.add_pattern(&tokens, p.prefix.len(), p.suffix.len(), p.frequency)?;
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrammarScore {
    pub g: f64,
    pub e: f64,
    pub total: f64,
}

/// G is the cost of writing the grammar out; E sums, per datum, the
/// encoding cost of its best alignment against the grammar, or its raw
/// cost when nothing aligns. `model` must be built over `grammar`.
pub fn grammar_score(
    model: &CostModel,
    grammar: &Corpus,
    data: &[Vec<SymbolId>],
    params: &EngineParams,
) -> GrammarScore {
    let g = grammar
        .patterns()
        .iter()
        .map(|p| p.frequency as f64 * model.sequence_cost(&p.symbols))
        .sum::<f64>();
    let e = data
        .iter()
        .map(|d| {
            let r = engine::run(grammar, d, model, params);
            r.all
                .first()
                .map_or_else(|| model.raw_cost(d), |s| s.score.n_e)
        })
        .sum::<f64>();
    GrammarScore { g, e, total: g + e }
}

#[derive(Debug, Clone)]
pub struct RankedGrammar {
    pub grammar: Grammar,
    pub score: GrammarScore,
}

/// Every symbol of the data and of every candidate, interned in a fixed
/// order, with no patterns: the common ground the candidates are costed on.
pub fn shared_symbols(candidates: &[Grammar], data: &[Vec<String>]) -> Result<Corpus> {
    let mut base = Corpus::new();
    for t in data
        .iter()
        .flatten()
        .chain(candidates.iter().flat_map(Grammar::tokens))
    {
        base.intern_symbol(t)?;
    }
    Ok(base)
}

/// Ranks candidate grammars by G + E, smaller G breaking ties. Candidates
/// share one symbol table and every symbol costs the same, so grammars
/// differ only in length and structure.
pub fn evaluate_grammars(
    candidates: &[Grammar],
    data: &[Vec<String>],
    config: CostConfig,
    params: &EngineParams,
) -> Result<Vec<RankedGrammar>> {
    let base = shared_symbols(candidates, data)?;
    let ids: Vec<Vec<SymbolId>> = data
        .iter()
        .map(|d| {
            d.iter()
                .map(|t| base.symbols().get(t).expect("interned above"))
                .collect()
        })
        .collect();
    let mut ranked = candidates
        .iter()
        .map(|g| {
            let corpus = g.to_corpus(&base)?;
            let model = CostModel::uniform(&corpus, config);
            Ok(RankedGrammar {
                grammar: g.clone(),
                score: grammar_score(&model, &corpus, &ids, params),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|a, b| {
        a.score
            .total
            .total_cmp(&b.score.total)
            .then(a.score.g.total_cmp(&b.score.g))
    });
    Ok(ranked)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    fn derive(a: &str, b: &str) -> DerivedGrammar {
        let (c, al) = align_pair(&toks(a), &toks(b), &EngineParams::default()).unwrap();
        derive_patterns(&al, &c, &mut SymbolGen::for_corpus(&c)).unwrap()
    }

    #[test]
    fn middle_slot() {
        let g = derive("i t s p l a y t i m e n o w", "i t s b e d t i m e n o w");
        let runs: Vec<String> = g.shared_runs().iter().map(|r| r.join(" ")).collect();
        assert_eq!(runs, ["i t s", "t i m e n o w"]);
        assert_eq!(g.slots.len(), 1);
        assert_eq!(g.slots[0].disjuncts[0].body.join(" "), "p l a y");
        assert_eq!(g.slots[0].disjuncts[1].body.join(" "), "b e d");
    }

    #[test]
    fn optional_material() {
        let g = derive("a b x c", "a b c");
        assert_eq!(g.slots.len(), 1);
        assert!(g.slots[0].disjuncts[1].body.is_empty());
        assert_eq!(g.expand(1), ["a", "b", "c"]);
    }

    #[test]
    fn disjoint_pair() {
        assert!(matches!(
            align_pair(&["a"], &["b"], &EngineParams::default()),
            Err(Error::NothingShared)
        ));
    }

    #[test]
    fn fresh_symbols_skip_existing() {
        let mut gen = SymbolGen::new(["%1", "2"]);
        assert_eq!(gen.class(), ("%2".to_string(), "#2".to_string()));
        assert_eq!(gen.discriminator(), "3");
    }

    #[test]
    fn empty_grammar_costs_raw() {
        let data = vec![toks("a b c")
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()];
        let empty = Grammar {
            name: "empty".into(),
            patterns: Vec::new(),
        };
        let r = evaluate_grammars(
            &[empty],
            &data,
            CostConfig::default(),
            &EngineParams::default(),
        )
        .unwrap();
        assert_eq!(r[0].score.g, 0.0);
        let base = shared_symbols(&[], &data).unwrap();
        let m = CostModel::uniform(&base, CostConfig::default());
        let ids: Vec<SymbolId> = data[0]
            .iter()
            .map(|t| base.symbols().get(t).unwrap())
            .collect();
        assert!((r[0].score.e - m.raw_cost(&ids)).abs() < 1e-12);
        assert!(
            evaluate_grammars(&[], &data, CostConfig::default(), &EngineParams::default())
                .unwrap()
                .is_empty()
        );
    }
}
