//! Bit costs, encoded sizes and the compression score.

use serde::{Deserialize, Serialize};

use crate::alignment::{Alignment, RowSource};
use crate::corpus::{Corpus, Pattern, SymbolId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostConfig {
    pub min_cost: f64,
    pub gap_beta: f64,
    pub smoothing: f64,
    /// Charge rows of patterns without ID symbols for naming the pattern.
    #[serde(default = "yes")]
    pub identify_unsegmented: bool,
}

fn yes() -> bool {
    true
}

impl Default for CostConfig {
    fn default() -> Self {
        Self {
            min_cost: 1.0,
            gap_beta: 1.0,
            smoothing: 1.0,
            identify_unsegmented: true,
        }
    }
}

/// Per-symbol bit costs derived from frequency-weighted occurrences in Old.
#[derive(Debug, Clone)]
pub struct CostModel {
    costs: Vec<f64>,
    unseen: f64,
    /// Per pattern; zero for patterns that carry ID symbols.
    selection: Vec<f64>,
    config: CostConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    pub n_r: f64,
    pub n_e: f64,
    pub gap_penalty: f64,
    pub cs: f64,
    pub matched_new_count: usize,
}

/// What the matcher needs from a cost model.
pub trait ChainScorer {
    fn symbol_gain(&self, s: SymbolId) -> f64;
    fn gap_cost(&self, run: usize) -> f64;
}

impl CostModel {
    /// Costs are `-log2((w + k) / (total + k * |symbols|))`, floored at
    /// `min_cost`, where `w` is the symbol's weighted count and `k` the
    /// smoothing constant.
    pub fn build(corpus: &Corpus, config: CostConfig) -> Self {
        let n = corpus.symbols().len();
        let denom = corpus.total_weighted_occurrences() as f64 + config.smoothing * n.max(1) as f64;
        let cost_of = |w: f64| (-((w + config.smoothing) / denom).log2()).max(config.min_cost);
        let costs = (0..n)
            .map(|i| cost_of(corpus.symbol_weighted_count(SymbolId(i as u32)) as f64))
            .collect();
        let unsegmented = |p: &&Pattern| p.id_prefix_len + p.id_suffix_len == 0;
        // Segmented patterns are reached through their ID symbols, so only
        // the unsegmented ones compete for selection.
        let total_f: f64 = corpus
            .patterns()
            .iter()
            .filter(unsegmented)
            .map(|p| p.frequency as f64)
            .sum();
        let selection = corpus
            .patterns()
            .iter()
            .map(|p| {
                if !config.identify_unsegmented || !unsegmented(&p) {
                    0.0
                } else {
                    (total_f / p.frequency as f64).log2()
                }
            })
            .collect();
        Self {
            costs,
            unseen: cost_of(0.0),
            selection,
            config,
        }
    }

    /// Every symbol costs `log2 |symbols|` (floored at `min_cost`); pattern
    /// selection is charged as in [`CostModel::build`].
    pub fn uniform(corpus: &Corpus, config: CostConfig) -> Self {
        let mut m = Self::build(corpus, config);
        let flat = (corpus.symbols().len().max(1) as f64)
            .log2()
            .max(config.min_cost);
        m.costs.iter_mut().for_each(|c| *c = flat);
        m.unseen = flat;
        m
    }

    pub fn config(&self) -> CostConfig {
        self.config
    }

    pub fn cost(&self, s: SymbolId) -> f64 {
        self.costs.get(s.index()).copied().unwrap_or(self.unseen)
    }

    pub fn sequence_cost(&self, symbols: &[SymbolId]) -> f64 {
        symbols.iter().fold(0.0, |acc, &s| acc + self.cost(s))
    }

    pub fn raw_cost(&self, new: &[SymbolId]) -> f64 {
        self.sequence_cost(new)
    }

    /// Bits to say which unsegmented pattern each Old row is. A pattern
    /// with ID symbols names itself through them.
    pub fn identification_cost(&self, a: &Alignment) -> f64 {
        a.rows()
            .iter()
            .map(|r| match r.source {
                RowSource::Old(p) => self.selection.get(p.0 as usize).copied().unwrap_or(0.0),
                RowSource::New => 0.0,
            })
            .sum()
    }

    /// Code plus residue, the residue being sent raw, plus the names of
    /// unsegmented rows.
    pub fn encoded_cost(&self, a: &Alignment) -> f64 {
        self.sequence_cost(&a.derive_code())
            + self.sequence_cost(&a.residue())
            + self.identification_cost(a)
    }

    pub fn gap_penalty(&self, a: &Alignment) -> f64 {
        let runs: f64 = (0..a.rows().len())
            .flat_map(|r| a.gap_runs(r))
            .fold(0.0, |acc, g| acc + (1.0 + g as f64).log2());
        self.config.gap_beta * runs
    }

    pub fn compression_score(&self, a: &Alignment) -> ScoreBreakdown {
        let n_r = self.raw_cost(&a.new_row().symbols);
        let n_e = self.encoded_cost(a);
        let gap_penalty = self.gap_penalty(a);
        ScoreBreakdown {
            n_r,
            n_e,
            gap_penalty,
            cs: n_r - n_e - gap_penalty,
            matched_new_count: a.matched_new_count(),
        }
    }
}

impl ChainScorer for CostModel {
    fn symbol_gain(&self, s: SymbolId) -> f64 {
        self.cost(s)
    }

    fn gap_cost(&self, run: usize) -> f64 {
        if run == 0 {
            0.0
        } else {
            self.config.gap_beta * (1.0 + run as f64).log2()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PatternId;

    fn corpus(lines: &[&str]) -> Corpus {
        let mut c = Corpus::new();
        for l in lines {
            let t: Vec<&str> = l.split_whitespace().collect();
            c.add_pattern(&t, 0, 0, 1).unwrap();
        }
        c
    }

    #[test]
    fn cost_formula() {
        // s occurs 3 times out of 12, four distinct symbols: (3+1)/(12+4).
        let mut c = corpus(&["s s s a b c", "a b c a b c"]);
        let m = CostModel::build(&c, CostConfig::default());
        let s = c.symbols().get("s").unwrap();
        assert!((m.cost(s) - 2.0).abs() < 1e-12);
        let z = c.intern_symbol("z").unwrap();
        let m = CostModel::build(&c, CostConfig::default());
        // Now five symbols: unseen cost -log2(1/17).
        assert!((m.cost(z) - 17f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn floor_applies() {
        let c = corpus(&["a a a a a a a b"]);
        let m = CostModel::build(&c, CostConfig::default());
        let a = c.symbols().get("a").unwrap();
        assert_eq!(m.cost(a), 1.0);
    }

    #[test]
    fn empty_corpus_costs() {
        let mut c = Corpus::new();
        let ids = c.intern_all(&["x", "y", "z", "w"]).unwrap();
        let m = CostModel::build(&c, CostConfig::default());
        for s in ids {
            assert!((m.cost(s) - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn singleton_scores_nonpositive() {
        let mut c = corpus(&["a b c"]);
        let new = c.intern_all(&["a", "q", "c"]).unwrap();
        let m = CostModel::build(&c, CostConfig::default());
        let s = m.compression_score(&Alignment::singleton(&new));
        assert_eq!(s.n_r, s.n_e);
        assert!(s.cs <= 0.0);
        assert_eq!(s.matched_new_count, 0);
    }

    #[test]
    fn gap_penalty_of_single_gap() {
        let mut c = corpus(&["a b c"]);
        let new = c.intern_all(&["a", "c"]).unwrap();
        let m = CostModel::build(&c, CostConfig::default());
        let p = c.pattern(PatternId(0)).clone();
        let a = Alignment::singleton(&new)
            .extend(&p, &[(0, 0), (1, 2)])
            .unwrap();
        let s = m.compression_score(&a);
        assert!((s.gap_penalty - 1.0).abs() < 1e-12);
        assert!((s.cs - (s.n_r - s.n_e - s.gap_penalty)).abs() < 1e-12);
    }

    #[test]
    fn more_runs_cost_more_for_fixed_total() {
        // Same total gap length split into more runs costs more.
        let m = CostModel::build(&corpus(&["a"]), CostConfig::default());
        let total = 12;
        let one = m.gap_cost(total);
        let two = m.gap_cost(6) + m.gap_cost(6);
        let four = 4.0 * m.gap_cost(3);
        assert!(one < two && two < four);
        // And for a fixed number of runs, a larger run costs more.
        assert!(m.gap_cost(2) < m.gap_cost(9));
    }
}
