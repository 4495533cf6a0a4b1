//! The outer search loop: driving alignments are matched against every Old
//! pattern, new alignments are scored and deduplicated, and the best few
//! become the next driving set.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::alignment::{Alignment, CanonicalKey, RowSource};
use crate::corpus::{Corpus, SymbolId};
use crate::matcher::{match_pair, DrivingView, MatchParams};
use crate::probability::{self, ProbabilityReport};
use crate::scoring::{CostModel, ScoreBreakdown};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineParams {
    pub matching: MatchParams,
    pub driving_keep: usize,
    pub max_iterations: usize,
    pub max_alignments_total: usize,
    pub exact_mode: bool,
    pub keep_best: usize,
    /// Promote at most one alignment per multiset of Old patterns.
    #[serde(default)]
    pub diverse_driving: bool,
    /// 1 runs sequentially; 0 uses every available core.
    pub workers: usize,
}

impl Default for EngineParams {
    fn default() -> Self {
        Self {
            matching: MatchParams::default(),
            driving_keep: 3,
            max_iterations: 20,
            max_alignments_total: 5000,
            exact_mode: false,
            keep_best: 10,
            diverse_driving: true,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScoredAlignment {
    pub alignment: Alignment,
    pub score: ScoreBreakdown,
    pub key: CanonicalKey,
}

/// A reported alignment with its derived sequences.
#[derive(Debug, Clone)]
pub struct RankedAlignment {
    pub alignment: Alignment,
    pub score: ScoreBreakdown,
    pub code: Vec<SymbolId>,
    pub inferences: Vec<SymbolId>,
    pub residue: Vec<SymbolId>,
    pub probability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    Complete,
    /// The alignment cap was hit before the search settled.
    Truncated,
    /// Exact mode found no alignment covering all of New.
    NoDerivation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunStats {
    pub iterations: usize,
    pub alignments_formed: usize,
    pub wall_time: Duration,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub alignments: Vec<RankedAlignment>,
    /// Every surviving alignment, ranked; probability groups index into it.
    pub all: Vec<ScoredAlignment>,
    pub probabilities: ProbabilityReport,
    pub status: RunStatus,
    pub stats: RunStats,
}

/// Search state between iterations.
#[derive(Debug, Clone)]
pub struct EngineState {
    pub driving: Vec<Alignment>,
    pub accumulated: Vec<ScoredAlignment>,
    seen: HashMap<CanonicalKey, usize>,
    pub iteration: usize,
    pub truncated: bool,
}

impl EngineState {
    pub fn new(new: &[SymbolId]) -> Self {
        let singleton = Alignment::singleton(new);
        let mut seen = HashMap::new();
        seen.insert(singleton.canonical_key(), usize::MAX);
        Self {
            driving: vec![singleton],
            accumulated: Vec::new(),
            seen,
            iteration: 0,
            truncated: false,
        }
    }
}

fn rank(a: &ScoredAlignment, b: &ScoredAlignment) -> std::cmp::Ordering {
    b.score
        .cs
        .total_cmp(&a.score.cs)
        .then_with(|| a.key.cmp(&b.key))
}

fn pattern_multiset(a: &Alignment) -> Vec<u32> {
    let mut v: Vec<u32> = a
        .rows()
        .iter()
        .filter_map(|r| match r.source {
            RowSource::Old(p) => Some(p.0),
            RowSource::New => None,
        })
        .collect();
    v.sort_unstable();
    v
}

/// One pass over every (driving, Old pattern) pair. Returns the alignments
/// formed for the first time.
pub fn compress_iteration(
    state: &mut EngineState,
    corpus: &Corpus,
    model: &CostModel,
    params: &EngineParams,
) -> Vec<ScoredAlignment> {
    let tasks: Vec<(usize, usize)> = (0..state.driving.len())
        .flat_map(|d| (0..corpus.len()).map(move |p| (d, p)))
        .collect();
    let driving = &state.driving;
    let views: Vec<DrivingView> = par_map(
        params.workers,
        &(0..driving.len()).collect::<Vec<_>>(),
        |&d| DrivingView::for_params(&driving[d], &params.matching),
    );
    let patterns = corpus.patterns();
    let produced: Vec<Vec<ScoredAlignment>> = par_map(params.workers, &tasks, |&(d, p)| {
        match_pair(
            &driving[d],
            &views[d],
            &patterns[p],
            &params.matching,
            model,
        )
        .into_iter()
        .map(|alignment| ScoredAlignment {
            score: model.compression_score(&alignment),
            key: alignment.canonical_key(),
            alignment,
        })
        .collect()
    });

    let mut fresh = Vec::new();
    for s in produced.into_iter().flatten() {
        if state.accumulated.len() >= params.max_alignments_total {
            state.truncated = true;
            break;
        }
        if state.seen.contains_key(&s.key) {
            continue;
        }
        state.seen.insert(s.key.clone(), state.accumulated.len());
        state.accumulated.push(s.clone());
        fresh.push(s);
    }
    let mut promote: Vec<&ScoredAlignment> = fresh.iter().collect();
    promote.sort_by(|a, b| rank(a, b));
    // Variants over the same patterns would otherwise fill the driving set.
    let mut kinds = std::collections::HashSet::new();
    state.driving = promote
        .into_iter()
        .filter(|s| !params.diverse_driving || kinds.insert(pattern_multiset(&s.alignment)))
        .take(params.driving_keep.max(1))
        .map(|s| s.alignment.clone())
        .collect();
    state.iteration += 1;
    fresh
}

/// Runs the search to completion for one New pattern.
pub fn run(
    corpus: &Corpus,
    new: &[SymbolId],
    model: &CostModel,
    params: &EngineParams,
) -> RunResult {
    let start = Instant::now();
    let mut state = EngineState::new(new);
    while state.iteration < params.max_iterations && !state.truncated {
        let formed = compress_iteration(&mut state, corpus, model, params);
        if formed.is_empty() {
            break;
        }
    }
    let formed = state.accumulated.len();
    let mut all = state.accumulated;
    all.sort_by(rank);
    let mut status = if state.truncated {
        RunStatus::Truncated
    } else {
        RunStatus::Complete
    };
    if params.exact_mode {
        all.retain(|s| s.alignment.covers_all_new());
        if all.is_empty() {
            status = RunStatus::NoDerivation;
        }
    }
    // Probabilities are over the reported alignments only.
    let probabilities = probability::build_report(&all[..all.len().min(params.keep_best)]);
    let alignments = all
        .iter()
        .take(params.keep_best)
        .map(|s| RankedAlignment {
            alignment: s.alignment.clone(),
            score: s.score,
            code: s.alignment.derive_code(),
            inferences: s.alignment.extract_inferences(),
            residue: s.alignment.residue(),
            probability: probability::absolute_probability(s.score.n_e),
        })
        .collect();
    RunResult {
        alignments,
        all,
        probabilities,
        status,
        stats: RunStats {
            iterations: state.iteration,
            alignments_formed: formed,
            wall_time: start.elapsed(),
        },
    }
}

#[cfg(feature = "parallel")]
fn par_map<T: Sync, R: Send>(
    workers: usize,
    items: &[T],
    f: impl Fn(&T) -> R + Sync + Send,
) -> Vec<R> {
    use rayon::prelude::*;
    if workers == 1 || items.len() < 2 {
        return items.iter().map(f).collect();
    }
    if workers == 0 {
        return items.par_iter().map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        Err(_) => items.iter().map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn par_map<T: Sync, R: Send>(
    _workers: usize,
    items: &[T],
    f: impl Fn(&T) -> R + Sync + Send,
) -> Vec<R> {
    items.iter().map(f).collect()
}
