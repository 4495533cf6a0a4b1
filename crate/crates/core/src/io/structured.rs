//! Machine-readable run output (JSON).
//!
//! Rows are listed in display order and cells refer to those display
//! indices. Group members are ranks among the reported alignments.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::alignment::{Alignment, RowSource};
use crate::corpus::{Corpus, SymbolId};
use crate::engine::{RunResult, RunStatus};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowDoc {
    /// `None` for the New row.
    pub pattern: Option<u32>,
    pub appearance: u32,
    pub symbols: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnDoc {
    pub symbol: String,
    /// `[row, position]` pairs.
    pub cells: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentDoc {
    pub rank: usize,
    pub rows: Vec<RowDoc>,
    pub columns: Vec<ColumnDoc>,
    pub unified: Vec<String>,
    pub n_r: f64,
    pub n_e: f64,
    pub gap_penalty: f64,
    pub cs: f64,
    pub matched_new_count: usize,
    pub code: Vec<String>,
    pub inferences: Vec<String>,
    pub residue: Vec<String>,
    pub p: f64,
    pub r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDoc {
    pub coverage: Vec<usize>,
    pub members: Vec<usize>,
    pub relative: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDoc {
    pub schema_version: u32,
    pub status: RunStatus,
    pub iterations: usize,
    pub alignments_formed: usize,
    pub new: Vec<String>,
    pub alignments: Vec<AlignmentDoc>,
    pub groups: Vec<GroupDoc>,
    /// Inference probabilities from the principal group, when requested.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub symbol_probabilities: BTreeMap<String, f64>,
}

fn names(corpus: &Corpus, s: &[SymbolId]) -> Vec<String> {
    s.iter().map(|&x| corpus.name(x).to_string()).collect()
}

/// Rows in display order and columns over display indices.
pub fn alignment_layout(a: &Alignment, corpus: &Corpus) -> (Vec<RowDoc>, Vec<ColumnDoc>) {
    let display = a.display_row_order();
    let mut slot_of = vec![0; display.len()];
    for (d, &r) in display.iter().enumerate() {
        slot_of[r] = d;
    }
    let rows = display
        .iter()
        .map(|&r| {
            let row = &a.rows()[r];
            RowDoc {
                pattern: match row.source {
                    RowSource::New => None,
                    RowSource::Old(p) => Some(p.0),
                },
                appearance: row.appearance,
                symbols: names(corpus, &row.symbols),
            }
        })
        .collect();
    let columns = a
        .columns()
        .iter()
        .map(|c| {
            let mut cells: Vec<[usize; 2]> =
                c.cells.iter().map(|x| [slot_of[x.row], x.pos]).collect();
            cells.sort_unstable();
            ColumnDoc {
                symbol: corpus.name(c.symbol).to_string(),
                cells,
            }
        })
        .collect();
    (rows, columns)
}

impl RunDoc {
    pub fn from_result(result: &RunResult, new: &[SymbolId], corpus: &Corpus) -> Self {
        let groups = &result.probabilities.groups;
        let relative_of = |rank: usize| {
            groups.iter().find_map(|g| {
                g.members
                    .iter()
                    .position(|&m| m == rank)
                    .map(|k| g.relative[k])
            })
        };
        let alignments = result
            .alignments
            .iter()
            .enumerate()
            .map(|(rank, ra)| {
                let (rows, columns) = alignment_layout(&ra.alignment, corpus);
                AlignmentDoc {
                    rank,
                    rows,
                    columns,
                    unified: names(corpus, &ra.alignment.unify().symbols()),
                    n_r: ra.score.n_r,
                    n_e: ra.score.n_e,
                    gap_penalty: ra.score.gap_penalty,
                    cs: ra.score.cs,
                    matched_new_count: ra.score.matched_new_count,
                    code: names(corpus, &ra.code),
                    inferences: names(corpus, &ra.inferences),
                    residue: names(corpus, &ra.residue),
                    p: ra.probability,
                    r: relative_of(rank),
                }
            })
            .collect();
        RunDoc {
            schema_version: SCHEMA_VERSION,
            status: result.status,
            iterations: result.stats.iterations,
            alignments_formed: result.stats.alignments_formed,
            new: names(corpus, new),
            alignments,
            groups: groups
                .iter()
                .map(|g| GroupDoc {
                    coverage: g.coverage.clone(),
                    members: g.members.clone(),
                    relative: g.relative.clone(),
                })
                .collect(),
            symbol_probabilities: BTreeMap::new(),
        }
    }
}

pub fn render_structured(result: &RunResult, new: &[SymbolId], corpus: &Corpus) -> String {
    RunDoc::from_result(result, new, corpus).to_json()
}

impl RunDoc {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document is always serialisable");
        s.push('\n');
        s
    }
}
