//! Absolute and relative probabilities of alignments and inferred symbols.
//!
//! Alignments are grouped by the exact set of New positions they match.
//! Within a group, an alignment that is a proper part of a cheaper (or equally
//! cheap) elaboration is a fragment of it, not an alternative. An alignment
//! that only pads a surviving member with rows that raise its cost is dropped
//! as well. Relative probabilities are shared among what remains.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::SymbolId;
use crate::engine::ScoredAlignment;

/// `2^-L` for an encoding of `bits` bits.
pub fn absolute_probability(bits: f64) -> f64 {
    (-bits).exp2()
}

/// Normalised `2^-L_j`, computed relative to the smallest `L` so that long
/// encodings do not underflow.
pub fn relative_probabilities(bits: &[f64]) -> Vec<f64> {
    let Some(min) = bits.iter().copied().reduce(f64::min) else {
        return Vec::new();
    };
    let w: Vec<f64> = bits.iter().map(|&b| (min - b).exp2()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityGroup {
    /// Matched New positions shared by every member.
    pub coverage: Vec<usize>,
    /// Members, as indices into the ranked alignment list.
    pub members: Vec<usize>,
    pub relative: Vec<f64>,
    /// Alignments of the group left out as fragments or padding.
    pub fragments: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityReport {
    pub absolute: Vec<f64>,
    pub groups: Vec<ProbabilityGroup>,
}

pub fn build_report(ranked: &[ScoredAlignment]) -> ProbabilityReport {
    let absolute = ranked
        .iter()
        .map(|s| absolute_probability(s.score.n_e))
        .collect();
    let mut by_cov: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (i, s) in ranked.iter().enumerate() {
        let cov = s.alignment.new_coverage();
        if !cov.is_empty() {
            by_cov.entry(cov).or_default().push(i);
        }
    }
    let mut groups: Vec<ProbabilityGroup> = by_cov
        .into_iter()
        .map(|(coverage, idx)| {
            let inside = |i: usize, j: usize| {
                i != j
                    && ranked[i].alignment.is_contained_in(&ranked[j].alignment)
                    && !ranked[j].alignment.is_contained_in(&ranked[i].alignment)
            };
            let n_e = |i: usize| ranked[i].score.n_e;
            // Superseded: some elaboration encodes at least as cheaply.
            let standing: Vec<usize> = idx
                .iter()
                .copied()
                .filter(|&i| !idx.iter().any(|&j| inside(i, j) && n_e(j) <= n_e(i)))
                .collect();
            // Padding: a standing alignment plus rows that only add cost.
            let (members, fragments): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| {
                standing.contains(&i) && !standing.iter().any(|&j| inside(j, i) && n_e(j) < n_e(i))
            });
            let bits: Vec<f64> = members.iter().map(|&i| ranked[i].score.n_e).collect();
            ProbabilityGroup {
                coverage,
                relative: relative_probabilities(&bits),
                members,
                fragments,
            }
        })
        .collect();
    // Largest coverage first, then the group holding the best-ranked alignment.
    groups.sort_by(|a, b| {
        b.coverage
            .len()
            .cmp(&a.coverage.len())
            .then(a.members[0].cmp(&b.members[0]))
    });
    ProbabilityReport { absolute, groups }
}

impl ProbabilityReport {
    /// The group with the widest coverage, ties going to the one holding
    /// the best-ranked alignment.
    pub fn principal_group(&self) -> Option<&ProbabilityGroup> {
        self.groups.first()
    }

    /// Probability of `symbol` being inferred, from the principal group.
    pub fn symbol_probability(&self, ranked: &[ScoredAlignment], symbol: SymbolId) -> f64 {
        let Some(g) = self.principal_group() else {
            return 0.0;
        };
        g.members
            .iter()
            .zip(&g.relative)
            .filter(|(&i, _)| ranked[i].alignment.extract_inferences().contains(&symbol))
            .map(|(_, r)| r)
            .sum()
    }
}
