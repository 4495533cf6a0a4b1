//! Pairwise partial matching of a driving alignment against a target pattern.
//!
//! The driving side is the unified sequence of an alignment. Its elements
//! are only partially ordered (two unmatched cells of different rows have no
//! fixed relative order), so a chain of match points must be consistent with
//! that partial order rather than with unified positions. For a plain
//! sequence this reduces to the usual strictly increasing pairs.
//!
//! Chains are found by sparse dynamic programming over the match points,
//! keeping a beam of partial chains per end point.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::alignment::{Alignment, Node, Origin, RowSource};
use crate::corpus::{Pattern, SymbolId};
use crate::scoring::ChainScorer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchParams {
    pub k_best: usize,
    pub beam: usize,
    pub max_hits_per_symbol: usize,
    pub min_chain_length: usize,
    /// Match against the partial order of the driving alignment instead of
    /// its unified sequence. Admits chains that interleave unmatched cells
    /// of different rows in any consistent way.
    #[serde(default)]
    pub partial_order: bool,
}

impl Default for MatchParams {
    fn default() -> Self {
        Self {
            k_best: 4,
            beam: 50,
            max_hits_per_symbol: 64,
            min_chain_length: 1,
            partial_order: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MatchPoint {
    pub d_pos: usize,
    pub t_pos: usize,
    pub symbol: SymbolId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchChain {
    pub points: Vec<MatchPoint>,
    pub score: f64,
}

/// The driving side prepared for matching: symbols, origins, which nodes
/// are still unmatched, and the order relation between nodes.
#[derive(Debug, Clone)]
pub struct DrivingView {
    symbols: Vec<SymbolId>,
    origins: Vec<Vec<Origin>>,
    fresh: Vec<bool>,
    /// Node already holds an ID symbol of some row.
    has_id: Vec<bool>,
    /// `reach[i]` holds every node that must come after node `i`; `None`
    /// when the nodes are totally ordered by position.
    reach: Option<Vec<Vec<u64>>>,
    index: HashMap<SymbolId, Vec<usize>>,
}

impl DrivingView {
    /// The driving side as its unified sequence, totally ordered.
    pub fn sequential(a: &Alignment) -> Self {
        let mut v = Self::new(a);
        v.reach = None;
        v
    }

    pub fn for_params(a: &Alignment, params: &MatchParams) -> Self {
        if params.partial_order {
            Self::new(a)
        } else {
            Self::sequential(a)
        }
    }

    /// The driving side under the partial order its rows impose.
    pub fn new(a: &Alignment) -> Self {
        let nodes = a.nodes();
        let n = nodes.len();
        let mut row_nodes: Vec<Vec<usize>> = a.rows().iter().map(|r| vec![0; r.len()]).collect();
        for (i, &node) in nodes.iter().enumerate() {
            match node {
                Node::Column(c) => {
                    for cell in &a.columns()[c].cells {
                        row_nodes[cell.row][cell.pos] = i;
                    }
                }
                Node::Cell(cell) => row_nodes[cell.row][cell.pos] = i,
            }
        }
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        for row in &row_nodes {
            for w in row.windows(2) {
                succ[w[0]].push(w[1]);
            }
        }
        let total = (0..n.saturating_sub(1)).all(|i| succ[i].contains(&(i + 1)));
        let reach = if total {
            None
        } else {
            let words = n.div_ceil(64);
            let mut reach = vec![vec![0u64; words]; n];
            for i in (0..n).rev() {
                let mut acc = vec![0u64; words];
                for &j in &succ[i] {
                    debug_assert!(j > i, "unified order must be topological");
                    acc[j / 64] |= 1 << (j % 64);
                    for (x, y) in acc.iter_mut().zip(&reach[j]) {
                        *x |= *y;
                    }
                }
                reach[i] = acc;
            }
            Some(reach)
        };
        let symbols: Vec<SymbolId> = nodes.iter().map(|&nd| a.node_symbol(nd)).collect();
        let mut index: HashMap<SymbolId, Vec<usize>> = HashMap::new();
        for (i, &s) in symbols.iter().enumerate() {
            index.entry(s).or_default().push(i);
        }
        Self {
            symbols,
            origins: nodes.iter().map(|&nd| a.node_origins(nd)).collect(),
            fresh: nodes.iter().map(|nd| matches!(nd, Node::Cell(_))).collect(),
            has_id: nodes
                .iter()
                .map(|&nd| match nd {
                    Node::Column(c) => a.columns()[c]
                        .cells
                        .iter()
                        .any(|x| a.rows()[x.row].is_identification(x.pos)),
                    Node::Cell(x) => a.rows()[x.row].is_identification(x.pos),
                })
                .collect(),
            reach,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn is_totally_ordered(&self) -> bool {
        self.reach.is_none()
    }

    /// Can a point on node `later` follow a point on node `earlier` in one
    /// chain?
    pub fn compatible(&self, earlier: usize, later: usize) -> bool {
        if earlier == later {
            return false;
        }
        match &self.reach {
            None => earlier < later,
            Some(reach) => reach[later][earlier / 64] & (1 << (earlier % 64)) == 0,
        }
    }

    fn d_gap(&self, earlier: usize, later: usize) -> usize {
        earlier.abs_diff(later).saturating_sub(1)
    }
}

/// Equal-symbol pairs between driving and target, minus self-matches and
/// pairs of ID symbols, capped per symbol (points nearest the diagonal kept
/// first).
pub fn find_hits(view: &DrivingView, target: &Pattern, params: &MatchParams) -> Vec<MatchPoint> {
    let source = RowSource::Old(target.id);
    let mut by_symbol: HashMap<SymbolId, Vec<MatchPoint>> = HashMap::new();
    for (t, &s) in target.symbols.iter().enumerate() {
        let Some(ds) = view.index.get(&s) else {
            continue;
        };
        let t_id = target.is_identification(t);
        for &d in ds {
            if view.origins[d].contains(&(source, t)) || (t_id && view.has_id[d]) {
                continue;
            }
            by_symbol.entry(s).or_default().push(MatchPoint {
                d_pos: d,
                t_pos: t,
                symbol: s,
            });
        }
    }
    let dl = view.len().max(1) as f64;
    let tl = target.len().max(1) as f64;
    let mut hits = Vec::new();
    for (_, mut group) in by_symbol {
        if group.len() > params.max_hits_per_symbol {
            group.sort_by(|a, b| {
                let da = (a.d_pos as f64 * tl / dl - a.t_pos as f64).abs();
                let db = (b.d_pos as f64 * tl / dl - b.t_pos as f64).abs();
                da.total_cmp(&db)
                    .then((a.t_pos, a.d_pos).cmp(&(b.t_pos, b.d_pos)))
            });
            group.truncate(params.max_hits_per_symbol);
        }
        hits.extend(group);
    }
    hits.sort_by_key(|h| (h.t_pos, h.d_pos));
    hits
}

/// Chains share prefixes: each link points at its predecessor in an arena.
#[derive(Clone, Copy)]
struct Link {
    hit: u32,
    prev: u32,
}

const NO_LINK: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct Partial {
    score: f64,
    len: u32,
    fresh: bool,
    tail: u32,
}

impl Partial {
    fn hits(&self, links: &[Link]) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len as usize);
        let mut cur = self.tail;
        while cur != NO_LINK {
            let link = links[cur as usize];
            out.push(link.hit as usize);
            cur = link.prev;
        }
        out.reverse();
        out
    }
}

fn better(a: &Partial, b: &Partial) -> Ordering {
    b.score.total_cmp(&a.score).then(b.len.cmp(&a.len))
}

/// Whether `p` would survive in a beam of the given width.
fn admits(beam: &[Partial], p: &Partial, width: usize) -> bool {
    beam.len() < width || better(p, &beam[width - 1]) == Ordering::Less
}

fn push_beam(beam: &mut Vec<Partial>, p: Partial, width: usize) {
    let at = beam
        .iter()
        .position(|q| better(&p, q) == Ordering::Less)
        .unwrap_or(beam.len());
    if at < width {
        beam.insert(at, p);
        beam.truncate(width);
    }
}

/// Total gap span of a chain in both coordinates, used as a tie-break.
fn gap_span(points: &[MatchPoint]) -> usize {
    points
        .windows(2)
        .map(|w| (w[1].t_pos - w[0].t_pos) + w[0].d_pos.abs_diff(w[1].d_pos))
        .sum()
}

fn rank_chains(a: &MatchChain, b: &MatchChain) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(b.points.len().cmp(&a.points.len()))
        .then(gap_span(&a.points).cmp(&gap_span(&b.points)))
        .then_with(|| {
            let ka = a.points.iter().map(|p| (p.d_pos, p.t_pos));
            let kb = b.points.iter().map(|p| (p.d_pos, p.t_pos));
            ka.cmp(kb)
        })
}

/// Score of a chain given as points sorted by target position.
pub fn chain_score<S: ChainScorer + ?Sized>(
    view: &DrivingView,
    points: &[MatchPoint],
    scorer: &S,
) -> f64 {
    let mut score = 0.0;
    for (i, p) in points.iter().enumerate() {
        if i == 0 {
            score = scorer.symbol_gain(p.symbol);
        } else {
            score = step(view, scorer, score, &points[i - 1], p);
        }
    }
    score
}

fn step<S: ChainScorer + ?Sized>(
    view: &DrivingView,
    scorer: &S,
    prev: f64,
    g: &MatchPoint,
    h: &MatchPoint,
) -> f64 {
    let dt = h.t_pos - g.t_pos - 1;
    let dd = view.d_gap(g.d_pos, h.d_pos);
    prev + scorer.symbol_gain(h.symbol) - scorer.gap_cost(dt) - scorer.gap_cost(dd)
}

/// The best order-consistent chains over `hits`, each with at least one
/// point on a not-yet-matched driving node. Chains that are subsets of a
/// better chain already chosen are skipped.
pub fn k_best_chains<S: ChainScorer + ?Sized>(
    view: &DrivingView,
    hits: &[MatchPoint],
    params: &MatchParams,
    scorer: &S,
) -> Vec<MatchChain> {
    let width = params.beam.max(1);
    let mut links: Vec<Link> = Vec::with_capacity(hits.len() * 4);
    // Per hit: beams of chains without and with a fresh point.
    let mut stale: Vec<Vec<Partial>> = Vec::with_capacity(hits.len());
    let mut fresh: Vec<Vec<Partial>> = Vec::with_capacity(hits.len());
    for (hi, h) in hits.iter().enumerate() {
        let h_fresh = view.fresh[h.d_pos];
        let mut out_stale = Vec::new();
        let mut out_fresh = Vec::new();
        links.push(Link {
            hit: hi as u32,
            prev: NO_LINK,
        });
        let single = Partial {
            score: scorer.symbol_gain(h.symbol),
            len: 1,
            fresh: h_fresh,
            tail: (links.len() - 1) as u32,
        };
        if h_fresh {
            push_beam(&mut out_fresh, single, width);
        } else {
            push_beam(&mut out_stale, single, width);
        }
        for (gi, g) in hits[..hi].iter().enumerate() {
            if g.t_pos >= h.t_pos || !view.compatible(g.d_pos, h.d_pos) {
                continue;
            }
            // Every extension through `g` shifts its partial's score by about
            // the same amount and each source beam is sorted, so once the
            // receiving beam is full the rest of a source beam can be skipped.
            let delta = step(view, scorer, 0.0, g, h);
            for src in [&stale[gi], &fresh[gi]] {
                for p in src {
                    let into_fresh = p.fresh || h_fresh;
                    let target = if into_fresh {
                        &mut out_fresh
                    } else {
                        &mut out_stale
                    };
                    if target.len() >= width && p.score + delta < target[width - 1].score - 1e-9 {
                        break;
                    }
                    let mut next = Partial {
                        score: step(view, scorer, p.score, g, h),
                        len: p.len + 1,
                        fresh: into_fresh,
                        tail: NO_LINK,
                    };
                    if !admits(target, &next, width) {
                        continue;
                    }
                    if view.reach.is_some() && !all_compatible(view, hits, &links, p, h.d_pos) {
                        continue;
                    }
                    links.push(Link {
                        hit: hi as u32,
                        prev: p.tail,
                    });
                    next.tail = (links.len() - 1) as u32;
                    push_beam(target, next, width);
                }
            }
        }
        stale.push(out_stale);
        fresh.push(out_fresh);
    }

    // Same order as sorting every chain by `rank_chains`, but chains are
    // only built one (score, length) tie group at a time, and only the head
    // of the pool is sorted unless the search runs past it.
    let mut pool: Vec<Partial> = fresh
        .iter()
        .flatten()
        .filter(|p| p.len as usize >= params.min_chain_length)
        .copied()
        .collect();
    let mut sorted = pool.len().min(params.k_best.saturating_mul(8).max(64));
    if sorted < pool.len() {
        pool.select_nth_unstable_by(sorted, better);
    }
    pool[..sorted].sort_by(better);
    let mut chosen: Vec<MatchChain> = Vec::new();
    let mut i = 0;
    while i < pool.len() && chosen.len() < params.k_best {
        let mut j = i + 1;
        loop {
            if j == sorted && sorted < pool.len() {
                pool[sorted..].sort_by(better);
                sorted = pool.len();
            }
            if j < pool.len() && better(&pool[i], &pool[j]) == Ordering::Equal {
                j += 1;
            } else {
                break;
            }
        }
        let mut group: Vec<MatchChain> = pool[i..j]
            .iter()
            .map(|p| MatchChain {
                points: p.hits(&links).into_iter().map(|k| hits[k]).collect(),
                score: p.score,
            })
            .collect();
        group.sort_by(rank_chains);
        for c in group {
            if chosen.len() >= params.k_best {
                break;
            }
            let subsumed = chosen
                .iter()
                .any(|k| c.points.iter().all(|p| k.points.contains(p)));
            if !subsumed {
                chosen.push(c);
            }
        }
        i = j;
    }
    chosen
}

fn all_compatible(
    view: &DrivingView,
    hits: &[MatchPoint],
    links: &[Link],
    p: &Partial,
    later: usize,
) -> bool {
    let mut cur = p.tail;
    while cur != NO_LINK {
        let link = links[cur as usize];
        if !view.compatible(hits[link.hit as usize].d_pos, later) {
            return false;
        }
        cur = link.prev;
    }
    true
}

/// Extends `driving` with one new row per chosen chain against `target`.
pub fn match_pair<S: ChainScorer + ?Sized>(
    driving: &Alignment,
    view: &DrivingView,
    target: &Pattern,
    params: &MatchParams,
    scorer: &S,
) -> Vec<Alignment> {
    let hits = find_hits(view, target, params);
    k_best_chains(view, &hits, params, scorer)
        .into_iter()
        .filter_map(|chain| {
            let pairs: Vec<(usize, usize)> =
                chain.points.iter().map(|p| (p.d_pos, p.t_pos)).collect();
            let extended = driving.extend(target, &pairs);
            debug_assert!(extended.is_ok(), "chain should be legal: {extended:?}");
            extended.ok()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Corpus, PatternId};
    use crate::scoring::{CostConfig, CostModel};

    fn setup(old: &[&str], new: &str) -> (Corpus, Vec<SymbolId>, CostModel) {
        let mut c = Corpus::new();
        for l in old {
            let t: Vec<&str> = l.split_whitespace().collect();
            c.add_pattern(&t, 0, 0, 1).unwrap();
        }
        let t: Vec<&str> = new.split_whitespace().collect();
        let n = c.intern_all(&t).unwrap();
        let m = CostModel::build(&c, CostConfig::default());
        (c, n, m)
    }

    #[test]
    fn hits_are_exhaustive() {
        let (c, n, _) = setup(&["b a"], "a b");
        let a = Alignment::singleton(&n);
        let view = DrivingView::new(&a);
        let p = c.pattern(PatternId(0));
        let hits = find_hits(&view, &p, &MatchParams::default());
        let pairs: Vec<_> = hits.iter().map(|h| (h.d_pos, h.t_pos)).collect();
        assert_eq!(pairs, vec![(1, 0), (0, 1)]);
    }

    #[test]
    fn hits_exclude_self_matches() {
        let (c, n, _) = setup(&["X a 0 #X"], "0");
        let p = c.pattern(PatternId(0)).clone();
        let a = Alignment::singleton(&n).extend(&p, &[(0, 2)]).unwrap();
        let view = DrivingView::new(&a);
        let hits = find_hits(&view, &p, &MatchParams::default());
        for h in &hits {
            let origins = &view.origins[h.d_pos];
            assert!(!origins.contains(&(RowSource::Old(p.id), h.t_pos)));
        }
        // X, a, #X of the first appearance can only match other positions:
        // none exist, and "0" is in a column with the same origin.
        assert!(hits.is_empty());
    }

    #[test]
    fn hit_cap() {
        let a100 = vec!["a"; 100].join(" ");
        let (c, n, _) = setup(&[&a100], &a100);
        let view = DrivingView::new(&Alignment::singleton(&n));
        let p = c.pattern(PatternId(0));
        let hits = find_hits(&view, &p, &MatchParams::default());
        assert_eq!(hits.len(), 64);
    }

    #[test]
    fn bridges_single_gap() {
        let (c, n, m) = setup(&["a b c"], "a c");
        let view = DrivingView::new(&Alignment::singleton(&n));
        let p = c.pattern(PatternId(0));
        let hits = find_hits(&view, &p, &MatchParams::default());
        let chains = k_best_chains(&view, &hits, &MatchParams::default(), &m);
        let best: Vec<_> = chains[0]
            .points
            .iter()
            .map(|p| (p.d_pos, p.t_pos))
            .collect();
        assert_eq!(best, vec![(0, 0), (1, 2)]);
    }

    #[test]
    fn no_hits_no_chains() {
        let (c, n, m) = setup(&["a b"], "x y");
        let a = Alignment::singleton(&n);
        let view = DrivingView::new(&a);
        let out = match_pair(
            &a,
            &view,
            c.pattern(PatternId(0)),
            &MatchParams::default(),
            &m,
        );
        assert!(out.is_empty());
    }

    #[test]
    fn half_adder_row_match() {
        let (c, n, m) = setup(&["A 0 1 S 1 C 0"], "A 0 1 S C");
        let a = Alignment::singleton(&n);
        let view = DrivingView::new(&a);
        let out = match_pair(
            &a,
            &view,
            c.pattern(PatternId(0)),
            &MatchParams::default(),
            &m,
        );
        assert_eq!(out[0].columns().len(), 5);
        assert_eq!(c.render(&out[0].extract_inferences()), "1 0");
    }

    #[test]
    fn partial_order_allows_cross_row_chain() {
        // Unified "p X #X q" where X/#X come from a row unrelated to p/q's
        // row: a target "X p q #X" can match all four even though unified
        // positions are not increasing.
        let (c, n, m) = setup(&["X #X", "X p q #X"], "p q");
        let xr = c.pattern(PatternId(0)).clone();
        let a = Alignment::singleton(&n).extend(&xr, &[]).unwrap();
        assert_eq!(c.render(&a.unify().symbols()), "p q X #X");
        let view = DrivingView::new(&a);
        assert!(!view.is_totally_ordered());
        let target = c.pattern(PatternId(1));
        let out = match_pair(&a, &view, target, &MatchParams::default(), &m);
        assert_eq!(out[0].columns().len(), 4);
        out[0].check_invariants().unwrap();
    }
}
