//! Multiple alignments: rows, match columns, unification, codes and inferences.
//!
//! Row 0 is always the New pattern. Every other row is one appearance of an
//! Old pattern; the same pattern may appear several times, but a symbol
//! occurrence is never matched with itself, which is tracked through the
//! `(source, position)` origins of every cell.
//!
//! Columns form a partial order (each row orders the columns it takes part
//! in). They are stored in one deterministic topological order, and the
//! unified sequence interleaves unmatched cells between them.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Pattern, PatternId, SymbolId};
use crate::error::{Error, Result};

/// Where a row's symbols come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RowSource {
    New,
    Old(PatternId),
}

impl RowSource {
    /// Sort/display rank: New first, then pattern id.
    fn rank(self) -> u64 {
        match self {
            RowSource::New => 0,
            RowSource::Old(p) => 1 + p.0 as u64,
        }
    }
}

/// One symbol occurrence in the New pattern or in a stored pattern.
pub type Origin = (RowSource, usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub source: RowSource,
    pub appearance: u32,
    pub symbols: Arc<[SymbolId]>,
    pub id_prefix_len: usize,
    pub id_suffix_len: usize,
}

impl Row {
    pub fn new_pattern(symbols: &[SymbolId]) -> Self {
        Row {
            source: RowSource::New,
            appearance: 0,
            symbols: symbols.into(),
            id_prefix_len: 0,
            id_suffix_len: 0,
        }
    }

    pub fn old(pattern: &Pattern, appearance: u32) -> Self {
        Row {
            source: RowSource::Old(pattern.id),
            appearance,
            symbols: pattern.symbols.as_slice().into(),
            id_prefix_len: pattern.id_prefix_len,
            id_suffix_len: pattern.id_suffix_len,
        }
    }

    pub fn is_identification(&self, pos: usize) -> bool {
        pos < self.id_prefix_len || pos >= self.symbols.len() - self.id_suffix_len
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub pos: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub symbol: SymbolId,
    /// Sorted by row.
    pub cells: Vec<Cell>,
}

impl Column {
    pub fn has_row(&self, row: usize) -> bool {
        self.cells.iter().any(|c| c.row == row)
    }
}

/// An element of the unified sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node {
    Column(usize),
    Cell(Cell),
}

/// Structural identity used for deduplication: rows relabelled in a
/// canonical order, columns as sorted cell lists.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalKey {
    rows: Vec<RowSource>,
    columns: Vec<Vec<(u32, u32)>>,
}

impl CanonicalKey {
    /// Stable text form: row sources (`N` for New, `p<id>` for patterns)
    /// then columns as `row.pos` cells joined by `=`.
    pub fn fingerprint(&self) -> String {
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| match r {
                RowSource::New => "N".to_string(),
                RowSource::Old(p) => format!("p{}", p.0),
            })
            .collect();
        let cols: Vec<String> = self
            .columns
            .iter()
            .map(|c| {
                c.iter()
                    .map(|(r, p)| format!("{r}.{p}"))
                    .collect::<Vec<_>>()
                    .join("=")
            })
            .collect();
        format!("{} | {}", rows.join(" "), cols.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnifiedItem {
    pub symbol: SymbolId,
    pub origins: Vec<Origin>,
    pub matched: bool,
    pub from_new: bool,
}

/// An alignment collapsed into one sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnifiedSequence {
    pub items: Vec<UnifiedItem>,
}

impl UnifiedSequence {
    pub fn symbols(&self) -> Vec<SymbolId> {
        self.items.iter().map(|i| i.symbol).collect()
    }

    /// Items made only of Old contents symbols: anything touching New or an
    /// ID symbol is dropped.
    pub fn contents(&self, corpus: &Corpus) -> Vec<SymbolId> {
        self.items
            .iter()
            .filter(|item| {
                item.origins.iter().all(|&(src, pos)| match src {
                    RowSource::Old(p) => !corpus.pattern(p).is_identification(pos),
                    RowSource::New => false,
                })
            })
            .map(|i| i.symbol)
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Alignment {
    rows: Vec<Row>,
    columns: Vec<Column>,
    slots: Vec<Vec<Option<u32>>>,
    unified: Vec<Node>,
}

impl PartialEq for Alignment {
    fn eq(&self, other: &Self) -> bool {
        self.canonical_key() == other.canonical_key()
    }
}

impl Eq for Alignment {}

impl Alignment {
    /// The New pattern alone: one row, no columns.
    pub fn singleton(new: &[SymbolId]) -> Self {
        Self::from_parts(vec![Row::new_pattern(new)], Vec::new())
            .expect("a single row is always legal")
    }

    /// Builds and validates an alignment from rows and unordered columns.
    pub fn from_parts(rows: Vec<Row>, columns: Vec<Vec<Cell>>) -> Result<Self> {
        if rows.is_empty() || rows[0].source != RowSource::New {
            return Err(Error::Legality("row 0 must be the New pattern".into()));
        }
        if rows[1..].iter().any(|r| r.source == RowSource::New) {
            return Err(Error::Legality(
                "only row 0 may hold the New pattern".into(),
            ));
        }
        let mut slots: Vec<Vec<Option<u32>>> = rows.iter().map(|r| vec![None; r.len()]).collect();
        let mut cols = Vec::with_capacity(columns.len());
        for (ci, mut cells) in columns.into_iter().enumerate() {
            if cells.len() < 2 {
                return Err(Error::Legality(format!(
                    "column {ci} has fewer than two cells"
                )));
            }
            cells.sort();
            let mut symbol = None;
            for (k, c) in cells.iter().enumerate() {
                let row = rows
                    .get(c.row)
                    .ok_or_else(|| Error::Legality(format!("cell {c:?} names a missing row")))?;
                let s = *row
                    .symbols
                    .get(c.pos)
                    .ok_or_else(|| Error::Legality(format!("cell {c:?} lies outside its row")))?;
                match symbol {
                    None => symbol = Some(s),
                    Some(prev) if prev != s => {
                        return Err(Error::Legality(format!(
                            "column {ci} mixes different symbols at {c:?}"
                        )))
                    }
                    _ => {}
                }
                if k > 0 && cells[k - 1].row == c.row {
                    return Err(Error::Legality(format!(
                        "column {ci} has two cells in row {}",
                        c.row
                    )));
                }
                if slots[c.row][c.pos].is_some() {
                    return Err(Error::Legality(format!("cell {c:?} is in two columns")));
                }
                slots[c.row][c.pos] = Some(ci as u32);
            }
            // A column stands for one pattern; two ID symbols in it would
            // name two patterns as the same thing.
            if cells
                .iter()
                .filter(|c| rows[c.row].is_identification(c.pos))
                .count()
                > 1
            {
                return Err(Error::Legality(format!(
                    "column {ci} holds two identification symbols"
                )));
            }
            for (i, a) in cells.iter().enumerate() {
                for b in &cells[i + 1..] {
                    if rows[a.row].source == rows[b.row].source && a.pos == b.pos {
                        return Err(Error::Legality(format!(
                            "self-match: {a:?} and {b:?} are the same symbol occurrence"
                        )));
                    }
                }
            }
            cols.push(Column {
                symbol: symbol.expect("non-empty column"),
                cells,
            });
        }

        // Order columns topologically. Each row orders the columns it meets.
        let n = cols.len();
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut indeg = vec![0usize; n];
        for row_slots in &slots {
            let mut prev: Option<usize> = None;
            for &slot in row_slots.iter().flatten() {
                let c = slot as usize;
                if let Some(p) = prev {
                    succ[p].push(c);
                    indeg[c] += 1;
                }
                prev = Some(c);
            }
        }
        let key = |c: usize| {
            let first = cols[c].cells[0];
            (first.row, first.pos, c)
        };
        let mut heap: BinaryHeap<Reverse<(usize, usize, usize)>> = (0..n)
            .filter(|&c| indeg[c] == 0)
            .map(|c| Reverse(key(c)))
            .collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse((_, _, c))) = heap.pop() {
            order.push(c);
            for &s in &succ[c] {
                indeg[s] -= 1;
                if indeg[s] == 0 {
                    heap.push(Reverse(key(s)));
                }
            }
        }
        if order.len() != n {
            return Err(Error::Legality(
                "columns cross: no consistent left-to-right order".into(),
            ));
        }
        let mut remap = vec![0u32; n];
        for (new_idx, &old) in order.iter().enumerate() {
            remap[old] = new_idx as u32;
        }
        let mut ordered: Vec<Option<Column>> = cols.into_iter().map(Some).collect();
        let columns: Vec<Column> = order.iter().map(|&c| ordered[c].take().unwrap()).collect();
        for row_slots in &mut slots {
            for s in row_slots.iter_mut().flatten() {
                *s = remap[*s as usize];
            }
        }

        let unified = interleave(&rows, &columns, &slots);
        Ok(Self {
            rows,
            columns,
            slots,
            unified,
        })
    }

    /// Adds one appearance of `target` as a new row. Each chain point pairs
    /// a unified-sequence index of `self` with a position in `target`.
    pub fn extend(&self, target: &Pattern, chain: &[(usize, usize)]) -> Result<Self> {
        let source = RowSource::Old(target.id);
        let appearance = self.rows.iter().filter(|r| r.source == source).count() as u32;
        let new_row = self.rows.len();
        let mut rows = self.rows.clone();
        rows.push(Row::old(target, appearance));
        let mut columns: Vec<Vec<Cell>> = self.columns.iter().map(|c| c.cells.clone()).collect();
        for &(d, t) in chain {
            let node = *self
                .unified
                .get(d)
                .ok_or_else(|| Error::Legality(format!("driving position {d} out of range")))?;
            let cell = Cell {
                row: new_row,
                pos: t,
            };
            match node {
                Node::Column(ci) => {
                    if columns[ci].iter().any(|c| c.row == new_row) {
                        return Err(Error::Legality(format!(
                            "pair ({d}, {t}) reuses a column already holding the new row"
                        )));
                    }
                    columns[ci].push(cell)
                }
                Node::Cell(c) => columns.push(vec![c, cell]),
            }
        }
        Self::from_parts(rows, columns).map_err(|e| match e {
            Error::Legality(m) => Error::Legality(format!("chain {chain:?}: {m}")),
            other => other,
        })
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    /// Unified order of columns and unmatched cells.
    pub fn nodes(&self) -> &[Node] {
        &self.unified
    }

    pub fn column_of(&self, cell: Cell) -> Option<usize> {
        self.slots[cell.row][cell.pos].map(|c| c as usize)
    }

    pub fn new_row(&self) -> &Row {
        &self.rows[0]
    }

    pub fn node_symbol(&self, node: Node) -> SymbolId {
        match node {
            Node::Column(c) => self.columns[c].symbol,
            Node::Cell(c) => self.rows[c.row].symbols[c.pos],
        }
    }

    pub fn cell_origin(&self, cell: Cell) -> Origin {
        (self.rows[cell.row].source, cell.pos)
    }

    pub fn node_origins(&self, node: Node) -> Vec<Origin> {
        match node {
            Node::Column(c) => self.columns[c]
                .cells
                .iter()
                .map(|&cell| self.cell_origin(cell))
                .collect(),
            Node::Cell(cell) => vec![self.cell_origin(cell)],
        }
    }

    /// New positions that lie in some column, ascending.
    pub fn new_coverage(&self) -> Vec<usize> {
        self.slots[0]
            .iter()
            .enumerate()
            .filter_map(|(p, s)| s.map(|_| p))
            .collect()
    }

    pub fn matched_new_count(&self) -> usize {
        self.slots[0].iter().filter(|s| s.is_some()).count()
    }

    pub fn covers_all_new(&self) -> bool {
        self.slots[0].iter().all(Option::is_some)
    }

    pub fn unify(&self) -> UnifiedSequence {
        let items = self
            .unified
            .iter()
            .map(|&node| UnifiedItem {
                symbol: self.node_symbol(node),
                origins: self.node_origins(node),
                matched: matches!(node, Node::Column(_)),
                from_new: match node {
                    Node::Column(c) => self.columns[c].has_row(0),
                    Node::Cell(c) => c.row == 0,
                },
            })
            .collect();
        UnifiedSequence { items }
    }

    /// Unmatched symbols of Old rows, in unified order.
    pub fn derive_code(&self) -> Vec<SymbolId> {
        self.unified
            .iter()
            .filter_map(|&node| match node {
                Node::Cell(c) if c.row != 0 => Some(self.node_symbol(node)),
                _ => None,
            })
            .collect()
    }

    /// Unmatched New symbols, in New order.
    pub fn residue(&self) -> Vec<SymbolId> {
        self.slots[0]
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_none())
            .map(|(p, _)| self.rows[0].symbols[p])
            .collect()
    }

    /// Old symbols in no column that contains a New cell, in unified order.
    pub fn extract_inferences(&self) -> Vec<SymbolId> {
        self.unified
            .iter()
            .filter(|&&node| match node {
                Node::Column(c) => !self.columns[c].has_row(0),
                Node::Cell(c) => c.row != 0,
            })
            .map(|&node| self.node_symbol(node))
            .collect()
    }

    /// Lengths of maximal unmatched runs strictly between a row's first and
    /// last matched positions.
    pub fn gap_runs(&self, row: usize) -> Vec<usize> {
        let matched: Vec<usize> = self.slots[row]
            .iter()
            .enumerate()
            .filter_map(|(p, s)| s.map(|_| p))
            .collect();
        matched
            .windows(2)
            .map(|w| w[1] - w[0] - 1)
            .filter(|&g| g > 0)
            .collect()
    }

    pub fn canonical_key(&self) -> CanonicalKey {
        let mut signatures: Vec<(u64, Vec<(usize, Vec<(u64, usize)>)>, usize)> =
            (1..self.rows.len())
                .map(|r| {
                    let mut sig: Vec<(usize, Vec<(u64, usize)>)> = Vec::new();
                    for (p, slot) in self.slots[r].iter().enumerate() {
                        if let Some(c) = slot {
                            let mut partners: Vec<(u64, usize)> = self.columns[*c as usize]
                                .cells
                                .iter()
                                .filter(|cell| cell.row != r)
                                .map(|cell| (self.rows[cell.row].source.rank(), cell.pos))
                                .collect();
                            partners.sort_unstable();
                            sig.push((p, partners));
                        }
                    }
                    (self.rows[r].source.rank(), sig, r)
                })
                .collect();
        signatures.sort();
        let mut label = vec![0u32; self.rows.len()];
        let mut sources = vec![RowSource::New];
        for (i, (_, _, r)) in signatures.iter().enumerate() {
            label[*r] = i as u32 + 1;
            sources.push(self.rows[*r].source);
        }
        let mut columns: Vec<Vec<(u32, u32)>> = self
            .columns
            .iter()
            .map(|col| {
                let mut v: Vec<(u32, u32)> = col
                    .cells
                    .iter()
                    .map(|c| (label[c.row], c.pos as u32))
                    .collect();
                v.sort_unstable();
                v
            })
            .collect();
        columns.sort();
        CanonicalKey {
            rows: sources,
            columns,
        }
    }

    /// Display order: New first, then by first column, pattern id, appearance.
    pub fn display_row_order(&self) -> Vec<usize> {
        let first_col = |r: usize| {
            self.slots[r]
                .iter()
                .flatten()
                .map(|&c| c as usize)
                .min()
                .unwrap_or(usize::MAX)
        };
        let mut rest: Vec<usize> = (1..self.rows.len()).collect();
        rest.sort_by_key(|&r| {
            (
                first_col(r),
                self.rows[r].source.rank(),
                self.rows[r].appearance,
            )
        });
        std::iter::once(0).chain(rest).collect()
    }

    /// True when every row of `self` maps to a distinct row of `other` with
    /// the same source such that each column of `self` lands inside one
    /// column of `other`.
    pub fn is_contained_in(&self, other: &Alignment) -> bool {
        if self.rows.len() > other.rows.len() || self.columns.len() > other.columns.len() {
            return false;
        }
        // A row can only map onto a row where all its matched cells are
        // matched too.
        let fits = |r: usize, o: usize| {
            self.slots[r]
                .iter()
                .zip(&other.slots[o])
                .all(|(mine, theirs)| mine.is_none() || theirs.is_some())
        };
        if !fits(0, 0) {
            return false;
        }
        let mut candidates: Vec<Vec<usize>> = vec![vec![0]];
        for r in 1..self.rows.len() {
            let c: Vec<usize> = (1..other.rows.len())
                .filter(|&o| other.rows[o].source == self.rows[r].source && fits(r, o))
                .collect();
            if c.is_empty() {
                return false;
            }
            candidates.push(c);
        }
        // Each column is checked once its last row has been mapped.
        let mut closing: Vec<Vec<usize>> = vec![Vec::new(); self.rows.len()];
        for (ci, col) in self.columns.iter().enumerate() {
            closing[col.cells.last().expect("non-empty column").row].push(ci);
        }
        let mut mapping = vec![usize::MAX; self.rows.len()];
        let mut used = vec![false; other.rows.len()];
        mapping[0] = 0;
        used[0] = true;
        self.column_fits(other, &closing[0], &mapping)
            && self.contain_search(other, 1, &candidates, &closing, &mut mapping, &mut used)
    }

    fn column_fits(&self, other: &Alignment, cols: &[usize], mapping: &[usize]) -> bool {
        cols.iter().all(|&ci| {
            let mut target = None;
            self.columns[ci]
                .cells
                .iter()
                .all(|c| match other.slots[mapping[c.row]][c.pos] {
                    None => false,
                    Some(oc) => *target.get_or_insert(oc) == oc,
                })
        })
    }

    fn contain_search(
        &self,
        other: &Alignment,
        r: usize,
        candidates: &[Vec<usize>],
        closing: &[Vec<usize>],
        mapping: &mut [usize],
        used: &mut [bool],
    ) -> bool {
        if r == self.rows.len() {
            return true;
        }
        for &o in &candidates[r] {
            if used[o] {
                continue;
            }
            used[o] = true;
            mapping[r] = o;
            if self.column_fits(other, &closing[r], mapping)
                && self.contain_search(other, r + 1, candidates, closing, mapping, used)
            {
                return true;
            }
            used[o] = false;
        }
        mapping[r] = usize::MAX;
        false
    }

    /// Number of appearances per Old pattern.
    pub fn appearances(&self) -> BTreeMap<PatternId, usize> {
        let mut m = BTreeMap::new();
        for r in &self.rows[1..] {
            if let RowSource::Old(p) = r.source {
                *m.entry(p).or_insert(0) += 1;
            }
        }
        m
    }

    /// Checks every structural invariant; used by tests and debug assertions.
    pub fn check_invariants(&self) -> Result<()> {
        // Order consistency along every row.
        for (r, row_slots) in self.slots.iter().enumerate() {
            let cols: Vec<u32> = row_slots.iter().flatten().copied().collect();
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Legality(format!("row {r} crosses column order")));
            }
        }
        for (ci, col) in self.columns.iter().enumerate() {
            let mut seen: HashMap<Origin, ()> = HashMap::new();
            for &cell in &col.cells {
                if seen.insert(self.cell_origin(cell), ()).is_some() {
                    return Err(Error::Legality(format!(
                        "column {ci} matches an origin with itself"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Places unmatched cells between columns: a cell goes right after its
/// row's preceding column, or right before the row's first column. Within a
/// gap, Old cells that close their row come first, then New cells, then Old
/// cells that open their row, each by (row, position). A constituent thus
/// ends right after its last matched symbol.
fn interleave(rows: &[Row], columns: &[Column], slots: &[Vec<Option<u32>>]) -> Vec<Node> {
    let ncols = columns.len();
    let mut gaps: Vec<Vec<(u8, Cell)>> = vec![Vec::new(); ncols + 1];
    for (r, row) in rows.iter().enumerate() {
        let first = slots[r].iter().flatten().next().copied();
        let mut prev: Option<u32> = None;
        for p in 0..row.len() {
            match slots[r][p] {
                Some(c) => prev = Some(c),
                None => {
                    let (gap, class) = match (prev, first) {
                        (Some(c), _) => (c as usize + 1, 0),
                        (None, Some(c0)) => (c0 as usize, 2),
                        (None, None) => (ncols, 2),
                    };
                    let class = if r == 0 { 1 } else { class };
                    gaps[gap].push((class, Cell { row: r, pos: p }));
                }
            }
        }
    }
    let mut out = Vec::with_capacity(ncols + rows.iter().map(Row::len).sum::<usize>());
    for (g, mut cells) in gaps.into_iter().enumerate() {
        cells.sort();
        out.extend(cells.into_iter().map(|(_, c)| Node::Cell(c)));
        if g < ncols {
            out.push(Node::Column(g));
        }
    }
    out
}
