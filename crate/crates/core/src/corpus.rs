//! Symbols, patterns and the store of Old patterns.
//!
//! Symbols are opaque marks compared only for identity. A pattern carries an
//! explicit split into leading identification symbols, contents, and trailing
//! identification symbols; nothing about a symbol's spelling implies which
//! role it plays.

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense index into a [`SymbolTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SymbolId(pub u32);

impl SymbolId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Identifier of a stored Old pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PatternId(pub u32);

impl fmt::Display for PatternId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Characters that may never appear inside a token.
pub const RESERVED_CHARS: [char; 2] = [':', '*'];

/// Checks that `token` can be used as a symbol spelling.
pub fn validate_token(token: &str) -> Result<()> {
    let bad = |reason: String| {
        Err(Error::InvalidToken {
            token: token.to_string(),
            reason,
        })
    };
    if token.is_empty() {
        return bad("empty token".into());
    }
    if token.chars().any(char::is_whitespace) {
        return bad("whitespace in token".into());
    }
    if let Some(c) = token.chars().find(|c| RESERVED_CHARS.contains(c)) {
        return bad(format!("reserved character '{c}'"));
    }
    if token.starts_with('@') {
        return bad("reserved character '@' at start of token".into());
    }
    Ok(())
}

/// Bijection between token strings and [`SymbolId`]s.
#[derive(Debug, Clone, Default)]
pub struct SymbolTable {
    names: Vec<String>,
    index: HashMap<String, SymbolId>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, token: &str) -> Result<SymbolId> {
        if let Some(&id) = self.index.get(token) {
            return Ok(id);
        }
        validate_token(token)?;
        let id = SymbolId(self.names.len() as u32);
        self.names.push(token.to_string());
        self.index.insert(token.to_string(), id);
        Ok(id)
    }

    pub fn get(&self, token: &str) -> Option<SymbolId> {
        self.index.get(token).copied()
    }

    pub fn name(&self, id: SymbolId) -> &str {
        &self.names[id.index()]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Spells out a symbol sequence, space separated.
    pub fn render(&self, symbols: &[SymbolId]) -> String {
        symbols
            .iter()
            .map(|&s| self.name(s))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// An ordered sequence of symbols with identification/contents segmentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub id: PatternId,
    pub symbols: Vec<SymbolId>,
    pub id_prefix_len: usize,
    pub id_suffix_len: usize,
    pub frequency: u64,
}

impl Pattern {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn contents_range(&self) -> Range<usize> {
        self.id_prefix_len..self.symbols.len() - self.id_suffix_len
    }

    pub fn contents(&self) -> &[SymbolId] {
        &self.symbols[self.contents_range()]
    }

    pub fn is_identification(&self, pos: usize) -> bool {
        !self.contents_range().contains(&pos)
    }
}

/// The Old store: interned symbols, patterns and frequency statistics.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    symbols: SymbolTable,
    patterns: Vec<Pattern>,
    by_sequence: HashMap<Vec<SymbolId>, PatternId>,
    weighted_counts: Vec<u64>,
    total_weighted: u64,
}

impl Corpus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn symbols(&self) -> &SymbolTable {
        &self.symbols
    }

    pub fn intern_symbol(&mut self, token: &str) -> Result<SymbolId> {
        let id = self.symbols.intern(token)?;
        if self.weighted_counts.len() < self.symbols.len() {
            self.weighted_counts.resize(self.symbols.len(), 0);
        }
        Ok(id)
    }

    /// Interns a whole token list, e.g. a New pattern.
    pub fn intern_all<S: AsRef<str>>(&mut self, tokens: &[S]) -> Result<Vec<SymbolId>> {
        tokens
            .iter()
            .map(|t| self.intern_symbol(t.as_ref()))
            .collect()
    }

    pub fn add_pattern<S: AsRef<str>>(
        &mut self,
        tokens: &[S],
        id_prefix_len: usize,
        id_suffix_len: usize,
        frequency: u64,
    ) -> Result<PatternId> {
        if tokens.is_empty() {
            return Err(Error::EmptyPattern);
        }
        if frequency == 0 {
            return Err(Error::ZeroFrequency);
        }
        if id_prefix_len + id_suffix_len > tokens.len() {
            return Err(Error::Segmentation {
                prefix: id_prefix_len,
                suffix: id_suffix_len,
                len: tokens.len(),
            });
        }
        for t in tokens {
            validate_token(t.as_ref())?;
        }
        let symbols = self.intern_all(tokens)?;
        if let Some(existing) = self.by_sequence.get(&symbols) {
            return Err(Error::DuplicatePattern {
                existing: existing.0,
            });
        }
        let id = PatternId(self.patterns.len() as u32);
        for &s in &symbols {
            self.weighted_counts[s.index()] += frequency;
        }
        self.total_weighted += frequency * symbols.len() as u64;
        self.by_sequence.insert(symbols.clone(), id);
        self.patterns.push(Pattern {
            id,
            symbols,
            id_prefix_len,
            id_suffix_len,
            frequency,
        });
        Ok(id)
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn pattern(&self, id: PatternId) -> &Pattern {
        &self.patterns[id.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// Occurrences of `s` across Old, each weighted by its pattern's frequency.
    pub fn symbol_weighted_count(&self, s: SymbolId) -> u64 {
        self.weighted_counts.get(s.index()).copied().unwrap_or(0)
    }

    /// Sum over patterns of frequency × length.
    pub fn total_weighted_occurrences(&self) -> u64 {
        self.total_weighted
    }

    pub fn render(&self, symbols: &[SymbolId]) -> String {
        self.symbols.render(symbols)
    }

    pub fn name(&self, s: SymbolId) -> &str {
        self.symbols.name(s)
    }
}
