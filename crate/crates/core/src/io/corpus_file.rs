//! Line-oriented corpus format.
//!
//! ```text
//! @format sp-corpus 1
//! @param gap_beta 0.5
//! # comment (only when '#' is the first non-space character)
//! N Np 1 : s i x : #N
//! A 1 1 S 0 C 1
//! %bd : wings feathers : #bd *3
//! ```
//!
//! A pattern line is `[prefix] ":" body [":" suffix] ["*" freq]`. Without a
//! colon the whole line is contents. An empty body is an error.

use std::collections::BTreeMap;

use crate::corpus::Corpus;
use crate::error::{Error, Result};

pub const FORMAT_TAG: &str = "sp-corpus 1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternLine {
    pub prefix: Vec<String>,
    pub body: Vec<String>,
    pub suffix: Vec<String>,
    pub frequency: u64,
}

#[derive(Debug, Clone)]
pub struct CorpusFile {
    pub corpus: Corpus,
    /// `@param` overrides, e.g. cost-model settings.
    pub params: BTreeMap<String, String>,
}

fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

pub fn parse_pattern_line(line: &str) -> std::result::Result<PatternLine, String> {
    let (pattern, frequency) = match line.split_once('*') {
        None => (line, 1),
        Some((left, right)) => {
            let f: u64 = right
                .trim()
                .parse()
                .map_err(|_| format!("bad frequency '{}'", right.trim()))?;
            if f == 0 {
                return Err("frequency must be positive".into());
            }
            (left, f)
        }
    };
    let fields: Vec<&str> = pattern.split(':').collect();
    let (prefix, body, suffix) = match fields.as_slice() {
        [body] => ("", *body, ""),
        [prefix, body] => (*prefix, *body, ""),
        [prefix, body, suffix] => (*prefix, *body, *suffix),
        _ => return Err("too many ':' separators".into()),
    };
    let body = words(body);
    if body.is_empty() {
        return Err("empty body".into());
    }
    Ok(PatternLine {
        prefix: words(prefix),
        body,
        suffix: words(suffix),
        frequency,
    })
}

pub fn parse_corpus(text: &str) -> Result<CorpusFile> {
    let mut corpus = Corpus::new();
    let mut params = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(directive) = line.strip_prefix('@') {
            let mut parts = directive.split_whitespace();
            match parts.next() {
                Some("format") => {
                    let tag = parts.collect::<Vec<_>>().join(" ");
                    if tag != FORMAT_TAG {
                        return Err(err(format!("unsupported format '{tag}'")));
                    }
                }
                Some("param") => match (parts.next(), parts.next(), parts.next()) {
                    (Some(k), Some(v), None) => {
                        params.insert(k.to_string(), v.to_string());
                    }
                    _ => return Err(err("expected '@param <key> <value>'".into())),
                },
                other => return Err(err(format!("unknown directive '{}'", other.unwrap_or("")))),
            }
            continue;
        }
        let p = parse_pattern_line(line).map_err(err)?;
        let tokens: Vec<&String> = p.prefix.iter().chain(&p.body).chain(&p.suffix).collect();
        corpus
            .add_pattern(&tokens, p.prefix.len(), p.suffix.len(), p.frequency)
            .map_err(|e| err(e.to_string()))?;
    }
    Ok(CorpusFile { corpus, params })
}

/// Writes a corpus back out; `parse_corpus` reads it back unchanged.
pub fn render_corpus(corpus: &Corpus, params: &BTreeMap<String, String>) -> String {
    let mut out = format!("@format {FORMAT_TAG}\n");
    for (k, v) in params {
        out.push_str(&format!("@param {k} {v}\n"));
    }
    for p in corpus.patterns() {
        let r = p.contents_range();
        let body = corpus.render(&p.symbols[r.clone()]);
        // A leading '#' would read back as a comment.
        let plain = p.id_prefix_len == 0 && p.id_suffix_len == 0 && !body.starts_with('#');
        let mut line = if plain {
            body
        } else {
            let prefix = corpus.render(&p.symbols[..r.start]);
            let mut l = if prefix.is_empty() {
                format!(": {body}")
            } else {
                format!("{prefix} : {body}")
            };
            if p.id_suffix_len > 0 {
                l.push_str(" : ");
                l.push_str(&corpus.render(&p.symbols[r.end..]));
            }
            l
        };
        if p.frequency != 1 {
            line.push_str(&format!(" *{}", p.frequency));
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}
