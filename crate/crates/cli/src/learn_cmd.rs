//! `learn`: factor two patterns into a small grammar and rank it against
//! storing them as they are.

use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use serde::Serialize;

use icmaus::io::PatternLine;
use icmaus::learn::{align_pair, derive_patterns, evaluate_grammars, Grammar, SymbolGen};
use icmaus::{CostConfig, EngineParams, Error};

use crate::{Format, EXIT_NONE, EXIT_OK};

#[derive(Debug, Clone, Args)]
pub struct LearnArgs {
    /// The two patterns to factor, each as whitespace-separated symbols.
    #[arg(long, num_args = 2, value_names = ["FIRST", "SECOND"], required = true)]
    pub pair: Vec<String>,
    /// Utterances to score the grammars on, one per line [default: the pair].
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Horizontal)]
    pub format: Format,
}

#[derive(Debug, Serialize)]
struct RankDoc {
    grammar: String,
    patterns: Vec<String>,
    g: f64,
    e: f64,
    total: f64,
}

fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

/// One corpus-file line; an empty body is shown as `: :`.
pub fn pattern_text(p: &PatternLine) -> String {
    if p.prefix.is_empty() && p.suffix.is_empty() {
        return p.body.join(" ");
    }
    let mut parts = vec![p.prefix.join(" "), ":".into()];
    if !p.body.is_empty() {
        parts.push(p.body.join(" "));
    }
    parts.push(":".into());
    parts.push(p.suffix.join(" "));
    parts.retain(|s| !s.is_empty());
    parts.join(" ")
}

fn as_str(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

pub fn cmd_learn(a: &LearnArgs, out: &mut dyn Write) -> anyhow::Result<u8> {
    let first = words(&a.pair[0]);
    let second = words(&a.pair[1]);
    let data: Vec<Vec<String>> = match &a.data {
        Some(path) => std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?
            .lines()
            .map(words)
            .filter(|w| !w.is_empty())
            .collect(),
        None => vec![first.clone(), second.clone()],
    };
    let params = EngineParams::default();
    let derived = match align_pair(&as_str(&first), &as_str(&second), &params) {
        Ok((corpus, alignment)) => {
            derive_patterns(&alignment, &corpus, &mut SymbolGen::for_corpus(&corpus))
        }
        Err(e) => Err(e),
    };
    let derived = match derived {
        Ok(d) => d,
        Err(Error::NothingShared) => {
            eprintln!("error: the two patterns share nothing");
            return Ok(EXIT_NONE);
        }
        Err(e) => return Err(e.into()),
    };
    let ranked = evaluate_grammars(
        &[derived.grammar(), Grammar::rote(&data)],
        &data,
        CostConfig::default(),
        &params,
    )?;

    if a.format == Format::Structured {
        let docs: Vec<RankDoc> = ranked
            .iter()
            .map(|r| RankDoc {
                grammar: r.grammar.name.clone(),
                patterns: r.grammar.patterns.iter().map(pattern_text).collect(),
                g: r.score.g,
                e: r.score.e,
                total: r.score.total,
            })
            .collect();
        writeln!(out, "{}", serde_json::to_string_pretty(&docs)?)?;
        return Ok(EXIT_OK);
    }
    writeln!(out, "derived grammar:")?;
    for p in &derived.grammar().patterns {
        writeln!(out, "  {}", pattern_text(p))?;
    }
    writeln!(out, "\nranking (bits):")?;
    for (i, r) in ranked.iter().enumerate() {
        writeln!(
            out,
            "  {}. {:<9} G {:>8.2}  E {:>7.2}  G+E {:>8.2}",
            i + 1,
            r.grammar.name,
            r.score.g,
            r.score.e,
            r.score.total
        )?;
    }
    Ok(EXIT_OK)
}
