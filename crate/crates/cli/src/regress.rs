//! `regress`: rerun the scenarios listed in a directory's `scenarios.toml`
//! and compare the structure of each top alignment with the recorded one.

use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::{Format, RunArgs, EXIT_ERROR, EXIT_NONE, EXIT_OK};

pub const MANIFEST: &str = "scenarios.toml";

#[derive(Debug, Clone, Args)]
pub struct RegressArgs {
    /// Directory holding `scenarios.toml` and the corpora it names.
    pub dir: PathBuf,
    /// Worker threads per run; results do not depend on it [default: 1].
    #[arg(long)]
    pub workers: Option<usize>,
    /// Rewrite the recorded fingerprints with the current results.
    #[arg(long)]
    pub update: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    /// What the scenario reproduces.
    #[serde(default)]
    pub about: String,
    pub corpus: String,
    pub new: String,
    #[serde(default)]
    pub exact: bool,
    #[serde(default)]
    pub fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default)]
    pub scenario: Vec<Scenario>,
}

/// Structure of the top alignment, or `(none)`.
pub fn fingerprint(
    dir: &std::path::Path,
    s: &Scenario,
    workers: Option<usize>,
) -> anyhow::Result<String> {
    let args = RunArgs {
        old: dir.join(&s.corpus),
        new: Some(s.new.clone()),
        new_file: None,
        exact: s.exact,
        keep_best: None,
        beam: None,
        k_best: None,
        max_iterations: None,
        driving_keep: None,
        gap_beta: None,
        min_cost: None,
        format: Format::Structured,
        workers,
    };
    let result = args
        .prepare()
        .with_context(|| format!("scenario {}", s.id))?
        .run();
    Ok(result
        .all
        .first()
        .map_or_else(|| "(none)".to_string(), |top| top.key.fingerprint()))
}

pub fn cmd_regress(a: &RegressArgs, out: &mut dyn Write) -> anyhow::Result<u8> {
    let path = a.dir.join(MANIFEST);
    if !path.is_file() {
        eprintln!("error: no {MANIFEST} in {}", a.dir.display());
        return Ok(EXIT_NONE);
    }
    let text =
        std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let mut manifest: Manifest =
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if manifest.scenario.is_empty() {
        eprintln!("error: {} lists no scenarios", path.display());
        return Ok(EXIT_NONE);
    }

    let mut failed = Vec::new();
    for s in &mut manifest.scenario {
        let got = fingerprint(&a.dir, s, a.workers)?;
        if a.update {
            s.fingerprint = got;
            writeln!(out, "recorded {}", s.id)?;
        } else if got == s.fingerprint {
            writeln!(out, "ok    {}", s.id)?;
        } else {
            writeln!(out, "FAIL  {}", s.id)?;
            writeln!(out, "      expected: {}", s.fingerprint)?;
            writeln!(out, "      got:      {got}")?;
            failed.push(s.id.clone());
        }
    }
    if a.update {
        std::fs::write(&path, toml::to_string_pretty(&manifest)?)
            .with_context(|| format!("writing {}", path.display()))?;
        return Ok(EXIT_OK);
    }
    let n = manifest.scenario.len();
    if failed.is_empty() {
        writeln!(out, "{n} scenarios passed")?;
        Ok(EXIT_OK)
    } else {
        writeln!(
            out,
            "{} of {n} scenarios failed: {}",
            failed.len(),
            failed.join(", ")
        )?;
        Ok(EXIT_ERROR)
    }
}
