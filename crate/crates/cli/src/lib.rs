//! `sp61`: align New patterns against a corpus of Old patterns from the
//! command line.
//!
//! Exit codes: 0 when there is something to report, 2 when a run finds
//! nothing, 1 for usage, file and format errors.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use icmaus::engine::{self, RunStatus};
use icmaus::io::{parse_corpus, render_horizontal, render_vertical, RunDoc};
use icmaus::{Corpus, CostConfig, CostModel, EngineParams, RunResult, SymbolId};

pub mod learn_cmd;
pub mod regress;

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_NONE: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "sp61",
    version,
    about = "Compression by multiple alignment, unification and search"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Align New against the corpus and print the best alignments.
    Align(RunArgs),
    /// Exact-mode run: only alignments covering all of New; prints the inferred result.
    Compute(RunArgs),
    /// Alternative alignments, their relative probabilities and inferred-symbol probabilities.
    Probabilities(ProbArgs),
    /// Factor a pair of patterns into a small grammar and compare it with the rote grammar.
    Learn(learn_cmd::LearnArgs),
    /// Run every scenario of a regression manifest and compare fingerprints.
    Regress(regress::RegressArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Horizontal,
    Vertical,
    Structured,
}

/// Options shared by the engine-running commands. Unset flags fall back to
/// `@param` lines in the corpus, then to the library defaults.
#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Corpus file of Old patterns.
    #[arg(long)]
    pub old: PathBuf,
    /// New pattern as whitespace-separated symbols.
    #[arg(
        long,
        required_unless_present = "new_file",
        conflicts_with = "new_file"
    )]
    pub new: Option<String>,
    /// File holding the New pattern.
    #[arg(long)]
    pub new_file: Option<PathBuf>,
    /// Keep only alignments that account for every New symbol.
    #[arg(long)]
    pub exact: bool,
    /// Alignments to report [default: 10].
    #[arg(long)]
    pub keep_best: Option<usize>,
    /// Partial chains kept per match point [default: 50].
    #[arg(long)]
    pub beam: Option<usize>,
    /// Chains kept per driving/target pair [default: 4].
    #[arg(long)]
    pub k_best: Option<usize>,
    /// [default: 20]
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Alignments promoted to drive the next iteration [default: 3].
    #[arg(long)]
    pub driving_keep: Option<usize>,
    /// Weight of the gap penalty [default: 1].
    #[arg(long)]
    pub gap_beta: Option<f64>,
    /// Floor on the cost of a symbol in bits [default: 1].
    #[arg(long)]
    pub min_cost: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Horizontal)]
    pub format: Format,
    /// Worker threads; 0 uses every core [default: 1].
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ProbArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Report inferred-symbol probabilities for every group, not just the principal one.
    #[arg(long)]
    pub all_groups: bool,
}

/// Everything a run needs once files are read and settings are merged.
pub struct Prepared {
    pub corpus: Corpus,
    pub new: Vec<SymbolId>,
    pub model: CostModel,
    pub params: EngineParams,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> anyhow::Result<T> {
    value
        .parse()
        .map_err(|_| anyhow::anyhow!("bad value '{value}' for parameter '{key}'"))
}

/// Applies `@param` settings from a corpus file.
pub fn apply_params(
    settings: &BTreeMap<String, String>,
    params: &mut EngineParams,
    cost: &mut CostConfig,
) -> anyhow::Result<()> {
    for (k, v) in settings {
        match k.as_str() {
            "min_cost" => cost.min_cost = parse_value(k, v)?,
            "gap_beta" => cost.gap_beta = parse_value(k, v)?,
            "smoothing" => cost.smoothing = parse_value(k, v)?,
            "identify_unsegmented" => cost.identify_unsegmented = parse_value(k, v)?,
            "keep_best" => params.keep_best = parse_value(k, v)?,
            "beam" => params.matching.beam = parse_value(k, v)?,
            "k_best" => params.matching.k_best = parse_value(k, v)?,
            "max_hits_per_symbol" => params.matching.max_hits_per_symbol = parse_value(k, v)?,
            "min_chain_length" => params.matching.min_chain_length = parse_value(k, v)?,
            "partial_order" => params.matching.partial_order = parse_value(k, v)?,
            "max_iterations" => params.max_iterations = parse_value(k, v)?,
            "max_alignments_total" => params.max_alignments_total = parse_value(k, v)?,
            "driving_keep" => params.driving_keep = parse_value(k, v)?,
            "diverse_driving" => params.diverse_driving = parse_value(k, v)?,
            "exact" => params.exact_mode = parse_value(k, v)?,
            "workers" => params.workers = parse_value(k, v)?,
            _ => bail!("unknown parameter '{k}'"),
        }
    }
    Ok(())
}

pub fn read_corpus(path: &Path) -> anyhow::Result<(Corpus, BTreeMap<String, String>)> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file = parse_corpus(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok((file.corpus, file.params))
}

impl RunArgs {
    pub fn prepare(&self) -> anyhow::Result<Prepared> {
        let (mut corpus, settings) = read_corpus(&self.old)?;
        let mut params = EngineParams::default();
        let mut cost = CostConfig::default();
        apply_params(&settings, &mut params, &mut cost)?;
        if self.exact {
            params.exact_mode = true;
        }
        let set = |slot: &mut usize, v: Option<usize>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut params.keep_best, self.keep_best);
        set(&mut params.matching.beam, self.beam);
        set(&mut params.matching.k_best, self.k_best);
        set(&mut params.max_iterations, self.max_iterations);
        set(&mut params.driving_keep, self.driving_keep);
        set(&mut params.workers, self.workers);
        if let Some(b) = self.gap_beta {
            cost.gap_beta = b;
        }
        if let Some(m) = self.min_cost {
            cost.min_cost = m;
        }
        // Written so that NaN fails too.
        let positive = |x: f64| x > 0.0;
        if !positive(cost.min_cost)
            || cost.gap_beta.is_nan()
            || cost.gap_beta < 0.0
            || !positive(cost.smoothing)
        {
            bail!("min_cost and smoothing must be positive and gap_beta non-negative");
        }

        let text = match (&self.new, &self.new_file) {
            (Some(s), _) => s.clone(),
            (None, Some(p)) => {
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?
            }
            (None, None) => bail!("one of --new or --new-file is required"),
        };
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.is_empty() {
            bail!("New pattern is empty");
        }
        // The cost model only counts Old occurrences, so interning New
        // symbols first leaves it unchanged.
        let new = corpus.intern_all(&tokens)?;
        let model = CostModel::build(&corpus, cost);
        Ok(Prepared {
            corpus,
            new,
            model,
            params,
        })
    }
}

impl Prepared {
    pub fn run(&self) -> RunResult {
        engine::run(&self.corpus, &self.new, &self.model, &self.params)
    }
}

fn fmt_bits(x: f64) -> String {
    format!("{x:.2}")
}

fn join(corpus: &Corpus, s: &[SymbolId]) -> String {
    corpus.render(s)
}

/// Human-readable report of a run's top alignments.
pub fn render_text(result: &RunResult, prep: &Prepared, format: Format) -> String {
    let corpus = &prep.corpus;
    let mut out = format!(
        "New: {}\nstatus: {}  iterations: {}  alignments formed: {}\n",
        join(corpus, &prep.new),
        status_name(result.status),
        result.stats.iterations,
        result.stats.alignments_formed
    );
    for (rank, ra) in result.alignments.iter().enumerate() {
        let s = &ra.score;
        out.push_str(&format!(
            "\nalignment {}  cs {}  n_r {}  n_e {}  gap {}  matched {}/{}\n",
            rank + 1,
            fmt_bits(s.cs),
            fmt_bits(s.n_r),
            fmt_bits(s.n_e),
            fmt_bits(s.gap_penalty),
            s.matched_new_count,
            prep.new.len()
        ));
        out.push_str(&match format {
            Format::Vertical => render_vertical(&ra.alignment, corpus.symbols()),
            _ => render_horizontal(&ra.alignment, corpus.symbols()),
        });
        out.push_str(&format!("code: {}\n", join(corpus, &ra.code)));
        out.push_str(&format!("inferences: {}\n", join(corpus, &ra.inferences)));
        out.push_str(&format!("residue: {}\n", join(corpus, &ra.residue)));
        out.push_str(&format!("p: {:.6e}\n", ra.probability));
    }
    out
}

fn status_name(s: RunStatus) -> &'static str {
    match s {
        RunStatus::Complete => "complete",
        RunStatus::Truncated => "truncated",
        RunStatus::NoDerivation => "no derivation",
    }
}

fn exit_for(result: &RunResult) -> u8 {
    if result.alignments.is_empty() {
        EXIT_NONE
    } else {
        EXIT_OK
    }
}

pub fn cmd_align(args: &RunArgs, out: &mut dyn Write) -> anyhow::Result<u8> {
    let prep = args.prepare()?;
    let result = prep.run();
    let text = match args.format {
        Format::Structured => RunDoc::from_result(&result, &prep.new, &prep.corpus).to_json(),
        f => render_text(&result, &prep, f),
    };
    out.write_all(text.as_bytes())?;
    Ok(exit_for(&result))
}

pub fn cmd_compute(args: &RunArgs, out: &mut dyn Write) -> anyhow::Result<u8> {
    let mut args = args.clone();
    args.exact = true;
    let prep = args.prepare()?;
    let result = prep.run();
    let text = match args.format {
        Format::Structured => RunDoc::from_result(&result, &prep.new, &prep.corpus).to_json(),
        f => {
            let mut t = render_text(&result, &prep, f);
            if let Some(top) = result.alignments.first() {
                t.push_str(&format!(
                    "\nresult: {}\n",
                    join(&prep.corpus, &top.inferences)
                ));
            }
            t
        }
    };
    out.write_all(text.as_bytes())?;
    Ok(exit_for(&result))
}

/// Probability of each inferred symbol, summed over a group's members.
pub fn inference_probabilities(
    result: &RunResult,
    group: usize,
    corpus: &Corpus,
) -> BTreeMap<String, f64> {
    let mut probs = BTreeMap::new();
    let Some(g) = result.probabilities.groups.get(group) else {
        return probs;
    };
    for (&m, &r) in g.members.iter().zip(&g.relative) {
        let mut inferred = result.all[m].alignment.extract_inferences();
        inferred.sort_unstable();
        inferred.dedup();
        for s in inferred {
            *probs.entry(corpus.name(s).to_string()).or_insert(0.0) += r;
        }
    }
    probs
}

pub fn cmd_probabilities(args: &ProbArgs, out: &mut dyn Write) -> anyhow::Result<u8> {
    let prep = args.run.prepare()?;
    let result = prep.run();
    let corpus = &prep.corpus;
    let groups = &result.probabilities.groups;
    if args.run.format == Format::Structured {
        let mut doc = RunDoc::from_result(&result, &prep.new, corpus);
        doc.symbol_probabilities = inference_probabilities(&result, 0, corpus);
        out.write_all(doc.to_json().as_bytes())?;
        return Ok(if groups.is_empty() {
            EXIT_NONE
        } else {
            EXIT_OK
        });
    }
    let mut text = format!("New: {}\n", join(corpus, &prep.new));
    for (gi, g) in groups.iter().enumerate() {
        let covered: Vec<SymbolId> = g.coverage.iter().map(|&i| prep.new[i]).collect();
        text.push_str(&format!(
            "\ngroup {}  covers: {}  alternatives: {}\n",
            gi + 1,
            join(corpus, &covered),
            g.members.len()
        ));
        for (&m, &r) in g.members.iter().zip(&g.relative) {
            let s = &result.all[m];
            text.push_str(&format!(
                "  rank {}  r {:.4}  n_e {}  inferences: {}\n",
                m + 1,
                r,
                fmt_bits(s.score.n_e),
                join(corpus, &s.alignment.extract_inferences())
            ));
        }
        if gi == 0 || args.all_groups {
            let mut probs: Vec<(String, f64)> = inference_probabilities(&result, gi, corpus)
                .into_iter()
                .collect();
            probs.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            text.push_str("  inferred symbols:\n");
            for (name, p) in probs {
                text.push_str(&format!("    {name}  {p:.4}\n"));
            }
        }
    }
    out.write_all(text.as_bytes())?;
    Ok(if groups.is_empty() {
        EXIT_NONE
    } else {
        EXIT_OK
    })
}

/// Parses `args` (program name first) and runs the command, writing its
/// report to `out`. Diagnostics go to stderr.
pub fn run_cli<S: AsRef<str>>(args: &[S], out: &mut dyn Write) -> u8 {
    let cli = match Cli::try_parse_from(args.iter().map(|s| s.as_ref())) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    eprint!("{e}");
                    EXIT_ERROR
                }
            };
        }
    };
    let outcome = match &cli.command {
        Command::Align(a) => cmd_align(a, out),
        Command::Compute(a) => cmd_compute(a, out),
        Command::Probabilities(a) => cmd_probabilities(a, out),
        Command::Learn(a) => learn_cmd::cmd_learn(a, out),
        Command::Regress(a) => regress::cmd_regress(a, out),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}
