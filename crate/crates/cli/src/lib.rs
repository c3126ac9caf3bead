//! Command-line pipeline: index a corpus, extract candidate pairs, score
//! them, and evaluate merge decisions against gold labels.
//!
//! [`dispatch`] is the whole program; `main` only forwards `argv` and the
//! standard streams to it.

mod config;

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use unithood::counts::{
    estimate_index_size, index_documents, load_corpus, load_function_word_rates,
    measure_function_word_rates, LocalIndex, ProviderKind,
};
use unithood::eval::{build_contingency, fmt_metric, threshold_sweep, GoldSet, Report};
use unithood::extract::{extract_noun_phrases, generate_pairs, parse_tagged_input, PairRecord};
use unithood::measures::{decide_merge_ou, JointSource};
use unithood::pipeline::{score_pairs, score_sentences, ScoredRecord, ScoringConfig};
use unithood::Score;

pub use config::{RunConfig, CACHE_ENV};

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Exit status for bad flags or arguments.
pub const EXIT_USAGE: i32 = 1;
/// Exit status for unreadable or invalid data.
pub const EXIT_DATA: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "unithood", version, about = "Unithood scoring with the odds of unithood and UH")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a local index from a corpus directory or JSON-lines file.
    Index {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract candidate pairs from tagged sentences.
    Extract {
        #[arg(long)]
        tagged: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        extract: ExtractArgs,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Score candidate pairs.
    Score(ScoreArgs),
    /// Evaluate merge decisions against gold labels.
    Evaluate {
        #[arg(long)]
        scored: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        /// OU threshold; defaults to the configured value.
        #[arg(long, allow_hyphen_values = true)]
        threshold: Option<f64>,
        #[arg(long, value_enum, default_value = "ou")]
        measure: Measure,
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Evaluate OU decisions over a grid of thresholds.
    Sweep {
        #[arg(long)]
        scored: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        /// Comma-separated ascending thresholds.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with_all = ["from", "to"])]
        grid: Option<Vec<f64>>,
        #[arg(long, allow_hyphen_values = true)]
        from: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        to: Option<f64>,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Estimate the sample-space size from function-word counts, or measure
    /// function-word rates on a reference index.
    #[command(name = "estimate-n")]
    EstimateN {
        /// Function-word rate file to estimate with.
        #[arg(long, required_unless_present = "measure_rates")]
        rates: Option<PathBuf>,
        /// Measure rates for `--words` on the local index instead.
        #[arg(long, requires = "words")]
        measure_rates: bool,
        #[arg(long, value_delimiter = ',')]
        words: Option<Vec<String>>,
        /// Where to write measured rates (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        provider: ProviderArgs,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Measure {
    Ou,
    Uh,
}

#[derive(Args, Debug, Default, Clone)]
pub struct ProviderArgs {
    #[arg(long, value_enum)]
    pub provider: Option<ProviderChoice>,
    /// Local index directory.
    #[arg(long)]
    pub index: Option<PathBuf>,
    /// Search URL with a `{query}` placeholder.
    #[arg(long)]
    pub endpoint: Option<String>,
    /// Dot-separated path to the count in the JSON response.
    #[arg(long)]
    pub count_path: Option<String>,
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Maximum requests per second.
    #[arg(long)]
    pub rate_limit: Option<f64>,
    /// Override the sample-space size N.
    #[arg(long)]
    pub fixed_n: Option<u64>,
    /// Function-word rate file for estimating N (http provider).
    #[arg(long)]
    pub function_words: Option<PathBuf>,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProviderChoice {
    Local,
    Http,
}

impl From<ProviderChoice> for ProviderKind {
    fn from(c: ProviderChoice) -> Self {
        match c {
            ProviderChoice::Local => ProviderKind::Local,
            ProviderChoice::Http => ProviderKind::Http,
        }
    }
}

#[derive(Args, Debug, Default, Clone)]
pub struct ExtractArgs {
    /// Comma-separated prepositions accepted between units.
    #[arg(long, value_delimiter = ',')]
    pub prepositions: Option<Vec<String>>,
    /// Chunk maximal noun runs without splitting at proper/common boundaries.
    #[arg(long)]
    pub no_split_proper: bool,
}

#[derive(Args, Debug, Clone)]
struct ScoreArgs {
    /// Pair file produced by `extract`.
    #[arg(long, required_unless_present = "tagged", conflicts_with = "tagged")]
    pairs: Option<PathBuf>,
    /// Tagged input; pairs are extracted in place and merged over rounds.
    #[arg(long)]
    tagged: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Extraction/merge rounds (requires --tagged).
    #[arg(long)]
    rounds: Option<usize>,
    #[command(flatten)]
    provider: ProviderArgs,
    #[command(flatten)]
    extract: ExtractArgs,
    #[arg(long)]
    log_base: Option<f64>,
    /// OU threshold used for `merge_ou`.
    #[arg(long, allow_hyphen_values = true)]
    threshold: Option<f64>,
    /// Joint count for UH's mutual information.
    #[arg(long, value_parser = ["n_xy", "n_s"])]
    mi_joint: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    mi_plus: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    mi_minus: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    id_t: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    idr_plus: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    idr_minus: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

/// A usage problem detected after flag parsing.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub(crate) fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Runs the program on `argv` (including the program name) and returns the
/// exit status.
pub fn dispatch<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match run(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            if e.is::<UsageError>() {
                EXIT_USAGE
            } else {
                EXIT_DATA
            }
        }
    }
}

fn run(command: Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::Index { corpus, out } => {
            let docs = load_corpus(&corpus).with_context(|| format!("reading corpus {}", corpus.display()))?;
            let index = index_documents(&docs)?;
            index.save(&out)?;
            writeln!(stdout, "{}", index.doc_count_total())?;
            Ok(())
        }
        Command::Extract { tagged, out, extract, config } => {
            let cfg = RunConfig::load(config.as_deref())?.with_extract_args(&extract);
            let sentences = read_tagged(&tagged)?;
            let extract_cfg = cfg.extract_config();
            let mut w = create(&out)?;
            let mut n = 0;
            for s in &sentences {
                let nps = extract_noun_phrases(s, &extract_cfg);
                for pair in generate_pairs(s, &nps, &extract_cfg) {
                    serde_json::to_writer(&mut w, &pair.to_record())?;
                    w.write_all(b"\n")?;
                    n += 1;
                }
            }
            w.flush()?;
            writeln!(stdout, "{n}")?;
            Ok(())
        }
        Command::Score(args) => score(args, stdout),
        Command::Evaluate { scored, gold, threshold, measure, json, config } => {
            let cfg = RunConfig::load(config.as_deref())?;
            let threshold = threshold.unwrap_or(cfg.ou.ou_threshold);
            if threshold.is_nan() {
                return Err(usage("threshold must be a number"));
            }
            let records = read_scored(&scored)?;
            let gold = read_gold(&gold)?;
            let decisions: Vec<(String, bool)> = records
                .iter()
                .map(|r| {
                    let merge = match measure {
                        Measure::Ou => decide_merge_ou(r.ou, threshold).merge,
                        Measure::Uh => r.merge_uh,
                    };
                    (r.key(), merge)
                })
                .collect();
            let report = Report::new(build_contingency(&decisions, &gold)?);
            let title = match measure {
                Measure::Ou => format!("OU (threshold {threshold})"),
                Measure::Uh => "UH".to_string(),
            };
            write!(stdout, "{}", report.to_text(&title))?;
            if let Some(path) = json {
                let mut w = create(&path)?;
                serde_json::to_writer_pretty(&mut w, &report)?;
                w.write_all(b"\n")?;
                w.flush()?;
            }
            Ok(())
        }
        Command::Sweep { scored, gold, grid, from, to, steps, json } => {
            let records = read_scored(&scored)?;
            let gold = read_gold(&gold)?;
            let scored: Vec<(String, Score)> = records.iter().map(|r| (r.key(), r.ou)).collect();
            let grid = match grid {
                Some(g) => g,
                None => default_grid(&scored, from, to, steps)?,
            };
            let points = threshold_sweep(&scored, &gold, &grid)
                .map_err(|e| match e {
                    unithood::Error::InvalidArgument(m) => usage(m),
                    other => other.into(),
                })?;
            writeln!(stdout, "{:>12} {:>7} {:>6} {:>6} {:>6} {:>6} {:>9} {:>9} {:>9}",
                "threshold", "merged", "tp", "fp", "fn", "tn", "precision", "recall", "accuracy")?;
            for p in &points {
                let t = &p.table;
                writeln!(stdout, "{:>12.5} {:>7} {:>6} {:>6} {:>6} {:>6} {:>9} {:>9} {:>9}",
                    p.threshold, t.merged(), t.tp, t.fp, t.fn_, t.tn,
                    fmt_metric(p.metrics.precision), fmt_metric(p.metrics.recall), fmt_metric(p.metrics.accuracy))?;
            }
            if let Some(path) = json {
                let mut w = create(&path)?;
                serde_json::to_writer_pretty(&mut w, &points)?;
                w.write_all(b"\n")?;
                w.flush()?;
            }
            Ok(())
        }
        Command::EstimateN { rates, measure_rates, words, out, provider, config } => {
            let cfg = RunConfig::load(config.as_deref())?.with_provider_args(&provider);
            if measure_rates {
                if cfg.provider.kind != ProviderKind::Local {
                    return Err(usage("--measure-rates needs a local index"));
                }
                let index_path = cfg.provider.index.as_deref().ok_or_else(|| usage("--index is required"))?;
                let index = LocalIndex::load(index_path)?;
                let measured = measure_function_word_rates(&index, words.as_deref().unwrap_or_default())?;
                let text = serde_json::to_string_pretty(&measured)? + "\n";
                match out {
                    Some(path) => std::fs::write(&path, text).with_context(|| path.display().to_string())?,
                    None => stdout.write_all(text.as_bytes())?,
                }
                return Ok(());
            }
            let rates = load_function_word_rates(rates.as_deref().expect("required by clap"))?;
            let provider = cfg.build_provider()?;
            let n = estimate_index_size(provider.as_ref(), &rates)?;
            writeln!(stdout, "{n}")?;
            Ok(())
        }
    }
}

fn score(args: ScoreArgs, stdout: &mut dyn Write) -> Result<()> {
    if args.rounds.is_some() && args.tagged.is_none() {
        return Err(usage("--rounds requires --tagged input"));
    }
    let mut cfg = RunConfig::load(args.config.as_deref())?
        .with_provider_args(&args.provider)
        .with_extract_args(&args.extract);
    if let Some(v) = args.log_base {
        cfg.ou.log_base = v;
    }
    if let Some(v) = args.threshold {
        cfg.ou.ou_threshold = v;
    }
    if let Some(v) = &args.mi_joint {
        cfg.ou.mi_joint_source = if v == "n_s" { JointSource::Phrase } else { JointSource::CoOccurrence };
    }
    for (flag, slot) in [
        (args.mi_plus, &mut cfg.uh.mi_plus),
        (args.mi_minus, &mut cfg.uh.mi_minus),
        (args.id_t, &mut cfg.uh.id_t),
        (args.idr_plus, &mut cfg.uh.idr_plus),
        (args.idr_minus, &mut cfg.uh.idr_minus),
    ] {
        if let Some(v) = flag {
            *slot = v;
        }
    }
    if let Some(r) = args.rounds {
        cfg.rounds = r;
    }
    cfg.validate()?;

    let provider = cfg.build_provider()?;
    let scoring = ScoringConfig { ou: cfg.ou, uh: cfg.uh };
    let records = match (&args.pairs, &args.tagged) {
        (Some(pairs), _) => score_pairs(provider.as_ref(), &read_pairs(pairs)?, &scoring)?,
        (None, Some(tagged)) => score_sentences(
            provider.as_ref(),
            &read_tagged(tagged)?,
            &cfg.extract_config(),
            &scoring,
            cfg.rounds,
        )?,
        (None, None) => unreachable!("clap requires one input"),
    };

    let mut w = create(&args.out)?;
    for r in &records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    let merged = records.iter().filter(|r| r.merge_ou).count();
    writeln!(stdout, "{} pairs scored, {merged} merged by OU", records.len())?;
    Ok(())
}

fn default_grid(scored: &[(String, Score)], from: Option<f64>, to: Option<f64>, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(usage("--steps must be at least 1"));
    }
    let finite: Vec<f64> = scored.iter().filter_map(|(_, s)| s.finite()).collect();
    let lo = from.or_else(|| finite.iter().copied().reduce(f64::min)).unwrap_or(0.0);
    let hi = to.or_else(|| finite.iter().copied().reduce(f64::max)).unwrap_or(0.0);
    if lo > hi {
        return Err(usage(format!("empty threshold range {lo}..{hi}")));
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| if i == steps - 1 { hi } else { lo + step * i as f64 })
        .collect())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| parent.display().to_string())?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn read_tagged(path: &Path) -> Result<Vec<unithood::TaggedSentence>> {
    parse_tagged_input(open(path)?).with_context(|| path.display().to_string())
}

fn read_gold(path: &Path) -> Result<GoldSet> {
    GoldSet::read(open(path)?).with_context(|| path.display().to_string())
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).with_context(|| format!("{}:{}", path.display(), i + 1))?);
    }
    Ok(out)
}

fn read_pairs(path: &Path) -> Result<Vec<PairRecord>> {
    read_jsonl(path)
}

fn read_scored(path: &Path) -> Result<Vec<ScoredRecord>> {
    read_jsonl(path)
}
