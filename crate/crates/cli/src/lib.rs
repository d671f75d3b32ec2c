//! The `aurc` command line.
//!
//! [`run`] parses arguments, executes one subcommand and returns the process
//! exit code; output goes to the supplied writers so the whole CLI can be
//! driven in-process.

mod commands;
pub mod error;
pub mod manifest;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use aurc_core::metrics::{ClassSet, DEFAULT_TIE_SEED};
use aurc_core::tagger::Level;
use aurc_core::{Split, SplitScheme};
use clap::{Args, Parser, Subcommand, ValueEnum};

pub use error::{exit, CliError};
pub use manifest::{RunManifest, MANIFEST_SUFFIX};

/// Environment variable holding the default corpus path.
pub const CORPUS_ENV: &str = "AURC_CORPUS";

#[derive(Debug, Parser)]
#[command(name = "aurc", version, about = "Token-level argument unit recognition and classification toolkit")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CorpusArg {
    /// Canonical corpus JSONL
    #[arg(long, env = CORPUS_ENV, value_name = "PATH")]
    corpus: PathBuf,
}

#[derive(Debug, Args)]
struct SelectionArgs {
    /// Split scheme: in-domain or cross-domain
    #[arg(long, default_value = "in-domain", value_name = "SCHEME")]
    split: SplitScheme,

    /// Subset of the split scheme: train, dev or test
    #[arg(long, default_value = "dev", value_name = "SUBSET")]
    subset: Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MeasureArg {
    Token,
    Segment,
    Sentence,
    All,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert a TSV release (character-span annotations) into canonical JSONL
    Import {
        /// TSV file
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        /// key=value column mapping; defaults match the AURC-8 release layout
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        /// Also require the eight AURC-8 topics and 3-45 tokens per sentence
        #[arg(long)]
        check_aurc8: bool,
    },

    /// Corpus statistics per topic
    Stats {
        #[command(flatten)]
        corpus: CorpusArg,
        /// Restrict to one split scheme (requires --subset)
        #[arg(long, requires = "subset", value_name = "SCHEME")]
        split: Option<SplitScheme>,
        #[arg(long, requires = "split", value_name = "SUBSET")]
        subset: Option<Split>,
        #[arg(long)]
        json: bool,
    },

    /// Assign in-domain and cross-domain split tags
    Split {
        #[command(flatten)]
        corpus: CorpusArg,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        /// Keep split tags already present in the corpus
        #[arg(long)]
        released: bool,
        /// Do not require exactly 1000 sentences per topic
        #[arg(long)]
        any_size: bool,
        #[arg(long)]
        json: bool,
    },

    /// Majority-vote multi-annotator token labels into a corpus
    Aggregate {
        /// Annotation JSONL: one record per (sentence, annotator)
        #[arg(long, value_name = "PATH")]
        annotations: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        /// Corpus supplying tokens, topics and split tags missing from the annotations
        #[arg(long, value_name = "PATH")]
        base: Option<PathBuf>,
        /// Take gold labels from this corpus instead of voting
        #[arg(long, value_name = "PATH")]
        gold: Option<PathBuf>,
        /// Also report agreement with the gold labels for every worker count
        #[arg(long)]
        overlap: bool,
        #[arg(long)]
        json: bool,
    },

    /// Inter-annotator agreement (nominal alpha over token positions)
    Agree {
        #[arg(long, value_name = "PATH")]
        annotations: PathBuf,
        #[arg(long)]
        json: bool,
    },

    /// Rank-aggregate and probabilistically select scored candidates
    Sample {
        /// Candidate JSONL with doc_score, arg_score, stance and stance_score
        #[arg(long, value_name = "PATH")]
        candidates: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        /// Target per topic and stance
        #[arg(long, default_value_t = 500)]
        n: usize,
        /// Acceptance probability per visit
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Only these topic ids (repeatable)
        #[arg(long, value_name = "ID")]
        topic: Vec<String>,
        #[arg(long)]
        json: bool,
    },

    /// Train the tagger on the train subset of a split scheme
    Train {
        #[command(flatten)]
        corpus: CorpusArg,
        #[arg(long, default_value = "in-domain", value_name = "SCHEME")]
        split: SplitScheme,
        #[arg(long, default_value_t = 10)]
        epochs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// token or sentence targets
        #[arg(long, default_value = "token")]
        level: Level,
        #[arg(long, default_value_t = DEFAULT_TIE_SEED)]
        tie_seed: u64,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        #[arg(long)]
        json: bool,
    },

    /// Predict labels for a subset and write prediction JSONL
    Tag {
        #[command(flatten)]
        corpus: CorpusArg,
        /// Model file written by `train`
        #[arg(long, value_name = "PATH", required_unless_present = "baseline", conflicts_with = "baseline")]
        model: Option<PathBuf>,
        /// Use the majority baseline (NON everywhere) instead of a model
        #[arg(long)]
        baseline: bool,
        #[command(flatten)]
        selection: SelectionArgs,
        #[arg(long, default_value = "token")]
        level: Level,
        #[arg(long, default_value_t = DEFAULT_TIE_SEED)]
        tie_seed: u64,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },

    /// Score predictions with token, segment or sentence F1
    Eval {
        #[command(flatten)]
        corpus: CorpusArg,
        /// Prediction JSONL
        #[arg(long, value_name = "PATH")]
        pred: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        measure: MeasureArg,
        /// 3 (PRO/CON/NON) or 2 (ARG/NON)
        #[arg(long, default_value = "3")]
        classes: ClassSet,
        #[command(flatten)]
        selection: SelectionArgs,
        #[arg(long, default_value_t = DEFAULT_TIE_SEED)]
        tie_seed: u64,
        #[arg(long)]
        json: bool,
    },

    /// Evaluate over per-topic token streams with sliding windows
    WindowEval {
        #[command(flatten)]
        corpus: CorpusArg,
        #[arg(long, value_name = "PATH", required_unless_present_any = ["baseline", "oracle"], conflicts_with_all = ["baseline", "oracle"])]
        model: Option<PathBuf>,
        /// Majority baseline (NON everywhere)
        #[arg(long, conflicts_with = "oracle")]
        baseline: bool,
        /// Gold labels of each window (sanity check)
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 45)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[command(flatten)]
        selection: SelectionArgs,
        #[arg(long, default_value = "3")]
        classes: ClassSet,
        #[arg(long, default_value_t = DEFAULT_TIE_SEED)]
        tie_seed: u64,
        /// Permute sentence order within each topic before concatenating
        #[arg(long, value_name = "SEED")]
        shuffle_seed: Option<u64>,
        /// Also write the per-sentence predictions
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },

    /// Fill the argument template for labeled or predicted segments
    Render {
        #[command(flatten)]
        corpus: CorpusArg,
        /// Render segments of these predictions instead of the gold labels
        #[arg(long, value_name = "PATH")]
        pred: Option<PathBuf>,
        /// Only these sentence ids (repeatable)
        #[arg(long, value_name = "ID")]
        sentence: Vec<String>,
        #[arg(long)]
        json: bool,
    },

    /// Re-execute the run recorded in a manifest and compare output digests
    Rerun {
        #[arg(value_name = "MANIFEST")]
        manifest: PathBuf,
    },
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let argv: Vec<String> = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let mut ctx = commands::Context { out: stdout, err: stderr, argv };
    match commands::dispatch(cli.command, &mut ctx) {
        Ok(()) => exit::OK,
        Err(e) => {
            let _ = writeln!(ctx.err, "aurc: {}: {e}", e.category());
            e.exit_code()
        }
    }
}
