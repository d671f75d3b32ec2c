use std::collections::BTreeSet;
use std::fmt::Display;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use aurc_core::aggregate::{
    aggregate_corpus, load_annotations, overlap_curve, Aggregator, ExternalGold, MajorityVote,
};
use aurc_core::agreement::alpha_nominal;
use aurc_core::corpus::tsv::{import_tsv, TsvConfig};
use aurc_core::corpus::{
    compute_stats, labels_to_segments, load_corpus, make_splits, render_segment, save_corpus, CorpusStats,
    SplitPlan, SplitSizes, SplitSource,
};
use aurc_core::metrics::{evaluate, ClassSet, EvalReport, Measure, Predictions};
use aurc_core::sampling::{load_candidates, sample, SamplingConfig};
use aurc_core::tagger::{predict_corpus, train, Level, MajorityBaseline, SequenceLabeler, TaggerModel, TrainConfig};
use aurc_core::window::{boundary_free_eval, GoldOracle, WindowConfig, WindowLabeler};
use aurc_core::{Corpus, LabeledSentence, Split, SplitScheme, StanceLabel};
use serde::Serialize;

use crate::error::CliError;
use crate::manifest::{digest, RunManifest};
use crate::{Command, MeasureArg, SelectionArgs};

pub(crate) struct Context<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
    pub argv: Vec<String>,
}

impl Context<'_> {
    fn print(&mut self, text: impl Display) -> Result<(), CliError> {
        writeln!(self.out, "{text}").map_err(|e| CliError::io(Path::new("<stdout>"), e))
    }

    fn warn(&mut self, text: impl Display) {
        let _ = writeln!(self.err, "warning: {text}");
    }

    fn json(&mut self, value: &impl Serialize) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).map_err(aurc_core::Error::from)?;
        self.print(text)
    }

    fn manifest(&self, subcommand: &str) -> RunManifest {
        RunManifest::new(subcommand, &self.argv)
    }
}

fn subset(corpus: &Corpus, scheme: SplitScheme, split: Split) -> Result<Vec<&LabeledSentence>, CliError> {
    let sentences = corpus.subset(scheme, split);
    if sentences.is_empty() {
        return Err(CliError::Data(aurc_core::Error::Invalid(format!(
            "no {scheme} {split} sentences in the corpus; assign splits with `aurc split` first"
        ))));
    }
    Ok(sentences)
}

fn write_lines<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut writer = BufWriter::new(file);
    for item in items {
        let line = serde_json::to_string(&item).map_err(aurc_core::Error::from)?;
        writeln!(writer, "{line}").map_err(|e| CliError::io(path, e))?;
    }
    writer.flush().map_err(|e| CliError::io(path, e))
}

pub(crate) fn dispatch(command: Command, ctx: &mut Context<'_>) -> Result<(), CliError> {
    match command {
        Command::Import { input, config, out, check_aurc8 } => import(ctx, &input, config.as_deref(), &out, check_aurc8),
        Command::Stats { corpus, split, subset, json } => stats(ctx, &corpus.corpus, split.zip(subset), json),
        Command::Split { corpus, out, released, any_size, json } => split(ctx, &corpus.corpus, &out, released, any_size, json),
        Command::Aggregate { annotations, out, base, gold, overlap, json } => {
            aggregate(ctx, &annotations, &out, base.as_deref(), gold.as_deref(), overlap, json)
        }
        Command::Agree { annotations, json } => agree(ctx, &annotations, json),
        Command::Sample { candidates, out, n, p, seed, topic, json } => {
            sample_cmd(ctx, &candidates, &out, SamplingConfig { n, p, seed }, &topic, json)
        }
        Command::Train { corpus, split, epochs, seed, level, tie_seed, out, json } => {
            let config = TrainConfig { epochs, seed, level, tie_seed, ..TrainConfig::default() };
            train_cmd(ctx, &corpus.corpus, split, &config, &out, json)
        }
        Command::Tag { corpus, model, baseline: _, selection, level, tie_seed, out } => {
            tag(ctx, &corpus.corpus, model.as_deref(), &selection, level, tie_seed, &out)
        }
        Command::Eval { corpus, pred, measure, classes, selection, tie_seed, json } => {
            eval(ctx, &corpus.corpus, &pred, measure, classes, &selection, tie_seed, json)
        }
        Command::WindowEval {
            corpus,
            model,
            baseline: _,
            oracle,
            size,
            stride,
            selection,
            classes,
            tie_seed,
            shuffle_seed,
            out,
            json,
        } => {
            let window = WindowConfig { size, stride };
            window_eval(ctx, &corpus.corpus, model.as_deref(), oracle, window, &selection, classes, tie_seed, shuffle_seed, out.as_deref(), json)
        }
        Command::Render { corpus, pred, sentence, json } => render(ctx, &corpus.corpus, pred.as_deref(), &sentence, json),
        Command::Rerun { manifest } => rerun(ctx, &manifest),
    }
}

fn import(ctx: &mut Context<'_>, input: &Path, config_path: Option<&Path>, out: &Path, check_aurc8: bool) -> Result<(), CliError> {
    let mut inputs = vec![input.to_path_buf()];
    let config = match config_path {
        Some(path) => {
            inputs.push(path.to_path_buf());
            TsvConfig::load(path)?
        }
        None => TsvConfig::default(),
    };
    if let Some(splits) = &config.splits_file {
        inputs.push(splits.clone());
    }
    let report = import_tsv(input, &config)?;
    for warning in &report.warnings {
        ctx.warn(warning);
    }
    if check_aurc8 {
        report.corpus.validate_aurc8()?;
    }
    save_corpus(&report.corpus, out)?;
    ctx.manifest("import").finish(&inputs, &[out.to_path_buf()])?;
    ctx.print(format!(
        "imported {} sentences ({} warnings) into {}",
        report.corpus.len(),
        report.warnings.len(),
        out.display()
    ))
}

#[derive(Serialize)]
struct StatsOutput<'a> {
    split: Option<SplitScheme>,
    subset: Option<Split>,
    #[serde(flatten)]
    stats: &'a CorpusStats,
}

fn stats(ctx: &mut Context<'_>, path: &Path, selection: Option<(SplitScheme, Split)>, json: bool) -> Result<(), CliError> {
    let corpus = load_corpus(path)?;
    let stats = match selection {
        Some((scheme, split)) => compute_stats(subset(&corpus, scheme, split)?),
        None => compute_stats(&corpus),
    };
    if json {
        ctx.json(&StatsOutput {
            split: selection.map(|s| s.0),
            subset: selection.map(|s| s.1),
            stats: &stats,
        })
    } else {
        ctx.print(&stats)
    }
}

fn split(ctx: &mut Context<'_>, path: &Path, out: &Path, released: bool, any_size: bool, json: bool) -> Result<(), CliError> {
    let corpus = load_corpus(path)?;
    let mut plan = SplitPlan::aurc8();
    if any_size {
        plan.per_topic = None;
    }
    let source = if released { SplitSource::PreferReleased } else { SplitSource::Recompute };
    let tagged = make_splits(&corpus, &plan, source)?;
    save_corpus(&tagged, out)?;
    ctx.manifest("split").finish(&[path.to_path_buf()], &[out.to_path_buf()])?;
    let sizes = SplitSizes::of(&tagged);
    if json {
        return ctx.json(&sizes);
    }
    let (a, b, c) = sizes.in_domain;
    let (d, e, f) = sizes.cross_domain;
    ctx.print(format!("in-domain     train {a:>5}  dev {b:>5}  test {c:>5}"))?;
    ctx.print(format!("cross-domain  train {d:>5}  dev {e:>5}  test {f:>5}"))
}

#[derive(Serialize)]
struct OverlapPoint {
    workers: usize,
    percent: f64,
}

#[derive(Serialize)]
struct AggregateOutput {
    sentences: usize,
    annotators: usize,
    aggregator: &'static str,
    overlap: Vec<OverlapPoint>,
}

fn aggregate(
    ctx: &mut Context<'_>,
    annotations: &Path,
    out: &Path,
    base: Option<&Path>,
    gold: Option<&Path>,
    overlap: bool,
    json: bool,
) -> Result<(), CliError> {
    let mut inputs = vec![annotations.to_path_buf()];
    let file = load_annotations(annotations)?;
    let base_corpus = match base {
        Some(path) => {
            inputs.push(path.to_path_buf());
            Some(load_corpus(path)?)
        }
        None => None,
    };
    let (aggregator, name): (Box<dyn Aggregator>, &'static str) = match gold {
        Some(path) => {
            inputs.push(path.to_path_buf());
            (Box::new(ExternalGold::from_corpus(&load_corpus(path)?)), "external")
        }
        None => (Box::new(MajorityVote), "majority"),
    };
    let corpus = aggregate_corpus(&file, aggregator.as_ref(), base_corpus.as_ref())?;
    save_corpus(&corpus, out)?;
    ctx.manifest("aggregate").finish(&inputs, &[out.to_path_buf()])?;

    let annotators: BTreeSet<&str> = file
        .sets
        .iter()
        .flat_map(|s| s.annotations.keys().map(String::as_str))
        .collect();
    let mut points = Vec::new();
    if overlap {
        let reference = corpus
            .iter()
            .map(|s| (s.sentence_id.clone(), s.labels.clone()))
            .collect();
        let max_k = file.sets.iter().map(|s| s.annotator_count()).min().unwrap_or(0);
        for k in 1..=max_k {
            points.push(OverlapPoint {
                workers: k,
                percent: overlap_curve(&reference, &file.sets, k)?,
            });
        }
    }
    let output = AggregateOutput {
        sentences: corpus.len(),
        annotators: annotators.len(),
        aggregator: name,
        overlap: points,
    };
    if json {
        return ctx.json(&output);
    }
    ctx.print(format!(
        "aggregated {} sentences from {} annotators ({} labels) into {}",
        output.sentences,
        output.annotators,
        output.aggregator,
        out.display()
    ))?;
    for p in &output.overlap {
        ctx.print(format!("  {:>2} workers: {:6.2}% token overlap with gold", p.workers, p.percent))?;
    }
    Ok(())
}

fn agree(ctx: &mut Context<'_>, annotations: &Path, json: bool) -> Result<(), CliError> {
    let file = load_annotations(annotations)?;
    let report = alpha_nominal(&file.sets)?;
    if json {
        ctx.json(&report)
    } else {
        ctx.print(&report)
    }
}

fn sample_cmd(
    ctx: &mut Context<'_>,
    path: &Path,
    out: &Path,
    config: SamplingConfig,
    topics: &[String],
    json: bool,
) -> Result<(), CliError> {
    let mut candidates = load_candidates(path)?;
    if !topics.is_empty() {
        candidates.retain(|c| topics.contains(&c.topic_id));
    }
    let selection = sample(candidates, &config)?;
    write_lines(out, &selection.selected)?;
    let mut manifest = ctx.manifest("sample");
    manifest.seed = Some(config.seed);
    manifest.finish(&[path.to_path_buf()], &[out.to_path_buf()])?;
    if json {
        #[derive(Serialize)]
        struct SampleOutput<'a> {
            n: usize,
            p: f64,
            seed: u64,
            selected: usize,
            groups: &'a [aurc_core::sampling::GroupSummary],
        }
        return ctx.json(&SampleOutput {
            n: config.n,
            p: config.p,
            seed: config.seed,
            selected: selection.selected.len(),
            groups: &selection.groups,
        });
    }
    ctx.print("topic  stance    input  candidates  selected")?;
    for g in &selection.groups {
        ctx.print(format!(
            "{:<6} {:<6} {:>8} {:>11} {:>9}",
            g.topic_id, g.stance, g.input, g.candidates, g.selected
        ))?;
    }
    ctx.print(format!("{} sentences selected into {}", selection.selected.len(), out.display()))
}

fn train_cmd(ctx: &mut Context<'_>, path: &Path, scheme: SplitScheme, config: &TrainConfig, out: &Path, json: bool) -> Result<(), CliError> {
    let corpus = load_corpus(path)?;
    let sentences = subset(&corpus, scheme, Split::Train)?;
    let model = train(&sentences, config)?;
    model.save(out)?;
    let mut manifest = ctx.manifest("train");
    manifest.seed = Some(config.seed);
    manifest.tie_seed = Some(config.tie_seed);
    manifest.finish(&[path.to_path_buf()], &[out.to_path_buf()])?;
    let info = model.info.clone().expect("trained models carry training info");
    if json {
        #[derive(Serialize)]
        struct TrainOutput {
            split: SplitScheme,
            features: usize,
            #[serde(flatten)]
            info: aurc_core::tagger::TrainingInfo,
        }
        return ctx.json(&TrainOutput {
            split: scheme,
            features: model.feature_count(),
            info,
        });
    }
    ctx.print(format!(
        "trained on {} {scheme} train sentences ({} level): {} epochs, {} features",
        info.train_sentences,
        info.level,
        info.epochs,
        model.feature_count()
    ))?;
    ctx.print(format!("mistakes per epoch: {:?}", info.mistakes_per_epoch))?;
    ctx.print(format!("model written to {}", out.display()))
}

fn labeler(model: Option<&Path>) -> Result<Box<dyn SequenceLabeler>, CliError> {
    Ok(match model {
        Some(path) => Box::new(TaggerModel::load(path)?),
        None => Box::new(MajorityBaseline::default()),
    })
}

fn tag(
    ctx: &mut Context<'_>,
    path: &Path,
    model: Option<&Path>,
    selection: &SelectionArgs,
    level: Level,
    tie_seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    let corpus = load_corpus(path)?;
    let sentences = subset(&corpus, selection.split, selection.subset)?;
    let labeler = labeler(model)?;
    let predictions = predict_corpus(labeler.as_ref(), &sentences, level, tie_seed);
    predictions.save(out)?;
    let mut inputs = vec![path.to_path_buf()];
    inputs.extend(model.map(Path::to_path_buf));
    let mut manifest = ctx.manifest("tag");
    manifest.tie_seed = Some(tie_seed);
    manifest.finish(&inputs, &[out.to_path_buf()])?;
    ctx.print(format!(
        "tagged {} {} {} sentences ({} level) into {}",
        predictions.len(),
        selection.split,
        selection.subset,
        level,
        out.display()
    ))
}

#[derive(Serialize)]
struct EvalOutput<'a> {
    split: SplitScheme,
    subset: Split,
    classes: ClassSet,
    tie_seed: u64,
    reports: &'a [EvalReport],
}

fn measures(arg: MeasureArg) -> Vec<Measure> {
    match arg {
        MeasureArg::Token => vec![Measure::Token],
        MeasureArg::Segment => vec![Measure::Segment],
        MeasureArg::Sentence => vec![Measure::Sentence],
        MeasureArg::All => Measure::ALL.to_vec(),
    }
}

#[allow(clippy::too_many_arguments)]
fn eval(
    ctx: &mut Context<'_>,
    path: &Path,
    pred: &Path,
    measure: MeasureArg,
    classes: ClassSet,
    selection: &SelectionArgs,
    tie_seed: u64,
    json: bool,
) -> Result<(), CliError> {
    let corpus = load_corpus(path)?;
    let gold = subset(&corpus, selection.split, selection.subset)?;
    let predictions = Predictions::load(pred)?;
    let reports = measures(measure)
        .into_iter()
        .map(|m| evaluate(m, &gold, &predictions, classes, tie_seed))
        .collect::<Result<Vec<_>, _>>()?;
    if json {
        return ctx.json(&EvalOutput {
            split: selection.split,
            subset: selection.subset,
            classes,
            tie_seed,
            reports: &reports,
        });
    }
    ctx.print(format!("{} {} ({} sentences)", selection.split, selection.subset, gold.len()))?;
    for r in &reports {
        ctx.print(r)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn window_eval(
    ctx: &mut Context<'_>,
    path: &Path,
    model: Option<&Path>,
    oracle: bool,
    window: WindowConfig,
    selection: &SelectionArgs,
    classes: ClassSet,
    tie_seed: u64,
    shuffle_seed: Option<u64>,
    out: Option<&Path>,
    json: bool,
) -> Result<(), CliError> {
    window.validate()?;
    let corpus = load_corpus(path)?;
    let sentences = subset(&corpus, selection.split, selection.subset)?;
    let labeler: Box<dyn WindowLabeler> = match (model, oracle) {
        (_, true) => Box::new(GoldOracle),
        (Some(path), false) => Box::new(TaggerModel::load(path)?),
        (None, false) => Box::new(MajorityBaseline::default()),
    };
    let report = boundary_free_eval(labeler.as_ref(), &sentences, &window, classes, tie_seed, shuffle_seed)?;
    if let Some(out) = out {
        report.predictions.save(out)?;
        let mut inputs = vec![path.to_path_buf()];
        inputs.extend(model.map(Path::to_path_buf));
        let mut manifest = ctx.manifest("window-eval");
        manifest.tie_seed = Some(tie_seed);
        manifest.seed = shuffle_seed;
        manifest.finish(&inputs, &[out.to_path_buf()])?;
    }
    if json {
        #[derive(Serialize)]
        struct WindowOutput<'a> {
            split: SplitScheme,
            subset: Split,
            #[serde(flatten)]
            report: &'a aurc_core::window::WindowEvalReport,
        }
        return ctx.json(&WindowOutput {
            split: selection.split,
            subset: selection.subset,
            report: &report,
        });
    }
    ctx.print(format!(
        "{} {}: {} topic streams, {} windows (size {}, stride {})",
        selection.split, selection.subset, report.streams, report.windows, window.size, window.stride
    ))?;
    for r in &report.reports {
        ctx.print(r)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct RenderedArgument {
    sentence_id: String,
    label: StanceLabel,
    start: usize,
    end: usize,
    statement: String,
}

fn render(ctx: &mut Context<'_>, path: &Path, pred: Option<&Path>, ids: &[String], json: bool) -> Result<(), CliError> {
    let corpus = load_corpus(path)?;
    let predictions = pred.map(Predictions::load).transpose()?;
    let mut rendered = Vec::new();
    for sentence in &corpus {
        if !ids.is_empty() && !ids.contains(&sentence.sentence_id) {
            continue;
        }
        let labels = match &predictions {
            Some(p) => match p.get(&sentence.sentence_id) {
                Some(labels) if labels.len() == sentence.len() => labels,
                Some(labels) => {
                    return Err(CliError::Data(aurc_core::Error::LengthMismatch {
                        sentence_id: sentence.sentence_id.clone(),
                        expected: sentence.len(),
                        actual: labels.len(),
                    }))
                }
                None => continue,
            },
            None => &sentence.labels,
        };
        for segment in labels_to_segments(labels)? {
            rendered.push(RenderedArgument {
                sentence_id: sentence.sentence_id.clone(),
                label: segment.label,
                start: segment.start,
                end: segment.end,
                statement: render_segment(sentence, &segment)?,
            });
        }
    }
    if let Some(missing) = ids.iter().find(|id| corpus.get(id).is_none()) {
        return Err(CliError::Data(aurc_core::Error::Invalid(format!("sentence {missing} not in corpus"))));
    }
    if json {
        return ctx.json(&rendered);
    }
    for r in &rendered {
        ctx.print(format!("{}\t{}\t[{},{})\t{}", r.sentence_id, r.label, r.start, r.end, r.statement))?;
    }
    Ok(())
}

fn rerun(ctx: &mut Context<'_>, path: &Path) -> Result<(), CliError> {
    let recorded = RunManifest::load(path)?;
    for input in &recorded.inputs {
        let now = digest(&PathBuf::from(&input.path))?;
        if now.sha256 != input.sha256 {
            return Err(CliError::Mismatch(format!("input {} changed since the recorded run", input.path)));
        }
    }
    let args = std::iter::once("aurc".to_string()).chain(recorded.args.iter().cloned());
    let code = crate::run(args, &mut *ctx.out, &mut *ctx.err);
    if code != 0 {
        return Err(CliError::Mismatch(format!("replayed run exited with code {code}")));
    }
    let mut changed = Vec::new();
    for output in &recorded.outputs {
        let now = digest(&PathBuf::from(&output.path))?;
        if now.sha256 == output.sha256 {
            ctx.print(format!("identical: {}", output.path))?;
        } else {
            changed.push(output.path.clone());
        }
    }
    if changed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Mismatch(format!("outputs differ from the recorded run: {}", changed.join(", "))))
    }
}
