use std::fs;
use std::path::{Path, PathBuf};

use aurc_cli::{exit, run, RunManifest, MANIFEST_SUFFIX};
use aurc_core::corpus::synthetic::{generate, SyntheticConfig};
use aurc_core::corpus::{load_corpus, save_corpus};
use aurc_core::metrics::Predictions;
use serde_json::Value;
use tempfile::TempDir;

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn aurc(args: &[&str]) -> Output {
    let mut stdout = Vec::new();
    let mut stderr = Vec::new();
    let code = run(std::iter::once("aurc").chain(args.iter().copied()), &mut stdout, &mut stderr);
    Output {
        code,
        stdout: String::from_utf8(stdout).unwrap(),
        stderr: String::from_utf8(stderr).unwrap(),
    }
}

fn ok(args: &[&str]) -> String {
    let out = aurc(args);
    assert_eq!(out.code, 0, "aurc {args:?} failed: {}", out.stderr);
    out.stdout
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// A small synthetic corpus (8 topics x 60 sentences) with split tags.
fn fixture() -> (TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.jsonl");
    let corpus = generate(&SyntheticConfig { sentences_per_topic: 60, seed: 11, ..Default::default() }).unwrap();
    save_corpus(&corpus, &raw).unwrap();
    let split = dir.path().join("corpus.jsonl");
    ok(&["split", "--corpus", p(&raw), "--out", p(&split), "--any-size"]);
    (dir, split)
}

#[test]
fn help_and_version_succeed() {
    let out = aurc(&["--help"]);
    assert_eq!(out.code, exit::OK);
    for sub in ["import", "stats", "split", "aggregate", "agree", "sample", "train", "tag", "eval", "window-eval", "render"] {
        assert!(out.stdout.contains(sub), "help lists {sub}");
    }
    assert_eq!(aurc(&["--version"]).code, exit::OK);
}

#[test]
fn exit_codes_by_category() {
    let unknown = aurc(&["stats", "--corpus", "x.jsonl", "--bogus"]);
    assert_eq!(unknown.code, exit::USAGE);
    assert_eq!(aurc(&["frobnicate"]).code, exit::USAGE);

    let missing = aurc(&["stats", "--corpus", "/nonexistent/corpus.jsonl"]);
    assert_eq!(missing.code, exit::IO);
    assert!(missing.stderr.contains("io error"), "{}", missing.stderr);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    fs::write(&bad, r#"{"sentence_id":"s1","topic_id":"T1","topic_name":"abortion","tokens":["a","b","c"],"labels":["PRO","MAYBE","NON"],"split_in_domain":null,"split_cross_domain":null}"#).unwrap();
    let invalid = aurc(&["stats", "--corpus", p(&bad)]);
    assert_eq!(invalid.code, exit::DATA);
    assert!(invalid.stderr.contains(":1:"), "error names the line: {}", invalid.stderr);

    let (_dir, corpus) = fixture();
    let window = aurc(&["window-eval", "--corpus", p(&corpus), "--baseline", "--size", "3", "--stride", "4"]);
    assert_eq!(window.code, exit::DATA);
}

#[test]
fn split_is_deterministic_and_writes_a_manifest() {
    let (dir, corpus) = fixture();
    let again = dir.path().join("again.jsonl");
    ok(&["split", "--corpus", p(&corpus), "--out", p(&again), "--any-size"]);
    assert_eq!(fs::read(&corpus).unwrap(), fs::read(&again).unwrap());

    let manifest = RunManifest::load(&PathBuf::from(format!("{}{MANIFEST_SUFFIX}", again.display()))).unwrap();
    assert_eq!(manifest.subcommand, "split");
    assert_eq!(manifest.inputs.len(), 1);
    assert_eq!(manifest.outputs[0].sha256.len(), 64);
    assert_eq!(manifest.args[0], "split");

    let json: Value = serde_json::from_str(&ok(&["split", "--corpus", p(&corpus), "--out", p(&again), "--any-size", "--released", "--json"])).unwrap();
    // 60 per topic: 42/6/12 in-domain per topic.
    assert_eq!(json["in_domain"], serde_json::json!([252, 36, 72]));
}

#[test]
fn corpus_from_environment_variable() {
    let (_dir, corpus) = fixture();
    // Only this test touches the variable.
    std::env::set_var(aurc_cli::CORPUS_ENV, &corpus);
    let out = aurc(&["stats", "--json"]);
    std::env::remove_var(aurc_cli::CORPUS_ENV);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let json: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(json["total"]["sentences"], 480);
}

#[test]
fn stats_json_schema() {
    let (_dir, corpus) = fixture();
    let json: Value = serde_json::from_str(&ok(&["stats", "--corpus", p(&corpus), "--json"])).unwrap();
    assert!(json["split"].is_null());
    assert_eq!(json["topics"].as_array().unwrap().len(), 8);
    for key in ["sentences", "arg_sentences", "arg_units", "non_arg_sentences", "increase_percent", "mean_segment_length"] {
        assert!(json["total"].get(key).is_some(), "missing {key}");
    }
    let dev: Value = serde_json::from_str(&ok(&["stats", "--corpus", p(&corpus), "--split", "in-domain", "--subset", "dev", "--json"])).unwrap();
    assert_eq!(dev["split"], "in-domain");
    assert_eq!(dev["total"]["sentences"], 36);
    let text = ok(&["stats", "--corpus", p(&corpus)]);
    assert!(text.contains("total"));
}

#[test]
fn majority_predictions_score_like_the_library() {
    let (dir, corpus) = fixture();
    let pred = dir.path().join("majority.jsonl");
    ok(&["tag", "--corpus", p(&corpus), "--baseline", "--split", "in-domain", "--subset", "test", "--out", p(&pred)]);
    let preds = Predictions::load(&pred).unwrap();
    assert_eq!(preds.len(), 72);
    assert!(preds.iter().all(|(_, l)| l.iter().all(|x| *x == aurc_core::StanceLabel::Non)));

    let json: Value = serde_json::from_str(&ok(&[
        "eval", "--corpus", p(&corpus), "--pred", p(&pred), "--split", "in-domain", "--subset", "test", "--measure", "token", "--json",
    ]))
    .unwrap();
    let loaded = load_corpus(&corpus).unwrap();
    let gold = loaded.subset(aurc_core::SplitScheme::InDomain, aurc_core::Split::Test);
    let expected = aurc_core::metrics::token_f1(&gold, &preds, aurc_core::metrics::ClassSet::Three).unwrap();
    assert!((json["reports"][0]["macro_f1"].as_f64().unwrap() - expected.macro_f1).abs() < 1e-12);
    assert_eq!(json["reports"].as_array().unwrap().len(), 1);

    let all: Value = serde_json::from_str(&ok(&["eval", "--corpus", p(&corpus), "--pred", p(&pred), "--subset", "test", "--json"])).unwrap();
    let names: Vec<&str> = all["reports"].as_array().unwrap().iter().map(|r| r["measure"].as_str().unwrap()).collect();
    assert_eq!(names, ["token", "segment", "sentence"]);
}

#[test]
fn missing_predictions_are_a_data_error() {
    let (dir, corpus) = fixture();
    let pred = dir.path().join("dev.jsonl");
    ok(&["tag", "--corpus", p(&corpus), "--baseline", "--subset", "dev", "--out", p(&pred)]);
    let out = aurc(&["eval", "--corpus", p(&corpus), "--pred", p(&pred), "--subset", "test"]);
    assert_eq!(out.code, exit::DATA);
    assert!(out.stderr.contains("prediction missing"), "{}", out.stderr);
}

#[test]
fn train_tag_eval_pipeline_is_reproducible() {
    let (dir, corpus) = fixture();
    let model = dir.path().join("model.json");
    let model2 = dir.path().join("model2.json");
    ok(&["train", "--corpus", p(&corpus), "--epochs", "3", "--seed", "4", "--out", p(&model)]);
    ok(&["train", "--corpus", p(&corpus), "--epochs", "3", "--seed", "4", "--out", p(&model2)]);
    assert_eq!(fs::read(&model).unwrap(), fs::read(&model2).unwrap());

    let pred = dir.path().join("pred.jsonl");
    ok(&["tag", "--corpus", p(&corpus), "--model", p(&model), "--out", p(&pred)]);
    let base = dir.path().join("base.jsonl");
    ok(&["tag", "--corpus", p(&corpus), "--baseline", "--out", p(&base)]);
    let score = |file: &Path| -> f64 {
        let v: Value = serde_json::from_str(&ok(&["eval", "--corpus", p(&corpus), "--pred", p(file), "--measure", "token", "--json"])).unwrap();
        v["reports"][0]["macro_f1"].as_f64().unwrap()
    };
    assert!(score(&pred) > score(&base));

    let sentence_pred = dir.path().join("sentence.jsonl");
    ok(&["tag", "--corpus", p(&corpus), "--model", p(&model), "--level", "sentence", "--out", p(&sentence_pred)]);
    for (_, labels) in Predictions::load(&sentence_pred).unwrap().iter() {
        assert!(labels.iter().all(|l| *l == labels[0]));
    }

    let text = ok(&["rerun", &format!("{}{MANIFEST_SUFFIX}", pred.display())]);
    assert!(text.contains("identical"), "{text}");
}

#[test]
fn window_eval_oracle_and_baseline() {
    let (dir, corpus) = fixture();
    let oracle: Value = serde_json::from_str(&ok(&["window-eval", "--corpus", p(&corpus), "--oracle", "--json"])).unwrap();
    for r in oracle["reports"].as_array().unwrap() {
        assert_eq!(r["macro_f1"].as_f64().unwrap(), 1.0);
    }
    assert_eq!(oracle["config"]["size"], 45);
    assert_eq!(oracle["streams"], 6);

    let windowed: Value = serde_json::from_str(&ok(&["window-eval", "--corpus", p(&corpus), "--baseline", "--json"])).unwrap();
    let pred = dir.path().join("base.jsonl");
    ok(&["tag", "--corpus", p(&corpus), "--baseline", "--out", p(&pred)]);
    let standard: Value = serde_json::from_str(&ok(&["eval", "--corpus", p(&corpus), "--pred", p(&pred), "--json"])).unwrap();
    assert_eq!(windowed["reports"], standard["reports"]);

    let out = dir.path().join("window.jsonl");
    ok(&["window-eval", "--corpus", p(&corpus), "--baseline", "--shuffle-seed", "3", "--out", p(&out)]);
    assert!(Path::new(&format!("{}{MANIFEST_SUFFIX}", out.display())).exists());
}

#[test]
fn aggregate_and_agree() {
    let dir = tempfile::tempdir().unwrap();
    let annotations = dir.path().join("ann.jsonl");
    let lines = [
        r#"{"sentence_id":"s1","annotator_id":"a","labels":["PRO","PRO","PRO","NON","NON","NON"],"tokens":["t0","t1","t2","t3","t4","t5"],"topic_id":"T8"}"#,
        r#"{"sentence_id":"s1","annotator_id":"b","labels":["NON","NON","NON","PRO","PRO","PRO"]}"#,
        r#"{"sentence_id":"s1","annotator_id":"c","labels":["PRO","PRO","NON","NON","NON","PRO"]}"#,
    ];
    fs::write(&annotations, lines.join("\n")).unwrap();
    let out = dir.path().join("gold.jsonl");
    let json: Value = serde_json::from_str(&ok(&["aggregate", "--annotations", p(&annotations), "--out", p(&out), "--overlap", "--json"])).unwrap();
    assert_eq!(json["sentences"], 1);
    assert_eq!(json["annotators"], 3);
    assert_eq!(json["overlap"].as_array().unwrap().len(), 3);
    let gold = load_corpus(&out).unwrap();
    // Votes per token: PPN, PPN, PNN, NPN, NPN, NPP -> P P N N N P
    assert_eq!(gold.sentences[0].labels, aurc_core::corpus::segments_to_labels(
        &[aurc_core::Segment::new(aurc_core::StanceLabel::Pro, 0, 2).unwrap(), aurc_core::Segment::new(aurc_core::StanceLabel::Pro, 5, 6).unwrap()], 6).unwrap());
    assert_eq!(gold.sentences[0].topic.name, "school uniforms");

    let two = dir.path().join("two.jsonl");
    fs::write(&two, lines[..2].join("\n")).unwrap();
    let report: Value = serde_json::from_str(&ok(&["agree", "--annotations", p(&two), "--json"])).unwrap();
    assert!((report["alpha"].as_f64().unwrap() + 5.0 / 6.0).abs() < 1e-12);
    assert!(ok(&["agree", "--annotations", p(&two)]).contains("alpha"));
}

#[test]
fn sample_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let candidates = dir.path().join("cand.jsonl");
    let mut lines = Vec::new();
    for i in 0..40 {
        let stance = if i % 2 == 0 { "PRO" } else { "CON" };
        lines.push(format!(
            r#"{{"topic_id":"T1","sentence_id":"c{i}","tokens":["a","b","c","d"],"doc_score":{},"arg_score":{},"stance":"{stance}","stance_score":{}}}"#,
            (i * 7 % 40) as f64 / 40.0,
            0.5 + (i % 5) as f64 / 10.0,
            (i * 13 % 40) as f64 / 40.0
        ));
    }
    fs::write(&candidates, lines.join("\n")).unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    let c = dir.path().join("c.jsonl");
    let summary: Value = serde_json::from_str(&ok(&["sample", "--candidates", p(&candidates), "--out", p(&a), "--n", "5", "--seed", "1", "--json"])).unwrap();
    ok(&["sample", "--candidates", p(&candidates), "--out", p(&b), "--n", "5", "--seed", "1"]);
    ok(&["sample", "--candidates", p(&candidates), "--out", p(&c), "--n", "5", "--seed", "2"]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
    assert_eq!(summary["selected"], 10);
    assert_eq!(summary["groups"].as_array().unwrap().len(), 2);
    assert_eq!(fs::read_to_string(&a).unwrap().lines().count(), 10);
}

#[test]
fn import_tsv_release_layout() {
    let dir = tempfile::tempdir().unwrap();
    let tsv = dir.path().join("data.tsv");
    fs::write(
        &tsv,
        "topic\tsentence_hash\tsentence\tmerged_segments\n\
         school uniforms\th1\tSchool uniforms, they say, create unity and end bullying.\t[(17,62)_pro]\n\
         gun control\th2\tGuns are sold here.\t[]\n",
    )
    .unwrap();
    let out = dir.path().join("corpus.jsonl");
    ok(&["import", "--input", p(&tsv), "--out", p(&out)]);
    let corpus = load_corpus(&out).unwrap();
    assert_eq!(corpus.len(), 2);
    assert_eq!(corpus.sentences[0].topic.id, "T8");
    assert!(corpus.sentences[0].is_argumentative());
    assert!(!corpus.sentences[1].is_argumentative());
}

#[test]
fn render_gold_segments() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    fs::write(
        &corpus,
        r#"{"sentence_id":"u1","topic_id":"T8","topic_name":"school uniforms","tokens":["Supporters","say","they","may","create","a","sense","of","positive","unity"],"labels":["NON","NON","PRO","PRO","PRO","PRO","PRO","PRO","PRO","PRO"],"split_in_domain":null,"split_cross_domain":null}"#,
    )
    .unwrap();
    let text = ok(&["render", "--corpus", p(&corpus)]);
    assert_eq!(text.trim_end(), "u1\tPRO\t[2,10)\tSchool uniforms should be supported because they may create a sense of positive unity");
    let json: Value = serde_json::from_str(&ok(&["render", "--corpus", p(&corpus), "--json"])).unwrap();
    assert_eq!(json[0]["start"], 2);
    assert_eq!(aurc(&["render", "--corpus", p(&corpus), "--sentence", "nope"]).code, exit::DATA);
}
