use std::collections::BTreeMap;

use aurc_bench::corpus;
use aurc_core::aggregate::AnnotationSet;
use aurc_core::agreement::alpha_nominal;
use aurc_core::metrics::{evaluate, ClassSet, Measure, Predictions, DEFAULT_TIE_SEED};
use aurc_core::tagger::MajorityBaseline;
use aurc_core::window::{boundary_free_eval, WindowConfig};
use aurc_core::StanceLabel;
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn bench_metrics(c: &mut Criterion) {
    let corpus = corpus(1000, 2);
    let gold: Vec<_> = corpus.iter().collect();
    let mut pred = Predictions::new();
    for s in &gold {
        pred.insert(s.sentence_id.clone(), vec![StanceLabel::Non; s.len()]);
    }
    for measure in Measure::ALL {
        c.bench_function(&format!("{measure} F1, 8000 sentences"), |b| {
            b.iter(|| evaluate(measure, black_box(&gold), &pred, ClassSet::Three, DEFAULT_TIE_SEED).unwrap())
        });
    }
    let dev: Vec<_> = corpus.iter().filter(|s| s.topic.id == "T1").collect();
    c.bench_function("boundary-free majority, one topic", |b| {
        b.iter(|| {
            boundary_free_eval(&MajorityBaseline::default(), black_box(&dev), &WindowConfig::default(), ClassSet::Three, DEFAULT_TIE_SEED, None)
                .unwrap()
        })
    });
}

fn bench_alpha(c: &mut Criterion) {
    let corpus = corpus(200, 3);
    let sets: Vec<AnnotationSet> = corpus
        .iter()
        .map(|s| {
            let mut shifted = s.labels.clone();
            shifted.rotate_left(1);
            let annotations = BTreeMap::from([("a".to_string(), s.labels.clone()), ("b".to_string(), shifted)]);
            AnnotationSet::new(s.sentence_id.clone(), annotations).unwrap()
        })
        .collect();
    c.bench_function("alpha, 1600 sentences x 2 annotators", |b| b.iter(|| alpha_nominal(black_box(&sets)).unwrap()));
}

criterion_group!(benches, bench_metrics, bench_alpha);
criterion_main!(benches);
