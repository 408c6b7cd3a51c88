use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use soaguard_core::kri::KriPolicy;
use soaguard_core::par::Execution;
use soaguard_core::pipeline::{train_models, Analyzer, TrainingConfig, TrainingExamples};
use soaguard_core::synth::{generate_corpus, generate_corpus_with, CorpusMix};
use soaguard_core::table::{train_table_classifier, ForestConfig};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn bench(c: &mut Criterion) {
    let mix = CorpusMix::default();
    let corpus = generate_corpus(300, &mix, 1).expect("corpus");
    let examples = TrainingExamples::from_documents(corpus.iter().map(|(d, t)| (d, t.annotations.as_slice())));
    let (models, _) = train_models(&examples, &TrainingConfig::seeded(1), Execution::Parallel).expect("models");
    let analyzer = Analyzer::new(models, KriPolicy::default());
    let docs: Vec<_> = generate_corpus(200, &mix, 7).expect("corpus").into_iter().map(|(d, _)| d).collect();

    let mut group = c.benchmark_group("batch_analysis_200");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| analyzer.analyze_batch(&docs, exec)));
    }
    group.finish();

    let mut group = c.benchmark_group("corpus_generation_500");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| generate_corpus_with(500, &mix, 3, exec).expect("corpus"))
        });
    }
    group.finish();

    let config = ForestConfig { seed: 1, ..ForestConfig::default() };
    let mut group = c.benchmark_group("forest_training");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| train_table_classifier(&examples.tables, &config, exec).expect("forest"))
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
