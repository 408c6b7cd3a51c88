use soaguard_core::eval::evaluate;
use soaguard_core::kri::{KriId, KriPolicy};
use soaguard_core::par::Execution;
use soaguard_core::pipeline::{train_models, Analyzer, ModelSet, TrainingConfig, TrainingExamples};
use soaguard_core::synth::{generate_corpus, CorpusMix, GroundTruth};
use soaguard_core::text::TextTask;

fn trained(seed: u64, n: usize, exec: Execution) -> ModelSet {
    let corpus = generate_corpus(n, &CorpusMix::default().with_noise(0.0), seed).unwrap();
    let examples = TrainingExamples::from_documents(corpus.iter().map(|(d, t)| (d, t.annotations.as_slice())));
    train_models(&examples, &TrainingConfig::seeded(seed), exec).unwrap().0
}

#[test]
fn models_learn_the_noiseless_corpus() {
    let models = trained(1, 250, Execution::Parallel);
    let test = generate_corpus(60, &CorpusMix::default().with_noise(0.0), 2).unwrap();
    let analyzer = Analyzer::new(models, KriPolicy::default());
    let docs: Vec<_> = test.iter().map(|(d, _)| d.clone()).collect();
    let truths: Vec<GroundTruth> = test.into_iter().map(|(_, t)| t).collect();
    let report = evaluate(&analyzer.analyze_batch(&docs, Execution::Parallel), &truths);
    for task in TextTask::ALL {
        assert!(report.macro_f1(task) >= 0.95, "{task}: {}", report.macro_f1(task));
    }
    assert!(report.table.macro_f1() >= 0.95, "table: {}", report.table.macro_f1());
    for k in KriId::ALL {
        assert!(report.kri_match_rate(k) >= 0.9, "{k}: {}", report.kri_match_rate(k));
    }
}

#[test]
fn training_is_reproducible_and_execution_independent() {
    let a = trained(5, 120, Execution::Sequential);
    let b = trained(5, 120, Execution::Threads(2));
    assert_eq!(a.checksums(), b.checksums());
}

#[test]
fn model_set_save_load() {
    let models = trained(6, 120, Execution::Parallel);
    let dir = tempfile::tempdir().unwrap();
    models.save(dir.path()).unwrap();
    let back = ModelSet::load(dir.path()).unwrap();
    assert_eq!(back, models);

    // a text model stored under the wrong task name is refused
    use soaguard_core::error::ModelError;
    let insurance = std::fs::read(dir.path().join("insurance.json")).unwrap();
    std::fs::copy(dir.path().join("position.json"), dir.path().join("insurance.json")).unwrap();
    assert!(matches!(ModelSet::load(dir.path()), Err(ModelError::TaskMismatch { .. })));
    std::fs::write(dir.path().join("insurance.json"), insurance).unwrap();
    std::fs::remove_file(dir.path().join("table.json")).unwrap();
    assert!(matches!(ModelSet::load(dir.path()), Err(ModelError::Io { .. })));
}

#[test]
fn batch_matches_single_analysis() {
    let models = trained(8, 120, Execution::Parallel);
    let analyzer = Analyzer::new(models, KriPolicy::default());
    let docs: Vec<_> = generate_corpus(12, &CorpusMix::default(), 9).unwrap().into_iter().map(|(d, _)| d).collect();
    let batch = analyzer.analyze_batch(&docs, Execution::Parallel);
    for (doc, a) in docs.iter().zip(&batch) {
        assert_eq!(&analyzer.analyze(doc), a);
    }
    assert_eq!(analyzer.analyze_batch(&docs, Execution::Sequential), batch);
}
