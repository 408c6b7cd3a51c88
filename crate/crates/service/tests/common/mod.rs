#![allow(dead_code)]

use std::sync::{Arc, OnceLock};

use soaguard_core::document::SoaDocument;
use soaguard_core::kri::KriPolicy;
use soaguard_core::par::Execution;
use soaguard_core::pipeline::{train_models, Analyzer, ModelSet, TrainingConfig, TrainingExamples};
use soaguard_core::synth::{generate_corpus, CorpusMix};
use soaguard_service::Store;

pub fn models() -> &'static ModelSet {
    static MODELS: OnceLock<ModelSet> = OnceLock::new();
    MODELS.get_or_init(|| {
        let corpus = generate_corpus(150, &CorpusMix::default(), 1).unwrap();
        let examples = TrainingExamples::from_documents(corpus.iter().map(|(d, t)| (d, t.annotations.as_slice())));
        train_models(&examples, &TrainingConfig::seeded(1), Execution::Parallel).unwrap().0
    })
}

pub fn analyzer() -> Arc<Analyzer> {
    Arc::new(Analyzer::new(models().clone(), KriPolicy::default()))
}

pub fn documents(n: usize, seed: u64) -> Vec<SoaDocument> {
    generate_corpus(n, &CorpusMix::default(), seed).unwrap().into_iter().map(|(d, _)| d).collect()
}

/// Store with `docs` ingested and analysed.
pub fn analysed_store(root: &std::path::Path, docs: &[SoaDocument]) -> Store {
    let store = Store::open(root, Some(analyzer())).unwrap();
    for d in docs {
        store.ingest(d.clone()).unwrap();
        store.analyze(&d.id).unwrap();
    }
    store
}
