//! `soaguard` subcommands.

pub mod manifest;

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use soaguard_core::document::parse_document;
use soaguard_core::eval::{evaluate, EvaluationReport};
use soaguard_core::kri::{KriId, KriPolicy};
use soaguard_core::par::Execution;
use soaguard_core::pipeline::{train_models, Analysis, Analyzer, ModelSet, TrainingConfig, TrainingExamples};
use soaguard_core::synth::{generate_corpus_with, read_corpus, read_documents, write_corpus, CorpusMix};
use soaguard_core::text::TextTask;
use soaguard_service::report::batch_csv;
use soaguard_service::{Store, DATA_DIR_ENV};

use crate::manifest::{manifest_path, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "soaguard", version, about = "Key-risk-indicator analysis of Statement of Advice documents")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic corpus: one document and one truth file per SoA.
    Generate(GenerateArgs),
    /// Train the four sentence classifiers and the table forest.
    Train(TrainArgs),
    /// Analyse one document.
    Analyze(AnalyzeArgs),
    /// Analyse a directory of documents and export the spreadsheet.
    Batch(BatchArgs),
    /// Compare predictions with a corpus's truth files.
    Evaluate(EvaluateArgs),
    /// Export the spreadsheet for every analysed document in a data directory.
    Report(ReportArgs),
    /// Run the review service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Directory written by `train`.
    #[arg(long)]
    pub models: PathBuf,
    /// Policy JSON; defaults apply when omitted.
    #[arg(long)]
    pub policy: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct JobsArg {
    /// Worker threads; 1 runs sequentially, 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Corpus mix JSON; the default mix when omitted.
    #[arg(long)]
    pub mix: Option<PathBuf>,
    /// Overrides every profile's label-noise rate.
    #[arg(long)]
    pub noise: Option<f64>,
    #[command(flatten)]
    pub jobs: JobsArg,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Generated corpus with truth files.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub jobs: JobsArg,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub doc: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Defaults to `<doc stem>.assessment.json` in the working directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Output directory for batch.csv and one assessment per document.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub jobs: JobsArg,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "evaluation.json")]
    pub out: PathBuf,
    #[command(flatten)]
    pub jobs: JobsArg,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Store root; falls back to SOAGUARD_DATA_DIR.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Store root; falls back to SOAGUARD_DATA_DIR.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Without models the service cannot analyse.
    #[arg(long)]
    pub models: Option<PathBuf>,
    #[arg(long)]
    pub policy: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => generate(a),
        Command::Train(a) => train(a),
        Command::Analyze(a) => analyze(a),
        Command::Batch(a) => batch(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Report(a) => report(a),
        Command::Serve(a) => serve(a),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let raw = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_slice(&raw).with_context(|| format!("parsing {}", path.display()))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn load_policy(path: Option<&Path>) -> Result<KriPolicy> {
    match path {
        None => Ok(KriPolicy::default()),
        Some(p) => {
            let raw = fs::read(p).with_context(|| format!("reading {}", p.display()))?;
            KriPolicy::from_json(&raw).with_context(|| format!("loading policy {}", p.display()))
        }
    }
}

fn load_analyzer(args: &ModelArgs, manifest: &mut RunManifest) -> Result<Analyzer> {
    let models =
        ModelSet::load(&args.models).with_context(|| format!("loading models from {}", args.models.display()))?;
    let policy = load_policy(args.policy.as_deref())?;
    manifest.input("models", &args.models);
    if let Some(p) = &args.policy {
        manifest.input("policy", p);
    }
    manifest.model_checksums = models.checksums();
    manifest.policy_hash = Some(policy.hash());
    Ok(Analyzer::new(models, policy))
}

fn data_dir(flag: Option<&Path>) -> Result<PathBuf> {
    match flag {
        Some(p) => Ok(p.to_path_buf()),
        None => match std::env::var_os(DATA_DIR_ENV) {
            Some(v) if !v.is_empty() => Ok(PathBuf::from(v)),
            _ => bail!("no data directory: pass --data-dir or set {DATA_DIR_ENV}"),
        },
    }
}

fn generate(a: GenerateArgs) -> Result<()> {
    let mut manifest = RunManifest::start("generate");
    manifest.seed("corpus", a.seed);
    manifest.jobs = Some(a.jobs.jobs);
    let mut mix = match &a.mix {
        Some(p) => {
            manifest.input("mix", p);
            read_json::<CorpusMix>(p)?
        }
        None => CorpusMix::default(),
    };
    if let Some(noise) = a.noise {
        mix = mix.with_noise(noise);
    }
    let corpus = generate_corpus_with(a.n, &mix, a.seed, Execution::from_jobs(a.jobs.jobs))?;
    write_corpus(&a.out, &corpus)?;
    println!("wrote {} documents to {}", corpus.len(), a.out.display());
    manifest.output(&a.out);
    manifest.finish(&manifest_path(&a.out))?;
    Ok(())
}

fn train(a: TrainArgs) -> Result<()> {
    let mut manifest = RunManifest::start("train");
    manifest.input("corpus", &a.corpus).seed("training", a.seed);
    manifest.jobs = Some(a.jobs.jobs);
    let corpus = read_corpus(&a.corpus)?;
    if corpus.is_empty() {
        bail!("{} holds no documents", a.corpus.display());
    }
    let examples = TrainingExamples::from_documents(corpus.iter().map(|(d, t)| (d, t.annotations.as_slice())));
    let (models, summary) =
        train_models(&examples, &TrainingConfig::seeded(a.seed), Execution::from_jobs(a.jobs.jobs))?;
    models.save(&a.out).with_context(|| format!("writing models to {}", a.out.display()))?;
    let summary_path = manifest_path(&a.out).with_file_name(format!(
        "{}.training.json",
        a.out.file_name().map_or("models".into(), |n| n.to_string_lossy())
    ));
    write_file(&summary_path, serde_json::to_string_pretty(&summary)? + "\n")?;
    println!("trained on {} documents; models in {}", corpus.len(), a.out.display());
    manifest.model_checksums = models.checksums();
    manifest.output(&a.out).output(&summary_path);
    manifest.finish(&manifest_path(&a.out))?;
    Ok(())
}

fn analysis_json(analysis: &Analysis) -> String {
    serde_json::to_string_pretty(analysis).expect("analysis serializes") + "\n"
}

fn analyze(a: AnalyzeArgs) -> Result<()> {
    let mut manifest = RunManifest::start("analyze");
    let analyzer = load_analyzer(&a.model, &mut manifest)?;
    manifest.input("doc", &a.doc);
    let raw = fs::read(&a.doc).with_context(|| format!("reading {}", a.doc.display()))?;
    let doc = parse_document(&raw).with_context(|| format!("parsing {}", a.doc.display()))?;
    let start = Instant::now();
    let analysis = analyzer.analyze(&doc);
    let ms = start.elapsed().as_secs_f64() * 1000.0;
    manifest.timed(&doc.id, ms, analysis.assessment.overall.as_str());
    let out = a.out.unwrap_or_else(|| {
        let stem = a.doc.file_stem().map_or("document".into(), |s| s.to_string_lossy());
        PathBuf::from(format!("{stem}.assessment.json"))
    });
    write_file(&out, analysis_json(&analysis))?;
    manifest.output(&out);
    manifest.finish(&manifest_path(&out))?;
    Ok(())
}

fn batch(a: BatchArgs) -> Result<()> {
    let mut manifest = RunManifest::start("batch");
    let analyzer = load_analyzer(&a.model, &mut manifest)?;
    manifest.input("corpus", &a.corpus);
    manifest.jobs = Some(a.jobs.jobs);
    let docs = read_documents(&a.corpus)?;
    if docs.is_empty() {
        bail!("{} holds no documents", a.corpus.display());
    }
    let exec = Execution::from_jobs(a.jobs.jobs);
    let timed: Vec<(Analysis, f64)> = soaguard_core::par::map(exec, &docs, |d| {
        let start = Instant::now();
        let analysis = analyzer.analyze(d);
        (analysis, start.elapsed().as_secs_f64() * 1000.0)
    });
    let assessments_dir = a.out.join("assessments");
    for (analysis, ms) in &timed {
        let id = &analysis.assessment.document_id;
        manifest.timed(id, *ms, analysis.assessment.overall.as_str());
        write_file(&assessments_dir.join(format!("{id}.json")), analysis_json(analysis))?;
    }
    let csv_path = a.out.join("batch.csv");
    let assessments: Vec<_> = timed.into_iter().map(|(a, _)| a.assessment).collect();
    write_file(&csv_path, batch_csv(&assessments))?;
    println!("wrote {}", csv_path.display());
    manifest.output(&csv_path).output(&assessments_dir);
    manifest.finish(&manifest_path(&a.out))?;
    Ok(())
}

/// Human-readable evaluation summary.
pub fn summary_lines(report: &EvaluationReport) -> Vec<String> {
    let mut lines = vec![format!("documents\t{}", report.documents)];
    for task in TextTask::ALL {
        lines.push(format!("macro_f1 {}\t{:.4}", task.name(), report.macro_f1(task)));
    }
    lines.push(format!("macro_f1 table\t{:.4}", report.table.macro_f1()));
    for k in KriId::ALL {
        lines.push(format!("match {}\t{:.4}", k.as_str(), report.kri_match_rate(k)));
    }
    lines.push(format!("match overall\t{:.4}", report.overall.rate()));
    lines
}

fn evaluate_cmd(a: EvaluateArgs) -> Result<()> {
    let mut manifest = RunManifest::start("evaluate");
    let analyzer = load_analyzer(&a.model, &mut manifest)?;
    manifest.input("corpus", &a.corpus);
    manifest.jobs = Some(a.jobs.jobs);
    let corpus = read_corpus(&a.corpus)?;
    if corpus.is_empty() {
        bail!("{} holds no documents", a.corpus.display());
    }
    let (docs, truths): (Vec<_>, Vec<_>) = corpus.into_iter().unzip();
    let exec = Execution::from_jobs(a.jobs.jobs);
    let timed: Vec<(Analysis, f64)> = soaguard_core::par::map(exec, &docs, |d| {
        let start = Instant::now();
        let analysis = analyzer.analyze(d);
        (analysis, start.elapsed().as_secs_f64() * 1000.0)
    });
    for (analysis, ms) in &timed {
        manifest.timed(&analysis.assessment.document_id, *ms, analysis.assessment.overall.as_str());
    }
    let analyses: Vec<Analysis> = timed.into_iter().map(|(a, _)| a).collect();
    let report = evaluate(&analyses, &truths);
    for line in summary_lines(&report) {
        println!("{line}");
    }
    write_file(&a.out, serde_json::to_string_pretty(&report)? + "\n")?;
    manifest.output(&a.out);
    manifest.finish(&manifest_path(&a.out))?;
    Ok(())
}

fn report(a: ReportArgs) -> Result<()> {
    let mut manifest = RunManifest::start("report");
    let root = data_dir(a.data_dir.as_deref())?;
    manifest.input("data-dir", &root);
    let store = Store::open(&root, None)?;
    let assessments = store.assessments();
    write_file(&a.out, batch_csv(&assessments))?;
    println!("wrote {} rows to {}", assessments.len(), a.out.display());
    manifest.output(&a.out);
    manifest.finish(&manifest_path(&a.out))?;
    Ok(())
}

fn serve(a: ServeArgs) -> Result<()> {
    let mut manifest = RunManifest::start("serve");
    let root = data_dir(a.data_dir.as_deref())?;
    manifest.input("data-dir", &root);
    let analyzer = match &a.models {
        Some(models) => {
            let args = ModelArgs { models: models.clone(), policy: a.policy.clone() };
            Some(Arc::new(load_analyzer(&args, &mut manifest)?))
        }
        None => None,
    };
    let store = Arc::new(Store::open(&root, analyzer)?);
    let stamp = manifest.started_at.format("%Y%m%dT%H%M%S%.3fZ").to_string();
    manifest.output(&root);
    manifest.finish(&root.join("manifests").join(format!("serve-{stamp}.json")))?;
    println!("listening on {} with data in {}", a.addr, root.display());
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(soaguard_service::http::serve(store, a.addr))?;
    Ok(())
}
