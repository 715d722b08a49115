//! The `mhscreen` command line.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use mhscreen_core::eval::{confusion, report};
use mhscreen_core::explain::{
    attribute, highlight, narrate, zero_shot_classify, AliasTable, ChatBackend, Explanation, ZeroShotOutcome,
    DEFAULT_HIGHLIGHTS, DISCLAIMER,
};
use mhscreen_core::features::{
    class_correlation, class_profiles, class_profiles_filtered, fit_tfidf, SparseVector, TfidfModel,
    DEFAULT_MAX_FEATURES,
};
use mhscreen_core::models::{train_logreg, train_svm, LinearClassifier, ModelKind, TrainConfig};
use mhscreen_core::pipeline::{prepare, BalancePlan, Stopwords, SynonymLexicon};
use mhscreen_core::{clean_text, ClassLabel, Corpus, NUM_CLASSES};
use serde_json::json;

use crate::artifacts::{self, sha256_hex, write_json};
use crate::config::Config;
use crate::io::{load_corpus, write_corpus_jsonl, CorpusFormat};
use crate::llm::{backend_from_config, DisabledClient};
use crate::manifest::ManifestBuilder;
use crate::predictions::{score, write_predictions, PredictionRow, Scored};
use crate::reports::{self, AblationReport, EvalOutput};
use crate::service::{self, AppState, LoadedModel};
use crate::store::EventStore;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SPLIT_RATIO: f64 = 0.8;

#[derive(Debug, Parser)]
#[command(
    name = "mhscreen",
    version,
    about = "Mental-health and cyberbullying post screening toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a CSV or JSONL corpus and rewrite it as canonical JSONL.
    Ingest(IngestArgs),
    /// Deduplicate, split, then balance the training pool.
    Prepare(PrepareArgs),
    /// Fit a classifier (and its vectorizer if the file does not exist yet).
    Train(TrainArgs),
    /// Score a model or an external prediction file on a test corpus.
    Evaluate(EvaluateArgs),
    /// Per-class top terms and class correlation.
    Analyze(AnalyzeArgs),
    /// Explain one prediction.
    Explain(ExplainArgs),
    /// Zero-shot classification through the configured LLM.
    Zeroshot(ZeroshotArgs),
    /// Compare a model trained on the unbalanced pool with one trained on the balanced set.
    Ablation(AblationArgs),
    /// Run the review queue HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelChoice {
    Logreg,
    Svm,
}

impl ModelChoice {
    fn name(self) -> &'static str {
        match self {
            ModelChoice::Logreg => "logreg",
            ModelChoice::Svm => "svm",
        }
    }
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<CorpusFormat>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Balance plan; the default caps and targets every class at 2,400.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Training share of each class.
    #[arg(long, default_value_t = DEFAULT_SPLIT_RATIO)]
    pub ratio: f64,
    /// Synonym lexicon (`word = syn1, syn2` lines); a small built-in one otherwise.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub model: ModelChoice,
    #[arg(long)]
    pub train: PathBuf,
    /// Loaded if it exists, otherwise fitted on --train and written here.
    #[arg(long)]
    pub vectorizer: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_FEATURES)]
    pub max_features: usize,
    /// Skip cross-validation and fit at this C.
    #[arg(long = "c")]
    pub fixed_c: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long, required_unless_present = "predictions", conflicts_with = "predictions")]
    pub model: Option<PathBuf>,
    /// Defaults to vectorizer.json next to the model.
    #[arg(long, requires = "model")]
    pub vectorizer: Option<PathBuf>,
    /// CSV `id,pred_label[,p_<class>...]` from an external model.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Defaults to the directory of the model or prediction file.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Name used in the reports.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Fitted on --in when omitted.
    #[arg(long)]
    pub vectorizer: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    #[arg(long)]
    pub include_stopwords: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_FEATURES)]
    pub max_features: usize,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub vectorizer: PathBuf,
    #[arg(long)]
    pub text: String,
    /// Service config; only the `llm` table is used.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_HIGHLIGHTS)]
    pub highlights: usize,
}

#[derive(Debug, Args)]
pub struct ZeroshotArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Alias table replacing the built-in one.
    #[arg(long)]
    pub aliases: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AblationArgs {
    /// Output directory of `prepare`.
    #[arg(long)]
    pub run_dir: PathBuf,
    #[arg(long, value_enum, default_value = "logreg")]
    pub model: ModelChoice,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MAX_FEATURES)]
    pub max_features: usize,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub host: Option<String>,
    #[arg(long)]
    pub port: Option<u16>,
}

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    Data(anyhow::Error),
    Internal(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Data(_) => EXIT_DATA,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

trait OrData<T> {
    fn data(self) -> Result<T, CliError>;
}

impl<T, E: Into<anyhow::Error>> OrData<T> for Result<T, E> {
    fn data(self) -> Result<T, CliError> {
        self.map_err(|e| CliError::Data(e.into()))
    }
}

trait OrInternal<T> {
    fn internal(self, what: &str) -> Result<T, CliError>;
}

impl<T, E: Into<anyhow::Error>> OrInternal<T> for Result<T, E> {
    fn internal(self, what: &str) -> Result<T, CliError> {
        self.map_err(|e| CliError::Internal(e.into().context(what.to_string())))
    }
}

type CliResult<T = ()> = Result<T, CliError>;

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let (CliError::Data(err) | CliError::Internal(err)) = &e;
            eprintln!("error: {}", render_chain(err));
            e.exit_code()
        }
    }
}

/// Joins the error chain, skipping causes already quoted by their parent.
fn render_chain(err: &anyhow::Error) -> String {
    let mut out = String::new();
    let mut last = String::new();
    for cause in err.chain() {
        let msg = cause.to_string();
        if !last.contains(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
        last = msg;
    }
    out
}

fn dispatch(cmd: Command) -> CliResult {
    match cmd {
        Command::Ingest(a) => ingest(a),
        Command::Prepare(a) => prepare_cmd(a),
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Analyze(a) => analyze(a),
        Command::Explain(a) => explain(a),
        Command::Zeroshot(a) => zeroshot(a),
        Command::Ablation(a) => ablation(a),
        Command::Serve(a) => serve(a),
    }
}

fn create_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .internal("output directory")
}

fn parent_dir(p: &Path) -> PathBuf {
    match p.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn write_text(path: &Path, text: &str) -> CliResult {
    fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .internal("output")
}

fn load(path: &Path) -> CliResult<Corpus> {
    load_corpus(path, None).data()
}

fn ingest(a: IngestArgs) -> CliResult {
    let corpus = load_corpus(&a.input, a.format).data()?;
    let dir = parent_dir(&a.out);
    create_dir(&dir)?;
    write_corpus_jsonl(&a.out, &corpus)
        .with_context(|| a.out.display().to_string())
        .internal("writing corpus")?;
    let counts = json!(ClassLabel::ALL
        .iter()
        .map(|c| (c.as_str(), corpus.count(*c)))
        .collect::<std::collections::BTreeMap<_, _>>());
    eprintln!("{} posts written to {}", corpus.len(), a.out.display());
    ManifestBuilder::new("ingest", None)
        .config("format", a.format.map(|f| format!("{f:?}").to_lowercase()))
        .config("class_counts", counts)
        .input(&a.input)
        .output(&a.out)
        .write(&dir)
        .internal("manifest")?;
    Ok(())
}

fn load_plan(path: Option<&Path>, seed: u64) -> CliResult<BalancePlan> {
    let mut plan = match path {
        Some(p) => {
            let src = fs::read_to_string(p).with_context(|| p.display().to_string()).data()?;
            BalancePlan::parse(&src)
                .with_context(|| format!("plan {}", p.display()))
                .data()?
        }
        None => BalancePlan::default(),
    };
    plan.seed = seed;
    plan.validate().data()?;
    Ok(plan)
}

fn prepare_cmd(a: PrepareArgs) -> CliResult {
    let corpus = load(&a.input)?;
    let plan = load_plan(a.plan.as_deref(), a.seed)?;
    let lexicon = match &a.lexicon {
        Some(p) => {
            let src = fs::read_to_string(p).with_context(|| p.display().to_string()).data()?;
            SynonymLexicon::parse(&src)
                .with_context(|| format!("lexicon {}", p.display()))
                .data()?
        }
        None => SynonymLexicon::bundled(),
    };
    let prepared = prepare(&corpus, a.ratio, &plan, &lexicon).data()?;
    create_dir(&a.out_dir)?;
    let out = |name: &str| a.out_dir.join(name);
    let files = [
        (out("train_pool.jsonl"), &prepared.split.train_pool),
        (out("train.jsonl"), &prepared.balance.corpus),
        (out("test.jsonl"), &prepared.split.test_pool),
    ];
    for (path, c) in &files {
        write_corpus_jsonl(path, c)
            .with_context(|| path.display().to_string())
            .internal("writing corpus")?;
    }
    write_text(&out("table1.csv"), &reports::table1_csv(&prepared.table))?;
    write_text(&out("table1.txt"), &reports::table1_text(&prepared.table))?;
    write_text(&out("plan.cfg"), &plan.to_config_string())?;
    let shortfalls: Vec<_> = prepared
        .balance
        .per_class
        .iter()
        .filter(|c| c.shortfall() > 0)
        .map(|c| json!({"class": c.class, "target": c.target, "reached": c.after_augment, "attempts": c.attempts}))
        .collect();
    for s in &shortfalls {
        tracing::warn!(%s, "augmentation stopped short of target");
    }
    let summary = json!({
        "input_posts": corpus.len(),
        "duplicates_removed": prepared.dedup_removed,
        "label_conflicts": prepared.label_conflicts,
        "ratio": a.ratio,
        "seed": a.seed,
        "shortfalls": shortfalls,
    });
    write_json(&out("prepare_summary.json"), &summary).internal("summary")?;
    eprint!("{}", reports::table1_text(&prepared.table));

    let mut m = ManifestBuilder::new("prepare", Some(a.seed));
    m.config("ratio", a.ratio)
        .config("plan", plan.to_config_string())
        .input(&a.input);
    for p in [&a.plan, &a.lexicon].into_iter().flatten() {
        m.input(p);
    }
    for name in [
        "train_pool.jsonl",
        "train.jsonl",
        "test.jsonl",
        "table1.csv",
        "table1.txt",
        "plan.cfg",
        "prepare_summary.json",
    ] {
        m.output(&out(name));
    }
    m.write(&a.out_dir).internal("manifest")?;
    Ok(())
}

fn vectors(v: &TfidfModel, c: &Corpus) -> (Vec<SparseVector>, Vec<ClassLabel>) {
    c.posts().iter().map(|p| (v.transform(&p.clean_text), p.label)).unzip()
}

fn fit_vectorizer(c: &Corpus, max_features: usize) -> CliResult<TfidfModel> {
    fit_tfidf(c.texts(), max_features).data()
}

fn fit_model(
    choice: ModelChoice,
    v: &TfidfModel,
    train: &Corpus,
    seed: u64,
    fixed_c: Option<f64>,
) -> CliResult<LinearClassifier> {
    let (x, y) = vectors(v, train);
    let mut config = match choice {
        ModelChoice::Logreg => TrainConfig::logreg(seed),
        ModelChoice::Svm => TrainConfig::svm(seed),
    };
    if let Some(c) = fixed_c {
        config.c_grid = vec![c];
    }
    let m = match choice {
        ModelChoice::Logreg => train_logreg(&x, &y, v.len(), &config),
        ModelChoice::Svm => train_svm(&x, &y, v.len(), &config),
    };
    m.data()
}

fn train(a: TrainArgs) -> CliResult {
    let corpus = load(&a.train)?;
    let fitted_here = !a.vectorizer.exists();
    let v = if fitted_here {
        let v = fit_vectorizer(&corpus, a.max_features)?;
        create_dir(&parent_dir(&a.vectorizer))?;
        artifacts::save_vectorizer(&a.vectorizer, &v).internal("vectorizer")?;
        v
    } else {
        artifacts::load_vectorizer(&a.vectorizer).data()?
    };
    let model = fit_model(a.model, &v, &corpus, a.seed, a.fixed_c)?;
    let dir = parent_dir(&a.out);
    create_dir(&dir)?;
    artifacts::save_model(&a.out, &model).internal("model")?;
    eprintln!(
        "{} trained on {} posts, C = {}, converged: {}",
        a.model.name(),
        corpus.len(),
        model.chosen_c,
        model.training_meta.converged
    );
    let mut m = ManifestBuilder::new("train", Some(a.seed));
    m.config("model", a.model.name())
        .config("max_features", a.max_features)
        .config("fixed_c", a.fixed_c)
        .input(&a.train);
    if fitted_here {
        m.output(&a.vectorizer);
    } else {
        m.input(&a.vectorizer);
    }
    m.output(&a.out).write(&dir).internal("manifest")?;
    Ok(())
}

/// Predictions of `m` on `test`, with probabilities for probabilistic models.
pub fn predict_corpus(m: &LinearClassifier, v: &TfidfModel, test: &Corpus) -> CliResult<Vec<PredictionRow>> {
    test.posts()
        .iter()
        .map(|p| {
            let x = v.transform(&p.clean_text);
            let (predicted, probs) = match m.kind {
                ModelKind::MultinomialLogistic => {
                    let dist = m.predict_proba(&x).data()?;
                    let mut probs = [0.0; NUM_CLASSES];
                    for (c, &pr) in dist.classes.iter().zip(&dist.probs) {
                        probs[c.index()] = pr;
                    }
                    (dist.argmax().0, Some(probs))
                }
                ModelKind::LinearSvmOvr => (m.predict(&x), None),
            };
            Ok(PredictionRow {
                id: p.id.clone(),
                predicted,
                probs,
            })
        })
        .collect()
}

fn write_eval(dir: &Path, name: &str, scored: &Scored) -> CliResult<Vec<PathBuf>> {
    let mut written = vec![dir.join("eval.json"), dir.join("eval.txt"), dir.join("confusion.csv")];
    write_json(&written[0], &EvalOutput::new(name, scored)).internal("eval report")?;
    write_text(&written[1], &reports::eval_text(name, &scored.report, scored.auprc))?;
    write_text(&written[2], &reports::confusion_csv(&scored.confusion))?;
    if let Some(cal) = &scored.calibration {
        let p = dir.join("calibration.csv");
        write_text(&p, &reports::calibration_csv(cal))?;
        written.push(p);
    }
    if let Some(curve) = &scored.pr_curve {
        let p = dir.join("pr_curve.csv");
        write_text(&p, &reports::pr_curve_csv(curve))?;
        written.push(p);
    }
    Ok(written)
}

fn evaluate(a: EvaluateArgs) -> CliResult {
    let test = load(&a.test)?;
    let mut m = ManifestBuilder::new("evaluate", None);
    m.input(&a.test);
    let (scored, name, dir, mut outputs) = if let Some(model_path) = &a.model {
        let vec_path = a
            .vectorizer
            .clone()
            .unwrap_or_else(|| parent_dir(model_path).join("vectorizer.json"));
        let model = artifacts::load_model(model_path).data()?;
        let v = artifacts::load_vectorizer(&vec_path).data()?;
        m.input(model_path).input(&vec_path);
        let rows = predict_corpus(&model, &v, &test)?;
        let dir = a.out_dir.clone().unwrap_or_else(|| parent_dir(model_path));
        create_dir(&dir)?;
        let pred_path = dir.join("predictions.csv");
        write_predictions(&pred_path, &rows).internal("predictions")?;
        let scored = score(&pred_path, &test, &rows).data()?;
        let kind = match model.kind {
            ModelKind::MultinomialLogistic => "tfidf_logreg",
            ModelKind::LinearSvmOvr => "tfidf_svm",
        };
        (
            scored,
            a.name.clone().unwrap_or_else(|| kind.into()),
            dir,
            vec![pred_path],
        )
    } else {
        let path = a.predictions.as_ref().expect("clap requires model or predictions");
        m.input(path);
        let scored = crate::predictions::score_prediction_file(&test, path).data()?;
        let dir = a.out_dir.clone().unwrap_or_else(|| parent_dir(path));
        create_dir(&dir)?;
        let name = a.name.clone().unwrap_or_else(|| {
            path.file_stem()
                .map_or("external".into(), |s| s.to_string_lossy().into_owned())
        });
        (scored, name, dir, vec![])
    };
    outputs.extend(write_eval(&dir, &name, &scored)?);
    eprint!("{}", reports::eval_text(&name, &scored.report, scored.auprc));
    m.config("name", &name);
    for o in &outputs {
        m.output(o);
    }
    m.write(&dir).internal("manifest")?;
    Ok(())
}

fn analyze(a: AnalyzeArgs) -> CliResult {
    let corpus = load(&a.input)?;
    let v = match &a.vectorizer {
        Some(p) => artifacts::load_vectorizer(p).data()?,
        None => fit_vectorizer(&corpus, a.max_features)?,
    };
    let present: Vec<ClassLabel> = ClassLabel::ALL.into_iter().filter(|&c| corpus.count(c) > 0).collect();
    let stop = Stopwords::english();
    // Word-level view: unigrams only.
    let top = class_profiles_filtered(&v, &corpus, &present, a.top, |t| {
        !t.contains(' ') && (a.include_stopwords || !stop.contains(t))
    })
    .data()?;
    let full = class_profiles(&v, &corpus, &present, 0).data()?;
    let corr = class_correlation(&full).data()?;
    create_dir(&a.out_dir)?;
    let outputs = [
        (a.out_dir.join("top_terms.csv"), reports::top_terms_csv(&top)),
        (a.out_dir.join("top_terms.txt"), reports::top_terms_text(&top)),
        (a.out_dir.join("correlation.csv"), reports::correlation_csv(&corr)),
    ];
    let mut m = ManifestBuilder::new("analyze", None);
    m.config("top", a.top)
        .config("include_stopwords", a.include_stopwords)
        .input(&a.input);
    if let Some(p) = &a.vectorizer {
        m.input(p);
    } else {
        m.config("max_features", a.max_features);
    }
    for (path, text) in &outputs {
        write_text(path, text)?;
        m.output(path);
    }
    eprint!("{}", outputs[1].1);
    m.write(&a.out_dir).internal("manifest")?;
    Ok(())
}

fn llm_backend(config: Option<&Path>) -> CliResult<Box<dyn ChatBackend + Send + Sync>> {
    match config {
        Some(p) => {
            let cfg = Config::load(p).data()?;
            backend_from_config(&cfg.llm).internal("LLM client")
        }
        None => Ok(Box::new(DisabledClient)),
    }
}

fn explain(a: ExplainArgs) -> CliResult {
    let model = artifacts::load_model(&a.model).data()?;
    let v = artifacts::load_vectorizer(&a.vectorizer).data()?;
    let llm = llm_backend(a.config.as_deref())?;
    let clean = clean_text(&a.text);
    if clean.is_empty() {
        return Err(CliError::Data(anyhow::anyhow!("text is empty after cleaning")));
    }
    let dist = model.predict_proba(&v.transform(&clean)).data()?;
    let (predicted, confidence) = dist.argmax();
    let attr = attribute(&model, &v, &clean, predicted).data()?;
    let highlights = highlight(&attr.tokens, a.highlights);
    let narration = narrate(llm.as_ref(), &clean, predicted, confidence, &highlights);
    if let Some(f) = &narration.failure {
        tracing::warn!(error = %f, "narration fell back to the template");
    }
    let e = Explanation {
        predicted,
        confidence,
        attributions: attr.tokens,
        highlights,
        narrative: narration.text,
        narrative_source: narration.source,
        disclaimer: DISCLAIMER.to_string(),
    };
    let text = serde_json::to_string_pretty(&e).internal("explanation")?;
    // A closed pipe downstream is not an error worth reporting.
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    Ok(())
}

fn zeroshot(a: ZeroshotArgs) -> CliResult {
    let cfg = Config::load(&a.config).data()?;
    if !cfg.llm.enabled {
        return Err(CliError::Data(anyhow::anyhow!(
            "{}: llm.enabled is false",
            a.config.display()
        )));
    }
    let aliases = match &a.aliases {
        Some(p) => {
            let src = fs::read_to_string(p).with_context(|| p.display().to_string()).data()?;
            AliasTable::parse(&src)
                .with_context(|| p.display().to_string())
                .data()?
        }
        None => AliasTable::bundled(),
    };
    let test = load(&a.input)?;
    let llm = backend_from_config(&cfg.llm).internal("LLM client")?;
    let posts = test.posts();
    let results: Mutex<Vec<Option<Result<ZeroShotOutcome, String>>>> = Mutex::new(vec![None; posts.len()]);
    let next = Mutex::new(0usize);
    std::thread::scope(|s| {
        for _ in 0..cfg.llm.max_in_flight {
            s.spawn(|| loop {
                let i = {
                    let mut n = next.lock().unwrap();
                    let i = *n;
                    *n += 1;
                    i
                };
                if i >= posts.len() {
                    break;
                }
                let r = zero_shot_classify(llm.as_ref(), &posts[i].clean_text, &aliases).map_err(|e| e.to_string());
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    let results: Vec<Result<ZeroShotOutcome, String>> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every post visited"))
        .collect();

    create_dir(&a.out_dir)?;
    let replies = a.out_dir.join("zeroshot_replies.csv");
    let mut w = csv::Writer::from_path(&replies).internal("replies")?;
    w.write_record(["id", "true_label", "outcome", "value"])
        .internal("replies")?;
    let (mut y_true, mut y_pred) = (Vec::new(), Vec::new());
    let (mut unmapped, mut failed) = (0usize, 0usize);
    for (p, r) in posts.iter().zip(&results) {
        let (outcome, value) = match r {
            Ok(ZeroShotOutcome::Label(l)) => {
                y_true.push(p.label);
                y_pred.push(*l);
                ("label", l.as_str().to_string())
            }
            Ok(ZeroShotOutcome::Unmapped(reply)) => {
                unmapped += 1;
                ("unmapped", reply.clone())
            }
            Err(e) => {
                failed += 1;
                ("error", e.clone())
            }
        };
        w.write_record([p.id.as_str(), p.label.as_str(), outcome, value.as_str()])
            .internal("replies")?;
    }
    w.flush().internal("replies")?;
    let mut summary = json!({
        "posts": posts.len(),
        "mapped": y_true.len(),
        "unmapped": unmapped,
        "failed": failed,
        "unmapped_fraction": if posts.is_empty() { 0.0 } else { unmapped as f64 / posts.len() as f64 },
    });
    if !y_true.is_empty() {
        let cm = confusion(&y_true, &y_pred).internal("confusion")?;
        summary["report_on_mapped"] = serde_json::to_value(report(&cm).internal("report")?).internal("report")?;
    }
    let summary_path = a.out_dir.join("zeroshot_summary.json");
    write_json(&summary_path, &summary).internal("summary")?;
    eprintln!(
        "{} posts: {} mapped, {} unmapped ({:.1}%), {} failed",
        posts.len(),
        y_true.len(),
        unmapped,
        summary["unmapped_fraction"].as_f64().unwrap_or(0.0) * 100.0,
        failed
    );
    ManifestBuilder::new("zeroshot", None)
        .config("llm_model", &cfg.llm.model)
        .config("llm_endpoint", &cfg.llm.endpoint)
        .input(&a.input)
        .output(&replies)
        .output(&summary_path)
        .write(&a.out_dir)
        .internal("manifest")?;
    Ok(())
}

/// Trains on `train` with its own vectorizer and scores on `test`.
pub fn train_and_score(
    choice: ModelChoice,
    train: &Corpus,
    test: &Corpus,
    seed: u64,
    max_features: usize,
) -> CliResult<Scored> {
    let v = fit_vectorizer(train, max_features)?;
    let model = fit_model(choice, &v, train, seed, None)?;
    let rows = predict_corpus(&model, &v, test)?;
    score(Path::new("<memory>"), test, &rows).data()
}

fn ablation(a: AblationArgs) -> CliResult {
    let path = |n: &str| a.run_dir.join(n);
    let (pool_p, train_p, test_p) = (path("train_pool.jsonl"), path("train.jsonl"), path("test.jsonl"));
    for p in [&pool_p, &train_p, &test_p] {
        if !p.exists() {
            return Err(CliError::Data(anyhow::anyhow!(
                "{} is missing; run `mhscreen prepare` first",
                p.display()
            )));
        }
    }
    let (pool, balanced, test) = (load(&pool_p)?, load(&train_p)?, load(&test_p)?);
    let u = train_and_score(a.model, &pool, &test, a.seed, a.max_features)?;
    let b = train_and_score(a.model, &balanced, &test, a.seed, a.max_features)?;
    let rep = AblationReport::new(a.model.name(), u.report, b.report);
    create_dir(&a.out_dir)?;
    let (json_p, text_p) = (a.out_dir.join("ablation.json"), a.out_dir.join("ablation.txt"));
    write_json(&json_p, &rep).internal("ablation report")?;
    write_text(&text_p, &rep.text())?;
    eprint!("{}", rep.text());
    ManifestBuilder::new("ablation", Some(a.seed))
        .config("model", a.model.name())
        .config("max_features", a.max_features)
        .input(&pool_p)
        .input(&train_p)
        .input(&test_p)
        .output(&json_p)
        .output(&text_p)
        .write(&a.out_dir)
        .internal("manifest")?;
    Ok(())
}

fn load_service_model(cfg: &Config) -> CliResult<Option<LoadedModel>> {
    let (Some(mp), Some(vp)) = (&cfg.model.classifier_path, &cfg.model.vectorizer_path) else {
        tracing::warn!("model paths not configured; /classify will answer 503");
        return Ok(None);
    };
    let classifier = artifacts::load_model(mp).data()?;
    if classifier.kind != ModelKind::MultinomialLogistic {
        return Err(CliError::Data(anyhow::anyhow!(
            "{}: the service needs a logistic model",
            mp.display()
        )));
    }
    let vectorizer = artifacts::load_vectorizer(vp).data()?;
    let bytes = fs::read(mp).with_context(|| mp.display().to_string()).data()?;
    Ok(Some(LoadedModel {
        classifier,
        vectorizer,
        version: format!("sha256:{}", &sha256_hex(&bytes)[..12]),
    }))
}

fn serve(a: ServeArgs) -> CliResult {
    let mut cfg = Config::load(&a.config).data()?;
    if let Some(h) = a.host {
        cfg.server.host = h;
    }
    if let Some(p) = a.port {
        cfg.server.port = p;
    }
    let model = load_service_model(&cfg)?;
    let (store, recovery) = EventStore::open(&cfg.store.log_path, cfg.store.snapshot_every).data()?;
    tracing::info!(?recovery, flags = store.state().len(), "event log recovered");
    // The blocking HTTP client must be built outside the async runtime.
    let llm = backend_from_config(&cfg.llm).internal("LLM client")?;
    let state = Arc::new(AppState {
        model,
        store: Mutex::new(store),
        llm,
        thresholds: cfg.thresholds,
    });
    let app = service::router(state, cfg.server.static_dir.as_deref());
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .internal("runtime")?;
    rt.block_on(async {
        let addr = format!("{}:{}", cfg.server.host, cfg.server.port);
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .with_context(|| format!("binding {addr}"))
            .internal("listener")?;
        eprintln!("listening on http://{}", listener.local_addr().internal("listener")?);
        service::serve(listener, app).await.internal("server")
    })
}
