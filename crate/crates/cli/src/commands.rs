use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use tweetsift::char_text::Alphabet;
use tweetsift::dataset::{
    distant_label_election, distant_label_sentiment, distant_label_topic, evaluate, load_term_list,
    read_jsonl, split_dataset, write_jsonl, Corpus, EvalReport, LabeledSet, LabeledText, TermMatcher,
};
use tweetsift::election::{decide, train_election_with, ElectionExample, ElectionLabel, ElectionNet};
use tweetsift::embeddings::{train_skipgram, Vocab, WordVectors};
use tweetsift::labels::{SentimentLabel, TopicLabel};
use tweetsift::nn::TrainConfig;
use tweetsift::persist::{save_model, ModelKind, SavedModel};
use tweetsift::pipeline::{load_expansion, load_topic_terms, run_pipeline, write_json, Classifiers, PipelineConfig};
use tweetsift::query_expansion::{expand_query, ExpansionConfig, DEFAULT_NEIGHBORS};
use tweetsift::topic_sentiment::{tokenize_words, train_ts_with, TsNet, TsNetConfig, WordVocab};
use tweetsift::Error;

use crate::{Command, Overrides};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Core(e) => e.code(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Core(Error::Config(_)) => 2,
            CliError::Core(_) => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(command: &Command, overrides: &Overrides) -> Result<()> {
    if let Command::Evaluate { pred, gold } = command {
        return evaluate_files(pred, gold, overrides.out.as_deref());
    }
    let config = load_config(overrides)?;
    let out = overrides.out.clone();
    match command {
        Command::BuildVocab => build_vocab(&config, out),
        Command::TrainEmbeddings => train_embeddings(&config, overrides, out),
        Command::ExpandQuery => expand(&config, out),
        Command::BuildDataset => build_dataset(&config, out),
        Command::TrainElection => train_election(&config, overrides, out),
        Command::TrainTopic => train_word_model(&config, overrides, out, ModelKind::Topic),
        Command::TrainSentiment => train_word_model(&config, overrides, out, ModelKind::Sentiment),
        Command::Classify { input } => classify(&config, input.as_deref(), out),
        Command::Pipeline => {
            let dir = out.unwrap_or_else(|| config.output_dir.clone());
            let summary = run_pipeline(&config, &dir)?;
            println!("{}", serde_json::to_string_pretty(&summary).map_err(Error::from)?);
            Ok(())
        }
        Command::Evaluate { .. } => unreachable!("handled above"),
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

fn load_config(overrides: &Overrides) -> Result<PipelineConfig> {
    let mut config = match &overrides.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = overrides.seed {
        config = config.with_seed(seed);
    }
    if let Some(rho) = overrides.rho_min {
        config.rho_min = rho;
    }
    if let Some(t) = overrides.threshold {
        config.threshold = t;
    }
    config.validate()?;
    if overrides.epochs == Some(0) {
        return Err(usage("--epochs must be at least 1"));
    }
    if overrides.batch == Some(0) {
        return Err(usage("--batch must be at least 1"));
    }
    if let Some(lr) = overrides.lr {
        if !(lr.is_finite() && lr >= 0.0) {
            return Err(usage(format!("--lr must be finite and non-negative, got {lr}")));
        }
    }
    Ok(config)
}

fn training(base: TrainConfig, overrides: &Overrides) -> TrainConfig {
    let mut t = base;
    if let Some(e) = overrides.epochs {
        t.epochs = e;
    }
    if let Some(b) = overrides.batch {
        t.batch_size = b;
    }
    if let Some(lr) = overrides.lr {
        t.adam.learning_rate = lr;
    }
    t
}

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Core(Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| io_err(path, e))?))
}

fn build_vocab(config: &PipelineConfig, out: Option<PathBuf>) -> Result<()> {
    let corpus = config.load_corpus()?;
    let vocab = Vocab::build(&corpus.token_sequences(), config.vocab_min_count.max(1) as u64)?;
    let path = out.unwrap_or_else(|| config.output_dir.join("vocab.tsv"));
    let mut w = create(&path)?;
    for (term, count) in vocab.terms().iter().zip(vocab.counts()) {
        writeln!(w, "{term}\t{count}").map_err(|e| io_err(&path, e))?;
    }
    w.flush().map_err(|e| io_err(&path, e))?;
    println!("vocabulary: {} terms -> {}", vocab.len(), path.display());
    Ok(())
}

fn train_embeddings(config: &PipelineConfig, overrides: &Overrides, out: Option<PathBuf>) -> Result<()> {
    let mut sg = config.skipgram;
    if let Some(e) = overrides.epochs {
        sg.epochs = e;
    }
    if let Some(lr) = overrides.lr {
        sg.learning_rate = lr;
    }
    let corpus = config.load_corpus()?;
    let (model, trace) = train_skipgram(&corpus.token_sequences(), sg)?;
    let path = out.unwrap_or_else(|| config.embeddings_path());
    let mut w = create(&path)?;
    model.word_vectors().write_text(&mut w).map_err(|e| io_err(&path, e))?;
    w.flush().map_err(|e| io_err(&path, e))?;
    println!(
        "embeddings: {} terms, log-likelihood {:.4} -> {:.4} -> {}",
        model.vocab().len(),
        trace.first().copied().unwrap_or(f64::NAN),
        trace.last().copied().unwrap_or(f64::NAN),
        path.display()
    );
    Ok(())
}

fn load_vectors(path: &Path) -> Result<WordVectors> {
    if !path.exists() {
        return Err(Error::Config(format!("embeddings not found at {}", path.display())).into());
    }
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    Ok(WordVectors::read_text(BufReader::new(file))?)
}

fn expand(config: &PipelineConfig, out: Option<PathBuf>) -> Result<()> {
    let seeds = config.load_seeds()?;
    let vectors = load_vectors(&config.embeddings_path())?;
    let corpus = config.load_corpus()?;
    let expansion = ExpansionConfig {
        neighbors: DEFAULT_NEIGHBORS,
        rho_min: config.rho_min,
    };
    let terms = expand_query(&seeds, &corpus, &vectors, expansion)?;
    let path = out.unwrap_or_else(|| config.expansion_path());
    write_json(&path, &terms)?;
    println!("expansion: {} terms -> {}", terms.len(), path.display());
    Ok(())
}

/// Tweets captured by the seed terms plus any expansion report on disk.
fn captured(config: &PipelineConfig, corpus: &Corpus) -> Result<Corpus> {
    let seeds = config.load_seeds()?;
    let mut terms: Vec<String> = seeds.terms().to_vec();
    let report = config.expansion_path();
    if report.exists() {
        terms.extend(load_expansion(&report)?.into_iter().map(|e| e.term));
    }
    let matcher = TermMatcher::new(&terms);
    let tweets = corpus.tweets().iter().filter(|t| matcher.is_match(&t.text)).cloned().collect();
    Ok(Corpus::new(tweets)?)
}

fn split_and_write<L>(dir: &Path, name: &str, set: LabeledSet<L>, config: &PipelineConfig) -> Result<()>
where
    L: Serialize + Ord + Clone + Debug,
{
    let small: BTreeSet<L> = set.counts.iter().filter(|(_, &n)| n < 2).map(|(l, _)| l.clone()).collect();
    if !small.is_empty() {
        log::warn!("{name}: dropping classes with fewer than 2 examples: {small:?}");
    }
    let examples: Vec<LabeledText<L>> =
        set.examples.into_iter().filter(|e| !small.contains(&e.label)).collect();
    let classes: BTreeSet<&L> = examples.iter().map(|e| &e.label).collect();
    if classes.len() < 2 {
        log::warn!("{name}: fewer than two classes, dataset not written");
        return Ok(());
    }
    let (train, test) = split_dataset(&examples, |e| e.label.clone(), config.test_fraction, config.seed)?;
    for (part, rows) in [("train", &train), ("test", &test)] {
        let path = dir.join(format!("{name}.{part}.jsonl"));
        let mut w = create(&path)?;
        write_jsonl(&mut w, rows)?;
        w.flush().map_err(|e| io_err(&path, e))?;
    }
    println!("{name}: {} train, {} test, {} excluded", train.len(), test.len(), set.excluded);
    Ok(())
}

fn build_dataset(config: &PipelineConfig, out: Option<PathBuf>) -> Result<()> {
    let dir = out.unwrap_or_else(|| config.datasets_dir());
    let corpus = config.load_corpus()?;
    let seeds = config.load_seeds()?;
    split_and_write(&dir, "election", distant_label_election(&corpus, seeds.terms())?, config)?;

    let election_related = captured(config, &corpus)?;
    match &config.topic_terms {
        Some(_) => {
            let lists = load_topic_terms(config.require(&config.topic_terms, "topic term file")?)?;
            let set = distant_label_topic(&election_related, &lists)?;
            split_and_write(&dir, "topic", set, config)?;
        }
        None => log::warn!("no topic term file configured; skipping topic dataset"),
    }
    match (&config.positive_lexicon, &config.negative_lexicon) {
        (Some(_), Some(_)) => {
            let pos = load_term_list(config.require(&config.positive_lexicon, "positive lexicon")?)?;
            let neg = load_term_list(config.require(&config.negative_lexicon, "negative lexicon")?)?;
            let set = distant_label_sentiment(&election_related, &pos, &neg)?;
            split_and_write(&dir, "sentiment", set, config)?;
        }
        _ => log::warn!("sentiment lexicons not configured; skipping sentiment dataset"),
    }
    Ok(())
}

fn read_split<T: DeserializeOwned>(config: &PipelineConfig, name: &str) -> Result<(Vec<T>, Vec<T>)> {
    let dir = config.datasets_dir();
    let mut parts = Vec::with_capacity(2);
    for part in ["train", "test"] {
        let path = dir.join(format!("{name}.{part}.jsonl"));
        if !path.exists() {
            return Err(Error::Config(format!(
                "{} not found; run build-dataset first",
                path.display()
            ))
            .into());
        }
        parts.push(read_jsonl(&path)?);
    }
    let test = parts.pop().expect("two parts");
    let train = parts.pop().expect("two parts");
    Ok((train, test))
}

fn log_epoch(name: &str) -> impl FnMut(usize, f64) {
    let name = name.to_string();
    move |epoch, loss| log::info!("{name}: epoch {} loss {loss:.6}", epoch + 1)
}

fn print_report(name: &str, report: &EvalReport) {
    println!(
        "{name}: test accuracy {:.4} macro F1 {:.4} weighted F1 {:.4}",
        report.accuracy, report.macro_f1, report.weighted_f1
    );
}

fn train_election(config: &PipelineConfig, overrides: &Overrides, out: Option<PathBuf>) -> Result<()> {
    let (train, test): (Vec<LabeledText<bool>>, Vec<LabeledText<bool>>) = read_split(config, "election")?;
    let examples: Vec<ElectionExample> = train.iter().map(|e| ElectionExample::new(&e.text, e.label)).collect();
    let mut net = ElectionNet::new(config.election_net(), config.seed)?;
    let mut log = log_epoch("election");
    train_election_with(&mut net, &examples, &training(config.training.election, overrides), |e, l, _| {
        log(e, l);
        ControlFlow::Continue(())
    })?;

    let alphabet = Alphabet::new();
    let mut predictions = Vec::with_capacity(test.len());
    for chunk in test.chunks(64) {
        let inputs: Vec<_> = chunk.iter().map(|e| alphabet.encode(&e.text)).collect();
        for score in net.forward_batch(&inputs) {
            let label = decide(score, config.threshold)?.label;
            predictions.push(usize::from(label == ElectionLabel::Election));
        }
    }
    let gold: Vec<usize> = test.iter().map(|e| usize::from(e.label)).collect();
    let names = vec!["non_election".to_string(), "election".to_string()];
    print_report("election", &evaluate(&predictions, &gold, &names)?);

    let path = out.unwrap_or_else(|| config.model_path(ModelKind::Election));
    save_model(&SavedModel::Election(net), &path)?;
    println!("election model -> {}", path.display());
    Ok(())
}

fn train_word_model(
    config: &PipelineConfig,
    overrides: &Overrides,
    out: Option<PathBuf>,
    kind: ModelKind,
) -> Result<()> {
    let (name, net_config, train_config, labeled) = match kind {
        ModelKind::Topic => {
            let (train, test): (Vec<LabeledText<TopicLabel>>, Vec<_>) = read_split(config, "topic")?;
            let index = |rows: Vec<LabeledText<TopicLabel>>| -> Vec<(String, usize)> {
                rows.into_iter().map(|e| (e.text, e.label.index())).collect()
            };
            ("topic", config.topic_net(), config.training.topic, (index(train), index(test)))
        }
        ModelKind::Sentiment => {
            let (train, test): (Vec<LabeledText<SentimentLabel>>, Vec<_>) = read_split(config, "sentiment")?;
            let index = |rows: Vec<LabeledText<SentimentLabel>>| -> Vec<(String, usize)> {
                rows.into_iter().map(|e| (e.text, e.label.index())).collect()
            };
            ("sentiment", config.sentiment_net(), config.training.sentiment, (index(train), index(test)))
        }
        ModelKind::Election => unreachable!("election has its own trainer"),
    };
    let (train, test) = labeled;
    let net = fit_word_net(name, net_config, &train, config, training(train_config, overrides))?;

    let predictions: Vec<usize> = test.iter().map(|(text, _)| net.predict(text).class).collect();
    let gold: Vec<usize> = test.iter().map(|(_, l)| *l).collect();
    let names: Vec<String> = match kind {
        ModelKind::Topic => TopicLabel::ALL.iter().map(|t| t.name().to_string()).collect(),
        _ => SentimentLabel::ALL.iter().map(|s| s.name().to_string()).collect(),
    };
    print_report(name, &evaluate(&predictions, &gold, &names)?);

    let path = out.unwrap_or_else(|| config.model_path(kind));
    let saved = match kind {
        ModelKind::Topic => SavedModel::Topic(net),
        _ => SavedModel::Sentiment(net),
    };
    save_model(&saved, &path)?;
    println!("{name} model -> {}", path.display());
    Ok(())
}

fn fit_word_net(
    name: &str,
    net_config: TsNetConfig,
    train: &[(String, usize)],
    config: &PipelineConfig,
    train_config: TrainConfig,
) -> Result<TsNet> {
    let seqs: Vec<Vec<String>> = train.iter().map(|(t, _)| tokenize_words(t)).collect();
    let vocab = WordVocab::build(&seqs, config.vocab_min_count);
    let mut net = TsNet::new(net_config, vocab, config.seed)?;
    let mut examples = Vec::with_capacity(train.len());
    let mut skipped = 0;
    for (text, label) in train {
        match net.example(text, *label) {
            Ok(e) => examples.push(e),
            Err(Error::EmptyInput(_)) => skipped += 1,
            Err(e) => return Err(e.into()),
        }
    }
    if skipped > 0 {
        log::warn!("{name}: skipped {skipped} training texts without tokens");
    }
    let mut log = log_epoch(name);
    train_ts_with(&mut net, &examples, &train_config, |e, l, _| {
        log(e, l);
        ControlFlow::Continue(())
    })?;
    Ok(net)
}

fn classify(config: &PipelineConfig, input: Option<&Path>, out: Option<PathBuf>) -> Result<()> {
    let classifiers = Classifiers::load(config)?;
    let corpus = match input {
        Some(path) if path.exists() => tweetsift::dataset::load_corpus(path)?,
        Some(path) => return Err(Error::Config(format!("input not found at {}", path.display())).into()),
        None => config.load_corpus()?,
    };
    let annotated = classifiers.annotate(corpus.tweets(), config.threshold)?;
    let path = out.unwrap_or_else(|| config.output_dir.join("classified.jsonl"));
    let mut w = create(&path)?;
    write_jsonl(&mut w, &annotated)?;
    w.flush().map_err(|e| io_err(&path, e))?;
    println!("classified {} tweets -> {}", annotated.len(), path.display());
    Ok(())
}

/// `id -> label` from a JSONL file whose records carry `id` and `label`.
fn read_labels(path: &Path) -> Result<Vec<(String, String)>> {
    if !path.exists() {
        return Err(Error::Config(format!("{} not found", path.display())).into());
    }
    let rows: Vec<serde_json::Value> = read_jsonl(path)?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(rows.len());
    for (n, row) in rows.iter().enumerate() {
        let field = |key: &str| -> Result<String> {
            match row.get(key) {
                Some(serde_json::Value::String(s)) => Ok(s.clone()),
                Some(v) if !v.is_null() => Ok(v.to_string()),
                _ => Err(Error::Format {
                    path: path.to_path_buf(),
                    message: format!("record {} has no {key:?}", n + 1),
                }
                .into()),
            }
        };
        let id = field("id")?;
        if !seen.insert(id.clone()) {
            return Err(Error::DuplicateId(id).into());
        }
        out.push((id, field("label")?));
    }
    Ok(out)
}

fn evaluate_files(pred: &Path, gold: &Path, out: Option<&Path>) -> Result<()> {
    let gold = read_labels(gold)?;
    let pred: BTreeMap<String, String> = read_labels(pred)?.into_iter().collect();
    let classes: Vec<String> = gold
        .iter()
        .map(|(_, l)| l.clone())
        .chain(pred.values().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index = |label: &str| classes.binary_search_by(|c| c.as_str().cmp(label)).expect("label collected");
    let mut p = Vec::with_capacity(gold.len());
    let mut g = Vec::with_capacity(gold.len());
    for (id, label) in &gold {
        let predicted = pred
            .get(id)
            .ok_or_else(|| Error::Lookup(format!("no prediction for id {id:?}")))?;
        p.push(index(predicted));
        g.push(index(label));
    }
    let report = evaluate(&p, &g, &classes)?;
    println!("accuracy {:.6}", report.accuracy);
    println!("macro_precision {:.6}", report.macro_precision);
    println!("macro_recall {:.6}", report.macro_recall);
    println!("macro_f1 {:.6}", report.macro_f1);
    println!("weighted_f1 {:.6}", report.weighted_f1);
    if let Some(path) = out {
        write_json(path, &report)?;
    }
    Ok(())
}
