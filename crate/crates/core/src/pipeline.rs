//! Pipeline configuration and the three-stage runner: term capture, election
//! filtering, then topic and sentiment labeling.

use std::collections::BTreeMap;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::dataset::{load_corpus, write_jsonl, Corpus, TermMatcher, Tweet, TweetLabels};
use crate::election::{decide, ElectionLabel, ElectionNet, ElectionNetConfig};
use crate::embeddings::SkipGramConfig;
use crate::error::{Error, Result};
use crate::labels::{SentimentLabel, TopicLabel};
use crate::nn::TrainConfig;
use crate::persist::{load_model, ModelKind};
use crate::query_expansion::{ExpandedTerm, SeedTermList, DEFAULT_RHO_MIN};
use crate::topic_sentiment::{TsNet, TsNetConfig};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelPaths {
    pub election: Option<PathBuf>,
    pub topic: Option<PathBuf>,
    pub sentiment: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSettings {
    pub election: TrainConfig,
    pub topic: TrainConfig,
    pub sentiment: TrainConfig,
}

/// Network geometry overrides; absent entries use the standard presets.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSettings {
    pub election: Option<ElectionNetConfig>,
    pub topic: Option<TsNetConfig>,
    pub sentiment: Option<TsNetConfig>,
}

/// JSON pipeline configuration. Relative paths are resolved against the
/// directory holding the configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub seed_terms: Option<PathBuf>,
    pub corpus: Vec<PathBuf>,
    /// JSON object mapping topic names to term lists.
    pub topic_terms: Option<PathBuf>,
    pub positive_lexicon: Option<PathBuf>,
    pub negative_lexicon: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub embeddings: Option<PathBuf>,
    pub expansion: Option<PathBuf>,
    pub datasets: Option<PathBuf>,
    pub models: ModelPaths,
    pub rho_min: f64,
    pub threshold: f64,
    pub test_fraction: f64,
    pub vocab_min_count: usize,
    pub skipgram: SkipGramConfig,
    pub training: TrainingSettings,
    pub networks: NetworkSettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 42,
            seed_terms: None,
            corpus: Vec::new(),
            topic_terms: None,
            positive_lexicon: None,
            negative_lexicon: None,
            output_dir: PathBuf::from("out"),
            embeddings: None,
            expansion: None,
            datasets: None,
            models: ModelPaths::default(),
            rho_min: DEFAULT_RHO_MIN,
            threshold: DEFAULT_THRESHOLD,
            test_fraction: 0.1,
            vocab_min_count: 1,
            skipgram: SkipGramConfig::default(),
            training: TrainingSettings::default(),
            networks: NetworkSettings::default(),
        }
    }
}

fn resolve(base: &Path, path: &mut PathBuf) {
    if path.is_relative() {
        *path = base.join(&*path);
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let mut config: PipelineConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("pipeline config: {e}")))?;
        config.resolve_paths(base_dir);
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_json(&text, base)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let optional = [
            &mut self.seed_terms,
            &mut self.topic_terms,
            &mut self.positive_lexicon,
            &mut self.negative_lexicon,
            &mut self.embeddings,
            &mut self.expansion,
            &mut self.datasets,
            &mut self.models.election,
            &mut self.models.topic,
            &mut self.models.sentiment,
        ];
        for p in optional.into_iter().flatten() {
            resolve(base, p);
        }
        for p in &mut self.corpus {
            resolve(base, p);
        }
        resolve(base, &mut self.output_dir);
    }

    /// Applies the configured seed to every training and embedding setting.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.skipgram.seed = seed;
        self.training.election.seed = seed;
        self.training.topic.seed = seed;
        self.training.sentiment.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rho_min) {
            return Err(Error::Config(format!("rho_min must lie in [0, 1], got {}", self.rho_min)));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Config(format!("threshold must lie in (0, 1), got {}", self.threshold)));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Config(format!(
                "test_fraction must lie in (0, 1), got {}",
                self.test_fraction
            )));
        }
        for t in [&self.training.election, &self.training.topic, &self.training.sentiment] {
            if t.batch_size == 0 {
                return Err(Error::Config("batch size must be positive".into()));
            }
            t.adam.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        if let Some(net) = &self.networks.election {
            net.shape_chain()?;
        }
        for net in [&self.networks.topic, &self.networks.sentiment].into_iter().flatten() {
            net.validate()?;
        }
        Ok(())
    }

    /// Fails with a configuration error unless `path` is set and exists.
    pub fn require<'a>(&self, path: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
        let path = path
            .as_deref()
            .ok_or_else(|| Error::Config(format!("no {what} path configured")))?;
        if !path.exists() {
            return Err(Error::Config(format!("{what} not found at {}", path.display())));
        }
        Ok(path)
    }

    pub fn embeddings_path(&self) -> PathBuf {
        self.embeddings.clone().unwrap_or_else(|| self.output_dir.join("embeddings.txt"))
    }

    pub fn expansion_path(&self) -> PathBuf {
        self.expansion.clone().unwrap_or_else(|| self.output_dir.join("expansion.json"))
    }

    pub fn datasets_dir(&self) -> PathBuf {
        self.datasets.clone().unwrap_or_else(|| self.output_dir.join("datasets"))
    }

    pub fn model_path(&self, kind: ModelKind) -> PathBuf {
        let (configured, file) = match kind {
            ModelKind::Election => (&self.models.election, "election.model"),
            ModelKind::Topic => (&self.models.topic, "topic.model"),
            ModelKind::Sentiment => (&self.models.sentiment, "sentiment.model"),
        };
        configured.clone().unwrap_or_else(|| self.output_dir.join(file))
    }

    pub fn election_net(&self) -> ElectionNetConfig {
        self.networks.election.clone().unwrap_or_default()
    }

    pub fn topic_net(&self) -> TsNetConfig {
        self.networks.topic.clone().unwrap_or_else(TsNetConfig::topic)
    }

    pub fn sentiment_net(&self) -> TsNetConfig {
        self.networks.sentiment.clone().unwrap_or_else(TsNetConfig::sentiment)
    }

    /// All configured corpus files as one corpus.
    pub fn load_corpus(&self) -> Result<Corpus> {
        if self.corpus.is_empty() {
            return Err(Error::Config("no corpus files configured".into()));
        }
        let mut tweets = Vec::new();
        for path in &self.corpus {
            if !path.exists() {
                return Err(Error::Config(format!("corpus not found at {}", path.display())));
            }
            tweets.extend(load_corpus(path)?.into_tweets());
        }
        Corpus::new(tweets)
    }

    pub fn load_seeds(&self) -> Result<SeedTermList> {
        SeedTermList::load(self.require(&self.seed_terms, "seed term file")?)
    }
}

/// Reads a JSON object of topic name (or slug) to term list, in topic order.
pub fn load_topic_terms(path: impl AsRef<Path>) -> Result<Vec<(TopicLabel, Vec<String>)>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let raw: BTreeMap<String, Vec<String>> = serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut lists: BTreeMap<TopicLabel, Vec<String>> = BTreeMap::new();
    for (name, terms) in raw {
        let topic: TopicLabel = name.parse()?;
        let entry = lists.entry(topic).or_default();
        entry.extend(terms.into_iter().map(|t| t.trim().to_lowercase()).filter(|t| !t.is_empty()));
    }
    Ok(lists.into_iter().collect())
}

pub fn load_expansion(path: impl AsRef<Path>) -> Result<Vec<ExpandedTerm>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// A tweet with classifier outputs attached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedTweet {
    pub id: String,
    pub text: String,
    pub timestamp: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<TweetLabels>,
    pub election_score: f64,
    pub election: ElectionLabel,
    pub topic: TopicLabel,
    pub sentiment: SentimentLabel,
}

pub struct Classifiers {
    pub election: ElectionNet,
    pub topic: TsNet,
    pub sentiment: TsNet,
}

impl Classifiers {
    pub fn load(config: &PipelineConfig) -> Result<Self> {
        let load = |kind: ModelKind| -> Result<crate::persist::SavedModel> {
            let path = config.model_path(kind);
            if !path.exists() {
                return Err(Error::Config(format!("{kind:?} model not found at {}", path.display())));
            }
            load_model(path)
        };
        Ok(Classifiers {
            election: load(ModelKind::Election)?.into_election()?,
            topic: load(ModelKind::Topic)?.into_word_net(ModelKind::Topic)?,
            sentiment: load(ModelKind::Sentiment)?.into_word_net(ModelKind::Sentiment)?,
        })
    }

    /// Runs all three classifiers on `tweets`, in input order.
    pub fn annotate(&self, tweets: &[Tweet], threshold: f64) -> Result<Vec<AnnotatedTweet>> {
        let alphabet = crate::char_text::Alphabet::new();
        let mut out = Vec::with_capacity(tweets.len());
        for chunk in tweets.chunks(64) {
            let inputs: Vec<_> = chunk.iter().map(|t| alphabet.encode(&t.text)).collect();
            let scores = self.election.forward_batch(&inputs);
            for (t, score) in chunk.iter().zip(scores) {
                let decision = decide(score, threshold)?;
                let topic = self.topic.predict(&t.text).class;
                let sentiment = self.sentiment.predict(&t.text).class;
                out.push(AnnotatedTweet {
                    id: t.id.clone(),
                    text: t.text.clone(),
                    timestamp: t.timestamp,
                    labels: t.labels.clone(),
                    election_score: decision.score,
                    election: decision.label,
                    topic: TopicLabel::from_index(topic).ok_or_else(|| {
                        Error::Config(format!("topic model predicts class {topic} beyond the label set"))
                    })?,
                    sentiment: SentimentLabel::from_index(sentiment).ok_or_else(|| {
                        Error::Config(format!("sentiment model predicts class {sentiment} beyond the label set"))
                    })?,
                });
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSummary {
    pub input_tweets: usize,
    pub seed_terms: usize,
    pub expanded_terms: usize,
    /// Tweets matched by seed terms alone.
    pub seed_matches: usize,
    /// Tweets matched by seed or expanded terms (stage 1 output).
    pub term_matches: usize,
    /// `term_matches / seed_matches - 1`, when defined.
    pub expansion_volume_increase: Option<f64>,
    /// Tweets the election classifier kept (stage 2 output).
    pub election_kept: usize,
    /// `1 - election_kept / term_matches`, when defined.
    pub election_reduction: Option<f64>,
    pub topic_counts: BTreeMap<TopicLabel, usize>,
    pub sentiment_counts: BTreeMap<SentimentLabel, usize>,
}

/// Output file names inside the pipeline output directory.
pub const LABELED_FILE: &str = "labeled.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";

/// Runs the pipeline over `corpus` and returns the surviving tweets with the
/// stage statistics.
pub fn run_stages(
    corpus: &Corpus,
    seeds: &SeedTermList,
    expanded: &[ExpandedTerm],
    classifiers: &Classifiers,
    threshold: f64,
) -> Result<(Vec<AnnotatedTweet>, PipelineSummary)> {
    if corpus.is_empty() {
        log::warn!("pipeline corpus is empty");
    }
    let seed_matcher = TermMatcher::new(seeds.terms());
    let all_terms: Vec<&str> = seeds
        .terms()
        .iter()
        .map(String::as_str)
        .chain(expanded.iter().map(|e| e.term.as_str()))
        .collect();
    let term_matcher = TermMatcher::new(&all_terms);

    let mut seed_matches = 0;
    let mut stage1 = Vec::new();
    for t in corpus.tweets() {
        let tokens = crate::text::tokenize(&t.text);
        if !seed_matcher.matches_tokens(&tokens).is_empty() {
            seed_matches += 1;
        }
        if !term_matcher.matches_tokens(&tokens).is_empty() {
            stage1.push(t.clone());
        }
    }
    let annotated = if stage1.is_empty() {
        Vec::new()
    } else {
        classifiers.annotate(&stage1, threshold)?
    };
    let kept: Vec<AnnotatedTweet> =
        annotated.into_iter().filter(|a| a.election == ElectionLabel::Election).collect();

    let mut topic_counts = BTreeMap::new();
    let mut sentiment_counts = BTreeMap::new();
    for a in &kept {
        *topic_counts.entry(a.topic).or_insert(0) += 1;
        *sentiment_counts.entry(a.sentiment).or_insert(0) += 1;
    }
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    let summary = PipelineSummary {
        input_tweets: corpus.len(),
        seed_terms: seeds.len(),
        expanded_terms: expanded.len(),
        seed_matches,
        term_matches: stage1.len(),
        expansion_volume_increase: ratio(stage1.len(), seed_matches).map(|r| r - 1.0),
        election_kept: kept.len(),
        election_reduction: ratio(kept.len(), stage1.len()).map(|r| 1.0 - r),
        topic_counts,
        sentiment_counts,
    };
    Ok((kept, summary))
}

/// Full pipeline from configuration: loads every input, runs the stages and
/// writes the labeled tweets and the summary into `out_dir`.
pub fn run_pipeline(config: &PipelineConfig, out_dir: &Path) -> Result<PipelineSummary> {
    let seeds = config.load_seeds()?;
    let classifiers = Classifiers::load(config)?;
    let corpus = config.load_corpus()?;
    let expanded = match &config.expansion {
        Some(path) if path.exists() => load_expansion(path)?,
        Some(path) => {
            return Err(Error::Config(format!("expansion report not found at {}", path.display())))
        }
        None => {
            let default = config.expansion_path();
            if default.exists() {
                load_expansion(default)?
            } else {
                log::warn!("no expansion report; matching seed terms only");
                Vec::new()
            }
        }
    };
    let (kept, summary) = run_stages(&corpus, &seeds, &expanded, &classifiers, config.threshold)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let labeled = out_dir.join(LABELED_FILE);
    let file = std::fs::File::create(&labeled).map_err(|e| Error::io(&labeled, e))?;
    write_jsonl(BufWriter::new(file), &kept)?;
    write_json(&out_dir.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_paths_resolve_against_config_dir() {
        let json = r#"{"seed_terms": "seeds.txt", "corpus": ["a.jsonl", "/abs/b.jsonl"], "rho_min": 0.4}"#;
        let c = PipelineConfig::from_json(json, Path::new("/etc/run")).unwrap();
        assert_eq!(c.seed_terms.as_deref(), Some(Path::new("/etc/run/seeds.txt")));
        assert_eq!(c.corpus, [PathBuf::from("/etc/run/a.jsonl"), PathBuf::from("/abs/b.jsonl")]);
        assert_eq!(c.output_dir, PathBuf::from("/etc/run/out"));
        assert_eq!(c.model_path(ModelKind::Topic), PathBuf::from("/etc/run/out/topic.model"));
        assert_eq!(c.rho_min, 0.4);
        assert_eq!(c.threshold, 0.5);
    }

    #[test]
    fn bad_values_are_config_errors() {
        for json in [
            r#"{"rho_min": 1.01}"#,
            r#"{"threshold": 1.0}"#,
            r#"{"unknown_key": 1}"#,
            r#"{"training": {"topic": {"batch_size": 0}}}"#,
        ] {
            assert!(
                matches!(PipelineConfig::from_json(json, Path::new(".")), Err(Error::Config(_))),
                "{json}"
            );
        }
    }
}
