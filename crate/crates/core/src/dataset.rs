//! Tweet corpora: JSON-Lines ingestion, term matching, distant-supervision
//! labeling, stratified splitting and evaluation metrics.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{SentimentLabel, TopicLabel};
use crate::nn::ModelRng;
use crate::text::{clean_token, tokenize};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetLabels {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub election: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic: Option<TopicLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentiment: Option<SentimentLabel>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tweet {
    pub id: String,
    pub text: String,
    pub timestamp: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<TweetLabels>,
}

impl Tweet {
    pub fn new(id: impl Into<String>, text: impl Into<String>, timestamp: DateTime<Utc>) -> Self {
        Tweet {
            id: id.into(),
            text: text.into(),
            timestamp,
            labels: None,
        }
    }

    pub fn labels_mut(&mut self) -> &mut TweetLabels {
        self.labels.get_or_insert_with(TweetLabels::default)
    }
}

/// Tweets in input order with unique ids.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    tweets: Vec<Tweet>,
    index: HashMap<String, usize>,
}

impl Corpus {
    pub fn new(tweets: Vec<Tweet>) -> Result<Self> {
        let mut index = HashMap::with_capacity(tweets.len());
        for (i, t) in tweets.iter().enumerate() {
            if index.insert(t.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(t.id.clone()));
            }
        }
        Ok(Corpus { tweets, index })
    }

    pub fn tweets(&self) -> &[Tweet] {
        &self.tweets
    }

    pub fn into_tweets(self) -> Vec<Tweet> {
        self.tweets
    }

    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Tweet> {
        self.index.get(id).map(|&i| &self.tweets[i])
    }

    /// Tokenized tweet texts, for embedding training and phrase harvesting.
    pub fn token_sequences(&self) -> Vec<Vec<String>> {
        self.tweets.iter().map(|t| tokenize(&t.text)).collect()
    }
}

/// Share of malformed lines above which a file is rejected.
const MAX_MALFORMED_FRACTION: f64 = 0.10;

/// Parses a JSON-Lines tweet file. Blank lines are ignored; malformed
/// records are skipped with a warning unless they exceed 10% of the lines.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(BufReader::new(file), path)
}

pub fn read_corpus<R: BufRead>(reader: R, path: &Path) -> Result<Corpus> {
    let mut tweets = Vec::new();
    let mut seen = HashSet::new();
    let mut lines = 0usize;
    let mut malformed = 0usize;
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        lines += 1;
        match serde_json::from_str::<Tweet>(&line) {
            Ok(t) if t.id.is_empty() || t.text.is_empty() => {
                malformed += 1;
                log::warn!("{}:{}: empty id or text", path.display(), n + 1);
            }
            Ok(t) => {
                if !seen.insert(t.id.clone()) {
                    return Err(Error::DuplicateId(t.id));
                }
                tweets.push(t);
            }
            Err(e) => {
                malformed += 1;
                log::warn!("{}:{}: {e}", path.display(), n + 1);
            }
        }
    }
    if malformed > 0 {
        log::warn!("{}: skipped {malformed} of {lines} lines", path.display());
        if malformed as f64 > MAX_MALFORMED_FRACTION * lines as f64 {
            return Err(Error::Format {
                path: path.to_path_buf(),
                message: format!("{malformed} of {lines} lines are malformed"),
            });
        }
    }
    Corpus::new(tweets)
}

/// Reads JSON Lines records; blank lines are skipped and any malformed line
/// is an error.
pub fn read_jsonl<T: serde::de::DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: format!("line {}: {e}", n + 1),
        })?);
    }
    Ok(out)
}

/// Writes records as JSON Lines.
pub fn write_jsonl<W: Write, T: Serialize>(mut out: W, records: &[T]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n").map_err(|e| Error::io("<output>", e))?;
    }
    Ok(())
}

/// Reads a term or lexicon file: one entry per line, `;` starts a comment
/// line, entries are trimmed, lowercased and deduplicated in order.
pub fn parse_term_list(text: &str) -> Vec<String> {
    let mut seen = HashSet::new();
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with(';'))
        .map(str::to_lowercase)
        .filter(|t| seen.insert(t.clone()))
        .collect()
}

pub fn load_term_list(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_term_list(&text))
}

/// Compiled term set. A term is tokenized like tweet text; it matches a tweet
/// whose token sequence contains the term's tokens contiguously, so plain
/// words only match whole tokens and `#`/`@` terms match whole tokens
/// including the sigil.
#[derive(Debug, Clone, Default)]
pub struct TermMatcher {
    terms: Vec<(String, Vec<String>)>,
    by_first: HashMap<String, Vec<usize>>,
}

impl TermMatcher {
    pub fn new<S: AsRef<str>>(terms: &[S]) -> Self {
        let mut matcher = TermMatcher::default();
        for term in terms {
            let term = term.as_ref().trim().to_lowercase();
            let tokens = tokenize(&term);
            if tokens.is_empty() || matcher.terms.iter().any(|(t, _)| *t == term) {
                continue;
            }
            matcher
                .by_first
                .entry(tokens[0].clone())
                .or_default()
                .push(matcher.terms.len());
            matcher.terms.push((term, tokens));
        }
        matcher
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(|(t, _)| t.as_str())
    }

    /// Terms present in an already tokenized text.
    pub fn matches_tokens(&self, tokens: &[String]) -> BTreeSet<String> {
        let mut found = BTreeSet::new();
        for start in 0..tokens.len() {
            if let Some(candidates) = self.by_first.get(&tokens[start]) {
                for &c in candidates {
                    let (term, seq) = &self.terms[c];
                    if tokens[start..].starts_with(seq) {
                        found.insert(term.clone());
                    }
                }
            }
        }
        found
    }

    pub fn matches(&self, text: &str) -> BTreeSet<String> {
        self.matches_tokens(&tokenize(text))
    }

    pub fn is_match(&self, text: &str) -> bool {
        let tokens = tokenize(text);
        (0..tokens.len()).any(|start| {
            self.by_first.get(&tokens[start]).is_some_and(|cs| {
                cs.iter().any(|&c| tokens[start..].starts_with(&self.terms[c].1))
            })
        })
    }
}

/// Terms from `terms` that occur in `tweet`.
pub fn match_terms<S: AsRef<str>>(tweet: &Tweet, terms: &[S]) -> BTreeSet<String> {
    TermMatcher::new(terms).matches(&tweet.text)
}

/// A text with a distant-supervision label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledText<L> {
    pub id: String,
    pub text: String,
    pub label: L,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet<L: Ord> {
    pub examples: Vec<LabeledText<L>>,
    /// Examples per label.
    pub counts: BTreeMap<L, usize>,
    /// Tweets left out (ambiguous or unmatched).
    pub excluded: usize,
}

impl<L: Ord + Clone> LabeledSet<L> {
    fn from_examples(examples: Vec<LabeledText<L>>, excluded: usize) -> Self {
        let mut counts = BTreeMap::new();
        for e in &examples {
            *counts.entry(e.label.clone()).or_insert(0) += 1;
        }
        LabeledSet {
            examples,
            counts,
            excluded,
        }
    }
}

/// Tweets matching any seed are positive, all others negative.
pub fn distant_label_election<S: AsRef<str>>(corpus: &Corpus, seeds: &[S]) -> Result<LabeledSet<bool>> {
    let matcher = TermMatcher::new(seeds);
    if matcher.is_empty() {
        return Err(Error::EmptyInput("no seed terms given".into()));
    }
    let examples = corpus
        .tweets()
        .iter()
        .map(|t| LabeledText {
            id: t.id.clone(),
            text: t.text.clone(),
            label: matcher.is_match(&t.text),
        })
        .collect();
    Ok(LabeledSet::from_examples(examples, 0))
}

/// Labels a tweet with the single topic whose terms it matches; tweets that
/// match several topics or none are excluded.
pub fn distant_label_topic<S: AsRef<str>>(
    corpus: &Corpus,
    topic_terms: &[(TopicLabel, Vec<S>)],
) -> Result<LabeledSet<TopicLabel>> {
    let matchers: Vec<(TopicLabel, TermMatcher)> = topic_terms
        .iter()
        .map(|(topic, terms)| {
            if terms.is_empty() {
                log::warn!("topic {topic} has an empty term list");
            }
            (*topic, TermMatcher::new(terms))
        })
        .collect();
    let mut examples = Vec::new();
    let mut excluded = 0;
    for t in corpus.tweets() {
        let tokens = tokenize(&t.text);
        let hits: BTreeSet<TopicLabel> = matchers
            .iter()
            .filter(|(_, m)| !m.matches_tokens(&tokens).is_empty())
            .map(|(topic, _)| *topic)
            .collect();
        match hits.len() {
            1 => examples.push(LabeledText {
                id: t.id.clone(),
                text: t.text.clone(),
                label: *hits.iter().next().expect("one hit"),
            }),
            _ => excluded += 1,
        }
    }
    Ok(LabeledSet::from_examples(examples, excluded))
}

/// Labels by polarity lexicons (emoticons, adjectives). Positive-only and
/// negative-only matches take that polarity, tweets matching neither are
/// neutral and mixed tweets are excluded. Matched lexicon tokens are removed
/// from the returned text.
pub fn distant_label_sentiment<S: AsRef<str>>(
    corpus: &Corpus,
    positive: &[S],
    negative: &[S],
) -> Result<LabeledSet<SentimentLabel>> {
    let norm = |terms: &[S]| -> HashSet<String> {
        terms.iter().map(|t| t.as_ref().trim().to_lowercase()).filter(|t| !t.is_empty()).collect()
    };
    let (pos, neg) = (norm(positive), norm(negative));
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Config("sentiment lexicons must be nonempty".into()));
    }
    let mut overlap: Vec<&String> = pos.intersection(&neg).collect();
    if !overlap.is_empty() {
        overlap.sort();
        return Err(Error::Config(format!(
            "sentiment lexicons overlap on {overlap:?}"
        )));
    }
    let hit = |lex: &HashSet<String>, raw: &str| {
        let lower = raw.to_lowercase();
        lex.contains(&lower) || clean_token(raw).is_some_and(|c| lex.contains(&c))
    };
    let mut examples = Vec::new();
    let mut excluded = 0;
    for t in corpus.tweets() {
        let (mut is_pos, mut is_neg) = (false, false);
        let mut kept = Vec::new();
        for raw in t.text.split_whitespace() {
            if hit(&pos, raw) {
                is_pos = true;
            } else if hit(&neg, raw) {
                is_neg = true;
            } else {
                kept.push(raw);
            }
        }
        let label = match (is_pos, is_neg) {
            (true, false) => SentimentLabel::Positive,
            (false, true) => SentimentLabel::Negative,
            (false, false) => SentimentLabel::Neutral,
            (true, true) => {
                excluded += 1;
                continue;
            }
        };
        examples.push(LabeledText {
            id: t.id.clone(),
            text: kept.join(" "),
            label,
        });
    }
    Ok(LabeledSet::from_examples(examples, excluded))
}

/// Stratified split: each label contributes `round(n * test_fraction)` of
/// its examples to the test side (at least one, and at least one left for
/// training). Both sides keep the input order.
pub fn split_dataset<T: Clone, L: Ord + Clone>(
    examples: &[T],
    label_of: impl Fn(&T) -> L,
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<T>, Vec<T>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Parameter(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut by_label: BTreeMap<L, Vec<usize>> = BTreeMap::new();
    for (i, e) in examples.iter().enumerate() {
        by_label.entry(label_of(e)).or_default().push(i);
    }
    let mut rng = ModelRng::seed_from_u64(seed);
    let mut is_test = vec![false; examples.len()];
    for indices in by_label.values_mut() {
        let n = indices.len();
        if n < 2 {
            return Err(Error::Parameter(
                "stratified split needs at least 2 examples per class".into(),
            ));
        }
        let n_test = ((n as f64 * test_fraction).round() as usize).clamp(1, n - 1);
        indices.shuffle(&mut rng);
        for &i in &indices[..n_test] {
            is_test[i] = true;
        }
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (e, t) in examples.iter().zip(is_test) {
        if t {
            test.push(e.clone());
        } else {
            train.push(e.clone());
        }
    }
    Ok((train, test))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Class names in index order.
    pub classes: Vec<String>,
    pub per_class: Vec<ClassMetrics>,
    /// Means over classes that occur in the gold labels or the predictions.
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    /// Support-weighted mean of per-class F1.
    pub weighted_f1: f64,
    pub accuracy: f64,
    /// `confusion[gold][predicted]`.
    pub confusion: Vec<Vec<usize>>,
}

/// Per-class precision, recall and F1 over class indices `0..classes.len()`.
/// A class that is never predicted has precision 0; one that never occurs in
/// the gold labels has recall 0; F1 is 0 whenever `P + R = 0`.
pub fn evaluate(predictions: &[usize], gold: &[usize], classes: &[String]) -> Result<EvalReport> {
    if predictions.len() != gold.len() {
        return Err(Error::Shape(format!(
            "{} predictions for {} gold labels",
            predictions.len(),
            gold.len()
        )));
    }
    let k = classes.len();
    if let Some(bad) = predictions.iter().chain(gold).find(|&&c| c >= k) {
        return Err(Error::Parameter(format!("label {bad} outside {k} classes")));
    }
    let mut confusion = vec![vec![0usize; k]; k];
    for (&p, &g) in predictions.iter().zip(gold) {
        confusion[g][p] += 1;
    }
    let mut per_class = Vec::with_capacity(k);
    for c in 0..k {
        let tp = confusion[c][c] as f64;
        let support: usize = confusion[c].iter().sum();
        let predicted: usize = confusion.iter().map(|row| row[c]).sum();
        let precision = if predicted == 0 { 0.0 } else { tp / predicted as f64 };
        let recall = if support == 0 { 0.0 } else { tp / support as f64 };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        per_class.push(ClassMetrics {
            precision,
            recall,
            f1,
            support,
        });
    }
    let present: Vec<usize> = (0..k)
        .filter(|&c| per_class[c].support > 0 || confusion.iter().any(|row| row[c] > 0))
        .collect();
    let mean = |f: &dyn Fn(&ClassMetrics) -> f64| {
        if present.is_empty() {
            0.0
        } else {
            present.iter().map(|&c| f(&per_class[c])).sum::<f64>() / present.len() as f64
        }
    };
    let total = gold.len();
    let weighted_f1 = if total == 0 {
        0.0
    } else {
        per_class.iter().map(|m| m.f1 * m.support as f64).sum::<f64>() / total as f64
    };
    let correct: usize = (0..k).map(|c| confusion[c][c]).sum();
    Ok(EvalReport {
        classes: classes.to_vec(),
        macro_precision: mean(&|m| m.precision),
        macro_recall: mean(&|m| m.recall),
        macro_f1: mean(&|m| m.f1),
        weighted_f1,
        accuracy: if total == 0 { 0.0 } else { correct as f64 / total as f64 },
        per_class,
        confusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts() -> DateTime<Utc> {
        "2016-02-01T12:00:00Z".parse().unwrap()
    }

    fn corpus(texts: &[&str]) -> Corpus {
        Corpus::new(
            texts
                .iter()
                .enumerate()
                .map(|(i, t)| Tweet::new(format!("t{i}"), *t, ts()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn load_examples() {
        let empty = read_corpus("".as_bytes(), Path::new("e")).unwrap();
        assert!(empty.is_empty());
        let three = "{\"id\":\"1\",\"text\":\"a\",\"timestamp\":\"2016-01-01T00:00:00Z\"}\n\
                     {\"id\":\"2\",\"text\":\"b\",\"timestamp\":\"2016-01-01T00:00:00+00:00\"}\n\n\
                     {\"id\":\"3\",\"text\":\"c\",\"timestamp\":\"2016-01-01T05:00:00+05:00\",\"labels\":{\"election\":true}}\n";
        let c = read_corpus(three.as_bytes(), Path::new("x")).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.get("3").unwrap().labels.as_ref().unwrap().election, Some(true));
        let dup = "{\"id\":\"1\",\"text\":\"a\",\"timestamp\":\"2016-01-01T00:00:00Z\"}\n".repeat(2);
        match read_corpus(dup.as_bytes(), Path::new("d")) {
            Err(Error::DuplicateId(id)) => assert_eq!(id, "1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn too_many_malformed_lines_is_an_error() {
        let good = "{\"id\":\"X\",\"text\":\"a\",\"timestamp\":\"2016-01-01T00:00:00Z\"}";
        let mut lines: Vec<String> = (0..9).map(|i| good.replace('X', &i.to_string())).collect();
        lines.push("not json".into());
        assert_eq!(read_corpus(lines.join("\n").as_bytes(), Path::new("a")).unwrap().len(), 9);
        lines.push("{\"id\":\"z\"}".into());
        assert!(matches!(
            read_corpus(lines.join("\n").as_bytes(), Path::new("b")),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn term_matching_rules() {
        let t = |s: &str| Tweet::new("x", s, ts());
        assert!(match_terms(&t("I love Donald Trump!"), &["donald trump"]).contains("donald trump"));
        assert!(match_terms(&t("what a trumpet"), &["trump"]).is_empty());
        assert!(match_terms(&t("#Election2016 tonight"), &["#election2016"]).contains("#election2016"));
        assert!(match_terms(&t("election2016 tonight"), &["#election2016"]).is_empty());
        assert!(match_terms(&t("donald the trump"), &["donald trump"]).is_empty());
        let m = TermMatcher::new(&["hillary", "@realdonaldtrump"]);
        assert_eq!(m.matches("HILLARY vs @RealDonaldTrump").len(), 2);
    }

    #[test]
    fn election_labels_partition_corpus() {
        let c = corpus(&["go #election2016", "cats are nice", "Hillary Clinton speaks"]);
        let set = distant_label_election(&c, &["#election2016", "hillary clinton"]).unwrap();
        let labels: Vec<bool> = set.examples.iter().map(|e| e.label).collect();
        assert_eq!(labels, [true, false, true]);
        assert_eq!(set.counts.values().sum::<usize>(), 3);
    }

    #[test]
    fn topic_labels_exclude_ambiguous() {
        let c = corpus(&["obamacare again", "nra and the border wall", "lunch time"]);
        let lists = vec![
            (TopicLabel::HealthCare, vec!["obamacare", "medicaid"]),
            (TopicLabel::Guns, vec!["nra"]),
            (TopicLabel::Immigration, vec!["border wall"]),
        ];
        let set = distant_label_topic(&c, &lists).unwrap();
        assert_eq!(set.examples.len(), 1);
        assert_eq!(set.examples[0].label, TopicLabel::HealthCare);
        assert_eq!(set.excluded, 2);
    }

    #[test]
    fn sentiment_labels_strip_lexicon_tokens() {
        let c = corpus(&[":) great day", "sad news :(", "the meeting is at 5", "happy but sad"]);
        let set = distant_label_sentiment(&c, &[":)", "happy"], &[":(", "sad"]).unwrap();
        let got: Vec<(&str, SentimentLabel)> =
            set.examples.iter().map(|e| (e.text.as_str(), e.label)).collect();
        assert_eq!(
            got,
            [
                ("great day", SentimentLabel::Positive),
                ("news", SentimentLabel::Negative),
                ("the meeting is at 5", SentimentLabel::Neutral),
            ]
        );
        assert_eq!(set.excluded, 1);
        assert!(matches!(
            distant_label_sentiment(&c, &["sad"], &["sad"]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn stratified_split() {
        let data: Vec<(usize, bool)> = (0..100).map(|i| (i, i % 2 == 0)).collect();
        let (train, test) = split_dataset(&data, |e| e.1, 0.1, 3).unwrap();
        assert_eq!((train.len(), test.len()), (90, 10));
        assert_eq!(test.iter().filter(|e| e.1).count(), 5);
        let again = split_dataset(&data, |e| e.1, 0.1, 3).unwrap();
        assert_eq!(again.1, test);
        let mut all: Vec<usize> = train.iter().chain(&test).map(|e| e.0).collect();
        all.sort();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        assert!(split_dataset(&[(0, true), (1, false), (2, false)], |e| e.1, 0.1, 0).is_err());
        assert!(split_dataset(&data, |e| e.1, 1.0, 0).is_err());
    }

    #[test]
    fn evaluate_examples() {
        let names = vec!["0".to_string(), "1".to_string()];
        let r = evaluate(&[1, 0, 0, 0], &[1, 1, 0, 0], &names).unwrap();
        assert_eq!(r.per_class[1].precision, 1.0);
        assert_eq!(r.per_class[1].recall, 0.5);
        assert_eq!(r.per_class[1].f1, 2.0 / 3.0);
        assert_eq!(r.confusion, vec![vec![2, 0], vec![1, 1]]);

        let perfect = evaluate(&[0, 1, 1], &[0, 1, 1], &names).unwrap();
        assert_eq!(perfect.weighted_f1, 1.0);
        assert_eq!(perfect.macro_precision, 1.0);

        let three: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let r = evaluate(&[0, 1], &[0, 1], &three).unwrap();
        assert_eq!(r.per_class[2].f1, 0.0);
        assert_eq!(r.per_class[2].support, 0);
        assert_eq!(r.weighted_f1, 1.0);
        assert_eq!(r.macro_f1, 1.0);
        assert!(evaluate(&[0], &[0, 1], &names).is_err());
    }

    #[test]
    fn term_list_parsing() {
        let terms = parse_term_list("; seeds\n#Election2016\n  Hillary Clinton \n\n#election2016\n");
        assert_eq!(terms, ["#election2016", "hillary clinton"]);
    }
}
