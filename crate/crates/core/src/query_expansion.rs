//! Seed-term query expansion: mutually similar embedding neighbors, noun
//! phrases built around them and an election-significance filter.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{parse_term_list, Corpus, TermMatcher};
use crate::embeddings::WordVectors;
use crate::error::{Error, Result};
use crate::text::{is_url, tokenize};

pub const DEFAULT_NEIGHBORS: usize = 10;
pub const DEFAULT_RHO_MIN: f64 = 0.3;
pub const MAX_PHRASES: usize = 5;

/// Seed terms, lowercased and deduplicated in file order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedTermList {
    terms: Vec<String>,
    source: Option<PathBuf>,
}

impl SeedTermList {
    pub fn new<S: AsRef<str>>(terms: &[S]) -> Result<Self> {
        let joined: Vec<&str> = terms.iter().map(AsRef::as_ref).collect();
        Self::parse(&joined.join("\n"))
    }

    /// Parses the seed file format: one term per line, `;` comment lines.
    pub fn parse(text: &str) -> Result<Self> {
        let terms = parse_term_list(text);
        if terms.is_empty() {
            return Err(Error::EmptyInput("seed term list is empty".into()));
        }
        Ok(SeedTermList {
            terms,
            source: None,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut list = Self::parse(&text).map_err(|_| Error::Format {
            path: path.to_path_buf(),
            message: "no seed terms".into(),
        })?;
        list.source = Some(path.to_path_buf());
        Ok(list)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn source(&self) -> Option<&Path> {
        self.source.as_deref()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    SimilarTerm,
    NounPhrase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpandedTerm {
    pub term: String,
    pub source_seed: String,
    pub similarity: f64,
    pub rho: f64,
    pub kind: TermKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub term: String,
    pub source_seed: String,
    pub similarity: f64,
}

/// Terms `c` with `c` among the `k` nearest neighbors of a seed `s` and `s`
/// among the `k` nearest neighbors of `c`. Seeds are never candidates; a
/// term reached from several seeds keeps its most similar seed. Output is
/// sorted by similarity descending, then term.
pub fn mutual_top_k(vectors: &WordVectors, seeds: &SeedTermList, k: usize) -> Result<Vec<Candidate>> {
    let seed_set: HashSet<&str> = seeds.terms().iter().map(String::as_str).collect();
    let mut best: HashMap<String, Candidate> = HashMap::new();
    let mut any_present = false;
    let mut neighbor_cache: HashMap<String, HashSet<String>> = HashMap::new();
    for seed in seeds.terms() {
        if !vectors.contains(seed) {
            log::warn!("seed {seed:?} is not in the embedding vocabulary");
            continue;
        }
        any_present = true;
        for (cand, sim) in vectors.top_k_similar(seed, k)? {
            if seed_set.contains(cand.as_str()) {
                continue;
            }
            if !neighbor_cache.contains_key(&cand) {
                let back = vectors.top_k_similar(&cand, k)?.into_iter().map(|(t, _)| t).collect();
                neighbor_cache.insert(cand.clone(), back);
            }
            if !neighbor_cache[&cand].contains(seed) {
                continue;
            }
            let better = best.get(&cand).is_none_or(|c| sim > c.similarity);
            if better {
                best.insert(
                    cand.clone(),
                    Candidate {
                        term: cand,
                        source_seed: seed.clone(),
                        similarity: sim,
                    },
                );
            }
        }
    }
    if !any_present {
        return Err(Error::Lookup("no seed term is in the embedding vocabulary".into()));
    }
    let mut out: Vec<Candidate> = best.into_values().collect();
    out.sort_by(|a, b| b.similarity.total_cmp(&a.similarity).then_with(|| a.term.cmp(&b.term)));
    Ok(out)
}

pub fn mutual_top10(vectors: &WordVectors, seeds: &SeedTermList) -> Result<Vec<Candidate>> {
    mutual_top_k(vectors, seeds, DEFAULT_NEIGHBORS)
}

const STOPWORDS: &[&str] = &[
    "a", "about", "after", "all", "am", "an", "and", "any", "are", "as", "at", "be", "been", "but",
    "by", "can", "could", "did", "do", "does", "for", "from", "had", "has", "have", "he", "her",
    "him", "his", "how", "i", "if", "in", "into", "is", "it", "its", "just", "me", "my", "no",
    "not", "of", "on", "or", "our", "out", "rt", "she", "so", "than", "that", "the", "their",
    "them", "then", "there", "they", "this", "to", "up", "us", "was", "we", "were", "what", "when",
    "which", "who", "why", "will", "with", "would", "you", "your",
];

pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.binary_search(&token).is_ok()
}

fn phrase_token_ok(token: &str) -> bool {
    !is_url(token) && token.chars().any(char::is_alphanumeric)
}

/// Up to five 2- and 3-token phrases containing `term`, ranked by frequency
/// then alphabetically. Phrases may not start or end with a stopword and may
/// not contain URLs.
pub fn harvest_noun_phrases(token_sequences: &[Vec<String>], term: &str) -> Result<Vec<String>> {
    let term_tokens = tokenize(term);
    if term_tokens.is_empty() {
        return Err(Error::EmptyInput("phrase term is empty".into()));
    }
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for tokens in token_sequences {
        for len in 2..=3 {
            if len <= term_tokens.len() || tokens.len() < len {
                continue;
            }
            for window in tokens.windows(len) {
                if is_stopword(&window[0])
                    || is_stopword(&window[len - 1])
                    || !window.iter().all(|t| phrase_token_ok(t))
                    || !window.windows(term_tokens.len()).any(|w| w == term_tokens.as_slice())
                {
                    continue;
                }
                *counts.entry(window.join(" ")).or_insert(0) += 1;
            }
        }
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(ranked.into_iter().take(MAX_PHRASES).map(|(p, _)| p).collect())
}

/// Precomputed tokens and seed hits for repeated significance queries.
#[derive(Debug, Clone)]
pub struct SignificanceIndex {
    tokens: Vec<Vec<String>>,
    has_seed: Vec<bool>,
}

impl SignificanceIndex {
    pub fn new(corpus: &Corpus, seeds: &SeedTermList) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyInput("corpus is empty".into()));
        }
        let seeds = TermMatcher::new(seeds.terms());
        let tokens = corpus.token_sequences();
        let has_seed = tokens.iter().map(|t| !seeds.matches_tokens(t).is_empty()).collect();
        Ok(SignificanceIndex { tokens, has_seed })
    }

    pub fn token_sequences(&self) -> &[Vec<String>] {
        &self.tokens
    }

    /// Share of tweets containing `term` that also contain a seed term.
    pub fn rho(&self, term: &str) -> Result<f64> {
        let matcher = TermMatcher::new(&[term]);
        let (mut matched, mut with_seed) = (0usize, 0usize);
        for (tokens, &seed) in self.tokens.iter().zip(&self.has_seed) {
            if !matcher.matches_tokens(tokens).is_empty() {
                matched += 1;
                with_seed += usize::from(seed);
            }
        }
        if matched == 0 {
            return Err(Error::UndefinedSignificance(term.to_string()));
        }
        Ok(with_seed as f64 / matched as f64)
    }
}

pub fn election_significance(corpus: &Corpus, term: &str, seeds: &SeedTermList) -> Result<f64> {
    SignificanceIndex::new(corpus, seeds)?.rho(term)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionConfig {
    pub neighbors: usize,
    pub rho_min: f64,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        ExpansionConfig {
            neighbors: DEFAULT_NEIGHBORS,
            rho_min: DEFAULT_RHO_MIN,
        }
    }
}

impl ExpansionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rho_min) {
            return Err(Error::Config(format!("rho_min must lie in [0, 1], got {}", self.rho_min)));
        }
        if self.neighbors == 0 {
            return Err(Error::Config("neighbor count must be positive".into()));
        }
        Ok(())
    }
}

/// Candidates and their noun phrases with `rho >= rho_min`, sorted by rho
/// descending then term.
pub fn expand_query(
    seeds: &SeedTermList,
    corpus: &Corpus,
    vectors: &WordVectors,
    config: ExpansionConfig,
) -> Result<Vec<ExpandedTerm>> {
    config.validate()?;
    let index = SignificanceIndex::new(corpus, seeds)?;
    let candidates = mutual_top_k(vectors, seeds, config.neighbors)?;
    let seed_set: HashSet<&str> = seeds.terms().iter().map(String::as_str).collect();
    let mut seen: HashSet<String> = HashSet::new();
    let mut scored = Vec::new();
    for cand in &candidates {
        let phrases = harvest_noun_phrases(index.token_sequences(), &cand.term)?;
        let entries = std::iter::once((cand.term.clone(), TermKind::SimilarTerm))
            .chain(phrases.into_iter().map(|p| (p, TermKind::NounPhrase)));
        for (term, kind) in entries {
            if seed_set.contains(term.as_str()) || !seen.insert(term.clone()) {
                continue;
            }
            let rho = match index.rho(&term) {
                Ok(rho) => rho,
                Err(Error::UndefinedSignificance(_)) => {
                    log::warn!("dropping {term:?}: it occurs in no tweet");
                    continue;
                }
                Err(e) => return Err(e),
            };
            if rho >= config.rho_min {
                scored.push(ExpandedTerm {
                    term,
                    source_seed: cand.source_seed.clone(),
                    similarity: cand.similarity,
                    rho,
                    kind,
                });
            }
        }
    }
    scored.sort_by(|a, b| b.rho.total_cmp(&a.rho).then_with(|| a.term.cmp(&b.term)));
    Ok(scored)
}
