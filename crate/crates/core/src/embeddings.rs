//! Skip-gram word embeddings trained with a Huffman-coded hierarchical
//! softmax, plus cosine-similarity queries over the learned vectors.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{sigmoid, Matrix, ModelRng};

/// Terms ordered by descending frequency, ties broken lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    terms: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
    min_count: u64,
}

impl Vocab {
    pub fn build<S: AsRef<str>>(corpus: &[Vec<S>], min_count: u64) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyInput("cannot build a vocabulary from an empty corpus".into()));
        }
        let mut freq: HashMap<&str, u64> = HashMap::new();
        for sentence in corpus {
            for token in sentence {
                *freq.entry(token.as_ref()).or_default() += 1;
            }
        }
        let mut entries: Vec<(&str, u64)> = freq.into_iter().filter(|&(_, c)| c >= min_count).collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        if entries.len() < 2 {
            return Err(Error::EmptyInput(format!(
                "vocabulary needs at least 2 terms with count >= {min_count}, found {}",
                entries.len()
            )));
        }
        let terms: Vec<String> = entries.iter().map(|(t, _)| t.to_string()).collect();
        let counts = entries.iter().map(|&(_, c)| c).collect();
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Ok(Vocab {
            terms,
            counts,
            index,
            min_count,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn lookup(&self, term: &str) -> Result<usize> {
        self.get(term)
            .ok_or_else(|| Error::Lookup(format!("term {term:?} is not in the vocabulary")))
    }
}

/// Binary Huffman code over the vocabulary. Internal nodes are numbered
/// `0..|V|-1`; each word stores the internal nodes on its root-to-leaf path
/// and the branch bit taken at each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuffmanTree {
    paths: Vec<Vec<usize>>,
    codes: Vec<Vec<bool>>,
}

impl HuffmanTree {
    /// Builds the code from vocabulary frequencies. Equal weights are merged
    /// in order of node id (leaves first, by vocabulary index), so the tree
    /// is deterministic.
    pub fn build(counts: &[u64]) -> Result<Self> {
        let n = counts.len();
        if n < 2 {
            return Err(Error::Parameter(format!(
                "a Huffman tree needs at least 2 symbols, got {n}"
            )));
        }
        // Node ids: leaves 0..n, internal n..2n-1.
        let mut parent = vec![0usize; 2 * n - 1];
        let mut bit = vec![false; 2 * n - 1];
        let mut heap: BinaryHeap<Reverse<(u64, usize)>> =
            counts.iter().enumerate().map(|(i, &c)| Reverse((c, i))).collect();
        let mut next = n;
        while heap.len() > 1 {
            let Reverse((w0, a)) = heap.pop().expect("len > 1");
            let Reverse((w1, b)) = heap.pop().expect("len > 1");
            parent[a] = next;
            parent[b] = next;
            bit[b] = true;
            heap.push(Reverse((w0 + w1, next)));
            next += 1;
        }
        let root = 2 * n - 2;
        let mut paths = Vec::with_capacity(n);
        let mut codes = Vec::with_capacity(n);
        for leaf in 0..n {
            let mut path = Vec::new();
            let mut code = Vec::new();
            let mut node = leaf;
            while node != root {
                code.push(bit[node]);
                node = parent[node];
                path.push(node - n);
            }
            path.reverse();
            code.reverse();
            paths.push(path);
            codes.push(code);
        }
        Ok(HuffmanTree { paths, codes })
    }

    pub fn leaves(&self) -> usize {
        self.paths.len()
    }

    pub fn internal_nodes(&self) -> usize {
        self.paths.len() - 1
    }

    /// Internal nodes from the root down to `word`'s leaf.
    pub fn path(&self, word: usize) -> &[usize] {
        &self.paths[word]
    }

    pub fn code(&self, word: usize) -> &[bool] {
        &self.codes[word]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SkipGramConfig {
    /// Context window `c` on each side of the center word.
    pub window: usize,
    pub dim: usize,
    pub epochs: usize,
    /// Initial learning rate; decays linearly to `learning_rate / 100`.
    pub learning_rate: f64,
    pub min_count: u64,
    pub seed: u64,
}

impl Default for SkipGramConfig {
    fn default() -> Self {
        SkipGramConfig {
            window: 5,
            dim: 100,
            epochs: 5,
            learning_rate: 0.025,
            min_count: 1,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SkipGramModel {
    vocab: Vocab,
    tree: HuffmanTree,
    input_vectors: Matrix,
    node_vectors: Matrix,
    config: SkipGramConfig,
}

impl SkipGramModel {
    /// Untrained model: input vectors uniform in `[-0.5/d, 0.5/d]`, tree
    /// node vectors zero.
    pub fn new(vocab: Vocab, config: SkipGramConfig) -> Result<Self> {
        if config.window < 1 {
            return Err(Error::Parameter("context window must be >= 1".into()));
        }
        if config.dim < 2 {
            return Err(Error::Parameter("embedding dimension must be >= 2".into()));
        }
        let tree = HuffmanTree::build(vocab.counts())?;
        let mut rng = ModelRng::seed_from_u64(config.seed);
        let input_vectors = Matrix::uniform(vocab.len(), config.dim, 0.5 / config.dim as f64, &mut rng);
        let node_vectors = Matrix::zeros(tree.internal_nodes(), config.dim);
        Ok(SkipGramModel {
            vocab,
            tree,
            input_vectors,
            node_vectors,
            config,
        })
    }

    /// Assembles a model from explicit vectors (`|V| x d` inputs and
    /// `(|V|-1) x d` tree nodes).
    pub fn from_parts(
        vocab: Vocab,
        input_vectors: Matrix,
        node_vectors: Matrix,
        config: SkipGramConfig,
    ) -> Result<Self> {
        let tree = HuffmanTree::build(vocab.counts())?;
        if input_vectors.shape() != (vocab.len(), config.dim)
            || node_vectors.shape() != (vocab.len() - 1, config.dim)
        {
            return Err(Error::Shape(format!(
                "vectors {:?}/{:?} do not fit |V|={} d={}",
                input_vectors.shape(),
                node_vectors.shape(),
                vocab.len(),
                config.dim
            )));
        }
        Ok(SkipGramModel {
            vocab,
            tree,
            input_vectors,
            node_vectors,
            config,
        })
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn tree(&self) -> &HuffmanTree {
        &self.tree
    }

    pub fn config(&self) -> &SkipGramConfig {
        &self.config
    }

    pub fn input_vectors(&self) -> &Matrix {
        &self.input_vectors
    }

    /// `p(target | center)` as the product of branch probabilities along the
    /// target's path: `sigmoid(u.v)` for a 0 bit, `sigmoid(-u.v)` for a 1.
    pub fn hs_probability(&self, center: &str, target: &str) -> Result<f64> {
        let c = self.vocab.lookup(center)?;
        let t = self.vocab.lookup(target)?;
        Ok(self.log_prob(c, t).exp())
    }

    fn log_prob(&self, center: usize, target: usize) -> f64 {
        let v = self.input_vectors.row(center);
        self.tree
            .path(target)
            .iter()
            .zip(self.tree.code(target))
            .map(|(&node, &bit)| {
                let x = dot(self.node_vectors.row(node), v);
                let s = if bit { -x } else { x };
                log_sigmoid(s)
            })
            .sum()
    }

    fn encode(&self, corpus: &[Vec<String>]) -> Vec<Vec<usize>> {
        corpus
            .iter()
            .map(|s| s.iter().filter_map(|t| self.vocab.get(t)).collect())
            .collect()
    }

    /// Mean over token positions of `sum_{-c<=j<=c, j!=0} ln p(w_{n+j} | w_n)`.
    /// Out-of-vocabulary tokens are dropped before windowing.
    pub fn log_likelihood(&self, corpus: &[Vec<String>]) -> f64 {
        let encoded = self.encode(corpus);
        let c = self.config.window;
        let mut total = 0.0;
        let mut positions = 0usize;
        for sentence in &encoded {
            for (n, &center) in sentence.iter().enumerate() {
                positions += 1;
                for ctx in context(sentence.len(), n, c) {
                    total += self.log_prob(center, sentence[ctx]);
                }
            }
        }
        if positions == 0 {
            0.0
        } else {
            total / positions as f64
        }
    }

    /// One pass of stochastic gradient ascent on the skip-gram objective.
    /// `lr_at` maps the number of center words processed so far to a rate.
    fn train_epoch(&mut self, encoded: &[Vec<usize>], mut lr_at: impl FnMut() -> f64) {
        let dim = self.config.dim;
        let c = self.config.window;
        let mut grad_input = vec![0.0; dim];
        for sentence in encoded {
            for (n, &center) in sentence.iter().enumerate() {
                let lr = lr_at();
                for ctx in context(sentence.len(), n, c) {
                    let target = sentence[ctx];
                    grad_input.iter_mut().for_each(|g| *g = 0.0);
                    let v = self.input_vectors.row(center).to_vec();
                    for (&node, &bit) in self.tree.path(target).iter().zip(self.tree.code(target)) {
                        let u = self.node_vectors.row_mut(node);
                        let label = if bit { 0.0 } else { 1.0 };
                        let g = (label - sigmoid(dot(u, &v))) * lr;
                        for ((gi, ui), vi) in grad_input.iter_mut().zip(u.iter_mut()).zip(&v) {
                            *gi += g * *ui;
                            *ui += g * vi;
                        }
                    }
                    for (vi, gi) in self.input_vectors.row_mut(center).iter_mut().zip(&grad_input) {
                        *vi += gi;
                    }
                }
            }
        }
    }

    /// The learned input vectors as a standalone similarity index.
    pub fn word_vectors(&self) -> WordVectors {
        WordVectors::new(self.vocab.terms().to_vec(), self.input_vectors.clone())
            .expect("vocabulary and vectors agree")
    }
}

/// Context positions of `n` within `±c`, excluding `n`.
fn context(len: usize, n: usize, c: usize) -> impl Iterator<Item = usize> {
    let lo = n.saturating_sub(c);
    let hi = (n + c).min(len.saturating_sub(1));
    (lo..=hi).filter(move |&j| j != n)
}

/// `ln(sigmoid(x)) = -softplus(-x)`, stable for large `|x|`.
fn log_sigmoid(x: f64) -> f64 {
    -((-x).max(0.0) + (-x.abs()).exp().ln_1p())
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Trains skip-gram embeddings over tokenized sentences and reports the
/// corpus log-likelihood before training and after each epoch.
pub fn train_skipgram(corpus: &[Vec<String>], config: SkipGramConfig) -> Result<(SkipGramModel, Vec<f64>)> {
    let vocab = Vocab::build(corpus, config.min_count)?;
    let mut model = SkipGramModel::new(vocab, config)?;
    let encoded = model.encode(corpus);
    let words_per_epoch: usize = encoded.iter().map(Vec::len).sum();
    let total = (words_per_epoch * config.epochs).max(1) as f64;
    let floor = config.learning_rate / 100.0;
    let mut processed = 0usize;
    let mut trace = vec![model.log_likelihood(corpus)];
    for _ in 0..config.epochs {
        model.train_epoch(&encoded, || {
            let progress = processed as f64 / total;
            processed += 1;
            (config.learning_rate * (1.0 - progress)).max(floor)
        });
        trace.push(model.log_likelihood(corpus));
    }
    Ok((model, trace))
}

/// Cosine of the angle between `a` and `b`.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "cosine of {}- and {}-dimensional vectors",
            a.len(),
            b.len()
        )));
    }
    let (na, nb) = (dot(a, a).sqrt(), dot(b, b).sqrt());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Parameter("cosine similarity of a zero vector is undefined".into()));
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

/// Term vectors used for nearest-neighbor queries.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVectors {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Matrix,
    norms: Vec<f64>,
}

impl WordVectors {
    pub fn new(terms: Vec<String>, vectors: Matrix) -> Result<Self> {
        if terms.len() != vectors.rows() {
            return Err(Error::Shape(format!(
                "{} terms but {} vectors",
                terms.len(),
                vectors.rows()
            )));
        }
        let mut index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::Parameter(format!("duplicate term {t:?}")));
            }
        }
        let norms = (0..vectors.rows()).map(|r| dot(vectors.row(r), vectors.row(r)).sqrt()).collect();
        Ok(WordVectors {
            terms,
            index,
            vectors,
            norms,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.cols()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn contains(&self, term: &str) -> bool {
        self.index.contains_key(term)
    }

    pub fn vector(&self, term: &str) -> Result<&[f64]> {
        let i = self.lookup(term)?;
        Ok(self.vectors.row(i))
    }

    fn lookup(&self, term: &str) -> Result<usize> {
        self.index
            .get(term)
            .copied()
            .ok_or_else(|| Error::Lookup(format!("term {term:?} is not in the vocabulary")))
    }

    pub fn similarity(&self, a: &str, b: &str) -> Result<f64> {
        cosine_similarity(self.vector(a)?, self.vector(b)?)
    }

    /// The `k` terms most cosine-similar to `term`, excluding `term` itself,
    /// by descending score with ties broken by vocabulary order. Terms with
    /// zero vectors are never returned.
    pub fn top_k_similar(&self, term: &str, k: usize) -> Result<Vec<(String, f64)>> {
        let q = self.lookup(term)?;
        if self.norms[q] == 0.0 {
            return Err(Error::Parameter(format!("term {term:?} has a zero vector")));
        }
        let query = self.vectors.row(q);
        let mut scored: Vec<(usize, f64)> = (0..self.len())
            .filter(|&i| i != q && self.norms[i] > 0.0)
            .map(|i| {
                let s = dot(query, self.vectors.row(i)) / (self.norms[q] * self.norms[i]);
                (i, s.clamp(-1.0, 1.0))
            })
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0)));
        scored.truncate(k);
        Ok(scored.into_iter().map(|(i, s)| (self.terms[i].clone(), s)).collect())
    }

    /// Writes one line per term: the term, then its components, separated by
    /// single spaces.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (r, term) in self.terms.iter().enumerate() {
            write!(out, "{term}")?;
            for v in self.vectors.row(r) {
                write!(out, " {v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Reads the format produced by [`Self::write_text`].
    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut terms = Vec::new();
        let mut data = Vec::new();
        let mut dim = None;
        for (n, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<vectors>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(' ');
            let term = parts.next().unwrap_or_default().to_string();
            let values = parts
                .map(|p| p.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parameter(format!("vector line {}: {e}", n + 1)))?;
            match dim {
                None => dim = Some(values.len()),
                Some(d) if d != values.len() => {
                    return Err(Error::Shape(format!(
                        "vector line {} has {} components, expected {d}",
                        n + 1,
                        values.len()
                    )))
                }
                _ => {}
            }
            terms.push(term);
            data.extend(values);
        }
        let dim = dim.unwrap_or(0);
        WordVectors::new(terms.clone(), Matrix::new(terms.len(), dim, data)?)
    }
}

/// Samples a random vector set, handy for similarity tests.
pub fn random_word_vectors<R: Rng + ?Sized>(n: usize, dim: usize, rng: &mut R) -> WordVectors {
    let terms = (0..n).map(|i| format!("w{i}")).collect();
    WordVectors::new(terms, Matrix::uniform(n, dim, 1.0, rng)).expect("consistent shapes")
}
