//! Finite-difference checks returning the largest relative error found.

use rand::SeedableRng;
use tweetsift::election::{ElectionExample, ElectionNet, ElectionNetConfig};
use tweetsift::nn::*;
use tweetsift::topic_sentiment::{tokenize_words, TsExample, TsNet, TsNetConfig, WordVocab, OOV_INDEX};

use super::{fd_max_rel_error, model_fd_max_rel_error, random_chars, random_matrix};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `sum(probe * f(x))` for a random `probe`, the generic scalar loss used to
/// differentiate vector-valued layers.
fn probe_like(m: &Matrix, rng: &mut ModelRng) -> Matrix {
    random_matrix(m.rows(), m.cols(), rng)
}

pub fn conv1d() -> f64 {
    let mut rng = ModelRng::seed_from_u64(11);
    let (rows, channels, window, filters) = (9, 3, 4, 5);
    let x = random_matrix(rows, channels, &mut rng);
    let w = random_matrix(filters, window * channels, &mut rng);
    let b: Vec<f64> = random_matrix(1, filters, &mut rng).into_vec();
    let out = conv1d_forward(&x, &w, &b).unwrap();
    let probe = probe_like(&out, &mut rng);

    let mut gw = Matrix::zeros(filters, window * channels);
    let mut gb = vec![0.0; filters];
    let gx = conv1d_backward(&x, &w, &out, &probe, &mut gw, &mut gb, true)
        .unwrap()
        .unwrap();

    let loss = |x: &Matrix, w: &Matrix, b: &[f64]| dot(conv1d_forward(x, w, b).unwrap().as_slice(), probe.as_slice());
    let ex = fd_max_rel_error(x.as_slice(), gx.as_slice(), |v| {
        loss(&Matrix::new(rows, channels, v.to_vec()).unwrap(), &w, &b)
    });
    let ew = fd_max_rel_error(w.as_slice(), gw.as_slice(), |v| {
        loss(&x, &Matrix::new(filters, window * channels, v.to_vec()).unwrap(), &b)
    });
    let eb = fd_max_rel_error(&b, &gb, |v| loss(&x, &w, v));
    ex.max(ew).max(eb)
}

/// Windowed max pooling and max-over-time.
pub fn pooling() -> (f64, f64) {
    let mut rng = ModelRng::seed_from_u64(13);
    let x = random_matrix(11, 4, &mut rng);
    let mut errors = [0.0; 2];
    for (slot, pooled) in [maxpool1d(&x, 3).unwrap(), max_over_time(&x).unwrap()].into_iter().enumerate() {
        let pool = x.rows() / pooled.output.rows();
        let probe = probe_like(&pooled.output, &mut rng);
        let gx = pooled.backward(&probe, x.rows()).unwrap();
        errors[slot] = fd_max_rel_error(x.as_slice(), gx.as_slice(), |v| {
            let m = Matrix::new(11, 4, v.to_vec()).unwrap();
            dot(maxpool1d(&m, pool).unwrap().output.as_slice(), probe.as_slice())
        });
    }
    (errors[0], errors[1])
}

pub fn dense() -> f64 {
    let mut worst = 0.0f64;
    for (k, activation) in [Activation::Relu, Activation::Sigmoid, Activation::Softmax, Activation::None]
        .into_iter()
        .enumerate()
    {
        let mut rng = ModelRng::seed_from_u64(20 + k as u64);
        let (batch, inp, out) = (3, 5, 4);
        let x = random_matrix(batch, inp, &mut rng);
        let w = random_matrix(out, inp, &mut rng);
        let b = random_matrix(1, out, &mut rng).into_vec();
        let y = dense_forward_batch(&x, &w, &b, activation).unwrap();
        let probe = probe_like(&y, &mut rng);
        let mut gw = Matrix::zeros(out, inp);
        let mut gb = vec![0.0; out];
        let gx = dense_backward_batch(&x, &w, &y, &probe, activation, &mut gw, &mut gb, true)
            .unwrap()
            .unwrap();
        let loss = |x: &Matrix, w: &Matrix, b: &[f64]| {
            dot(dense_forward_batch(x, w, b, activation).unwrap().as_slice(), probe.as_slice())
        };
        let ex = fd_max_rel_error(x.as_slice(), gx.as_slice(), |v| {
            loss(&Matrix::new(batch, inp, v.to_vec()).unwrap(), &w, &b)
        });
        let ew = fd_max_rel_error(w.as_slice(), gw.as_slice(), |v| {
            loss(&x, &Matrix::new(out, inp, v.to_vec()).unwrap(), &b)
        });
        let eb = fd_max_rel_error(&b, &gb, |v| loss(&x, &w, v));
        worst = worst.max(ex).max(ew).max(eb);
    }
    worst
}

pub fn dropout_fixed_mask() -> f64 {
    let mut rng = ModelRng::seed_from_u64(30);
    let x = random_matrix(1, 12, &mut rng).into_vec();
    let mask = DropoutMask::sample(12, 0.5, &mut rng).unwrap();
    let probe = random_matrix(1, 12, &mut rng).into_vec();
    let analytic = mask.apply(&probe);
    fd_max_rel_error(&x, &analytic, |v| dot(&mask.apply(v), &probe))
}

/// BCE against the probability and through the sigmoid against the logit.
pub fn bce() -> f64 {
    let mut worst = 0.0f64;
    for &(o, t) in &[(0.3, 1.0), (0.8, 0.0), (0.55, 1.0)] {
        let analytic = (o - t) / (o * (1.0 - o));
        worst = worst.max(fd_max_rel_error(&[o], &[analytic], |v| bce_loss(v[0], t).unwrap()));
    }
    for &(z, t) in &[(-1.3, 1.0), (0.4, 0.0), (2.0, 1.0)] {
        worst = worst.max(fd_max_rel_error(&[z], &[sigmoid(z) - t], |v| bce_loss(sigmoid(v[0]), t).unwrap()));
    }
    worst
}

/// Cross-entropy against the predicted distribution and, through the
/// softmax, the logits (`q - p`).
pub fn cross_entropy() -> f64 {
    let p = [0.0, 0.0, 1.0, 0.0];
    let q = [0.1, 0.2, 0.3, 0.4];
    let analytic: Vec<f64> = p.iter().zip(&q).map(|(p, q)| -p / q).collect();
    let direct = fd_max_rel_error(&q, &analytic, |v| cross_entropy_loss(&p, v).unwrap());
    let logits = [0.5, -1.0, 0.25, 2.0];
    let probs = softmax(&logits).unwrap();
    let analytic: Vec<f64> = probs.iter().zip(&p).map(|(q, p)| q - p).collect();
    let through = fd_max_rel_error(&logits, &analytic, |v| {
        cross_entropy_loss(&p, &softmax(v).unwrap()).unwrap()
    });
    direct.max(through)
}

pub fn embedding() -> f64 {
    let mut rng = ModelRng::seed_from_u64(40);
    let table = random_matrix(6, 3, &mut rng);
    let indices = [4, 1, 4, 0];
    let probe = random_matrix(4, 3, &mut rng);
    let mut grad = Matrix::zeros(6, 3);
    embedding_backward(&probe, &indices, &mut grad, None).unwrap();
    fd_max_rel_error(table.as_slice(), grad.as_slice(), |v| {
        let t = Matrix::new(6, 3, v.to_vec()).unwrap();
        dot(embedding_lookup(&t, &indices).unwrap().as_slice(), probe.as_slice())
    })
}

pub fn mini_election_config(hidden_dropout: bool) -> ElectionNetConfig {
    let mut config = ElectionNetConfig {
        input_len: 20,
        alphabet_size: 70,
        conv: vec![
            ConvLayerSpec { window: 5, filters: 4, pool: Some(3), in_channels: 70 },
            ConvLayerSpec { window: 5, filters: 4, pool: None, in_channels: 4 },
        ],
        dense: vec![DenseLayerSpec { in_size: 4, out_size: 1, activation: Activation::Sigmoid, dropout_rate: 0.0 }],
    };
    if hidden_dropout {
        config.dense.insert(
            0,
            DenseLayerSpec { in_size: 4, out_size: 3, activation: Activation::Relu, dropout_rate: 0.5 },
        );
        config.dense[1].in_size = 3;
    }
    config
}

/// The miniature character network with and without a dropout hidden layer.
pub fn mini_election_net() -> f64 {
    let mut rng = ModelRng::seed_from_u64(50);
    let examples: Vec<ElectionExample> = (0..4)
        .map(|i| ElectionExample::new(&random_chars(18 + i, &mut rng), i % 2 == 0))
        .collect();
    let batch: Vec<&ElectionExample> = examples.iter().collect();
    let mut worst = 0.0f64;
    for (hidden, seed) in [(false, 5), (true, 6)] {
        let mut net = ElectionNet::new(mini_election_config(hidden), seed).unwrap();
        assert_eq!(net.shape_chain().flatten, 4);
        worst = worst.max(model_fd_max_rel_error(&mut net, &batch, 99));
    }
    worst
}

pub fn mini_ts_config() -> TsNetConfig {
    TsNetConfig {
        max_words: 6,
        embedding_dim: 8,
        windows: vec![2, 3, 4],
        filters: 3,
        hidden: 4,
        classes: 3,
        dropout_rate: 0.5,
        word_dropout: 0.01,
        embedding_init: 0.25,
        fallback_class: 2,
    }
}

/// The miniature word network, including an out-of-vocabulary token.
pub fn mini_word_net() -> f64 {
    let texts = ["guns save lives", "tax the rich now please", "vote", "wall wall border wall tax guns"];
    let seqs: Vec<Vec<String>> = texts.iter().map(|t| tokenize_words(t)).collect();
    let vocab = WordVocab::build(&seqs, 1);
    let mut net = TsNet::new(mini_ts_config(), vocab, 8).unwrap();
    let examples: Vec<TsExample> = texts
        .iter()
        .enumerate()
        .map(|(i, t)| net.example(t, i % 3).unwrap())
        .chain([TsExample { tokens: vec![OOV_INDEX, 2], label: 1 }])
        .collect();
    let batch: Vec<&TsExample> = examples.iter().collect();
    model_fd_max_rel_error(&mut net, &batch, 77)
}

/// Every check, labeled.
pub fn all() -> Vec<(&'static str, f64)> {
    let (maxpool, over_time) = pooling();
    vec![
        ("conv1d", conv1d()),
        ("maxpool", maxpool),
        ("max_over_time", over_time),
        ("dense", dense()),
        ("dropout", dropout_fixed_mask()),
        ("bce", bce()),
        ("cross_entropy", cross_entropy()),
        ("embedding", embedding()),
        ("mini_election_net", mini_election_net()),
        ("mini_word_net", mini_word_net()),
    ]
}
