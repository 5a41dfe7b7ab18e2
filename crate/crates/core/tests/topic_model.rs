//! Behavior of the word-level classifier on small synthetic tasks.

use rand::{Rng, SeedableRng};
use tweetsift::nn::{AdamConfig, ModelRng, TrainConfig, Trainable};
use tweetsift::topic_sentiment::*;

fn small_config(classes: usize) -> TsNetConfig {
    TsNetConfig {
        max_words: MAX_WORDS,
        embedding_dim: 16,
        windows: vec![2, 3, 4],
        filters: 8,
        hidden: 16,
        classes,
        dropout_rate: 0.5,
        word_dropout: 0.01,
        embedding_init: 0.25,
        fallback_class: classes - 1,
    }
}

/// `per_class` texts per class, each holding the class marker among random
/// shared filler words.
fn planted(classes: usize, per_class: usize, seed: u64) -> Vec<(String, usize)> {
    let mut rng = ModelRng::seed_from_u64(seed);
    let mut out = Vec::new();
    for c in 0..classes {
        for _ in 0..per_class {
            let len = rng.gen_range(4..10);
            let at = rng.gen_range(0..len);
            let words: Vec<String> = (0..len)
                .map(|i| if i == at { format!("marker{c}") } else { format!("filler{}", rng.gen_range(0..40)) })
                .collect();
            out.push((words.join(" "), c));
        }
    }
    out
}

fn build(config: TsNetConfig, data: &[(String, usize)], seed: u64) -> (TsNet, Vec<TsExample>) {
    let seqs: Vec<Vec<String>> = data.iter().map(|(t, _)| tokenize_words(t)).collect();
    let net = TsNet::new(config, WordVocab::build(&seqs, 1), seed).unwrap();
    let examples = data.iter().map(|(t, c)| net.example(t, *c).unwrap()).collect();
    (net, examples)
}

#[test]
fn overfits_twenty_two_classes() {
    let data = planted(22, 5, 1);
    let wide = TsNetConfig { filters: 16, hidden: 64, ..small_config(22) };
    let (mut net, examples) = build(wide, &data, 2);
    let config = TrainConfig { epochs: 120, batch_size: 10, adam: AdamConfig::with_learning_rate(0.01), ..TrainConfig::default() };
    let trace = train_ts(&mut net, &examples, &config).unwrap();
    assert!(trace.last().unwrap() < &trace[0], "{trace:?}");
    let correct = data.iter().filter(|(t, c)| net.predict(t).class == *c).count();
    assert_eq!(correct, data.len(), "final loss {:?}", trace.last());
}

#[test]
fn planted_markers_rank_first() {
    let data = planted(4, 30, 3);
    let (mut net, examples) = build(small_config(4), &data, 4);
    let config = TrainConfig { epochs: 30, batch_size: 16, adam: AdamConfig::with_learning_rate(0.01), ..TrainConfig::default() };
    train_ts(&mut net, &examples, &config).unwrap();
    for c in 0..4 {
        let top = net.top_terms_per_class(c, 3).unwrap();
        assert_eq!(top[0].0, format!("marker{c}"), "{top:?}");
        let direct = net.forward_ts(&top[0].0).unwrap()[c];
        assert!((direct - top[0].1).abs() < 1e-12);
    }
    let everything = net.top_terms_per_class(0, 10_000).unwrap();
    assert_eq!(everything.len(), net.vocab().len() - 2);
    assert!(net.top_terms_per_class(4, 3).is_err());
}

#[test]
fn relabeling_classes_permutes_outputs() {
    let data = planted(5, 2, 5);
    let (net, _) = build(small_config(5), &data, 6);
    let perm = [3, 0, 4, 1, 2];
    let mut permuted = net.clone();
    {
        let (w, b) = permuted.output_weights_mut();
        let (w0, b0) = (w.clone(), b.clone());
        for (new, &old) in perm.iter().enumerate() {
            w.row_mut(new).copy_from_slice(w0.row(old));
            b.as_mut_slice()[new] = b0.as_slice()[old];
        }
    }
    for (text, _) in &data {
        let p = net.forward_ts(text).unwrap();
        let q = permuted.forward_ts(text).unwrap();
        for (new, &old) in perm.iter().enumerate() {
            assert!((q[new] - p[old]).abs() < 1e-15);
        }
    }
}

#[test]
fn features_have_fixed_width_for_any_length() {
    let data = planted(3, 2, 7);
    let (net, _) = build(TsNetConfig { windows: vec![2, 3, 4], filters: 5, ..small_config(3) }, &data, 8);
    for len in [1, 2, 3, 4, 17, 50, 80] {
        let text = vec!["filler1"; len].join(" ");
        let p = net.forward_ts(&text).unwrap();
        assert_eq!(p.len(), 3);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
    // Tokens past the fiftieth are ignored.
    let base: Vec<String> = (0..50).map(|i| format!("filler{}", i % 40)).collect();
    let longer = format!("{} marker0 marker1", base.join(" "));
    assert_eq!(net.forward_ts(&base.join(" ")).unwrap(), net.forward_ts(&longer).unwrap());
}

#[test]
fn pad_row_stays_zero_through_training() {
    let data = planted(3, 10, 9);
    let (mut net, examples) = build(small_config(3), &data, 10);
    let config = TrainConfig { epochs: 3, batch_size: 4, ..TrainConfig::default() };
    train_ts(&mut net, &examples, &config).unwrap();
    assert!(net.parameters()[0].row(PAD_INDEX).iter().all(|&v| v == 0.0));
}
