//! Invariants checked over generated inputs.

use chrono::{TimeZone, Utc};
use proptest::prelude::*;
use rand::SeedableRng;
use tweetsift::char_text::*;
use tweetsift::dataset::{Corpus, Tweet};
use tweetsift::embeddings::{random_word_vectors, WordVectors};
use tweetsift::nn::{dropout_apply, softmax, Matrix, Mode, ModelRng};
use tweetsift::query_expansion::*;
use tweetsift::text::tokenize;
use tweetsift::topic_sentiment::{TsNet, TsNetConfig, WordVocab};

fn corpus_of(texts: &[String]) -> Corpus {
    let at = Utc.with_ymd_and_hms(2016, 10, 1, 0, 0, 0).unwrap();
    Corpus::new(texts.iter().enumerate().map(|(i, t)| Tweet::new(format!("t{i}"), t.clone(), at)).collect())
        .unwrap()
}

fn word() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["vote", "wall", "tax", "rally", "debate", "rain", "coffee", "news"])
        .prop_map(str::to_string)
}

fn tweet_text() -> impl Strategy<Value = String> {
    prop::collection::vec(word(), 1..6).prop_map(|w| w.join(" "))
}

fn seeds() -> SeedTermList {
    SeedTermList::new(&["vote", "debate"]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn encoding_sets_at_most_one_bit_per_row(text in "\\PC{0,200}") {
        let encoded = encode_tweet(&text);
        let m = encoded.to_matrix();
        prop_assert_eq!((m.rows(), m.cols()), (MAX_CHARS, ALPHABET_SIZE));
        for r in 0..MAX_CHARS {
            let ones = m.row(r).iter().filter(|&&v| v == 1.0).count();
            let zeros = m.row(r).iter().filter(|&&v| v == 0.0).count();
            prop_assert!(ones <= 1);
            prop_assert_eq!(ones + zeros, ALPHABET_SIZE);
            prop_assert_eq!(ones == 1, r < text.chars().count());
        }
        prop_assert_eq!(encoded.len(), text.chars().count().min(MAX_CHARS));
    }

    #[test]
    fn encoding_round_trips_alphabet_text(text in "[a-z0-9 ,;.!?:'\"/|_@#$%^&*~`+=<>()\\[\\]{}-]{0,170}") {
        let alphabet = Alphabet::new();
        let encoded = alphabet.encode(&text);
        let decoded: String = (0..MAX_CHARS)
            .map_while(|r| match alphabet.decode_row(&encoded.row(r)).unwrap() {
                Symbol::Char(c) => Some(c),
                _ => None,
            })
            .collect();
        let expected: String = text.chars().take(MAX_CHARS).collect();
        prop_assert_eq!(decoded, expected);
    }

    #[test]
    fn encoding_ignores_case(text in "[A-Za-z0-9 .!?]{0,160}") {
        prop_assert_eq!(encode_tweet(&text), encode_tweet(&text.to_lowercase()));
    }

    #[test]
    fn softmax_is_a_distribution(logits in prop::collection::vec(-50.0f64..50.0, 1..30), shift in -100.0f64..100.0) {
        let p = softmax(&logits).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
        let shifted: Vec<f64> = logits.iter().map(|x| x + shift).collect();
        for (a, b) in p.iter().zip(softmax(&shifted).unwrap()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn tokenizer_is_case_insensitive(text in "[A-Za-z#@ .,!?']{0,80}") {
        prop_assert_eq!(tokenize(&text.to_uppercase()), tokenize(&text.to_lowercase()));
    }

    #[test]
    fn dropout_is_identity_at_inference(values in prop::collection::vec(-10.0f64..10.0, 0..40), rate in 0.0f64..0.99) {
        let mut rng = ModelRng::seed_from_u64(0);
        prop_assert_eq!(dropout_apply(&values, rate, Mode::Inference, &mut rng).unwrap(), values);
    }

    #[test]
    fn significance_survives_duplicating_every_tweet(texts in prop::collection::vec(tweet_text(), 1..30), term in word()) {
        let once = corpus_of(&texts);
        let twice: Vec<String> = texts.iter().chain(&texts).cloned().collect();
        let twice = corpus_of(&twice);
        match (election_significance(&once, &term, &seeds()), election_significance(&twice, &term, &seeds())) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() < 1e-12),
            (Err(_), Err(_)) => {}
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn significance_matches_recount(texts in prop::collection::vec(tweet_text(), 1..30), term in word()) {
        let corpus = corpus_of(&texts);
        let with: Vec<Vec<String>> = texts.iter().map(|t| tokenize(t)).filter(|t| t.contains(&term)).collect();
        let seeded = with.iter().filter(|t| t.iter().any(|w| w == "vote" || w == "debate")).count();
        let rho = election_significance(&corpus, &term, &seeds());
        if with.is_empty() {
            prop_assert!(rho.is_err());
        } else {
            prop_assert!((rho.unwrap() - seeded as f64 / with.len() as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn raising_the_threshold_only_removes_terms(
        texts in prop::collection::vec(tweet_text(), 5..40),
        low in 0.0f64..1.0,
        gap in 0.0f64..1.0,
        seed in 0u64..50,
    ) {
        let corpus = corpus_of(&texts);
        let vectors = vectors_for_words(seed);
        let run = |rho_min: f64| {
            let config = ExpansionConfig { neighbors: 3, rho_min };
            expand_query(&seeds(), &corpus, &vectors, config).unwrap()
        };
        let high = (low + gap).min(1.0);
        let loose = run(low);
        let strict = run(high);
        for t in &strict {
            prop_assert!(t.rho >= high);
            prop_assert!(loose.iter().any(|l| l.term == t.term));
        }
        prop_assert!(loose.windows(2).all(|w| w[0].rho >= w[1].rho));
    }

    #[test]
    fn mutual_neighbors_are_symmetric(n in 5usize..60, k in 1usize..8, seed in 0u64..1000) {
        let mut rng = ModelRng::seed_from_u64(seed);
        let vectors = random_word_vectors(n, 6, &mut rng);
        let seeds = SeedTermList::new(&["w0", "w1", "w2"]).unwrap();
        for c in mutual_top_k(&vectors, &seeds, k).unwrap() {
            prop_assert!(!seeds.terms().contains(&c.term));
            let forward: Vec<String> = vectors.top_k_similar(&c.source_seed, k).unwrap().into_iter().map(|x| x.0).collect();
            let back: Vec<String> = vectors.top_k_similar(&c.term, k).unwrap().into_iter().map(|x| x.0).collect();
            prop_assert!(forward.contains(&c.term));
            prop_assert!(back.contains(&c.source_seed));
            prop_assert!((vectors.similarity(&c.term, &c.source_seed).unwrap() - c.similarity).abs() < 1e-12);
        }
    }
}

fn vectors_for_words(seed: u64) -> WordVectors {
    let terms: Vec<String> =
        ["vote", "wall", "tax", "rally", "debate", "rain", "coffee", "news"].iter().map(|s| s.to_string()).collect();
    let mut rng = ModelRng::seed_from_u64(seed);
    let random = random_word_vectors(terms.len(), 4, &mut rng);
    let mut m = Matrix::zeros(terms.len(), 4);
    for (i, t) in random.terms().iter().enumerate() {
        m.row_mut(i).copy_from_slice(random.vector(t).unwrap());
    }
    WordVectors::new(terms, m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn topic_net_outputs_are_distributions(ids in prop::collection::vec(0usize..12, 0..70), seed in 0u64..100) {
        let words: Vec<Vec<String>> = vec![(0..10).map(|i| format!("w{i}")).collect()];
        let config = TsNetConfig::topic();
        prop_assert_eq!(config.features(), 600);
        let net = TsNet::new(config, WordVocab::build(&words, 1), seed).unwrap();
        let p = net.forward_tokens(&ids).unwrap();
        prop_assert_eq!(p.len(), 22);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(p.iter().all(|&x| x > 0.0));
    }
}
