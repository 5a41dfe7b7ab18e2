//! A small self-contained workspace for driving the binary end to end.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::{Duration, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use serde_json::json;
use tweetsift::nn::ModelRng;

pub fn tweetsift() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tweetsift"))
}

pub fn run(args: &[&str]) -> Output {
    tweetsift().args(args).output().expect("binary runs")
}

pub fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

pub fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

const SEEDS: &[&str] = &["#election2016", "#vote2016", "debate"];
const TOPICS: &[(&str, &[&str])] = &[
    ("Guns", &["gun control", "nra"]),
    ("Immigration", &["border wall", "amnesty"]),
    ("Budget/Taxation", &["tax cuts", "irs"]),
    ("Health Care", &["obamacare", "medicare"]),
];
const POSITIVE: &[&str] = &[":)", "great", "love"];
const NEGATIVE: &[&str] = &[":(", "awful", "hate"];
const FILLER: &[&str] = &[
    "today", "people", "really", "think", "going", "time", "night", "watch", "news", "look", "country",
    "america", "speech", "said", "week",
];
const OFF_TOPIC: &[&str] = &[
    "coffee", "puppy", "rain", "pizza", "movie", "sunset", "gym", "beach", "music", "football",
];

fn pick<'a>(rng: &mut ModelRng, pool: &[&'a str]) -> &'a str {
    pool[rng.gen_range(0..pool.len())]
}

/// `n` tweets: half mention a seed term together with a topic phrase and
/// often the planted term `ballot`; the rest are everyday chatter.
pub fn corpus_lines(n: usize, seed: u64) -> Vec<String> {
    let mut rng = ModelRng::seed_from_u64(seed);
    let start = Utc.with_ymd_and_hms(2016, 10, 1, 12, 0, 0).unwrap();
    (0..n)
        .map(|i| {
            let mut words: Vec<&str> = (0..rng.gen_range(3..7)).map(|_| pick(&mut rng, FILLER)).collect();
            if i % 2 == 0 {
                words.insert(rng.gen_range(0..words.len()), pick(&mut rng, SEEDS));
                let (_, terms) = TOPICS[rng.gen_range(0..TOPICS.len())];
                words.push(pick(&mut rng, terms));
                if rng.gen_bool(0.6) {
                    words.push("ballot");
                }
                match rng.gen_range(0..3) {
                    0 => words.push(pick(&mut rng, POSITIVE)),
                    1 => words.push(pick(&mut rng, NEGATIVE)),
                    _ => {}
                }
            } else {
                for _ in 0..3 {
                    words.push(pick(&mut rng, OFF_TOPIC));
                }
                if rng.gen_bool(0.1) {
                    words.push("ballot");
                }
            }
            let tweet = json!({
                "id": format!("{:06}", i + 1),
                "text": words.join(" "),
                "timestamp": (start + Duration::minutes(i as i64)).to_rfc3339(),
            });
            tweet.to_string()
        })
        .collect()
}

/// Writes inputs and a pipeline configuration with small networks under
/// `dir`; returns the configuration path.
pub fn write_workspace(dir: &Path, tweets: usize) -> PathBuf {
    let write = |name: &str, text: String| std::fs::write(dir.join(name), text).unwrap();
    write("tweets.jsonl", corpus_lines(tweets, 7).join("\n") + "\n");
    write("seeds.txt", SEEDS.join("\n") + "\n");
    write("positive.txt", POSITIVE.join("\n") + "\n");
    write("negative.txt", NEGATIVE.join("\n") + "\n");
    let topics: serde_json::Map<String, serde_json::Value> =
        TOPICS.iter().map(|(name, terms)| (name.to_string(), json!(terms))).collect();
    write("topics.json", serde_json::to_string_pretty(&topics).unwrap());
    let word_net = |classes: usize| {
        json!({
            "max_words": 50, "embedding_dim": 16, "windows": [2, 3], "filters": 8, "hidden": 8,
            "classes": classes, "dropout_rate": 0.5, "word_dropout": 0.01, "embedding_init": 0.25,
            "fallback_class": classes - 1,
        })
    };
    let quick = json!({ "epochs": 2, "batch_size": 16, "adam": { "learning_rate": 0.005 } });
    let config = json!({
        "seed": 11,
        "seed_terms": "seeds.txt",
        "corpus": ["tweets.jsonl"],
        "topic_terms": "topics.json",
        "positive_lexicon": "positive.txt",
        "negative_lexicon": "negative.txt",
        "output_dir": "out",
        "rho_min": 0.3,
        "test_fraction": 0.2,
        "skipgram": { "dim": 16, "epochs": 3, "window": 3, "min_count": 1 },
        "training": { "election": quick, "topic": quick, "sentiment": quick },
        "networks": {
            "election": {
                "input_len": 30,
                "alphabet_size": 70,
                "conv": [
                    { "window": 5, "filters": 8, "pool": 3, "in_channels": 70 },
                    { "window": 3, "filters": 8, "pool": null, "in_channels": 8 },
                ],
                "dense": [
                    { "in_size": 48, "out_size": 16, "activation": "relu", "dropout_rate": 0.5 },
                    { "in_size": 16, "out_size": 1, "activation": "sigmoid", "dropout_rate": 0.0 },
                ],
            },
            "topic": word_net(22),
            "sentiment": word_net(3),
        },
    });
    let path = dir.join("pipeline.json");
    std::fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path
}

/// Runs the binary with `--config` and asserts success.
pub fn step(config: &Path, command: &str) -> Output {
    let output = tweetsift().arg("--config").arg(config).arg(command).output().unwrap();
    assert!(output.status.success(), "{command} failed: {}", stderr(&output));
    output
}

pub const ALL_STEPS: &[&str] = &[
    "build-vocab",
    "train-embeddings",
    "expand-query",
    "build-dataset",
    "train-election",
    "train-topic",
    "train-sentiment",
    "classify",
    "pipeline",
];

/// Every regular file under `dir`, relative path and bytes, sorted.
pub fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let bytes = std::fs::read(&path).unwrap();
                files.push((path.strip_prefix(dir).unwrap().to_path_buf(), bytes));
            }
        }
    }
    files.sort();
    files
}
