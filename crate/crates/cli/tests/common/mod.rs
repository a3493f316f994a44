#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rac_forge::{Choices, Label, McqPair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn cli<S: AsRef<str>>(args: &[S]) -> i32 {
    let argv = std::iter::once("rac-forge".to_string()).chain(args.iter().map(|a| a.as_ref().to_string()));
    rac_forge_cli::run(argv)
}

pub fn p(path: &Path) -> String {
    path.display().to_string()
}

/// `n` distinct RaC-complete pairs with labels drawn from `labels`.
pub fn synthetic(n: usize, seed: u64, labels: &[Label]) -> Vec<McqPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let answer = labels[rng.random_range(0..labels.len())];
            let texts: Vec<String> = (0..4).map(|k| format!("option {k} of item {seed}-{i}")).collect();
            let explanations: BTreeMap<Label, String> = Label::ALL
                .iter()
                .map(|l| (*l, format!("why option {} of item {i} is {}", l, if *l == answer { "right" } else { "wrong" })))
                .collect();
            McqPair::new(
                format!("Which option applies to synthetic networking item {seed}-{i}?"),
                Choices::new(&texts[0], &texts[1], &texts[2], &texts[3]),
                answer,
                Some(format!("Restated item {seed}-{i}")),
                Some(explanations),
            )
            .unwrap()
        })
        .collect()
}

const TOPICS: [&str; 10] = [
    "routers forward packets between networks using routing tables",
    "ethernet switches learn MAC addresses from incoming frames",
    "TCP congestion control shrinks the window after packet loss",
    "DNS resolvers cache answers for the duration of the record TTL",
    "firewalls filter traffic according to ordered rule sets",
    "optical fiber carries light pulses with very low attenuation",
    "wireless access points announce networks with beacon frames",
    "SNMP managers poll agents for interface counters",
    "jitter buffers smooth the playback of voice traffic",
    "link-state protocols flood advertisements to every router",
];

/// A book with `sections` chapters of `paragraphs` paragraphs each; `tag`
/// makes the text unique per book.
pub fn book(tag: &str, sections: usize, paragraphs: usize) -> String {
    let mut out = String::new();
    for s in 0..sections {
        out.push_str(&format!("# {} Chapter on {}\n\n", s + 1, TOPICS[s % TOPICS.len()].split(' ').next().unwrap()));
        for k in 0..paragraphs {
            let t = TOPICS[(s + k) % TOPICS.len()];
            out.push_str(&format!(
                "In {tag} section {s} paragraph {k}, {t}. Engineers measure this behaviour carefully. \
                 The design trades latency against throughput in case {s}.{k}. \
                 Operators tune the relevant parameters when the network grows.\n\n"
            ));
        }
        out.push_str(&format!("Figure {}.1: Diagram of the topology\n\n", s + 1));
    }
    out
}

/// Write a corpus of `books` files and return the manifest path.
pub fn corpus(dir: &Path, books: &[(&str, String)]) -> PathBuf {
    let mut manifest = BTreeMap::new();
    for (i, (id, text)) in books.iter().enumerate() {
        let file = format!("book{i}.txt");
        std::fs::write(dir.join(&file), text).unwrap();
        manifest.insert(file, id.to_string());
    }
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string(&manifest).unwrap()).unwrap();
    path
}

pub fn line_count(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count()
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}
