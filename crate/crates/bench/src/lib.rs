//! Input builders shared by the benchmarks.

use std::collections::BTreeMap;

use rac_forge::{Choices, Label, McqPair, RawDocument};

pub fn pairs(n: usize) -> Vec<McqPair> {
    (0..n)
        .map(|i| {
            let answer = Label::ALL[i % 4];
            let explanations: BTreeMap<Label, String> =
                Label::ALL.iter().map(|l| (*l, format!("explanation {l} for {i}"))).collect();
            McqPair::new(
                format!("Which property holds for benchmark item {i}?"),
                Choices::new(format!("alpha {i}"), format!("beta {i}"), format!("gamma {i}"), format!("delta {i}")),
                answer,
                Some(format!("Restated item {i}")),
                Some(explanations),
            )
            .expect("valid benchmark pair")
        })
        .collect()
}

pub fn document(sections: usize) -> RawDocument {
    let mut text = String::new();
    for s in 0..sections {
        text.push_str(&format!("# {s} Section\n\n"));
        for p in 0..8 {
            text.push_str(&format!(
                "Paragraph {p} of section {s} explains how routers exchange reachability \
                 information and how congestion control reacts to loss. "
            ));
            text.push_str("Figure 1.2: not part of the text\n\n");
        }
    }
    RawDocument::new("bench", text)
}
