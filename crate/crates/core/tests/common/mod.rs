#![allow(dead_code)]

use std::collections::BTreeMap;

use rac_forge::{Choices, Label, McqPair};

pub fn rac_pair(question: &str, choices: [&str; 4], answer: Label) -> McqPair {
    let explanations: BTreeMap<Label, String> = Label::ALL
        .iter()
        .map(|l| (*l, format!("Option {} explains {}", l, choices[l.index()])))
        .collect();
    McqPair::new(
        question,
        Choices::new(choices[0], choices[1], choices[2], choices[3]),
        answer,
        Some(format!("In other words: {question}")),
        Some(explanations),
    )
    .unwrap()
}

pub fn synthetic(n: usize, answer: impl Fn(usize) -> Label) -> Vec<McqPair> {
    (0..n)
        .map(|i| {
            rac_pair(
                &format!("Which mechanism applies in networking scenario {i}?"),
                [
                    &format!("first mechanism {i}"),
                    &format!("second mechanism {i}"),
                    &format!("third mechanism {i}"),
                    &format!("fourth mechanism {i}"),
                ],
                answer(i),
            )
        })
        .collect()
}
