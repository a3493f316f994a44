use std::collections::BTreeMap;

use crate::error::Result;
use crate::model::{Choices, Label, McqPair};

/// ChoiceBoost: four variants of `pair`, one per correct label A..D.
///
/// Variant `k` puts the correct text at `k` and fills the remaining labels
/// with the distractors in their original relative order. Explanations move
/// with their choice texts. The variant matching the original layout is the
/// original pair itself; the others get fresh content ids.
pub fn choiceboost(pair: &McqPair) -> Result<[McqPair; 4]> {
    pair.ensure_valid()?;
    let correct = pair.correct_text().to_string();
    let correct_expl = pair.explanations.as_ref().map(|e| e[&pair.answer].clone());
    let distractors: Vec<(String, Option<String>)> = Label::ALL
        .iter()
        .filter(|&&l| l != pair.answer)
        .map(|&l| {
            (
                pair.choices[l].clone(),
                pair.explanations.as_ref().map(|e| e[&l].clone()),
            )
        })
        .collect();

    let variant = |target: Label| -> McqPair {
        if target == pair.answer {
            return pair.clone();
        }
        let mut texts: [String; 4] = Default::default();
        let mut expl = BTreeMap::new();
        let mut rest = distractors.iter();
        for label in Label::ALL {
            if label == target {
                texts[label.index()] = correct.clone();
                if let Some(e) = &correct_expl {
                    expl.insert(label, e.clone());
                }
            } else {
                let (text, e) = rest.next().expect("three distractors");
                texts[label.index()] = text.clone();
                if let Some(e) = e {
                    expl.insert(label, e.clone());
                }
            }
        }
        let mut out = McqPair {
            id: String::new(),
            question: pair.question.clone(),
            choices: Choices(texts),
            answer: target,
            rephrase: pair.rephrase.clone(),
            explanations: pair.explanations.as_ref().map(|_| expl),
            subdomain: pair.subdomain.clone(),
            source: pair.source.clone(),
        };
        out.refresh_id();
        out
    };

    Ok(Label::ALL.map(variant))
}

/// ChoiceBoost over a dataset, keeping input order and emitting each pair's
/// variants in label order.
pub fn choiceboost_all(pairs: &[McqPair]) -> Result<Vec<McqPair>> {
    let mut out = Vec::with_capacity(pairs.len() * 4);
    for pair in pairs {
        out.extend(choiceboost(pair)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curation::fixtures::{layer_pair, synthetic};
    use crate::curation::dedupe_by_id;

    fn layout(p: &McqPair) -> Vec<&str> {
        p.choices.0.iter().map(String::as_str).collect()
    }

    #[test]
    fn insertion_positions() {
        let c = "Network layer";
        let (d1, d2, d3) = ("Transport layer", "Data link layer", "Physical layer");
        let v = choiceboost(&layer_pair()).unwrap();
        assert_eq!(layout(&v[0]), vec![c, d1, d2, d3]);
        assert_eq!(layout(&v[1]), vec![d1, c, d2, d3]);
        assert_eq!(layout(&v[2]), vec![d1, d2, c, d3]);
        assert_eq!(layout(&v[3]), vec![d1, d2, d3, c]);
        let answers: Vec<Label> = v.iter().map(|p| p.answer).collect();
        assert_eq!(answers, Label::ALL.to_vec());
    }

    #[test]
    fn original_layout_keeps_id_and_others_are_fresh() {
        let p = layer_pair();
        let v = choiceboost(&p).unwrap();
        assert_eq!(v[1], p);
        let ids: std::collections::HashSet<_> = v.iter().map(|x| x.id.clone()).collect();
        assert_eq!(ids.len(), 4);
        assert!(v.iter().all(|x| x.issues().is_empty()));
    }

    #[test]
    fn explanations_follow_their_choices() {
        let p = layer_pair();
        for v in choiceboost(&p).unwrap() {
            let e = v.explanations.as_ref().unwrap();
            for (label, text) in v.choices.iter() {
                let orig = Label::ALL.into_iter().find(|l| p.choices[*l] == text).unwrap();
                assert_eq!(e[&label], p.explanations.as_ref().unwrap()[&orig]);
            }
            assert_eq!(v.rephrase, p.rephrase);
        }
    }

    #[test]
    fn plain_pairs_stay_plain() {
        let mut p = layer_pair();
        p.rephrase = None;
        p.explanations = None;
        for v in choiceboost(&p).unwrap() {
            assert!(v.explanations.is_none() && v.rephrase.is_none());
        }
    }

    #[test]
    fn invalid_pair_rejected() {
        let mut p = layer_pair();
        p.choices[Label::A] = "network layer".into();
        p.refresh_id();
        assert!(choiceboost(&p).is_err());
    }

    #[test]
    fn fixed_point_after_dedupe_by_id() {
        let first = choiceboost(&layer_pair()).unwrap().to_vec();
        let again: Vec<McqPair> = first
            .iter()
            .flat_map(|v| choiceboost(v).unwrap())
            .collect();
        let again = dedupe_by_id(again);
        assert_eq!(again, first);
    }

    #[test]
    fn dataset_cardinality() {
        let data = synthetic(14_363, |i| Label::ALL[i % 3]);
        assert_eq!(choiceboost_all(&data).unwrap().len(), 57_452);
    }
}
