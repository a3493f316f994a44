use rac_forge::eval::extract_answer;
use rac_forge::Label;
use serde::Deserialize;

#[derive(Deserialize)]
struct Case {
    output: String,
    label: Option<Label>,
}

#[test]
fn hand_labelled_phrasings() {
    let text = include_str!("fixtures/answer_phrasings.jsonl");
    let cases: Vec<Case> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(cases.len(), 30);
    let mut wrong = Vec::new();
    for c in &cases {
        let got = extract_answer(&c.output);
        if got != c.label {
            wrong.push(format!("{:?}: expected {:?}, got {:?}", c.output, c.label, got));
        }
    }
    assert!(wrong.is_empty(), "{}", wrong.join("\n"));
}
