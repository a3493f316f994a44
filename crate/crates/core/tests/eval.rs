mod common;

use rac_forge::eval::{compose_comprehensive, run_eval, ConstantAnswerer, EvalConfig, OracleAnswerer, RandomAnswerer};
use rac_forge::{Label, ProblemSet, Provenance, Tier};

fn set(name: &str, tier: Tier, n: usize, offset: usize) -> ProblemSet {
    let mut pairs = common::synthetic(n + offset, |i| Label::from_index(i % 4).unwrap());
    pairs.drain(..offset);
    ProblemSet::new(name, tier, pairs, Provenance::default()).unwrap()
}

#[test]
fn reference_answerers() {
    let s = set("easy", Tier::Easy, 400, 0);
    let cfg = EvalConfig::default();

    let oracle = run_eval(&s, &OracleAnswerer, &cfg).unwrap().report;
    assert_eq!(oracle.accuracy, 1.0);
    assert_eq!(oracle.unparsed, 0);

    let constant = run_eval(&s, &ConstantAnswerer(Label::A), &cfg).unwrap().report;
    assert_eq!(constant.accuracy, 0.25);
    assert_eq!(constant.per_position[&Label::A].accuracy, 1.0);
    assert_eq!(constant.per_position[&Label::B].accuracy, 0.0);

    let random = run_eval(&s, &RandomAnswerer::new(9), &cfg).unwrap().report;
    assert!((0.18..=0.32).contains(&random.accuracy), "{}", random.accuracy);
    let serial = run_eval(&s, &RandomAnswerer::new(9), &EvalConfig { parallelism: 1, ..cfg.clone() }).unwrap();
    assert_eq!(serial.report, random);
}

#[test]
fn report_keys() {
    let s = set("easy", Tier::Easy, 8, 0);
    let r = run_eval(&s, &OracleAnswerer, &EvalConfig::default()).unwrap().report;
    let v = serde_json::to_value(&r).unwrap();
    let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort();
    assert_eq!(
        keys,
        ["accuracy", "answered", "bias", "config", "per_position", "per_subdomain", "set", "total", "unparsed"]
    );
}

#[test]
fn comprehensive_composition() {
    let easy = set("easy", Tier::Easy, 50, 0);
    let hard = set("hard", Tier::Hard, 20, 1000);
    let c = compose_comprehensive(&easy, &hard, 5).unwrap();
    assert_eq!(c.len(), 40);
    assert_eq!(c.tier, Tier::Comprehensive);
    assert_eq!(&c.pairs[20..], &hard.pairs[..]);
    let pos: Vec<usize> = c.pairs[..20]
        .iter()
        .map(|p| easy.pairs.iter().position(|e| e.id == p.id).unwrap())
        .collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(compose_comprehensive(&easy, &hard, 5).unwrap().pairs, c.pairs);
    assert_eq!(c.created_from.sample_sizes["easy"], 20);
    assert!(compose_comprehensive(&easy, &easy, 5).is_err());
}
