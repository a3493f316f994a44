mod common;

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;

use common::{cli, line_count, p, read_json, synthetic};
use rac_forge::{jsonl, Label, McqPair};

const SUBCOMMANDS: &[&[&str]] = &[
    &["ingest"],
    &["generate"],
    &["validate"],
    &["dedupe"],
    &["augment"],
    &["bias"],
    &["split"],
    &["export-sft"],
    &["stats"],
    &["compose-comprehensive"],
    &["eval"],
    &["review", "serve"],
    &["review", "sample"],
    &["pipeline"],
];

#[test]
fn help_everywhere() {
    assert_eq!(cli(&["--help"]), 0);
    for sub in SUBCOMMANDS {
        let mut args = sub.to_vec();
        args.push("--help");
        assert_eq!(cli(&args), 0, "{sub:?}");
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(cli::<&str>(&[]), 2);
    assert_eq!(cli(&["frobnicate"]), 2);
    assert_eq!(cli(&["augment", "--in", "x", "--out", "y", "--bogus"]), 2);
    assert_eq!(cli(&["augment", "--in", "x"]), 2);
    assert_eq!(cli(&["export-sft", "--in", "x", "--out", "y", "--style", "fancy"]), 2);
}

fn dataset(dir: &std::path::Path, name: &str, pairs: &[McqPair]) -> String {
    let path = dir.join(name);
    jsonl::write_pairs(&path, pairs).unwrap();
    p(&path)
}

#[test]
fn split_fraction_out_of_range() {
    let dir = tempfile::tempdir().unwrap();
    let data = dataset(dir.path(), "d.jsonl", &synthetic(20, 1, &Label::ALL));
    let t = p(&dir.path().join("t.jsonl"));
    for f in ["1.5", "0", "-0.2", "1"] {
        assert_eq!(cli(&["split", "--in", &data, "--train", &t, "--test", &t, "--fraction", f]), 2, "{f}");
    }
    assert!(!dir.path().join("t.jsonl").exists());
    // 2 pairs at 5% would leave an empty test side
    let tiny = dataset(dir.path(), "tiny.jsonl", &synthetic(2, 1, &Label::ALL));
    assert_eq!(cli(&["split", "--in", &tiny, "--train", &t, "--test", &t]), 2);
}

#[test]
fn missing_input_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(&dir.path().join("o.jsonl"));
    assert_eq!(cli(&["augment", "--in", "/nonexistent/pairs.jsonl", "--out", &out]), 2);
}

#[test]
fn validate_reports_one_bad_pair() {
    let dir = tempfile::tempdir().unwrap();
    let mut pairs = synthetic(5, 2, &Label::ALL);
    pairs[3].choices.0[2] = pairs[3].choices.0[1].to_uppercase();
    pairs[3].refresh_id();
    let input = dir.path().join("in.jsonl");
    let mut text: String = pairs.iter().map(|p| p.to_record() + "\n").collect();
    text.push_str("{\"question\": \"no choices here at all\"}\n");
    std::fs::write(&input, text).unwrap();

    let out = dir.path().join("valid.jsonl");
    let report = dir.path().join("issues.json");
    assert_eq!(cli(&["validate", "--in", &p(&input), "--out", &p(&out), "--report", &p(&report)]), 1);
    assert_eq!(line_count(&out), 4);
    let r = read_json(&report);
    assert_eq!((r["total"].as_u64(), r["valid"].as_u64(), r["invalid"].as_u64()), (Some(6), Some(4), Some(2)));
    assert_eq!(r["issues"][0]["pair_id"], pairs[3].id.as_str());
    assert_eq!(r["issues"][0]["path"], "choices");
    assert_eq!(r["issues"][0]["message"], "duplicate B/C");
    assert_eq!(r["malformed"][0]["line"], 6);

    let clean = dataset(dir.path(), "clean.jsonl", &synthetic(5, 3, &Label::ALL));
    assert_eq!(cli(&["validate", "--in", &clean, "--out", &p(&out), "--report", &p(&report)]), 0);
}

#[test]
fn strict_readers_reject_tampered_ids() {
    let dir = tempfile::tempdir().unwrap();
    let mut pairs = synthetic(3, 4, &Label::ALL);
    pairs[1].question.push_str(" (edited)");
    let data = dataset(dir.path(), "d.jsonl", &pairs);
    assert_eq!(cli(&["augment", "--in", &data, "--out", &p(&dir.path().join("o.jsonl"))]), 1);
}

#[test]
fn curation_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let f = |n: &str| p(&d.join(n));
    let mut pairs = synthetic(40, 5, &[Label::C]);
    let mut copy = pairs[0].clone();
    copy.question = copy.question.to_uppercase();
    copy.refresh_id();
    pairs.push(copy);
    let data = dataset(d, "d.jsonl", &pairs);

    assert_eq!(cli(&["dedupe", "--in", &data, "--out", &f("dd.jsonl")]), 0);
    assert_eq!(line_count(&d.join("dd.jsonl")), 40);
    assert_eq!(cli(&["dedupe", "--in", &data, "--out", &f("di.jsonl"), "--by", "id"]), 0);
    assert_eq!(line_count(&d.join("di.jsonl")), 41);

    assert_eq!(cli(&["bias", "--in", &f("dd.jsonl"), "--out", &f("bias.json")]), 0);
    assert_eq!(read_json(&d.join("bias.json"))["tv_distance"], 0.75);
    assert_eq!(cli(&["augment", "--in", &f("dd.jsonl"), "--out", &f("aug.jsonl")]), 0);
    assert_eq!(cli(&["bias", "--in", &f("aug.jsonl"), "--out", &f("bias2.json")]), 0);
    let b = read_json(&d.join("bias2.json"));
    assert_eq!(b["tv_distance"], 0.0);
    assert_eq!(b["counts"]["A"], 40);

    assert_eq!(cli(&["export-sft", "--in", &f("dd.jsonl"), "--out", &f("sft.jsonl"), "--style", "plain"]), 0);
    let first: serde_json::Value = serde_json::from_str(std::fs::read_to_string(d.join("sft.jsonl")).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(first["response"], "Answer: C");
    assert_eq!(first["meta"]["answer"], "C");

    assert_eq!(cli(&["stats", "--in", &f("dd.jsonl"), "--out", &f("stats.json"), "--top-k", "5"]), 0);
    let s = read_json(&d.join("stats.json"));
    assert_eq!(s["total"], 40);
    assert_eq!(s["categories"].as_array().unwrap().len(), 10);
    assert!(s["top_terms"].as_array().unwrap().len() <= 5);

    let taxonomy = d.join("tax.json");
    std::fs::write(&taxonomy, r#"{"name": "tiny", "categories": [{"name": "x", "keywords": ["y"]}]}"#).unwrap();
    assert_eq!(cli(&["stats", "--in", &f("dd.jsonl"), "--out", &f("s2.json"), "--taxonomy", &p(&taxonomy)]), 2);
}

#[test]
fn compose_and_eval() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let f = |n: &str| p(&d.join(n));
    let easy = dataset(d, "easy.jsonl", &synthetic(30, 6, &Label::ALL));
    let hard = dataset(d, "hard.jsonl", &synthetic(12, 7, &Label::ALL));
    assert_eq!(cli(&["compose-comprehensive", "--easy", &easy, "--hard", &hard, "--out", &f("comp.jsonl"), "--provenance", &f("prov.json")]), 0);
    assert_eq!(line_count(&d.join("comp.jsonl")), 24);
    let prov = read_json(&d.join("prov.json"));
    assert_eq!(prov["created_from"]["seed"], 42);
    assert_eq!(prov["created_from"]["sample_sizes"]["easy"], 12);
    assert_eq!(cli(&["compose-comprehensive", "--easy", &easy, "--hard", &easy, "--out", &f("x.jsonl")]), 1);

    assert_eq!(cli(&["eval", "--set", &f("comp.jsonl"), "--out", &f("r.json"), "--items", &f("items.jsonl"), "--taxonomy", "default"]), 0);
    let r = read_json(&d.join("r.json"));
    assert_eq!(r["set"], "comp");
    assert_eq!(r["accuracy"], 1.0);
    assert_eq!(r["config"]["answerer"], "oracle");
    assert_eq!(line_count(&d.join("items.jsonl")), 24);
    assert_eq!(cli(&["eval", "--set", &f("comp.jsonl"), "--out", &f("r.json"), "--answerer", "endpoint"]), 2);
}

/// Minimal chat-completions endpoint that always answers `reply`.
fn stub_endpoint(reply: &'static str) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let stream = stream.unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line.trim().is_empty() {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
            }
            let mut body = vec![0; len];
            reader.read_exact(&mut body).unwrap();
            let resp = serde_json::json!({"choices": [{"message": {"content": reply}}]}).to_string();
            let mut stream = stream;
            write!(stream, "HTTP/1.1 200 OK\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{resp}", resp.len()).unwrap();
        }
    });
    format!("http://{addr}")
}

#[test]
fn eval_against_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let labels = [Label::A, Label::B, Label::B, Label::D];
    let pairs: Vec<McqPair> = synthetic(40, 8, &Label::ALL)
        .into_iter()
        .enumerate()
        .map(|(i, mut p)| {
            p.answer = labels[i % 4];
            p.refresh_id();
            p
        })
        .collect();
    let set = dataset(d, "set.jsonl", &pairs);
    let url = stub_endpoint("I think the answer is B.");
    let out = p(&d.join("r.json"));
    assert_eq!(cli(&["eval", "--set", &set, "--out", &out, "--answerer", "endpoint", "--endpoint", &url, "--parallelism", "2"]), 0);
    let r = read_json(&d.join("r.json"));
    assert_eq!(r["accuracy"], 0.5);
    assert_eq!(r["per_position"]["B"]["accuracy"], 1.0);
    assert_eq!(r["per_position"]["A"]["correct"], 0);
}

#[test]
fn provider_exhaustion_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let seg = d.join("seg.jsonl");
    let segments = vec![rac_forge::CorpusSegment::new("b", vec!["1 Intro".into()], "Routers forward packets.")];
    jsonl::write_jsonl(&seg, &segments).unwrap();
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let out = p(&d.join("o.jsonl"));
    let audit = d.join("audit.jsonl");
    let code = cli(&[
        "generate", "--segments", &p(&seg), "--out", &out, "--audit", &p(&audit),
        "--endpoint", &format!("http://127.0.0.1:{port}"), "--max-retries", "0",
    ]);
    assert_eq!(code, 3);
    let records: Vec<serde_json::Value> = jsonl::read_jsonl(&audit).unwrap();
    assert_eq!(records[0]["outcome"]["status"], "failed");
    assert_eq!(records[0]["outcome"]["kind"], "provider");

    assert_eq!(cli(&["generate", "--segments", &p(&seg), "--out", &out]), 2);
    assert_eq!(cli(&["generate", "--segments", &p(&seg), "--out", &out, "--mock-seed", "1", "--top-p", "0"]), 2);
}

#[test]
fn generate_with_mock_and_audit() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let manifest = common::corpus(d, &[("net", common::book("n", 3, 2))]);
    let seg = p(&d.join("seg.jsonl"));
    assert_eq!(cli(&["ingest", "--manifest", &p(&manifest), "--out", &seg]), 0);
    let n = line_count(&d.join("seg.jsonl"));
    let segs: Vec<rac_forge::CorpusSegment> = jsonl::read_jsonl(&d.join("seg.jsonl")).unwrap();
    assert!(segs.iter().all(|s| !s.text.contains("Figure")));
    let out = p(&d.join("pairs.jsonl"));
    let audit = p(&d.join("audit.jsonl"));
    assert_eq!(cli(&["generate", "--segments", &seg, "--out", &out, "--audit", &audit, "--mock-seed", "2", "--questions", "2"]), 0);
    assert_eq!(line_count(&d.join("pairs.jsonl")), 2 * n);
    assert_eq!(line_count(&d.join("audit.jsonl")), n);
    for p in jsonl::read_pairs(&d.join("pairs.jsonl")).unwrap() {
        assert!(p.is_rac_complete());
        assert_eq!(p.source.unwrap().book_id, "net");
    }
}

#[test]
fn review_sample_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = dataset(d, "d.jsonl", &synthetic(300, 9, &Label::ALL));
    let state = p(&d.join("state"));
    let s1 = p(&d.join("s1.jsonl"));
    let s2 = p(&d.join("s2.jsonl"));
    assert_eq!(cli(&["review", "sample", "--in", &data, "--dir", &state, "--out", &s1]), 0);
    assert_eq!(cli(&["review", "sample", "--in", &data, "--dir", &state, "--out", &s2]), 0);
    assert_eq!(line_count(&d.join("s1.jsonl")), 200);
    assert_eq!(std::fs::read(d.join("s1.jsonl")).unwrap(), std::fs::read(d.join("s2.jsonl")).unwrap());
    assert_eq!(std::fs::read_dir(d.join("state/sessions")).unwrap().count(), 2);
}
