use std::fs;

use rac_forge::curation::{self, SftStyle, Taxonomy};
use rac_forge::eval::{run_eval, EvalConfig, OracleAnswerer};
use rac_forge::ingest::{ingest_manifest, Cleaner};
use rac_forge::{jsonl, DatasetManifest, ProblemSet, Provenance, Tier};

use crate::commands::{generation_config, provider, run_generation, write_json, write_jsonl, write_pairs};
use crate::{CliError, CliResult, PipelineArgs, EXIT_OK, EXIT_VALIDATION};

/// ingest → generate → validate → dedupe → split → augment → export-sft,
/// with bias, stats and an oracle evaluation of the test side.
pub fn run(a: PipelineArgs) -> CliResult<i32> {
    if !(a.fraction > 0.0 && a.fraction < 1.0) {
        return Err(CliError::Config(format!(
            "--fraction {} must lie strictly between 0 and 1",
            a.fraction
        )));
    }
    let cfg = generation_config(&a.provider, &a.sampling);
    cfg.validate()?;
    let provider = provider(&a.provider)?;
    fs::create_dir_all(&a.out_dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", a.out_dir.display())))?;
    let out = |name: &str| a.out_dir.join(name);

    let segments = ingest_manifest(&a.manifest, a.budget, &Cleaner::default())?;
    write_jsonl(&out("segments.jsonl"), &segments)?;
    println!("ingest: {} segments", segments.len());

    let generated = run_generation(
        &segments,
        &cfg,
        provider.as_ref(),
        &out("generated.jsonl"),
        Some(&out("generation_audit.jsonl")),
    )?;
    let raw = generated.pairs.len();

    let (valid, report) = curation::validate_file_contents(generated.pairs, Vec::new());
    write_pairs(&out("valid.jsonl"), &valid)?;
    write_json(&out("validation.json"), &report)?;
    println!("validate: {} of {} valid", report.valid, report.total);

    let valid = curation::dedupe(valid);
    let validated = valid.len();
    write_pairs(&out("deduped.jsonl"), &valid)?;

    let (train, test) = curation::split(&valid, a.fraction, a.seed)?;
    write_pairs(&out("train.jsonl"), &train)?;
    write_pairs(&out("test.jsonl"), &test)?;
    println!("split: train {} / test {}", train.len(), test.len());

    let augmented = curation::choiceboost_all(&train)?;
    write_pairs(&out("train_augmented.jsonl"), &augmented)?;
    println!("augment: {} -> {}", train.len(), augmented.len());

    let sft = curation::export_sft(&augmented, SftStyle::Rac)?;
    write_jsonl(&out("sft.jsonl"), &sft)?;

    write_json(&out("bias_train.json"), &curation::position_bias(&train)?)?;
    write_json(&out("bias_train_augmented.json"), &curation::position_bias(&augmented)?)?;

    let taxonomy = Taxonomy::default();
    let stats = curation::stats(&valid, &taxonomy.name, &taxonomy.matcher()?, curation::DEFAULT_TOP_K);
    write_json(&out("stats.json"), &stats)?;

    let test_set = ProblemSet::new("test", Tier::Easy, test.clone(), Provenance::default())?;
    let eval = run_eval(&test_set, &OracleAnswerer, &EvalConfig::default())?;
    write_json(&out("eval_test.json"), &eval.report)?;
    jsonl::write_jsonl(&out("eval_test_items.jsonl"), &eval.items)?;
    println!("eval: oracle accuracy on test {:.4}", eval.report.accuracy);

    let manifest = DatasetManifest {
        raw,
        validated,
        test: test.len(),
        train_pre_augment: train.len(),
        train_augmented: augmented.len(),
        split_seed: a.seed,
        split_fraction: a.fraction,
        taxonomy: taxonomy.name.clone(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    };
    manifest.check(true)?;
    write_json(&out("manifest.json"), &manifest)?;

    Ok(if report.passed() { EXIT_OK } else { EXIT_VALIDATION })
}
