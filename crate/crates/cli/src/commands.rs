use std::path::Path;

use rac_forge::curation::{self, Taxonomy};
use rac_forge::eval::{
    run_eval, Answerer, ConstantAnswerer, EvalConfig, OracleAnswerer, ProviderAnswerer, RandomAnswerer,
};
use rac_forge::generation::{generate_pairs, GenerationConfig, GenerationOutput, MockProvider};
use rac_forge::ingest::{ingest_manifest, Cleaner};
use rac_forge::provider::{ChatProvider, HttpProvider};
use rac_forge::review::ReviewStore;
use rac_forge::{jsonl, CorpusSegment, Error, McqPair, ProblemSet, Provenance, Tier};

use crate::{
    AnswererKind, CliError, CliResult, ComposeArgs, DedupeArgs, DedupeKey, EvalArgs, ExportSftArgs,
    GenerateArgs, InOut, IngestArgs, ProviderArgs, SampleArgs, SamplingArgs, SplitArgs, StatsArgs,
    ValidateArgs, EXIT_OK, EXIT_VALIDATION,
};

fn io_context<'a>(path: &'a Path, verb: &'static str) -> impl FnOnce(Error) -> CliError + 'a {
    move |e| match e {
        Error::Io(io) => CliError::Config(format!("cannot {verb} {}: {io}", path.display())),
        other => CliError::Core(other),
    }
}

pub(crate) fn read_pairs(path: &Path) -> CliResult<Vec<McqPair>> {
    jsonl::read_pairs(path).map_err(io_context(path, "read"))
}

pub(crate) fn write_pairs(path: &Path, pairs: &[McqPair]) -> CliResult<usize> {
    jsonl::write_pairs(path, pairs).map_err(io_context(path, "write"))
}

pub(crate) fn write_json<T: serde::Serialize + ?Sized>(path: &Path, value: &T) -> CliResult {
    jsonl::write_json(path, value).map_err(io_context(path, "write"))
}

pub(crate) fn write_jsonl<T: serde::Serialize>(path: &Path, items: &[T]) -> CliResult<usize> {
    jsonl::write_jsonl(path, items).map_err(io_context(path, "write"))
}

pub(crate) fn load_taxonomy(path: Option<&Path>) -> CliResult<Taxonomy> {
    match path {
        None => Ok(Taxonomy::default()),
        Some(p) => Taxonomy::load(p).map_err(io_context(p, "read")),
    }
}

pub fn ingest(a: IngestArgs) -> CliResult<i32> {
    let cleaner = if a.caption_patterns.is_empty() {
        Cleaner::default()
    } else {
        Cleaner::with_caption_patterns(&a.caption_patterns)?
    };
    let segments = ingest_manifest(&a.manifest, a.budget, &cleaner).map_err(io_context(&a.manifest, "read"))?;
    let n = write_jsonl(&a.out, &segments)?;
    println!("ingest: {n} segments -> {}", a.out.display());
    Ok(EXIT_OK)
}

pub(crate) fn generation_config(p: &ProviderArgs, s: &SamplingArgs) -> GenerationConfig {
    GenerationConfig {
        temperature: s.temperature,
        top_p: s.top_p,
        frequency_penalty: s.frequency_penalty,
        presence_penalty: s.presence_penalty,
        model: p.model.clone(),
        questions_per_segment: s.questions,
        max_retries: p.max_retries,
        parallelism: p.parallelism,
        ..GenerationConfig::default()
    }
}

pub(crate) fn provider(p: &ProviderArgs) -> CliResult<Box<dyn ChatProvider>> {
    match (&p.endpoint, p.mock_seed) {
        (Some(url), None) => Ok(Box::new(HttpProvider::from_env(url.clone()))),
        (None, Some(seed)) => Ok(Box::new(MockProvider::new(seed))),
        _ => Err(CliError::Config("one of --endpoint or --mock-seed is required".into())),
    }
}

/// Generate, write pairs and audit log, and fail when nothing succeeded.
pub(crate) fn run_generation(
    segments: &[CorpusSegment],
    cfg: &GenerationConfig,
    provider: &dyn ChatProvider,
    out: &Path,
    audit: Option<&Path>,
) -> CliResult<GenerationOutput> {
    let output = generate_pairs(segments, cfg, provider)?;
    write_pairs(out, &output.pairs)?;
    if let Some(audit) = audit {
        write_jsonl(audit, &output.records)?;
    }
    println!(
        "generate: {} pairs from {} segments ({} failed) -> {}",
        output.pairs.len(),
        output.records.len(),
        output.failed(),
        out.display()
    );
    if output.all_failed() {
        return Err(CliError::ProviderExhausted(format!(
            "all {} segments failed; first error: {}",
            output.records.len(),
            output
                .records
                .iter()
                .find_map(|r| match &r.outcome {
                    rac_forge::generation::BatchOutcome::Failed { error, .. } => Some(error.as_str()),
                    _ => None,
                })
                .unwrap_or("unknown")
        )));
    }
    Ok(output)
}

pub fn generate(a: GenerateArgs) -> CliResult<i32> {
    let cfg = generation_config(&a.provider, &a.sampling);
    cfg.validate()?;
    let provider = provider(&a.provider)?;
    let segments: Vec<CorpusSegment> =
        jsonl::read_jsonl(&a.segments).map_err(io_context(&a.segments, "read"))?;
    run_generation(&segments, &cfg, provider.as_ref(), &a.out, a.audit.as_deref())?;
    Ok(EXIT_OK)
}

pub fn validate(a: ValidateArgs) -> CliResult<i32> {
    let (pairs, bad) = jsonl::read_pairs_lenient(&a.input).map_err(io_context(&a.input, "read"))?;
    let (valid, report) = curation::validate_file_contents(pairs, bad);
    write_pairs(&a.out, &valid)?;
    write_json(&a.report, &report)?;
    println!(
        "validate: {} of {} valid, {} issues -> {}",
        report.valid,
        report.total,
        report.issues.len() + report.malformed.len(),
        a.report.display()
    );
    Ok(if report.passed() { EXIT_OK } else { EXIT_VALIDATION })
}

pub fn dedupe(a: DedupeArgs) -> CliResult<i32> {
    let pairs = read_pairs(&a.io.input)?;
    let before = pairs.len();
    let kept = match a.by {
        DedupeKey::Question => curation::dedupe(pairs),
        DedupeKey::Id => curation::dedupe_by_id(pairs),
    };
    write_pairs(&a.io.out, &kept)?;
    println!("dedupe: kept {} of {before}", kept.len());
    Ok(EXIT_OK)
}

pub fn augment(a: InOut) -> CliResult<i32> {
    let pairs = read_pairs(&a.input)?;
    let boosted = curation::choiceboost_all(&pairs)?;
    write_pairs(&a.out, &boosted)?;
    println!("augment: {} -> {} pairs", pairs.len(), boosted.len());
    Ok(EXIT_OK)
}

pub fn bias(a: InOut) -> CliResult<i32> {
    let pairs = read_pairs(&a.input)?;
    let report = curation::position_bias(&pairs)?;
    write_json(&a.out, &report)?;
    println!("bias: tv_distance {:.6} over {} pairs", report.tv_distance, report.total);
    Ok(EXIT_OK)
}

pub fn split(a: SplitArgs) -> CliResult<i32> {
    if !(a.fraction > 0.0 && a.fraction < 1.0) {
        return Err(CliError::Config(format!(
            "--fraction {} must lie strictly between 0 and 1",
            a.fraction
        )));
    }
    let pairs = read_pairs(&a.input)?;
    let (train, test) = curation::split(&pairs, a.fraction, a.seed)?;
    write_pairs(&a.train, &train)?;
    write_pairs(&a.test, &test)?;
    println!("split: train {} / test {} (seed {})", train.len(), test.len(), a.seed);
    Ok(EXIT_OK)
}

pub fn export_sft(a: ExportSftArgs) -> CliResult<i32> {
    let pairs = read_pairs(&a.io.input)?;
    let records = curation::export_sft(&pairs, a.style)?;
    write_jsonl(&a.io.out, &records)?;
    println!("export-sft: {} records -> {}", records.len(), a.io.out.display());
    Ok(EXIT_OK)
}

pub fn stats(a: StatsArgs) -> CliResult<i32> {
    let taxonomy = load_taxonomy(a.taxonomy.as_deref())?;
    let matcher = taxonomy.matcher()?;
    let pairs = read_pairs(&a.io.input)?;
    let report = curation::stats(&pairs, &taxonomy.name, &matcher, a.top_k);
    write_json(&a.io.out, &report)?;
    println!("stats: {} pairs -> {}", report.total, a.io.out.display());
    Ok(EXIT_OK)
}

fn load_set(path: &Path, name: Option<&str>, tier: Tier) -> CliResult<ProblemSet> {
    let name = name.map(str::to_string).unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "set".into())
    });
    let pairs = read_pairs(path)?;
    let provenance = Provenance {
        note: Some(path.display().to_string()),
        ..Provenance::default()
    };
    Ok(ProblemSet::new(name, tier, pairs, provenance)?)
}

#[derive(serde::Serialize)]
struct ProvenanceRecord<'a> {
    name: &'a str,
    tier: Tier,
    size: usize,
    created_from: &'a Provenance,
}

pub fn compose(a: ComposeArgs) -> CliResult<i32> {
    let easy = load_set(&a.easy, None, Tier::Easy)?;
    let hard = load_set(&a.hard, None, Tier::Hard)?;
    let set = rac_forge::eval::compose_comprehensive(&easy, &hard, a.seed)?;
    write_pairs(&a.out, &set.pairs)?;
    if let Some(p) = &a.provenance {
        write_json(
            p,
            &ProvenanceRecord {
                name: &set.name,
                tier: set.tier,
                size: set.len(),
                created_from: &set.created_from,
            },
        )?;
    }
    println!(
        "compose-comprehensive: {} easy + {} hard = {}",
        set.len() - hard.len(),
        hard.len(),
        set.len()
    );
    Ok(EXIT_OK)
}

pub fn eval(a: EvalArgs) -> CliResult<i32> {
    let mut set = load_set(&a.set, a.name.as_deref(), a.tier)?;
    if let Some(t) = &a.taxonomy {
        let taxonomy = if t == "default" { Taxonomy::default() } else { load_taxonomy(Some(Path::new(t)))? };
        let matcher = taxonomy.matcher()?;
        for p in set.pairs.iter_mut().filter(|p| p.subdomain.is_none()) {
            p.subdomain = Some(matcher.classify(p).to_string());
        }
    }
    let cfg = EvalConfig {
        model: a.model.clone(),
        seed: a.seed,
        temperature: a.temperature,
        parallelism: a.parallelism,
    };
    let answerer: Box<dyn Answerer> = match a.answerer {
        AnswererKind::Oracle => Box::new(OracleAnswerer),
        AnswererKind::Constant => Box::new(ConstantAnswerer(a.label)),
        AnswererKind::Random => Box::new(RandomAnswerer::new(a.seed)),
        AnswererKind::Endpoint => {
            let url = a
                .endpoint
                .clone()
                .ok_or_else(|| CliError::Config("--answerer endpoint requires --endpoint".into()))?;
            let mut p = ProviderAnswerer::new(HttpProvider::from_env(url), a.model.clone());
            p.temperature = a.temperature;
            p.max_retries = a.max_retries;
            Box::new(p)
        }
    };
    let output = run_eval(&set, answerer.as_ref(), &cfg)?;
    write_json(&a.out, &output.report)?;
    if let Some(items) = &a.items {
        write_jsonl(items, &output.items)?;
    }
    let r = &output.report;
    println!(
        "eval: {} accuracy {:.4} ({} of {}, {} unparsed)",
        r.config.answerer,
        r.accuracy,
        r.correct(),
        r.total,
        r.unparsed
    );
    let errors = output.items.iter().filter(|i| i.error.is_some()).count();
    if errors == output.items.len() {
        return Err(CliError::ProviderExhausted(format!(
            "every item failed; first error: {}",
            output.items[0].error.as_deref().unwrap_or_default()
        )));
    }
    Ok(EXIT_OK)
}

pub fn review_sample(a: SampleArgs) -> CliResult<i32> {
    let pairs = read_pairs(&a.input)?;
    let store = ReviewStore::open(&a.dir).map_err(io_context(&a.dir, "open"))?;
    let session = store.create_session(&a.input.display().to_string(), &pairs, a.size, a.seed)?;
    if let Some(out) = &a.out {
        write_pairs(out, &store.sampled_pairs(&session.session_id)?)?;
    }
    println!("{}", session.session_id);
    Ok(EXIT_OK)
}
