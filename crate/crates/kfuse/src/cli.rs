//! The `kfuse` command line: `generate`, `fuse`, `evaluate`, `analyze`.
//! A thin layer over the library — every command reads and writes files,
//! prints a one-line summary to stdout, and records its fully-resolved
//! configuration (defaults and seed included) in a JSON artifact so any run
//! can be reproduced.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::eval::{self, StratumKey};
use crate::gold::{label_corpus, GoldStandard};
use crate::ingest;
use crate::model::{Granularity, Triple};
use crate::pipeline::{self, GoldInit, Method, PipelineConfig};
use crate::synth::{self, ConfidenceParams, ErrorRates, ExtractorProfile, SynthConfig};
use crate::{Error, Result};

#[derive(Parser)]
#[command(
    name = "kfuse",
    version,
    about = "Knowledge fusion: calibrated truthfulness probabilities for extracted triples"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic extraction corpus with known ground truth
    Generate(GenerateArgs),
    /// Fuse extracted records into per-triple truthfulness probabilities
    Fuse(FuseArgs),
    /// Evaluate predictions against a reference KB (calibration, PR, AUC)
    Evaluate(EvaluateArgs),
    /// Analyze a corpus: extractor agreement, accuracy strata, confidence coverage
    Analyze(AnalyzeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Vote,
    Accu,
    Popaccu,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Vote => Method::Vote,
            MethodArg::Accu => Method::Accu,
            MethodArg::Popaccu => Method::PopAccu,
        }
    }
}

// variant names deliberately mirror the flag values
#[allow(clippy::enum_variant_names)]
#[derive(Clone, Copy, ValueEnum)]
enum GranularityArg {
    #[value(name = "extractor-url")]
    ExtractorUrl,
    #[value(name = "extractor-site")]
    ExtractorSite,
    #[value(name = "extractor-site-pred")]
    ExtractorSitePred,
    #[value(name = "extractor-site-pred-pattern")]
    ExtractorSitePredPattern,
}

impl From<GranularityArg> for Granularity {
    fn from(g: GranularityArg) -> Granularity {
        match g {
            GranularityArg::ExtractorUrl => Granularity::ExtractorUrl,
            GranularityArg::ExtractorSite => Granularity::ExtractorSite,
            GranularityArg::ExtractorSitePred => Granularity::ExtractorSitePredicate,
            GranularityArg::ExtractorSitePredPattern => {
                Granularity::ExtractorSitePredicatePattern
            }
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    #[value(name = "popaccu-plus")]
    PopaccuPlus,
}

#[derive(Args)]
struct FuseArgs {
    /// Extraction records TSV (7 columns; plain or gzip)
    #[arg(long)]
    records: PathBuf,
    /// Fusion method
    #[arg(long)]
    method: Option<MethodArg>,
    /// Provenance granularity
    #[arg(long)]
    granularity: Option<GranularityArg>,
    /// Start from a named preset; explicit flags override its fields
    #[arg(long)]
    preset: Option<PresetArg>,
    /// Assumed number of false values per data item
    #[arg(long)]
    n_false: Option<u32>,
    /// Accuracy assigned to provenances before recomputation
    #[arg(long)]
    default_accuracy: Option<f64>,
    /// Round budget
    #[arg(long)]
    rounds: Option<u32>,
    /// Per-group sampling cap
    #[arg(long)]
    sample_limit: Option<usize>,
    /// Filter provenances by coverage
    #[arg(long)]
    filter_coverage: bool,
    /// Ignore provenances below this accuracy
    #[arg(long)]
    min_prov_accuracy: Option<f64>,
    /// Reference KB TSV; enables gold-initialized accuracies
    #[arg(long)]
    gold: Option<PathBuf>,
    /// Fraction of gold labels visible to initialization
    #[arg(long)]
    gold_sample_rate: Option<f64>,
    /// Drop records with confidence below this threshold before fusing
    #[arg(long)]
    min_confidence: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: machine cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Output probabilities TSV
    #[arg(long, default_value = "probabilities.tsv")]
    out: PathBuf,
    /// Output diagnostics JSON
    #[arg(long, default_value = "diagnostics.json")]
    diagnostics: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Probabilities TSV produced by `fuse`
    #[arg(long)]
    preds: PathBuf,
    /// Reference KB TSV
    #[arg(long)]
    kb: PathBuf,
    /// Number of calibration buckets l (the report has l+1)
    #[arg(long, default_value_t = 20)]
    buckets: usize,
    /// Directory for calibration.csv, pr.csv and summary.json
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Extraction records TSV
    #[arg(long)]
    records: PathBuf,
    /// Reference KB TSV for labels
    #[arg(long)]
    kb: PathBuf,
    /// Directory for kappa.csv, strata_*.csv, confidence_coverage.csv, summary.json
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    /// Directory for records.tsv, kb.tsv, truth.tsv and summary.json
    #[arg(long, default_value = "synth")]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 1000)]
    items: usize,
    #[arg(long, default_value_t = 8)]
    predicates: usize,
    /// Number of Web pages
    #[arg(long, default_value_t = 500)]
    sources: usize,
    #[arg(long, default_value_t = 10)]
    pages_per_site: usize,
    /// Sample one accuracy per site instead of per page
    #[arg(long)]
    site_level_accuracy: bool,
    /// Beta(alpha, beta) source accuracies; beta 0 pins accuracy at alpha
    #[arg(long, default_value_t = 8.0)]
    accuracy_alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    accuracy_beta: f64,
    #[arg(long, default_value_t = 3)]
    extractors: usize,
    /// Total corruption budget per extractor, split across error channels
    #[arg(long, default_value_t = 0.15)]
    extractor_error: f64,
    /// Probability an extractor observes a given source claim
    #[arg(long, default_value_t = 0.6)]
    extractor_coverage: f64,
    #[arg(long, default_value_t = 1)]
    claims_min: u32,
    #[arg(long, default_value_t = 20)]
    claims_max: u32,
    /// False candidate values per item
    #[arg(long, default_value_t = 10)]
    value_domain: usize,
    /// Zipf exponent for item popularity (0 = uniform)
    #[arg(long, default_value_t = 1.0)]
    zipf: f64,
    /// Fraction of items whose truths enter the KB file
    #[arg(long, default_value_t = 1.0)]
    kb_fraction: f64,
    /// Probability extractors reuse a claim's shared corruption
    #[arg(long, default_value_t = 0.0)]
    shared_error_rate: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Parses `args` and runs the selected command, mapping usage errors to exit
/// code 1 and data errors to exit code 2.
pub fn run(args: impl IntoIterator<Item = String>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Generate(args) => generate(args),
        Command::Fuse(args) => fuse(args),
        Command::Evaluate(args) => evaluate(args),
        Command::Analyze(args) => analyze(args),
    };
    match outcome {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), value)
        .map_err(|e| Error::io(path, std::io::Error::other(e)))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn fuse(args: FuseArgs) -> Result<String> {
    let mut cfg = match args.preset {
        Some(PresetArg::PopaccuPlus) => pipeline::popaccu_plus_preset(None),
        None => {
            let method = args.method.ok_or_else(|| {
                Error::InvalidConfig("either --method or --preset is required".into())
            })?;
            PipelineConfig::new(method.into(), Granularity::ExtractorUrl)
        }
    };
    if let Some(m) = args.method {
        cfg.method = m.into();
    }
    if let Some(g) = args.granularity {
        cfg.granularity = g.into();
    }
    if let Some(n) = args.n_false {
        cfg.params.n_false = n;
    }
    if let Some(a) = args.default_accuracy {
        cfg.params.default_accuracy = a;
    }
    if let Some(r) = args.rounds {
        cfg.rounds = r;
    }
    if let Some(l) = args.sample_limit {
        cfg.sample_limit = l;
    }
    if args.filter_coverage {
        cfg.filter_coverage = true;
    }
    if let Some(theta) = args.min_prov_accuracy {
        cfg.min_prov_accuracy = Some(theta);
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(threads) = args.threads {
        cfg.workers = threads;
    }

    let corpus = ingest::parse_records(&args.records)?;
    let (corpus, retained) = match args.min_confidence {
        Some(tau) => ingest::filter_by_confidence(&corpus, tau),
        None => (corpus, 1.0),
    };
    if let Some(gold_path) = &args.gold {
        let kb = ingest::parse_kb(gold_path)?;
        cfg.gold_init = Some(GoldInit {
            standard: GoldStandard::from_kb(kb.triples),
            sample_rate: args.gold_sample_rate.unwrap_or(1.0),
        });
    } else if args.preset.is_some() {
        // unsupervised variant of the preset
        cfg.gold_init = None;
    }

    let out = pipeline::run_fusion(&corpus, &cfg)?;
    out.result.write_tsv(&args.out)?;
    out.diagnostics.write_json(&args.diagnostics)?;
    Ok(format!(
        "fused {} unique triples ({} records, {:.1}% retained) with {} at {}: \
         coverage {:.4}, {} round(s), {} ms -> {} (diagnostics: {})",
        out.diagnostics.unique_triples,
        corpus.len(),
        retained * 100.0,
        cfg.method,
        cfg.granularity,
        out.result.coverage,
        out.diagnostics.rounds.len(),
        out.diagnostics.wall_ms,
        args.out.display(),
        args.diagnostics.display(),
    ))
}

fn evaluate(args: EvaluateArgs) -> Result<String> {
    ensure_dir(&args.out_dir)?;
    let (raw_preds, skipped) = eval::parse_predictions(&args.preds)?;
    let kb = ingest::parse_kb(&args.kb)?;
    let gold = GoldStandard::from_kb(kb.triples);

    let total = raw_preds.len();
    let mut preds: BTreeMap<Triple, f64> = BTreeMap::new();
    let mut labels: BTreeMap<Triple, crate::gold::Label> = BTreeMap::new();
    for (t, p) in raw_preds {
        labels.insert(t.clone(), gold.lcwa_label(&t));
        if let Some(p) = p {
            preds.insert(t, p);
        }
    }
    let coverage = if total == 0 {
        0.0
    } else {
        preds.len() as f64 / total as f64
    };

    let calibration = eval::calibration(&preds, &labels, args.buckets)?;
    let pr = eval::pr_curve(&preds, &labels)?;
    let cal_path = args.out_dir.join("calibration.csv");
    let pr_path = args.out_dir.join("pr.csv");
    eval::write_calibration_csv(&calibration, &cal_path)?;
    eval::write_pr_csv(&pr, &pr_path)?;

    let participants: u64 = calibration.buckets.iter().map(|b| b.count).sum();
    let summary = json!({
        "config": {
            "preds": args.preds.display().to_string(),
            "kb": args.kb.display().to_string(),
            "buckets": args.buckets,
        },
        "deviation": calibration.deviation,
        "weighted_deviation": calibration.weighted_deviation,
        "auc_pr": pr.auc_pr,
        "coverage": coverage,
        "unique_triples": total,
        "participants": participants,
        "skipped_lines": skipped,
    });
    write_json(&args.out_dir.join("summary.json"), &summary)?;
    Ok(format!(
        "evaluated {} triples ({} labeled with predictions): dev {:.4}, wdev {:.4}, \
         auc-pr {:.4}, coverage {:.4} -> {}",
        total,
        participants,
        calibration.deviation,
        calibration.weighted_deviation,
        pr.auc_pr,
        coverage,
        args.out_dir.display(),
    ))
}

fn analyze(args: AnalyzeArgs) -> Result<String> {
    ensure_dir(&args.out_dir)?;
    let corpus = ingest::parse_records(&args.records)?;
    let kb = ingest::parse_kb(&args.kb)?;
    let gold = GoldStandard::from_kb(kb.triples);
    let (labels, label_summary) = label_corpus(&gold, &corpus);

    let kappa_rows = eval::kappa_matrix(&corpus);
    eval::write_kappa_csv(&kappa_rows, args.out_dir.join("kappa.csv"))?;

    for key in StratumKey::ALL {
        let rows = eval::accuracy_by_stratum(&corpus, &labels, key);
        let path = args.out_dir.join(format!("strata_{}.csv", key.as_str()));
        eval::write_strata_csv(&rows, path)?;
    }

    let coverage_rows = eval::confidence_coverage(&corpus, 20);
    eval::write_confidence_coverage_csv(
        &coverage_rows,
        args.out_dir.join("confidence_coverage.csv"),
    )?;

    let summary = json!({
        "config": {
            "records": args.records.display().to_string(),
            "kb": args.kb.display().to_string(),
        },
        "records": corpus.len(),
        "unique_triples": corpus.stats().unique_triples,
        "data_items": corpus.stats().data_items,
        "labeled_fraction": label_summary.labeled_fraction,
        "true_fraction": label_summary.true_fraction,
        "extractor_pairs": kappa_rows.len(),
    });
    write_json(&args.out_dir.join("summary.json"), &summary)?;
    Ok(format!(
        "analyzed {} records ({} unique triples, {:.1}% labeled): {} extractor pairs, \
         strata + confidence coverage -> {}",
        corpus.len(),
        corpus.stats().unique_triples,
        label_summary.labeled_fraction * 100.0,
        kappa_rows.len(),
        args.out_dir.display(),
    ))
}

fn generate(args: GenerateArgs) -> Result<String> {
    ensure_dir(&args.out_dir)?;
    if args.extractors == 0 {
        return Err(Error::InvalidConfig("--extractors must be >= 1".into()));
    }
    let extractors: Vec<ExtractorProfile> = (0..args.extractors)
        .map(|i| ExtractorProfile {
            error_rates: ErrorRates::split(args.extractor_error),
            coverage: args.extractor_coverage,
            confidence: if i % 3 == 2 {
                None // every third extractor reports no confidence
            } else {
                Some(ConfidenceParams {
                    when_true: (5.0, 2.0),
                    when_false: (2.0, 5.0),
                })
            },
            patterns: if i == 0 { 4 } else { 0 },
        })
        .collect();
    let cfg = SynthConfig {
        n_items: args.items,
        n_predicates: args.predicates,
        n_sources: args.sources,
        pages_per_site: args.pages_per_site,
        site_level_accuracy: args.site_level_accuracy,
        source_accuracy: (args.accuracy_alpha, args.accuracy_beta),
        extractors,
        claims_per_source: (args.claims_min, args.claims_max),
        value_domain_size: args.value_domain,
        item_popularity: args.zipf,
        truths_per_item: vec![(1, 0.95), (2, 0.05)],
        kb_fraction: args.kb_fraction,
        shared_error_rate: args.shared_error_rate,
        seed: args.seed,
    };
    let out = synth::generate(&cfg)?;
    let records_path = args.out_dir.join("records.tsv");
    let kb_path = args.out_dir.join("kb.tsv");
    let truth_path = args.out_dir.join("truth.tsv");
    out.write_files(&records_path, &kb_path, &truth_path)?;

    let summary = json!({
        "config": {
            "items": cfg.n_items,
            "predicates": cfg.n_predicates,
            "sources": cfg.n_sources,
            "pages_per_site": cfg.pages_per_site,
            "site_level_accuracy": cfg.site_level_accuracy,
            "accuracy_alpha": cfg.source_accuracy.0,
            "accuracy_beta": cfg.source_accuracy.1,
            "extractors": args.extractors,
            "extractor_error": args.extractor_error,
            "extractor_coverage": args.extractor_coverage,
            "claims_min": cfg.claims_per_source.0,
            "claims_max": cfg.claims_per_source.1,
            "value_domain": cfg.value_domain_size,
            "zipf": cfg.item_popularity,
            "kb_fraction": cfg.kb_fraction,
            "shared_error_rate": cfg.shared_error_rate,
            "seed": cfg.seed,
        },
        "records": out.corpus.len(),
        "unique_triples": out.corpus.stats().unique_triples,
        "data_items": out.corpus.stats().data_items,
        "kb_triples": out.kb.len(),
    });
    write_json(&args.out_dir.join("summary.json"), &summary)?;
    Ok(format!(
        "generated {} records ({} unique triples, {} KB triples) with seed {} -> {}",
        out.corpus.len(),
        out.corpus.stats().unique_triples,
        out.kb.len(),
        cfg.seed,
        args.out_dir.display(),
    ))
}
