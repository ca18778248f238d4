//! The full refinement stack versus the plain estimator. Builds a noisy
//! synthetic corpus with per-site quality variation and sparse pages, then
//! compares plain PopAccu at (extractor, URL) granularity against the
//! popaccu-plus preset (coverage filter, finest granularity, accuracy
//! threshold, gold-initialized accuracies).
//!
//! Run: cargo run --example popaccu_plus

use std::collections::BTreeMap;

use kfuse::eval::calibration;
use kfuse::gold::{label_corpus, GoldStandard};
use kfuse::model::{Granularity, Triple};
use kfuse::pipeline::{popaccu_plus_preset, run_fusion, GoldInit, Method, PipelineConfig};
use kfuse::synth::{generate, ExtractorProfile, SynthConfig};

fn main() {
    let synth_cfg = SynthConfig {
        n_items: 2000,
        n_predicates: 4,
        n_sources: 4000,
        pages_per_site: 20,
        site_level_accuracy: true,
        source_accuracy: (1.5, 3.5), // mostly unreliable sources
        extractors: vec![ExtractorProfile::noiseless()],
        claims_per_source: (1, 3),
        value_domain_size: 10,
        item_popularity: 0.6,
        truths_per_item: vec![(1, 1.0)],
        seed: 3,
        ..SynthConfig::default()
    };
    let synth = generate(&synth_cfg).unwrap();
    let gold = GoldStandard::from_kb(synth.kb.iter().cloned());
    let (labels, summary) = label_corpus(&gold, &synth.corpus);
    println!(
        "corpus: {} records, {} unique triples, {:.0}% labeled, {:.0}% of labeled true\n",
        synth.corpus.len(),
        summary.unique_triples,
        summary.labeled_fraction * 100.0,
        summary.true_fraction * 100.0
    );

    let plain = PipelineConfig::new(Method::PopAccu, Granularity::ExtractorUrl);
    let plus = popaccu_plus_preset(Some(GoldInit {
        standard: gold,
        sample_rate: 1.0,
    }));

    println!("configuration        wdev      dev       coverage");
    for (name, cfg) in [("popaccu (plain)", plain), ("popaccu-plus", plus)] {
        let out = run_fusion(&synth.corpus, &cfg).unwrap();
        let preds: BTreeMap<Triple, f64> = out
            .result
            .rows
            .iter()
            .filter_map(|(t, v)| v.probability.map(|p| (t.clone(), p)))
            .collect();
        let report = calibration(&preds, &labels, 20).unwrap();
        println!(
            "{name:20} {:.5}   {:.5}   {:.3}",
            report.weighted_deviation, report.deviation, out.result.coverage
        );
    }
    println!("\nthe preset trades a little coverage for a better-calibrated curve;");
    println!("without a gold standard the same stack runs unsupervised:");
    println!("  kfuse fuse --records r.tsv --preset popaccu-plus [--gold kb.tsv]");
}
