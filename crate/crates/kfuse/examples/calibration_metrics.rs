//! Calibration and ranking metrics: bucket the predictions of a fusion run
//! against LCWA labels, print the reliability table, deviation, weighted
//! deviation and AUC-PR.
//!
//! Run: cargo run --example calibration_metrics

use std::collections::BTreeMap;

use kfuse::eval::{calibration, pr_curve};
use kfuse::gold::{label_corpus, GoldStandard};
use kfuse::model::{Granularity, Triple};
use kfuse::pipeline::{run_fusion, Method, PipelineConfig};
use kfuse::synth::{generate, SynthConfig};

fn main() {
    let synth = generate(&SynthConfig {
        n_items: 3000,
        n_sources: 1200,
        seed: 8,
        ..SynthConfig::default()
    })
    .unwrap();
    let gold = GoldStandard::from_kb(synth.kb.iter().cloned());
    let (labels, _) = label_corpus(&gold, &synth.corpus);

    let cfg = PipelineConfig::new(Method::PopAccu, Granularity::ExtractorSite);
    let out = run_fusion(&synth.corpus, &cfg).unwrap();
    let preds: BTreeMap<Triple, f64> = out
        .result
        .rows
        .iter()
        .filter_map(|(t, v)| v.probability.map(|p| (t.clone(), p)))
        .collect();

    let report = calibration(&preds, &labels, 10).unwrap();
    println!("bucket        count   mean-predicted   observed-true-rate");
    for b in &report.buckets {
        match (b.mean_predicted, b.real_probability) {
            (Some(mp), Some(real)) => println!(
                "[{:.2},{:.2}{}  {:>6}   {:>14.3}   {:>18.3}",
                b.low,
                b.high,
                if b.low == 1.0 { "]" } else { ")" },
                b.count,
                mp,
                real
            ),
            _ => println!(
                "[{:.2},{:.2}{}  {:>6}                -                    -",
                b.low,
                b.high,
                if b.low == 1.0 { "]" } else { ")" },
                b.count
            ),
        }
    }
    println!("\ndeviation           {:.5}", report.deviation);
    println!("weighted deviation  {:.5}", report.weighted_deviation);

    let pr = pr_curve(&preds, &labels).unwrap();
    println!("auc-pr              {:.5}", pr.auc_pr);
    println!("pr points           {}", pr.points.len());
    println!("\nthe same numbers come out of the CLI as calibration.csv / pr.csv / summary.json:");
    println!("  kfuse evaluate --preds probabilities.tsv --kb kb.tsv --buckets 20");
}
