//! Evaluation metrics: calibration curve with (weighted) deviation,
//! precision-recall curve with AUC, chance-corrected extractor agreement,
//! accuracy stratified by support counts, and confidence-threshold coverage.
//! All CSV outputs are comma-separated with a header row, probabilities with
//! 6 decimals.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::gold::Label;
use crate::ingest::Corpus;
use crate::model::{provenance_key, Granularity, Triple};
use crate::{Error, Result};

/// One probability bucket of the calibration curve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CalibrationBucket {
    pub low: f64,
    pub high: f64,
    pub count: u64,
    /// Mean predicted probability inside the bucket; `None` when empty.
    pub mean_predicted: Option<f64>,
    /// Fraction of bucket triples labeled true; `None` when empty.
    pub real_probability: Option<f64>,
}

/// Calibration curve over l+1 buckets: bucket i < l covers predictions in
/// [i/l, (i+1)/l), bucket l holds predictions equal to 1.
#[derive(Debug, Clone, Serialize)]
pub struct CalibrationReport {
    pub buckets: Vec<CalibrationBucket>,
    pub deviation: f64,
    pub weighted_deviation: f64,
    pub l: usize,
}

fn bucket_index(p: f64, l: usize) -> usize {
    if p >= 1.0 {
        l
    } else {
        (((p * l as f64).floor() as i64).max(0) as usize).min(l - 1)
    }
}

/// Buckets the labeled predictions and measures how far predicted
/// probabilities sit from observed truth rates. Only triples that are labeled
/// true/false and carry a prediction participate.
pub fn calibration(
    preds: &BTreeMap<Triple, f64>,
    labels: &BTreeMap<Triple, Label>,
    l: usize,
) -> Result<CalibrationReport> {
    if l < 1 {
        return Err(Error::InvalidConfig("calibration needs l >= 1".into()));
    }
    let mut count = vec![0u64; l + 1];
    let mut sum_pred = vec![0.0f64; l + 1];
    let mut sum_true = vec![0u64; l + 1];
    let mut participants = 0u64;
    for (t, &p) in preds {
        let label = match labels.get(t) {
            Some(Label::True) => true,
            Some(Label::False) => false,
            _ => continue,
        };
        participants += 1;
        let b = bucket_index(p, l);
        count[b] += 1;
        sum_pred[b] += p;
        sum_true[b] += u64::from(label);
    }
    if participants == 0 {
        return Err(Error::NoParticipants);
    }
    let buckets: Vec<CalibrationBucket> = (0..=l)
        .map(|i| {
            let low = i as f64 / l as f64;
            let high = if i == l { 1.0 } else { (i + 1) as f64 / l as f64 };
            if count[i] == 0 {
                CalibrationBucket {
                    low,
                    high,
                    count: 0,
                    mean_predicted: None,
                    real_probability: None,
                }
            } else {
                CalibrationBucket {
                    low,
                    high,
                    count: count[i],
                    mean_predicted: Some(sum_pred[i] / count[i] as f64),
                    real_probability: Some(sum_true[i] as f64 / count[i] as f64),
                }
            }
        })
        .collect();
    let mut report = CalibrationReport {
        buckets,
        deviation: 0.0,
        weighted_deviation: 0.0,
        l,
    };
    report.deviation = deviation(&report);
    report.weighted_deviation = weighted_deviation(&report);
    Ok(report)
}

/// Mean squared gap between predicted and real probability over occupied
/// buckets (empty buckets are excluded).
pub fn deviation(r: &CalibrationReport) -> f64 {
    let mut sum = 0.0;
    let mut n = 0u64;
    for b in &r.buckets {
        if let (Some(mp), Some(real)) = (b.mean_predicted, b.real_probability) {
            sum += (mp - real) * (mp - real);
            n += 1;
        }
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Like [`deviation`] but each bucket weighted by its triple count.
pub fn weighted_deviation(r: &CalibrationReport) -> f64 {
    let mut sum = 0.0;
    let mut n = 0u64;
    for b in &r.buckets {
        if let (Some(mp), Some(real)) = (b.mean_predicted, b.real_probability) {
            sum += b.count as f64 * (mp - real) * (mp - real);
            n += b.count;
        }
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrPoint {
    pub recall: f64,
    pub precision: f64,
}

/// Precision-recall curve over triples ranked by descending predicted
/// probability, with tied probabilities processed as one atomic group.
#[derive(Debug, Clone, Serialize)]
pub struct PrReport {
    pub points: Vec<PrPoint>,
    pub auc_pr: f64,
}

/// Ranks labeled predictions and traces (recall, precision) after each tie
/// group; the area is trapezoidal over recall, with the first point extended
/// to recall zero at its precision.
pub fn pr_curve(
    preds: &BTreeMap<Triple, f64>,
    labels: &BTreeMap<Triple, Label>,
) -> Result<PrReport> {
    let mut ranked: Vec<(f64, bool)> = Vec::new();
    for (t, &p) in preds {
        match labels.get(t) {
            Some(Label::True) => ranked.push((p, true)),
            Some(Label::False) => ranked.push((p, false)),
            _ => {}
        }
    }
    if ranked.is_empty() {
        return Err(Error::NoParticipants);
    }
    let positives = ranked.iter().filter(|(_, l)| *l).count() as f64;
    if positives == 0.0 {
        return Err(Error::InvalidInput(
            "precision-recall needs at least one true-labeled participant".into(),
        ));
    }
    ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut points = Vec::new();
    let mut tp = 0.0f64;
    let mut seen = 0.0f64;
    let mut i = 0;
    while i < ranked.len() {
        let p = ranked[i].0;
        let mut j = i;
        while j < ranked.len() && ranked[j].0 == p {
            tp += f64::from(ranked[j].1);
            seen += 1.0;
            j += 1;
        }
        points.push(PrPoint {
            recall: tp / positives,
            precision: tp / seen,
        });
        i = j;
    }
    let mut auc = 0.0;
    let mut prev = PrPoint {
        recall: 0.0,
        precision: points[0].precision,
    };
    for pt in &points {
        auc += (pt.recall - prev.recall) * (pt.precision + prev.precision) / 2.0;
        prev = *pt;
    }
    Ok(PrReport {
        points,
        auc_pr: auc,
    })
}

/// Chance-corrected overlap of two triple sets relative to an overall set:
/// (|t1 ∩ t2|·|kb| − |t1|·|t2|) / (|kb|² − |t1|·|t2|).
pub fn kappa(
    t1: &HashSet<Triple>,
    t2: &HashSet<Triple>,
    kb: &HashSet<Triple>,
) -> Result<f64> {
    let inter = t1.intersection(t2).count() as i128;
    let n1 = t1.len() as i128;
    let n2 = t2.len() as i128;
    let nkb = kb.len() as i128;
    let denom = nkb * nkb - n1 * n2;
    if denom == 0 {
        return Err(Error::DegenerateKappa);
    }
    Ok((inter * nkb - n1 * n2) as f64 / denom as f64)
}

/// Pairwise extractor agreement over the corpus's unique triples.
#[derive(Debug, Clone, Serialize)]
pub struct KappaRow {
    pub extractor_a: String,
    pub extractor_b: String,
    /// `None` when the denominator degenerates.
    pub kappa: Option<f64>,
}

pub fn kappa_matrix(c: &Corpus) -> Vec<KappaRow> {
    let mut by_extractor: BTreeMap<&str, HashSet<Triple>> = BTreeMap::new();
    let mut all: HashSet<Triple> = HashSet::new();
    for r in c.records() {
        by_extractor
            .entry(&r.extractor)
            .or_default()
            .insert(r.triple.clone());
        all.insert(r.triple.clone());
    }
    let names: Vec<&str> = by_extractor.keys().copied().collect();
    let mut rows = Vec::new();
    for (i, a) in names.iter().enumerate() {
        for b in names.iter().skip(i + 1) {
            let k = kappa(&by_extractor[a], &by_extractor[b], &all).ok();
            rows.push(KappaRow {
                extractor_a: (*a).to_string(),
                extractor_b: (*b).to_string(),
                kappa: k,
            });
        }
    }
    rows
}

/// Grouping attribute for [`accuracy_by_stratum`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StratumKey {
    /// Distinct (extractor, URL) provenances per triple.
    Provenances,
    /// Distinct extractors per triple.
    Extractors,
    /// Distinct URLs per triple.
    Sources,
    /// Maximum extraction confidence per triple, in 0.1-wide buckets.
    Confidence,
    /// The triple's predicate.
    Predicate,
    /// Two-dimensional provenance-count x extractor-count table.
    ProvenancesByExtractors,
}

impl StratumKey {
    pub const ALL: [StratumKey; 6] = [
        StratumKey::Provenances,
        StratumKey::Extractors,
        StratumKey::Sources,
        StratumKey::Confidence,
        StratumKey::Predicate,
        StratumKey::ProvenancesByExtractors,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StratumKey::Provenances => "provenances",
            StratumKey::Extractors => "extractors",
            StratumKey::Sources => "sources",
            StratumKey::Confidence => "confidence",
            StratumKey::Predicate => "predicate",
            StratumKey::ProvenancesByExtractors => "provenances_extractors",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StratumRow {
    pub stratum: String,
    pub count: u64,
    pub accuracy: f64,
}

/// Counts above 10 are pooled into decade buckets.
fn count_bucket(n: u64) -> (u64, String) {
    if n <= 10 {
        (n, n.to_string())
    } else {
        let mut lo = 10u64;
        while n > lo * 10 {
            lo *= 10;
        }
        (lo + 1, format!("{}-{}", lo + 1, lo * 10))
    }
}

struct TripleSupport {
    provenances: u64,
    extractors: u64,
    sources: u64,
    max_confidence: Option<f64>,
}

fn support_per_triple(c: &Corpus) -> HashMap<&Triple, TripleSupport> {
    let mut provs: HashMap<&Triple, HashSet<crate::model::ProvenanceKey>> = HashMap::new();
    let mut exts: HashMap<&Triple, HashSet<&str>> = HashMap::new();
    let mut urls: HashMap<&Triple, HashSet<&str>> = HashMap::new();
    let mut conf: HashMap<&Triple, Option<f64>> = HashMap::new();
    for r in c.records() {
        provs
            .entry(&r.triple)
            .or_default()
            .insert(provenance_key(r, Granularity::ExtractorUrl));
        exts.entry(&r.triple).or_default().insert(&r.extractor);
        urls.entry(&r.triple).or_default().insert(&r.url);
        let e = conf.entry(&r.triple).or_insert(None);
        if let Some(cf) = r.confidence {
            *e = Some(e.map_or(cf, |prev: f64| prev.max(cf)));
        }
    }
    provs
        .into_iter()
        .map(|(t, p)| {
            let support = TripleSupport {
                provenances: p.len() as u64,
                extractors: exts[t].len() as u64,
                sources: urls[t].len() as u64,
                max_confidence: conf[t],
            };
            (t, support)
        })
        .collect()
}

/// Accuracy of labeled triples grouped by a support attribute. Unknown-labeled
/// triples never participate; empty strata are omitted.
pub fn accuracy_by_stratum(
    c: &Corpus,
    labels: &BTreeMap<Triple, Label>,
    key: StratumKey,
) -> Vec<StratumRow> {
    let support = support_per_triple(c);
    // (sort key, label) -> (labeled count, true count)
    let mut strata: BTreeMap<(u64, u64, String), (u64, u64)> = BTreeMap::new();
    for (t, sup) in &support {
        let truth = match labels.get(*t) {
            Some(Label::True) => true,
            Some(Label::False) => false,
            _ => continue,
        };
        let (sort, label) = match key {
            StratumKey::Provenances => {
                let (s, l) = count_bucket(sup.provenances);
                ((s, 0), l)
            }
            StratumKey::Extractors => {
                let (s, l) = count_bucket(sup.extractors);
                ((s, 0), l)
            }
            StratumKey::Sources => {
                let (s, l) = count_bucket(sup.sources);
                ((s, 0), l)
            }
            StratumKey::Confidence => match sup.max_confidence {
                None => ((0, 0), "none".to_string()),
                Some(cf) => {
                    let b = bucket_index(cf, 10);
                    let lo = b.min(9) as f64 / 10.0;
                    ((1 + b as u64, 0), format!("{:.1}-{:.1}", lo, lo + 0.1))
                }
            },
            StratumKey::Predicate => ((0, 0), t.predicate.clone()),
            StratumKey::ProvenancesByExtractors => {
                let (sp, lp) = count_bucket(sup.provenances);
                let (se, le) = count_bucket(sup.extractors);
                ((sp, se), format!("provenances {lp} | extractors {le}"))
            }
        };
        let entry = strata.entry((sort.0, sort.1, label)).or_insert((0, 0));
        entry.0 += 1;
        entry.1 += u64::from(truth);
    }
    strata
        .into_iter()
        .map(|((_, _, label), (count, trues))| StratumRow {
            stratum: label,
            count,
            accuracy: trues as f64 / count as f64,
        })
        .collect()
}

/// Retention when records below a confidence threshold are dropped (records
/// without confidence always pass).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConfidenceCoverageRow {
    pub threshold: f64,
    pub record_fraction: f64,
    pub triple_fraction: f64,
}

/// Sweeps `steps + 1` thresholds over [0, 1].
pub fn confidence_coverage(c: &Corpus, steps: usize) -> Vec<ConfidenceCoverageRow> {
    let records: Vec<Option<f64>> = c.records().iter().map(|r| r.confidence).collect();
    let mut triple_max: HashMap<&Triple, Option<f64>> = HashMap::new();
    let mut triple_unconditional: HashSet<&Triple> = HashSet::new();
    for r in c.records() {
        match r.confidence {
            None => {
                triple_unconditional.insert(&r.triple);
            }
            Some(cf) => {
                let e = triple_max.entry(&r.triple).or_insert(None);
                *e = Some(e.map_or(cf, |prev: f64| prev.max(cf)));
            }
        }
    }
    let n_triples = c.stats().unique_triples as f64;
    let n_records = records.len() as f64;
    (0..=steps)
        .map(|i| {
            let tau = i as f64 / steps.max(1) as f64;
            let kept_records = records
                .iter()
                .filter(|c| c.is_none_or(|cf| cf >= tau))
                .count() as f64;
            let kept_triples = triple_max
                .iter()
                .filter(|(t, cf)| {
                    triple_unconditional.contains(*t) || cf.is_some_and(|c| c >= tau)
                })
                .count()
                + triple_unconditional
                    .iter()
                    .filter(|t| !triple_max.contains_key(*t))
                    .count();
            ConfidenceCoverageRow {
                threshold: tau,
                record_fraction: if n_records == 0.0 {
                    1.0
                } else {
                    kept_records / n_records
                },
                triple_fraction: if n_triples == 0.0 {
                    1.0
                } else {
                    kept_triples as f64 / n_triples
                },
            }
        })
        .collect()
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).map_err(|e| Error::io(path, e))?,
    ))
}

pub fn write_calibration_csv(r: &CalibrationReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let mut go = || -> std::io::Result<()> {
        writeln!(w, "bucket_low,bucket_high,count,mean_predicted,real_probability")?;
        for b in &r.buckets {
            let mp = b.mean_predicted.map_or(String::new(), |x| format!("{x:.6}"));
            let real = b
                .real_probability
                .map_or(String::new(), |x| format!("{x:.6}"));
            writeln!(w, "{:.6},{:.6},{},{},{}", b.low, b.high, b.count, mp, real)?;
        }
        Ok(())
    };
    go().map_err(|e| Error::io(path, e))
}

pub fn write_pr_csv(r: &PrReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let mut go = || -> std::io::Result<()> {
        writeln!(w, "recall,precision")?;
        for p in &r.points {
            writeln!(w, "{:.6},{:.6}", p.recall, p.precision)?;
        }
        Ok(())
    };
    go().map_err(|e| Error::io(path, e))
}

pub fn write_kappa_csv(rows: &[KappaRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let mut go = || -> std::io::Result<()> {
        writeln!(w, "extractor_a,extractor_b,kappa")?;
        for r in rows {
            let k = r.kappa.map_or(String::new(), |x| format!("{x:.6}"));
            writeln!(
                w,
                "{},{},{}",
                csv_escape(&r.extractor_a),
                csv_escape(&r.extractor_b),
                k
            )?;
        }
        Ok(())
    };
    go().map_err(|e| Error::io(path, e))
}

pub fn write_strata_csv(rows: &[StratumRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let mut go = || -> std::io::Result<()> {
        writeln!(w, "stratum,count,accuracy")?;
        for r in rows {
            writeln!(w, "{},{},{:.6}", csv_escape(&r.stratum), r.count, r.accuracy)?;
        }
        Ok(())
    };
    go().map_err(|e| Error::io(path, e))
}

pub fn write_confidence_coverage_csv(
    rows: &[ConfidenceCoverageRow],
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let mut go = || -> std::io::Result<()> {
        writeln!(w, "threshold,record_fraction,triple_fraction")?;
        for r in rows {
            writeln!(
                w,
                "{:.6},{:.6},{:.6}",
                r.threshold, r.record_fraction, r.triple_fraction
            )?;
        }
        Ok(())
    };
    go().map_err(|e| Error::io(path, e))
}

/// Parses a probabilities TSV written by the pipeline back into predictions;
/// triples with an empty probability field map to `None`.
pub fn parse_predictions(
    path: impl AsRef<Path>,
) -> Result<(BTreeMap<Triple, Option<f64>>, u64)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = std::io::BufReader::new(file);
    let mut preds = BTreeMap::new();
    let mut skipped = 0u64;
    use std::io::BufRead;
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            skipped += 1;
            continue;
        }
        let prob = if fields[3].is_empty() {
            None
        } else {
            match fields[3].parse::<f64>() {
                Ok(p) if p.is_finite() => Some(p),
                _ => {
                    skipped += 1;
                    continue;
                }
            }
        };
        preds.insert(
            Triple::new(
                crate::ingest::unescape_field(fields[0]).into_owned(),
                crate::ingest::unescape_field(fields[1]).into_owned(),
                crate::ingest::unescape_field(fields[2]).into_owned(),
            ),
            prob,
        );
    }
    Ok((preds, skipped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ExtractionRecord;
    use rand::{Rng, SeedableRng};

    fn t(i: usize) -> Triple {
        Triple::new(format!("s{i}"), "p", "o")
    }

    fn preds_labels(
        rows: &[(f64, Label)],
    ) -> (BTreeMap<Triple, f64>, BTreeMap<Triple, Label>) {
        let mut preds = BTreeMap::new();
        let mut labels = BTreeMap::new();
        for (i, (p, l)) in rows.iter().enumerate() {
            preds.insert(t(i), *p);
            labels.insert(t(i), *l);
        }
        (preds, labels)
    }

    #[test]
    fn perfectly_calibrated_ones() {
        let rows: Vec<(f64, Label)> = (0..10).map(|_| (1.0, Label::True)).collect();
        let (preds, labels) = preds_labels(&rows);
        let r = calibration(&preds, &labels, 20).unwrap();
        assert_eq!(r.buckets.len(), 21);
        let occupied: Vec<_> = r.buckets.iter().filter(|b| b.count > 0).collect();
        assert_eq!(occupied.len(), 1);
        assert_eq!(occupied[0].low, 1.0);
        assert_eq!(occupied[0].real_probability, Some(1.0));
        assert_eq!(r.deviation, 0.0);
        assert_eq!(r.weighted_deviation, 0.0);
    }

    #[test]
    fn bucket_assignment() {
        assert_eq!(bucket_index(0.05, 20), 1);
        assert_eq!(bucket_index(0.0, 20), 0);
        assert_eq!(bucket_index(1.0, 20), 20);
        assert_eq!(bucket_index(0.999, 20), 19);
    }

    #[test]
    fn no_participants_is_an_error() {
        let (preds, _) = preds_labels(&[(0.5, Label::True)]);
        let labels: BTreeMap<Triple, Label> = [(t(0), Label::Unknown)].into_iter().collect();
        assert!(matches!(
            calibration(&preds, &labels, 20),
            Err(Error::NoParticipants)
        ));
    }

    #[test]
    fn deviation_arithmetic() {
        // one bucket: mean_pred 0.8 vs real 0.6 -> 0.04 both ways
        let mk = |buckets: Vec<CalibrationBucket>| CalibrationReport {
            buckets,
            deviation: 0.0,
            weighted_deviation: 0.0,
            l: 20,
        };
        let one = mk(vec![CalibrationBucket {
            low: 0.8,
            high: 0.85,
            count: 5,
            mean_predicted: Some(0.8),
            real_probability: Some(0.6),
        }]);
        assert!((deviation(&one) - 0.04).abs() < 1e-12);
        assert!((weighted_deviation(&one) - 0.04).abs() < 1e-12);

        // counts 1 and 9 with losses 0.04 and 0.0
        let two = mk(vec![
            CalibrationBucket {
                low: 0.0,
                high: 0.05,
                count: 1,
                mean_predicted: Some(0.2),
                real_probability: Some(0.0),
            },
            CalibrationBucket {
                low: 0.9,
                high: 0.95,
                count: 9,
                mean_predicted: Some(0.9),
                real_probability: Some(0.9),
            },
        ]);
        assert!((deviation(&two) - 0.02).abs() < 1e-12);
        assert!((weighted_deviation(&two) - 0.004).abs() < 1e-12);
    }

    #[test]
    fn statistical_calibration_of_bernoulli_draws() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut preds = BTreeMap::new();
        let mut labels = BTreeMap::new();
        for i in 0..100_000 {
            let p: f64 = rng.random_range(0.0..1.0);
            let tr = Triple::new(format!("s{i}"), "p", "o");
            preds.insert(tr.clone(), p);
            labels.insert(
                tr,
                if rng.random_bool(p) {
                    Label::True
                } else {
                    Label::False
                },
            );
        }
        let r = calibration(&preds, &labels, 20).unwrap();
        assert!(
            r.weighted_deviation <= 0.01,
            "wdev = {}",
            r.weighted_deviation
        );
    }

    #[test]
    fn pr_all_true_is_unit_area() {
        let rows: Vec<(f64, Label)> = (0..5).map(|i| (0.1 * i as f64, Label::True)).collect();
        let (preds, labels) = preds_labels(&rows);
        let r = pr_curve(&preds, &labels).unwrap();
        assert!((r.auc_pr - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn pr_three_point_curve() {
        let (preds, labels) = preds_labels(&[
            (0.9, Label::True),
            (0.8, Label::False),
            (0.7, Label::True),
        ]);
        let r = pr_curve(&preds, &labels).unwrap();
        let expect = [
            PrPoint { recall: 0.5, precision: 1.0 },
            PrPoint { recall: 0.5, precision: 0.5 },
            PrPoint { recall: 1.0, precision: 2.0 / 3.0 },
        ];
        assert_eq!(r.points.len(), 3);
        for (a, b) in r.points.iter().zip(&expect) {
            assert!((a.recall - b.recall).abs() < 1e-12);
            assert!((a.precision - b.precision).abs() < 1e-12);
        }
        assert!((r.auc_pr - 19.0 / 24.0).abs() <= 1e-12);
    }

    #[test]
    fn pr_ties_form_one_group() {
        let (preds, labels) = preds_labels(&[(0.5, Label::True), (0.5, Label::False)]);
        let r = pr_curve(&preds, &labels).unwrap();
        assert_eq!(r.points.len(), 1);
        assert!((r.points[0].recall - 1.0).abs() < 1e-12);
        assert!((r.points[0].precision - 0.5).abs() < 1e-12);
        assert!((r.auc_pr - 0.5).abs() < 1e-12);
    }

    fn set(range: std::ops::Range<usize>) -> HashSet<Triple> {
        range.map(t).collect()
    }

    #[test]
    fn kappa_constructed_cases() {
        let kb = set(0..100);
        // independence: |t1 ∩ t2| == |t1||t2|/|kb|
        let t1 = set(0..50);
        let t2 = set(25..75); // intersection 25 == 50*50/100
        assert!(kappa(&t1, &t2, &kb).unwrap().abs() < 1e-12);
        // identical halves -> 1/3
        let half = set(0..50);
        assert!((kappa(&half, &half, &kb).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        // disjoint halves -> -1/3
        let other = set(50..100);
        assert!((kappa(&half, &other, &kb).unwrap() + 1.0 / 3.0).abs() < 1e-12);
        // symmetry and positivity for t1 == t2
        assert_eq!(
            kappa(&half, &other, &kb).unwrap(),
            kappa(&other, &half, &kb).unwrap()
        );
        let small = set(0..7);
        assert!(kappa(&small, &small, &kb).unwrap() > 0.0);
        // degenerate: t1 == t2 == kb
        assert!(matches!(
            kappa(&kb, &kb, &kb),
            Err(Error::DegenerateKappa)
        ));
    }

    fn rec(s: &str, o: &str, ext: &str, url: &str, conf: Option<f64>) -> ExtractionRecord {
        ExtractionRecord {
            triple: Triple::new(s, "p", o),
            extractor: ext.into(),
            url: url.into(),
            pattern: String::new(),
            confidence: conf,
        }
    }

    #[test]
    fn strata_by_extractor_count() {
        // triples from >= 2 extractors are true, others false
        let corpus = Corpus::from_records(vec![
            rec("a", "o", "E1", "u1", None),
            rec("a", "o", "E2", "u1", None),
            rec("b", "o", "E1", "u2", None),
        ]);
        let mut labels = BTreeMap::new();
        labels.insert(Triple::new("a", "p", "o"), Label::True);
        labels.insert(Triple::new("b", "p", "o"), Label::False);
        let rows = accuracy_by_stratum(&corpus, &labels, StratumKey::Extractors);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].stratum, "1");
        assert_eq!(rows[0].accuracy, 0.0);
        assert_eq!(rows[1].stratum, "2");
        assert_eq!(rows[1].accuracy, 1.0);
    }

    #[test]
    fn strata_by_predicate() {
        let mut records = Vec::new();
        let mut labels = BTreeMap::new();
        for i in 0..10 {
            let tr = Triple::new(format!("s{i}"), "badpred", "o");
            labels.insert(tr.clone(), if i < 2 { Label::True } else { Label::False });
            records.push(ExtractionRecord {
                triple: tr,
                extractor: "E".into(),
                url: "u".into(),
                pattern: String::new(),
                confidence: None,
            });
        }
        for i in 0..10 {
            let tr = Triple::new(format!("s{i}"), "goodpred", "o");
            labels.insert(tr.clone(), if i < 9 { Label::True } else { Label::False });
            records.push(ExtractionRecord {
                triple: tr,
                extractor: "E".into(),
                url: "u".into(),
                pattern: String::new(),
                confidence: None,
            });
        }
        let corpus = Corpus::from_records(records);
        let rows = accuracy_by_stratum(&corpus, &labels, StratumKey::Predicate);
        let bad = rows.iter().find(|r| r.stratum == "badpred").unwrap();
        let good = rows.iter().find(|r| r.stratum == "goodpred").unwrap();
        assert!((bad.accuracy - 0.2).abs() < 1e-12);
        assert!((good.accuracy - 0.9).abs() < 1e-12);
    }

    // With independent extractor errors, triples seen by more extractors are
    // more likely true; the strata accuracies rise in at least 8 of 10 seeds.
    #[test]
    fn extractor_strata_rise_with_independent_errors() {
        let mut wins = 0;
        for seed in 0u64..10 {
            let out = crate::synth::generate(&crate::synth::SynthConfig {
                n_items: 1500,
                n_sources: 600,
                shared_error_rate: 0.0,
                seed,
                ..crate::synth::SynthConfig::default()
            })
            .unwrap();
            let gs = crate::gold::GoldStandard::from_kb(out.kb.iter().cloned());
            let (labels, _) = crate::gold::label_corpus(&gs, &out.corpus);
            let rows = accuracy_by_stratum(&out.corpus, &labels, StratumKey::Extractors);
            let accs: Vec<f64> = rows
                .iter()
                .filter(|r| r.count >= 30)
                .map(|r| r.accuracy)
                .collect();
            assert!(accs.len() >= 2, "not enough occupied strata");
            if accs.windows(2).all(|w| w[0] <= w[1] + 1e-12) {
                wins += 1;
            }
        }
        assert!(wins >= 8, "monotone in only {wins}/10 seeds");
    }

    #[test]
    fn unknown_labels_never_influence_metrics() {
        let (mut preds, mut labels) = preds_labels(&[
            (0.9, Label::True),
            (0.2, Label::False),
        ]);
        let base_cal = calibration(&preds, &labels, 10).unwrap();
        let base_pr = pr_curve(&preds, &labels).unwrap();
        // add unknown-labeled triples
        preds.insert(t(10), 0.99);
        labels.insert(t(10), Label::Unknown);
        let cal = calibration(&preds, &labels, 10).unwrap();
        let pr = pr_curve(&preds, &labels).unwrap();
        assert_eq!(base_cal.weighted_deviation, cal.weighted_deviation);
        assert_eq!(base_pr.auc_pr, pr.auc_pr);
    }

    #[test]
    fn count_buckets_pool_decades() {
        assert_eq!(count_bucket(7).1, "7");
        assert_eq!(count_bucket(10).1, "10");
        assert_eq!(count_bucket(11).1, "11-100");
        assert_eq!(count_bucket(100).1, "11-100");
        assert_eq!(count_bucket(101).1, "101-1000");
    }

    #[test]
    fn confidence_coverage_sweep() {
        let corpus = Corpus::from_records(vec![
            rec("a", "o", "E", "u1", Some(0.9)),
            rec("b", "o", "E", "u2", Some(0.05)),
            rec("c", "o", "E", "u3", None),
        ]);
        let rows = confidence_coverage(&corpus, 10);
        assert_eq!(rows.len(), 11);
        assert_eq!(rows[0].record_fraction, 1.0);
        let at_01 = &rows[1];
        assert!((at_01.record_fraction - 2.0 / 3.0).abs() < 1e-12);
        assert!((at_01.triple_fraction - 2.0 / 3.0).abs() < 1e-12);
        let last = rows.last().unwrap();
        assert!((last.record_fraction - 1.0 / 3.0).abs() < 1e-12);
    }
}
